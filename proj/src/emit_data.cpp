#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "greenberg/emit.hpp"
#include "greenberg/errors.hpp"

namespace greenberg {

namespace {

void put_row(std::ostream& out, const std::string& row) {
  out << row;
  if (!out) throw IoError("write_csv: sink rejected a row");
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) row += ',';
    row += c;
    first = false;
  }
  row += '\n';
  return row;
}

std::string idx(std::size_t i) { return std::to_string(i); }

Json optional_number(const std::optional<double>& x) {
  return x ? Json(*x) : Json(nullptr);
}

Json optional_index(const std::optional<std::size_t>& x) {
  return x ? Json(*x) : Json(nullptr);
}

Json states_json(const std::vector<TrafficState>& states) {
  Json k = Json::array();
  Json q = Json::array();
  Json v = Json::array();
  for (const auto& s : states) {
    k.push_back(s.k);
    q.push_back(s.q);
    v.push_back(s.v);
  }
  Json out = Json::object();
  out["k"] = std::move(k);
  out["q"] = std::move(q);
  out["v"] = std::move(v);
  return out;
}

std::vector<TrafficState> states_from_json(const Json& data) {
  const auto& k = data.at("k");
  const auto& q = data.at("q");
  const auto& v = data.at("v");
  if (k.size() != q.size() || k.size() != v.size()) {
    throw ArgumentError("state arrays k, q, v differ in length");
  }
  std::vector<TrafficState> states(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    states[i] = {k[i].get<double>(), q[i].get<double>(), v[i].get<double>()};
  }
  return states;
}

Json document(std::string_view kind, Json settings, Json data) {
  Json doc = Json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = kind;
  doc["settings"] = std::move(settings);
  doc["data"] = std::move(data);
  return doc;
}

void require_kind(const Json& doc, std::string_view kind) {
  if (doc.value("schema_version", "") != kSchemaVersion) {
    throw ArgumentError("unsupported schema_version");
  }
  if (doc.value("kind", "") != kind) {
    throw ArgumentError("expected a '" + std::string(kind) + "' document");
  }
}

Json orbit_data(const Orbit& orbit) {
  Json data = states_json(orbit.states);
  data["escaped"] = optional_index(orbit.escaped);
  data["escape_density"] = optional_number(orbit.escape_density);
  return data;
}

Json orbit_settings(const Orbit& orbit) {
  Json s = Json::object();
  s["v0"] = orbit.params.v0;
  s["kj"] = orbit.params.kj;
  s["k0"] = orbit.k0;
  s["n"] = orbit.steps;
  return s;
}

Orbit orbit_from_parts(const Json& settings, const Json& data) {
  Orbit orbit;
  orbit.params = {.v0 = settings.at("v0").get<double>(),
                  .kj = settings.at("kj").get<double>()};
  orbit.k0 = settings.at("k0").get<double>();
  orbit.steps = settings.at("n").get<std::size_t>();
  orbit.states = states_from_json(data);
  if (!data.at("escaped").is_null()) orbit.escaped = data["escaped"].get<std::size_t>();
  if (!data.at("escape_density").is_null()) {
    orbit.escape_density = data["escape_density"].get<double>();
  }
  return orbit;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto [end, ec] =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc{}) throw IoError("format_number: conversion failed");
  return {buf, end};
}

double parse_number(std::string_view text) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw ArgumentError("parse_number: not a number: '" + std::string(text) + "'");
  }
  return x;
}

DiagramSet make_diagram_set(std::span<const double> v0_values, double kj,
                            std::size_t samples) {
  DiagramSet set{.kj = kj, .samples = samples, .curves = {}};
  for (const double v0 : v0_values) {
    set.curves.push_back({v0, diagram_samples({.v0 = v0, .kj = kj}, samples)});
  }
  return set;
}

// --- CSV -----------------------------------------------------------------

std::size_t write_csv(const Orbit& orbit, std::ostream& out) {
  put_row(out, "i,k,q,v,escaped\n");
  const std::size_t n = orbit.states.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = orbit.states[i];
    const bool terminal_escape = orbit.escaped && i + 1 == n;
    put_row(out, csv_row({idx(i), format_number(s.k), format_number(s.q),
                          format_number(s.v), terminal_escape ? "1" : "0"}));
  }
  return n;
}

std::size_t write_csv(const BifurcationScan& scan, std::ostream& out) {
  put_row(out, "v0,sample_index,k,q,v,detected_period\n");
  std::size_t rows = 0;
  for (const auto& pt : scan.points) {
    const std::string v0 = format_number(pt.v0);
    // 0 marks aperiodic (or escaped) points.
    const std::string period = idx(pt.detected_period.value_or(0));
    for (std::size_t j = 0; j < pt.samples.size(); ++j) {
      const auto& s = pt.samples[j];
      put_row(out, csv_row({v0, idx(j), format_number(s.k), format_number(s.q),
                            format_number(s.v), period}));
      ++rows;
    }
  }
  return rows;
}

std::size_t write_csv(const LyapunovCurve& curve, std::ostream& out) {
  put_row(out, "v0,lambda,n_terms,skipped_terms\n");
  for (const auto& pt : curve.points) {
    put_row(out, csv_row({format_number(pt.v0),
                          pt.lambda ? format_number(*pt.lambda) : std::string{},
                          idx(pt.n_terms), idx(pt.skipped_terms)}));
  }
  return curve.points.size();
}

std::size_t write_csv(const SensitivityResult& result, std::ostream& out) {
  put_row(out, "i,k_a,k_b,separation\n");
  for (std::size_t i = 0; i < result.separation.size(); ++i) {
    put_row(out, csv_row({idx(i), format_number(result.orbit_a.states[i].k),
                          format_number(result.orbit_b.states[i].k),
                          format_number(result.separation[i])}));
  }
  return result.separation.size();
}

std::size_t write_csv(const DiagramSet& diagrams, std::ostream& out) {
  put_row(out, "v0,i,k,q,v\n");
  std::size_t rows = 0;
  for (const auto& c : diagrams.curves) {
    const std::string v0 = format_number(c.v0);
    for (std::size_t i = 0; i < c.states.size(); ++i) {
      const auto& s = c.states[i];
      put_row(out, csv_row({v0, idx(i), format_number(s.k), format_number(s.q),
                            format_number(s.v)}));
      ++rows;
    }
  }
  return rows;
}

CsvTable read_csv(std::istream& in) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("read_csv: missing header row");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ArgumentError("read_csv: row width does not match header");
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

// --- JSON ----------------------------------------------------------------

Json to_json(const Orbit& orbit) {
  return document("orbit", orbit_settings(orbit), orbit_data(orbit));
}

Orbit orbit_from_json(const Json& doc) {
  require_kind(doc, "orbit");
  return orbit_from_parts(doc.at("settings"), doc.at("data"));
}

Json to_json(const BifurcationScan& scan) {
  Json s = Json::object();
  s["v0_min"] = scan.points.empty() ? Json(nullptr) : Json(scan.points.front().v0);
  s["v0_max"] = scan.points.empty() ? Json(nullptr) : Json(scan.points.back().v0);
  s["steps"] = scan.points.size();
  s["k0"] = scan.settings.k0;
  s["kj"] = scan.kj;
  s["n_total"] = scan.settings.n_total;
  s["n_keep"] = scan.settings.n_keep;
  s["tolerance"] = scan.settings.tolerance;

  Json points = Json::array();
  for (const auto& pt : scan.points) {
    Json p = Json::object();
    p["v0"] = pt.v0;
    p["detected_period"] = optional_index(pt.detected_period);
    p["escaped"] = pt.escaped;
    const Json cols = states_json(pt.samples);
    for (const auto& [key, value] : cols.items()) p[key] = value;
    points.push_back(std::move(p));
  }
  Json data = Json::object();
  data["points"] = std::move(points);
  return document("bifurcation", std::move(s), std::move(data));
}

BifurcationScan scan_from_json(const Json& doc) {
  require_kind(doc, "bifurcation");
  const Json& s = doc.at("settings");
  BifurcationScan scan;
  scan.kj = s.at("kj").get<double>();
  scan.settings = {.k0 = s.at("k0").get<double>(),
                   .n_total = s.at("n_total").get<std::size_t>(),
                   .n_keep = s.at("n_keep").get<std::size_t>(),
                   .tolerance = s.at("tolerance").get<double>()};
  for (const auto& p : doc.at("data").at("points")) {
    BifurcationPoint pt;
    pt.v0 = p.at("v0").get<double>();
    if (!p.at("detected_period").is_null()) {
      pt.detected_period = p["detected_period"].get<std::size_t>();
    }
    pt.escaped = p.at("escaped").get<bool>();
    pt.samples = states_from_json(p);
    scan.points.push_back(std::move(pt));
  }
  return scan;
}

Json to_json(const LyapunovCurve& curve) {
  Json s = Json::object();
  s["v0_min"] = curve.points.empty() ? Json(nullptr) : Json(curve.points.front().v0);
  s["v0_max"] = curve.points.empty() ? Json(nullptr) : Json(curve.points.back().v0);
  s["steps"] = curve.points.size();
  s["k0"] = curve.settings.k0;
  s["kj"] = curve.kj;
  s["n"] = curve.settings.n;
  s["n_transient"] = curve.settings.n_transient;

  Json v0 = Json::array(), lambda = Json::array(), n_terms = Json::array(),
       skipped = Json::array();
  for (const auto& pt : curve.points) {
    v0.push_back(pt.v0);
    lambda.push_back(optional_number(pt.lambda));
    n_terms.push_back(pt.n_terms);
    skipped.push_back(pt.skipped_terms);
  }
  Json data = Json::object();
  data["v0"] = std::move(v0);
  data["lambda"] = std::move(lambda);
  data["n_terms"] = std::move(n_terms);
  data["skipped_terms"] = std::move(skipped);
  return document("lyapunov", std::move(s), std::move(data));
}

LyapunovCurve curve_from_json(const Json& doc) {
  require_kind(doc, "lyapunov");
  const Json& s = doc.at("settings");
  const Json& d = doc.at("data");
  LyapunovCurve curve;
  curve.kj = s.at("kj").get<double>();
  curve.settings = {.k0 = s.at("k0").get<double>(),
                    .n = s.at("n").get<std::size_t>(),
                    .n_transient = s.at("n_transient").get<std::size_t>()};
  const auto& v0 = d.at("v0");
  for (std::size_t i = 0; i < v0.size(); ++i) {
    LyapunovPoint pt;
    pt.v0 = v0[i].get<double>();
    if (!d.at("lambda")[i].is_null()) pt.lambda = d["lambda"][i].get<double>();
    pt.n_terms = d.at("n_terms")[i].get<std::size_t>();
    pt.skipped_terms = d.at("skipped_terms")[i].get<std::size_t>();
    curve.points.push_back(pt);
  }
  return curve;
}

Json to_json(const SensitivityResult& result) {
  Json s = orbit_settings(result.orbit_a);
  s["delta"] = result.orbit_b.k0 - result.orbit_a.k0;
  s["k0_b"] = result.orbit_b.k0;
  s["threshold"] = result.threshold;

  Json data = Json::object();
  data["orbit_a"] = orbit_data(result.orbit_a);
  data["orbit_b"] = orbit_data(result.orbit_b);
  data["separation"] = result.separation;
  data["first_divergence_index"] = optional_index(result.first_divergence_index);
  return document("sensitivity", std::move(s), std::move(data));
}

SensitivityResult sensitivity_from_json(const Json& doc) {
  require_kind(doc, "sensitivity");
  const Json& s = doc.at("settings");
  const Json& d = doc.at("data");
  SensitivityResult r;
  r.orbit_a = orbit_from_parts(s, d.at("orbit_a"));
  Json settings_b = s;
  settings_b["k0"] = s.at("k0_b");
  r.orbit_b = orbit_from_parts(settings_b, d.at("orbit_b"));
  r.threshold = s.at("threshold").get<double>();
  r.separation = d.at("separation").get<std::vector<double>>();
  if (!d.at("first_divergence_index").is_null()) {
    r.first_divergence_index = d["first_divergence_index"].get<std::size_t>();
  }
  return r;
}

Json to_json(const FixedPointReport& report, const StabilityCheck& check, double kj) {
  Json s = Json::object();
  s["v0"] = report.v0;
  s["kj"] = kj;
  Json data = Json::object();
  data["k_star"] = report.k_star;
  data["multiplier"] = report.multiplier;
  data["classification"] = to_string(report.classification);
  data["exponentially_stable"] = report.exponentially_stable;
  if (check.certificate) {
    Json cert = Json::object();
    cert["m"] = check.certificate->m;
    cert["beta"] = check.certificate->beta;
    data["certificate"] = std::move(cert);
  } else {
    data["certificate"] = nullptr;
  }
  data["period_doubling_threshold"] = period_doubling_threshold();
  return document("fixed_point", std::move(s), std::move(data));
}

Json to_json(const DiagramSet& diagrams) {
  Json s = Json::object();
  s["kj"] = diagrams.kj;
  s["samples"] = diagrams.samples;
  Json v0s = Json::array();
  Json curves = Json::array();
  for (const auto& c : diagrams.curves) {
    v0s.push_back(c.v0);
    Json curve = Json::object();
    curve["v0"] = c.v0;
    const Json cols = states_json(c.states);
    for (const auto& [key, value] : cols.items()) curve[key] = value;
    curves.push_back(std::move(curve));
  }
  s["v0"] = std::move(v0s);
  Json data = Json::object();
  data["curves"] = std::move(curves);
  return document("diagram", std::move(s), std::move(data));
}

DiagramSet diagrams_from_json(const Json& doc) {
  require_kind(doc, "diagram");
  DiagramSet set;
  set.kj = doc.at("settings").at("kj").get<double>();
  set.samples = doc.at("settings").at("samples").get<std::size_t>();
  for (const auto& c : doc.at("data").at("curves")) {
    set.curves.push_back({c.at("v0").get<double>(), states_from_json(c)});
  }
  return set;
}

std::size_t write_json(const Json& doc, std::ostream& out) {
  const std::string text = doc.dump(2) + "\n";
  out << text;
  if (!out) throw IoError("write_json: sink rejected the document");
  return text.size();
}

Json read_json(std::istream& in) {
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ArgumentError(std::string("read_json: ") + e.what());
  }
}

}  // namespace greenberg
