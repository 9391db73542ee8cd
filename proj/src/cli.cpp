#include "greenberg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "greenberg/analysis.hpp"
#include "greenberg/emit.hpp"
#include "greenberg/errors.hpp"
#include "greenberg/map_dynamics.hpp"

namespace greenberg::cli {

namespace {

// Defaults reproduce the published experiments.
constexpr double kSweepMin = 0.05;
constexpr double kSweepMax = 2.7;
constexpr std::size_t kSweepSteps = 1000;
constexpr std::size_t kDiagramSamples = 300;
constexpr std::size_t kDiagramCurves = 5;

const std::set<std::string> kSingleParameter = {"orbit", "cobweb", "classify",
                                                "sensitivity"};
const std::set<std::string> kSweeps = {"bifurcation", "lyapunov", "repro"};

std::set<std::string> allowed_formats(const std::string& sub) {
  if (sub == "classify") return {"text", "json"};
  if (sub == "cobweb") return {"svg"};
  if (sub == "repro") return {};
  return {"csv", "json", "svg"};
}

std::vector<std::string> default_formats(const std::string& sub) {
  if (sub == "classify") return {"text"};
  if (sub == "cobweb") return {"svg"};
  if (sub == "bifurcation" || sub == "lyapunov") return {"csv", "svg"};
  return {"csv"};
}

std::string default_stem(const std::string& sub) {
  if (sub == "bifurcation" || sub == "lyapunov") return sub;
  if (sub == "repro") return "repro";
  return "-";
}

// Routes each format either to stdout or to `<stem><suffix>.<ext>`.
class Emitter {
 public:
  Emitter(std::string stem, std::ostream& out) : stem_(std::move(stem)), out_(out) {}

  bool to_stdout() const { return stem_ == "-"; }

  void emit(std::string_view ext, const std::function<void(std::ostream&)>& write,
            std::string_view suffix = {}) {
    if (to_stdout()) {
      write(out_);
      if (!out_) throw IoError("failed writing to standard output");
      return;
    }
    const std::string path = stem_ + std::string(suffix) + "." + std::string(ext);
    std::ofstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    write(file);
    file.flush();
    if (!file) throw IoError("failed writing '" + path + "'");
    written_.push_back(path);
  }

  // CSV has no room for settings, so file output gets a JSON sidecar.
  void emit_csv(const Json& doc, const std::function<void(std::ostream&)>& write,
                std::string_view suffix = {}) {
    emit("csv", write, suffix);
    if (to_stdout()) return;
    Json sidecar = Json::object();
    sidecar["schema_version"] = doc.at("schema_version");
    sidecar["kind"] = doc.at("kind");
    sidecar["settings"] = doc.at("settings");
    emit("settings.json", [&](std::ostream& os) { write_json(sidecar, os); }, suffix);
  }

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::string stem_;
  std::ostream& out_;
  std::vector<std::string> written_;
};

PlotSpec spec_for(PlotKind kind, const Json& doc) {
  PlotSpec spec = default_spec(kind);
  spec.settings = doc.at("settings");
  return spec;
}

void warn_escape(const Orbit& orbit, std::ostream& err) {
  if (!orbit.escaped) return;
  err << "warning: orbit from k0 = " << format_number(orbit.k0)
      << " left (0, kj] at iteration " << *orbit.escaped << " (density "
      << format_number(orbit.escape_density.value_or(0.0)) << "); output truncated\n";
}

void emit_orbit(const Orbit& orbit, const std::vector<std::string>& formats,
                Emitter& emitter) {
  const Json doc = to_json(orbit);
  for (const auto& f : formats) {
    if (f == "csv") {
      emitter.emit_csv(doc, [&](std::ostream& os) { write_csv(orbit, os); });
    } else if (f == "json") {
      emitter.emit("json", [&](std::ostream& os) { write_json(doc, os); });
    } else if (f == "svg") {
      const std::string svg = render_svg(spec_for(PlotKind::kCobwebTriptych, doc), orbit);
      emitter.emit("svg", [&](std::ostream& os) { os << svg; });
    }
  }
}

void emit_scan(const BifurcationScan& scan, const std::vector<std::string>& formats,
               Emitter& emitter) {
  const Json doc = to_json(scan);
  for (const auto& f : formats) {
    if (f == "csv") {
      emitter.emit_csv(doc, [&](std::ostream& os) { write_csv(scan, os); });
    } else if (f == "json") {
      emitter.emit("json", [&](std::ostream& os) { write_json(doc, os); });
    } else if (f == "svg") {
      PlotSpec spec = spec_for(PlotKind::kBifurcation, doc);
      spec.title = "k - v0 bifurcation diagram";
      const std::string density_svg = render_svg(spec, scan);
      emitter.emit("svg", [&](std::ostream& os) { os << density_svg; });
      if (emitter.to_stdout()) continue;
      spec.title = "v - v0 bifurcation diagram";
      spec.y_label = "velocity v";
      spec.variable = PlotVariable::kVelocity;
      const std::string velocity_svg = render_svg(spec, scan);
      emitter.emit("svg", [&](std::ostream& os) { os << velocity_svg; }, "-velocity");
    }
  }
}

void emit_curve(const LyapunovCurve& curve, const std::vector<std::string>& formats,
                Emitter& emitter) {
  const Json doc = to_json(curve);
  for (const auto& f : formats) {
    if (f == "csv") {
      emitter.emit_csv(doc, [&](std::ostream& os) { write_csv(curve, os); });
    } else if (f == "json") {
      emitter.emit("json", [&](std::ostream& os) { write_json(doc, os); });
    } else if (f == "svg") {
      const std::string svg = render_svg(spec_for(PlotKind::kLyapunov, doc), curve);
      emitter.emit("svg", [&](std::ostream& os) { os << svg; });
    }
  }
}

void emit_sensitivity(const SensitivityResult& r, const std::vector<std::string>& formats,
                      Emitter& emitter) {
  const Json doc = to_json(r);
  for (const auto& f : formats) {
    if (f == "csv") {
      emitter.emit_csv(doc, [&](std::ostream& os) { write_csv(r, os); });
    } else if (f == "json") {
      emitter.emit("json", [&](std::ostream& os) { write_json(doc, os); });
    } else if (f == "svg") {
      const std::string svg = render_svg(spec_for(PlotKind::kSensitivity, doc), r);
      emitter.emit("svg", [&](std::ostream& os) { os << svg; });
    }
  }
}

void emit_diagrams(const DiagramSet& set, const std::vector<std::string>& formats,
                   Emitter& emitter) {
  const Json doc = to_json(set);
  for (const auto& f : formats) {
    if (f == "csv") {
      emitter.emit_csv(doc, [&](std::ostream& os) { write_csv(set, os); });
    } else if (f == "json") {
      emitter.emit("json", [&](std::ostream& os) { write_json(doc, os); });
    } else if (f == "svg") {
      const std::string svg = render_svg(spec_for(PlotKind::kFundamentalDiagrams, doc), set);
      emitter.emit("svg", [&](std::ostream& os) { os << svg; });
    }
  }
}

std::size_t count_escaped(const BifurcationScan& scan) {
  return static_cast<std::size_t>(std::count_if(
      scan.points.begin(), scan.points.end(), [](const auto& p) { return p.escaped; }));
}

std::size_t count_missing(const LyapunovCurve& curve) {
  return static_cast<std::size_t>(std::count_if(
      curve.points.begin(), curve.points.end(), [](const auto& p) { return !p.lambda; }));
}

ScanSettings scan_settings(const RunConfig& c) {
  return {.k0 = c.k0.value_or(kScanInitialDensity),
          .n_total = c.n.value_or(kScanTotal),
          .n_keep = c.keep.value_or(kScanKeep),
          .tolerance = c.tolerance.value_or(kPeriodTolerance)};
}

LyapunovSettings lyapunov_settings(const RunConfig& c) {
  return {.k0 = c.k0.value_or(0.1),
          .n = c.n.value_or(kLyapunovTerms),
          .n_transient = c.transient.value_or(kLyapunovTransient)};
}

void write_classify_text(const FixedPointReport& r, const StabilityCheck& check,
                         std::ostream& os) {
  os << "v0: " << format_number(r.v0) << "\n"
     << "fixed point k*: " << format_number(r.k_star) << "\n"
     << "multiplier: " << format_number(r.multiplier) << "\n"
     << "classification: " << to_string(r.classification) << "\n"
     << "exponentially stable: " << (r.exponentially_stable ? "yes" : "no") << "\n";
  if (check.certificate) {
    os << "certificate: M = " << format_number(check.certificate->m)
       << ", beta = " << format_number(check.certificate->beta) << "\n";
  }
  os << "period-doubling threshold: " << format_number(period_doubling_threshold()) << "\n";
}

struct Experiment {
  const char* name;
  double v0;
  double k0;
};

// The eight single-orbit experiments, in figure order.
constexpr Experiment kExperiments[] = {
    {"fig04_v0_0.25", 0.25, 0.25},   {"fig05_v0_1.25", 1.25, 0.1},
    {"fig06_v0_1.75", 1.75, 0.1},    {"fig07_v0_2.25", 2.25, 0.35},
    {"fig08_v0_2.405", 2.405, 0.275}, {"fig09_v0_2.48", 2.48, 0.23},
    {"fig10_v0_2.585_k0_0.1", 2.585, 0.1}, {"fig11_v0_2.585_k0_0.101", 2.585, 0.101},
};

int run_repro(const RunConfig& c, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  const fs::path dir = c.out.value_or("repro");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  const std::size_t n = c.n.value_or(kDefaultIterations);
  const std::size_t sweep_steps = c.steps.value_or(kSweepSteps);
  const std::vector<std::string> data_and_plot = {"csv", "json", "svg"};
  Json manifest = Json::object();
  manifest["schema_version"] = kSchemaVersion;
  manifest["kind"] = "manifest";
  Json settings = Json::object();
  settings["kj"] = c.kj;
  settings["n"] = n;
  settings["steps"] = sweep_steps;
  manifest["settings"] = settings;
  Json entries = Json::array();
  auto stem = [&](const std::string& name) { return (dir / name).string(); };

  {
    Emitter e(stem("fig02_diagram"), out);
    const double v0[] = {1.0};
    emit_diagrams(make_diagram_set(v0, c.kj, kDiagramSamples), data_and_plot, e);
    entries.push_back({{"figure", "fig02"}, {"files", e.written()}});
  }
  {
    Emitter e(stem("fig03_diagrams"), out);
    const double v0[] = {0.5, 1.0, 1.5, 2.0, 2.5};
    emit_diagrams(make_diagram_set(v0, c.kj, kDiagramSamples), data_and_plot, e);
    entries.push_back({{"figure", "fig03"}, {"files", e.written()}});
  }
  for (const auto& x : kExperiments) {
    const TrafficParams p{.v0 = x.v0, .kj = c.kj};
    const Orbit orbit = iterate(x.k0 * c.kj, p, n);
    warn_escape(orbit, err);
    Emitter e(stem(x.name), out);
    emit_orbit(orbit, data_and_plot, e);
    Json entry = Json::object();
    entry["figure"] = std::string(x.name).substr(0, 5);
    entry["v0"] = x.v0;
    entry["k0"] = x.k0 * c.kj;
    entry["final_k"] = orbit.states.back().k;
    entry["final_v"] = orbit.states.back().v;
    std::vector<double> tail = orbit.densities();
    const std::size_t keep = std::min<std::size_t>(tail.size(), 60);
    tail.erase(tail.begin(), tail.end() - static_cast<std::ptrdiff_t>(keep));
    const Period period =
        keep >= 2 ? detect_period(tail, kPeriodTolerance, keep / 2) : std::nullopt;
    entry["detected_period"] = period ? Json(*period) : Json(nullptr);
    entry["files"] = e.written();
    entries.push_back(std::move(entry));
  }
  {
    const SensitivityResult r = sensitivity_experiment(0.1 * c.kj, kDefaultSensitivityDelta * c.kj,
                                                       {.v0 = 2.585, .kj = c.kj}, n, 0.1);
    Emitter e(stem("fig10_11_sensitivity"), out);
    emit_sensitivity(r, data_and_plot, e);
    Json entry = Json::object();
    entry["figure"] = "fig10-11";
    entry["first_divergence_index"] =
        r.first_divergence_index ? Json(*r.first_divergence_index) : Json(nullptr);
    entry["files"] = e.written();
    entries.push_back(std::move(entry));
  }
  {
    const BifurcationScan scan = bifurcation_scan(kSweepMin, kSweepMax, sweep_steps,
                                                  ScanSettings{.n_total = n}, c.kj);
    Emitter e(stem("fig12_13_bifurcation"), out);
    emit_scan(scan, {"csv", "svg"}, e);
    entries.push_back({{"figure", "fig12-13"}, {"files", e.written()}});
  }
  {
    const LyapunovCurve curve =
        lyapunov_curve(kSweepMin, kSweepMax, sweep_steps, LyapunovSettings{}, c.kj);
    Emitter e(stem("fig14_lyapunov"), out);
    emit_curve(curve, {"csv", "svg"}, e);
    entries.push_back({{"figure", "fig14"}, {"files", e.written()}});
  }
  {
    const LyapunovCurve zoom =
        lyapunov_curve(2.5, std::numbers::e, sweep_steps, LyapunovSettings{}, c.kj);
    Emitter e(stem("fig15_lyapunov_zoom"), out);
    emit_curve(zoom, {"csv", "svg"}, e);
    entries.push_back({{"figure", "fig15"}, {"files", e.written()}});
  }
  manifest["entries"] = std::move(entries);

  const fs::path manifest_path = dir / "manifest.json";
  std::ofstream file(manifest_path);
  if (!file) throw IoError("cannot open '" + manifest_path.string() + "'");
  write_json(manifest, file);
  if (!file) throw IoError("failed writing '" + manifest_path.string() + "'");
  err << "wrote " << manifest_path.string() << "\n";
  return kOk;
}

}  // namespace

void RunConfig::validate() const {
  const bool has_range = v0_min || v0_max;
  if (v0 && has_range) {
    throw ArgumentError("--v0 cannot be combined with --v0-min/--v0-max");
  }
  if (kSingleParameter.contains(subcommand) && has_range) {
    throw ArgumentError("--v0-min/--v0-max: '" + subcommand + "' takes a single --v0");
  }
  if (kSweeps.contains(subcommand) && v0) {
    throw ArgumentError("--v0: '" + subcommand + "' sweeps a range; use --v0-min/--v0-max");
  }
  auto positive = [](const auto& value, const char* flag) {
    if (value && !(*value > 0)) throw ArgumentError(std::string(flag) + " must be > 0");
  };
  positive(steps, "--steps");
  positive(n, "--n");
  positive(transient, "--transient");
  positive(keep, "--keep");
  positive(tolerance, "--tolerance");
  positive(threshold, "--threshold");
  if (!(kj > 0)) throw ArgumentError("--kj must be > 0");
  if (delta && subcommand != "sensitivity") {
    throw ArgumentError("--delta only applies to 'sensitivity'");
  }
  const auto allowed = allowed_formats(subcommand);
  for (const auto& f : formats) {
    if (!allowed.contains(f)) {
      throw ArgumentError("--format: '" + f + "' not supported by '" + subcommand + "'");
    }
  }
  const std::string stem = out.value_or(default_stem(subcommand));
  const std::size_t n_formats = formats.empty() ? default_formats(subcommand).size()
                                                : formats.size();
  if (stem == "-" && n_formats > 1) {
    throw ArgumentError("--out: several formats requested; give a file stem instead of '-'");
  }
}

std::optional<RunConfig> parse(int argc, const char* const* argv, std::ostream& out,
                               std::ostream& err, int& exit_code) {
  CLI::App app{"Discrete Greenberg traffic map: orbits, stability, bifurcations, Lyapunov exponents",
               "greenberg-dyn"};
  app.require_subcommand(1);

  double v0 = 0, v0_min = 0, v0_max = 0, k0 = 0, kj = 1.0, tolerance = 0, delta = 0,
         threshold = 0;
  std::size_t steps = 0, n = 0, transient = 0, keep = 0;
  std::vector<std::string> formats;
  std::string out_path;

  const std::vector<std::pair<const char*, const char*>> subcommands = {
      {"diagram", "fundamental-diagram profiles for one v0 or a v0 range"},
      {"orbit", "iterate the map from k0 and emit the orbit"},
      {"cobweb", "cobweb triptych SVG over the three fundamental diagrams"},
      {"classify", "fixed point, multiplier and stability classification"},
      {"bifurcation", "attractor samples and detected period across a v0 range"},
      {"lyapunov", "Lyapunov exponent across a v0 range"},
      {"sensitivity", "divergence of two orbits with nearby initial densities"},
      {"repro", "regenerate every published experiment into a directory"},
  };
  for (const auto& [name, help] : subcommands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--v0", v0, "optimum velocity");
    sub->add_option("--v0-min", v0_min, "lower end of the v0 range");
    sub->add_option("--v0-max", v0_max, "upper end of the v0 range");
    sub->add_option("--steps", steps, "grid points across the v0 range");
    sub->add_option("--k0", k0, "initial density");
    sub->add_option("--kj", kj, "jam density")->default_val(1.0);
    sub->add_option("--n", n, "iterations (sweep terms for lyapunov, samples for diagram)");
    sub->add_option("--transient", transient, "discarded iterations before averaging");
    sub->add_option("--keep", keep, "retained attractor samples per grid point");
    sub->add_option("--tolerance", tolerance, "period detection tolerance");
    sub->add_option("--delta", delta, "initial density offset for the second orbit");
    sub->add_option("--threshold", threshold, "separation counted as divergence");
    sub->add_option("--format", formats, "csv, json, svg (text/json for classify)")
        ->delimiter(',');
    sub->add_option("--out", out_path, "output file stem, '-' for stdout, directory for repro");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    exit_code = code == 0 ? kOk : kUsage;
    return std::nullopt;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig c;
  c.subcommand = sub->get_name();
  auto take = [&](const char* flag, auto& field, const auto& value) {
    if (sub->count(flag) > 0) field = value;
  };
  take("--v0", c.v0, v0);
  take("--v0-min", c.v0_min, v0_min);
  take("--v0-max", c.v0_max, v0_max);
  take("--steps", c.steps, steps);
  take("--k0", c.k0, k0);
  take("--n", c.n, n);
  take("--transient", c.transient, transient);
  take("--keep", c.keep, keep);
  take("--tolerance", c.tolerance, tolerance);
  take("--delta", c.delta, delta);
  take("--threshold", c.threshold, threshold);
  take("--out", c.out, out_path);
  c.kj = kj;
  c.formats = formats;
  exit_code = kOk;
  return c;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
  c.validate();
  const std::vector<std::string> formats =
      c.formats.empty() ? default_formats(c.subcommand) : c.formats;
  Emitter emitter(c.out.value_or(default_stem(c.subcommand)), out);
  const std::string& sub = c.subcommand;

  if (sub == "diagram") {
    std::vector<double> v0s;
    if (c.v0_min || c.v0_max) {
      v0s = parameter_grid(c.v0_min.value_or(0.5), c.v0_max.value_or(2.5),
                           c.steps.value_or(kDiagramCurves));
    } else {
      v0s = {c.v0.value_or(1.0)};
    }
    emit_diagrams(make_diagram_set(v0s, c.kj, c.n.value_or(kDiagramSamples)), formats, emitter);
  } else if (sub == "orbit" || sub == "cobweb") {
    const TrafficParams p{.v0 = c.v0.value_or(0.25), .kj = c.kj};
    const Orbit orbit = iterate(c.k0.value_or(0.25), p, c.n.value_or(kDefaultIterations));
    warn_escape(orbit, err);
    emit_orbit(orbit, formats, emitter);
  } else if (sub == "classify") {
    const TrafficParams p{.v0 = c.v0.value_or(1.25), .kj = c.kj};
    const FixedPointReport report = classify_fixed_point(p);
    const StabilityCheck check = exponential_stability_check(p);
    for (const auto& f : formats) {
      if (f == "json") {
        emitter.emit("json", [&](std::ostream& os) { write_json(to_json(report, check, c.kj), os); });
      } else {
        emitter.emit("txt", [&](std::ostream& os) { write_classify_text(report, check, os); });
      }
    }
  } else if (sub == "bifurcation") {
    const BifurcationScan scan =
        bifurcation_scan(c.v0_min.value_or(kSweepMin), c.v0_max.value_or(kSweepMax),
                         c.steps.value_or(kSweepSteps), scan_settings(c), c.kj);
    if (const std::size_t escaped = count_escaped(scan)) {
      err << "warning: " << escaped << " grid point(s) escaped (0, kj]\n";
    }
    emit_scan(scan, formats, emitter);
  } else if (sub == "lyapunov") {
    const LyapunovCurve curve =
        lyapunov_curve(c.v0_min.value_or(kSweepMin), c.v0_max.value_or(kSweepMax),
                       c.steps.value_or(kSweepSteps), lyapunov_settings(c), c.kj);
    if (const std::size_t missing = count_missing(curve)) {
      err << "warning: " << missing << " grid point(s) escaped (0, kj]; lambda left empty\n";
    }
    emit_curve(curve, formats, emitter);
  } else if (sub == "sensitivity") {
    const SensitivityResult r = sensitivity_experiment(
        c.k0.value_or(0.1), c.delta.value_or(kDefaultSensitivityDelta),
        {.v0 = c.v0.value_or(2.585), .kj = c.kj}, c.n.value_or(kDefaultIterations),
        c.threshold.value_or(0.1));
    warn_escape(r.orbit_a, err);
    warn_escape(r.orbit_b, err);
    emit_sensitivity(r, formats, emitter);
  } else if (sub == "repro") {
    return run_repro(c, out, err);
  } else {
    throw ArgumentError("unknown subcommand '" + sub + "'");
  }
  for (const auto& path : emitter.written()) err << "wrote " << path << "\n";
  return kOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  int code = kOk;
  const std::optional<RunConfig> config = parse(argc, argv, out, err, code);
  if (!config) return code;
  try {
    return run(*config, out, err);
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    // DomainError, EscapeError, SpecError, RenderError.
    err << "domain error: " << e.what() << "\n";
    return kDomain;
  }
}

}  // namespace greenberg::cli
