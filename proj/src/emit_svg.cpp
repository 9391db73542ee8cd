#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "greenberg/emit.hpp"
#include "greenberg/errors.hpp"

namespace greenberg {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                 "#9467bd", "#ff7f0e", "#17becf"};

std::string fixed(double x, int digits = 2) {
  char buf[64];
  const auto [end, ec] =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, digits);
  if (ec != std::errc{}) return "0";
  std::string s(buf, end);
  if (s == "-0.00" || s == "-0.000" || s == "-0.0000") s.erase(0, 1);
  return s;
}

std::string escape_xml(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void check_range(const AxisRange& r, const char* axis) {
  if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.min < r.max)) {
    throw RenderError(std::string("render_svg: degenerate ") + axis + " range [" +
                      fixed(r.min, 6) + ", " + fixed(r.max, 6) + "]");
  }
}

AxisRange padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.04 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Rectangular plotting area with its own data-to-pixel transform.
class Panel {
 public:
  Panel(double left, double top, double width, double height, AxisRange x, AxisRange y,
        std::string clip_id)
      : left_(left), top_(top), width_(width), height_(height), x_(x), y_(y),
        clip_id_(std::move(clip_id)) {
    check_range(x_, "x");
    check_range(y_, "y");
  }

  double px(double x) const { return left_ + (x - x_.min) / (x_.max - x_.min) * width_; }
  double py(double y) const { return top_ + height_ - (y - y_.min) / (y_.max - y_.min) * height_; }
  const AxisRange& x() const { return x_; }
  const AxisRange& y() const { return y_; }
  bool contains_x(double x) const { return x >= x_.min && x <= x_.max; }

  void frame(std::string& svg, std::string_view title, std::string_view x_label,
             std::string_view y_label) const {
    svg += "<defs><clipPath id=\"" + clip_id_ + "\"><rect x=\"" + fixed(left_) +
           "\" y=\"" + fixed(top_) + "\" width=\"" + fixed(width_) + "\" height=\"" +
           fixed(height_) + "\"/></clipPath></defs>\n";
    svg += "<rect x=\"" + fixed(left_) + "\" y=\"" + fixed(top_) + "\" width=\"" +
           fixed(width_) + "\" height=\"" + fixed(height_) +
           "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 4; ++t) {
      const double fx = x_.min + (x_.max - x_.min) * t / 4.0;
      const double fy = y_.min + (y_.max - y_.min) * t / 4.0;
      const double gx = px(fx);
      const double gy = py(fy);
      svg += "<line x1=\"" + fixed(gx) + "\" y1=\"" + fixed(top_ + height_) + "\" x2=\"" +
             fixed(gx) + "\" y2=\"" + fixed(top_ + height_ + 4) + "\" stroke=\"#333\"/>\n";
      svg += "<text x=\"" + fixed(gx) + "\" y=\"" + fixed(top_ + height_ + 16) +
             "\" font-size=\"10\" text-anchor=\"middle\">" + tick_label(fx) + "</text>\n";
      svg += "<line x1=\"" + fixed(left_ - 4) + "\" y1=\"" + fixed(gy) + "\" x2=\"" +
             fixed(left_) + "\" y2=\"" + fixed(gy) + "\" stroke=\"#333\"/>\n";
      svg += "<text x=\"" + fixed(left_ - 6) + "\" y=\"" + fixed(gy + 3) +
             "\" font-size=\"10\" text-anchor=\"end\">" + tick_label(fy) + "</text>\n";
    }
    svg += "<text x=\"" + fixed(left_ + width_ / 2) + "\" y=\"" + fixed(top_ - 8) +
           "\" font-size=\"12\" text-anchor=\"middle\">" + escape_xml(title) + "</text>\n";
    svg += "<text x=\"" + fixed(left_ + width_ / 2) + "\" y=\"" +
           fixed(top_ + height_ + 32) + "\" font-size=\"11\" text-anchor=\"middle\">" +
           escape_xml(x_label) + "</text>\n";
    svg += "<text x=\"" + fixed(left_ - 36) + "\" y=\"" + fixed(top_ + height_ / 2) +
           "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 " +
           fixed(left_ - 36) + " " + fixed(top_ + height_ / 2) + ")\">" +
           escape_xml(y_label) + "</text>\n";
  }

  void polyline(std::string& svg, const std::vector<PathPoint>& pts, std::string_view color,
                double stroke = 1.0, std::string_view dash = {}) const {
    if (pts.size() < 2) return;
    svg += "<polyline clip-path=\"url(#" + clip_id_ + ")\" fill=\"none\" stroke=\"" +
           std::string(color) + "\" stroke-width=\"" + fixed(stroke) + "\"";
    if (!dash.empty()) svg += " stroke-dasharray=\"" + std::string(dash) + "\"";
    svg += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) svg += ' ';
      svg += fixed(px(pts[i].x)) + "," + fixed(py(pts[i].y));
    }
    svg += "\"/>\n";
  }

  void dot(std::string& svg, PathPoint pt, std::string_view color, double r) const {
    svg += "<circle clip-path=\"url(#" + clip_id_ + ")\" cx=\"" + fixed(px(pt.x)) +
           "\" cy=\"" + fixed(py(pt.y)) + "\" r=\"" + fixed(r) + "\" fill=\"" +
           std::string(color) + "\"/>\n";
  }

  void vertical(std::string& svg, double x, std::string_view color) const {
    if (!contains_x(x)) return;
    polyline(svg, {{x, y_.min}, {x, y_.max}}, color, 1.0, "4 3");
  }

  void horizontal(std::string& svg, double y, std::string_view color) const {
    if (y < y_.min || y > y_.max) return;
    polyline(svg, {{x_.min, y}, {x_.max, y}}, color, 1.0, "4 3");
  }

 private:
  static std::string tick_label(double v) {
    return fixed(v, std::abs(v) >= 100 ? 0 : (std::abs(v) >= 10 ? 1 : 2));
  }

  double left_, top_, width_, height_;
  AxisRange x_, y_;
  std::string clip_id_;
};

constexpr double kMarginLeft = 56;
constexpr double kMarginRight = 16;
constexpr double kMarginTop = 44;
constexpr double kMarginBottom = 44;

std::vector<Panel> three_panels(const PlotSpec& spec, const std::array<AxisRange, 3>& xs,
                                const std::array<AxisRange, 3>& ys) {
  const double slot = spec.width / 3.0;
  std::vector<Panel> panels;
  for (int i = 0; i < 3; ++i) {
    panels.emplace_back(slot * i + kMarginLeft, kMarginTop,
                        slot - kMarginLeft - kMarginRight,
                        spec.height - kMarginTop - kMarginBottom, xs[i], ys[i],
                        "clip" + std::to_string(i));
  }
  return panels;
}

Panel single_panel(const PlotSpec& spec, AxisRange x, AxisRange y) {
  return Panel(kMarginLeft, kMarginTop, spec.width - kMarginLeft - kMarginRight,
               spec.height - kMarginTop - kMarginBottom, spec.x_range.value_or(x),
               spec.y_range.value_or(y), "clip0");
}

std::string header(const PlotSpec& spec) {
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) +
         "\" height=\"" + std::to_string(spec.height) + "\" viewBox=\"0 0 " +
         std::to_string(spec.width) + " " + std::to_string(spec.height) +
         "\" font-family=\"sans-serif\">\n";
  svg += "<title>" + escape_xml(spec.title) + "</title>\n";
  if (!spec.settings.is_null()) {
    svg += "<metadata>" + escape_xml(spec.settings.dump()) + "</metadata>\n";
  }
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return svg;
}

// Velocity diverges at k -> 0; show the profile down to k = 0.02 kj.
double diagram_velocity_cap(double v0) { return v0 * std::log(1.0 / 0.02); }

std::vector<PathPoint> profile(const std::vector<TrafficState>& states, PlotVariable x,
                               PlotVariable y) {
  auto pick = [](const TrafficState& s, PlotVariable var) {
    switch (var) {
      case PlotVariable::kDensity: return s.k;
      case PlotVariable::kFlow: return s.q;
      case PlotVariable::kVelocity: return s.v;
    }
    return s.k;
  };
  std::vector<PathPoint> pts;
  pts.reserve(states.size());
  for (const auto& s : states) pts.push_back({pick(s, x), pick(s, y)});
  return pts;
}

void render_diagrams(std::string& svg, const PlotSpec& spec, const DiagramSet& set) {
  double q_max = 0.0;
  double v_max = 0.0;
  for (const auto& c : set.curves) {
    q_max = std::max(q_max, c.v0 * set.kj / std::numbers::e);
    v_max = std::max(v_max, diagram_velocity_cap(c.v0));
  }
  const AxisRange k_axis{0.0, set.kj};
  const AxisRange q_axis{0.0, q_max > 0 ? q_max * 1.05 : 1.0};
  const AxisRange v_axis{0.0, v_max > 0 ? v_max * 1.05 : 1.0};
  const auto panels = three_panels(spec, {k_axis, k_axis, q_axis}, {q_axis, v_axis, v_axis});
  panels[0].frame(svg, "flow-density", "density k", "flow q");
  panels[1].frame(svg, "velocity-density", "density k", "velocity v");
  panels[2].frame(svg, "velocity-flow", "flow q", "velocity v");
  for (std::size_t i = 0; i < set.curves.size(); ++i) {
    const auto& c = set.curves[i];
    const char* color = kPalette[i % kPalette.size()];
    panels[0].polyline(svg, profile(c.states, PlotVariable::kDensity, PlotVariable::kFlow), color, 1.5);
    panels[1].polyline(svg, profile(c.states, PlotVariable::kDensity, PlotVariable::kVelocity), color, 1.5);
    panels[2].polyline(svg, profile(c.states, PlotVariable::kFlow, PlotVariable::kVelocity), color, 1.5);
    svg += "<text x=\"" + fixed(spec.width - 90.0) + "\" y=\"" + fixed(14.0 + 12.0 * i) +
           "\" font-size=\"10\" fill=\"" + color + "\">v0 = " + fixed(c.v0, 3) + "</text>\n";
  }
}

void render_cobweb(std::string& svg, const PlotSpec& spec, const Orbit& orbit) {
  const TrafficParams& p = orbit.params;
  const std::vector<TrafficState> curve = diagram_samples(p, 400);

  double v_top = diagram_velocity_cap(p.v0);
  double q_top = p.v0 * p.kj / std::numbers::e;
  for (const auto& s : orbit.states) {
    v_top = std::max(v_top, s.v);
    q_top = std::max(q_top, s.q);
  }
  const AxisRange k_axis{0.0, p.kj};
  const AxisRange v_axis{0.0, v_top > 0 ? v_top * 1.05 : 1.0};
  const AxisRange q_axis{0.0, q_top > 0 ? q_top * 1.05 : 1.0};
  const auto panels = three_panels(spec, {k_axis, k_axis, q_axis}, {k_axis, v_axis, v_axis});
  panels[0].frame(svg, "flow-density", "density k", "flow q");
  panels[1].frame(svg, "velocity-density", "density k", "velocity v");
  panels[2].frame(svg, "velocity-flow", "flow q", "velocity v");

  panels[0].polyline(svg, profile(curve, PlotVariable::kDensity, PlotVariable::kFlow), "#888", 1.5);
  panels[1].polyline(svg, profile(curve, PlotVariable::kDensity, PlotVariable::kVelocity), "#888", 1.5);
  panels[2].polyline(svg, profile(curve, PlotVariable::kFlow, PlotVariable::kVelocity), "#888", 1.5);
  if (spec.identity_line) {
    panels[0].polyline(svg, {{0.0, 0.0}, {p.kj, p.kj}}, "#555", 1.0, "4 3");
  }

  const auto path = cobweb_path(orbit);
  if (is_degenerate(path)) {
    if (!path.empty()) panels[0].dot(svg, path.front(), kPalette[1], 3.5);
  } else {
    panels[0].polyline(svg, path, kPalette[0], 0.8);
  }
  const auto vk = profile(orbit.states, PlotVariable::kDensity, PlotVariable::kVelocity);
  const auto vq = profile(orbit.states, PlotVariable::kFlow, PlotVariable::kVelocity);
  panels[1].polyline(svg, vk, kPalette[0], 0.5);
  panels[2].polyline(svg, vq, kPalette[0], 0.5);
  for (std::size_t i = 0; i < orbit.states.size(); ++i) {
    panels[1].dot(svg, vk[i], kPalette[0], 1.6);
    panels[2].dot(svg, vq[i], kPalette[0], 1.6);
  }
  if (spec.fixed_point_marker && p.v0 > 0.0) {
    const double k_star = fixed_point(p);
    panels[0].dot(svg, {k_star, k_star}, kPalette[2], 2.5);
    panels[1].dot(svg, {k_star, 1.0}, kPalette[2], 2.5);
    panels[2].dot(svg, {k_star, 1.0}, kPalette[2], 2.5);
  }
}

void render_bifurcation(std::string& svg, const PlotSpec& spec, const BifurcationScan& scan) {
  double lo = INFINITY, hi = -INFINITY, y_hi = 0.0;
  for (const auto& pt : scan.points) {
    lo = std::min(lo, pt.v0);
    hi = std::max(hi, pt.v0);
    for (const auto& s : pt.samples) {
      y_hi = std::max(y_hi, profile({s}, spec.variable, spec.variable).front().y);
    }
  }
  const Panel panel = single_panel(spec, padded(lo, hi), {0.0, y_hi > 0 ? y_hi * 1.05 : 1.0});
  panel.frame(svg, spec.title, spec.x_label, spec.y_label);
  if (spec.threshold_line) panel.vertical(svg, period_doubling_threshold(), "#999");
  for (const auto& pt : scan.points) {
    for (const auto& s : pt.samples) {
      const double y = profile({s}, spec.variable, spec.variable).front().y;
      panel.dot(svg, {pt.v0, y}, "#000", 0.8);
    }
  }
}

void render_lyapunov(std::string& svg, const PlotSpec& spec, const LyapunovCurve& curve) {
  double lo = INFINITY, hi = -INFINITY, y_lo = 0.0, y_hi = 0.0;
  for (const auto& pt : curve.points) {
    lo = std::min(lo, pt.v0);
    hi = std::max(hi, pt.v0);
    if (pt.lambda) {
      y_lo = std::min(y_lo, *pt.lambda);
      y_hi = std::max(y_hi, *pt.lambda);
    }
  }
  const Panel panel = single_panel(spec, padded(lo, hi), padded(y_lo, y_hi));
  panel.frame(svg, spec.title, spec.x_label, spec.y_label);
  panel.horizontal(svg, 0.0, "#555");
  if (spec.threshold_line) panel.vertical(svg, period_doubling_threshold(), "#999");
  std::vector<PathPoint> run;
  for (const auto& pt : curve.points) {
    if (pt.lambda) {
      run.push_back({pt.v0, *pt.lambda});
      continue;
    }
    panel.polyline(svg, run, kPalette[0], 1.0);
    run.clear();
  }
  panel.polyline(svg, run, kPalette[0], 1.0);
}

void render_sensitivity(std::string& svg, const PlotSpec& spec, const SensitivityResult& r) {
  const double n = static_cast<double>(std::max<std::size_t>(r.separation.size(), 2) - 1);
  const Panel panel = single_panel(spec, {0.0, n}, {0.0, r.orbit_a.params.kj});
  panel.frame(svg, spec.title, spec.x_label, spec.y_label);
  std::vector<PathPoint> a, b, sep;
  for (std::size_t i = 0; i < r.separation.size(); ++i) {
    const double x = static_cast<double>(i);
    a.push_back({x, r.orbit_a.states[i].k});
    b.push_back({x, r.orbit_b.states[i].k});
    sep.push_back({x, r.separation[i]});
  }
  panel.polyline(svg, a, kPalette[0], 1.0);
  panel.polyline(svg, b, kPalette[1], 1.0);
  panel.polyline(svg, sep, "#555", 0.8, "2 2");
  if (r.first_divergence_index) {
    panel.vertical(svg, static_cast<double>(*r.first_divergence_index), "#999");
  }
}

template <typename T>
const T& expect(const PlotSpec& spec, const PlotPayload& payload) {
  if (const T* p = std::get_if<T>(&payload)) return *p;
  throw SpecError("render_svg: payload does not match plot kind '" +
                  std::string(to_string(spec.kind)) + "'");
}

}  // namespace

std::string_view to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::kFundamentalDiagrams: return "fundamental-diagrams";
    case PlotKind::kCobwebTriptych: return "cobweb-triptych";
    case PlotKind::kBifurcation: return "bifurcation";
    case PlotKind::kLyapunov: return "lyapunov";
    case PlotKind::kSensitivity: return "sensitivity";
  }
  return "unknown";
}

PlotSpec default_spec(PlotKind kind) {
  PlotSpec spec;
  spec.kind = kind;
  switch (kind) {
    case PlotKind::kFundamentalDiagrams:
      spec.title = "Normalized Greenberg fundamental diagrams";
      break;
    case PlotKind::kCobwebTriptych:
      spec.title = "Iterates on the normalized fundamental diagrams";
      break;
    case PlotKind::kBifurcation:
      spec.title = "bifurcation diagram";
      spec.x_label = "optimum velocity v0";
      spec.y_label = "density k";
      spec.width = 800;
      spec.height = 480;
      break;
    case PlotKind::kLyapunov:
      spec.title = "Lyapunov exponent";
      spec.x_label = "optimum velocity v0";
      spec.y_label = "lambda";
      spec.width = 800;
      spec.height = 420;
      break;
    case PlotKind::kSensitivity:
      spec.title = "Sensitivity to the initial density";
      spec.x_label = "iteration i";
      spec.y_label = "density k";
      spec.width = 800;
      spec.height = 360;
      break;
  }
  return spec;
}

std::string render_svg(const PlotSpec& spec, const PlotPayload& payload) {
  if (spec.width <= kMarginLeft * 3 || spec.height <= kMarginTop + kMarginBottom) {
    throw RenderError("render_svg: canvas too small");
  }
  if (spec.x_range) check_range(*spec.x_range, "x");
  if (spec.y_range) check_range(*spec.y_range, "y");

  std::string svg = header(spec);
  switch (spec.kind) {
    case PlotKind::kFundamentalDiagrams:
      render_diagrams(svg, spec, expect<DiagramSet>(spec, payload));
      break;
    case PlotKind::kCobwebTriptych:
      render_cobweb(svg, spec, expect<Orbit>(spec, payload));
      break;
    case PlotKind::kBifurcation:
      render_bifurcation(svg, spec, expect<BifurcationScan>(spec, payload));
      break;
    case PlotKind::kLyapunov:
      render_lyapunov(svg, spec, expect<LyapunovCurve>(spec, payload));
      break;
    case PlotKind::kSensitivity:
      render_sensitivity(svg, spec, expect<SensitivityResult>(spec, payload));
      break;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace greenberg
