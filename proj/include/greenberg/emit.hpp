#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "greenberg/analysis.hpp"
#include "greenberg/map_dynamics.hpp"
#include "greenberg/model.hpp"

namespace greenberg {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kSchemaVersion = "1";

/// Profiles of the three fundamental diagrams for one or more v0 values.
struct DiagramCurve {
  double v0 = 0.0;
  std::vector<TrafficState> states;
};

struct DiagramSet {
  double kj = 1.0;
  std::size_t samples = 0;
  std::vector<DiagramCurve> curves;
};

DiagramSet make_diagram_set(std::span<const double> v0_values, double kj,
                            std::size_t samples);

// --- numbers -------------------------------------------------------------

/// %.17g rendering; parse_number recovers the identical double.
std::string format_number(double x);
double parse_number(std::string_view text);

// --- CSV -----------------------------------------------------------------
//
// Each writer emits a header row then one row per record and returns the
// number of data rows. Rows are assembled in memory first so a failing sink
// never sees half a row. IoError on sink failure.

std::size_t write_csv(const Orbit& orbit, std::ostream& out);
std::size_t write_csv(const BifurcationScan& scan, std::ostream& out);
std::size_t write_csv(const LyapunovCurve& curve, std::ostream& out);
std::size_t write_csv(const SensitivityResult& result, std::ostream& out);
std::size_t write_csv(const DiagramSet& diagrams, std::ostream& out);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(std::istream& in);

// --- JSON ----------------------------------------------------------------
//
// Every document is {"schema_version", "kind", "settings", "data"}.

Json to_json(const Orbit& orbit);
Json to_json(const BifurcationScan& scan);
Json to_json(const LyapunovCurve& curve);
Json to_json(const SensitivityResult& result);
Json to_json(const FixedPointReport& report, const StabilityCheck& check,
             double kj);
Json to_json(const DiagramSet& diagrams);

Orbit orbit_from_json(const Json& doc);
BifurcationScan scan_from_json(const Json& doc);
LyapunovCurve curve_from_json(const Json& doc);
SensitivityResult sensitivity_from_json(const Json& doc);
DiagramSet diagrams_from_json(const Json& doc);

/// Writes `doc` (indented, trailing newline) and returns the bytes written.
std::size_t write_json(const Json& doc, std::ostream& out);

template <typename Payload>
std::size_t write_json(const Payload& payload, std::ostream& out) {
  return write_json(to_json(payload), out);
}

Json read_json(std::istream& in);

// --- SVG -----------------------------------------------------------------

enum class PlotKind { kFundamentalDiagrams, kCobwebTriptych, kBifurcation, kLyapunov, kSensitivity };

std::string_view to_string(PlotKind kind);

enum class PlotVariable { kDensity, kFlow, kVelocity };

struct AxisRange {
  double min = 0.0;
  double max = 1.0;
};

struct PlotSpec {
  PlotKind kind = PlotKind::kCobwebTriptych;
  std::string title;
  std::string x_label;
  std::string y_label;
  // Single-panel kinds only; computed from the payload when absent.
  std::optional<AxisRange> x_range;
  std::optional<AxisRange> y_range;
  int width = 960;
  int height = 360;
  bool identity_line = true;        ///< q = k on the flow-density panel
  bool fixed_point_marker = true;
  bool threshold_line = true;       ///< v0 = 2 on sweeps
  PlotVariable variable = PlotVariable::kDensity;  ///< bifurcation value axis
  Json settings;                    ///< embedded in <metadata>
};

PlotSpec default_spec(PlotKind kind);

using PlotPayload = std::variant<DiagramSet, Orbit, BifurcationScan,
                                 LyapunovCurve, SensitivityResult>;

/// Standalone SVG document. SpecError when spec.kind and the payload type
/// disagree; RenderError on non-finite or empty axis ranges.
std::string render_svg(const PlotSpec& spec, const PlotPayload& payload);

}  // namespace greenberg
