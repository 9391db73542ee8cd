#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "greenberg/cli.hpp"
#include "greenberg/emit.hpp"

using namespace greenberg;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"greenberg-dyn"};
  argv.insert(argv.end(), args);
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("greenberg_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("orbit subcommand reproduces the empty-road experiment", "[cli]") {
  const Result r = invoke({"orbit", "--v0", "0.25", "--k0", "0.25", "--n", "300"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 301);
  CHECK(std::abs(parse_number(t.rows.back()[1]) - 0.0183) < 1e-4);
  CHECK(std::abs(parse_number(t.rows.back()[3]) - 1.0) < 1e-3);
}

TEST_CASE("classify subcommand", "[cli]") {
  const Result text = invoke({"classify", "--v0", "2.25"});
  REQUIRE(text.code == 0);
  CHECK(text.out.find("classification: source") != std::string::npos);
  CHECK(text.out.find("multiplier: -1.25") != std::string::npos);

  const Result json = invoke({"classify", "--v0", "2.25", "--format", "json"});
  REQUIRE(json.code == 0);
  const Json doc = Json::parse(json.out);
  CHECK(doc["data"]["classification"] == "source");
  CHECK(doc["data"]["multiplier"] == -1.25);
  CHECK(doc["settings"]["v0"] == 2.25);
}

TEST_CASE("bifurcation writes a CSV and SVG pair with settings", "[cli]") {
  const fs::path dir = scratch_dir("bif");
  const std::string stem = (dir / "scan").string();
  const Result r = invoke({"bifurcation", "--v0-min", "0.05", "--v0-max", "2.7", "--steps",
                           "100", "--out", stem.c_str()});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "scan.csv"));
  CHECK(fs::exists(dir / "scan.svg"));
  CHECK(fs::exists(dir / "scan-velocity.svg"));
  REQUIRE(fs::exists(dir / "scan.settings.json"));
  std::ifstream sidecar(dir / "scan.settings.json");
  const Json settings = read_json(sidecar);
  CHECK(settings["settings"]["steps"] == 100);
  std::ifstream csv(dir / "scan.csv");
  CHECK(read_csv(csv).rows.size() == 100 * kScanKeep);
}

TEST_CASE("lyapunov and sensitivity subcommands", "[cli]") {
  const Result ly = invoke({"lyapunov", "--v0-min", "1.0", "--v0-max", "2.6", "--steps", "5",
                            "--n", "2000", "--format", "csv", "--out", "-"});
  REQUIRE(ly.code == 0);
  std::istringstream in(ly.out);
  CHECK(read_csv(in).rows.size() == 5);

  const Result sens = invoke({"sensitivity", "--format", "json"});
  REQUIRE(sens.code == 0);
  const Json doc = Json::parse(sens.out);
  CHECK(doc["settings"]["v0"] == 2.585);
  CHECK(doc["data"]["first_divergence_index"].is_number());
}

TEST_CASE("cobweb and diagram emit SVG", "[cli]") {
  const Result cob = invoke({"cobweb", "--v0", "2.405", "--k0", "0.275"});
  REQUIRE(cob.code == 0);
  CHECK(cob.out.starts_with("<?xml"));
  const Result dia = invoke({"diagram", "--v0-min", "0.5", "--v0-max", "2.5", "--format", "svg"});
  REQUIRE(dia.code == 0);
  CHECK(dia.out.find("v0 = 2.500") != std::string::npos);
}

TEST_CASE("escape exits 0 with a warning", "[cli]") {
  const Result r = invoke({"orbit", "--v0", "3.5", "--k0", "0.3"});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
}

TEST_CASE("exit codes", "[cli][errors]") {
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"orbit", "--bogus"}).code == cli::kUsage);
  CHECK(invoke({"orbit", "--v0", "abc"}).code == cli::kUsage);
  CHECK(invoke({"orbit", "--v0", "1", "--v0-min", "0.5"}).code == cli::kUsage);
  CHECK(invoke({"bifurcation", "--v0", "1"}).code == cli::kUsage);
  CHECK(invoke({"orbit", "--format", "png"}).code == cli::kUsage);
  CHECK(invoke({"orbit", "--tolerance", "0"}).code == cli::kUsage);
  CHECK(invoke({"orbit", "--format", "csv,json"}).code == cli::kUsage);

  const Result domain = invoke({"orbit", "--k0", "1.5"});
  CHECK(domain.code == cli::kDomain);
  CHECK(domain.err.find("outside (0, kj)") != std::string::npos);
  CHECK(invoke({"classify", "--v0", "-1"}).code == cli::kDomain);

  CHECK(invoke({"orbit", "--out", "/nonexistent-dir/x"}).code == cli::kIo);
  CHECK(invoke({"--help"}).code == cli::kOk);
}

TEST_CASE("repro writes every experiment and a manifest", "[cli][slow]") {
  const fs::path dir = scratch_dir("repro");
  const Result r = invoke({"repro", "--out", dir.string().c_str(), "--steps", "50"});
  REQUIRE(r.code == 0);
  REQUIRE(fs::exists(dir / "manifest.json"));
  std::ifstream in(dir / "manifest.json");
  const Json manifest = read_json(in);
  const auto& entries = manifest["entries"];
  CHECK(entries.size() == 2 + 8 + 1 + 3);
  for (const auto& e : entries) {
    for (const auto& f : e["files"]) CHECK(fs::exists(f.get<std::string>()));
  }
  CHECK(entries[2]["detected_period"] == 1);
  CHECK(entries[5]["detected_period"] == 2);
  CHECK(entries[6]["detected_period"] == 4);
  CHECK(entries[7]["detected_period"] == 8);
}
