#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscillab/config.hpp"
#include "oscillab/verify.hpp"

namespace oscillab::cli {

struct RunOptions {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::vector<int> resolutions;
  int threads = 0;
  std::vector<std::string> formats{"json", "csv", "svg"};
};

// One logical report; each present payload becomes <name>.<format>.
struct Report {
  std::string name;
  Json json;
  std::string csv;
  std::string svg;
};

struct Artifact {
  std::string name;
  std::size_t bytes = 0;
  std::string checksum;  // FNV-1a 64, hex
};

struct RunManifest {
  std::string config_path;
  std::string out_dir;
  std::string command;
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
  std::uint64_t seed = 0;
  bool passed = false;
};

std::string fnv1a_hex(const std::string& bytes);
// Writes to a temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::vector<std::filesystem::path> emit_outputs(const std::vector<Report>& reports,
                                                const std::vector<std::string>& formats,
                                                const std::filesystem::path& dir);

std::string rows_csv(const VerifyReport& r);
std::string good_lambda_csv(const GoodLambdaReport& r);
std::string bmo_csv(const BmoReport& r);
std::string profile_csv(const std::vector<std::pair<int, OffDiagonalProfile>>& profiles);
std::string profile_svg(const std::vector<std::pair<int, OffDiagonalProfile>>& profiles, const std::string& title);

ExperimentConfig resolve_config(const RunOptions& opts);

RunManifest run_experiment(const RunOptions& opts);
RunManifest run_profile(const RunOptions& opts);
RunManifest run_audit(const RunOptions& opts);
RunManifest run_drcheck(const RunOptions& opts);
// Reads <dir>/summary.json and renders a short table.
std::string render_summary(const std::filesystem::path& dir, bool* passed = nullptr);

Json to_json(const RunManifest& m);

}  // namespace oscillab::cli
