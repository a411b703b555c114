#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "runner.hpp"

using namespace oscillab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("oscillab-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::string config(const std::string& name) { return std::string(OSCILLAB_SOURCE_DIR) + "/configs/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> checksums(const cli::RunManifest& m) {
  std::map<std::string, std::string> out;
  for (const cli::Artifact& a : m.artifacts) out[a.name] = a.checksum;
  return out;
}

}  // namespace

TEST_CASE("fnv1a checksums") {
  CHECK(cli::fnv1a_hex("") == "cbf29ce484222325");
  CHECK(cli::fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(cli::fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("emit_outputs") {
  const fs::path dir = scratch("emit");
  const std::vector<cli::Report> reports{{"alpha", Json{{"x", 1}}, "a,b\n1,2\n", ""},
                                         {"profile", Json{{"y", 2}}, "k,alpha\n2,0.5\n", "<svg/>"}};
  const auto json_only = cli::emit_outputs(reports, {"json"}, dir);
  CHECK(json_only.size() == 2);
  CHECK(slurp(dir / "alpha.json") == "{\n  \"x\": 1\n}\n");
  const auto all = cli::emit_outputs({reports[1]}, {"json", "csv", "svg"}, dir);
  CHECK(all.size() == 3);
  CHECK(slurp(dir / "profile.svg") == "<svg/>");
  CHECK(cli::emit_outputs({reports[0]}, {"svg"}, dir).empty());
  CHECK_THROWS_AS(cli::emit_outputs({}, {"json"}, dir), ParameterError);
  CHECK_THROWS_AS(cli::emit_outputs(reports, {}, dir), ParameterError);
  CHECK_THROWS_AS(cli::emit_outputs(reports, {"pdf"}, dir), ParameterError);
  CHECK_THROWS_AS(cli::emit_outputs({{"", Json{{"x", 1}}, "", ""}}, {"json"}, dir), ParameterError);
  for (const auto& entry : fs::directory_iterator(dir)) CHECK(entry.path().extension() != ".tmp");
  fs::remove_all(dir);
}

TEST_CASE("run, summary and reruns") {
  cli::RunOptions opts;
  opts.config = config("classical-jn.json");
  opts.out = scratch("run-a").string();
  opts.resolutions = {128, 256};
  opts.threads = 1;
  const cli::RunManifest a = cli::run_experiment(opts);
  CHECK(a.passed);
  CHECK(a.command == "run");
  CHECK(fs::exists(fs::path(opts.out) / "summary.json"));
  CHECK(fs::exists(fs::path(opts.out) / "weak.csv"));
  CHECK(fs::exists(fs::path(opts.out) / "manifest.json"));
  const Json summary = Json::parse(slurp(fs::path(opts.out) / "summary.json"));
  CHECK(summary["rungs"].size() == 2);
  CHECK(summary["passed"] == true);
  bool passed = false;
  const std::string table = cli::render_summary(opts.out, &passed);
  CHECK(passed);
  CHECK(table.find("weak") != std::string::npos);

  cli::RunOptions again = opts;
  again.out = scratch("run-b").string();
  again.threads = 3;
  const cli::RunManifest b = cli::run_experiment(again);
  CHECK(checksums(a) == checksums(b));
  CHECK(a.artifacts.size() == b.artifacts.size());
  set_thread_count(1);

  cli::RunOptions json_only = opts;
  json_only.out = scratch("run-c").string();
  json_only.formats = {"json"};
  for (const cli::Artifact& art : cli::run_experiment(json_only).artifacts)
    CHECK(fs::path(art.name).extension() == ".json");

  cli::RunOptions seeded = opts;
  seeded.seed = 99;
  seeded.out = scratch("run-d").string();
  CHECK(cli::run_experiment(seeded).seed == 99);
  for (const auto* o : {&opts, &again, &json_only, &seeded}) fs::remove_all(o->out);
}

TEST_CASE("profile, audit and drcheck subcommands") {
  cli::RunOptions opts;
  opts.config = config("heat-offdiag.json");
  opts.out = scratch("profile").string();
  const cli::RunManifest p = cli::run_profile(opts);
  CHECK(p.artifacts.size() == 3);
  const Json prof = Json::parse(slurp(fs::path(opts.out) / "profile.json"));
  CHECK(prof["fitted"] == true);
  CHECK(prof["per_resolution"].size() == 2);
  const cli::RunManifest au = cli::run_audit(opts);
  CHECK(au.artifacts.size() == 1);
  CHECK(au.artifacts[0].name == "audit.json");

  cli::RunOptions dr;
  dr.config = config("classical-jn.json");
  dr.out = opts.out;
  dr.resolutions = {64};
  const cli::RunManifest d = cli::run_drcheck(dr);
  CHECK(d.artifacts.size() == 1);
  CHECK(Json::parse(slurp(fs::path(opts.out) / "drcheck.json")).is_object());
  fs::remove_all(opts.out);
}

TEST_CASE("config resolution") {
  cli::RunOptions opts;
  opts.config = config("classical-jn.json");
  opts.overrides = {"exponents.q=3"};
  opts.seed = 7;
  opts.resolutions = {32, 64};
  const ExperimentConfig cfg = cli::resolve_config(opts);
  CHECK(cfg.q == 3);
  CHECK(cfg.seed == 7);
  CHECK(cfg.ladder == std::vector<int>{32, 64});
  opts.overrides = {"exponents.q=0.5"};
  CHECK_THROWS_AS(cli::resolve_config(opts), ConfigError);
  opts.overrides = {};
  opts.config = config("missing.json");
  CHECK_THROWS_AS(cli::resolve_config(opts), ConfigError);
}
