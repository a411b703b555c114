#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "oscillab/common.hpp"
#include "oscillab/report_json.hpp"

namespace oscillab::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fixed(double v, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string cube_text(const Cube& q) {
  std::string s = "[";
  for (int i = 0; i < q.dimension(); ++i) {
    if (i) s += ' ';
    s += std::to_string(q.anchor_cell(i));
  }
  return s + "]+" + std::to_string(q.side_cells());
}

class Stopwatch {
 public:
  explicit Stopwatch(RunManifest& m) : manifest_(m) {}
  template <class Fn>
  auto time(const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      RunManifest& m;
      std::string stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        m.timings.emplace_back(stage, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
      }
    } record{manifest_, stage, start};
    return fn();
  }

 private:
  RunManifest& manifest_;
};

RunManifest start_manifest(const RunOptions& opts, const ExperimentConfig& cfg, const std::string& command) {
  RunManifest m;
  m.config_path = opts.config;
  m.out_dir = opts.out;
  m.command = command;
  m.seed = cfg.seed;
  return m;
}

void finish(RunManifest& m, const std::vector<Report>& reports, const RunOptions& opts) {
  const fs::path dir = opts.out;
  for (const fs::path& p : emit_outputs(reports, opts.formats, dir)) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string bytes = ss.str();
    m.artifacts.push_back({p.filename().string(), bytes.size(), fnv1a_hex(bytes)});
  }
  write_atomic(dir / "manifest.json", to_json(m).dump(2) + "\n");
}

Json rung_json(const Rung& r) {
  Json j;
  j["resolution"] = r.resolution;
  j["cubes"] = r.cubes.size();
  j["functional"] = r.a->describe();
  j["audit"] = to_json(r.audit);
  if (r.family.profile()) j["profile"] = to_json(*r.family.profile());
  if (r.weight_report) j["weight"] = to_json(*r.weight_report);
  j["theta"] = number_json(r.theta);
  if (r.dp0) j["dp0"] = to_json(*r.dp0);
  return j;
}

std::vector<std::pair<int, OffDiagonalProfile>> profiles_of(const Experiment& e) {
  std::vector<std::pair<int, OffDiagonalProfile>> out;
  for (const Rung& r : e.rungs)
    if (r.family.profile()) out.emplace_back(r.resolution, *r.family.profile());
  return out;
}

Report profile_report(const Experiment& e) {
  const auto profiles = profiles_of(e);
  Report rep{"profile", Json::object(), profile_csv(profiles), profile_svg(profiles, e.config.name)};
  rep.json["name"] = e.config.name;
  rep.json["family"] = to_string(e.config.family.kind);
  Json rungs = Json::array();
  for (const auto& [m, p] : profiles) {
    Json j = to_json(p);
    j["resolution"] = m;
    rungs.push_back(std::move(j));
  }
  rep.json["per_resolution"] = std::move(rungs);
  return rep;
}

struct HarnessOutcome {
  bool passed = false;
  double constant = 0;
  std::string failure;
};

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<fs::path> emit_outputs(const std::vector<Report>& reports, const std::vector<std::string>& formats,
                                   const fs::path& dir) {
  if (reports.empty()) throw ParameterError("no reports to emit");
  if (formats.empty()) throw ParameterError("no output formats selected");
  for (const std::string& f : formats)
    if (f != "json" && f != "csv" && f != "svg") throw ParameterError("unknown output format '" + f + "'");
  auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
  std::vector<fs::path> written;
  for (const Report& r : reports) {
    if (r.name.empty()) throw ParameterError("report without a name");
    if (wants("json") && !r.json.is_null()) {
      written.push_back(dir / (r.name + ".json"));
      write_atomic(written.back(), r.json.dump(2) + "\n");
    }
    if (wants("csv") && !r.csv.empty()) {
      written.push_back(dir / (r.name + ".csv"));
      write_atomic(written.back(), r.csv);
    }
    if (wants("svg") && !r.svg.empty()) {
      written.push_back(dir / (r.name + ".svg"));
      write_atomic(written.back(), r.svg);
    }
  }
  return written;
}

std::string rows_csv(const VerifyReport& r) {
  std::string s = "resolution,cube,numerator,denominator,ratio\n";
  for (const RungReport& rr : r.per_resolution)
    for (const CubeRow& row : rr.rows)
      s += std::to_string(rr.resolution) + "," + cube_text(row.cube) + "," + num(row.numerator) + "," +
           num(row.denominator) + "," + num(row.ratio) + "\n";
  return s;
}

std::string good_lambda_csv(const GoodLambdaReport& r) {
  std::string s = "resolution,cube,t,lhs,structural,tail,c,whitney_branch,whitney_cubes,floor_cubes,whitney_ok\n";
  for (const GoodLambdaRung& g : r.per_resolution)
    for (const GoodLambdaRow& row : g.rows)
      s += std::to_string(g.resolution) + "," + cube_text(row.cube) + "," + num(row.t) + "," + num(row.lhs) + "," +
           num(row.structural) + "," + num(row.tail) + "," + num(row.c) + "," + (row.whitney_branch ? "1" : "0") +
           "," + std::to_string(row.whitney_cubes) + "," + std::to_string(row.floor_cubes) + "," +
           (row.whitney_ok ? "1" : "0") + "\n";
  return s;
}

std::string bmo_csv(const BmoReport& r) {
  std::string s = "resolution,field,alpha";
  for (double p : r.ps) s += ",seminorm_p" + num(p);
  s += ",ratio,monotone";
  for (double p : r.ps) s += ",jn2_p" + num(p);
  s += "\n";
  for (const BmoRung& g : r.per_resolution)
    for (const BmoRow& row : g.rows) {
      s += std::to_string(g.resolution) + "," + row.field + "," + num(row.alpha);
      for (double v : row.seminorms) s += "," + num(v);
      s += "," + num(row.ratio) + "," + (row.monotone ? "1" : "0");
      for (double v : row.jn2) s += "," + num(v);
      s += "\n";
    }
  return s;
}

std::string profile_csv(const std::vector<std::pair<int, OffDiagonalProfile>>& profiles) {
  std::string s = "resolution,k,alpha,beta,model\n";
  for (const auto& [m, p] : profiles) {
    const int kmax = static_cast<int>(std::max(p.alpha.size(), p.beta.size()));
    for (int k = 2; k < kmax; ++k) {
      std::string model;
      if (p.fit.valid && k >= p.fit.k_first && k <= p.fit.k_last)
        model = num(std::exp(p.fit.intercept - p.fit.c * std::pow(4.0, k)));
      s += std::to_string(m) + "," + std::to_string(k) + "," + num(p.alpha_at(k)) + "," + num(p.beta_at(k)) + "," +
           model + "\n";
    }
  }
  return s;
}

std::string profile_svg(const std::vector<std::pair<int, OffDiagonalProfile>>& profiles, const std::string& title) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  struct Pt {
    double k, y;
  };
  std::vector<std::vector<Pt>> data, model;
  double kmin = 1e300, kmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [m, p] : profiles) {
    std::vector<Pt> d, f;
    for (int k = 2; k < static_cast<int>(p.alpha.size()); ++k)
      if (p.alpha[k] > 0 && std::isfinite(p.alpha[k])) d.push_back({double(k), std::log10(p.alpha[k])});
    if (p.fit.valid)
      for (int k = p.fit.k_first; k <= p.fit.k_last; ++k) {
        const double y = (p.fit.intercept - p.fit.c * std::pow(4.0, k)) / std::log(10.0);
        if (std::isfinite(y)) f.push_back({double(k), y});
      }
    for (const auto* v : {&d, &f})
      for (const Pt& q : *v) {
        kmin = std::min(kmin, q.k);
        kmax = std::max(kmax, q.k);
        ymin = std::min(ymin, q.y);
        ymax = std::max(ymax, q.y);
      }
    data.push_back(std::move(d));
    model.push_back(std::move(f));
  }
  if (kmin > kmax) {
    kmin = 2;
    kmax = 3;
    ymin = -1;
    ymax = 0;
  }
  if (kmax - kmin < 1) kmax = kmin + 1;
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax - ymin < 1) ymax = ymin + 1;
  auto X = [&](double k) { return L + (k - kmin) / (kmax - kmin) * (W - L - R); };
  auto Y = [&](double y) { return T + (ymax - y) / (ymax - ymin) * (H - T - B); };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" + title +
       ": log10 alpha_k</text>\n";
  s += "<line x1=\"" + fixed(L) + "\" y1=\"" + fixed(H - B) + "\" x2=\"" + fixed(W - R) + "\" y2=\"" + fixed(H - B) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed(L) + "\" y1=\"" + fixed(T) + "\" x2=\"" + fixed(L) + "\" y2=\"" + fixed(H - B) +
       "\" stroke=\"black\"/>\n";
  for (int k = static_cast<int>(kmin); k <= static_cast<int>(kmax); ++k)
    s += "<text x=\"" + fixed(X(k)) + "\" y=\"" + fixed(H - B + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(k) + "</text>\n";
  const int ystep = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / 8)));
  for (int y = static_cast<int>(ymin); y <= static_cast<int>(ymax); y += ystep)
    s += "<text x=\"" + fixed(L - 6) + "\" y=\"" + fixed(Y(y) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + std::to_string(y) + "</text>\n";
  s += "<text x=\"" + fixed((L + W - R) / 2) + "\" y=\"" + fixed(H - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">k</text>\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::string color = colors[i % 5];
    for (const Pt& q : data[i])
      s += "<circle cx=\"" + fixed(X(q.k)) + "\" cy=\"" + fixed(Y(q.y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    if (model[i].size() >= 2) {
      s += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-dasharray=\"5,3\" points=\"";
      for (std::size_t j = 0; j < model[i].size(); ++j)
        s += (j ? " " : "") + fixed(X(model[i][j].k)) + "," + fixed(Y(model[i][j].y));
      s += "\"/>\n";
    }
    s += "<text x=\"" + fixed(W - R - 4) + "\" y=\"" + fixed(T + 14 * (i + 1)) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color +
         "\">m = " + std::to_string(profiles[i].first) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

ExperimentConfig resolve_config(const RunOptions& opts) {
  std::vector<std::string> overrides = opts.overrides;
  if (opts.seed) overrides.push_back("seed=" + std::to_string(*opts.seed));
  if (!opts.resolutions.empty()) {
    std::string ladder = "ladder=[";
    for (std::size_t i = 0; i < opts.resolutions.size(); ++i)
      ladder += (i ? "," : "") + std::to_string(opts.resolutions[i]);
    overrides.push_back(ladder + "]");
  }
  if (opts.threads > 0) set_thread_count(opts.threads);
  return load_config(opts.config, overrides);
}

RunManifest run_experiment(const RunOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  RunManifest manifest = start_manifest(opts, cfg, "run");
  Stopwatch watch(manifest);
  const bool hyp = cfg.wants("hypothesis") || cfg.wants("weak") || cfg.wants("strong") || cfg.wants("exponential");
  const Experiment e = watch.time("prepare", [&] { return prepare(cfg, true, hyp); });

  std::vector<Report> reports;
  Json harnesses = Json::object();
  bool passed = true;
  auto record = [&](const std::string& name, const HarnessOutcome& o) {
    Json h;
    h["passed"] = o.passed;
    h["constant"] = number_json(o.constant);
    if (!o.failure.empty()) h["failure"] = o.failure;
    harnesses[name] = std::move(h);
    passed = passed && o.passed;
  };
  auto refused = [&](const std::string& name, const Error& err) {
    Report rep{name, Json::object(), "", ""};
    rep.json["harness"] = name;
    rep.json["passed"] = false;
    rep.json["refused"] = true;
    rep.json["failure"] = err.what();
    reports.push_back(std::move(rep));
    record(name, {false, 0, err.what()});
  };
  auto verify = [&](const std::string& name, auto&& fn) {
    if (!cfg.wants(name)) return;
    try {
      const VerifyReport r = watch.time(name, fn);
      reports.push_back({name, to_json(r), rows_csv(r), ""});
      record(name, {r.passed, r.conclusion_constant, r.failure});
    } catch (const Error& err) {
      refused(name, err);
    }
  };
  verify("hypothesis", [&] { return verify_hypothesis(e); });
  verify("weak", [&] { return verify_weak(e); });
  verify("strong", [&] { return verify_strong(e, cfg.r); });
  verify("exponential", [&] { return verify_exponential(e); });
  if (cfg.wants("good_lambda")) {
    try {
      const GoodLambdaReport r = watch.time("good_lambda", [&] {
        return verify_good_lambda(e, cfg.good_lambda.s, cfg.good_lambda.lambda, cfg.good_lambda.points);
      });
      double c = 0;
      for (const auto& g : r.per_resolution) c = std::max(c, g.c);
      reports.push_back({"good_lambda", to_json(r), good_lambda_csv(r), ""});
      record("good_lambda", {r.passed, c, r.failure});
    } catch (const Error& err) {
      refused("good_lambda", err);
    }
  }
  if (cfg.wants("bmo")) {
    try {
      const BmoReport r = watch.time("bmo", [&] { return verify_bmo_equivalence(e, cfg.bmo.ps); });
      double c = 0;
      for (const auto& g : r.per_resolution)
        for (const auto& row : g.rows) c = std::max(c, row.ratio);
      reports.push_back({"bmo", to_json(r), bmo_csv(r), ""});
      record("bmo", {r.passed, c, r.failure});
    } catch (const Error& err) {
      refused("bmo", err);
    }
  }
  if (!e.rungs.empty() && e.rungs.front().weight) {
    Json rh = Json::array();
    bool ok = true;
    watch.time("rh_sets", [&] {
      for (const Rung& r : e.rungs) {
        const RhSetReport s = rh_set_check(r, cfg.rh_p, cfg.seed);
        Json j = to_json(s);
        j["resolution"] = r.resolution;
        rh.push_back(std::move(j));
        ok = ok && s.violations == 0;
      }
      return 0;
    });
    Report rep{"rh_sets", Json::object(), "", ""};
    rep.json["passed"] = ok;
    rep.json["per_resolution"] = std::move(rh);
    reports.push_back(std::move(rep));
  }
  reports.push_back(profile_report(e));

  Report summary{"summary", Json::object(), "", ""};
  summary.json["name"] = cfg.name;
  summary.json["command"] = "run";
  summary.json["seed"] = std::to_string(cfg.seed);
  summary.json["variant"] = to_string(cfg.variant);
  summary.json["family"] = to_string(cfg.family.kind);
  summary.json["config"] = cfg.source;
  Json rungs = Json::array();
  for (const Rung& r : e.rungs) rungs.push_back(rung_json(r));
  summary.json["rungs"] = std::move(rungs);
  summary.json["harnesses"] = std::move(harnesses);
  summary.json["passed"] = passed;
  reports.insert(reports.begin(), std::move(summary));

  manifest.passed = passed;
  finish(manifest, reports, opts);
  return manifest;
}

RunManifest run_profile(const RunOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  RunManifest manifest = start_manifest(opts, cfg, "profile");
  Stopwatch watch(manifest);
  const Experiment e = watch.time("prepare", [&] { return prepare(cfg, true, false); });
  Report rep = profile_report(e);
  bool ok = true;
  for (const auto& [m, p] : profiles_of(e)) ok = ok && p.fit.valid;
  rep.json["fitted"] = ok;
  manifest.passed = true;
  finish(manifest, {rep}, opts);
  return manifest;
}

RunManifest run_audit(const RunOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  RunManifest manifest = start_manifest(opts, cfg, "audit");
  Stopwatch watch(manifest);
  const Experiment e = watch.time("prepare", [&] { return prepare(cfg, true, false); });
  Report rep{"audit", Json::object(), "", ""};
  rep.json["name"] = cfg.name;
  rep.json["family"] = to_string(cfg.family.kind);
  Json rungs = Json::array();
  for (const Rung& r : e.rungs) {
    Json j = to_json(r.audit);
    j["resolution"] = r.resolution;
    if (r.weight_report) j["weight"] = to_json(*r.weight_report);
    rungs.push_back(std::move(j));
  }
  rep.json["per_resolution"] = std::move(rungs);
  manifest.passed = true;
  finish(manifest, {rep}, opts);
  return manifest;
}

RunManifest run_drcheck(const RunOptions& opts) {
  const ExperimentConfig cfg = resolve_config(opts);
  RunManifest manifest = start_manifest(opts, cfg, "drcheck");
  Stopwatch watch(manifest);
  const Experiment e = watch.time("prepare", [&] { return prepare(cfg, true, false); });
  Report rep{"drcheck", Json::object(), "", ""};
  rep.json["name"] = cfg.name;
  rep.json["variant"] = to_string(cfg.variant);
  Json rungs = Json::array();
  bool ok = true;
  watch.time("conditions", [&] {
    for (const Rung& r : e.rungs) {
      const Denominator den = make_denominator(r, cfg.variant, cfg.q);
      Json j;
      j["resolution"] = r.resolution;
      j["functional"] = den.condition_functional->describe();
      const ConditionReport main = condition_for(r, cfg, den, cfg.q, r.weight.get());
      ok = ok && main.passed;
      j["required"] = to_json(main);
      const ProbeSuite suite = make_probe_suite(condition_tops(r.cubes, cfg.condition.max_tops),
                                                cfg.condition.families, hash_combine(cfg.seed, r.resolution),
                                                cfg.condition.strategy, nullptr, cfg.condition.pair_generations);
      Json extra = Json::array();
      for (ConditionKind kind : {ConditionKind::d_infinity, ConditionKind::d_zero, ConditionKind::doubling})
        extra.push_back(to_json(
            estimate_condition(*den.condition_functional, kind, cfg.q, nullptr, suite, nullptr, cfg.condition.cap)));
      j["other"] = std::move(extra);
      rungs.push_back(std::move(j));
    }
    return 0;
  });
  rep.json["per_resolution"] = std::move(rungs);
  rep.json["passed"] = ok;
  manifest.passed = ok;
  finish(manifest, {rep}, opts);
  return manifest;
}

std::string render_summary(const fs::path& dir, bool* passed) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw DataError("no summary.json in " + dir.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& err) {
    throw DataError(std::string("malformed summary.json: ") + err.what());
  }
  std::ostringstream out;
  out << j.value("name", "") << " (" << j.value("family", "") << ", variant " << j.value("variant", "") << ")\n";
  const Json rungs = j.value("rungs", Json::array());
  const Json harnesses = j.value("harnesses", Json::object());
  for (const auto& r : rungs) {
    out << "  m = " << r.value("resolution", 0) << ": " << r.value("cubes", 0) << " cubes";
    if (r.contains("profile") && r["profile"].contains("fit")) {
      const Json& fit = r["profile"]["fit"];
      if (fit.value("valid", false)) out << ", decay c = " << fit["c"].dump() << " residual " << fit["residual"].dump();
    }
    out << "\n";
  }
  for (const auto& [name, h] : harnesses.items()) {
    out << "  " << name << ": " << (h.value("passed", false) ? "pass" : "FAIL") << ", constant "
        << h["constant"].dump();
    if (h.contains("failure")) out << " (" << h["failure"].get<std::string>() << ")";
    out << "\n";
  }
  const bool ok = j.value("passed", false);
  out << (ok ? "passed" : "failed") << "\n";
  if (passed) *passed = ok;
  return out.str();
}

Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["config"] = m.config_path;
  j["out"] = m.out_dir;
  j["seed"] = std::to_string(m.seed);
  j["threads"] = thread_count();
  j["passed"] = m.passed;
  Json arts = Json::array();
  for (const Artifact& a : m.artifacts) arts.push_back({{"name", a.name}, {"bytes", a.bytes}, {"fnv1a64", a.checksum}});
  j["artifacts"] = std::move(arts);
  Json t = Json::object();
  for (const auto& [stage, sec] : m.timings) t[stage] = sec;
  j["timings_seconds"] = std::move(t);
  return j;
}

}  // namespace oscillab::cli
