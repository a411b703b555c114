#include "oscillab/report_json.hpp"

#include <cmath>

namespace oscillab {

Json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

Json numbers(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_json(x));
  return out;
}

Json number_map(const std::map<double, double>& m) {
  Json out = Json::array();
  for (const auto& [p, c] : m) out.push_back({{"p", number_json(p)}, {"constant", number_json(c)}});
  return out;
}

}  // namespace

Json to_json(const Cube& q) {
  Json anchor = Json::array({q.anchor_cell(0)});
  if (q.dimension() == 2) anchor.push_back(q.anchor_cell(1));
  return {{"anchor", anchor}, {"side", q.side_cells()}, {"sidelength", q.sidelength()}};
}

Json to_json(const CubeRow& row) {
  return {{"cube", to_json(row.cube)},
          {"numerator", number_json(row.numerator)},
          {"denominator", number_json(row.denominator)},
          {"ratio", number_json(row.ratio)}};
}

Json to_json(const DecayFit& fit) {
  return {{"valid", fit.valid},          {"C", number_json(fit.C)},
          {"c", number_json(fit.c)},     {"intercept", number_json(fit.intercept)},
          {"residual", number_json(fit.residual)}, {"k_first", fit.k_first},
          {"k_last", fit.k_last}};
}

Json to_json(const OffDiagonalProfile& p) {
  return {{"p0", number_json(p.exponents.p0)},
          {"q0", number_json(p.exponents.q0)},
          {"dimension", p.dimension},
          {"alpha", numbers(p.alpha)},
          {"beta", numbers(p.beta)},
          {"probes", p.probe_description},
          {"cubes", p.cubes},
          {"probe_count", p.probes},
          {"fit", to_json(p.fit)}};
}

Json to_json(const AuditReport& a) {
  return {{"kind", to_string(a.kind)},
          {"commutator", number_json(a.commutator)},
          {"uniform_bound", number_json(a.uniform_bound)},
          {"localization", a.localization},
          {"localization_defect", number_json(a.localization_defect)},
          {"replace_comm", a.replace_comm},
          {"replace_comm_defect", number_json(a.replace_comm_defect)},
          {"side_determined", a.side_determined},
          {"pairs", a.pairs},
          {"probes", a.probes}};
}

Json to_json(const WeightReport& r) {
  return {{"ap", number_map(r.ap)},
          {"rh", number_map(r.rh)},
          {"theta", number_json(r.theta)},
          {"cubes_sampled", r.cubes_sampled},
          {"seed", r.seed}};
}

Json to_json(const ConditionReport& r) {
  return {{"condition", to_string(r.kind)},
          {"r", number_json(r.r)},
          {"measured_constant", number_json(r.measured_constant)},
          {"weighted", r.weighted},
          {"families", {{"seed", r.seed}, {"count", r.family_count}, {"strategy", r.strategy}}},
          {"probes", r.probes},
          {"cap", number_json(r.cap)},
          {"passed", r.passed},
          {"worst", r.worst.resolution() > 1 ? to_json(r.worst) : Json()}};
}

Json to_json(const HypothesisReport& r, bool with_rows) {
  Json out = {{"constant", number_json(r.constant)},
              {"k0_constant", number_json(r.k0_constant)},
              {"k1_constant", number_json(r.k1_constant)},
              {"higher_constant", number_json(r.higher_constant)},
              {"k_max", r.k_max},
              {"worst", to_json(r.worst)},
              {"worst_k", r.worst_k}};
  if (r.side_reduction)
    out["side_reduction"] = {{"dp0_constant", number_json(r.dp0_constant)},
                             {"bound", number_json(r.side_reduction_bound)}};
  if (with_rows) {
    Json rows = Json::array();
    for (const CubeRow& row : r.rows) rows.push_back(to_json(row));
    out["rows"] = rows;
  }
  return out;
}

Json to_json(const RungReport& r, bool with_rows) {
  Json diag = Json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = number_json(v);
  Json out = {{"resolution", r.resolution},
              {"hypothesis_constant", number_json(r.hypothesis_constant)},
              {"constant", number_json(r.constant)},
              {"worst", to_json(r.worst)},
              {"cubes", r.rows.size()},
              {"diagnostics", diag},
              {"warnings", r.warnings}};
  if (r.condition) out["condition"] = to_json(*r.condition);
  if (with_rows) {
    Json rows = Json::array();
    for (const CubeRow& row : r.rows) rows.push_back(to_json(row));
    out["rows"] = rows;
  }
  return out;
}

Json to_json(const VerifyReport& r, bool with_rows) {
  Json rungs = Json::array();
  for (const RungReport& rr : r.per_resolution) rungs.push_back(to_json(rr, with_rows));
  return {{"harness", r.harness},
          {"variant", r.variant},
          {"hypothesis_constant", number_json(r.hypothesis_constant)},
          {"conclusion_constant", number_json(r.conclusion_constant)},
          {"per_resolution", rungs},
          {"passed", r.passed},
          {"failure", r.failure}};
}

Json to_json(const GoodLambdaReport& r, bool with_rows) {
  Json rungs = Json::array();
  for (const GoodLambdaRung& gr : r.per_resolution) {
    Json g = {{"resolution", gr.resolution},
              {"c", number_json(gr.c)},
              {"c0", number_json(gr.c0)},
              {"bq2_defect", number_json(gr.bq2_defect)},
              {"rows", gr.rows.size()}};
    if (with_rows) {
      Json rows = Json::array();
      for (const GoodLambdaRow& row : gr.rows)
        rows.push_back({{"cube", to_json(row.cube)},
                        {"t", number_json(row.t)},
                        {"lhs", number_json(row.lhs)},
                        {"structural", number_json(row.structural)},
                        {"tail", number_json(row.tail)},
                        {"c", number_json(row.c)},
                        {"branch", row.whitney_branch ? "whitney" : "trivial"},
                        {"whitney_cubes", row.whitney_cubes},
                        {"floor_cubes", row.floor_cubes},
                        {"whitney_ok", row.whitney_ok}});
      g["rows"] = rows;
    }
    rungs.push_back(g);
  }
  return {{"harness", "good_lambda"},
          {"s", number_json(r.s)},
          {"lambda", number_json(r.lambda)},
          {"per_resolution", rungs},
          {"trivial_branch", r.trivial_branch},
          {"whitney_branch", r.whitney_branch},
          {"whitney_invariants", r.whitney_invariants},
          {"decompositions", r.decompositions},
          {"floor_cubes", r.floor_cubes},
          {"passed", r.passed},
          {"failure", r.failure}};
}

Json to_json(const BmoReport& r) {
  Json rungs = Json::array();
  for (const BmoRung& br : r.per_resolution) {
    Json rows = Json::array();
    for (const BmoRow& row : br.rows)
      rows.push_back({{"field", row.field},
                      {"alpha", number_json(row.alpha)},
                      {"seminorms", numbers(row.seminorms)},
                      {"ratio", number_json(row.ratio)},
                      {"monotone", row.monotone},
                      {"jn2", numbers(row.jn2)}});
    rungs.push_back({{"resolution", br.resolution}, {"rows", rows}});
  }
  return {{"harness", "bmo"},
          {"ps", numbers(r.ps)},
          {"situation", r.situation},
          {"per_resolution", rungs},
          {"monotone", r.monotone},
          {"passed", r.passed},
          {"failure", r.failure}};
}

Json to_json(const RhSetReport& r) {
  return {{"p", number_json(r.p)},
          {"constant", number_json(r.constant)},
          {"checked", r.checked},
          {"violations", r.violations},
          {"worst_margin", number_json(r.worst_margin)}};
}

Json to_json(const Sequence& s, int head) {
  return {{"description", s.describe()}, {"head", numbers(s.head(head))}};
}

}  // namespace oscillab
