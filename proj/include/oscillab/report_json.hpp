#pragma once

#include "oscillab/config.hpp"
#include "oscillab/verify.hpp"

namespace oscillab {

// Finite numbers as JSON numbers; +-inf and nan as strings.
Json number_json(double v);

Json to_json(const Cube& q);
Json to_json(const CubeRow& row);
Json to_json(const DecayFit& fit);
Json to_json(const OffDiagonalProfile& profile);
Json to_json(const AuditReport& audit);
Json to_json(const WeightReport& report);
Json to_json(const ConditionReport& report);
Json to_json(const HypothesisReport& report, bool with_rows = false);
Json to_json(const RungReport& report, bool with_rows = false);
Json to_json(const VerifyReport& report, bool with_rows = false);
Json to_json(const GoodLambdaReport& report, bool with_rows = false);
Json to_json(const BmoReport& report);
Json to_json(const RhSetReport& report);
Json to_json(const Sequence& s, int head = 12);

}  // namespace oscillab
