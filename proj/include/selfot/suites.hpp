#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace selfot {

// One machine-readable verdict: {suite, check, inputs, statistic, threshold,
// comparison, verdict}.
using CheckRecord = nlohmann::json;

// Known suites: prop1, prop3, thm2, frobenius, compare, all.
bool is_known_suite(const std::string& name);

// Runs a validation suite at its default grid. Records come back in a fixed
// order independent of the thread count.
std::vector<CheckRecord> run_suite(const std::string& name, std::uint64_t seed);

inline bool record_passed(const CheckRecord& r) { return r.at("verdict") == "pass"; }

}  // namespace selfot
