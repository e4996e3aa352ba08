#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace tvvar::eval {

struct Options {
    bool full = false;             // include the large-scale run (criterion 9)
    std::vector<int> only;         // restrict to these criterion ids when nonempty
    std::string fault;             // negative-control hook: "update_W" corrupts that update
    std::uint64_t seed = 20240601;
    bool verbose = false;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    double runtime = 0.0;        // seconds
    double runtime_limit = 0.0;  // seconds
    nlohmann::json measured = nlohmann::json::object();
    std::string detail;
};

inline constexpr int kCriterionCount = 9;

CriterionResult run_criterion(int id, const Options& options);
std::vector<CriterionResult> run_suite(const Options& options);

// {"suite", "passed", "criteria": [{id, name, passed, runtime_s,
//   runtime_limit_s, measured, detail}]}
nlohmann::json report_json(const std::vector<CriterionResult>& results, const Options& options);

// Validates a report against the schema above; returns an empty string when
// it conforms, otherwise the first problem found.
std::string check_report_schema(const nlohmann::json& report);

// "PASS [3] gradient suite (0.41 s) ..." style line.
std::string summary_line(const CriterionResult& r);

} // namespace tvvar::eval
