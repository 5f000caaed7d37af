#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iwa/group.hpp"
#include "iwa/report.hpp"

namespace iwa::tools {

inline constexpr int kReportVersion = 1;

struct SuiteConfig {
    std::optional<int> precision;  // overrides the descriptor
    int truncation = 12;
    std::optional<int> m1;         // raised initial power
    std::uint64_t seed = 1;
    std::optional<int> mahler_cap; // default truncation - 1
    int samples = 500;
    bool parallel = true;
};

// Suite names in run order.
const std::vector<std::string>& suite_names();

// Runs one suite; library errors become an Error record instead of escaping.
Report run_suite(const std::string& name, const GroupDescriptor& desc, const SuiteConfig& cfg);

// All suites (or the one named), records sorted by suite then id.
std::vector<Report> verify_all(const GroupDescriptor& desc, const SuiteConfig& cfg,
                               const std::optional<std::string>& only = std::nullopt);

struct GroupCheck {
    Report report;
    bool abelian = false;
    bool split = false;
    bool lattice_split = false;
    int uniform_level = 0;
    std::optional<int> initial_power;
    std::vector<std::string> z_basis;
};

GroupCheck group_check(const GroupDescriptor& desc, const SuiteConfig& cfg);

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct TableOptions {
    std::optional<std::vector<int>> alpha;  // mahler-coeffs: a single multi-index
    std::optional<int> m;                   // mahler-coeffs level
    int max_degree = 2;                     // mahler-coeffs: |alpha| bound
    int growth_m = 4;
};

// what in {mahler-coeffs, lazard-values, growth, kbasis}; DomainError otherwise.
Table make_table(const std::string& what, const GroupDescriptor& desc, const SuiteConfig& cfg,
                 const TableOptions& opt);

std::string format_text(const std::vector<Report>& reports, const GroupDescriptor& desc, const SuiteConfig& cfg);
std::string format_json(const std::vector<Report>& reports, const GroupDescriptor& desc, const SuiteConfig& cfg);
std::string format_table_text(const Table& t);
std::string format_table_json(const Table& t);

bool all_passed(const std::vector<Report>& reports);

}  // namespace iwa::tools
