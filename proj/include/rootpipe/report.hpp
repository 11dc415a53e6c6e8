#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rootpipe/pipeline.hpp"
#include "rootpipe/stats.hpp"

namespace rootpipe {

/// Quotes a CSV field when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);
/// Splits one CSV record, honouring double-quoted fields.
std::vector<std::string> split_csv_line(std::string_view line);

struct GroupComparison {
    std::string metric;
    std::optional<double> time_hours;  // missing for FPCA score comparisons
    std::string group_a;
    std::string group_b;
    int n_a = 0;
    int n_b = 0;
    std::optional<MannWhitneyResult> test;  // missing when a group has no data
};

/// Value of `series` at `t`: the latest sample at or before t, if any.
std::optional<double> value_at(const MetricSeries& series, double t);

/// Mann-Whitney comparisons of every group pair for every metric at each
/// report time, then of every FPCA score column.
std::vector<GroupComparison> compare_groups(const ExperimentResult& result);

/// Writes the report bundle under `dir` and returns the written paths,
/// relative to `dir`, in writing order. Files are rewritten from scratch.
std::vector<std::string> write_report(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace rootpipe
