#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rootpipe {

enum class MwMethod { automatic, exact, normal };

struct MannWhitneyResult {
    double u = 0.0;        // U of the first sample
    double p_value = 1.0;  // two-sided
    bool exact = false;
};

/// Two-sided Mann-Whitney U test. Automatic mode enumerates the exact null
/// when n_a + n_b <= 12 and there are no ties, and otherwise uses the normal
/// approximation with tie and continuity corrections.
MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b,
                               MwMethod method = MwMethod::automatic);

struct Summary {
    int n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation; 0 for one value
    double se = 0.0;
};

/// Empty input gives n = 0 with every moment left at zero.
Summary summarize(std::span<const double> values);

/// "**" below 0.001, "*" below 0.05, otherwise empty.
std::string significance_marker(double p);

/// Fixed 6-significant-digit rendering used in every output file.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

}  // namespace rootpipe
