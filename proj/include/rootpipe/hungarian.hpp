#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rootpipe {

/// Minimum-cost assignment for a rows x cols cost matrix (Kuhn-Munkres with
/// potentials, O(n^3)). Rectangular inputs are padded to square with a
/// constant larger than any real cost. Returns, for each row, the assigned
/// column or -1 when the row was matched to padding.
std::vector<int> hungarian(const Eigen::MatrixXd& cost);

/// Sum of cost(r, assignment[r]) over assigned rows.
double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& assignment);

}  // namespace rootpipe
