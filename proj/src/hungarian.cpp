#include "rootpipe/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rootpipe/common.hpp"

namespace rootpipe {

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    const int rows = static_cast<int>(cost.rows());
    const int cols = static_cast<int>(cost.cols());
    if (rows == 0) return {};
    if (cols == 0) return std::vector<int>(rows, -1);
    if (!cost.allFinite()) throw ValidationError("assignment costs must be finite");

    const int n = std::max(rows, cols);
    const double pad = cost.cwiseAbs().maxCoeff() * 2.0 + 1.0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(n, n, pad);
    a.topLeftCorner(rows, cols) = cost;

    // 1-based potentials formulation; p[j] = row matched to column j.
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> out(rows, -1);
    for (int j = 1; j <= n; ++j) {
        const int r = p[j] - 1;
        if (r < rows && j - 1 < cols) out[r] = j - 1;
    }
    return out;
}

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& assignment) {
    double s = 0.0;
    for (std::size_t r = 0; r < assignment.size(); ++r)
        if (assignment[r] >= 0) s += cost(static_cast<Eigen::Index>(r), assignment[r]);
    return s;
}

}  // namespace rootpipe
