#include "rootpipe/fda.hpp"

#include <algorithm>
#include <cmath>

namespace rootpipe {

namespace {

// Piecewise-linear value of (t, v) at x; t strictly increasing, x within range.
double interpolate(const std::vector<double>& t, const std::vector<double>& v, double x) {
    if (x <= t.front()) return v.front();
    if (x >= t.back()) return v.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
    const std::size_t lo = hi - 1;
    const double f = (x - t[lo]) / (t[hi] - t[lo]);
    return v[lo] + f * (v[hi] - v[lo]);
}

Eigen::MatrixXd vandermonde(std::span<const double> grid, int degree) {
    Eigen::MatrixXd e(static_cast<Eigen::Index>(grid.size()), degree + 1);
    for (Eigen::Index i = 0; i < e.rows(); ++i) {
        double p = 1.0;
        for (int k = 0; k <= degree; ++k) {
            e(i, k) = p;
            p *= grid[i];
        }
    }
    return e;
}

}  // namespace

Eigen::MatrixXd SmoothedCollection::fitted() const {
    return coefficients * vandermonde(grid, degree).transpose();
}

SmoothedCollection smooth(std::span<const MetricSeries> series, int degree, int grid_size) {
    if (series.empty()) throw ValidationError("no series to smooth");
    if (degree < 0) throw ValidationError("basis degree must be non-negative");
    if (grid_size < degree + 1 || grid_size < 2) throw ValidationError("grid too small for the basis degree");

    double start = -std::numeric_limits<double>::infinity();
    double end = std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        s.validate();
        if (static_cast<int>(s.samples.size()) < degree + 1)
            throw ValidationError("series '" + s.plant_id + "' has fewer than degree + 1 samples");
        start = std::max(start, s.samples.front().time_hours);
        end = std::min(end, s.samples.back().time_hours);
    }
    if (!(end > start)) throw ValidationError("series share no common observation window");

    SmoothedCollection out;
    out.degree = degree;
    const auto n = static_cast<Eigen::Index>(series.size());
    for (int i = 0; i < grid_size; ++i) {
        const double u = static_cast<double>(i) / (grid_size - 1);
        out.grid.push_back(u);
        out.grid_hours.push_back(start + u * (end - start));
    }
    out.values.resize(n, grid_size);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& s = series[r];
        out.ids.push_back(s.plant_id);
        const auto t = s.times();
        const auto v = s.values();
        for (int i = 0; i < grid_size; ++i) out.values(r, i) = interpolate(t, v, out.grid_hours[i]);
    }
    const Eigen::MatrixXd e = vandermonde(out.grid, degree);
    const auto qr = e.householderQr();
    out.coefficients.resize(n, degree + 1);
    for (Eigen::Index r = 0; r < n; ++r) out.coefficients.row(r) = qr.solve(out.values.row(r).transpose()).transpose();
    return out;
}

FunctionalBasis monomial_basis(int degree, std::span<const double> grid) {
    if (degree < 0) throw ValidationError("basis degree must be non-negative");
    FunctionalBasis b;
    b.grid.assign(grid.begin(), grid.end());
    b.degree = degree;
    b.evaluation = vandermonde(grid, degree);
    b.gram.resize(degree + 1, degree + 1);
    for (int j = 0; j <= degree; ++j)
        for (int k = 0; k <= degree; ++k) b.gram(j, k) = 1.0 / (j + k + 1);
    return b;
}

FunctionalBasis grid_basis(std::span<const double> grid) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    if (m < 2) throw ValidationError("grid needs at least two points");
    FunctionalBasis b;
    b.grid.assign(grid.begin(), grid.end());
    b.evaluation = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        const double h = grid[i + 1] - grid[i];
        if (!(h > 0.0)) throw ValidationError("grid must be strictly increasing");
        w(i) += h / 2.0;
        w(i + 1) += h / 2.0;
    }
    b.gram = w.asDiagonal();
    return b;
}

FunctionalDecomposition decompose(const Eigen::MatrixXd& coefficients, const FunctionalBasis& basis,
                                  const FpcaOptions& options) {
    const Eigen::Index n = coefficients.rows();
    const Eigen::Index p = coefficients.cols();
    if (n < 1) throw ValidationError("no curves to decompose");
    if (p != basis.gram.rows() || p != basis.evaluation.cols())
        throw ValidationError("coefficients do not match the basis");

    FunctionalDecomposition dec;
    dec.grid = basis.grid;
    dec.basis_degree = basis.degree;
    const Eigen::RowVectorXd mean = coefficients.colwise().mean();
    dec.mean_fn = basis.evaluation * mean.transpose();
    dec.components.resize(0, basis.evaluation.rows());
    dec.component_coefficients.resize(p, 0);
    dec.scores.resize(n, 0);
    if (n < 2) return dec;

    const Eigen::MatrixXd centered = coefficients.rowwise() - mean;
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

    // W^(1/2) and W^(-1/2) from the symmetric eigendecomposition of the gram.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ws(basis.gram);
    if (ws.eigenvalues().minCoeff() <= 0.0) throw ValidationError("basis gram matrix is not positive definite");
    const Eigen::VectorXd sq = ws.eigenvalues().cwiseSqrt();
    const Eigen::MatrixXd w_half = ws.eigenvectors() * sq.asDiagonal() * ws.eigenvectors().transpose();
    const Eigen::MatrixXd w_inv_half = ws.eigenvectors() * sq.cwiseInverse().asDiagonal() * ws.eigenvectors().transpose();

    Eigen::MatrixXd m = w_half * cov * w_half;
    m = 0.5 * (m + m.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd lambda = es.eigenvalues().reverse().cwiseMax(0.0);
    const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
    const double total = lambda.sum();
    if (!(total > 0.0)) return dec;

    int r = 0;
    double cumulative = 0.0;
    while (r < p && r < options.max_components && lambda(r) > total * 1e-12) {
        cumulative += lambda(r) / total;
        ++r;
        if (cumulative >= options.variance_target) break;
    }

    Eigen::MatrixXd phi = w_inv_half * u.leftCols(r);
    Eigen::MatrixXd funcs = (basis.evaluation * phi).transpose();  // r x m
    for (int k = 0; k < r; ++k) {
        Eigen::Index at = 0;
        funcs.row(k).cwiseAbs().maxCoeff(&at);
        if (funcs(k, at) < 0.0) {
            funcs.row(k) *= -1.0;
            phi.col(k) *= -1.0;
        }
        dec.explained_variance.push_back(lambda(k) / total);
    }
    dec.components = funcs;
    dec.component_coefficients = phi;
    dec.scores = centered * basis.gram * phi;
    return dec;
}

double sample_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw ValidationError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<Eigen::VectorXd> quantile_reconstructions(const FunctionalDecomposition& dec, int component,
                                                      std::span<const double> quantiles) {
    std::vector<Eigen::VectorXd> out;
    if (dec.num_components() == 0) {
        for (double q : quantiles) {
            if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile must lie in [0, 1]");
            out.push_back(dec.mean_fn);
        }
        return out;
    }
    if (component < 0 || component >= dec.num_components())
        throw ValidationError("component index " + std::to_string(component) + " out of range");
    std::vector<double> s(dec.scores.rows());
    for (Eigen::Index i = 0; i < dec.scores.rows(); ++i) s[i] = dec.scores(i, component);
    for (double q : quantiles)
        out.push_back(dec.mean_fn + sample_quantile(s, q) * dec.components.row(component).transpose());
    return out;
}

}  // namespace rootpipe
