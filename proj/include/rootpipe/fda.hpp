#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rootpipe/rsa_metrics.hpp"

namespace rootpipe {

/// Curves resampled on a common uniform grid and fitted with monomials
/// 1, t, ..., t^degree on the normalized domain t in [0, 1].
struct SmoothedCollection {
    std::vector<std::string> ids;
    std::vector<double> grid;        // normalized, m points
    std::vector<double> grid_hours;  // same points in hours
    Eigen::MatrixXd values;          // n x m, linear interpolation of the raw series
    Eigen::MatrixXd coefficients;    // n x (degree + 1)
    int degree = 0;

    /// Fitted curves on the grid, n x m.
    [[nodiscard]] Eigen::MatrixXd fitted() const;
};

/// Resamples every series over the common observation window (latest start to
/// earliest end) and fits the monomial basis by least squares.
SmoothedCollection smooth(std::span<const MetricSeries> series, int degree, int grid_size);

/// Basis functions sampled on the grid plus their L2 inner products.
struct FunctionalBasis {
    std::vector<double> grid;
    Eigen::MatrixXd evaluation;  // m x p
    Eigen::MatrixXd gram;        // p x p, symmetric positive definite
    int degree = -1;             // -1 for the grid basis
};

/// Monomials on [0, 1]; gram(j, k) = 1 / (j + k + 1).
FunctionalBasis monomial_basis(int degree, std::span<const double> grid);
/// Identity basis on the grid with trapezoid quadrature weights.
FunctionalBasis grid_basis(std::span<const double> grid);

struct FpcaOptions {
    double variance_target = 0.99;
    int max_components = 10;
};

struct FunctionalDecomposition {
    std::vector<double> grid;
    Eigen::VectorXd mean_fn;                 // m
    Eigen::MatrixXd components;              // r x m, L2-orthonormal
    Eigen::MatrixXd component_coefficients;  // p x r
    std::vector<double> explained_variance;  // r ratios, non-increasing
    Eigen::MatrixXd scores;                  // n x r
    int basis_degree = -1;

    [[nodiscard]] int num_components() const { return static_cast<int>(components.rows()); }
};

/// Functional PCA of curves given as basis coefficients (n x p). Components
/// are kept until their cumulative explained variance reaches the target or
/// the cap is hit. Each component's largest-magnitude grid value is positive.
FunctionalDecomposition decompose(const Eigen::MatrixXd& coefficients, const FunctionalBasis& basis,
                                  const FpcaOptions& options = {});

/// mean + quantile(score_k, q) * component_k for each q (type-7 quantiles).
/// A decomposition without components yields the mean for every q.
std::vector<Eigen::VectorXd> quantile_reconstructions(const FunctionalDecomposition& dec, int component,
                                                      std::span<const double> quantiles);

/// Type-7 sample quantile.
double sample_quantile(std::vector<double> values, double q);

}  // namespace rootpipe
