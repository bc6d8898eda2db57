#pragma once

#include "distreg/types.hpp"

#include <optional>
#include <vector>

namespace distreg {

struct SinkhornOptions {
    double reg = 1e-1;      ///< entropic regularization epsilon
    double tol = 1e-6;      ///< sup-norm marginal violation at convergence
    int max_iter = 2000;
    std::optional<Vector> h_init;   ///< defaults to 0
    bool record_objective = false;  ///< fill objective_trace (one value per iteration)
};

/// Maximizer of the discrete entropic-OT dual between mu and the reference,
/// gauge-fixed so that g is centered against the reference weights.
struct DualSolution {
    Vector h;  ///< potential over mu's atoms
    Vector g;  ///< centered potential over reference atoms
    double residual = 0.0;  ///< max marginal violation of the returned pair
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

/// Solves sup_{h,g} sum_i mu_i h_i + sum_k w_k g_k
///                   - reg * sum_{i,k} mu_i w_k exp((h_i + g_k - c_ik)/reg)
/// with cost c_ik = 0.5 ||x_i - y_k||^2, by log-domain alternating block
/// maximization (Sinkhorn). The log-sum-exp form keeps every iterate finite
/// for arbitrarily small reg. On non-convergence the best iterate is
/// returned with converged = false.
DualSolution solve_dual(const Matrix& mu_points, const Vector& mu_weights,
                        const Matrix& ref_points, const Vector& ref_weights,
                        const SinkhornOptions& options);

DualSolution solve_dual(const Matrix& mu_points, const Vector& mu_weights,
                        const Matrix& ref_points, const Vector& ref_weights, double reg,
                        double tol, int max_iter);

/// g minus its reference-weighted mean.
Vector center_potential(const Vector& g, const Vector& weights);

/// Value of the dual functional above at (h, g).
double dual_objective(const Vector& h, const Vector& g, const Matrix& mu_points,
                      const Vector& mu_weights, const Matrix& ref_points,
                      const Vector& ref_weights, double reg);

/// Half squared Euclidean distances, one row per mu atom.
Matrix transport_cost(const Matrix& mu_points, const Matrix& ref_points);

}  // namespace distreg
