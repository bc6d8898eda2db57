#include "distreg/sinkhorn.hpp"

#include "distreg/error.hpp"

#include <cmath>
#include <limits>

namespace distreg {

namespace {

void check_weights(const Vector& w, const char* name) {
    if (w.size() < 1) throw ValidationError(std::string(name) + ": empty weight vector");
    if ((w.array() <= 0.0).any()) {
        throw ValidationError(std::string(name) + ": weights must be strictly positive");
    }
    if (std::abs(w.sum() - 1.0) > 1e-9) {
        throw ValidationError(std::string(name) + ": weights must sum to 1");
    }
}

// Row-wise log-sum-exp of scores + broadcast offsets; out[i] = LSE_k(scores(i,k) + offset[k]).
void lse_rows(const Matrix& scores, const Vector& offset, Vector& out, Matrix& work) {
    work = scores.rowwise() + offset.transpose();
    const Vector row_max = work.rowwise().maxCoeff();
    work.colwise() -= row_max;
    out = row_max.array() + work.array().exp().rowwise().sum().log();
}

void lse_cols(const Matrix& scores, const Vector& offset, Vector& out, Matrix& work) {
    work = scores.colwise() + offset;
    const Vector col_max = work.colwise().maxCoeff().transpose();
    work.rowwise() -= col_max.transpose();
    out = col_max.array() + work.array().exp().colwise().sum().transpose().array().log();
}

}  // namespace

Matrix transport_cost(const Matrix& mu_points, const Matrix& ref_points) {
    if (mu_points.cols() != ref_points.cols()) {
        throw ValidationError("transport_cost: point clouds have different dimensions");
    }
    const Vector mu_sq = mu_points.rowwise().squaredNorm();
    const Vector ref_sq = ref_points.rowwise().squaredNorm();
    Matrix cost = -mu_points * ref_points.transpose();
    cost.colwise() += 0.5 * mu_sq;
    cost.rowwise() += 0.5 * ref_sq.transpose();
    return cost.cwiseMax(0.0);
}

Vector center_potential(const Vector& g, const Vector& weights) {
    if (g.size() != weights.size()) {
        throw ValidationError("center_potential: length mismatch");
    }
    return g.array() - weights.dot(g);
}

double dual_objective(const Vector& h, const Vector& g, const Matrix& mu_points,
                      const Vector& mu_weights, const Matrix& ref_points,
                      const Vector& ref_weights, double reg) {
    const Matrix cost = transport_cost(mu_points, ref_points);
    double mass = 0.0;
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
        for (Eigen::Index k = 0; k < cost.cols(); ++k) {
            mass += mu_weights[i] * ref_weights[k] * std::exp((h[i] + g[k] - cost(i, k)) / reg);
        }
    }
    return mu_weights.dot(h) + ref_weights.dot(g) - reg * mass;
}

DualSolution solve_dual(const Matrix& mu_points, const Vector& mu_weights,
                        const Matrix& ref_points, const Vector& ref_weights,
                        const SinkhornOptions& options) {
    check_weights(mu_weights, "mu_weights");
    check_weights(ref_weights, "ref_weights");
    if (mu_points.rows() != mu_weights.size() || ref_points.rows() != ref_weights.size()) {
        throw ValidationError("solve_dual: points/weights size mismatch");
    }
    if (options.reg <= 0.0) throw ValidationError("solve_dual: reg must be > 0");
    if (options.tol <= 0.0) throw ValidationError("solve_dual: tol must be > 0");
    if (options.max_iter < 1) throw ValidationError("solve_dual: max_iter must be >= 1");

    const double eps = options.reg;
    const Eigen::Index n = mu_points.rows();
    const Eigen::Index m = ref_points.rows();

    // scores(i,k) = -c_ik / eps, fixed throughout.
    const Matrix scores = -transport_cost(mu_points, ref_points) / eps;
    const Vector log_mu = mu_weights.array().log();
    const Vector log_ref = ref_weights.array().log();

    Vector h = options.h_init.value_or(Vector::Zero(n));
    if (h.size() != n) throw ValidationError("solve_dual: h_init has wrong length");

    DualSolution sol;
    Matrix work(n, m);
    Vector lse(n), g(m), h_new(n);

    // Columns are made exact first so that the residual of the pair under
    // test is always carried by the rows alone.
    lse_cols(scores, log_mu + h / eps, lse, work);
    g = -eps * lse;

    const auto record = [&](const Vector& hh, const Vector& gg) {
        if (options.record_objective) {
            sol.objective_trace.push_back(
                dual_objective(hh, gg, mu_points, mu_weights, ref_points, ref_weights, eps));
        }
    };
    record(h, g);

    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    int iter = 0;
    while (iter < options.max_iter) {
        ++iter;
        // Candidate h-update; the gap to the current h measures the row
        // marginal violation of the current (h, g) pair.
        lse_rows(scores, log_ref + g / eps, lse, work);
        h_new = -eps * lse;
        residual =
            (mu_weights.array() * (((h - h_new) / eps).array().exp() - 1.0).abs()).maxCoeff();
        if (!std::isfinite(h_new.maxCoeff()) || !std::isfinite(h_new.minCoeff())) {
            throw NumericalError("solve_dual: non-finite potential (log-sum-exp bug)");
        }
        if (residual <= options.tol) {
            converged = true;
            break;
        }
        h = h_new;
        lse_cols(scores, log_mu + h / eps, lse, work);
        g = -eps * lse;
        record(h, g);
    }

    // Gauge fix: move the weighted mean of g into h; h + g is unchanged.
    const double shift = ref_weights.dot(g);
    sol.h = h.array() + shift;
    sol.g = g.array() - shift;
    sol.residual = residual;
    sol.iterations = iter;
    sol.converged = converged;
    return sol;
}

DualSolution solve_dual(const Matrix& mu_points, const Vector& mu_weights,
                        const Matrix& ref_points, const Vector& ref_weights, double reg,
                        double tol, int max_iter) {
    SinkhornOptions options;
    options.reg = reg;
    options.tol = tol;
    options.max_iter = max_iter;
    return solve_dual(mu_points, mu_weights, ref_points, ref_weights, options);
}

}  // namespace distreg
