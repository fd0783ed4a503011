#pragma once

// Discretization of the weighted functional
//
//   J_h(u) = m/2 int_0^S |u''(s)|^2 e^{-s} ds - h^{-2} int_0^S f_h(s/h) . u(s) e^{-s} ds
//
// on cubic Hermite elements in the slow variable s = h t, minimized subject to
// u(0) = u0, u'(0) = v0 / h. The minimizer is read back in the fast variable by
// y(t) = u(h t).

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "wie/errors.hpp"
#include "wie/forces.hpp"
#include "wie/model.hpp"
#include "wie/quadrature.hpp"
#include "wie/vector.hpp"

namespace wie {

/// Symmetric banded matrix in LAPACK lower band storage (column major):
/// entry (i, j), j <= i <= j + kd, lives at data[(i - j) + j * (kd + 1)].
class SymmetricBandMatrix {
public:
    SymmetricBandMatrix() = default;
    SymmetricBandMatrix(std::size_t n, std::size_t kd) : n_(n), kd_(kd), data_((kd + 1) * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    std::size_t half_bandwidth() const noexcept { return kd_; }
    std::size_t ldab() const noexcept { return kd_ + 1; }

    bool in_band(std::size_t i, std::size_t j) const noexcept { return (i > j ? i - j : j - i) <= kd_; }

    double operator()(std::size_t i, std::size_t j) const noexcept {
        if (i < j) std::swap(i, j);
        return i - j <= kd_ ? data_[(i - j) + j * ldab()] : 0.0;
    }

    /// Adds v at (i, j); the caller passes each unordered pair once with i >= j.
    void add_lower(std::size_t i, std::size_t j, double v) noexcept { data_[(i - j) + j * ldab()] += v; }

    double* data() noexcept { return data_.data(); }
    const std::vector<double>& storage() const noexcept { return data_; }

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t last = std::min(n_ - 1, j + kd_);
            const auto jj = static_cast<Eigen::Index>(j);
            y[jj] += data_[j * ldab()] * x[jj];
            for (std::size_t i = j + 1; i <= last; ++i) {
                const double a = data_[(i - j) + j * ldab()];
                const auto ii = static_cast<Eigen::Index>(i);
                y[ii] += a * x[jj];
                y[jj] += a * x[ii];
            }
        }
        return y;
    }

    /// sum_j |a_ij x_j| for every row i.
    Eigen::VectorXd abs_multiply(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t last = std::min(n_ - 1, j + kd_);
            const auto jj = static_cast<Eigen::Index>(j);
            y[jj] += std::abs(data_[j * ldab()] * x[jj]);
            for (std::size_t i = j + 1; i <= last; ++i) {
                const double a = data_[(i - j) + j * ldab()];
                const auto ii = static_cast<Eigen::Index>(i);
                y[ii] += std::abs(a * x[jj]);
                y[jj] += std::abs(a * x[ii]);
            }
        }
        return y;
    }

    /// Trailing principal submatrix starting at row/column `first`.
    SymmetricBandMatrix trailing(std::size_t first) const {
        SymmetricBandMatrix out(n_ - first, kd_);
        for (std::size_t j = first; j < n_; ++j)
            for (std::size_t i = j; i <= std::min(n_ - 1, j + kd_); ++i)
                out.data_[(i - j) + (j - first) * ldab()] = data_[(i - j) + j * ldab()];
        return out;
    }

private:
    std::size_t n_ = 0;
    std::size_t kd_ = 0;
    std::vector<double> data_;
};

/// 1/2 x^T A x - b . x with some entries of x fixed.
///
/// Degrees of freedom are ordered node by node; node i, component c owns
/// index i * 2N + 2c (value) and i * 2N + 2c + 1 (slope).
struct WeightedQuadraticForm {
    std::size_t dim = 0;
    Eigen::Index components = 1;
    SymmetricBandMatrix band;
    Eigen::VectorXd linear;
    std::vector<std::pair<std::size_t, double>> constrained_dofs;

    double quadratic(const Eigen::VectorXd& x) const { return 0.5 * x.dot(band.multiply(x)); }
    double value(const Eigen::VectorXd& x) const { return quadratic(x) - linear.dot(x); }
};

inline std::size_t dof_index(std::size_t node, Eigen::Index component, int slope, Eigen::Index components) {
    return node * 2 * static_cast<std::size_t>(components) + 2 * static_cast<std::size_t>(component) +
           static_cast<std::size_t>(slope);
}

/// Flattens a trajectory's node data into the dof ordering above.
inline Eigen::VectorXd to_coefficients(const HermiteTrajectory& traj) {
    const Eigen::Index n = traj.dim();
    Eigen::VectorXd x(static_cast<Eigen::Index>(traj.grid.size()) * 2 * n);
    for (std::size_t i = 0; i < traj.grid.size(); ++i)
        for (Eigen::Index c = 0; c < n; ++c) {
            x[static_cast<Eigen::Index>(dof_index(i, c, 0, n))] = traj.values[i][c];
            x[static_cast<Eigen::Index>(dof_index(i, c, 1, n))] = traj.slopes[i][c];
        }
    return x;
}

inline HermiteTrajectory from_coefficients(const TimeGrid& grid, const Eigen::VectorXd& x, Eigen::Index components) {
    std::vector<Vector> values(grid.size(), Vector(components));
    std::vector<Vector> slopes(grid.size(), Vector(components));
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (Eigen::Index c = 0; c < components; ++c) {
            values[i][c] = x[static_cast<Eigen::Index>(dof_index(i, c, 0, components))];
            slopes[i][c] = x[static_cast<Eigen::Index>(dof_index(i, c, 1, components))];
        }
    return HermiteTrajectory(grid, std::move(values), std::move(slopes));
}

/// Assembles the discrete J_h on `grid`. Element order can be permuted (for
/// testing that the result does not depend on it); pass an empty vector for
/// the natural order.
inline WeightedQuadraticForm assemble(const CauchyProblem& problem, const TimeGrid& grid, int h, const Force& f_h,
                                      int quad_order = 6, const std::vector<std::size_t>& element_order = {}) {
    problem.validate();
    if (h < 1) throw InvalidArgument("assemble: h must be a positive integer");
    if (f_h.dim() != problem.dim()) throw InvalidArgument("assemble: force dimension does not match the problem");
    if (grid.s_max() > SolverConfig::max_weight_exponent + grid.ds())
        throw ConfigurationError("assemble: grid extends to s = " + std::to_string(grid.s_max()) +
                                 ", beyond the e^{-s} underflow guard");

    const Eigen::Index n = problem.dim();
    const auto per_node = static_cast<std::size_t>(2 * n);
    WeightedQuadraticForm form;
    form.components = n;
    form.dim = grid.size() * per_node;
    form.band = SymmetricBandMatrix(form.dim, 2 * per_node - 1);
    form.linear = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(form.dim));

    const auto unit = gauss_legendre(quad_order);
    const double d = grid.ds();
    const double load_scale = 1.0 / (static_cast<double>(h) * h);
    const double hh = static_cast<double>(h);

    auto assemble_element = [&](std::size_t k) {
        const double a = grid.node(k);
        const double b = grid.node(k + 1);
        // stiffness: m int u'' v'' e^{-s}
        std::array<std::array<double, 4>, 4> ke{};
        const auto rule = element_weighted_integrals(a, b, quad_order);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const auto basis = HermiteBasis::at((rule.points[q] - a) / d, d);
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c <= r; ++c) ke[r][c] += problem.m * rule.weights[q] * basis.d2n[r] * basis.d2n[c];
        }
        // load: h^{-2} int f_h(s/h) v e^{-s}, split where f_h is not smooth
        std::vector<double> cuts{a};
        for (double tau : f_h.breakpoints(a / hh, b / hh)) cuts.push_back(tau * hh);
        cuts.push_back(b);
        std::array<Vector, 4> le;
        le.fill(Vector::Zero(n));
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
            if (!(cuts[p + 1] > cuts[p])) continue;
            const auto sub = map_rule(unit, cuts[p], cuts[p + 1]);
            for (std::size_t q = 0; q < sub.points.size(); ++q) {
                const double s = sub.points[q];
                const auto basis = HermiteBasis::at((s - a) / d, d);
                const Vector fw = (load_scale * sub.weights[q] * std::exp(-s)) * f_h(s / hh);
                for (int r = 0; r < 4; ++r) le[r] += basis.n[r] * fw;
            }
        }
        // local index r -> (node k + r / 2, slope r % 2)
        for (Eigen::Index comp = 0; comp < n; ++comp) {
            std::array<std::size_t, 4> g{};
            for (int r = 0; r < 4; ++r) g[r] = dof_index(k + static_cast<std::size_t>(r / 2), comp, r % 2, n);
            for (int r = 0; r < 4; ++r) {
                form.linear[static_cast<Eigen::Index>(g[r])] += le[r][comp];
                for (int c = 0; c <= r; ++c) {
                    // g is increasing in r, so g[r] >= g[c]
                    form.band.add_lower(g[r], g[c], ke[r][c]);
                }
            }
        }
    };

    if (element_order.empty()) {
        for (std::size_t k = 0; k < grid.elements(); ++k) assemble_element(k);
    } else {
        if (element_order.size() != grid.elements()) throw InvalidArgument("assemble: element order has wrong length");
        for (std::size_t k : element_order) assemble_element(k);
    }

    const double h_inv = 1.0 / hh;
    for (Eigen::Index c = 0; c < n; ++c) {
        form.constrained_dofs.emplace_back(dof_index(0, c, 0, n), problem.u0[c]);
        form.constrained_dofs.emplace_back(dof_index(0, c, 1, n), problem.v0[c] * h_inv);
    }
    std::sort(form.constrained_dofs.begin(), form.constrained_dofs.end());
    return form;
}

/// The minimizer of J_h in the slow variable.
struct MinimizerOutput {
    HermiteTrajectory trajectory;
    double energy = 0.0;
    double el_residual = 0.0;
    double condition_estimate = 1.0;
};

/// Componentwise relative violation of the stationarity system over every
/// Hermite basis function that vanishes with its slope at s = 0:
/// max_i |(A x - b)_i| / (sum_j |A_ij x_j| + |b_i|).
inline double stationarity_residual(const WeightedQuadraticForm& form, const Eigen::VectorXd& x) {
    const Eigen::VectorXd ax = form.band.multiply(x);
    const Eigen::VectorXd scale = form.band.abs_multiply(x);
    std::vector<bool> fixed(form.dim, false);
    for (const auto& [i, v] : form.constrained_dofs) fixed[i] = true;
    double worst = 0.0;
    for (std::size_t i = 0; i < form.dim; ++i) {
        if (fixed[i]) continue;
        const auto ii = static_cast<Eigen::Index>(i);
        const double num = std::abs(ax[ii] - form.linear[ii]);
        const double den = scale[ii] + std::abs(form.linear[ii]);
        if (num == 0.0) continue;
        worst = std::max(worst, den > 0.0 ? num / den : std::numeric_limits<double>::infinity());
    }
    return worst;
}

/// Minimizes the assembled form with its constrained dofs eliminated.
///
/// The constrained dofs must be the leading block (node 0). The reduced matrix
/// is Jacobi scaled, factored by banded Cholesky and the solution polished by
/// iterative refinement until the stationarity residual reaches solve_tol.
inline std::pair<Eigen::VectorXd, double> solve_constrained(const WeightedQuadraticForm& form, double solve_tol,
                                                            double* residual_out = nullptr) {
    const std::size_t nc = form.constrained_dofs.size();
    for (std::size_t i = 0; i < nc; ++i)
        if (form.constrained_dofs[i].first != i)
            throw InvalidArgument("solve_constrained: constrained dofs must be the leading block");

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(form.dim));
    for (const auto& [i, v] : form.constrained_dofs) x[static_cast<Eigen::Index>(i)] = v;

    const std::size_t nr = form.dim - nc;
    const auto nre = static_cast<Eigen::Index>(nr);
    const Eigen::VectorXd rhs = (form.linear - form.band.multiply(x)).tail(nre);

    SymmetricBandMatrix scaled = form.band.trailing(nc);
    const auto kd = scaled.half_bandwidth();
    Eigen::VectorXd jacobi(nre);
    for (std::size_t i = 0; i < nr; ++i) {
        const double diag = scaled(i, i);
        if (!(diag > 0.0)) throw ConditioningError("nonpositive diagonal in reduced system", std::numeric_limits<double>::infinity());
        jacobi[static_cast<Eigen::Index>(i)] = 1.0 / std::sqrt(diag);
    }
    for (std::size_t j = 0; j < nr; ++j)
        for (std::size_t i = j; i <= std::min(nr - 1, j + kd); ++i)
            scaled.data()[(i - j) + j * scaled.ldab()] *= jacobi[static_cast<Eigen::Index>(i)] * jacobi[static_cast<Eigen::Index>(j)];

    const auto lapack_n = static_cast<lapack_int>(nr);
    const auto lapack_kd = static_cast<lapack_int>(kd);
    const auto lapack_ld = static_cast<lapack_int>(scaled.ldab());
    // 1-norm of a symmetric matrix = largest absolute row sum
    const double anorm = scaled.abs_multiply(Eigen::VectorXd::Ones(nre)).maxCoeff();
    SymmetricBandMatrix factor = scaled;
    if (LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'L', lapack_n, lapack_kd, factor.data(), lapack_ld) != 0)
        throw ConditioningError("banded Cholesky factorization of the reduced system failed",
                                std::numeric_limits<double>::infinity());
    double rcond = 0.0;
    LAPACKE_dpbcon(LAPACK_COL_MAJOR, 'L', lapack_n, lapack_kd, factor.data(), lapack_ld, anorm, &rcond);
    const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();

    auto back_substitute = [&](Eigen::VectorXd b) {
        LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'L', lapack_n, lapack_kd, 1, factor.data(), lapack_ld, b.data(), lapack_n);
        return b;
    };

    const Eigen::VectorXd scaled_rhs = jacobi.cwiseProduct(rhs);
    Eigen::VectorXd z = back_substitute(scaled_rhs);
    x.tail(nre) = jacobi.cwiseProduct(z);
    double residual = stationarity_residual(form, x);
    for (int step = 0; step < 3 && residual > solve_tol; ++step) {
        const Eigen::VectorXd correction = back_substitute(scaled_rhs - scaled.multiply(z));
        const Eigen::VectorXd z_next = z + correction;
        Eigen::VectorXd x_next = x;
        x_next.tail(nre) = jacobi.cwiseProduct(z_next);
        const double next = stationarity_residual(form, x_next);
        if (!(next < residual)) break;
        z = z_next;
        x = std::move(x_next);
        residual = next;
    }
    if (residual_out) *residual_out = residual;
    return {x, condition};
}

/// Minimizes J_h for the forcing f_h and returns the slow-variable minimizer.
inline MinimizerOutput minimize_jh(const CauchyProblem& problem, int h, const SolverConfig& config, const Force& f_h) {
    config.validate(h);
    const TimeGrid grid = make_uniform_grid(config.s_max(h), config.ds);
    const auto form = assemble(problem, grid, h, f_h, config.quad_order);

    // Affine trajectories carry no inertia, so u = u0 + (v0/h) s + w with w
    // vanishing to first order at 0 and solving the same system with the same
    // load. Solving for w keeps the affine part free of roundoff.
    WeightedQuadraticForm lifted = form;
    for (auto& [i, v] : lifted.constrained_dofs) v = 0.0;
    auto [x, condition] = solve_constrained(lifted, config.solve_tol);
    const double h_inv = 1.0 / h;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (Eigen::Index c = 0; c < problem.dim(); ++c) {
            x[static_cast<Eigen::Index>(dof_index(i, c, 0, problem.dim()))] +=
                problem.u0[c] + problem.v0[c] * h_inv * grid.node(i);
            x[static_cast<Eigen::Index>(dof_index(i, c, 1, problem.dim()))] += problem.v0[c] * h_inv;
        }
    const double residual = stationarity_residual(form, x);
    if (residual > 10.0 * config.solve_tol)
        throw AccuracyError("stationarity residual " + std::to_string(residual) + " exceeds 10 * solve_tol", residual);
    MinimizerOutput out;
    out.energy = form.value(x);
    out.el_residual = residual;
    out.condition_estimate = condition;
    out.trajectory = from_coefficients(grid, x, problem.dim());
    return out;
}

inline MinimizerOutput minimize_jh(const CauchyProblem& problem, int h, const SolverConfig& config) {
    return minimize_jh(problem, h, config, problem.force);
}

/// y(t) = u(h t): nodes s_i / h, values unchanged, slopes times h.
inline HermiteTrajectory rescale_to_fast(const HermiteTrajectory& u, int h, double T_view) {
    if (h < 1) throw InvalidArgument("rescale_to_fast: h must be a positive integer");
    if (h * T_view > u.grid.s_max() * (1.0 + 1e-14))
        throw OutOfDomain("rescale_to_fast: window h * T_view exceeds the slow grid");
    const double hh = static_cast<double>(h);
    std::vector<Vector> slopes = u.slopes;
    for (auto& d : slopes) d *= hh;
    return HermiteTrajectory(TimeGrid(u.grid.ds() / hh, u.grid.size()), u.values, std::move(slopes));
}

}  // namespace wie
