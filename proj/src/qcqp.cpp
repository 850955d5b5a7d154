#include "csclasso/qcqp.hpp"

#include "alm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace csclasso {

namespace {

void require_valid(const ProblemSpec& spec, const char* who) {
    ValidationOutcome v = validate_problem(spec);
    if (!v.ok()) throw std::invalid_argument(std::string(who) + ": " + v.violations.front());
}

detail::AlmProblem build_problem(const ProblemSpec& spec, bool with_fit_objective,
                                 double prox_weight) {
    const GroupedDataset& d = *spec.data;
    detail::AlmProblem prob;
    prob.head_dim = d.X.cols();
    prob.q0 = detail::QuadResidual::from_rows(d, d.objective_rows);
    prob.obj_quad_weight = with_fit_objective ? 1.0 : 0.0;
    for (Eigen::Index l = 0; l < d.num_groups(); ++l) {
        detail::ConstraintTerm ct;
        ct.q = detail::QuadResidual::from_rows(d, d.groups[static_cast<std::size_t>(l)]);
        ct.scale = 1.0;
        ct.offset = -spec.thresholds[l];
        prob.constraints.push_back(std::move(ct));
    }
    if (prox_weight > 0.0) {
        if (spec.penalty.kind == PenaltyKind::identity_no_intercept) {
            prob.prox = detail::ProxMode::l1_beta_tail;
        } else {
            prob.split = true;
            prob.A = &spec.penalty.A;
            prob.prox = detail::ProxMode::l1_w_block;
        }
        prob.prox_weight = prox_weight;
    }
    return prob;
}

detail::AlmOptions options_from(const SolverConfig& cfg) {
    detail::AlmOptions opt;
    opt.tol_stat = cfg.tol_stat;
    opt.tol_feas = cfg.tol_feas;
    opt.max_outer = cfg.max_outer;
    opt.max_inner = cfg.max_inner;
    opt.growth = cfg.penalty_growth;
    return opt;
}

Vector start_point(const ProblemSpec& spec, const SolverConfig& cfg) {
    if (cfg.warm_start && cfg.warm_start->size() == spec.data->X.cols()) return *cfg.warm_start;
    return Vector::Zero(spec.data->X.cols());
}

Vector group_mse_at(const GroupedDataset& d, const Vector& beta) {
    Vector mse(d.num_groups());
    for (Eigen::Index l = 0; l < d.num_groups(); ++l) {
        SubsetView g = gather_rows(d, d.groups[static_cast<std::size_t>(l)]);
        mse[l] = (g.y - g.X * beta).squaredNorm() / static_cast<double>(g.X.rows());
    }
    return mse;
}

/// Sup-norm residual of grad + lambda * d||A .||_1 at beta, identity penalty.
double identity_stationarity(const Vector& beta, const Vector& grad, double lambda) {
    double worst = std::abs(grad[0]);
    for (Eigen::Index j = 1; j < beta.size(); ++j) {
        if (std::abs(beta[j]) > kZeroTol) {
            worst = std::max(worst, std::abs(grad[j] + (beta[j] > 0 ? lambda : -lambda)));
        } else {
            worst = std::max(worst, std::max(0.0, std::abs(grad[j]) - lambda));
        }
    }
    return worst;
}

/// min over admissible subgradients u of ||grad + lambda A'u||_inf, upper
/// bounded by projected gradient on the box part of u.
double general_stationarity(const Vector& beta, const Vector& grad, double lambda,
                            const Matrix& A) {
    if (lambda <= 0.0) return grad.lpNorm<Eigen::Infinity>();
    const Eigen::Index m = A.rows();
    Vector img = A * beta;
    Vector u(m);
    std::vector<bool> fixed(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        fixed[static_cast<std::size_t>(i)] = std::abs(img[i]) > kZeroTol;
        u[i] = fixed[static_cast<std::size_t>(i)] ? (img[i] > 0 ? 1.0 : -1.0) : 0.0;
    }
    // minimize ||grad + lambda A'u||^2 over the free coordinates in [-1,1]
    Matrix M = lambda * A.transpose();
    double step = 1.0 / std::max(1e-12, (M.transpose() * M).trace());
    for (int it = 0; it < 200; ++it) {
        Vector r = grad + M * u;
        Vector g = 2.0 * (M.transpose() * r);
        bool moved = false;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (fixed[static_cast<std::size_t>(i)]) continue;
            double next = std::clamp(u[i] - step * g[i], -1.0, 1.0);
            if (next != u[i]) {
                u[i] = next;
                moved = true;
            }
        }
        if (!moved) break;
    }
    return (grad + M * u).lpNorm<Eigen::Infinity>();
}

Vector lagrangian_gradient(const ProblemSpec& spec, const Vector& beta, const Vector& eta) {
    const GroupedDataset& d = *spec.data;
    SubsetView obj = gather_rows(d, d.objective_rows);
    Vector grad = -(2.0 / static_cast<double>(obj.X.rows())) *
                  (obj.X.transpose() * (obj.y - obj.X * beta));
    for (Eigen::Index l = 0; l < d.num_groups(); ++l) {
        if (eta[l] == 0.0) continue;
        SubsetView g = gather_rows(d, d.groups[static_cast<std::size_t>(l)]);
        grad.noalias() -= (eta[l] * 2.0 / static_cast<double>(g.X.rows())) *
                          (g.X.transpose() * (g.y - g.X * beta));
    }
    return grad;
}

}  // namespace

double penalty_l1(const ProblemSpec& spec, const Vector& beta) {
    if (spec.penalty.kind == PenaltyKind::identity_no_intercept)
        return beta.tail(beta.size() - 1).lpNorm<1>();
    return (spec.penalty.A * beta).lpNorm<1>();
}

double csclasso_objective(const ProblemSpec& spec, const Vector& beta) {
    SubsetView obj = gather_rows(*spec.data, spec.data->objective_rows);
    return (obj.y - obj.X * beta).squaredNorm() / static_cast<double>(obj.X.rows()) +
           spec.lambda * penalty_l1(spec, beta);
}

FitResult solve_csclasso(const ProblemSpec& spec, const SolverConfig& cfg) {
    require_valid(spec, "solve_csclasso");
    detail::AlmProblem prob = build_problem(spec, /*with_fit_objective=*/true, spec.lambda);
    detail::AlmResult alm = detail::solve_alm(prob, start_point(spec, cfg), options_from(cfg));

    FitResult fit;
    fit.beta = alm.v.head(prob.head_dim);
    fit.multipliers = alm.eta;
    fit.group_mse = group_mse_at(*spec.data, fit.beta);
    fit.objective = csclasso_objective(spec, fit.beta);
    fit.kkt_stationarity = alm.stationarity;
    fit.kkt_feasibility = alm.feasibility;
    fit.iterations_outer = alm.iterations_outer;
    fit.iterations_inner = static_cast<int>(alm.iterations_inner);
    fit.status = alm.status;
    return fit;
}

KktResidual kkt_residual_csclasso(const ProblemSpec& spec, const Vector& beta, const Vector& eta) {
    require_valid(spec, "kkt_residual_csclasso");
    if ((eta.array() < 0.0).any())
        throw std::invalid_argument("kkt_residual_csclasso: multipliers must be nonnegative");

    KktResidual out;
    Vector grad = lagrangian_gradient(spec, beta, eta);
    if (spec.penalty.kind == PenaltyKind::identity_no_intercept) {
        out.stationarity = identity_stationarity(beta, grad, spec.lambda);
    } else {
        out.stationarity = general_stationarity(beta, grad, spec.lambda, spec.penalty.A);
    }

    Vector mse = group_mse_at(*spec.data, beta);
    for (Eigen::Index l = 0; l < mse.size(); ++l) {
        const double slack = mse[l] - spec.thresholds[l];
        out.feasibility = std::max(out.feasibility, slack);
        out.complementarity = std::max(out.complementarity, std::abs(eta[l] * slack));
    }
    out.feasibility = std::max(0.0, out.feasibility);
    return out;
}

FitResult solve_min_l1_feasible(const ProblemSpec& spec, const SolverConfig& cfg) {
    require_valid(spec, "solve_min_l1_feasible");
    detail::AlmProblem prob = build_problem(spec, /*with_fit_objective=*/false, 1.0);
    detail::AlmResult alm = detail::solve_alm(prob, start_point(spec, cfg), options_from(cfg));

    FitResult fit;
    fit.beta = alm.v.head(prob.head_dim);
    fit.multipliers = alm.eta;
    fit.iterations_outer = alm.iterations_outer;
    fit.iterations_inner = static_cast<int>(alm.iterations_inner);
    fit.status = alm.status;

    // The L1 term never charges the intercept when column 0 of A vanishes, so
    // among L1-minimal points we can pick the best-fitting feasible intercept
    // (the large-lambda limit of the path does the same).
    const bool intercept_free = spec.penalty.kind == PenaltyKind::identity_no_intercept ||
                                spec.penalty.A.col(0).isZero(0.0);
    if (intercept_free && fit.status != SolveStatus::infeasible) {
        const GroupedDataset& d = *spec.data;
        Vector beta_no_int = fit.beta;
        beta_no_int[0] = 0.0;
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        bool polishable = true;
        for (Eigen::Index l = 0; l < d.num_groups(); ++l) {
            SubsetView g = gather_rows(d, d.groups[static_cast<std::size_t>(l)]);
            Vector r = g.y - g.X * beta_no_int;
            const double m = r.mean();
            const double s = r.squaredNorm() / static_cast<double>(r.size()) - m * m;
            const double rad2 = spec.thresholds[l] - s;
            if (rad2 < 0.0) {  // boundary-point rounding; keep the solver's intercept
                polishable = false;
                break;
            }
            const double rad = std::sqrt(rad2);
            lo = std::max(lo, m - rad);
            hi = std::min(hi, m + rad);
        }
        if (polishable && lo <= hi) {
            SubsetView obj = gather_rows(d, d.objective_rows);
            Vector r0 = obj.y - obj.X * beta_no_int;
            fit.beta[0] = std::clamp(r0.mean(), lo, hi);
        }
    }

    fit.group_mse = group_mse_at(*spec.data, fit.beta);
    fit.objective = penalty_l1(spec, fit.beta);
    fit.kkt_feasibility = 0.0;
    for (Eigen::Index l = 0; l < fit.group_mse.size(); ++l)
        fit.kkt_feasibility =
            std::max(fit.kkt_feasibility, fit.group_mse[l] - spec.thresholds[l]);
    fit.kkt_feasibility = std::max(0.0, fit.kkt_feasibility);
    fit.kkt_stationarity = alm.stationarity;
    return fit;
}

double prop1_stationarity_residual(const ProblemSpec& spec, const FitResult& fit) {
    if (spec.data == nullptr || spec.data->num_groups() != 1)
        throw std::invalid_argument("prop1_stationarity_residual: exactly one constraint required");
    if (spec.penalty.kind != PenaltyKind::identity_no_intercept)
        throw std::invalid_argument("prop1_stationarity_residual: (0|I) penalty required");

    const GroupedDataset& d = *spec.data;
    SubsetView obj = gather_rows(d, d.objective_rows);
    SubsetView grp = gather_rows(d, d.groups[0]);
    const double eta = fit.multipliers.size() > 0 ? fit.multipliers[0] : 0.0;

    Vector lhs = (2.0 / static_cast<double>(obj.X.rows())) *
                     (obj.X.transpose() * (obj.y - obj.X * fit.beta)) +
                 (eta * 2.0 / static_cast<double>(grp.X.rows())) *
                     (grp.X.transpose() * (grp.y - grp.X * fit.beta));

    double worst = std::abs(lhs[0]);  // b_0 = 0: the intercept is unpenalized
    for (Eigen::Index s = 1; s < lhs.size(); ++s) {
        if (std::abs(fit.beta[s]) > kZeroTol) {
            worst = std::max(worst, std::abs(lhs[s] - (fit.beta[s] > 0 ? spec.lambda : -spec.lambda)));
        } else {
            worst = std::max(worst, std::max(0.0, std::abs(lhs[s]) - spec.lambda));
        }
    }
    return worst;
}

}  // namespace csclasso
