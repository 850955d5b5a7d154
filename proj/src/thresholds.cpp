#include "csclasso/thresholds.hpp"

#include "alm.hpp"
#include "csclasso/baseline.hpp"

#include <cmath>

namespace csclasso {

namespace {

Vector group_mse_at(const GroupedDataset& d, const Vector& beta) {
    Vector mse(d.num_groups());
    for (Eigen::Index l = 0; l < d.num_groups(); ++l) {
        SubsetView g = gather_rows(d, d.groups[static_cast<std::size_t>(l)]);
        mse[l] = (g.y - g.X * beta).squaredNorm() / static_cast<double>(g.X.rows());
    }
    return mse;
}

void require_positive(const Vector& baselines, const char* who) {
    for (Eigen::Index l = 0; l < baselines.size(); ++l) {
        if (baselines[l] <= 1e-12)
            throw DegenerateBaselineError(std::string(who) + ": group " + std::to_string(l) +
                                          " baseline MSE is numerically zero");
    }
}

/// min over beta of max_l MSE_l(beta)/m_l - 1, epigraph form:
///   min z  s.t.  MSE_l(beta)/m_l - 1 - z <= 0.
/// Returns the max-ratio achieved by the solved beta (a certified value).
double min_max_ratio(const GroupedDataset& d, const Vector& m, const Vector& beta_start,
                     const SolverConfig& cfg) {
    detail::AlmProblem prob;
    prob.head_dim = d.X.cols();
    prob.has_z = true;
    prob.obj_z_coef = 1.0;
    for (Eigen::Index l = 0; l < d.num_groups(); ++l) {
        detail::ConstraintTerm ct;
        ct.q = detail::QuadResidual::from_rows(d, d.groups[static_cast<std::size_t>(l)]);
        ct.scale = 1.0 / m[l];
        ct.z_coef = -1.0;
        ct.offset = -1.0;
        prob.constraints.push_back(std::move(ct));
    }

    Vector v0 = Vector::Zero(prob.total_dim());
    v0.head(prob.head_dim) = beta_start;
    Vector start_mse = group_mse_at(d, beta_start);
    v0[prob.z_index()] = (start_mse.array() / m.array()).maxCoeff() - 1.0;

    detail::AlmOptions opt;
    opt.tol_stat = cfg.tol_stat;
    opt.tol_feas = cfg.tol_feas;
    opt.max_outer = cfg.max_outer;
    opt.max_inner = cfg.max_inner;
    opt.growth = cfg.penalty_growth;

    detail::AlmResult res = detail::solve_alm(prob, v0, opt);
    Vector beta = res.v.head(prob.head_dim);
    Vector mse = group_mse_at(d, beta);
    return (mse.array() / m.array()).maxCoeff() - 1.0;
}

}  // namespace

Vector baseline_mse_ols(const GroupedDataset& data, BaselineMode mode) {
    if (mode == BaselineMode::global_ols) {
        return group_mse_at(data, solve_ols(data));
    }
    Vector mse(data.num_groups());
    for (Eigen::Index l = 0; l < data.num_groups(); ++l) {
        GroupedDataset restricted = data;
        restricted.objective_rows = data.groups[static_cast<std::size_t>(l)];
        Vector beta_l = solve_ols(restricted);
        SubsetView g = gather_rows(data, data.groups[static_cast<std::size_t>(l)]);
        mse[l] = (g.y - g.X * beta_l).squaredNorm() / static_cast<double>(g.X.rows());
    }
    return mse;
}

Vector baseline_mse_lasso(const GroupedDataset& data, double lambda) {
    return group_mse_at(data, solve_lasso_cd(data, lambda).beta);
}

double compute_tau_min(const GroupedDataset& data, const SolverConfig& cfg, BaselineMode mode) {
    Vector m = baseline_mse_ols(data, mode);
    require_positive(m, "compute_tau_min");
    return min_max_ratio(data, m, solve_ols(data), cfg);
}

double compute_tau_max(const GroupedDataset& data, double lambda, BaselineMode mode) {
    Vector m = baseline_mse_ols(data, mode);
    require_positive(m, "compute_tau_max");
    Vector lasso_mse = baseline_mse_lasso(data, lambda);
    return (lasso_mse.array() / m.array()).maxCoeff() - 1.0;
}

double compute_gamma_max(const GroupedDataset& data, double lambda, const SolverConfig& cfg) {
    Vector m = baseline_mse_lasso(data, lambda);
    require_positive(m, "compute_gamma_max");
    return -min_max_ratio(data, m, solve_lasso_cd(data, lambda).beta, cfg);
}

ThresholdReport thresholds_from_tau(const GroupedDataset& data, double tau,
                                    const SolverConfig& cfg, BaselineMode mode) {
    ThresholdReport rep;
    rep.baseline = BaselineKind::ols;
    rep.baseline_mse = baseline_mse_ols(data, mode);
    require_positive(rep.baseline_mse, "thresholds_from_tau");
    rep.tau_or_gamma = tau;
    rep.thresholds = (1.0 + tau) * rep.baseline_mse;
    rep.feasibility_bound = min_max_ratio(data, rep.baseline_mse, solve_ols(data), cfg);
    return rep;
}

ThresholdReport thresholds_from_gamma(const GroupedDataset& data, double lambda, double gamma,
                                      const SolverConfig& cfg) {
    if (gamma >= 1.0 || gamma < 0.0)
        throw std::invalid_argument("thresholds_from_gamma: gamma must lie in [0, 1)");
    ThresholdReport rep;
    rep.baseline = BaselineKind::lasso;
    rep.lambda = lambda;
    LassoFit lf = solve_lasso_cd(data, lambda);
    rep.baseline_mse = group_mse_at(data, lf.beta);
    require_positive(rep.baseline_mse, "thresholds_from_gamma");
    rep.tau_or_gamma = gamma;
    rep.thresholds = (1.0 - gamma) * rep.baseline_mse;
    rep.feasibility_bound = -min_max_ratio(data, rep.baseline_mse, lf.beta, cfg);
    return rep;
}

}  // namespace csclasso
