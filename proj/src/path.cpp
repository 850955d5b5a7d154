#include "csclasso/path.hpp"

#include "csclasso/qcqp.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace csclasso {

LambdaStarResult find_lambda_star_dynamic(const ProblemSpec& spec, double epsilon,
                                          const SolverConfig& cfg) {
    LambdaStarResult out;
    FitResult limit = solve_min_l1_feasible(spec, cfg);
    if (limit.status == SolveStatus::infeasible)
        throw std::runtime_error("find_lambda_star_dynamic: constraint set is infeasible");
    out.beta_infinity = limit.beta;
    out.epsilon = epsilon > 0.0 ? epsilon : 1e-4 * (1.0 + limit.beta.norm());

    constexpr int kMaxDoublings = 60;
    double c = std::ldexp(1.0, -5);  // 2^-5
    SolverConfig point_cfg = cfg;
    ProblemSpec point = spec;
    for (int i = 0; i <= kMaxDoublings; ++i) {
        point.lambda = c;
        FitResult fit = solve_csclasso(point, point_cfg);
        out.visited.push_back(c);
        point_cfg.warm_start = fit.beta;
        if ((fit.beta - out.beta_infinity).norm() <= out.epsilon) {
            out.lambda_star = c;
            out.beta_at_star = fit.beta;
            return out;
        }
        out.beta_at_star = fit.beta;
        c *= 2.0;
    }
    out.lambda_star = out.visited.back();
    out.budget_exceeded = true;
    return out;
}

std::vector<double> build_lambda_grid(double lambda_star, int count, GridScale scale) {
    if (count < 2) throw std::invalid_argument("build_lambda_grid: count must be >= 2");
    if (lambda_star < 0.0) throw std::invalid_argument("build_lambda_grid: lambda_star < 0");
    std::vector<double> grid;
    if (scale == GridScale::linear) {
        grid.reserve(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i)
            grid.push_back(lambda_star * static_cast<double>(i) / static_cast<double>(count - 1));
        return grid;
    }
    grid.push_back(0.0);
    double c = std::ldexp(1.0, -5);
    while (c < lambda_star * (1.0 - 1e-12)) {
        grid.push_back(c);
        c *= 2.0;
    }
    if (lambda_star > 0.0) grid.push_back(lambda_star);
    return grid;
}

PathResult solve_path(const ProblemSpec& spec, const std::vector<double>& grid,
                      const SolverConfig& cfg) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("solve_path: grid must be strictly increasing");

    PathResult out;
    out.lambdas = grid;
    const Eigen::Index pc = spec.data->X.cols();
    out.betas.resize(static_cast<Eigen::Index>(grid.size()), pc);
    out.objectives.resize(static_cast<Eigen::Index>(grid.size()));
    out.statuses.resize(grid.size());

    SolverConfig point_cfg = cfg;
    ProblemSpec point = spec;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        point.lambda = grid[i];
        FitResult fit = solve_csclasso(point, point_cfg);
        out.betas.row(static_cast<Eigen::Index>(i)) = fit.beta.transpose();
        out.objectives[static_cast<Eigen::Index>(i)] = fit.objective;
        out.statuses[i] = fit.status;
        if (fit.status != SolveStatus::infeasible) point_cfg.warm_start = fit.beta;
    }
    return out;
}

HeatmapGrid heatmap_grid(const GroupedDataset& data, const Vector& lambda_axis,
                         const Vector& tau_axis, const SolverConfig& cfg, BaselineMode mode,
                         int jobs) {
    if (lambda_axis.size() == 0 || tau_axis.size() == 0)
        throw std::invalid_argument("heatmap_grid: axes must be nonempty");
    for (Eigen::Index i = 1; i < lambda_axis.size(); ++i)
        if (!(lambda_axis[i] > lambda_axis[i - 1]))
            throw std::invalid_argument("heatmap_grid: lambda axis must be ascending");
    for (Eigen::Index i = 1; i < tau_axis.size(); ++i)
        if (!(tau_axis[i] > tau_axis[i - 1]))
            throw std::invalid_argument("heatmap_grid: tau axis must be ascending");

    HeatmapGrid out;
    out.lambda_axis = lambda_axis;
    out.tau_axis = tau_axis;
    out.infeasible.resize(tau_axis.size(), lambda_axis.size());
    out.infeasible.setConstant(false);

    Vector baselines = baseline_mse_ols(data, mode);
    const Eigen::Index pc = data.X.cols();
    out.beta_rows.assign(static_cast<std::size_t>(tau_axis.size()), Matrix());

    // rows are independent; the warm-start chain runs along lambda only
    auto solve_row = [&](Eigen::Index ti) {
        ProblemSpec cell;
        cell.data = &data;
        cell.penalty = PenaltyMatrix::identity_no_intercept_for(pc - 1);
        cell.thresholds = (1.0 + tau_axis[ti]) * baselines;
        Matrix row(lambda_axis.size(), pc);
        SolverConfig point_cfg = cfg;
        for (Eigen::Index li = 0; li < lambda_axis.size(); ++li) {
            cell.lambda = lambda_axis[li];
            FitResult fit = solve_csclasso(cell, point_cfg);
            row.row(li) = fit.beta.transpose();
            if (fit.status == SolveStatus::infeasible) {
                out.infeasible(ti, li) = true;
            } else {
                point_cfg.warm_start = fit.beta;
            }
        }
        out.beta_rows[static_cast<std::size_t>(ti)] = std::move(row);
    };

    if (jobs <= 1 || tau_axis.size() <= 1) {
        for (Eigen::Index ti = 0; ti < tau_axis.size(); ++ti) solve_row(ti);
    } else {
        std::atomic<Eigen::Index> next{0};
        std::vector<std::thread> pool;
        const int workers = static_cast<int>(
            std::min<Eigen::Index>(jobs, tau_axis.size()));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const Eigen::Index ti = next.fetch_add(1);
                    if (ti >= tau_axis.size()) return;
                    solve_row(ti);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return out;
}

}  // namespace csclasso
