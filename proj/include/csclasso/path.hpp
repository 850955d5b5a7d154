#pragma once

#include "csclasso/thresholds.hpp"
#include "csclasso/types.hpp"

#include <vector>

namespace csclasso {

struct PathResult {
    std::vector<double> lambdas;       // strictly increasing
    Matrix betas;                      // G x (p+1), one row per lambda
    Vector objectives;
    std::vector<SolveStatus> statuses;
};

struct HeatmapGrid {
    Vector lambda_axis;
    Vector tau_axis;
    std::vector<Matrix> beta_rows;     // per tau: G x (p+1)
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> infeasible;  // tau x lambda
};

struct LambdaStarResult {
    double lambda_star = 0.0;
    std::vector<double> visited;       // 2^-5, 2^-4, ..., lambda_star
    Vector beta_at_star;
    Vector beta_infinity;
    double epsilon = 0.0;              // stopping radius actually used
    bool budget_exceeded = false;      // no stabilization within 60 doublings
};

/// Doubling search for the lambda where the solution path stabilizes at the
/// min-L1 limit point: starts at 2^-5 and doubles until
/// ||beta(lambda) - beta(inf)|| <= epsilon. epsilon <= 0 selects the
/// scale-aware default 1e-4 * (1 + ||beta(inf)||).
LambdaStarResult find_lambda_star_dynamic(const ProblemSpec& spec, double epsilon = 0.0,
                                          const SolverConfig& cfg = {});

enum class GridScale { linear, doubling };

/// Grid from 0 to lambda_star inclusive. Doubling mode reuses the dynamic
/// search's ladder (0, 2^-5, 2^-4, ..., lambda_star) and ignores count.
std::vector<double> build_lambda_grid(double lambda_star, int count, GridScale scale);

/// Solve the spec at every grid lambda, warm-starting each point from the
/// previous solution. Per-point statuses are recorded; never aborts.
PathResult solve_path(const ProblemSpec& spec, const std::vector<double>& grid,
                      const SolverConfig& cfg = {});

/// Per cell (lambda, tau): thresholds_from_tau baselines, then a constrained
/// solve warm-started along lambda. Infeasible cells are masked.
HeatmapGrid heatmap_grid(const GroupedDataset& data, const Vector& lambda_axis,
                         const Vector& tau_axis, const SolverConfig& cfg = {},
                         BaselineMode mode = BaselineMode::global_ols, int jobs = 1);

}  // namespace csclasso
