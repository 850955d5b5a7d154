#pragma once

#include "csclasso/types.hpp"

namespace csclasso {

struct LassoFit {
    Vector beta;          // length p+1
    double objective = 0.0;
    int nz_count = 0;     // coordinates j >= 1 with |beta_j| > kZeroTol
    int iterations = 0;   // full coordinate sweeps
    bool converged = true;
};

/// Least squares on the objective rows, (1/n)||y - X beta||^2. Full rank
/// gives the unique minimizer; otherwise the minimum-norm one.
Vector solve_ols(const GroupedDataset& data);

/// Cyclic coordinate descent for
///   (1/n)||y - X beta||^2 + lambda * sum_{j>=1} |beta_j|
/// with exact univariate soft-threshold updates. Converged when the largest
/// coordinate change in a sweep is <= 1e-10.
LassoFit solve_lasso_cd(const GroupedDataset& data, double lambda, int max_sweeps = 100000,
                        const Vector* warm_start = nullptr);

/// Smallest lambda for which the all-zero penalized solution is optimal:
/// sup-norm of (2/n) X_pen' (y - ybar 1), the intercept profiled out.
double lasso_lambda_star(const GroupedDataset& data);

/// Sup-norm violation of the Lasso subgradient optimality conditions at beta.
double kkt_check_lasso(const GroupedDataset& data, double lambda, const Vector& beta);

}  // namespace csclasso
