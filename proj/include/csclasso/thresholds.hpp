#pragma once

#include "csclasso/types.hpp"

#include <stdexcept>

namespace csclasso {

/// Raised when a baseline group MSE is numerically zero and ratios to it are
/// undefined.
struct DegenerateBaselineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class BaselineMode {
    global_ols,    // MSE_l of the one OLS fit on the objective rows
    per_group_ols, // MSE_l of an OLS fit restricted to group l
};

enum class BaselineKind { ols, lasso };

struct ThresholdReport {
    BaselineKind baseline = BaselineKind::ols;
    double lambda = 0.0;        // meaningful for the lasso baseline
    Vector baseline_mse;        // length L
    double tau_or_gamma = 0.0;
    Vector thresholds;          // length L
    double feasibility_bound = 0.0;  // tau_min (ols) or gamma_max (lasso)
};

/// Smallest tau making the tau-thresholded problem feasible:
///   min over beta of max_l MSE_l(beta)/MSE_l(baseline) - 1,
/// solved in epigraph form with the augmented-Lagrangian machinery.
double compute_tau_min(const GroupedDataset& data, const SolverConfig& cfg = {},
                       BaselineMode mode = BaselineMode::global_ols);

/// tau at and beyond which the constraints are vacuous at this lambda:
///   max_l MSE_l(lasso(lambda))/MSE_l(ols) - 1.
double compute_tau_max(const GroupedDataset& data, double lambda,
                       BaselineMode mode = BaselineMode::global_ols);

/// Largest feasible improvement fraction over the Lasso baselines:
///   max over beta of min_l (1 - MSE_l(beta)/MSE_l(lasso(lambda))).
double compute_gamma_max(const GroupedDataset& data, double lambda,
                         const SolverConfig& cfg = {});

/// f_l = (1 + tau) * MSE_l(ols)
ThresholdReport thresholds_from_tau(const GroupedDataset& data, double tau,
                                    const SolverConfig& cfg = {},
                                    BaselineMode mode = BaselineMode::global_ols);

/// f_l = (1 - gamma) * MSE_l(lasso(lambda)), 0 <= gamma < 1
ThresholdReport thresholds_from_gamma(const GroupedDataset& data, double lambda, double gamma,
                                      const SolverConfig& cfg = {});

/// Baseline group MSE vectors (exposed for harness reuse).
Vector baseline_mse_ols(const GroupedDataset& data, BaselineMode mode = BaselineMode::global_ols);
Vector baseline_mse_lasso(const GroupedDataset& data, double lambda);

}  // namespace csclasso
