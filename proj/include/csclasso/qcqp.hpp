#pragma once

#include "csclasso/types.hpp"

namespace csclasso {

/// Solve
///   min (1/n0)||y0 - X0 b||^2 + lambda ||A b||_1
///   s.t. (1/n_l)||y_l - X_l b||^2 <= f_l,  l = 1..L
/// by an outer augmented-Lagrangian loop over the constraint multipliers with
/// an accelerated proximal-gradient inner solver. The L1 prox is exact
/// soft-thresholding for the (0|I) penalty; a split copy w = A b handles
/// general penalty matrices. Warm starts are honored via cfg.warm_start.
FitResult solve_csclasso(const ProblemSpec& spec, const SolverConfig& cfg = {});

struct KktResidual {
    double stationarity = 0.0;    // sup-norm distance of 0 from the stationarity set
    double feasibility = 0.0;     // max positive constraint violation
    double complementarity = 0.0; // max_l |eta_l * slack_l|
};

/// Solver-independent certificate at (beta, eta).
KktResidual kkt_residual_csclasso(const ProblemSpec& spec, const Vector& beta, const Vector& eta);

/// Limit problem of the regularization path: min ||A b||_1 over the feasible
/// region. Ties in the (unpenalized) intercept direction are broken toward
/// the best feasible fit. Result beta is in FitResult::beta; objective holds
/// ||A b||_1.
FitResult solve_min_l1_feasible(const ProblemSpec& spec, const SolverConfig& cfg = {});

/// Sup-norm residual of the single-constraint stationarity system
///   (2/n0) X0'(y0 - X0 b) + eta (2/n1) X1'(y1 - X1 b) = b(lambda),
/// where component s of b(lambda) is sign(beta_s) * lambda for nonzero
/// penalized coordinates, lies in [-lambda, lambda] for zero ones, and is 0
/// for the intercept. Requires exactly one constraint and the (0|I) penalty.
double prop1_stationarity_residual(const ProblemSpec& spec, const FitResult& fit);

/// (1/n0)||y0 - X0 b||^2 + lambda ||A b||_1 evaluated directly.
double csclasso_objective(const ProblemSpec& spec, const Vector& beta);

/// ||A b||_1 for the spec's penalty.
double penalty_l1(const ProblemSpec& spec, const Vector& beta);

}  // namespace csclasso
