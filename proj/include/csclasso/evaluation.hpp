#pragma once

#include "csclasso/datagen.hpp"
#include "csclasso/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace csclasso {

enum class FprMode {
    conventional,   // FPR = |{beta_j = 0 & betahat_j != 0}| / |{beta_j = 0}|
    paper_printed,  // audit variant counting |{beta_j = 0 & betahat_j = 0}|
};

struct SupportRates {
    std::optional<double> fpr;
    std::optional<double> fnr;
};

/// (1/n_l) ||y_l - X_l beta||^2 on group `group`; mse_overall uses all rows.
double mse_group(const Vector& beta, const GroupedDataset& data, Eigen::Index group);
double mse_overall(const Vector& beta, const GroupedDataset& data);
double mse_rows(const Vector& beta, const GroupedDataset& data, const IndexSet& rows);

/// Percentage of penalized coordinates (j >= 1) above the zero tolerance.
double nz_percent(const Vector& beta);

/// Euclidean distance over coordinates 1..p (intercept excluded).
double l2_distance(const Vector& beta_hat, const Vector& beta_true);

/// Support-recovery error rates; a rate is absent when its denominator is 0.
SupportRates fpr_fnr(const Vector& beta_hat, const Vector& beta_true,
                     FprMode mode = FprMode::conventional);

/// Coordinatewise median; an even count averages the middle two.
double median(std::vector<double> values);

struct FoldOutcome {
    int fold_id = 0;
    bool solved = false;
    double selected_lambda = 0.0;
    double overall_mse = 0.0;               // test rows
    Vector group_mse;                       // test rows per group, NaN when absent
    Vector thresholds;                      // f at the selected lambda (constrained groups)
    double nz = 0.0;
    std::optional<double> l2, fpr, fnr;
    bool train_constraints_ok = false;
    bool test_constraints_ok = false;
    double solve_seconds = 0.0;
};

struct EvalReport {
    std::vector<FoldOutcome> per_fold;
    FoldOutcome medians;                    // across solved folds; solved=false when none
    std::vector<int> constrained_groups;
    std::optional<double> gamma, tau;
};

struct CrossValidateOptions {
    int folds = 5;
    std::uint64_t seed = 0;
    std::optional<double> gamma;      // improvement over the per-lambda Lasso baselines
    std::optional<double> tau;        // worsening allowance over the OLS baselines
    std::vector<double> lambdas;      // empty: doubling grid up to the train lambda*
    std::vector<int> constrained_groups;  // empty: all groups
    const Matrix* true_beta = nullptr;             // K x (p+1) raw-scale generating model
    const StandardizationStats* base_stats = nullptr;  // stats that standardized `data`
    int truth_row = -1;               // row of true_beta to compare against; -1 = first
                                      // group past the leading six (else 0)
    FprMode fpr_mode = FprMode::conventional;
    SolverConfig solver;
};

/// Per fold: standardize on train, anchor thresholds on train baselines,
/// solve the lambda grid, select lambda by validation overall MSE (ties break
/// toward the larger lambda), report test metrics; medians aggregate solved
/// folds. Without gamma/tau the candidates are plain Lasso fits.
EvalReport cross_validate(const GroupedDataset& data, const CrossValidateOptions& opt);

FoldOutcome aggregate_medians(const std::vector<FoldOutcome>& folds);

std::string eval_report_to_json(const EvalReport& report,
                                const std::vector<std::string>& group_names);
std::string eval_report_to_csv(const EvalReport& report,
                               const std::vector<std::string>& group_names);

}  // namespace csclasso
