#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace csclasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IndexSet = std::vector<Eigen::Index>;

/// Magnitude below which a penalized coefficient counts as zero
/// (standardized units).
inline constexpr double kZeroTol = 1e-8;

/// Response vector, design matrix with a leading all-ones intercept column,
/// and L (possibly overlapping) row-index groups whose prediction errors can
/// be constrained. `objective_rows` selects the data entering the objective;
/// empty means all rows.
struct GroupedDataset {
    Vector y;                          // length n
    Matrix X;                          // n x (p+1), column 0 == 1
    std::vector<IndexSet> groups;      // L row-index sets, 0-based
    std::vector<std::string> group_names;
    IndexSet objective_rows;           // empty => all rows

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index p() const { return X.cols() - 1; }
    Eigen::Index num_groups() const { return static_cast<Eigen::Index>(groups.size()); }

    /// Rows used by the objective term (all rows when objective_rows empty).
    Eigen::Index n_objective() const {
        return objective_rows.empty() ? n() : static_cast<Eigen::Index>(objective_rows.size());
    }
};

enum class PenaltyKind {
    identity_no_intercept,  // A = (0 | I), never penalizes beta_0
    general,
};

/// Linear map whose image's L1 norm is penalized.
struct PenaltyMatrix {
    PenaltyKind kind = PenaltyKind::identity_no_intercept;
    Matrix A;  // m x (p+1); ignored (implicit) for identity_no_intercept

    static PenaltyMatrix identity_no_intercept_for(Eigen::Index p) {
        PenaltyMatrix pm;
        pm.kind = PenaltyKind::identity_no_intercept;
        pm.A = Matrix::Zero(p, p + 1);
        pm.A.block(0, 1, p, p).setIdentity();
        return pm;
    }
    static PenaltyMatrix general_matrix(Matrix A) {
        PenaltyMatrix pm;
        pm.kind = PenaltyKind::general;
        pm.A = std::move(A);
        return pm;
    }

    Eigen::Index rows() const { return A.rows(); }
};

/// One constrained-regression instance: penalty, regularization weight and
/// per-group MSE thresholds over a dataset.
struct ProblemSpec {
    const GroupedDataset* data = nullptr;
    PenaltyMatrix penalty;
    double lambda = 0.0;
    Vector thresholds;  // length L, strictly positive MSE bounds
};

enum class SolveStatus { converged, max_iter, infeasible };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::infeasible: return "infeasible";
    }
    return "unknown";
}

struct FitResult {
    Vector beta;              // length p+1
    double objective = 0.0;
    Vector group_mse;         // length L
    Vector multipliers;       // length L, eta_l >= 0
    double kkt_stationarity = 0.0;  // sup-norm residual
    double kkt_feasibility = 0.0;   // max positive constraint violation
    int iterations_outer = 0;
    int iterations_inner = 0;
    SolveStatus status = SolveStatus::max_iter;
};

struct SolverConfig {
    double tol_stat = 1e-6;
    double tol_feas = 1e-8;
    int max_outer = 100;
    int max_inner = 20000;
    double penalty_growth = 10.0;  // > 1
    std::optional<Vector> warm_start;
    std::uint64_t seed = 0;
};

struct ValidationOutcome {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Diagnostic check of a problem instance. Never throws; returns the list of
/// violations (empty when the spec is well formed).
ValidationOutcome validate_problem(const ProblemSpec& spec);

/// Convenience: rows of a dataset gathered into a dense (X_sub, y_sub) pair.
struct SubsetView {
    Matrix X;
    Vector y;
};
SubsetView gather_rows(const GroupedDataset& data, const IndexSet& rows);

}  // namespace csclasso
