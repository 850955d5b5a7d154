#pragma once

// Internal augmented-Lagrangian machinery shared by the constrained solver,
// the min-L1 limit problem and the epigraph minimax problems. Not installed.

#include "csclasso/types.hpp"

#include <optional>
#include <vector>

namespace csclasso::detail {

/// Quadratic residual term q(h) = (1/n) ||y - X h||^2 over the head block of
/// the optimization variable. Gram matrices are cached when n > cols, so a
/// gradient costs O(cols^2) instead of O(n cols).
struct QuadResidual {
    Matrix X;
    Vector y;
    Matrix G;       // X'X when cached
    Vector c;       // X'y when cached
    double yty = 0.0;
    bool cached = false;
    Eigen::Index n = 0;

    static QuadResidual from_rows(const GroupedDataset& data, const IndexSet& rows);

    double value(const Eigen::Ref<const Vector>& head) const;
    // returns value, accumulates (2/n)(G h - c) * weight into grad_head
    double value_and_grad(const Eigen::Ref<const Vector>& head, double weight,
                          Vector& grad_head) const;
    // returns value, overwrites raw_grad with (2/n)(G h - c)
    double value_and_raw_grad(const Eigen::Ref<const Vector>& head, Vector& raw_grad) const;
    Vector gradient(const Eigen::Ref<const Vector>& head) const;
    void add_hessvec(const Eigen::Ref<const Vector>& u_head, double weight,
                     Vector& out_head) const;
};

/// g(v) = scale * q(head) + z_coef * z + offset  <= 0
struct ConstraintTerm {
    QuadResidual q;
    double scale = 1.0;
    double z_coef = 0.0;
    double offset = 0.0;
};

enum class ProxMode { none, l1_beta_tail, l1_w_block };

/// Variable layout: [ head (p+1) | z (0 or 1) | w (0 or m) ].
struct AlmProblem {
    Eigen::Index head_dim = 0;
    bool has_z = false;
    bool split = false;           // w block mirrors A*head
    const Matrix* A = nullptr;    // split mode only
    ProxMode prox = ProxMode::none;
    double prox_weight = 0.0;
    double obj_quad_weight = 0.0;
    std::optional<QuadResidual> q0;
    double obj_z_coef = 0.0;
    std::vector<ConstraintTerm> constraints;

    Eigen::Index z_index() const { return head_dim; }
    Eigen::Index w_offset() const { return head_dim + (has_z ? 1 : 0); }
    Eigen::Index w_dim() const { return split ? A->rows() : 0; }
    Eigen::Index total_dim() const { return w_offset() + w_dim(); }
};

struct AlmOptions {
    double tol_stat = 1e-6;
    double tol_feas = 1e-8;
    int max_outer = 100;
    int max_inner = 20000;
    double growth = 10.0;
    double rho0 = 10.0;
    double rho_cap = 1e12;
};

struct AlmResult {
    Vector v;
    Vector eta;            // constraint multipliers (post-update)
    Vector split_dual;     // u_rep = u + rho_A (A beta - w) in split mode
    double stationarity = 0.0;
    double feasibility = 0.0;
    double complementarity = 0.0;
    int iterations_outer = 0;
    long long iterations_inner = 0;
    SolveStatus status = SolveStatus::max_iter;
};

AlmResult solve_alm(const AlmProblem& prob, const Vector& v0, const AlmOptions& opt);

/// Constraint values g_l(v) for diagnostics.
Vector constraint_values(const AlmProblem& prob, const Vector& v);

}  // namespace csclasso::detail
