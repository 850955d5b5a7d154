#include "alm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace csclasso::detail {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double soft(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

QuadResidual QuadResidual::from_rows(const GroupedDataset& data, const IndexSet& rows) {
    QuadResidual q;
    SubsetView sub = gather_rows(data, rows);
    q.n = sub.X.rows();
    if (q.n > sub.X.cols()) {
        q.cached = true;
        q.G.noalias() = sub.X.transpose() * sub.X;
        q.c.noalias() = sub.X.transpose() * sub.y;
        q.yty = sub.y.squaredNorm();
    } else {
        q.X = std::move(sub.X);
        q.y = std::move(sub.y);
    }
    return q;
}

double QuadResidual::value(const Eigen::Ref<const Vector>& head) const {
    if (cached) {
        const double quad = head.dot(G * head) - 2.0 * c.dot(head) + yty;
        return std::max(0.0, quad) / static_cast<double>(n);
    }
    return (y - X * head).squaredNorm() / static_cast<double>(n);
}

double QuadResidual::value_and_grad(const Eigen::Ref<const Vector>& head, double weight,
                                    Vector& grad_head) const {
    const double inv_n = 1.0 / static_cast<double>(n);
    if (cached) {
        Vector Gh = G * head;
        const double val = std::max(0.0, head.dot(Gh) - 2.0 * c.dot(head) + yty) * inv_n;
        grad_head.noalias() += (2.0 * weight * inv_n) * (Gh - c);
        return val;
    }
    Vector r = y - X * head;
    const double val = r.squaredNorm() * inv_n;
    grad_head.noalias() -= (2.0 * weight * inv_n) * (X.transpose() * r);
    return val;
}

double QuadResidual::value_and_raw_grad(const Eigen::Ref<const Vector>& head,
                                        Vector& raw_grad) const {
    raw_grad.setZero();
    return value_and_grad(head, 1.0, raw_grad);
}

Vector QuadResidual::gradient(const Eigen::Ref<const Vector>& head) const {
    Vector g = Vector::Zero(head.size());
    value_and_grad(head, 1.0, g);
    return g;
}

void QuadResidual::add_hessvec(const Eigen::Ref<const Vector>& u_head, double weight,
                               Vector& out_head) const {
    const double s = 2.0 * weight / static_cast<double>(n);
    if (cached) {
        out_head.noalias() += s * (G * u_head);
    } else {
        out_head.noalias() += s * (X.transpose() * (X * u_head));
    }
}

namespace {

/// All per-solve state the inner loop needs.
struct Workspace {
    const AlmProblem& prob;
    Vector eta;       // length L
    double rho;
    Vector split_shift;  // u / rho_A
    double rho_split;

    Eigen::Index hd() const { return prob.head_dim; }

    Vector constraint_vals(const Vector& v) const {
        Vector g(static_cast<Eigen::Index>(prob.constraints.size()));
        const auto head = v.head(hd());
        for (std::size_t l = 0; l < prob.constraints.size(); ++l) {
            const ConstraintTerm& ct = prob.constraints[l];
            double val = ct.scale * ct.q.value(head) + ct.offset;
            if (prob.has_z) val += ct.z_coef * v[prob.z_index()];
            g[static_cast<Eigen::Index>(l)] = val;
        }
        return g;
    }

    mutable Vector scratch;  // raw-gradient buffer, length head_dim

    /// Smooth AL value; gradient accumulated when grad != nullptr.
    double eval(const Vector& v, Vector* grad) const {
        if (grad) grad->setZero();
        if (scratch.size() != hd()) scratch.resize(hd());
        double val = 0.0;
        const auto head = v.head(hd());

        if (prob.obj_quad_weight > 0.0 && prob.q0) {
            if (grad) {
                const double q = prob.q0->value_and_raw_grad(head, scratch);
                val += prob.obj_quad_weight * q;
                grad->head(hd()) += prob.obj_quad_weight * scratch;
            } else {
                val += prob.obj_quad_weight * prob.q0->value(head);
            }
        }
        if (prob.has_z) {
            val += prob.obj_z_coef * v[prob.z_index()];
            if (grad) (*grad)[prob.z_index()] += prob.obj_z_coef;
        }

        for (std::size_t l = 0; l < prob.constraints.size(); ++l) {
            const ConstraintTerm& ct = prob.constraints[l];
            double qval;
            if (grad) {
                qval = ct.q.value_and_raw_grad(head, scratch);
            } else {
                qval = ct.q.value(head);
            }
            double gval = ct.scale * qval + ct.offset;
            if (prob.has_z) gval += ct.z_coef * v[prob.z_index()];
            const double el = eta[static_cast<Eigen::Index>(l)];
            const double m = std::max(0.0, el + rho * gval);
            val += (m * m - el * el) / (2.0 * rho);
            if (grad && m > 0.0) {
                grad->head(hd()) += (m * ct.scale) * scratch;
                if (prob.has_z) (*grad)[prob.z_index()] += m * ct.z_coef;
            }
        }

        if (prob.split) {
            const Matrix& A = *prob.A;
            Vector r = A * head - v.segment(prob.w_offset(), prob.w_dim()) + split_shift;
            val += 0.5 * rho_split * r.squaredNorm();
            if (grad) {
                grad->head(hd()).noalias() += rho_split * (A.transpose() * r);
                grad->segment(prob.w_offset(), prob.w_dim()).noalias() -= rho_split * r;
            }
        }
        return val;
    }

    double prox_term(const Vector& v) const {
        switch (prob.prox) {
            case ProxMode::none: return 0.0;
            case ProxMode::l1_beta_tail:
                return prob.prox_weight * v.segment(1, hd() - 1).lpNorm<1>();
            case ProxMode::l1_w_block:
                return prob.prox_weight * v.segment(prob.w_offset(), prob.w_dim()).lpNorm<1>();
        }
        return 0.0;
    }

    Vector prox(Vector v, double step) const {
        const double t = prob.prox_weight * step;
        switch (prob.prox) {
            case ProxMode::none: break;
            case ProxMode::l1_beta_tail:
                for (Eigen::Index j = 1; j < hd(); ++j) v[j] = soft(v[j], t);
                break;
            case ProxMode::l1_w_block:
                for (Eigen::Index i = 0; i < prob.w_dim(); ++i) {
                    Eigen::Index j = prob.w_offset() + i;
                    v[j] = soft(v[j], t);
                }
                break;
        }
        return v;
    }

    /// Sup-norm distance of 0 from grad + prox_weight * d(L1 part) at v.
    double stationarity(const Vector& v, const Vector& grad) const {
        const double lam = prob.prox_weight;
        double worst = 0.0;
        auto l1_coord = [&](double x, double g) {
            if (std::abs(x) > kZeroTol) return std::abs(g + (x > 0 ? lam : -lam));
            return std::max(0.0, std::abs(g) - lam);
        };
        switch (prob.prox) {
            case ProxMode::none:
                worst = grad.lpNorm<Eigen::Infinity>();
                break;
            case ProxMode::l1_beta_tail:
                worst = std::abs(grad[0]);
                for (Eigen::Index j = 1; j < hd(); ++j)
                    worst = std::max(worst, l1_coord(v[j], grad[j]));
                break;
            case ProxMode::l1_w_block:
                worst = grad.head(hd()).lpNorm<Eigen::Infinity>();
                if (prob.has_z) worst = std::max(worst, std::abs(grad[prob.z_index()]));
                for (Eigen::Index i = 0; i < prob.w_dim(); ++i) {
                    Eigen::Index j = prob.w_offset() + i;
                    worst = std::max(worst, l1_coord(v[j], grad[j]));
                }
                break;
        }
        return worst;
    }

    /// Largest eigenvalue of the local curvature model at v0 (power iteration).
    double lipschitz_estimate(const Vector& v0) const {
        const Eigen::Index d = prob.total_dim();
        Vector g0 = constraint_vals(v0);
        std::vector<double> weights(prob.constraints.size());
        std::vector<Vector> rank1;
        for (std::size_t l = 0; l < prob.constraints.size(); ++l) {
            const double m = std::max(0.0, eta[static_cast<Eigen::Index>(l)] +
                                               rho * g0[static_cast<Eigen::Index>(l)]);
            weights[l] = m;
            if (m > 0.0) {
                Vector dvec = Vector::Zero(d);
                const ConstraintTerm& ct = prob.constraints[l];
                Vector gh = Vector::Zero(hd());
                ct.q.value_and_grad(v0.head(hd()), ct.scale, gh);
                dvec.head(hd()) = gh;
                if (prob.has_z) dvec[prob.z_index()] = ct.z_coef;
                rank1.push_back(std::move(dvec));
            }
        }

        auto apply = [&](const Vector& u, Vector& out) {
            out.setZero();
            Vector oh = Vector::Zero(hd());
            if (prob.obj_quad_weight > 0.0 && prob.q0)
                prob.q0->add_hessvec(u.head(hd()), prob.obj_quad_weight, oh);
            for (std::size_t l = 0; l < prob.constraints.size(); ++l) {
                if (weights[l] > 0.0)
                    prob.constraints[l].q.add_hessvec(u.head(hd()),
                                                      weights[l] * prob.constraints[l].scale, oh);
            }
            out.head(hd()) = oh;
            for (const Vector& dvec : rank1) out.noalias() += (rho * dvec.dot(u)) * dvec;
            if (prob.split) {
                const Matrix& A = *prob.A;
                Vector r = A * u.head(hd()) - u.segment(prob.w_offset(), prob.w_dim());
                out.head(hd()).noalias() += rho_split * (A.transpose() * r);
                out.segment(prob.w_offset(), prob.w_dim()).noalias() -= rho_split * r;
            }
        };

        std::uint64_t rng_state = 0x5ca1ab1eULL;
        Vector u(d);
        for (Eigen::Index i = 0; i < d; ++i)
            u[i] = static_cast<double>(splitmix64(rng_state) >> 11) * 0x1.0p-53 - 0.5;
        u.normalize();
        Vector Hu(d);
        double lam = 0.0;
        for (int it = 0; it < 50; ++it) {
            apply(u, Hu);
            const double nrm = Hu.norm();
            if (nrm <= 1e-300) return 1e-10;
            const double lam_new = u.dot(Hu);
            u = Hu / nrm;
            if (it > 4 && std::abs(lam_new - lam) <= 1e-4 * std::abs(lam_new)) {
                lam = lam_new;
                break;
            }
            lam = lam_new;
        }
        return std::max(lam, 1e-10);
    }
};

/// FISTA with backtracking and a monotone restart safeguard.
struct InnerResult {
    Vector x;
    long long iterations = 0;
    double stationarity = 0.0;
};

InnerResult fista(const Workspace& ws, Vector x0, double inner_tol, int max_iter) {
    double L = 1.05 * ws.lipschitz_estimate(x0);
    Vector x = std::move(x0);
    Vector x_prev = x;
    Vector y = x;
    double t = 1.0;
    double Fx = ws.eval(x, nullptr) + ws.prox_term(x);

    Vector grad(x.size());
    InnerResult res;
    res.stationarity = std::numeric_limits<double>::infinity();
    constexpr int kCheckEvery = 8;

    for (int it = 0; it < max_iter; ++it) {
        ++res.iterations;
        double Fy = ws.eval(y, &grad);
        Vector x_try;
        double phi_try = 0.0;
        for (;;) {
            x_try = ws.prox(y - grad / L, 1.0 / L);
            phi_try = ws.eval(x_try, nullptr);
            const double quad_bound =
                Fy + grad.dot(x_try - y) + 0.5 * L * (x_try - y).squaredNorm();
            if (phi_try <= quad_bound + 1e-12 * (1.0 + std::abs(Fy)) || L > 1e32) break;
            L *= 2.0;
        }
        double F_try = phi_try + ws.prox_term(x_try);

        if (F_try > Fx + 1e-12 * (1.0 + std::abs(Fx)) && (y - x).squaredNorm() > 0.0) {
            // momentum overshoot: restart from the last accepted point
            y = x;
            t = 1.0;
            Fy = ws.eval(y, &grad);
            for (;;) {
                x_try = ws.prox(y - grad / L, 1.0 / L);
                phi_try = ws.eval(x_try, nullptr);
                const double quad_bound =
                    Fy + grad.dot(x_try - y) + 0.5 * L * (x_try - y).squaredNorm();
                if (phi_try <= quad_bound + 1e-12 * (1.0 + std::abs(Fy)) || L > 1e32) break;
                L *= 2.0;
            }
            F_try = phi_try + ws.prox_term(x_try);
        }

        x_prev.swap(x);
        x = x_try;
        Fx = F_try;
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = x + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;

        if ((it + 1) % kCheckEvery == 0 || it + 1 == max_iter) {
            ws.eval(x, &grad);
            ++res.iterations;
            res.stationarity = ws.stationarity(x, grad);
            if (res.stationarity <= inner_tol) break;
        }
    }
    if (!std::isfinite(res.stationarity)) {
        ws.eval(x, &grad);
        res.stationarity = ws.stationarity(x, grad);
    }
    res.x = std::move(x);
    return res;
}

}  // namespace

Vector constraint_values(const AlmProblem& prob, const Vector& v) {
    Workspace ws{prob, Vector::Zero(static_cast<Eigen::Index>(prob.constraints.size())), 1.0,
                 Vector(), 1.0};
    return ws.constraint_vals(v);
}

AlmResult solve_alm(const AlmProblem& prob, const Vector& v0, const AlmOptions& opt) {
    const Eigen::Index L = static_cast<Eigen::Index>(prob.constraints.size());
    Workspace ws{prob, Vector::Zero(L), opt.rho0, Vector(), 1.0};
    if (prob.split) {
        ws.split_shift = Vector::Zero(prob.w_dim());
        ws.rho_split = std::max(1.0, prob.prox_weight);
    }

    Vector v = v0;
    if (v.size() != prob.total_dim()) {
        Vector padded = Vector::Zero(prob.total_dim());
        padded.head(std::min(v.size(), prob.total_dim())) = v.head(std::min(v.size(), prob.total_dim()));
        v = std::move(padded);
    }
    if (prob.split) {
        v.segment(prob.w_offset(), prob.w_dim()) = (*prob.A) * v.head(prob.head_dim);
    }

    AlmResult out;
    double feas_prev = std::numeric_limits<double>::infinity();
    double feas_best = std::numeric_limits<double>::infinity();
    double split_prev = std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int outer = 0; outer < opt.max_outer; ++outer) {
        const double inner_tol =
            std::max(0.3 * opt.tol_stat,
                     std::min(1e-4, std::isfinite(feas_prev) ? 0.05 * feas_prev : 1e-4));
        InnerResult inner = fista(ws, v, inner_tol, opt.max_inner);
        v = std::move(inner.x);
        out.iterations_inner += inner.iterations;
        out.iterations_outer = outer + 1;

        Vector g = ws.constraint_vals(v);
        Vector eta_new(L);
        double feas = 0.0;
        double comp = 0.0;
        for (Eigen::Index l = 0; l < L; ++l) {
            eta_new[l] = std::max(0.0, ws.eta[l] + ws.rho * g[l]);
            feas = std::max(feas, g[l]);
            comp = std::max(comp, std::abs(eta_new[l] * g[l]));
        }
        feas = std::max(0.0, feas);

        double split_res = 0.0;
        if (prob.split) {
            Vector r = (*prob.A) * v.head(prob.head_dim) - v.segment(prob.w_offset(), prob.w_dim());
            split_res = r.lpNorm<Eigen::Infinity>();
            out.split_dual = ws.rho_split * (ws.split_shift + r);
        }
        const double feas_total = std::max(feas, split_res);

        // The inner stationarity equals the Lagrangian residual at eta_new,
        // since max(0, eta + rho g) is exactly the post-update multiplier.
        out.stationarity = inner.stationarity;
        out.feasibility = feas_total;
        out.complementarity = comp;
        out.eta = eta_new;

        if (inner.stationarity <= opt.tol_stat && feas_total <= opt.tol_feas &&
            comp <= opt.tol_stat) {
            out.status = SolveStatus::converged;
            out.v = v;
            return out;
        }

        // Multiplier and penalty updates
        ws.eta = eta_new;
        if (feas > opt.tol_feas && feas > feas_prev / 4.0)
            ws.rho = std::min(ws.rho * opt.growth, opt.rho_cap);
        if (prob.split) {
            ws.split_shift += (*prob.A) * v.head(prob.head_dim) -
                              v.segment(prob.w_offset(), prob.w_dim());
            if (split_res > opt.tol_feas && split_res > split_prev / 4.0) {
                // shift stores u/rho_A, rescale when rho_A changes
                ws.split_shift /= opt.growth;
                ws.rho_split = std::min(ws.rho_split * opt.growth, opt.rho_cap);
            }
            split_prev = split_res;
        }

        if (ws.rho >= opt.rho_cap && feas > opt.tol_feas * 1e3) {
            if (feas > 0.97 * feas_best) ++stall; else stall = 0;
            if (stall >= 3) {
                out.status = SolveStatus::infeasible;
                out.v = v;
                return out;
            }
        }
        feas_best = std::min(feas_best, feas);
        feas_prev = feas;
    }

    out.status = (out.feasibility > opt.tol_feas * 1e3) ? SolveStatus::infeasible
                                                        : SolveStatus::max_iter;
    out.v = v;
    return out;
}

}  // namespace csclasso::detail
