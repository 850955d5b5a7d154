#include "csclasso/baseline.hpp"

#include <cmath>
#include <stdexcept>

namespace csclasso {

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

Vector solve_ols(const GroupedDataset& data) {
    SubsetView obj = gather_rows(data, data.objective_rows);
    if (obj.X.rows() == 0) throw std::invalid_argument("solve_ols: no objective rows");
    // CompleteOrthogonalDecomposition returns the minimum-norm solution for
    // rank-deficient designs.
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(obj.X);
    return cod.solve(obj.y);
}

LassoFit solve_lasso_cd(const GroupedDataset& data, double lambda, int max_sweeps,
                        const Vector* warm_start) {
    if (lambda < 0.0) throw std::invalid_argument("solve_lasso_cd: lambda must be nonnegative");
    SubsetView obj = gather_rows(data, data.objective_rows);
    const Matrix& X = obj.X;
    const Vector& y = obj.y;
    const Eigen::Index n = X.rows();
    const Eigen::Index pc = X.cols();

    Vector col_sq(pc);
    for (Eigen::Index j = 0; j < pc; ++j) col_sq[j] = X.col(j).squaredNorm();

    Vector beta = Vector::Zero(pc);
    if (warm_start && warm_start->size() == pc) beta = *warm_start;
    Vector resid = y - X * beta;  // maintained incrementally
    constexpr double kSweepTol = 1e-10;

    LassoFit fit;
    fit.converged = false;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < pc; ++j) {
            if (col_sq[j] <= 0.0) continue;
            const double old = beta[j];
            // partial residual correlation, (2/n) x_j' (resid + x_j beta_j)
            const double rho = (2.0 / static_cast<double>(n)) * (X.col(j).dot(resid) + col_sq[j] * old);
            const double denom = (2.0 / static_cast<double>(n)) * col_sq[j];
            double next;
            if (j == 0) {
                next = rho / denom;  // intercept is unpenalized
            } else {
                next = soft_threshold(rho, lambda) / denom;
            }
            if (next != old) {
                resid += X.col(j) * (old - next);
                beta[j] = next;
                max_change = std::max(max_change, std::abs(next - old));
            }
        }
        if (max_change <= kSweepTol) {
            fit.converged = true;
            ++sweep;
            break;
        }
    }

    fit.beta = beta;
    fit.iterations = sweep;
    fit.objective = resid.squaredNorm() / static_cast<double>(n) +
                    lambda * beta.tail(pc - 1).template lpNorm<1>();
    fit.nz_count = 0;
    for (Eigen::Index j = 1; j < pc; ++j)
        if (std::abs(beta[j]) > kZeroTol) ++fit.nz_count;
    return fit;
}

double lasso_lambda_star(const GroupedDataset& data) {
    SubsetView obj = gather_rows(data, data.objective_rows);
    const Eigen::Index n = obj.X.rows();
    const Eigen::Index pc = obj.X.cols();
    const double ybar = obj.y.mean();
    Vector centered = obj.y.array() - ybar;
    double best = 0.0;
    for (Eigen::Index j = 1; j < pc; ++j) {
        best = std::max(best, std::abs((2.0 / static_cast<double>(n)) * obj.X.col(j).dot(centered)));
    }
    return best;
}

double kkt_check_lasso(const GroupedDataset& data, double lambda, const Vector& beta) {
    SubsetView obj = gather_rows(data, data.objective_rows);
    const Eigen::Index n = obj.X.rows();
    Vector resid = obj.y - obj.X * beta;
    Vector corr = (2.0 / static_cast<double>(n)) * (obj.X.transpose() * resid);

    double worst = std::abs(corr[0]);  // intercept gradient must vanish
    for (Eigen::Index j = 1; j < obj.X.cols(); ++j) {
        if (std::abs(beta[j]) > kZeroTol) {
            worst = std::max(worst, std::abs(corr[j] - (beta[j] > 0 ? lambda : -lambda)));
        } else {
            worst = std::max(worst, std::max(0.0, std::abs(corr[j]) - lambda));
        }
    }
    return worst;
}

}  // namespace csclasso
