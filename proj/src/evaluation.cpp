#include "csclasso/evaluation.hpp"

#include "csclasso/baseline.hpp"
#include "csclasso/path.hpp"
#include "csclasso/qcqp.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace csclasso {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

/// Rows gathered into a standalone dataset; kept groups are intersected with
/// `rows` and reindexed. Groups that lose all rows stay (empty) so indexes
/// line up; callers must check.
GroupedDataset subset_dataset(const GroupedDataset& d, const IndexSet& rows) {
    GroupedDataset out;
    SubsetView v = gather_rows(d, rows);
    out.X = std::move(v.X);
    out.y = std::move(v.y);
    std::unordered_map<Eigen::Index, Eigen::Index> local;
    local.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) local[rows[i]] = static_cast<Eigen::Index>(i);
    for (const IndexSet& g : d.groups) {
        IndexSet sub;
        for (Eigen::Index r : g) {
            auto it = local.find(r);
            if (it != local.end()) sub.push_back(it->second);
        }
        std::sort(sub.begin(), sub.end());
        out.groups.push_back(std::move(sub));
    }
    out.group_names = d.group_names;
    return out;
}

IndexSet intersect_sorted(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

double mse_rows(const Vector& beta, const GroupedDataset& data, const IndexSet& rows) {
    SubsetView v = gather_rows(data, rows);
    if (v.X.rows() == 0) return kNaN;
    return (v.y - v.X * beta).squaredNorm() / static_cast<double>(v.X.rows());
}

double mse_group(const Vector& beta, const GroupedDataset& data, Eigen::Index group) {
    if (group < 0 || group >= data.num_groups())
        throw std::invalid_argument("mse_group: no such group");
    return mse_rows(beta, data, data.groups[static_cast<std::size_t>(group)]);
}

double mse_overall(const Vector& beta, const GroupedDataset& data) {
    return (data.y - data.X * beta).squaredNorm() / static_cast<double>(data.n());
}

double nz_percent(const Vector& beta) {
    const Eigen::Index p = beta.size() - 1;
    if (p <= 0) return 0.0;
    int nz = 0;
    for (Eigen::Index j = 1; j <= p; ++j)
        if (std::abs(beta[j]) > kZeroTol) ++nz;
    return 100.0 * static_cast<double>(nz) / static_cast<double>(p);
}

double l2_distance(const Vector& beta_hat, const Vector& beta_true) {
    if (beta_hat.size() != beta_true.size())
        throw std::invalid_argument("l2_distance: length mismatch");
    const Eigen::Index p = beta_hat.size() - 1;
    return (beta_hat.tail(p) - beta_true.tail(p)).norm();
}

SupportRates fpr_fnr(const Vector& beta_hat, const Vector& beta_true, FprMode mode) {
    if (beta_hat.size() != beta_true.size())
        throw std::invalid_argument("fpr_fnr: length mismatch");
    const Eigen::Index p = beta_hat.size() - 1;
    int true_zero = 0, true_nonzero = 0, fp = 0, tn = 0, fn = 0;
    for (Eigen::Index j = 1; j <= p; ++j) {
        const bool tz = std::abs(beta_true[j]) <= kZeroTol;
        const bool hz = std::abs(beta_hat[j]) <= kZeroTol;
        if (tz) {
            ++true_zero;
            if (!hz) ++fp; else ++tn;
        } else {
            ++true_nonzero;
            if (hz) ++fn;
        }
    }
    SupportRates out;
    if (true_zero > 0) {
        out.fpr = mode == FprMode::conventional
                      ? static_cast<double>(fp) / static_cast<double>(true_zero)
                      : static_cast<double>(tn) / static_cast<double>(true_zero);
    }
    if (true_nonzero > 0)
        out.fnr = static_cast<double>(fn) / static_cast<double>(true_nonzero);
    return out;
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    if (m % 2 == 1) return values[m / 2];
    return 0.5 * (values[m / 2 - 1] + values[m / 2]);
}

FoldOutcome aggregate_medians(const std::vector<FoldOutcome>& folds) {
    FoldOutcome out;
    out.fold_id = -1;
    std::vector<const FoldOutcome*> solved;
    for (const auto& f : folds)
        if (f.solved) solved.push_back(&f);
    if (solved.empty()) return out;
    out.solved = true;

    auto med_of = [&](auto getter) -> double {
        std::vector<double> vals;
        for (const FoldOutcome* f : solved) {
            const double v = getter(*f);
            if (std::isfinite(v)) vals.push_back(v);
        }
        return vals.empty() ? kNaN : median(std::move(vals));
    };
    out.selected_lambda = med_of([](const FoldOutcome& f) { return f.selected_lambda; });
    out.overall_mse = med_of([](const FoldOutcome& f) { return f.overall_mse; });
    out.nz = med_of([](const FoldOutcome& f) { return f.nz; });
    out.solve_seconds = med_of([](const FoldOutcome& f) { return f.solve_seconds; });

    auto med_opt = [&](auto getter) -> std::optional<double> {
        std::vector<double> vals;
        for (const FoldOutcome* f : solved) {
            const auto v = getter(*f);
            if (v && std::isfinite(*v)) vals.push_back(*v);
        }
        if (vals.empty()) return std::nullopt;
        return median(std::move(vals));
    };
    out.l2 = med_opt([](const FoldOutcome& f) { return f.l2; });
    out.fpr = med_opt([](const FoldOutcome& f) { return f.fpr; });
    out.fnr = med_opt([](const FoldOutcome& f) { return f.fnr; });

    const Eigen::Index ng = solved.front()->group_mse.size();
    out.group_mse.resize(ng);
    for (Eigen::Index g = 0; g < ng; ++g)
        out.group_mse[g] = med_of([g](const FoldOutcome& f) { return f.group_mse[g]; });
    const Eigen::Index nf = solved.front()->thresholds.size();
    out.thresholds.resize(nf);
    for (Eigen::Index g = 0; g < nf; ++g)
        out.thresholds[g] = med_of([g](const FoldOutcome& f) { return f.thresholds[g]; });

    out.train_constraints_ok = std::all_of(solved.begin(), solved.end(),
                                           [](const FoldOutcome* f) { return f->train_constraints_ok; });
    out.test_constraints_ok = std::all_of(solved.begin(), solved.end(),
                                          [](const FoldOutcome* f) { return f->test_constraints_ok; });
    return out;
}

EvalReport cross_validate(const GroupedDataset& data, const CrossValidateOptions& opt) {
    if (opt.folds < 3) throw std::invalid_argument("cross_validate: folds must be >= 3");
    if (opt.gamma && opt.tau)
        throw std::invalid_argument("cross_validate: gamma and tau are mutually exclusive");
    if (opt.gamma && (*opt.gamma < 0.0 || *opt.gamma >= 1.0))
        throw std::invalid_argument("cross_validate: gamma must lie in [0, 1)");

    const Eigen::Index L_all = data.num_groups();
    std::vector<int> constrained = opt.constrained_groups;
    if (constrained.empty() && (opt.gamma || opt.tau)) {
        constrained.resize(static_cast<std::size_t>(L_all));
        std::iota(constrained.begin(), constrained.end(), 0);
    }
    const bool unconstrained = !opt.gamma && !opt.tau;

    EvalReport report;
    report.constrained_groups = constrained;
    report.gamma = opt.gamma;
    report.tau = opt.tau;

    std::vector<FoldSplit> splits = kfold_split(data, opt.folds, opt.seed);

    for (const FoldSplit& split : splits) {
        FoldOutcome fold;
        fold.fold_id = split.fold_id;
        fold.group_mse = Vector::Constant(L_all, kNaN);
        fold.thresholds = Vector::Constant(static_cast<Eigen::Index>(constrained.size()), kNaN);

        auto [folded, fold_stats] = standardize(data, split.train);
        GroupedDataset train = subset_dataset(folded, split.train);

        // Grid: explicit or the doubling ladder up to the train lambda*.
        std::vector<double> grid = opt.lambdas;
        if (grid.empty())
            grid = build_lambda_grid(lasso_lambda_star(train), 2, GridScale::doubling);

        const double t0 = now_seconds();

        // Plain Lasso fits per grid point (baselines and/or candidates).
        std::vector<LassoFit> lasso_fits;
        lasso_fits.reserve(grid.size());
        {
            const Vector* warm = nullptr;
            for (double lam : grid) {
                lasso_fits.push_back(solve_lasso_cd(train, lam, 100000, warm));
                warm = &lasso_fits.back().beta;
            }
        }

        struct Candidate {
            Vector beta;
            bool feasible = true;
            Vector f;  // thresholds used (constrained groups)
        };
        std::vector<Candidate> candidates(grid.size());

        if (unconstrained) {
            for (std::size_t i = 0; i < grid.size(); ++i)
                candidates[i].beta = lasso_fits[i].beta;
        } else {
            // Solver-facing dataset: only the constrained groups constrain.
            GroupedDataset solver_data = train;
            solver_data.groups.clear();
            solver_data.group_names.clear();
            bool groups_ok = true;
            for (int g : constrained) {
                const IndexSet& rows = train.groups[static_cast<std::size_t>(g)];
                if (rows.empty()) groups_ok = false;
                solver_data.groups.push_back(rows);
                solver_data.group_names.push_back(
                    g < static_cast<int>(train.group_names.size()) ? train.group_names[static_cast<std::size_t>(g)]
                                                                   : "group" + std::to_string(g + 1));
            }

            Vector ols_mse;
            if (opt.tau) {
                Vector beta_ols = solve_ols(train);
                ols_mse.resize(static_cast<Eigen::Index>(constrained.size()));
                for (std::size_t ci = 0; ci < constrained.size(); ++ci)
                    ols_mse[static_cast<Eigen::Index>(ci)] =
                        mse_group(beta_ols, train, constrained[ci]);
            }

            ProblemSpec spec;
            spec.data = &solver_data;
            spec.penalty = PenaltyMatrix::identity_no_intercept_for(train.p());
            SolverConfig point_cfg = opt.solver;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                Candidate& cand = candidates[i];
                cand.f.resize(static_cast<Eigen::Index>(constrained.size()));
                bool valid = groups_ok;
                for (std::size_t ci = 0; ci < constrained.size(); ++ci) {
                    double base;
                    if (opt.tau) {
                        base = ols_mse[static_cast<Eigen::Index>(ci)];
                        cand.f[static_cast<Eigen::Index>(ci)] = (1.0 + *opt.tau) * base;
                    } else {
                        base = mse_group(lasso_fits[i].beta, train, constrained[ci]);
                        cand.f[static_cast<Eigen::Index>(ci)] = (1.0 - *opt.gamma) * base;
                    }
                    if (!(base > 1e-12)) valid = false;
                }
                if (!valid) {
                    cand.feasible = false;
                    continue;
                }
                spec.lambda = grid[i];
                spec.thresholds = cand.f;
                FitResult fit = solve_csclasso(spec, point_cfg);
                if (fit.status == SolveStatus::infeasible) {
                    cand.feasible = false;
                    continue;
                }
                cand.beta = fit.beta;
                point_cfg.warm_start = fit.beta;
            }
        }

        fold.solve_seconds = now_seconds() - t0;

        // Model selection on validation overall MSE; larger lambda wins ties.
        int best = -1;
        double best_mse = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!candidates[i].feasible) continue;
            const double v = mse_rows(candidates[i].beta, folded, split.valid);
            if (!std::isfinite(v)) continue;
            if (v < best_mse - 1e-12 * (1.0 + std::abs(best_mse)) ||
                (std::abs(v - best_mse) <= 1e-12 * (1.0 + std::abs(best_mse)))) {
                best = static_cast<int>(i);
                best_mse = std::min(best_mse, v);
            }
        }
        if (best < 0) {
            report.per_fold.push_back(std::move(fold));
            continue;  // fold infeasible at this demand level
        }

        const Candidate& sel = candidates[static_cast<std::size_t>(best)];
        fold.solved = true;
        fold.selected_lambda = grid[static_cast<std::size_t>(best)];
        fold.thresholds = sel.f;
        fold.overall_mse = mse_rows(sel.beta, folded, split.test);
        for (Eigen::Index g = 0; g < L_all; ++g) {
            IndexSet test_rows = intersect_sorted(data.groups[static_cast<std::size_t>(g)], split.test);
            fold.group_mse[g] = mse_rows(sel.beta, folded, test_rows);
        }
        fold.nz = nz_percent(sel.beta);

        if (!unconstrained) {
            bool train_ok = true, test_ok = true;
            for (std::size_t ci = 0; ci < constrained.size(); ++ci) {
                const double f = sel.f[static_cast<Eigen::Index>(ci)];
                const double tr = mse_group(sel.beta, train, constrained[ci]);
                if (tr > f + 1e-6) train_ok = false;
                const double te = fold.group_mse[constrained[ci]];
                if (std::isfinite(te) && te > f) test_ok = false;
            }
            fold.train_constraints_ok = train_ok;
            fold.test_constraints_ok = test_ok;
        } else {
            fold.train_constraints_ok = true;
            fold.test_constraints_ok = true;
        }

        if (opt.true_beta) {
            int row = opt.truth_row;
            if (row < 0) row = opt.true_beta->rows() > 6 ? 6 : 0;
            StandardizationStats total =
                opt.base_stats ? compose_stats(*opt.base_stats, fold_stats) : fold_stats;
            Vector truth = truth_to_standardized(opt.true_beta->row(row), total);
            fold.l2 = l2_distance(sel.beta, truth);
            SupportRates rates = fpr_fnr(sel.beta, truth, opt.fpr_mode);
            fold.fpr = rates.fpr;
            fold.fnr = rates.fnr;
        }

        report.per_fold.push_back(std::move(fold));
    }

    report.medians = aggregate_medians(report.per_fold);
    return report;
}

namespace {

using nlohmann::json;

json outcome_to_json(const FoldOutcome& f, const std::vector<std::string>& names,
                     const std::vector<int>& constrained) {
    json j;
    j["fold"] = f.fold_id;
    j["solved"] = f.solved;
    if (!f.solved) return j;
    auto put = [&j](const char* key, double v) {
        if (std::isfinite(v)) j[key] = v;
    };
    put("lambda", f.selected_lambda);
    put("overall_mse", f.overall_mse);
    put("nz_percent", f.nz);
    if (f.l2) j["l2_distance"] = *f.l2;
    if (f.fpr) j["fpr"] = *f.fpr;
    if (f.fnr) j["fnr"] = *f.fnr;
    j["train_constraints_ok"] = f.train_constraints_ok;
    j["test_constraints_ok"] = f.test_constraints_ok;
    put("solve_seconds", f.solve_seconds);
    json mse = json::object();
    for (Eigen::Index g = 0; g < f.group_mse.size(); ++g) {
        if (!std::isfinite(f.group_mse[g])) continue;
        const std::string name = g < static_cast<Eigen::Index>(names.size())
                                     ? names[static_cast<std::size_t>(g)]
                                     : "group" + std::to_string(g + 1);
        mse[name] = f.group_mse[g];
    }
    j["group_mse"] = mse;
    json th = json::object();
    for (std::size_t ci = 0; ci < constrained.size(); ++ci) {
        const double v = f.thresholds[static_cast<Eigen::Index>(ci)];
        if (!std::isfinite(v)) continue;
        const int g = constrained[ci];
        const std::string name = g < static_cast<int>(names.size())
                                     ? names[static_cast<std::size_t>(g)]
                                     : "group" + std::to_string(g + 1);
        th[name] = v;
    }
    j["thresholds"] = th;
    return j;
}

std::string csv_cell(double v) {
    if (!std::isfinite(v)) return "";
    std::ostringstream ss;
    ss.precision(12);
    ss << v;
    return ss.str();
}

}  // namespace

std::string eval_report_to_json(const EvalReport& report,
                                const std::vector<std::string>& group_names) {
    json j;
    if (report.gamma) j["gamma"] = *report.gamma;
    if (report.tau) j["tau"] = *report.tau;
    j["constrained_groups"] = report.constrained_groups;
    json folds = json::array();
    for (const auto& f : report.per_fold)
        folds.push_back(outcome_to_json(f, group_names, report.constrained_groups));
    j["folds"] = folds;
    j["medians"] = outcome_to_json(report.medians, group_names, report.constrained_groups);
    return j.dump(2) + "\n";
}

std::string eval_report_to_csv(const EvalReport& report,
                               const std::vector<std::string>& group_names) {
    const Eigen::Index L = report.per_fold.empty() ? 0 : report.per_fold.front().group_mse.size();
    auto name_of = [&](int g) {
        return g < static_cast<int>(group_names.size()) ? group_names[static_cast<std::size_t>(g)]
                                                        : "group" + std::to_string(g + 1);
    };
    std::ostringstream ss;
    ss << "fold,solved,lambda,overall_mse,nz_percent,l2_distance,fpr,fnr,train_constraints_ok,"
          "test_constraints_ok";
    for (int g : report.constrained_groups) ss << ",f_" << name_of(g);
    for (Eigen::Index g = 0; g < L; ++g) ss << ",mse_" << name_of(static_cast<int>(g));
    ss << "\n";

    auto emit = [&](const FoldOutcome& f, const std::string& label) {
        ss << label << "," << (f.solved ? 1 : 0);
        if (!f.solved) {
            for (std::size_t i = 0; i < 8 + report.constrained_groups.size() +
                                            static_cast<std::size_t>(L);
                 ++i)
                ss << ",";
            ss << "\n";
            return;
        }
        ss << "," << csv_cell(f.selected_lambda) << "," << csv_cell(f.overall_mse) << ","
           << csv_cell(f.nz) << "," << (f.l2 ? csv_cell(*f.l2) : "") << ","
           << (f.fpr ? csv_cell(*f.fpr) : "") << "," << (f.fnr ? csv_cell(*f.fnr) : "") << ","
           << (f.train_constraints_ok ? 1 : 0) << "," << (f.test_constraints_ok ? 1 : 0);
        for (Eigen::Index ci = 0; ci < f.thresholds.size(); ++ci)
            ss << "," << csv_cell(f.thresholds[ci]);
        for (Eigen::Index g = 0; g < f.group_mse.size(); ++g)
            ss << "," << csv_cell(f.group_mse[g]);
        ss << "\n";
    };

    for (const auto& f : report.per_fold) emit(f, std::to_string(f.fold_id));
    emit(report.medians, "median");
    return ss.str();
}

}  // namespace csclasso
