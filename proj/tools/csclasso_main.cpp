// csclasso command line: constrained sparse regression with per-group error
// budgets, threshold feasibility analysis, paths, heat maps and study
// harnesses. Batch-oriented; emits JSON/CSV artifacts plus a run manifest.

#include "csclasso/baseline.hpp"
#include "csclasso/datagen.hpp"
#include "csclasso/evaluation.hpp"
#include "csclasso/io.hpp"
#include "csclasso/path.hpp"
#include "csclasso/qcqp.hpp"
#include "csclasso/thresholds.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace csclasso;

namespace {

constexpr const char* kVersion = "csclasso 0.1.0";

enum ExitCode : int { kOk = 0, kInputError = 2, kInfeasible = 3, kNoConvergence = 4 };

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, double> timings;
    std::vector<std::string> outputs;
    std::string path;  // where the manifest itself lands

    void add_input(const std::string& p) {
        if (!p.empty()) inputs[p] = file_digest(p);
    }
    void write() const {
        json j;
        j["tool"] = kVersion;
        j["command"] = command;
        j["argv"] = argv;
        j["seed"] = seed;
        j["inputs"] = inputs;
        j["timings_seconds"] = timings;
        j["outputs"] = outputs;
        write_text_file(path, j.dump(2) + "\n");
    }
};

Manifest make_manifest(const std::string& command, int argc, char** argv,
                       const std::string& out_path) {
    Manifest m;
    m.command = command;
    for (int i = 0; i < argc; ++i) m.argv.push_back(argv[i]);
    fs::path out(out_path);
    if (fs::is_directory(out) || out.extension().empty()) {
        fs::create_directories(out);
        m.path = (out / "manifest.json").string();
    } else {
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        m.path = out.string() + ".manifest.json";
    }
    return m;
}

std::string manifest_ref(const Manifest& m) { return fs::path(m.path).filename().string(); }

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

// "lo:hi:count"
Vector parse_axis(const std::string& s) {
    std::vector<double> parts = parse_double_list([&] {
        std::string t = s;
        for (char& c : t)
            if (c == ':') c = ',';
        return t;
    }());
    if (parts.size() != 3 || parts[2] < 1.0)
        throw std::invalid_argument("axis must be lo:hi:count, got '" + s + "'");
    const int count = static_cast<int>(parts[2]);
    Vector axis(count);
    for (int i = 0; i < count; ++i)
        axis[i] = count == 1 ? parts[0]
                             : parts[0] + (parts[1] - parts[0]) * static_cast<double>(i) /
                                              static_cast<double>(count - 1);
    return axis;
}

json beta_to_json(const Vector& beta) {
    json arr = json::array();
    for (Eigen::Index j = 0; j < beta.size(); ++j) arr.push_back(beta[j]);
    return arr;
}

json fit_to_json(const FitResult& fit, const ProblemSpec& spec) {
    json j;
    j["beta"] = beta_to_json(fit.beta);
    j["objective"] = fit.objective;
    j["status"] = to_string(fit.status);
    j["iterations_outer"] = fit.iterations_outer;
    j["iterations_inner"] = fit.iterations_inner;
    json mse = json::array();
    for (Eigen::Index l = 0; l < fit.group_mse.size(); ++l) mse.push_back(fit.group_mse[l]);
    j["group_mse"] = mse;
    json eta = json::array();
    for (Eigen::Index l = 0; l < fit.multipliers.size(); ++l) eta.push_back(fit.multipliers[l]);
    j["multipliers"] = eta;
    json th = json::array();
    for (Eigen::Index l = 0; l < spec.thresholds.size(); ++l) th.push_back(spec.thresholds[l]);
    j["thresholds"] = th;
    j["lambda"] = spec.lambda;
    if (fit.multipliers.size() == spec.thresholds.size() && spec.data != nullptr) {
        KktResidual kkt = kkt_residual_csclasso(spec, fit.beta, fit.multipliers);
        j["kkt"] = {{"stationarity", kkt.stationarity},
                    {"feasibility", kkt.feasibility},
                    {"complementarity", kkt.complementarity}};
    }
    return j;
}

struct DataArgs {
    std::string data_path, target, groups_path;
    bool standardize_flag = false;

    GroupedDataset load(Manifest& m, CsvLoadReport* rep = nullptr) const {
        m.add_input(data_path);
        m.add_input(groups_path);
        GroupedDataset d = load_csv_dataset(data_path, target, groups_path, rep);
        if (standardize_flag) {
            auto [std_d, st] = standardize(d, {});
            return std_d;
        }
        return d;
    }
};

void add_data_flags(CLI::App* cmd, DataArgs& args, bool groups_required = false) {
    cmd->add_option("--data", args.data_path, "input CSV (header row, empty cell = missing)")
        ->required();
    cmd->add_option("--target", args.target, "response column name")->required();
    auto* g = cmd->add_option("--groups", args.groups_path,
                              "group spec JSON {\"groups\":[{\"name\",\"rows\":[...]}]}");
    if (groups_required) g->required();
    cmd->add_flag("--standardize", args.standardize_flag,
                  "z-score predictors and response before fitting");
}

void run_parallel(int jobs, int count, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, count);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(kVersion) +
                 " - sparse regression with per-group mean-squared-error budgets"};
    app.require_subcommand(1);

    // ------------------------------------------------------------- fit
    DataArgs fit_data;
    double fit_lambda = 0.0;
    double fit_gamma = -1.0, fit_tau = std::numeric_limits<double>::quiet_NaN();
    std::string fit_thresholds, fit_out = "fit.json";
    std::uint64_t fit_seed = 0;
    auto* fit_cmd = app.add_subcommand("fit", "solve one constrained fit");
    add_data_flags(fit_cmd, fit_data);
    fit_cmd->add_option("--lambda", fit_lambda, "L1 weight");
    fit_cmd->add_option("--gamma", fit_gamma, "improvement fraction over Lasso group MSEs");
    fit_cmd->add_option("--tau", fit_tau, "worsening allowance over OLS group MSEs");
    fit_cmd->add_option("--thresholds", fit_thresholds, "explicit comma-separated MSE bounds");
    fit_cmd->add_option("--out", fit_out, "output JSON path");
    fit_cmd->add_option("--seed", fit_seed, "rng seed recorded in the manifest");

    // ------------------------------------------------------- thresholds
    DataArgs th_data;
    double th_lambda = 0.0;
    std::string th_out = "thresholds.json";
    auto* th_cmd = app.add_subcommand("thresholds", "feasibility bounds tau_min/tau_max/gamma_max");
    add_data_flags(th_cmd, th_data, /*groups_required=*/true);
    th_cmd->add_option("--lambda", th_lambda, "lambda anchoring the Lasso baselines");
    th_cmd->add_option("--out", th_out, "output JSON path");

    // ------------------------------------------------------------- path
    DataArgs path_data;
    double path_lambda_anchor = 0.0, path_gamma = -1.0,
           path_tau = std::numeric_limits<double>::quiet_NaN(), path_epsilon = 0.0;
    std::string path_thresholds, path_out = "path.csv", path_scale = "doubling";
    int path_grid_count = 16;
    auto* path_cmd = app.add_subcommand("path", "dynamic lambda* search and solution path");
    add_data_flags(path_cmd, path_data);
    path_cmd->add_option("--lambda", path_lambda_anchor,
                         "lambda anchoring gamma-style thresholds (default 0 = OLS-like)");
    path_cmd->add_option("--gamma", path_gamma, "improvement fraction fixing the thresholds");
    path_cmd->add_option("--tau", path_tau, "worsening allowance fixing the thresholds");
    path_cmd->add_option("--thresholds", path_thresholds, "explicit MSE bounds");
    path_cmd->add_option("--epsilon", path_epsilon, "stabilization radius (0 = scale-aware)");
    path_cmd->add_option("--grid-count", path_grid_count, "grid size for linear scale");
    path_cmd->add_option("--scale", path_scale, "grid spacing: linear|doubling");
    path_cmd->add_option("--out", path_out, "output CSV path");

    // ---------------------------------------------------------- heatmap
    DataArgs heat_data;
    std::string heat_lambda_range, heat_tau_range, heat_out = "heatmap.csv";
    int heat_jobs = 1;
    auto* heat_cmd = app.add_subcommand("heatmap", "(lambda, tau) coefficient grid");
    add_data_flags(heat_cmd, heat_data, /*groups_required=*/true);
    heat_cmd->add_option("--lambda-range", heat_lambda_range, "lo:hi:count (default 0:lambda*:50)");
    heat_cmd->add_option("--tau-range", heat_tau_range,
                         "lo:hi:count (default tau_min:max tau_max+2:50)");
    heat_cmd->add_option("--jobs", heat_jobs, "parallel tau rows");
    heat_cmd->add_option("--out", heat_out, "output CSV path");

    // --------------------------------------------------------- simulate
    std::string sim_p = "20", sim_improvements = "3,5,7,10,15,20", sim_out = "simulation";
    int sim_K = 20, sim_nk = 150, sim_folds = 5, sim_jobs = 1, sim_grid_count = 0;
    std::uint64_t sim_seed = 1;
    auto* sim_cmd = app.add_subcommand("simulate", "stratified synthetic study");
    sim_cmd->add_option("--K", sim_K, "number of groups");
    sim_cmd->add_option("--n-k", sim_nk, "rows per group");
    sim_cmd->add_option("--p", sim_p, "predictor counts, comma separated");
    sim_cmd->add_option("--seed", sim_seed, "generator seed");
    sim_cmd->add_option("--improvements", sim_improvements,
                        "percent improvement levels over the Lasso");
    sim_cmd->add_option("--folds", sim_folds, "cross-validation folds");
    sim_cmd->add_option("--grid-count", sim_grid_count,
                        "override lambda grid size (0 = doubling ladder)");
    sim_cmd->add_option("--jobs", sim_jobs, "parallel improvement levels");
    sim_cmd->add_option("--out", sim_out, "output directory");

    // --------------------------------------------------------------- cv
    DataArgs cv_data;
    std::string cv_gammas = "5,7,10,15", cv_constrained, cv_out = "cv";
    int cv_folds = 5;
    std::uint64_t cv_seed = 1;
    int cv_jobs = 1;
    auto* cv_cmd = app.add_subcommand("cv", "cross-validated study on a real dataset");
    add_data_flags(cv_cmd, cv_data, /*groups_required=*/true);
    cv_cmd->add_option("--gamma", cv_gammas, "percent improvement levels");
    cv_cmd->add_option("--constrained", cv_constrained,
                       "comma-separated group indexes to constrain (default: first group)");
    cv_cmd->add_option("--folds", cv_folds, "folds");
    cv_cmd->add_option("--seed", cv_seed, "split seed");
    cv_cmd->add_option("--jobs", cv_jobs, "parallel levels");
    cv_cmd->add_option("--out", cv_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }

    try {
        // ----------------------------------------------------------- fit
        if (fit_cmd->parsed()) {
            Manifest m = make_manifest("fit", argc, argv, fit_out);
            const double t0 = now_s();
            GroupedDataset data = fit_data.load(m);

            ProblemSpec spec;
            spec.data = &data;
            spec.penalty = PenaltyMatrix::identity_no_intercept_for(data.p());
            spec.lambda = fit_lambda;

            json jreport;
            if (!fit_thresholds.empty()) {
                std::vector<double> th = parse_double_list(fit_thresholds);
                spec.thresholds = Eigen::Map<Vector>(th.data(), static_cast<Eigen::Index>(th.size()));
            } else if (fit_gamma >= 0.0) {
                ThresholdReport rep = thresholds_from_gamma(data, fit_lambda, fit_gamma);
                spec.thresholds = rep.thresholds;
                jreport["gamma"] = fit_gamma;
                jreport["gamma_max"] = rep.feasibility_bound;
                if (fit_gamma > rep.feasibility_bound) {
                    std::cerr << "infeasible: gamma = " << fit_gamma
                              << " exceeds gamma_max = " << rep.feasibility_bound << "\n";
                    return kInfeasible;
                }
            } else if (std::isfinite(fit_tau)) {
                ThresholdReport rep = thresholds_from_tau(data, fit_tau);
                spec.thresholds = rep.thresholds;
                jreport["tau"] = fit_tau;
                jreport["tau_min"] = rep.feasibility_bound;
                if (fit_tau < rep.feasibility_bound) {
                    std::cerr << "warning: tau = " << fit_tau << " is below tau_min = "
                              << rep.feasibility_bound << "; the solve may be infeasible\n";
                }
            } else {
                spec.thresholds = Vector::Zero(0);
                if (data.num_groups() > 0) {
                    // groups present but unconstrained: treat as plain Lasso
                    GroupedDataset* mutable_data = &data;
                    mutable_data->groups.clear();
                    mutable_data->group_names.clear();
                }
            }

            ValidationOutcome vo = validate_problem(spec);
            if (!vo.ok()) {
                for (const auto& v : vo.violations) std::cerr << "invalid input: " << v << "\n";
                return kInputError;
            }

            SolverConfig cfg;
            cfg.seed = fit_seed;
            FitResult fit = solve_csclasso(spec, cfg);
            m.timings["solve"] = now_s() - t0;

            if (fit.status == SolveStatus::infeasible) {
                double tau_min = 0.0, gamma_max = 0.0;
                try {
                    tau_min = compute_tau_min(data);
                    gamma_max = compute_gamma_max(data, fit_lambda);
                    std::cerr << "infeasible thresholds; tau_min = " << tau_min
                              << ", gamma_max(lambda) = " << gamma_max << "\n";
                } catch (const std::exception&) {
                    std::cerr << "infeasible thresholds\n";
                }
                return kInfeasible;
            }

            json j = fit_to_json(fit, spec);
            for (auto& [k, v] : jreport.items()) j[k] = v;
            j["manifest"] = manifest_ref(m);
            write_text_file(fit_out, j.dump(2) + "\n");
            m.outputs.push_back(fit_out);
            m.seed = fit_seed;
            m.write();

            std::cout << "status: " << to_string(fit.status) << "\n"
                      << "objective: " << fit.objective << "\n"
                      << "nonzero coefficients: " << nz_percent(fit.beta) << "%\n";
            for (Eigen::Index l = 0; l < fit.group_mse.size(); ++l)
                std::cout << "group " << (l + 1) << " mse: " << fit.group_mse[l]
                          << " (bound " << spec.thresholds[l] << ")\n";
            return fit.status == SolveStatus::converged ? kOk : kNoConvergence;
        }

        // ---------------------------------------------------- thresholds
        if (th_cmd->parsed()) {
            Manifest m = make_manifest("thresholds", argc, argv, th_out);
            const double t0 = now_s();
            GroupedDataset data = th_data.load(m);
            if (data.num_groups() == 0) {
                std::cerr << "thresholds: the group spec defines no groups\n";
                return kInputError;
            }
            const double tau_min = compute_tau_min(data);
            const double tau_max = compute_tau_max(data, th_lambda);
            const double gamma_max = compute_gamma_max(data, th_lambda);
            Vector ols_mse = baseline_mse_ols(data);
            Vector lasso_mse = baseline_mse_lasso(data, th_lambda);
            m.timings["analysis"] = now_s() - t0;

            json j;
            j["lambda"] = th_lambda;
            j["tau_min"] = tau_min;
            j["tau_max"] = tau_max;
            j["gamma_max"] = gamma_max;
            json a = json::array(), b = json::array();
            for (Eigen::Index l = 0; l < ols_mse.size(); ++l) {
                a.push_back(ols_mse[l]);
                b.push_back(lasso_mse[l]);
            }
            j["ols_group_mse"] = a;
            j["lasso_group_mse"] = b;
            j["manifest"] = manifest_ref(m);
            write_text_file(th_out, j.dump(2) + "\n");
            m.outputs.push_back(th_out);
            m.write();
            std::cout << "tau_min = " << tau_min << ", tau_max(lambda) = " << tau_max
                      << ", gamma_max = " << gamma_max << "\n";
            return kOk;
        }

        // ----------------------------------------------------------- path
        if (path_cmd->parsed()) {
            Manifest m = make_manifest("path", argc, argv, path_out);
            const double t0 = now_s();
            GroupedDataset data = path_data.load(m);

            ProblemSpec spec;
            spec.data = &data;
            spec.penalty = PenaltyMatrix::identity_no_intercept_for(data.p());
            if (!path_thresholds.empty()) {
                std::vector<double> th = parse_double_list(path_thresholds);
                spec.thresholds = Eigen::Map<Vector>(th.data(), static_cast<Eigen::Index>(th.size()));
            } else if (path_gamma >= 0.0) {
                spec.thresholds = thresholds_from_gamma(data, path_lambda_anchor, path_gamma).thresholds;
            } else if (std::isfinite(path_tau)) {
                spec.thresholds = thresholds_from_tau(data, path_tau).thresholds;
            } else {
                data.groups.clear();
                data.group_names.clear();
                spec.thresholds = Vector::Zero(0);
            }

            LambdaStarResult star = find_lambda_star_dynamic(spec, path_epsilon);
            if (star.budget_exceeded) {
                std::cerr << "path: no stabilization within the doubling budget\n";
                return kNoConvergence;
            }
            std::vector<double> grid =
                build_lambda_grid(star.lambda_star, path_grid_count,
                                  path_scale == "linear" ? GridScale::linear : GridScale::doubling);
            PathResult path = solve_path(spec, grid);
            m.timings["path"] = now_s() - t0;

            std::ostringstream csv;
            csv << "# manifest: " << manifest_ref(m) << "\n";
            csv << "lambda";
            for (Eigen::Index j = 0; j < data.X.cols(); ++j) csv << ",beta_" << j;
            csv << ",objective,status\n";
            csv.precision(12);
            for (std::size_t i = 0; i < path.lambdas.size(); ++i) {
                csv << path.lambdas[i];
                for (Eigen::Index j = 0; j < path.betas.cols(); ++j)
                    csv << "," << path.betas(static_cast<Eigen::Index>(i), j);
                csv << "," << path.objectives[static_cast<Eigen::Index>(i)] << ","
                    << to_string(path.statuses[i]) << "\n";
            }
            write_text_file(path_out, csv.str());
            m.outputs.push_back(path_out);
            m.write();
            std::cout << "lambda* = " << star.lambda_star << " after " << star.visited.size()
                      << " solves; grid size " << grid.size() << "\n";
            return kOk;
        }

        // -------------------------------------------------------- heatmap
        if (heat_cmd->parsed()) {
            Manifest m = make_manifest("heatmap", argc, argv, heat_out);
            const double t0 = now_s();
            GroupedDataset data = heat_data.load(m);
            if (data.num_groups() == 0) {
                std::cerr << "heatmap: the group spec defines no groups\n";
                return kInputError;
            }

            Vector tau_axis, lambda_axis;
            if (!heat_tau_range.empty()) {
                tau_axis = parse_axis(heat_tau_range);
            } else {
                const double tau_min = compute_tau_min(data);
                const double star = lasso_lambda_star(data);
                double tau_max = 0.0;
                for (int i = 0; i <= 8; ++i)
                    tau_max = std::max(tau_max,
                                       compute_tau_max(data, star * static_cast<double>(i) / 8.0));
                std::ostringstream def;
                def << tau_min << ":" << (tau_max + 2.0) << ":50";
                tau_axis = parse_axis(def.str());
            }
            if (!heat_lambda_range.empty()) {
                lambda_axis = parse_axis(heat_lambda_range);
            } else {
                ProblemSpec probe;
                probe.data = &data;
                probe.penalty = PenaltyMatrix::identity_no_intercept_for(data.p());
                probe.thresholds = thresholds_from_tau(data, tau_axis[0] + 1e-3).thresholds;
                LambdaStarResult star = find_lambda_star_dynamic(probe);
                std::ostringstream def;
                def << 0.0 << ":" << star.lambda_star << ":50";
                lambda_axis = parse_axis(def.str());
            }

            HeatmapGrid grid = heatmap_grid(data, lambda_axis, tau_axis, SolverConfig{},
                                            BaselineMode::global_ols, heat_jobs);
            m.timings["grid"] = now_s() - t0;

            std::ostringstream csv;
            csv << "# manifest: " << manifest_ref(m) << "\n";
            csv << "lambda,tau,coef_index,value,feasible\n";
            csv.precision(12);
            for (Eigen::Index ti = 0; ti < grid.tau_axis.size(); ++ti) {
                for (Eigen::Index li = 0; li < grid.lambda_axis.size(); ++li) {
                    const bool ok = !grid.infeasible(ti, li);
                    for (Eigen::Index j = 0; j < grid.beta_rows[static_cast<std::size_t>(ti)].cols(); ++j) {
                        csv << grid.lambda_axis[li] << "," << grid.tau_axis[ti] << "," << j << ",";
                        if (ok) csv << grid.beta_rows[static_cast<std::size_t>(ti)](li, j);
                        csv << "," << (ok ? 1 : 0) << "\n";
                    }
                }
            }
            write_text_file(heat_out, csv.str());
            m.outputs.push_back(heat_out);
            m.write();
            std::cout << "heatmap: " << grid.tau_axis.size() << " x " << grid.lambda_axis.size()
                      << " cells\n";
            return kOk;
        }

        // ------------------------------------------------------- simulate
        if (sim_cmd->parsed()) {
            Manifest m = make_manifest("simulate", argc, argv, sim_out);
            fs::create_directories(sim_out);
            std::vector<int> p_list = parse_int_list(sim_p);
            std::vector<double> levels = parse_double_list(sim_improvements);

            std::ostringstream groups_csv, overall_csv, timing_csv;
            groups_csv << "# manifest: " << manifest_ref(m) << "\n";
            overall_csv << "# manifest: " << manifest_ref(m) << "\n";
            timing_csv << "# manifest: " << manifest_ref(m) << "\n";
            groups_csv << "p,n_k,level_percent";
            for (int g = 1; g <= 6; ++g) groups_csv << ",f_group" << g;
            for (int g = 1; g <= 6; ++g) groups_csv << ",mse_group" << g;
            groups_csv << "\n";
            overall_csv << "p,n_k,level_percent,overall_mse,l2_distance,fpr,fnr,nz_percent\n";
            timing_csv << "p,n_k,level_percent,median_solve_seconds\n";

            auto emit_rows = [&](int p, double level_pct, const EvalReport& rep) {
                auto cell = [](double v) {
                    if (!std::isfinite(v)) return std::string();
                    std::ostringstream ss;
                    ss.precision(10);
                    ss << v;
                    return ss.str();
                };
                const FoldOutcome& med = rep.medians;
                groups_csv << p << "," << sim_nk << "," << cell(level_pct);
                for (int g = 0; g < 6; ++g) {
                    groups_csv << ",";
                    if (med.solved && level_pct > 0.0 && g < med.thresholds.size())
                        groups_csv << cell(med.thresholds[g]);
                }
                for (int g = 0; g < 6; ++g) {
                    groups_csv << ",";
                    if (med.solved && g < med.group_mse.size()) groups_csv << cell(med.group_mse[g]);
                }
                groups_csv << "\n";
                overall_csv << p << "," << sim_nk << "," << cell(level_pct) << ","
                            << (med.solved ? cell(med.overall_mse) : "") << ","
                            << (med.solved && med.l2 ? cell(*med.l2) : "") << ","
                            << (med.solved && med.fpr ? cell(*med.fpr) : "") << ","
                            << (med.solved && med.fnr ? cell(*med.fnr) : "") << ","
                            << (med.solved ? cell(med.nz) : "") << "\n";
                timing_csv << p << "," << sim_nk << "," << cell(level_pct) << ","
                           << (med.solved ? cell(med.solve_seconds) : "") << "\n";
            };

            const double t0 = now_s();
            for (int p : p_list) {
                SyntheticConfig gen;
                gen.K = sim_K;
                gen.n_k = sim_nk;
                gen.p = p;
                gen.seed = sim_seed;
                gen.signal_size = std::min(20, p);
                SyntheticData syn = generate_synthetic(gen);

                CrossValidateOptions base;
                base.folds = sim_folds;
                base.seed = Rng::derive(sim_seed, static_cast<std::uint64_t>(p));
                base.true_beta = &syn.true_beta;
                base.base_stats = &syn.stats;
                if (sim_grid_count > 0) {
                    std::vector<double> grid = build_lambda_grid(
                        lasso_lambda_star(syn.data), sim_grid_count, GridScale::linear);
                    base.lambdas = grid;
                }
                base.constrained_groups = {0, 1, 2, 3, 4, 5};

                // Lasso reference row
                CrossValidateOptions lasso_opt = base;
                lasso_opt.constrained_groups.clear();
                EvalReport lasso_rep = cross_validate(syn.data, lasso_opt);
                emit_rows(p, 0.0, lasso_rep);
                write_text_file(sim_out + "/folds_p" + std::to_string(p) + "_lasso.csv",
                                "# manifest: " + manifest_ref(m) + "\n" +
                                    eval_report_to_csv(lasso_rep, syn.data.group_names));

                std::vector<EvalReport> reports(levels.size());
                run_parallel(sim_jobs, static_cast<int>(levels.size()), [&](int i) {
                    CrossValidateOptions o = base;
                    o.gamma = levels[static_cast<std::size_t>(i)] / 100.0;
                    reports[static_cast<std::size_t>(i)] = cross_validate(syn.data, o);
                });
                for (std::size_t i = 0; i < levels.size(); ++i) {
                    emit_rows(p, levels[i], reports[i]);
                    std::ostringstream fname;
                    fname << sim_out << "/folds_p" << p << "_improv" << levels[i] << ".csv";
                    write_text_file(fname.str(), "# manifest: " + manifest_ref(m) + "\n" +
                                                     eval_report_to_csv(reports[i],
                                                                        syn.data.group_names));
                }
            }
            m.timings["study"] = now_s() - t0;

            write_text_file(sim_out + "/table_groups.csv", groups_csv.str());
            write_text_file(sim_out + "/table_overall.csv", overall_csv.str());
            write_text_file(sim_out + "/timings.csv", timing_csv.str());
            m.outputs = {sim_out + "/table_groups.csv", sim_out + "/table_overall.csv",
                         sim_out + "/timings.csv"};
            m.seed = sim_seed;
            m.write();
            std::cout << "simulation tables written to " << sim_out << "\n";
            return kOk;
        }

        // ------------------------------------------------------------- cv
        if (cv_cmd->parsed()) {
            Manifest m = make_manifest("cv", argc, argv, cv_out);
            fs::create_directories(cv_out);
            GroupedDataset data = cv_data.load(m);
            if (data.num_groups() == 0) {
                std::cerr << "cv: the group spec defines no groups\n";
                return kInputError;
            }
            std::vector<double> levels = parse_double_list(cv_gammas);
            std::vector<int> constrained =
                cv_constrained.empty() ? std::vector<int>{0} : parse_int_list(cv_constrained);

            std::ostringstream table;
            table << "# manifest: " << manifest_ref(m) << "\n";
            table << "level_percent";
            for (int g : constrained) table << ",f_group" << (g + 1);
            table << ",overall_mse";
            for (Eigen::Index g = 0; g < data.num_groups(); ++g) table << ",mse_group" << (g + 1);
            table << ",nz_percent\n";

            auto cell = [](double v) {
                if (!std::isfinite(v)) return std::string();
                std::ostringstream ss;
                ss.precision(10);
                ss << v;
                return ss.str();
            };
            auto emit = [&](double level, const EvalReport& rep) {
                const FoldOutcome& med = rep.medians;
                table << cell(level);
                for (std::size_t i = 0; i < constrained.size(); ++i) {
                    table << ",";
                    if (med.solved && level > 0.0 &&
                        static_cast<Eigen::Index>(i) < med.thresholds.size())
                        table << cell(med.thresholds[static_cast<Eigen::Index>(i)]);
                }
                table << "," << (med.solved ? cell(med.overall_mse) : "");
                for (Eigen::Index g = 0; g < data.num_groups(); ++g) {
                    table << ",";
                    if (med.solved && g < med.group_mse.size()) table << cell(med.group_mse[g]);
                }
                table << "," << (med.solved ? cell(med.nz) : "") << "\n";
            };

            const double t0 = now_s();
            CrossValidateOptions base;
            base.folds = cv_folds;
            base.seed = cv_seed;

            CrossValidateOptions lasso_opt = base;
            EvalReport lasso_rep = cross_validate(data, lasso_opt);
            emit(0.0, lasso_rep);
            write_text_file(cv_out + "/folds_lasso.csv",
                            "# manifest: " + manifest_ref(m) + "\n" +
                                eval_report_to_csv(lasso_rep, data.group_names));

            std::vector<EvalReport> reports(levels.size());
            run_parallel(cv_jobs, static_cast<int>(levels.size()), [&](int i) {
                CrossValidateOptions o = base;
                o.gamma = levels[static_cast<std::size_t>(i)] / 100.0;
                o.constrained_groups = constrained;
                reports[static_cast<std::size_t>(i)] = cross_validate(data, o);
            });
            for (std::size_t i = 0; i < levels.size(); ++i) {
                emit(levels[i], reports[i]);
                std::ostringstream fname;
                fname << cv_out << "/folds_improv" << levels[i] << ".csv";
                write_text_file(fname.str(), "# manifest: " + manifest_ref(m) + "\n" +
                                                 eval_report_to_csv(reports[i], data.group_names));
            }
            m.timings["study"] = now_s() - t0;
            write_text_file(cv_out + "/table.csv", table.str());
            m.outputs = {cv_out + "/table.csv"};
            m.seed = cv_seed;
            m.write();
            std::cout << "cv table written to " << cv_out << "\n";
            return kOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const UnknownTargetError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const EmptyGroupError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const DegenerateBaselineError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNoConvergence;
    }
    return kOk;
}
