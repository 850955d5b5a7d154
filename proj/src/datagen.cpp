#include "csclasso/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace csclasso {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

Eigen::Index Rng::uniform_index(Eigen::Index n) {
    // modulo bias is negligible for n << 2^64 and keeps the stream simple
    return static_cast<Eigen::Index>(next_u64() % static_cast<std::uint64_t>(n));
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL + (salt << 6) + (salt >> 2));
    splitmix64(s);
    return s;
}

SyntheticData generate_synthetic(const SyntheticConfig& cfg) {
    if (cfg.K < 7) throw std::invalid_argument("generate_synthetic: K must be >= 7");
    if (cfg.n_k < 1) throw std::invalid_argument("generate_synthetic: n_k must be >= 1");
    if (cfg.p < 1) throw std::invalid_argument("generate_synthetic: p must be >= 1");
    if (cfg.p >= 20 && cfg.p < cfg.signal_size)
        throw std::invalid_argument("generate_synthetic: p must be >= signal_size");
    if (!(cfg.rho_base > -1.0 && cfg.rho_base < 1.0))
        throw std::invalid_argument("generate_synthetic: rho_base must lie in (-1, 1)");

    const Eigen::Index K = cfg.K;
    const Eigen::Index nk = cfg.n_k;
    const Eigen::Index p = cfg.p;
    const Eigen::Index n = K * nk;

    Matrix sigma(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            sigma(i, j) = std::pow(cfg.rho_base, std::abs(static_cast<double>(i - j)));
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("generate_synthetic: covariance factorization failed");
    Matrix chol = llt.matrixL();

    Rng rng(Rng::derive(cfg.seed, 0x5eedULL));

    Matrix X(n, p + 1);
    X.col(0).setOnes();
    Vector z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
        X.row(i).tail(p) = (chol * z).transpose();
    }

    // P0: signal coordinates, sampled without replacement
    const Eigen::Index s = std::min<Eigen::Index>(cfg.signal_size, p);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
    std::iota(perm.begin(), perm.end(), Eigen::Index{1});  // beta coords 1..p
    for (Eigen::Index i = p - 1; i > 0; --i)
        std::swap(perm[static_cast<std::size_t>(i)],
                  perm[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
    std::vector<Eigen::Index> p0(perm.begin(), perm.begin() + s);

    // random half of P0 carries the strong coefficient for groups k <= 6
    std::vector<Eigen::Index> half = p0;
    for (Eigen::Index i = s - 1; i > 0; --i)
        std::swap(half[static_cast<std::size_t>(i)],
                  half[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
    const Eigen::Index half_a = s / 2 + (s % 2);
    std::vector<bool> in_a(static_cast<std::size_t>(p + 1), false);
    for (Eigen::Index i = 0; i < half_a; ++i) in_a[static_cast<std::size_t>(half[static_cast<std::size_t>(i)])] = true;

    const double strong = 1.0 + std::sqrt(static_cast<double>(K));
    Matrix true_beta = Matrix::Zero(K, p + 1);
    for (Eigen::Index k = 0; k < K; ++k) {
        const bool first_family = k < 6;  // groups 1..6 of the study
        for (Eigen::Index j : p0) {
            const bool strong_here = first_family == in_a[static_cast<std::size_t>(j)];
            true_beta(k, j) = strong_here ? strong : 1.0;
        }
    }

    Vector y(n);
    std::vector<IndexSet> groups(static_cast<std::size_t>(K));
    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index r = k * nk; r < (k + 1) * nk; ++r) {
            y[r] = X.row(r).dot(true_beta.row(k)) + rng.normal();
            groups[static_cast<std::size_t>(k)].push_back(r);
        }
    }

    GroupedDataset raw;
    raw.X = std::move(X);
    raw.y = std::move(y);
    raw.groups = std::move(groups);
    for (Eigen::Index k = 0; k < K; ++k)
        raw.group_names.push_back("group" + std::to_string(k + 1));

    auto [stdized, stats] = standardize(raw, {});

    SyntheticData out;
    out.data = std::move(stdized);
    out.true_beta = std::move(true_beta);
    out.stats = std::move(stats);
    out.signal_indexes = std::move(p0);
    return out;
}

std::pair<GroupedDataset, StandardizationStats> standardize(const GroupedDataset& data,
                                                            const IndexSet& stats_from) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    IndexSet all;
    const IndexSet* rows = &stats_from;
    if (stats_from.empty()) {
        all.resize(static_cast<std::size_t>(n));
        std::iota(all.begin(), all.end(), Eigen::Index{0});
        rows = &all;
    }
    const double m = static_cast<double>(rows->size());
    if (m < 2) throw std::invalid_argument("standardize: need at least two stats rows");

    StandardizationStats st;
    st.col_mean.resize(p);
    st.col_stdev.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        double mean = 0.0;
        for (Eigen::Index r : *rows) mean += data.X(r, j + 1);
        mean /= m;
        double ss = 0.0;
        for (Eigen::Index r : *rows) {
            const double d = data.X(r, j + 1) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / (m - 1.0));
        if (sd <= 1e-12)
            throw std::invalid_argument("standardize: constant column " + std::to_string(j + 1));
        st.col_mean[j] = mean;
        st.col_stdev[j] = sd;
    }
    {
        double mean = 0.0;
        for (Eigen::Index r : *rows) mean += data.y[r];
        mean /= m;
        double ss = 0.0;
        for (Eigen::Index r : *rows) {
            const double d = data.y[r] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / (m - 1.0));
        if (sd <= 1e-12) throw std::invalid_argument("standardize: constant response");
        st.y_mean = mean;
        st.y_stdev = sd;
    }

    GroupedDataset out = data;
    for (Eigen::Index j = 0; j < p; ++j)
        out.X.col(j + 1) = (out.X.col(j + 1).array() - st.col_mean[j]) / st.col_stdev[j];
    out.y = (out.y.array() - st.y_mean) / st.y_stdev;
    return {std::move(out), std::move(st)};
}

GroupedDataset inverse_standardize(const GroupedDataset& data, const StandardizationStats& st) {
    GroupedDataset out = data;
    for (Eigen::Index j = 0; j < data.p(); ++j)
        out.X.col(j + 1) = data.X.col(j + 1).array() * st.col_stdev[j] + st.col_mean[j];
    out.y = data.y.array() * st.y_stdev + st.y_mean;
    return out;
}

Vector truth_to_standardized(const Vector& beta_raw, const StandardizationStats& st) {
    const Eigen::Index p = st.col_mean.size();
    if (beta_raw.size() != p + 1)
        throw std::invalid_argument("truth_to_standardized: length mismatch");
    Vector out(p + 1);
    double shift = beta_raw[0] - st.y_mean;
    for (Eigen::Index j = 0; j < p; ++j) {
        out[j + 1] = beta_raw[j + 1] * st.col_stdev[j] / st.y_stdev;
        shift += beta_raw[j + 1] * st.col_mean[j];
    }
    out[0] = shift / st.y_stdev;
    return out;
}

StandardizationStats compose_stats(const StandardizationStats& first,
                                   const StandardizationStats& second) {
    if (first.col_mean.size() != second.col_mean.size())
        throw std::invalid_argument("compose_stats: dimension mismatch");
    StandardizationStats out = first;
    for (Eigen::Index j = 0; j < out.col_mean.size(); ++j) {
        out.col_mean[j] = first.col_mean[j] + second.col_mean[j] * first.col_stdev[j];
        out.col_stdev[j] = first.col_stdev[j] * second.col_stdev[j];
    }
    out.y_mean = first.y_mean + second.y_mean * first.y_stdev;
    out.y_stdev = first.y_stdev * second.y_stdev;
    return out;
}

std::vector<FoldSplit> kfold_split(const GroupedDataset& data, int folds, std::uint64_t seed,
                                   std::vector<std::string>* warnings) {
    if (folds < 3) throw std::invalid_argument("kfold_split: folds must be >= 3");
    const Eigen::Index n = data.n();
    if (n < folds) throw std::invalid_argument("kfold_split: fewer rows than folds");

    // stratum = first group containing the row; ungrouped rows share one
    std::vector<int> stratum(static_cast<std::size_t>(n), -1);
    for (std::size_t g = 0; g < data.groups.size(); ++g)
        for (Eigen::Index r : data.groups[g])
            if (stratum[static_cast<std::size_t>(r)] < 0)
                stratum[static_cast<std::size_t>(r)] = static_cast<int>(g);

    const int num_strata = static_cast<int>(data.groups.size()) + 1;
    std::vector<IndexSet> by_stratum(static_cast<std::size_t>(num_strata));
    for (Eigen::Index r = 0; r < n; ++r) {
        const int sidx = stratum[static_cast<std::size_t>(r)];
        by_stratum[static_cast<std::size_t>(sidx < 0 ? num_strata - 1 : sidx)].push_back(r);
    }

    Rng rng(Rng::derive(seed, 0xf01dULL));
    std::vector<IndexSet> blocks(static_cast<std::size_t>(folds));
    int deal = 0;
    for (auto& rows : by_stratum) {
        for (Eigen::Index i = static_cast<Eigen::Index>(rows.size()) - 1; i > 0; --i)
            std::swap(rows[static_cast<std::size_t>(i)],
                      rows[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
        for (Eigen::Index r : rows) {
            blocks[static_cast<std::size_t>(deal % folds)].push_back(r);
            ++deal;
        }
    }

    std::vector<FoldSplit> out;
    for (int f = 0; f < folds; ++f) {
        FoldSplit fs;
        fs.fold_id = f;
        fs.test = blocks[static_cast<std::size_t>(f)];
        fs.valid = blocks[static_cast<std::size_t>((f + 1) % folds)];
        for (int b = 0; b < folds; ++b) {
            if (b == f || b == (f + 1) % folds) continue;
            fs.train.insert(fs.train.end(), blocks[static_cast<std::size_t>(b)].begin(),
                            blocks[static_cast<std::size_t>(b)].end());
        }
        std::sort(fs.train.begin(), fs.train.end());
        std::sort(fs.valid.begin(), fs.valid.end());
        std::sort(fs.test.begin(), fs.test.end());
        out.push_back(std::move(fs));
    }

    if (warnings) {
        for (std::size_t g = 0; g < data.groups.size(); ++g) {
            if (data.groups[g].size() < static_cast<std::size_t>(folds)) {
                warnings->push_back("group " + std::to_string(g) +
                                    " is too small to appear in every train/valid/test split");
            }
        }
    }
    return out;
}

}  // namespace csclasso
