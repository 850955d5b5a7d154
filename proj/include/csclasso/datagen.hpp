#pragma once

#include "csclasso/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace csclasso {

/// Deterministic generator: identical streams across platforms and compilers
/// (the std distributions give no such guarantee).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();
    double uniform();                 // [0, 1)
    double normal();                  // standard normal, Box-Muller
    Eigen::Index uniform_index(Eigen::Index n);  // [0, n)

    /// Stable derivation of independent sub-streams (per fold, per cell).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt);

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

struct StandardizationStats {
    std::vector<std::string> col_names;  // length p (predictors only)
    Vector col_mean;                     // length p
    Vector col_stdev;                    // length p, sample stdev
    double y_mean = 0.0;
    double y_stdev = 1.0;
};

struct SyntheticConfig {
    int K = 20;           // groups; coefficient rule references k > 6, so K >= 7
    int n_k = 150;        // rows per group (the study tables use 150 and 300)
    int p = 20;
    double rho_base = 0.5;
    std::uint64_t seed = 0;
    int signal_size = 20;
};

struct SyntheticData {
    GroupedDataset data;       // standardized response and predictors
    Matrix true_beta;          // K x (p+1) generating coefficients, raw scale
    StandardizationStats stats;
    std::vector<Eigen::Index> signal_indexes;  // P0, 1-based over beta coords
};

/// Stratified generator: rows drawn from N(0, Sigma) with Sigma Toeplitz
/// rho^|i-j|; 20 signal coordinates split into two halves whose strengths
/// (1 vs 1+sqrt(K)) swap between the first six groups and the rest; unit
/// normal noise; response and predictors standardized afterward.
SyntheticData generate_synthetic(const SyntheticConfig& cfg);

/// Z-scores predictors and response with mean/sample-stdev computed on
/// stats_from rows only (empty = all rows); all rows are transformed.
std::pair<GroupedDataset, StandardizationStats> standardize(const GroupedDataset& data,
                                                            const IndexSet& stats_from = {});

/// Inverse transform (round-trip partner of standardize).
GroupedDataset inverse_standardize(const GroupedDataset& data, const StandardizationStats& stats);

/// Coefficients of the raw-scale model y = X b + e expressed in the
/// standardized space defined by stats.
Vector truth_to_standardized(const Vector& beta_raw, const StandardizationStats& stats);

/// Standardizing with `first` and then with `second` equals standardizing
/// once with the composed stats.
StandardizationStats compose_stats(const StandardizationStats& first,
                                   const StandardizationStats& second);

struct FoldSplit {
    int fold_id = 0;
    IndexSet train, valid, test;  // disjoint, cover all rows
};

/// Rows are dealt into `folds` blocks, stratified by the first group
/// containing each row; fold f tests on block f, validates on block f+1
/// (mod folds) and trains on the rest. Deterministic under seed.
std::vector<FoldSplit> kfold_split(const GroupedDataset& data, int folds, std::uint64_t seed,
                                   std::vector<std::string>* warnings = nullptr);

}  // namespace csclasso
