#pragma once

// Shared fixtures for the unit suites.

#include "csclasso/datagen.hpp"
#include "csclasso/types.hpp"

#include <cmath>

namespace testutil {

using csclasso::GroupedDataset;
using csclasso::IndexSet;
using csclasso::Matrix;
using csclasso::Rng;
using csclasso::Vector;

/// Dense random regression instance with an intercept column and L contiguous
/// row groups. beta_true has entries in [-2, 2] with the first `sparsity`
/// predictors active (all when sparsity < 0).
inline GroupedDataset random_dataset(int n, int p, std::uint64_t seed, int L = 0,
                                     double noise = 0.5, int sparsity = -1) {
    Rng rng(seed);
    GroupedDataset d;
    d.X.resize(n, p + 1);
    d.X.col(0).setOnes();
    for (int i = 0; i < n; ++i)
        for (int j = 1; j <= p; ++j) d.X(i, j) = rng.normal();
    Vector beta = Vector::Zero(p + 1);
    beta[0] = rng.normal();
    const int active = sparsity < 0 ? p : std::min(sparsity, p);
    for (int j = 1; j <= active; ++j) beta[j] = 4.0 * rng.uniform() - 2.0;
    d.y.resize(n);
    for (int i = 0; i < n; ++i) d.y[i] = d.X.row(i).dot(beta) + noise * rng.normal();
    for (int l = 0; l < L; ++l) {
        IndexSet g;
        const int lo = l * n / L;
        const int hi = (l + 1) * n / L;
        for (int r = lo; r < hi; ++r) g.push_back(r);
        d.groups.push_back(std::move(g));
    }
    return d;
}

inline IndexSet all_rows(const GroupedDataset& d) {
    IndexSet out;
    for (Eigen::Index r = 0; r < d.n(); ++r) out.push_back(r);
    return out;
}

}  // namespace testutil
