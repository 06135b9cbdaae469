#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>

#include "divrec/kernel.hpp"
#include "divrec/rng.hpp"

namespace divrec {

/// Elementary symmetric polynomials e[n][j] of the first n eigenvalues up
/// to degree j <= k, via the recurrence
///   e[n][j] = e[n-1][j] + lambda_n * e[n-1][j-1],  e[n][0] = 1.
/// The table is built over lambda / mean(lambda) with the scale kept aside,
/// so degree-60 products of wide spectra stay inside double range. Phase-1
/// sampling uses only scale-free ratios of adjacent entries.
class ElemSymTable {
public:
    ElemSymTable(const Eigen::VectorXd& lambda, int k);

    int count() const { return r_; }
    int degree() const { return k_; }
    double scale() const { return scale_; }
    const Eigen::VectorXd& scaled_lambda() const { return scaled_lambda_; }

    /// Table entry over the scaled eigenvalues.
    double scaled(int n, int j) const { return e_(n, j); }
    /// Unscaled e_j(lambda_1..lambda_n) = scaled(n, j) * scale^j.
    double value(int n, int j) const;

private:
    Eigen::MatrixXd e_;  // (r+1) x (k+1)
    Eigen::VectorXd scaled_lambda_;
    double scale_ = 1.0;
    int r_ = 0;
    int k_ = 0;
};

struct SampleConfig {
    int k = 60;
    std::uint64_t seed = 0;
    double tol = kRankTol;
};

/// Validates lambda >= 0 and builds the table.
ElemSymTable elementary_symmetric(const Eigen::VectorXd& lambda, int k);

/// Phase 1 of exact k-DPP sampling: draws an index subset T of size k with
/// probability proportional to prod_{n in T} lambda_n. Returns ascending
/// 0-based indices into lambda. Throws RankError when k exceeds the number
/// of positive eigenvalues.
std::vector<int> sample_eigen_subset(const Eigen::VectorXd& lambda, int k, Rng& rng);

/// Phase 2: samples exactly k items from the projection DPP with kernel
/// U U^T, where U has k orthonormal columns. Each round picks item i with
/// probability ||row_i||^2 / (columns left), then contracts the basis
/// against coordinate i: the column with the largest entry at i is
/// eliminated and the remainder re-orthonormalized by modified
/// Gram-Schmidt. Returns ascending item indices.
std::vector<int> sample_projection_dpp(const Eigen::MatrixXd& u, Rng& rng);

/// Decomposes once, samples many times. Construction throws RankError when
/// config.k exceeds the kernel rank.
class KDppSampler {
public:
    KDppSampler(const KernelFactor& factor, const SampleConfig& config);

    /// Draws S with probability det(L(S,S)) / sum_{|T|=k} det(L(T,T)).
    std::vector<int> sample(Rng& rng) const;

    Eigen::Index rank() const { return system_.dual.rank(); }
    const DualEigensystem& system() const { return system_; }

private:
    DualEigensystem system_;
    int k_;
};

/// One-shot k-DPP sample (decompose + draw) using the provided stream.
std::vector<int> sample_k_dpp(const KernelFactor& factor, const SampleConfig& config,
                              Rng& rng);
/// Convenience overload seeding a fresh stream from config.seed.
std::vector<int> sample_k_dpp(const KernelFactor& factor, const SampleConfig& config);

/// Deterministic greedy max-determinant baseline: step t adds the item with
/// the largest squared residual against the span of the selected rows, ties
/// broken by the smallest index. Returns items in selection order.
std::vector<int> greedy_map_select(const KernelFactor& factor, int k);

/// Exact k-DPP distribution by enumeration, as a correctness oracle.
/// Limited to N <= 20 rows.
std::map<std::vector<int>, double> brute_force_k_dpp(const Eigen::MatrixXd& l, int k);

}  // namespace divrec
