#include "divrec/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/LU>

#include "divrec/errors.hpp"

namespace divrec {
namespace {

// Modified Gram-Schmidt over the leading m columns, in place.
void orthonormalize_columns(Eigen::MatrixXd& v, Eigen::Index m, double tol) {
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < a; ++b) {
            v.col(a) -= v.col(b).dot(v.col(a)) * v.col(b);
        }
        const double norm = v.col(a).norm();
        if (norm < tol) {
            throw DegeneracyError(
                "projection basis lost rank during re-orthonormalization (column norm " +
                std::to_string(norm) + ")");
        }
        v.col(a) /= norm;
    }
}

}  // namespace

ElemSymTable::ElemSymTable(const Eigen::VectorXd& lambda, int k) {
    if (k < 0) {
        throw ConfigError("elementary symmetric degree must be non-negative, got " +
                          std::to_string(k));
    }
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (!(lambda[i] >= 0.0)) {
            throw ConfigError("eigenvalue " + std::to_string(i) +
                              " is negative or NaN: " + std::to_string(lambda[i]));
        }
    }
    r_ = static_cast<int>(lambda.size());
    k_ = k;
    scale_ = r_ > 0 ? lambda.mean() : 1.0;
    if (!(scale_ > 0.0)) scale_ = 1.0;
    scaled_lambda_ = lambda / scale_;

    e_ = Eigen::MatrixXd::Zero(r_ + 1, k_ + 1);
    e_.col(0).setOnes();
    for (int n = 1; n <= r_; ++n) {
        const double ln = scaled_lambda_[n - 1];
        for (int j = 1; j <= k_; ++j) {
            e_(n, j) = e_(n - 1, j) + ln * e_(n - 1, j - 1);
        }
    }
}

double ElemSymTable::value(int n, int j) const {
    return e_(n, j) * std::pow(scale_, j);
}

ElemSymTable elementary_symmetric(const Eigen::VectorXd& lambda, int k) {
    return ElemSymTable(lambda, k);
}

std::vector<int> sample_eigen_subset(const Eigen::VectorXd& lambda, int k, Rng& rng) {
    if (k < 0) throw ConfigError("subset size must be non-negative, got " + std::to_string(k));
    if (k == 0) return {};
    const int positive =
        static_cast<int>((lambda.array() > 0.0).count());
    if (k > positive) {
        throw RankError("cannot select " + std::to_string(k) + " eigenvalues: only " +
                        std::to_string(positive) + " are positive");
    }

    const ElemSymTable table(lambda, k);
    const Eigen::VectorXd& scaled = table.scaled_lambda();
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    int remaining = k;
    for (int n = table.count(); n >= 1 && remaining > 0; --n) {
        double p;
        if (remaining == n) {
            p = 1.0;  // every remaining eigenvalue is forced
        } else {
            const double denom = table.scaled(n, remaining);
            if (!(denom > 0.0)) continue;
            p = scaled[n - 1] * table.scaled(n - 1, remaining - 1) / denom;
        }
        if (rng.uniform01() < p) {
            chosen.push_back(n - 1);
            --remaining;
        }
    }
    if (remaining != 0) {
        throw DegeneracyError("eigenvalue-phase sampling left " + std::to_string(remaining) +
                              " slots unfilled");
    }
    std::reverse(chosen.begin(), chosen.end());
    return chosen;
}

std::vector<int> sample_projection_dpp(const Eigen::MatrixXd& u, Rng& rng) {
    const Eigen::Index n = u.rows();
    const Eigen::Index k = u.cols();
    if (k == 0) return {};
    if (k > n) {
        throw RankError("projection basis has " + std::to_string(k) + " columns but only " +
                        std::to_string(n) + " rows");
    }
    const double ortho_dev =
        (u.transpose() * u - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
    if (ortho_dev > 1e-8) {
        throw ConfigError("projection basis columns are not orthonormal (max deviation " +
                          std::to_string(ortho_dev) + ")");
    }
    constexpr double kPivotTol = 1e-10;

    Eigen::MatrixXd v = u;
    Eigen::Index m = k;
    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(k));
    while (m > 0) {
        const Eigen::VectorXd row_mass = v.leftCols(m).rowwise().squaredNorm();
        const double total = row_mass.sum();
        if (!(total > 0.0)) {
            throw DegeneracyError("projection DPP ran out of probability mass with " +
                                  std::to_string(m) + " columns left");
        }
        const double target = rng.uniform01() * total;
        Eigen::Index pick = -1;
        Eigen::Index last_positive = -1;
        double cum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (row_mass[i] <= 0.0) continue;
            last_positive = i;
            cum += row_mass[i];
            if (target < cum) {
                pick = i;
                break;
            }
        }
        if (pick < 0) pick = last_positive;  // guards rounding at the top of the CDF
        selected.push_back(static_cast<int>(pick));
        if (m == 1) break;

        // Contract the basis against coordinate `pick`: eliminate the column
        // with the largest entry there, zero the row, and restore
        // orthonormality of the remainder.
        Eigen::Index pivot = 0;
        double pivot_abs = -1.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double aj = std::abs(v(pick, j));
            if (aj > pivot_abs) {
                pivot_abs = aj;
                pivot = j;
            }
        }
        if (pivot_abs < kPivotTol) {
            throw DegeneracyError("projection basis pivot below tolerance at item " +
                                  std::to_string(pick));
        }
        const Eigen::VectorXd pivot_col = v.col(pivot);
        const double pivot_val = v(pick, pivot);
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == pivot) continue;
            v.col(j) -= (v(pick, j) / pivot_val) * pivot_col;
        }
        if (pivot != m - 1) v.col(pivot) = v.col(m - 1);
        --m;
        v.row(pick).head(m).setZero();
        orthonormalize_columns(v, m, kPivotTol);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

KDppSampler::KDppSampler(const KernelFactor& factor, const SampleConfig& config)
    : system_(dual_eigensystem(factor, config.tol)), k_(config.k) {
    if (config.k < 1) {
        throw ConfigError("sample size k must be >= 1, got " + std::to_string(config.k));
    }
    if (config.k > system_.dual.rank()) {
        throw RankError("requested k=" + std::to_string(config.k) + " but kernel rank is " +
                        std::to_string(system_.dual.rank()));
    }
}

std::vector<int> KDppSampler::sample(Rng& rng) const {
    const std::vector<int> subset = sample_eigen_subset(system_.dual.eigenvalues, k_, rng);
    Eigen::MatrixXd u(system_.primal.rows(), k_);
    for (int j = 0; j < k_; ++j) {
        u.col(j) = system_.primal.col(subset[static_cast<std::size_t>(j)]);
    }
    // The lifted eigenvectors carry solver-level drift; one Gram-Schmidt pass
    // restores exact orthonormality without leaving their span.
    orthonormalize_columns(u, k_, 1e-6);
    return sample_projection_dpp(u, rng);
}

std::vector<int> sample_k_dpp(const KernelFactor& factor, const SampleConfig& config,
                              Rng& rng) {
    return KDppSampler(factor, config).sample(rng);
}

std::vector<int> sample_k_dpp(const KernelFactor& factor, const SampleConfig& config) {
    Rng rng(config.seed);
    return sample_k_dpp(factor, config, rng);
}

std::vector<int> greedy_map_select(const KernelFactor& factor, int k) {
    const Eigen::Index n = factor.rows();
    if (k < 1) throw ConfigError("selection size k must be >= 1, got " + std::to_string(k));
    if (k > n) {
        throw RankError("cannot select " + std::to_string(k) + " of " + std::to_string(n) +
                        " items");
    }
    Eigen::VectorXd residual = factor.b.rowwise().squaredNorm();
    const double scale = residual.maxCoeff();
    if (!(scale > 0.0)) throw RankError("kernel is numerically zero");
    const double floor = 1e-10 * scale;

    Eigen::MatrixXd basis(factor.cols(), k);
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    std::vector<int> selected;
    selected.reserve(static_cast<std::size_t>(k));
    for (int t = 0; t < k; ++t) {
        Eigen::Index best = -1;
        double best_mass = floor;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!taken[static_cast<std::size_t>(i)] && residual[i] > best_mass) {
                best_mass = residual[i];
                best = i;
            }
        }
        if (best < 0) {
            throw RankError("kernel rank exhausted after " + std::to_string(t) +
                            " greedy selections (need " + std::to_string(k) + ")");
        }
        selected.push_back(static_cast<int>(best));
        taken[static_cast<std::size_t>(best)] = 1;
        if (t + 1 == k) break;

        Eigen::VectorXd dir = factor.b.row(best).transpose();
        for (int b = 0; b < t; ++b) {
            dir -= basis.col(b).dot(dir) * basis.col(b);
        }
        const double norm = dir.norm();
        if (norm * norm <= floor) {
            throw RankError("kernel rank exhausted after " + std::to_string(t + 1) +
                            " greedy selections (need " + std::to_string(k) + ")");
        }
        basis.col(t) = dir / norm;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) {
                residual[i] = 0.0;
                continue;
            }
            const double proj = factor.b.row(i) * basis.col(t);
            residual[i] = std::max(residual[i] - proj * proj, 0.0);
        }
    }
    return selected;
}

std::map<std::vector<int>, double> brute_force_k_dpp(const Eigen::MatrixXd& l, int k) {
    const Eigen::Index n = l.rows();
    if (l.cols() != n) {
        throw DimensionError("kernel must be square, got " + std::to_string(n) + "x" +
                             std::to_string(l.cols()));
    }
    if (n > 20) {
        throw ConfigError("brute-force enumeration is limited to N <= 20, got N=" +
                          std::to_string(n));
    }
    if (k < 0 || k > n) {
        throw ConfigError("subset size k=" + std::to_string(k) + " must lie in [0, " +
                          std::to_string(n) + "]");
    }

    std::map<std::vector<int>, double> dist;
    if (k == 0) {
        dist[{}] = 1.0;
        return dist;
    }
    std::vector<int> comb(static_cast<std::size_t>(k));
    std::iota(comb.begin(), comb.end(), 0);
    double total = 0.0;
    while (true) {
        Eigen::MatrixXd sub(k, k);
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
                sub(a, b) = l(comb[static_cast<std::size_t>(a)], comb[static_cast<std::size_t>(b)]);
            }
        }
        const double det = std::max(sub.determinant(), 0.0);
        dist[comb] = det;
        total += det;

        // advance to the next k-combination of {0..n-1}
        int pos = k - 1;
        while (pos >= 0 && comb[static_cast<std::size_t>(pos)] ==
                               static_cast<int>(n) - k + pos) {
            --pos;
        }
        if (pos < 0) break;
        ++comb[static_cast<std::size_t>(pos)];
        for (int q = pos + 1; q < k; ++q) {
            comb[static_cast<std::size_t>(q)] = comb[static_cast<std::size_t>(q - 1)] + 1;
        }
    }
    if (!(total > 0.0)) {
        throw RankError("every " + std::to_string(k) + "-subset has zero determinant");
    }
    for (auto& [subset, mass] : dist) mass /= total;
    return dist;
}

}  // namespace divrec
