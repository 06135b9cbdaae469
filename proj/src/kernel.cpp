#include "divrec/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Jacobi>

#include "divrec/errors.hpp"

namespace divrec {

char variant_label(Variant v) {
    switch (v) {
        case Variant::A: return 'A';
        case Variant::B: return 'B';
        case Variant::C: return 'C';
    }
    return '?';
}

Variant parse_variant(const std::string& label) {
    if (label == "A" || label == "a") return Variant::A;
    if (label == "B" || label == "b") return Variant::B;
    if (label == "C" || label == "c") return Variant::C;
    throw ConfigError("unknown variant \"" + label + "\" (expected A, B or C)");
}

SymmetricEigen jacobi_eigensystem(const Eigen::MatrixXd& c) {
    const Eigen::Index n = c.rows();
    if (n != c.cols()) {
        throw DimensionError("jacobi_eigensystem: matrix is " + std::to_string(n) +
                             "x" + std::to_string(c.cols()));
    }

    Eigen::MatrixXd a = 0.5 * (c + c.transpose());
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
    const double total_norm = a.norm();
    const double threshold = 1e-12 * total_norm;

    if (total_norm > 0.0) {
        constexpr int kMaxSweeps = 64;
        for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
            const double off_mass =
                std::sqrt(std::max(a.squaredNorm() - a.diagonal().squaredNorm(), 0.0));
            if (off_mass <= threshold) {
                break;
            }
            for (Eigen::Index p = 0; p < n - 1; ++p) {
                for (Eigen::Index q = p + 1; q < n; ++q) {
                    if (a(p, q) == 0.0) {
                        continue;
                    }
                    Eigen::JacobiRotation<double> rot;
                    rot.makeJacobi(a(p, p), a(p, q), a(q, q));
                    a.applyOnTheLeft(p, q, rot.transpose());
                    a.applyOnTheRight(p, q, rot);
                    a(p, q) = 0.0;
                    a(q, p) = 0.0;
                    v.applyOnTheRight(p, q, rot);
                }
            }
        }
    }

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&a](Eigen::Index i, Eigen::Index j) {
        return a(i, i) > a(j, j);
    });

    SymmetricEigen result;
    result.values.resize(n);
    result.vectors.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        result.values[j] = a(order[j], order[j]);
        result.vectors.col(j) = v.col(order[j]);
    }
    return result;
}

EigenDecomposition eig_sym(const Eigen::MatrixXd& c, double tol) {
    const Eigen::Index n = c.rows();
    if (n != c.cols()) {
        throw DimensionError("eig_sym: matrix is " + std::to_string(n) + "x" +
                             std::to_string(c.cols()));
    }
    const double scale = c.norm();
    if ((c - c.transpose()).norm() > 1e-10 * scale) {
        throw ConfigError("eig_sym: input matrix is not symmetric");
    }

    SymmetricEigen full = jacobi_eigensystem(c);
    const double spectral_scale =
        std::max(std::abs(full.values[0]), std::abs(full.values[n - 1]));
    const double lambda_min = full.values[n - 1];
    if (lambda_min < -tol * spectral_scale) {
        throw ConfigError("eig_sym: matrix is not positive semi-definite "
                          "(eigenvalue " + std::to_string(lambda_min) + ")");
    }

    const double lambda_max = std::max(full.values[0], 0.0);
    const double cutoff = tol * lambda_max;
    Eigen::Index rank = 0;
    while (rank < n && full.values[rank] > cutoff) {
        ++rank;
    }

    EigenDecomposition dec;
    dec.eigenvalues = full.values.head(rank).cwiseMax(0.0);
    dec.eigenvectors = full.vectors.leftCols(rank);
    return dec;
}

QualityScores compute_quality_scores(Variant variant, const UserProfile& user,
                                     const std::vector<const Item*>& items) {
    QualityScores scores;
    scores.variant = variant;
    scores.q = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(items.size()));
    if (variant != Variant::B) {
        // Variant C samples on diversity alone; variant A never reads q.
        return scores;
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double s = cosine(user.retrieval_embedding, items[i]->retrieval_embedding);
        scores.q[static_cast<Eigen::Index>(i)] =
            std::clamp((s + 1.0) / 2.0, kQualityFloor, 1.0);
    }
    return scores;
}

KernelFactor build_kernel_factor(const QualityScores& q, const EmbeddingMatrix& phi,
                                 std::vector<std::int64_t> item_ids) {
    if (q.q.size() != phi.rows()) {
        throw DimensionError("build_kernel_factor: " + std::to_string(q.q.size()) +
                             " quality scores for " + std::to_string(phi.rows()) +
                             " embedding rows");
    }
    if ((q.q.array() < 0.0).any() || (q.q.array() > 1.0).any()) {
        throw ConfigError("build_kernel_factor: quality scores must lie in [0, 1]");
    }
    KernelFactor factor;
    factor.b = q.q.asDiagonal() * phi;
    if (item_ids.empty()) {
        factor.item_ids.resize(phi.rows());
        std::iota(factor.item_ids.begin(), factor.item_ids.end(), 0);
    } else {
        if (static_cast<Eigen::Index>(item_ids.size()) != phi.rows()) {
            throw DimensionError("build_kernel_factor: item_ids length mismatch");
        }
        factor.item_ids = std::move(item_ids);
    }
    return factor;
}

DualEigensystem dual_eigensystem(const KernelFactor& factor, double tol) {
    const Eigen::MatrixXd c = factor.b.transpose() * factor.b;
    EigenDecomposition dual = eig_sym(c, tol);
    if (dual.rank() == 0) {
        throw RankError("dual_eigensystem: kernel is numerically zero");
    }

    DualEigensystem sys;
    sys.primal.resize(factor.b.rows(), dual.rank());
    for (Eigen::Index j = 0; j < dual.rank(); ++j) {
        sys.primal.col(j) =
            factor.b * dual.eigenvectors.col(j) / std::sqrt(dual.eigenvalues[j]);
    }
    sys.dual = std::move(dual);
    return sys;
}

}  // namespace divrec
