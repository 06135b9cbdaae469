#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"

namespace divrec {

/// Pipeline variants: A = no diversity filter, B = DPP with personalized
/// quality scores, C = DPP with constant quality.
enum class Variant { A, B, C };

char variant_label(Variant v);
Variant parse_variant(const std::string& label);

/// Relative eigenvalue cutoff separating genuine rank deficiency from
/// rounding noise.
inline constexpr double kRankTol = 1e-10;

/// Floor for variant-B quality scores; keeps every item sampleable.
inline constexpr double kQualityFloor = 1e-6;

struct QualityScores {
    Eigen::VectorXd q;  // entries in [0, 1]
    Variant variant = Variant::C;
};

/// Low-rank kernel factor B (N x d) with rows b_i = q_i * phi_i. The kernel
/// itself is L = B B^T, so L_ij = q_i q_j phi_i^T phi_j; L is never
/// materialized at full size.
struct KernelFactor {
    Eigen::MatrixXd b;
    std::vector<std::int64_t> item_ids;  // row index -> catalog id

    Eigen::Index rows() const { return b.rows(); }
    Eigen::Index cols() const { return b.cols(); }
};

/// Retained part of a symmetric PSD eigensystem: eigenvalues non-increasing
/// and positive, eigenvectors orthonormal columns.
struct EigenDecomposition {
    Eigen::VectorXd eigenvalues;   // r entries
    Eigen::MatrixXd eigenvectors;  // d x r

    Eigen::Index rank() const { return eigenvalues.size(); }
};

/// Dual decomposition of L = B B^T through the d x d matrix C = B^T B,
/// lifted back to primal eigenvectors u_j = B v_j / sqrt(lambda_j). Costs
/// O(N d^2) instead of O(N^3).
struct DualEigensystem {
    EigenDecomposition dual;
    Eigen::MatrixXd primal;  // N x r, orthonormal columns
};

/// Full unfiltered eigensystem of a symmetric matrix (values may be
/// negative, basis is complete).
struct SymmetricEigen {
    Eigen::VectorXd values;   // n entries, non-increasing
    Eigen::MatrixXd vectors;  // n x n orthogonal
};

/// Cyclic Jacobi eigensolver. Sweeps rotations until the off-diagonal
/// Frobenius mass falls below 1e-12 * ||C||_F. Deterministic; adequate for
/// the d <= 384 matrices used here.
SymmetricEigen jacobi_eigensystem(const Eigen::MatrixXd& c);

/// PSD eigendecomposition with rank filtering: eigenvalues below
/// tol * lambda_max are dropped, negatives within -tol * scale are clipped
/// to zero and anything materially negative is rejected.
EigenDecomposition eig_sym(const Eigen::MatrixXd& c, double tol = kRankTol);

/// Per-candidate quality scores. Variant B maps the user-item retrieval
/// cosine s to (s + 1) / 2, clamped to [kQualityFloor, 1]; variants A and C
/// return all ones.
QualityScores compute_quality_scores(Variant variant, const UserProfile& user,
                                     const std::vector<const Item*>& items);

/// Builds B with rows b_i = q_i * phi_i. When item_ids is empty, rows map
/// to ids 0..N-1.
KernelFactor build_kernel_factor(const QualityScores& q, const EmbeddingMatrix& phi,
                                 std::vector<std::int64_t> item_ids = {});

/// Eigendecomposition of B^T B lifted to primal space. Throws RankError
/// when every eigenvalue falls below tolerance (zero kernel).
DualEigensystem dual_eigensystem(const KernelFactor& factor, double tol = kRankTol);

}  // namespace divrec
