#pragma once

#include <filesystem>

#include <Eigen/Core>

#include "divrec/catalog.hpp"

namespace divrec {

/// Row-per-item embedding storage (N x dim).
using EmbeddingMatrix = Eigen::MatrixXd;

/// Principal-component reduction fitted on mean-centered data.
struct ReductionModel {
    Eigen::VectorXd mean;                // column means of the fitting data
    Eigen::MatrixXd projection;          // D x d, orthonormal columns
    Eigen::VectorXd explained_variance;  // d entries, non-increasing, >= 0
};

/// Fits a PCA model: projection columns are the top-d eigenvectors of the
/// sample covariance of `data`, explained_variance the matching eigenvalues.
/// Rank-deficient data succeeds with trailing explained_variance near zero.
ReductionModel fit_reduction(const EmbeddingMatrix& data, Eigen::Index d);

/// Maps each row x to projection^T (x - mean). Accepts N = 0.
EmbeddingMatrix project(const ReductionModel& model, const EmbeddingMatrix& data);

/// Inverse map of project at full rank: reduced * projection^T + mean.
EmbeddingMatrix reconstruct(const ReductionModel& model, const EmbeddingMatrix& reduced);

/// Cosine similarity, clamped to [-1, 1]. Throws ZeroVectorError on a zero
/// input and DimensionError on length mismatch.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Rewrites the catalog as JSONL with a `reduced_embedding` field appended
/// to every item record.
void write_catalog_with_reduced(const Catalog& catalog,
                                const EmbeddingMatrix& reduced,
                                const std::filesystem::path& path);

/// Reads `reduced_embedding` vectors from a JSONL file (any record with an
/// `id` works, so reduce-dims output is accepted directly) and returns them
/// aligned to catalog item order.
EmbeddingMatrix load_reduced_embeddings(const std::filesystem::path& path,
                                        const Catalog& catalog);

}  // namespace divrec
