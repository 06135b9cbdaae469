#pragma once

#include <cstdint>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"
#include "divrec/kernel.hpp"
#include "divrec/rng.hpp"

namespace divrec {

struct PipelineConfig {
    int retrieval_size = 1000;
    int dpp_size = 60;
    Variant variant = Variant::B;
    std::uint64_t seed = 0;
    double tol = kRankTol;
};

/// A catalog item surfaced by retrieval, with its retrieval score.
struct Candidate {
    int index;     // row in the catalog
    double score;  // cosine against the user's retrieval embedding
};

struct RecommendationSet {
    std::int64_t user_id = 0;
    Variant variant = Variant::A;
    std::uint64_t seed = 0;
    std::vector<std::int64_t> item_ids;  // display order
    std::vector<double> scores;          // retrieval score per displayed item
};

/// Top-m catalog items by retrieval cosine, descending; ties broken by
/// ascending item id. Returns fewer than m only when the catalog is smaller.
std::vector<Candidate> retrieve_top(const UserProfile& user, const Catalog& catalog, int m);

/// Stochastic diversification stage: draws config.dpp_size candidates from
/// the k-DPP over the quality-modulated kernel on the reduced embeddings.
/// Only variants B and C carry a DPP stage; variant A is rejected here.
/// Preserves the retrieval ordering of the surviving candidates.
std::vector<Candidate> dpp_filter(const std::vector<Candidate>& candidates,
                                  const UserProfile& user, const Catalog& catalog,
                                  const EmbeddingMatrix& reduced_phi,
                                  const PipelineConfig& config, Rng& rng);

/// Drops non-compliant items, items the user cannot afford, and items
/// already in the user's history. Order-preserving.
std::vector<Candidate> compliance_filter(const std::vector<Candidate>& candidates,
                                         const Catalog& catalog, const UserProfile& user);

/// Display ordering: popularity descending, ties by ascending item id.
std::vector<Candidate> rank_by_popularity(std::vector<Candidate> candidates,
                                          const Catalog& catalog);

/// Full three-stage pipeline. Variants B and C run retrieval, the DPP
/// filter, then compliance; variant A keeps the top config.dpp_size
/// compliant candidates by retrieval score. All variants order the final
/// set by popularity.
RecommendationSet recommend(const UserProfile& user, const Catalog& catalog,
                            const EmbeddingMatrix& reduced_phi, const PipelineConfig& config,
                            Rng& rng);

/// Convenience overload: derives the random stream from (config.seed,
/// user.id, variant) so distinct users and variants never share a stream.
RecommendationSet recommend(const UserProfile& user, const Catalog& catalog,
                            const EmbeddingMatrix& reduced_phi, const PipelineConfig& config);

}  // namespace divrec
