#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"
#include "divrec/kernel.hpp"

namespace divrec {

/// Attribute novelty weights for the business diversity score. An item earns
/// the points for each attribute whose value never occurs in the user's
/// interaction history; the maximum per item is 6.5.
struct NoveltyRule {
    const char* attribute;
    double points;
};

inline constexpr NoveltyRule kNoveltyRules[] = {
    {"category", 2.5}, {"venue_type", 2.0}, {"subcategory", 1.0},
    {"venue_id", 0.5}, {"genre", 0.5},
};
inline constexpr double kMaxNoveltyScore = 6.5;

/// Sentinel returned by log_volume for rank-deficient sets.
inline constexpr double kDegenerateLogVolume = -std::numeric_limits<double>::infinity();

/// Mean quality score over the selected rows of q.
double relevance_mean_quality(const std::vector<int>& selection, const QualityScores& quality);

/// Mean cosine between the user's retrieval embedding and the selected
/// catalog items' retrieval embeddings.
double mean_user_cosine(const std::vector<int>& selection, const UserProfile& user,
                        const Catalog& catalog);

/// Half the log-determinant of the Gram matrix of the selected embedding
/// rows, i.e. the log-volume of the spanned parallelotope. Eigenvalues are
/// floored at 1e-12; if any sits at the floor the set is reported as
/// degenerate via the -inf sentinel instead of a misleading large-negative
/// number.
double log_volume(const std::vector<int>& selection, const EmbeddingMatrix& phi);

struct QualityDiversityDecomposition {
    double quality_term;    // sum of log q_i
    double diversity_term;  // 2 * log-volume of the embedding rows
    double total;           // quality_term + diversity_term
};

/// Splits the selection's log determinant into a quality sum and a geometric
/// diversity term. Throws ConfigError when any selected quality is zero and
/// RankError when the embedding rows are linearly dependent.
QualityDiversityDecomposition quality_diversity_decomposition(const std::vector<int>& selection,
                                                              const QualityScores& quality,
                                                              const EmbeddingMatrix& phi);

/// Novelty points earned by one item against an interaction history. Empty
/// attribute values never count as novel.
double business_diversity_item(const Item& item,
                               const std::vector<InteractionRecord>& history);

/// Mean novelty points over the selected catalog items. The history is held
/// fixed; items in the selection do not devalue each other.
double business_diversity_set(const std::vector<int>& selection, const Catalog& catalog,
                              const std::vector<InteractionRecord>& history);

}  // namespace divrec
