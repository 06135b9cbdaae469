#include "divrec/metrics.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

#include "divrec/errors.hpp"

namespace divrec {
namespace {

void check_selection(const std::vector<int>& selection, Eigen::Index bound,
                     const char* what) {
    if (selection.empty()) {
        throw ConfigError(std::string(what) + ": selection is empty");
    }
    for (int idx : selection) {
        if (idx < 0 || idx >= bound) {
            throw ConfigError(std::string(what) + ": index " + std::to_string(idx) +
                              " outside [0, " + std::to_string(bound) + ")");
        }
    }
}

}  // namespace

double relevance_mean_quality(const std::vector<int>& selection, const QualityScores& quality) {
    check_selection(selection, quality.q.size(), "relevance_mean_quality");
    double sum = 0.0;
    for (int idx : selection) sum += quality.q[idx];
    return sum / static_cast<double>(selection.size());
}

double mean_user_cosine(const std::vector<int>& selection, const UserProfile& user,
                        const Catalog& catalog) {
    check_selection(selection, static_cast<Eigen::Index>(catalog.size()), "mean_user_cosine");
    double sum = 0.0;
    for (int idx : selection) {
        sum += cosine(user.retrieval_embedding,
                      catalog.items()[static_cast<std::size_t>(idx)].retrieval_embedding);
    }
    return sum / static_cast<double>(selection.size());
}

double log_volume(const std::vector<int>& selection, const EmbeddingMatrix& phi) {
    check_selection(selection, phi.rows(), "log_volume");
    const int k = static_cast<int>(selection.size());
    Eigen::MatrixXd gram(k, k);
    for (int a = 0; a < k; ++a) {
        for (int b = a; b < k; ++b) {
            const double dot = phi.row(selection[static_cast<std::size_t>(a)])
                                   .dot(phi.row(selection[static_cast<std::size_t>(b)]));
            gram(a, b) = dot;
            gram(b, a) = dot;
        }
    }
    const SymmetricEigen eig = jacobi_eigensystem(gram);
    constexpr double kFloor = 1e-12;
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values[i] <= kFloor) return kDegenerateLogVolume;
        log_det += std::log(eig.values[i]);
    }
    return 0.5 * log_det;
}

QualityDiversityDecomposition quality_diversity_decomposition(const std::vector<int>& selection,
                                                              const QualityScores& quality,
                                                              const EmbeddingMatrix& phi) {
    check_selection(selection, quality.q.size(), "quality_diversity_decomposition");
    if (quality.q.size() != phi.rows()) {
        throw DimensionError("quality vector has " + std::to_string(quality.q.size()) +
                             " entries but embedding matrix has " + std::to_string(phi.rows()) +
                             " rows");
    }
    double quality_term = 0.0;
    for (int idx : selection) {
        const double q = quality.q[idx];
        if (!(q > 0.0)) {
            throw ConfigError("quality score at index " + std::to_string(idx) +
                              " is zero; log decomposition undefined");
        }
        quality_term += std::log(q);
    }
    const double vol = log_volume(selection, phi);
    if (std::isinf(vol)) {
        throw RankError("selected embedding rows are linearly dependent; decomposition undefined");
    }
    QualityDiversityDecomposition out;
    out.quality_term = quality_term;
    out.diversity_term = 2.0 * vol;
    out.total = out.quality_term + out.diversity_term;
    return out;
}

double business_diversity_item(const Item& item,
                               const std::vector<InteractionRecord>& history) {
    std::unordered_set<std::string> categories, venue_types, subcategories, venues, genres;
    for (const InteractionRecord& rec : history) {
        categories.insert(rec.category);
        venue_types.insert(rec.venue_type);
        subcategories.insert(rec.subcategory);
        venues.insert(rec.venue_id);
        genres.insert(rec.genre);
    }
    const auto novel = [](const std::string& value, const std::unordered_set<std::string>& seen) {
        return !value.empty() && seen.find(value) == seen.end();
    };
    double score = 0.0;
    if (novel(item.category, categories)) score += 2.5;
    if (novel(item.venue_type, venue_types)) score += 2.0;
    if (novel(item.subcategory, subcategories)) score += 1.0;
    if (novel(item.venue_id, venues)) score += 0.5;
    if (novel(item.genre, genres)) score += 0.5;
    return score;
}

double business_diversity_set(const std::vector<int>& selection, const Catalog& catalog,
                              const std::vector<InteractionRecord>& history) {
    check_selection(selection, static_cast<Eigen::Index>(catalog.size()),
                    "business_diversity_set");
    double sum = 0.0;
    for (int idx : selection) {
        sum += business_diversity_item(catalog.items()[static_cast<std::size_t>(idx)], history);
    }
    return sum / static_cast<double>(selection.size());
}

}  // namespace divrec
