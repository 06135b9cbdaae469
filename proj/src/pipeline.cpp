#include "divrec/pipeline.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "divrec/errors.hpp"
#include "divrec/sampler.hpp"

namespace divrec {
namespace {

void check_config(const PipelineConfig& config) {
    if (config.retrieval_size < 1) {
        throw ConfigError("retrieval_size must be >= 1, got " +
                          std::to_string(config.retrieval_size));
    }
    if (config.dpp_size < 1 || config.dpp_size > config.retrieval_size) {
        throw ConfigError("dpp_size must lie in [1, retrieval_size], got " +
                          std::to_string(config.dpp_size) + " with retrieval_size " +
                          std::to_string(config.retrieval_size));
    }
}

}  // namespace

std::vector<Candidate> retrieve_top(const UserProfile& user, const Catalog& catalog, int m) {
    if (m < 1) throw ConfigError("retrieval size must be >= 1, got " + std::to_string(m));
    std::vector<Candidate> scored;
    scored.reserve(catalog.size());
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const Item& item = catalog.items()[i];
        scored.push_back({static_cast<int>(i),
                          cosine(user.retrieval_embedding, item.retrieval_embedding)});
    }
    std::sort(scored.begin(), scored.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return catalog.items()[static_cast<std::size_t>(a.index)].id <
               catalog.items()[static_cast<std::size_t>(b.index)].id;
    });
    if (scored.size() > static_cast<std::size_t>(m)) {
        scored.resize(static_cast<std::size_t>(m));
    }
    return scored;
}

std::vector<Candidate> dpp_filter(const std::vector<Candidate>& candidates,
                                  const UserProfile& user, const Catalog& catalog,
                                  const EmbeddingMatrix& reduced_phi,
                                  const PipelineConfig& config, Rng& rng) {
    if (config.variant == Variant::A) {
        throw ConfigError("variant A has no DPP stage");
    }
    check_config(config);
    if (static_cast<int>(candidates.size()) < config.dpp_size) {
        throw ConfigError("need at least dpp_size=" + std::to_string(config.dpp_size) +
                          " candidates, got " + std::to_string(candidates.size()));
    }

    const int n = static_cast<int>(candidates.size());
    std::vector<const Item*> items(static_cast<std::size_t>(n));
    std::vector<std::int64_t> ids(static_cast<std::size_t>(n));
    Eigen::MatrixXd phi(n, reduced_phi.cols());
    for (int i = 0; i < n; ++i) {
        const Candidate& cand = candidates[static_cast<std::size_t>(i)];
        if (cand.index < 0 || cand.index >= static_cast<int>(catalog.size()) ||
            cand.index >= reduced_phi.rows()) {
            throw ConfigError("candidate index " + std::to_string(cand.index) +
                              " outside the catalog/embedding range");
        }
        const Item& item = catalog.items()[static_cast<std::size_t>(cand.index)];
        items[static_cast<std::size_t>(i)] = &item;
        ids[static_cast<std::size_t>(i)] = item.id;
        phi.row(i) = reduced_phi.row(cand.index);
    }

    const QualityScores quality = compute_quality_scores(config.variant, user, items);
    const KernelFactor factor = build_kernel_factor(quality, phi, ids);
    const SampleConfig sample_config{config.dpp_size, config.seed, config.tol};
    const std::vector<int> rows = sample_k_dpp(factor, sample_config, rng);

    std::vector<Candidate> kept;
    kept.reserve(rows.size());
    for (int row : rows) kept.push_back(candidates[static_cast<std::size_t>(row)]);
    return kept;
}

std::vector<Candidate> compliance_filter(const std::vector<Candidate>& candidates,
                                         const Catalog& catalog, const UserProfile& user) {
    std::unordered_set<std::int64_t> seen;
    for (const InteractionRecord& rec : user.history) seen.insert(rec.item_id);
    std::vector<Candidate> kept;
    kept.reserve(candidates.size());
    for (const Candidate& cand : candidates) {
        const Item& item = catalog.items()[static_cast<std::size_t>(cand.index)];
        if (!item.compliant) continue;
        if (item.price > user.remaining_credit) continue;
        if (seen.count(item.id) != 0) continue;
        kept.push_back(cand);
    }
    return kept;
}

std::vector<Candidate> rank_by_popularity(std::vector<Candidate> candidates,
                                          const Catalog& catalog) {
    std::sort(candidates.begin(), candidates.end(),
              [&](const Candidate& a, const Candidate& b) {
                  const Item& ia = catalog.items()[static_cast<std::size_t>(a.index)];
                  const Item& ib = catalog.items()[static_cast<std::size_t>(b.index)];
                  if (ia.popularity != ib.popularity) return ia.popularity > ib.popularity;
                  return ia.id < ib.id;
              });
    return candidates;
}

RecommendationSet recommend(const UserProfile& user, const Catalog& catalog,
                            const EmbeddingMatrix& reduced_phi, const PipelineConfig& config,
                            Rng& rng) {
    check_config(config);
    const std::vector<Candidate> candidates =
        retrieve_top(user, catalog, config.retrieval_size);

    std::vector<Candidate> selected;
    if (config.variant == Variant::A) {
        selected = compliance_filter(candidates, catalog, user);
        if (selected.size() > static_cast<std::size_t>(config.dpp_size)) {
            selected.resize(static_cast<std::size_t>(config.dpp_size));
        }
    } else {
        selected = compliance_filter(dpp_filter(candidates, user, catalog, reduced_phi,
                                                config, rng),
                                     catalog, user);
    }
    const std::vector<Candidate> ranked = rank_by_popularity(std::move(selected), catalog);

    RecommendationSet out;
    out.user_id = user.id;
    out.variant = config.variant;
    out.seed = config.seed;
    out.item_ids.reserve(ranked.size());
    out.scores.reserve(ranked.size());
    for (const Candidate& cand : ranked) {
        out.item_ids.push_back(catalog.items()[static_cast<std::size_t>(cand.index)].id);
        out.scores.push_back(cand.score);
    }
    return out;
}

RecommendationSet recommend(const UserProfile& user, const Catalog& catalog,
                            const EmbeddingMatrix& reduced_phi, const PipelineConfig& config) {
    Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(user.id),
                                      static_cast<std::uint64_t>(config.variant)}));
    return recommend(user, catalog, reduced_phi, config, rng);
}

}  // namespace divrec
