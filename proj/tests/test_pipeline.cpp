#include "divrec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "doctest.h"

#include "divrec/embedding.hpp"
#include "divrec/errors.hpp"
#include "divrec/metrics.hpp"
#include "test_util.hpp"

using namespace divrec;
using testutil::make_item;
using testutil::vec;

namespace {

/// Items fanned across the plane; item i sits at angle i * step degrees from
/// the x axis in retrieval space.
Catalog fan_catalog(int n, double step_degrees) {
    std::vector<Item> items;
    for (int i = 0; i < n; ++i) {
        const double theta = step_degrees * i * std::numbers::pi / 180.0;
        const Eigen::VectorXd r = vec({std::cos(theta), std::sin(theta)});
        items.push_back(make_item(i, r, r));
    }
    return Catalog(items);
}

UserProfile user_along_x() {
    UserProfile user;
    user.id = 1;
    user.retrieval_embedding = vec({1.0, 0.0});
    user.remaining_credit = 1e9;
    return user;
}

std::vector<Candidate> all_candidates(int n) {
    std::vector<Candidate> out;
    for (int i = 0; i < n; ++i) out.push_back({i, 1.0});
    return out;
}

std::vector<int> indices(const std::vector<Candidate>& candidates) {
    std::vector<int> out;
    for (const Candidate& c : candidates) out.push_back(c.index);
    return out;
}

}  // namespace

TEST_CASE("retrieval returns the whole catalog when m is large") {
    const Catalog catalog = fan_catalog(4, 20.0);
    const auto top = retrieve_top(user_along_x(), catalog, 10);
    REQUIRE(top.size() == 4);
    for (std::size_t i = 1; i < top.size(); ++i) CHECK(top[i - 1].score >= top[i].score);
    CHECK(indices(top) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("retrieval puts an exact embedding match first") {
    std::vector<Item> items;
    items.push_back(make_item(0, vec({1.0, 0.0}), vec({0.0, 1.0})));
    items.push_back(make_item(1, vec({1.0, 0.0}), vec({0.6, 0.8})));
    items.push_back(make_item(2, vec({1.0, 0.0}), vec({3.0, 0.0})));
    const Catalog catalog(items);
    const auto top = retrieve_top(user_along_x(), catalog, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].index == 2);
    CHECK(top[0].score == doctest::Approx(1.0));
}

TEST_CASE("retrieval breaks score ties by ascending id") {
    std::vector<Item> items;
    items.push_back(make_item(7, vec({1.0, 0.0}), vec({1.0, 0.0})));
    items.push_back(make_item(3, vec({1.0, 0.0}), vec({2.0, 0.0})));
    const Catalog catalog(items);
    const auto top = retrieve_top(user_along_x(), catalog, 2);
    REQUIRE(top.size() == 2);
    CHECK(catalog.at(std::size_t(top[0].index)).id == 3);
    CHECK(catalog.at(std::size_t(top[1].index)).id == 7);
    CHECK_THROWS_AS(retrieve_top(user_along_x(), catalog, 0), ConfigError);
}

TEST_CASE("dpp filter keeps everything when k equals the candidate count") {
    const Catalog catalog = fan_catalog(3, 40.0);
    Eigen::MatrixXd reduced = Eigen::MatrixXd::Identity(3, 3);
    PipelineConfig config;
    config.retrieval_size = 3;
    config.dpp_size = 3;
    config.variant = Variant::C;
    Rng rng(61);
    const auto kept = dpp_filter(all_candidates(3), user_along_x(), catalog, reduced,
                                 config, rng);
    CHECK(indices(kept) == std::vector<int>{0, 1, 2});
}

TEST_CASE("dpp filter never keeps duplicate reduced rows together") {
    const Catalog catalog = fan_catalog(4, 20.0);
    Eigen::MatrixXd reduced(4, 2);
    reduced << 1.0, 0.0,
               1.0, 0.0,
               0.0, 1.0,
               0.8, 0.6;
    PipelineConfig config;
    config.retrieval_size = 4;
    config.dpp_size = 2;
    config.variant = Variant::C;
    Rng rng(62);
    for (int rep = 0; rep < 300; ++rep) {
        const auto kept = dpp_filter(all_candidates(4), user_along_x(), catalog, reduced,
                                     config, rng);
        REQUIRE(kept.size() == 2);
        const std::vector<int> s = indices(kept);
        CHECK_FALSE((s[0] == 0 && s[1] == 1));
    }
}

TEST_CASE("dpp filter rejects variant A and undersized candidate pools") {
    const Catalog catalog = fan_catalog(4, 20.0);
    const Eigen::MatrixXd reduced = Eigen::MatrixXd::Identity(4, 4);
    PipelineConfig config;
    config.dpp_size = 2;
    config.variant = Variant::A;
    Rng rng(63);
    CHECK_THROWS_AS(dpp_filter(all_candidates(4), user_along_x(), catalog, reduced,
                               config, rng),
                    ConfigError);
    config.variant = Variant::B;
    CHECK_THROWS_AS(dpp_filter(all_candidates(1), user_along_x(), catalog, reduced,
                               config, rng),
                    ConfigError);
}

TEST_CASE("personalized quality tilts selections toward the user") {
    // Items fanned up to 150 degrees: variant B should, on average, pick
    // sets with higher user-item cosine quality than variant C.
    const int n = 6;
    const Catalog catalog = fan_catalog(n, 30.0);
    Rng init(64);
    Eigen::MatrixXd reduced(n, 3);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 3; ++j) reduced(i, j) = init.normal();
        reduced.row(i).normalize();
    }
    const UserProfile user = user_along_x();

    std::vector<const Item*> ptrs;
    for (const Item& item : catalog.items()) ptrs.push_back(&item);
    const QualityScores quality = compute_quality_scores(Variant::B, user, ptrs);

    PipelineConfig config;
    config.retrieval_size = n;
    config.dpp_size = 2;

    double total_b = 0.0;
    double total_c = 0.0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        config.variant = Variant::B;
        Rng rng_b(seed);
        total_b += relevance_mean_quality(
            indices(dpp_filter(all_candidates(n), user, catalog, reduced, config, rng_b)),
            quality);
        config.variant = Variant::C;
        Rng rng_c(seed);
        total_c += relevance_mean_quality(
            indices(dpp_filter(all_candidates(n), user, catalog, reduced, config, rng_c)),
            quality);
    }
    CHECK(total_b > total_c);
}

TEST_CASE("compliance filter passes clean candidates through") {
    const Catalog catalog = fan_catalog(3, 30.0);
    const auto kept = compliance_filter(all_candidates(3), catalog, user_along_x());
    CHECK(indices(kept) == std::vector<int>{0, 1, 2});
}

TEST_CASE("compliance filter enforces price, history and the compliance flag") {
    std::vector<Item> items;
    items.push_back(make_item(0, vec({1.0, 0.0}), vec({1.0, 0.0})));
    Item pricey = make_item(1, vec({1.0, 0.0}), vec({1.0, 0.1}));
    pricey.price = 301.0;
    items.push_back(pricey);
    Item seen = make_item(2, vec({1.0, 0.0}), vec({1.0, 0.2}));
    items.push_back(seen);
    Item banned = make_item(3, vec({1.0, 0.0}), vec({1.0, 0.3}));
    banned.compliant = false;
    items.push_back(banned);
    Item affordable = make_item(4, vec({1.0, 0.0}), vec({1.0, 0.4}));
    affordable.price = 300.0;
    items.push_back(affordable);
    const Catalog catalog(items);

    UserProfile user = user_along_x();
    user.remaining_credit = 300.0;
    InteractionRecord rec;
    rec.item_id = 2;
    user.history.push_back(rec);

    const auto kept = compliance_filter(all_candidates(5), catalog, user);
    CHECK(indices(kept) == std::vector<int>{0, 4});
}

TEST_CASE("popularity ranking is descending with id tie-breaks") {
    std::vector<Item> items;
    Item a = make_item(0, vec({1.0}), vec({1.0}));
    a.popularity = 5;
    Item b = make_item(1, vec({1.0}), vec({1.0}));
    b.popularity = 9;
    Item c = make_item(2, vec({1.0}), vec({1.0}));
    c.popularity = 1;
    items = {a, b, c};
    const Catalog catalog(items);

    const auto ranked = rank_by_popularity(all_candidates(3), catalog);
    CHECK(indices(ranked) == std::vector<int>{1, 0, 2});

    std::vector<Item> tied;
    Item d = make_item(4, vec({1.0}), vec({1.0}));
    Item e = make_item(2, vec({1.0}), vec({1.0}));
    d.popularity = 7;
    e.popularity = 7;
    tied = {d, e};
    const Catalog tied_catalog(tied);
    const auto tied_ranked = rank_by_popularity(all_candidates(2), tied_catalog);
    CHECK(tied_catalog.at(std::size_t(tied_ranked[0].index)).id == 2);

    CHECK(rank_by_popularity({}, catalog).empty());
}

TEST_CASE("variant A recommendations ignore the seed") {
    SynthConfig synth;
    synth.n_items = 60;
    synth.n_users = 4;
    synth.n_categories = 4;
    synth.semantic_dim = 16;
    synth.retrieval_dim = 8;
    const SyntheticData data = generate_synthetic(synth, 7);
    const ReductionModel model = fit_reduction(data.catalog.semantic_matrix(), 8);
    const EmbeddingMatrix reduced = project(model, data.catalog.semantic_matrix());

    PipelineConfig config;
    config.retrieval_size = 40;
    config.dpp_size = 8;
    config.variant = Variant::A;

    config.seed = 1;
    const RecommendationSet first = recommend(data.users[0], data.catalog, reduced, config);
    config.seed = 2;
    const RecommendationSet second = recommend(data.users[0], data.catalog, reduced, config);
    CHECK(first.item_ids == second.item_ids);
    CHECK(first.scores == second.scores);
    CHECK(first.variant == Variant::A);
    CHECK(first.user_id == data.users[0].id);
}

TEST_CASE("variant B recommendations vary across seeds") {
    SynthConfig synth;
    synth.n_items = 60;
    synth.n_users = 4;
    synth.n_categories = 4;
    synth.semantic_dim = 16;
    synth.retrieval_dim = 8;
    const SyntheticData data = generate_synthetic(synth, 8);
    const ReductionModel model = fit_reduction(data.catalog.semantic_matrix(), 8);
    const EmbeddingMatrix reduced = project(model, data.catalog.semantic_matrix());

    PipelineConfig config;
    config.retrieval_size = 40;
    config.dpp_size = 8;
    config.variant = Variant::B;

    std::set<std::vector<std::int64_t>> distinct;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        config.seed = seed;
        RecommendationSet rec = recommend(data.users[0], data.catalog, reduced, config);
        std::sort(rec.item_ids.begin(), rec.item_ids.end());
        distinct.insert(rec.item_ids);
        CHECK(rec.seed == seed);
    }
    CHECK(distinct.size() >= 2);
}

TEST_CASE("recommendations stay inside the retrieval pool") {
    SynthConfig synth;
    synth.n_items = 50;
    synth.n_users = 3;
    synth.n_categories = 3;
    synth.semantic_dim = 12;
    synth.retrieval_dim = 6;
    const SyntheticData data = generate_synthetic(synth, 9);
    const ReductionModel model = fit_reduction(data.catalog.semantic_matrix(), 6);
    const EmbeddingMatrix reduced = project(model, data.catalog.semantic_matrix());

    PipelineConfig config;
    config.retrieval_size = 30;
    config.dpp_size = 6;

    for (const Variant variant : {Variant::A, Variant::B, Variant::C}) {
        config.variant = variant;
        for (const UserProfile& user : data.users) {
            const auto pool = retrieve_top(user, data.catalog, config.retrieval_size);
            std::set<std::int64_t> pool_ids;
            for (const Candidate& c : pool) pool_ids.insert(data.catalog.at(std::size_t(c.index)).id);

            const RecommendationSet rec = recommend(user, data.catalog, reduced, config);
            CHECK(rec.item_ids.size() <= std::size_t(config.dpp_size));
            CHECK(rec.item_ids.size() == rec.scores.size());
            std::set<std::int64_t> seen;
            std::int64_t prev_pop = -1;
            bool first = true;
            for (const std::int64_t id : rec.item_ids) {
                CHECK(pool_ids.count(id) == 1);
                CHECK(seen.insert(id).second);
                const Item& item = data.catalog.at(data.catalog.index_of(id));
                if (!first) CHECK(item.popularity <= prev_pop);
                prev_pop = item.popularity;
                first = false;
            }
        }
    }
}
