#include "divrec/catalog.hpp"

#include <set>
#include <sstream>

#include "doctest.h"

#include "divrec/errors.hpp"
#include "test_util.hpp"

using namespace divrec;
using testutil::TempDir;
using testutil::vec;

namespace {

std::string item_line(std::int64_t id, const std::string& sem, const std::string& ret) {
    std::ostringstream os;
    os << R"({"id":)" << id
       << R"(,"category":"jazz","subcategory":"club","genre":"bebop","venue_id":"v1",)"
       << R"("venue_type":"club","price":12.5,"popularity":3,"compliant":true,)"
       << R"("semantic_embedding":)" << sem << R"(,"retrieval_embedding":)" << ret << "}";
    return os.str();
}

}  // namespace

TEST_CASE("ingest_catalog keeps order and values for valid records") {
    TempDir dir;
    const auto path = dir.file("catalog.jsonl");
    testutil::write_text(path, item_line(3, "[1.0,0.0]", "[0.5,0.5]") + "\n" +
                                   item_line(1, "[0.0,1.0]", "[0.25,0.75]") + "\n");
    const Catalog catalog = ingest_catalog(path);
    REQUIRE(catalog.size() == 2);
    CHECK(catalog.at(0).id == 3);
    CHECK(catalog.at(1).id == 1);
    CHECK(catalog.at(0).category == "jazz");
    CHECK(catalog.at(0).price == doctest::Approx(12.5));
    CHECK(catalog.at(0).semantic_embedding[0] == doctest::Approx(1.0));
    CHECK(catalog.at(1).retrieval_embedding[1] == doctest::Approx(0.75));
    CHECK(catalog.semantic_dim() == 2);
    CHECK(catalog.retrieval_dim() == 2);
}

TEST_CASE("ingest_catalog rejects duplicate ids naming the id") {
    TempDir dir;
    const auto path = dir.file("catalog.jsonl");
    testutil::write_text(path, item_line(7, "[1.0]", "[1.0]") + "\n" +
                                   item_line(7, "[2.0]", "[1.0]") + "\n");
    CHECK_THROWS_WITH_AS(ingest_catalog(path), doctest::Contains("7"), ParseError);
}

TEST_CASE("ingest_catalog rejects inconsistent embedding lengths naming the line") {
    TempDir dir;
    const auto path = dir.file("catalog.jsonl");
    testutil::write_text(path, item_line(0, "[1.0,0.0,0.0]", "[1.0]") + "\n" +
                                   item_line(1, "[1.0,0.0]", "[1.0]") + "\n");
    CHECK_THROWS_WITH_AS(ingest_catalog(path), doctest::Contains("line 2"), ParseError);
}

TEST_CASE("ingest_catalog names a missing field and its line") {
    TempDir dir;
    const auto path = dir.file("catalog.jsonl");
    testutil::write_text(
        path, R"({"id":0,"category":"jazz","subcategory":"club","genre":"bebop",)"
              R"("venue_id":"v1","venue_type":"club","price":1.0,"popularity":1,)"
              R"("compliant":true,"semantic_embedding":[1.0]})"
              "\n");
    CHECK_THROWS_WITH_AS(ingest_catalog(path), doctest::Contains("retrieval_embedding"),
                         ParseError);
}

TEST_CASE("ingest_users returns profiles in file order") {
    TempDir dir;
    const auto path = dir.file("users.jsonl");
    std::string lines;
    for (int id : {4, 2, 9}) {
        lines += R"({"id":)" + std::to_string(id) +
                 R"(,"retrieval_embedding":[1.0,0.0],"remaining_credit":100.0,"history":[]})"
                 "\n";
    }
    testutil::write_text(path, lines);
    const auto users = ingest_users(path);
    REQUIRE(users.size() == 3);
    CHECK(users[0].id == 4);
    CHECK(users[1].id == 2);
    CHECK(users[2].id == 9);
}

TEST_CASE("ingest_users rejects negative remaining_credit") {
    TempDir dir;
    const auto path = dir.file("users.jsonl");
    testutil::write_text(
        path,
        R"({"id":0,"retrieval_embedding":[1.0],"remaining_credit":-1.0,"history":[]})" "\n");
    CHECK_THROWS_AS(ingest_users(path), ParseError);
}

TEST_CASE("ingest_users accepts an empty file as an empty sequence") {
    TempDir dir;
    const auto path = dir.file("users.jsonl");
    testutil::write_text(path, "");
    CHECK(ingest_users(path).empty());
}

TEST_CASE("catalog construction enforces invariants") {
    const Eigen::VectorXd s = vec({1.0, 0.0});
    const Eigen::VectorXd r = vec({1.0});
    CHECK_THROWS_AS(Catalog(std::vector<Item>{}), ConfigError);

    std::vector<Item> dup{testutil::make_item(1, s, r), testutil::make_item(1, s, r)};
    CHECK_THROWS_AS(Catalog{dup}, ConfigError);

    std::vector<Item> mixed{testutil::make_item(0, s, r),
                            testutil::make_item(1, vec({1.0, 0.0, 0.0}), r)};
    CHECK_THROWS_AS(Catalog{mixed}, DimensionError);
}

TEST_CASE("catalog and user serialization round-trips byte-stable") {
    SynthConfig config;
    config.n_items = 40;
    config.n_users = 6;
    config.n_categories = 4;
    config.semantic_dim = 16;
    config.retrieval_dim = 8;
    const SyntheticData data = generate_synthetic(config, 11);

    TempDir dir;
    write_catalog(data.catalog, dir.file("catalog.jsonl"));
    write_users(data.users, dir.file("users.jsonl"));
    const Catalog reread = ingest_catalog(dir.file("catalog.jsonl"));
    const auto users = ingest_users(dir.file("users.jsonl"));
    write_catalog(reread, dir.file("catalog2.jsonl"));
    write_users(users, dir.file("users2.jsonl"));

    CHECK(testutil::read_text(dir.file("catalog.jsonl")) ==
          testutil::read_text(dir.file("catalog2.jsonl")));
    CHECK(testutil::read_text(dir.file("users.jsonl")) ==
          testutil::read_text(dir.file("users2.jsonl")));
}

TEST_CASE("generate_synthetic is a pure function of config and seed") {
    SynthConfig config;
    config.n_items = 100;
    config.n_users = 10;
    config.semantic_dim = 24;
    config.retrieval_dim = 8;
    const SyntheticData a = generate_synthetic(config, 42);
    const SyntheticData b = generate_synthetic(config, 42);

    TempDir dir;
    write_catalog(a.catalog, dir.file("a_cat.jsonl"));
    write_catalog(b.catalog, dir.file("b_cat.jsonl"));
    write_users(a.users, dir.file("a_users.jsonl"));
    write_users(b.users, dir.file("b_users.jsonl"));
    CHECK(testutil::read_text(dir.file("a_cat.jsonl")) ==
          testutil::read_text(dir.file("b_cat.jsonl")));
    CHECK(testutil::read_text(dir.file("a_users.jsonl")) ==
          testutil::read_text(dir.file("b_users.jsonl")));

    const SyntheticData c = generate_synthetic(config, 43);
    TempDir dir2;
    write_catalog(c.catalog, dir2.file("c_cat.jsonl"));
    CHECK(testutil::read_text(dir.file("a_cat.jsonl")) !=
          testutil::read_text(dir2.file("c_cat.jsonl")));
}

TEST_CASE("generate_synthetic rejects empty configurations") {
    SynthConfig config;
    config.n_items = 0;
    CHECK_THROWS_AS(generate_synthetic(config, 1), ConfigError);
}

TEST_CASE("generate_synthetic draws categories from the configured label set") {
    SynthConfig config;
    config.n_items = 100;
    config.n_users = 2;
    config.n_categories = 5;
    config.semantic_dim = 12;
    config.retrieval_dim = 6;
    const SyntheticData data = generate_synthetic(config, 1);
    std::set<std::string> allowed;
    for (int c = 0; c < 5; ++c) allowed.insert("cat_" + std::to_string(c));
    for (const Item& item : data.catalog.items()) {
        CHECK(allowed.count(item.category) == 1);
    }
}

TEST_CASE("synthetic histories reference existing items with matching snapshots") {
    SynthConfig config;
    config.n_items = 60;
    config.n_users = 12;
    config.n_categories = 4;
    config.semantic_dim = 12;
    config.retrieval_dim = 6;
    const SyntheticData data = generate_synthetic(config, 3);
    for (const UserProfile& user : data.users) {
        CHECK(user.history.size() >= static_cast<std::size_t>(config.min_history));
        CHECK(user.history.size() <= static_cast<std::size_t>(config.max_history));
        for (const InteractionRecord& rec : user.history) {
            const Item* item = data.catalog.find(rec.item_id);
            REQUIRE(item != nullptr);
            CHECK(rec.category == item->category);
            CHECK(rec.subcategory == item->subcategory);
            CHECK(rec.genre == item->genre);
            CHECK(rec.venue_id == item->venue_id);
            CHECK(rec.venue_type == item->venue_type);
        }
    }
}

TEST_CASE("synthetic embeddings are unit rows with cluster structure") {
    SynthConfig config;
    config.n_items = 80;
    config.n_users = 2;
    config.n_categories = 4;
    config.semantic_dim = 32;
    config.retrieval_dim = 8;
    const SyntheticData data = generate_synthetic(config, 5);

    double within = 0.0, across = 0.0;
    int n_within = 0, n_across = 0;
    const auto& items = data.catalog.items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(items[i].semantic_embedding.norm() == doctest::Approx(1.0).epsilon(1e-9));
        for (std::size_t j = i + 1; j < items.size(); ++j) {
            const double dot = items[i].semantic_embedding.dot(items[j].semantic_embedding);
            if (items[i].category == items[j].category) {
                within += dot;
                ++n_within;
            } else {
                across += dot;
                ++n_across;
            }
        }
    }
    REQUIRE(n_within > 0);
    REQUIRE(n_across > 0);
    CHECK(within / n_within > across / n_across + 0.5);
}
