#include "divrec/service.hpp"

#include <optional>
#include <set>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "divrec/errors.hpp"
#include "test_util.hpp"

using namespace divrec;

namespace {

struct ServiceFixture {
    testutil::TempDir dir;
    SyntheticData data;
    ServiceConfig config;

    ServiceFixture() : data(make_data()) {
        write_catalog(data.catalog, dir.path() / "catalog.jsonl");
        write_users(data.users, dir.path() / "users.jsonl");
        config.catalog_path = dir.path() / "catalog.jsonl";
        config.users_path = dir.path() / "users.jsonl";
        config.retrieval_size = 40;
        config.dpp_size = 8;
        config.reduce_to = 8;
    }

    static SyntheticData make_data() {
        SynthConfig synth;
        synth.n_items = 80;
        synth.n_users = 6;
        synth.n_categories = 4;
        synth.semantic_dim = 16;
        synth.retrieval_dim = 8;
        return generate_synthetic(synth, 19);
    }
};

}  // namespace

TEST_CASE("service config file supplies paths and overrides") {
    ServiceFixture fx;
    const auto config_path = fx.dir.path() / "service.json";
    nlohmann::ordered_json doc;
    doc["catalog"] = fx.config.catalog_path.string();
    doc["users"] = fx.config.users_path.string();
    doc["host"] = "0.0.0.0";
    doc["port"] = 9999;
    doc["retrieval_size"] = 50;
    doc["dpp_size"] = 10;
    doc["default_variant"] = "C";
    doc["reduce_to"] = 12;
    testutil::write_text(config_path, doc.dump());

    const ServiceConfig loaded = load_service_config(config_path);
    CHECK(loaded.host == "0.0.0.0");
    CHECK(loaded.port == 9999);
    CHECK(loaded.retrieval_size == 50);
    CHECK(loaded.dpp_size == 10);
    CHECK(loaded.default_variant == Variant::C);
    CHECK(loaded.reduce_to == 12);
    CHECK(loaded.catalog_path == fx.config.catalog_path);

    nlohmann::ordered_json missing;
    missing["catalog"] = fx.config.catalog_path.string();
    testutil::write_text(config_path, missing.dump());
    CHECK_THROWS_AS(load_service_config(config_path), ConfigError);

    testutil::write_text(config_path, "{not json");
    CHECK_THROWS_AS(load_service_config(config_path), ParseError);

    nlohmann::ordered_json bad_sizes = doc;
    bad_sizes["dpp_size"] = 500;
    testutil::write_text(config_path, bad_sizes.dump());
    CHECK_THROWS_AS(load_service_config(config_path), ConfigError);
}

TEST_CASE("explicit seeds replay byte-identically") {
    ServiceFixture fx;
    const RecommendationService service(fx.config);
    const std::int64_t uid = fx.data.users[0].id;

    const auto first = service.recommend(uid, "B", "5", "123");
    const auto second = service.recommend(uid, "B", "5", "123");
    REQUIRE(first.status == 200);
    CHECK(first.body == second.body);

    const auto body = nlohmann::json::parse(first.body);
    CHECK(body.at("user_id").get<std::int64_t>() == uid);
    CHECK(body.at("variant").get<std::string>() == "B");
    CHECK(body.at("seed").get<std::uint64_t>() == 123);
    REQUIRE(body.at("items").is_array());
    CHECK(body.at("items").size() <= 5);
    CHECK(body.at("items").size() >= 1);
    for (const auto& entry : body.at("items")) {
        const std::int64_t id = entry.at("id").get<std::int64_t>();
        const Item* item = service.catalog().find(id);
        REQUIRE(item != nullptr);
        CHECK(entry.at("category").get<std::string>() == item->category);
        CHECK(entry.at("popularity").get<std::int64_t>() == item->popularity);
    }
}

TEST_CASE("unknown users and malformed parameters are rejected") {
    ServiceFixture fx;
    const RecommendationService service(fx.config);
    const std::int64_t uid = fx.data.users[0].id;

    CHECK(service.recommend(10000000, std::nullopt, std::nullopt, std::nullopt).status == 404);
    CHECK(service.recommend(uid, std::nullopt, "0", std::nullopt).status == 400);
    CHECK(service.recommend(uid, std::nullopt, "500", std::nullopt).status == 400);
    CHECK(service.recommend(uid, std::nullopt, "seven", std::nullopt).status == 400);
    CHECK(service.recommend(uid, "Z", std::nullopt, std::nullopt).status == 400);
    CHECK(service.recommend(uid, std::nullopt, std::nullopt, "abc").status == 400);
    CHECK(service.recommend(uid, std::nullopt, std::nullopt, "-1").status == 400);

    const auto err = service.recommend(10000000, std::nullopt, std::nullopt, std::nullopt);
    const auto body = nlohmann::json::parse(err.body);
    CHECK(body.contains("error"));
}

TEST_CASE("health reports the loaded corpus and never changes") {
    ServiceFixture fx;
    const RecommendationService service(fx.config);
    const auto first = service.health();
    REQUIRE(first.status == 200);
    const auto body = nlohmann::json::parse(first.body);
    CHECK(body.at("status").get<std::string>() == "ok");
    CHECK(body.at("items").get<std::size_t>() == 80);
    CHECK(body.at("users").get<std::size_t>() == 6);
    CHECK(service.health().body == first.body);
}

TEST_CASE("omitted seeds are drawn fresh and echoed for replay") {
    ServiceFixture fx;
    const RecommendationService service(fx.config);
    const std::int64_t uid = fx.data.users[1].id;

    const auto first = service.recommend(uid, "B", "6", std::nullopt);
    REQUIRE(first.status == 200);
    const auto parsed = nlohmann::json::parse(first.body);
    const std::uint64_t seed = parsed.at("seed").get<std::uint64_t>();

    const auto replay = service.recommend(uid, "B", "6", std::to_string(seed));
    CHECK(replay.body == first.body);

    const auto next = nlohmann::json::parse(
        service.recommend(uid, "B", "6", std::nullopt).body);
    CHECK(next.at("seed").get<std::uint64_t>() != seed);
}

TEST_CASE("default variant comes from the service config") {
    ServiceFixture fx;
    fx.config.default_variant = Variant::C;
    const RecommendationService service(fx.config);
    const auto res = service.recommend(fx.data.users[2].id, std::nullopt, "4", "7");
    REQUIRE(res.status == 200);
    CHECK(nlohmann::json::parse(res.body).at("variant").get<std::string>() == "C");
}

TEST_CASE("http round-trip over a live socket") {
    ServiceFixture fx;
    const RecommendationService service(fx.config);
    httplib::Server server;
    service.install(server);

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread runner([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const std::int64_t uid = fx.data.users[0].id;

    const auto health = client.Get("/v1/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->body == service.health().body);

    const std::string path =
        "/v1/recommendations/" + std::to_string(uid) + "?variant=B&size=5&seed=9";
    const auto rec = client.Get(path);
    REQUIRE(rec);
    CHECK(rec->status == 200);
    CHECK(rec->body == service.recommend(uid, "B", "5", "9").body);

    const auto missing = client.Get("/v1/recommendations/9999999?seed=1");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    const auto garbled = client.Get("/v1/recommendations/not-a-number");
    REQUIRE(garbled);
    CHECK(garbled->status == 404);  // route regex only admits digits

    server.stop();
    runner.join();
}
