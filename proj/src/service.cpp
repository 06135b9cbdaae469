#include "divrec/service.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <random>
#include <string>

#include "httplib.h"
#include "json.hpp"

#include "divrec/errors.hpp"
#include "divrec/pipeline.hpp"
#include "divrec/rng.hpp"

namespace divrec {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string error_body(const std::string& message) {
    ordered_json body;
    body["error"] = message;
    return body.dump();
}

template <typename T>
std::optional<T> parse_number(const std::string& text) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return value;
}

}  // namespace

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open service config " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(is);
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }

    ServiceConfig config;
    try {
        if (!doc.contains("catalog") || !doc.contains("users")) {
            throw ConfigError(path.string() + ": 'catalog' and 'users' paths are required");
        }
        config.catalog_path = doc.at("catalog").get<std::string>();
        config.users_path = doc.at("users").get<std::string>();
        if (doc.contains("reduced")) config.reduced_path = doc.at("reduced").get<std::string>();
        if (doc.contains("host")) config.host = doc.at("host").get<std::string>();
        if (doc.contains("port")) config.port = doc.at("port").get<int>();
        if (doc.contains("retrieval_size"))
            config.retrieval_size = doc.at("retrieval_size").get<int>();
        if (doc.contains("dpp_size")) config.dpp_size = doc.at("dpp_size").get<int>();
        if (doc.contains("default_variant"))
            config.default_variant = parse_variant(doc.at("default_variant").get<std::string>());
        if (doc.contains("reduce_to")) config.reduce_to = doc.at("reduce_to").get<int>();
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(path.string() + ": " + ex.what());
    }
    if (config.port < 1 || config.port > 65535) {
        throw ConfigError(path.string() + ": port must lie in [1, 65535]");
    }
    if (config.retrieval_size < 1 || config.dpp_size < 1 ||
        config.dpp_size > config.retrieval_size) {
        throw ConfigError(path.string() + ": need 1 <= dpp_size <= retrieval_size");
    }
    if (config.reduce_to < 1) throw ConfigError(path.string() + ": reduce_to must be >= 1");
    return config;
}

RecommendationService::RecommendationService(const ServiceConfig& config)
    : config_(config),
      catalog_(ingest_catalog(config.catalog_path)),
      users_(ingest_users(config.users_path)) {
    for (std::size_t i = 0; i < users_.size(); ++i) {
        user_index_.emplace(users_[i].id, i);
    }
    if (!config_.reduced_path.empty()) {
        reduced_ = load_reduced_embeddings(config_.reduced_path, catalog_);
    } else {
        const EmbeddingMatrix full = catalog_.semantic_matrix();
        const int d = std::min<int>(config_.reduce_to, static_cast<int>(full.cols()));
        const ReductionModel model = fit_reduction(full, d);
        reduced_ = project(model, full);
    }
    std::random_device rd;
    entropy_ = mix64((static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^
                     static_cast<std::uint64_t>(
                         std::chrono::steady_clock::now().time_since_epoch().count()));
}

RecommendationService::Response RecommendationService::recommend(
    std::int64_t user_id, const std::optional<std::string>& variant,
    const std::optional<std::string>& size, const std::optional<std::string>& seed) const {
    const auto user_it = user_index_.find(user_id);
    if (user_it == user_index_.end()) {
        return {404, error_body("unknown user id " + std::to_string(user_id))};
    }
    const UserProfile& user = users_[user_it->second];

    PipelineConfig pipeline_config;
    pipeline_config.retrieval_size = config_.retrieval_size;
    pipeline_config.dpp_size = config_.dpp_size;
    pipeline_config.variant = config_.default_variant;

    if (variant) {
        try {
            pipeline_config.variant = parse_variant(*variant);
        } catch (const ConfigError&) {
            return {400, error_body("unknown variant '" + *variant + "'")};
        }
    }
    if (size) {
        const auto parsed = parse_number<int>(*size);
        if (!parsed || *parsed < 1 || *parsed > config_.retrieval_size) {
            return {400, error_body("size must be an integer in [1, " +
                                    std::to_string(config_.retrieval_size) + "]")};
        }
        pipeline_config.dpp_size = *parsed;
    }
    if (seed) {
        const auto parsed = parse_number<std::uint64_t>(*seed);
        if (!parsed) return {400, error_body("seed must be a non-negative integer")};
        pipeline_config.seed = *parsed;
    } else {
        pipeline_config.seed =
            derive_seed(entropy_, {request_counter_.fetch_add(1, std::memory_order_relaxed)});
    }

    RecommendationSet result;
    try {
        result = divrec::recommend(user, catalog_, reduced_, pipeline_config);
    } catch (const RankError& ex) {
        return {422, error_body(ex.what())};
    } catch (const DegeneracyError& ex) {
        return {422, error_body(ex.what())};
    } catch (const ZeroVectorError& ex) {
        return {422, error_body(ex.what())};
    } catch (const Error& ex) {
        return {500, error_body(ex.what())};
    }

    ordered_json body;
    body["user_id"] = result.user_id;
    body["variant"] = std::string(1, variant_label(result.variant));
    body["seed"] = result.seed;
    body["items"] = ordered_json::array();
    for (std::int64_t id : result.item_ids) {
        const Item& item = catalog_.items()[catalog_.index_of(id)];
        ordered_json entry;
        entry["id"] = item.id;
        entry["category"] = item.category;
        entry["popularity"] = item.popularity;
        body["items"].push_back(std::move(entry));
    }
    return {200, body.dump()};
}

RecommendationService::Response RecommendationService::health() const {
    ordered_json body;
    body["status"] = "ok";
    body["items"] = catalog_.size();
    body["users"] = users_.size();
    return {200, body.dump()};
}

void RecommendationService::install(httplib::Server& server) const {
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
        const Response out = health();
        res.status = out.status;
        res.set_content(out.body, "application/json");
    });
    server.Get(R"(/v1/recommendations/(\d+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                   std::optional<std::string> variant, size, seed;
                   if (req.has_param("variant")) variant = req.get_param_value("variant");
                   if (req.has_param("size")) size = req.get_param_value("size");
                   if (req.has_param("seed")) seed = req.get_param_value("seed");
                   const auto user_id = parse_number<std::int64_t>(req.matches[1].str());
                   Response out =
                       user_id ? recommend(*user_id, variant, size, seed)
                               : Response{400, error_body("user id out of range")};
                   res.status = out.status;
                   res.set_content(out.body, "application/json");
               });
}

void serve(const ServiceConfig& config) {
    RecommendationService service(config);
    httplib::Server server;
    service.install(server);
    if (!server.listen(config.host, config.port)) {
        throw ConfigError("failed to listen on " + config.host + ":" +
                          std::to_string(config.port));
    }
}

}  // namespace divrec
