#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"
#include "divrec/kernel.hpp"

namespace httplib {
class Server;
}

namespace divrec {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path catalog_path;
    std::filesystem::path users_path;
    std::filesystem::path reduced_path;  // optional; PCA runs at startup if empty
    int retrieval_size = 1000;
    int dpp_size = 60;
    Variant default_variant = Variant::B;
    int reduce_to = 64;  // PCA target dimension for the fallback
};

/// Reads a JSON config file. Only catalog/users are required; everything
/// else falls back to the defaults above.
ServiceConfig load_service_config(const std::filesystem::path& path);

/// Read-only recommendation engine behind the HTTP endpoints. All data is
/// loaded (and embeddings reduced, if no precomputed file is given) at
/// construction; request handling is stateless apart from the counter that
/// feeds fresh seeds, so concurrent handlers are safe.
class RecommendationService {
public:
    explicit RecommendationService(const ServiceConfig& config);

    struct Response {
        int status = 200;
        std::string body;  // JSON
    };

    /// Core of GET /v1/recommendations/{user_id}. Query parameters arrive as
    /// raw strings; malformed values yield 400, unknown users 404, and
    /// degenerate sampling states 422. When no seed is supplied a fresh one
    /// is drawn and echoed in the body, so any response can be replayed.
    Response recommend(std::int64_t user_id, const std::optional<std::string>& variant,
                       const std::optional<std::string>& size,
                       const std::optional<std::string>& seed) const;

    /// Core of GET /v1/health.
    Response health() const;

    void install(httplib::Server& server) const;

    const Catalog& catalog() const { return catalog_; }
    const std::vector<UserProfile>& users() const { return users_; }

private:
    ServiceConfig config_;
    Catalog catalog_;
    std::vector<UserProfile> users_;
    std::unordered_map<std::int64_t, std::size_t> user_index_;
    EmbeddingMatrix reduced_;
    std::uint64_t entropy_;
    mutable std::atomic<std::uint64_t> request_counter_{0};
};

/// Blocking entry point: builds the service and listens on config.host:port.
void serve(const ServiceConfig& config);

}  // namespace divrec
