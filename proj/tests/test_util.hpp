#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "divrec/catalog.hpp"

namespace testutil {

/// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("divrec_test_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path);
    os << content;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

inline Eigen::VectorXd vec(const std::vector<double>& values) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = values[i];
    }
    return out;
}

/// Minimal valid item with 3-dim embeddings; fields overridable after the call.
inline divrec::Item make_item(std::int64_t id, const Eigen::VectorXd& semantic,
                              const Eigen::VectorXd& retrieval) {
    divrec::Item item;
    item.id = id;
    item.category = "cat_a";
    item.subcategory = "sub_a";
    item.genre = "genre_a";
    item.venue_id = "venue_a";
    item.venue_type = "type_a";
    item.price = 10.0;
    item.popularity = 5;
    item.compliant = true;
    item.semantic_embedding = semantic;
    item.retrieval_embedding = retrieval;
    return item;
}

}  // namespace testutil
