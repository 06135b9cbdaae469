#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace divrec {

/// Attribute snapshot of one past interaction.
struct InteractionRecord {
    std::int64_t item_id = 0;
    std::string category;
    std::string subcategory;
    std::string genre;
    std::string venue_id;
    std::string venue_type;
};

struct Item {
    std::int64_t id = 0;
    std::string category;
    std::string subcategory;
    std::string genre;
    std::string venue_id;
    std::string venue_type;
    double price = 0.0;          // euros, >= 0
    std::int64_t popularity = 0; // historical interaction count, >= 0
    bool compliant = true;
    Eigen::VectorXd semantic_embedding;
    Eigen::VectorXd retrieval_embedding;
};

struct UserProfile {
    std::int64_t id = 0;
    Eigen::VectorXd retrieval_embedding;
    double remaining_credit = 0.0; // euros, >= 0
    std::vector<InteractionRecord> history;
};

/// Immutable item universe. Construction enforces the invariants: at least
/// one item, unique non-negative ids, consistent embedding dimensions,
/// non-negative prices and popularities.
class Catalog {
public:
    explicit Catalog(std::vector<Item> items);

    const std::vector<Item>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    Eigen::Index semantic_dim() const { return semantic_dim_; }
    Eigen::Index retrieval_dim() const { return retrieval_dim_; }

    const Item& at(std::size_t index) const { return items_.at(index); }
    const Item* find(std::int64_t id) const;
    bool contains(std::int64_t id) const { return find(id) != nullptr; }
    /// Throws ConfigError if the id is unknown.
    std::size_t index_of(std::int64_t id) const;

    /// N x D matrix of semantic embeddings, row i = items()[i].
    Eigen::MatrixXd semantic_matrix() const;
    /// N x d_r matrix of retrieval embeddings, row i = items()[i].
    Eigen::MatrixXd retrieval_matrix() const;

private:
    std::vector<Item> items_;
    std::unordered_map<std::int64_t, std::size_t> index_;
    Eigen::Index semantic_dim_ = 0;
    Eigen::Index retrieval_dim_ = 0;
};

struct SynthConfig {
    int n_items = 5000;
    int n_users = 500;
    /// Sized so a 300-candidate retrieval pool cannot be filled by a single
    /// category (~280 items each at the default catalog size); cross-category
    /// candidates are what the DPP stage trades relevance against.
    int n_categories = 18;
    int semantic_dim = 384;
    int retrieval_dim = 32;
    /// Expected noise norm around a category center before row
    /// normalization; per-coordinate sigma is semantic_noise / sqrt(D).
    double semantic_noise = 0.3;
    double retrieval_noise = 1.0;
    /// Noise norm for placing a user near their home cluster center.
    double user_noise = 0.5;
    double zipf_exponent = 1.1;
    int subcategories_per_category = 3;
    int genres_per_category = 4;
    int venues_per_category = 8;
    int venue_types = 6;
    int min_history = 2;
    int max_history = 8;
    /// Probability that a history draw comes from the user's home category.
    double home_history_bias = 0.7;
    double noncompliant_rate = 0.03;
};

struct SyntheticData {
    Catalog catalog;
    std::vector<UserProfile> users;
};

/// Reads one item per line in the JSONL schema. Rejects duplicate ids,
/// inconsistent embedding lengths and missing fields, naming the offender.
Catalog ingest_catalog(const std::filesystem::path& path);

/// Reads one user per line; an empty file is a valid empty sequence.
std::vector<UserProfile> ingest_users(const std::filesystem::path& path);

void write_catalog(const Catalog& catalog, const std::filesystem::path& path);
void write_users(const std::vector<UserProfile>& users,
                 const std::filesystem::path& path);

/// Deterministic synthetic data: clustered embeddings (one cluster per
/// category in both semantic and retrieval space), Zipf-profiled popularity
/// and user histories drawn near each user's home cluster.
SyntheticData generate_synthetic(const SynthConfig& config, std::uint64_t seed);

}  // namespace divrec
