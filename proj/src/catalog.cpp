#include "divrec/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "divrec/errors.hpp"
#include "divrec/rng.hpp"

namespace divrec {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.filename().string() + " line " + std::to_string(line);
}

const json& require_field(const json& record, const char* field,
                          const std::filesystem::path& path, std::size_t line) {
    auto it = record.find(field);
    if (it == record.end()) {
        throw ParseError(where(path, line) + ": missing field \"" +
                         std::string(field) + "\"");
    }
    return *it;
}

Eigen::VectorXd parse_vector(const json& value, const char* field,
                             const std::filesystem::path& path, std::size_t line) {
    if (!value.is_array()) {
        throw ParseError(where(path, line) + ": field \"" + std::string(field) +
                         "\" must be an array of numbers");
    }
    Eigen::VectorXd out(value.size());
    Eigen::Index i = 0;
    for (const auto& entry : value) {
        if (!entry.is_number()) {
            throw ParseError(where(path, line) + ": field \"" + std::string(field) +
                             "\" must be an array of numbers");
        }
        out[i++] = entry.get<double>();
    }
    return out;
}

void check_dim(const Eigen::VectorXd& v, Eigen::Index expected, const char* field,
               const std::filesystem::path& path, std::size_t line) {
    if (expected >= 0 && v.size() != expected) {
        throw ParseError(where(path, line) + ": " + std::string(field) + " has length " +
                         std::to_string(v.size()) + ", expected " +
                         std::to_string(expected));
    }
}

Item parse_item(const json& record, const std::filesystem::path& path,
                std::size_t line) {
    Item item;
    item.id = require_field(record, "id", path, line).get<std::int64_t>();
    item.category = require_field(record, "category", path, line).get<std::string>();
    item.subcategory = require_field(record, "subcategory", path, line).get<std::string>();
    item.genre = require_field(record, "genre", path, line).get<std::string>();
    item.venue_id = require_field(record, "venue_id", path, line).get<std::string>();
    item.venue_type = require_field(record, "venue_type", path, line).get<std::string>();
    item.price = require_field(record, "price", path, line).get<double>();
    item.popularity = require_field(record, "popularity", path, line).get<std::int64_t>();
    item.compliant = require_field(record, "compliant", path, line).get<bool>();
    item.semantic_embedding =
        parse_vector(require_field(record, "semantic_embedding", path, line),
                     "semantic_embedding", path, line);
    item.retrieval_embedding =
        parse_vector(require_field(record, "retrieval_embedding", path, line),
                     "retrieval_embedding", path, line);
    if (item.id < 0) {
        throw ParseError(where(path, line) + ": id must be non-negative, got " +
                         std::to_string(item.id));
    }
    if (item.price < 0.0) {
        throw ParseError(where(path, line) + ": price must be non-negative");
    }
    if (item.popularity < 0) {
        throw ParseError(where(path, line) + ": popularity must be non-negative");
    }
    return item;
}

UserProfile parse_user(const json& record, const std::filesystem::path& path,
                       std::size_t line) {
    UserProfile user;
    user.id = require_field(record, "id", path, line).get<std::int64_t>();
    user.retrieval_embedding =
        parse_vector(require_field(record, "retrieval_embedding", path, line),
                     "retrieval_embedding", path, line);
    user.remaining_credit =
        require_field(record, "remaining_credit", path, line).get<double>();
    if (user.id < 0) {
        throw ParseError(where(path, line) + ": id must be non-negative, got " +
                         std::to_string(user.id));
    }
    if (user.remaining_credit < 0.0) {
        throw ParseError(where(path, line) + ": remaining_credit must be non-negative");
    }
    const json& history = require_field(record, "history", path, line);
    if (!history.is_array()) {
        throw ParseError(where(path, line) + ": field \"history\" must be an array");
    }
    for (const auto& entry : history) {
        InteractionRecord rec;
        rec.item_id = require_field(entry, "item_id", path, line).get<std::int64_t>();
        rec.category = require_field(entry, "category", path, line).get<std::string>();
        rec.subcategory = require_field(entry, "subcategory", path, line).get<std::string>();
        rec.genre = require_field(entry, "genre", path, line).get<std::string>();
        rec.venue_id = require_field(entry, "venue_id", path, line).get<std::string>();
        rec.venue_type = require_field(entry, "venue_type", path, line).get<std::string>();
        for (const std::string* field :
             {&rec.category, &rec.subcategory, &rec.genre, &rec.venue_id, &rec.venue_type}) {
            if (field->empty()) {
                throw ParseError(where(path, line) +
                                 ": history attribute fields must be non-empty");
            }
        }
        user.history.push_back(std::move(rec));
    }
    return user;
}

json parse_line(const std::string& line, const std::filesystem::path& path,
                std::size_t line_no) {
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        throw ParseError(where(path, line_no) + ": not a valid JSON object");
    }
    return record;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
    ordered_json arr = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path.string());
    }
    return out;
}

}  // namespace

Catalog::Catalog(std::vector<Item> items) : items_(std::move(items)) {
    if (items_.empty()) {
        throw ConfigError("a catalog must contain at least one item");
    }
    semantic_dim_ = items_.front().semantic_embedding.size();
    retrieval_dim_ = items_.front().retrieval_embedding.size();
    index_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const Item& item = items_[i];
        if (item.id < 0) {
            throw ConfigError("item id must be non-negative, got " +
                              std::to_string(item.id));
        }
        if (item.semantic_embedding.size() != semantic_dim_ ||
            item.retrieval_embedding.size() != retrieval_dim_) {
            throw DimensionError("item " + std::to_string(item.id) +
                                 " has inconsistent embedding dimensions");
        }
        if (item.price < 0.0 || item.popularity < 0) {
            throw ConfigError("item " + std::to_string(item.id) +
                              " has negative price or popularity");
        }
        if (!index_.emplace(item.id, i).second) {
            throw ConfigError("duplicate item id " + std::to_string(item.id));
        }
    }
}

const Item* Catalog::find(std::int64_t id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &items_[it->second];
}

std::size_t Catalog::index_of(std::int64_t id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        throw ConfigError("unknown item id " + std::to_string(id));
    }
    return it->second;
}

Eigen::MatrixXd Catalog::semantic_matrix() const {
    Eigen::MatrixXd m(items_.size(), semantic_dim_);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = items_[i].semantic_embedding;
    }
    return m;
}

Eigen::MatrixXd Catalog::retrieval_matrix() const {
    Eigen::MatrixXd m(items_.size(), retrieval_dim_);
    for (std::size_t i = 0; i < items_.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = items_[i].retrieval_embedding;
    }
    return m;
}

Catalog ingest_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open catalog file: " + path.string());
    }
    std::vector<Item> items;
    std::unordered_map<std::int64_t, std::size_t> seen;
    Eigen::Index semantic_dim = -1;
    Eigen::Index retrieval_dim = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        Item item = parse_item(parse_line(line, path, line_no), path, line_no);
        check_dim(item.semantic_embedding, semantic_dim, "semantic_embedding", path, line_no);
        check_dim(item.retrieval_embedding, retrieval_dim, "retrieval_embedding", path, line_no);
        if (semantic_dim < 0) {
            semantic_dim = item.semantic_embedding.size();
            retrieval_dim = item.retrieval_embedding.size();
        }
        auto [it, inserted] = seen.emplace(item.id, line_no);
        if (!inserted) {
            throw ParseError(where(path, line_no) + ": duplicate item id " +
                             std::to_string(item.id) + " (first seen on line " +
                             std::to_string(it->second) + ")");
        }
        items.push_back(std::move(item));
    }
    if (items.empty()) {
        throw ParseError(path.filename().string() + ": catalog file contains no items");
    }
    return Catalog(std::move(items));
}

std::vector<UserProfile> ingest_users(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open users file: " + path.string());
    }
    std::vector<UserProfile> users;
    std::unordered_map<std::int64_t, std::size_t> seen;
    Eigen::Index retrieval_dim = -1;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        UserProfile user = parse_user(parse_line(line, path, line_no), path, line_no);
        check_dim(user.retrieval_embedding, retrieval_dim, "retrieval_embedding", path, line_no);
        retrieval_dim = user.retrieval_embedding.size();
        auto [it, inserted] = seen.emplace(user.id, line_no);
        if (!inserted) {
            throw ParseError(where(path, line_no) + ": duplicate user id " +
                             std::to_string(user.id) + " (first seen on line " +
                             std::to_string(it->second) + ")");
        }
        users.push_back(std::move(user));
    }
    return users;
}

void write_catalog(const Catalog& catalog, const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    for (const Item& item : catalog.items()) {
        ordered_json record;
        record["id"] = item.id;
        record["category"] = item.category;
        record["subcategory"] = item.subcategory;
        record["genre"] = item.genre;
        record["venue_id"] = item.venue_id;
        record["venue_type"] = item.venue_type;
        record["price"] = item.price;
        record["popularity"] = item.popularity;
        record["compliant"] = item.compliant;
        record["semantic_embedding"] = vector_to_json(item.semantic_embedding);
        record["retrieval_embedding"] = vector_to_json(item.retrieval_embedding);
        out << record.dump() << '\n';
    }
}

void write_users(const std::vector<UserProfile>& users,
                 const std::filesystem::path& path) {
    std::ofstream out = open_for_write(path);
    for (const UserProfile& user : users) {
        ordered_json record;
        record["id"] = user.id;
        record["retrieval_embedding"] = vector_to_json(user.retrieval_embedding);
        record["remaining_credit"] = user.remaining_credit;
        ordered_json history = ordered_json::array();
        for (const InteractionRecord& rec : user.history) {
            ordered_json entry;
            entry["item_id"] = rec.item_id;
            entry["category"] = rec.category;
            entry["subcategory"] = rec.subcategory;
            entry["genre"] = rec.genre;
            entry["venue_id"] = rec.venue_id;
            entry["venue_type"] = rec.venue_type;
            history.push_back(std::move(entry));
        }
        record["history"] = std::move(history);
        out << record.dump() << '\n';
    }
}

namespace {

/// Unit vector drawn uniformly on the sphere in R^dim.
Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
    Eigen::VectorXd v(dim);
    double norm2 = 0.0;
    do {
        for (int i = 0; i < dim; ++i) {
            v[i] = rng.normal();
        }
        norm2 = v.squaredNorm();
    } while (norm2 == 0.0);
    return v / std::sqrt(norm2);
}

/// Center plus isotropic noise with expected norm `noise`, renormalized.
Eigen::VectorXd jitter_on_sphere(Rng& rng, const Eigen::VectorXd& center,
                                 double noise) {
    const int dim = static_cast<int>(center.size());
    const double sigma = noise / std::sqrt(static_cast<double>(dim));
    Eigen::VectorXd v = center;
    for (int i = 0; i < dim; ++i) {
        v[i] += sigma * rng.normal();
    }
    const double norm = v.norm();
    return norm == 0.0 ? center : Eigen::VectorXd(v / norm);
}

}  // namespace

SyntheticData generate_synthetic(const SynthConfig& config, std::uint64_t seed) {
    if (config.n_items < 1 || config.n_users < 1 || config.n_categories < 1) {
        throw ConfigError("generate_synthetic needs at least one item, user and category");
    }
    if (config.semantic_dim < 1 || config.retrieval_dim < 1) {
        throw ConfigError("embedding dimensions must be positive");
    }

    Rng rng(derive_seed(seed, {0x636174616c6f67ULL}));  // catalog stream

    // Per-category cluster centers in semantic and retrieval space.
    std::vector<Eigen::VectorXd> semantic_centers;
    std::vector<Eigen::VectorXd> retrieval_centers;
    semantic_centers.reserve(config.n_categories);
    retrieval_centers.reserve(config.n_categories);
    for (int c = 0; c < config.n_categories; ++c) {
        semantic_centers.push_back(random_unit_vector(rng, config.semantic_dim));
        retrieval_centers.push_back(random_unit_vector(rng, config.retrieval_dim));
    }

    // Zipf popularity profile over a shuffled rank assignment.
    std::vector<std::int64_t> popularity(config.n_items);
    {
        std::vector<int> rank(config.n_items);
        std::iota(rank.begin(), rank.end(), 0);
        for (int i = config.n_items - 1; i > 0; --i) {
            std::swap(rank[i], rank[rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
        }
        const double scale = 10.0 * config.n_items;
        for (int i = 0; i < config.n_items; ++i) {
            popularity[i] = static_cast<std::int64_t>(
                scale / std::pow(static_cast<double>(rank[i]) + 1.0, config.zipf_exponent));
        }
    }

    std::vector<Item> items;
    items.reserve(config.n_items);
    for (int i = 0; i < config.n_items; ++i) {
        const int cat = static_cast<int>(rng.uniform_int(config.n_categories));
        Item item;
        item.id = i;
        item.category = "cat_" + std::to_string(cat);
        item.subcategory =
            item.category + "_sub_" +
            std::to_string(rng.uniform_int(std::max(config.subcategories_per_category, 1)));
        item.genre =
            item.category + "_genre_" +
            std::to_string(rng.uniform_int(std::max(config.genres_per_category, 1)));
        const std::uint64_t venue =
            rng.uniform_int(std::max(config.venues_per_category, 1));
        item.venue_id = item.category + "_venue_" + std::to_string(venue);
        // Venue types are global; a venue keeps the same type everywhere.
        item.venue_type =
            "venue_type_" +
            std::to_string(mix64((static_cast<std::uint64_t>(cat) << 32) ^ venue) %
                           std::max(config.venue_types, 1));
        item.price = std::round(std::exp(3.0 + 0.8 * rng.normal()) * 100.0) / 100.0;
        item.popularity = popularity[i];
        item.compliant = rng.uniform01() >= config.noncompliant_rate;
        item.semantic_embedding =
            jitter_on_sphere(rng, semantic_centers[cat], config.semantic_noise);
        item.retrieval_embedding =
            jitter_on_sphere(rng, retrieval_centers[cat], config.retrieval_noise);
        items.push_back(std::move(item));
    }
    Catalog catalog(std::move(items));

    // Items per category, for history draws.
    std::unordered_map<std::string, std::vector<std::size_t>> by_category;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        by_category[catalog.at(i).category].push_back(i);
    }

    Rng user_rng(derive_seed(seed, {0x7573657273ULL}));  // users stream
    std::vector<UserProfile> users;
    users.reserve(config.n_users);
    for (int u = 0; u < config.n_users; ++u) {
        const int home = static_cast<int>(user_rng.uniform_int(config.n_categories));
        UserProfile user;
        user.id = u;
        user.retrieval_embedding =
            jitter_on_sphere(user_rng, retrieval_centers[home], config.user_noise);
        user.remaining_credit =
            std::round(user_rng.uniform(20.0, 300.0) * 100.0) / 100.0;
        const int history_len =
            config.min_history +
            static_cast<int>(user_rng.uniform_int(
                static_cast<std::uint64_t>(std::max(config.max_history - config.min_history, 0)) + 1));
        const auto& home_items = by_category["cat_" + std::to_string(home)];
        for (int h = 0; h < history_len; ++h) {
            std::size_t pick;
            if (!home_items.empty() && user_rng.uniform01() < config.home_history_bias) {
                pick = home_items[user_rng.uniform_int(home_items.size())];
            } else {
                pick = static_cast<std::size_t>(user_rng.uniform_int(catalog.size()));
            }
            const Item& item = catalog.at(pick);
            user.history.push_back(InteractionRecord{item.id, item.category,
                                                     item.subcategory, item.genre,
                                                     item.venue_id, item.venue_type});
        }
        users.push_back(std::move(user));
    }

    return SyntheticData{std::move(catalog), std::move(users)};
}

}  // namespace divrec
