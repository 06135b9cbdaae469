#include "divrec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "divrec/errors.hpp"
#include "divrec/kernel.hpp"

namespace divrec {

ReductionModel fit_reduction(const EmbeddingMatrix& data, Eigen::Index d) {
    const Eigen::Index n = data.rows();
    const Eigen::Index dim = data.cols();
    if (n < 2) {
        throw ConfigError("fit_reduction needs at least two rows, got " +
                          std::to_string(n));
    }
    if (d < 1 || d > dim) {
        throw DimensionError("target dimension " + std::to_string(d) +
                             " out of range [1, " + std::to_string(dim) + "]");
    }

    ReductionModel model;
    model.mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
    const Eigen::MatrixXd covariance =
        centered.transpose() * centered / static_cast<double>(n - 1);

    const SymmetricEigen eig = jacobi_eigensystem(covariance);
    model.projection = eig.vectors.leftCols(d);
    model.explained_variance = eig.values.head(d).cwiseMax(0.0);
    return model;
}

EmbeddingMatrix project(const ReductionModel& model, const EmbeddingMatrix& data) {
    if (data.cols() != model.mean.size()) {
        throw DimensionError("project: data has " + std::to_string(data.cols()) +
                             " columns, model expects " +
                             std::to_string(model.mean.size()));
    }
    return (data.rowwise() - model.mean.transpose()) * model.projection;
}

EmbeddingMatrix reconstruct(const ReductionModel& model, const EmbeddingMatrix& reduced) {
    if (reduced.cols() != model.projection.cols()) {
        throw DimensionError("reconstruct: reduced data has " +
                             std::to_string(reduced.cols()) + " columns, model has " +
                             std::to_string(model.projection.cols()));
    }
    return (reduced * model.projection.transpose()).rowwise() + model.mean.transpose();
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine: vector lengths differ (" +
                             std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) {
        throw ZeroVectorError("cosine similarity is undefined for a zero vector");
    }
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

void write_catalog_with_reduced(const Catalog& catalog, const EmbeddingMatrix& reduced,
                                const std::filesystem::path& path) {
    if (reduced.rows() != static_cast<Eigen::Index>(catalog.size())) {
        throw DimensionError("reduced matrix has " + std::to_string(reduced.rows()) +
                             " rows for a catalog of " + std::to_string(catalog.size()));
    }
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot open for writing: " + path.string());
    }
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const Item& item = catalog.at(i);
        nlohmann::ordered_json record;
        record["id"] = item.id;
        record["category"] = item.category;
        record["subcategory"] = item.subcategory;
        record["genre"] = item.genre;
        record["venue_id"] = item.venue_id;
        record["venue_type"] = item.venue_type;
        record["price"] = item.price;
        record["popularity"] = item.popularity;
        record["compliant"] = item.compliant;
        auto to_array = [](const Eigen::VectorXd& v) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (Eigen::Index j = 0; j < v.size(); ++j) {
                arr.push_back(v[j]);
            }
            return arr;
        };
        record["semantic_embedding"] = to_array(item.semantic_embedding);
        record["retrieval_embedding"] = to_array(item.retrieval_embedding);
        record["reduced_embedding"] =
            to_array(reduced.row(static_cast<Eigen::Index>(i)));
        out << record.dump() << '\n';
    }
}

EmbeddingMatrix load_reduced_embeddings(const std::filesystem::path& path,
                                        const Catalog& catalog) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open reduced-embedding file: " + path.string());
    }
    EmbeddingMatrix reduced;
    std::unordered_set<std::int64_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json record = nlohmann::json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            throw ParseError(path.filename().string() + " line " +
                             std::to_string(line_no) + ": not a valid JSON object");
        }
        if (!record.contains("id") || !record.contains("reduced_embedding")) {
            throw ParseError(path.filename().string() + " line " +
                             std::to_string(line_no) +
                             ": record needs \"id\" and \"reduced_embedding\"");
        }
        const std::int64_t id = record["id"].get<std::int64_t>();
        const auto& arr = record["reduced_embedding"];
        Eigen::VectorXd v(arr.size());
        Eigen::Index j = 0;
        for (const auto& entry : arr) {
            v[j++] = entry.get<double>();
        }
        if (reduced.size() == 0) {
            reduced.resize(static_cast<Eigen::Index>(catalog.size()), v.size());
        } else if (v.size() != reduced.cols()) {
            throw ParseError(path.filename().string() + " line " +
                             std::to_string(line_no) +
                             ": reduced_embedding has length " +
                             std::to_string(v.size()) + ", expected " +
                             std::to_string(reduced.cols()));
        }
        if (!seen.insert(id).second) {
            throw ParseError(path.filename().string() + " line " +
                             std::to_string(line_no) + ": duplicate id " +
                             std::to_string(id));
        }
        reduced.row(static_cast<Eigen::Index>(catalog.index_of(id))) = v;
    }
    if (seen.size() != catalog.size()) {
        throw ParseError(path.filename().string() + ": has reduced embeddings for " +
                         std::to_string(seen.size()) + " of " +
                         std::to_string(catalog.size()) + " catalog items");
    }
    return reduced;
}

}  // namespace divrec
