#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"
#include "divrec/errors.hpp"
#include "divrec/evalharness.hpp"
#include "divrec/kernel.hpp"
#include "divrec/metrics.hpp"
#include "divrec/sampler.hpp"

namespace py = pybind11;

namespace {

divrec::KernelFactor make_factor(const Eigen::MatrixXd& phi,
                                 const std::optional<Eigen::VectorXd>& q) {
    divrec::QualityScores quality;
    quality.q = q ? *q : Eigen::VectorXd::Ones(phi.rows());
    quality.variant = divrec::Variant::C;
    return divrec::build_kernel_factor(quality, phi);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Low-rank DPP sampling, diversity metrics and the recommendation pipeline";

    py::class_<divrec::ReductionModel>(m, "ReductionModel")
        .def_readonly("mean", &divrec::ReductionModel::mean)
        .def_readonly("projection", &divrec::ReductionModel::projection)
        .def_readonly("explained_variance", &divrec::ReductionModel::explained_variance);

    m.def("fit_reduction", &divrec::fit_reduction, py::arg("data"), py::arg("d"),
          "Fit a PCA reduction model on row-per-item data.");
    m.def("project", &divrec::project, py::arg("model"), py::arg("data"),
          "Project rows into the reduced space.");
    m.def("reconstruct", &divrec::reconstruct, py::arg("model"), py::arg("reduced"),
          "Map reduced rows back to the original space.");
    m.def("cosine", &divrec::cosine, py::arg("a"), py::arg("b"),
          "Cosine similarity, clamped to [-1, 1].");

    m.def(
        "sample_k_dpp",
        [](const Eigen::MatrixXd& phi, int k, std::uint64_t seed,
           const std::optional<Eigen::VectorXd>& q) {
            return divrec::sample_k_dpp(make_factor(phi, q),
                                        divrec::SampleConfig{k, seed, divrec::kRankTol});
        },
        py::arg("phi"), py::arg("k"), py::arg("seed") = 0, py::arg("q") = py::none(),
        "Draw an exact k-DPP sample from the kernel with rows q_i * phi_i.");

    m.def(
        "greedy_map_select",
        [](const Eigen::MatrixXd& phi, int k, const std::optional<Eigen::VectorXd>& q) {
            return divrec::greedy_map_select(make_factor(phi, q), k);
        },
        py::arg("phi"), py::arg("k"), py::arg("q") = py::none(),
        "Deterministic greedy max-determinant selection.");

    m.def(
        "brute_force_k_dpp",
        [](const Eigen::MatrixXd& l, int k) {
            py::dict out;
            for (const auto& [subset, prob] : divrec::brute_force_k_dpp(l, k)) {
                out[py::tuple(py::cast(subset))] = prob;
            }
            return out;
        },
        py::arg("l"), py::arg("k"),
        "Exact k-DPP distribution of a small kernel, as {subset tuple: probability}.");

    m.def(
        "log_volume",
        [](const Eigen::MatrixXd& phi, const std::vector<int>& selection) {
            return divrec::log_volume(selection, phi);
        },
        py::arg("phi"), py::arg("selection"),
        "Log-volume of the selected embedding rows; -inf when rank-deficient.");

    m.def(
        "quality_diversity_decomposition",
        [](const Eigen::MatrixXd& phi, const Eigen::VectorXd& q,
           const std::vector<int>& selection) {
            divrec::QualityScores quality;
            quality.q = q;
            quality.variant = divrec::Variant::B;
            const auto parts = divrec::quality_diversity_decomposition(selection, quality, phi);
            return py::make_tuple(parts.quality_term, parts.diversity_term, parts.total);
        },
        py::arg("phi"), py::arg("q"), py::arg("selection"),
        "Split log det L(S,S) into (sum of log q, 2 log volume, total).");

    m.def(
        "mann_whitney_u",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const divrec::MannWhitneyResult res = divrec::mann_whitney_u(a, b);
            return py::make_tuple(res.u, res.p);
        },
        py::arg("a"), py::arg("b"), "Mann-Whitney U and two-sided p-value.");

    m.def("oracle_total_variation", &divrec::oracle_total_variation, py::arg("n"),
          py::arg("d"), py::arg("k"), py::arg("draws"), py::arg("seed"),
          "Total variation between sampler frequencies and the exact distribution.");

    m.def(
        "generate_synthetic_files",
        [](const std::filesystem::path& out_dir, int items, int users, int categories,
           std::uint64_t seed) {
            divrec::SynthConfig config;
            config.n_items = items;
            config.n_users = users;
            config.n_categories = categories;
            const divrec::SyntheticData data = divrec::generate_synthetic(config, seed);
            std::filesystem::create_directories(out_dir);
            divrec::write_catalog(data.catalog, out_dir / "catalog.jsonl");
            divrec::write_users(data.users, out_dir / "users.jsonl");
        },
        py::arg("out_dir"), py::arg("items") = divrec::SynthConfig{}.n_items,
        py::arg("users") = divrec::SynthConfig{}.n_users,
        py::arg("categories") = divrec::SynthConfig{}.n_categories, py::arg("seed") = 0,
        "Write a seeded synthetic catalog.jsonl and users.jsonl.");

    m.def(
        "evaluate_files",
        [](const std::filesystem::path& catalog_path, const std::filesystem::path& users_path,
           int retrieval, int k, std::uint64_t seed, int reduce_to) {
            const divrec::Catalog catalog = divrec::ingest_catalog(catalog_path);
            const auto users = divrec::ingest_users(users_path);
            const Eigen::MatrixXd full = catalog.semantic_matrix();
            const auto d = std::min<Eigen::Index>(reduce_to, full.cols());
            const Eigen::MatrixXd reduced =
                divrec::project(divrec::fit_reduction(full, d), full);
            divrec::EvalConfig config;
            config.retrieval_size = retrieval;
            config.dpp_size = k;
            config.seed = seed;
            const divrec::EvaluationReport report =
                divrec::run_offline_eval(catalog, users, reduced, config);
            py::list rows;
            for (const divrec::VariantReport& row : report.rows) {
                py::dict entry;
                entry["variant"] = std::string(1, divrec::variant_label(row.variant));
                entry["mean_relevance"] = row.mean_relevance;
                entry["mean_log_volume"] = row.mean_log_volume;
                entry["volume_ratio_vs_A"] = row.volume_ratio_vs_a;
                entry["mean_business_diversity"] = row.mean_business_diversity;
                entry["degenerate_count"] = row.degenerate_count;
                entry["p_cosine_vs_A"] = row.p_cosine_vs_a;
                entry["p_business_vs_A"] = row.p_business_vs_a;
                rows.append(entry);
            }
            return rows;
        },
        py::arg("catalog_path"), py::arg("users_path"), py::arg("retrieval") = 300,
        py::arg("k") = 30, py::arg("seed") = 0, py::arg("reduce_to") = 64,
        "Run the offline A/B/C evaluation over JSONL inputs and return the report rows.");
}
