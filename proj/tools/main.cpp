#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"
#include "divrec/errors.hpp"
#include "divrec/evalharness.hpp"
#include "divrec/pipeline.hpp"
#include "divrec/service.hpp"

namespace {

using divrec::Catalog;
using divrec::EmbeddingMatrix;

// Reduced embeddings either come precomputed from a JSONL file or are
// fitted on the catalog right here.
EmbeddingMatrix resolve_reduced(const Catalog& catalog, const std::string& reduced_path,
                                int reduce_to) {
    if (!reduced_path.empty()) {
        return divrec::load_reduced_embeddings(reduced_path, catalog);
    }
    const EmbeddingMatrix full = catalog.semantic_matrix();
    const auto d = std::min<Eigen::Index>(reduce_to, full.cols());
    return divrec::project(divrec::fit_reduction(full, d), full);
}

int run_gen_data(int items, int users, int categories, std::uint64_t seed,
                 const std::string& out_dir) {
    divrec::SynthConfig config;
    config.n_items = items;
    config.n_users = users;
    config.n_categories = categories;
    const divrec::SyntheticData data = divrec::generate_synthetic(config, seed);
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    divrec::write_catalog(data.catalog, dir / "catalog.jsonl");
    divrec::write_users(data.users, dir / "users.jsonl");
    std::cout << "wrote " << data.catalog.size() << " items and " << data.users.size()
              << " users to " << dir.string() << '\n';
    return 0;
}

int run_reduce_dims(const std::string& in, int d, const std::string& out) {
    const Catalog catalog = divrec::ingest_catalog(in);
    const EmbeddingMatrix full = catalog.semantic_matrix();
    const divrec::ReductionModel model = divrec::fit_reduction(full, d);
    const EmbeddingMatrix reduced = divrec::project(model, full);
    divrec::write_catalog_with_reduced(catalog, reduced, out);
    const double captured = model.explained_variance.sum();
    std::cout << "reduced " << catalog.size() << " embeddings from " << full.cols() << " to "
              << d << " dims (explained variance " << captured << ") -> " << out << '\n';
    return 0;
}

int run_recommend(const std::string& catalog_path, const std::string& users_path,
                  const std::string& variant, int k, int retrieval, std::uint64_t seed,
                  const std::string& out, const std::string& reduced_path, int reduce_to) {
    const Catalog catalog = divrec::ingest_catalog(catalog_path);
    const std::vector<divrec::UserProfile> users = divrec::ingest_users(users_path);
    const EmbeddingMatrix reduced = resolve_reduced(catalog, reduced_path, reduce_to);

    divrec::PipelineConfig config;
    config.retrieval_size = retrieval;
    config.dpp_size = k;
    config.variant = divrec::parse_variant(variant);
    config.seed = seed;

    std::ofstream os(out);
    if (!os) throw divrec::ConfigError("cannot open " + out + " for writing");
    os << std::setprecision(17);
    for (const divrec::UserProfile& user : users) {
        const divrec::RecommendationSet rec =
            divrec::recommend(user, catalog, reduced, config);
        nlohmann::ordered_json record;
        record["user_id"] = rec.user_id;
        record["variant"] = std::string(1, divrec::variant_label(rec.variant));
        record["seed"] = rec.seed;
        record["items"] = rec.item_ids;
        record["scores"] = rec.scores;
        os << record.dump() << '\n';
    }
    if (!os) throw divrec::ConfigError("failed while writing " + out);
    std::cout << "wrote recommendations for " << users.size() << " users to " << out << '\n';
    return 0;
}

int run_evaluate(const std::string& catalog_path, const std::string& users_path, int retrieval,
                 int k, std::uint64_t seed, const std::string& out, const std::string& format,
                 const std::string& reduced_path, int reduce_to) {
    const Catalog catalog = divrec::ingest_catalog(catalog_path);
    const std::vector<divrec::UserProfile> users = divrec::ingest_users(users_path);
    const EmbeddingMatrix reduced = resolve_reduced(catalog, reduced_path, reduce_to);

    divrec::EvalConfig config;
    config.retrieval_size = retrieval;
    config.dpp_size = k;
    config.seed = seed;
    const divrec::EvaluationReport report =
        divrec::run_offline_eval(catalog, users, reduced, config);

    const std::filesystem::path out_path(out);
    if (format == "csv") {
        divrec::write_report_csv(report, out_path);
    } else if (format == "markdown") {
        divrec::write_report_markdown(report, out_path);
    } else if (format == "both") {
        divrec::write_report_csv(report, out_path);
        std::filesystem::path md = out_path;
        md.replace_extension(".md");
        divrec::write_report_markdown(report, md);
    } else {
        throw divrec::ConfigError("format must be csv, markdown or both, got '" + format + "'");
    }
    std::cout << divrec::report_markdown(report);
    return 0;
}

int run_bench(const std::vector<int>& sizes, int d, int k, std::uint64_t seed, int reps) {
    const std::vector<divrec::BenchResult> results =
        divrec::bench_sampling(sizes, d, k, seed, reps);
    std::cout << "n,median_ms\n";
    for (const divrec::BenchResult& res : results) {
        std::cout << res.n << ',' << res.millis << '\n';
    }
    if (results.size() >= 2 && results.front().millis > 0.0) {
        std::cout << "ratio_last_vs_first="
                  << results.back().millis / results.front().millis << '\n';
    }
    return 0;
}

int run_oracle(int n, int d, int k, int draws, std::uint64_t seed) {
    const double tv = divrec::oracle_total_variation(n, d, k, draws, seed);
    const bool pass = tv < 0.02;
    std::cout << "total_variation=" << tv << " bound=0.02 " << (pass ? "PASS" : "FAIL")
              << '\n';
    return pass ? 0 : 1;
}

int run_serve(const std::string& config_path) {
    const divrec::ServiceConfig config = divrec::load_service_config(config_path);
    std::cout << "serving on http://" << config.host << ':' << config.port << '\n';
    divrec::serve(config);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diversified recommendations: DPP sampling, pipeline, evaluation, serving"};
    app.require_subcommand(1);

    // gen-data
    const divrec::SynthConfig synth_defaults;
    int gd_items = synth_defaults.n_items, gd_users = synth_defaults.n_users,
        gd_categories = synth_defaults.n_categories;
    std::uint64_t gd_seed = 0;
    std::string gd_out;
    CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic catalog and users");
    gen->add_option("--items", gd_items, "Number of items")->check(CLI::PositiveNumber);
    gen->add_option("--users", gd_users, "Number of users")->check(CLI::PositiveNumber);
    gen->add_option("--categories", gd_categories, "Number of categories")
        ->check(CLI::PositiveNumber);
    gen->add_option("--seed", gd_seed, "RNG seed");
    gen->add_option("--out", gd_out, "Output directory")->required();

    // reduce-dims
    std::string rd_in, rd_out;
    int rd_d = 64;
    CLI::App* red = app.add_subcommand("reduce-dims", "Fit PCA and append reduced embeddings");
    red->add_option("--in", rd_in, "Input catalog JSONL")->required();
    red->add_option("--d", rd_d, "Target dimension")->check(CLI::PositiveNumber);
    red->add_option("--out", rd_out, "Output catalog JSONL")->required();

    // recommend
    std::string rc_catalog, rc_users, rc_variant = "B", rc_out, rc_reduced;
    int rc_k = 60, rc_retrieval = 1000, rc_reduce_to = 64;
    std::uint64_t rc_seed = 0;
    CLI::App* rec = app.add_subcommand("recommend", "Run the pipeline for every user");
    rec->add_option("--catalog", rc_catalog, "Catalog JSONL")->required();
    rec->add_option("--users", rc_users, "Users JSONL")->required();
    rec->add_option("--variant", rc_variant, "Variant A, B or C");
    rec->add_option("--k", rc_k, "Recommendation set size")->check(CLI::PositiveNumber);
    rec->add_option("--retrieval", rc_retrieval, "Retrieval pool size")
        ->check(CLI::PositiveNumber);
    rec->add_option("--seed", rc_seed, "Master RNG seed");
    rec->add_option("--out", rc_out, "Output JSONL")->required();
    rec->add_option("--reduced", rc_reduced, "Precomputed reduced-embedding JSONL");
    rec->add_option("--reduce-to", rc_reduce_to, "PCA dimension when --reduced is absent")
        ->check(CLI::PositiveNumber);

    // evaluate
    std::string ev_catalog, ev_users, ev_out, ev_format = "csv", ev_reduced;
    int ev_retrieval = 300, ev_k = 30, ev_reduce_to = 64;
    std::uint64_t ev_seed = 0;
    CLI::App* ev = app.add_subcommand("evaluate", "Offline A/B/C evaluation report");
    ev->add_option("--catalog", ev_catalog, "Catalog JSONL")->required();
    ev->add_option("--users", ev_users, "Users JSONL")->required();
    ev->add_option("--retrieval", ev_retrieval, "Retrieval pool size")
        ->check(CLI::PositiveNumber);
    ev->add_option("--k", ev_k, "Recommendation set size")->check(CLI::PositiveNumber);
    ev->add_option("--seed", ev_seed, "Master RNG seed");
    ev->add_option("--out", ev_out, "Report path")->required();
    ev->add_option("--format", ev_format, "csv, markdown or both");
    ev->add_option("--reduced", ev_reduced, "Precomputed reduced-embedding JSONL");
    ev->add_option("--reduce-to", ev_reduce_to, "PCA dimension when --reduced is absent")
        ->check(CLI::PositiveNumber);

    // bench
    std::vector<int> bn_sizes{1000, 2000};
    int bn_d = 64, bn_k = 60, bn_reps = 5;
    std::uint64_t bn_seed = 0;
    CLI::App* bn = app.add_subcommand("bench", "Time decompose-and-sample at several N");
    bn->add_option("--n", bn_sizes, "Comma-separated factor sizes")->delimiter(',');
    bn->add_option("--d", bn_d, "Factor rank")->check(CLI::PositiveNumber);
    bn->add_option("--k", bn_k, "Sample size")->check(CLI::PositiveNumber);
    bn->add_option("--seed", bn_seed, "RNG seed");
    bn->add_option("--reps", bn_reps, "Repetitions per size")->check(CLI::PositiveNumber);

    // oracle
    int or_n = 8, or_d = 4, or_k = 3, or_draws = 200000;
    std::uint64_t or_seed = 0;
    CLI::App* orc = app.add_subcommand(
        "oracle", "Compare sampler frequencies against the brute-force distribution");
    orc->add_option("--n", or_n, "Items")->check(CLI::PositiveNumber);
    orc->add_option("--d", or_d, "Factor rank")->check(CLI::PositiveNumber);
    orc->add_option("--k", or_k, "Sample size")->check(CLI::PositiveNumber);
    orc->add_option("--draws", or_draws, "Number of draws")->check(CLI::PositiveNumber);
    orc->add_option("--seed", or_seed, "RNG seed");

    // serve
    std::string sv_config;
    CLI::App* sv = app.add_subcommand("serve", "Run the HTTP recommendation service");
    sv->add_option("--config", sv_config, "Service config JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_data(gd_items, gd_users, gd_categories, gd_seed, gd_out);
        if (red->parsed()) return run_reduce_dims(rd_in, rd_d, rd_out);
        if (rec->parsed()) {
            return run_recommend(rc_catalog, rc_users, rc_variant, rc_k, rc_retrieval, rc_seed,
                                 rc_out, rc_reduced, rc_reduce_to);
        }
        if (ev->parsed()) {
            return run_evaluate(ev_catalog, ev_users, ev_retrieval, ev_k, ev_seed, ev_out,
                                ev_format, ev_reduced, ev_reduce_to);
        }
        if (bn->parsed()) return run_bench(bn_sizes, bn_d, bn_k, bn_seed, bn_reps);
        if (orc->parsed()) return run_oracle(or_n, or_d, or_k, or_draws, or_seed);
        if (sv->parsed()) return run_serve(sv_config);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
