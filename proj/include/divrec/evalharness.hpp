#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "divrec/catalog.hpp"
#include "divrec/embedding.hpp"
#include "divrec/kernel.hpp"

namespace divrec {

struct EvalConfig {
    int retrieval_size = 300;
    int dpp_size = 30;
    std::uint64_t seed = 0;
    double tol = kRankTol;
};

struct VariantReport {
    Variant variant = Variant::A;
    double mean_relevance = 0.0;          // mean per-user retrieval cosine
    double mean_log_volume = 0.0;         // over non-degenerate users
    double volume_ratio_vs_a = 1.0;       // geometric-mean volume ratio
    double mean_business_diversity = 0.0;
    int degenerate_count = 0;             // users whose set had no volume
    double p_cosine_vs_a = 1.0;           // Mann-Whitney, per-user cosines
    double p_business_vs_a = 1.0;         // Mann-Whitney, per-user diversity
    int evaluated_users = 0;
    int failed_users = 0;                 // pipeline errors, skipped
};

struct EvaluationReport {
    std::vector<VariantReport> rows;  // A, B, C
};

/// Runs all three variants over every user and aggregates the three metric
/// families. Serving-side compliance is deliberately left out so the
/// comparison isolates the selection policies. Each (user, variant) pair
/// gets its own random stream derived from config.seed, so results do not
/// depend on evaluation order. Set volumes use the full semantic embeddings;
/// users whose set is rank-deficient are excluded from the volume mean but
/// counted. Per-user pipeline failures are skipped and counted.
EvaluationReport run_offline_eval(const Catalog& catalog,
                                  const std::vector<UserProfile>& users,
                                  const EmbeddingMatrix& reduced_phi,
                                  const EvalConfig& config);

struct MannWhitneyResult {
    double u = 0.0;  // U statistic of the first sample
    double p = 1.0;  // two-sided
};

/// Mann-Whitney U with midranks for ties. Enumerates the exact permutation
/// distribution when both sides have at most 8 observations; otherwise uses
/// the normal approximation with tie correction and continuity correction.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

/// CSV with one row per variant. Columns:
/// variant,mean_relevance,mean_log_volume,volume_ratio_vs_A,
/// mean_business_diversity,degenerate_count,p_cosine_vs_A,p_business_vs_A
void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path);
EvaluationReport read_report_csv(const std::filesystem::path& path);

/// Same table rendered as markdown.
void write_report_markdown(const EvaluationReport& report, const std::filesystem::path& path);
std::string report_markdown(const EvaluationReport& report);

/// Total variation distance between the exact k-DPP distribution on a small
/// random kernel and the empirical distribution of the sampler, as an
/// end-to-end correctness probe.
double oracle_total_variation(int n, int d, int k, int draws, std::uint64_t seed);

struct BenchResult {
    int n = 0;
    double millis = 0.0;  // median wall time of one decompose-and-sample call
};

/// Times sample_k_dpp (decomposition included) on random rank-d factors.
std::vector<BenchResult> bench_sampling(const std::vector<int>& sizes, int d, int k,
                                        std::uint64_t seed, int reps = 5);

}  // namespace divrec
