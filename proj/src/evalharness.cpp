#include "divrec/evalharness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "divrec/errors.hpp"
#include "divrec/metrics.hpp"
#include "divrec/pipeline.hpp"
#include "divrec/rng.hpp"
#include "divrec/sampler.hpp"

namespace divrec {
namespace {

constexpr const char* kCsvHeader =
    "variant,mean_relevance,mean_log_volume,volume_ratio_vs_A,mean_business_diversity,"
    "degenerate_count,p_cosine_vs_A,p_business_vs_A";

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Midranks of the pooled sample, returned in pool order.
std::vector<double> midranks(const std::vector<double>& pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = shared;
        i = j + 1;
    }
    return ranks;
}

void write_csv_row(std::ostream& os, const VariantReport& row) {
    os << std::setprecision(17);
    os << variant_label(row.variant) << ',' << row.mean_relevance << ','
       << row.mean_log_volume << ',' << row.volume_ratio_vs_a << ','
       << row.mean_business_diversity << ',' << row.degenerate_count << ','
       << row.p_cosine_vs_a << ',' << row.p_business_vs_a << '\n';
}

}  // namespace

EvaluationReport run_offline_eval(const Catalog& catalog,
                                  const std::vector<UserProfile>& users,
                                  const EmbeddingMatrix& reduced_phi,
                                  const EvalConfig& config) {
    if (users.size() < 2) {
        throw ConfigError("offline evaluation needs at least 2 users, got " +
                          std::to_string(users.size()));
    }
    if (reduced_phi.rows() != static_cast<Eigen::Index>(catalog.size())) {
        throw DimensionError("reduced embeddings have " + std::to_string(reduced_phi.rows()) +
                             " rows for a catalog of " + std::to_string(catalog.size()));
    }
    if (config.retrieval_size < 1 || config.dpp_size < 1 ||
        config.dpp_size > config.retrieval_size) {
        throw ConfigError("invalid evaluation sizes: retrieval " +
                          std::to_string(config.retrieval_size) + ", set " +
                          std::to_string(config.dpp_size));
    }

    const EmbeddingMatrix phi_full = catalog.semantic_matrix();
    const Variant variants[] = {Variant::A, Variant::B, Variant::C};

    struct PerVariant {
        std::vector<double> cosines;
        std::vector<double> business;
        std::vector<double> log_volumes;  // finite only
        int degenerate = 0;
        int failed = 0;
    };
    PerVariant collected[3];

    PipelineConfig pipeline_config;
    pipeline_config.retrieval_size = config.retrieval_size;
    pipeline_config.dpp_size = config.dpp_size;
    pipeline_config.tol = config.tol;

    for (int vi = 0; vi < 3; ++vi) {
        const Variant variant = variants[vi];
        PerVariant& acc = collected[vi];
        for (const UserProfile& user : users) {
            Rng rng(derive_seed(config.seed, {static_cast<std::uint64_t>(user.id),
                                              static_cast<std::uint64_t>(variant)}));
            std::vector<int> selection;
            try {
                std::vector<Candidate> candidates =
                    retrieve_top(user, catalog, config.retrieval_size);
                if (variant == Variant::A) {
                    if (candidates.size() > static_cast<std::size_t>(config.dpp_size)) {
                        candidates.resize(static_cast<std::size_t>(config.dpp_size));
                    }
                } else {
                    PipelineConfig vc = pipeline_config;
                    vc.variant = variant;
                    candidates = dpp_filter(candidates, user, catalog, reduced_phi, vc, rng);
                }
                selection.reserve(candidates.size());
                for (const Candidate& cand : candidates) selection.push_back(cand.index);
                if (selection.empty()) throw ConfigError("empty selection");
            } catch (const Error&) {
                ++acc.failed;
                continue;
            }
            acc.cosines.push_back(mean_user_cosine(selection, user, catalog));
            acc.business.push_back(business_diversity_set(selection, catalog, user.history));
            const double vol = log_volume(selection, phi_full);
            if (std::isinf(vol)) {
                ++acc.degenerate;
            } else {
                acc.log_volumes.push_back(vol);
            }
        }
    }

    EvaluationReport report;
    const double base_log_volume = mean_of(collected[0].log_volumes);
    for (int vi = 0; vi < 3; ++vi) {
        const PerVariant& acc = collected[vi];
        VariantReport row;
        row.variant = variants[vi];
        row.mean_relevance = mean_of(acc.cosines);
        row.mean_log_volume = mean_of(acc.log_volumes);
        row.volume_ratio_vs_a = std::exp(row.mean_log_volume - base_log_volume);
        row.mean_business_diversity = mean_of(acc.business);
        row.degenerate_count = acc.degenerate;
        row.p_cosine_vs_a = mann_whitney_u(acc.cosines, collected[0].cosines).p;
        row.p_business_vs_a = mann_whitney_u(acc.business, collected[0].business).p;
        row.evaluated_users = static_cast<int>(acc.cosines.size());
        row.failed_users = acc.failed;
        report.rows.push_back(row);
    }
    return report;
}

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) {
        throw ConfigError("Mann-Whitney requires non-empty samples");
    }
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    std::vector<double> pooled;
    pooled.reserve(n + m);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> ranks = midranks(pooled);

    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < n; ++i) rank_sum_a += ranks[i];
    const double u_a = rank_sum_a - 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
    const double mu = 0.5 * static_cast<double>(n) * static_cast<double>(m);
    const double observed_dev = std::abs(u_a - mu);

    MannWhitneyResult out;
    out.u = u_a;

    if (n <= 8 && m <= 8) {
        // Exact permutation distribution over which pooled positions form
        // group a. At most C(16,8) = 12870 assignments.
        const std::size_t total = n + m;
        std::vector<std::size_t> comb(n);
        std::iota(comb.begin(), comb.end(), std::size_t{0});
        const double base = 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
        std::uint64_t hits = 0;
        std::uint64_t count = 0;
        while (true) {
            double rs = 0.0;
            for (std::size_t idx : comb) rs += ranks[idx];
            if (std::abs(rs - base - mu) >= observed_dev - 1e-12) ++hits;
            ++count;
            std::size_t pos = n;
            while (pos > 0 && comb[pos - 1] == total - n + pos - 1) --pos;
            if (pos == 0) break;
            ++comb[pos - 1];
            for (std::size_t q = pos; q < n; ++q) comb[q] = comb[q - 1] + 1;
        }
        out.p = static_cast<double>(hits) / static_cast<double>(count);
        return out;
    }

    const double total = static_cast<double>(n + m);
    double tie_term = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < sorted.size()) {
            std::size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double sigma2 = (static_cast<double>(n) * static_cast<double>(m) / 12.0) *
                          ((total + 1.0) - tie_term / (total * (total - 1.0)));
    if (!(sigma2 > 0.0)) {
        out.p = 1.0;  // every observation identical
        return out;
    }
    const double z = std::max((observed_dev - 0.5) / std::sqrt(sigma2), 0.0);
    out.p = std::min(std::max(std::erfc(z / std::sqrt(2.0)), 1e-300), 1.0);
    return out;
}

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    os << kCsvHeader << '\n';
    for (const VariantReport& row : report.rows) write_csv_row(os, row);
    if (!os) throw ConfigError("failed while writing " + path.string());
}

EvaluationReport read_report_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw ParseError(path.string() + ": empty report");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) {
        throw ParseError(path.string() + ": unexpected header '" + line + "'");
    }
    EvaluationReport report;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) +
                             ": expected 8 fields, got " + std::to_string(fields.size()));
        }
        try {
            VariantReport row;
            row.variant = parse_variant(fields[0]);
            row.mean_relevance = std::stod(fields[1]);
            row.mean_log_volume = std::stod(fields[2]);
            row.volume_ratio_vs_a = std::stod(fields[3]);
            row.mean_business_diversity = std::stod(fields[4]);
            row.degenerate_count = std::stoi(fields[5]);
            row.p_cosine_vs_a = std::stod(fields[6]);
            row.p_business_vs_a = std::stod(fields[7]);
            report.rows.push_back(row);
        } catch (const std::exception& ex) {
            throw ParseError(path.string() + " line " + std::to_string(line_no) + ": " +
                             ex.what());
        }
    }
    if (report.rows.empty()) throw ParseError(path.string() + ": no data rows");
    return report;
}

std::string report_markdown(const EvaluationReport& report) {
    std::ostringstream os;
    os << "| variant | mean_relevance | mean_log_volume | volume_ratio_vs_A | "
          "mean_business_diversity | degenerate_count | p_cosine_vs_A | p_business_vs_A |\n";
    os << "|---|---|---|---|---|---|---|---|\n";
    os << std::setprecision(6);
    for (const VariantReport& row : report.rows) {
        os << "| " << variant_label(row.variant) << " | " << row.mean_relevance << " | "
           << row.mean_log_volume << " | " << row.volume_ratio_vs_a << " | "
           << row.mean_business_diversity << " | " << row.degenerate_count << " | "
           << row.p_cosine_vs_a << " | " << row.p_business_vs_a << " |\n";
    }
    return os.str();
}

void write_report_markdown(const EvaluationReport& report, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path.string() + " for writing");
    os << report_markdown(report);
    if (!os) throw ConfigError("failed while writing " + path.string());
}

double oracle_total_variation(int n, int d, int k, int draws, std::uint64_t seed) {
    if (n < 1 || n > 20) {
        throw ConfigError("oracle kernel size must lie in [1, 20], got " + std::to_string(n));
    }
    if (d < 1) throw ConfigError("oracle rank must be >= 1, got " + std::to_string(d));
    if (draws < 1) throw ConfigError("oracle needs at least one draw");

    Rng gen(derive_seed(seed, {0x6b65726e656cULL}));
    Eigen::MatrixXd b(n, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) b(i, j) = gen.normal();
    }
    QualityScores quality;
    quality.q = Eigen::VectorXd::Ones(n);
    quality.variant = Variant::C;
    const KernelFactor factor = build_kernel_factor(quality, b);

    const std::map<std::vector<int>, double> exact =
        brute_force_k_dpp(b * b.transpose(), k);
    const KDppSampler sampler(factor, SampleConfig{k, 0, kRankTol});

    std::map<std::vector<int>, int> counts;
    Rng rng(derive_seed(seed, {0x647261777355ULL}));
    for (int t = 0; t < draws; ++t) ++counts[sampler.sample(rng)];

    double tv = 0.0;
    for (const auto& [subset, prob] : exact) {
        const auto it = counts.find(subset);
        const double freq =
            it == counts.end() ? 0.0
                               : static_cast<double>(it->second) / static_cast<double>(draws);
        tv += std::abs(prob - freq);
    }
    return 0.5 * tv;
}

std::vector<BenchResult> bench_sampling(const std::vector<int>& sizes, int d, int k,
                                        std::uint64_t seed, int reps) {
    if (sizes.empty()) throw ConfigError("bench needs at least one size");
    if (reps < 1) throw ConfigError("bench reps must be >= 1");
    std::vector<BenchResult> results;
    for (int n : sizes) {
        if (n < 1) throw ConfigError("bench size must be >= 1, got " + std::to_string(n));
        Rng gen(derive_seed(seed, {static_cast<std::uint64_t>(n)}));
        Eigen::MatrixXd b(n, d);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) b(i, j) = gen.normal();
        }
        QualityScores quality;
        quality.q = Eigen::VectorXd::Ones(n);
        quality.variant = Variant::C;
        const KernelFactor factor = build_kernel_factor(quality, b);

        std::vector<double> times;
        times.reserve(static_cast<std::size_t>(reps));
        for (int rep = 0; rep < reps; ++rep) {
            Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n),
                                       static_cast<std::uint64_t>(rep)}));
            const auto start = std::chrono::steady_clock::now();
            sample_k_dpp(factor, SampleConfig{k, 0, kRankTol}, rng);
            const auto stop = std::chrono::steady_clock::now();
            times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
        }
        std::sort(times.begin(), times.end());
        BenchResult res;
        res.n = n;
        res.millis = times[times.size() / 2];
        results.push_back(res);
    }
    return results;
}

}  // namespace divrec
