#pragma once

// Monte Carlo experiment engine: noisy recovery over an (s, sigma) grid,
// active-block detection with uniform vs mixed block lengths, and randomized
// verification of the HiRIP composition bound.
//
// Every trial draws its operator, signal and noise from seeds derived from
// (master_seed, scenario, cell parameters, trial), so results do not depend on
// execution order or thread count.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "block_model.hpp"
#include "measurement_ops.hpp"
#include "rip_lab.hpp"
#include "signals.hpp"
#include "solvers.hpp"

namespace hisparse::harness {

enum class Scenario { recovery_grid, block_detection, theorem_verify };

inline std::string to_string(Scenario s) {
    switch (s) {
    case Scenario::recovery_grid: return "recovery-grid";
    case Scenario::block_detection: return "block-detection";
    case Scenario::theorem_verify: return "theorem-verify";
    }
    return "unknown";
}

inline Scenario scenario_from_string(const std::string& s) {
    if (s == "recovery-grid") return Scenario::recovery_grid;
    if (s == "block-detection") return Scenario::block_detection;
    if (s == "theorem-verify") return Scenario::theorem_verify;
    throw ValidationError("unknown scenario '" + s + "'");
}

struct DetectionSettings {
    Index long_length = 200;   // n_i of every block in uniform mode
    Index front_width = 10;    // non-zeros of designated blocks sit here; their n_i in mixed mode
    double short_fraction = 0.5;
};

struct TheoremSettings {
    Index instances = 200;
    Index max_M = 10;
    Index max_N = 10;
    Index max_m = 12;
    Index max_n = 6;
    Index max_s = 3;
    Index max_sigma = 2;
    std::string ensemble = "random";  // or "identity"
    Index budget = rip::kDefaultEnumerationBudget;
};

struct ExperimentConfig {
    Scenario scenario = Scenario::recovery_grid;
    Index M = 12;
    std::vector<Index> M_values;  // block-detection sweep; falls back to {M}
    Index N = 16;
    Index m = 16;
    std::vector<Index> block_lengths = std::vector<Index>(16, 32);
    std::vector<Index> s_values{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<Index> sigma_values{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> snr_db{10.0};
    Index trials = 50;
    std::uint64_t master_seed = 20190501;
    SolverConfig solver{};
    unsigned threads = 1;
    bool record_timing = false;
    DetectionSettings detection{};
    TheoremSettings theorem{};
    std::string output_path = "out";

    std::vector<Index> antenna_sweep() const { return M_values.empty() ? std::vector<Index>{M} : M_values; }

    void validate() const {
        hisparse::detail::require_valid(M >= 1 && N >= 1 && m >= 1, "ExperimentConfig: dimensions must be positive");
        hisparse::detail::require_valid(trials >= 1, "ExperimentConfig: trials must be >= 1");
        for (Index v : M_values) hisparse::detail::require_valid(v >= 1, "ExperimentConfig: M_values must be positive");
        if (scenario == Scenario::recovery_grid) {
            hisparse::detail::require_valid(block_lengths.size() == N, "ExperimentConfig: need one block length per block");
            for (Index n : block_lengths) hisparse::detail::require_valid(n >= m, "ExperimentConfig: DFT blocks need n_i >= m");
        }
        if (scenario == Scenario::block_detection) {
            hisparse::detail::require_valid(detection.long_length >= m, "ExperimentConfig: DFT blocks need n_i >= m");
            hisparse::detail::require_valid(detection.front_width >= 1 && detection.front_width <= detection.long_length,
                                  "ExperimentConfig: front width must lie in [1, long_length]");
        }
        solver.validate();
    }

    /// Desk-scale defaults per scenario.
    static ExperimentConfig desk(Scenario scenario);
    /// Dimensions of the published experiments.
    static ExperimentConfig paper_scale(Scenario scenario);
};

inline ExperimentConfig ExperimentConfig::desk(Scenario scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    if (scenario == Scenario::block_detection) {
        c.N = 20;
        c.m = 50;
        c.M = 10;
        c.M_values = {10, 20};
        c.s_values = {6};
        c.sigma_values = {5};
        c.snr_db = {-10.0, 0.0, 10.0, 20.0};
        c.trials = 20;
        c.block_lengths.clear();
    }
    return c;
}

inline ExperimentConfig ExperimentConfig::paper_scale(Scenario scenario) {
    ExperimentConfig c;
    c.scenario = scenario;
    switch (scenario) {
    case Scenario::recovery_grid:
        c.M = 40;
        c.N = 50;
        c.m = 50;
        c.block_lengths.assign(50, 100);
        c.s_values.resize(25);
        std::iota(c.s_values.begin(), c.s_values.end(), Index{1});
        c.sigma_values.resize(20);
        std::iota(c.sigma_values.begin(), c.sigma_values.end(), Index{1});
        c.snr_db = {10.0};
        c.trials = 50;
        break;
    case Scenario::block_detection:
        c = desk(scenario);
        c.M_values = {10, 20, 30, 40};
        c.snr_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
        c.trials = 50;
        break;
    case Scenario::theorem_verify:
        break;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Records

struct TrialRecord {
    std::string scenario;
    Index s = 0;
    Index sigma = 0;
    Index M = 0;
    Index N = 0;
    Index m = 0;
    double snr_db = 0.0;
    std::string mode;
    Index trial = 0;
    std::uint64_t seed = 0;
    double mse = 0.0;
    bool success = false;
    double detection_rate = 0.0;
    int iterations = 0;
    double wall_millis = 0.0;
};

struct CellSummary {
    Index s = 0;
    Index sigma = 0;
    Index M = 0;
    double snr_db = 0.0;
    std::string mode;
    Index trials = 0;
    Index successes = 0;
    double success_rate = 0.0;
    double success_stderr = 0.0;
    double detection_rate = 0.0;  // mean over trials
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    std::vector<CellSummary> cells;
    std::vector<std::string> skipped;  // reasons for infeasible cells
};

namespace detail {

inline std::uint64_t snr_key(double snr_db) { return std::bit_cast<std::uint64_t>(snr_db); }

/// Runs job(i) for i in [0, count) on `threads` workers. Each job writes only
/// its own output slot, so the collected order is the index order.
inline void parallel_for(Index count, unsigned threads, const std::function<void(Index)>& job) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<Index>(count, 1))));
    if (threads == 1) {
        for (Index i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<Index> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (Index i = next++; i < count; i = next++) job(i);
        });
    }
}

/// Success: MSE at or below the per-entry noise variance; noiseless trials
/// require relative error <= 1e-6 instead.
inline bool is_success(const BlockVector& truth, const BlockVector& estimate, double noise_var) {
    if (noise_var == 0.0) {
        const double ref = truth.norm();
        const double err = (truth.coeffs() - estimate.coeffs()).norm();
        return ref == 0.0 ? err == 0.0 : err <= 1e-6 * ref;
    }
    return mse(truth, estimate) <= noise_var;
}

template <class Clock = std::chrono::steady_clock>
double millis_since(typename Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace detail

/// Aggregates records by (s, sigma, M, snr, mode), in first-seen order.
inline std::vector<CellSummary> summarize(const std::vector<TrialRecord>& records) {
    std::vector<CellSummary> cells;
    std::map<std::tuple<Index, Index, Index, std::uint64_t, std::string>, Index> slot;
    std::vector<double> detection_sum;
    for (const auto& r : records) {
        const auto key = std::make_tuple(r.s, r.sigma, r.M, detail::snr_key(r.snr_db), r.mode);
        auto [it, inserted] = slot.try_emplace(key, cells.size());
        if (inserted) {
            cells.push_back({r.s, r.sigma, r.M, r.snr_db, r.mode});
            detection_sum.push_back(0.0);
        }
        auto& c = cells[it->second];
        ++c.trials;
        c.successes += r.success ? 1 : 0;
        detection_sum[it->second] += r.detection_rate;
    }
    for (Index i = 0; i < cells.size(); ++i) {
        auto& c = cells[i];
        const double n = static_cast<double>(c.trials);
        c.success_rate = static_cast<double>(c.successes) / n;
        c.success_stderr = std::sqrt(c.success_rate * (1.0 - c.success_rate) / n);
        c.detection_rate = detection_sum[i] / n;
    }
    return cells;
}

// ---------------------------------------------------------------------------
// Scenarios

inline ExperimentResult run_recovery_grid(const ExperimentConfig& cfg) {
    cfg.validate();
    const BlockStructure structure(cfg.block_lengths);

    struct Job {
        Index s, sigma;
        double snr;
        Index trial;
    };
    std::vector<Job> jobs;
    ExperimentResult result;
    for (double snr : cfg.snr_db) {
        for (Index s : cfg.s_values) {
            for (Index sigma : cfg.sigma_values) {
                const bool sigma_ok = std::all_of(cfg.block_lengths.begin(), cfg.block_lengths.end(),
                                                  [&](Index n) { return sigma <= n; });
                if (s < 1 || s > cfg.N || !sigma_ok || sigma < 1) {
                    result.skipped.push_back("cell (s=" + std::to_string(s) + ", sigma=" + std::to_string(sigma) +
                                             ") infeasible for N=" + std::to_string(cfg.N));
                    continue;
                }
                for (Index t = 0; t < cfg.trials; ++t) jobs.push_back({s, sigma, snr, t});
            }
        }
    }

    result.records.resize(jobs.size());
    detail::parallel_for(jobs.size(), cfg.threads, [&](Index j) {
        const auto& job = jobs[j];
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed =
            derive_seed(cfg.master_seed, {1, job.s, job.sigma, detail::snr_key(job.snr), job.trial});
        const auto k = HiSparsity::uniform(job.s, cfg.N, job.sigma);
        const auto H = gaussian_dft_operator(cfg.M, cfg.m, structure, seed);
        const auto x = generate_signal(structure, k, derive_seed(seed, Stream::signal));
        const Vector clean = H.apply(x);
        const Vector y = add_noise(clean, job.snr, derive_seed(seed, Stream::noise));
        const auto sol = hihtp(H, y, k, cfg.solver);

        TrialRecord& r = result.records[j];
        r.scenario = to_string(Scenario::recovery_grid);
        r.s = job.s;
        r.sigma = job.sigma;
        r.M = cfg.M;
        r.N = cfg.N;
        r.m = cfg.m;
        r.snr_db = job.snr;
        r.mode = "uniform";
        r.trial = job.trial;
        r.seed = seed;
        r.mse = mse(x, sol.estimate);
        r.success = detail::is_success(x, sol.estimate, noise_variance(clean, job.snr));
        r.detection_rate = detection_rate(active_blocks(x), active_blocks(sol.estimate));
        r.iterations = sol.iterations;
        r.wall_millis = cfg.record_timing ? detail::millis_since(start) : 0.0;
    });
    result.cells = summarize(result.records);
    return result;
}

inline ExperimentResult run_block_detection(const ExperimentConfig& cfg) {
    cfg.validate();
    hisparse::detail::require_valid(cfg.s_values.size() == 1 && cfg.sigma_values.size() == 1,
                          "block-detection: expects a single (s, sigma)");
    const Index s = cfg.s_values.front();
    const Index sigma = cfg.sigma_values.front();
    const auto& det = cfg.detection;
    hisparse::detail::require_valid(s <= cfg.N && sigma <= det.front_width, "block-detection: infeasible (s, sigma)");

    const auto uniform_structure = BlockStructure::uniform(cfg.N, det.long_length);
    const auto k = HiSparsity::uniform(s, cfg.N, sigma);
    const Index designated_count =
        static_cast<Index>(std::lround(det.short_fraction * static_cast<double>(cfg.N)));

    struct Job {
        Index M;
        double snr;
        Index trial;
    };
    std::vector<Job> jobs;
    for (Index M : cfg.antenna_sweep()) {
        for (double snr : cfg.snr_db) {
            for (Index t = 0; t < cfg.trials; ++t) jobs.push_back({M, snr, t});
        }
    }

    ExperimentResult result;
    result.records.resize(jobs.size() * 2);
    detail::parallel_for(jobs.size(), cfg.threads, [&](Index j) {
        const auto& job = jobs[j];
        const std::uint64_t seed = derive_seed(cfg.master_seed, {2, job.M, detail::snr_key(job.snr), job.trial});

        Rng designate(derive_seed(seed, Stream::probe));
        const auto short_blocks = hisparse::detail::sample_subset(hisparse::detail::iota_vector(cfg.N), designated_count, designate);
        Placement placement{det.front_width, std::vector<bool>(cfg.N, false)};
        for (Index i : short_blocks) placement.front_loaded[i] = true;

        const auto H_uniform = gaussian_dft_operator(job.M, cfg.m, uniform_structure, seed);
        std::vector<Matrix> mixed_Bs = H_uniform.Bs();
        std::vector<Index> mixed_lengths(cfg.N, det.long_length);
        for (Index i : short_blocks) {
            mixed_Bs[i] = leading_columns(mixed_Bs[i], det.front_width);
            mixed_lengths[i] = det.front_width;
        }
        const HierarchicalOperator H_mixed(H_uniform.A(), std::move(mixed_Bs));

        const auto x = generate_signal(uniform_structure, k, derive_seed(seed, Stream::signal), placement);
        BlockVector x_mixed(BlockStructure{mixed_lengths});
        for (Index i = 0; i < cfg.N; ++i) x_mixed.block(i) = x.block(i).head(static_cast<Eigen::Index>(mixed_lengths[i]));

        const Vector clean = H_uniform.apply(x);
        const Vector y = add_noise(clean, job.snr, derive_seed(seed, Stream::noise));
        const double noise_var = noise_variance(clean, job.snr);
        const auto truth = active_blocks(x);

        auto record = [&](TrialRecord& r, const char* mode, const HierarchicalOperator& H, const BlockVector& ref) {
            const auto start = std::chrono::steady_clock::now();
            const auto sol = hihtp(H, y, k, cfg.solver);
            r.scenario = to_string(Scenario::block_detection);
            r.s = s;
            r.sigma = sigma;
            r.M = job.M;
            r.N = cfg.N;
            r.m = cfg.m;
            r.snr_db = job.snr;
            r.mode = mode;
            r.trial = job.trial;
            r.seed = seed;
            r.mse = mse(ref, sol.estimate);
            r.success = detail::is_success(ref, sol.estimate, noise_var);
            r.detection_rate = detection_rate(truth, active_blocks(sol.estimate));
            r.iterations = sol.iterations;
            r.wall_millis = cfg.record_timing ? detail::millis_since(start) : 0.0;
        };
        record(result.records[2 * j], "uniform", H_uniform, x);
        record(result.records[2 * j + 1], "mixed", H_mixed, x_mixed);
    });
    result.cells = summarize(result.records);
    return result;
}

// ---------------------------------------------------------------------------
// Composition-bound verification

struct InstanceReport {
    Index index = 0;
    std::uint64_t seed = 0;
    Index M = 0, N = 0, m = 0, s = 0;
    std::vector<Index> block_lengths;
    std::vector<Index> sigma;
    std::vector<std::string> block_kinds;  // "gaussian" | "dft" | "identity"
    rip::TheoremReport theorem;
    rip::ColumnNecessityReport necessity;
    rip::Prop1Report prop1;
    rip::Lemma1Report lemma1;
    double gram_identity_error = 0.0;  // | <A^*A, G> - ||Hx||^2 |, relative
};

struct CheckSummary {
    Index checked = 0;
    Index violations = 0;
    Index vacuous = 0;
    double worst_slack = 0.0;

    friend bool operator==(const CheckSummary&, const CheckSummary&) = default;
};

struct TheoremVerifyReport {
    std::uint64_t master_seed = 0;
    std::string ensemble;
    Index instances = 0;
    Index skipped = 0;
    CheckSummary theorem, necessity, prop1, lemma1;
    double worst_gram_identity_error = 0.0;
    bool passed = false;
    std::vector<InstanceReport> details;
};

namespace detail {

inline void fold(CheckSummary& c, bool passed, double slack, bool vacuous = false) {
    if (vacuous) {
        ++c.vacuous;
        return;
    }
    c.worst_slack = c.checked == 0 ? slack : std::min(c.worst_slack, slack);
    ++c.checked;
    c.violations += passed ? 0 : 1;
}

inline Index uniform_between(Rng& rng, Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, std::max(lo, hi))(rng);
}

/// Unit-norm sigma-sparse vector of length n.
inline Vector random_sparse_unit(Index n, Index sigma, Rng& rng) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(n));
    for (Index j : hisparse::detail::sample_subset(hisparse::detail::iota_vector(n), sigma, rng)) g[static_cast<Eigen::Index>(j)] = complex_gaussian(rng);
    return g / g.norm();
}

inline InstanceReport theorem_instance(const TheoremSettings& ts, std::uint64_t seed, Index index) {
    InstanceReport rep;
    rep.index = index;
    rep.seed = seed;
    Rng rng(seed);
    const rip::EnumerationOptions opts{ts.budget, 1};

    HierarchicalOperator H;
    if (ts.ensemble == "identity") {
        const Index n = uniform_between(rng, 1, ts.max_n);
        H = identity_operator(n);
        rep.block_kinds = {"identity"};
        rep.s = 1;
        rep.sigma = {uniform_between(rng, 1, std::min(ts.max_sigma, n))};
    } else {
        const Index N = uniform_between(rng, 1, ts.max_N);
        const Index M = uniform_between(rng, 1, ts.max_M);
        const Index m = uniform_between(rng, 1, ts.max_m);
        Matrix A = gaussian_matrix(M, N, derive_seed(seed, Stream::channel_gains));
        std::vector<Matrix> Bs;
        for (Index i = 0; i < N; ++i) {
            const Index n = uniform_between(rng, 1, ts.max_n);
            const bool dft = m <= n && std::bernoulli_distribution(0.5)(rng);
            const auto bseed = derive_seed(seed, Stream::block_matrix, i);
            Bs.push_back(dft ? subsampled_dft(m, n, bseed) : gaussian_matrix(m, n, bseed));
            rep.block_kinds.push_back(dft ? "dft" : "gaussian");
            rep.sigma.push_back(uniform_between(rng, 1, std::min(ts.max_sigma, n)));
        }
        H = HierarchicalOperator(std::move(A), std::move(Bs));
        rep.s = uniform_between(rng, 1, std::min(ts.max_s, N));
    }
    rep.M = H.antennas();
    rep.N = H.num_blocks();
    rep.m = H.rows_per_antenna();
    rep.block_lengths = H.input_structure().block_sizes();
    const HiSparsity k{rep.s, rep.sigma};

    rep.theorem = rip::theorem_check(H, k, 1e-10, opts);
    rep.necessity = rip::column_necessity_check(H, k, 1e-10, opts);

    // Proposition premise: s blocks whose unit sigma_i-sparse probes look alike.
    Rng probe(derive_seed(seed, Stream::probe));
    const auto S = hisparse::detail::sample_subset(hisparse::detail::iota_vector(rep.N), rep.s, probe);
    std::map<Index, Vector> g;
    for (Index i : S) g.emplace(i, random_sparse_unit(rep.block_lengths[i], rep.sigma[i], probe));
    rep.prop1 = rip::prop1_check(H, k, S, g, 1e-9, opts);

    // Trace inequality on the Gram matrix of a random (s, sigma)-sparse signal.
    const auto x = generate_signal(H.input_structure(), k, derive_seed(seed, Stream::signal));
    const Matrix G = rip::gram_matrix(H, x);
    rep.lemma1 = rip::lemma1_check(H.A(), G, rep.s, 1e-9, opts);
    const double energy = H.apply(x).squaredNorm();
    rep.gram_identity_error =
        std::abs(rip::frobenius_inner_real(H.A().adjoint() * H.A(), G) - energy) / std::max(energy, 1e-300);
    return rep;
}

} // namespace detail

inline TheoremVerifyReport run_theorem_verify(const ExperimentConfig& cfg) {
    const auto& ts = cfg.theorem;
    hisparse::detail::require_valid(ts.ensemble == "random" || ts.ensemble == "identity",
                          "theorem-verify: ensemble must be 'random' or 'identity'");
    hisparse::detail::require_valid(ts.max_M >= 1 && ts.max_N >= 1 && ts.max_m >= 1 && ts.max_n >= 1 && ts.max_s >= 1 &&
                              ts.max_sigma >= 1,
                          "theorem-verify: dimension bounds must be positive");
    TheoremVerifyReport report;
    report.master_seed = cfg.master_seed;
    report.ensemble = ts.ensemble;

    std::vector<std::optional<InstanceReport>> slots(ts.instances);
    detail::parallel_for(ts.instances, cfg.threads, [&](Index i) {
        try {
            slots[i] = detail::theorem_instance(ts, derive_seed(cfg.master_seed, {3, i}), i);
        } catch (const BudgetExceeded&) {
            slots[i].reset();
        }
    });

    for (auto& slot : slots) {
        if (!slot) {
            ++report.skipped;
            continue;
        }
        const auto& r = *slot;
        detail::fold(report.theorem, r.theorem.passed, r.theorem.slack);
        detail::fold(report.necessity, r.necessity.passed, r.necessity.worst_slack);
        detail::fold(report.prop1, r.prop1.passed, r.prop1.slack, r.prop1.vacuous);
        detail::fold(report.lemma1, r.lemma1.passed, r.lemma1.slack);
        report.worst_gram_identity_error = std::max(report.worst_gram_identity_error, r.gram_identity_error);
        report.details.push_back(std::move(*slot));
    }
    report.instances = report.details.size();
    report.passed = report.theorem.violations == 0 && report.necessity.violations == 0 &&
                    report.prop1.violations == 0 && report.lemma1.violations == 0 &&
                    report.worst_gram_identity_error <= 1e-10;
    return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json snr_to_json(double snr) {
    if (std::isinf(snr)) return snr > 0 ? "inf" : "-inf";
    return snr;
}

inline double snr_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kNoiselessSnr;
        throw ValidationError("snr_db: unsupported string '" + s + "'");
    }
    return j.get<double>();
}

inline std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr char kCsvHeader[] =
    "scenario,s,sigma,M,N,m,snr_db,mode,trial,seed,mse,success,detection_rate,iterations,wall_millis";

inline void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.scenario << ',' << r.s << ',' << r.sigma << ',' << r.M << ',' << r.N << ',' << r.m << ','
            << format_double(r.snr_db) << ',' << r.mode << ',' << r.trial << ',' << r.seed << ','
            << format_double(r.mse) << ',' << (r.success ? 1 : 0) << ',' << format_double(r.detection_rate) << ','
            << r.iterations << ',' << format_double(r.wall_millis) << '\n';
    }
}

inline std::string trials_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    write_trials_csv(os, records);
    return os.str();
}

inline nlohmann::json to_json(const CellSummary& c) {
    return {{"s", c.s},
            {"sigma", c.sigma},
            {"M", c.M},
            {"snr_db", snr_to_json(c.snr_db)},
            {"mode", c.mode},
            {"trials", c.trials},
            {"successes", c.successes},
            {"success_rate", c.success_rate},
            {"success_stderr", c.success_stderr},
            {"detection_rate", c.detection_rate}};
}

inline nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : result.cells) cells.push_back(to_json(c));
    return {{"scenario", to_string(cfg.scenario)},
            {"master_seed", cfg.master_seed},
            {"trials_per_cell", cfg.trials},
            {"records", result.records.size()},
            {"cells", std::move(cells)},
            {"skipped", result.skipped}};
}

inline nlohmann::json to_json(const CheckSummary& c) {
    return {{"checked", c.checked}, {"violations", c.violations}, {"vacuous", c.vacuous}, {"worst_slack", c.worst_slack}};
}

inline CheckSummary check_summary_from_json(const nlohmann::json& j) {
    return {j.at("checked").get<Index>(), j.at("violations").get<Index>(), j.at("vacuous").get<Index>(),
            j.at("worst_slack").get<double>()};
}

inline nlohmann::json to_json(const InstanceReport& r) {
    return {{"index", r.index},
            {"seed", r.seed},
            {"M", r.M},
            {"N", r.N},
            {"m", r.m},
            {"s", r.s},
            {"block_lengths", r.block_lengths},
            {"sigma", r.sigma},
            {"block_kinds", r.block_kinds},
            {"theorem", rip::to_json(r.theorem)},
            {"column_necessity", rip::to_json(r.necessity)},
            {"prop1", rip::to_json(r.prop1)},
            {"lemma1", rip::to_json(r.lemma1)},
            {"gram_identity_error", r.gram_identity_error}};
}

inline nlohmann::json to_json(const TheoremVerifyReport& r) {
    nlohmann::json details = nlohmann::json::array();
    for (const auto& d : r.details) details.push_back(to_json(d));
    return {{"scenario", to_string(Scenario::theorem_verify)},
            {"master_seed", r.master_seed},
            {"ensemble", r.ensemble},
            {"instances", r.instances},
            {"skipped", r.skipped},
            {"summary",
             {{"theorem", to_json(r.theorem)},
              {"column_necessity", to_json(r.necessity)},
              {"prop1", to_json(r.prop1)},
              {"lemma1", to_json(r.lemma1)},
              {"worst_gram_identity_error", r.worst_gram_identity_error}}},
            {"passed", r.passed},
            {"details", std::move(details)}};
}

/// Reads the summary part of a report; per-instance details are not restored.
inline TheoremVerifyReport theorem_report_from_json(const nlohmann::json& j) {
    TheoremVerifyReport r;
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.ensemble = j.at("ensemble").get<std::string>();
    r.instances = j.at("instances").get<Index>();
    r.skipped = j.at("skipped").get<Index>();
    const auto& s = j.at("summary");
    r.theorem = check_summary_from_json(s.at("theorem"));
    r.necessity = check_summary_from_json(s.at("column_necessity"));
    r.prop1 = check_summary_from_json(s.at("prop1"));
    r.lemma1 = check_summary_from_json(s.at("lemma1"));
    r.worst_gram_identity_error = s.at("worst_gram_identity_error").get<double>();
    r.passed = j.at("passed").get<bool>();
    return r;
}

// ---------------------------------------------------------------------------
// Config file

/// Overlays the keys present in `j` onto `base`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base) {
    auto& c = base;
    if (j.contains("scenario")) c.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("M")) c.M = j.at("M").get<Index>();
    if (j.contains("M_values")) c.M_values = j.at("M_values").get<std::vector<Index>>();
    if (j.contains("N")) c.N = j.at("N").get<Index>();
    if (j.contains("m")) c.m = j.at("m").get<Index>();
    if (j.contains("block_lengths")) {
        const auto& b = j.at("block_lengths");
        c.block_lengths = b.is_array() ? b.get<std::vector<Index>>() : std::vector<Index>(c.N, b.get<Index>());
    } else if (j.contains("N")) {
        const Index n = c.block_lengths.empty() ? 32 : c.block_lengths.front();
        c.block_lengths.assign(c.N, n);
    }
    if (j.contains("s_values")) c.s_values = j.at("s_values").get<std::vector<Index>>();
    if (j.contains("sigma_values")) c.sigma_values = j.at("sigma_values").get<std::vector<Index>>();
    if (j.contains("snr_db")) {
        c.snr_db.clear();
        for (const auto& v : j.at("snr_db")) c.snr_db.push_back(snr_from_json(v));
    }
    if (j.contains("trials")) c.trials = j.at("trials").get<Index>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j.at("threads").get<unsigned>();
    if (j.contains("record_timing")) c.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
        c.solver.support_stall_stop = s.value("support_stall_stop", c.solver.support_stall_stop);
        c.solver.residual_tol = s.value("residual_tol", c.solver.residual_tol);
        c.solver.ls_tol = s.value("ls_tol", c.solver.ls_tol);
        c.solver.ls_max_iters = s.value("ls_max_iters", c.solver.ls_max_iters);
        c.solver.direct_solve_threshold = s.value("direct_solve_threshold", c.solver.direct_solve_threshold);
    }
    if (j.contains("detection")) {
        const auto& d = j.at("detection");
        c.detection.long_length = d.value("long_length", c.detection.long_length);
        c.detection.front_width = d.value("front_width", c.detection.front_width);
        c.detection.short_fraction = d.value("short_fraction", c.detection.short_fraction);
    }
    if (j.contains("theorem")) {
        const auto& t = j.at("theorem");
        auto& ts = c.theorem;
        ts.instances = t.value("instances", ts.instances);
        ts.max_M = t.value("max_M", ts.max_M);
        ts.max_N = t.value("max_N", ts.max_N);
        ts.max_m = t.value("max_m", ts.max_m);
        ts.max_n = t.value("max_n", ts.max_n);
        ts.max_s = t.value("max_s", ts.max_s);
        ts.max_sigma = t.value("max_sigma", ts.max_sigma);
        ts.ensemble = t.value("ensemble", ts.ensemble);
        ts.budget = t.value("budget", ts.budget);
    }
    return c;
}

} // namespace hisparse::harness
