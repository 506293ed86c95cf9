#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rkq/bq.hpp"
#include "rkq/embedding.hpp"
#include "rkq/geometry.hpp"
#include "rkq/hyper_mcmc.hpp"
#include "rkq/integrands.hpp"
#include "rkq/kernel.hpp"
#include "rkq/measure.hpp"
#include "rkq/sampling.hpp"
#include "rkq/uq.hpp"

namespace rkq {

enum class ExperimentKind { RbfGaussian, MaternGaussian, MaternStudent, AppendixB, RateStudy, FillStudy, McmcHypers };

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::RbfGaussian: return "rbf-gaussian";
        case ExperimentKind::MaternGaussian: return "matern-gaussian";
        case ExperimentKind::MaternStudent: return "matern-student";
        case ExperimentKind::AppendixB: return "appendix-b";
        case ExperimentKind::RateStudy: return "rate-study";
        case ExperimentKind::FillStudy: return "fill-study";
        case ExperimentKind::McmcHypers: return "mcmc-hypers";
    }
    return "unknown";
}

inline ExperimentKind parse_experiment(const std::string& s) {
    for (ExperimentKind k : {ExperimentKind::RbfGaussian, ExperimentKind::MaternGaussian,
                             ExperimentKind::MaternStudent, ExperimentKind::AppendixB, ExperimentKind::RateStudy,
                             ExperimentKind::FillStudy, ExperimentKind::McmcHypers})
        if (s == experiment_name(k)) return k;
    throw std::invalid_argument("unknown experiment: " + s);
}

enum class ProposalMode { Inflated, Target, Sequential };

inline const char* proposal_mode_name(ProposalMode m) {
    switch (m) {
        case ProposalMode::Inflated: return "inflated";
        case ProposalMode::Target: return "target";
        case ProposalMode::Sequential: return "sequential";
    }
    return "unknown";
}

inline ProposalMode parse_proposal_mode(const std::string& s) {
    if (s == "inflated") return ProposalMode::Inflated;
    if (s == "target") return ProposalMode::Target;
    if (s == "sequential") return ProposalMode::Sequential;
    throw std::invalid_argument("unknown proposal mode: " + s);
}

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::RbfGaussian;
    std::size_t n_max = 150;
    std::vector<std::size_t> n_grid;  // empty means {n_max}
    std::size_t repetitions = 100;
    std::size_t mixture_draws = 100;
    std::uint64_t seed = 1;

    ProposalMode proposal = ProposalMode::Inflated;
    double alpha = 1.5;
    bool include_alpha_factor = false;

    bool fixed_hypers = false;
    double sigma_f2 = 1.0;
    double ell = 0.5;
    std::size_t pilot_n = 100;
    std::size_t mcmc_iterations = 1000;
    std::size_t mcmc_burn_in = 200;
    double mcmc_step = 0.2;
    bool mcmc_include_log_det = false;
    HyperPrior prior;

    double nugget = kDefaultNugget;
    double embedding_rel_tol = 1e-8;
    PriorVarianceMethod prior_variance_method = PriorVarianceMethod::NestedQuadrature;
    std::size_t prior_mc_samples = 1000000;
    std::string kernel_override;  // appendix-b and studies: "rbf" or "matern"

    std::size_t workers = 1;
    std::string output_dir = "out";

    void validate() const {
        if (repetitions < 1) throw std::invalid_argument("config: repetitions must be >= 1");
        if (mixture_draws < 1) throw std::invalid_argument("config: mixture_draws must be >= 1");
        for (std::size_t i = 1; i < n_grid.size(); ++i)
            if (n_grid[i] <= n_grid[i - 1]) throw std::invalid_argument("config: n_grid must be strictly increasing");
    }

    std::vector<std::size_t> grid() const { return n_grid.empty() ? std::vector<std::size_t>{n_max} : n_grid; }

    // canonical serialization: the config hash and the determinism contract
    // are both defined over this string
    std::string canonical() const {
        std::ostringstream os;
        os << "experiment=" << experiment_name(experiment) << ";n_max=" << n_max << ";n_grid=";
        for (std::size_t n : n_grid) os << n << ",";
        os << ";repetitions=" << repetitions << ";mixture_draws=" << mixture_draws << ";seed=" << seed
           << ";proposal=" << proposal_mode_name(proposal) << ";alpha=" << fmt(alpha)
           << ";include_alpha_factor=" << include_alpha_factor << ";fixed_hypers=" << fixed_hypers
           << ";sigma_f2=" << fmt(sigma_f2) << ";ell=" << fmt(ell) << ";pilot_n=" << pilot_n
           << ";mcmc_iterations=" << mcmc_iterations << ";mcmc_burn_in=" << mcmc_burn_in
           << ";mcmc_step=" << fmt(mcmc_step) << ";mcmc_include_log_det=" << mcmc_include_log_det
           << ";alpha_f=" << fmt(prior.alpha_f) << ";beta_f=" << fmt(prior.beta_f)
           << ";ell_log_mean=" << fmt(prior.ell_log_mean) << ";ell_log_variance=" << fmt(prior.ell_log_variance)
           << ";nugget=" << fmt(nugget) << ";embedding_rel_tol=" << fmt(embedding_rel_tol)
           << ";prior_variance_method="
           << (prior_variance_method == PriorVarianceMethod::NestedQuadrature ? "quadrature" : "mc")
           << ";prior_mc_samples=" << prior_mc_samples << ";kernel=" << kernel_override;
        return os.str();
    }

    std::uint64_t hash() const {
        std::string s = canonical();
        std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    static std::string fmt(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }
};

// A fully wired experiment: kernel family, integrand, measure and the two
// competing samplers.
struct ExperimentSetting {
    KernelVariant kernel_variant = KernelVariant::RBF;
    Integrand integrand;
    Measure measure = Measure::gaussian(0.0, 1.0);
    Proposal inflated;
    Proposal baseline;
    bool numeric_embedding = false;
};

inline KernelVariant parse_kernel_variant(const std::string& s) {
    if (s == "rbf") return KernelVariant::RBF;
    if (s == "matern" || s == "matern32") return KernelVariant::Matern32;
    throw std::invalid_argument("unknown kernel: " + s);
}

inline ExperimentSetting experiment_setting(const ExperimentConfig& cfg) {
    ExperimentSetting s;
    const Measure gauss = Measure::gaussian(0.0, 1.0);
    switch (cfg.experiment) {
        case ExperimentKind::RbfGaussian:
        case ExperimentKind::McmcHypers:
            s.kernel_variant = KernelVariant::RBF;
            s.integrand = make_integrand(IntegrandId::F1);
            s.measure = gauss;
            break;
        case ExperimentKind::MaternGaussian:
        case ExperimentKind::RateStudy:
            s.kernel_variant = KernelVariant::Matern32;
            s.integrand = make_integrand(IntegrandId::F1);
            s.measure = gauss;
            break;
        case ExperimentKind::MaternStudent:
            s.kernel_variant = KernelVariant::Matern32;
            s.integrand = make_integrand(IntegrandId::F2Changed);
            s.measure = Measure::student_t(kChangeOfMeasureNuProposal, 1.0);
            s.numeric_embedding = true;
            break;
        case ExperimentKind::AppendixB:
        case ExperimentKind::FillStudy:
            s.kernel_variant = KernelVariant::RBF;
            s.integrand.id = IntegrandId::F2;
            s.integrand.eval = evaluate_f2;
            s.integrand.target_measure = gauss;
            s.measure = gauss;
            break;
    }
    if (!cfg.kernel_override.empty()) s.kernel_variant = parse_kernel_variant(cfg.kernel_override);
    if (s.measure.variant == MeasureVariant::Gaussian) {
        s.inflated = Proposal::gaussian_inflated(s.measure, cfg.alpha, cfg.include_alpha_factor);
    } else {
        s.inflated = Proposal::student_inflated(s.measure, cfg.alpha);
    }
    s.baseline = Proposal::baseline(s.measure);
    return s;
}

namespace detail {

// sub-seed domains local to the experiment layer
inline constexpr std::uint64_t kPilotTag = 0x10;
inline constexpr std::uint64_t kRepTag = 0x11;
inline constexpr std::uint64_t kGridTag = 0x13;
inline constexpr std::uint64_t kPriorTag = 0x12;

}  // namespace detail

struct HyperEstimate {
    double sigma_f2 = 0.0;
    double ell = 0.0;
    bool from_mcmc = false;
    HyperChain chain;  // populated when from_mcmc
};

// Posterior-average hyperparameters from a pilot chain on pilot_n points
// drawn from the inflated proposal, or the fixed override.
inline HyperEstimate estimate_hypers(const ExperimentConfig& cfg, const ExperimentSetting& s) {
    if (cfg.fixed_hypers) {
        if (!(cfg.sigma_f2 > 0.0) || !(cfg.ell > 0.0))
            throw std::invalid_argument("fixed hyperparameters must be positive");
        return {cfg.sigma_f2, cfg.ell, false, {}};
    }
    std::vector<double> pts = draw_iid(s.inflated, cfg.pilot_n, derive_seed(cfg.seed, detail::kPilotTag, 0));
    std::vector<double> vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = s.integrand.eval(pts[i]);
    GibbsConfig gc;
    gc.iterations = cfg.mcmc_iterations;
    gc.burn_in = cfg.mcmc_burn_in;
    gc.step_size = cfg.mcmc_step;
    gc.nugget = cfg.nugget;
    gc.include_log_det = cfg.mcmc_include_log_det;
    HyperChain chain = run_gibbs(vals, pts, cfg.prior, s.kernel_variant, gc, cfg.seed);
    return {chain.sigma_f2_mean, chain.ell_mean, true, std::move(chain)};
}

inline Embedding build_embedding(const ExperimentConfig& cfg, const ExperimentSetting& s, const Kernel& k) {
    if (!s.numeric_embedding) return make_embedding_closed(k, s.measure);
    return make_embedding_numeric(k, s.measure, cfg.embedding_rel_tol, cfg.prior_variance_method,
                                  cfg.prior_mc_samples, derive_seed(cfg.seed, detail::kPriorTag, 0));
}

struct PerNRecord {
    std::size_t n = 0;
    double posterior_mean = 0.0;
    double posterior_variance = 0.0;
    double wce = 0.0;
    double fill = 0.0;
    double radius = 0.0;
    double elapsed_seconds = 0.0;  // reported on stderr, never in CSV
};

struct RepetitionRecord {
    std::size_t repetition = 0;
    std::vector<PerNRecord> per_n;
    bool failed = false;
    std::string error;
};

struct NAggregate {
    std::size_t n = 0;
    TotalVarianceReport report;
    std::vector<double> quantiles;  // at (0.025, 0.975)
    double median_wce = 0.0;
    double median_fill = 0.0;
};

struct RunResult {
    ExperimentConfig config;
    HyperEstimate hypers;
    std::vector<RepetitionRecord> repetitions;
    std::vector<NAggregate> aggregates;  // one per n in the grid
    std::size_t failed_repetitions = 0;
};

namespace detail {

inline std::vector<double> design_for(const ExperimentSetting& s, ProposalMode mode, std::size_t n,
                                      std::uint64_t seed) {
    switch (mode) {
        case ProposalMode::Inflated: return draw_iid(s.inflated, n, seed);
        case ProposalMode::Target: return draw_iid(s.baseline, n, seed);
        case ProposalMode::Sequential: return draw_sequential(s.inflated, n, seed);
    }
    throw std::logic_error("unknown proposal mode");
}

inline const Proposal& active_proposal(const ExperimentSetting& s, ProposalMode mode) {
    return mode == ProposalMode::Target ? s.baseline : s.inflated;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

// One repetition: walk the n grid, fit the posterior at each size. Records
// are appended to `rec` as they complete, so a caller catching an error
// still sees the finished prefix.
inline void run_repetition(const ExperimentConfig& cfg, const ExperimentSetting& s, const Kernel& k,
                           const Embedding& emb, std::size_t rep_index, std::uint64_t rep_seed,
                           RepetitionRecord& rec) {
    rec.repetition = rep_index;
    const std::vector<std::size_t> grid = cfg.grid();
    std::vector<double> seq_points;
    if (cfg.proposal == ProposalMode::Sequential)
        seq_points = draw_sequential(s.inflated, grid.back(), rep_seed);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const std::size_t n = grid[gi];
        auto t0 = std::chrono::steady_clock::now();
        std::vector<double> pts;
        if (cfg.proposal == ProposalMode::Sequential)
            pts.assign(seq_points.begin(), seq_points.begin() + static_cast<std::ptrdiff_t>(n));
        else
            pts = design_for(s, cfg.proposal, n, derive_seed(rep_seed, kGridTag, gi));
        Design d;
        d.points = pts;
        d.values.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.values[i] = s.integrand.eval(pts[i]);
        d.provenance = std::string(proposal_mode_name(cfg.proposal)) + ":" + std::to_string(rep_seed);

        QuadraturePosterior post = bq_posterior(k, emb, d, cfg.nugget);
        PerNRecord r;
        r.n = n;
        r.posterior_mean = post.mean;
        r.posterior_variance = post.variance;
        r.wce = worst_case_error(post);
        r.radius = effective_radius(active_proposal(s, cfg.proposal), n);
        r.fill = fill_distance_1d(pts, r.radius);
        r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rec.per_n.push_back(r);
    }
}

inline void run_repetitions_parallel(const ExperimentConfig& cfg, const ExperimentSetting& s, const Kernel& k,
                                     const Embedding& emb, std::vector<RepetitionRecord>& out) {
    const std::size_t r_total = cfg.repetitions;
    out.resize(r_total);
    const std::size_t workers = std::max<std::size_t>(1, cfg.workers);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t r = next.fetch_add(1);
            if (r >= r_total) return;
            std::uint64_t rep_seed = derive_seed(cfg.seed, kRepTag, r);
            try {
                out[r] = RepetitionRecord{};
                run_repetition(cfg, s, k, emb, r, rep_seed, out[r]);
            } catch (const std::exception& e) {
                out[r].repetition = r;
                out[r].failed = true;
                out[r].error = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
}

}  // namespace detail

inline void write_run_csv(const RunResult& result);

// Single pass over the n grid (one repetition). A module error aborts with
// (experiment, n, seed) context after flushing the completed sizes to CSV.
inline RunResult run_single(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentSetting s = experiment_setting(cfg);
    RunResult result;
    result.config = cfg;
    result.hypers = estimate_hypers(cfg, s);
    Kernel k = Kernel::make(s.kernel_variant, result.hypers.sigma_f2, result.hypers.ell);
    Embedding emb = build_embedding(cfg, s, k);
    std::uint64_t rep_seed = derive_seed(cfg.seed, detail::kRepTag, 0);

    const std::vector<std::size_t> grid = cfg.grid();
    RepetitionRecord rec;
    std::string failure;
    try {
        detail::run_repetition(cfg, s, k, emb, 0, rep_seed, rec);
    } catch (const std::exception& e) {
        failure = e.what();
    }
    const std::size_t failed_n = rec.per_n.size() < grid.size() ? grid[rec.per_n.size()] : 0;
    result.repetitions.push_back(std::move(rec));
    for (const PerNRecord& r : result.repetitions[0].per_n) {
        NAggregate agg;
        agg.n = r.n;
        agg.report.grand_mean = r.posterior_mean;
        agg.report.within = r.posterior_variance;
        agg.report.between = 0.0;
        agg.report.total = r.posterior_variance;
        agg.median_wce = r.wce;
        agg.median_fill = r.fill;
        result.aggregates.push_back(std::move(agg));
    }
    if (!failure.empty()) {
        try {
            write_run_csv(result);  // flush whatever completed
        } catch (...) {
        }
        throw std::runtime_error("run_single aborted (experiment=" +
                                 std::string(experiment_name(cfg.experiment)) + ", n=" +
                                 std::to_string(failed_n) + ", seed=" + std::to_string(cfg.seed) +
                                 "): " + failure);
    }
    return result;
}

// R independent repetitions with law-of-total-variance aggregation and
// mixture credible quantiles per grid size.
inline RunResult run_repeated(const ExperimentConfig& cfg) {
    cfg.validate();
    if (cfg.repetitions < 2) throw std::invalid_argument("run_repeated: need repetitions >= 2");
    ExperimentSetting s = experiment_setting(cfg);
    RunResult result;
    result.config = cfg;
    result.hypers = estimate_hypers(cfg, s);
    Kernel k = Kernel::make(s.kernel_variant, result.hypers.sigma_f2, result.hypers.ell);
    Embedding emb = build_embedding(cfg, s, k);

    detail::run_repetitions_parallel(cfg, s, k, emb, result.repetitions);

    for (const RepetitionRecord& rec : result.repetitions)
        if (rec.failed) ++result.failed_repetitions;
    if (result.failed_repetitions > 0) {
        const double frac =
            static_cast<double>(result.failed_repetitions) / static_cast<double>(cfg.repetitions);
        for (const RepetitionRecord& rec : result.repetitions)
            if (rec.failed)
                std::cerr << "warning: repetition " << rec.repetition << " failed: " << rec.error << "\n";
        if (frac > 0.01)
            throw std::runtime_error("run_repeated: " + std::to_string(result.failed_repetitions) +
                                     " repetitions failed (over 1%)");
    }

    const std::vector<std::size_t> grid = cfg.grid();
    const std::vector<double> probs{0.025, 0.975};
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        RepetitionSet reps;
        reps.design_size = grid[gi];
        std::vector<double> wces, fills;
        for (const RepetitionRecord& rec : result.repetitions) {
            if (rec.failed) continue;
            const PerNRecord& r = rec.per_n[gi];
            reps.components.emplace_back(r.posterior_mean, r.posterior_variance);
            wces.push_back(r.wce);
            fills.push_back(r.fill);
        }
        NAggregate agg;
        agg.n = grid[gi];
        agg.report = total_variance(reps);
        agg.quantiles = mixture_quantiles(reps, cfg.mixture_draws, probs, derive_seed(cfg.seed, 0x20, gi));
        agg.median_wce = detail::median_of(wces);
        agg.median_fill = detail::median_of(fills);
        result.aggregates.push_back(std::move(agg));
    }
    return result;
}

struct RateStudyResult {
    ExperimentConfig config;
    HyperEstimate hypers;
    // per family: per-n medians and the log-log fits
    struct FamilyResult {
        ProposalMode mode = ProposalMode::Inflated;
        std::vector<std::pair<double, double>> wce_medians;       // (n, median wce)
        std::vector<std::pair<double, double>> variance_medians;  // (n, median variance)
        RateFit wce_fit;
        RateFit variance_fit;
        RateTarget target;
    };
    std::vector<FamilyResult> families;
};

// Median worst-case error and posterior variance over repetitions at each
// grid size, fitted in log-log space, for the inflated proposal and the
// target baseline.
inline RateStudyResult run_rate_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<std::size_t> grid = cfg.grid();
    if (grid.size() < 3) throw std::invalid_argument("run_rate_study: need at least 3 grid sizes");
    if (!(static_cast<double>(grid.back()) / static_cast<double>(grid.front()) >= 31.0))
        throw std::invalid_argument("run_rate_study: n_grid must span at least 1.5 decades");

    ExperimentSetting s = experiment_setting(cfg);
    RateStudyResult result;
    result.config = cfg;
    result.hypers = estimate_hypers(cfg, s);
    Kernel k = Kernel::make(s.kernel_variant, result.hypers.sigma_f2, result.hypers.ell);
    Embedding emb = build_embedding(cfg, s, k);

    for (ProposalMode mode : {ProposalMode::Inflated, ProposalMode::Target}) {
        ExperimentConfig sub = cfg;
        sub.proposal = mode;
        RunResult reps;
        reps.config = sub;
        detail::run_repetitions_parallel(sub, s, k, emb, reps.repetitions);
        RateStudyResult::FamilyResult fam;
        fam.mode = mode;
        fam.target = rate_target(detail::active_proposal(s, mode));
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            std::vector<double> wces, vars;
            for (const RepetitionRecord& rec : reps.repetitions) {
                if (rec.failed) continue;
                wces.push_back(rec.per_n[gi].wce);
                vars.push_back(rec.per_n[gi].posterior_variance);
            }
            const double n = static_cast<double>(grid[gi]);
            fam.wce_medians.emplace_back(n, detail::median_of(wces));
            fam.variance_medians.emplace_back(n, detail::median_of(vars));
        }
        fam.wce_fit = rate_fit(fam.wce_medians);
        fam.variance_fit = rate_fit(fam.variance_medians);
        result.families.push_back(std::move(fam));
    }
    return result;
}

struct FillStudyResult {
    ExperimentConfig config;
    struct Row {
        std::size_t n = 0;
        double radius = 0.0;
        double median_fill_inflated = 0.0;
        double median_fill_target = 0.0;
    };
    std::vector<Row> rows;
    RateFit inflated_fit;
    RateFit target_fit;
};

// Median fill distance on B_{R_n} over repetitions, for inflated vs target
// sampling, with log-log slopes.
inline FillStudyResult run_fill_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::vector<std::size_t> grid = cfg.grid();
    if (grid.size() < 3) throw std::invalid_argument("run_fill_study: need at least 3 grid sizes");
    ExperimentSetting s = experiment_setting(cfg);

    FillStudyResult result;
    result.config = cfg;
    std::vector<std::pair<double, double>> inflated_pairs, target_pairs;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const std::size_t n = grid[gi];
        const double radius = effective_radius(s.inflated, n);
        std::vector<double> h_inf, h_tgt;
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
            std::uint64_t seed_inf = derive_seed(cfg.seed, 0x30, gi * cfg.repetitions + r);
            std::uint64_t seed_tgt = derive_seed(cfg.seed, 0x31, gi * cfg.repetitions + r);
            h_inf.push_back(fill_distance_1d(draw_iid(s.inflated, n, seed_inf), radius));
            h_tgt.push_back(fill_distance_1d(draw_iid(s.baseline, n, seed_tgt), radius));
        }
        FillStudyResult::Row row;
        row.n = n;
        row.radius = radius;
        row.median_fill_inflated = detail::median_of(h_inf);
        row.median_fill_target = detail::median_of(h_tgt);
        result.rows.push_back(row);
        inflated_pairs.emplace_back(static_cast<double>(n), row.median_fill_inflated);
        target_pairs.emplace_back(static_cast<double>(n), row.median_fill_target);
    }
    result.inflated_fit = rate_fit(inflated_pairs);
    result.target_fit = rate_fit(target_pairs);
    return result;
}

// Pilot design + Metropolis-within-Gibbs chain, the `mcmc` subcommand's payload.
inline HyperEstimate run_mcmc_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentConfig sub = cfg;
    sub.fixed_hypers = false;
    ExperimentSetting s = experiment_setting(sub);
    return estimate_hypers(sub, s);
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& stem) {
    std::filesystem::create_directories(cfg.output_dir);
    std::filesystem::path path = std::filesystem::path(cfg.output_dir) /
                                 (std::string(experiment_name(cfg.experiment)) + "_" + stem + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.hash()));
    out << "# rkq csv v1; config_hash=" << hash << "; rng=splitmix64\n";
    return out;
}

}  // namespace detail

inline void write_run_csv(const RunResult& result) {
    const ExperimentConfig& cfg = result.config;
    {
        std::ofstream out = detail::open_csv(cfg, "trace");
        out << "repetition,n,posterior_mean,posterior_variance,wce,radius,fill\n";
        for (const RepetitionRecord& rec : result.repetitions) {
            if (rec.failed) continue;
            for (const PerNRecord& r : rec.per_n)
                out << rec.repetition << "," << r.n << "," << detail::csv_num(r.posterior_mean) << ","
                    << detail::csv_num(r.posterior_variance) << "," << detail::csv_num(r.wce) << ","
                    << detail::csv_num(r.radius) << "," << detail::csv_num(r.fill) << "\n";
        }
    }
    {
        std::ofstream out = detail::open_csv(cfg, "summary");
        out << "n,grand_mean,within,between,total,q025,q975,median_wce,median_fill,sigma_f2,ell\n";
        for (const NAggregate& agg : result.aggregates) {
            double q025 = agg.quantiles.size() == 2 ? agg.quantiles[0] : agg.report.grand_mean;
            double q975 = agg.quantiles.size() == 2 ? agg.quantiles[1] : agg.report.grand_mean;
            out << agg.n << "," << detail::csv_num(agg.report.grand_mean) << ","
                << detail::csv_num(agg.report.within) << "," << detail::csv_num(agg.report.between) << ","
                << detail::csv_num(agg.report.total) << "," << detail::csv_num(q025) << ","
                << detail::csv_num(q975) << "," << detail::csv_num(agg.median_wce) << ","
                << detail::csv_num(agg.median_fill) << "," << detail::csv_num(result.hypers.sigma_f2) << ","
                << detail::csv_num(result.hypers.ell) << "\n";
        }
    }
}

inline void write_rate_csv(const RateStudyResult& result) {
    const ExperimentConfig& cfg = result.config;
    {
        std::ofstream out = detail::open_csv(cfg, "trace");
        out << "family,n,median_wce,median_variance\n";
        for (const auto& fam : result.families)
            for (std::size_t i = 0; i < fam.wce_medians.size(); ++i)
                out << proposal_mode_name(fam.mode) << "," << static_cast<std::size_t>(fam.wce_medians[i].first)
                    << "," << detail::csv_num(fam.wce_medians[i].second) << ","
                    << detail::csv_num(fam.variance_medians[i].second) << "\n";
    }
    {
        std::ofstream out = detail::open_csv(cfg, "summary");
        out << "family,wce_slope,wce_r2,variance_slope,variance_r2,theory_wce_exponent,theory_variance_exponent\n";
        for (const auto& fam : result.families)
            out << proposal_mode_name(fam.mode) << "," << detail::csv_num(fam.wce_fit.slope) << ","
                << detail::csv_num(fam.wce_fit.r_squared) << "," << detail::csv_num(fam.variance_fit.slope)
                << "," << detail::csv_num(fam.variance_fit.r_squared) << ","
                << detail::csv_num(fam.target.error_exponent) << ","
                << detail::csv_num(fam.target.variance_exponent) << "\n";
    }
}

inline void write_fill_csv(const FillStudyResult& result) {
    const ExperimentConfig& cfg = result.config;
    {
        std::ofstream out = detail::open_csv(cfg, "trace");
        out << "n,radius,median_fill_inflated,median_fill_target\n";
        for (const auto& row : result.rows)
            out << row.n << "," << detail::csv_num(row.radius) << ","
                << detail::csv_num(row.median_fill_inflated) << "," << detail::csv_num(row.median_fill_target)
                << "\n";
    }
    {
        std::ofstream out = detail::open_csv(cfg, "summary");
        out << "family,slope,r2\n";
        out << "inflated," << detail::csv_num(result.inflated_fit.slope) << ","
            << detail::csv_num(result.inflated_fit.r_squared) << "\n";
        out << "target," << detail::csv_num(result.target_fit.slope) << ","
            << detail::csv_num(result.target_fit.r_squared) << "\n";
    }
}

inline void write_mcmc_trace_csv(const ExperimentConfig& cfg, const HyperChain& chain,
                                 const std::string& stem = "trace") {
    std::ofstream out = detail::open_csv(cfg, stem);
    out << "iter,sigma_f2,ell,accepted\n";
    for (std::size_t t = 0; t < chain.samples.size(); ++t)
        out << t << "," << detail::csv_num(chain.samples[t].first) << ","
            << detail::csv_num(chain.samples[t].second) << "," << int(chain.accepted[t]) << "\n";
}

inline void write_mcmc_csv(const ExperimentConfig& cfg, const HyperChain& chain) {
    write_mcmc_trace_csv(cfg, chain);
    std::ofstream out = detail::open_csv(cfg, "summary");
    out << "iterations,burn_in,step_size,acceptance_rate,sigma_f2_mean,ell_mean\n";
    out << chain.samples.size() << "," << chain.burn_in << "," << detail::csv_num(chain.step_size) << ","
        << detail::csv_num(chain.acceptance_rate) << "," << detail::csv_num(chain.sigma_f2_mean) << ","
        << detail::csv_num(chain.ell_mean) << "\n";
}

}  // namespace rkq
