// Command-line harness for the randomized quadrature experiments. Writes
// <output_dir>/<experiment>_{trace,summary}.csv; exit codes: 0 success,
// 1 runtime error, 2 usage error.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rkq/rkq.hpp"

namespace {

using nlohmann::json;

struct CliOptions {
    rkq::ExperimentConfig cfg;
    std::string config_file;
    std::string experiment_str;
    std::string proposal_str;
    std::string n_grid_str;
    std::string prior_variance_str;
};

void apply_config_file(rkq::ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
    }
    auto get = [&doc](const char* key, auto& target) {
        if (doc.contains(key)) target = doc.at(key).template get<std::remove_reference_t<decltype(target)>>();
    };
    std::string experiment, proposal, kernel;
    get("experiment", experiment);
    if (!experiment.empty()) cfg.experiment = rkq::parse_experiment(experiment);
    get("n_max", cfg.n_max);
    if (doc.contains("n_grid")) cfg.n_grid = doc.at("n_grid").get<std::vector<std::size_t>>();
    get("repetitions", cfg.repetitions);
    get("mixture_draws", cfg.mixture_draws);
    get("seed", cfg.seed);
    get("proposal", proposal);
    if (!proposal.empty()) cfg.proposal = rkq::parse_proposal_mode(proposal);
    get("alpha", cfg.alpha);
    get("include_alpha_factor", cfg.include_alpha_factor);
    get("fixed_hypers", cfg.fixed_hypers);
    get("sigma_f2", cfg.sigma_f2);
    get("ell", cfg.ell);
    get("pilot_n", cfg.pilot_n);
    get("mcmc_iterations", cfg.mcmc_iterations);
    get("mcmc_burn_in", cfg.mcmc_burn_in);
    get("mcmc_step", cfg.mcmc_step);
    get("mcmc_include_log_det", cfg.mcmc_include_log_det);
    get("alpha_f", cfg.prior.alpha_f);
    get("beta_f", cfg.prior.beta_f);
    get("ell_log_mean", cfg.prior.ell_log_mean);
    get("ell_log_variance", cfg.prior.ell_log_variance);
    get("nugget", cfg.nugget);
    get("embedding_rel_tol", cfg.embedding_rel_tol);
    std::string prior_variance;
    get("prior_variance", prior_variance);
    if (!prior_variance.empty()) {
        if (prior_variance == "quadrature")
            cfg.prior_variance_method = rkq::PriorVarianceMethod::NestedQuadrature;
        else if (prior_variance == "mc")
            cfg.prior_variance_method = rkq::PriorVarianceMethod::MonteCarlo;
        else
            throw CLI::ValidationError("prior_variance", "must be 'quadrature' or 'mc'");
    }
    get("prior_mc_samples", cfg.prior_mc_samples);
    get("kernel", cfg.kernel_override);
    get("workers", cfg.workers);
    get("output_dir", cfg.output_dir);
}

std::vector<std::size_t> parse_n_grid(const std::string& s) {
    std::vector<std::size_t> grid;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
            unsigned long long v = std::stoull(tok);
            grid.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--n-grid", "invalid entry '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return grid;
}

void add_common_flags(CLI::App* sub, CliOptions& opt) {
    sub->add_option("--config", opt.config_file, "JSON config file; flags override file values");
    sub->add_option("--experiment", opt.experiment_str, "experiment preset")
        ->check(CLI::IsMember({"rbf-gaussian", "matern-gaussian", "matern-student", "appendix-b", "rate-study",
                               "fill-study", "mcmc-hypers"}));
    sub->add_option("--n", opt.cfg.n_max, "design size for single-size runs");
    sub->add_option("--n-grid", opt.n_grid_str, "comma-separated ascending design sizes");
    sub->add_option("--reps,--repetitions", opt.cfg.repetitions, "independent repetitions R");
    sub->add_option("--mixture-draws", opt.cfg.mixture_draws, "mixture samples S per repetition");
    sub->add_option("--seed", opt.cfg.seed, "master seed");
    sub->add_option("--proposal", opt.proposal_str, "design sampler")
        ->check(CLI::IsMember({"inflated", "target", "sequential"}));
    sub->add_option("--alpha", opt.cfg.alpha, "smoothness in the inflation exponent");
    sub->add_flag("--include-alpha-factor", opt.cfg.include_alpha_factor,
                  "use (alpha log n) instead of (log n) for Gaussian inflation");
    sub->add_flag("--fixed-hypers", opt.cfg.fixed_hypers, "skip the pilot MCMC; use --sigma-f2/--ell");
    sub->add_option("--sigma-f2", opt.cfg.sigma_f2, "fixed signal variance");
    sub->add_option("--ell", opt.cfg.ell, "fixed lengthscale");
    sub->add_option("--pilot-n", opt.cfg.pilot_n, "pilot design size for hyperparameter MCMC");
    sub->add_option("--mcmc-iterations", opt.cfg.mcmc_iterations, "Gibbs sweeps T");
    sub->add_option("--mcmc-burn-in", opt.cfg.mcmc_burn_in, "burn-in T0");
    sub->add_option("--mcmc-step", opt.cfg.mcmc_step, "MH log-scale step size");
    sub->add_flag("--mcmc-include-log-det", opt.cfg.mcmc_include_log_det,
                  "include the -0.5 log|K_ell| term in the MH target");
    sub->add_option("--alpha-f", opt.cfg.prior.alpha_f, "inverse-gamma shape");
    sub->add_option("--beta-f", opt.cfg.prior.beta_f, "inverse-gamma scale");
    sub->add_option("--ell-log-mean", opt.cfg.prior.ell_log_mean, "lengthscale log-normal mean");
    sub->add_option("--ell-log-variance", opt.cfg.prior.ell_log_variance, "lengthscale log-normal variance");
    sub->add_option("--nugget", opt.cfg.nugget, "diagonal nugget");
    sub->add_option("--embedding-rel-tol", opt.cfg.embedding_rel_tol, "numeric kernel-mean tolerance");
    sub->add_option("--prior-variance", opt.prior_variance_str,
                    "prior integral variance method for numeric embeddings")
        ->check(CLI::IsMember({"quadrature", "mc"}));
    sub->add_option("--prior-mc-samples", opt.cfg.prior_mc_samples, "Monte Carlo samples for the prior variance");
    sub->add_option("--kernel", opt.cfg.kernel_override, "kernel override for appendix-b and studies")
        ->check(CLI::IsMember({"rbf", "matern", "matern32", ""}));
    sub->add_option("--workers", opt.cfg.workers, "parallel repetition workers");
    sub->add_option("--output-dir,-o", opt.cfg.output_dir, "CSV output directory");
}

// precedence: built-in defaults < config file < explicitly passed flags
void finalize(CLI::App* sub, CliOptions& opt, rkq::ExperimentKind default_kind) {
    opt.cfg.experiment = default_kind;
    if (!opt.config_file.empty()) {
        rkq::ExperimentConfig flag_values = opt.cfg;  // holds whatever flags set
        apply_config_file(opt.cfg, opt.config_file);
        auto passed = [&](const char* name) { return sub->count(name) > 0; };
        if (passed("--n")) opt.cfg.n_max = flag_values.n_max;
        if (passed("--reps")) opt.cfg.repetitions = flag_values.repetitions;
        if (passed("--mixture-draws")) opt.cfg.mixture_draws = flag_values.mixture_draws;
        if (passed("--seed")) opt.cfg.seed = flag_values.seed;
        if (passed("--alpha")) opt.cfg.alpha = flag_values.alpha;
        if (passed("--include-alpha-factor")) opt.cfg.include_alpha_factor = flag_values.include_alpha_factor;
        if (passed("--fixed-hypers")) opt.cfg.fixed_hypers = flag_values.fixed_hypers;
        if (passed("--sigma-f2")) opt.cfg.sigma_f2 = flag_values.sigma_f2;
        if (passed("--ell")) opt.cfg.ell = flag_values.ell;
        if (passed("--pilot-n")) opt.cfg.pilot_n = flag_values.pilot_n;
        if (passed("--mcmc-iterations")) opt.cfg.mcmc_iterations = flag_values.mcmc_iterations;
        if (passed("--mcmc-burn-in")) opt.cfg.mcmc_burn_in = flag_values.mcmc_burn_in;
        if (passed("--mcmc-step")) opt.cfg.mcmc_step = flag_values.mcmc_step;
        if (passed("--mcmc-include-log-det")) opt.cfg.mcmc_include_log_det = flag_values.mcmc_include_log_det;
        if (passed("--alpha-f")) opt.cfg.prior.alpha_f = flag_values.prior.alpha_f;
        if (passed("--beta-f")) opt.cfg.prior.beta_f = flag_values.prior.beta_f;
        if (passed("--ell-log-mean")) opt.cfg.prior.ell_log_mean = flag_values.prior.ell_log_mean;
        if (passed("--ell-log-variance")) opt.cfg.prior.ell_log_variance = flag_values.prior.ell_log_variance;
        if (passed("--nugget")) opt.cfg.nugget = flag_values.nugget;
        if (passed("--embedding-rel-tol")) opt.cfg.embedding_rel_tol = flag_values.embedding_rel_tol;
        if (passed("--prior-mc-samples")) opt.cfg.prior_mc_samples = flag_values.prior_mc_samples;
        if (passed("--kernel")) opt.cfg.kernel_override = flag_values.kernel_override;
        if (passed("--workers")) opt.cfg.workers = flag_values.workers;
        if (passed("--output-dir")) opt.cfg.output_dir = flag_values.output_dir;
    }
    if (!opt.experiment_str.empty()) opt.cfg.experiment = rkq::parse_experiment(opt.experiment_str);
    if (!opt.proposal_str.empty()) opt.cfg.proposal = rkq::parse_proposal_mode(opt.proposal_str);
    if (!opt.n_grid_str.empty()) opt.cfg.n_grid = parse_n_grid(opt.n_grid_str);
    if (!opt.prior_variance_str.empty())
        opt.cfg.prior_variance_method = opt.prior_variance_str == "mc"
                                            ? rkq::PriorVarianceMethod::MonteCarlo
                                            : rkq::PriorVarianceMethod::NestedQuadrature;
    opt.cfg.validate();
}

void report_hypers(const rkq::HyperEstimate& h) {
    if (h.from_mcmc)
        std::cerr << "hyperparameters from pilot chain: sigma_f2=" << h.sigma_f2 << " ell=" << h.ell
                  << " (acceptance " << h.chain.acceptance_rate << ")\n";
    else
        std::cerr << "fixed hyperparameters: sigma_f2=" << h.sigma_f2 << " ell=" << h.ell << "\n";
}

void print_run_summary(const rkq::RunResult& result) {
    for (const rkq::NAggregate& agg : result.aggregates) {
        std::printf("n=%zu grand_mean=%.10g total_variance=%.6g within=%.6g between=%.6g", agg.n,
                    agg.report.grand_mean, agg.report.total, agg.report.within, agg.report.between);
        if (agg.quantiles.size() == 2)
            std::printf(" q025=%.10g q975=%.10g", agg.quantiles[0], agg.quantiles[1]);
        std::printf("\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomized kernel quadrature experiments"};
    app.require_subcommand(1);

    CliOptions run_opt, repeat_opt, rates_opt, fill_opt, mcmc_opt;
    CLI::App* run_cmd = app.add_subcommand("run", "single pass over the design-size grid");
    CLI::App* repeat_cmd = app.add_subcommand("repeat", "repeated designs with total-variance aggregation");
    CLI::App* rates_cmd = app.add_subcommand("rates", "empirical convergence-rate study");
    CLI::App* fill_cmd = app.add_subcommand("fill", "fill-distance study on the effective domain");
    CLI::App* mcmc_cmd = app.add_subcommand("mcmc", "hyperparameter chain on a pilot design");
    add_common_flags(run_cmd, run_opt);
    add_common_flags(repeat_cmd, repeat_opt);
    add_common_flags(rates_cmd, rates_opt);
    add_common_flags(fill_cmd, fill_opt);
    add_common_flags(mcmc_cmd, mcmc_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            finalize(run_cmd, run_opt, rkq::ExperimentKind::RbfGaussian);
            rkq::RunResult result = rkq::run_single(run_opt.cfg);
            report_hypers(result.hypers);
            rkq::write_run_csv(result);
            if (result.hypers.from_mcmc)
                rkq::write_mcmc_trace_csv(run_opt.cfg, result.hypers.chain, "mcmc_trace");
            print_run_summary(result);
        } else if (repeat_cmd->parsed()) {
            finalize(repeat_cmd, repeat_opt, rkq::ExperimentKind::RbfGaussian);
            rkq::RunResult result = rkq::run_repeated(repeat_opt.cfg);
            report_hypers(result.hypers);
            rkq::write_run_csv(result);
            if (result.hypers.from_mcmc)
                rkq::write_mcmc_trace_csv(repeat_opt.cfg, result.hypers.chain, "mcmc_trace");
            print_run_summary(result);
        } else if (rates_cmd->parsed()) {
            finalize(rates_cmd, rates_opt, rkq::ExperimentKind::RateStudy);
            rkq::RateStudyResult result = rkq::run_rate_study(rates_opt.cfg);
            report_hypers(result.hypers);
            rkq::write_rate_csv(result);
            for (const auto& fam : result.families)
                std::printf("%s: wce_slope=%.4f (theory %.4f) variance_slope=%.4f (theory %.4f)\n",
                            rkq::proposal_mode_name(fam.mode), fam.wce_fit.slope, fam.target.error_exponent,
                            fam.variance_fit.slope, fam.target.variance_exponent);
        } else if (fill_cmd->parsed()) {
            finalize(fill_cmd, fill_opt, rkq::ExperimentKind::FillStudy);
            rkq::FillStudyResult result = rkq::run_fill_study(fill_opt.cfg);
            rkq::write_fill_csv(result);
            std::printf("inflated slope=%.4f target slope=%.4f\n", result.inflated_fit.slope,
                        result.target_fit.slope);
        } else if (mcmc_cmd->parsed()) {
            finalize(mcmc_cmd, mcmc_opt, rkq::ExperimentKind::McmcHypers);
            rkq::HyperEstimate est = rkq::run_mcmc_experiment(mcmc_opt.cfg);
            rkq::write_mcmc_csv(mcmc_opt.cfg, est.chain);
            std::printf("acceptance_rate=%.4f sigma_f2_mean=%.6g ell_mean=%.6g\n",
                        est.chain.acceptance_rate, est.chain.sigma_f2_mean, est.chain.ell_mean);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
