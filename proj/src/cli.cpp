#include "semnet/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semnet/eb.hpp"
#include "semnet/gibbs.hpp"
#include "semnet/graph_model.hpp"
#include "semnet/io.hpp"
#include "semnet/preprocess.hpp"
#include "semnet/repro.hpp"
#include "semnet/selection.hpp"

namespace semnet {

namespace {

using nlohmann::json;

json hyper_json(const Hyperparameters<double>& h) {
    return json{{"a0", h.a0}, {"b0", h.b0}, {"a1", h.a1},
                {"b1", h.b1}, {"a2", h.a2}, {"b2", h.b2}};
}

Eigen::MatrixXi all_ones_prior(Index p) {
    Eigen::MatrixXi adj = Eigen::MatrixXi::Ones(p, p);
    adj.diagonal().setZero();
    return adj;
}

// Options shared by every model-fitting subcommand.
struct FitFlags {
    std::string data_path, prior_path, out_dir;
    bool no_eb = false;
    bool no_standardize = false;
    Hyperparameters<double> hyper;

    void attach(CLI::App* sub) {
        sub->add_option("--data", data_path, "input data CSV (rows = samples)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--prior", prior_path,
                        "prior network adjacency CSV; omitted = all-ones (single class)")
            ->check(CLI::ExistingFile);
        sub->add_flag("--no-eb", no_eb, "fixed hyperparameters instead of empirical Bayes");
        sub->add_flag("--no-standardize", no_standardize, "skip per-column standardization");
        sub->add_option("--a0", hyper.a0, "class-0 precision shape")->check(CLI::PositiveNumber);
        sub->add_option("--b0", hyper.b0, "class-0 precision rate")->check(CLI::PositiveNumber);
        sub->add_option("--a1", hyper.a1, "class-1 precision shape")->check(CLI::PositiveNumber);
        sub->add_option("--b1", hyper.b1, "class-1 precision rate")->check(CLI::PositiveNumber);
        sub->add_option("--a2", hyper.a2, "error precision shape")->check(CLI::PositiveNumber);
        sub->add_option("--b2", hyper.b2, "error precision rate")->check(CLI::PositiveNumber);
        sub->add_option("--out-dir", out_dir, "output directory")->required();
    }

    Eigen::MatrixXd load_data(bool standardize_now) const {
        Eigen::MatrixXd values = read_data_csv(data_path).values;
        if (standardize_now && !no_standardize) values = standardize_columns(values);
        return values;
    }

    Eigen::MatrixXi load_prior(Index p) const {
        return prior_path.empty() ? all_ones_prior(p) : read_adjacency_csv(prior_path, p);
    }
};

std::string out_path(const std::string& dir, const std::string& file) {
    std::filesystem::create_directories(dir);
    return (std::filesystem::path(dir) / file).string();
}

// Uniform fit entry: EB by default, fixed-hyper network fit with --no-eb,
// reported through the same result shape so the trace JSON is uniform.
EBFitResult<double> run_fit(const Eigen::MatrixXd& values, const Eigen::MatrixXi& prior,
                            const FitFlags& flags) {
    if (!flags.no_eb) return eb_fit(values, prior, flags.hyper, EbSettings{});
    EBFitResult<double> result;
    result.network = fit_network(values, prior, flags.hyper);
    result.hyper_trace = {flags.hyper};
    result.final_hyper = flags.hyper;
    result.prior_mean_tau0 = flags.hyper.a0 / flags.hyper.b0;
    result.prior_mean_tau1 = flags.hyper.a1 / flags.hyper.b1;
    result.ratio = result.prior_mean_tau0 / result.prior_mean_tau1;
    result.converged = true;
    result.total_elbo_trace = {result.network.total_elbo};
    return result;
}

json trace_json(const EBFitResult<double>& result, const FitFlags& flags) {
    json trace = json::array();
    for (const auto& h : result.hyper_trace) trace.push_back(hyper_json(h));
    return json{{"used_eb", !flags.no_eb},
                {"init", hyper_json(result.hyper_trace.front())},
                {"trace", trace},
                {"final", hyper_json(result.final_hyper)},
                {"prior_mean_tau0", result.prior_mean_tau0},
                {"prior_mean_tau1", result.prior_mean_tau1},
                {"ratio", result.ratio},
                {"converged", result.converged},
                {"total_elbo_trace", result.total_elbo_trace}};
}

int cmd_simulate(const std::string& topology, long long p, long long n, long long bandwidth,
                 long long block_size, long long spokes, double magnitude, std::uint64_t seed,
                 const std::string& out_dir) {
    TopologySpec<double> spec;
    spec.kind = topology_from_string(topology);
    spec.p = p;
    spec.bandwidth = bandwidth;
    spec.block_size = block_size;
    spec.spokes = spokes;
    spec.magnitude = magnitude;
    const Eigen::MatrixXd omega = gen_precision(spec);
    const Eigen::MatrixXd data = sample_ggm(omega, n, seed);
    write_data_csv(out_path(out_dir, "data.csv"), data);
    write_adjacency_csv(out_path(out_dir, "truth.csv"), precision_to_adjacency(omega));
    return 0;
}

int cmd_fit(const FitFlags& flags) {
    const Eigen::MatrixXd values = flags.load_data(true);
    const Eigen::MatrixXi prior = flags.load_prior(values.cols());
    const EBFitResult<double> result = run_fit(values, prior, flags);
    const EdgeScoreMatrix<double> scores = symmetrize(edge_scores(result.network));
    write_edge_list(scores, prior, out_path(flags.out_dir, "edges.tsv"));
    write_text_atomic(out_path(flags.out_dir, "hyper_trace.json"),
                      trace_json(result, flags).dump(2) + "\n");
    return 0;
}

int cmd_gibbs_check(const FitFlags& flags, long long equation, const GibbsSettings& gibbs) {
    const Eigen::MatrixXd values = flags.load_data(true);
    const Eigen::MatrixXi prior = flags.load_prior(values.cols());
    if (equation < 1 || equation > values.cols()) {
        throw std::invalid_argument("--equation must be in [1, p]");
    }
    Hyperparameters<double> hyper = flags.hyper;
    if (!flags.no_eb) hyper = eb_fit(values, prior, flags.hyper, EbSettings{}).final_hyper;
    const auto eqs = build_equation_data(values, prior);
    const auto& eq = eqs[static_cast<std::size_t>(equation - 1)];
    const DiscrepancyReport<double> rep = compare_vb_gibbs(eq, hyper, VbSettings{}, gibbs);

    std::vector<double> mean_diff(rep.beta_mean_abs_diff.begin(), rep.beta_mean_abs_diff.end());
    std::vector<double> sd_diff(rep.beta_sd_rel_diff.begin(), rep.beta_sd_rel_diff.end());
    const json report{{"equation", equation},
                      {"hyper", hyper_json(hyper)},
                      {"used_eb", !flags.no_eb},
                      {"gibbs", json{{"n_iter", gibbs.n_iter},
                                     {"burnin", gibbs.burnin},
                                     {"thin", gibbs.thin},
                                     {"seed", gibbs.seed}}},
                      {"beta_mean_abs_diff", mean_diff},
                      {"beta_sd_rel_diff", sd_diff},
                      {"max_beta_mean_abs_diff", rep.max_beta_mean_abs_diff},
                      {"max_beta_sd_rel_diff", rep.max_beta_sd_rel_diff},
                      {"tau0_mean_abs_diff", rep.tau0_mean_abs_diff},
                      {"tau0_sd_rel_diff", rep.tau0_sd_rel_diff},
                      {"tau1_mean_abs_diff", rep.tau1_mean_abs_diff},
                      {"tau1_sd_rel_diff", rep.tau1_sd_rel_diff},
                      {"sigma_inv_mean_abs_diff", rep.sigma_inv_mean_abs_diff},
                      {"sigma_inv_sd_rel_diff", rep.sigma_inv_sd_rel_diff}};
    write_text_atomic(out_path(flags.out_dir, "gibbs_report.json"), report.dump(2) + "\n");
    return 0;
}

int cmd_roc(const FitFlags& flags, const std::string& truth_path) {
    const Eigen::MatrixXd values = flags.load_data(true);
    const Eigen::MatrixXi prior = flags.load_prior(values.cols());
    const Eigen::MatrixXi truth = read_adjacency_csv(truth_path, values.cols());
    const EBFitResult<double> result = run_fit(values, prior, flags);
    const RocCurve<double> curve = roc(symmetrize(edge_scores(result.network)), truth);
    write_roc_csv(curve, out_path(flags.out_dir, "roc_points.csv"));
    write_auc_csv(curve.auc, out_path(flags.out_dir, "auc.csv"));
    return 0;
}

int cmd_split_repro(const FitFlags& flags, const std::vector<long long>& ks, int replicates,
                    std::uint64_t seed) {
    const Eigen::MatrixXd values = flags.load_data(false); // halves standardize themselves
    const Eigen::MatrixXi prior = flags.load_prior(values.cols());
    SplitReproSettings<double> settings;
    for (long long k : ks) settings.ks.push_back(static_cast<Index>(k));
    settings.replicates = replicates;
    settings.seed = seed;
    settings.use_eb = !flags.no_eb;
    settings.standardize = !flags.no_standardize;
    settings.hyper = flags.hyper;
    const SplitReproResult result = run_split_repro(values, prior, settings);

    std::string table = "replicate,k,overlap\n";
    for (const auto& row : result.rows) {
        table += std::to_string(row.replicate) + "," + std::to_string(row.k) + "," +
                 std::to_string(row.overlap) + "\n";
    }
    write_text_atomic(out_path(flags.out_dir, "overlap.csv"), table);

    std::string summary = "k,mean_overlap\n";
    char buf[64];
    for (const auto& [k, mean] : result.mean_overlap) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(k), mean);
        summary += buf;
    }
    write_text_atomic(out_path(flags.out_dir, "overlap_summary.csv"), summary);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"network reconstruction from Gaussian data via simultaneous Bayesian regressions"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate benchmark data and its true adjacency");
    std::string topology;
    long long p = 0, n = 0, bandwidth = 1, block_size = 4, spokes = 5;
    double magnitude = -1;
    std::uint64_t sim_seed = 0;
    std::string sim_out;
    sim->add_option("--topology", topology, "band, cluster or hub")
        ->required()
        ->check(CLI::IsMember({"band", "cluster", "hub"}));
    sim->add_option("--p", p, "node count")->required()->check(CLI::Range(2LL, 1000000LL));
    sim->add_option("--n", n, "sample count")->required()->check(CLI::Range(1LL, 1000000000LL));
    sim->add_option("--bandwidth", bandwidth, "band: lags with nonzero entries");
    sim->add_option("--block-size", block_size, "cluster: nodes per block");
    sim->add_option("--spokes", spokes, "hub: spokes per hub");
    sim->add_option("--magnitude", magnitude, "off-diagonal strength; omit for per-topology default");
    sim->add_option("--seed", sim_seed, "sampling seed");
    sim->add_option("--out-dir", sim_out, "output directory")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "fit the network and write the ranked edge list");
    FitFlags fit_flags;
    fit_flags.attach(fit);

    // gibbs-check
    auto* gc = app.add_subcommand("gibbs-check",
                                  "compare variational and Gibbs posteriors on one equation");
    FitFlags gc_flags;
    gc_flags.attach(gc);
    long long equation = 1;
    GibbsSettings gibbs;
    gc->add_option("--equation", equation, "1-based node index");
    gc->add_option("--n-iter", gibbs.n_iter, "Gibbs iterations");
    gc->add_option("--burnin", gibbs.burnin, "discarded initial iterations");
    gc->add_option("--thin", gibbs.thin, "keep every thin-th draw");
    gc->add_option("--seed", gibbs.seed, "sampler seed");

    // roc
    auto* rc = app.add_subcommand("roc", "fit and score against a known truth network");
    FitFlags roc_flags;
    roc_flags.attach(rc);
    std::string truth_path;
    rc->add_option("--truth", truth_path, "true adjacency CSV")
        ->required()
        ->check(CLI::ExistingFile);

    // split-repro
    auto* sr = app.add_subcommand("split-repro", "top-k overlap between half-data fits");
    FitFlags sr_flags;
    sr_flags.attach(sr);
    std::vector<long long> ks;
    int replicates = 1;
    std::uint64_t sr_seed = 0;
    sr->add_option("--k", ks, "top-k sizes (repeatable)")->required();
    sr->add_option("--replicates", replicates, "number of random splits")
        ->check(CLI::Range(1, 1000000));
    sr->add_option("--seed", sr_seed, "split seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(topology, p, n, bandwidth, block_size, spokes, magnitude, sim_seed,
                                sim_out);
        }
        if (fit->parsed()) return cmd_fit(fit_flags);
        if (gc->parsed()) return cmd_gibbs_check(gc_flags, equation, gibbs);
        if (rc->parsed()) return cmd_roc(roc_flags, truth_path);
        if (sr->parsed()) return cmd_split_repro(sr_flags, ks, replicates, sr_seed);
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 1;
}

} // namespace semnet
