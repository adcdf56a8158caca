// dwsim command line: simulate, repro, slow, merge-demo.
//
// Exit codes: 0 ok, 1 verification failed, 2 configuration or argument
// error, 3 I/O error.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dwsim/adversarial.hpp"
#include "dwsim/controller.hpp"
#include "dwsim/experiment.hpp"
#include "dwsim/io.hpp"

namespace {

using namespace dw;

IndexSet parse_agent_list(const std::string& text, std::size_t n, const std::string& flag) {
    IndexSet out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != item.size() || v < 1 || v > n)
            throw ConfigError(flag + ": '" + item + "' is not an agent index in 1.." + std::to_string(n));
        out.push_back(v - 1);
    }
    if (out.empty()) throw ConfigError(flag + ": empty agent list");
    return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out, const std::optional<std::uint64_t>& seed) {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.master_seed = *seed;
    const std::filesystem::path dir(out);
    ensure_directory(dir);
    std::vector<RunResult> runs = run_batch(cfg, dir, cfg.run_count);
    std::vector<RunReport> reports;
    for (const RunResult& r : runs) reports.push_back(r.report);
    const BatchSummary summary = batch_stats(reports);
    write_text(dir / "summary.json", batch_summary_json(summary));
    std::cout << "runs " << summary.runs << ", converged " << summary.converged << ", consensus "
              << summary.consensus << "\n";
    return 0;
}

int cmd_repro(const std::string& figure, const std::string& out, std::size_t seeds, std::uint64_t master_seed,
              unsigned threads) {
    const std::filesystem::path dir = std::filesystem::path(out) / figure;
    ensure_directory(dir);
    const auto cells = run_figure(figure, seeds, dir, master_seed, threads);
    std::cout << figure_summary_csv(cells);
    return 0;
}

struct SlowArgs {
    SlowParams p;
    std::uint64_t K = 10;
    double tamper_a = 0.0;
    std::vector<std::uint64_t> tau_K;
    std::size_t tau_seeds = 50;
    std::uint64_t master_seed = 0;
};

int cmd_slow(const SlowArgs& args, const std::string& out) {
    SlowInstance inst = [&] {
        try {
            return build_slow_instance(args.p, args.K);
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.what());
        }
    }();
    if (args.tamper_a != 0.0) {
        inst.a += args.tamper_a;
        inst.initial.x(SlowInstance::kJ, 0) = inst.a;
    }
    const std::filesystem::path dir(out);
    ensure_directory(dir);
    const SlowVerification v = check_slow_instance(inst);
    write_text(dir / "slow_report.json", slow_report_json(inst, v));
    if (!args.tau_K.empty()) {
        std::string csv = "K,runs,censored,median_tau\n";
        for (const TauCurveRow& row : slow_tau_curve(args.p, args.tau_K, args.tau_seeds, args.master_seed))
            csv += std::to_string(row.K) + "," + std::to_string(row.runs) + "," + std::to_string(row.censored) + "," +
                   (row.median_tau ? format_double(*row.median_tau) : std::string()) + "\n";
        write_text(dir / "tau_curve.csv", csv);
    }
    verify_slow_instance(inst);
    std::cout << "K=" << inst.K << " verified, landing deviation " << format_double(v.landing_deviation) << "\n";
    return 0;
}

int cmd_merge_demo(const std::string& config_path, const std::string& a_list, const std::string& b_list, double eps,
                   const std::string& out) {
    const ExperimentConfig cfg = load_config(config_path);
    const RunSetup setup = setup_run(cfg, 0);
    const IndexSet a = parse_agent_list(a_list, cfg.n, "--a");
    const IndexSet b = parse_agent_list(b_list, cfg.n, "--b");
    MergeResult res = [&] {
        try {
            return merge_eps_clusters(setup.initial, setup.params, ClusterSet{a, eps}, ClusterSet{b, eps}, eps);
        } catch (const InvalidParameter& e) {
            throw ConfigError(e.what());
        }
    }();
    const std::filesystem::path dir(out);
    ensure_directory(dir);
    write_text(dir / "merge_trace.json", merge_trace_json(res.trace, res.state));
    const SimulationTrace trace = apply_schedule(setup.initial, setup.params, res.trace.schedule, TraceOptions{true, 1});
    write_text(dir / "trace.csv", trace_csv(trace));
    write_text(dir / "events.csv", events_csv(trace));
    std::cout << "merged " << res.trace.members.size() << " agents in " << res.trace.schedule.size()
              << " forced steps (bound " << res.trace.length_bound << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous Deffuant-Weisbuch simulator and verification harness"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;
    auto* sim = app.add_subcommand("simulate", "Run every seed of a JSON experiment config");
    sim->add_option("--config", config, "Config file")->required();
    sim->add_option("--out", out, "Output directory")->required();
    sim->add_option("--seed", seed, "Override seeds.master_seed");

    std::string figure;
    std::size_t seeds = 50;
    std::uint64_t master_seed = 2024;
    unsigned threads = 0;
    auto* repro = app.add_subcommand("repro", "Run the fig1 or fig2 parameter sweep");
    repro->add_option("figure", figure, "fig1 or fig2")->required()->check(CLI::IsMember({"fig1", "fig2"}));
    repro->add_option("--out", out, "Output directory")->required();
    repro->add_option("--seeds", seeds, "Runs per cell")->check(CLI::PositiveNumber);
    repro->add_option("--master-seed", master_seed, "Master seed");
    repro->add_option("--threads", threads, "Worker threads (0 = all cores)");

    SlowArgs slow_args;
    auto* slow = app.add_subcommand("slow", "Build and verify a slow-convergence instance");
    slow->add_option("--K", slow_args.K, "Forced {i,j} interactions before contact")->required();
    slow->add_option("--ri", slow_args.p.r_i, "Bound of agent i");
    slow->add_option("--rj", slow_args.p.r_j, "Bound of agent j");
    slow->add_option("--rk", slow_args.p.r_k, "Bound of agent k");
    slow->add_option("--mui", slow_args.p.mu_i, "Weighting factor of agent i");
    slow->add_option("--muj", slow_args.p.mu_j, "Weighting factor of agent j");
    slow->add_option("--muk", slow_args.p.mu_k, "Weighting factor of agent k");
    slow->add_option("--d", slow_args.p.d, "Opinion dimension");
    slow->add_option("--padding", slow_args.p.padding, "Extra far-away agents");
    slow->add_option("--tamper-a", slow_args.tamper_a, "Add this offset to x_j(0) before verifying");
    slow->add_option("--tau-K", slow_args.tau_K, "K values for an empirical tau(r_j/2) curve");
    slow->add_option("--tau-seeds", slow_args.tau_seeds, "Runs per K for the tau curve");
    slow->add_option("--master-seed", slow_args.master_seed, "Master seed for the tau curve");
    slow->add_option("--out", out, "Output directory")->required();

    std::string a_list, b_list;
    double eps = 0.0;
    auto* merge = app.add_subcommand("merge-demo", "Merge two eps-clusters of a config's first run");
    merge->add_option("--config", config, "Config file")->required();
    merge->add_option("--a", a_list, "First cluster, 1-based comma list")->required();
    merge->add_option("--b", b_list, "Second cluster, 1-based comma list")->required();
    merge->add_option("--eps", eps, "Cluster diameter bound")->required();
    merge->add_option("--out", out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*sim) return cmd_simulate(config, out, seed);
        if (*repro) return cmd_repro(figure, out, seeds, master_seed, threads);
        if (*slow) return cmd_slow(slow_args, out);
        if (*merge) return cmd_merge_demo(config, a_list, b_list, eps, out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const VerificationFailed& e) {
        std::cerr << "verification failed: " << e.what() << "\n";
        return 1;
    } catch (const InvalidParameter& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
