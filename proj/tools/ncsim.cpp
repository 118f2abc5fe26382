#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nctcp/experiments.hpp"

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

int cmd_run(const std::string& config_path, bool paper_scale, std::uint64_t seed,
            bool seed_set, const std::string& out_dir, bool include_overhead, int jobs) {
    using namespace nctcp;
    Config cfg = Config::parse_file(config_path);
    experiments::ExperimentSpec spec =
        experiments::load_spec(cfg, paper_scale, seed, seed_set, include_overhead);
    if (jobs > 0) spec.jobs = jobs;

    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::string csv, summary;

    if (spec.type == "fairness") {
        auto rep = experiments::run_fairness(spec);
        csv = rep.csv();
        summary = rep.summary();
    } else if (spec.type == "redundancy_sweep") {
        auto rep = experiments::run_redundancy_sweep(spec);
        csv = rep.csv();
        summary = rep.summary();
    } else if (spec.type == "loss_sweep") {
        auto rep = experiments::run_loss_sweep(spec);
        csv = rep.csv();
        summary = rep.summary();
    } else if (spec.type == "queue_validation") {
        auto rep = experiments::run_queue_validation(spec);
        csv = rep.csv();
        summary = rep.summary();
    } else {
        std::cerr << "unknown experiment type: " << spec.type << "\n";
        return 2;
    }

    write_file(dir / (spec.name + ".csv"), csv);
    write_file(dir / (spec.name + ".summary.txt"), summary);
    std::cout << summary;
    std::cout << "\nwrote " << (dir / (spec.name + ".csv")).string() << "\n";
    return 0;
}

int cmd_queue(int nodes, const std::vector<double>& mu, double lambda, std::uint64_t slots,
              unsigned field, std::uint64_t seed, const std::vector<int>& forward,
              const std::string& out_file) {
    using namespace nctcp;
    chain::ChainConfig cfg;
    cfg.nodes = nodes;
    cfg.mu = mu;
    cfg.lambda = lambda;
    cfg.slots = slots;
    cfg.field = field;
    cfg.seed = seed;
    cfg.forward_nodes = forward;

    if (!chain::stable(cfg)) {
        std::cerr << "refused: unstable chain, need 0 < lambda < min mu\n";
        return 2;
    }
    chain::ChainResult res = chain::run_chain(cfg);

    std::string csv = "node,measured_mean_queue,closed_form,relative_error\n";
    for (std::size_t k = 0; k < res.nodes.size(); ++k) {
        double cf = cfg.forward_nodes.empty()
                        ? chain::expected_queue_closed_form(cfg, static_cast<int>(k))
                        : 0.0;
        double rel = cf > 0.0 ? std::abs(res.nodes[k].mean_queue - cf) / cf : 0.0;
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f\n", k, res.nodes[k].mean_queue, cf, rel);
        csv += buf;
    }
    std::cout << csv;
    std::cout << "sink_throughput=" << res.sink_throughput << " packets/slot\n";
    if (!out_file.empty()) write_file(out_file, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"network-coded transport simulator and queueing model"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    bool paper_scale = false, include_overhead = false;
    std::uint64_t seed = 0;
    int jobs = 0;
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_flag("--paper-scale", paper_scale, "restore the full published horizons");
    auto* seed_opt = run->add_option("--seed", seed, "override the master seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--include-overhead", include_overhead,
                  "charge coding headers to serialization time");
    run->add_option("--jobs", jobs, "parallel runs for sweep points");

    int nodes = 4;
    std::vector<double> mu{0.9, 0.8, 0.85};
    double lambda = 0.5;
    std::uint64_t slots = 1000000, qseed = 1;
    unsigned field = 0;
    std::vector<int> forward;
    std::string out_file;
    auto* queue = app.add_subcommand("queue", "daisy-chain queue model vs closed form");
    queue->add_option("--nodes", nodes, "node count including source and sink");
    queue->add_option("--mu", mu, "per-link ON probabilities")->delimiter(',');
    queue->add_option("--lambda", lambda, "arrival rate, packets per slot");
    queue->add_option("--slots", slots, "simulated slots");
    queue->add_option("--field", field, "0 = large-field idealization, or 16/256");
    queue->add_option("--seed", qseed, "rng seed");
    queue->add_option("--forward", forward, "intermediate nodes that only relay")->delimiter(',');
    queue->add_option("--out", out_file, "also write the CSV here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(config_path, paper_scale, seed, seed_opt->count() > 0, out_dir,
                           include_overhead, jobs);
        if (queue->parsed())
            return cmd_queue(nodes, mu, lambda, slots, field, qseed, forward, out_file);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
