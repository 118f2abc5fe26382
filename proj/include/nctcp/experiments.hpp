#pragma once

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <future>
#include <numeric>
#include <string>
#include <vector>

#include "nctcp/config.hpp"
#include "nctcp/net.hpp"
#include "nctcp/queue_model.hpp"

namespace nctcp::experiments {

// A fully resolved experiment: topology, flows, sweep values, horizons and
// seeds all pinned. Built from a config file plus command-line overrides;
// the resolved form is embedded in every report so results reproduce from
// their own output.
struct ExperimentSpec {
    std::string name = "experiment";
    std::string type = "fairness";  // fairness | redundancy_sweep | loss_sweep | queue_validation
    net::ScenarioConfig scenario;
    int replications = 3;
    std::vector<double> sweep_r;
    std::vector<double> sweep_loss;
    chain::ChainConfig chain_cfg;
    int jobs = 1;
    Config resolved;

    std::string config_text() const { return resolved.dump(); }
};

inline double optimal_redundancy(double per_link_loss, int hops) {
    double success = std::pow(1.0 - per_link_loss, hops);
    return std::min(1.5, 1.05 / success);
}

namespace detail {

inline net::FlowConfig flow_from_config(const Config& cfg, const std::string& section, int id,
                                        const net::ScenarioConfig& base) {
    net::FlowConfig fc;
    fc.id = id;
    std::string proto = cfg.get_or(section, "protocol", "nc");
    if (proto != "nc" && proto != "tcp")
        throw std::runtime_error("config: protocol must be nc or tcp in " + section);
    fc.coded = (proto == "nc");
    fc.start_s = cfg.get_double_or(section, "start_s", 0.5);
    fc.redundancy = cfg.get_double_or(section, "redundancy", 1.0);
    fc.vegas.alpha = cfg.get_double_or("transport", "vegas_alpha", 28.0);
    fc.vegas.beta = cfg.get_double_or("transport", "vegas_beta", 30.0);
    fc.vegas.gamma = cfg.get_double_or("transport", "vegas_gamma", 2.0);
    fc.vegas.receive_window = cfg.get_double_or("transport", "receive_window", 100.0);
    fc.max_span = static_cast<std::size_t>(cfg.get_int_or("transport", "max_span", 200));
    (void)base;
    return fc;
}

template <class Body>
void run_indexed(std::size_t n, int jobs, Body&& body) {
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::size_t next = 0;
    while (next < n) {
        std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs), n - next);
        std::vector<std::future<void>> fs;
        for (std::size_t b = 0; b < batch; ++b)
            fs.push_back(std::async(std::launch::async, body, next + b));
        for (auto& f : fs) f.get();
        next += batch;
    }
}

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Mean per-flow throughput over [from, to], computed from the sampled log.
inline std::vector<double> window_means(const net::MetricsLog& log, std::size_t flows,
                                        double from, double to) {
    std::vector<double> sum(flows, 0.0);
    std::vector<std::size_t> count(flows, 0);
    for (const auto& r : log.rows) {
        if (r.time_s > from + 1e-9 && r.time_s <= to + 1e-9) {
            sum[static_cast<std::size_t>(r.flow_id)] += r.throughput_mbps;
            ++count[static_cast<std::size_t>(r.flow_id)];
        }
    }
    for (std::size_t i = 0; i < flows; ++i)
        if (count[i]) sum[i] /= static_cast<double>(count[i]);
    return sum;
}

inline double jain_index(const std::vector<double>& x) {
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
        s += v;
        s2 += v * v;
    }
    if (s2 == 0.0) return 1.0;
    return s * s / (static_cast<double>(x.size()) * s2);
}

inline std::string format(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, ap);
    va_end(ap);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fairness: two staggered flows on a lossless chain; the later flow must
// claim an even share. Jain's index over per-flow mean throughput in the
// final third of the run.
struct FairnessReport {
    std::string name;
    net::MetricsLog log;
    std::vector<double> mean_throughput;  // per flow over the fairness window
    double jain = 0.0;
    double window_from = 0.0, window_to = 0.0;
    std::string config_text;
    std::uint64_t seed = 0;

    std::string csv() const { return log.to_csv(); }

    std::string summary() const {
        std::string out = "# " + name + "\n";
        out += detail::format("jain_index = %.4f over t in [%.1f, %.1f]\n", jain, window_from,
                              window_to);
        for (std::size_t i = 0; i < mean_throughput.size(); ++i)
            out += detail::format("flow%zu_mean_mbps = %.4f\n", i, mean_throughput[i]);
        out += detail::format("master_seed = %llu\n", static_cast<unsigned long long>(seed));
        out += "\n# resolved configuration\n" + config_text;
        return out;
    }
};

inline FairnessReport run_fairness(const ExperimentSpec& spec) {
    if (spec.scenario.flows.empty())
        throw std::invalid_argument("fairness: need at least one flow");
    FairnessReport rep;
    rep.name = spec.name;
    rep.seed = spec.scenario.master_seed;
    rep.config_text = spec.config_text();
    net::ScenarioResult res = net::run_scenario(spec.scenario);
    rep.log = std::move(res.log);
    rep.window_from = spec.scenario.horizon_s * 2.0 / 3.0;
    rep.window_to = spec.scenario.horizon_s;
    rep.mean_throughput = detail::window_means(rep.log, spec.scenario.flows.size(),
                                               rep.window_from, rep.window_to);
    rep.jain = detail::jain_index(rep.mean_throughput);
    return rep;
}

// ---------------------------------------------------------------------------
// Parameter sweeps. Every point is replicated across seeds; aggregates are
// mean and sample standard deviation across replications.
struct SweepPoint {
    double x = 0.0;          // R, or per-link loss probability
    std::string protocol;    // "nc" or "tcp"
    double redundancy = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
    int flow_id = 0;
    double mean_mbps = 0.0;  // steady-state per-flow throughput
};

struct SweepAggregate {
    double x = 0.0;
    std::string protocol;
    double mean_mbps = 0.0;  // across seeds and flows
    double stddev_mbps = 0.0;  // across seed means
};

struct SweepReport {
    std::string name;
    std::string kind;  // "redundancy" or "loss"
    std::vector<SweepPoint> points;
    std::vector<SweepAggregate> aggregates;
    double steady_from = 0.0;
    std::string config_text;
    std::uint64_t seed = 0;

    std::string csv() const {
        std::string out = (kind == "redundancy")
                              ? "R,replication,seed,flow_id,mean_throughput_mbps\n"
                              : "loss_prob,protocol,R,replication,seed,flow_id,mean_throughput_mbps\n";
        for (const auto& p : points) {
            if (kind == "redundancy")
                out += detail::format("%.4f,%d,%llu,%d,%.6f\n", p.x, p.replication,
                                      static_cast<unsigned long long>(p.seed), p.flow_id,
                                      p.mean_mbps);
            else
                out += detail::format("%.4f,%s,%.4f,%d,%llu,%d,%.6f\n", p.x, p.protocol.c_str(),
                                      p.redundancy, p.replication,
                                      static_cast<unsigned long long>(p.seed), p.flow_id,
                                      p.mean_mbps);
        }
        return out;
    }

    std::string summary() const {
        std::string out = "# " + name + "\n";
        for (const auto& a : aggregates) {
            if (kind == "redundancy")
                out += detail::format("R = %.4f: mean = %.4f Mbps, stddev = %.4f\n", a.x,
                                      a.mean_mbps, a.stddev_mbps);
            else
                out += detail::format("loss = %.4f (%s): mean = %.4f Mbps, stddev = %.4f\n", a.x,
                                      a.protocol.c_str(), a.mean_mbps, a.stddev_mbps);
        }
        if (kind == "redundancy" && !aggregates.empty()) {
            auto best = std::max_element(aggregates.begin(), aggregates.end(),
                                         [](const SweepAggregate& a, const SweepAggregate& b) {
                                             return a.mean_mbps < b.mean_mbps;
                                         });
            out += detail::format("argmax_R = %.4f (%.4f Mbps per flow)\n", best->x, best->mean_mbps);
        }
        out += detail::format("steady_window_from_s = %.1f\n", steady_from);
        out += detail::format("master_seed = %llu\n", static_cast<unsigned long long>(seed));
        out += "\n# resolved configuration\n" + config_text;
        return out;
    }
};

namespace detail {

struct RunKey {
    double x;
    std::string protocol;
    double redundancy;
    int replication;
};

// One scenario per (point, replication); points aggregated afterwards in a
// fixed order, so job-level parallelism cannot disturb the output.
inline SweepReport run_sweep(const ExperimentSpec& spec, const std::string& kind,
                             const std::vector<RunKey>& keys) {
    SweepReport rep;
    rep.name = spec.name;
    rep.kind = kind;
    rep.seed = spec.scenario.master_seed;
    rep.config_text = spec.config_text();
    rep.steady_from = spec.scenario.horizon_s * 0.25;

    struct RunOut {
        std::vector<double> flow_means;
    };
    std::vector<RunOut> outs(keys.size());

    run_indexed(keys.size(), spec.jobs, [&](std::size_t i) {
        const RunKey& key = keys[i];
        net::ScenarioConfig sc = spec.scenario;
        sc.master_seed = derive_seed(spec.scenario.master_seed,
                                     0x5EED0000ULL + static_cast<std::uint64_t>(key.replication));
        sc.net.loss_prob = (kind == "loss") ? key.x : sc.net.loss_prob;
        for (auto& f : sc.flows) {
            f.coded = (key.protocol == "nc");
            f.redundancy = key.redundancy;
        }
        net::ScenarioResult res = net::run_scenario(sc);
        outs[i].flow_means = window_means(res.log, sc.flows.size(), rep.steady_from, sc.horizon_s);
    });

    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (std::size_t fl = 0; fl < outs[i].flow_means.size(); ++fl) {
            SweepPoint p;
            p.x = keys[i].x;
            p.protocol = keys[i].protocol;
            p.redundancy = keys[i].redundancy;
            p.replication = keys[i].replication;
            p.seed = derive_seed(spec.scenario.master_seed,
                                 0x5EED0000ULL + static_cast<std::uint64_t>(keys[i].replication));
            p.flow_id = static_cast<int>(fl);
            p.mean_mbps = outs[i].flow_means[fl];
            rep.points.push_back(p);
        }
    }

    // aggregate per (x, protocol): mean over flows and seeds, stddev over
    // per-replication flow averages
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].replication != 0) continue;
        SweepAggregate agg;
        agg.x = keys[i].x;
        agg.protocol = keys[i].protocol;
        std::vector<double> rep_means;
        std::vector<double> all;
        for (const auto& p : rep.points) {
            if (p.x == agg.x && p.protocol == agg.protocol) all.push_back(p.mean_mbps);
        }
        for (int r = 0; r < spec.replications; ++r) {
            std::vector<double> of_rep;
            for (const auto& p : rep.points)
                if (p.x == agg.x && p.protocol == agg.protocol && p.replication == r)
                    of_rep.push_back(p.mean_mbps);
            if (!of_rep.empty()) rep_means.push_back(mean_of(of_rep));
        }
        agg.mean_mbps = mean_of(all);
        agg.stddev_mbps = stddev_of(rep_means);
        rep.aggregates.push_back(agg);
    }
    return rep;
}

}  // namespace detail

inline SweepReport run_redundancy_sweep(const ExperimentSpec& spec) {
    if (spec.sweep_r.empty()) throw std::invalid_argument("redundancy sweep: no R values");
    std::vector<detail::RunKey> keys;
    for (double r : spec.sweep_r)
        for (int rep = 0; rep < spec.replications; ++rep)
            keys.push_back({r, "nc", r, rep});
    return detail::run_sweep(spec, "redundancy", keys);
}

inline SweepReport run_loss_sweep(const ExperimentSpec& spec) {
    if (spec.sweep_loss.empty()) throw std::invalid_argument("loss sweep: no loss values");
    std::vector<detail::RunKey> keys;
    for (double p : spec.sweep_loss) {
        double r = optimal_redundancy(p, spec.scenario.net.hops);
        for (int rep = 0; rep < spec.replications; ++rep) {
            keys.push_back({p, "nc", r, rep});
            keys.push_back({p, "tcp", 1.0, rep});
        }
    }
    return detail::run_sweep(spec, "loss", keys);
}

// ---------------------------------------------------------------------------
// Queue model validation: measured time-average queue sizes against the
// closed form, per node.
struct QueueReport {
    std::string name;
    chain::ChainConfig cfg;
    chain::ChainResult result;
    std::vector<double> closed_form;  // per queue-holding node
    std::string config_text;

    std::string csv() const {
        std::string out = "node,measured_mean_queue,closed_form,relative_error\n";
        for (std::size_t k = 0; k < result.nodes.size(); ++k) {
            double cf = closed_form[k];
            double rel = cf > 0.0 ? std::abs(result.nodes[k].mean_queue - cf) / cf : 0.0;
            out += detail::format("%zu,%.6f,%.6f,%.6f\n", k, result.nodes[k].mean_queue, cf, rel);
        }
        return out;
    }

    std::string summary() const {
        std::string out = "# " + name + "\n";
        out += csv();
        out += detail::format("sink_throughput = %.6f packets/slot\n", result.sink_throughput);
        out += detail::format("arrival_rate = %.6f packets/slot\n", result.arrival_rate);
        out += "\n# resolved configuration\n" + config_text;
        return out;
    }
};

inline QueueReport run_queue_validation(const ExperimentSpec& spec) {
    QueueReport rep;
    rep.name = spec.name;
    rep.cfg = spec.chain_cfg;
    rep.config_text = spec.config_text();
    if (!chain::stable(spec.chain_cfg))
        throw std::domain_error("queue validation refused: unstable chain, need 0 < lambda < min mu");
    rep.result = chain::run_chain(spec.chain_cfg);
    for (int k = 0; k <= spec.chain_cfg.nodes - 2; ++k)
        rep.closed_form.push_back(chain::expected_queue_closed_form(spec.chain_cfg, k));
    return rep;
}

// ---------------------------------------------------------------------------
// Spec loading: config file -> resolved spec. Paper-scale restores the
// published horizons (fairness 2000 s with the second flow at 1000 s,
// sweeps 10000 s); desk scale keeps runs CI-sized.
inline ExperimentSpec load_spec(const Config& cfg, bool paper_scale, std::uint64_t seed_override,
                                bool seed_overridden, bool include_overhead) {
    ExperimentSpec spec;
    spec.name = cfg.get_or("experiment", "name", "experiment");
    spec.type = cfg.get("experiment", "type");
    spec.replications = static_cast<int>(cfg.get_int_or("experiment", "replications", 3));
    spec.jobs = static_cast<int>(cfg.get_int_or("experiment", "jobs", 1));

    net::ScenarioConfig& sc = spec.scenario;
    sc.horizon_s = cfg.get_double_or("experiment", "horizon_s", 600.0);
    sc.sample_interval_s = cfg.get_double_or("experiment", "sample_interval_s", 2.5);
    sc.master_seed = static_cast<std::uint64_t>(cfg.get_int_or("experiment", "seed", 1));
    sc.net.hops = static_cast<int>(cfg.get_int_or("topology", "hops", 4));
    sc.net.bandwidth_bps = cfg.get_double_or("topology", "bandwidth_mbps", 1.0) * 1e6;
    sc.net.prop_delay_s = cfg.get_double_or("topology", "prop_delay_ms", 100.0) / 1e3;
    sc.net.buffer_packets = static_cast<std::size_t>(cfg.get_int_or("topology", "buffer_packets", 200));
    sc.net.loss_prob = cfg.get_double_or("topology", "loss_prob", 0.0);
    sc.net.packet_bytes = static_cast<std::size_t>(cfg.get_int_or("transport", "packet_bytes", 1000));
    sc.net.ack_bytes = static_cast<std::size_t>(cfg.get_int_or("topology", "ack_bytes", 40));
    sc.net.include_overhead = include_overhead || cfg.get_bool_or("topology", "include_overhead", false);

    for (int i = 1; cfg.has_section("flow" + std::to_string(i)); ++i)
        sc.flows.push_back(detail::flow_from_config(cfg, "flow" + std::to_string(i), i - 1, sc));

    if (cfg.has("sweep", "r_values")) spec.sweep_r = cfg.get_list("sweep", "r_values");
    if (cfg.has("sweep", "loss_values")) spec.sweep_loss = cfg.get_list("sweep", "loss_values");

    if (cfg.has_section("chain")) {
        spec.chain_cfg.nodes = static_cast<int>(cfg.get_int_or("chain", "nodes", 4));
        if (cfg.has("chain", "mu")) spec.chain_cfg.mu = cfg.get_list("chain", "mu");
        spec.chain_cfg.lambda = cfg.get_double_or("chain", "lambda", 0.5);
        spec.chain_cfg.field = static_cast<unsigned>(cfg.get_int_or("chain", "field", 0));
        spec.chain_cfg.slots = static_cast<std::uint64_t>(cfg.get_int_or("chain", "slots", 1000000));
        spec.chain_cfg.seed = sc.master_seed;
        if (cfg.has("chain", "forward_nodes"))
            for (double f : cfg.get_list("chain", "forward_nodes"))
                spec.chain_cfg.forward_nodes.push_back(static_cast<int>(f));
    }

    if (seed_overridden) {
        sc.master_seed = seed_override;
        spec.chain_cfg.seed = seed_override;
    }

    if (paper_scale) {
        if (spec.type == "fairness") {
            sc.horizon_s = 2000.0;
            if (sc.flows.size() >= 2) {
                sc.flows[0].start_s = 0.5;
                sc.flows[1].start_s = 1000.0;
            }
        } else {
            sc.horizon_s = 10000.0;
        }
    }

    // embed the resolved values the runs actually use
    Config resolved = cfg;
    resolved.set("experiment", "name", spec.name);
    resolved.set("experiment", "type", spec.type);
    resolved.set("experiment", "horizon_s", detail::format("%.1f", sc.horizon_s));
    resolved.set("experiment", "sample_interval_s", detail::format("%.2f", sc.sample_interval_s));
    resolved.set("experiment", "seed", std::to_string(sc.master_seed));
    resolved.set("experiment", "replications", std::to_string(spec.replications));
    resolved.set("topology", "include_overhead", sc.net.include_overhead ? "true" : "false");
    for (std::size_t i = 0; i < sc.flows.size(); ++i) {
        std::string sect = "flow" + std::to_string(i + 1);
        resolved.set(sect, "start_s", detail::format("%.1f", sc.flows[i].start_s));
        resolved.set(sect, "protocol", sc.flows[i].coded ? "nc" : "tcp");
        resolved.set(sect, "redundancy", detail::format("%.4f", sc.flows[i].redundancy));
    }
    spec.resolved = resolved;
    return spec;
}

}  // namespace nctcp::experiments
