#include <catch2/catch_amalgamated.hpp>

#include "nctcp/experiments.hpp"

using namespace nctcp;
using namespace nctcp::experiments;

namespace {

const char* kFairnessCfg = R"(
[experiment]
name = mini_fairness
type = fairness
horizon_s = 60
sample_interval_s = 2.5
seed = 5

[topology]
hops = 4
loss_prob = 0

[transport]
packet_bytes = 1000

[flow1]
protocol = nc
start_s = 0.5
redundancy = 1

[flow2]
protocol = nc
start_s = 20
redundancy = 1
)";

}  // namespace

TEST_CASE("config files parse sections, lists and comments", "[config]") {
    Config cfg = Config::parse_string(R"(
# a comment
[alpha]
x = 1.5
list = 1.0, 2.5,3
flag = true

[beta]
name = hello world
)");
    CHECK(cfg.get_double("alpha", "x") == 1.5);
    CHECK(cfg.get_list("alpha", "list") == std::vector<double>{1.0, 2.5, 3.0});
    CHECK(cfg.get_bool_or("alpha", "flag", false));
    CHECK(cfg.get("beta", "name") == "hello world");
    CHECK(cfg.get_or("beta", "missing", "d") == "d");
    CHECK_THROWS(cfg.get("beta", "missing"));

    // the dump reparses to the same values
    Config again = Config::parse_string(cfg.dump());
    CHECK(again.get_double("alpha", "x") == 1.5);
    CHECK(again.get("beta", "name") == "hello world");
}

TEST_CASE("specs resolve from config text with overrides", "[experiments]") {
    Config cfg = Config::parse_string(kFairnessCfg);
    ExperimentSpec spec = load_spec(cfg, false, 0, false, false);
    CHECK(spec.name == "mini_fairness");
    CHECK(spec.type == "fairness");
    CHECK(spec.scenario.horizon_s == 60.0);
    CHECK(spec.scenario.flows.size() == 2);
    CHECK(spec.scenario.flows[1].start_s == 20.0);

    ExperimentSpec paper = load_spec(cfg, true, 42, true, false);
    CHECK(paper.scenario.horizon_s == 2000.0);
    CHECK(paper.scenario.flows[1].start_s == 1000.0);
    CHECK(paper.scenario.master_seed == 42);

    // resolved config embeds the values actually used
    CHECK(paper.config_text().find("horizon_s = 2000.0") != std::string::npos);
}

TEST_CASE("a single flow is perfectly fair to itself", "[experiments]") {
    Config cfg = Config::parse_string(R"(
[experiment]
name = solo
type = fairness
horizon_s = 40
seed = 2

[flow1]
protocol = nc
start_s = 0.5

[flow2]
protocol = nc
start_s = 0.5
)");
    // two identical flows from t=0: means match, the index is ~1; with one
    // flow the formula is exactly 1
    ExperimentSpec spec = load_spec(cfg, false, 0, false, false);
    spec.scenario.flows.resize(1);
    FairnessReport rep = run_fairness(spec);
    CHECK(rep.jain == 1.0);
}

TEST_CASE("queue validation refuses unstable chains with a message", "[experiments]") {
    ExperimentSpec spec;
    spec.type = "queue_validation";
    spec.chain_cfg.nodes = 3;
    spec.chain_cfg.mu = {0.6, 0.7};
    spec.chain_cfg.lambda = 0.65;  // >= min mu
    spec.chain_cfg.slots = 1000;
    CHECK_THROWS_WITH(run_queue_validation(spec), Catch::Matchers::ContainsSubstring("unstable"));
}

TEST_CASE("queue validation reports per-node rows", "[experiments]") {
    ExperimentSpec spec;
    spec.name = "chainv";
    spec.type = "queue_validation";
    spec.chain_cfg.nodes = 3;
    spec.chain_cfg.mu = {0.9, 0.8};
    spec.chain_cfg.lambda = 0.4;
    spec.chain_cfg.slots = 100000;
    spec.chain_cfg.seed = 4;
    QueueReport rep = run_queue_validation(spec);
    CHECK(rep.closed_form.size() == 2);
    CHECK(rep.csv().find("node,measured_mean_queue,closed_form,relative_error") == 0);
    // small chain, plenty of slots: within a few percent
    for (std::size_t k = 0; k < rep.closed_form.size(); ++k) {
        double got = rep.result.nodes[k].mean_queue;
        CHECK(std::abs(got - rep.closed_form[k]) / rep.closed_form[k] < 0.08);
    }
}

TEST_CASE("redundancy for a loss rate covers the end-to-end erasures", "[experiments]") {
    CHECK(optimal_redundancy(0.0, 4) == Catch::Approx(1.05));
    double r5 = optimal_redundancy(0.05, 4);
    CHECK(r5 > 1.2);
    CHECK(r5 < 1.35);
    CHECK(optimal_redundancy(0.2, 4) == 1.5);  // capped
}

TEST_CASE("lambda zero refuses validation but the engine runs empty", "[experiments]") {
    ExperimentSpec spec;
    spec.type = "queue_validation";
    spec.chain_cfg.nodes = 2;
    spec.chain_cfg.mu = {0.9};
    spec.chain_cfg.lambda = 0.0;
    spec.chain_cfg.slots = 100;
    CHECK_THROWS_AS(run_queue_validation(spec), std::domain_error);
    chain::ChainResult res = chain::run_chain(spec.chain_cfg);
    CHECK(res.nodes[0].mean_queue == 0.0);
}
