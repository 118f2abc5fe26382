#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "nctcp/knowledge_space.hpp"
#include "nctcp/random.hpp"

namespace nctcp::chain {

// Slotted-time daisy chain: N nodes (source = 0, sink = N-1) joined by N-1
// packet erasure channels; link j carries node j -> j+1 and is ON with
// probability mu[j]. The source sees Bernoulli(lambda) arrivals, every node
// transmits one random combination of its queued witnesses per slot, and the
// sink's oldest-unseen request feeds back instantly to the source and one
// hop per ON slot to everyone else.
//
// Slot order (fixed; the closed form below is exact for this order):
//   1. draw link states          4. transmissions, source outward, with
//   2. source arrival               same-slot relaying down ON links
//   3. request views feed         5. instant sink feedback to the source
//      forward one hop           6. drops, then queue sampling
struct ChainConfig {
    int nodes = 2;
    std::vector<double> mu;  // N-1 ON probabilities
    double lambda = 0.5;     // packets per slot
    unsigned field = 0;      // 0 = large-field idealization, else 16 or 256
    std::uint64_t slots = 100000;
    std::uint64_t seed = 1;
    double warmup_frac = 0.10;       // discarded before averaging
    std::vector<int> forward_nodes;  // intermediates that relay without re-encoding
};

struct NodeStats {
    double mean_queue = 0.0;
    double mean_sojourn = 0.0;  // slots from seen to dropped
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
};

struct ChainResult {
    std::vector<NodeStats> nodes;  // size N-1: source and intermediates
    double sink_throughput = 0.0;  // packets seen by the sink per slot
    double arrival_rate = 0.0;     // measured, packets per slot
    std::uint64_t slots_measured = 0;
};

inline bool stable(const ChainConfig& cfg) {
    if (cfg.lambda <= 0.0) return false;
    for (double m : cfg.mu)
        if (cfg.lambda >= m) return false;
    return true;
}

inline void validate(const ChainConfig& cfg) {
    if (cfg.nodes < 2) throw std::invalid_argument("chain: need at least source and sink");
    if (cfg.mu.size() != static_cast<std::size_t>(cfg.nodes - 1))
        throw std::invalid_argument("chain: need one ON probability per link");
    for (double m : cfg.mu)
        if (m <= 0.0 || m > 1.0) throw std::invalid_argument("chain: mu out of range");
    for (int f : cfg.forward_nodes)
        if (f <= 0 || f >= cfg.nodes - 1)
            throw std::invalid_argument("chain: forward nodes must be intermediates");
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0)
        throw std::invalid_argument("chain: lambda out of range");
}

// Steady-state expected queue size at node k, for the slot order above.
//
//   E[Q_k] = sum_{j=k}^{N-2} rho_j (1-mu_j)/(1-rho_j)  downstream seeing delay
//          + sum_{j=0}^{k-1} rho_j                      request feed-forward lag
//
// with rho_j = lambda/mu_j. Each downstream hop behaves as a Geom/Geom/1
// queue whose stationary mean is rho(1-mu)/(1-rho); the request view crosses
// hop j in 1/mu_j slots on average, contributing rho_j by Little's law.
inline double expected_queue_closed_form(const ChainConfig& cfg, int k) {
    validate(cfg);
    if (!stable(cfg)) throw std::domain_error("chain: unstable, need 0 < lambda < min mu");
    if (!cfg.forward_nodes.empty())
        throw std::invalid_argument("chain: closed form applies to all-coding chains");
    if (k < 0 || k >= cfg.nodes) throw std::invalid_argument("chain: bad node index");
    if (k == cfg.nodes - 1) return 0.0;  // the sink holds no witnesses
    double q = 0.0;
    for (int j = k; j <= cfg.nodes - 2; ++j) {
        double rho = cfg.lambda / cfg.mu[static_cast<std::size_t>(j)];
        q += rho * (1.0 - cfg.mu[static_cast<std::size_t>(j)]) / (1.0 - rho);
    }
    for (int j = 0; j < k; ++j) q += cfg.lambda / cfg.mu[static_cast<std::size_t>(j)];
    return q;
}

namespace detail {

// Uniform random combination of every witness a knowledge space holds.
// Returns dense coefficients over [ks.window_base(), ks.window_base()+span).
template <class Field>
std::vector<typename Field::Elem> combine_witnesses(const KnowledgeSpace<Field>& ks,
                                                    std::mt19937_64& rng) {
    std::vector<typename Field::Elem> tx(ks.span(), 0);
    for (PacketIndex k : ks.seen_set()) {
        auto w = ks.witness(k);
        typename Field::Elem u = static_cast<typename Field::Elem>(rng() & Field::kMax);
        Field::axpy(std::span<typename Field::Elem>(tx), u,
                    std::span<const typename Field::Elem>(w.data(), tx.size()));
    }
    return tx;
}

struct SojournTracker {
    std::map<PacketIndex, std::uint64_t> arrival_slot;
    double sojourn_sum = 0.0;
    std::uint64_t arrivals = 0, departures = 0;

    void arrive(PacketIndex k, std::uint64_t t, bool counted) {
        arrival_slot.emplace(k, t);
        if (counted) ++arrivals;
    }
    void depart_below(PacketIndex req, std::uint64_t t, bool counted) {
        for (auto it = arrival_slot.begin(); it != arrival_slot.end() && it->first < req;
             it = arrival_slot.erase(it)) {
            if (counted) {
                sojourn_sum += static_cast<double>(t - it->second);
                ++departures;
            }
        }
    }
};

}  // namespace detail

// Large-field idealization: every successful reception from a strictly more
// knowledgeable node reveals the receiver's next unseen packet, so seen sets
// stay contiguous and integer counters suffice.
class IdealEngine {
  public:
    explicit IdealEngine(const ChainConfig& cfg) : cfg_(cfg) {
        seen_.assign(static_cast<std::size_t>(cfg.nodes), 0);
        request_view_.assign(static_cast<std::size_t>(cfg.nodes - 1), 1);
        queue_sum_.assign(static_cast<std::size_t>(cfg.nodes - 1), 0.0);
        forward_.assign(static_cast<std::size_t>(cfg.nodes), false);
        for (int f : cfg.forward_nodes) forward_[static_cast<std::size_t>(f)] = true;
        track_.resize(static_cast<std::size_t>(cfg.nodes - 1));
        link_rng_.reserve(cfg.mu.size());
        for (std::size_t j = 0; j < cfg.mu.size(); ++j)
            link_rng_.emplace_back(derive_seed(cfg.seed, 1000 + j));
        arrival_rng_.seed(derive_seed(cfg.seed, 1));
    }

    void step_slot(std::uint64_t t, bool counted) {
        const int n = cfg_.nodes;
        std::vector<bool> on(cfg_.mu.size());
        for (std::size_t j = 0; j < on.size(); ++j)
            on[j] = to_unit_interval(link_rng_[j]()) < cfg_.mu[j];

        if (to_unit_interval(arrival_rng_()) < cfg_.lambda) {
            ++seen_[0];
            track_[0].arrive(seen_[0], t, counted);
        }

        // request views move one hop per ON slot, oldest information first
        for (int i = n - 2; i >= 1; --i)
            if (on[static_cast<std::size_t>(i - 1)])
                request_view_[static_cast<std::size_t>(i)] =
                    request_view_[static_cast<std::size_t>(i - 1)];

        // transmissions; a forward node relays what reached it this slot
        std::uint64_t relayed = 0;  // coverage carried through forward nodes
        bool have_relay = false;
        for (int j = 0; j <= n - 2; ++j) {
            std::size_t js = static_cast<std::size_t>(j);
            std::uint64_t cover = forward_[js] ? (have_relay ? relayed : 0) : seen_[js];
            have_relay = false;
            if (on[js] && cover > 0) {
                std::size_t d = js + 1;
                if (forward_[d]) {
                    relayed = cover;
                    have_relay = true;
                } else if (cover > seen_[d]) {
                    ++seen_[d];
                    if (d < static_cast<std::size_t>(n - 1)) track_[d].arrive(seen_[d], t, counted);
                }
            }
        }

        request_view_[0] = seen_[static_cast<std::size_t>(n - 1)] + 1;

        for (int k = 0; k <= n - 2; ++k) {
            std::size_t ks = static_cast<std::size_t>(k);
            if (forward_[ks]) continue;
            track_[ks].depart_below(request_view_[ks], t, counted);
            if (counted)
                queue_sum_[ks] += static_cast<double>(seen_[ks] - (request_view_[ks] - 1));
        }
    }

    std::uint64_t sink_seen() const { return seen_[static_cast<std::size_t>(cfg_.nodes - 1)]; }
    std::uint64_t queue_at(int k) const {
        return seen_[static_cast<std::size_t>(k)] -
               (request_view_[static_cast<std::size_t>(k)] - 1);
    }

    std::vector<double> queue_sum_;
    std::vector<detail::SojournTracker> track_;

  private:
    ChainConfig cfg_;
    std::vector<std::uint64_t> seen_;
    std::vector<PacketIndex> request_view_;
    std::vector<bool> forward_;
    std::vector<std::mt19937_64> link_rng_;
    std::mt19937_64 arrival_rng_;
};

// Finite-field engine: full witness bookkeeping at every coding node. Seen
// sets may develop gaps; queue sizes reflect genuine basis dimensions.
template <class Field>
class FiniteEngine {
  public:
    explicit FiniteEngine(const ChainConfig& cfg) : cfg_(cfg) {
        const std::size_t n = static_cast<std::size_t>(cfg.nodes);
        forward_.assign(n, false);
        for (int f : cfg.forward_nodes) forward_[static_cast<std::size_t>(f)] = true;
        for (std::size_t i = 0; i < n; ++i) spaces_.emplace_back(0);  // no payloads here
        request_view_.assign(n - 1, 1);
        track_.resize(n - 1);
        queue_sum_.assign(n - 1, 0.0);
        for (std::size_t j = 0; j + 1 < n; ++j)
            link_rng_.emplace_back(derive_seed(cfg.seed, 1000 + j));
        arrival_rng_.seed(derive_seed(cfg.seed, 1));
        coeff_rng_.seed(derive_seed(cfg.seed, 2));
    }

    void step_slot(std::uint64_t t, bool counted) {
        const int n = cfg_.nodes;
        std::vector<bool> on(cfg_.mu.size());
        for (std::size_t j = 0; j < on.size(); ++j)
            on[j] = to_unit_interval(link_rng_[j]()) < cfg_.mu[j];

        if (to_unit_interval(arrival_rng_()) < cfg_.lambda) {
            ++generated_;
            track_[0].arrive(generated_, t, counted);
        }

        for (int i = n - 2; i >= 1; --i)
            if (on[static_cast<std::size_t>(i - 1)])
                request_view_[static_cast<std::size_t>(i)] =
                    request_view_[static_cast<std::size_t>(i - 1)];

        std::vector<typename Field::Elem> relay;
        PacketIndex relay_base = 0;
        for (int j = 0; j <= n - 2; ++j) {
            std::size_t js = static_cast<std::size_t>(j);
            std::vector<typename Field::Elem> tx;
            PacketIndex base = 0;
            if (forward_[js]) {
                tx = std::move(relay);
                base = relay_base;
            } else if (j == 0) {
                // the source knows its own packets: uniform combination of
                // everything not yet covered by the sink's request
                PacketIndex first = request_view_[0];
                if (generated_ + 1 > first) {
                    tx.resize(generated_ + 1 - first);
                    for (auto& e : tx)
                        e = static_cast<typename Field::Elem>(coeff_rng_() & Field::kMax);
                    base = first;
                }
            } else if (spaces_[js].dimension() > 0) {
                tx = detail::combine_witnesses(spaces_[js], coeff_rng_);
                base = spaces_[js].window_base();
            }
            relay.clear();
            relay_base = 0;
            if (tx.empty() || !on[js]) continue;
            std::size_t d = js + 1;
            if (forward_[d]) {
                relay = std::move(tx);
                relay_base = base;
            } else {
                auto report = spaces_[d].insert(
                    std::span<const typename Field::Elem>(tx), base, {});
                if (report.newly_seen && d < static_cast<std::size_t>(n - 1))
                    track_[d].arrive(*report.newly_seen, t, counted);
            }
        }

        request_view_[0] = spaces_[static_cast<std::size_t>(n - 1)].oldest_unseen();
        sink_seen_ = spaces_[static_cast<std::size_t>(n - 1)].dimension() + sink_dropped_;

        PacketIndex min_request = request_view_[0];
        for (int k = 0; k <= n - 2; ++k) {
            std::size_t ks = static_cast<std::size_t>(k);
            if (forward_[ks]) continue;
            if (k > 0) spaces_[ks].drop_before(request_view_[ks]);
            track_[ks].depart_below(request_view_[ks], t, counted);
            if (counted) {
                double q = (k == 0)
                               ? static_cast<double>(generated_ + 1 - request_view_[0])
                               : static_cast<double>(spaces_[ks].dimension());
                queue_sum_[ks] += q;
            }
            min_request = std::min(min_request, request_view_[ks]);
        }
        // memory bound only: the sink never needs columns every transmitter
        // has already dropped
        std::uint64_t before = spaces_[static_cast<std::size_t>(n - 1)].dimension();
        spaces_[static_cast<std::size_t>(n - 1)].drop_before(min_request);
        sink_dropped_ += before - spaces_[static_cast<std::size_t>(n - 1)].dimension();
    }

    std::uint64_t sink_seen() const { return sink_seen_; }

    std::vector<double> queue_sum_;
    std::vector<detail::SojournTracker> track_;

  private:
    ChainConfig cfg_;
    std::vector<bool> forward_;
    std::vector<KnowledgeSpace<Field>> spaces_;
    std::vector<PacketIndex> request_view_;
    std::vector<std::mt19937_64> link_rng_;
    std::mt19937_64 arrival_rng_, coeff_rng_;
    std::uint64_t generated_ = 0;
    std::uint64_t sink_seen_ = 0;
    std::uint64_t sink_dropped_ = 0;
};

template <class Engine>
ChainResult run_with(const ChainConfig& cfg) {
    Engine eng(cfg);
    const std::uint64_t warmup =
        static_cast<std::uint64_t>(cfg.warmup_frac * static_cast<double>(cfg.slots));
    std::uint64_t sink_at_warmup = 0;
    for (std::uint64_t t = 0; t < cfg.slots; ++t) {
        if (t == warmup) sink_at_warmup = eng.sink_seen();
        eng.step_slot(t, t >= warmup);
    }
    ChainResult res;
    res.slots_measured = cfg.slots - warmup;
    res.sink_throughput = static_cast<double>(eng.sink_seen() - sink_at_warmup) /
                          static_cast<double>(res.slots_measured);
    std::uint64_t arrivals_total = 0;
    for (int k = 0; k <= cfg.nodes - 2; ++k) {
        std::size_t ks = static_cast<std::size_t>(k);
        NodeStats st;
        st.mean_queue = eng.queue_sum_[ks] / static_cast<double>(res.slots_measured);
        st.arrivals = eng.track_[ks].arrivals;
        st.departures = eng.track_[ks].departures;
        st.mean_sojourn = st.departures
                              ? eng.track_[ks].sojourn_sum / static_cast<double>(st.departures)
                              : 0.0;
        if (k == 0) arrivals_total = st.arrivals;
        res.nodes.push_back(st);
    }
    res.arrival_rate = static_cast<double>(arrivals_total) /
                       static_cast<double>(res.slots_measured);
    return res;
}

inline ChainResult run_chain(const ChainConfig& cfg) {
    validate(cfg);
    switch (cfg.field) {
        case 0: return run_with<IdealEngine>(cfg);
        case 2: return run_with<FiniteEngine<Gf2>>(cfg);
        case 16: return run_with<FiniteEngine<Gf16>>(cfg);
        case 256: return run_with<FiniteEngine<Gf256>>(cfg);
        default: throw std::invalid_argument("chain: field must be 0, 2, 16 or 256");
    }
}

// One trial of the witness-combination experiment: node A's knowledge
// strictly contains node B's; A transmits one uniform random combination of
// all its witnesses; the trial succeeds when B newly sees the oldest packet
// A has seen and B has not.
template <class Field>
bool next_unseen_trial(std::mt19937_64& rng) {
    const int n = 2 + static_cast<int>(rng() % 7);  // packets in play
    KnowledgeSpace<Field> a(0), b(0);

    auto random_dense = [&](int len) {
        std::vector<typename Field::Elem> v(static_cast<std::size_t>(len));
        for (auto& e : v) e = static_cast<typename Field::Elem>(rng() & Field::kMax);
        return v;
    };

    const std::size_t dim_a = 1 + rng() % static_cast<std::uint64_t>(n);
    int guard = 0;
    while (a.dimension() < dim_a && ++guard < 200) {
        auto v = random_dense(n);
        a.insert(std::span<const typename Field::Elem>(v), 1, {});
    }
    if (a.dimension() == 0) throw std::logic_error("next_unseen_trial: empty transmitter space");
    const std::size_t dim_b = rng() % a.dimension();  // strictly smaller
    guard = 0;
    while (b.dimension() < dim_b && ++guard < 200) {
        auto tx = detail::combine_witnesses(a, rng);
        b.insert(std::span<const typename Field::Elem>(tx), a.window_base(), {});
    }

    // the oldest packet the transmitter has seen and the receiver has not
    PacketIndex target = 0;
    auto seen_b = b.seen_set();
    for (PacketIndex k : a.seen_set()) {
        if (!std::binary_search(seen_b.begin(), seen_b.end(), k)) {
            target = k;
            break;
        }
    }
    if (target == 0) throw std::logic_error("next_unseen_trial: nothing unseen to convey");

    auto tx = detail::combine_witnesses(a, rng);
    auto report = b.insert(std::span<const typename Field::Elem>(tx), a.window_base(), {});
    return report.newly_seen && *report.newly_seen == target;
}

}  // namespace nctcp::chain
