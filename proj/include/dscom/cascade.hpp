#ifndef DSCOM_CASCADE_HPP
#define DSCOM_CASCADE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "dscom/diffusion_model.hpp"
#include "dscom/graph.hpp"
#include "dscom/parallel.hpp"
#include "dscom/rng.hpp"

namespace dscom {

struct CascadeTrace {
    NodeSet activated;
    /// (activator, activated) in activation order; seeds never appear as targets.
    std::vector<Edge> pairs;
    std::size_t rounds = 0;
};

struct InfluenceEstimate {
    double mean = 0.0;
    /// Standard deviation of the per-batch means.
    double std = 0.0;
    std::size_t replications = 0;
    std::size_t repeats = 0;
};

/// Reusable synchronous-round simulator. Holds scratch buffers, so one instance per thread.
///
/// IC family: every node activated in round t makes one attempt on each inactive out-neighbour
/// in round t+1. Attempts run in ascending (activator, target) order and the first success
/// claims the target. Threshold family: thresholds ~ U(0,1) drawn once per run in node order; a
/// node activates when the weight from active in-neighbours reaches its threshold, and is
/// credited to its heaviest active in-neighbour (lowest id on ties).
class CascadeSimulator {
public:
    CascadeSimulator(const AttributedGraph& g, const DiffusionModel& m) : g_(g), m_(m)
    {
        m_.check_graph(g_);
        state_.assign(g_.node_count(), 0);
        if (m_.is_threshold()) {
            threshold_.assign(g_.node_count(), 0.0);
            weight_in_.assign(g_.node_count(), 0.0);
        }
    }

    /// Returns the number of activated nodes; fills `trace` when non-null.
    std::size_t run(const NodeSet& seeds, Seed seed, CascadeTrace* trace = nullptr)
    {
        Rng rng(seed);
        for (NodeId s : seeds) {
            if (s >= g_.node_count()) {
                throw ValidationError("seed " + std::to_string(s) + " out of range");
            }
        }
        touched_.clear();
        frontier_.clear();
        for (NodeId s : seeds) {
            if (!state_[s]) {
                state_[s] = 1;
                touched_.push_back(s);
                frontier_.push_back(s);
            }
        }
        std::sort(frontier_.begin(), frontier_.end());
        if (trace) {
            trace->pairs.clear();
            trace->rounds = 0;
        }
        if (m_.is_threshold()) {
            run_threshold(rng, trace);
        } else {
            run_independent(rng, trace);
        }
        const std::size_t count = touched_.size();
        if (trace) {
            trace->activated = make_node_set(touched_);
        }
        for (NodeId v : touched_) {
            state_[v] = 0;
        }
        if (m_.is_threshold()) {
            for (NodeId v : weight_touched_) {
                weight_in_[v] = 0.0;
            }
            weight_touched_.clear();
        }
        return count;
    }

private:
    void run_independent(Rng& rng, CascadeTrace* trace)
    {
        while (!frontier_.empty()) {
            next_.clear();
            for (NodeId u : frontier_) {
                auto nbrs = g_.out_neighbors(u);
                auto eids = g_.out_edges(u);
                for (std::size_t i = 0; i < nbrs.size(); ++i) {
                    const NodeId v = nbrs[i];
                    if (state_[v]) {
                        continue;
                    }
                    if (rng.uniform() < m_.edge_value(eids[i])) {
                        state_[v] = 1;
                        touched_.push_back(v);
                        next_.push_back(v);
                        if (trace) {
                            trace->pairs.push_back({u, v});
                        }
                    }
                }
            }
            if (next_.empty()) {
                break;
            }
            if (trace) {
                ++trace->rounds;
            }
            std::sort(next_.begin(), next_.end());
            frontier_.swap(next_);
        }
    }

    void run_threshold(Rng& rng, CascadeTrace* trace)
    {
        for (double& t : threshold_) {
            t = rng.uniform();
        }
        while (!frontier_.empty()) {
            candidates_.clear();
            for (NodeId u : frontier_) {
                auto nbrs = g_.out_neighbors(u);
                auto eids = g_.out_edges(u);
                for (std::size_t i = 0; i < nbrs.size(); ++i) {
                    const NodeId v = nbrs[i];
                    if (state_[v]) {
                        continue;
                    }
                    if (weight_in_[v] == 0.0) {
                        weight_touched_.push_back(v);
                    }
                    weight_in_[v] += m_.edge_value(eids[i]);
                    candidates_.push_back(v);
                }
            }
            std::sort(candidates_.begin(), candidates_.end());
            candidates_.erase(std::unique(candidates_.begin(), candidates_.end()), candidates_.end());
            next_.clear();
            for (NodeId v : candidates_) {
                if (weight_in_[v] >= threshold_[v]) {
                    next_.push_back(v);
                }
            }
            if (next_.empty()) {
                break;
            }
            for (NodeId v : next_) {
                if (trace) {
                    trace->pairs.push_back({heaviest_active_in(v), v});
                }
            }
            for (NodeId v : next_) {
                state_[v] = 1;
                touched_.push_back(v);
            }
            if (trace) {
                ++trace->rounds;
            }
            frontier_.swap(next_);
        }
    }

    NodeId heaviest_active_in(NodeId v) const
    {
        NodeId best = v;
        double best_w = -1.0;
        auto nbrs = g_.in_neighbors(v);
        auto eids = g_.in_edges(v);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            if (state_[nbrs[i]] && m_.edge_value(eids[i]) > best_w) {
                best_w = m_.edge_value(eids[i]);
                best = nbrs[i];
            }
        }
        return best;
    }

    const AttributedGraph& g_;
    const DiffusionModel& m_;
    std::vector<std::uint8_t> state_;
    std::vector<double> threshold_;
    std::vector<double> weight_in_;
    std::vector<NodeId> touched_, frontier_, next_, candidates_, weight_touched_;
};

inline CascadeTrace simulate_cascade(const AttributedGraph& g, const DiffusionModel& m, const NodeSet& seeds, Seed seed)
{
    CascadeSimulator sim(g, m);
    CascadeTrace trace;
    sim.run(seeds, seed, &trace);
    return trace;
}

/// Monte-Carlo estimate: `repeats` batches of `replications` runs. Replication i (global
/// index) uses derive_seed(seed, i), so the result does not depend on thread scheduling.
inline InfluenceEstimate estimate_influence(const AttributedGraph& g, const DiffusionModel& m, const NodeSet& seeds,
                                            std::size_t replications, std::size_t repeats, Seed seed)
{
    if (replications < 1 || repeats < 1) {
        throw ParameterError("estimate_influence needs at least one replication and one repeat");
    }
    m.check_graph(g);
    const std::size_t total = replications * repeats;
    std::vector<std::uint32_t> sizes(total);
    parallel_for(total, [&](std::size_t begin, std::size_t end, std::size_t) {
        CascadeSimulator sim(g, m);
        for (std::size_t i = begin; i < end; ++i) {
            sizes[i] = static_cast<std::uint32_t>(sim.run(seeds, derive_seed(seed, i)));
        }
    });
    std::vector<double> batch_means(repeats);
    for (std::size_t r = 0; r < repeats; ++r) {
        std::uint64_t sum = 0;
        for (std::size_t i = 0; i < replications; ++i) {
            sum += sizes[r * replications + i];
        }
        batch_means[r] = static_cast<double>(sum) / static_cast<double>(replications);
    }
    InfluenceEstimate est;
    est.replications = replications;
    est.repeats = repeats;
    est.mean = std::accumulate(batch_means.begin(), batch_means.end(), 0.0) / static_cast<double>(repeats);
    if (repeats > 1) {
        double ss = 0.0;
        for (double b : batch_means) {
            ss += (b - est.mean) * (b - est.mean);
        }
        est.std = std::sqrt(ss / static_cast<double>(repeats - 1));
    }
    return est;
}

struct GeneratedDataset {
    DiffusionDataset dataset;
    std::size_t cascades = 0;
    /// Set when the cascade cap was hit before collecting the requested number of pairs.
    bool exhausted = false;
};

struct DatasetOptions {
    double seed_fraction = 0.01;
    std::size_t max_cascades = 100000;
};

/// Repeatedly seeds ceil(seed_fraction * n) uniform nodes (at least one), simulates, and
/// appends every activation pair under a fresh cascade id until `pair_budget` pairs exist;
/// the result is truncated to exactly `pair_budget`.
inline GeneratedDataset generate_dataset(const AttributedGraph& g, const DiffusionModel& m, std::size_t pair_budget,
                                         Seed seed, const DatasetOptions& options = {})
{
    if (pair_budget < 1) {
        throw ParameterError("dataset size must be >= 1");
    }
    if (!(options.seed_fraction > 0.0 && options.seed_fraction <= 1.0)) {
        throw ParameterError("seed fraction must lie in (0,1]");
    }
    if (g.node_count() == 0) {
        throw ParameterError("cannot generate cascades on an empty graph");
    }
    const std::size_t n = g.node_count();
    const auto seed_count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(options.seed_fraction * static_cast<double>(n) - 1e-12)), 1, n);

    GeneratedDataset out;
    CascadeSimulator sim(g, m);
    CascadeTrace trace;
    Rng rng(seed);
    std::vector<NodeId> pool(n);
    while (out.dataset.size() < pair_budget) {
        if (out.cascades >= options.max_cascades) {
            out.exhausted = true;
            break;
        }
        std::iota(pool.begin(), pool.end(), NodeId{0});
        for (std::size_t i = 0; i < seed_count; ++i) {
            std::swap(pool[i], pool[i + rng.index(n - i)]);
        }
        NodeSet seeds = make_node_set({pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(seed_count)});
        sim.run(seeds, rng.next(), &trace);
        const std::string id = std::to_string(out.cascades);
        for (const Edge& p : trace.pairs) {
            out.dataset.add(id, p.src, p.dst);
        }
        ++out.cascades;
    }
    out.dataset.truncate(pair_budget);
    return out;
}

// ---------------------------------------------------------------------------------------------
// Exact live-edge oracle

namespace detail {

inline std::size_t reach_count(std::size_t n, const NodeSet& seeds, const std::vector<std::vector<NodeId>>& live_out,
                               std::vector<std::uint8_t>& seen, std::vector<NodeId>& stack)
{
    std::fill(seen.begin(), seen.end(), 0);
    stack.clear();
    std::size_t count = 0;
    for (NodeId s : seeds) {
        if (!seen[s]) {
            seen[s] = 1;
            stack.push_back(s);
            ++count;
        }
    }
    while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : live_out[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                stack.push_back(v);
            }
        }
    }
    (void)n;
    return count;
}

} // namespace detail

inline constexpr std::size_t kExactEnumerationCap = std::size_t{1} << 20;

/// Expected spread by exhaustive enumeration of live-edge worlds.
///
/// IC family: all 2^|E| subsets of live edges. Threshold family: each node keeps at most one
/// live in-edge, (u,v) with probability w(u,v) and none with 1 - sum. Throws SizeError above
/// 2^20 worlds.
inline double exact_influence_oracle(const AttributedGraph& g, const DiffusionModel& m, const NodeSet& seeds)
{
    m.check_graph(g);
    const std::size_t n = g.node_count();
    for (NodeId s : seeds) {
        if (s >= n) {
            throw ValidationError("seed " + std::to_string(s) + " out of range");
        }
    }
    std::vector<std::vector<NodeId>> live_out(n);
    std::vector<std::uint8_t> seen(n);
    std::vector<NodeId> stack;
    double total = 0.0;

    if (!m.is_threshold()) {
        const std::size_t E = g.edge_count();
        if (E > 20) {
            throw SizeError("exact oracle supports at most 20 edges for IC-type models, got " + std::to_string(E));
        }
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << E); ++mask) {
            double prob = 1.0;
            for (EdgeId e = 0; e < E && prob > 0.0; ++e) {
                const double p = m.edge_value(e);
                prob *= (mask >> e) & 1U ? p : 1.0 - p;
            }
            if (prob == 0.0) {
                continue;
            }
            for (auto& l : live_out) {
                l.clear();
            }
            for (EdgeId e = 0; e < E; ++e) {
                if ((mask >> e) & 1U) {
                    live_out[g.edge(e).src].push_back(g.edge(e).dst);
                }
            }
            total += prob * static_cast<double>(detail::reach_count(n, seeds, live_out, seen, stack));
        }
        return total;
    }

    double worlds = 1.0;
    for (NodeId v = 0; v < n; ++v) {
        worlds *= static_cast<double>(g.in_degree(v) + 1);
    }
    if (worlds > static_cast<double>(kExactEnumerationCap)) {
        throw SizeError("exact oracle: threshold-model instance has too many live-edge worlds");
    }
    // Mixed-radix counter: choice[v] in [0, indeg(v)], indeg(v) meaning "no live in-edge".
    std::vector<std::size_t> choice(n, 0);
    while (true) {
        double prob = 1.0;
        for (auto& l : live_out) {
            l.clear();
        }
        for (NodeId v = 0; v < n && prob > 0.0; ++v) {
            auto eids = g.in_edges(v);
            if (choice[v] < eids.size()) {
                prob *= m.edge_value(eids[choice[v]]);
                live_out[g.in_neighbors(v)[choice[v]]].push_back(v);
            } else {
                double sum = 0.0;
                for (EdgeId e : eids) {
                    sum += m.edge_value(e);
                }
                prob *= std::max(0.0, 1.0 - sum);
            }
        }
        if (prob > 0.0) {
            total += prob * static_cast<double>(detail::reach_count(n, seeds, live_out, seen, stack));
        }
        NodeId v = 0;
        while (v < n) {
            if (++choice[v] <= g.in_degree(v)) {
                break;
            }
            choice[v] = 0;
            ++v;
        }
        if (v == n) {
            break;
        }
    }
    return total;
}

/// FNV-1a hash of a seed set, rendered as 16 hex digits.
inline std::string seeds_hash(const NodeSet& seeds)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (NodeId s : seeds) {
        for (int b = 0; b < 8; ++b) {
            h ^= (static_cast<std::uint64_t>(s) >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = hex[h & 0xfU];
        h >>= 4;
    }
    return out;
}

} // namespace dscom

#endif
