#ifndef DSCOM_BASELINES_HPP
#define DSCOM_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "dscom/cascade.hpp"
#include "dscom/community.hpp"
#include "dscom/diffusion_model.hpp"
#include "dscom/graph.hpp"
#include "dscom/relation_learning.hpp"
#include "dscom/rng.hpp"
#include "dscom/seed_selection.hpp"

namespace dscom {

inline SeedSet random_seeds(std::size_t n, std::size_t k, Seed seed)
{
    if (k > n) {
        throw ParameterError("cannot pick " + std::to_string(k) + " seeds from " + std::to_string(n) + " nodes");
    }
    Rng rng(seed);
    std::vector<NodeId> pool(n);
    std::iota(pool.begin(), pool.end(), NodeId{0});
    SeedSet out;
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(pool[i], pool[i + rng.index(n - i)]);
        out.nodes.push_back(pool[i]);
        out.provenance.push_back({0, i, 0.0});
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Greedy maximisation

struct GreedyResult {
    std::vector<NodeId> seeds;
    /// Marginal gain of each pick, in pick order.
    std::vector<double> gains;
    std::size_t evaluations = 0;
};

/// Oracle concept: `double gain(NodeId)` for the current set and `void commit(NodeId)`.
template <typename Oracle>
GreedyResult naive_greedy(std::size_t n, std::size_t k, Oracle& oracle)
{
    GreedyResult res;
    std::vector<bool> chosen(n, false);
    for (std::size_t round = 0; round < std::min(k, n); ++round) {
        NodeId best = n;
        double best_gain = -std::numeric_limits<double>::infinity();
        for (NodeId v = 0; v < n; ++v) {
            if (chosen[v]) {
                continue;
            }
            const double gain = oracle.gain(v);
            ++res.evaluations;
            if (gain > best_gain) {
                best_gain = gain;
                best = v;
            }
        }
        chosen[best] = true;
        oracle.commit(best);
        res.seeds.push_back(best);
        res.gains.push_back(best_gain);
    }
    return res;
}

/// CELF: stale gains are upper bounds under submodularity, so only the heap top is refreshed.
/// Heap order is (gain desc, id asc), which makes the pick sequence identical to naive_greedy
/// for any exactly submodular oracle.
template <typename Oracle>
GreedyResult lazy_greedy(std::size_t n, std::size_t k, Oracle& oracle)
{
    struct Entry {
        double gain;
        NodeId node;
        std::size_t round;
    };
    auto worse = [](const Entry& a, const Entry& b) {
        if (a.gain != b.gain) {
            return a.gain < b.gain;
        }
        return a.node > b.node;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
    GreedyResult res;
    for (NodeId v = 0; v < n; ++v) {
        heap.push({oracle.gain(v), v, 0});
        ++res.evaluations;
    }
    for (std::size_t round = 0; round < std::min(k, n); ++round) {
        while (true) {
            Entry top = heap.top();
            heap.pop();
            if (top.round == round) {
                oracle.commit(top.node);
                res.seeds.push_back(top.node);
                res.gains.push_back(top.gain);
                break;
            }
            top.gain = oracle.gain(top.node);
            top.round = round;
            ++res.evaluations;
            heap.push(top);
        }
    }
    return res;
}

/// Monte-Carlo spread over a fixed sample of live-edge worlds (common random numbers for every
/// evaluation). World w decides each IC edge by hash(w, edge) and each threshold-model node's
/// single live in-edge by hash(w, node), so every evaluation sees the same worlds and the
/// estimate is exactly submodular.
class WorldSpreadOracle {
public:
    WorldSpreadOracle(const AttributedGraph& g, const DiffusionModel& m, std::size_t worlds, Seed seed)
        : g_(g), m_(m), worlds_(worlds)
    {
        m_.check_graph(g_);
        if (worlds_ < 1) {
            throw ParameterError("need at least one world");
        }
        world_seed_.resize(worlds_);
        for (std::size_t w = 0; w < worlds_; ++w) {
            world_seed_[w] = derive_seed(seed, w);
        }
        covered_.assign(worlds_ * g_.node_count(), 0);
        mark_.assign(g_.node_count(), 0);
        if (m_.is_threshold()) {
            choice_.assign(worlds_ * g_.node_count(), 0);
            for (std::size_t w = 0; w < worlds_; ++w) {
                for (NodeId v = 0; v < g_.node_count(); ++v) {
                    choice_[w * g_.node_count() + v] = pick_in_edge(w, v);
                }
            }
        }
    }

    double gain(NodeId v) { return static_cast<double>(gain_count(v)) / static_cast<double>(worlds_); }

    void commit(NodeId v)
    {
        for (std::size_t w = 0; w < worlds_; ++w) {
            explore(w, v, true);
        }
    }

    /// Spread of an arbitrary set, independent of committed state.
    double spread(const NodeSet& seeds)
    {
        std::uint64_t count = 0;
        for (std::size_t w = 0; w < worlds_; ++w) {
            ++epoch_;
            stack_.clear();
            for (NodeId s : seeds) {
                if (mark_[s] != epoch_) {
                    mark_[s] = epoch_;
                    stack_.push_back(s);
                    ++count;
                }
            }
            count += flood(w, nullptr);
        }
        return static_cast<double>(count) / static_cast<double>(worlds_);
    }

private:
    static constexpr EdgeId none = std::numeric_limits<EdgeId>::max();

    EdgeId pick_in_edge(std::size_t w, NodeId v) const
    {
        const double r = hash_uniform(world_seed_[w], v);
        double acc = 0.0;
        for (EdgeId e : g_.in_edges(v)) {
            acc += m_.edge_value(e);
            if (r < acc) {
                return e;
            }
        }
        return none;
    }

    bool live(std::size_t w, EdgeId e, NodeId target) const
    {
        if (m_.is_threshold()) {
            return choice_[w * g_.node_count() + target] == e;
        }
        return hash_uniform(world_seed_[w], e) < m_.edge_value(e);
    }

    /// BFS from the stack; skips nodes covered in world w. Returns newly reached count.
    std::uint64_t flood(std::size_t w, std::uint8_t* cover)
    {
        const std::size_t base = w * g_.node_count();
        std::uint64_t count = 0;
        while (!stack_.empty()) {
            const NodeId u = stack_.back();
            stack_.pop_back();
            if (cover) {
                cover[u] = 1;
            }
            auto nbrs = g_.out_neighbors(u);
            auto eids = g_.out_edges(u);
            for (std::size_t i = 0; i < nbrs.size(); ++i) {
                const NodeId v = nbrs[i];
                if (mark_[v] == epoch_ || covered_[base + v]) {
                    continue;
                }
                if (live(w, eids[i], v)) {
                    mark_[v] = epoch_;
                    ++count;
                    stack_.push_back(v);
                }
            }
        }
        return count;
    }

    std::uint64_t explore(std::size_t w, NodeId v, bool commit)
    {
        const std::size_t base = w * g_.node_count();
        if (covered_[base + v]) {
            return 0;
        }
        ++epoch_;
        stack_.clear();
        mark_[v] = epoch_;
        stack_.push_back(v);
        return 1 + flood(w, commit ? covered_.data() + base : nullptr);
    }

    std::uint64_t gain_count(NodeId v)
    {
        std::uint64_t count = 0;
        for (std::size_t w = 0; w < worlds_; ++w) {
            count += explore(w, v, false);
        }
        return count;
    }

    const AttributedGraph& g_;
    const DiffusionModel& m_;
    std::size_t worlds_;
    std::vector<Seed> world_seed_;
    std::vector<std::uint8_t> covered_;
    std::vector<EdgeId> choice_;
    std::vector<std::uint32_t> mark_;
    std::uint32_t epoch_ = 0;
    std::vector<NodeId> stack_;
};

/// Lazy greedy on the true model, spreads estimated over `replications` shared worlds.
inline SeedSet celf_greedy(const AttributedGraph& g, const DiffusionModel& m, std::size_t k, std::size_t replications,
                           Seed seed, GreedyResult* details = nullptr)
{
    WorldSpreadOracle oracle(g, m, replications, seed);
    GreedyResult res = lazy_greedy(g.node_count(), k, oracle);
    SeedSet out;
    for (std::size_t i = 0; i < res.seeds.size(); ++i) {
        out.nodes.push_back(res.seeds[i]);
        out.provenance.push_back({0, i, res.gains[i]});
    }
    if (details) {
        *details = std::move(res);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Embedding-space clustering (GAT + k-means)

/// k-means++ on the embeddings; from each cluster the node nearest its centroid (lowest id on
/// ties).
inline SeedSet gatk_select(const Eigen::MatrixXd& embeddings, std::size_t k, Seed seed, std::size_t restarts = 10)
{
    const KMeansResult km = kmeans_pp(embeddings, k, seed, restarts);
    SeedSet out;
    const auto members = km.partition.members();
    for (std::size_t c = 0; c < km.partition.k; ++c) {
        if (members[c].empty()) {
            continue;
        }
        Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(embeddings.cols());
        for (NodeId v : members[c]) {
            centroid += embeddings.row(static_cast<Eigen::Index>(v));
        }
        centroid /= static_cast<double>(members[c].size());
        NodeId best = members[c].front();
        double best_d = std::numeric_limits<double>::infinity();
        for (NodeId v : members[c]) {
            const double d = (embeddings.row(static_cast<Eigen::Index>(v)) - centroid).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = v;
            }
        }
        out.nodes.push_back(best);
        out.provenance.push_back({c, 0, std::sqrt(best_d)});
    }
    return out;
}

/// Community pipeline without relation learning: every edge weighs 1.
inline SeedSet spec_pr_select(const AttributedGraph& g, std::size_t k, Seed seed, ClusterResult* cluster = nullptr)
{
    ClusterResult cr = spectral_cluster(g, WeightedGraph::uniform(g), k, seed);
    SeedSet out = select_seeds(g, cr.partition, allocate_budget(cr.partition, k), CentralityMeasure::PageRank);
    if (cluster) {
        *cluster = std::move(cr);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Reverse-reachable sets

struct RRSet {
    NodeId root = 0;
    NodeSet members;
};

/// Uniform root; reverse BFS where in-edge (u -> v) is live with probability weights[e].
inline RRSet generate_rr_set(const AttributedGraph& g, const std::vector<double>& weights, Rng& rng,
                             std::vector<std::uint8_t>* scratch = nullptr)
{
    std::vector<std::uint8_t> local;
    auto& seen = scratch ? *scratch : local;
    seen.assign(g.node_count(), 0);
    RRSet rr;
    rr.root = rng.index(g.node_count());
    std::vector<NodeId> stack{rr.root};
    seen[rr.root] = 1;
    rr.members.push_back(rr.root);
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        auto nbrs = g.in_neighbors(v);
        auto eids = g.in_edges(v);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            if (seen[nbrs[i]]) {
                continue;
            }
            if (rng.uniform() < weights[eids[i]]) {
                seen[nbrs[i]] = 1;
                rr.members.push_back(nbrs[i]);
                stack.push_back(nbrs[i]);
            }
        }
    }
    std::sort(rr.members.begin(), rr.members.end());
    return rr;
}

inline RRSet generate_rr_set(const AttributedGraph& g, const std::vector<double>& weights, Seed seed)
{
    Rng rng(seed);
    return generate_rr_set(g, weights, rng);
}

struct RisResult {
    SeedSet seeds;
    /// n * (fraction of RR sets covered by the seeds)
    double influence = 0.0;
    std::size_t sets = 0;
};

/// Default RR-set count: 20 n ln n, at least 1.
inline std::size_t default_rr_count(std::size_t n)
{
    const double nn = static_cast<double>(std::max<std::size_t>(n, 2));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(20.0 * nn * std::log(nn))));
}

/// Greedy maximum coverage over `theta` RR sets sampled with `weights` read as IC
/// probabilities. Ties go to the lowest node id.
inline RisResult ris_select(const AttributedGraph& g, const std::vector<double>& weights, std::size_t k,
                            std::size_t theta, Seed seed)
{
    if (theta < 1) {
        throw ParameterError("need at least one RR set");
    }
    if (weights.size() != g.edge_count()) {
        throw DimensionError("weight vector does not match the graph's edge count");
    }
    const std::size_t n = g.node_count();
    Rng rng(seed);
    std::vector<std::uint8_t> scratch;
    std::vector<std::vector<std::uint32_t>> sets_of(n);
    std::vector<std::vector<NodeId>> sets(theta);
    for (std::size_t i = 0; i < theta; ++i) {
        RRSet rr = generate_rr_set(g, weights, rng, &scratch);
        for (NodeId v : rr.members) {
            sets_of[v].push_back(static_cast<std::uint32_t>(i));
        }
        sets[i] = std::move(rr.members);
    }
    std::vector<std::size_t> count(n);
    for (NodeId v = 0; v < n; ++v) {
        count[v] = sets_of[v].size();
    }
    std::vector<bool> covered(theta, false);
    std::vector<bool> chosen(n, false);
    RisResult res;
    res.sets = theta;
    std::size_t covered_total = 0;
    for (std::size_t r = 0; r < std::min(k, n); ++r) {
        NodeId best = n;
        for (NodeId v = 0; v < n; ++v) {
            if (!chosen[v] && (best == n || count[v] > count[best])) {
                best = v;
            }
        }
        chosen[best] = true;
        res.seeds.nodes.push_back(best);
        res.seeds.provenance.push_back({0, r, static_cast<double>(count[best]) / static_cast<double>(theta) * static_cast<double>(n)});
        for (auto s : sets_of[best]) {
            if (covered[s]) {
                continue;
            }
            covered[s] = true;
            ++covered_total;
            for (NodeId u : sets[s]) {
                --count[u];
            }
        }
    }
    res.influence = static_cast<double>(n) * static_cast<double>(covered_total) / static_cast<double>(theta);
    return res;
}

/// RIS greedy driven by learned attention weights.
inline RisResult rl_ris_select(const AttributedGraph& g, const WeightedGraph& learned, std::size_t k, std::size_t theta,
                               Seed seed)
{
    return ris_select(g, learned.weights, k, theta, seed);
}

} // namespace dscom

#endif
