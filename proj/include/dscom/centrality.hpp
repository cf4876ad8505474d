#ifndef DSCOM_CENTRALITY_HPP
#define DSCOM_CENTRALITY_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "dscom/error.hpp"
#include "dscom/graph.hpp"

namespace dscom {

enum class CentralityMeasure { Degree, KCore, PageRank, Closeness };

inline std::string_view to_string(CentralityMeasure m)
{
    switch (m) {
    case CentralityMeasure::Degree: return "degree";
    case CentralityMeasure::KCore: return "kcore";
    case CentralityMeasure::PageRank: return "pagerank";
    case CentralityMeasure::Closeness: return "closeness";
    }
    return "?";
}

inline CentralityMeasure parse_centrality(std::string_view s)
{
    if (s == "degree") return CentralityMeasure::Degree;
    if (s == "kcore" || s == "k-core") return CentralityMeasure::KCore;
    if (s == "pagerank") return CentralityMeasure::PageRank;
    if (s == "closeness") return CentralityMeasure::Closeness;
    throw ParameterError("unknown centrality measure '" + std::string(s) + "'");
}

struct PageRankParams {
    double damping = 0.85;
    double tolerance = 1e-10;
    std::size_t max_iterations = 100000;
};

struct CentralityScores {
    CentralityMeasure measure = CentralityMeasure::Degree;
    std::vector<double> score;
};

/// In-degree plus out-degree.
inline std::vector<double> degree_centrality(const AttributedGraph& g)
{
    std::vector<double> out(g.node_count());
    for (NodeId v = 0; v < g.node_count(); ++v) {
        out[v] = static_cast<double>(g.degree(v));
    }
    return out;
}

/// Coreness on the undirected view by bucket peeling (Batagelj-Zaversnik).
inline std::vector<std::size_t> core_numbers(const AttributedGraph& g)
{
    const std::size_t n = g.node_count();
    std::vector<std::vector<NodeId>> adj(n);
    std::vector<std::size_t> deg(n);
    std::size_t max_deg = 0;
    for (NodeId v = 0; v < n; ++v) {
        adj[v] = g.undirected_neighbors(v);
        deg[v] = adj[v].size();
        max_deg = std::max(max_deg, deg[v]);
    }
    std::vector<std::size_t> bin(max_deg + 1, 0);
    for (auto d : deg) {
        ++bin[d];
    }
    std::size_t start = 0;
    for (auto& b : bin) {
        const std::size_t c = b;
        b = start;
        start += c;
    }
    std::vector<NodeId> vert(n);
    std::vector<std::size_t> pos(n);
    for (NodeId v = 0; v < n; ++v) {
        pos[v] = bin[deg[v]]++;
        vert[pos[v]] = v;
    }
    for (std::size_t d = max_deg; d > 0; --d) {
        bin[d] = bin[d - 1];
    }
    if (!bin.empty()) {
        bin[0] = 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const NodeId v = vert[i];
        for (NodeId u : adj[v]) {
            if (deg[u] > deg[v]) {
                const std::size_t du = deg[u];
                const std::size_t pu = pos[u];
                const std::size_t pw = bin[du];
                const NodeId w = vert[pw];
                if (u != w) {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }
    return deg;
}

/// Power iteration over out-edges with uniform teleport; dangling mass is spread uniformly.
/// Stops when the L1 change drops below the tolerance.
inline std::vector<double> pagerank(const AttributedGraph& g, const PageRankParams& params = {})
{
    const std::size_t n = g.node_count();
    if (n == 0) {
        return {};
    }
    const double nn = static_cast<double>(n);
    std::vector<double> rank(n, 1.0 / nn);
    std::vector<double> next(n);
    for (std::size_t it = 0; it < params.max_iterations; ++it) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            if (g.out_degree(v) == 0) {
                dangling += rank[v];
            }
        }
        const double base = (1.0 - params.damping) / nn + params.damping * dangling / nn;
        for (NodeId v = 0; v < n; ++v) {
            double s = 0.0;
            for (NodeId u : g.in_neighbors(v)) {
                s += rank[u] / static_cast<double>(g.out_degree(u));
            }
            next[v] = base + params.damping * s;
        }
        double total = 0.0;
        for (double x : next) {
            total += x;
        }
        double delta = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            next[v] /= total;
            delta += std::abs(next[v] - rank[v]);
        }
        rank.swap(next);
        if (delta < params.tolerance) {
            break;
        }
    }
    return rank;
}

/// Closeness with the Wasserman-Faust correction over directed BFS distances:
/// c(v) = (r / (n - 1)) * (r / sum of distances), r = nodes reachable from v excluding v.
inline std::vector<double> closeness_centrality(const AttributedGraph& g)
{
    const std::size_t n = g.node_count();
    std::vector<double> out(n, 0.0);
    if (n < 2) {
        return out;
    }
    std::vector<std::size_t> dist(n);
    std::vector<NodeId> queue;
    queue.reserve(n);
    constexpr auto unseen = std::numeric_limits<std::size_t>::max();
    for (NodeId s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), unseen);
        queue.clear();
        dist[s] = 0;
        queue.push_back(s);
        std::size_t reached = 0;
        std::size_t total = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const NodeId u = queue[head];
            for (NodeId v : g.out_neighbors(u)) {
                if (dist[v] == unseen) {
                    dist[v] = dist[u] + 1;
                    ++reached;
                    total += dist[v];
                    queue.push_back(v);
                }
            }
        }
        if (reached > 0) {
            const double r = static_cast<double>(reached);
            out[s] = (r / static_cast<double>(n - 1)) * (r / static_cast<double>(total));
        }
    }
    return out;
}

inline CentralityScores centrality(const AttributedGraph& g, CentralityMeasure measure, const PageRankParams& pr = {})
{
    if (g.node_count() == 0) {
        throw ValidationError("centrality of an empty graph");
    }
    CentralityScores out;
    out.measure = measure;
    switch (measure) {
    case CentralityMeasure::Degree: out.score = degree_centrality(g); break;
    case CentralityMeasure::KCore: {
        const auto core = core_numbers(g);
        out.score.assign(core.begin(), core.end());
        break;
    }
    case CentralityMeasure::PageRank: out.score = pagerank(g, pr); break;
    case CentralityMeasure::Closeness: out.score = closeness_centrality(g); break;
    }
    return out;
}

} // namespace dscom

#endif
