#ifndef DSCOM_TEST_UTIL_HPP
#define DSCOM_TEST_UTIL_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "dscom/dscom.hpp"

namespace testutil {

using namespace dscom;

inline Eigen::MatrixXd ones(std::size_t n, std::size_t f = 1)
{
    return Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
}

inline AttributedGraph graph(std::size_t n, std::vector<Edge> edges, std::size_t f = 1)
{
    return AttributedGraph(n, std::move(edges), ones(n, f));
}

/// Both directions of every listed pair.
inline std::vector<Edge> both_ways(const std::vector<Edge>& edges)
{
    std::vector<Edge> out;
    for (const Edge& e : edges) {
        out.push_back(e);
        out.push_back({e.dst, e.src});
    }
    return out;
}

/// Undirected cliques on consecutive id ranges of the given sizes.
inline std::vector<Edge> cliques(const std::vector<std::size_t>& sizes)
{
    std::vector<Edge> out;
    std::size_t base = 0;
    for (std::size_t s : sizes) {
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < s; ++j) {
                if (i != j) {
                    out.push_back({base + i, base + j});
                }
            }
        }
        base += s;
    }
    return out;
}

/// Random simple digraph with independent edge probability `density`.
inline AttributedGraph random_digraph(std::size_t n, double density, Seed seed, std::size_t f = 2)
{
    Rng rng(seed);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = 0; v < n; ++v) {
            if (u != v && rng.uniform() < density) {
                edges.push_back({u, v});
            }
        }
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.normal();
    }
    return AttributedGraph(n, std::move(edges), std::move(x));
}

/// Random digraph with exactly `m` distinct edges.
inline AttributedGraph random_digraph_edges(std::size_t n, std::size_t m, Seed seed, std::size_t f = 2)
{
    Rng rng(seed);
    std::vector<Edge> all;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = 0; v < n; ++v) {
            if (u != v) {
                all.push_back({u, v});
            }
        }
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        std::swap(all[i], all[i + rng.index(all.size() - i)]);
    }
    all.resize(std::min(m, all.size()));
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(f));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.normal();
    }
    return AttributedGraph(n, std::move(all), std::move(x));
}

inline DiffusionModel ic_model(const AttributedGraph& g, double p)
{
    return DiffusionModel(ModelKind::IC, std::vector<double>(g.edge_count(), p));
}

inline DiffusionModel ic_model(std::vector<double> p) { return DiffusionModel(ModelKind::IC, std::move(p)); }

/// Average ranks, ties sharing the mean rank.
inline std::vector<double> ranks(const std::vector<double>& x)
{
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) {
            ++j;
        }
        for (std::size_t t = i; t <= j; ++t) {
            r[order[t]] = 0.5 * static_cast<double>(i + j);
        }
        i = j + 1;
    }
    return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) { return pearson(ranks(a), ranks(b)); }

inline double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Plain power iteration for a fixed number of steps.
inline std::vector<double> power_method(const AttributedGraph& g, double d, std::size_t steps)
{
    const std::size_t n = g.node_count();
    std::vector<double> r(n, 1.0 / static_cast<double>(n)), next(n);
    for (std::size_t it = 0; it < steps; ++it) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            dangling += g.out_degree(v) == 0 ? r[v] : 0.0;
        }
        std::fill(next.begin(), next.end(), (1.0 - d) / static_cast<double>(n) + d * dangling / static_cast<double>(n));
        for (const Edge& e : g.edges()) {
            next[e.dst] += d * r[e.src] / static_cast<double>(g.out_degree(e.src));
        }
        r.swap(next);
    }
    return r;
}

/// Coreness from the definition: the largest c such that v survives repeated removal of
/// nodes with fewer than c undirected neighbours.
inline std::vector<std::size_t> definitional_coreness(const AttributedGraph& g)
{
    const std::size_t n = g.node_count();
    std::vector<std::set<NodeId>> nbrs(n);
    for (const Edge& e : g.edges()) {
        if (e.src != e.dst) {
            nbrs[e.src].insert(e.dst);
            nbrs[e.dst].insert(e.src);
        }
    }
    auto survivors = [&](std::size_t c) {
        std::vector<bool> alive(n, true);
        bool changed = true;
        while (changed) {
            changed = false;
            for (NodeId v = 0; v < n; ++v) {
                if (!alive[v]) {
                    continue;
                }
                std::size_t d = 0;
                for (NodeId u : nbrs[v]) {
                    d += alive[u];
                }
                if (d < c) {
                    alive[v] = false;
                    changed = true;
                }
            }
        }
        return alive;
    };
    std::vector<std::size_t> core(n, 0);
    for (std::size_t c = 1; c <= n; ++c) {
        const auto alive = survivors(c);
        for (NodeId v = 0; v < n; ++v) {
            if (alive[v]) {
                core[v] = c;
            }
        }
    }
    return core;
}

} // namespace testutil

#endif
