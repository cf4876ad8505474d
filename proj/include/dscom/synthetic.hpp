#ifndef DSCOM_SYNTHETIC_HPP
#define DSCOM_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "dscom/graph.hpp"
#include "dscom/rng.hpp"

namespace dscom {

/// Degree-corrected planted-partition graph with community-correlated Gaussian features.
struct SyntheticGraphConfig {
    std::size_t node_count = 300;
    std::size_t communities = 10;
    /// Mean undirected degree; every undirected edge is stored in both directions.
    double mean_degree = 8.0;
    /// Fraction of edges whose second endpoint is drawn from the whole graph.
    double mixing = 0.15;
    /// Pareto tail index of the node propensities; larger means more regular degrees.
    double degree_exponent = 2.5;
    std::size_t feature_dim = 8;
    double feature_noise = 0.7;
    Seed seed = 1;
};

namespace detail {

inline std::size_t sample_cumulative(const std::vector<double>& cumulative, Rng& rng)
{
    const double r = rng.uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

} // namespace detail

struct SyntheticGraph {
    AttributedGraph graph;
    std::vector<std::size_t> community;
};

inline SyntheticGraph make_synthetic_graph(const SyntheticGraphConfig& cfg)
{
    const std::size_t n = cfg.node_count;
    const std::size_t c = std::max<std::size_t>(1, std::min(cfg.communities, n));
    if (n < 2) {
        throw ParameterError("synthetic graph needs at least 2 nodes");
    }
    Rng rng(cfg.seed);

    std::vector<std::size_t> community(n);
    std::vector<std::vector<NodeId>> members(c);
    for (NodeId v = 0; v < n; ++v) {
        community[v] = v * c / n;
        members[community[v]].push_back(v);
    }

    std::vector<double> propensity(n);
    for (double& w : propensity) {
        const double u = std::max(rng.uniform(), 1e-12);
        w = std::min(std::pow(u, -1.0 / cfg.degree_exponent), 50.0);
    }
    std::vector<double> global_cum(n);
    double acc = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        acc += propensity[v];
        global_cum[v] = acc;
    }
    std::vector<std::vector<double>> local_cum(c);
    for (std::size_t k = 0; k < c; ++k) {
        double s = 0.0;
        for (NodeId v : members[k]) {
            s += propensity[v];
            local_cum[k].push_back(s);
        }
    }

    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.mean_degree / 2.0));
    const std::size_t max_possible = n * (n - 1) / 2;
    std::set<std::pair<NodeId, NodeId>> undirected;
    std::size_t attempts = 0;
    while (undirected.size() < std::min(target, max_possible) && attempts < 50 * target + 1000) {
        ++attempts;
        const NodeId u = detail::sample_cumulative(global_cum, rng);
        NodeId v = 0;
        if (rng.uniform() < cfg.mixing || members[community[u]].size() < 2) {
            v = detail::sample_cumulative(global_cum, rng);
        } else {
            const auto& m = members[community[u]];
            v = m[detail::sample_cumulative(local_cum[community[u]], rng)];
        }
        if (u == v) {
            continue;
        }
        undirected.emplace(std::min(u, v), std::max(u, v));
    }

    std::vector<Edge> edges;
    edges.reserve(2 * undirected.size());
    for (auto [u, v] : undirected) {
        edges.push_back({u, v});
        edges.push_back({v, u});
    }

    const auto F = static_cast<Eigen::Index>(std::max<std::size_t>(1, cfg.feature_dim));
    Eigen::MatrixXd centroids(static_cast<Eigen::Index>(c), F);
    for (Eigen::Index i = 0; i < centroids.rows(); ++i) {
        for (Eigen::Index j = 0; j < F; ++j) {
            centroids(i, j) = rng.normal();
        }
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), F);
    for (NodeId v = 0; v < n; ++v) {
        for (Eigen::Index j = 0; j < F; ++j) {
            x(static_cast<Eigen::Index>(v), j) =
                centroids(static_cast<Eigen::Index>(community[v]), j) + cfg.feature_noise * rng.normal();
        }
    }
    return {AttributedGraph(n, std::move(edges), std::move(x)), std::move(community)};
}

} // namespace dscom

#endif
