#ifndef DSCOM_SEED_SELECTION_HPP
#define DSCOM_SEED_SELECTION_HPP

#include <algorithm>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "dscom/centrality.hpp"
#include "dscom/community.hpp"
#include "dscom/graph.hpp"

namespace dscom {

struct SeedProvenance {
    std::size_t community = 0;
    std::size_t rank = 0;
    double score = 0.0;
};

/// Selected seeds in selection order, with where each one came from.
struct SeedSet {
    std::vector<NodeId> nodes;
    std::vector<SeedProvenance> provenance;
    /// Budget that could not be spent because a community was too small.
    std::size_t shortfall = 0;

    NodeSet sorted() const { return make_node_set(nodes); }
    std::size_t size() const { return nodes.size(); }
};

/// Strategy names D-D, D-K, D-PR, D-C map onto the four measures.
inline CentralityMeasure strategy_measure(std::string_view name)
{
    if (name == "D-D") return CentralityMeasure::Degree;
    if (name == "D-K") return CentralityMeasure::KCore;
    if (name == "D-PR") return CentralityMeasure::PageRank;
    if (name == "D-C") return CentralityMeasure::Closeness;
    throw ParameterError("unknown selection strategy '" + std::string(name) + "'");
}

inline bool is_community_strategy(std::string_view name)
{
    return name == "D-D" || name == "D-K" || name == "D-PR" || name == "D-C";
}

/// Splits a total budget across communities.
///
/// k == #communities: one each. k > #communities: largest-remainder apportionment by size.
/// k < #communities: one each for the k largest. Ties go to the larger community, then the
/// lower id.
inline std::vector<std::size_t> allocate_budget(const Partition& p, std::size_t k)
{
    if (k < 1) {
        throw ParameterError("budget must be >= 1");
    }
    const auto sizes = p.sizes();
    std::vector<std::size_t> budget(p.k, 0);
    std::vector<std::size_t> order(p.k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });

    if (k == p.k) {
        std::fill(budget.begin(), budget.end(), 1);
    } else if (k < p.k) {
        for (std::size_t i = 0; i < k; ++i) {
            budget[order[i]] = 1;
        }
    } else {
        const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
        std::vector<double> remainder(p.k);
        std::size_t used = 0;
        for (std::size_t c = 0; c < p.k; ++c) {
            const double quota = static_cast<double>(k) * static_cast<double>(sizes[c]) / n;
            budget[c] = static_cast<std::size_t>(quota);
            remainder[c] = quota - static_cast<double>(budget[c]);
            used += budget[c];
        }
        std::vector<std::size_t> by_rem(p.k);
        std::iota(by_rem.begin(), by_rem.end(), std::size_t{0});
        std::stable_sort(by_rem.begin(), by_rem.end(), [&](std::size_t a, std::size_t b) {
            if (remainder[a] != remainder[b]) {
                return remainder[a] > remainder[b];
            }
            return sizes[a] > sizes[b];
        });
        for (std::size_t i = 0; used < k; i = (i + 1) % p.k) {
            ++budget[by_rem[i]];
            ++used;
        }
    }
    return budget;
}

/// Per community: centrality on the induced subgraph, top-`budget` nodes by (score desc,
/// global degree desc, id asc).
inline SeedSet select_seeds(const AttributedGraph& g, const Partition& p, const std::vector<std::size_t>& budgets,
                            CentralityMeasure measure)
{
    if (budgets.size() != p.k) {
        throw DimensionError("one budget per community required");
    }
    p.validate(g.node_count());
    SeedSet out;
    const auto members = p.members();
    for (std::size_t c = 0; c < p.k; ++c) {
        if (budgets[c] == 0) {
            continue;
        }
        const Subgraph sub = induced_subgraph(g, members[c]);
        const CentralityScores scores = centrality(sub.graph, measure);
        std::vector<std::size_t> order(sub.to_original.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores.score[a] != scores.score[b]) {
                return scores.score[a] > scores.score[b];
            }
            const auto da = g.degree(sub.to_original[a]);
            const auto db = g.degree(sub.to_original[b]);
            if (da != db) {
                return da > db;
            }
            return sub.to_original[a] < sub.to_original[b];
        });
        const std::size_t take = std::min(budgets[c], order.size());
        out.shortfall += budgets[c] - take;
        for (std::size_t r = 0; r < take; ++r) {
            out.nodes.push_back(sub.to_original[order[r]]);
            out.provenance.push_back({c, r, scores.score[order[r]]});
        }
    }
    return out;
}

inline void write_seed_set(std::ostream& out, const SeedSet& s)
{
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        const auto& p = i < s.provenance.size() ? s.provenance[i] : SeedProvenance{0, i, 0.0};
        out << s.nodes[i] << ' ' << p.community << ' ' << p.rank << ' ' << detail::format_real(p.score) << '\n';
    }
}

inline SeedSet parse_seed_set(std::istream& in)
{
    SeedSet s;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto t = detail::split_ws(line);
        if (t.empty()) {
            continue;
        }
        auto v = detail::parse_index(t[0]);
        if (!v) {
            throw ParseError("bad seed line '" + std::string(line) + "'", line_no);
        }
        if (std::find(s.nodes.begin(), s.nodes.end(), *v) != s.nodes.end()) {
            throw ValidationError("line " + std::to_string(line_no) + ": duplicate seed " + std::to_string(*v));
        }
        SeedProvenance p{0, s.nodes.size(), 0.0};
        if (t.size() >= 4) {
            p.community = detail::parse_index(t[1]).value_or(0);
            p.rank = detail::parse_index(t[2]).value_or(0);
            p.score = detail::parse_real(t[3]).value_or(0.0);
        }
        s.nodes.push_back(*v);
        s.provenance.push_back(p);
    }
    return s;
}

} // namespace dscom

#endif
