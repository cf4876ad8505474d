#include <set>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dscom;
using testutil::graph;
using testutil::ic_model;

TEST(SimulateCascade, AllSeedsSaturate)
{
    const auto g = testutil::random_digraph(12, 0.3, 1);
    const auto m = ic_model(g, 0.5);
    NodeSet all(12);
    std::iota(all.begin(), all.end(), NodeId{0});
    const auto t = simulate_cascade(g, m, all, 3);
    EXPECT_EQ(t.activated, all);
    EXPECT_TRUE(t.pairs.empty());
}

TEST(SimulateCascade, DeterministicEdges)
{
    const auto g = graph(2, {{0, 1}});
    const auto on = simulate_cascade(g, ic_model({1.0}), {0}, 1);
    EXPECT_EQ(on.activated, (NodeSet{0, 1}));
    ASSERT_EQ(on.pairs.size(), 1u);
    EXPECT_EQ(on.pairs[0], (Edge{0, 1}));
    const auto off = simulate_cascade(g, ic_model({0.0}), {0}, 1);
    EXPECT_EQ(off.activated, (NodeSet{0}));
}

TEST(SimulateCascade, IcAttributionGoesToLowestActivator)
{
    // 0 and 1 are both seeds and both reach 2 with certainty; 0 attempts first.
    const auto g = graph(3, {{0, 2}, {1, 2}});
    const auto t = simulate_cascade(g, ic_model({1.0, 1.0}), {0, 1}, 5);
    ASSERT_EQ(t.pairs.size(), 1u);
    EXPECT_EQ(t.pairs[0], (Edge{0, 2}));
}

TEST(SimulateCascade, LtAttributionGoesToHeaviestNeighbour)
{
    const auto g = graph(3, {{0, 2}, {1, 2}});
    DiffusionModel m(ModelKind::LT, {0.3, 0.7});
    const auto t = simulate_cascade(g, m, {0, 1}, 2);
    ASSERT_EQ(t.pairs.size(), 1u);
    EXPECT_EQ(t.pairs[0], (Edge{1, 2}));
    DiffusionModel tie(ModelKind::LT, {0.5, 0.5});
    const auto u = simulate_cascade(g, tie, {0, 1}, 2);
    EXPECT_EQ(u.pairs[0], (Edge{0, 2}));
}

TEST(SimulateCascade, RejectsOutOfRangeSeed)
{
    const auto g = graph(2, {{0, 1}});
    EXPECT_THROW(simulate_cascade(g, ic_model({0.5}), {2}, 1), ValidationError);
}

TEST(SimulateCascade, DeterministicAndWellFormedTraces)
{
    for (Seed s = 1; s <= 10; ++s) {
        const auto g = testutil::random_digraph(30, 0.1, s);
        for (ModelKind kind : {ModelKind::IC, ModelKind::LT, ModelKind::PIC, ModelKind::PLT}) {
            const auto m = make_model(kind, g, s, 0.3);
            const NodeSet seeds{0, 7};
            const auto a = simulate_cascade(g, m, seeds, 100 + s);
            const auto b = simulate_cascade(g, m, seeds, 100 + s);
            EXPECT_EQ(a.activated, b.activated);
            EXPECT_EQ(a.pairs, b.pairs);
            EXPECT_EQ(a.rounds, b.rounds);
            EXPECT_TRUE(std::includes(a.activated.begin(), a.activated.end(), seeds.begin(), seeds.end()));
            std::set<NodeId> targets;
            for (const Edge& p : a.pairs) {
                EXPECT_TRUE(g.has_edge(p.src, p.dst));
                EXPECT_TRUE(targets.insert(p.dst).second);
                EXPECT_FALSE(std::binary_search(seeds.begin(), seeds.end(), p.dst));
            }
            EXPECT_EQ(targets.size() + seeds.size(), a.activated.size());
        }
    }
}

TEST(EstimateInfluence, SaturatedAndIsolated)
{
    const auto g = graph(4, {{0, 1}, {1, 2}});
    const auto m = ic_model(g, 0.5);
    const auto all = estimate_influence(g, m, {0, 1, 2, 3}, 50, 4, 1);
    EXPECT_DOUBLE_EQ(all.mean, 4.0);
    EXPECT_DOUBLE_EQ(all.std, 0.0);
    const auto lonely = estimate_influence(g, m, {3}, 50, 4, 1);
    EXPECT_DOUBLE_EQ(lonely.mean, 1.0);
    EXPECT_DOUBLE_EQ(lonely.std, 0.0);
}

TEST(EstimateInfluence, SingleHalfEdge)
{
    const auto g = graph(2, {{0, 1}});
    const auto est = estimate_influence(g, ic_model({0.5}), {0}, 100000, 1, 9);
    EXPECT_NEAR(est.mean, 1.5, 0.01);
}

TEST(EstimateInfluence, ReproducibleAndInRange)
{
    const auto g = testutil::random_digraph(40, 0.08, 5);
    const auto m = make_model(ModelKind::PIC, g, 5, 0.2);
    const auto a = estimate_influence(g, m, {1, 2, 3}, 300, 5, 77);
    const auto b = estimate_influence(g, m, {1, 2, 3}, 300, 5, 77);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std, b.std);
    EXPECT_GE(a.mean, 3.0);
    EXPECT_LE(a.mean, 40.0);
    EXPECT_GE(a.std, 0.0);
    EXPECT_THROW(estimate_influence(g, m, {1}, 0, 1, 1), ParameterError);
}

TEST(GenerateDataset, ExactSizeOnProductiveModel)
{
    SyntheticGraphConfig cfg;
    cfg.node_count = 200;
    const auto g = make_synthetic_graph(cfg).graph;
    const auto m = make_model(ModelKind::PIC, g, 3, 0.1);
    const auto out = generate_dataset(g, m, 1000, 4);
    EXPECT_EQ(out.dataset.size(), 1000u);
    EXPECT_FALSE(out.exhausted);
    EXPECT_NO_THROW(out.dataset.validate(g));
    EXPECT_GE(out.dataset.cascade_count(), 1u);
}

TEST(GenerateDataset, SilentModelGivesUpWithWarning)
{
    const auto g = testutil::random_digraph(20, 0.2, 2);
    DatasetOptions opts;
    opts.max_cascades = 50;
    const auto out = generate_dataset(g, ic_model(g, 0.0), 10, 1, opts);
    EXPECT_TRUE(out.exhausted);
    EXPECT_TRUE(out.dataset.empty());
    EXPECT_EQ(out.cascades, 50u);
}

TEST(GenerateDataset, TruncatesFirstCascade)
{
    std::vector<Edge> edges;
    for (NodeId u = 0; u < 10; ++u) {
        for (NodeId v = 0; v < 10; ++v) {
            if (u != v) {
                edges.push_back({u, v});
            }
        }
    }
    const auto g = graph(10, edges);
    const auto out = generate_dataset(g, ic_model(g, 1.0), 5, 3, {0.001, 100});
    EXPECT_EQ(out.dataset.size(), 5u);
    EXPECT_EQ(out.dataset.cascade_count(), 1u);
}

TEST(GenerateDataset, PairsActivateTargetsOncePerCascade)
{
    const auto g = testutil::random_digraph(60, 0.06, 8);
    const auto m = make_model(ModelKind::IC, g, 8, 0.3);
    const auto out = generate_dataset(g, m, 300, 9, {0.05, 10000});
    std::map<std::string, std::set<NodeId>> seen;
    for (const auto& p : out.dataset.pairs()) {
        EXPECT_TRUE(g.has_edge(p.src, p.dst));
        EXPECT_TRUE(seen[p.cascade].insert(p.dst).second);
    }
}

TEST(GenerateDataset, BadArguments)
{
    const auto g = graph(2, {{0, 1}});
    EXPECT_THROW(generate_dataset(g, ic_model({0.5}), 0, 1), ParameterError);
    EXPECT_THROW(generate_dataset(g, ic_model({0.5}), 1, 1, {0.0, 10}), ParameterError);
}

namespace {

/// Independent enumeration: each subset of live edges, BFS from the seeds.
double brute_force_ic(const AttributedGraph& g, const std::vector<double>& p, const NodeSet& seeds)
{
    const std::size_t E = g.edge_count();
    double total = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << E); ++mask) {
        double prob = 1.0;
        for (std::size_t e = 0; e < E; ++e) {
            prob *= (mask >> e & 1) ? p[e] : 1.0 - p[e];
        }
        std::vector<bool> on(g.node_count(), false);
        for (NodeId s : seeds) {
            on[s] = true;
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t e = 0; e < E; ++e) {
                const Edge& ed = g.edge(e);
                if ((mask >> e & 1) && on[ed.src] && !on[ed.dst]) {
                    on[ed.dst] = true;
                    changed = true;
                }
            }
        }
        total += prob * static_cast<double>(std::count(on.begin(), on.end(), true));
    }
    return total;
}

} // namespace

TEST(ExactOracle, Examples)
{
    EXPECT_DOUBLE_EQ(exact_influence_oracle(graph(2, {{0, 1}}), ic_model({0.5}), {0}), 1.5);
    EXPECT_DOUBLE_EQ(exact_influence_oracle(graph(3, {{0, 1}, {1, 2}}), ic_model({1.0, 1.0}), {0}), 3.0);
}

TEST(ExactOracle, DiamondMatchesEnumeration)
{
    const auto diamond = graph(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    const std::vector<double> p(4, 0.5);
    const double oracle = exact_influence_oracle(diamond, ic_model(p), {0});
    EXPECT_NEAR(oracle, 2.4375, 1e-12);
    EXPECT_NEAR(oracle, brute_force_ic(diamond, p, {0}), 1e-12);
}

TEST(ExactOracle, MatchesIndependentEnumerationOnRandomInstances)
{
    for (Seed s = 1; s <= 15; ++s) {
        const auto g = testutil::random_digraph_edges(7, 10, s);
        const auto m = make_model(ModelKind::IC, g, s, 0.4);
        EXPECT_NEAR(exact_influence_oracle(g, m, {0}), brute_force_ic(g, m.edge_values(), {0}), 1e-10);
        EXPECT_NEAR(exact_influence_oracle(g, m, {1, 4}), brute_force_ic(g, m.edge_values(), {1, 4}), 1e-10);
    }
}

TEST(ExactOracle, LinearThresholdChain)
{
    // 0 -> 1 with weight 0.4, 1 -> 2 with weight 1: sigma({0}) = 1 + 0.4 + 0.4.
    const auto g = graph(3, {{0, 1}, {1, 2}});
    EXPECT_NEAR(exact_influence_oracle(g, DiffusionModel(ModelKind::LT, {0.4, 1.0}), {0}), 1.8, 1e-12);
}

TEST(ExactOracle, SizeLimits)
{
    const auto big = testutil::random_digraph_edges(10, 21, 3);
    EXPECT_THROW(exact_influence_oracle(big, ic_model(big, 0.1), {0}), SizeError);
    std::vector<Edge> edges;
    for (NodeId v = 1; v < 24; ++v) {
        edges.push_back({v, 0});
    }
    const auto hub = graph(24, edges);
    DiffusionModel lt(ModelKind::LT, std::vector<double>(hub.edge_count(), 0.01));
    EXPECT_NO_THROW(exact_influence_oracle(hub, lt, {0}));
    std::vector<Edge> dense;
    for (NodeId u = 0; u < 8; ++u) {
        for (NodeId v = 0; v < 8; ++v) {
            if (u != v) {
                dense.push_back({u, v});
            }
        }
    }
    const auto k8 = graph(8, dense);
    DiffusionModel lt8(ModelKind::LT, std::vector<double>(k8.edge_count(), 0.1));
    EXPECT_THROW(exact_influence_oracle(k8, lt8, {0}), SizeError);
}

TEST(ExactOracle, MonotoneInSeeds)
{
    for (Seed s = 1; s <= 10; ++s) {
        const auto g = testutil::random_digraph_edges(8, 12, s);
        for (ModelKind kind : {ModelKind::IC, ModelKind::LT}) {
            const auto m = make_model(kind, g, s, 0.35);
            double prev = 0.0;
            NodeSet seeds;
            for (NodeId v : {3, 0, 6, 1}) {
                seeds = make_node_set([&] {
                    auto x = seeds;
                    x.push_back(v);
                    return x;
                }());
                const double cur = exact_influence_oracle(g, m, seeds);
                EXPECT_GE(cur, prev - 1e-12);
                prev = cur;
            }
        }
    }
}

TEST(ExactOracle, MonteCarloAgreesWithinBinomialBound)
{
    const std::size_t R = 20000;
    for (Seed s = 1; s <= 20; ++s) {
        const auto g = testutil::random_digraph_edges(8, 12, 100 + s);
        const ModelKind kind = s % 2 ? ModelKind::PIC : ModelKind::LT;
        const auto m = make_model(kind, g, s, 0.3);
        const NodeSet seeds{0, 5};
        const double exact = exact_influence_oracle(g, m, seeds);
        const double mc = estimate_influence(g, m, seeds, R, 1, s).mean;
        const double bound = 4.0 * (static_cast<double>(g.node_count()) / 2.0) / std::sqrt(static_cast<double>(R));
        EXPECT_NEAR(mc, exact, bound) << "instance " << s;
    }
}

TEST(SeedsHash, OrderFreeAndStable)
{
    EXPECT_EQ(seeds_hash({1, 2, 3}), seeds_hash(make_node_set({3, 1, 2})));
    EXPECT_NE(seeds_hash({1, 2, 3}), seeds_hash({1, 2, 4}));
    EXPECT_EQ(seeds_hash({1}).size(), 16u);
}
