#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dscom;
using testutil::graph;

namespace {

std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("dscom_graph_" + name);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

} // namespace

TEST(AttributedGraph, BuildsAdjacency)
{
    Eigen::MatrixXd x(3, 2);
    x << 1, 0, 0, 1, 0, 0;
    AttributedGraph g(3, {{0, 1}, {1, 2}}, x);
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.feature_dim(), 2u);
    EXPECT_EQ(g.out_degree(0), 1u);
    EXPECT_EQ(g.in_degree(2), 1u);
    EXPECT_EQ(g.degree(1), 2u);
    EXPECT_TRUE(g.has_edge(0, 1));
    EXPECT_FALSE(g.has_edge(1, 0));
    EXPECT_EQ(*g.find_edge(1, 2), 1u);
}

TEST(AttributedGraph, RejectsBadInput)
{
    EXPECT_THROW(graph(2, {{0, 2}}), ValidationError);
    EXPECT_THROW(graph(2, {{1, 1}}), ValidationError);
    EXPECT_THROW(graph(2, {{0, 1}, {0, 1}}), ValidationError);
    EXPECT_THROW(AttributedGraph(3, {}, Eigen::MatrixXd::Zero(2, 1)), DimensionError);
    EXPECT_THROW(AttributedGraph(3, {}, Eigen::MatrixXd::Zero(3, 0)), DimensionError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 1);
    bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(AttributedGraph(2, {}, bad), ValidationError);
}

TEST(AttributedGraph, DegreeSumsMatchEdgeCount)
{
    for (Seed s = 1; s <= 10; ++s) {
        const auto g = testutil::random_digraph(25, 0.15, s);
        std::size_t in = 0, out = 0;
        for (NodeId v = 0; v < g.node_count(); ++v) {
            in += g.in_degree(v);
            out += g.out_degree(v);
        }
        EXPECT_EQ(in, g.edge_count());
        EXPECT_EQ(out, g.edge_count());
    }
}

TEST(EdgeList, ParsesCommentsAndWhitespace)
{
    std::istringstream in("# header\n0 1\n1\t2\n\n  2 0  \n");
    const EdgeList e = parse_edge_list(in);
    EXPECT_EQ(e.node_count, 3u);
    ASSERT_EQ(e.edges.size(), 3u);
    EXPECT_EQ(e.edges[1], (Edge{1, 2}));
}

TEST(EdgeList, MalformedLineReportsLineNumber)
{
    std::istringstream in("0 1\n1 x\n");
    try {
        parse_edge_list(in);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream three("0 1 2\n");
    EXPECT_THROW(parse_edge_list(three), ParseError);
}

TEST(EdgeList, UndirectedExpandsBothDirections)
{
    std::istringstream in("0 1\n1 2\n");
    const EdgeList e = parse_edge_list(in, {true, false});
    EXPECT_EQ(e.edges.size(), 4u);
}

TEST(EdgeList, RelabelByFirstAppearance)
{
    std::istringstream in("alice bob\nbob carol\n");
    const EdgeList e = parse_edge_list(in, {false, true});
    EXPECT_EQ(e.node_count, 3u);
    EXPECT_EQ(e.labels, (std::vector<std::string>{"alice", "bob", "carol"}));
    EXPECT_EQ(e.edges[1], (Edge{1, 2}));
}

TEST(EdgeList, SingleEdgeInfersNodeCountAndDegreeFeatures)
{
    std::istringstream in("5 9\n");
    const AttributedGraph g = assemble_graph(parse_edge_list(in), std::nullopt);
    EXPECT_EQ(g.node_count(), 10u);
    EXPECT_EQ(g.feature_dim(), 1u);
    for (Eigen::Index i = 0; i < 10; ++i) {
        EXPECT_GE(g.features()(i, 0), 0.0);
        EXPECT_LE(g.features()(i, 0), 1.0);
    }
    EXPECT_DOUBLE_EQ(g.features()(5, 0), 1.0);
    EXPECT_DOUBLE_EQ(g.features()(0, 0), 0.0);
}

TEST(Loader, EdgesWithFeatureFile)
{
    const auto dir = temp_dir("features");
    write_file(dir / "e.txt", "0 1\n1 2\n");
    write_file(dir / "x.csv", "1,0\n0,1\n0,0\n");
    const auto g = load_attributed_graph((dir / "e.txt").string(), (dir / "x.csv").string());
    EXPECT_EQ(g.node_count(), 3u);
    EXPECT_EQ(g.feature_dim(), 2u);
    EXPECT_EQ(g.edge_count(), 2u);
}

TEST(Loader, FeatureErrors)
{
    const auto dir = temp_dir("feature_errors");
    write_file(dir / "e.txt", "0 1\n1 3\n");
    write_file(dir / "x.csv", "1,0\n0,1\n0,0\n");
    EXPECT_THROW(load_attributed_graph((dir / "e.txt").string(), (dir / "x.csv").string()), ValidationError);
    write_file(dir / "ragged.csv", "1,0\n0\n");
    std::ifstream ragged(dir / "ragged.csv");
    EXPECT_THROW(parse_feature_table(ragged), DimensionError);
    EXPECT_THROW(load_attributed_graph((dir / "missing.txt").string(), std::nullopt), IoError);
}

TEST(Loader, RelabelWritesLabelMap)
{
    const auto dir = temp_dir("labels");
    write_file(dir / "e.txt", "10 20\n20 30\n");
    const auto g = load_attributed_graph((dir / "e.txt").string(), std::nullopt, {false, true},
                                         (dir / "map.txt").string());
    EXPECT_EQ(g.node_count(), 3u);
    std::ifstream map(dir / "map.txt");
    std::string text((std::istreambuf_iterator<char>(map)), std::istreambuf_iterator<char>());
    EXPECT_EQ(text, "0 10\n1 20\n2 30\n");
}

TEST(Loader, RoundTripIsBitExact)
{
    const auto dir = temp_dir("roundtrip");
    const auto g = testutil::random_digraph(30, 0.1, 4, 3);
    save_attributed_graph(g, (dir / "e.txt").string(), (dir / "x.csv").string());
    const auto h = load_attributed_graph((dir / "e.txt").string(), (dir / "x.csv").string());
    EXPECT_EQ(h.edges(), g.edges());
    EXPECT_TRUE(h.features() == g.features());
}

TEST(InducedSubgraph, Examples)
{
    const auto tri = graph(3, {{0, 1}, {1, 2}, {2, 0}});
    const auto sub = induced_subgraph(tri, {0, 1});
    EXPECT_EQ(sub.graph.node_count(), 2u);
    EXPECT_EQ(sub.graph.edge_count(), 1u);

    const auto all = induced_subgraph(tri, {0, 1, 2});
    EXPECT_EQ(all.graph.edges(), tri.edges());
    EXPECT_EQ(all.to_original, (std::vector<NodeId>{0, 1, 2}));

    const auto star = graph(4, {{0, 1}, {0, 2}, {0, 3}});
    const auto leaves = induced_subgraph(star, {1, 2, 3});
    EXPECT_EQ(leaves.graph.node_count(), 3u);
    EXPECT_EQ(leaves.graph.edge_count(), 0u);

    EXPECT_THROW(induced_subgraph(tri, {}), ValidationError);
    EXPECT_THROW(induced_subgraph(tri, {5}), ValidationError);
}

TEST(InducedSubgraph, CompositionEqualsIntersection)
{
    const auto g = testutil::random_digraph(20, 0.2, 9);
    const NodeSet a{0, 2, 3, 5, 7, 8, 11, 13, 17, 19};
    const NodeSet b{2, 3, 4, 7, 11, 12, 19};
    const auto first = induced_subgraph(g, a);
    NodeSet b_local;
    for (NodeId v : b) {
        if (first.to_local[v] != Subgraph::npos) {
            b_local.push_back(first.to_local[v]);
        }
    }
    const auto twice = induced_subgraph(first.graph, b_local);
    NodeSet inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    const auto direct = induced_subgraph(g, inter);
    EXPECT_EQ(twice.graph.edges(), direct.graph.edges());
    EXPECT_TRUE(twice.graph.features() == direct.graph.features());
}

TEST(DiffusionDataset, ParsesPairsAndCascades)
{
    const auto path = graph(3, {{0, 1}, {1, 2}});
    std::istringstream in("c0 0 1\nc0 1 2\n");
    const auto ds = parse_diffusion_dataset(in, path);
    EXPECT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds.cascade_count(), 1u);
}

TEST(DiffusionDataset, MultisetSemantics)
{
    const auto path = graph(3, {{0, 1}, {1, 2}});
    std::istringstream in("c0 0 1\nc0 0 1\nc0 0 1\n");
    const auto ds = parse_diffusion_dataset(in, path);
    EXPECT_EQ(ds.size(), 3u);
    EXPECT_EQ(ds.multiplicity(0, 1), 3u);
    std::size_t total = 0;
    for (const auto& [pair, m] : ds.multiplicities()) {
        total += m;
    }
    EXPECT_EQ(total, ds.size());
}

TEST(DiffusionDataset, Errors)
{
    const auto path = graph(3, {{0, 1}, {1, 2}});
    std::istringstream non_edge("c0 2 0\n");
    try {
        parse_diffusion_dataset(non_edge, path);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("(2,0)"), std::string::npos);
    }
    std::istringstream empty("# nothing\n");
    EXPECT_THROW(parse_diffusion_dataset(empty, path), ValidationError);
    std::istringstream bad("c0 1\n");
    EXPECT_THROW(parse_diffusion_dataset(bad, path), ParseError);
}

TEST(DiffusionDataset, WriteParseRoundTrip)
{
    const auto path = graph(3, {{0, 1}, {1, 2}});
    DiffusionDataset ds;
    ds.add("7", 0, 1);
    ds.add("7", 1, 2);
    ds.add("8", 0, 1);
    std::ostringstream out;
    write_diffusion_dataset(out, ds);
    std::istringstream in(out.str());
    EXPECT_EQ(parse_diffusion_dataset(in, path).pairs(), ds.pairs());
}

TEST(Rng, DerivedSeedsAreStableAndDistinct)
{
    EXPECT_EQ(derive_seed(1, "train"), derive_seed(1, "train"));
    EXPECT_NE(derive_seed(1, "train"), derive_seed(1, "cluster"));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.next(), b.next());
    }
    for (std::uint64_t c = 0; c < 1000; ++c) {
        const double u = hash_uniform(3, c);
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Synthetic, DeterministicAndWellFormed)
{
    SyntheticGraphConfig cfg;
    cfg.node_count = 120;
    cfg.communities = 4;
    const auto a = make_synthetic_graph(cfg);
    const auto b = make_synthetic_graph(cfg);
    EXPECT_EQ(a.graph.edges(), b.graph.edges());
    EXPECT_TRUE(a.graph.features() == b.graph.features());
    EXPECT_EQ(a.graph.node_count(), 120u);
    EXPECT_EQ(a.community.size(), 120u);
    for (const Edge& e : a.graph.edges()) {
        EXPECT_TRUE(a.graph.has_edge(e.dst, e.src));
    }
}
