#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace dscom;
using testutil::graph;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

AttributedGraph synthetic_with_edges(std::size_t target_edges)
{
    SyntheticGraphConfig cfg;
    cfg.node_count = 125;
    cfg.communities = 5;
    cfg.mean_degree = static_cast<double>(target_edges) / 125.0;
    return make_synthetic_graph(cfg).graph;
}

} // namespace

TEST(ModelKind, ParsesNames)
{
    EXPECT_EQ(parse_model_kind("ic"), ModelKind::IC);
    EXPECT_EQ(parse_model_kind("PLT"), ModelKind::PLT);
    EXPECT_EQ(to_string(ModelKind::PIC), "PIC");
    EXPECT_THROW(parse_model_kind("SIR"), ParameterError);
}

TEST(MakeModel, IcSingleEdgeInRange)
{
    const auto g = graph(2, {{0, 1}});
    const auto m = make_model(ModelKind::IC, g, 3, 0.5);
    EXPECT_GE(m.edge_value(0), 0.0);
    EXPECT_LE(m.edge_value(0), 1.0);
}

TEST(MakeModel, IcDrawsWithinTwiceCalibration)
{
    const auto g = testutil::random_digraph(40, 0.2, 2);
    const auto m = make_model(ModelKind::IC, g, 5, 0.1);
    for (double p : m.edge_values()) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 0.2);
    }
}

TEST(MakeModel, PicCalibratesMeanProbability)
{
    const auto g = synthetic_with_edges(1000);
    ASSERT_GE(g.edge_count(), 900u);
    const auto m = make_model(ModelKind::PIC, g, 11, 0.05);
    const double mu = mean(m.edge_values());
    EXPECT_GE(mu, 0.049);
    EXPECT_LE(mu, 0.051);
    EXPECT_NEAR(m.pic()->a, 1.0, 0.0);
    for (double p : m.edge_values()) {
        EXPECT_GT(p, 0.0);
        EXPECT_LT(p, 1.0);
    }
}

TEST(MakeModel, CalibrationOutOfRange)
{
    const auto g = graph(2, {{0, 1}});
    EXPECT_THROW(make_model(ModelKind::IC, g, 1, 0.0), ParameterError);
    EXPECT_THROW(make_model(ModelKind::PIC, g, 1, 1.0), ParameterError);
    EXPECT_THROW(make_model(ModelKind::LT, g, 1, -0.2), ParameterError);
}

TEST(MakeModel, LtNormalizesIncomingWeights)
{
    const auto star = graph(5, {{1, 0}, {2, 0}, {3, 0}, {4, 0}});
    std::vector<double> w(4, 0.5);
    normalize_incoming(star, w);
    for (double x : w) {
        EXPECT_DOUBLE_EQ(x, 0.25);
    }
    std::vector<double> small{0.1, 0.2, 0.3, 0.1};
    normalize_incoming(star, small);
    EXPECT_DOUBLE_EQ(small[2], 0.3);
}

TEST(MakeModel, ThresholdModelsKeepIncomingSumsAtMostOne)
{
    for (Seed s = 1; s <= 5; ++s) {
        const auto g = testutil::random_digraph(40, 0.3, s, 3);
        for (ModelKind kind : {ModelKind::LT, ModelKind::PLT}) {
            const auto m = make_model(kind, g, s, 0.4);
            for (NodeId v = 0; v < g.node_count(); ++v) {
                double sum = 0.0;
                for (EdgeId e : g.in_edges(v)) {
                    sum += m.edge_value(e);
                }
                EXPECT_LE(sum, 1.0 + 1e-12);
            }
        }
    }
}

TEST(EdgeProbability, PicZeroWeightsGiveSigmoidOfOffset)
{
    const auto g = testutil::random_digraph(10, 0.3, 3);
    PICParams params;
    params.W = Eigen::MatrixXd::Zero(4, 4);
    params.v = Eigen::VectorXd::Ones(4);
    params.b = 0.7;
    std::vector<double> values(g.edge_count(), sigmoid(0.7));
    DiffusionModel m(ModelKind::PIC, values, params);
    for (const Edge& e : g.edges()) {
        EXPECT_DOUBLE_EQ(edge_probability(m, g, e.src, e.dst), sigmoid(0.7));
    }
}

TEST(EdgeProbability, PicZeroScaleIgnoresFeatures)
{
    const auto g = testutil::random_digraph(10, 0.3, 4);
    PICParams params;
    params.W = Eigen::MatrixXd::Random(3, 4);
    params.v = Eigen::VectorXd::Ones(3);
    params.a = 0.0;
    params.b = -1.25;
    DiffusionModel m(ModelKind::PIC, std::vector<double>(g.edge_count(), sigmoid(-1.25)), params);
    for (const Edge& e : g.edges()) {
        EXPECT_DOUBLE_EQ(edge_probability(m, g, e.src, e.dst), sigmoid(-1.25));
    }
}

TEST(EdgeProbability, PicHandEvaluatedExample)
{
    // d = 1, F = 1, W = [[1, 1]], v = [1], a = 1, b = 0, x_u = x_v = 0: tanh(0) = 0, p = 0.5.
    AttributedGraph g(2, {{0, 1}}, Eigen::MatrixXd::Zero(2, 1));
    PICParams params;
    params.W = Eigen::MatrixXd::Ones(1, 2);
    params.v = Eigen::VectorXd::Ones(1);
    DiffusionModel m(ModelKind::PIC, {0.5}, params);
    EXPECT_DOUBLE_EQ(edge_probability(m, g, 0, 1), 0.5);
}

TEST(EdgeProbability, TableLookupAndNonEdge)
{
    const auto g = graph(3, {{0, 1}, {1, 2}});
    DiffusionModel m(ModelKind::IC, {0.3, 0.6});
    EXPECT_DOUBLE_EQ(edge_probability(m, g, 1, 2), 0.6);
    EXPECT_THROW(edge_probability(m, g, 2, 1), ValidationError);
}

TEST(EdgeProbability, IdenticalFeaturePairsShareProbability)
{
    Eigen::MatrixXd x(4, 2);
    x << 1, 2, 3, 4, 1, 2, 3, 4;
    AttributedGraph g(4, {{0, 1}, {2, 3}, {0, 3}, {2, 1}}, x);
    const auto m = make_model(ModelKind::PIC, g, 17, 0.3);
    EXPECT_DOUBLE_EQ(m.edge_value(0), m.edge_value(1));
    EXPECT_DOUBLE_EQ(m.edge_value(0), m.edge_value(2));
    EXPECT_DOUBLE_EQ(m.edge_value(0), m.edge_value(3));
}

TEST(EdgeProbability, PltStoresNormalizedPicValues)
{
    const auto g = testutil::random_digraph(20, 0.4, 6, 3);
    const auto pic = make_model(ModelKind::PIC, g, 8, 0.6);
    const auto plt = make_model(ModelKind::PLT, g, 8, 0.6);
    std::vector<double> expected = pic.edge_values();
    normalize_incoming(g, expected);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        EXPECT_DOUBLE_EQ(plt.edge_value(e), expected[e]);
        EXPECT_DOUBLE_EQ(edge_probability(plt, g, g.edge(e).src, g.edge(e).dst), expected[e]);
    }
}

TEST(DiffusionModel, RejectsInvalidValues)
{
    EXPECT_THROW(DiffusionModel(ModelKind::IC, {1.5}), ParameterError);
    EXPECT_THROW(DiffusionModel(ModelKind::PIC, {0.5}), ParameterError);
}

TEST(DiffusionModel, JsonRoundTripIsBitExact)
{
    const auto g = testutil::random_digraph(25, 0.2, 7, 3);
    const auto dir = std::filesystem::temp_directory_path() / "dscom_model";
    std::filesystem::create_directories(dir);
    for (ModelKind kind : {ModelKind::IC, ModelKind::LT, ModelKind::PIC, ModelKind::PLT}) {
        const auto m = make_model(kind, g, 21, 0.15);
        const auto path = (dir / (std::string(to_string(kind)) + ".json")).string();
        save_model(m, path);
        const auto back = load_model(path);
        EXPECT_TRUE(back == m) << to_string(kind);
        EXPECT_EQ(back.edge_values(), m.edge_values());
    }
}
