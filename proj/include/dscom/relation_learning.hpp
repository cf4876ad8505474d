#ifndef DSCOM_RELATION_LEARNING_HPP
#define DSCOM_RELATION_LEARNING_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dscom/attention.hpp"
#include "dscom/diffusion_model.hpp"
#include "dscom/graph.hpp"
#include "dscom/rng.hpp"

namespace dscom {

// ---------------------------------------------------------------------------------------------
// Diffusion chains

struct ChainCorpus {
    std::vector<std::vector<NodeId>> chains;
    std::size_t window = 2;
};

/// Weighted walker over the multigraph of observed pairs: from u, the next node is v with
/// probability multiplicity(u,v) / sum_w multiplicity(u,w).
class PairWalker {
public:
    explicit PairWalker(const DiffusionDataset& ds)
    {
        for (const auto& [pair, count] : ds.multiplicities()) {
            auto& row = out_[pair.first];
            row.targets.push_back(pair.second);
            row.cumulative.push_back((row.cumulative.empty() ? 0.0 : row.cumulative.back()) + static_cast<double>(count));
        }
    }

    bool has_successor(NodeId u) const { return out_.count(u) != 0; }

    NodeId step(NodeId u, Rng& rng) const
    {
        const auto& row = out_.at(u);
        const double r = rng.uniform() * row.cumulative.back();
        auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), r);
        const auto idx = std::min(static_cast<std::size_t>(it - row.cumulative.begin()), row.targets.size() - 1);
        return row.targets[idx];
    }

    /// Extends `chain` from its last node until it holds `max_len` nodes or reaches a sink.
    void extend(std::vector<NodeId>& chain, std::size_t max_len, Rng& rng) const
    {
        while (chain.size() < max_len && has_successor(chain.back())) {
            chain.push_back(step(chain.back(), rng));
        }
    }

private:
    struct Row {
        std::vector<NodeId> targets;
        std::vector<double> cumulative;
    };
    std::map<NodeId, Row> out_;
};

/// For every observed pair (u, v), emits `walks_per_pair` chains that start [u, v] and then
/// continue as weighted walks over the observed pairs, up to `max_len` nodes.
inline ChainCorpus build_chains(const DiffusionDataset& ds, std::size_t walks_per_pair, std::size_t max_len, Seed seed,
                                std::size_t window = 2)
{
    if (ds.empty()) {
        throw ValidationError("cannot build diffusion chains from an empty dataset");
    }
    ChainCorpus corpus;
    corpus.window = std::max<std::size_t>(1, window);
    const PairWalker walker(ds);
    Rng rng(seed);
    const std::size_t len = std::max<std::size_t>(2, max_len);
    for (const auto& p : ds.pairs()) {
        for (std::size_t w = 0; w < std::max<std::size_t>(1, walks_per_pair); ++w) {
            std::vector<NodeId> chain{p.src, p.dst};
            walker.extend(chain, len, rng);
            corpus.chains.push_back(std::move(chain));
        }
    }
    return corpus;
}

/// Symmetric skip-gram context pairs: (chain[i], chain[j]) for 0 < |i - j| <= window,
/// skipping pairs of identical nodes.
inline std::vector<Edge> window_pairs(const ChainCorpus& corpus)
{
    std::vector<Edge> out;
    for (const auto& chain : corpus.chains) {
        for (std::size_t i = 0; i < chain.size(); ++i) {
            const std::size_t lo = i >= corpus.window ? i - corpus.window : 0;
            const std::size_t hi = std::min(chain.size() - 1, i + corpus.window);
            for (std::size_t j = lo; j <= hi; ++j) {
                if (j != i && chain[i] != chain[j]) {
                    out.push_back({chain[i], chain[j]});
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Skip-gram with negative sampling

struct SkipGramResult {
    double loss = 0.0;
    Eigen::MatrixXd grad; ///< dLoss/dZ, same shape as Z
};

inline double softplus(double x)
{
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// K negatives per positive, uniform over [0, n) but never the positive's context node.
inline std::vector<NodeId> sample_negatives(std::size_t n, const std::vector<Edge>& positives, std::size_t k, Rng& rng)
{
    std::vector<NodeId> out;
    out.reserve(positives.size() * k);
    for (const Edge& p : positives) {
        for (std::size_t i = 0; i < k; ++i) {
            NodeId w = rng.index(n);
            while (n > 1 && w == p.dst) {
                w = rng.index(n);
            }
            out.push_back(w);
        }
    }
    return out;
}

/// Minimisation form of the negative-sampling objective, summed over positives:
///   sum_(u,v) [ -log sigmoid(z_u . z_v) - sum_i log sigmoid(-z_u . z_wi) ]
/// `negatives` holds K consecutive entries per positive.
inline SkipGramResult skipgram_loss(const Eigen::MatrixXd& Z, const std::vector<Edge>& positives,
                                    const std::vector<NodeId>& negatives, std::size_t k)
{
    if (negatives.size() != positives.size() * k) {
        throw DimensionError("negative sample count must be K per positive");
    }
    SkipGramResult r;
    r.grad = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
    for (std::size_t p = 0; p < positives.size(); ++p) {
        const auto u = static_cast<Eigen::Index>(positives[p].src);
        const auto v = static_cast<Eigen::Index>(positives[p].dst);
        const double s = Z.row(u).dot(Z.row(v));
        r.loss += softplus(-s);
        const double gs = -sigmoid(-s);
        Eigen::RowVectorXd grad_u = gs * Z.row(v);
        r.grad.row(v) += gs * Z.row(u);
        for (std::size_t i = 0; i < k; ++i) {
            const auto w = static_cast<Eigen::Index>(negatives[p * k + i]);
            const double t = Z.row(u).dot(Z.row(w));
            r.loss += softplus(t);
            const double gt = sigmoid(t);
            grad_u += gt * Z.row(w);
            r.grad.row(w) += gt * Z.row(u);
        }
        r.grad.row(u) += grad_u;
    }
    return r;
}

inline SkipGramResult skipgram_objective(const Eigen::MatrixXd& Z, const std::vector<Edge>& positives, std::size_t k,
                                         Seed seed)
{
    if (k < 1) {
        throw ParameterError("need at least one negative per positive");
    }
    Rng rng(seed);
    const auto negatives = sample_negatives(static_cast<std::size_t>(Z.rows()), positives, k, rng);
    return skipgram_loss(Z, positives, negatives, k);
}

// ---------------------------------------------------------------------------------------------
// Training

struct TrainConfig {
    GatArchitecture architecture;
    std::size_t epochs = 100;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::size_t negatives = 5;
    std::size_t window = 2;
    std::size_t batch_size = 256;
    std::size_t walks_per_pair = 1;
    std::size_t max_chain_length = 6;
    /// Batch gradients with a larger L2 norm are rescaled to this norm; 0 disables clipping.
    double max_grad_norm = 5.0;
    Seed seed = 7;

    void validate() const
    {
        if (negatives < 1) {
            throw ParameterError("negatives per positive must be >= 1");
        }
        if (window < 1) {
            throw ParameterError("window must be >= 1");
        }
        if (batch_size < 1) {
            throw ParameterError("batch size must be >= 1");
        }
        if (!(max_grad_norm >= 0.0)) {
            throw ParameterError("gradient norm bound must be >= 0");
        }
        if (!(learning_rate > 0.0) || momentum < 0.0 || momentum >= 1.0) {
            throw ParameterError("learning rate must be positive and momentum in [0,1)");
        }
    }
};

struct TrainResult {
    AttentionModel model;
    /// Mean per-positive loss of every epoch.
    std::vector<double> loss_history;
    std::size_t positives = 0;
    std::size_t chains = 0;
};

/// Gradient of the skip-gram loss with respect to every attention parameter, for a fixed set
/// of positives and negatives. Returns the summed loss.
inline double attention_loss_and_gradient(const AttentionModel& model, const AttentionNeighborhood& nb,
                                          const Eigen::MatrixXd& X, const std::vector<Edge>& positives,
                                          const std::vector<NodeId>& negatives, std::size_t k, double scale,
                                          AttentionModel* grad)
{
    const AttentionForward fw = gat_forward(model, nb, X);
    SkipGramResult sg = skipgram_loss(fw.embeddings, positives, negatives, k);
    if (grad) {
        *grad = gat_backward(model, nb, fw, sg.grad * scale);
    }
    return sg.loss * scale;
}

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Trains the attention network on skip-gram context pairs drawn from diffusion chains,
/// by mini-batch gradient descent with momentum.
inline TrainResult train_relation_model(const AttributedGraph& g, const DiffusionDataset& ds, const TrainConfig& cfg,
                                        const EpochCallback& on_epoch = {})
{
    cfg.validate();
    ds.validate(g);
    TrainResult result;
    result.model = init_attention_model(cfg.architecture, g.feature_dim(), derive_seed(cfg.seed, "init"));
    if (cfg.epochs == 0) {
        return result;
    }
    const ChainCorpus corpus =
        build_chains(ds, cfg.walks_per_pair, cfg.max_chain_length, derive_seed(cfg.seed, "chains"), cfg.window);
    std::vector<Edge> positives = window_pairs(corpus);
    result.chains = corpus.chains.size();
    result.positives = positives.size();
    if (positives.empty()) {
        throw ValidationError("diffusion chains produced no context pairs");
    }

    const AttentionNeighborhood nb(g);
    Rng rng(derive_seed(cfg.seed, "batches"));
    std::vector<double> params = result.model.flatten();
    std::vector<double> velocity(params.size(), 0.0);
    AttentionModel grad;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = positives.size(); i > 1; --i) {
            std::swap(positives[i - 1], positives[rng.index(i)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(positives.size(), start + cfg.batch_size);
            const std::vector<Edge> batch(positives.begin() + static_cast<std::ptrdiff_t>(start),
                                          positives.begin() + static_cast<std::ptrdiff_t>(end));
            const auto negatives = sample_negatives(g.node_count(), batch, cfg.negatives, rng);
            const double scale = 1.0 / static_cast<double>(batch.size());
            const double loss =
                attention_loss_and_gradient(result.model, nb, g.features(), batch, negatives, cfg.negatives, scale, &grad);
            if (!std::isfinite(loss)) {
                throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch starting at "
                                   + std::to_string(start) + ": loss is " + detail::format_real(loss));
            }
            epoch_loss += loss * static_cast<double>(batch.size());
            const std::vector<double> g_flat = grad.flatten();
            double clip = 1.0;
            if (cfg.max_grad_norm > 0.0) {
                double sq = 0.0;
                for (double x : g_flat) {
                    sq += x * x;
                }
                const double norm = std::sqrt(sq);
                if (norm > cfg.max_grad_norm) {
                    clip = cfg.max_grad_norm / norm;
                }
            }
            for (std::size_t p = 0; p < params.size(); ++p) {
                velocity[p] = cfg.momentum * velocity[p] - cfg.learning_rate * clip * g_flat[p];
                params[p] += velocity[p];
            }
            result.model.assign(params);
        }
        const double mean = epoch_loss / static_cast<double>(positives.size());
        result.loss_history.push_back(mean);
        if (on_epoch) {
            on_epoch(epoch, mean);
        }
    }
    if (!result.model.all_finite()) {
        throw NumericError("training produced non-finite parameters");
    }
    return result;
}

// ---------------------------------------------------------------------------------------------
// Attention extraction

/// Edge weights aligned with the graph's edge ids, plus the self-attention mass per node.
struct WeightedGraph {
    std::vector<double> weights;
    std::vector<double> self_mass;

    static WeightedGraph uniform(const AttributedGraph& g, double w = 1.0)
    {
        return {std::vector<double>(g.edge_count(), w), std::vector<double>(g.node_count(), 0.0)};
    }
};

/// alpha(u -> v) = mean over output-layer heads of the coefficient target v assigns source u.
inline WeightedGraph extract_edge_weights(const AttentionModel& model, const AttributedGraph& g)
{
    const AttentionNeighborhood nb(g);
    const AttentionForward fw = gat_forward(model, nb, g.features());
    const std::size_t last = model.layers.size() - 1;
    const double heads = static_cast<double>(model.layers[last].heads.size());
    WeightedGraph wg;
    wg.weights.assign(g.edge_count(), 0.0);
    wg.self_mass.assign(g.node_count(), 0.0);
    for (std::size_t h = 0; h < model.layers[last].heads.size(); ++h) {
        const auto& alpha = fw.alpha(last, h);
        for (std::size_t k = 0; k < nb.slot_count(); ++k) {
            if (nb.edge_ids[k] == AttentionNeighborhood::npos) {
                wg.self_mass[nb.sources[k]] += alpha[k] / heads;
            } else {
                wg.weights[nb.edge_ids[k]] += alpha[k] / heads;
            }
        }
    }
    return wg;
}

/// "src dst weight" lines, weight with 9 significant digits.
inline void write_weighted_graph(std::ostream& out, const AttributedGraph& g, const WeightedGraph& wg)
{
    std::ostringstream line;
    line << std::setprecision(9);
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        line.str({});
        line << g.edge(e).src << ' ' << g.edge(e).dst << ' ' << wg.weights[e] << '\n';
        out << line.str();
    }
}

inline WeightedGraph parse_weighted_graph(std::istream& in, const AttributedGraph& g)
{
    WeightedGraph wg = WeightedGraph::uniform(g, 0.0);
    std::vector<bool> seen(g.edge_count(), false);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto t = detail::split_ws(line);
        if (t.size() != 3) {
            throw ParseError("expected 'src dst weight'", line_no);
        }
        auto u = detail::parse_index(t[0]);
        auto v = detail::parse_index(t[1]);
        auto w = detail::parse_real(t[2]);
        if (!u || !v || !w) {
            throw ParseError("bad weighted edge '" + std::string(line) + "'", line_no);
        }
        auto e = g.find_edge(*u, *v);
        if (!e) {
            throw ValidationError("line " + std::to_string(line_no) + ": (" + std::to_string(*u) + ","
                                  + std::to_string(*v) + ") is not an edge");
        }
        if (*w < 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": negative weight");
        }
        wg.weights[*e] = *w;
        seen[*e] = true;
    }
    return wg;
}

inline void save_checkpoint(const AttentionModel& m, const std::string& path)
{
    auto out = detail::open_output(path);
    out << attention_model_to_json(m).dump(1) << '\n';
}

inline AttentionModel load_checkpoint(const std::string& path)
{
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return attention_model_from_json(j);
}

} // namespace dscom

#endif
