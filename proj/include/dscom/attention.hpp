#ifndef DSCOM_ATTENTION_HPP
#define DSCOM_ATTENTION_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dscom/error.hpp"
#include "dscom/graph.hpp"
#include "dscom/rng.hpp"

namespace dscom {

/// One attention head: logits e_ij = LeakyReLU(a_dst . W h_i + a_src . W h_j).
/// The attention vector of the usual [W h_i || W h_j] form is the concatenation (a_dst, a_src).
struct AttentionHead {
    Eigen::MatrixXd W; ///< out x in
    Eigen::VectorXd a_dst;
    Eigen::VectorXd a_src;
};

struct AttentionLayer {
    std::vector<AttentionHead> heads;
    /// Hidden layers concatenate heads and apply ELU; the output layer averages heads.
    bool concat = true;

    std::size_t in_dim() const { return static_cast<std::size_t>(heads.front().W.cols()); }
    std::size_t head_dim() const { return static_cast<std::size_t>(heads.front().W.rows()); }
    std::size_t out_dim() const { return concat ? heads.size() * head_dim() : head_dim(); }
};

struct GatArchitecture {
    std::size_t layers = 2;
    std::size_t hidden_heads = 4;
    std::size_t hidden_dim = 8;
    std::size_t output_heads = 1;
    std::size_t output_dim = 8;
    double leaky_slope = 0.2;
};

/// Multi-head graph attention network. Also used as the container for its own gradient.
class AttentionModel {
public:
    std::vector<AttentionLayer> layers;
    double leaky_slope = 0.2;

    std::size_t input_dim() const { return layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.back().out_dim(); }

    /// Same shapes, every parameter zero.
    AttentionModel zeros_like() const
    {
        AttentionModel z = *this;
        z.for_each_parameter([](double& p) { p = 0.0; });
        return z;
    }

    template <typename Fn>
    void for_each_parameter(Fn&& fn)
    {
        for (auto& layer : layers) {
            for (auto& h : layer.heads) {
                for (Eigen::Index i = 0; i < h.W.size(); ++i) {
                    fn(h.W.data()[i]);
                }
                for (Eigen::Index i = 0; i < h.a_dst.size(); ++i) {
                    fn(h.a_dst[i]);
                }
                for (Eigen::Index i = 0; i < h.a_src.size(); ++i) {
                    fn(h.a_src[i]);
                }
            }
        }
    }

    std::vector<double> flatten() const
    {
        std::vector<double> out;
        const_cast<AttentionModel*>(this)->for_each_parameter([&](double& p) { out.push_back(p); });
        return out;
    }

    void assign(const std::vector<double>& values)
    {
        std::size_t i = 0;
        for_each_parameter([&](double& p) {
            if (i >= values.size()) {
                throw DimensionError("parameter vector too short");
            }
            p = values[i++];
        });
        if (i != values.size()) {
            throw DimensionError("parameter vector too long");
        }
    }

    std::size_t parameter_count() const { return flatten().size(); }

    bool all_finite() const
    {
        bool ok = true;
        const_cast<AttentionModel*>(this)->for_each_parameter([&](double& p) { ok = ok && std::isfinite(p); });
        return ok;
    }

    friend bool operator==(const AttentionModel& a, const AttentionModel& b)
    {
        return a.leaky_slope == b.leaky_slope && a.layers.size() == b.layers.size() && a.flatten() == b.flatten();
    }
};

/// Glorot-uniform initialisation.
inline AttentionModel init_attention_model(const GatArchitecture& arch, std::size_t input_dim, Seed seed)
{
    if (arch.layers < 1 || arch.hidden_heads < 1 || arch.output_heads < 1 || arch.hidden_dim < 1
        || arch.output_dim < 1 || input_dim < 1) {
        throw ParameterError("attention architecture dimensions must be positive");
    }
    Rng rng(seed);
    AttentionModel model;
    model.leaky_slope = arch.leaky_slope;
    std::size_t in = input_dim;
    for (std::size_t l = 0; l < arch.layers; ++l) {
        const bool last = l + 1 == arch.layers;
        AttentionLayer layer;
        layer.concat = !last;
        const std::size_t heads = last ? arch.output_heads : arch.hidden_heads;
        const std::size_t out = last ? arch.output_dim : arch.hidden_dim;
        const double wl = std::sqrt(6.0 / static_cast<double>(in + out));
        const double al = std::sqrt(6.0 / static_cast<double>(2 * out + 1));
        for (std::size_t h = 0; h < heads; ++h) {
            AttentionHead head;
            head.W.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
            for (Eigen::Index i = 0; i < head.W.size(); ++i) {
                head.W.data()[i] = rng.uniform(-wl, wl);
            }
            head.a_dst.resize(static_cast<Eigen::Index>(out));
            head.a_src.resize(static_cast<Eigen::Index>(out));
            for (Eigen::Index i = 0; i < head.a_dst.size(); ++i) {
                head.a_dst[i] = rng.uniform(-al, al);
            }
            for (Eigen::Index i = 0; i < head.a_src.size(); ++i) {
                head.a_src[i] = rng.uniform(-al, al);
            }
            layer.heads.push_back(std::move(head));
        }
        in = layer.out_dim();
        model.layers.push_back(std::move(layer));
    }
    return model;
}

/// For every target i the attention candidates are its in-neighbours (ascending) followed by
/// i itself. Slot k of target i lives at offsets[i] + k.
struct AttentionNeighborhood {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> sources;
    /// Graph edge id of each slot; npos for the self slot.
    std::vector<EdgeId> edge_ids;

    static constexpr EdgeId npos = std::numeric_limits<EdgeId>::max();

    explicit AttentionNeighborhood(const AttributedGraph& g)
    {
        const std::size_t n = g.node_count();
        offsets.reserve(n + 1);
        offsets.push_back(0);
        sources.reserve(g.edge_count() + n);
        edge_ids.reserve(g.edge_count() + n);
        for (NodeId i = 0; i < n; ++i) {
            auto nbrs = g.in_neighbors(i);
            auto eids = g.in_edges(i);
            sources.insert(sources.end(), nbrs.begin(), nbrs.end());
            edge_ids.insert(edge_ids.end(), eids.begin(), eids.end());
            sources.push_back(i);
            edge_ids.push_back(npos);
            offsets.push_back(sources.size());
        }
    }

    std::size_t node_count() const { return offsets.size() - 1; }
    std::size_t slot_count() const { return sources.size(); }
};

/// Everything the backward pass needs from a forward evaluation.
struct AttentionForward {
    struct HeadCache {
        Eigen::MatrixXd projected; ///< n x out, rows W h_j
        std::vector<double> logits_pre; ///< per slot, before LeakyReLU
        std::vector<double> alpha; ///< per slot, softmax-normalised
    };
    struct LayerCache {
        Eigen::MatrixXd input; ///< n x in
        Eigen::MatrixXd pre_activation; ///< n x out (concatenated or averaged heads)
        std::vector<HeadCache> heads;
    };
    std::vector<LayerCache> layers;
    Eigen::MatrixXd embeddings; ///< final n x D

    /// Attention coefficients of slot k at (layer, head).
    const std::vector<double>& alpha(std::size_t layer, std::size_t head) const { return layers[layer].heads[head].alpha; }
};

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

inline AttentionForward gat_forward(const AttentionModel& model, const AttentionNeighborhood& nb, const Eigen::MatrixXd& X)
{
    if (model.layers.empty()) {
        throw ParameterError("attention model has no layers");
    }
    if (static_cast<std::size_t>(X.cols()) != model.input_dim()) {
        throw DimensionError("feature dimension " + std::to_string(X.cols()) + " does not match model input "
                             + std::to_string(model.input_dim()));
    }
    if (static_cast<std::size_t>(X.rows()) != nb.node_count()) {
        throw DimensionError("feature rows do not match graph size");
    }
    const auto n = static_cast<Eigen::Index>(nb.node_count());
    AttentionForward fw;
    Eigen::MatrixXd h = X;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const AttentionLayer& layer = model.layers[l];
        const bool last = l + 1 == model.layers.size();
        AttentionForward::LayerCache cache;
        cache.input = h;
        const auto hd = static_cast<Eigen::Index>(layer.head_dim());
        cache.pre_activation = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(layer.out_dim()));
        for (std::size_t hi = 0; hi < layer.heads.size(); ++hi) {
            const AttentionHead& head = layer.heads[hi];
            AttentionForward::HeadCache hc;
            hc.projected = h * head.W.transpose();
            const Eigen::VectorXd fd = hc.projected * head.a_dst;
            const Eigen::VectorXd fs = hc.projected * head.a_src;
            hc.logits_pre.resize(nb.slot_count());
            hc.alpha.resize(nb.slot_count());
            Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, hd);
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t b = nb.offsets[static_cast<std::size_t>(i)];
                const std::size_t e = nb.offsets[static_cast<std::size_t>(i) + 1];
                double top = -std::numeric_limits<double>::infinity();
                for (std::size_t k = b; k < e; ++k) {
                    const double s = fd[i] + fs[static_cast<Eigen::Index>(nb.sources[k])];
                    hc.logits_pre[k] = s;
                    const double logit = s > 0.0 ? s : model.leaky_slope * s;
                    hc.alpha[k] = logit;
                    top = std::max(top, logit);
                }
                double z = 0.0;
                for (std::size_t k = b; k < e; ++k) {
                    hc.alpha[k] = std::exp(hc.alpha[k] - top);
                    z += hc.alpha[k];
                }
                for (std::size_t k = b; k < e; ++k) {
                    hc.alpha[k] /= z;
                    out.row(i) += hc.alpha[k] * hc.projected.row(static_cast<Eigen::Index>(nb.sources[k]));
                }
            }
            if (layer.concat) {
                cache.pre_activation.middleCols(static_cast<Eigen::Index>(hi) * hd, hd) = out;
            } else {
                cache.pre_activation += out / static_cast<double>(layer.heads.size());
            }
            cache.heads.push_back(std::move(hc));
        }
        if (last) {
            h = cache.pre_activation;
        } else {
            h = cache.pre_activation.unaryExpr([](double x) { return elu(x); });
        }
        fw.layers.push_back(std::move(cache));
    }
    fw.embeddings = std::move(h);
    return fw;
}

inline AttentionForward gat_forward(const AttentionModel& model, const AttributedGraph& g)
{
    return gat_forward(model, AttentionNeighborhood(g), g.features());
}

/// Backpropagates dL/dZ through a cached forward pass; returns dL/d(parameters).
inline AttentionModel gat_backward(const AttentionModel& model, const AttentionNeighborhood& nb,
                                   const AttentionForward& fw, const Eigen::MatrixXd& grad_embeddings)
{
    AttentionModel grad = model.zeros_like();
    const auto n = static_cast<Eigen::Index>(nb.node_count());
    Eigen::MatrixXd grad_out = grad_embeddings;
    for (std::size_t l = model.layers.size(); l-- > 0;) {
        const AttentionLayer& layer = model.layers[l];
        const auto& cache = fw.layers[l];
        const bool last = l + 1 == model.layers.size();
        Eigen::MatrixXd grad_pre = grad_out;
        if (!last) {
            grad_pre = grad_out.cwiseProduct(cache.pre_activation.unaryExpr([](double x) { return elu_grad(x); }));
        }
        const auto hd = static_cast<Eigen::Index>(layer.head_dim());
        Eigen::MatrixXd grad_in = Eigen::MatrixXd::Zero(cache.input.rows(), cache.input.cols());
        for (std::size_t hi = 0; hi < layer.heads.size(); ++hi) {
            const AttentionHead& head = layer.heads[hi];
            const auto& hc = cache.heads[hi];
            Eigen::MatrixXd d_head = layer.concat
                ? Eigen::MatrixXd(grad_pre.middleCols(static_cast<Eigen::Index>(hi) * hd, hd))
                : Eigen::MatrixXd(grad_pre / static_cast<double>(layer.heads.size()));
            Eigen::MatrixXd d_proj = Eigen::MatrixXd::Zero(n, hd);
            Eigen::VectorXd d_fd = Eigen::VectorXd::Zero(n);
            Eigen::VectorXd d_fs = Eigen::VectorXd::Zero(n);
            std::vector<double> d_alpha;
            for (Eigen::Index i = 0; i < n; ++i) {
                const std::size_t b = nb.offsets[static_cast<std::size_t>(i)];
                const std::size_t e = nb.offsets[static_cast<std::size_t>(i) + 1];
                d_alpha.assign(e - b, 0.0);
                double weighted = 0.0;
                for (std::size_t k = b; k < e; ++k) {
                    const auto j = static_cast<Eigen::Index>(nb.sources[k]);
                    d_alpha[k - b] = d_head.row(i).dot(hc.projected.row(j));
                    d_proj.row(j) += hc.alpha[k] * d_head.row(i);
                    weighted += hc.alpha[k] * d_alpha[k - b];
                }
                for (std::size_t k = b; k < e; ++k) {
                    const double d_logit = hc.alpha[k] * (d_alpha[k - b] - weighted);
                    const double d_s = hc.logits_pre[k] > 0.0 ? d_logit : model.leaky_slope * d_logit;
                    d_fd[i] += d_s;
                    d_fs[static_cast<Eigen::Index>(nb.sources[k])] += d_s;
                }
            }
            AttentionHead& gh = grad.layers[l].heads[hi];
            gh.a_dst = hc.projected.transpose() * d_fd;
            gh.a_src = hc.projected.transpose() * d_fs;
            d_proj += d_fd * head.a_dst.transpose() + d_fs * head.a_src.transpose();
            gh.W = d_proj.transpose() * cache.input;
            grad_in += d_proj * head.W;
        }
        grad_out = std::move(grad_in);
    }
    return grad;
}

// ---------------------------------------------------------------------------------------------
// Checkpoints

inline nlohmann::json attention_model_to_json(const AttentionModel& m)
{
    auto matrix = [](const Eigen::MatrixXd& w) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(w.cols()));
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                row[static_cast<std::size_t>(j)] = w(i, j);
            }
            rows.push_back(std::move(row));
        }
        return rows;
    };
    nlohmann::json j;
    j["leaky_slope"] = m.leaky_slope;
    j["layers"] = nlohmann::json::array();
    for (const auto& layer : m.layers) {
        nlohmann::json lj;
        lj["combine"] = layer.concat ? "concat" : "average";
        lj["heads"] = nlohmann::json::array();
        for (const auto& h : layer.heads) {
            std::vector<double> a(h.a_dst.data(), h.a_dst.data() + h.a_dst.size());
            a.insert(a.end(), h.a_src.data(), h.a_src.data() + h.a_src.size());
            lj["heads"].push_back({{"W", matrix(h.W)}, {"a", a}});
        }
        j["layers"].push_back(std::move(lj));
    }
    return j;
}

inline AttentionModel attention_model_from_json(const nlohmann::json& j)
{
    try {
        AttentionModel m;
        m.leaky_slope = j.at("leaky_slope").get<double>();
        for (const auto& lj : j.at("layers")) {
            AttentionLayer layer;
            layer.concat = lj.at("combine").get<std::string>() == "concat";
            for (const auto& hj : lj.at("heads")) {
                AttentionHead h;
                const auto& W = hj.at("W");
                const auto rows = static_cast<Eigen::Index>(W.size());
                const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(W.at(0).size());
                h.W.resize(rows, cols);
                for (Eigen::Index r = 0; r < rows; ++r) {
                    for (Eigen::Index c = 0; c < cols; ++c) {
                        h.W(r, c) = W.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
                    }
                }
                auto a = hj.at("a").get<std::vector<double>>();
                if (static_cast<Eigen::Index>(a.size()) != 2 * rows) {
                    throw ParseError("attention vector length must be twice the head width");
                }
                h.a_dst = Eigen::Map<Eigen::VectorXd>(a.data(), rows);
                h.a_src = Eigen::Map<Eigen::VectorXd>(a.data() + rows, rows);
                layer.heads.push_back(std::move(h));
            }
            if (layer.heads.empty()) {
                throw ParseError("attention layer without heads");
            }
            m.layers.push_back(std::move(layer));
        }
        if (m.layers.empty()) {
            throw ParseError("checkpoint has no layers");
        }
        for (std::size_t l = 1; l < m.layers.size(); ++l) {
            if (m.layers[l].in_dim() != m.layers[l - 1].out_dim()) {
                throw DimensionError("checkpoint layer dimensions do not chain");
            }
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
}

} // namespace dscom

#endif
