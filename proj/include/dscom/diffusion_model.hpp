#ifndef DSCOM_DIFFUSION_MODEL_HPP
#define DSCOM_DIFFUSION_MODEL_HPP

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dscom/graph.hpp"
#include "dscom/rng.hpp"

namespace dscom {

enum class ModelKind { IC, LT, PIC, PLT };

inline std::string_view to_string(ModelKind kind)
{
    switch (kind) {
    case ModelKind::IC: return "IC";
    case ModelKind::LT: return "LT";
    case ModelKind::PIC: return "PIC";
    case ModelKind::PLT: return "PLT";
    }
    return "?";
}

inline ModelKind parse_model_kind(std::string_view s)
{
    std::string up(s);
    for (char& c : up) {
        c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    if (up == "IC") return ModelKind::IC;
    if (up == "LT") return ModelKind::LT;
    if (up == "PIC") return ModelKind::PIC;
    if (up == "PLT") return ModelKind::PLT;
    throw ParameterError("unknown diffusion model kind '" + std::string(s) + "'");
}

/// True for the threshold family (LT, PLT), whose edge values are weights rather than
/// independent activation probabilities.
constexpr bool is_threshold_model(ModelKind kind) noexcept
{
    return kind == ModelKind::LT || kind == ModelKind::PLT;
}

inline double sigmoid(double x) noexcept
{
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Feature-conditioned edge probability: p(u,v) = sigmoid(a * v^T tanh(W [x_u ; x_v]) + b).
struct PICParams {
    Eigen::MatrixXd W; ///< hidden x 2F
    Eigen::VectorXd v; ///< hidden
    double a = 1.0;
    double b = 0.0;

    std::size_t hidden_dim() const noexcept { return static_cast<std::size_t>(W.rows()); }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(W.cols() / 2); }

    template <typename RowU, typename RowV>
    double score(const RowU& xu, const RowV& xv) const
    {
        const auto F = W.cols() / 2;
        Eigen::VectorXd pre = W.leftCols(F) * xu.transpose() + W.rightCols(F) * xv.transpose();
        return v.dot(pre.array().tanh().matrix());
    }

    template <typename RowU, typename RowV>
    double probability(const RowU& xu, const RowV& xv) const
    {
        return sigmoid(a * score(xu, xv) + b);
    }

    void validate() const
    {
        if (W.rows() < 1 || W.cols() < 2 || W.cols() % 2 != 0) {
            throw ParameterError("PIC weight matrix must be d x 2F with d, F >= 1");
        }
        if (v.size() != W.rows()) {
            throw ParameterError("PIC vector length must equal the hidden width");
        }
        if (!W.allFinite() || !v.allFinite() || !std::isfinite(a) || !std::isfinite(b)) {
            throw ParameterError("PIC parameters must be finite");
        }
    }
};

/// A ground-truth diffusion model over a fixed graph. Every edge value is materialised at
/// construction: activation probabilities for IC/PIC, normalised weights for LT/PLT.
class DiffusionModel {
public:
    DiffusionModel() = default;

    DiffusionModel(ModelKind kind, std::vector<double> edge_values, std::optional<PICParams> pic = std::nullopt,
                   Seed seed = 0, double calibration = 0.0)
        : kind_(kind), values_(std::move(edge_values)), pic_(std::move(pic)), seed_(seed), calibration_(calibration)
    {
        for (double p : values_) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw ParameterError("edge value " + detail::format_real(p) + " outside [0,1]");
            }
        }
        if ((kind_ == ModelKind::PIC || kind_ == ModelKind::PLT) && !pic_) {
            throw ParameterError("parameterised model requires PIC parameters");
        }
        if (pic_) {
            pic_->validate();
        }
    }

    ModelKind kind() const noexcept { return kind_; }
    bool is_threshold() const noexcept { return is_threshold_model(kind_); }
    std::size_t edge_count() const noexcept { return values_.size(); }
    double edge_value(EdgeId e) const { return values_[e]; }
    const std::vector<double>& edge_values() const noexcept { return values_; }
    const std::optional<PICParams>& pic() const noexcept { return pic_; }
    Seed seed() const noexcept { return seed_; }
    double calibration() const noexcept { return calibration_; }

    void check_graph(const AttributedGraph& g) const
    {
        if (g.edge_count() != values_.size()) {
            throw ValidationError("model has " + std::to_string(values_.size()) + " edge values but graph has "
                                  + std::to_string(g.edge_count()) + " edges");
        }
    }

    friend bool operator==(const DiffusionModel& a, const DiffusionModel& b)
    {
        if (a.kind_ != b.kind_ || a.values_ != b.values_ || a.seed_ != b.seed_ || a.calibration_ != b.calibration_
            || a.pic_.has_value() != b.pic_.has_value()) {
            return false;
        }
        if (!a.pic_) {
            return true;
        }
        return a.pic_->W == b.pic_->W && a.pic_->v == b.pic_->v && a.pic_->a == b.pic_->a && a.pic_->b == b.pic_->b;
    }

private:
    ModelKind kind_ = ModelKind::IC;
    std::vector<double> values_;
    std::optional<PICParams> pic_;
    Seed seed_ = 0;
    double calibration_ = 0.0;
};

/// Divides every incoming weight of a node by max(1, incoming sum), in place.
inline void normalize_incoming(const AttributedGraph& g, std::vector<double>& weights)
{
    for (NodeId v = 0; v < g.node_count(); ++v) {
        double sum = 0.0;
        for (EdgeId e : g.in_edges(v)) {
            sum += weights[e];
        }
        const double scale = std::max(1.0, sum);
        for (EdgeId e : g.in_edges(v)) {
            weights[e] /= scale;
        }
    }
}

/// Fits the offset so that the mean edge probability hits `target` (scale fixed at 1).
inline double calibrate_pic_offset(const std::vector<double>& scores, double target)
{
    if (scores.empty()) {
        return std::log(target / (1.0 - target));
    }
    auto mean_at = [&](double b) {
        double s = 0.0;
        for (double x : scores) {
            s += sigmoid(x + b);
        }
        return s / static_cast<double>(scores.size());
    };
    double lo = -60.0;
    double hi = 60.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mean_at(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct ModelOptions {
    std::size_t hidden_dim = 8;
};

/// Draws a random model of the requested kind.
///
/// IC: p ~ U(0, 2c) clipped to [0,1]. PIC: W, v ~ N(0,1), a = 1 and b bisected so the mean
/// probability equals c. LT/PLT: raw IC/PIC values divided per target by max(1, incoming sum).
inline DiffusionModel make_model(ModelKind kind, const AttributedGraph& g, Seed seed, double calibration,
                                 const ModelOptions& options = {})
{
    if (!(calibration > 0.0 && calibration < 1.0)) {
        throw ParameterError("calibration must lie in (0,1), got " + detail::format_real(calibration));
    }
    Rng rng(seed);
    std::vector<double> values(g.edge_count());
    std::optional<PICParams> pic;

    if (kind == ModelKind::IC || kind == ModelKind::LT) {
        for (double& p : values) {
            p = std::clamp(rng.uniform(0.0, 2.0 * calibration), 0.0, 1.0);
        }
    } else {
        if (g.feature_dim() < 1 || g.features().rows() != static_cast<Eigen::Index>(g.node_count())) {
            throw ParameterError("parameterised model requires node features");
        }
        if (options.hidden_dim < 1) {
            throw ParameterError("hidden width must be >= 1");
        }
        const auto d = static_cast<Eigen::Index>(options.hidden_dim);
        const auto F = static_cast<Eigen::Index>(g.feature_dim());
        PICParams params;
        params.W.resize(d, 2 * F);
        params.v.resize(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < 2 * F; ++j) {
                params.W(i, j) = rng.normal();
            }
        }
        for (Eigen::Index i = 0; i < d; ++i) {
            params.v(i) = rng.normal();
        }
        std::vector<double> scores(g.edge_count());
        const auto& X = g.features();
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            const Edge& ed = g.edge(e);
            scores[e] = params.score(X.row(static_cast<Eigen::Index>(ed.src)), X.row(static_cast<Eigen::Index>(ed.dst)));
        }
        params.a = 1.0;
        params.b = calibrate_pic_offset(scores, calibration);
        for (EdgeId e = 0; e < g.edge_count(); ++e) {
            values[e] = sigmoid(params.a * scores[e] + params.b);
        }
        pic = std::move(params);
    }
    if (is_threshold_model(kind)) {
        normalize_incoming(g, values);
    }
    return DiffusionModel(kind, std::move(values), std::move(pic), seed, calibration);
}

/// Activation probability (IC/PIC) or weight (LT/PLT) of edge u -> v.
inline double edge_probability(const DiffusionModel& model, const AttributedGraph& g, NodeId u, NodeId v)
{
    auto e = g.find_edge(u, v);
    if (!e) {
        throw ValidationError("(" + std::to_string(u) + "," + std::to_string(v) + ") is not an edge");
    }
    if (model.kind() == ModelKind::PIC) {
        const auto& X = g.features();
        return model.pic()->probability(X.row(static_cast<Eigen::Index>(u)), X.row(static_cast<Eigen::Index>(v)));
    }
    return model.edge_value(*e);
}

// ---------------------------------------------------------------------------------------------
// JSON

inline nlohmann::json model_to_json(const DiffusionModel& m)
{
    nlohmann::json j;
    j["kind"] = std::string(to_string(m.kind()));
    j["seed"] = m.seed();
    j["calibration"] = m.calibration();
    j["edge_values"] = m.edge_values();
    if (m.pic()) {
        const auto& p = *m.pic();
        nlohmann::json W = nlohmann::json::array();
        for (Eigen::Index i = 0; i < p.W.rows(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(p.W.cols()));
            for (Eigen::Index c = 0; c < p.W.cols(); ++c) {
                row[static_cast<std::size_t>(c)] = p.W(i, c);
            }
            W.push_back(row);
        }
        j["params"] = {{"W", W},
                       {"v", std::vector<double>(p.v.data(), p.v.data() + p.v.size())},
                       {"a", p.a},
                       {"b", p.b}};
    }
    return j;
}

inline DiffusionModel model_from_json(const nlohmann::json& j)
{
    try {
        const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
        std::optional<PICParams> pic;
        if (j.contains("params")) {
            const auto& p = j.at("params");
            PICParams params;
            const auto& W = p.at("W");
            const auto rows = static_cast<Eigen::Index>(W.size());
            const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(W.at(0).size());
            params.W.resize(rows, cols);
            for (Eigen::Index r = 0; r < rows; ++r) {
                if (static_cast<Eigen::Index>(W.at(static_cast<std::size_t>(r)).size()) != cols) {
                    throw ParseError("ragged W matrix in model file");
                }
                for (Eigen::Index c = 0; c < cols; ++c) {
                    params.W(r, c) = W.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
                }
            }
            auto vv = p.at("v").get<std::vector<double>>();
            params.v = Eigen::Map<Eigen::VectorXd>(vv.data(), static_cast<Eigen::Index>(vv.size()));
            params.a = p.at("a").get<double>();
            params.b = p.at("b").get<double>();
            pic = std::move(params);
        }
        return DiffusionModel(kind, j.at("edge_values").get<std::vector<double>>(), std::move(pic),
                              j.value("seed", Seed{0}), j.value("calibration", 0.0));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
}

inline void save_model(const DiffusionModel& m, const std::string& path)
{
    auto out = detail::open_output(path);
    out << model_to_json(m).dump(1) << '\n';
}

inline DiffusionModel load_model(const std::string& path)
{
    auto in = detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model_from_json(j);
}

} // namespace dscom

#endif
