#ifndef DSCOM_GRAPH_HPP
#define DSCOM_GRAPH_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dscom/error.hpp"

namespace dscom {

using NodeId = std::size_t;
using EdgeId = std::size_t;

struct Edge {
    NodeId src;
    NodeId dst;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Sorted, duplicate-free list of node ids.
using NodeSet = std::vector<NodeId>;

inline NodeSet make_node_set(std::vector<NodeId> nodes)
{
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    return nodes;
}

/// Directed graph with a dense n x F real feature matrix. Immutable once built.
///
/// Edges keep their insertion order (edge id = position). Per-node adjacency is stored in CSR
/// form with neighbours sorted ascending, so lookups are a binary search.
class AttributedGraph {
public:
    AttributedGraph() = default;

    AttributedGraph(std::size_t node_count, std::vector<Edge> edges, Eigen::MatrixXd features)
        : n_(node_count), edges_(std::move(edges)), features_(std::move(features))
    {
        if (static_cast<std::size_t>(features_.rows()) != n_) {
            throw DimensionError("feature matrix has " + std::to_string(features_.rows())
                                 + " rows, expected " + std::to_string(n_));
        }
        if (features_.cols() < 1) {
            throw DimensionError("feature matrix needs at least one column");
        }
        if (!features_.allFinite()) {
            throw ValidationError("feature matrix contains non-finite values");
        }
        for (const Edge& e : edges_) {
            if (e.src >= n_ || e.dst >= n_) {
                throw ValidationError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst)
                                      + ") has an endpoint outside [0," + std::to_string(n_) + ")");
            }
            if (e.src == e.dst) {
                throw ValidationError("self-loop on node " + std::to_string(e.src));
            }
        }
        build_index();
    }

    std::size_t node_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const Edge& edge(EdgeId id) const { return edges_[id]; }

    const Eigen::MatrixXd& features() const noexcept { return features_; }
    std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(features_.cols()); }

    std::span<const NodeId> out_neighbors(NodeId v) const
    {
        return {out_nbr_.data() + out_off_[v], out_off_[v + 1] - out_off_[v]};
    }
    std::span<const EdgeId> out_edges(NodeId v) const
    {
        return {out_eid_.data() + out_off_[v], out_off_[v + 1] - out_off_[v]};
    }
    std::span<const NodeId> in_neighbors(NodeId v) const
    {
        return {in_nbr_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
    }
    std::span<const EdgeId> in_edges(NodeId v) const
    {
        return {in_eid_.data() + in_off_[v], in_off_[v + 1] - in_off_[v]};
    }

    std::size_t out_degree(NodeId v) const { return out_off_[v + 1] - out_off_[v]; }
    std::size_t in_degree(NodeId v) const { return in_off_[v + 1] - in_off_[v]; }
    std::size_t degree(NodeId v) const { return out_degree(v) + in_degree(v); }

    std::optional<EdgeId> find_edge(NodeId u, NodeId v) const
    {
        if (u >= n_ || v >= n_) {
            return std::nullopt;
        }
        auto nbrs = out_neighbors(u);
        auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
        if (it == nbrs.end() || *it != v) {
            return std::nullopt;
        }
        return out_edges(u)[static_cast<std::size_t>(it - nbrs.begin())];
    }

    bool has_edge(NodeId u, NodeId v) const { return find_edge(u, v).has_value(); }

    /// Undirected neighbourhood (union of in and out neighbours), sorted.
    std::vector<NodeId> undirected_neighbors(NodeId v) const
    {
        std::vector<NodeId> out;
        auto a = out_neighbors(v);
        auto b = in_neighbors(v);
        out.reserve(a.size() + b.size());
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
        return out;
    }

private:
    void build_index()
    {
        out_off_.assign(n_ + 1, 0);
        in_off_.assign(n_ + 1, 0);
        for (const Edge& e : edges_) {
            ++out_off_[e.src + 1];
            ++in_off_[e.dst + 1];
        }
        for (std::size_t v = 0; v < n_; ++v) {
            out_off_[v + 1] += out_off_[v];
            in_off_[v + 1] += in_off_[v];
        }
        std::vector<EdgeId> by_out(edges_.size());
        std::vector<EdgeId> by_in(edges_.size());
        for (EdgeId i = 0; i < edges_.size(); ++i) {
            by_out[i] = i;
            by_in[i] = i;
        }
        std::sort(by_out.begin(), by_out.end(), [&](EdgeId a, EdgeId b) {
            return std::pair{edges_[a].src, edges_[a].dst} < std::pair{edges_[b].src, edges_[b].dst};
        });
        std::sort(by_in.begin(), by_in.end(), [&](EdgeId a, EdgeId b) {
            return std::pair{edges_[a].dst, edges_[a].src} < std::pair{edges_[b].dst, edges_[b].src};
        });
        out_nbr_.resize(edges_.size());
        out_eid_ = std::move(by_out);
        in_nbr_.resize(edges_.size());
        in_eid_ = std::move(by_in);
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            out_nbr_[i] = edges_[out_eid_[i]].dst;
            in_nbr_[i] = edges_[in_eid_[i]].src;
            if (i > 0 && edges_[out_eid_[i]] == edges_[out_eid_[i - 1]]) {
                throw ValidationError("duplicate edge (" + std::to_string(edges_[out_eid_[i]].src) + ","
                                      + std::to_string(edges_[out_eid_[i]].dst) + ")");
            }
        }
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    Eigen::MatrixXd features_;
    std::vector<std::size_t> out_off_{0}, in_off_{0};
    std::vector<NodeId> out_nbr_, in_nbr_;
    std::vector<EdgeId> out_eid_, in_eid_;
};

/// Single feature column: total degree divided by the maximum degree (0 when edgeless).
inline Eigen::MatrixXd degree_features(std::size_t n, const std::vector<Edge>& edges)
{
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 1);
    for (const Edge& e : edges) {
        x(static_cast<Eigen::Index>(e.src), 0) += 1.0;
        x(static_cast<Eigen::Index>(e.dst), 0) += 1.0;
    }
    const double top = n == 0 ? 0.0 : x.maxCoeff();
    if (top > 0.0) {
        x /= top;
    }
    return x;
}

inline AttributedGraph make_graph_with_degree_features(std::size_t n, std::vector<Edge> edges)
{
    Eigen::MatrixXd x = degree_features(n, edges);
    return AttributedGraph(n, std::move(edges), std::move(x));
}

// ---------------------------------------------------------------------------------------------
// Text formats

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) {
            ++i;
        }
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') {
            ++j;
        }
        if (j > i) {
            out.push_back(s.substr(i, j - i));
        }
        i = j;
    }
    return out;
}

inline std::optional<std::size_t> parse_index(std::string_view s)
{
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

inline std::optional<double> parse_real(std::string_view s)
{
    // std::from_chars for double is available in libstdc++ 11.
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return value;
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    return in;
}

inline std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    return out;
}

/// Shortest decimal text that parses back to the identical double.
inline std::string format_real(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace detail

struct EdgeListOptions {
    /// Insert both (u,v) and (v,u) for every line.
    bool undirected = false;
    /// Assign dense ids by first appearance instead of using the integers literally.
    bool relabel = false;
};

struct EdgeList {
    std::size_t node_count = 0;
    std::vector<Edge> edges;
    /// Original label of each dense id; only filled when relabelling.
    std::vector<std::string> labels;
};

/// Parses "src dst" lines. Comments start with '#'. Self-loops are dropped and repeated edges
/// collapse to their first occurrence.
inline EdgeList parse_edge_list(std::istream& in, const EdgeListOptions& options = {})
{
    EdgeList result;
    std::unordered_map<std::string, NodeId> ids;
    std::map<std::pair<NodeId, NodeId>, bool> seen;
    std::size_t max_id = 0;
    bool any = false;

    auto intern = [&](std::string_view token, std::size_t line) -> NodeId {
        if (options.relabel) {
            auto [it, inserted] = ids.try_emplace(std::string(token), result.labels.size());
            if (inserted) {
                result.labels.emplace_back(token);
            }
            return it->second;
        }
        auto id = detail::parse_index(token);
        if (!id) {
            throw ParseError("expected a non-negative integer node id, got '" + std::string(token) + "'",
                             line);
        }
        return *id;
    };
    auto add = [&](NodeId u, NodeId v) {
        if (u == v) {
            return;
        }
        if (seen.emplace(std::pair{u, v}, true).second) {
            result.edges.push_back({u, v});
        }
    };

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto tokens = detail::split_ws(line);
        if (tokens.size() != 2) {
            throw ParseError("expected 'src dst', got '" + std::string(line) + "'", line_no);
        }
        const NodeId u = intern(tokens[0], line_no);
        const NodeId v = intern(tokens[1], line_no);
        max_id = std::max({max_id, u, v});
        any = true;
        add(u, v);
        if (options.undirected) {
            add(v, u);
        }
    }
    if (options.relabel) {
        result.node_count = result.labels.size();
    } else {
        result.node_count = any ? max_id + 1 : 0;
    }
    return result;
}

/// CSV without header; row i holds the features of node i.
inline Eigen::MatrixXd parse_feature_table(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            auto cell = detail::trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            auto value = detail::parse_real(cell);
            if (!value) {
                throw ParseError("bad feature value '" + std::string(cell) + "'", line_no);
            }
            row.push_back(*value);
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw DimensionError("line " + std::to_string(line_no) + ": feature row has " + std::to_string(row.size())
                                 + " columns, expected " + std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    const auto cols = rows.empty() ? 0 : rows.front().size();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return x;
}

/// Builds a graph from parsed text. When features are given they fix n, and any edge endpoint
/// beyond the feature rows is a validation error.
inline AttributedGraph assemble_graph(EdgeList list, std::optional<Eigen::MatrixXd> features)
{
    if (!features) {
        return make_graph_with_degree_features(list.node_count, std::move(list.edges));
    }
    const auto rows = static_cast<std::size_t>(features->rows());
    if (list.node_count > rows) {
        if (!list.labels.empty()) {
            throw DimensionError("edge file has " + std::to_string(list.node_count) + " nodes but feature file has "
                                 + std::to_string(rows) + " rows");
        }
        for (const Edge& e : list.edges) {
            if (e.src >= rows || e.dst >= rows) {
                throw ValidationError("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst)
                                      + ") references a node without a feature row (n=" + std::to_string(rows) + ")");
            }
        }
    }
    if (!list.labels.empty() && list.node_count != rows) {
        throw DimensionError("edge file has " + std::to_string(list.node_count) + " nodes but feature file has "
                             + std::to_string(rows) + " rows");
    }
    return AttributedGraph(rows, std::move(list.edges), std::move(*features));
}

/// Loads an edge file and an optional feature CSV. With `options.relabel`, the original labels
/// are written to `label_map_path` (one "id label" line per node) when that path is non-empty.
inline AttributedGraph load_attributed_graph(const std::string& edge_path,
                                             const std::optional<std::string>& feature_path,
                                             const EdgeListOptions& options = {},
                                             const std::string& label_map_path = {})
{
    auto edge_in = detail::open_input(edge_path);
    EdgeList list = parse_edge_list(edge_in, options);
    if (options.relabel && !label_map_path.empty()) {
        auto out = detail::open_output(label_map_path);
        for (std::size_t i = 0; i < list.labels.size(); ++i) {
            out << i << ' ' << list.labels[i] << '\n';
        }
    }
    std::optional<Eigen::MatrixXd> features;
    if (feature_path && !feature_path->empty()) {
        auto feat_in = detail::open_input(*feature_path);
        features = parse_feature_table(feat_in);
    }
    return assemble_graph(std::move(list), std::move(features));
}

inline void write_edge_list(std::ostream& out, const AttributedGraph& g)
{
    for (const Edge& e : g.edges()) {
        out << e.src << ' ' << e.dst << '\n';
    }
}

inline void write_feature_table(std::ostream& out, const Eigen::MatrixXd& x)
{
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << detail::format_real(x(i, j));
        }
        out << '\n';
    }
}

inline void save_attributed_graph(const AttributedGraph& g, const std::string& edge_path,
                                  const std::string& feature_path)
{
    auto e = detail::open_output(edge_path);
    write_edge_list(e, g);
    auto f = detail::open_output(feature_path);
    write_feature_table(f, g.features());
}

// ---------------------------------------------------------------------------------------------
// Subgraphs

struct Subgraph {
    AttributedGraph graph;
    /// new id -> original id
    std::vector<NodeId> to_original;
    /// original id -> new id, or npos for dropped nodes
    std::vector<NodeId> to_local;

    static constexpr NodeId npos = std::numeric_limits<NodeId>::max();
};

inline Subgraph induced_subgraph(const AttributedGraph& g, const NodeSet& nodes)
{
    if (nodes.empty()) {
        throw ValidationError("induced_subgraph: empty node set");
    }
    Subgraph sub;
    sub.to_original = make_node_set(nodes);
    sub.to_local.assign(g.node_count(), Subgraph::npos);
    for (std::size_t i = 0; i < sub.to_original.size(); ++i) {
        const NodeId v = sub.to_original[i];
        if (v >= g.node_count()) {
            throw ValidationError("induced_subgraph: node " + std::to_string(v) + " out of range");
        }
        sub.to_local[v] = i;
    }
    std::vector<Edge> edges;
    for (const Edge& e : g.edges()) {
        if (sub.to_local[e.src] != Subgraph::npos && sub.to_local[e.dst] != Subgraph::npos) {
            edges.push_back({sub.to_local[e.src], sub.to_local[e.dst]});
        }
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(sub.to_original.size()), g.features().cols());
    for (std::size_t i = 0; i < sub.to_original.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = g.features().row(static_cast<Eigen::Index>(sub.to_original[i]));
    }
    sub.graph = AttributedGraph(sub.to_original.size(), std::move(edges), std::move(x));
    return sub;
}

// ---------------------------------------------------------------------------------------------
// Diffusion dataset

struct DiffusionPair {
    std::string cascade;
    NodeId src;
    NodeId dst;

    friend bool operator==(const DiffusionPair&, const DiffusionPair&) = default;
};

/// Multiset of observed influencer -> influenced pairs, kept in observation order.
class DiffusionDataset {
public:
    DiffusionDataset() = default;
    explicit DiffusionDataset(std::vector<DiffusionPair> pairs) : pairs_(std::move(pairs)) {}

    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    const std::vector<DiffusionPair>& pairs() const noexcept { return pairs_; }

    void add(std::string cascade, NodeId src, NodeId dst) { pairs_.push_back({std::move(cascade), src, dst}); }

    void truncate(std::size_t n)
    {
        if (pairs_.size() > n) {
            pairs_.resize(n);
        }
    }

    /// (src, dst) -> multiplicity
    std::map<std::pair<NodeId, NodeId>, std::size_t> multiplicities() const
    {
        std::map<std::pair<NodeId, NodeId>, std::size_t> out;
        for (const auto& p : pairs_) {
            ++out[{p.src, p.dst}];
        }
        return out;
    }

    std::size_t multiplicity(NodeId u, NodeId v) const
    {
        return static_cast<std::size_t>(
            std::count_if(pairs_.begin(), pairs_.end(), [&](const DiffusionPair& p) { return p.src == u && p.dst == v; }));
    }

    std::size_t cascade_count() const
    {
        std::vector<std::string> ids;
        for (const auto& p : pairs_) {
            ids.push_back(p.cascade);
        }
        std::sort(ids.begin(), ids.end());
        return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
    }

    /// Throws if some pair is not an edge of `g`.
    void validate(const AttributedGraph& g) const
    {
        for (const auto& p : pairs_) {
            if (!g.has_edge(p.src, p.dst)) {
                throw ValidationError("diffusion pair (" + std::to_string(p.src) + "," + std::to_string(p.dst)
                                      + ") in cascade '" + p.cascade + "' is not an edge of the graph");
            }
        }
    }

private:
    std::vector<DiffusionPair> pairs_;
};

inline DiffusionDataset parse_diffusion_dataset(std::istream& in, const AttributedGraph& g)
{
    DiffusionDataset ds;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto tokens = detail::split_ws(line);
        if (tokens.size() != 3) {
            throw ParseError("expected 'cascade_id u v', got '" + std::string(line) + "'", line_no);
        }
        auto u = detail::parse_index(tokens[1]);
        auto v = detail::parse_index(tokens[2]);
        if (!u || !v) {
            throw ParseError("bad node id in '" + std::string(line) + "'", line_no);
        }
        if (!g.has_edge(*u, *v)) {
            throw ValidationError("line " + std::to_string(line_no) + ": pair (" + std::to_string(*u) + ","
                                  + std::to_string(*v) + ") is not an edge of the graph");
        }
        ds.add(std::string(tokens[0]), *u, *v);
    }
    if (ds.empty()) {
        throw ValidationError("diffusion dataset is empty");
    }
    return ds;
}

inline DiffusionDataset load_diffusion_dataset(const std::string& path, const AttributedGraph& g)
{
    auto in = detail::open_input(path);
    return parse_diffusion_dataset(in, g);
}

inline void write_diffusion_dataset(std::ostream& out, const DiffusionDataset& ds)
{
    for (const auto& p : ds.pairs()) {
        out << p.cascade << ' ' << p.src << ' ' << p.dst << '\n';
    }
}

} // namespace dscom

#endif
