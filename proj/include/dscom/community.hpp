#ifndef DSCOM_COMMUNITY_HPP
#define DSCOM_COMMUNITY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <armadillo>

#include "dscom/error.hpp"
#include "dscom/graph.hpp"
#include "dscom/relation_learning.hpp"
#include "dscom/rng.hpp"

namespace dscom {

/// Symmetric non-negative affinity with zero diagonal, stored as sorted adjacency rows.
class SimilarityMatrix {
public:
    using Row = std::vector<std::pair<NodeId, double>>;

    SimilarityMatrix() = default;
    explicit SimilarityMatrix(std::size_t n) : rows_(n) {}

    /// Builds from undirected (u, v, w) entries; repeated pairs accumulate.
    static SimilarityMatrix from_entries(std::size_t n, const std::map<std::pair<NodeId, NodeId>, double>& entries)
    {
        SimilarityMatrix s(n);
        for (const auto& [key, w] : entries) {
            const auto [u, v] = key;
            if (u == v) {
                continue;
            }
            if (w < 0.0 || !std::isfinite(w)) {
                throw ValidationError("similarity weights must be finite and non-negative");
            }
            if (w == 0.0) {
                continue;
            }
            s.rows_[u].push_back({v, w});
            s.rows_[v].push_back({u, w});
        }
        for (auto& r : s.rows_) {
            std::sort(r.begin(), r.end());
        }
        return s;
    }

    std::size_t size() const noexcept { return rows_.size(); }
    const Row& row(NodeId v) const { return rows_[v]; }

    double weight(NodeId u, NodeId v) const
    {
        const auto& r = rows_[u];
        auto it = std::lower_bound(r.begin(), r.end(), std::pair<NodeId, double>{v, -1.0});
        return it != r.end() && it->first == v ? it->second : 0.0;
    }

    double degree(NodeId v) const
    {
        double d = 0.0;
        for (const auto& [u, w] : rows_[v]) {
            d += w;
        }
        return d;
    }

    Eigen::MatrixXd dense() const
    {
        const auto n = static_cast<Eigen::Index>(rows_.size());
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t u = 0; u < rows_.size(); ++u) {
            for (const auto& [v, w] : rows_[u]) {
                m(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v)) = w;
            }
        }
        return m;
    }

    SimilarityMatrix scaled(double factor) const
    {
        SimilarityMatrix s = *this;
        for (auto& r : s.rows_) {
            for (auto& e : r) {
                e.second *= factor;
            }
        }
        return s;
    }

private:
    std::vector<Row> rows_;
};

/// S(u,v) = (alpha(u->v) + alpha(v->u)) / 2, a missing direction counting as 0.
inline SimilarityMatrix symmetrized_similarity(const AttributedGraph& g, const WeightedGraph& wg)
{
    if (wg.weights.size() != g.edge_count()) {
        throw DimensionError("weight vector does not match the graph's edge count");
    }
    std::map<std::pair<NodeId, NodeId>, double> entries;
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
        const double w = wg.weights[e];
        if (w < 0.0) {
            throw ValidationError("edge weights must be non-negative");
        }
        const Edge& ed = g.edge(e);
        entries[{std::min(ed.src, ed.dst), std::max(ed.src, ed.dst)}] += 0.5 * w;
    }
    return SimilarityMatrix::from_entries(g.node_count(), entries);
}

/// Community assignment with ids in [0, k).
struct Partition {
    std::vector<std::size_t> assignment;
    std::size_t k = 0;

    std::vector<std::vector<NodeId>> members() const
    {
        std::vector<std::vector<NodeId>> out(k);
        for (NodeId v = 0; v < assignment.size(); ++v) {
            out[assignment[v]].push_back(v);
        }
        return out;
    }

    std::vector<std::size_t> sizes() const
    {
        std::vector<std::size_t> out(k, 0);
        for (auto c : assignment) {
            ++out[c];
        }
        return out;
    }

    /// Every node assigned and every community non-empty.
    void validate(std::size_t n) const
    {
        if (assignment.size() != n) {
            throw ValidationError("partition covers " + std::to_string(assignment.size()) + " nodes, expected "
                                  + std::to_string(n));
        }
        for (auto c : assignment) {
            if (c >= k) {
                throw ValidationError("community id " + std::to_string(c) + " out of range");
            }
        }
        for (auto s : sizes()) {
            if (s == 0) {
                throw ValidationError("partition has an empty community");
            }
        }
    }

    /// Renumbers communities by first appearance in node order; drops empty ids.
    void canonicalize()
    {
        std::vector<std::size_t> remap(std::max<std::size_t>(k, 1), std::numeric_limits<std::size_t>::max());
        std::size_t next = 0;
        for (auto& c : assignment) {
            if (remap[c] == std::numeric_limits<std::size_t>::max()) {
                remap[c] = next++;
            }
            c = remap[c];
        }
        k = next;
    }
};

/// L = I - D^-1/2 S D^-1/2; a node of degree 0 gets an identity row and column.
inline Eigen::MatrixXd normalized_laplacian(const SimilarityMatrix& s)
{
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::VectorXd inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = s.degree(static_cast<NodeId>(i));
        inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index u = 0; u < n; ++u) {
        for (const auto& [v, w] : s.row(static_cast<NodeId>(u))) {
            L(u, static_cast<Eigen::Index>(v)) -= inv_sqrt[u] * w * inv_sqrt[static_cast<Eigen::Index>(v)];
        }
    }
    return L;
}

struct SpectralEmbedding {
    Eigen::MatrixXd rows; ///< n x k, each non-zero row of unit length
    Eigen::VectorXd eigenvalues; ///< the k smallest, ascending
    Eigen::MatrixXd eigenvectors; ///< n x k before row normalisation
    double max_residual = 0.0;
};

namespace detail {

inline void check_embedding_k(Eigen::Index n, std::size_t k)
{
    if (k < 1 || static_cast<Eigen::Index>(k) > n) {
        throw ParameterError("spectral embedding needs 1 <= k <= n (k=" + std::to_string(k)
                             + ", n=" + std::to_string(n) + ")");
    }
}

inline void normalise_rows(SpectralEmbedding& out)
{
    out.rows = out.eigenvectors;
    for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
        const double norm = out.rows.row(i).norm();
        if (norm > 0.0) {
            out.rows.row(i) /= norm;
        }
    }
}

/// Connected components of the positive-weight graph, each listed in ascending id order.
inline std::vector<std::vector<NodeId>> components(const SimilarityMatrix& s)
{
    const std::size_t n = s.size();
    std::vector<char> seen(n, 0);
    std::vector<std::vector<NodeId>> out;
    for (NodeId root = 0; root < n; ++root) {
        if (seen[root]) {
            continue;
        }
        std::vector<NodeId> members{root};
        seen[root] = 1;
        for (std::size_t head = 0; head < members.size(); ++head) {
            for (const auto& [v, w] : s.row(members[head])) {
                if (w > 0.0 && !seen[v]) {
                    seen[v] = 1;
                    members.push_back(v);
                }
            }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

struct ComponentSpectrum {
    Eigen::VectorXd values; ///< ascending
    Eigen::MatrixXd vectors; ///< members x values
    Eigen::VectorXd residuals;
};

/// Largest eigenpairs of the component's D^-1/2 S D^-1/2 by restarted Lanczos; empty on failure.
inline std::optional<ComponentSpectrum> sparse_spectrum(const SimilarityMatrix& s, const std::vector<NodeId>& members,
                                                        const std::vector<Eigen::Index>& local,
                                                        const Eigen::VectorXd& inv_sqrt, std::size_t want)
{
    const std::size_t m = members.size();
    std::size_t nnz = 0;
    for (NodeId u : members) {
        nnz += s.row(u).size();
    }
    arma::umat locations(2, nnz);
    arma::vec values(nnz);
    std::size_t at = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const NodeId u = members[i];
        for (const auto& [v, w] : s.row(u)) {
            locations(0, at) = i;
            locations(1, at) = static_cast<arma::uword>(local[v]);
            values[at] = inv_sqrt[u] * w * inv_sqrt[v];
            ++at;
        }
    }
    const arma::sp_mat a(locations, values, m, m);
    arma::vec lambda;
    arma::mat vectors;
    bool ok = false;
    try {
        ok = arma::eigs_sym(lambda, vectors, a, want, "la");
    } catch (const std::exception&) {
        ok = false;
    }
    if (!ok || lambda.n_elem != want) {
        return std::nullopt;
    }
    const auto mm = static_cast<Eigen::Index>(m);
    const auto ww = static_cast<Eigen::Index>(want);
    ComponentSpectrum out;
    out.values.resize(ww);
    out.vectors.resize(mm, ww);
    out.residuals.resize(ww);
    // eigs_sym returns ascending eigenvalues of A; L = I - A reverses the order.
    for (Eigen::Index c = 0; c < ww; ++c) {
        const auto src = static_cast<arma::uword>(ww - 1 - c);
        out.values[c] = 1.0 - lambda[src];
        const arma::vec v = vectors.col(src);
        for (Eigen::Index i = 0; i < mm; ++i) {
            out.vectors(i, c) = v[static_cast<arma::uword>(i)];
        }
        out.residuals[c] = arma::norm(v - a * v - out.values[c] * v);
    }
    if (!out.vectors.allFinite() || out.residuals.maxCoeff() > 1e-6) {
        return std::nullopt;
    }
    return out;
}

inline ComponentSpectrum dense_spectrum(const SimilarityMatrix& s, const std::vector<NodeId>& members,
                                       const std::vector<Eigen::Index>& local, const Eigen::VectorXd& inv_sqrt,
                                       std::size_t want)
{
    const auto mm = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd laplacian = Eigen::MatrixXd::Identity(mm, mm);
    for (Eigen::Index i = 0; i < mm; ++i) {
        const NodeId u = members[static_cast<std::size_t>(i)];
        for (const auto& [v, w] : s.row(u)) {
            laplacian(i, local[v]) -= inv_sqrt[u] * w * inv_sqrt[v];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symmetric eigensolver did not converge");
    }
    const auto ww = static_cast<Eigen::Index>(want);
    ComponentSpectrum out;
    out.values = solver.eigenvalues().head(ww);
    out.vectors = solver.eigenvectors().leftCols(ww);
    out.residuals.resize(ww);
    for (Eigen::Index c = 0; c < ww; ++c) {
        out.residuals[c] = (laplacian * out.vectors.col(c) - out.values[c] * out.vectors.col(c)).norm();
    }
    return out;
}

} // namespace detail

/// Eigenvectors of the k smallest eigenvalues, rows normalised to unit length.
inline SpectralEmbedding spectral_embedding(const Eigen::MatrixXd& laplacian, std::size_t k)
{
    const auto n = laplacian.rows();
    detail::check_embedding_k(n, k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian);
    if (solver.info() != Eigen::Success) {
        throw NumericError("symmetric eigensolver did not converge");
    }
    const auto kk = static_cast<Eigen::Index>(k);
    SpectralEmbedding out;
    out.eigenvalues = solver.eigenvalues().head(kk);
    out.eigenvectors = solver.eigenvectors().leftCols(kk);
    for (Eigen::Index c = 0; c < kk; ++c) {
        const double r =
            (laplacian * out.eigenvectors.col(c) - out.eigenvalues[c] * out.eigenvectors.col(c)).norm();
        out.max_residual = std::max(out.max_residual, r);
    }
    if (out.max_residual > 1e-6) {
        throw NumericError("eigenpair residual " + detail::format_real(out.max_residual) + " exceeds 1e-6");
    }
    detail::normalise_rows(out);
    return out;
}

/// Up to dense_limit nodes the whole Laplacian is decomposed densely. Larger graphs are solved per
/// connected component, since the spectrum is the union of the component spectra; components above
/// dense_limit use a sparse Lanczos solve, falling back to the dense solver if it fails.
inline SpectralEmbedding spectral_embedding(const SimilarityMatrix& s, std::size_t k, std::size_t dense_limit = 500)
{
    const std::size_t n = s.size();
    detail::check_embedding_k(static_cast<Eigen::Index>(n), k);
    if (n <= dense_limit) {
        return spectral_embedding(normalized_laplacian(s), k);
    }
    Eigen::VectorXd inv_sqrt(static_cast<Eigen::Index>(n));
    for (NodeId v = 0; v < n; ++v) {
        const double d = s.degree(v);
        inv_sqrt[v] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    const auto comps = detail::components(s);
    std::vector<Eigen::Index> local(n);
    std::vector<detail::ComponentSpectrum> spectra;
    struct Candidate {
        double value;
        std::size_t comp;
        Eigen::Index col;
    };
    std::vector<Candidate> candidates;
    for (std::size_t c = 0; c < comps.size(); ++c) {
        const auto& members = comps[c];
        for (std::size_t i = 0; i < members.size(); ++i) {
            local[members[i]] = static_cast<Eigen::Index>(i);
        }
        const std::size_t want = std::min(k, members.size());
        std::optional<detail::ComponentSpectrum> spec;
        if (members.size() > dense_limit && 2 * want < members.size()) {
            spec = detail::sparse_spectrum(s, members, local, inv_sqrt, want);
        }
        if (!spec) {
            spec = detail::dense_spectrum(s, members, local, inv_sqrt, want);
        }
        for (Eigen::Index j = 0; j < spec->values.size(); ++j) {
            candidates.push_back({spec->values[j], c, j});
        }
        spectra.push_back(std::move(*spec));
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.value < b.value; });

    const auto kk = static_cast<Eigen::Index>(k);
    SpectralEmbedding out;
    out.eigenvalues.resize(kk);
    out.eigenvectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), kk);
    for (Eigen::Index c = 0; c < kk; ++c) {
        const Candidate& pick = candidates[static_cast<std::size_t>(c)];
        const auto& spec = spectra[pick.comp];
        const auto& members = comps[pick.comp];
        out.eigenvalues[c] = pick.value;
        for (std::size_t i = 0; i < members.size(); ++i) {
            out.eigenvectors(static_cast<Eigen::Index>(members[i]), c) =
                spec.vectors(static_cast<Eigen::Index>(i), pick.col);
        }
        out.max_residual = std::max(out.max_residual, spec.residuals[pick.col]);
    }
    if (out.max_residual > 1e-6) {
        throw NumericError("eigenpair residual " + detail::format_real(out.max_residual) + " exceeds 1e-6");
    }
    detail::normalise_rows(out);
    return out;
}

// ---------------------------------------------------------------------------------------------
// k-means++

struct KMeansResult {
    Partition partition;
    Eigen::MatrixXd centroids; ///< k x dim
    double wcss = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

inline std::size_t nearest_center(const Eigen::MatrixXd& points, Eigen::Index i, const Eigen::MatrixXd& centers,
                                  double* dist = nullptr)
{
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(c);
        }
    }
    if (dist) {
        *dist = best_d;
    }
    return best;
}

inline KMeansResult kmeans_single(const Eigen::MatrixXd& points, std::size_t k, Rng& rng)
{
    const auto n = points.rows();
    const auto kk = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd centers(kk, points.cols());

    // D^2 seeding.
    centers.row(0) = points.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n))));
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        d2[static_cast<std::size_t>(i)] = (points.row(i) - centers.row(0)).squaredNorm();
    }
    for (Eigen::Index c = 1; c < kk; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                r -= d2[static_cast<std::size_t>(i)];
                if (r < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)));
        }
        centers.row(c) = points.row(pick);
        for (Eigen::Index i = 0; i < n; ++i) {
            d2[static_cast<std::size_t>(i)] =
                std::min(d2[static_cast<std::size_t>(i)], (points.row(i) - centers.row(c)).squaredNorm());
        }
    }

    KMeansResult res;
    res.partition.k = k;
    res.partition.assignment.assign(static_cast<std::size_t>(n), 0);
    auto& assign = res.partition.assignment;
    for (std::size_t it = 0; it < 300; ++it) {
        res.iterations = it + 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            assign[static_cast<std::size_t>(i)] = nearest_center(points, i, centers);
        }
        // Repair empty clusters with the farthest point of the currently largest cluster.
        while (true) {
            std::vector<std::size_t> sizes(k, 0);
            for (auto a : assign) {
                ++sizes[a];
            }
            auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
            if (empty == sizes.end()) {
                break;
            }
            const auto largest = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
            if (sizes[largest] < 2) {
                break;
            }
            Eigen::Index far = -1;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (assign[static_cast<std::size_t>(i)] != largest) {
                    continue;
                }
                const double d = (points.row(i) - centers.row(static_cast<Eigen::Index>(largest))).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            const auto target = static_cast<std::size_t>(empty - sizes.begin());
            assign[static_cast<std::size_t>(far)] = target;
            centers.row(static_cast<Eigen::Index>(target)) = points.row(far);
        }
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(kk, points.cols());
        std::vector<std::size_t> counts(k, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            next.row(static_cast<Eigen::Index>(assign[static_cast<std::size_t>(i)])) += points.row(i);
            ++counts[assign[static_cast<std::size_t>(i)]];
        }
        double shift = 0.0;
        for (Eigen::Index c = 0; c < kk; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
            } else {
                next.row(c) = centers.row(c);
            }
            shift = std::max(shift, (next.row(c) - centers.row(c)).norm());
        }
        centers = std::move(next);
        if (shift < 1e-9) {
            break;
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        res.wcss += (points.row(i) - centers.row(static_cast<Eigen::Index>(assign[static_cast<std::size_t>(i)]))).squaredNorm();
    }
    res.centroids = std::move(centers);
    return res;
}

} // namespace detail

/// k-means++ seeding and Lloyd iterations (until centre shift < 1e-9 or 300 rounds); the best
/// of `restarts` runs by within-cluster sum of squares is kept.
inline KMeansResult kmeans_pp(const Eigen::MatrixXd& points, std::size_t k, Seed seed, std::size_t restarts = 10)
{
    const auto n = static_cast<std::size_t>(points.rows());
    if (k < 1 || n < k) {
        throw ParameterError("k-means needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");
    }
    KMeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
        Rng rng(derive_seed(seed, r));
        KMeansResult cur = detail::kmeans_single(points, k, rng);
        if (cur.wcss < best.wcss) {
            best = std::move(cur);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------------------------
// Normalised cut

struct NCutDetails {
    double score = 0.0;
    /// Communities with zero volume; they contribute 0 to the score.
    std::size_t zero_volume_parts = 0;
};

inline NCutDetails ncut_details(const SimilarityMatrix& s, const Partition& p)
{
    std::vector<double> cut(p.k, 0.0);
    std::vector<double> vol(p.k, 0.0);
    for (NodeId u = 0; u < s.size(); ++u) {
        const auto cu = p.assignment[u];
        for (const auto& [v, w] : s.row(u)) {
            vol[cu] += w;
            if (p.assignment[v] != cu) {
                cut[cu] += w;
            }
        }
    }
    NCutDetails d;
    for (std::size_t c = 0; c < p.k; ++c) {
        if (vol[c] > 0.0) {
            d.score += cut[c] / vol[c];
        } else {
            ++d.zero_volume_parts;
        }
    }
    return d;
}

/// sum_i cut(A_i, V \ A_i) / vol(A_i)
inline double ncut_score(const SimilarityMatrix& s, const Partition& p)
{
    return ncut_details(s, p).score;
}

// ---------------------------------------------------------------------------------------------
// Full clustering

struct SpectralOptions {
    std::size_t kmeans_restarts = 10;
    /// Tiny-community merging stops once this many communities remain; 0 means "k", which
    /// disables merging so that exactly k communities come back.
    std::size_t min_communities = 0;
    /// Communities below this size count as tiny; 0 means max(2, n / (10 k)).
    std::size_t tiny_size = 0;
};

struct ClusterResult {
    Partition partition;
    double ncut = 0.0;
    std::size_t isolated_nodes = 0;
    std::size_t merged_communities = 0;
    double max_residual = 0.0;
};

namespace detail {

/// Merges the smallest tiny community into the neighbour it shares the most weight with,
/// repeatedly, while more than `floor` communities remain.
inline std::size_t merge_tiny_communities(const SimilarityMatrix& s, Partition& p, std::size_t tiny, std::size_t floor)
{
    std::size_t merged = 0;
    while (p.k > floor) {
        const auto sizes = p.sizes();
        std::size_t victim = p.k;
        for (std::size_t c = 0; c < p.k; ++c) {
            if (sizes[c] < tiny && (victim == p.k || sizes[c] < sizes[victim])) {
                victim = c;
            }
        }
        if (victim == p.k) {
            break;
        }
        std::vector<double> link(p.k, 0.0);
        for (NodeId u = 0; u < s.size(); ++u) {
            if (p.assignment[u] != victim) {
                continue;
            }
            for (const auto& [v, w] : s.row(u)) {
                link[p.assignment[v]] += w;
            }
        }
        std::size_t target = p.k;
        for (std::size_t c = 0; c < p.k; ++c) {
            if (c == victim) {
                continue;
            }
            if (target == p.k || link[c] > link[target]
                || (link[c] == link[target] && link[c] == 0.0 && sizes[c] > sizes[target])) {
                target = c;
            }
        }
        for (auto& a : p.assignment) {
            if (a == victim) {
                a = target;
            }
        }
        p.canonicalize();
        ++merged;
    }
    return merged;
}

} // namespace detail

/// Symmetrise -> normalised Laplacian -> spectral embedding -> k-means++.
///
/// Nodes with zero similarity degree are left out of k-means and attached afterwards to the
/// centroid nearest their embedding row (community 0 for all-zero rows).
inline ClusterResult spectral_cluster(const AttributedGraph& g, const WeightedGraph& wg, std::size_t k, Seed seed,
                                      const SpectralOptions& options = {})
{
    const std::size_t n = g.node_count();
    if (k < 1 || k > n) {
        throw ParameterError("spectral clustering needs 1 <= k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n)
                             + ")");
    }
    const SimilarityMatrix s = symmetrized_similarity(g, wg);
    const SpectralEmbedding emb = spectral_embedding(s, k);

    std::vector<Eigen::Index> active;
    std::vector<Eigen::Index> isolated;
    for (NodeId v = 0; v < n; ++v) {
        (s.degree(v) > 0.0 ? active : isolated).push_back(static_cast<Eigen::Index>(v));
    }
    if (active.size() < k) {
        active.insert(active.end(), isolated.begin(), isolated.end());
        std::sort(active.begin(), active.end());
        isolated.clear();
    }
    Eigen::MatrixXd points(static_cast<Eigen::Index>(active.size()), emb.rows.cols());
    for (std::size_t i = 0; i < active.size(); ++i) {
        points.row(static_cast<Eigen::Index>(i)) = emb.rows.row(active[i]);
    }
    const KMeansResult km = kmeans_pp(points, k, seed, options.kmeans_restarts);

    ClusterResult out;
    out.max_residual = emb.max_residual;
    out.partition.k = k;
    out.partition.assignment.assign(n, 0);
    for (std::size_t i = 0; i < active.size(); ++i) {
        out.partition.assignment[static_cast<std::size_t>(active[i])] = km.partition.assignment[i];
    }
    for (Eigen::Index v : isolated) {
        out.partition.assignment[static_cast<std::size_t>(v)] =
            emb.rows.row(v).isZero(0.0) ? 0 : detail::nearest_center(emb.rows, v, km.centroids);
    }
    out.isolated_nodes = isolated.size();

    const std::size_t floor = options.min_communities == 0 ? k : std::min(options.min_communities, k);
    const std::size_t tiny =
        options.tiny_size != 0 ? options.tiny_size : std::max<std::size_t>(2, n / (10 * k));
    out.merged_communities = detail::merge_tiny_communities(s, out.partition, tiny, floor);
    out.partition.validate(n);
    out.ncut = ncut_score(s, out.partition);
    return out;
}

inline void write_partition(std::ostream& out, const Partition& p)
{
    for (NodeId v = 0; v < p.assignment.size(); ++v) {
        out << v << ' ' << p.assignment[v] << '\n';
    }
}

inline Partition parse_partition(std::istream& in, std::size_t n)
{
    Partition p;
    p.assignment.assign(n, std::numeric_limits<std::size_t>::max());
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        auto t = detail::split_ws(line);
        auto v = t.size() == 2 ? detail::parse_index(t[0]) : std::nullopt;
        auto c = t.size() == 2 ? detail::parse_index(t[1]) : std::nullopt;
        if (!v || !c) {
            throw ParseError("expected 'node community'", line_no);
        }
        if (*v >= n) {
            throw ValidationError("line " + std::to_string(line_no) + ": node out of range");
        }
        p.assignment[*v] = *c;
        p.k = std::max(p.k, *c + 1);
    }
    for (auto a : p.assignment) {
        if (a == std::numeric_limits<std::size_t>::max()) {
            throw ValidationError("partition file does not assign every node");
        }
    }
    p.validate(n);
    return p;
}

} // namespace dscom

#endif
