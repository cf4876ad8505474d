#ifndef DSCOM_PIPELINE_HPP
#define DSCOM_PIPELINE_HPP

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dscom/attention.hpp"
#include "dscom/baselines.hpp"
#include "dscom/cascade.hpp"
#include "dscom/community.hpp"
#include "dscom/config.hpp"
#include "dscom/diffusion_model.hpp"
#include "dscom/graph.hpp"
#include "dscom/relation_learning.hpp"
#include "dscom/seed_selection.hpp"
#include "dscom/synthetic.hpp"

namespace dscom {

inline constexpr const char* kVersion = "0.1.0";

/// Seed of one named stage; independent of every other stage's inputs.
inline Seed stage_seed(Seed master, std::string_view stage) { return derive_seed(master, stage); }

/// Seed of one (stage, budget) cell.
inline Seed cell_seed(Seed master, std::string_view stage, std::size_t k)
{
    return derive_seed(derive_seed(master, stage), static_cast<std::uint64_t>(k));
}

// ---------------------------------------------------------------------------------------------
// Stage helpers, also used by the CLI subcommands

inline AttributedGraph load_or_make_graph(const RunConfig& c)
{
    if (c.edges.empty()) {
        SyntheticGraphConfig s = c.synthetic;
        s.seed = stage_seed(c.master_seed, "graph");
        return make_synthetic_graph(s).graph;
    }
    EdgeListOptions opts;
    opts.undirected = c.undirected;
    opts.relabel = c.relabel;
    std::optional<std::string> features;
    if (!c.features.empty()) {
        features = c.features;
    }
    return load_attributed_graph(c.edges, features, opts, c.label_map);
}

inline DiffusionModel load_or_make_model(const RunConfig& c, const AttributedGraph& g)
{
    if (!c.model_path.empty()) {
        DiffusionModel m = load_model(c.model_path);
        m.check_graph(g);
        return m;
    }
    return make_model(c.model_kind, g, stage_seed(c.master_seed, "model"), c.calibration);
}

inline GeneratedDataset load_or_make_dataset(const RunConfig& c, const AttributedGraph& g, const DiffusionModel& m)
{
    if (!c.dataset_path.empty()) {
        GeneratedDataset out;
        out.dataset = load_diffusion_dataset(c.dataset_path, g);
        out.cascades = out.dataset.cascade_count();
        return out;
    }
    DatasetOptions opts;
    opts.seed_fraction = c.seed_fraction;
    return generate_dataset(g, m, c.dataset_size, stage_seed(c.master_seed, "cascades"), opts);
}

inline TrainConfig stage_train_config(const RunConfig& c)
{
    TrainConfig t = c.train;
    t.seed = stage_seed(c.master_seed, "train");
    return t;
}

// ---------------------------------------------------------------------------------------------
// Report

struct ReportCell {
    std::string strategy;
    std::size_t k = 0;
    bool ok = false;
    std::string error;
    InfluenceEstimate influence;
    /// Post-training selection wall time, clustering included for community strategies.
    double time_ms = 0.0;
    SeedSet seeds;
};

struct RunReport {
    RunConfig config;
    std::string version = kVersion;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t dataset_pairs = 0;
    std::size_t cascades = 0;
    bool dataset_exhausted = false;
    bool trained = false;
    std::size_t train_positives = 0;
    std::size_t train_chains = 0;
    double final_loss = 0.0;
    double train_ms = 0.0;
    /// NCut of the learned-weight partition per budget.
    std::map<std::size_t, double> ncut;
    std::vector<ReportCell> cells;

    const ReportCell* find(const std::string& strategy, std::size_t k) const
    {
        for (const auto& c : cells) {
            if (c.strategy == strategy && c.k == k) {
                return &c;
            }
        }
        return nullptr;
    }

    /// Row names in config order: strategies, then baselines.
    std::vector<std::string> row_names() const
    {
        std::vector<std::string> rows = config.strategies;
        rows.insert(rows.end(), config.baselines.begin(), config.baselines.end());
        return rows;
    }
};

using ProgressSink = std::function<void(const std::string&)>;

namespace detail {

inline double elapsed_ms(std::chrono::steady_clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

inline bool needs_training(const RunConfig& c)
{
    if (!c.strategies.empty()) {
        return true;
    }
    for (const auto& b : c.baselines) {
        if (b == "gatk" || b == "rl-ris") {
            return true;
        }
    }
    return false;
}

} // namespace detail

/// generate/load model, cascades -> train -> extract -> per budget: cluster, select, evaluate.
/// A failing cell is recorded with its reason and the remaining cells still run.
inline RunReport run_pipeline(const RunConfig& config, const ProgressSink& progress = {})
{
    using clock = std::chrono::steady_clock;
    auto say = [&](const std::string& msg) {
        if (progress) {
            progress(msg);
        }
    };
    config.validate();
    RunReport report;
    report.config = config;

    const AttributedGraph g = load_or_make_graph(config);
    report.nodes = g.node_count();
    report.edges = g.edge_count();
    say("graph: " + std::to_string(g.node_count()) + " nodes, " + std::to_string(g.edge_count()) + " edges");

    const DiffusionModel model = load_or_make_model(config, g);
    const GeneratedDataset data = load_or_make_dataset(config, g, model);
    report.dataset_pairs = data.dataset.size();
    report.cascades = data.cascades;
    report.dataset_exhausted = data.exhausted;
    say("dataset: " + std::to_string(data.dataset.size()) + " pairs from " + std::to_string(data.cascades)
        + " cascades");

    std::optional<TrainResult> trained;
    WeightedGraph learned;
    Eigen::MatrixXd embeddings;
    if (detail::needs_training(config)) {
        const auto t0 = clock::now();
        trained = train_relation_model(g, data.dataset, stage_train_config(config));
        learned = extract_edge_weights(trained->model, g);
        embeddings = gat_forward(trained->model, g).embeddings;
        report.train_ms = detail::elapsed_ms(t0);
        report.trained = true;
        report.train_positives = trained->positives;
        report.train_chains = trained->chains;
        report.final_loss = trained->loss_history.empty() ? 0.0 : trained->loss_history.back();
        say("training: " + std::to_string(trained->positives) + " context pairs, "
            + detail::format_real(report.train_ms) + " ms");
    }

    const Seed eval_seed = stage_seed(config.master_seed, "evaluate");
    for (std::size_t k : config.budgets) {
        std::optional<ClusterResult> cluster;
        std::string cluster_error;
        double cluster_ms = 0.0;
        if (!config.strategies.empty()) {
            const auto t0 = clock::now();
            try {
                cluster = spectral_cluster(g, learned, k, cell_seed(config.master_seed, "cluster", k));
                report.ncut[k] = cluster->ncut;
            } catch (const std::exception& e) {
                cluster_error = std::string("clustering failed: ") + e.what();
            }
            cluster_ms = detail::elapsed_ms(t0);
        }
        for (const auto& name : report.row_names()) {
            ReportCell cell;
            cell.strategy = name;
            cell.k = k;
            try {
                const Seed s = cell_seed(config.master_seed, "select:" + name, k);
                const auto t0 = clock::now();
                if (is_community_strategy(name)) {
                    if (!cluster) {
                        throw Error(cluster_error);
                    }
                    cell.seeds = select_seeds(g, cluster->partition, allocate_budget(cluster->partition, k),
                                              strategy_measure(name));
                    cell.time_ms = cluster_ms;
                } else if (name == "random") {
                    cell.seeds = random_seeds(g.node_count(), k, s);
                } else if (name == "celf") {
                    cell.seeds = celf_greedy(g, model, k, config.celf_replications, s);
                } else if (name == "gatk") {
                    cell.seeds = gatk_select(embeddings, k, s);
                } else if (name == "spec-pr") {
                    cell.seeds = spec_pr_select(g, k, s);
                } else if (name == "rl-ris") {
                    const std::size_t theta = config.rr_sets ? config.rr_sets : default_rr_count(g.node_count());
                    cell.seeds = rl_ris_select(g, learned, k, theta, s).seeds;
                }
                cell.time_ms += detail::elapsed_ms(t0);
                cell.influence =
                    estimate_influence(g, model, cell.seeds.sorted(), config.replications, config.repeats, eval_seed);
                cell.ok = true;
            } catch (const std::exception& e) {
                cell.ok = false;
                cell.error = e.what();
            }
            say(name + " k=" + std::to_string(k) + ": "
                + (cell.ok ? detail::format_real(cell.influence.mean) : "failed (" + cell.error + ")"));
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

// ---------------------------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string fixed(double v, int digits)
{
    std::ostringstream o;
    o.setf(std::ios::fixed);
    o.precision(digits);
    o << v;
    return o.str();
}

inline std::string cell_key(const ReportCell& c) { return c.strategy + "_k" + std::to_string(c.k); }

} // namespace detail

/// Human-readable report. With include_timing = false the text depends only on the config and
/// the master seed.
inline std::string render_report(const RunReport& r, bool include_timing = false)
{
    std::ostringstream o;
    o << "dscom " << r.version << " run report\n\n";
    o << "# config\n" << to_toml(r.config) << '\n';
    o << "# data\n";
    o << "nodes " << r.nodes << "\nedges " << r.edges << "\ndataset_pairs " << r.dataset_pairs << "\ncascades "
      << r.cascades << (r.dataset_exhausted ? " (cascade cap reached)" : "") << "\n\n";
    if (r.trained) {
        o << "# training\ncontext_pairs " << r.train_positives << "\nchains " << r.train_chains << "\nfinal_loss "
          << detail::format_real(r.final_loss) << '\n';
        if (include_timing) {
            o << "train_ms " << detail::fixed(r.train_ms, 3) << '\n';
        }
        o << '\n';
    }
    if (!r.ncut.empty()) {
        o << "# ncut\n";
        for (const auto& [k, v] : r.ncut) {
            o << "k=" << k << ' ' << detail::format_real(v) << '\n';
        }
        o << '\n';
    }
    o << "# influence (R=" << r.config.replications << " x " << r.config.repeats << ")\n";
    for (const auto& c : r.cells) {
        o << c.strategy << " k=" << c.k << ' ';
        if (!c.ok) {
            o << "FAILED: " << c.error << '\n';
            continue;
        }
        o << "mean " << detail::fixed(c.influence.mean, 4) << " std " << detail::fixed(c.influence.std, 4)
          << " seeds " << seeds_hash(c.seeds.sorted());
        if (include_timing) {
            o << " time_ms " << detail::fixed(c.time_ms, 3);
        }
        o << '\n';
    }
    return o.str();
}

/// One row per (strategy, budget).
inline void write_results_csv(std::ostream& o, const RunReport& r)
{
    o << "strategy,k,status,mean,std,time_ms,seeds_hash\n";
    for (const auto& name : r.row_names()) {
        for (std::size_t k : r.config.budgets) {
            const ReportCell* c = r.find(name, k);
            if (!c) {
                continue;
            }
            o << name << ',' << k << ',';
            if (c->ok) {
                o << "ok," << detail::fixed(c->influence.mean, 4) << ',' << detail::fixed(c->influence.std, 4) << ','
                  << detail::fixed(c->time_ms, 3) << ',' << seeds_hash(c->seeds.sorted()) << '\n';
            } else {
                o << "failed,,,,\n";
            }
        }
    }
}

/// Rows = strategies, columns = budgets x {mean, std, time_ms}.
inline void write_table_csv(std::ostream& o, const RunReport& r)
{
    o << "strategy";
    for (std::size_t k : r.config.budgets) {
        o << ",k" << k << "_mean,k" << k << "_std,k" << k << "_time_ms";
    }
    o << '\n';
    for (const auto& name : r.row_names()) {
        o << name;
        for (std::size_t k : r.config.budgets) {
            const ReportCell* c = r.find(name, k);
            if (c && c->ok) {
                o << ',' << detail::fixed(c->influence.mean, 4) << ',' << detail::fixed(c->influence.std, 4) << ','
                  << detail::fixed(c->time_ms, 3);
            } else {
                o << ",,,";
            }
        }
        o << '\n';
    }
}

/// Writes results.csv, table.csv, report.txt (timing-free), summary.txt (with timing) and,
/// when configured, seeds/<strategy>_k<k>.txt into `dir`.
inline void emit_report(const RunReport& r, const std::string& dir, bool write_seeds = false)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir + "'");
    }
    const fs::path base(dir);
    {
        auto o = detail::open_output((base / "results.csv").string());
        write_results_csv(o, r);
    }
    {
        auto o = detail::open_output((base / "table.csv").string());
        write_table_csv(o, r);
    }
    {
        auto o = detail::open_output((base / "report.txt").string());
        o << render_report(r, false);
    }
    {
        auto o = detail::open_output((base / "summary.txt").string());
        o << render_report(r, true);
    }
    if (write_seeds) {
        fs::create_directories(base / "seeds", ec);
        for (const auto& c : r.cells) {
            if (!c.ok) {
                continue;
            }
            auto o = detail::open_output((base / "seeds" / (detail::cell_key(c) + ".txt")).string());
            write_seed_set(o, c.seeds);
        }
    }
}

} // namespace dscom

#endif
