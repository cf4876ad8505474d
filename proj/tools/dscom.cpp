// Command-line front end. Every subcommand maps onto one library call; stage seeds are derived
// from --seed exactly as the pipeline derives them, so chaining subcommands reproduces a
// pipeline run.

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dscom/dscom.hpp"

namespace {

using namespace dscom;

struct Globals {
    std::uint64_t seed = 1;
    std::string config;
    std::string out;
    bool seed_set = false;
};

struct GraphArgs {
    std::string edges;
    std::string features;
    bool undirected = false;
    bool relabel = false;
    std::string label_map;
};

void add_graph_options(CLI::App* app, GraphArgs& g)
{
    app->add_option("--edges", g.edges, "edge list (omit for the configured synthetic graph)");
    app->add_option("--features", g.features, "feature CSV, one row per node");
    app->add_flag("--undirected", g.undirected, "insert both directions of every edge");
    app->add_flag("--relabel", g.relabel, "assign dense ids by first appearance");
    app->add_option("--label-map", g.label_map, "with --relabel, write the id-to-label map here");
}

RunConfig base_config(const Globals& glob)
{
    RunConfig c = glob.config.empty() ? RunConfig{} : load_run_config(glob.config);
    if (glob.seed_set || glob.config.empty()) {
        c.master_seed = glob.seed;
    }
    if (!glob.out.empty()) {
        c.output_dir = glob.out;
    }
    return c;
}

RunConfig with_graph(RunConfig c, const GraphArgs& g)
{
    if (!g.edges.empty()) {
        c.edges = g.edges;
        c.features = g.features;
        c.undirected = g.undirected;
        c.relabel = g.relabel;
        c.label_map = g.label_map;
    }
    return c;
}

/// Runs `write` against --out, or stdout when --out is empty.
template <typename F>
void to_output(const std::string& path, F&& write)
{
    if (path.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    auto out = detail::open_output(path);
    write(out);
}

WeightedGraph load_weights_or_uniform(const std::string& path, const AttributedGraph& g)
{
    if (path.empty()) {
        return WeightedGraph::uniform(g);
    }
    auto in = detail::open_input(path);
    return parse_weighted_graph(in, g);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Community-based influence maximization from diffusion cascades"};
    app.require_subcommand(1);
    Globals glob;
    app.add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t s) { glob.seed = s, glob.seed_set = true; }, "master seed (default 1)")
        ->trigger_on_parse();
    app.add_option("--config", glob.config, "TOML-style run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", glob.out, "output file, or directory for pipeline");
    app.set_version_flag("--version", std::string(kVersion));

    // gen-graph
    auto* gen_graph = app.add_subcommand("gen-graph", "write the configured synthetic graph");
    std::string feature_out;
    gen_graph->add_option("--features-out", feature_out, "feature CSV path")->required();

    // gen-model
    GraphArgs model_graph;
    auto* gen_model = app.add_subcommand("gen-model", "generate a ground-truth diffusion model");
    add_graph_options(gen_model, model_graph);
    std::string model_kind;
    std::optional<double> calibration;
    gen_model->add_option("--kind", model_kind, "IC, LT, PIC or PLT");
    gen_model->add_option("--calibration", calibration, "mean edge probability (IC/PIC) in (0,1)");

    // gen-cascades
    GraphArgs casc_graph;
    auto* gen_casc = app.add_subcommand("gen-cascades", "sample a diffusion dataset from a model");
    add_graph_options(gen_casc, casc_graph);
    std::string casc_model;
    std::optional<std::size_t> casc_size;
    gen_casc->add_option("--model", casc_model, "model JSON")->required()->check(CLI::ExistingFile);
    gen_casc->add_option("--size", casc_size, "number of diffusion pairs");

    // train
    GraphArgs train_graph;
    auto* train = app.add_subcommand("train", "train the relation-learning attention network");
    add_graph_options(train, train_graph);
    std::string train_data;
    std::optional<std::size_t> train_epochs;
    bool train_quiet = false;
    train->add_option("--dataset", train_data, "diffusion dataset")->required()->check(CLI::ExistingFile);
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_flag("--quiet", train_quiet, "no per-epoch loss on stderr");

    // extract
    GraphArgs extract_graph;
    auto* extract = app.add_subcommand("extract", "write learned attention edge weights");
    add_graph_options(extract, extract_graph);
    std::string extract_ckpt;
    extract->add_option("--checkpoint", extract_ckpt, "trained model JSON")->required()->check(CLI::ExistingFile);

    // cluster
    GraphArgs cluster_graph;
    auto* cluster = app.add_subcommand("cluster", "spectral NCut clustering");
    add_graph_options(cluster, cluster_graph);
    std::string cluster_weights;
    std::size_t cluster_k = 0;
    cluster->add_option("--weights", cluster_weights, "weighted edge file (omit for uniform weights)");
    cluster->add_option("-k,--communities", cluster_k, "number of communities")->required();

    // select
    GraphArgs select_graph;
    auto* select = app.add_subcommand("select", "pick seeds inside communities");
    add_graph_options(select, select_graph);
    std::string select_partition;
    std::string select_strategy = "D-PR";
    std::size_t select_k = 0;
    select->add_option("--partition", select_partition, "partition file")->required()->check(CLI::ExistingFile);
    select->add_option("--strategy", select_strategy, "D-D, D-K, D-PR or D-C");
    select->add_option("-k,--budget", select_k, "total seed budget")->required();

    // evaluate
    GraphArgs eval_graph;
    auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo influence of a seed set");
    add_graph_options(evaluate, eval_graph);
    std::string eval_model;
    std::string eval_seeds;
    std::optional<std::size_t> eval_r;
    std::optional<std::size_t> eval_repeats;
    bool eval_header = false;
    evaluate->add_option("--model", eval_model, "model JSON")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--seeds", eval_seeds, "seed set file")->required()->check(CLI::ExistingFile);
    evaluate->add_option("-R,--replications", eval_r, "runs per repeat");
    evaluate->add_option("--repeats", eval_repeats, "independent repeats");
    evaluate->add_flag("--header", eval_header, "print the CSV header first");

    // baseline
    GraphArgs base_graph;
    auto* baseline = app.add_subcommand("baseline", "run a comparison selector");
    add_graph_options(baseline, base_graph);
    std::string base_name;
    std::size_t base_k = 0;
    std::string base_model;
    std::string base_ckpt;
    std::string base_weights;
    std::optional<std::size_t> base_r;
    std::optional<std::size_t> base_theta;
    baseline->add_option("--name", base_name, "random, celf, gatk, spec-pr or rl-ris")
        ->required()
        ->check(CLI::IsMember(known_baselines()));
    baseline->add_option("-k,--budget", base_k, "seed budget")->required();
    baseline->add_option("--model", base_model, "ground-truth model JSON (celf)");
    baseline->add_option("--checkpoint", base_ckpt, "trained model JSON (gatk, rl-ris)");
    baseline->add_option("--weights", base_weights, "weighted edge file (rl-ris, instead of --checkpoint)");
    baseline->add_option("-R,--replications", base_r, "live-edge worlds for celf");
    baseline->add_option("--rr-sets", base_theta, "RR-set count for rl-ris");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run the full experiment and write the report");
    bool pipe_quiet = false;
    pipeline->add_flag("--quiet", pipe_quiet, "no progress on stderr");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = base_config(glob);
        const Seed master = cfg.master_seed;

        if (gen_graph->parsed()) {
            if (glob.out.empty()) {
                throw ParameterError("gen-graph needs --out for the edge list");
            }
            cfg.edges.clear();
            const AttributedGraph g = load_or_make_graph(cfg);
            save_attributed_graph(g, glob.out, feature_out);
        } else if (gen_model->parsed()) {
            cfg = with_graph(cfg, model_graph);
            if (!model_kind.empty()) {
                cfg.model_kind = parse_model_kind(model_kind);
            }
            if (calibration) {
                cfg.calibration = *calibration;
            }
            cfg.model_path.clear();
            const AttributedGraph g = load_or_make_graph(cfg);
            const DiffusionModel m = load_or_make_model(cfg, g);
            to_output(glob.out, [&](std::ostream& o) { o << model_to_json(m).dump(2) << '\n'; });
        } else if (gen_casc->parsed()) {
            cfg = with_graph(cfg, casc_graph);
            cfg.model_path = casc_model;
            cfg.dataset_path.clear();
            if (casc_size) {
                cfg.dataset_size = *casc_size;
            }
            const AttributedGraph g = load_or_make_graph(cfg);
            const DiffusionModel m = load_or_make_model(cfg, g);
            const GeneratedDataset d = load_or_make_dataset(cfg, g, m);
            if (d.exhausted) {
                std::cerr << "warning: cascade cap reached before " << cfg.dataset_size << " pairs\n";
            }
            to_output(glob.out, [&](std::ostream& o) { write_diffusion_dataset(o, d.dataset); });
        } else if (train->parsed()) {
            cfg = with_graph(cfg, train_graph);
            if (train_epochs) {
                cfg.train.epochs = *train_epochs;
            }
            const AttributedGraph g = load_or_make_graph(cfg);
            const DiffusionDataset ds = load_diffusion_dataset(train_data, g);
            const auto t0 = std::chrono::steady_clock::now();
            EpochCallback cb;
            if (!train_quiet) {
                cb = [](std::size_t epoch, double loss) {
                    std::cerr << "epoch " << epoch << " loss " << detail::format_real(loss) << '\n';
                };
            }
            const TrainResult r = train_relation_model(g, ds, stage_train_config(cfg), cb);
            std::cerr << "trained on " << r.positives << " context pairs in "
                      << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
            to_output(glob.out, [&](std::ostream& o) { o << attention_model_to_json(r.model).dump(2) << '\n'; });
        } else if (extract->parsed()) {
            cfg = with_graph(cfg, extract_graph);
            const AttributedGraph g = load_or_make_graph(cfg);
            const WeightedGraph wg = extract_edge_weights(load_checkpoint(extract_ckpt), g);
            to_output(glob.out, [&](std::ostream& o) { write_weighted_graph(o, g, wg); });
        } else if (cluster->parsed()) {
            cfg = with_graph(cfg, cluster_graph);
            const AttributedGraph g = load_or_make_graph(cfg);
            const ClusterResult cr = spectral_cluster(g, load_weights_or_uniform(cluster_weights, g), cluster_k,
                                                      cell_seed(master, "cluster", cluster_k));
            std::cerr << "ncut " << detail::format_real(cr.ncut) << '\n';
            to_output(glob.out, [&](std::ostream& o) { write_partition(o, cr.partition); });
        } else if (select->parsed()) {
            cfg = with_graph(cfg, select_graph);
            const AttributedGraph g = load_or_make_graph(cfg);
            auto in = detail::open_input(select_partition);
            const Partition p = parse_partition(in, g.node_count());
            const SeedSet s = select_seeds(g, p, allocate_budget(p, select_k), strategy_measure(select_strategy));
            if (s.shortfall > 0) {
                std::cerr << "warning: " << s.shortfall << " seeds short, communities too small\n";
            }
            to_output(glob.out, [&](std::ostream& o) { write_seed_set(o, s); });
        } else if (evaluate->parsed()) {
            cfg = with_graph(cfg, eval_graph);
            const AttributedGraph g = load_or_make_graph(cfg);
            DiffusionModel m = load_model(eval_model);
            m.check_graph(g);
            auto in = detail::open_input(eval_seeds);
            const NodeSet seeds = parse_seed_set(in).sorted();
            for (NodeId v : seeds) {
                if (v >= g.node_count()) {
                    throw ValidationError("seed " + std::to_string(v) + " is not a node");
                }
            }
            const std::size_t R = eval_r.value_or(cfg.replications);
            const std::size_t reps = eval_repeats.value_or(cfg.repeats);
            const auto t0 = std::chrono::steady_clock::now();
            const InfluenceEstimate est = estimate_influence(g, m, seeds, R, reps, stage_seed(master, "evaluate"));
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            to_output(glob.out, [&](std::ostream& o) {
                if (eval_header) {
                    o << "seeds_hash,mean,std,replications,repeats,wall_ms\n";
                }
                o << seeds_hash(seeds) << ',' << detail::format_real(est.mean) << ',' << detail::format_real(est.std)
                  << ',' << R << ',' << reps << ',' << detail::fixed(ms, 3) << '\n';
            });
        } else if (baseline->parsed()) {
            cfg = with_graph(cfg, base_graph);
            const AttributedGraph g = load_or_make_graph(cfg);
            const Seed s = cell_seed(master, "select:" + base_name, base_k);
            SeedSet out;
            if (base_name == "random") {
                out = random_seeds(g.node_count(), base_k, s);
            } else if (base_name == "celf") {
                if (base_model.empty()) {
                    throw ParameterError("celf needs --model");
                }
                DiffusionModel m = load_model(base_model);
                out = celf_greedy(g, m, base_k, base_r.value_or(cfg.celf_replications), s);
            } else if (base_name == "spec-pr") {
                out = spec_pr_select(g, base_k, s);
            } else if (base_name == "gatk") {
                if (base_ckpt.empty()) {
                    throw ParameterError("gatk needs --checkpoint");
                }
                out = gatk_select(gat_forward(load_checkpoint(base_ckpt), g).embeddings, base_k, s);
            } else {
                WeightedGraph wg;
                if (!base_weights.empty()) {
                    wg = load_weights_or_uniform(base_weights, g);
                } else if (!base_ckpt.empty()) {
                    wg = extract_edge_weights(load_checkpoint(base_ckpt), g);
                } else {
                    throw ParameterError("rl-ris needs --checkpoint or --weights");
                }
                const std::size_t theta = base_theta.value_or(cfg.rr_sets ? cfg.rr_sets : default_rr_count(g.node_count()));
                const RisResult r = rl_ris_select(g, wg, base_k, theta, s);
                std::cerr << "rr-set influence estimate " << detail::format_real(r.influence) << '\n';
                out = r.seeds;
            }
            to_output(glob.out, [&](std::ostream& o) { write_seed_set(o, out); });
        } else if (pipeline->parsed()) {
            ProgressSink sink;
            if (!pipe_quiet) {
                sink = [](const std::string& msg) { std::cerr << msg << '\n'; };
            }
            const RunReport report = run_pipeline(cfg, sink);
            emit_report(report, cfg.output_dir, cfg.write_seeds);
            std::cout << render_report(report, true);
        }
    } catch (const dscom::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
