#ifndef DSCOM_CONFIG_HPP
#define DSCOM_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dscom/cascade.hpp"
#include "dscom/diffusion_model.hpp"
#include "dscom/error.hpp"
#include "dscom/graph.hpp"
#include "dscom/relation_learning.hpp"
#include "dscom/rng.hpp"
#include "dscom/seed_selection.hpp"
#include "dscom/synthetic.hpp"

namespace dscom {

/// Everything one experiment run needs. Every field has a default; an empty config runs the
/// synthetic setting end to end.
struct RunConfig {
    Seed master_seed = 1;
    std::string output_dir = "dscom-out";
    bool write_seeds = false;

    // graph: an edge list on disk, or the synthetic generator when `edges` is empty
    std::string edges;
    std::string features;
    bool undirected = false;
    bool relabel = false;
    /// With `relabel`, the "id label" map is written here when non-empty.
    std::string label_map;
    SyntheticGraphConfig synthetic;

    // ground-truth model: loaded from `model_path` or generated
    ModelKind model_kind = ModelKind::PIC;
    double calibration = 0.1;
    std::string model_path;

    // diffusion dataset: loaded from `dataset_path` or generated with `dataset_size` pairs
    std::size_t dataset_size = 1000;
    double seed_fraction = 0.01;
    std::string dataset_path;

    TrainConfig train;

    std::vector<std::size_t> budgets{10};
    std::vector<std::string> strategies{"D-PR"};
    std::vector<std::string> baselines{"random"};
    std::size_t celf_replications = 1000;
    /// 0 means the default of 20 n ln n.
    std::size_t rr_sets = 0;

    std::size_t replications = 1000;
    std::size_t repeats = 10;

    void validate() const;
};

inline const std::vector<std::string>& known_baselines()
{
    static const std::vector<std::string> names{"random", "celf", "gatk", "spec-pr", "rl-ris"};
    return names;
}

inline bool is_baseline(std::string_view name)
{
    for (const auto& b : known_baselines()) {
        if (b == name) {
            return true;
        }
    }
    return false;
}

inline void RunConfig::validate() const
{
    for (auto k : budgets) {
        if (k < 1) {
            throw ParameterError("budgets must be >= 1");
        }
    }
    for (const auto& s : strategies) {
        if (!is_community_strategy(s)) {
            throw ParameterError("unknown strategy '" + s + "' (expected D-D, D-K, D-PR or D-C)");
        }
    }
    for (const auto& b : baselines) {
        if (!is_baseline(b)) {
            throw ParameterError("unknown baseline '" + b + "' (expected random, celf, gatk, spec-pr or rl-ris)");
        }
    }
    if (replications < 1 || repeats < 1 || celf_replications < 1) {
        throw ParameterError("replication counts must be >= 1");
    }
    if (!(calibration > 0.0 && calibration < 1.0)) {
        throw ParameterError("calibration must lie in (0,1)");
    }
    if (dataset_size < 1) {
        throw ParameterError("dataset size must be >= 1");
    }
    train.validate();
    for (const auto* path : {&edges, &features, &model_path, &dataset_path}) {
        if (!path->empty() && !std::ifstream(*path)) {
            throw IoError("cannot open '" + *path + "'");
        }
    }
    if (!features.empty() && edges.empty()) {
        throw ParameterError("a feature table needs an edge list");
    }
}

// ---------------------------------------------------------------------------------------------
// TOML-style documents: [section] headers, `key = value` lines, '#' comments. Values are
// quoted strings, integers, reals, true/false, or one-line arrays of those.

namespace detail {

inline std::string strip_comment(std::string_view line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == '#' && !quoted) {
            return std::string(line.substr(0, i));
        }
    }
    return std::string(line);
}

struct ConfigValue {
    std::string raw;
    std::size_t line = 0;
    std::string key;

    [[noreturn]] void fail(const std::string& expected) const
    {
        throw ParseError("'" + key + "' expects " + expected + ", got '" + raw + "'", line);
    }

    std::string as_string() const
    {
        if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
            fail("a quoted string");
        }
        return raw.substr(1, raw.size() - 2);
    }

    std::size_t as_size() const
    {
        auto v = parse_index(raw);
        if (!v) {
            fail("a non-negative integer");
        }
        return *v;
    }

    double as_real() const
    {
        auto v = parse_real(raw);
        if (!v) {
            fail("a number");
        }
        return *v;
    }

    bool as_bool() const
    {
        if (raw == "true") return true;
        if (raw == "false") return false;
        fail("true or false");
    }

    std::vector<ConfigValue> as_list() const
    {
        if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') {
            fail("an array");
        }
        std::vector<ConfigValue> items;
        std::string_view body(raw);
        body = body.substr(1, body.size() - 2);
        std::size_t start = 0;
        bool quoted = false;
        for (std::size_t i = 0; i <= body.size(); ++i) {
            if (i < body.size() && body[i] == '"') {
                quoted = !quoted;
            }
            if (i == body.size() || (body[i] == ',' && !quoted)) {
                auto item = trim(body.substr(start, i - start));
                if (!item.empty()) {
                    items.push_back({std::string(item), line, key});
                } else if (i < body.size()) {
                    fail("an array without empty elements");
                }
                start = i + 1;
            }
        }
        return items;
    }
};

} // namespace detail

/// Parses a document into "section.key" -> value.
inline std::map<std::string, detail::ConfigValue> parse_config_document(std::istream& in)
{
    std::map<std::string, detail::ConfigValue> out;
    std::string section;
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string stripped = detail::strip_comment(raw);
        const auto line = detail::trim(stripped);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError("unterminated section header", line_no);
            }
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section.empty()) {
                throw ParseError("empty section name", line_no);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("expected 'key = value'", line_no);
        }
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string value(detail::trim(line.substr(eq + 1)));
        if (key.empty() || value.empty()) {
            throw ParseError("expected 'key = value'", line_no);
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full)) {
            throw ParseError("duplicate key '" + full + "'", line_no);
        }
        out[full] = detail::ConfigValue{value, line_no, full};
    }
    return out;
}

inline RunConfig parse_run_config(std::istream& in)
{
    RunConfig c;
    const auto doc = parse_config_document(in);
    auto& t = c.train;
    auto& a = c.train.architecture;
    auto& s = c.synthetic;
    for (const auto& [key, v] : doc) {
        if (key == "run.seed" || key == "seed") c.master_seed = v.as_size();
        else if (key == "run.out" || key == "out") c.output_dir = v.as_string();
        else if (key == "run.write_seeds") c.write_seeds = v.as_bool();
        else if (key == "graph.edges") c.edges = v.as_string();
        else if (key == "graph.features") c.features = v.as_string();
        else if (key == "graph.undirected") c.undirected = v.as_bool();
        else if (key == "graph.relabel") c.relabel = v.as_bool();
        else if (key == "graph.label_map") c.label_map = v.as_string();
        else if (key == "graph.nodes") s.node_count = v.as_size();
        else if (key == "graph.communities") s.communities = v.as_size();
        else if (key == "graph.mean_degree") s.mean_degree = v.as_real();
        else if (key == "graph.mixing") s.mixing = v.as_real();
        else if (key == "graph.degree_exponent") s.degree_exponent = v.as_real();
        else if (key == "graph.feature_dim") s.feature_dim = v.as_size();
        else if (key == "graph.feature_noise") s.feature_noise = v.as_real();
        else if (key == "model.kind") c.model_kind = parse_model_kind(v.as_string());
        else if (key == "model.calibration") c.calibration = v.as_real();
        else if (key == "model.path") c.model_path = v.as_string();
        else if (key == "dataset.size") c.dataset_size = v.as_size();
        else if (key == "dataset.seed_fraction") c.seed_fraction = v.as_real();
        else if (key == "dataset.path") c.dataset_path = v.as_string();
        else if (key == "train.epochs") t.epochs = v.as_size();
        else if (key == "train.learning_rate") t.learning_rate = v.as_real();
        else if (key == "train.momentum") t.momentum = v.as_real();
        else if (key == "train.negatives") t.negatives = v.as_size();
        else if (key == "train.window") t.window = v.as_size();
        else if (key == "train.batch_size") t.batch_size = v.as_size();
        else if (key == "train.walks_per_pair") t.walks_per_pair = v.as_size();
        else if (key == "train.max_chain_length") t.max_chain_length = v.as_size();
        else if (key == "train.max_grad_norm") t.max_grad_norm = v.as_real();
        else if (key == "train.layers") a.layers = v.as_size();
        else if (key == "train.hidden_heads") a.hidden_heads = v.as_size();
        else if (key == "train.hidden_dim") a.hidden_dim = v.as_size();
        else if (key == "train.output_heads") a.output_heads = v.as_size();
        else if (key == "train.output_dim") a.output_dim = v.as_size();
        else if (key == "train.leaky_slope") a.leaky_slope = v.as_real();
        else if (key == "select.budgets") {
            c.budgets.clear();
            for (const auto& item : v.as_list()) c.budgets.push_back(item.as_size());
        } else if (key == "select.strategies") {
            c.strategies.clear();
            for (const auto& item : v.as_list()) c.strategies.push_back(item.as_string());
        } else if (key == "select.baselines") {
            c.baselines.clear();
            for (const auto& item : v.as_list()) c.baselines.push_back(item.as_string());
        } else if (key == "select.celf_replications") c.celf_replications = v.as_size();
        else if (key == "select.rr_sets") c.rr_sets = v.as_size();
        else if (key == "evaluate.replications") c.replications = v.as_size();
        else if (key == "evaluate.repeats") c.repeats = v.as_size();
        else throw ParseError("unknown key '" + key + "'", v.line);
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path)
{
    auto in = detail::open_input(path);
    return parse_run_config(in);
}

namespace detail {

inline std::string quote(const std::string& s) { return "\"" + s + "\""; }

template <typename T, typename F>
std::string toml_list(const std::vector<T>& xs, F&& fmt)
{
    std::string out = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? ", " : "") + fmt(xs[i]);
    }
    return out + "]";
}

} // namespace detail

/// Canonical document for a config; parse_run_config(to_toml(c)) reproduces c.
inline std::string to_toml(const RunConfig& c)
{
    using detail::format_real;
    using detail::quote;
    std::ostringstream o;
    const auto& t = c.train;
    const auto& a = c.train.architecture;
    const auto& s = c.synthetic;
    o << "[run]\nseed = " << c.master_seed << "\nout = " << quote(c.output_dir)
      << "\nwrite_seeds = " << (c.write_seeds ? "true" : "false") << "\n\n";
    o << "[graph]\n";
    if (!c.edges.empty()) {
        o << "edges = " << quote(c.edges) << '\n';
    }
    if (!c.features.empty()) {
        o << "features = " << quote(c.features) << '\n';
    }
    if (!c.label_map.empty()) {
        o << "label_map = " << quote(c.label_map) << '\n';
    }
    o << "undirected = " << (c.undirected ? "true" : "false") << "\nrelabel = " << (c.relabel ? "true" : "false")
      << "\nnodes = " << s.node_count << "\ncommunities = " << s.communities
      << "\nmean_degree = " << format_real(s.mean_degree) << "\nmixing = " << format_real(s.mixing)
      << "\ndegree_exponent = " << format_real(s.degree_exponent) << "\nfeature_dim = " << s.feature_dim
      << "\nfeature_noise = " << format_real(s.feature_noise) << "\n\n";
    o << "[model]\nkind = " << quote(std::string(to_string(c.model_kind)))
      << "\ncalibration = " << format_real(c.calibration) << '\n';
    if (!c.model_path.empty()) {
        o << "path = " << quote(c.model_path) << '\n';
    }
    o << "\n[dataset]\nsize = " << c.dataset_size << "\nseed_fraction = " << format_real(c.seed_fraction) << '\n';
    if (!c.dataset_path.empty()) {
        o << "path = " << quote(c.dataset_path) << '\n';
    }
    o << "\n[train]\nepochs = " << t.epochs << "\nlearning_rate = " << format_real(t.learning_rate)
      << "\nmomentum = " << format_real(t.momentum) << "\nnegatives = " << t.negatives << "\nwindow = " << t.window
      << "\nbatch_size = " << t.batch_size << "\nwalks_per_pair = " << t.walks_per_pair
      << "\nmax_chain_length = " << t.max_chain_length << "\nmax_grad_norm = " << format_real(t.max_grad_norm)
      << "\nlayers = " << a.layers
      << "\nhidden_heads = " << a.hidden_heads << "\nhidden_dim = " << a.hidden_dim
      << "\noutput_heads = " << a.output_heads << "\noutput_dim = " << a.output_dim
      << "\nleaky_slope = " << format_real(a.leaky_slope) << "\n\n";
    o << "[select]\nbudgets = " << detail::toml_list(c.budgets, [](std::size_t k) { return std::to_string(k); })
      << "\nstrategies = " << detail::toml_list(c.strategies, quote)
      << "\nbaselines = " << detail::toml_list(c.baselines, quote) << "\ncelf_replications = " << c.celf_replications
      << "\nrr_sets = " << c.rr_sets << "\n\n";
    o << "[evaluate]\nreplications = " << c.replications << "\nrepeats = " << c.repeats << '\n';
    return o.str();
}

} // namespace dscom

#endif
