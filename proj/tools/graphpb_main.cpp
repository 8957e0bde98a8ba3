// graphpb: command-line front door for the prosody-boundary graph pipeline.
// Subcommands: parse, graph, encode, train-toy, gradcheck, fixtures, stats.
// Exit codes: 0 ok, 1 internal error, 2 input error, 3 gradcheck failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphpb/graphpb.hpp"

namespace {

using namespace graphpb;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitGradcheck = 3;

struct MarkerFlags {
    std::string pw = "#1", pph = "#2", iph = "#3", utter = "#4";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--pw-marker", pw, "prosodic word marker");
        cmd->add_option("--pph-marker", pph, "prosodic phrase marker");
        cmd->add_option("--iph-marker", iph, "intonation phrase marker");
        cmd->add_option("--utter-marker", utter, "utterance end marker");
    }

    MarkerScheme scheme() const { return MarkerScheme{pw, pph, iph, utter}; }
};

// Owns the stream behind `in`; stdin when no path was given.
struct InputSource {
    std::istream* in = nullptr;
    std::ifstream file;

    explicit InputSource(const std::string& path) {
        if (path.empty() || path == "-") {
            in = &std::cin;
            return;
        }
        file.open(path);
        if (!file) throw IoError("cannot open input file: " + path);
        in = &file;
    }
};

std::vector<AnnotatedUtterance> read_utterances(const std::string& path, bool corpus,
                                                const MarkerScheme& scheme) {
    InputSource src(path);
    std::vector<AnnotatedUtterance> out;
    if (corpus) {
        CorpusReader reader(*src.in, scheme);
        while (auto utt = reader.next()) out.push_back(std::move(*utt));
        return out;
    }
    std::string line;
    while (std::getline(*src.in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        AnnotatedUtterance utt;
        utt.raw = line;
        out.push_back(std::move(utt));
    }
    return out;
}

EdgeConfig edge_config_from(const std::string& edges_flag, const std::string& pairs_flag) {
    EdgeConfig cfg;
    cfg.include_pph = cfg.include_iph = cfg.include_seq = false;
    std::istringstream in(edges_flag);
    std::string kind;
    while (std::getline(in, kind, ',')) {
        if (kind == "pph") cfg.include_pph = true;
        else if (kind == "iph") cfg.include_iph = true;
        else if (kind == "seq") cfg.include_seq = true;
        else throw ConfigError("--edges: unknown kind \"" + kind + "\"");
    }
    if (pairs_flag == "consecutive") cfg.iph_pair_mode = IphPairMode::consecutive_pphs;
    else if (pairs_flag == "all") cfg.iph_pair_mode = IphPairMode::all_pph_pairs;
    else throw ConfigError("--iph-pairs: expected consecutive|all");
    cfg.validate();
    return cfg;
}

// --- subcommand option bags ---

struct ParseOpts {
    std::string input;
    bool corpus = false;
    MarkerFlags markers;
};

struct GraphOpts {
    std::string input;
    bool corpus = false;
    MarkerFlags markers;
    std::string edges = "pph,seq";
    std::string iph_pairs = "consecutive";
    std::string emit = "json";
};

struct EncodeOpts {
    std::string input;
    std::string encoder = "ggnn";
    int dim = 16;
    int steps = 3;
    int layers = 2;
    std::uint64_t seed = 42;
    bool normalize_gcn = false;
    bool per_kind_messages = false;
    int drift = 0;
};

struct TrainOpts {
    std::string config_path;
    // Flag overrides on top of the config file; applied only when given.
    std::string encoder;
    std::string fusion;
    int dim = 0;
    int steps = 0;
    int layers = 0;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int iterations = 0;
};

struct GradcheckOpts {
    int dim = 4;
    std::uint64_t seed = 42;
};

struct FixturesOpts {
    std::string out_dir = ".";
};

struct StatsOpts {
    std::string input;
    bool corpus = false;
    MarkerFlags markers;
    std::string edges = "pph,seq";
    std::string iph_pairs = "consecutive";
};

int run_parse(const ParseOpts& opts) {
    const MarkerScheme scheme = opts.markers.scheme();
    for (const auto& utt : read_utterances(opts.input, opts.corpus, scheme)) {
        nlohmann::json j = tree_to_json_value(parse_utterance(utt, scheme));
        if (!utt.id.empty()) j["id"] = utt.id;
        std::cout << j.dump() << "\n";
    }
    return kExitOk;
}

int run_graph(const GraphOpts& opts) {
    const MarkerScheme scheme = opts.markers.scheme();
    const EdgeConfig cfg = edge_config_from(opts.edges, opts.iph_pairs);
    const GraphFormat format = opts.emit == "dot" ? GraphFormat::dot : GraphFormat::json;
    if (opts.emit != "dot" && opts.emit != "json")
        throw ConfigError("--emit: expected json|dot");
    for (const auto& utt : read_utterances(opts.input, opts.corpus, scheme)) {
        const ProsodyGraph g = build_graph(parse_utterance(utt, scheme), cfg);
        std::cout << export_graph(g, format);
        if (format == GraphFormat::json) std::cout << "\n";
    }
    return kExitOk;
}

int run_encode(const EncodeOpts& opts) {
    EncoderConfig cfg;
    cfg.kind = encoder_kind_from_string(opts.encoder);
    cfg.dim = opts.dim;
    cfg.steps = opts.steps;
    cfg.layers = opts.layers;
    cfg.normalize_gcn = opts.normalize_gcn;
    cfg.per_kind_messages = opts.per_kind_messages;
    cfg.validate();
    Rng rng(opts.seed);
    const EncoderParams params = init_encoder_params(cfg, rng);

    InputSource src(opts.input);
    std::string line;
    while (std::getline(*src.in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const ProsodyGraph g = import_graph(line, GraphFormat::json);
        const Tensor h = encode(g, cfg, params, opts.seed);
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < h.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int j = 0; j < h.cols(); ++j) row.push_back(h.at(i, j));
            rows.push_back(std::move(row));
        }
        std::cout << rows.dump() << "\n";
        if (opts.drift > 0) {
            std::cerr << "drift";
            for (double d : propagation_drift(g, cfg, params, opts.seed, opts.drift))
                std::cerr << " " << d;
            std::cerr << "\n";
        }
    }
    return kExitOk;
}

int run_train(const TrainOpts& opts) {
    std::ifstream in(opts.config_path);
    if (!in) throw IoError("cannot open config file: " + opts.config_path);
    TrainFileConfig cfg = parse_train_config(in);
    if (!opts.encoder.empty())
        cfg.train.encoder.kind = encoder_kind_from_string(opts.encoder);
    if (!opts.fusion.empty()) cfg.train.fusion = fusion_mode_from_string(opts.fusion);
    if (opts.dim > 0) cfg.train.encoder.dim = opts.dim;
    if (opts.steps > 0) cfg.train.encoder.steps = opts.steps;
    if (opts.layers > 0) cfg.train.encoder.layers = opts.layers;
    if (opts.has_seed) cfg.train.seed = opts.seed;
    if (opts.iterations > 0) cfg.train.iterations = opts.iterations;
    if (cfg.data_path.empty()) throw ConfigError("config is missing data=<jsonl path>");
    ToyTrainer trainer(cfg.train, load_dataset(cfg.data_path));
    const TrainReport report = trainer.run();

    nlohmann::json summary{{"iterations", cfg.train.iterations},
                           {"initial_loss", report.initial_loss()},
                           {"final_loss", report.final_loss()}};
    if (cfg.report_path.empty()) {
        write_report_csv(report, std::cout);
        std::cerr << summary.dump() << "\n";
    } else {
        std::ofstream out(cfg.report_path);
        if (!out) throw IoError("cannot open report file: " + cfg.report_path);
        write_report_csv(report, out);
        std::cout << summary.dump() << "\n";
    }
    return kExitOk;
}

int run_gradcheck(const GradcheckOpts& opts) {
    const int d = opts.dim;
    Rng rng(opts.seed);
    const ProsodyGraph graph = fixtures::u2_graph();
    const Tensor h0 = init_node_embeddings(graph, d, opts.seed);
    constexpr double kTolerance = 1e-4;
    bool ok = true;

    const auto report = [&](const std::string& name, const GradCheckResult& r) {
        const bool pass = r.max_rel_error < kTolerance;
        ok = ok && pass;
        std::cout << name << " max_rel_err=" << r.max_rel_error << " entries="
                  << r.entries_checked << (pass ? " PASS" : " FAIL") << "\n";
    };

    {
        GcnParams p = init_gcn_params(d, d, d, rng);
        const Tensor a = adjacency_tensor(graph);
        report("gcn_layer", gradcheck({&p.w0, &p.w1},
                                      [&] { return sum_all(gcn_forward(h0, a, p)); }));
    }
    {
        GgnnParams p = init_ggnn_params(d, rng);
        report("ggnn_step",
               gradcheck(p.tensors(), [&] { return sum_all(ggnn_step(h0, graph, p)); }));
    }
    {
        GlstmParams p = init_glstm_params(d, rng);
        const Tensor c0 = Tensor::zeros(graph.node_count(), d);
        report("glstm_step", gradcheck(p.tensors(), [&] {
                   return sum_all(glstm_step(h0, c0, graph, p).first);
               }));
    }
    {
        DecoderParams p = init_decoder_params(d, d, d, d, rng);
        EncodingMemory mem;
        mem.m = h0;
        mem.pb_dim = d;
        Tensor target = Tensor::random_uniform(2, d, -0.5, 0.5, rng);
        // Composite losses use a wider step: h = 1e-5 hits roundoff noise on
        // near-zero gradient entries.
        report("attention_decoder",
               gradcheck(
                   p.tensors(),
                   [&] { return mse_loss(decode(mem, p, 2, &target).mel.frames, target); },
                   1e-4));
    }
    {
        EncoderConfig cfg{EncoderKind::GGNN, d, 1, 1};
        EncoderParams enc = init_encoder_params(cfg, rng);
        DecoderParams dec = init_decoder_params(d, d, d, d, rng);
        Tensor target = Tensor::random_uniform(2, d, -0.5, 0.5, rng);
        std::vector<Tensor*> params = enc.tensors();
        auto dt = dec.tensors();
        params.insert(params.end(), dt.begin(), dt.end());
        report("end_to_end_toy",
               gradcheck(
                   params,
                   [&] {
                       const Tensor h_pb = encode_from(graph, cfg, enc, h0);
                       const EncodingMemory mem =
                           fuse(h_pb, Tensor(), {}, FusionMode::pb_only);
                       return mse_loss(decode(mem, dec, 2, &target).mel.frames, target);
                   },
                   1e-4));
    }
    return ok ? kExitOk : kExitGradcheck;
}

int run_fixtures(const FixturesOpts& opts) {
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + opts.out_dir);
    const auto write = [&](const std::string& name, const ProsodyGraph& g) {
        const std::string path = opts.out_dir + "/" + name;
        std::ofstream out(path);
        if (!out) throw IoError("cannot write fixture: " + path);
        out << export_graph(g, GraphFormat::json) << "\n";
        std::cerr << "wrote " << path << "\n";
    };
    write("U1.json", fixtures::u1_graph());
    write("U2.json", fixtures::u2_graph());
    write("figure2.json", fixtures::figure2_graph());
    return kExitOk;
}

int run_stats(const StatsOpts& opts) {
    const MarkerScheme scheme = opts.markers.scheme();
    const EdgeConfig cfg = edge_config_from(opts.edges, opts.iph_pairs);
    std::size_t utterances = 0, pws = 0, pphs = 0, iphs = 0;
    std::size_t pph_edges = 0, iph_edges = 0, seq_edges = 0, total_edges = 0;
    for (const auto& utt : read_utterances(opts.input, opts.corpus, scheme)) {
        const ProsodyTree tree = parse_utterance(utt, scheme);
        ++utterances;
        pws += tree.pw_count();
        pphs += tree.pph_count();
        iphs += tree.iph_count();
        const ProsodyGraph g = build_graph(tree, cfg);
        total_edges += g.edges.size();
        for (const auto& e : g.edges) {
            if (e.kinds.has(EdgeKind::PPH)) ++pph_edges;
            if (e.kinds.has(EdgeKind::IPH)) ++iph_edges;
            if (e.kinds.has(EdgeKind::SEQ)) ++seq_edges;
        }
    }
    if (utterances == 0) throw RecordFormatError("no utterances in input");
    nlohmann::json j{
        {"utterances", utterances},
        {"pw", pws},
        {"pph", pphs},
        {"iph", iphs},
        {"pw_per_pph", static_cast<double>(pws) / static_cast<double>(pphs)},
        {"pph_per_iph", static_cast<double>(pphs) / static_cast<double>(iphs)},
        {"edges",
         {{"total", total_edges}, {"pph", pph_edges}, {"iph", iph_edges},
          {"seq", seq_edges}}}};
    std::cout << j.dump() << "\n";
    return kExitOk;
}

int classify_error(const std::exception& e) {
    if (dynamic_cast<const ShapeMismatch*>(&e) || dynamic_cast<const NotScalarLoss*>(&e) ||
        dynamic_cast<const DetachedTensor*>(&e))
        return kExitInternal;
    if (dynamic_cast<const Error*>(&e)) return kExitInput;
    return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphpb: prosody-boundary graphs and graph-to-sequence encoding"};
    app.require_subcommand(1);

    ParseOpts parse_opts;
    auto* parse_cmd = app.add_subcommand("parse", "annotated text -> prosody tree JSON");
    parse_cmd->add_option("input", parse_opts.input, "input file (default stdin)");
    parse_cmd->add_flag("--corpus", parse_opts.corpus, "input is a corpus file with ids");
    parse_opts.markers.add_to(parse_cmd);

    GraphOpts graph_opts;
    auto* graph_cmd = app.add_subcommand("graph", "annotated text -> prosody graph");
    graph_cmd->add_option("input", graph_opts.input, "input file (default stdin)");
    graph_cmd->add_flag("--corpus", graph_opts.corpus, "input is a corpus file with ids");
    graph_cmd->add_option("--edges", graph_opts.edges, "edge kinds: pph[,iph][,seq]");
    graph_cmd->add_option("--iph-pairs", graph_opts.iph_pairs,
                          "IPH phrase pairing: consecutive|all");
    graph_cmd->add_option("--emit", graph_opts.emit, "output format: json|dot");
    graph_opts.markers.add_to(graph_cmd);

    EncodeOpts encode_opts;
    auto* encode_cmd = app.add_subcommand("encode", "graph JSON -> H_PB matrix JSON");
    encode_cmd->add_option("input", encode_opts.input, "graph JSONL file (default stdin)");
    encode_cmd->add_option("--encoder", encode_opts.encoder, "gcn|ggnn|glstm");
    encode_cmd->add_option("--dim", encode_opts.dim, "embedding width");
    encode_cmd->add_option("--steps", encode_opts.steps, "propagation steps per layer");
    encode_cmd->add_option("--layers", encode_opts.layers, "stacked layers (1-3)");
    encode_cmd->add_option("--seed", encode_opts.seed, "random seed");
    encode_cmd->add_flag("--normalize-gcn", encode_opts.normalize_gcn,
                         "self-loops + symmetric normalization for GCN");
    encode_cmd->add_flag("--per-kind-messages", encode_opts.per_kind_messages,
                         "GGNN: one message weight per edge kind");
    encode_cmd->add_option("--drift", encode_opts.drift,
                           "report |H(t+1)-H(t)| for this many steps to stderr");

    TrainOpts train_opts;
    auto* train_cmd = app.add_subcommand("train-toy", "desk-scale training run");
    train_cmd->add_option("--config", train_opts.config_path, "key=value config file")
        ->required();
    train_cmd->add_option("--encoder", train_opts.encoder,
                          "override config: gcn|ggnn|glstm");
    train_cmd->add_option("--fusion", train_opts.fusion,
                          "override config: pb_only|concat|append_rows");
    train_cmd->add_option("--dim", train_opts.dim, "override config: encoder width");
    train_cmd->add_option("--steps", train_opts.steps, "override config: steps per layer");
    train_cmd->add_option("--layers", train_opts.layers, "override config: layer count");
    train_cmd->add_option("--iterations", train_opts.iterations,
                          "override config: iteration count");
    auto* seed_opt = train_cmd->add_option("--seed", train_opts.seed,
                                           "override config: random seed");
    train_cmd->callback([&train_opts, seed_opt] {
        train_opts.has_seed = seed_opt->count() > 0;
    });

    GradcheckOpts grad_opts;
    auto* grad_cmd = app.add_subcommand("gradcheck",
                                        "finite-difference gradient verification");
    grad_cmd->add_option("--dim", grad_opts.dim, "layer width");
    grad_cmd->add_option("--seed", grad_opts.seed, "random seed");

    FixturesOpts fixtures_opts;
    auto* fixtures_cmd = app.add_subcommand("fixtures",
                                            "write U1.json, U2.json, figure2.json");
    fixtures_cmd->add_option("--out-dir", fixtures_opts.out_dir, "output directory");

    StatsOpts stats_opts;
    auto* stats_cmd = app.add_subcommand("stats", "corpus statistics JSON");
    stats_cmd->add_option("input", stats_opts.input, "input file (default stdin)");
    stats_cmd->add_flag("--corpus", stats_opts.corpus, "input is a corpus file with ids");
    stats_cmd->add_option("--edges", stats_opts.edges, "edge kinds: pph[,iph][,seq]");
    stats_cmd->add_option("--iph-pairs", stats_opts.iph_pairs, "consecutive|all");
    stats_opts.markers.add_to(stats_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help exits 0 through here; anything else is bad input.
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*parse_cmd) return run_parse(parse_opts);
        if (*graph_cmd) return run_graph(graph_opts);
        if (*encode_cmd) return run_encode(encode_opts);
        if (*train_cmd) return run_train(train_opts);
        if (*grad_cmd) return run_gradcheck(grad_opts);
        if (*fixtures_cmd) return run_fixtures(fixtures_opts);
        if (*stats_cmd) return run_stats(stats_opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_error(e);
    }
    return kExitInternal;
}
