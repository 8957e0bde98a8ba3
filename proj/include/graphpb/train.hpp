#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "graphpb/encoders.hpp"
#include "graphpb/errors.hpp"
#include "graphpb/g2s.hpp"
#include "graphpb/graph.hpp"
#include "graphpb/graph_io.hpp"
#include "graphpb/optim.hpp"
#include "graphpb/rng.hpp"
#include "graphpb/tensor.hpp"

namespace graphpb {

// One training record: prosody graph, optional phoneme tokens for the chain
// graph, and the target mel frames.
struct ToyExample {
    std::string id;
    ProsodyGraph graph;
    std::vector<std::string> phonemes;
    Tensor mel;  // T x mel_dim
};

struct TrainConfig {
    EncoderConfig encoder{EncoderKind::GGNN, 8, 2, 1};
    EncoderConfig seq_encoder{EncoderKind::GGNN, 8, 2, 1};
    FusionMode fusion = FusionMode::pb_only;
    int mel_dim = 80;
    int att_dim = 16;
    int cell_dim = 16;
    int iterations = 500;
    int batch_size = 4;  // full-corpus training would use 32
    LrSchedule lr;
    AdamConfig adam;
    std::uint64_t seed = 42;

    void validate() const {
        encoder.validate();
        if (fusion != FusionMode::pb_only) seq_encoder.validate();
        if (mel_dim < 1 || att_dim < 1 || cell_dim < 1)
            throw ConfigError("model dims must be >= 1");
        if (iterations < 1) throw ConfigError("iterations must be >= 1");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    }
};

struct TrainStats {
    int iteration = 0;
    double loss = 0.0;
    double lr = 0.0;
};

struct TrainReport {
    std::vector<TrainStats> history;

    double initial_loss() const { return history.front().loss; }
    double final_loss() const { return history.back().loss; }
};

inline void write_report_csv(const TrainReport& report, std::ostream& out) {
    out << "iteration,loss,lr\n";
    out.precision(17);
    for (const auto& s : report.history)
        out << s.iteration << "," << s.loss << "," << s.lr << "\n";
}

// Consecutive phoneme spans per PW, from the per-node phoneme annotations.
inline PwSpans spans_from_graph(const ProsodyGraph& graph) {
    PwSpans spans;
    std::size_t next = 0;
    for (const auto& n : graph.nodes) {
        if (n.phonemes.empty())
            throw SpanCoverageError("node " + std::to_string(n.id) +
                                    " has no phonemes; cannot fuse sequential encoding");
        spans.emplace_back(next, next + n.phonemes.size());
        next += n.phonemes.size();
    }
    return spans;
}

// --- JSONL dataset ---

inline ToyExample example_from_json_value(const nlohmann::json& j) {
    ToyExample ex;
    try {
        ex.id = j.value("id", std::string{});
        ex.graph = graph_from_json_value(j.at("graph"));
        if (j.contains("phonemes"))
            ex.phonemes = j.at("phonemes").get<std::vector<std::string>>();
        const auto& mel = j.at("mel");
        std::vector<std::vector<double>> rows;
        for (const auto& row : mel) rows.push_back(row.get<std::vector<double>>());
        ex.mel = Tensor::from_rows(rows);
    } catch (const nlohmann::json::exception& e) {
        throw RecordFormatError(std::string("dataset record: ") + e.what());
    }
    if (ex.mel.rows() < 1) throw RecordFormatError("dataset record: empty mel target");
    return ex;
}

inline nlohmann::json example_to_json_value(const ToyExample& ex) {
    nlohmann::json mel = nlohmann::json::array();
    for (int t = 0; t < ex.mel.rows(); ++t) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < ex.mel.cols(); ++j) row.push_back(ex.mel.at(t, j));
        mel.push_back(std::move(row));
    }
    nlohmann::json j{{"id", ex.id}, {"graph", graph_to_json_value(ex.graph)}, {"mel", mel}};
    if (!ex.phonemes.empty()) j["phonemes"] = ex.phonemes;
    return j;
}

inline std::vector<ToyExample> load_dataset(std::istream& in) {
    std::vector<ToyExample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(example_from_json_value(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw RecordFormatError("dataset line " + std::to_string(line_no) + ": " +
                                    e.what());
        }
    }
    return out;
}

inline std::vector<ToyExample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path);
    return load_dataset(in);
}

inline void save_dataset(const std::vector<ToyExample>& dataset, std::ostream& out) {
    for (const auto& ex : dataset) out << example_to_json_value(ex).dump() << "\n";
}

// --- trainer ---

// Desk-scale graph-to-sequence trainer: teacher-forced MSE against the target
// frames, Adam with the annealing schedule, deterministic per seed.
class ToyTrainer {
  public:
    ToyTrainer(TrainConfig cfg, std::vector<ToyExample> dataset)
        : cfg_(std::move(cfg)), dataset_(std::move(dataset)) {
        cfg_.validate();
        if (dataset_.empty()) throw ConfigError("training dataset is empty");
        for (auto& ex : dataset_) {
            if (!ex.mel.all_finite())
                throw ConfigError("non-finite mel target in example " + ex.id);
            if (ex.mel.cols() != cfg_.mel_dim)
                throw ConfigError("example " + ex.id + " mel width " +
                                  std::to_string(ex.mel.cols()) + " != mel_dim " +
                                  std::to_string(cfg_.mel_dim));
        }
        if (cfg_.fusion != FusionMode::pb_only) {
            for (const auto& ex : dataset_) {
                chains_.push_back(build_phoneme_chain(ex.phonemes));
                spans_.push_back(spans_from_graph(ex.graph));
            }
        }
        Rng rng(cfg_.seed);
        enc_params_ = init_encoder_params(cfg_.encoder, rng);
        if (cfg_.fusion != FusionMode::pb_only)
            seq_params_ = init_encoder_params(cfg_.seq_encoder, rng);
        int mem_dim = cfg_.encoder.dim;
        if (cfg_.fusion == FusionMode::concat) mem_dim += cfg_.seq_encoder.dim;
        dec_params_ = init_decoder_params(cfg_.mel_dim, mem_dim, cfg_.cell_dim,
                                          cfg_.att_dim, rng);
    }

    std::vector<Tensor*> params() {
        std::vector<Tensor*> out = enc_params_.tensors();
        if (cfg_.fusion != FusionMode::pb_only) {
            auto s = seq_params_.tensors();
            out.insert(out.end(), s.begin(), s.end());
        }
        auto d = dec_params_.tensors();
        out.insert(out.end(), d.begin(), d.end());
        return out;
    }

    TrainReport run() {
        TrainReport report;
        AdamOptimizer opt(params(), cfg_.adam);
        const std::size_t n = dataset_.size();
        const std::size_t batch = std::min<std::size_t>(
            static_cast<std::size_t>(cfg_.batch_size), n);
        std::size_t cursor = 0;
        for (int iter = 1; iter <= cfg_.iterations; ++iter) {
            Tape tape;
            for (Tensor* p : params()) p->attach(tape);
            Tensor loss;
            for (std::size_t k = 0; k < batch; ++k) {
                const std::size_t idx = (cursor + k) % n;
                Tensor l = forward_loss(idx, dataset_[idx].graph);
                loss = k == 0 ? std::move(l) : add(loss, l);
            }
            cursor = (cursor + batch) % n;
            if (batch > 1) loss = scale(loss, 1.0 / static_cast<double>(batch));
            tape.backward(loss);
            const double lr = cfg_.lr.at(iter);
            opt.step(lr);
            report.history.push_back(TrainStats{iter, loss.value(), lr});
        }
        for (Tensor* p : params()) p->detach();
        return report;
    }

    // Mean teacher-forced loss over the dataset with frozen parameters.
    double evaluate() {
        double total = 0;
        for (std::size_t i = 0; i < dataset_.size(); ++i)
            total += forward_loss(i, dataset_[i].graph).value();
        return total / static_cast<double>(dataset_.size());
    }

    // Same, but every example's graph loses all edges (structure ablation).
    double evaluate_edges_stripped() {
        double total = 0;
        for (std::size_t i = 0; i < dataset_.size(); ++i)
            total += forward_loss(i, strip_edges(dataset_[i].graph)).value();
        return total / static_cast<double>(dataset_.size());
    }

    // Teacher-forced frames for one example under an arbitrary graph.
    Tensor predict_frames(std::size_t idx, const ProsodyGraph& graph) {
        const ToyExample& ex = dataset_.at(idx);
        EncodingMemory mem = build_memory(idx, graph);
        return decode(mem, dec_params_, ex.mel.rows(), &ex.mel).mel.frames;
    }

    const TrainConfig& config() const { return cfg_; }
    const std::vector<ToyExample>& dataset() const { return dataset_; }

  private:
    static std::uint64_t example_seed(std::uint64_t base, std::size_t idx,
                                      std::uint64_t salt) {
        return base + 0x9E3779B97F4A7C15ull * (idx + 1) + salt;
    }

    EncodingMemory build_memory(std::size_t idx, const ProsodyGraph& graph) {
        Tensor h0 = init_node_embeddings(graph, cfg_.encoder.dim,
                                         example_seed(cfg_.seed, idx, 1));
        Tensor h_pb = encode_from(graph, cfg_.encoder, enc_params_, std::move(h0));
        if (cfg_.fusion == FusionMode::pb_only)
            return fuse(h_pb, Tensor(), {}, FusionMode::pb_only);
        const ProsodyGraph& chain = chains_.at(idx);
        Tensor t0 = init_node_embeddings(chain, cfg_.seq_encoder.dim,
                                         example_seed(cfg_.seed, idx, 2));
        Tensor theta =
            graph_sequential_encode_from(chain, cfg_.seq_encoder, seq_params_, std::move(t0));
        return fuse(h_pb, theta, spans_.at(idx), cfg_.fusion);
    }

    Tensor forward_loss(std::size_t idx, const ProsodyGraph& graph) {
        const ToyExample& ex = dataset_[idx];
        EncodingMemory mem = build_memory(idx, graph);
        DecodeResult result = decode(mem, dec_params_, ex.mel.rows(), &ex.mel);
        return mse_loss(result.mel.frames, ex.mel);
    }

    TrainConfig cfg_;
    std::vector<ToyExample> dataset_;
    std::vector<ProsodyGraph> chains_;
    std::vector<PwSpans> spans_;
    EncoderParams enc_params_;
    EncoderParams seq_params_;
    DecoderParams dec_params_;
};

// --- flat key=value config files ---

struct TrainFileConfig {
    TrainConfig train;
    std::string data_path;
    std::string report_path;
};

// Lines of `key=value`; blank lines and lines starting with # are skipped.
inline TrainFileConfig parse_train_config(std::istream& in) {
    TrainFileConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    auto to_int = [&](const std::string& v) { return std::stoi(v); };
    auto to_double = [&](const std::string& v) { return std::stod(v); };
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value");
        std::string key = line.substr(first, eq - first);
        std::string value = line.substr(eq + 1);
        while (!value.empty() && (value.back() == '\r' || value.back() == ' '))
            value.pop_back();
        while (!key.empty() && key.back() == ' ') key.pop_back();
        try {
            if (key == "encoder") cfg.train.encoder.kind = encoder_kind_from_string(value);
            else if (key == "dim") cfg.train.encoder.dim = to_int(value);
            else if (key == "steps") cfg.train.encoder.steps = to_int(value);
            else if (key == "layers") cfg.train.encoder.layers = to_int(value);
            else if (key == "per_kind_messages")
                cfg.train.encoder.per_kind_messages = to_int(value) != 0;
            else if (key == "seq_encoder")
                cfg.train.seq_encoder.kind = encoder_kind_from_string(value);
            else if (key == "seq_dim") cfg.train.seq_encoder.dim = to_int(value);
            else if (key == "seq_steps") cfg.train.seq_encoder.steps = to_int(value);
            else if (key == "seq_layers") cfg.train.seq_encoder.layers = to_int(value);
            else if (key == "fusion") cfg.train.fusion = fusion_mode_from_string(value);
            else if (key == "mel_dim") cfg.train.mel_dim = to_int(value);
            else if (key == "att_dim") cfg.train.att_dim = to_int(value);
            else if (key == "cell_dim") cfg.train.cell_dim = to_int(value);
            else if (key == "iterations") cfg.train.iterations = to_int(value);
            else if (key == "batch_size") cfg.train.batch_size = to_int(value);
            else if (key == "lr_initial") cfg.train.lr.initial = to_double(value);
            else if (key == "lr_final") cfg.train.lr.final_lr = to_double(value);
            else if (key == "lr_decay_iters") cfg.train.lr.decay_iters = to_int(value);
            else if (key == "seed") cfg.train.seed = std::stoull(value);
            else if (key == "data") cfg.data_path = value;
            else if (key == "report") cfg.report_path = value;
            else
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unknown key \"" + key + "\"");
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": bad value for \"" + key + "\"");
        } catch (const std::out_of_range&) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": value out of range for \"" + key + "\"");
        }
    }
    return cfg;
}

}  // namespace graphpb
