#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphpb/encoders.hpp"
#include "graphpb/errors.hpp"
#include "graphpb/graph.hpp"
#include "graphpb/tensor.hpp"

namespace graphpb {

// Runs GGNN or G-LSTM propagation over the phoneme chain graph; the result
// rows are the per-phoneme sequential encodings Theta.
inline Tensor graph_sequential_encode(const ProsodyGraph& chain, const EncoderConfig& cfg,
                                      const EncoderParams& params, std::uint64_t seed) {
    if (!is_seq_chain(chain))
        throw NotAChain("graph_sequential_encode expects a single SEQ path graph");
    if (cfg.kind == EncoderKind::GCN)
        throw ConfigError("graph sequential encoder supports GGNN or GLSTM");
    return encode(chain, cfg, params, seed);
}

inline Tensor graph_sequential_encode_from(const ProsodyGraph& chain,
                                           const EncoderConfig& cfg,
                                           const EncoderParams& params, Tensor h0) {
    if (!is_seq_chain(chain))
        throw NotAChain("graph_sequential_encode expects a single SEQ path graph");
    if (cfg.kind == EncoderKind::GCN)
        throw ConfigError("graph sequential encoder supports GGNN or GLSTM");
    return encode_from(chain, cfg, params, std::move(h0));
}

// How sequential encodings enter the attention memory.
//   pb_only:     M = H_PB
//   concat:      row v of M = H_PB[v] ++ mean(Theta rows of PW v)
//   append_rows: M = rows of H_PB then rows of Theta (needs equal widths);
//                an alternative reading, not claimed faithful.
enum class FusionMode { pb_only, concat, append_rows };

inline const char* to_string(FusionMode m) {
    switch (m) {
        case FusionMode::pb_only: return "pb_only";
        case FusionMode::concat: return "concat";
        default: return "append_rows";
    }
}

inline FusionMode fusion_mode_from_string(const std::string& s) {
    if (s == "pb_only") return FusionMode::pb_only;
    if (s == "concat") return FusionMode::concat;
    if (s == "append_rows") return FusionMode::append_rows;
    throw ConfigError("unknown fusion mode: \"" + s + "\"");
}

// Attention memory: keys and values of the decoder.
struct EncodingMemory {
    Tensor m;
    std::vector<int> source_pw;  // memory row -> 1-based PW id
    int pb_dim = 0;
    int seq_dim = 0;
};

using PwSpans = std::vector<std::pair<std::size_t, std::size_t>>;

namespace detail {

// Spans must partition [0, phoneme_count) in order, one span per PW row.
inline void check_spans(const PwSpans& spans, std::size_t rows, std::size_t phonemes) {
    if (spans.size() != rows)
        throw SpanCoverageError("need one span per PW row: " + std::to_string(spans.size()) +
                                " spans for " + std::to_string(rows) + " rows");
    std::size_t next = 0;
    for (const auto& [b, e] : spans) {
        if (b != next || e <= b)
            throw SpanCoverageError("spans must cover phonemes contiguously; bad span [" +
                                    std::to_string(b) + "," + std::to_string(e) + ")");
        next = e;
    }
    if (next != phonemes)
        throw SpanCoverageError("spans cover " + std::to_string(next) + " of " +
                                std::to_string(phonemes) + " phonemes");
}

}  // namespace detail

inline EncodingMemory fuse(const Tensor& h_pb, const Tensor& theta, const PwSpans& spans,
                           FusionMode mode) {
    EncodingMemory mem;
    mem.pb_dim = h_pb.cols();
    switch (mode) {
        case FusionMode::pb_only: {
            mem.m = h_pb;
            mem.seq_dim = 0;
            for (int v = 0; v < h_pb.rows(); ++v) mem.source_pw.push_back(v + 1);
            return mem;
        }
        case FusionMode::concat: {
            detail::check_spans(spans, static_cast<std::size_t>(h_pb.rows()),
                                static_cast<std::size_t>(theta.rows()));
            // Constant pooling matrix: row v averages Theta over PW v's span.
            Tensor pool(h_pb.rows(), theta.rows());
            for (int v = 0; v < h_pb.rows(); ++v) {
                const auto& [b, e] = spans[static_cast<std::size_t>(v)];
                const double w = 1.0 / static_cast<double>(e - b);
                for (std::size_t i = b; i < e; ++i)
                    pool.at(v, static_cast<int>(i)) = w;
            }
            mem.m = concat_cols(h_pb, matmul(pool, theta));
            mem.seq_dim = theta.cols();
            for (int v = 0; v < h_pb.rows(); ++v) mem.source_pw.push_back(v + 1);
            return mem;
        }
        case FusionMode::append_rows: {
            if (h_pb.cols() != theta.cols())
                throw ShapeMismatch("append_rows fusion needs equal widths: " +
                                    h_pb.shape_string() + " vs " + theta.shape_string());
            detail::check_spans(spans, static_cast<std::size_t>(h_pb.rows()),
                                static_cast<std::size_t>(theta.rows()));
            mem.m = concat_rows(h_pb, theta);
            mem.seq_dim = theta.cols();
            for (int v = 0; v < h_pb.rows(); ++v) mem.source_pw.push_back(v + 1);
            for (int v = 0; v < h_pb.rows(); ++v) {
                const auto& [b, e] = spans[static_cast<std::size_t>(v)];
                for (std::size_t i = b; i < e; ++i) mem.source_pw.push_back(v + 1);
            }
            return mem;
        }
    }
    throw ConfigError("unreachable fusion mode");
}

// Mel frames plus the fixed framing the targets were extracted with.
struct MelSpec {
    Tensor frames;  // T x mel_dim
    double frame_length_ms = 50.0;
    double frame_shift_ms = 12.5;

    int frame_count() const { return frames.rows(); }
    int mel_dim() const { return frames.cols(); }

    void validate() const {
        if (frames.rows() < 1) throw ConfigError("mel spectrogram needs >= 1 frame");
        if (!frames.all_finite()) throw ConfigError("mel spectrogram has non-finite entries");
    }
};

struct AttentionParams {
    Tensor wq;   // D_cell x D_att
    Tensor wm;   // D_mem x D_att
    Tensor bia;  // 1 x D_att
    Tensor v;    // D_att x 1
};

struct GruCellParams {
    Tensor wz, uz, bz;
    Tensor wr, ur, br;
    Tensor wh, uh, bh;
};

struct DecoderParams {
    AttentionParams att;
    GruCellParams cell;
    Tensor w_out;  // D_cell x mel_dim
    Tensor b_out;  // 1 x mel_dim
    int mel_dim = 80;
    int cell_dim = 16;

    std::vector<Tensor*> tensors() {
        return {&att.wq,  &att.wm,  &att.bia, &att.v,   &cell.wz, &cell.uz, &cell.bz,
                &cell.wr, &cell.ur, &cell.br, &cell.wh, &cell.uh, &cell.bh, &w_out,
                &b_out};
    }
};

inline DecoderParams init_decoder_params(int mel_dim, int mem_dim, int cell_dim,
                                         int att_dim, Rng& rng) {
    auto mk = [&](int r, int c) { return Tensor::random_uniform(r, c, -0.1, 0.1, rng); };
    DecoderParams p;
    p.mel_dim = mel_dim;
    p.cell_dim = cell_dim;
    p.att.wq = mk(cell_dim, att_dim);
    p.att.wm = mk(mem_dim, att_dim);
    p.att.bia = mk(1, att_dim);
    p.att.v = mk(att_dim, 1);
    const int in_dim = mel_dim + mem_dim;
    p.cell.wz = mk(in_dim, cell_dim);
    p.cell.uz = mk(cell_dim, cell_dim);
    p.cell.bz = mk(1, cell_dim);
    p.cell.wr = mk(in_dim, cell_dim);
    p.cell.ur = mk(cell_dim, cell_dim);
    p.cell.br = mk(1, cell_dim);
    p.cell.wh = mk(in_dim, cell_dim);
    p.cell.uh = mk(cell_dim, cell_dim);
    p.cell.bh = mk(1, cell_dim);
    p.w_out = mk(cell_dim, mel_dim);
    p.b_out = mk(1, mel_dim);
    return p;
}

struct DecodeResult {
    MelSpec mel;
    Tensor attention;  // T x memory rows
};

namespace detail {

inline Tensor gru_cell(const Tensor& x, const Tensor& h, const GruCellParams& p) {
    Tensor z = sigmoid(add(add(matmul(x, p.wz), matmul(h, p.uz)), p.bz));
    Tensor r = sigmoid(add(add(matmul(x, p.wr), matmul(h, p.ur)), p.br));
    Tensor hc = tanh(add(add(matmul(x, p.wh), matmul(hadamard(r, h), p.uh)), p.bh));
    return add(hadamard(affine(z, -1.0, 1.0), h), hadamard(z, hc));
}

}  // namespace detail

// Attentional decoding: per frame, additive attention over the memory rows
// produces a context vector; a GRU cell consumes [previous frame ++ context];
// the cell state projects to one mel frame. With `teacher` supplied (T x mel)
// the previous frame is the ground-truth one (teacher forcing).
inline DecodeResult decode(const EncodingMemory& memory, const DecoderParams& p,
                           int frame_count, const Tensor* teacher = nullptr) {
    if (frame_count < 1) throw ConfigError("decode: frame count must be >= 1");
    const Tensor& m = memory.m;
    if (m.rows() < 1) throw ShapeMismatch("decode: empty memory");
    if (teacher && (teacher->rows() < frame_count || teacher->cols() != p.mel_dim))
        throw ShapeMismatch("decode: teacher frames " + teacher->shape_string() +
                            " for T=" + std::to_string(frame_count) + ", mel_dim=" +
                            std::to_string(p.mel_dim));

    Tensor keys = matmul(m, p.att.wm);  // R x D_att, reused every step
    Tensor h(1, p.cell_dim);
    Tensor prev(1, p.mel_dim);
    Tensor frames, attention;
    for (int t = 0; t < frame_count; ++t) {
        Tensor query = add(matmul(h, p.att.wq), p.att.bia);
        Tensor scores = matmul(tanh(add(keys, query)), p.att.v);  // R x 1
        Tensor alpha = softmax_rows(transpose(scores));           // 1 x R
        Tensor context = matmul(alpha, m);
        Tensor x = concat_cols(prev, context);
        h = detail::gru_cell(x, h, p.cell);
        Tensor frame = add(matmul(h, p.w_out), p.b_out);
        frames = t == 0 ? frame : concat_rows(frames, frame);
        attention = t == 0 ? alpha : concat_rows(attention, alpha);
        prev = teacher ? slice_rows(*teacher, t, t + 1) : frame;
    }
    DecodeResult result;
    result.mel.frames = std::move(frames);
    result.attention = std::move(attention);
    return result;
}

}  // namespace graphpb
