#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphpb/errors.hpp"
#include "graphpb/graph.hpp"
#include "graphpb/rng.hpp"
#include "graphpb/tensor.hpp"

namespace graphpb {

enum class EncoderKind { GCN, GGNN, GLSTM };

inline const char* to_string(EncoderKind k) {
    switch (k) {
        case EncoderKind::GCN: return "gcn";
        case EncoderKind::GGNN: return "ggnn";
        default: return "glstm";
    }
}

inline EncoderKind encoder_kind_from_string(const std::string& s) {
    if (s == "gcn" || s == "GCN") return EncoderKind::GCN;
    if (s == "ggnn" || s == "GGNN") return EncoderKind::GGNN;
    if (s == "glstm" || s == "GLSTM") return EncoderKind::GLSTM;
    throw ConfigError("unknown encoder kind: \"" + s + "\"");
}

struct EncoderConfig {
    EncoderKind kind = EncoderKind::GGNN;
    int dim = 16;
    int steps = 3;   // propagation steps per layer (GCN applies its formula once)
    int layers = 2;
    bool normalize_gcn = false;      // self-loops + symmetric normalization
    bool per_kind_messages = false;  // GGNN: one message weight per edge kind

    void validate() const {
        if (dim < 1) throw ConfigError("encoder dim must be >= 1");
        if (steps < 1) throw ConfigError("encoder steps must be >= 1");
        if (layers < 1 || layers > 3) throw ConfigError("encoder layers must be in [1,3]");
    }
};

// Random node embeddings, uniform in [-0.1, 0.1], deterministic per seed.
inline Tensor init_node_embeddings(const ProsodyGraph& graph, int dim, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("embedding dim must be >= 1");
    Rng rng(seed);
    return Tensor::random_uniform(graph.node_count(), dim, -0.1, 0.1, rng);
}

inline Tensor adjacency_tensor(const ProsodyGraph& graph,
                               EdgeKindSet kinds = EdgeKindSet::all()) {
    AdjacencyMatrix a = to_adjacency(graph, kinds);
    return Tensor::from_data(a.n, a.n, std::move(a.entries));
}

// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I.
inline Tensor normalized_adjacency(const ProsodyGraph& graph,
                                   EdgeKindSet kinds = EdgeKindSet::all()) {
    Tensor a = adjacency_tensor(graph, kinds);
    const int n = a.rows();
    for (int i = 0; i < n; ++i) a.at(i, i) += 1.0;
    std::vector<double> dinv_sqrt(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double deg = 0;
        for (int j = 0; j < n; ++j) deg += a.at(i, j);
        dinv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg);
    }
    Tensor out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out.at(i, j) = dinv_sqrt[static_cast<std::size_t>(i)] * a.at(i, j) *
                           dinv_sqrt[static_cast<std::size_t>(j)];
    return out;
}

// Row v = mean over neighbors of v (zero row for isolated nodes).
inline Tensor mean_neighbor_tensor(const ProsodyGraph& graph) {
    Tensor a = adjacency_tensor(graph);
    const int n = a.rows();
    for (int i = 0; i < n; ++i) {
        double deg = 0;
        for (int j = 0; j < n; ++j) deg += a.at(i, j);
        if (deg == 0) continue;
        for (int j = 0; j < n; ++j) a.at(i, j) /= deg;
    }
    return a;
}

// Constant tensors an encoder derives from the graph once per run.
struct GraphOperators {
    Tensor adj_all;
    std::array<Tensor, 3> adj_kind;  // indexed by EdgeKind
    Tensor mean_neighbor;
};

inline GraphOperators make_graph_operators(const ProsodyGraph& graph) {
    GraphOperators ops;
    ops.adj_all = adjacency_tensor(graph);
    for (EdgeKind k : {EdgeKind::PPH, EdgeKind::IPH, EdgeKind::SEQ})
        ops.adj_kind[static_cast<std::size_t>(k)] = adjacency_tensor(graph, {k});
    ops.mean_neighbor = mean_neighbor_tensor(graph);
    return ops;
}

// --- GCN ---

struct GcnParams {
    Tensor w0;  // D_in x D_hid
    Tensor w1;  // D_hid x D_out

    std::vector<Tensor*> tensors() { return {&w0, &w1}; }
};

inline GcnParams init_gcn_params(int d_in, int d_hid, int d_out, Rng& rng) {
    GcnParams p;
    p.w0 = Tensor::random_uniform(d_in, d_hid, -0.1, 0.1, rng);
    p.w1 = Tensor::random_uniform(d_hid, d_out, -0.1, 0.1, rng);
    return p;
}

// f(X, A) = A ReLU(A X W0) W1, with A exactly as supplied.
inline Tensor gcn_forward(const Tensor& x, const Tensor& adjacency, const GcnParams& p) {
    if (adjacency.rows() != adjacency.cols() || adjacency.rows() != x.rows())
        throw ShapeMismatch("gcn_forward: adjacency " + adjacency.shape_string() +
                            " vs X " + x.shape_string());
    return matmul(matmul(adjacency, relu(matmul(adjacency, matmul(x, p.w0)))), p.w1);
}

// --- GGNN ---

struct GgnnParams {
    bool per_kind_messages = false;
    Tensor w_msg;                    // shared message weight, D x D
    std::array<Tensor, 3> w_msg_kind;  // used instead when per_kind_messages
    Tensor b;  // 1 x D, added to the aggregated message
    Tensor wz, uz, wr, ur, wh, uh;  // gate weights, D x D

    std::vector<Tensor*> tensors() {
        std::vector<Tensor*> out;
        if (per_kind_messages)
            for (auto& w : w_msg_kind) out.push_back(&w);
        else
            out.push_back(&w_msg);
        out.insert(out.end(), {&b, &wz, &uz, &wr, &ur, &wh, &uh});
        return out;
    }
};

inline GgnnParams init_ggnn_params(int dim, Rng& rng, bool per_kind = false) {
    auto mk = [&] { return Tensor::random_uniform(dim, dim, -0.1, 0.1, rng); };
    GgnnParams p;
    p.per_kind_messages = per_kind;
    if (per_kind)
        for (auto& w : p.w_msg_kind) w = mk();
    else
        p.w_msg = mk();
    p.b = Tensor::random_uniform(1, dim, -0.1, 0.1, rng);
    p.wz = mk();
    p.uz = mk();
    p.wr = mk();
    p.ur = mk();
    p.wh = mk();
    p.uh = mk();
    return p;
}

namespace detail {

// a_v = sum over neighbors of message(h_u) + b. Shared weights see each
// neighbor once (deduplicated adjacency); per-kind weights contribute one
// message per kind an edge carries.
inline Tensor ggnn_messages(const Tensor& h, const GraphOperators& ops,
                            const GgnnParams& p) {
    Tensor agg;
    if (p.per_kind_messages) {
        for (std::size_t k = 0; k < 3; ++k) {
            Tensor part = matmul(ops.adj_kind[k], matmul(h, p.w_msg_kind[k]));
            agg = k == 0 ? std::move(part) : add(agg, part);
        }
    } else {
        agg = matmul(ops.adj_all, matmul(h, p.w_msg));
    }
    return add(agg, p.b);
}

}  // namespace detail

// One GRU-gated propagation step:
//   a = aggregate(neighbors) + b
//   z = sigmoid(a Wz + h Uz), r = sigmoid(a Wr + h Ur)
//   hc = tanh(a Wh + (r . h) Uh)
//   h' = (1 - z) . h + z . hc
inline Tensor ggnn_step(const Tensor& h, const GraphOperators& ops, const GgnnParams& p) {
    Tensor a = detail::ggnn_messages(h, ops, p);
    Tensor z = sigmoid(add(matmul(a, p.wz), matmul(h, p.uz)));
    Tensor r = sigmoid(add(matmul(a, p.wr), matmul(h, p.ur)));
    Tensor hc = tanh(add(matmul(a, p.wh), matmul(hadamard(r, h), p.uh)));
    return add(hadamard(affine(z, -1.0, 1.0), h), hadamard(z, hc));
}

inline Tensor ggnn_step(const Tensor& h, const ProsodyGraph& graph, const GgnnParams& p) {
    return ggnn_step(h, make_graph_operators(graph), p);
}

// --- G-LSTM ---

struct GlstmParams {
    // Gate g in {i, f, o, u}: sigma/tanh of h Ug + m Vg + bg, with m the mean
    // neighbor state.
    Tensor ui, vi, bi;
    Tensor uf, vf, bf;
    Tensor uo, vo, bo;
    Tensor uu, vu, bu;

    std::vector<Tensor*> tensors() {
        return {&ui, &vi, &bi, &uf, &vf, &bf, &uo, &vo, &bo, &uu, &vu, &bu};
    }
};

inline GlstmParams init_glstm_params(int dim, Rng& rng) {
    auto mk = [&] { return Tensor::random_uniform(dim, dim, -0.1, 0.1, rng); };
    auto mkb = [&] { return Tensor::random_uniform(1, dim, -0.1, 0.1, rng); };
    GlstmParams p;
    p.ui = mk(); p.vi = mk(); p.bi = mkb();
    p.uf = mk(); p.vf = mk(); p.bf = mkb();
    p.uo = mk(); p.vo = mk(); p.bo = mkb();
    p.uu = mk(); p.vu = mk(); p.bu = mkb();
    return p;
}

// One graph-LSTM step:
//   m = mean neighbor hidden state (zero for isolated nodes)
//   i, f, o = sigmoid(h U + m V + b); u = tanh(h Uu + m Vu + bu)
//   c' = f . c + i . u;  h' = o . tanh(c')
inline std::pair<Tensor, Tensor> glstm_step(const Tensor& h, const Tensor& c,
                                            const GraphOperators& ops,
                                            const GlstmParams& p) {
    if (h.rows() != c.rows() || h.cols() != c.cols())
        throw ShapeMismatch("glstm_step: H " + h.shape_string() + " vs C " +
                            c.shape_string());
    Tensor m = matmul(ops.mean_neighbor, h);
    auto gate = [&](const Tensor& u, const Tensor& v, const Tensor& b) {
        return add(add(matmul(h, u), matmul(m, v)), b);
    };
    Tensor i = sigmoid(gate(p.ui, p.vi, p.bi));
    Tensor f = sigmoid(gate(p.uf, p.vf, p.bf));
    Tensor o = sigmoid(gate(p.uo, p.vo, p.bo));
    Tensor u = tanh(gate(p.uu, p.vu, p.bu));
    Tensor c_next = add(hadamard(f, c), hadamard(i, u));
    Tensor h_next = hadamard(o, tanh(c_next));
    return {h_next, c_next};
}

inline std::pair<Tensor, Tensor> glstm_step(const Tensor& h, const Tensor& c,
                                            const ProsodyGraph& graph,
                                            const GlstmParams& p) {
    return glstm_step(h, c, make_graph_operators(graph), p);
}

// --- stacked encoder ---

struct EncoderParams {
    std::vector<GcnParams> gcn;
    std::vector<GgnnParams> ggnn;
    std::vector<GlstmParams> glstm;

    std::vector<Tensor*> tensors() {
        std::vector<Tensor*> out;
        for (auto& p : gcn) {
            auto t = p.tensors();
            out.insert(out.end(), t.begin(), t.end());
        }
        for (auto& p : ggnn) {
            auto t = p.tensors();
            out.insert(out.end(), t.begin(), t.end());
        }
        for (auto& p : glstm) {
            auto t = p.tensors();
            out.insert(out.end(), t.begin(), t.end());
        }
        return out;
    }
};

inline EncoderParams init_encoder_params(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    EncoderParams params;
    for (int l = 0; l < cfg.layers; ++l) {
        switch (cfg.kind) {
            case EncoderKind::GCN:
                params.gcn.push_back(init_gcn_params(cfg.dim, cfg.dim, cfg.dim, rng));
                break;
            case EncoderKind::GGNN:
                params.ggnn.push_back(init_ggnn_params(cfg.dim, rng, cfg.per_kind_messages));
                break;
            case EncoderKind::GLSTM:
                params.glstm.push_back(init_glstm_params(cfg.dim, rng));
                break;
        }
    }
    return params;
}

// Runs the stacked encoder from a caller-supplied initial embedding matrix.
inline Tensor encode_from(const ProsodyGraph& graph, const EncoderConfig& cfg,
                          const EncoderParams& params, Tensor h) {
    cfg.validate();
    if (h.rows() != graph.node_count() || h.cols() != cfg.dim)
        throw ShapeMismatch("encode: embeddings " + h.shape_string() + " for " +
                            std::to_string(graph.node_count()) + " nodes, dim " +
                            std::to_string(cfg.dim));
    const GraphOperators ops = make_graph_operators(graph);
    const Tensor gcn_adj = cfg.kind == EncoderKind::GCN && cfg.normalize_gcn
                               ? normalized_adjacency(graph)
                               : ops.adj_all;
    for (int l = 0; l < cfg.layers; ++l) {
        const auto li = static_cast<std::size_t>(l);
        switch (cfg.kind) {
            case EncoderKind::GCN:
                if (params.gcn.size() <= li) throw ConfigError("missing GCN layer params");
                h = gcn_forward(h, gcn_adj, params.gcn[li]);
                break;
            case EncoderKind::GGNN: {
                if (params.ggnn.size() <= li) throw ConfigError("missing GGNN layer params");
                for (int t = 0; t < cfg.steps; ++t) h = ggnn_step(h, ops, params.ggnn[li]);
                break;
            }
            case EncoderKind::GLSTM: {
                if (params.glstm.size() <= li)
                    throw ConfigError("missing GLSTM layer params");
                Tensor c(h.rows(), h.cols());
                for (int t = 0; t < cfg.steps; ++t) {
                    auto [hn, cn] = glstm_step(h, c, ops, params.glstm[li]);
                    h = hn;
                    c = cn;
                }
                break;
            }
        }
    }
    return h;
}

// Full encoder: seeded random initial embeddings, then stacked propagation.
// The returned matrix is the attention memory H_PB.
inline Tensor encode(const ProsodyGraph& graph, const EncoderConfig& cfg,
                     const EncoderParams& params, std::uint64_t seed) {
    return encode_from(graph, cfg, params, init_node_embeddings(graph, cfg.dim, seed));
}

// Per-step embedding movement |H(t+1) - H(t)| (Frobenius) of a single layer
// propagating `total_steps` times; a diagnostic, not a convergence guarantee.
inline std::vector<double> propagation_drift(const ProsodyGraph& graph,
                                             const EncoderConfig& cfg,
                                             const EncoderParams& params,
                                             std::uint64_t seed, int total_steps) {
    cfg.validate();
    const GraphOperators ops = make_graph_operators(graph);
    Tensor h = init_node_embeddings(graph, cfg.dim, seed);
    Tensor c(h.rows(), h.cols());
    std::vector<double> drift;
    for (int t = 0; t < total_steps; ++t) {
        Tensor next;
        switch (cfg.kind) {
            case EncoderKind::GCN:
                next = gcn_forward(h, cfg.normalize_gcn ? normalized_adjacency(graph)
                                                        : ops.adj_all,
                                   params.gcn.front());
                break;
            case EncoderKind::GGNN:
                next = ggnn_step(h, ops, params.ggnn.front());
                break;
            case EncoderKind::GLSTM: {
                auto [hn, cn] = glstm_step(h, c, ops, params.glstm.front());
                next = hn;
                c = cn;
                break;
            }
        }
        Tensor diff(next.rows(), next.cols());
        for (int i = 0; i < next.rows(); ++i)
            for (int j = 0; j < next.cols(); ++j) diff.at(i, j) = next.at(i, j) - h.at(i, j);
        drift.push_back(frobenius_norm(diff));
        h = next;
    }
    return drift;
}

}  // namespace graphpb
