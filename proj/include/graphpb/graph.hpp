#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "graphpb/errors.hpp"
#include "graphpb/prosody.hpp"

namespace graphpb {

enum class EdgeKind : std::uint8_t { PPH = 0, IPH = 1, SEQ = 2 };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::PPH: return "PPH";
        case EdgeKind::IPH: return "IPH";
        default: return "SEQ";
    }
}

inline EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "PPH" || s == "pph") return EdgeKind::PPH;
    if (s == "IPH" || s == "iph") return EdgeKind::IPH;
    if (s == "SEQ" || s == "seq") return EdgeKind::SEQ;
    throw GraphFormatError("unknown edge kind: \"" + s + "\"");
}

// Small set of edge kinds; a deduplicated edge carries the union of the kinds
// that produced it.
class EdgeKindSet {
  public:
    EdgeKindSet() = default;
    EdgeKindSet(std::initializer_list<EdgeKind> kinds) {
        for (EdgeKind k : kinds) add(k);
    }

    static EdgeKindSet all() { return {EdgeKind::PPH, EdgeKind::IPH, EdgeKind::SEQ}; }

    void add(EdgeKind k) { bits_ |= bit(k); }
    bool has(EdgeKind k) const { return (bits_ & bit(k)) != 0; }
    bool empty() const { return bits_ == 0; }
    bool intersects(EdgeKindSet other) const { return (bits_ & other.bits_) != 0; }
    void merge(EdgeKindSet other) { bits_ |= other.bits_; }

    // Kinds in fixed PPH < IPH < SEQ order.
    std::vector<EdgeKind> list() const {
        std::vector<EdgeKind> out;
        for (EdgeKind k : {EdgeKind::PPH, EdgeKind::IPH, EdgeKind::SEQ})
            if (has(k)) out.push_back(k);
        return out;
    }

    bool operator==(const EdgeKindSet&) const = default;

  private:
    static std::uint8_t bit(EdgeKind k) {
        return static_cast<std::uint8_t>(1u << static_cast<std::uint8_t>(k));
    }
    std::uint8_t bits_ = 0;
};

struct GraphNode {
    int id = 0;  // 1-based position in reading order
    std::string text;
    std::vector<std::string> phonemes;

    bool operator==(const GraphNode&) const = default;
};

// Canonical: a < b, 1-based node ids.
struct GraphEdge {
    int a = 0;
    int b = 0;
    EdgeKindSet kinds;

    bool operator==(const GraphEdge&) const = default;
};

// Undirected graph over prosodic words (or phoneme tokens for the chain
// graph). Edges are stored sorted by (a, b) with duplicates merged.
struct ProsodyGraph {
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;

    bool operator==(const ProsodyGraph&) const = default;

    int node_count() const { return static_cast<int>(nodes.size()); }

    bool has_edge(int a, int b, EdgeKindSet filter = EdgeKindSet::all()) const {
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        for (const auto& e : edges)
            if (e.a == a && e.b == b) return e.kinds.intersects(filter);
        return false;
    }

    // Neighbor ids of node v under the kind filter, ascending.
    std::vector<int> neighbors(int v, EdgeKindSet filter = EdgeKindSet::all()) const {
        std::vector<int> out;
        for (const auto& e : edges) {
            if (!e.kinds.intersects(filter)) continue;
            if (e.a == v) out.push_back(e.b);
            if (e.b == v) out.push_back(e.a);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    void validate() const {
        for (int i = 0; i < node_count(); ++i)
            if (nodes[static_cast<std::size_t>(i)].id != i + 1)
                throw GraphFormatError("node ids must be 1..|V| in order");
        int prev_a = 0, prev_b = 0;
        for (const auto& e : edges) {
            if (e.a >= e.b) throw GraphFormatError("edge not canonical (need a < b)");
            if (e.a < 1 || e.b > node_count())
                throw GraphFormatError("edge endpoint out of range");
            if (e.kinds.empty()) throw GraphFormatError("edge with empty kind set");
            if (std::pair(e.a, e.b) <= std::pair(prev_a, prev_b))
                throw GraphFormatError("edges must be sorted by (a, b) without duplicates");
            prev_a = e.a;
            prev_b = e.b;
        }
    }
};

// Which boundary levels become edges. IPH bipartite edges connect PW sets of
// two PPHs inside one IPH; which phrase pairs count is configurable since an
// IPH can hold more than two phrases.
enum class IphPairMode { consecutive_pphs, all_pph_pairs };

struct EdgeConfig {
    bool include_pph = true;
    bool include_iph = false;
    bool include_seq = true;
    IphPairMode iph_pair_mode = IphPairMode::consecutive_pphs;

    void validate() const {
        if (!include_pph && !include_iph && !include_seq)
            throw ConfigError("EdgeConfig: at least one edge kind must be enabled");
    }
};

namespace detail {

class EdgeAccumulator {
  public:
    void add(int a, int b, EdgeKind kind) {
        if (a == b) return;  // no self-loops
        if (a > b) std::swap(a, b);
        merged_[{a, b}].add(kind);
    }

    std::vector<GraphEdge> sorted_edges() const {
        std::vector<GraphEdge> out;
        out.reserve(merged_.size());
        for (const auto& [key, kinds] : merged_)
            out.push_back(GraphEdge{key.first, key.second, kinds});
        return out;  // std::map iterates in (a, b) order
    }

  private:
    std::map<std::pair<int, int>, EdgeKindSet> merged_;
};

}  // namespace detail

// Builds the prosody-boundary graph: nodes are the PWs in reading order;
// each PPH contributes a clique over its PWs; each selected PPH pair inside
// an IPH contributes the complete bipartite edge set between their PWs;
// sequential edges join adjacent PWs. Coinciding edges merge into one edge
// carrying the union of kinds.
inline ProsodyGraph build_graph(const ProsodyTree& tree, const EdgeConfig& cfg = {}) {
    cfg.validate();
    tree.validate();
    if (tree.pw_count() == 0) throw EmptyTree("tree has no prosodic words");

    ProsodyGraph g;
    // Global PW ids per PPH, grouped per IPH.
    std::vector<std::vector<std::vector<int>>> iph_pph_ids;
    int next_id = 0;
    for (const auto& iph : tree.iphs) {
        auto& pphs = iph_pph_ids.emplace_back();
        for (const auto& pph : iph.phrases) {
            auto& ids = pphs.emplace_back();
            for (const auto& pw : pph.words) {
                ids.push_back(++next_id);
                g.nodes.push_back(GraphNode{next_id, pw.text, pw.phonemes});
            }
        }
    }

    detail::EdgeAccumulator acc;
    if (cfg.include_pph) {
        for (const auto& pphs : iph_pph_ids)
            for (const auto& ids : pphs)
                for (std::size_t i = 0; i < ids.size(); ++i)
                    for (std::size_t j = i + 1; j < ids.size(); ++j)
                        acc.add(ids[i], ids[j], EdgeKind::PPH);
    }
    if (cfg.include_iph) {
        for (const auto& pphs : iph_pph_ids) {
            const std::size_t m = pphs.size();
            for (std::size_t p = 0; p < m; ++p) {
                const std::size_t q_end =
                    cfg.iph_pair_mode == IphPairMode::consecutive_pphs
                        ? std::min(p + 2, m)
                        : m;
                for (std::size_t q = p + 1; q < q_end; ++q)
                    for (int u : pphs[p])
                        for (int v : pphs[q]) acc.add(u, v, EdgeKind::IPH);
            }
        }
    }
    if (cfg.include_seq) {
        for (int i = 1; i < next_id; ++i) acc.add(i, i + 1, EdgeKind::SEQ);
    }
    g.edges = acc.sorted_edges();
    g.validate();
    return g;
}

// Symmetric 0/1 matrix with zero diagonal.
struct AdjacencyMatrix {
    int n = 0;
    std::vector<double> entries;  // row-major n*n

    double at(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                       static_cast<std::size_t>(j)];
    }

    int degree(int i) const {
        double d = 0;
        for (int j = 0; j < n; ++j) d += at(i, j);
        return static_cast<int>(d);
    }
};

// A[i][j] = 1 iff an edge between nodes i+1 and j+1 carries a kind in the
// filter.
inline AdjacencyMatrix to_adjacency(const ProsodyGraph& g,
                                    EdgeKindSet kinds = EdgeKindSet::all()) {
    g.validate();
    AdjacencyMatrix a;
    a.n = g.node_count();
    a.entries.assign(static_cast<std::size_t>(a.n) * static_cast<std::size_t>(a.n), 0.0);
    for (const auto& e : g.edges) {
        if (!e.kinds.intersects(kinds)) continue;
        const auto i = static_cast<std::size_t>(e.a - 1);
        const auto j = static_cast<std::size_t>(e.b - 1);
        a.entries[i * static_cast<std::size_t>(a.n) + j] = 1.0;
        a.entries[j * static_cast<std::size_t>(a.n) + i] = 1.0;
    }
    return a;
}

// Phoneme-level chain: one node per phoneme token, sequential edges only.
inline ProsodyGraph build_phoneme_chain(const AnnotatedUtterance& utt) {
    if (utt.phonemes.empty())
        throw NoPhonemes("utterance \"" + utt.id + "\" has no phoneme tokens");
    ProsodyGraph g;
    int id = 0;
    for (const auto& tok : utt.phonemes) g.nodes.push_back(GraphNode{++id, tok, {}});
    for (int i = 1; i < id; ++i)
        g.edges.push_back(GraphEdge{i, i + 1, EdgeKindSet{EdgeKind::SEQ}});
    g.validate();
    return g;
}

inline ProsodyGraph build_phoneme_chain(const std::vector<std::string>& tokens) {
    AnnotatedUtterance utt;
    utt.phonemes = tokens;
    return build_phoneme_chain(utt);
}

// True when the edge set is exactly the path 1-2-...-n of SEQ edges.
inline bool is_seq_chain(const ProsodyGraph& g) {
    const int n = g.node_count();
    if (static_cast<int>(g.edges.size()) != std::max(0, n - 1)) return false;
    for (int i = 0; i < n - 1; ++i) {
        const auto& e = g.edges[static_cast<std::size_t>(i)];
        if (e.a != i + 1 || e.b != i + 2) return false;
        if (!e.kinds.has(EdgeKind::SEQ) || e.kinds.has(EdgeKind::PPH) ||
            e.kinds.has(EdgeKind::IPH))
            return false;
    }
    return true;
}

// Copy of the graph with every edge dropped (node set preserved), used for
// structure-ablation evaluation.
inline ProsodyGraph strip_edges(const ProsodyGraph& g) {
    ProsodyGraph out;
    out.nodes = g.nodes;
    return out;
}

}  // namespace graphpb
