#pragma once

// Seeded random inputs for the property tests.

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "graphpb/graph.hpp"
#include "graphpb/prosody.hpp"
#include "graphpb/rng.hpp"
#include "graphpb/tensor.hpp"

namespace gen {

// Mixed-width alphabet: ASCII plus CJK so code-point handling is exercised.
// '#' is excluded, so default markers never collide with text.
inline const std::vector<std::string>& text_alphabet() {
    static const std::vector<std::string> chars = {
        "a", "b", "c", "x", "y", "z", "Q", "7", ".", ",",
        "卡", "尔", "普", "陪", "外", "孙", "玩", "滑", "梯", "语"};
    return chars;
}

inline std::string random_word(graphpb::Rng& rng, int max_chars = 4) {
    const auto& alpha = text_alphabet();
    const int len = static_cast<int>(rng.uniform_int(1, max_chars));
    std::string out;
    for (int i = 0; i < len; ++i)
        out += alpha[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(alpha.size()) - 1))];
    return out;
}

// Random annotated utterance: 1..max_pws prosodic words grouped into PPHs of
// 1-3 words and IPHs of 1-3 phrases, all four marker levels in play. The
// trailing utterance marker is omitted half of the time.
inline std::string random_annotated(graphpb::Rng& rng, int max_pws = 60,
                                    const graphpb::MarkerScheme& scheme = {}) {
    const int n_pws = static_cast<int>(rng.uniform_int(1, max_pws));
    std::string out;
    int produced = 0;
    while (produced < n_pws) {
        const int iph_pphs = static_cast<int>(rng.uniform_int(1, 3));
        for (int p = 0; p < iph_pphs && produced < n_pws; ++p) {
            const int pph_pws =
                static_cast<int>(rng.uniform_int(1, std::min(3, n_pws - produced)));
            for (int w = 0; w < pph_pws; ++w) {
                out += random_word(rng);
                ++produced;
                const bool last_of_pph = w + 1 == pph_pws || produced == n_pws;
                if (!last_of_pph) out += scheme.pw_marker;
            }
            const bool last_of_iph = p + 1 == iph_pphs || produced == n_pws;
            if (!last_of_iph) out += scheme.pph_marker;
        }
        if (produced < n_pws) out += scheme.iph_marker;
    }
    if (rng.uniform_int(0, 1) == 0) out += scheme.utter_marker;
    return out;
}

inline graphpb::ProsodyTree random_tree(graphpb::Rng& rng, int max_pws = 30) {
    return graphpb::parse_annotation(random_annotated(rng, max_pws));
}

// Random canonical graph, for serialization round-trips: arbitrary texts
// (including characters that need escaping), optional phoneme tokens, random
// edge subsets with random non-empty kind sets.
inline graphpb::ProsodyGraph random_graph(graphpb::Rng& rng, int max_nodes = 12) {
    using namespace graphpb;
    const int n = static_cast<int>(rng.uniform_int(1, max_nodes));
    ProsodyGraph g;
    const std::vector<std::string> nasty = {"plain", "with \"quotes\"", "back\\slash",
                                            "tab\there", "新\n行"};
    for (int i = 1; i <= n; ++i) {
        GraphNode node;
        node.id = i;
        node.text = rng.uniform_int(0, 3) == 0
                        ? nasty[static_cast<std::size_t>(
                              rng.uniform_int(0, static_cast<std::int64_t>(nasty.size()) - 1))]
                        : random_word(rng);
        if (rng.uniform_int(0, 1) == 0) {
            const int k = static_cast<int>(rng.uniform_int(1, 3));
            for (int t = 0; t < k; ++t)
                node.phonemes.push_back("p" + std::to_string(rng.uniform_int(0, 99)));
        }
        g.nodes.push_back(std::move(node));
    }
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b) {
            if (rng.uniform_int(0, 3) != 0) continue;
            GraphEdge e;
            e.a = a;
            e.b = b;
            for (EdgeKind k : {EdgeKind::PPH, EdgeKind::IPH, EdgeKind::SEQ})
                if (rng.uniform_int(0, 1) == 0) e.kinds.add(k);
            if (e.kinds.empty()) e.kinds.add(EdgeKind::SEQ);
            g.edges.push_back(e);
        }
    g.validate();
    return g;
}

// Connected random graph over exactly n nodes (random tree plus extra edges);
// used by the propagation property tests.
inline graphpb::ProsodyGraph random_connected_graph(graphpb::Rng& rng, int n) {
    using namespace graphpb;
    ProsodyGraph g;
    for (int i = 1; i <= n; ++i)
        g.nodes.push_back(GraphNode{i, "w" + std::to_string(i), {}});
    std::set<std::pair<int, int>> picked;
    for (int v = 2; v <= n; ++v) {
        const int u = static_cast<int>(rng.uniform_int(1, v - 1));
        picked.insert({std::min(u, v), std::max(u, v)});
    }
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b)
            if (rng.uniform_int(0, 4) == 0) picked.insert({a, b});
    for (const auto& [a, b] : picked)
        g.edges.push_back(GraphEdge{a, b, graphpb::EdgeKindSet{EdgeKind::PPH}});
    g.validate();
    return g;
}

inline graphpb::ProsodyGraph path_graph(int n) {
    using namespace graphpb;
    ProsodyGraph g;
    for (int i = 1; i <= n; ++i)
        g.nodes.push_back(GraphNode{i, "w" + std::to_string(i), {}});
    for (int i = 1; i < n; ++i)
        g.edges.push_back(GraphEdge{i, i + 1, EdgeKindSet{EdgeKind::SEQ}});
    return g;
}

inline graphpb::ProsodyGraph clique_graph(int n) {
    using namespace graphpb;
    ProsodyGraph g;
    for (int i = 1; i <= n; ++i)
        g.nodes.push_back(GraphNode{i, "w" + std::to_string(i), {}});
    for (int a = 1; a <= n; ++a)
        for (int b = a + 1; b <= n; ++b)
            g.edges.push_back(GraphEdge{a, b, EdgeKindSet{EdgeKind::PPH}});
    return g;
}

// perm[old_index] = new 1-based id (perm is 0-based over old ids 1..n).
inline std::vector<int> random_permutation(graphpb::Rng& rng, int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    return perm;
}

inline graphpb::ProsodyGraph permute_graph(const graphpb::ProsodyGraph& g,
                                           const std::vector<int>& perm) {
    using namespace graphpb;
    ProsodyGraph out;
    out.nodes.resize(g.nodes.size());
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        GraphNode node = g.nodes[i];
        node.id = perm[i];
        out.nodes[static_cast<std::size_t>(perm[i] - 1)] = std::move(node);
    }
    for (const auto& e : g.edges) {
        GraphEdge ne = e;
        ne.a = perm[static_cast<std::size_t>(e.a - 1)];
        ne.b = perm[static_cast<std::size_t>(e.b - 1)];
        if (ne.a > ne.b) std::swap(ne.a, ne.b);
        out.edges.push_back(ne);
    }
    std::sort(out.edges.begin(), out.edges.end(),
              [](const graphpb::GraphEdge& x, const graphpb::GraphEdge& y) {
                  return std::pair(x.a, x.b) < std::pair(y.a, y.b);
              });
    out.validate();
    return out;
}

inline graphpb::Tensor permute_rows(const graphpb::Tensor& t, const std::vector<int>& perm) {
    graphpb::Tensor out(t.rows(), t.cols());
    for (int i = 0; i < t.rows(); ++i)
        for (int j = 0; j < t.cols(); ++j)
            out.at(perm[static_cast<std::size_t>(i)] - 1, j) = t.at(i, j);
    return out;
}

}  // namespace gen
