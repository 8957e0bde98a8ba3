#include <catch2/catch.hpp>

#include <set>
#include <string>

#include "graphpb/fixtures.hpp"
#include "graphpb/graph.hpp"
#include "graphpb/graph_io.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace graphpb;

namespace {

std::set<std::pair<int, int>> edge_pairs(const ProsodyGraph& g,
                                         EdgeKindSet filter = EdgeKindSet::all()) {
    std::set<std::pair<int, int>> out;
    for (const auto& e : g.edges)
        if (e.kinds.intersects(filter)) out.insert({e.a, e.b});
    return out;
}

}  // namespace

TEST_CASE("PPH cliques: the two-word phrase yields exactly its pair edge", "[graph]") {
    const ProsodyGraph g = fixtures::figure2_graph();
    const auto pph = edge_pairs(g, {EdgeKind::PPH});
    REQUIRE(pph.count({5, 6}) == 1);
    // PPH edges incident to nodes 5 or 6 are exactly (5,6).
    for (const auto& [a, b] : pph) {
        if (a == 5 || a == 6 || b == 5 || b == 6) {
            REQUIRE(a == 5);
            REQUIRE(b == 6);
        }
    }
}

TEST_CASE("IPH bipartite expansion of a 2x3 phrase pair has six edges", "[graph]") {
    const ProsodyGraph g = fixtures::figure2_graph();
    const auto iph = edge_pairs(g, {EdgeKind::IPH});
    const std::set<std::pair<int, int>> expected = {{5, 7}, {5, 8}, {5, 9},
                                                    {6, 7}, {6, 8}, {6, 9}};
    REQUIRE(iph == expected);
}

TEST_CASE("single-word utterance has one node and no edges", "[graph]") {
    EdgeConfig cfg;
    cfg.include_pph = cfg.include_iph = cfg.include_seq = true;
    const ProsodyGraph g = build_graph(parse_annotation("AB#4"), cfg);
    REQUIRE(g.node_count() == 1);
    REQUIRE(g.edges.empty());
}

TEST_CASE("duplicate edges collapse and keep the union of kinds", "[graph]") {
    EdgeConfig cfg;
    cfg.include_pph = cfg.include_seq = true;
    const ProsodyGraph g = build_graph(parse_annotation("AB#1CD#4"), cfg);
    REQUIRE(g.edges.size() == 1);
    REQUIRE(g.edges[0].kinds.has(EdgeKind::PPH));
    REQUIRE(g.edges[0].kinds.has(EdgeKind::SEQ));
}

TEST_CASE("empty configuration is rejected", "[graph]") {
    EdgeConfig cfg;
    cfg.include_pph = cfg.include_iph = cfg.include_seq = false;
    REQUIRE_THROWS_AS(build_graph(parse_annotation("AB#4"), cfg), ConfigError);
}

TEST_CASE("built graphs match the brute-force pair classifier", "[graph][property]") {
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        const ProsodyTree tree = gen::random_tree(rng);
        EdgeConfig cfg;
        cfg.include_pph = rng.uniform_int(0, 1) == 0;
        cfg.include_iph = rng.uniform_int(0, 1) == 0;
        cfg.include_seq = !(cfg.include_pph || cfg.include_iph) || rng.uniform_int(0, 1) == 0;
        cfg.iph_pair_mode = rng.uniform_int(0, 1) == 0 ? IphPairMode::consecutive_pphs
                                                       : IphPairMode::all_pph_pairs;
        const ProsodyGraph g = build_graph(tree, cfg);
        REQUIRE(oracles::matches_graph(oracles::classify_pairs(tree, cfg), g));
    }
}

TEST_CASE("edge-count formulas", "[graph][property]") {
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        const ProsodyTree tree = gen::random_tree(rng);
        EdgeConfig pph_only;
        pph_only.include_pph = true;
        pph_only.include_iph = pph_only.include_seq = false;
        REQUIRE(build_graph(tree, pph_only).edges.size() ==
                oracles::expected_pph_edge_count(tree));

        for (IphPairMode mode : {IphPairMode::consecutive_pphs, IphPairMode::all_pph_pairs}) {
            EdgeConfig iph_only;
            iph_only.include_pph = iph_only.include_seq = false;
            iph_only.include_iph = true;
            iph_only.iph_pair_mode = mode;
            // PW sets of distinct PPHs are disjoint, so the bipartite edge
            // sets never overlap and the post-dedup count equals sum(m*n).
            REQUIRE(build_graph(tree, iph_only).edges.size() ==
                    oracles::expected_iph_edge_count(tree, mode));
        }
    }
}

TEST_CASE("SEQ edges form a Hamiltonian path and connect the graph", "[graph][property]") {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const ProsodyTree tree = gen::random_tree(rng);
        const ProsodyGraph g = build_graph(tree);  // defaults include SEQ
        const int n = g.node_count();
        for (int v = 1; v < n; ++v) REQUIRE(g.has_edge(v, v + 1, {EdgeKind::SEQ}));
        const auto dist = oracles::bfs_distances(g);
        for (int v = 1; v <= n; ++v)
            REQUIRE(dist[1][static_cast<std::size_t>(v)] != oracles::kUnreachable);
    }
}

TEST_CASE("building twice yields the same edge set", "[graph]") {
    Rng rng(14);
    for (int i = 0; i < 50; ++i) {
        const ProsodyTree tree = gen::random_tree(rng);
        EdgeConfig cfg;
        cfg.include_pph = cfg.include_iph = cfg.include_seq = true;
        REQUIRE(build_graph(tree, cfg) == build_graph(tree, cfg));
    }
}

TEST_CASE("node i carries the i-th prosodic word", "[graph][property]") {
    Rng rng(15);
    for (int i = 0; i < 50; ++i) {
        const ProsodyTree tree = gen::random_tree(rng);
        const ProsodyGraph g = build_graph(tree);
        const auto flat = flatten(tree);
        REQUIRE(g.node_count() == static_cast<int>(flat.size()));
        for (std::size_t k = 0; k < flat.size(); ++k) {
            REQUIRE(g.nodes[k].id == flat[k].pw_index);
            REQUIRE(g.nodes[k].text == flat[k].text);
        }
    }
}

TEST_CASE("adjacency projection", "[graph]") {
    SECTION("U1") {
        const AdjacencyMatrix a = to_adjacency(fixtures::u1_graph());
        REQUIRE(a.n == 2);
        REQUIRE(a.at(0, 1) == 1.0);
        REQUIRE(a.at(1, 0) == 1.0);
        REQUIRE(a.at(0, 0) == 0.0);
        REQUIRE(a.at(1, 1) == 0.0);
    }
    SECTION("U2") {
        const AdjacencyMatrix a = to_adjacency(fixtures::u2_graph());
        REQUIRE(a.n == 5);
        int ones = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) ones += a.at(i, j) == 1.0 ? 1 : 0;
        REQUIRE(ones == 4);
        REQUIRE(a.at(0, 1) == 1.0);
        REQUIRE(a.at(3, 4) == 1.0);
    }
    SECTION("symmetry and degree row sums") {
        Rng rng(16);
        for (int i = 0; i < 30; ++i) {
            const ProsodyGraph g = gen::random_graph(rng);
            const AdjacencyMatrix a = to_adjacency(g);
            for (int r = 0; r < a.n; ++r) {
                for (int c = 0; c < a.n; ++c) REQUIRE(a.at(r, c) == a.at(c, r));
                REQUIRE(a.degree(r) ==
                        static_cast<int>(g.neighbors(r + 1).size()));
            }
        }
    }
    SECTION("kind filter") {
        const ProsodyGraph g = build_graph(parse_annotation("AB#1CD#2EF#4"));
        const AdjacencyMatrix seq_only = to_adjacency(g, {EdgeKind::SEQ});
        REQUIRE(seq_only.at(0, 1) == 1.0);
        REQUIRE(seq_only.at(1, 2) == 1.0);
        const AdjacencyMatrix pph_only = to_adjacency(g, {EdgeKind::PPH});
        REQUIRE(pph_only.at(0, 1) == 1.0);
        REQUIRE(pph_only.at(1, 2) == 0.0);
    }
}

TEST_CASE("phoneme chain is a path", "[graph]") {
    const ProsodyGraph g = build_phoneme_chain({"p1", "p2", "p3", "p4"});
    REQUIRE(g.node_count() == 4);
    REQUIRE(g.edges.size() == 3);
    REQUIRE(is_seq_chain(g));
    REQUIRE(oracles::graph_diameter(g) == 3);

    const ProsodyGraph single = build_phoneme_chain(std::vector<std::string>{"p1"});
    REQUIRE(single.node_count() == 1);
    REQUIRE(single.edges.empty());

    REQUIRE_THROWS_AS(build_phoneme_chain(std::vector<std::string>{}), NoPhonemes);
}

TEST_CASE("chain diameter is n-1", "[graph][property]") {
    Rng rng(17);
    for (int i = 0; i < 20; ++i) {
        const int n = static_cast<int>(rng.uniform_int(2, 40));
        std::vector<std::string> tokens;
        for (int t = 0; t < n; ++t) tokens.push_back("p" + std::to_string(t));
        REQUIRE(oracles::graph_diameter(build_phoneme_chain(tokens)) == n - 1);
    }
}

TEST_CASE("DOT export of U1 has exactly one edge statement", "[graph][io]") {
    const std::string dot = export_graph(fixtures::u1_graph(), GraphFormat::dot);
    REQUIRE(dot.find("1 -- 2") != std::string::npos);
    std::size_t count = 0;
    for (std::size_t pos = dot.find("--"); pos != std::string::npos;
         pos = dot.find("--", pos + 1))
        ++count;
    REQUIRE(count == 1);
}

TEST_CASE("export formats are deterministic", "[graph][io]") {
    const ProsodyGraph g = fixtures::figure2_graph();
    REQUIRE(export_graph(g, GraphFormat::json) == export_graph(g, GraphFormat::json));
    REQUIRE(export_graph(g, GraphFormat::dot) == export_graph(g, GraphFormat::dot));
}

TEST_CASE("export then import is the identity", "[graph][io][property]") {
    Rng rng(18);
    for (int i = 0; i < 100; ++i) {
        const ProsodyGraph g = gen::random_graph(rng);
        CAPTURE(export_graph(g, GraphFormat::json));
        REQUIRE(import_graph(export_graph(g, GraphFormat::json), GraphFormat::json) == g);
        REQUIRE(import_graph(export_graph(g, GraphFormat::dot), GraphFormat::dot) == g);
    }
}

TEST_CASE("import rejects malformed graphs", "[graph][io]") {
    REQUIRE_THROWS_AS(import_graph("{\"nodes\":[]}", GraphFormat::json), GraphFormatError);
    REQUIRE_THROWS_AS(
        import_graph("{\"nodes\":[{\"id\":2,\"text\":\"x\"}],\"edges\":[]}",
                     GraphFormat::json),
        GraphFormatError);
    REQUIRE_THROWS_AS(
        import_graph(
            "{\"nodes\":[{\"id\":1,\"text\":\"x\"}],\"edges\":[{\"a\":1,\"b\":1,\"kinds\":[\"PPH\"]}]}",
            GraphFormat::json),
        GraphFormatError);
    REQUIRE_THROWS_AS(import_graph("not dot at all", GraphFormat::dot), GraphFormatError);
}

TEST_CASE("strip_edges keeps nodes only", "[graph]") {
    const ProsodyGraph g = fixtures::u2_graph();
    const ProsodyGraph stripped = strip_edges(g);
    REQUIRE(stripped.nodes == g.nodes);
    REQUIRE(stripped.edges.empty());
}
