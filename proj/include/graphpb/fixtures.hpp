#pragma once

#include <string>

#include "graphpb/graph.hpp"
#include "graphpb/prosody.hpp"

namespace graphpb {
namespace fixtures {

// The two reference segmentations of one utterance:
//   U1 = ({v1, v2},          {(1,2)})
//   U2 = ({v1..v5},          {(1,2), (4,5)})
// and the two-PPH intonation phrase whose bipartite expansion has six edges
// (PPH2 = {v5, v6}, PPH3 = {v7, v8, v9}). Node texts are placeholders; only
// the structure is documented.

inline std::string u1_annotated() { return "v1#1v2#4"; }

inline std::string u2_annotated() { return "v1#1v2#2v3#2v4#1v5#4"; }

inline std::string figure2_annotated() {
    return "v1#1v2#1v3#1v4#3v5#1v6#2v7#1v8#1v9#4";
}

inline EdgeConfig pph_only_config() {
    EdgeConfig cfg;
    cfg.include_pph = true;
    cfg.include_iph = false;
    cfg.include_seq = false;
    return cfg;
}

inline EdgeConfig pph_iph_config() {
    EdgeConfig cfg;
    cfg.include_pph = true;
    cfg.include_iph = true;
    cfg.include_seq = false;
    return cfg;
}

inline ProsodyGraph u1_graph() {
    return build_graph(parse_annotation(u1_annotated()), pph_only_config());
}

inline ProsodyGraph u2_graph() {
    return build_graph(parse_annotation(u2_annotated()), pph_only_config());
}

inline ProsodyGraph figure2_graph() {
    return build_graph(parse_annotation(figure2_annotated()), pph_iph_config());
}

}  // namespace fixtures
}  // namespace graphpb
