#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "graphpb/errors.hpp"
#include "graphpb/graph.hpp"
#include "graphpb/prosody.hpp"

namespace graphpb {

enum class GraphFormat { json, dot };

namespace detail {

inline std::string dot_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string dot_unescape(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\' || i + 1 == s.size()) {
            out += s[i];
            continue;
        }
        switch (s[++i]) {
            case 'n': out += '\n'; break;
            case 'r': out += '\r'; break;
            case 't': out += '\t'; break;
            default: out += s[i];
        }
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(s.substr(start));
            break;
        }
        out.emplace_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

inline nlohmann::json graph_to_json_value(const ProsodyGraph& g) {
    g.validate();
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : g.nodes) {
        nlohmann::json jn{{"id", n.id}, {"text", n.text}};
        if (!n.phonemes.empty()) jn["phonemes"] = n.phonemes;
        nodes.push_back(std::move(jn));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges) {
        nlohmann::json kinds = nlohmann::json::array();
        for (EdgeKind k : e.kinds.list()) kinds.push_back(to_string(k));
        edges.push_back(nlohmann::json{{"a", e.a}, {"b", e.b}, {"kinds", std::move(kinds)}});
    }
    return nlohmann::json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

inline ProsodyGraph graph_from_json_value(const nlohmann::json& j) {
    ProsodyGraph g;
    try {
        for (const auto& jn : j.at("nodes")) {
            GraphNode n;
            n.id = jn.at("id").get<int>();
            n.text = jn.at("text").get<std::string>();
            if (jn.contains("phonemes"))
                n.phonemes = jn.at("phonemes").get<std::vector<std::string>>();
            g.nodes.push_back(std::move(n));
        }
        for (const auto& je : j.at("edges")) {
            GraphEdge e;
            e.a = je.at("a").get<int>();
            e.b = je.at("b").get<int>();
            for (const auto& k : je.at("kinds"))
                e.kinds.add(edge_kind_from_string(k.get<std::string>()));
            g.edges.push_back(e);
        }
    } catch (const nlohmann::json::exception& ex) {
        throw GraphFormatError(std::string("graph JSON: ") + ex.what());
    }
    g.validate();
    return g;
}

inline std::string graph_to_dot(const ProsodyGraph& g, const std::string& name = "prosody") {
    g.validate();
    std::ostringstream out;
    out << "graph " << name << " {\n";
    for (const auto& n : g.nodes) {
        out << "  " << n.id << " [label=\"" << detail::dot_escape(n.text) << "\"";
        if (!n.phonemes.empty())
            out << ", phonemes=\"" << detail::dot_escape(detail::join(n.phonemes, ' '))
                << "\"";
        out << "];\n";
    }
    for (const auto& e : g.edges) {
        std::vector<std::string> kinds;
        for (EdgeKind k : e.kinds.list()) kinds.emplace_back(to_string(k));
        out << "  " << e.a << " -- " << e.b << " [kinds=\"" << detail::join(kinds, ',')
            << "\"];\n";
    }
    out << "}\n";
    return out.str();
}

namespace detail {

// Parses the `key="value"` attribute list between [ and ].
inline std::vector<std::pair<std::string, std::string>> parse_dot_attrs(
    std::string_view body, int line_no) {
    std::vector<std::pair<std::string, std::string>> attrs;
    std::size_t pos = 0;
    auto fail = [&](const char* what) -> std::size_t {
        throw GraphFormatError("DOT line " + std::to_string(line_no) + ": " + what);
    };
    while (pos < body.size()) {
        while (pos < body.size() && (body[pos] == ' ' || body[pos] == ',')) ++pos;
        if (pos >= body.size()) break;
        const auto eq = body.find('=', pos);
        if (eq == std::string_view::npos) fail("expected key=\"value\"");
        std::string key(body.substr(pos, eq - pos));
        if (eq + 1 >= body.size() || body[eq + 1] != '"') fail("expected quoted value");
        std::size_t end = eq + 2;
        std::string raw;
        while (end < body.size() && body[end] != '"') {
            if (body[end] == '\\' && end + 1 < body.size()) raw += body[end++];
            raw += body[end++];
        }
        if (end >= body.size()) fail("unterminated quoted value");
        attrs.emplace_back(std::move(key), dot_unescape(raw));
        pos = end + 1;
    }
    return attrs;
}

}  // namespace detail

// Reads back the subset of DOT emitted by graph_to_dot.
inline ProsodyGraph graph_from_dot(std::string_view text) {
    ProsodyGraph g;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool in_graph = false;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t e = line.find_last_not_of(" \t\r");
        std::string_view s{line.data() + b, e - b + 1};
        if (!in_graph) {
            if (s.substr(0, 5) == "graph" && s.back() == '{') {
                in_graph = true;
                continue;
            }
            throw GraphFormatError("DOT line " + std::to_string(line_no) +
                                   ": expected graph header");
        }
        if (s == "}") break;
        if (s.back() == ';') s.remove_suffix(1);
        const auto lb = s.find('[');
        if (lb == std::string_view::npos || s.back() != ']')
            throw GraphFormatError("DOT line " + std::to_string(line_no) +
                                   ": expected attribute list");
        std::string_view head = s.substr(0, lb);
        const auto attrs = detail::parse_dot_attrs(s.substr(lb + 1, s.size() - lb - 2), line_no);
        std::istringstream hin{std::string(head)};
        int a = 0;
        if (!(hin >> a))
            throw GraphFormatError("DOT line " + std::to_string(line_no) + ": expected node id");
        std::string dash;
        if (hin >> dash) {
            int bnode = 0;
            if (dash != "--" || !(hin >> bnode))
                throw GraphFormatError("DOT line " + std::to_string(line_no) +
                                       ": expected \"a -- b\"");
            GraphEdge edge;
            edge.a = a;
            edge.b = bnode;
            for (const auto& [key, value] : attrs)
                if (key == "kinds")
                    for (const auto& k : detail::split(value, ','))
                        edge.kinds.add(edge_kind_from_string(k));
            g.edges.push_back(edge);
        } else {
            GraphNode node;
            node.id = a;
            for (const auto& [key, value] : attrs) {
                if (key == "label") node.text = value;
                if (key == "phonemes" && !value.empty()) {
                    for (const auto& tok : detail::split(value, ' '))
                        node.phonemes.push_back(tok);
                }
            }
            g.nodes.push_back(std::move(node));
        }
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const GraphEdge& x, const GraphEdge& y) {
                  return std::pair(x.a, x.b) < std::pair(y.a, y.b);
              });
    g.validate();
    return g;
}

// Deterministic serialization: JSON uses lexicographically ordered keys and
// edges sorted by (a, b); DOT lists nodes then edges in id order.
inline std::string export_graph(const ProsodyGraph& g, GraphFormat format) {
    if (format == GraphFormat::json) return graph_to_json_value(g).dump();
    return graph_to_dot(g);
}

inline ProsodyGraph import_graph(std::string_view text, GraphFormat format) {
    if (format == GraphFormat::json) {
        try {
            return graph_from_json_value(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& ex) {
            throw GraphFormatError(std::string("graph JSON: ") + ex.what());
        }
    }
    return graph_from_dot(text);
}

// --- tree serialization (CLI output) ---

inline nlohmann::json tree_to_json_value(const ProsodyTree& tree) {
    tree.validate();
    nlohmann::json iphs = nlohmann::json::array();
    for (const auto& iph : tree.iphs) {
        nlohmann::json pphs = nlohmann::json::array();
        for (const auto& pph : iph.phrases) {
            nlohmann::json pws = nlohmann::json::array();
            for (const auto& pw : pph.words) {
                nlohmann::json jw{{"text", pw.text}};
                if (!pw.phonemes.empty()) jw["phonemes"] = pw.phonemes;
                pws.push_back(std::move(jw));
            }
            pphs.push_back(nlohmann::json{{"pws", std::move(pws)}});
        }
        iphs.push_back(nlohmann::json{{"pphs", std::move(pphs)}});
    }
    return nlohmann::json{{"iphs", std::move(iphs)}};
}

}  // namespace graphpb
