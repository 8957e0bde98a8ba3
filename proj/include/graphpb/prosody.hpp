#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graphpb/errors.hpp"
#include "graphpb/unicode.hpp"

namespace graphpb {

// Boundary markers interleaved with the text, ordered by level:
// prosodic word < prosodic phrase < intonation phrase < utterance.
struct MarkerScheme {
    std::string pw_marker = "#1";
    std::string pph_marker = "#2";
    std::string iph_marker = "#3";
    std::string utter_marker = "#4";

    // Markers by level, 1 = PW ... 4 = utterance.
    const std::string& marker(int level) const {
        switch (level) {
            case 1: return pw_marker;
            case 2: return pph_marker;
            case 3: return iph_marker;
            default: return utter_marker;
        }
    }

    // All four distinct, non-empty, and none a prefix of another. Prefix
    // freedom makes marker matching unambiguous at any byte position.
    void validate() const {
        const std::string* m[4] = {&pw_marker, &pph_marker, &iph_marker, &utter_marker};
        for (int i = 0; i < 4; ++i) {
            if (m[i]->empty())
                throw InvalidMarkerScheme("marker for level " + std::to_string(i + 1) +
                                          " is empty");
            for (int j = 0; j < 4; ++j) {
                if (i == j) continue;
                if (m[j]->size() >= m[i]->size() &&
                    m[j]->compare(0, m[i]->size(), *m[i]) == 0) {
                    throw InvalidMarkerScheme("marker \"" + *m[i] +
                                              "\" is a prefix of \"" + *m[j] + "\"");
                }
            }
        }
    }
};

struct ProsodyWord {
    std::string text;
    std::vector<std::string> phonemes;  // one per character; empty when not supplied

    bool operator==(const ProsodyWord&) const = default;
};

struct ProsodicPhrase {
    std::vector<ProsodyWord> words;

    bool operator==(const ProsodicPhrase&) const = default;
};

struct IntonationPhrase {
    std::vector<ProsodicPhrase> phrases;

    bool operator==(const IntonationPhrase&) const = default;
};

// utterance -> IPH -> PPH -> PW containment chain.
struct ProsodyTree {
    std::vector<IntonationPhrase> iphs;

    bool operator==(const ProsodyTree&) const = default;

    std::size_t pw_count() const {
        std::size_t n = 0;
        for (const auto& iph : iphs)
            for (const auto& pph : iph.phrases) n += pph.words.size();
        return n;
    }

    std::size_t pph_count() const {
        std::size_t n = 0;
        for (const auto& iph : iphs) n += iph.phrases.size();
        return n;
    }

    std::size_t iph_count() const { return iphs.size(); }

    // Marker-free text, concatenated in reading order.
    std::string text() const {
        std::string out;
        for (const auto& iph : iphs)
            for (const auto& pph : iph.phrases)
                for (const auto& pw : pph.words) out += pw.text;
        return out;
    }

    // Containment plus no-empty-level invariants.
    void validate() const {
        if (iphs.empty()) throw EmptySegment("utterance has no intonation phrases");
        for (const auto& iph : iphs) {
            if (iph.phrases.empty()) throw EmptySegment("intonation phrase has no phrases");
            for (const auto& pph : iph.phrases) {
                if (pph.words.empty()) throw EmptySegment("prosodic phrase has no words");
                for (const auto& pw : pph.words)
                    if (pw.text.empty()) throw EmptySegment("prosodic word has empty text");
            }
        }
    }
};

struct AnnotatedUtterance {
    std::string id;
    std::string raw;                      // characters interleaved with markers
    std::vector<std::string> phonemes;    // optional, one token per character
};

namespace detail {

// Returns the boundary level (1..4) of the marker starting at byte `pos`, or
// 0 if no marker starts there. Prefix-free markers make the match unique.
inline int match_marker(std::string_view raw, std::size_t pos, const MarkerScheme& scheme) {
    for (int level = 1; level <= 4; ++level) {
        const std::string& m = scheme.marker(level);
        if (raw.compare(pos, m.size(), m) == 0) return level;
    }
    return 0;
}

// True when the code point at `pos` opens some marker (so a non-matching
// occurrence of it is an unrecognized marker token, not text).
inline bool starts_like_marker(std::string_view raw, std::size_t pos,
                               const MarkerScheme& scheme) {
    char32_t cp;
    const std::size_t n = utf8_decode(raw, pos, cp);
    const std::string head(raw.substr(pos, n));
    for (int level = 1; level <= 4; ++level)
        if (scheme.marker(level).compare(0, head.size(), head) == 0) return true;
    return false;
}

}  // namespace detail

// Removes every boundary marker, keeping the text characters.
inline std::string strip_markers(std::string_view raw, const MarkerScheme& scheme = {}) {
    scheme.validate();
    std::string out;
    std::size_t pos = 0;
    while (pos < raw.size()) {
        if (int level = detail::match_marker(raw, pos, scheme); level != 0) {
            pos += scheme.marker(level).size();
            continue;
        }
        char32_t cp;
        const std::size_t n = utf8_decode(raw, pos, cp);
        out.append(raw.substr(pos, n));
        pos += n;
    }
    return out;
}

// Single streaming pass over the annotated string. A marker of level k closes
// every level <= k (containment); a missing trailing utterance marker is
// supplied implicitly by flushing whatever is open at end of input.
inline ProsodyTree parse_annotation(std::string_view raw, const MarkerScheme& scheme = {}) {
    scheme.validate();

    ProsodyTree tree;
    std::string cur_pw;
    ProsodicPhrase cur_pph;
    IntonationPhrase cur_iph;

    std::size_t pos = 0;       // byte offset
    std::size_t char_pos = 0;  // code point offset, for error messages
    bool last_was_marker = false;

    auto close = [&](int level) {
        if (!cur_pw.empty()) {
            cur_pph.words.push_back(ProsodyWord{std::move(cur_pw), {}});
            cur_pw.clear();
        }
        if (level >= 2 && !cur_pph.words.empty()) {
            cur_iph.phrases.push_back(std::move(cur_pph));
            cur_pph = {};
        }
        if (level >= 3 && !cur_iph.phrases.empty()) {
            tree.iphs.push_back(std::move(cur_iph));
            cur_iph = {};
        }
    };

    while (pos < raw.size()) {
        const int level = detail::match_marker(raw, pos, scheme);
        if (level != 0) {
            if (pos == 0)
                throw MalformedMarker("marker at start of utterance (offset 0)");
            if (last_was_marker)
                throw EmptySegment("adjacent markers produce a zero-length prosodic word at offset " +
                                   std::to_string(char_pos));
            close(level);
            pos += scheme.marker(level).size();
            char_pos += utf8_length(scheme.marker(level));
            last_was_marker = true;
            continue;
        }
        if (detail::starts_like_marker(raw, pos, scheme))
            throw MalformedMarker("unrecognized marker token at offset " +
                                  std::to_string(char_pos));
        char32_t cp;
        const std::size_t n = utf8_decode(raw, pos, cp);
        cur_pw.append(raw.substr(pos, n));
        pos += n;
        ++char_pos;
        last_was_marker = false;
    }
    close(4);  // implicit utterance boundary

    if (tree.iphs.empty())
        throw EmptySegment("utterance is empty after marker removal");
    tree.validate();
    return tree;
}

// One row per prosodic word, in reading order. All indices are global and
// 1-based: pw over the utterance, pph over the utterance, iph over the
// utterance.
struct FlatWord {
    int pw_index = 0;
    std::string text;
    int pph_index = 0;
    int iph_index = 0;

    bool operator==(const FlatWord&) const = default;
};

inline std::vector<FlatWord> flatten(const ProsodyTree& tree) {
    tree.validate();
    std::vector<FlatWord> out;
    int pw = 0, pph = 0, iph = 0;
    for (const auto& i : tree.iphs) {
        ++iph;
        for (const auto& p : i.phrases) {
            ++pph;
            for (const auto& w : p.words)
                out.push_back(FlatWord{++pw, w.text, pph, iph});
        }
    }
    return out;
}

// Inverse of flatten for the structural fields (phoneme annotations are not
// part of the flat form).
inline ProsodyTree rebuild_tree(const std::vector<FlatWord>& flat) {
    if (flat.empty()) throw EmptySegment("flat word list is empty");
    ProsodyTree tree;
    int prev_pph = 0, prev_iph = 0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const FlatWord& w = flat[i];
        if (w.pw_index != static_cast<int>(i) + 1)
            throw Error("flat list: pw_index not contiguous at position " + std::to_string(i));
        if (w.iph_index < prev_iph || w.pph_index < prev_pph)
            throw Error("flat list: indices not monotonic at position " + std::to_string(i));
        if (w.iph_index > prev_iph) {
            if (w.iph_index != prev_iph + 1)
                throw Error("flat list: iph_index gap at position " + std::to_string(i));
            tree.iphs.emplace_back();
            prev_iph = w.iph_index;
        }
        if (w.pph_index > prev_pph) {
            if (w.pph_index != prev_pph + 1)
                throw Error("flat list: pph_index gap at position " + std::to_string(i));
            tree.iphs.back().phrases.emplace_back();
            prev_pph = w.pph_index;
        }
        if (tree.iphs.empty() || tree.iphs.back().phrases.empty())
            throw Error("flat list: word before any phrase at position " + std::to_string(i));
        tree.iphs.back().phrases.back().words.push_back(ProsodyWord{w.text, {}});
    }
    tree.validate();
    return tree;
}

// Distributes per-character phoneme tokens onto the words of the tree.
// Token i belongs to the i-th character of the marker-free text.
inline void attach_phonemes(ProsodyTree& tree, const std::vector<std::string>& tokens) {
    tree.validate();
    std::size_t total = 0;
    for (const auto& iph : tree.iphs)
        for (const auto& pph : iph.phrases)
            for (const auto& pw : pph.words) total += utf8_length(pw.text);
    if (tokens.size() != total)
        throw PhonemeCountMismatch("got " + std::to_string(tokens.size()) +
                                   " phoneme tokens for " + std::to_string(total) +
                                   " characters");
    std::size_t next = 0;
    for (auto& iph : tree.iphs)
        for (auto& pph : iph.phrases)
            for (auto& pw : pph.words) {
                const std::size_t len = utf8_length(pw.text);
                pw.phonemes.assign(tokens.begin() + static_cast<std::ptrdiff_t>(next),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(next + len));
                next += len;
            }
}

// Parses an utterance and, when phoneme tokens are present, attaches them.
inline ProsodyTree parse_utterance(const AnnotatedUtterance& utt,
                                   const MarkerScheme& scheme = {}) {
    ProsodyTree tree = parse_annotation(utt.raw, scheme);
    if (!utt.phonemes.empty()) attach_phonemes(tree, utt.phonemes);
    return tree;
}

// Half-open character index range [begin, end) of each prosodic word within
// the utterance's character (and hence phoneme-token) sequence, in PW order.
inline std::vector<std::pair<std::size_t, std::size_t>> pw_char_spans(const ProsodyTree& tree) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t start = 0;
    for (const auto& iph : tree.iphs)
        for (const auto& pph : iph.phrases)
            for (const auto& pw : pph.words) {
                const std::size_t len = utf8_length(pw.text);
                spans.emplace_back(start, start + len);
                start += len;
            }
    return spans;
}

}  // namespace graphpb
