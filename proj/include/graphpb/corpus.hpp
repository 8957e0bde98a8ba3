#pragma once

#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "graphpb/errors.hpp"
#include "graphpb/prosody.hpp"

namespace graphpb {

namespace detail {

inline bool blank_line(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

inline std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

}  // namespace detail

// Streams utterance records from a corpus file. One record is
//   <id>\t<annotated text>
// optionally followed by an indented line of whitespace-separated phoneme
// tokens, one token per text character. Blank lines separate nothing and are
// skipped.
class CorpusReader {
  public:
    CorpusReader(std::istream& in, MarkerScheme scheme = {})
        : in_(&in), scheme_(std::move(scheme)) {
        scheme_.validate();
    }

    // Next utterance in file order, or nullopt at end of input.
    std::optional<AnnotatedUtterance> next() {
        std::string line;
        while (true) {
            if (pending_.has_value()) {
                line = std::move(*pending_);
                pending_.reset();
            } else if (!std::getline(*in_, line)) {
                return std::nullopt;
            } else {
                ++line_no_;
            }
            if (detail::blank_line(line)) continue;
            break;
        }
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line[0] == ' ' || line[0] == '\t')
            throw RecordFormatError("line " + std::to_string(line_no_) +
                                    ": phoneme line without a preceding record");
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw RecordFormatError("line " + std::to_string(line_no_) +
                                    ": expected \"<id>\\t<annotated text>\"");
        AnnotatedUtterance utt;
        utt.id = line.substr(0, tab);
        utt.raw = line.substr(tab + 1);

        // Peek one line: an indented line carries this record's phonemes.
        std::string next_line;
        if (std::getline(*in_, next_line)) {
            ++line_no_;
            if (!next_line.empty() && next_line.back() == '\r') next_line.pop_back();
            if (!next_line.empty() && (next_line[0] == ' ' || next_line[0] == '\t')) {
                utt.phonemes = detail::split_tokens(next_line);
                if (utt.phonemes.empty())
                    throw RecordFormatError("line " + std::to_string(line_no_) +
                                            ": indented line holds no phoneme tokens");
                const std::size_t chars = utf8_length(strip_markers(utt.raw, scheme_));
                if (utt.phonemes.size() != chars)
                    throw PhonemeCountMismatch(
                        "line " + std::to_string(line_no_) + ": " +
                        std::to_string(utt.phonemes.size()) + " phoneme tokens for " +
                        std::to_string(chars) + " characters");
            } else {
                pending_ = std::move(next_line);
            }
        }
        return utt;
    }

  private:
    std::istream* in_;
    MarkerScheme scheme_;
    std::optional<std::string> pending_;
    std::size_t line_no_ = 0;
};

// Reads a whole corpus file into memory, in file order.
inline std::vector<AnnotatedUtterance> load_corpus(const std::string& path,
                                                   const MarkerScheme& scheme = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    CorpusReader reader(in, scheme);
    std::vector<AnnotatedUtterance> out;
    while (auto utt = reader.next()) out.push_back(std::move(*utt));
    return out;
}

}  // namespace graphpb
