#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nlpfspl {

enum class ChunkType { NP, VP };

/// Half-open token range [begin, end) within one sentence, with its head.
struct Chunk {
    ChunkType type;
    std::size_t begin;
    std::size_t end;
    std::size_t head;

    bool operator==(const Chunk&) const = default;
};

inline bool is_noun_tag(std::string_view t) { return t == "NN" || t == "NNS" || t == "NNP" || t == "NNPS"; }

inline bool is_verb_tag(std::string_view t)
{
    return t == "VB" || t == "VBD" || t == "VBG" || t == "VBN" || t == "VBP" || t == "VBZ";
}

/// Tag-pattern chunker.
///   NP: DT? (JJ|JJR|JJS|NN|NNS|NNP|NNPS|AFX|HYPH)* (NN|NNS|NNP|NNPS), longest match;
///       head = last noun.
///   VP: (MD|VB*) ((RB|RP)* VB*)*, must contain a VB* tag; head = first VB* token.
/// Chunks never overlap and are returned left to right.
inline std::vector<Chunk> chunk_tags(std::span<const std::string> tags)
{
    auto np_modifier = [](std::string_view t) {
        return t == "JJ" || t == "JJR" || t == "JJS" || is_noun_tag(t) || t == "AFX" || t == "HYPH";
    };
    std::vector<Chunk> out;
    std::size_t i = 0;
    const std::size_t n = tags.size();
    while (i < n) {
        // noun phrase
        {
            std::size_t j = i;
            if (tags[j] == "DT") {
                ++j;
            }
            std::optional<std::size_t> last_noun;
            std::size_t k = j;
            while (k < n && np_modifier(tags[k])) {
                if (is_noun_tag(tags[k])) {
                    last_noun = k;
                }
                ++k;
            }
            if (last_noun) {
                out.push_back({ChunkType::NP, i, *last_noun + 1, *last_noun});
                i = *last_noun + 1;
                continue;
            }
        }
        // verb phrase
        if (tags[i] == "MD" || is_verb_tag(tags[i])) {
            std::size_t k = i;
            std::optional<std::size_t> first_verb;
            std::size_t last_verb = i;
            while (k < n && (tags[k] == "MD" || is_verb_tag(tags[k]) || tags[k] == "RB" || tags[k] == "RP")) {
                if (is_verb_tag(tags[k])) {
                    if (!first_verb) {
                        first_verb = k;
                    }
                    last_verb = k;
                }
                ++k;
            }
            if (first_verb) {
                out.push_back({ChunkType::VP, i, last_verb + 1, *first_verb});
                i = last_verb + 1;
                continue;
            }
        }
        ++i;
    }
    return out;
}

}  // namespace nlpfspl
