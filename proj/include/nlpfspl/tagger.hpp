#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "text.hpp"

// Fallback tokenizer and part-of-speech tagger for raw text. Lexicon lookup
// plus suffix heuristics; crude on purpose. Annotated input is preferred
// wherever tag quality matters.

namespace nlpfspl {

namespace detail {

inline const std::unordered_map<std::string, std::string>& tag_lexicon()
{
    static const std::unordered_map<std::string, std::string> lexicon = [] {
        std::unordered_map<std::string, std::string> m;
        auto add = [&m](std::initializer_list<const char*> words, const char* tag) {
            for (const char* w : words) {
                m.emplace(w, tag);
            }
        };
        add({"the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "no",
             "all", "both", "another"},
            "DT");
        add({"of", "in", "on", "at", "by", "for", "from", "with", "about", "into", "onto", "over",
             "under", "between", "among", "through", "during", "before", "after", "without", "within",
             "across", "against", "as", "if", "than", "since", "because", "while", "whether", "per",
             "via", "upon"},
            "IN");
        add({"and", "or", "but", "nor", "yet"}, "CC");
        add({"i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them"}, "PRP");
        add({"my", "your", "his", "its", "our", "their"}, "PRP$");
        add({"who", "whom", "which"}, "WDT");
        add({"what"}, "WP");
        add({"when", "where", "why", "how"}, "WRB");
        add({"to"}, "TO");
        add({"not", "very", "also", "well", "only", "then", "there", "here", "often", "never",
             "always", "too", "just", "now"},
            "RB");
        add({"can", "could", "may", "might", "must", "shall", "should", "will", "would"}, "MD");
        add({"is", "has", "does"}, "VBZ");
        add({"are", "am", "have", "do"}, "VBP");
        add({"was", "were", "had", "did"}, "VBD");
        add({"be"}, "VB");
        add({"been", "done", "made", "given", "taken", "written", "seen", "known", "shown", "found"},
            "VBN");
        add({"being", "having"}, "VBG");
        add({"identify", "extract", "detect", "classify", "predict", "find", "prepare", "recognize",
             "determine", "estimate", "measure", "label", "tag", "annotate", "mine", "analyze",
             "analyse", "summarize", "rank", "recommend", "cluster", "segment", "translate", "parse",
             "discover", "build", "design", "use", "compute", "retrieve", "link", "resolve", "map",
             "monitor", "track", "generate", "assign", "infer", "locate", "capture", "describe",
             "represent", "evaluate", "score", "select", "filter", "mention", "reference", "diagnose",
             "receive", "recover", "start", "make", "give", "take", "get", "see", "know", "show"},
            "VB");
        add({"study", "report", "professional", "physician", "patient", "condition", "day", "history",
             "date", "dose", "seizure", "initiation", "summary", "procedure", "entity", "event", "text",
             "document", "sentence", "word", "phrase", "news", "data", "corpus", "model", "task",
             "problem", "application", "feature", "score", "metric", "type", "interaction", "tweet",
             "calendar", "requirement", "specification", "input", "output", "value", "share",
             "revenue", "profit", "loss", "product", "partner", "competitor", "merger", "acquisition",
             "company", "gene", "protein", "label", "sequence", "classification", "extraction",
             "recognition", "accuracy", "precision", "recall", "f1", "mention", "release", "press",
             "epilepsy", "narcolepsy", "cataplexy", "levetiracetam", "discharge", "domain", "user"},
            "NN");
        add({"medical", "financial", "biomedical", "significant", "specific", "open", "first", "new",
             "unknown", "spontaneous", "molecular", "corporate", "social", "clinical", "other",
             "several", "many", "multiple", "different", "similar", "related"},
            "JJ");
        return m;
    }();
    return lexicon;
}

inline const std::unordered_map<std::string, std::string>& irregular_verbs()
{
    static const std::unordered_map<std::string, std::string> m = {
        {"is", "be"},       {"are", "be"},     {"am", "be"},        {"was", "be"},     {"were", "be"},
        {"been", "be"},     {"being", "be"},   {"has", "have"},     {"had", "have"},   {"having", "have"},
        {"does", "do"},     {"did", "do"},     {"done", "do"},      {"made", "make"},  {"given", "give"},
        {"gave", "give"},   {"taken", "take"}, {"took", "take"},    {"written", "write"},
        {"wrote", "write"}, {"seen", "see"},   {"saw", "see"},      {"known", "know"}, {"knew", "know"},
        {"shown", "show"},  {"found", "find"}, {"got", "get"},      {"built", "build"},
        {"went", "go"},     {"gone", "go"},    {"ran", "run"},      {"began", "begin"},
        {"begun", "begin"}, {"said", "say"},   {"led", "lead"},     {"held", "hold"},
    };
    return m;
}

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool is_punct_char(char c)
{
    switch (c) {
    case '.':
    case ',':
    case ';':
    case ':':
    case '!':
    case '?':
    case '(':
    case ')':
    case '[':
    case ']':
    case '{':
    case '}':
    case '"':
    case '\'':
        return true;
    default:
        return false;
    }
}

// Curly quotes are three-byte UTF-8 sequences E2 80 98/99/9C/9D.
inline std::size_t curly_quote_len(std::string_view s, std::size_t pos)
{
    if (pos + 3 <= s.size() && static_cast<unsigned char>(s[pos]) == 0xE2 &&
        static_cast<unsigned char>(s[pos + 1]) == 0x80) {
        auto c = static_cast<unsigned char>(s[pos + 2]);
        if (c == 0x98 || c == 0x99 || c == 0x9C || c == 0x9D) {
            return 3;
        }
    }
    return 0;
}

inline std::string punct_tag(std::string_view p)
{
    if (p == "." || p == "!" || p == "?") {
        return ".";
    }
    if (p == ",") {
        return ",";
    }
    if (p == ";" || p == ":") {
        return ":";
    }
    if (p == "(" || p == "[" || p == "{") {
        return "-LRB-";
    }
    if (p == ")" || p == "]" || p == "}") {
        return "-RRB-";
    }
    if (p == "-") {
        return "HYPH";
    }
    return "``";
}

}  // namespace detail

/// Tags one word given the previous word's tag (empty at sentence start).
inline std::string guess_tag(std::string_view word, std::string_view prev_tag, bool sentence_initial)
{
    if (word.empty()) {
        return "NN";
    }
    if (word.size() == 1 && (detail::is_punct_char(word[0]) || word[0] == '-')) {
        return detail::punct_tag(word);
    }
    if (detail::curly_quote_len(word, 0) == word.size()) {
        return "``";
    }
    bool has_alpha = false;
    bool has_digit = false;
    bool all_upper = true;
    for (char c : word) {
        has_alpha |= text::is_ascii_alpha(c);
        has_digit |= text::is_ascii_digit(c);
        if (text::is_ascii_lower(c)) {
            all_upper = false;
        }
    }
    if (has_digit && !has_alpha) {
        return "CD";
    }
    if (has_digit && text::is_ascii_digit(word[0])) {
        return "CD";
    }
    if (!has_alpha) {
        return "SYM";
    }
    const std::string lower = text::to_lower(word);
    const auto& lex = detail::tag_lexicon();
    if (auto it = lex.find(lower); it != lex.end()) {
        std::string tag = it->second;
        // a base-form verb after a determiner or adjective reads as a noun
        if (tag == "VB" && (prev_tag == "DT" || prev_tag == "JJ" || prev_tag == "PRP$")) {
            return "NN";
        }
        // a noun/verb ambiguous word right after "to" or a modal reads as a verb
        if (tag == "NN" && (prev_tag == "TO" || prev_tag == "MD")) {
            return "VB";
        }
        return tag;
    }
    if (all_upper && word.size() > 1) {
        return "NNP";
    }
    if (text::is_ascii_upper(word[0]) && !sentence_initial) {
        return "NNP";
    }
    if (text::ends_with(lower, "ing") && lower.size() > 4) {
        return "VBG";
    }
    if (text::ends_with(lower, "ed") && lower.size() > 3) {
        const bool after_aux = prev_tag.starts_with("VB") || prev_tag == "RB";
        return after_aux ? "VBN" : "VBD";
    }
    if (text::ends_with(lower, "ly") && lower.size() > 3) {
        return "RB";
    }
    for (const char* suffix : {"al", "ous", "ive", "ic", "ful", "less", "able", "ible", "ary"}) {
        if (text::ends_with(lower, suffix) && lower.size() > std::string_view(suffix).size() + 2) {
            return "JJ";
        }
    }
    if (text::ends_with(lower, "s") && !text::ends_with(lower, "ss") && lower.size() > 3) {
        return prev_tag == "PRP" || prev_tag == "NN" || prev_tag == "NNP" ? "VBZ" : "NNS";
    }
    if (prev_tag == "TO" || prev_tag == "MD") {
        return "VB";
    }
    return "NN";
}

/// Base form of a verb token ("prepared" -> "prepare", "identified" -> "identify").
inline std::string verb_base_form(std::string_view word)
{
    const std::string lower = text::to_lower(word);
    const auto& irregular = detail::irregular_verbs();
    if (auto it = irregular.find(lower); it != irregular.end()) {
        return it->second;
    }
    const auto& lex = detail::tag_lexicon();
    auto is_known_verb = [&lex](const std::string& w) {
        auto it = lex.find(w);
        return it != lex.end() && it->second == "VB";
    };
    if (is_known_verb(lower)) {
        return lower;
    }
    std::string stem;
    if (text::ends_with(lower, "ied") && lower.size() > 4) {
        return lower.substr(0, lower.size() - 3) + "y";
    }
    if (text::ends_with(lower, "ies") && lower.size() > 4) {
        return lower.substr(0, lower.size() - 3) + "y";
    }
    if (text::ends_with(lower, "ing") && lower.size() > 4) {
        stem = lower.substr(0, lower.size() - 3);
    } else if (text::ends_with(lower, "ed") && lower.size() > 3) {
        stem = lower.substr(0, lower.size() - 2);
    } else if (text::ends_with(lower, "es") && lower.size() > 3) {
        if (is_known_verb(lower.substr(0, lower.size() - 1))) {
            return lower.substr(0, lower.size() - 1);
        }
        stem = lower.substr(0, lower.size() - 2);
    } else if (text::ends_with(lower, "s") && !text::ends_with(lower, "ss") && lower.size() > 3) {
        stem = lower.substr(0, lower.size() - 1);
    } else {
        return lower;
    }
    if (is_known_verb(stem)) {
        return stem;
    }
    if (is_known_verb(stem + "e")) {
        return stem + "e";
    }
    const auto n = stem.size();
    if (n >= 2 && stem[n - 1] == stem[n - 2] && !detail::is_vowel(stem[n - 1]) && stem[n - 1] != 'l' &&
        stem[n - 1] != 's' && stem[n - 1] != 'z') {
        return stem.substr(0, n - 1);
    }
    if (n > 0 && stem[n - 1] == 'v') {
        return stem + "e";
    }
    return stem;
}

namespace detail {

// Splits one whitespace-delimited chunk into tokens, detaching leading and
// trailing punctuation. Returns pairs of (token, ends_sentence_candidate).
inline std::vector<std::string> detach_punctuation(std::string_view chunk)
{
    std::vector<std::string> lead;
    std::vector<std::string> trail;
    std::size_t b = 0;
    std::size_t e = chunk.size();
    while (b < e) {
        if (auto q = curly_quote_len(chunk, b); q > 0) {
            lead.emplace_back(chunk.substr(b, q));
            b += q;
        } else if (is_punct_char(chunk[b])) {
            lead.emplace_back(1, chunk[b]);
            ++b;
        } else {
            break;
        }
    }
    while (e > b) {
        if (e >= 3 && e - 3 >= b && curly_quote_len(chunk, e - 3) == 3) {
            trail.emplace_back(chunk.substr(e - 3, 3));
            e -= 3;
        } else if (is_punct_char(chunk[e - 1])) {
            trail.emplace_back(1, chunk[e - 1]);
            --e;
        } else {
            break;
        }
    }
    std::vector<std::string> out = std::move(lead);
    if (e > b) {
        out.emplace_back(chunk.substr(b, e - b));
    }
    out.insert(out.end(), trail.rbegin(), trail.rend());
    return out;
}

inline bool is_terminator(std::string_view tok) { return tok == "." || tok == "?" || tok == "!"; }

}  // namespace detail

/// Tags a sequence of already-split words.
inline std::vector<std::string> tag_words(const std::vector<std::string>& words)
{
    std::vector<std::string> tags;
    tags.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        tags.push_back(guess_tag(words[i], i == 0 ? std::string_view{} : std::string_view(tags.back()),
                                 i == 0));
    }
    return tags;
}

/// Splits raw text into paragraphs (blank lines), sentences (terminal
/// punctuation followed by whitespace or end of text) and tokens, then tags.
inline AnnotatedCorpus tokenize_and_tag(std::string_view raw, const std::string& doc_id = "doc1")
{
    std::vector<std::vector<std::string>> paragraphs_lines;
    {
        std::vector<std::string> current;
        for (auto& line : text::split(raw, '\n')) {
            if (text::trim(line).empty()) {
                if (!current.empty()) {
                    paragraphs_lines.push_back(std::move(current));
                    current.clear();
                }
            } else {
                current.push_back(line);
            }
        }
        if (!current.empty()) {
            paragraphs_lines.push_back(std::move(current));
        }
    }

    Document doc{doc_id, {}};
    for (const auto& lines : paragraphs_lines) {
        Paragraph para{doc.paragraphs.size(), {}};
        std::vector<std::string> words;
        auto flush = [&] {
            if (words.empty()) {
                return;
            }
            Sentence sent{para.sentences.size(), {}};
            auto tags = tag_words(words);
            for (std::size_t i = 0; i < words.size(); ++i) {
                sent.tokens.push_back(Token{words[i], tags[i], doc_id, para.index, sent.index, i, std::nullopt});
            }
            para.sentences.push_back(std::move(sent));
            words.clear();
        };
        for (const auto& chunk : text::split_ws(text::join(lines, " "))) {
            auto pieces = detail::detach_punctuation(chunk);
            for (const auto& p : pieces) {
                words.push_back(p);
            }
            // the chunk ended at whitespace; a trailing terminator closes the sentence
            if (!pieces.empty()) {
                bool closes = false;
                for (auto it = pieces.rbegin(); it != pieces.rend(); ++it) {
                    if (detail::is_terminator(*it)) {
                        closes = true;
                        break;
                    }
                    if (!(it->size() == 1 && detail::is_punct_char((*it)[0])) &&
                        detail::curly_quote_len(*it, 0) != it->size()) {
                        break;
                    }
                }
                if (closes) {
                    flush();
                }
            }
        }
        flush();
        if (!para.sentences.empty()) {
            doc.paragraphs.push_back(std::move(para));
        }
    }
    if (doc.paragraphs.empty()) {
        return AnnotatedCorpus{};
    }
    return AnnotatedCorpus({std::move(doc)});
}

}  // namespace nlpfspl
