#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "text.hpp"

namespace nlpfspl {

enum class AnalysisUnit { Corpus, Document, Para, Sentence };

inline std::string_view to_string(AnalysisUnit au)
{
    switch (au) {
    case AnalysisUnit::Corpus:
        return "Corpus";
    case AnalysisUnit::Document:
        return "Document";
    case AnalysisUnit::Para:
        return "Para";
    case AnalysisUnit::Sentence:
        return "Sentence";
    }
    return "Sentence";
}

/// Syntactic-unit expression. Leaves generate candidate spans; AND/OR/NOT
/// combine span predicates.
struct SUExpr {
    enum class Kind { Word, Phrase, NGram, POSRegex, CharRegex, And, Or, Not };

    Kind kind = Kind::Word;
    std::size_t n = 0;        // NGram
    std::string pattern;      // POSRegex / CharRegex
    std::vector<SUExpr> children;  // And / Or (>= 2), Not (== 1)

    static SUExpr word() { return SUExpr{Kind::Word, 0, {}, {}}; }
    static SUExpr phrase() { return SUExpr{Kind::Phrase, 0, {}, {}}; }
    static SUExpr ngram(std::size_t n) { return SUExpr{Kind::NGram, n, {}, {}}; }
    static SUExpr pos_regex(std::string p) { return SUExpr{Kind::POSRegex, 0, std::move(p), {}}; }
    static SUExpr char_regex(std::string p) { return SUExpr{Kind::CharRegex, 0, std::move(p), {}}; }
    static SUExpr all_of(std::vector<SUExpr> c) { return SUExpr{Kind::And, 0, {}, std::move(c)}; }
    static SUExpr any_of(std::vector<SUExpr> c) { return SUExpr{Kind::Or, 0, {}, std::move(c)}; }
    static SUExpr negate(SUExpr c) { return SUExpr{Kind::Not, 0, {}, {std::move(c)}}; }

    bool is_leaf() const noexcept { return kind != Kind::And && kind != Kind::Or && kind != Kind::Not; }

    /// True when the expression can enumerate spans on its own (NOT cannot).
    bool generates() const
    {
        switch (kind) {
        case Kind::Not:
            return false;
        case Kind::And:
        case Kind::Or:
            for (const auto& c : children) {
                if (c.generates()) {
                    return true;
                }
            }
            return false;
        default:
            return true;
        }
    }

    bool operator==(const SUExpr&) const = default;
};

enum class FeatureName {
    POS_Sequence,
    POS_Regex,
    Suffix_Prefix,
    Capitalization,
    Special_Chars,
    Context_Window,
    POSContext,
    Head_Directionality,
    NGram,
    Semantic_Similarity,
    Term_Frequency,
    BM25_Weight,
    InterArrival_Delay,
};

inline constexpr std::array<FeatureName, 13> all_feature_names = {
    FeatureName::POS_Sequence,   FeatureName::POS_Regex,           FeatureName::Suffix_Prefix,
    FeatureName::Capitalization, FeatureName::Special_Chars,       FeatureName::Context_Window,
    FeatureName::POSContext,     FeatureName::Head_Directionality, FeatureName::NGram,
    FeatureName::Semantic_Similarity, FeatureName::Term_Frequency, FeatureName::BM25_Weight,
    FeatureName::InterArrival_Delay,
};

inline std::string_view to_string(FeatureName f)
{
    switch (f) {
    case FeatureName::POS_Sequence:
        return "POS_Sequence";
    case FeatureName::POS_Regex:
        return "POS_Regex";
    case FeatureName::Suffix_Prefix:
        return "Suffix_Prefix";
    case FeatureName::Capitalization:
        return "Capitalization";
    case FeatureName::Special_Chars:
        return "Special_Chars";
    case FeatureName::Context_Window:
        return "Context_Window";
    case FeatureName::POSContext:
        return "POSContext";
    case FeatureName::Head_Directionality:
        return "Head_Directionality";
    case FeatureName::NGram:
        return "NGram";
    case FeatureName::Semantic_Similarity:
        return "Semantic_Similarity";
    case FeatureName::Term_Frequency:
        return "Term_Frequency";
    case FeatureName::BM25_Weight:
        return "BM25_Weight";
    case FeatureName::InterArrival_Delay:
        return "InterArrival_Delay";
    }
    return "";
}

/// Features computed over a whole analysis unit (document or corpus) rather
/// than per syntactic unit.
inline bool is_statistical(FeatureName f)
{
    return f == FeatureName::Term_Frequency || f == FeatureName::BM25_Weight ||
           f == FeatureName::InterArrival_Delay;
}

inline bool allowed_at(FeatureName f, AnalysisUnit au)
{
    if (is_statistical(f)) {
        return au == AnalysisUnit::Document || au == AnalysisUnit::Corpus;
    }
    return au != AnalysisUnit::Corpus;
}

enum class AffixKind { Suffix, Prefix };
enum class CapitalizationMode { First, All, Any };
enum class ContextScope { Sentence, Para, Document };
enum class PhraseFilter { Any, NP, VP };

struct PosSequenceParams {
    bool operator==(const PosSequenceParams&) const = default;
};
struct PosRegexParams {
    std::string pattern;
    bool operator==(const PosRegexParams&) const = default;
};
struct SuffixPrefixParams {
    AffixKind kind = AffixKind::Suffix;
    std::size_t length = 1;
    std::optional<std::string> pattern;  // NULL = no constraint
    bool operator==(const SuffixPrefixParams&) const = default;
};
struct CapitalizationParams {
    CapitalizationMode mode = CapitalizationMode::First;
    bool operator==(const CapitalizationParams&) const = default;
};
struct SpecialCharsParams {
    std::vector<std::string> chars;  // one UTF-8 character each
    bool operator==(const SpecialCharsParams&) const = default;
};
struct ContextWindowParams {
    std::size_t width = 1;
    ContextScope scope = ContextScope::Sentence;
    bool operator==(const ContextWindowParams&) const = default;
};
struct PosContextParams {
    std::string pattern;
    bool operator==(const PosContextParams&) const = default;
};
struct HeadDirectionalityParams {
    PhraseFilter phrases = PhraseFilter::Any;
    bool operator==(const HeadDirectionalityParams&) const = default;
};
struct NGramParams {
    std::size_t n = 1;
    bool operator==(const NGramParams&) const = default;
};
struct SemanticSimilarityParams {
    std::string reference;
    bool operator==(const SemanticSimilarityParams&) const = default;
};
struct TermFrequencyParams {
    bool operator==(const TermFrequencyParams&) const = default;
};
struct Bm25WeightParams {
    double k1 = 1.2;
    double b = 0.75;
    bool operator==(const Bm25WeightParams&) const = default;
};
struct InterArrivalDelayParams {
    std::string term;
    bool operator==(const InterArrivalDelayParams&) const = default;
};

using FeatureParams =
    std::variant<PosSequenceParams, PosRegexParams, SuffixPrefixParams, CapitalizationParams, SpecialCharsParams,
                 ContextWindowParams, PosContextParams, HeadDirectionalityParams, NGramParams,
                 SemanticSimilarityParams, TermFrequencyParams, Bm25WeightParams, InterArrivalDelayParams>;

/// Variant alternative index equals the FeatureName enumerator value.
inline FeatureName feature_name_of(const FeatureParams& p) { return static_cast<FeatureName>(p.index()); }

struct SourcePosition {
    std::size_t line = 0;
    std::size_t column = 0;
};

struct FeatureDecl {
    FeatureParams params;
    SourcePosition where{};  // not part of equality

    FeatureName name() const { return feature_name_of(params); }

    friend bool operator==(const FeatureDecl& a, const FeatureDecl& b) { return a.params == b.params; }
};

struct MetaBlock {
    AnalysisUnit analysis_unit = AnalysisUnit::Sentence;
    SUExpr syntactic_unit = SUExpr::word();
    bool normalize_variants = false;

    bool operator==(const MetaBlock&) const = default;
};

struct FeatureSpec {
    MetaBlock meta;
    std::vector<FeatureDecl> features;

    const FeatureDecl* find(FeatureName f) const
    {
        for (const auto& d : features) {
            if (d.name() == f) {
                return &d;
            }
        }
        return nullptr;
    }

    bool operator==(const FeatureSpec&) const = default;
};

struct Diagnostic {
    std::string message;
    SourcePosition where{};

    bool operator==(const Diagnostic&) const = default;
};

namespace detail {

inline bool regex_compiles(const std::string& pattern)
{
    try {
        std::regex re(pattern, std::regex::ECMAScript);
        return true;
    } catch (const std::regex_error&) {
        return false;
    }
}

inline void validate_su(const SUExpr& e, std::vector<Diagnostic>& out)
{
    using K = SUExpr::Kind;
    switch (e.kind) {
    case K::NGram:
        if (e.n < 1) {
            out.push_back({"Syntactic_Unit: NGram size must be >= 1"});
        }
        break;
    case K::POSRegex:
    case K::CharRegex:
        if (!regex_compiles(e.pattern)) {
            out.push_back({"Syntactic_Unit: regex does not compile: " + e.pattern});
        }
        break;
    case K::And:
    case K::Or:
        if (e.children.size() < 2) {
            out.push_back({"Syntactic_Unit: AND/OR needs at least two operands"});
        }
        if (!e.generates()) {
            out.push_back({"Syntactic_Unit: NOT must be combined with a unit that yields spans"});
        }
        for (const auto& c : e.children) {
            validate_su(c, out);
        }
        break;
    case K::Not:
        if (e.children.size() != 1) {
            out.push_back({"Syntactic_Unit: NOT takes exactly one operand"});
        } else {
            validate_su(e.children[0], out);
        }
        break;
    default:
        break;
    }
}

}  // namespace detail

/// Returns every problem with `spec`; an empty list means the spec is legal.
inline std::vector<Diagnostic> validate(const FeatureSpec& spec)
{
    std::vector<Diagnostic> out;
    const auto au = spec.meta.analysis_unit;
    if (spec.meta.syntactic_unit.kind == SUExpr::Kind::Not) {
        out.push_back({"Syntactic_Unit: NOT cannot be used alone"});
    }
    detail::validate_su(spec.meta.syntactic_unit, out);
    if (spec.features.empty()) {
        out.push_back({"no features declared"});
    }
    std::array<bool, all_feature_names.size()> seen{};
    for (const auto& decl : spec.features) {
        const auto name = decl.name();
        const std::string label(to_string(name));
        auto& flag = seen[static_cast<std::size_t>(name)];
        if (flag) {
            out.push_back({label + " declared more than once", decl.where});
        }
        flag = true;
        if (!allowed_at(name, au)) {
            out.push_back({label + (is_statistical(name) ? " requires Document/Corpus AU"
                                                          : " requires Sentence/Para/Document AU"),
                           decl.where});
        }
        std::visit(
            [&](const auto& p) {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, PosRegexParams> || std::is_same_v<P, PosContextParams>) {
                    if (p.pattern.empty() || !detail::regex_compiles(p.pattern)) {
                        out.push_back({label + ": invalid regex '" + p.pattern + "'", decl.where});
                    }
                } else if constexpr (std::is_same_v<P, SuffixPrefixParams>) {
                    if (p.length < 1) {
                        out.push_back({label + ": length must be >= 1", decl.where});
                    }
                    if (p.pattern && !detail::regex_compiles(*p.pattern)) {
                        out.push_back({label + ": invalid regex '" + *p.pattern + "'", decl.where});
                    }
                } else if constexpr (std::is_same_v<P, SpecialCharsParams>) {
                    if (p.chars.empty()) {
                        out.push_back({label + ": at least one character required", decl.where});
                    }
                    for (const auto& c : p.chars) {
                        if (text::utf8_length(c) != 1) {
                            out.push_back({label + ": '" + c + "' is not a single character", decl.where});
                        }
                    }
                } else if constexpr (std::is_same_v<P, ContextWindowParams>) {
                    if (p.width < 1) {
                        out.push_back({label + ": width must be >= 1", decl.where});
                    }
                } else if constexpr (std::is_same_v<P, NGramParams>) {
                    if (p.n < 1) {
                        out.push_back({label + ": n must be >= 1", decl.where});
                    }
                } else if constexpr (std::is_same_v<P, SemanticSimilarityParams>) {
                    if (text::trim(p.reference).empty()) {
                        out.push_back({label + ": reference term is empty", decl.where});
                    }
                } else if constexpr (std::is_same_v<P, InterArrivalDelayParams>) {
                    if (text::trim(p.term).empty()) {
                        out.push_back({label + ": term is empty", decl.where});
                    }
                } else if constexpr (std::is_same_v<P, Bm25WeightParams>) {
                    if (!(p.k1 >= 0.0) || !(p.b >= 0.0 && p.b <= 1.0)) {
                        out.push_back({label + ": require k1 >= 0 and 0 <= b <= 1", decl.where});
                    }
                }
            },
            decl.params);
    }
    if (seen[static_cast<std::size_t>(FeatureName::POSContext)] &&
        !seen[static_cast<std::size_t>(FeatureName::Context_Window)]) {
        out.push_back({"POSContext requires Context_Window", spec.find(FeatureName::POSContext)->where});
    }
    return out;
}

namespace detail {

inline std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    out += '"';
    return out;
}

// Bare patterns must survive statement splitting and value lexing unchanged.
inline bool bare_pattern_ok(std::string_view p)
{
    if (p.empty() || p == "NULL" || p.front() == '"' || p.front() == '[') {
        return false;
    }
    for (char c : p) {
        if (text::is_space(c) || c == ';' || c == '#' || c == '"' || c == '[' || c == ']' || c == '(' ||
            c == ')' || c == '\\' || c == ',' || static_cast<unsigned char>(c) >= 0x80 ||
            static_cast<unsigned char>(c) < 0x20) {
            return false;
        }
    }
    return true;
}

inline std::string pattern_text(const std::string& p) { return bare_pattern_ok(p) ? p : quote(p); }

inline bool bare_char_ok(std::string_view c)
{
    if (c.size() != 1) {
        return false;
    }
    char ch = c[0];
    return !(text::is_space(ch) || ch == ',' || ch == ';' || ch == '#' || ch == '"' || ch == '[' ||
             ch == ']' || ch == '(' || ch == ')' || ch == '\\' || static_cast<unsigned char>(ch) < 0x20);
}

inline std::string serialize_su(const SUExpr& e)
{
    using K = SUExpr::Kind;
    switch (e.kind) {
    case K::Word:
        return "Word";
    case K::Phrase:
        return "Phrase";
    case K::NGram:
        return "NGram(" + std::to_string(e.n) + ")";
    case K::POSRegex:
        return "POS Regex " + quote(e.pattern);
    case K::CharRegex:
        return "Regex " + quote(e.pattern);
    case K::Not:
        return "NOT " + serialize_su(e.children.at(0));
    case K::And:
    case K::Or: {
        std::vector<std::string> parts;
        for (const auto& c : e.children) {
            parts.push_back(serialize_su(c));
        }
        return "(" + text::join(parts, e.kind == K::And ? " AND " : " OR ") + ")";
    }
    }
    return "";
}

inline std::string serialize_params(const FeatureParams& params)
{
    return std::visit(
        [](const auto& p) -> std::string {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, PosSequenceParams> || std::is_same_v<P, TermFrequencyParams>) {
                return "YES";
            } else if constexpr (std::is_same_v<P, PosRegexParams> || std::is_same_v<P, PosContextParams>) {
                return pattern_text(p.pattern);
            } else if constexpr (std::is_same_v<P, SuffixPrefixParams>) {
                return std::string("[") + (p.kind == AffixKind::Suffix ? "Suffix" : "Prefix") + ", " +
                       std::to_string(p.length) + ", " + (p.pattern ? quote(*p.pattern) : std::string("NULL")) +
                       "]";
            } else if constexpr (std::is_same_v<P, CapitalizationParams>) {
                switch (p.mode) {
                case CapitalizationMode::First:
                    return "First";
                case CapitalizationMode::All:
                    return "All";
                case CapitalizationMode::Any:
                    return "Any";
                }
                return "First";
            } else if constexpr (std::is_same_v<P, SpecialCharsParams>) {
                std::vector<std::string> items;
                for (const auto& c : p.chars) {
                    items.push_back(bare_char_ok(c) ? c : quote(c));
                }
                return text::join(items, ",");
            } else if constexpr (std::is_same_v<P, ContextWindowParams>) {
                const char* scope = p.scope == ContextScope::Sentence ? "Sentence"
                                    : p.scope == ContextScope::Para   ? "Para"
                                                                      : "Document";
                return "[" + std::to_string(p.width) + ", " + scope + "]";
            } else if constexpr (std::is_same_v<P, HeadDirectionalityParams>) {
                return p.phrases == PhraseFilter::Any ? "YES" : p.phrases == PhraseFilter::NP ? "NP" : "VP";
            } else if constexpr (std::is_same_v<P, NGramParams>) {
                return std::to_string(p.n);
            } else if constexpr (std::is_same_v<P, SemanticSimilarityParams>) {
                return quote(p.reference);
            } else if constexpr (std::is_same_v<P, Bm25WeightParams>) {
                if (p == Bm25WeightParams{}) {
                    return "YES";
                }
                return "[" + text::format_double(p.k1) + ", " + text::format_double(p.b) + "]";
            } else if constexpr (std::is_same_v<P, InterArrivalDelayParams>) {
                return quote(p.term);
            }
        },
        params);
}

}  // namespace detail

/// Canonical text: one `Key := Value;` statement per line. Analysis_Unit and
/// Syntactic_Unit are always written; Normalize_Morphosyntactic_Variants only
/// when enabled.
inline std::string serialize(const FeatureSpec& spec)
{
    std::string out;
    out += "Analysis_Unit := ";
    out += to_string(spec.meta.analysis_unit);
    out += ";\n";
    out += "Syntactic_Unit := " + detail::serialize_su(spec.meta.syntactic_unit) + ";\n";
    if (spec.meta.normalize_variants) {
        out += "Normalize_Morphosyntactic_Variants := YES;\n";
    }
    for (const auto& d : spec.features) {
        out += std::string(to_string(d.name())) + " := " + detail::serialize_params(d.params) + ";\n";
    }
    return out;
}

}  // namespace nlpfspl
