#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "bm25.hpp"
#include "chunker.hpp"
#include "corpus.hpp"
#include "embeddings.hpp"
#include "error.hpp"
#include "normalization.hpp"
#include "spec.hpp"
#include "text.hpp"

namespace nlpfspl {

/// A contiguous token span [first.token, end) inside one sentence.
struct SyntacticUnitInstance {
    TokenAddress first;
    std::size_t end = 0;
    std::string text;  // surfaces joined by single spaces

    std::size_t size() const noexcept { return end - first.token; }
    TokenAddress address(std::size_t i) const { return {first.doc, first.para, first.sent, first.token + i}; }

    bool operator==(const SyntacticUnitInstance&) const = default;
};

namespace detail {

struct SentenceView {
    const Sentence* sentence = nullptr;
    std::vector<std::string> surfaces;
    std::vector<std::string> tags;
    std::vector<Chunk> chunks;

    explicit SentenceView(const Sentence& s) : sentence(&s)
    {
        for (const auto& t : s.tokens) {
            surfaces.push_back(t.surface);
            tags.push_back(t.pos);
        }
        chunks = chunk_tags(tags);
    }

    std::size_t size() const noexcept { return surfaces.size(); }

    static std::string join_range(const std::vector<std::string>& v, std::size_t b, std::size_t e)
    {
        std::string out;
        for (std::size_t i = b; i < e; ++i) {
            if (i > b) {
                out += ' ';
            }
            out += v[i];
        }
        return out;
    }
};

using Span = std::pair<std::size_t, std::size_t>;

/// Compiled syntactic-unit expression.
class SpanMatcher {
  public:
    explicit SpanMatcher(const SUExpr& e) : m_kind(e.kind), m_n(e.n)
    {
        if (e.kind == SUExpr::Kind::POSRegex || e.kind == SUExpr::Kind::CharRegex) {
            m_re.emplace(e.pattern, std::regex::ECMAScript);
        }
        for (const auto& c : e.children) {
            m_children.emplace_back(c);
        }
        m_generates = e.generates();
    }

    bool accepts(const SentenceView& s, std::size_t b, std::size_t e) const
    {
        using K = SUExpr::Kind;
        switch (m_kind) {
        case K::Word:
            return e - b == 1;
        case K::Phrase:
            return std::any_of(s.chunks.begin(), s.chunks.end(),
                               [&](const Chunk& c) { return c.begin == b && c.end == e; });
        case K::NGram:
            return e - b == m_n;
        case K::POSRegex:
            return std::regex_match(SentenceView::join_range(s.tags, b, e), *m_re);
        case K::CharRegex:
            return std::regex_match(SentenceView::join_range(s.surfaces, b, e), *m_re);
        case K::And:
            return std::all_of(m_children.begin(), m_children.end(),
                               [&](const SpanMatcher& c) { return c.accepts(s, b, e); });
        case K::Or:
            return std::any_of(m_children.begin(), m_children.end(),
                               [&](const SpanMatcher& c) { return c.accepts(s, b, e); });
        case K::Not:
            return !m_children.front().accepts(s, b, e);
        }
        return false;
    }

    /// Candidate spans, sorted and unique.
    std::vector<Span> generate(const SentenceView& s) const
    {
        using K = SUExpr::Kind;
        std::vector<Span> out;
        const std::size_t n = s.size();
        switch (m_kind) {
        case K::Word:
            for (std::size_t i = 0; i < n; ++i) {
                out.emplace_back(i, i + 1);
            }
            break;
        case K::Phrase:
            for (const auto& c : s.chunks) {
                out.emplace_back(c.begin, c.end);
            }
            break;
        case K::NGram:
            for (std::size_t i = 0; m_n > 0 && i + m_n <= n; ++i) {
                out.emplace_back(i, i + m_n);
            }
            break;
        case K::POSRegex:
        case K::CharRegex:
            leftmost_longest(s, out);
            break;
        case K::And:
        case K::Or: {
            std::set<Span> pool;
            for (const auto& c : m_children) {
                if (c.m_generates) {
                    for (const auto& sp : c.generate(s)) {
                        pool.insert(sp);
                    }
                }
            }
            for (const auto& sp : pool) {
                if (m_kind == K::Or || accepts(s, sp.first, sp.second)) {
                    out.push_back(sp);
                }
            }
            break;
        }
        case K::Not:
            break;
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

  private:
    // Token-aligned scan: at each start take the longest full match, then
    // resume after it.
    void leftmost_longest(const SentenceView& s, std::vector<Span>& out) const
    {
        const std::size_t n = s.size();
        std::size_t i = 0;
        while (i < n) {
            std::optional<std::size_t> best;
            for (std::size_t e = n; e > i; --e) {
                if (accepts(s, i, e)) {
                    best = e;
                    break;
                }
            }
            if (best) {
                out.emplace_back(i, *best);
                i = *best;
            } else {
                ++i;
            }
        }
    }

    SUExpr::Kind m_kind;
    std::size_t m_n;
    std::optional<std::regex> m_re;
    std::vector<SpanMatcher> m_children;
    bool m_generates = true;
};

inline SyntacticUnitInstance make_instance(const SentenceView& s, const TokenAddress& base, Span sp)
{
    return {{base.doc, base.para, base.sent, sp.first}, sp.second, SentenceView::join_range(s.surfaces, sp.first, sp.second)};
}

inline std::vector<SyntacticUnitInstance> resolve_in_sentence(const SpanMatcher& m, const SentenceView& s,
                                                              const TokenAddress& base)
{
    std::vector<SyntacticUnitInstance> out;
    for (const auto& sp : m.generate(s)) {
        out.push_back(make_instance(s, base, sp));
    }
    return out;
}

}  // namespace detail

/// All SU instances of the corpus in (doc, para, sent, start, end) order.
inline std::vector<SyntacticUnitInstance> resolve_syntactic_units(const AnnotatedCorpus& corpus, const SUExpr& su)
{
    detail::SpanMatcher matcher(su);
    std::vector<SyntacticUnitInstance> out;
    const auto& docs = corpus.documents();
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (std::size_t p = 0; p < docs[d].paragraphs.size(); ++p) {
            const auto& para = docs[d].paragraphs[p];
            for (std::size_t s = 0; s < para.sentences.size(); ++s) {
                detail::SentenceView view(para.sentences[s]);
                auto inst = detail::resolve_in_sentence(matcher, view, {d, p, s, 0});
                out.insert(out.end(), std::make_move_iterator(inst.begin()), std::make_move_iterator(inst.end()));
            }
        }
    }
    return out;
}

inline std::vector<SyntacticUnitInstance> resolve_syntactic_units(const AnnotatedCorpus& corpus,
                                                                  const FeatureSpec& spec)
{
    return resolve_syntactic_units(corpus, spec.meta.syntactic_unit);
}

// ---------------------------------------------------------------------------
// Per-SU features

inline std::string extract_pos_sequence(const AnnotatedCorpus& corpus, const SyntacticUnitInstance& su)
{
    std::vector<std::string> tags;
    for (std::size_t i = 0; i < su.size(); ++i) {
        tags.push_back(corpus.at(su.address(i)).pos);
    }
    return text::join(tags, " ");
}

inline bool extract_pos_regex(std::string_view pos_sequence, const std::regex& pattern)
{
    return std::regex_match(pos_sequence.begin(), pos_sequence.end(), pattern);
}

/// Last (or first) n code points; the whole text when shorter. Empty when a
/// pattern is given and the affix does not fully match it.
inline std::string extract_suffix_prefix(std::string_view su_text, AffixKind kind, std::size_t n,
                                         const std::regex* pattern = nullptr)
{
    std::string affix = kind == AffixKind::Suffix ? text::utf8_suffix(su_text, n) : text::utf8_prefix(su_text, n);
    if (pattern != nullptr && !std::regex_match(affix, *pattern)) {
        return {};
    }
    return affix;
}

inline bool extract_capitalization(std::string_view su_text, CapitalizationMode mode)
{
    switch (mode) {
    case CapitalizationMode::First:
        return !su_text.empty() && text::is_ascii_upper(su_text.front());
    case CapitalizationMode::All: {
        bool any_alpha = false;
        for (char c : su_text) {
            if (text::is_ascii_lower(c)) {
                return false;
            }
            any_alpha = any_alpha || text::is_ascii_upper(c);
        }
        return any_alpha;
    }
    case CapitalizationMode::Any:
        return std::any_of(su_text.begin(), su_text.end(), [](char c) { return text::is_ascii_upper(c); });
    }
    return false;
}

inline std::vector<bool> extract_special_chars(std::string_view su_text, const std::vector<std::string>& chars)
{
    std::vector<bool> out;
    out.reserve(chars.size());
    for (const auto& c : chars) {
        out.push_back(su_text.find(c) != std::string_view::npos);
    }
    return out;
}

namespace detail {

inline std::optional<TokenAddress> step_next(const AnnotatedCorpus& corpus, TokenAddress a, ContextScope scope)
{
    const auto& doc = corpus.documents().at(a.doc);
    if (a.token + 1 < doc.paragraphs[a.para].sentences[a.sent].tokens.size()) {
        ++a.token;
        return a;
    }
    if (scope == ContextScope::Sentence) {
        return std::nullopt;
    }
    for (;;) {
        if (a.sent + 1 < doc.paragraphs[a.para].sentences.size()) {
            ++a.sent;
        } else if (scope == ContextScope::Document && a.para + 1 < doc.paragraphs.size()) {
            ++a.para;
            a.sent = 0;
            if (doc.paragraphs[a.para].sentences.empty()) {
                continue;
            }
        } else {
            return std::nullopt;
        }
        if (!doc.paragraphs[a.para].sentences[a.sent].tokens.empty()) {
            a.token = 0;
            return a;
        }
    }
}

inline std::optional<TokenAddress> step_prev(const AnnotatedCorpus& corpus, TokenAddress a, ContextScope scope)
{
    const auto& doc = corpus.documents().at(a.doc);
    if (a.token > 0) {
        --a.token;
        return a;
    }
    if (scope == ContextScope::Sentence) {
        return std::nullopt;
    }
    for (;;) {
        if (a.sent > 0) {
            --a.sent;
        } else if (scope == ContextScope::Document && a.para > 0) {
            --a.para;
            if (doc.paragraphs[a.para].sentences.empty()) {
                continue;
            }
            a.sent = doc.paragraphs[a.para].sentences.size() - 1;
        } else {
            return std::nullopt;
        }
        const auto& toks = doc.paragraphs[a.para].sentences[a.sent].tokens;
        if (!toks.empty()) {
            a.token = toks.size() - 1;
            return a;
        }
    }
}

}  // namespace detail

/// Surfaces of up to `width` tokens on each side of the SU, left part first,
/// both in textual order, truncated at the scope boundary.
///
/// Distance is positional inside the SU's own sentence. Beyond it, a token
/// whose surface already occurs in the SU's sentence is skipped and does not
/// count towards the width. The optional tag filter is applied after the
/// window is cut.
inline std::vector<std::string> extract_context_window(const AnnotatedCorpus& corpus, const SyntacticUnitInstance& su,
                                                       std::size_t width, ContextScope scope,
                                                       const std::regex* pos_filter = nullptr)
{
    const auto& sentence =
        corpus.documents().at(su.first.doc).paragraphs.at(su.first.para).sentences.at(su.first.sent);
    std::set<std::string_view> own;
    for (const auto& t : sentence.tokens) {
        own.insert(t.surface);
    }
    auto eligible = [&](const TokenAddress& a) {
        const bool same_sentence = a.doc == su.first.doc && a.para == su.first.para && a.sent == su.first.sent;
        return same_sentence || own.count(corpus.at(a).surface) == 0;
    };

    std::vector<TokenAddress> left;
    for (auto a = detail::step_prev(corpus, su.first, scope); a && left.size() < width;
         a = detail::step_prev(corpus, *a, scope)) {
        if (eligible(*a)) {
            left.push_back(*a);
        }
    }
    std::reverse(left.begin(), left.end());
    std::vector<TokenAddress> right;
    for (auto a = detail::step_next(corpus, su.address(su.size() - 1), scope); a && right.size() < width;
         a = detail::step_next(corpus, *a, scope)) {
        if (eligible(*a)) {
            right.push_back(*a);
        }
    }

    std::vector<std::string> out;
    auto emit = [&](const TokenAddress& a) {
        const auto& tok = corpus.at(a);
        if (pos_filter == nullptr || std::regex_match(tok.pos, *pos_filter)) {
            out.push_back(tok.surface);
        }
    };
    std::for_each(left.begin(), left.end(), emit);
    std::for_each(right.begin(), right.end(), emit);
    return out;
}

enum class HeadDirection { HeadInitial, HeadFinal, NotInPhrase };

inline std::string_view to_string(HeadDirection h)
{
    switch (h) {
    case HeadDirection::HeadInitial:
        return "HeadInitial";
    case HeadDirection::HeadFinal:
        return "HeadFinal";
    case HeadDirection::NotInPhrase:
        return "NotInPhrase";
    }
    return "NotInPhrase";
}

/// Chunk fully containing [begin, end): HeadInitial when its head precedes the
/// span, HeadFinal when the head is inside or after it.
inline HeadDirection extract_head_directionality(const std::vector<Chunk>& chunks, std::size_t begin, std::size_t end,
                                                 PhraseFilter filter = PhraseFilter::Any)
{
    for (const auto& c : chunks) {
        if (filter == PhraseFilter::NP && c.type != ChunkType::NP) {
            continue;
        }
        if (filter == PhraseFilter::VP && c.type != ChunkType::VP) {
            continue;
        }
        if (c.begin <= begin && end <= c.end) {
            return c.head < begin ? HeadDirection::HeadInitial : HeadDirection::HeadFinal;
        }
    }
    return HeadDirection::NotInPhrase;
}

inline HeadDirection extract_head_directionality(const AnnotatedCorpus& corpus, const SyntacticUnitInstance& su,
                                                 PhraseFilter filter = PhraseFilter::Any)
{
    const auto& sentence =
        corpus.documents().at(su.first.doc).paragraphs.at(su.first.para).sentences.at(su.first.sent);
    std::vector<std::string> tags;
    for (const auto& t : sentence.tokens) {
        tags.push_back(t.pos);
    }
    return extract_head_directionality(chunk_tags(tags), su.first.token, su.end, filter);
}

/// Cosine between the unit-weighted term embeddings of the two texts; 0 when
/// either is fully out of vocabulary.
inline double extract_semantic_similarity(std::string_view su_text, std::string_view reference,
                                          const EmbeddingStore& store)
{
    return cosine(term_embedding(su_text, store), term_embedding(reference, store));
}

// ---------------------------------------------------------------------------
// Statistical features

namespace detail {

inline bool is_term_token(std::string_view s)
{
    return std::any_of(s.begin(), s.end(), [](char c) {
        return text::is_ascii_alpha(c) || text::is_ascii_digit(c) || static_cast<unsigned char>(c) >= 0x80;
    });
}

}  // namespace detail

/// Maps a token to the term it is counted under.
class TermKey {
  public:
    TermKey() = default;
    explicit TermKey(const NormalizationTable* table) : m_table(table) {}

    std::string operator()(const Token& t) const
    {
        if (m_table == nullptr) {
            return text::to_lower(t.surface);
        }
        return t.norm_class ? *t.norm_class : m_table->normalize(t.surface);
    }

    std::string operator()(std::string_view word) const
    {
        return m_table == nullptr ? text::to_lower(word) : m_table->normalize(word);
    }

  private:
    const NormalizationTable* m_table = nullptr;
};

/// Tokens of each analysis-unit instance in global order: one entry per
/// document at Document AU, a single entry at Corpus AU.
inline std::vector<std::vector<const Token*>> analysis_unit_tokens(const AnnotatedCorpus& corpus, AnalysisUnit au)
{
    if (au != AnalysisUnit::Document && au != AnalysisUnit::Corpus) {
        throw ValidationError("statistical features require Document or Corpus analysis unit");
    }
    std::vector<std::vector<const Token*>> out;
    if (au == AnalysisUnit::Corpus) {
        out.emplace_back();
    }
    for (const auto& doc : corpus.documents()) {
        if (au == AnalysisUnit::Document) {
            out.emplace_back();
        }
        for (const auto& p : doc.paragraphs) {
            for (const auto& s : p.sentences) {
                for (const auto& t : s.tokens) {
                    out.back().push_back(&t);
                }
            }
        }
    }
    return out;
}

/// Term counts per analysis-unit instance. Tokens without a letter or digit
/// are not terms.
inline std::vector<std::map<std::string, std::size_t>> extract_term_frequency(const AnnotatedCorpus& corpus,
                                                                              AnalysisUnit au,
                                                                              const TermKey& key = {})
{
    std::vector<std::map<std::string, std::size_t>> out;
    for (const auto& unit : analysis_unit_tokens(corpus, au)) {
        auto& counts = out.emplace_back();
        for (const Token* t : unit) {
            if (detail::is_term_token(t->surface)) {
                ++counts[key(*t)];
            }
        }
    }
    return out;
}

/// Gaps between successive occurrences of `term`, counted over all tokens.
inline std::vector<std::int64_t> inter_arrival_delays(const std::vector<std::string>& keys, const std::string& term)
{
    std::vector<std::int64_t> out;
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i] == term) {
            if (prev) {
                out.push_back(static_cast<std::int64_t>(i - *prev - 1));
            }
            prev = i;
        }
    }
    return out;
}

inline std::vector<std::vector<std::int64_t>> extract_inter_arrival_delays(const AnnotatedCorpus& corpus,
                                                                           std::string_view term, AnalysisUnit au,
                                                                           const TermKey& key = {})
{
    const std::string wanted = key(text::trim(term));
    std::vector<std::vector<std::int64_t>> out;
    for (const auto& unit : analysis_unit_tokens(corpus, au)) {
        std::vector<std::string> keys;
        keys.reserve(unit.size());
        for (const Token* t : unit) {
            keys.push_back(key(*t));
        }
        out.push_back(inter_arrival_delays(keys, wanted));
    }
    return out;
}

/// BM25 weights per analysis-unit instance; documents of the corpus are the
/// retrieval collection. At Corpus AU the whole corpus is weighted as one
/// concatenated document against the per-document statistics.
inline std::vector<std::map<std::string, double>> extract_bm25_weights(const AnnotatedCorpus& corpus, AnalysisUnit au,
                                                                       Bm25Params params, const TermKey& key = {})
{
    std::vector<std::vector<std::string>> docs;
    for (const auto& unit : analysis_unit_tokens(corpus, AnalysisUnit::Document)) {
        auto& words = docs.emplace_back();
        for (const Token* t : unit) {
            if (detail::is_term_token(t->surface)) {
                words.push_back(key(*t));
            }
        }
    }
    std::vector<std::map<std::string, double>> out;
    if (docs.empty()) {
        if (au == AnalysisUnit::Corpus) {
            out.emplace_back();
        }
        return out;
    }
    Bm25Corpus bm25(docs, params);
    if (au == AnalysisUnit::Corpus) {
        out.push_back(bm25.weights_for_all().weights);
    } else {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            out.push_back(bm25.weights_for(d).weights);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature matrix

using StringList = std::vector<std::string>;
using BoolList = std::vector<bool>;
using IntList = std::vector<std::int64_t>;
using Cell = std::variant<std::monostate, bool, std::int64_t, double, std::string, StringList, BoolList, IntList>;

/// Identity columns of a row. SU rows fill every field; analysis-unit rows
/// leave the positional fields empty.
struct RowKey {
    std::string su;
    std::string doc_id;
    std::optional<std::size_t> para_idx;
    std::optional<std::size_t> sent_idx;
    std::optional<std::size_t> start;
    std::optional<std::size_t> end;

    bool operator==(const RowKey&) const = default;
};

struct FeatureMatrix {
    std::vector<std::string> columns;  // declaration order
    std::vector<RowKey> keys;
    std::vector<std::vector<Cell>> rows;

    std::size_t row_count() const noexcept { return rows.size(); }
    std::size_t column_count() const noexcept { return columns.size(); }

    const Cell& at(std::size_t row, std::string_view column) const
    {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c] == column) {
                return rows.at(row).at(c);
            }
        }
        throw ValidationError("no column '" + std::string(column) + "'");
    }

    bool operator==(const FeatureMatrix&) const = default;
};

struct ExtractionOptions {
    const EmbeddingStore* embeddings = nullptr;
    std::optional<Thesaurus> thesaurus;
    /// SU rows for which this returns false are dropped.
    std::function<bool(const AnnotatedCorpus&, const SyntacticUnitInstance&)> row_filter;
    unsigned threads = 1;
};

namespace detail {

inline StringList sorted_pairs(const std::map<std::string, std::size_t>& m)
{
    StringList out;
    for (const auto& [k, v] : m) {
        out.push_back(k + ":" + std::to_string(v));
    }
    return out;
}

inline StringList sorted_pairs(const std::map<std::string, double>& m)
{
    StringList out;
    for (const auto& [k, v] : m) {
        out.push_back(k + ":" + text::format_double(v));
    }
    return out;
}

struct CompiledFeature {
    const FeatureDecl* decl;
    std::optional<std::regex> re;
};

struct RowResult {
    std::vector<RowKey> keys;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> errors;
};

class MatrixBuilder {
  public:
    MatrixBuilder(const AnnotatedCorpus& corpus, const FeatureSpec& spec, const ExtractionOptions& opts)
        : m_corpus(corpus), m_spec(spec), m_opts(opts)
    {
        auto diags = validate(spec);
        if (!diags.empty()) {
            std::vector<std::string> msgs;
            for (const auto& d : diags) {
                msgs.push_back(d.message);
            }
            throw ValidationError("invalid feature spec: " + text::join(msgs, "; "));
        }
        if (spec.meta.normalize_variants) {
            m_norm.emplace(build_normalization(corpus, opts.thesaurus));
        }
        m_key = TermKey(m_norm ? &*m_norm : nullptr);
        for (const auto& d : spec.features) {
            CompiledFeature cf{&d, std::nullopt};
            std::visit(
                [&](const auto& p) {
                    using P = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<P, PosRegexParams> || std::is_same_v<P, PosContextParams>) {
                        cf.re.emplace(p.pattern, std::regex::ECMAScript);
                    } else if constexpr (std::is_same_v<P, SuffixPrefixParams>) {
                        if (p.pattern) {
                            cf.re.emplace(*p.pattern, std::regex::ECMAScript);
                        }
                    } else if constexpr (std::is_same_v<P, SemanticSimilarityParams>) {
                        if (opts.embeddings == nullptr) {
                            throw ValidationError("Semantic_Similarity needs an embedding store");
                        }
                    }
                },
                d.params);
            m_features.push_back(std::move(cf));
            if (!is_statistical(d.name())) {
                m_per_su = true;
            }
        }
        compute_statistics();
    }

    FeatureMatrix build()
    {
        FeatureMatrix m;
        for (const auto& cf : m_features) {
            m.columns.emplace_back(to_string(cf.decl->name()));
        }
        std::vector<RowResult> parts;
        if (!m_per_su) {
            parts.push_back(unit_rows());
        } else {
            const auto& docs = m_corpus.documents();
            if (m_opts.threads > 1 && docs.size() > 1) {
                std::vector<std::future<RowResult>> futures;
                for (std::size_t d = 0; d < docs.size(); ++d) {
                    futures.push_back(std::async(std::launch::async, [this, d] { return document_rows(d); }));
                }
                for (auto& f : futures) {
                    parts.push_back(f.get());
                }
            } else {
                for (std::size_t d = 0; d < docs.size(); ++d) {
                    parts.push_back(document_rows(d));
                }
            }
        }
        std::vector<std::string> errors;
        for (auto& part : parts) {
            std::move(part.keys.begin(), part.keys.end(), std::back_inserter(m.keys));
            std::move(part.rows.begin(), part.rows.end(), std::back_inserter(m.rows));
            std::move(part.errors.begin(), part.errors.end(), std::back_inserter(errors));
        }
        if (!errors.empty()) {
            if (errors.size() > 20) {
                const auto more = errors.size() - 20;
                errors.resize(20);
                errors.push_back("... " + std::to_string(more) + " more");
            }
            throw ValidationError("feature extraction failed:\n" + text::join(errors, "\n"));
        }
        return m;
    }

  private:
    std::size_t unit_index(std::size_t doc) const { return m_spec.meta.analysis_unit == AnalysisUnit::Corpus ? 0 : doc; }

    void compute_statistics()
    {
        const auto au = m_spec.meta.analysis_unit;
        if (au != AnalysisUnit::Document && au != AnalysisUnit::Corpus) {
            return;
        }
        for (const auto& cf : m_features) {
            const auto& params = cf.decl->params;
            std::vector<Cell> cells;
            if (std::holds_alternative<TermFrequencyParams>(params)) {
                for (const auto& tf : extract_term_frequency(m_corpus, au, m_key)) {
                    cells.emplace_back(sorted_pairs(tf));
                }
            } else if (const auto* bp = std::get_if<Bm25WeightParams>(&params)) {
                for (const auto& w : extract_bm25_weights(m_corpus, au, {bp->k1, bp->b}, m_key)) {
                    cells.emplace_back(sorted_pairs(w));
                }
            } else if (const auto* ip = std::get_if<InterArrivalDelayParams>(&params)) {
                for (auto& d : extract_inter_arrival_delays(m_corpus, ip->term, au, m_key)) {
                    cells.emplace_back(IntList(std::move(d)));
                }
            } else {
                continue;
            }
            m_stats.emplace(cf.decl, std::move(cells));
        }
    }

    RowResult unit_rows() const
    {
        RowResult out;
        const auto& docs = m_corpus.documents();
        const std::size_t units = m_spec.meta.analysis_unit == AnalysisUnit::Corpus ? 1 : docs.size();
        for (std::size_t u = 0; u < units; ++u) {
            RowKey key;
            if (m_spec.meta.analysis_unit == AnalysisUnit::Document) {
                key.doc_id = docs[u].id;
            }
            std::vector<Cell> row;
            for (const auto& cf : m_features) {
                auto it = m_stats.find(cf.decl);
                row.push_back(it == m_stats.end() ? Cell{} : it->second.at(u));
            }
            out.keys.push_back(std::move(key));
            out.rows.push_back(std::move(row));
        }
        return out;
    }

    RowResult document_rows(std::size_t d) const
    {
        RowResult out;
        SpanMatcher matcher(m_spec.meta.syntactic_unit);
        const auto& doc = m_corpus.documents()[d];
        for (std::size_t p = 0; p < doc.paragraphs.size(); ++p) {
            const auto& para = doc.paragraphs[p];
            for (std::size_t s = 0; s < para.sentences.size(); ++s) {
                SentenceView view(para.sentences[s]);
                for (const auto& su : resolve_in_sentence(matcher, view, {d, p, s, 0})) {
                    if (m_opts.row_filter && !m_opts.row_filter(m_corpus, su)) {
                        continue;
                    }
                    const auto& first = m_corpus.at(su.first);
                    out.keys.push_back(RowKey{su.text, doc.id, first.para_idx, first.sent_idx, first.token_idx,
                                              first.token_idx + su.size()});
                    std::vector<Cell> row;
                    for (const auto& cf : m_features) {
                        try {
                            row.push_back(su_cell(cf, view, su, d));
                        } catch (const std::exception& e) {
                            out.errors.push_back(doc.id + " para " + std::to_string(first.para_idx) + " sent " +
                                                 std::to_string(first.sent_idx) + " '" + su.text + "' " +
                                                 std::string(to_string(cf.decl->name())) + ": " + e.what());
                            row.emplace_back();
                        }
                    }
                    out.rows.push_back(std::move(row));
                }
            }
        }
        return out;
    }

    Cell su_cell(const CompiledFeature& cf, const SentenceView& view, const SyntacticUnitInstance& su,
                 std::size_t doc) const
    {
        const FeatureParams& params = cf.decl->params;
        const std::regex* re = cf.re ? &*cf.re : nullptr;
        return std::visit(
            [&](const auto& p) -> Cell {
                using P = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<P, PosSequenceParams>) {
                    return SentenceView::join_range(view.tags, su.first.token, su.end);
                } else if constexpr (std::is_same_v<P, PosRegexParams>) {
                    return extract_pos_regex(SentenceView::join_range(view.tags, su.first.token, su.end), *re);
                } else if constexpr (std::is_same_v<P, SuffixPrefixParams>) {
                    return extract_suffix_prefix(su.text, p.kind, p.length, re);
                } else if constexpr (std::is_same_v<P, CapitalizationParams>) {
                    return extract_capitalization(su.text, p.mode);
                } else if constexpr (std::is_same_v<P, SpecialCharsParams>) {
                    return BoolList(extract_special_chars(su.text, p.chars));
                } else if constexpr (std::is_same_v<P, ContextWindowParams>) {
                    return StringList(extract_context_window(m_corpus, su, p.width, p.scope));
                } else if constexpr (std::is_same_v<P, PosContextParams>) {
                    const auto* cw = m_spec.find(FeatureName::Context_Window);
                    const auto& w = std::get<ContextWindowParams>(cw->params);
                    return StringList(extract_context_window(m_corpus, su, w.width, w.scope, re));
                } else if constexpr (std::is_same_v<P, HeadDirectionalityParams>) {
                    return std::string(
                        to_string(extract_head_directionality(view.chunks, su.first.token, su.end, p.phrases)));
                } else if constexpr (std::is_same_v<P, NGramParams>) {
                    StringList grams;
                    for (std::size_t i = su.first.token; i + p.n <= su.end; ++i) {
                        grams.push_back(SentenceView::join_range(view.surfaces, i, i + p.n));
                    }
                    return grams;
                } else if constexpr (std::is_same_v<P, SemanticSimilarityParams>) {
                    return extract_semantic_similarity(su.text, p.reference, *m_opts.embeddings);
                } else {
                    auto it = m_stats.find(cf.decl);
                    return it == m_stats.end() ? Cell{} : it->second.at(unit_index(doc));
                }
            },
            params);
    }

    const AnnotatedCorpus& m_corpus;
    const FeatureSpec& m_spec;
    const ExtractionOptions& m_opts;
    std::optional<NormalizationTable> m_norm;
    TermKey m_key;
    std::vector<CompiledFeature> m_features;
    std::map<const FeatureDecl*, std::vector<Cell>> m_stats;
    bool m_per_su = false;
};

}  // namespace detail

/// Rows are SU instances in corpus order when any per-SU feature is declared
/// (statistical columns then repeat the containing unit's value); otherwise
/// one row per analysis-unit instance.
inline FeatureMatrix build_feature_matrix(const AnnotatedCorpus& corpus, const FeatureSpec& spec,
                                          const ExtractionOptions& opts = {})
{
    return detail::MatrixBuilder(corpus, spec, opts).build();
}

// ---------------------------------------------------------------------------
// Export

inline std::string cell_to_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<V, bool>) {
                return v ? "TRUE" : "FALSE";
            } else if constexpr (std::is_same_v<V, std::int64_t>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<V, double>) {
                return text::format_double(v);
            } else if constexpr (std::is_same_v<V, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<V, StringList>) {
                return text::join(v, "|");
            } else if constexpr (std::is_same_v<V, BoolList>) {
                std::vector<std::string> parts;
                for (bool b : v) {
                    parts.emplace_back(b ? "TRUE" : "FALSE");
                }
                return text::join(parts, "|");
            } else {
                std::vector<std::string> parts;
                for (auto x : v) {
                    parts.push_back(std::to_string(x));
                }
                return text::join(parts, "|");
            }
        },
        c);
}

inline nlohmann::ordered_json cell_to_json(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> nlohmann::ordered_json {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<V, BoolList>) {
                auto arr = nlohmann::ordered_json::array();
                for (bool b : v) {
                    arr.push_back(b);
                }
                return arr;
            } else {
                return v;
            }
        },
        c);
}

namespace detail {

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

inline std::string opt_text(const std::optional<std::size_t>& v) { return v ? std::to_string(*v) : std::string(); }

inline nlohmann::ordered_json opt_json(const std::optional<std::size_t>& v)
{
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

inline const std::vector<std::string>& identity_columns()
{
    static const std::vector<std::string> cols = {"su", "doc_id", "para_idx", "sent_idx", "start", "end"};
    return cols;
}

/// RFC 4180 CSV; list cells are joined with '|'.
inline std::string to_csv(const FeatureMatrix& m)
{
    std::vector<std::string> header = identity_columns();
    header.insert(header.end(), m.columns.begin(), m.columns.end());
    std::string out;
    auto line = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += detail::csv_field(fields[i]);
        }
        out += '\n';
    };
    line(header);
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        const auto& k = m.keys[r];
        std::vector<std::string> fields = {k.su,
                                           k.doc_id,
                                           detail::opt_text(k.para_idx),
                                           detail::opt_text(k.sent_idx),
                                           detail::opt_text(k.start),
                                           detail::opt_text(k.end)};
        for (const auto& c : m.rows[r]) {
            fields.push_back(cell_to_text(c));
        }
        line(fields);
    }
    return out;
}

inline nlohmann::ordered_json row_to_json(const FeatureMatrix& m, std::size_t r)
{
    const auto& k = m.keys.at(r);
    nlohmann::ordered_json obj;
    obj["su"] = k.su;
    obj["doc_id"] = k.doc_id;
    obj["para_idx"] = detail::opt_json(k.para_idx);
    obj["sent_idx"] = detail::opt_json(k.sent_idx);
    obj["start"] = detail::opt_json(k.start);
    obj["end"] = detail::opt_json(k.end);
    for (std::size_t c = 0; c < m.columns.size(); ++c) {
        obj[m.columns[c]] = cell_to_json(m.rows[r][c]);
    }
    return obj;
}

/// One JSON object per line.
inline std::string to_jsonl(const FeatureMatrix& m)
{
    std::string out;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        out += row_to_json(m, r).dump();
        out += '\n';
    }
    return out;
}

}  // namespace nlpfspl
