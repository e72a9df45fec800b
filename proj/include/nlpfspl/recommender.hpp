#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bm25.hpp"
#include "chunker.hpp"
#include "embeddings.hpp"
#include "error.hpp"
#include "kb.hpp"
#include "normalization.hpp"
#include "pls.hpp"
#include "tagger.hpp"
#include "text.hpp"

namespace nlpfspl {

// ---------------------------------------------------------------------------
// Key terms

namespace detail {

inline bool is_word_token(std::string_view s)
{
    return std::any_of(s.begin(), s.end(), [](char c) {
        return text::is_ascii_alpha(c) || text::is_ascii_digit(c) || static_cast<unsigned char>(c) >= 0x80;
    });
}

// Acronyms keep their case; everything else is folded.
inline std::string term_case(std::string_view w)
{
    bool has_upper = false;
    bool has_lower = false;
    for (char c : w) {
        has_upper = has_upper || text::is_ascii_upper(c);
        has_lower = has_lower || text::is_ascii_lower(c);
    }
    if (has_upper && !has_lower && w.size() > 1) {
        return std::string(w);
    }
    return text::to_lower(w);
}

inline std::string map_word(const std::string& w, const Thesaurus* th)
{
    if (th != nullptr) {
        if (auto it = th->find(text::to_lower(w)); it != th->end()) {
            return it->second;
        }
    }
    return w;
}

inline bool is_article(std::string_view w)
{
    const auto l = text::to_lower(w);
    return l == "a" || l == "an" || l == "the";
}

inline bool is_auxiliary_lemma(std::string_view lemma) { return lemma == "be" || lemma == "have" || lemma == "do"; }

}  // namespace detail

/// Entity terms are noun-phrase chunks (leading a/an/the left out), action
/// terms are the base forms of main verbs in verb-phrase chunks, and every
/// other word token is residual. Punctuation is dropped. Each word token lands
/// in exactly one list.
inline KeyTerms extract_key_terms(std::string_view field_text, const Thesaurus* thesaurus = nullptr)
{
    KeyTerms out;
    auto corpus = tokenize_and_tag(field_text);
    for (const auto& doc : corpus.documents()) {
        for (const auto& para : doc.paragraphs) {
            for (const auto& sent : para.sentences) {
                const auto& toks = sent.tokens;
                std::vector<std::string> tags;
                for (const auto& t : toks) {
                    tags.push_back(t.pos);
                }
                std::vector<bool> used(toks.size(), false);
                auto residual = [&](std::size_t i) {
                    if (detail::is_word_token(toks[i].surface)) {
                        out.residual.push_back(detail::map_word(detail::term_case(toks[i].surface), thesaurus));
                    }
                    used[i] = true;
                };
                for (const auto& c : chunk_tags(tags)) {
                    if (c.type == ChunkType::NP) {
                        std::size_t b = c.begin;
                        while (b < c.end && detail::is_article(toks[b].surface)) {
                            residual(b);
                            ++b;
                        }
                        std::vector<std::string> words;
                        for (std::size_t i = b; i < c.end; ++i) {
                            words.push_back(detail::map_word(detail::term_case(toks[i].surface), thesaurus));
                            used[i] = true;
                        }
                        if (!words.empty()) {
                            out.entities.push_back(text::join(words, " "));
                        }
                        continue;
                    }
                    for (std::size_t i = c.begin; i < c.end; ++i) {
                        if (!is_verb_tag(tags[i])) {
                            residual(i);
                            continue;
                        }
                        const auto lemma = verb_base_form(toks[i].surface);
                        bool later_verb = false;
                        for (std::size_t k = i + 1; k < c.end; ++k) {
                            later_verb = later_verb || is_verb_tag(tags[k]);
                        }
                        if (detail::is_auxiliary_lemma(lemma) && later_verb) {
                            residual(i);
                        } else {
                            out.actions.push_back(detail::map_word(lemma, thesaurus));
                            used[i] = true;
                        }
                    }
                }
                for (std::size_t i = 0; i < toks.size(); ++i) {
                    if (!used[i]) {
                        residual(i);
                    }
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Proximity

inline constexpr std::array<std::string_view, 3> profile_field_names = {"problem_description", "problem_type",
                                                                        "performance_metric"};

inline std::array<std::string, 3> profile_fields(const ApplicationProfile& p)
{
    return {p.problem_description, p.problem_type, p.performance_metric};
}

struct ChannelSimilarity {
    double value = 0.0;
    bool available = false;

    bool operator==(const ChannelSimilarity&) const = default;
};

struct FieldSimilarity {
    ChannelSimilarity en;
    ChannelSimilarity act;
    ChannelSimilarity r;

    bool operator==(const FieldSimilarity&) const = default;
};

/// Per-field channel similarities plus the annotation-level indicator.
struct ProximityVector {
    std::array<FieldSimilarity, 3> fields{};
    double au = 0.0;

    static constexpr std::size_t size = 10;

    /// en, act, r for each field in profile order, then the annotation-level term.
    std::vector<double> components() const
    {
        std::vector<double> out;
        out.reserve(size);
        for (const auto& f : fields) {
            out.push_back(f.en.value);
            out.push_back(f.act.value);
            out.push_back(f.r.value);
        }
        out.push_back(au);
        return out;
    }

    /// Arithmetic mean of all components; unavailable channels count as 0.
    double alpha() const
    {
        double sum = 0.0;
        for (double c : components()) {
            sum += c;
        }
        return sum / static_cast<double>(size);
    }

    bool operator==(const ProximityVector&) const = default;
};

inline ChannelSimilarity channel_similarity(const Vector& a, bool has_a, const Vector& b, bool has_b)
{
    if (!has_a || !has_b) {
        return {0.0, false};
    }
    return {std::clamp(cosine(a, b), 0.0, 1.0), true};
}

/// 0 for a channel absent on either side, else the cosine clamped to [0,1].
inline FieldSimilarity field_similarity(const FieldEmbedding& a, const FieldEmbedding& b)
{
    return {channel_similarity(a.en, a.has_en, b.en, b.has_en), channel_similarity(a.act, a.has_act, b.act, b.has_act),
            channel_similarity(a.r, a.has_r, b.r, b.has_r)};
}

struct EmbeddedProfile {
    std::string id;
    AnnotationLevel annotation_level = AnnotationLevel::Sentence;
    std::array<KeyTerms, 3> terms;
    std::array<FieldEmbedding, 3> fields;
};

inline ProximityVector application_proximity(const EmbeddedProfile& a, const EmbeddedProfile& b)
{
    ProximityVector pv;
    for (std::size_t f = 0; f < 3; ++f) {
        pv.fields[f] = field_similarity(a.fields[f], b.fields[f]);
    }
    pv.au = a.annotation_level == b.annotation_level ? 1.0 : 0.0;
    return pv;
}

namespace detail {

// Path separators in problem types ("classification/sequence-labeling") split words.
inline std::string field_text_for_terms(std::string_view s)
{
    std::string out(s);
    std::replace(out.begin(), out.end(), '/', ' ');
    std::replace(out.begin(), out.end(), '_', ' ');
    return out;
}

inline void append_words(const std::vector<std::string>& terms, std::vector<std::string>& out)
{
    for (const auto& t : terms) {
        for (auto& w : text::split_ws(t)) {
            out.push_back(text::to_lower(w));
        }
    }
}

}  // namespace detail

/// Embeds profiles against one shared BM25 collection in which each
/// profile's text fields together form one document.
inline std::vector<EmbeddedProfile> embed_profiles(const std::vector<ApplicationProfile>& profiles,
                                                   const EmbeddingStore& store, const Thesaurus* thesaurus = nullptr,
                                                   Bm25Params params = {})
{
    if (profiles.empty()) {
        return {};
    }
    std::vector<EmbeddedProfile> out;
    std::vector<std::vector<std::string>> docs;
    for (const auto& p : profiles) {
        EmbeddedProfile ep;
        ep.id = p.id;
        ep.annotation_level = p.annotation_level;
        auto& words = docs.emplace_back();
        const auto texts = profile_fields(p);
        for (std::size_t f = 0; f < 3; ++f) {
            ep.terms[f] = extract_key_terms(detail::field_text_for_terms(texts[f]), thesaurus);
            detail::append_words(ep.terms[f].entities, words);
            detail::append_words(ep.terms[f].actions, words);
            detail::append_words(ep.terms[f].residual, words);
        }
        out.push_back(std::move(ep));
    }
    const Bm25Corpus bm25(docs, params);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto weights = bm25.weights_for(i);
        for (std::size_t f = 0; f < 3; ++f) {
            out[i].fields[f] = field_embedding(out[i].terms[f], store, weights);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Policies and ranking

enum class Policy { Aggressive, Conservative, Probable };

inline std::string_view to_string(Policy p)
{
    switch (p) {
    case Policy::Aggressive:
        return "aggressive";
    case Policy::Conservative:
        return "conservative";
    case Policy::Probable:
        return "probable";
    }
    return "probable";
}

inline std::optional<Policy> parse_policy(std::string_view s)
{
    const auto l = text::to_lower(text::trim(s));
    if (l == "aggressive") {
        return Policy::Aggressive;
    }
    if (l == "conservative") {
        return Policy::Conservative;
    }
    if (l == "probable") {
        return Policy::Probable;
    }
    return std::nullopt;
}

using Matrix = std::vector<std::vector<double>>;

/// diag(alpha) * PF.
inline Matrix norsim(const Matrix& pf, const std::vector<double>& alphas)
{
    if (pf.size() != alphas.size()) {
        throw ValidationError("norsim: " + std::to_string(alphas.size()) + " proximities for " +
                              std::to_string(pf.size()) + " applications");
    }
    Matrix out = pf;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (double& v : out[i]) {
            v *= alphas[i];
        }
    }
    return out;
}

inline Matrix norsim(const KnowledgeBase& kb, const std::vector<double>& alphas) { return norsim(kb.pf(), alphas); }

/// Aggressive = min, Conservative = max, Probable = mean of the column.
inline double apply_policy(const std::vector<double>& column, Policy policy)
{
    if (column.empty()) {
        throw EmptyKnowledgeBase();
    }
    switch (policy) {
    case Policy::Aggressive:
        return *std::min_element(column.begin(), column.end());
    case Policy::Conservative:
        return *std::max_element(column.begin(), column.end());
    case Policy::Probable: {
        // Rounding can push a mean of equal values past them; keep it inside [min, max].
        const auto [lo, hi] = std::minmax_element(column.begin(), column.end());
        const double mean = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size());
        return std::clamp(mean, *lo, *hi);
    }
    }
    return 0.0;
}

/// Rows that determined the relevance: those equal to it under min/max,
/// every positive contributor under the mean.
inline std::vector<std::size_t> bind_set(const std::vector<double>& column, Policy policy, double relevance)
{
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < column.size(); ++r) {
        const bool hit = policy == Policy::Probable ? column[r] > 0.0 : column[r] == relevance;
        if (hit) {
            out.push_back(r);
        }
    }
    return out;
}

struct Evidence {
    std::string app_id;
    double alpha = 0.0;
    double delta = 0.0;
    double norsim = 0.0;

    bool operator==(const Evidence&) const = default;
};

struct Recommendation {
    std::string feature_id;
    std::string fspl_source;
    double relevance = 0.0;
    std::size_t rank = 0;  // 1-based
    std::vector<std::string> bind;
    std::vector<Evidence> evidence;

    bool operator==(const Recommendation&) const = default;
};

struct RecommendationSet {
    std::string new_app_id;
    Policy policy = Policy::Probable;
    std::vector<std::string> app_ids;
    std::vector<double> alphas;
    std::vector<ProximityVector> proximities;  // empty when ranked from given alphas
    std::vector<Recommendation> items;         // relevance descending, feature_id ascending on ties

    const Recommendation* find(std::string_view feature_id) const
    {
        for (const auto& r : items) {
            if (r.feature_id == feature_id) {
                return &r;
            }
        }
        return nullptr;
    }

    bool operator==(const RecommendationSet&) const = default;
};

/// Ranks the whole catalog for the given per-application proximities.
inline RecommendationSet rank_features(const KnowledgeBase& kb, const std::vector<double>& alphas, Policy policy)
{
    if (kb.empty()) {
        throw EmptyKnowledgeBase();
    }
    for (double a : alphas) {
        if (!(a >= 0.0 && std::isfinite(a))) {
            throw ValidationError("proximities must be finite and non-negative");
        }
    }
    const Matrix ns = norsim(kb, alphas);
    RecommendationSet out;
    out.policy = policy;
    out.alphas = alphas;
    for (const auto& a : kb.applications()) {
        out.app_ids.push_back(a.id);
    }
    for (std::size_t j = 0; j < kb.feature_count(); ++j) {
        std::vector<double> col(kb.app_count());
        for (std::size_t i = 0; i < kb.app_count(); ++i) {
            col[i] = ns[i][j];
        }
        Recommendation rec;
        rec.feature_id = kb.catalog()[j].feature_id;
        rec.fspl_source = kb.catalog()[j].fspl_source;
        rec.relevance = apply_policy(col, policy);
        for (std::size_t i : bind_set(col, policy, rec.relevance)) {
            rec.bind.push_back(kb.applications()[i].id);
        }
        for (std::size_t i = 0; i < kb.app_count(); ++i) {
            rec.evidence.push_back({kb.applications()[i].id, alphas[i], kb.relevance(i, j), col[i]});
        }
        out.items.push_back(std::move(rec));
    }
    std::sort(out.items.begin(), out.items.end(), [](const Recommendation& a, const Recommendation& b) {
        if (a.relevance != b.relevance) {
            return a.relevance > b.relevance;
        }
        return a.feature_id < b.feature_id;
    });
    for (std::size_t r = 0; r < out.items.size(); ++r) {
        out.items[r].rank = r + 1;
    }
    return out;
}

struct RecommendOptions {
    const Thesaurus* thesaurus = nullptr;
    const SimilarityModel* model = nullptr;  // when trained, alpha = its prediction
    Bm25Params bm25{};
};

namespace detail {

inline std::string metric_key(std::string_view m) { return text::to_lower(text::trim(m)); }

}  // namespace detail

/// Every application's performance metric must match the new profile's.
inline void check_metrics(const KnowledgeBase& kb, const ApplicationProfile& new_profile)
{
    const auto want = detail::metric_key(new_profile.performance_metric);
    for (const auto& a : kb.applications()) {
        if (detail::metric_key(a.performance_metric) != want) {
            throw ValidationError("performance metric mismatch: '" + a.id + "' uses '" + a.performance_metric +
                                  "', new application uses '" + new_profile.performance_metric + "'");
        }
    }
}

/// Proximity of the new profile to every KB application, embedded against
/// the KB plus the new profile as one BM25 collection.
inline std::vector<ProximityVector> proximities_to_kb(const KnowledgeBase& kb, const ApplicationProfile& new_profile,
                                                      const EmbeddingStore& store, const RecommendOptions& opts = {})
{
    std::vector<ApplicationProfile> all = kb.applications();
    all.push_back(new_profile);
    const auto embedded = embed_profiles(all, store, opts.thesaurus, opts.bm25);
    std::vector<ProximityVector> out;
    for (std::size_t i = 0; i + 1 < embedded.size(); ++i) {
        out.push_back(application_proximity(embedded.back(), embedded[i]));
    }
    return out;
}

inline std::vector<double> alphas_for(const std::vector<ProximityVector>& proximities, const SimilarityModel* model)
{
    std::vector<double> out;
    for (const auto& pv : proximities) {
        out.push_back(model != nullptr && model->trained() ? model->predict(pv.components()) : pv.alpha());
    }
    return out;
}

inline RecommendationSet recommend(const KnowledgeBase& kb, const ApplicationProfile& new_profile, Policy policy,
                                   const EmbeddingStore& store, const RecommendOptions& opts = {})
{
    if (kb.empty()) {
        throw EmptyKnowledgeBase();
    }
    check_metrics(kb, new_profile);
    auto prox = proximities_to_kb(kb, new_profile, store, opts);
    auto out = rank_features(kb, alphas_for(prox, opts.model), policy);
    out.new_app_id = new_profile.id;
    out.proximities = std::move(prox);
    return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const ProximityVector& pv)
{
    nlohmann::ordered_json fields = nlohmann::ordered_json::object();
    for (std::size_t f = 0; f < 3; ++f) {
        nlohmann::ordered_json ch = nlohmann::ordered_json::object();
        auto put = [&ch](const char* name, const ChannelSimilarity& c) {
            ch[name] = {{"value", c.value}, {"available", c.available}};
        };
        put("en", pv.fields[f].en);
        put("act", pv.fields[f].act);
        put("r", pv.fields[f].r);
        fields[std::string(profile_field_names[f])] = ch;
    }
    nlohmann::ordered_json out;
    out["fields"] = fields;
    out["annotation_level"] = pv.au;
    out["components"] = pv.components();
    out["alpha"] = pv.alpha();
    return out;
}

inline nlohmann::ordered_json to_json(const Recommendation& r)
{
    nlohmann::ordered_json ev = nlohmann::ordered_json::array();
    for (const auto& e : r.evidence) {
        ev.push_back({{"app_id", e.app_id}, {"alpha", e.alpha}, {"delta", e.delta}, {"norsim", e.norsim}});
    }
    nlohmann::ordered_json out;
    out["feature_id"] = r.feature_id;
    out["fspl_source"] = r.fspl_source;
    out["relevance"] = r.relevance;
    out["rank"] = r.rank;
    out["bind"] = r.bind;
    out["evidence"] = ev;
    return out;
}

/// The ranked list alone: `[{feature_id, fspl_source, relevance, rank, bind, evidence}]`.
inline nlohmann::ordered_json recommendations_to_json(const RecommendationSet& set)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : set.items) {
        arr.push_back(to_json(r));
    }
    return arr;
}

inline nlohmann::ordered_json to_json(const RecommendationSet& set)
{
    nlohmann::ordered_json apps = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < set.app_ids.size(); ++i) {
        nlohmann::ordered_json a;
        a["app_id"] = set.app_ids[i];
        a["alpha"] = set.alphas.at(i);
        if (i < set.proximities.size()) {
            a["proximity"] = to_json(set.proximities[i]);
        }
        apps.push_back(a);
    }
    nlohmann::ordered_json out;
    out["new_app_id"] = set.new_app_id;
    out["policy"] = std::string(to_string(set.policy));
    out["applications"] = apps;
    out["recommendations"] = recommendations_to_json(set);
    return out;
}

/// Reads the ranked-list form back. Per-application proximities are taken
/// from the evidence entries.
inline RecommendationSet recommendations_from_json(const nlohmann::json& j, Policy policy,
                                                   const std::string& new_app_id = "")
{
    if (!j.is_array()) {
        throw SchemaError("/", "expected an array of recommendations");
    }
    RecommendationSet set;
    set.policy = policy;
    set.new_app_id = new_app_id;
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string ptr = "/" + std::to_string(r);
        const auto& o = j[r];
        Recommendation rec;
        rec.feature_id = detail::require_string(o, "feature_id", ptr);
        rec.fspl_source = detail::require_string(o, "fspl_source", ptr);
        const auto& rel = detail::require(o, "relevance", ptr);
        if (!rel.is_number()) {
            throw SchemaError(ptr + "/relevance", "expected a number");
        }
        rec.relevance = rel.get<double>();
        rec.rank = r + 1;
        const auto& bind = detail::require(o, "bind", ptr);
        if (!bind.is_array()) {
            throw SchemaError(ptr + "/bind", "expected an array");
        }
        for (std::size_t b = 0; b < bind.size(); ++b) {
            if (!bind[b].is_string()) {
                throw SchemaError(ptr + "/bind/" + std::to_string(b), "expected a string");
            }
            rec.bind.push_back(bind[b].get<std::string>());
        }
        const auto& ev = detail::require(o, "evidence", ptr);
        if (!ev.is_array()) {
            throw SchemaError(ptr + "/evidence", "expected an array");
        }
        for (std::size_t e = 0; e < ev.size(); ++e) {
            const std::string ep = ptr + "/evidence/" + std::to_string(e);
            Evidence x;
            x.app_id = detail::require_string(ev[e], "app_id", ep);
            for (auto [key, slot] : {std::pair{"alpha", &x.alpha}, {"delta", &x.delta}, {"norsim", &x.norsim}}) {
                const auto& v = detail::require(ev[e], key, ep);
                if (!v.is_number()) {
                    throw SchemaError(ep + "/" + key, "expected a number");
                }
                *slot = v.get<double>();
            }
            rec.evidence.push_back(std::move(x));
        }
        set.items.push_back(std::move(rec));
    }
    if (!set.items.empty()) {
        for (const auto& e : set.items.front().evidence) {
            set.app_ids.push_back(e.app_id);
            set.alphas.push_back(e.alpha);
        }
    }
    return set;
}

}  // namespace nlpfspl
