#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "parser.hpp"
#include "spec.hpp"
#include "text.hpp"

namespace nlpfspl {

enum class AnnotationLevel { Word, Phrase, Sentence, Paragraph, Document };

inline std::string_view to_string(AnnotationLevel a)
{
    switch (a) {
    case AnnotationLevel::Word:
        return "Word";
    case AnnotationLevel::Phrase:
        return "Phrase";
    case AnnotationLevel::Sentence:
        return "Sentence";
    case AnnotationLevel::Paragraph:
        return "Paragraph";
    case AnnotationLevel::Document:
        return "Document";
    }
    return "Sentence";
}

inline std::optional<AnnotationLevel> parse_annotation_level(std::string_view s)
{
    const auto lower = text::to_lower(text::trim(s));
    for (auto a : {AnnotationLevel::Word, AnnotationLevel::Phrase, AnnotationLevel::Sentence,
                   AnnotationLevel::Paragraph, AnnotationLevel::Document}) {
        if (lower == text::to_lower(to_string(a))) {
            return a;
        }
    }
    if (lower == "para") {
        return AnnotationLevel::Paragraph;
    }
    return std::nullopt;
}

struct ApplicationProfile {
    std::string id;
    std::string problem_description;
    AnnotationLevel annotation_level = AnnotationLevel::Sentence;
    std::string problem_type;        // ontology path, e.g. "classification/sequence-labeling"
    std::string performance_metric;  // e.g. "F1"

    bool operator==(const ApplicationProfile&) const = default;
};

struct CatalogEntry {
    std::string feature_id;
    std::string fspl_source;  // canonical serialization

    bool operator==(const CatalogEntry&) const = default;
};

/// A feature specification offered with a new application.
struct FeatureInput {
    std::string fspl_source;
    double relevance = 0.0;
    std::optional<std::string> feature_id;
};

/// Canonical text of a feature specification; the catalog dedup key.
inline std::string canonical_fspl(std::string_view source)
{
    auto spec = parse(source);
    auto diags = validate(spec);
    if (!diags.empty()) {
        throw ValidationError("invalid feature spec: " + diags.front().message);
    }
    return serialize(spec);
}

/// Application profiles, feature catalog and the m x k relevance matrix.
/// Row i of the matrix belongs to application i, column j to catalog entry j.
class KnowledgeBase {
  public:
    const std::vector<ApplicationProfile>& applications() const noexcept { return m_apps; }
    const std::vector<CatalogEntry>& catalog() const noexcept { return m_catalog; }
    const std::vector<std::vector<double>>& pf() const noexcept { return m_pf; }

    std::size_t app_count() const noexcept { return m_apps.size(); }
    std::size_t feature_count() const noexcept { return m_catalog.size(); }
    bool empty() const noexcept { return m_apps.empty(); }

    double relevance(std::size_t app, std::size_t feature) const { return m_pf.at(app).at(feature); }

    std::optional<std::size_t> find_application(std::string_view id) const
    {
        for (std::size_t i = 0; i < m_apps.size(); ++i) {
            if (m_apps[i].id == id) {
                return i;
            }
        }
        return std::nullopt;
    }

    std::optional<std::size_t> find_feature(std::string_view id) const
    {
        for (std::size_t j = 0; j < m_catalog.size(); ++j) {
            if (m_catalog[j].feature_id == id) {
                return j;
            }
        }
        return std::nullopt;
    }

    const ApplicationProfile& application(std::string_view id) const
    {
        auto i = find_application(id);
        if (!i) {
            throw NotFoundError("unknown application '" + std::string(id) + "'");
        }
        return m_apps[*i];
    }

    /// Stores the profile, appends catalog entries for specs not yet present
    /// (compared by canonical text) and adds its relevance row. Strong
    /// exception guarantee.
    void add_application(const ApplicationProfile& profile, const std::vector<FeatureInput>& features)
    {
        check_profile(profile);
        if (find_application(profile.id)) {
            throw ValidationError("duplicate application id '" + profile.id + "'");
        }
        std::vector<CatalogEntry> catalog = m_catalog;
        std::vector<std::optional<double>> row(catalog.size());
        for (std::size_t f = 0; f < features.size(); ++f) {
            const auto& in = features[f];
            if (!(in.relevance >= 0.0 && in.relevance <= 1.0)) {
                throw ValidationError("feature " + std::to_string(f) + ": relevance must be in [0,1], got " +
                                      text::format_double(in.relevance));
            }
            std::string canon;
            try {
                canon = canonical_fspl(in.fspl_source);
            } catch (const ParseError& e) {
                throw ValidationError("feature " + std::to_string(f) + ": " + e.what());
            }
            std::optional<std::size_t> col;
            for (std::size_t j = 0; j < catalog.size(); ++j) {
                if (catalog[j].fspl_source == canon) {
                    col = j;
                }
            }
            if (col && in.feature_id && *in.feature_id != catalog[*col].feature_id) {
                throw ValidationError("feature id '" + *in.feature_id + "' names a spec already catalogued as '" +
                                      catalog[*col].feature_id + "'");
            }
            if (!col) {
                std::string id = in.feature_id ? *in.feature_id : next_feature_id(catalog);
                for (const auto& e : catalog) {
                    if (e.feature_id == id) {
                        throw ValidationError("feature id '" + id + "' already names a different spec");
                    }
                }
                if (text::trim(id).empty()) {
                    throw ValidationError("feature id must be non-empty");
                }
                catalog.push_back({id, canon});
                row.emplace_back();
                col = catalog.size() - 1;
            }
            if (row[*col]) {
                throw ValidationError("feature '" + catalog[*col].feature_id + "' listed twice for application '" +
                                      profile.id + "'");
            }
            row[*col] = in.relevance;
        }
        std::vector<std::vector<double>> pf = m_pf;
        for (auto& r : pf) {
            r.resize(catalog.size(), 0.0);
        }
        auto& new_row = pf.emplace_back(catalog.size(), 0.0);
        for (std::size_t j = 0; j < row.size(); ++j) {
            new_row[j] = row[j].value_or(0.0);
        }
        m_catalog = std::move(catalog);
        m_pf = std::move(pf);
        m_apps.push_back(profile);
    }

    /// Direct construction from stored parts; used by the JSON loader.
    static KnowledgeBase from_parts(std::vector<ApplicationProfile> apps, std::vector<CatalogEntry> catalog,
                                    std::vector<std::vector<double>> pf)
    {
        KnowledgeBase kb;
        kb.m_apps = std::move(apps);
        kb.m_catalog = std::move(catalog);
        kb.m_pf = std::move(pf);
        return kb;
    }

    bool operator==(const KnowledgeBase&) const = default;

  private:
    static void check_profile(const ApplicationProfile& p)
    {
        if (text::trim(p.id).empty()) {
            throw ValidationError("application id must be non-empty");
        }
        if (text::trim(p.problem_description).empty()) {
            throw ValidationError("application '" + p.id + "': problem_description must be non-empty");
        }
    }

    static std::string next_feature_id(const std::vector<CatalogEntry>& catalog)
    {
        for (std::size_t n = catalog.size() + 1;; ++n) {
            std::string id = "F" + std::to_string(n);
            bool taken = false;
            for (const auto& e : catalog) {
                taken = taken || e.feature_id == id;
            }
            if (!taken) {
                return id;
            }
        }
    }

    std::vector<ApplicationProfile> m_apps;
    std::vector<CatalogEntry> m_catalog;
    std::vector<std::vector<double>> m_pf;
};

inline KnowledgeBase add_application(KnowledgeBase kb, const ApplicationProfile& profile,
                                     const std::vector<FeatureInput>& features)
{
    kb.add_application(profile, features);
    return kb;
}

// ---------------------------------------------------------------------------
// JSON

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& ptr)
{
    if (!obj.is_object()) {
        throw SchemaError(ptr, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError(ptr, "missing required field '" + key + "'");
    }
    return *it;
}

inline std::string require_string(const nlohmann::json& obj, const std::string& key, const std::string& ptr)
{
    const auto& v = require(obj, key, ptr);
    if (!v.is_string()) {
        throw SchemaError(ptr + "/" + key, "expected a string");
    }
    return v.get<std::string>();
}

inline double require_unit_number(const nlohmann::json& v, const std::string& ptr)
{
    if (!v.is_number()) {
        throw SchemaError(ptr, "expected a number");
    }
    double x = v.get<double>();
    if (!(x >= 0.0 && x <= 1.0)) {
        throw SchemaError(ptr, "value must be in [0,1]");
    }
    return x;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const ApplicationProfile& p)
{
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["problem_description"] = p.problem_description;
    j["annotation_level"] = std::string(to_string(p.annotation_level));
    j["problem_type"] = p.problem_type;
    j["performance_metric"] = p.performance_metric;
    return j;
}

inline ApplicationProfile profile_from_json(const nlohmann::json& j, const std::string& ptr = "")
{
    if (!j.is_object()) {
        throw SchemaError(ptr.empty() ? "/" : ptr, "expected an object");
    }
    ApplicationProfile p;
    p.id = detail::require_string(j, "id", ptr);
    p.problem_description = detail::require_string(j, "problem_description", ptr);
    auto level = detail::require_string(j, "annotation_level", ptr);
    auto parsed = parse_annotation_level(level);
    if (!parsed) {
        throw SchemaError(ptr + "/annotation_level",
                          "expected one of Word, Phrase, Sentence, Paragraph, Document; got '" + level + "'");
    }
    p.annotation_level = *parsed;
    p.problem_type = detail::require_string(j, "problem_type", ptr);
    p.performance_metric = detail::require_string(j, "performance_metric", ptr);
    if (text::trim(p.id).empty()) {
        throw SchemaError(ptr + "/id", "must be non-empty");
    }
    if (text::trim(p.problem_description).empty()) {
        throw SchemaError(ptr + "/problem_description", "must be non-empty");
    }
    return p;
}

/// `[{fspl_source, relevance, feature_id?}]`
inline std::vector<FeatureInput> features_from_json(const nlohmann::json& j, const std::string& ptr = "")
{
    if (!j.is_array()) {
        throw SchemaError(ptr.empty() ? "/" : ptr, "expected an array");
    }
    std::vector<FeatureInput> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = ptr + "/" + std::to_string(i);
        FeatureInput in;
        in.fspl_source = detail::require_string(j[i], "fspl_source", p);
        in.relevance = detail::require_unit_number(detail::require(j[i], "relevance", p), p + "/relevance");
        if (auto it = j[i].find("feature_id"); it != j[i].end()) {
            if (!it->is_string()) {
                throw SchemaError(p + "/feature_id", "expected a string");
            }
            in.feature_id = it->get<std::string>();
        }
        out.push_back(std::move(in));
    }
    return out;
}

/// Canonical form: fixed key order, catalog sources in canonical text.
inline nlohmann::ordered_json to_json(const KnowledgeBase& kb)
{
    nlohmann::ordered_json apps = nlohmann::ordered_json::array();
    for (const auto& a : kb.applications()) {
        apps.push_back(to_json(a));
    }
    nlohmann::ordered_json catalog = nlohmann::ordered_json::array();
    for (const auto& e : kb.catalog()) {
        nlohmann::ordered_json entry;
        entry["feature_id"] = e.feature_id;
        entry["fspl_source"] = e.fspl_source;
        catalog.push_back(entry);
    }
    nlohmann::ordered_json pf = nlohmann::ordered_json::array();
    for (const auto& row : kb.pf()) {
        pf.push_back(row);
    }
    nlohmann::ordered_json out;
    out["applications"] = apps;
    out["catalog"] = catalog;
    out["pf"] = pf;
    return out;
}

inline KnowledgeBase kb_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw SchemaError("/", "expected an object");
    }
    const auto& apps_j = detail::require(j, "applications", "");
    const auto& cat_j = detail::require(j, "catalog", "");
    const auto& pf_j = detail::require(j, "pf", "");
    if (!apps_j.is_array()) {
        throw SchemaError("/applications", "expected an array");
    }
    if (!cat_j.is_array()) {
        throw SchemaError("/catalog", "expected an array");
    }
    if (!pf_j.is_array()) {
        throw SchemaError("/pf", "expected an array");
    }

    std::vector<ApplicationProfile> apps;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < apps_j.size(); ++i) {
        const std::string ptr = "/applications/" + std::to_string(i);
        auto p = profile_from_json(apps_j[i], ptr);
        if (!ids.insert(p.id).second) {
            throw SchemaError(ptr + "/id", "duplicate application id '" + p.id + "'");
        }
        apps.push_back(std::move(p));
    }

    std::vector<CatalogEntry> catalog;
    std::set<std::string> fids;
    std::set<std::string> canon_seen;
    for (std::size_t j2 = 0; j2 < cat_j.size(); ++j2) {
        const std::string ptr = "/catalog/" + std::to_string(j2);
        CatalogEntry e{detail::require_string(cat_j[j2], "feature_id", ptr),
                       detail::require_string(cat_j[j2], "fspl_source", ptr)};
        if (text::trim(e.feature_id).empty()) {
            throw SchemaError(ptr + "/feature_id", "must be non-empty");
        }
        if (!fids.insert(e.feature_id).second) {
            throw SchemaError(ptr + "/feature_id", "duplicate feature id '" + e.feature_id + "'");
        }
        try {
            e.fspl_source = canonical_fspl(e.fspl_source);
        } catch (const Error& err) {
            throw SchemaError(ptr + "/fspl_source", err.what());
        }
        if (!canon_seen.insert(e.fspl_source).second) {
            throw SchemaError(ptr + "/fspl_source", "duplicates an earlier catalog entry");
        }
        catalog.push_back(std::move(e));
    }

    if (pf_j.size() != apps.size()) {
        throw SchemaError("/pf", "expected " + std::to_string(apps.size()) + " rows, got " +
                                     std::to_string(pf_j.size()));
    }
    std::vector<std::vector<double>> pf;
    for (std::size_t i = 0; i < pf_j.size(); ++i) {
        const std::string ptr = "/pf/" + std::to_string(i);
        if (!pf_j[i].is_array() || pf_j[i].size() != catalog.size()) {
            throw SchemaError(ptr, "expected an array of " + std::to_string(catalog.size()) + " numbers");
        }
        auto& row = pf.emplace_back();
        for (std::size_t k = 0; k < pf_j[i].size(); ++k) {
            row.push_back(detail::require_unit_number(pf_j[i][k], ptr + "/" + std::to_string(k)));
        }
    }
    return KnowledgeBase::from_parts(std::move(apps), std::move(catalog), std::move(pf));
}

inline std::string dump_kb(const KnowledgeBase& kb) { return to_json(kb).dump(2) + "\n"; }

inline KnowledgeBase parse_kb(std::string_view content)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("/", std::string("invalid JSON: ") + e.what());
    }
    return kb_from_json(j);
}

inline KnowledgeBase load_kb(const std::string& path) { return parse_kb(text::read_file(path)); }

inline void save_kb(const KnowledgeBase& kb, const std::string& path) { text::write_file(path, dump_kb(kb)); }

}  // namespace nlpfspl
