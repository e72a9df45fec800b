#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "kb.hpp"
#include "recommender.hpp"

namespace nlpfspl {

enum class FeedbackMode { Rerank, Rescore };

inline std::string_view to_string(FeedbackMode m) { return m == FeedbackMode::Rerank ? "Rerank" : "Rescore"; }

struct FeedbackItem {
    std::string feature_id;
    std::optional<std::size_t> user_rank;  // 1-based
    std::optional<double> user_rel;
};

struct FeedbackEvent {
    std::string app_id;  // the new application the recommendations were made for
    FeedbackMode mode = FeedbackMode::Rescore;
    std::vector<FeedbackItem> items;
};

/// user_rel / system_rel; nullopt when system_rel is 0.
inline std::optional<double> ratio_rescore(double user_rel, double system_rel)
{
    if (system_rel == 0.0) {
        return std::nullopt;
    }
    return user_rel / system_rel;
}

/// (system relevance at the user-assigned rank) / delta; nullopt when delta
/// is 0. `relevance_by_rank[r]` is the system relevance at rank r + 1.
inline std::optional<double> ratio_rerank(std::size_t user_rank, const std::vector<double>& relevance_by_rank,
                                          double delta)
{
    if (user_rank < 1 || user_rank > relevance_by_rank.size()) {
        throw ValidationError("user rank " + std::to_string(user_rank) + " outside 1.." +
                              std::to_string(relevance_by_rank.size()));
    }
    if (delta == 0.0) {
        return std::nullopt;
    }
    return relevance_by_rank[user_rank - 1] / delta;
}

/// |new_sim - alpha| >= epsilon * alpha
inline bool should_retrain(double new_sim, double alpha, double epsilon)
{
    return std::abs(new_sim - alpha) >= epsilon * alpha;
}

/// Correction ratios recorded per application.
using ChangeLedger = std::map<std::string, std::vector<double>>;

struct FeedbackOptions {
    double epsilon = 0.05;
    /// NewSim = mean of the raw ratios instead of clamp(mean(x) * alpha, 0, 1).
    bool raw_mean = false;
};

struct FeedbackOutcome {
    ChangeLedger ledger;
    std::map<std::string, double> new_sim;
    std::map<std::string, double> alpha;  // alpha of each app in the ledger
    std::set<std::string> retrain;        // apps whose NewSim passed the gate
    std::vector<std::string> warnings;

    bool retrained() const noexcept { return !retrain.empty(); }
};

namespace detail {

inline void check_event(const FeedbackEvent& ev, const RecommendationSet& recs)
{
    std::set<std::string> seen;
    for (const auto& it : ev.items) {
        if (recs.find(it.feature_id) == nullptr) {
            throw ValidationError("unknown feature id '" + it.feature_id + "'");
        }
        if (!seen.insert(it.feature_id).second) {
            throw ValidationError("feature '" + it.feature_id + "' appears twice in the event");
        }
        if (ev.mode == FeedbackMode::Rescore) {
            if (!it.user_rel) {
                throw ValidationError("rescore item '" + it.feature_id + "' lacks user_rel");
            }
            if (!(*it.user_rel >= 0.0 && *it.user_rel <= 1.0)) {
                throw ValidationError("user_rel for '" + it.feature_id + "' must be in [0,1]");
            }
        } else if (!it.user_rank) {
            throw ValidationError("rerank item '" + it.feature_id + "' lacks user_rank");
        }
    }
    if (ev.mode == FeedbackMode::Rerank) {
        if (ev.items.size() != recs.items.size()) {
            throw ValidationError("rerank must assign a rank to every recommended feature");
        }
        std::vector<bool> used(recs.items.size(), false);
        for (const auto& it : ev.items) {
            const auto r = *it.user_rank;
            if (r < 1 || r > used.size() || used[r - 1]) {
                throw ValidationError("user ranks must form a permutation of 1.." + std::to_string(used.size()));
            }
            used[r - 1] = true;
        }
    }
}

}  // namespace detail

/// For every changed feature, appends its correction ratio to the ledger of
/// each application in its bind set, then derives NewSim per application.
/// Ratios with a zero divisor are skipped with a warning.
/// `prior` is the session's ledger so far; its ratios join the mean for every
/// application this event touches.
inline FeedbackOutcome process_feedback(const FeedbackEvent& ev, const RecommendationSet& recs, const KnowledgeBase& kb,
                                        const FeedbackOptions& opts = {}, const ChangeLedger* prior = nullptr)
{
    detail::check_event(ev, recs);
    if (!(opts.epsilon > 0.0)) {
        throw ValidationError("epsilon must be > 0");
    }
    std::vector<double> by_rank;
    for (const auto& r : recs.items) {
        by_rank.push_back(r.relevance);
    }
    std::map<std::string, double> alpha_of;
    for (std::size_t i = 0; i < recs.app_ids.size(); ++i) {
        alpha_of[recs.app_ids[i]] = recs.alphas.at(i);
    }

    FeedbackOutcome out;
    for (const auto& it : ev.items) {
        const Recommendation& rec = *recs.find(it.feature_id);
        std::optional<double> rescore_x;
        if (ev.mode == FeedbackMode::Rescore) {
            if (std::abs(*it.user_rel - rec.relevance) <= 1e-12) {
                continue;
            }
            rescore_x = ratio_rescore(*it.user_rel, rec.relevance);
            if (!rescore_x) {
                out.warnings.push_back("skipped '" + it.feature_id + "': system relevance is 0");
                continue;
            }
        } else if (*it.user_rank == rec.rank) {
            continue;
        }
        const auto col = kb.find_feature(it.feature_id);
        for (const auto& app : rec.bind) {
            std::optional<double> x = rescore_x;
            if (ev.mode == FeedbackMode::Rerank) {
                const auto row = kb.find_application(app);
                if (!row || !col) {
                    throw ConflictError("recommendation refers to '" + app + "'/'" + it.feature_id +
                                        "', which the knowledge base no longer holds");
                }
                x = ratio_rerank(*it.user_rank, by_rank, kb.relevance(*row, *col));
                if (!x) {
                    out.warnings.push_back("skipped '" + it.feature_id + "' for '" + app + "': relevance is 0");
                    continue;
                }
            }
            if (!std::isfinite(*x) || *x <= 0.0) {
                out.warnings.push_back("skipped '" + it.feature_id + "' for '" + app + "': ratio " +
                                       text::format_double(*x) + " is not positive");
                continue;
            }
            out.ledger[app].push_back(*x);
        }
    }

    for (const auto& [app, added] : out.ledger) {
        std::vector<double> xs;
        if (prior != nullptr) {
            if (auto it = prior->find(app); it != prior->end()) {
                xs = it->second;
            }
        }
        xs.insert(xs.end(), added.begin(), added.end());
        double mean = 0.0;
        for (double x : xs) {
            mean += x;
        }
        mean /= static_cast<double>(xs.size());
        const double a = alpha_of.count(app) ? alpha_of.at(app) : 0.0;
        const double sim = opts.raw_mean ? mean : std::clamp(mean * a, 0.0, 1.0);
        out.new_sim[app] = sim;
        out.alpha[app] = a;
        if (should_retrain(sim, a, opts.epsilon)) {
            out.retrain.insert(app);
        }
    }
    return out;
}

inline FeedbackEvent feedback_event_from_json(const nlohmann::json& j, const std::string& ptr = "")
{
    FeedbackEvent ev;
    ev.app_id = detail::require_string(j, "app_id", ptr);
    const auto mode = text::to_lower(detail::require_string(j, "mode", ptr));
    if (mode == "rerank") {
        ev.mode = FeedbackMode::Rerank;
    } else if (mode == "rescore") {
        ev.mode = FeedbackMode::Rescore;
    } else {
        throw SchemaError(ptr + "/mode", "expected Rerank or Rescore");
    }
    const auto& items = detail::require(j, "items", ptr);
    if (!items.is_array()) {
        throw SchemaError(ptr + "/items", "expected an array");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string p = ptr + "/items/" + std::to_string(i);
        FeedbackItem it;
        it.feature_id = detail::require_string(items[i], "feature_id", p);
        if (auto r = items[i].find("user_rank"); r != items[i].end() && !r->is_null()) {
            if (!r->is_number_integer() || r->get<long long>() < 1) {
                throw SchemaError(p + "/user_rank", "expected a positive integer");
            }
            it.user_rank = r->get<std::size_t>();
        }
        if (auto r = items[i].find("user_rel"); r != items[i].end() && !r->is_null()) {
            if (!r->is_number()) {
                throw SchemaError(p + "/user_rel", "expected a number");
            }
            it.user_rel = r->get<double>();
        }
        ev.items.push_back(std::move(it));
    }
    return ev;
}

inline nlohmann::ordered_json to_json(const FeedbackOutcome& o)
{
    nlohmann::ordered_json out;
    out["new_sim"] = nlohmann::ordered_json::object();
    for (const auto& [app, v] : o.new_sim) {
        out["new_sim"][app] = v;
    }
    out["ledger"] = nlohmann::ordered_json::object();
    for (const auto& [app, xs] : o.ledger) {
        out["ledger"][app] = xs;
    }
    out["retrained"] = o.retrained();
    out["retrain_apps"] = std::vector<std::string>(o.retrain.begin(), o.retrain.end());
    out["warnings"] = o.warnings;
    return out;
}

// ---------------------------------------------------------------------------
// Model training set

/// Proximity of every unordered pair of KB applications, as training pairs
/// (components -> alpha).
inline std::vector<PlsSample> kb_proximity_samples(const KnowledgeBase& kb, const EmbeddingStore& store,
                                                   const Thesaurus* thesaurus = nullptr)
{
    std::vector<PlsSample> out;
    const auto embedded = embed_profiles(kb.applications(), store, thesaurus);
    for (std::size_t a = 0; a < embedded.size(); ++a) {
        for (std::size_t b = a + 1; b < embedded.size(); ++b) {
            const auto pv = application_proximity(embedded[a], embedded[b]);
            out.push_back({pv.components(), pv.alpha()});
        }
    }
    return out;
}

/// Training pairs (proximity to the app -> NewSim) for the apps past the gate.
inline std::vector<PlsSample> feedback_samples(const FeedbackOutcome& outcome, const RecommendationSet& recs)
{
    std::vector<PlsSample> out;
    for (const auto& app : outcome.retrain) {
        for (std::size_t i = 0; i < recs.app_ids.size(); ++i) {
            if (recs.app_ids[i] == app && i < recs.proximities.size()) {
                out.push_back({recs.proximities[i].components(), outcome.new_sim.at(app)});
            }
        }
    }
    return out;
}

/// Adds the feedback pairs to the model's archive (seeding it with the KB's
/// pairwise proximities on first use) and refits. Returns false when there
/// is nothing to train on.
inline bool retrain_similarity(SimilarityModel& model, const FeedbackOutcome& outcome, const RecommendationSet& recs,
                               const KnowledgeBase& kb, const EmbeddingStore& store,
                               const Thesaurus* thesaurus = nullptr)
{
    auto added = feedback_samples(outcome, recs);
    if (added.empty()) {
        return false;
    }
    if (model.archive().empty()) {
        auto seed = kb_proximity_samples(kb, store, thesaurus);
        seed.insert(seed.end(), added.begin(), added.end());
        added = std::move(seed);
    }
    if (model.archive().size() + added.size() < 2) {
        return false;
    }
    model.retrain(added);
    return true;
}

inline nlohmann::ordered_json to_json(const SimilarityModel& m)
{
    nlohmann::ordered_json archive = nlohmann::ordered_json::array();
    for (const auto& s : m.archive()) {
        nlohmann::ordered_json sample;
        sample["x"] = s.x;
        sample["y"] = s.y;
        archive.push_back(sample);
    }
    nlohmann::ordered_json out;
    out["version"] = m.version();
    out["components"] = m.components() ? nlohmann::ordered_json(*m.components()) : nlohmann::ordered_json(nullptr);
    out["archive"] = archive;
    return out;
}

inline SimilarityModel similarity_model_from_json(const nlohmann::json& j)
{
    std::optional<std::size_t> comps;
    if (auto it = j.find("components"); it != j.end() && !it->is_null()) {
        if (!it->is_number_unsigned()) {
            throw SchemaError("/components", "expected a positive integer");
        }
        comps = it->get<std::size_t>();
    }
    SimilarityModel m(comps);
    const auto& arr = detail::require(j, "archive", "");
    if (!arr.is_array()) {
        throw SchemaError("/archive", "expected an array");
    }
    std::vector<PlsSample> archive;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = "/archive/" + std::to_string(i);
        const auto& x = detail::require(arr[i], "x", p);
        const auto& y = detail::require(arr[i], "y", p);
        if (!x.is_array() || !y.is_number()) {
            throw SchemaError(p, "expected {x: [numbers], y: number}");
        }
        PlsSample s;
        for (const auto& v : x) {
            if (!v.is_number()) {
                throw SchemaError(p + "/x", "expected numbers");
            }
            s.x.push_back(v.get<double>());
        }
        s.y = y.get<double>();
        archive.push_back(std::move(s));
    }
    std::size_t version = 0;
    if (auto it = j.find("version"); it != j.end() && it->is_number_unsigned()) {
        version = it->get<std::size_t>();
    }
    m.restore(std::move(archive), version);
    return m;
}

}  // namespace nlpfspl
