#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corpus.hpp"
#include "embeddings.hpp"
#include "error.hpp"
#include "extract.hpp"
#include "feedback.hpp"
#include "kb.hpp"
#include "normalization.hpp"
#include "parser.hpp"
#include "pls.hpp"
#include "recommender.hpp"
#include "tagger.hpp"
#include "text.hpp"

namespace nlpfspl {

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

struct ServiceOptions {
    std::shared_ptr<const EmbeddingStore> embeddings;
    std::optional<Thesaurus> thesaurus;
    FeedbackOptions feedback{};
    std::optional<std::size_t> pls_components;
    std::optional<std::string> kb_path;  // rewritten after every accepted application
};

/// Transport-independent JSON API. Requests on distinct sessions run
/// concurrently; KB writes and model retraining take the exclusive lock.
class Service {
  public:
    Service(KnowledgeBase kb, ServiceOptions opts)
        : m_kb(std::move(kb)), m_opts(std::move(opts)), m_model(m_opts.pls_components)
    {}

    HttpResponse handle(std::string_view method, std::string_view path, std::string_view body)
    {
        try {
            return route(method, path, body);
        } catch (const EmptyKnowledgeBase& e) {
            return error(422, e.what());
        } catch (const NotFoundError& e) {
            return error(404, e.what());
        } catch (const ConflictError& e) {
            return error(409, e.what());
        } catch (const SchemaError& e) {
            return error(400, e.what(), e.pointer());
        } catch (const Error& e) {
            return error(400, e.what());
        } catch (const nlohmann::json::exception& e) {
            return error(400, e.what());
        } catch (const std::exception& e) {
            return error(500, e.what());
        }
    }

    KnowledgeBase kb() const
    {
        std::shared_lock lock(m_mutex);
        return m_kb;
    }

    SimilarityModel model() const
    {
        std::shared_lock lock(m_mutex);
        return m_model;
    }

    /// Sessions and model archive, for persisting on shutdown.
    nlohmann::ordered_json snapshot() const
    {
        nlohmann::ordered_json sessions = nlohmann::ordered_json::array();
        std::lock_guard slock(m_sessions_mutex);
        for (const auto& [id, s] : m_sessions) {
            std::lock_guard lock(s->mutex);
            nlohmann::ordered_json entry;
            entry["session_id"] = id;
            entry["recommendation_id"] = s->recommendation_id;
            entry["profile"] = to_json(s->profile);
            entry["policy"] = std::string(to_string(s->recs.policy));
            entry["ledger"] = nlohmann::ordered_json::object();
            for (const auto& [app, xs] : s->ledger) {
                entry["ledger"][app] = xs;
            }
            sessions.push_back(entry);
        }
        std::shared_lock lock(m_mutex);
        nlohmann::ordered_json out;
        out["sessions"] = sessions;
        out["model"] = to_json(m_model);
        return out;
    }

  private:
    struct Session {
        std::mutex mutex;
        std::string id;
        ApplicationProfile profile;
        RecommendationSet recs;
        std::size_t sequence = 1;
        std::string recommendation_id;
        ChangeLedger ledger;
        std::size_t kb_version = 0;
    };

    static HttpResponse error(int status, const std::string& msg, const std::string& pointer = "")
    {
        nlohmann::ordered_json j;
        j["error"] = msg;
        if (!pointer.empty()) {
            j["pointer"] = pointer;
        }
        return {status, "application/json", j.dump()};
    }

    static HttpResponse ok(const nlohmann::ordered_json& j, int status = 200)
    {
        return {status, "application/json", j.dump()};
    }

    static nlohmann::json parse_body(std::string_view body)
    {
        try {
            return nlohmann::json::parse(body);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("/", std::string("invalid JSON: ") + e.what());
        }
    }

    const Thesaurus* thesaurus() const { return m_opts.thesaurus ? &*m_opts.thesaurus : nullptr; }

    const EmbeddingStore& store() const
    {
        if (!m_opts.embeddings) {
            throw ValidationError("no embeddings loaded");
        }
        return *m_opts.embeddings;
    }

    HttpResponse route(std::string_view method, std::string_view path, std::string_view body)
    {
        auto parts = text::split(path, '/');
        std::vector<std::string> seg;
        for (auto& p : parts) {
            if (!p.empty()) {
                seg.push_back(std::move(p));
            }
        }
        auto method_not_allowed = [] { return error(405, "method not allowed"); };
        if (seg.size() < 2 || seg[0] != "v1") {
            throw NotFoundError("no route for " + std::string(path));
        }
        const std::string& res = seg[1];
        if (res == "extract" && seg.size() == 2) {
            return method == "POST" ? post_extract(body) : method_not_allowed();
        }
        if (res == "applications" && seg.size() == 2) {
            if (method == "POST") {
                return post_application(body);
            }
            return method == "GET" ? list_applications() : method_not_allowed();
        }
        if (res == "applications" && seg.size() == 3) {
            return method == "GET" ? get_application(seg[2]) : method_not_allowed();
        }
        if (res == "recommend" && seg.size() == 2) {
            return method == "POST" ? post_recommend(body) : method_not_allowed();
        }
        if (res == "feedback" && seg.size() == 2) {
            return method == "POST" ? post_feedback(body) : method_not_allowed();
        }
        if (res == "proximity" && seg.size() == 4) {
            return method == "GET" ? get_proximity(seg[2], seg[3]) : method_not_allowed();
        }
        throw NotFoundError("no route for " + std::string(path));
    }

    // POST /v1/extract {corpus | text, spec, format?}
    HttpResponse post_extract(std::string_view body)
    {
        const auto j = parse_body(body);
        const auto spec_src = detail::require_string(j, "spec", "");
        AnnotatedCorpus corpus;
        if (j.contains("corpus")) {
            corpus = parse_conll(detail::require_string(j, "corpus", ""));
        } else if (j.contains("text")) {
            corpus = tokenize_and_tag(detail::require_string(j, "text", ""));
        } else {
            throw SchemaError("", "missing required field 'corpus'");
        }
        const auto spec = parse(spec_src);
        ExtractionOptions eo;
        eo.embeddings = m_opts.embeddings.get();
        eo.thesaurus = m_opts.thesaurus;
        const auto matrix = build_feature_matrix(corpus, spec, eo);
        std::string format = "jsonl";
        if (j.contains("format")) {
            format = detail::require_string(j, "format", "");
        }
        if (format == "csv") {
            return {200, "text/csv", to_csv(matrix)};
        }
        if (format != "jsonl") {
            throw SchemaError("/format", "expected 'csv' or 'jsonl'");
        }
        return {200, "application/x-ndjson", to_jsonl(matrix)};
    }

    // POST /v1/applications {profile, features}
    HttpResponse post_application(std::string_view body)
    {
        const auto j = parse_body(body);
        const auto profile = profile_from_json(detail::require(j, "profile", ""), "/profile");
        std::vector<FeatureInput> features;
        if (j.contains("features")) {
            features = features_from_json(j["features"], "/features");
        }
        std::unique_lock lock(m_mutex);
        KnowledgeBase next = m_kb;
        next.add_application(profile, features);
        if (m_opts.kb_path) {
            save_kb(next, *m_opts.kb_path);
        }
        m_kb = std::move(next);
        ++m_kb_version;
        return ok(application_json(m_kb, *m_kb.find_application(profile.id)), 201);
    }

    static nlohmann::ordered_json application_json(const KnowledgeBase& kb, std::size_t i)
    {
        nlohmann::ordered_json feats = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < kb.feature_count(); ++j) {
            if (kb.relevance(i, j) > 0.0) {
                feats.push_back({{"feature_id", kb.catalog()[j].feature_id},
                                 {"fspl_source", kb.catalog()[j].fspl_source},
                                 {"relevance", kb.relevance(i, j)}});
            }
        }
        nlohmann::ordered_json out;
        out["profile"] = to_json(kb.applications()[i]);
        out["features"] = feats;
        return out;
    }

    HttpResponse list_applications() const
    {
        std::shared_lock lock(m_mutex);
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& a : m_kb.applications()) {
            arr.push_back(to_json(a));
        }
        return ok(arr);
    }

    HttpResponse get_application(const std::string& id) const
    {
        std::shared_lock lock(m_mutex);
        auto i = m_kb.find_application(id);
        if (!i) {
            throw NotFoundError("unknown application '" + id + "'");
        }
        return ok(application_json(m_kb, *i));
    }

    // POST /v1/recommend {profile, policy}
    HttpResponse post_recommend(std::string_view body)
    {
        const auto j = parse_body(body);
        const auto profile = profile_from_json(detail::require(j, "profile", ""), "/profile");
        const auto policy_s = detail::require_string(j, "policy", "");
        const auto policy = parse_policy(policy_s);
        if (!policy) {
            throw SchemaError("/policy", "expected aggressive, conservative or probable");
        }
        auto session = std::make_shared<Session>();
        {
            std::shared_lock lock(m_mutex);
            RecommendOptions ro;
            ro.thesaurus = thesaurus();
            ro.model = &m_model;
            if (m_kb.empty()) {
                throw EmptyKnowledgeBase();
            }
            session->recs = recommend(m_kb, profile, *policy, store(), ro);
            session->kb_version = m_kb_version;
        }
        session->profile = profile;
        {
            std::lock_guard slock(m_sessions_mutex);
            session->id = "s" + std::to_string(++m_session_counter);
            session->recommendation_id = session->id + "-r1";
            m_sessions.emplace(session->id, session);
        }
        auto out = nlohmann::ordered_json::object();
        out["session_id"] = session->id;
        out["recommendation_id"] = session->recommendation_id;
        out.update(to_json(session->recs));
        return ok(out);
    }

    std::shared_ptr<Session> find_session(const std::string& id) const
    {
        std::lock_guard slock(m_sessions_mutex);
        auto it = m_sessions.find(id);
        if (it == m_sessions.end()) {
            throw NotFoundError("unknown session '" + id + "'");
        }
        return it->second;
    }

    // POST /v1/feedback {session_id, recommendation_id?, event}
    HttpResponse post_feedback(std::string_view body)
    {
        const auto j = parse_body(body);
        const auto sid = detail::require_string(j, "session_id", "");
        const auto event = feedback_event_from_json(detail::require(j, "event", ""), "/event");
        auto session = find_session(sid);
        std::lock_guard slock(session->mutex);
        if (j.contains("recommendation_id")) {
            const auto rid = detail::require_string(j, "recommendation_id", "");
            if (rid != session->recommendation_id) {
                throw ConflictError("recommendation '" + rid + "' is stale; current is '" +
                                    session->recommendation_id + "'");
            }
        }
        if (event.app_id != session->profile.id) {
            throw ConflictError("event is for '" + event.app_id + "' but session " + sid + " is for '" +
                                session->profile.id + "'");
        }

        FeedbackOutcome outcome;
        {
            std::unique_lock lock(m_mutex);
            if (session->kb_version != m_kb_version) {
                throw ConflictError("knowledge base changed since session " + sid + " was created");
            }
            outcome = process_feedback(event, session->recs, m_kb, m_opts.feedback, &session->ledger);
            if (outcome.retrained()) {
                SimilarityModel next = m_model;
                if (retrain_similarity(next, outcome, session->recs, m_kb, store(), thesaurus())) {
                    m_model = std::move(next);
                }
            }
            auto updated = rank_features(m_kb, alphas_for(session->recs.proximities, &m_model), session->recs.policy);
            updated.new_app_id = session->recs.new_app_id;
            updated.proximities = session->recs.proximities;
            session->recs = std::move(updated);
        }
        for (const auto& [app, xs] : outcome.ledger) {
            auto& dst = session->ledger[app];
            dst.insert(dst.end(), xs.begin(), xs.end());
        }
        session->recommendation_id = session->id + "-r" + std::to_string(++session->sequence);

        auto out = nlohmann::ordered_json::object();
        out["session_id"] = session->id;
        out["recommendation_id"] = session->recommendation_id;
        out.update(to_json(outcome));
        out["updated_recommendations"] = to_json(session->recs);
        return ok(out);
    }

    // GET /v1/proximity/{a}/{b}
    HttpResponse get_proximity(const std::string& a, const std::string& b) const
    {
        std::shared_lock lock(m_mutex);
        auto ia = m_kb.find_application(a);
        auto ib = m_kb.find_application(b);
        if (!ia) {
            throw NotFoundError("unknown application '" + a + "'");
        }
        if (!ib) {
            throw NotFoundError("unknown application '" + b + "'");
        }
        const auto embedded = embed_profiles(m_kb.applications(), store(), thesaurus());
        const auto pv = application_proximity(embedded[*ia], embedded[*ib]);
        nlohmann::ordered_json out;
        out["a"] = a;
        out["b"] = b;
        out.update(to_json(pv));
        if (m_model.trained()) {
            out["predicted_alpha"] = m_model.predict(pv.components());
        }
        return ok(out);
    }

    mutable std::shared_mutex m_mutex;  // guards m_kb, m_kb_version, m_model
    KnowledgeBase m_kb;
    std::size_t m_kb_version = 0;
    ServiceOptions m_opts;
    SimilarityModel m_model;

    mutable std::mutex m_sessions_mutex;
    std::map<std::string, std::shared_ptr<Session>> m_sessions;
    std::size_t m_session_counter = 0;
};

}  // namespace nlpfspl
