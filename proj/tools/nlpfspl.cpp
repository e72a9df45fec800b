// nlpfspl command-line driver: extraction, knowledge base, recommendation,
// feedback and the HTTP service.
//
// Exit codes: 0 success, 1 validation/schema/parse error, 2 I/O error.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include <nlpfspl/http_server.hpp>
#include <nlpfspl/nlpfspl.hpp>

namespace {

using namespace nlpfspl;

nlohmann::json read_json(const std::string& path)
{
    const auto content = text::read_file(path);
    try {
        return nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("/", path + ": invalid JSON: " + e.what());
    }
}

void write_output(const std::string& path, std::string_view content)
{
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
    } else {
        text::write_file(path, content);
    }
}

std::optional<Thesaurus> maybe_thesaurus(const std::string& path)
{
    if (path.empty()) {
        return std::nullopt;
    }
    return load_thesaurus(path);
}

Policy policy_arg(const std::string& s)
{
    auto p = parse_policy(s);
    if (!p) {
        throw ValidationError("unknown policy '" + s + "' (aggressive, conservative, probable)");
    }
    return *p;
}

// DOC:PARA:SENT, DOC being the document id.
struct SentenceSelector {
    std::string doc;
    std::size_t para = 0;
    std::size_t sent = 0;
};

SentenceSelector parse_selector(const std::string& s)
{
    const auto parts = text::split(s, ':');
    if (parts.size() != 3 || parts[0].empty()) {
        throw ValidationError("--only-sentence expects DOC:PARA:SENT, got '" + s + "'");
    }
    try {
        return {parts[0], std::stoul(parts[1]), std::stoul(parts[2])};
    } catch (const std::exception&) {
        throw ValidationError("--only-sentence expects numeric PARA and SENT, got '" + s + "'");
    }
}

struct ExtractArgs {
    std::string corpus, text_path, spec, format = "csv", out, only_sentence, thesaurus, embeddings;
    unsigned threads = 1;
};

int run_extract(const ExtractArgs& a)
{
    if (a.corpus.empty() == a.text_path.empty()) {
        throw ValidationError("give exactly one of --corpus or --text");
    }
    const auto corpus = a.corpus.empty() ? tokenize_and_tag(text::read_file(a.text_path)) : load_conll(a.corpus);
    const auto spec = load_spec(a.spec);
    ExtractionOptions opts;
    opts.thesaurus = maybe_thesaurus(a.thesaurus);
    opts.threads = a.threads;
    std::optional<EmbeddingStore> store;
    if (!a.embeddings.empty()) {
        store = load_embeddings(a.embeddings);
        opts.embeddings = &*store;
    }
    if (!a.only_sentence.empty()) {
        const auto sel = parse_selector(a.only_sentence);
        opts.row_filter = [sel](const AnnotatedCorpus& c, const SyntacticUnitInstance& su) {
            const auto& tok = c.at(su.first);
            return tok.doc_id == sel.doc && tok.para_idx == sel.para && tok.sent_idx == sel.sent;
        };
    }
    const auto matrix = build_feature_matrix(corpus, spec, opts);
    if (a.format == "csv") {
        write_output(a.out, to_csv(matrix));
    } else if (a.format == "jsonl") {
        write_output(a.out, to_jsonl(matrix));
    } else {
        throw ValidationError("--format must be csv or jsonl");
    }
    return 0;
}

KnowledgeBase load_kb_or_empty(const std::string& path)
{
    if (!std::filesystem::exists(path)) {
        return {};
    }
    return load_kb(path);
}

int run_kb_add(const std::string& kb_path, const std::string& profile_path, const std::string& features_path)
{
    auto kb = load_kb_or_empty(kb_path);
    const auto profile = profile_from_json(read_json(profile_path));
    std::vector<FeatureInput> features;
    if (!features_path.empty()) {
        features = features_from_json(read_json(features_path));
    }
    kb.add_application(profile, features);
    save_kb(kb, kb_path);
    std::cout << "added " << profile.id << " (" << kb.app_count() << " applications, " << kb.feature_count()
              << " features)\n";
    return 0;
}

int run_kb_list(const std::string& kb_path)
{
    const auto kb = load_kb(kb_path);
    for (const auto& a : kb.applications()) {
        std::cout << a.id << '\t' << to_string(a.annotation_level) << '\t' << a.problem_type << '\t'
                  << a.performance_metric << '\n';
    }
    return 0;
}

int run_kb_show(const std::string& kb_path, const std::string& id)
{
    const auto kb = load_kb(kb_path);
    const auto i = kb.find_application(id);
    if (!i) {
        throw ValidationError("unknown application '" + id + "'");
    }
    nlohmann::ordered_json out;
    out["profile"] = to_json(kb.applications()[*i]);
    out["features"] = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < kb.feature_count(); ++j) {
        if (kb.relevance(*i, j) > 0.0) {
            nlohmann::ordered_json f;
            f["feature_id"] = kb.catalog()[j].feature_id;
            f["fspl_source"] = kb.catalog()[j].fspl_source;
            f["relevance"] = kb.relevance(*i, j);
            out["features"].push_back(f);
        }
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct RecommendArgs {
    std::string kb, profile, policy = "probable", embeddings, thesaurus, model, out, full;
};

int run_recommend(const RecommendArgs& a)
{
    const auto kb = load_kb(a.kb);
    if (kb.empty()) {
        throw EmptyKnowledgeBase();
    }
    const auto profile = profile_from_json(read_json(a.profile));
    const auto policy = policy_arg(a.policy);
    const auto store = load_embeddings(a.embeddings);
    const auto thesaurus = maybe_thesaurus(a.thesaurus);
    std::optional<SimilarityModel> model;
    if (!a.model.empty() && std::filesystem::exists(a.model)) {
        model = similarity_model_from_json(read_json(a.model));
    }
    RecommendOptions ro;
    ro.thesaurus = thesaurus ? &*thesaurus : nullptr;
    ro.model = model ? &*model : nullptr;
    const auto recs = recommend(kb, profile, policy, store, ro);
    write_output(a.out, recommendations_to_json(recs).dump(2) + "\n");
    if (!a.full.empty()) {
        text::write_file(a.full, to_json(recs).dump(2) + "\n");
    }
    return 0;
}

struct FeedbackArgs {
    std::string kb, recs, event, policy = "probable", profile, embeddings, thesaurus, model, out;
    double epsilon = 0.05;
    bool raw_mean = false;
};

int run_feedback(const FeedbackArgs& a)
{
    const auto kb = load_kb(a.kb);
    const auto event = feedback_event_from_json(read_json(a.event));
    auto recs = recommendations_from_json(read_json(a.recs), policy_arg(a.policy), event.app_id);
    FeedbackOptions fo;
    fo.epsilon = a.epsilon;
    fo.raw_mean = a.raw_mean;
    const auto outcome = process_feedback(event, recs, kb, fo);
    for (const auto& w : outcome.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    auto out = to_json(outcome);

    // Retraining needs the proximity vectors, so it runs only when the new
    // profile, the vectors and a model file are all given.
    if (outcome.retrained() && !a.model.empty() && !a.profile.empty() && !a.embeddings.empty()) {
        const auto profile = profile_from_json(read_json(a.profile));
        const auto store = load_embeddings(a.embeddings);
        const auto thesaurus = maybe_thesaurus(a.thesaurus);
        const Thesaurus* th = thesaurus ? &*thesaurus : nullptr;
        SimilarityModel model;
        if (std::filesystem::exists(a.model)) {
            model = similarity_model_from_json(read_json(a.model));
        }
        RecommendOptions ro;
        ro.thesaurus = th;
        recs.proximities = proximities_to_kb(kb, profile, store, ro);
        if (retrain_similarity(model, outcome, recs, kb, store, th)) {
            text::write_file(a.model, to_json(model).dump(2) + "\n");
            auto updated = rank_features(kb, alphas_for(recs.proximities, &model), recs.policy);
            out["model_version"] = model.version();
            out["updated_recommendations"] = recommendations_to_json(updated);
        }
    }
    write_output(a.out, out.dump(2) + "\n");
    return 0;
}

struct ServeArgs {
    std::string host = "127.0.0.1", kb, embeddings, thesaurus, state;
    int port = 8080;
    double epsilon = 0.05;
};

int run_serve(const ServeArgs& a)
{
    ServiceOptions so;
    if (!a.embeddings.empty()) {
        so.embeddings = std::make_shared<const EmbeddingStore>(load_embeddings(a.embeddings));
    }
    so.thesaurus = maybe_thesaurus(a.thesaurus);
    so.feedback.epsilon = a.epsilon;
    KnowledgeBase kb;
    if (!a.kb.empty()) {
        kb = load_kb_or_empty(a.kb);
        so.kb_path = a.kb;
    }
    Service service(std::move(kb), so);
    HttpServer server(service);

    // Signals are taken synchronously by a watcher thread, so stop() never
    // runs inside a handler.
    sigset_t sigs;
    sigemptyset(&sigs);
    sigaddset(&sigs, SIGINT);
    sigaddset(&sigs, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &sigs, nullptr);

    const int port = server.bind(a.host, a.port);
    std::cout << "listening on http://" << a.host << ':' << port << std::endl;

    std::thread watcher([&server, sigs] {
        int sig = 0;
        sigwait(&sigs, &sig);
        server.stop();
    });
    watcher.detach();
    server.listen();

    if (!a.state.empty()) {
        text::write_file(a.state, service.snapshot().dump(2) + "\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"nlpfspl: feature specification extraction and recommendation"};
    app.require_subcommand(1);
    unsigned long seed = 0;
    app.add_option("--seed", seed, "Seed for stochastic defaults (none are used at present)");

    ExtractArgs ex;
    auto* extract = app.add_subcommand("extract", "Build a feature matrix from a corpus and a spec");
    extract->add_option("--corpus", ex.corpus, "5-column TAB annotated corpus");
    extract->add_option("--text", ex.text_path, "Raw text file, tagged with the built-in tagger");
    extract->add_option("--spec", ex.spec, "Feature specification (.fspl)")->required();
    extract->add_option("--format", ex.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    extract->add_option("--out", ex.out, "Output path (default stdout)");
    extract->add_option("--only-sentence", ex.only_sentence, "Keep rows of one sentence, DOC:PARA:SENT");
    extract->add_option("--thesaurus", ex.thesaurus, "variant<TAB>representative file");
    extract->add_option("--embeddings", ex.embeddings, "Word vectors for Semantic_Similarity");
    extract->add_option("--threads", ex.threads, "Documents processed concurrently");

    auto* kbcmd = app.add_subcommand("kb", "Manage the knowledge base");
    kbcmd->require_subcommand(1);
    std::string kb_path, profile_path, features_path, app_id, export_out;
    auto* kb_add = kbcmd->add_subcommand("add", "Add an application with its features");
    kb_add->add_option("--kb", kb_path, "Knowledge base JSON (created if missing)")->required();
    kb_add->add_option("--profile", profile_path, "Application profile JSON")->required();
    kb_add->add_option("--features", features_path, "JSON array of {fspl_source, relevance, feature_id?}");
    auto* kb_list = kbcmd->add_subcommand("list", "List applications");
    kb_list->add_option("--kb", kb_path)->required();
    auto* kb_show = kbcmd->add_subcommand("show", "Show one application and its features");
    kb_show->add_option("--kb", kb_path)->required();
    kb_show->add_option("--id", app_id)->required();
    auto* kb_export = kbcmd->add_subcommand("export", "Write the knowledge base in canonical form");
    kb_export->add_option("--kb", kb_path)->required();
    kb_export->add_option("--out", export_out, "Output path (default stdout)");

    RecommendArgs ra;
    auto* rec = app.add_subcommand("recommend", "Rank catalog features for a new application");
    rec->add_option("--kb", ra.kb)->required();
    rec->add_option("--profile", ra.profile, "New application profile JSON")->required();
    rec->add_option("--policy", ra.policy, "aggressive, conservative or probable");
    rec->add_option("--embeddings", ra.embeddings)->required();
    rec->add_option("--thesaurus", ra.thesaurus);
    rec->add_option("--model", ra.model, "Similarity model JSON; used when present");
    rec->add_option("--out", ra.out, "Output path (default stdout)");
    rec->add_option("--full", ra.full, "Also write the set with per-application proximities");

    FeedbackArgs fa;
    auto* fb = app.add_subcommand("feedback", "Apply a feedback event to a recommendation list");
    fb->add_option("--kb", fa.kb)->required();
    fb->add_option("--recs", fa.recs, "Recommendation list written by `recommend`")->required();
    fb->add_option("--event", fa.event, "Feedback event JSON")->required();
    fb->add_option("--epsilon", fa.epsilon, "Relative change that triggers retraining");
    fb->add_option("--policy", fa.policy, "Policy the list was ranked with");
    fb->add_flag("--raw-mean", fa.raw_mean, "NewSim is the plain mean of the ratios");
    fb->add_option("--profile", fa.profile, "New application profile, needed to retrain");
    fb->add_option("--embeddings", fa.embeddings, "Word vectors, needed to retrain");
    fb->add_option("--thesaurus", fa.thesaurus);
    fb->add_option("--model", fa.model, "Similarity model JSON, read and rewritten on retraining");
    fb->add_option("--out", fa.out, "Output path (default stdout)");

    ServeArgs sa;
    auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
    serve->add_option("--host", sa.host);
    serve->add_option("--port", sa.port, "0 picks a free port");
    serve->add_option("--kb", sa.kb, "Knowledge base JSON, rewritten on every added application");
    serve->add_option("--embeddings", sa.embeddings);
    serve->add_option("--thesaurus", sa.thesaurus);
    serve->add_option("--epsilon", sa.epsilon);
    serve->add_option("--state", sa.state, "Session snapshot written on shutdown");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*extract) {
            return run_extract(ex);
        }
        if (*kb_add) {
            return run_kb_add(kb_path, profile_path, features_path);
        }
        if (*kb_list) {
            return run_kb_list(kb_path);
        }
        if (*kb_show) {
            return run_kb_show(kb_path, app_id);
        }
        if (*kb_export) {
            write_output(export_out, dump_kb(load_kb(kb_path)));
            return 0;
        }
        if (*rec) {
            return run_recommend(ra);
        }
        if (*fb) {
            return run_feedback(fa);
        }
        if (*serve) {
            return run_serve(sa);
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
