#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nlpfspl;
using nlpfspl::testing::covering_store;
using nlpfspl::testing::data_path;
using nlpfspl::testing::rich_profile;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string dehyphen(std::string s)
{
    for (std::size_t p; (p = s.find(" - ")) != std::string::npos;) {
        s.replace(p, 3, "-");
    }
    return s;
}

ApplicationProfile load_profile(const std::string& name)
{
    return profile_from_json(nlohmann::json::parse(text::read_file(data_path(name))));
}

KnowledgeBase events_kb() { return load_kb(data_path("kb_events.json")); }

}  // namespace

TEST(KeyTerms, PreparedReportExample)
{
    const auto kt = extract_key_terms("This XYZ non-interventional study report is prepared by a medical professional");
    std::vector<std::string> ents;
    for (const auto& e : kt.entities) {
        ents.push_back(dehyphen(e));
    }
    EXPECT_TRUE(contains(ents, "this XYZ non-interventional study report"));
    EXPECT_TRUE(contains(ents, "medical professional"));
    EXPECT_TRUE(contains(kt.actions, "prepare"));
}

TEST(KeyTerms, VerbBeforeNounPhrase)
{
    const auto kt = extract_key_terms("identify medical procedures");
    EXPECT_TRUE(contains(kt.actions, "identify"));
    EXPECT_TRUE(contains(kt.entities, "medical procedures"));
}

TEST(KeyTerms, StopwordsOnlyGoToResidual)
{
    const auto kt = extract_key_terms("of the and to in");
    EXPECT_TRUE(kt.entities.empty());
    EXPECT_TRUE(kt.actions.empty());
    EXPECT_EQ(kt.residual.size(), 5u);
}

TEST(KeyTerms, ListsPartitionWordTokens)
{
    const std::vector<std::string> texts = {
        "Detect financial events such as announcements about companies in business news messages.",
        "The patient was diagnosed to have epilepsy.", "classification event extraction", "F1",
        "Extract significant calendar events from open domain messages posted on Twitter."};
    for (const auto& t : texts) {
        const auto kt = extract_key_terms(t);
        std::size_t words = 0;
        const auto corpus = tokenize_and_tag(t);
        for (const auto& d : corpus.documents()) {
            for (const auto& s : d.paragraphs[0].sentences) {
                for (const auto& tk : s.tokens) {
                    words += detail::is_word_token(tk.surface) ? 1 : 0;
                }
            }
        }
        std::size_t got = kt.actions.size() + kt.residual.size();
        for (const auto& e : kt.entities) {
            got += text::split_ws(e).size();
        }
        EXPECT_EQ(got, words) << t;
    }
}

TEST(KeyTerms, ThesaurusMapsWords)
{
    const auto th = load_thesaurus(data_path("thesaurus.tsv"));
    const auto kt = extract_key_terms("a physician", &th);
    ASSERT_EQ(kt.entities.size(), 1u);
    EXPECT_EQ(kt.entities[0], "doctor");
}

TEST(FieldSimilarity, UnavailabilityAndIdentity)
{
    FieldEmbedding none{{0, 0}, {0, 0}, {0, 0}, false, false, false};
    const auto fs = field_similarity(none, none);
    EXPECT_EQ(fs.en.value + fs.act.value + fs.r.value, 0.0);
    EXPECT_FALSE(fs.en.available);

    FieldEmbedding full{{1, 2}, {3, 1}, {0.5, 0.5}, true, true, true};
    const auto same = field_similarity(full, full);
    EXPECT_NEAR(same.en.value, 1.0, 1e-15);
    EXPECT_NEAR(same.act.value, 1.0, 1e-15);
    EXPECT_NEAR(same.r.value, 1.0, 1e-15);

    FieldEmbedding other{{2, 1}, {-3, -1}, {1, 0}, true, true, true};
    const auto fo = field_similarity(full, other);
    EXPECT_NEAR(fo.en.value, 4.0 / 5.0, 1e-15);  // (1,2).(2,1) / (sqrt5 sqrt5)
    EXPECT_EQ(fo.act.value, 0.0);                // negative cosine clamps
    EXPECT_TRUE(fo.act.available);
    EXPECT_NEAR(fo.r.value, 0.5 / std::sqrt(0.5), 1e-15);
}

TEST(Proximity, SelfSimilarityIsOne)
{
    const auto a = rich_profile("a", AnnotationLevel::Sentence);
    const auto store = covering_store({a.problem_description, a.problem_type, a.performance_metric}, 1);
    const auto emb = embed_profiles({a, a}, store);
    for (const auto& f : emb[0].fields) {
        ASSERT_TRUE(f.has_en && f.has_act && f.has_r);
    }
    const auto pv = application_proximity(emb[0], emb[1]);
    for (double c : pv.components()) {
        EXPECT_NEAR(c, 1.0, 1e-12);
    }
    EXPECT_NEAR(pv.alpha(), 1.0, 1e-12);
}

TEST(Proximity, AnnotationLevelMismatchZeroesOnlyThatComponent)
{
    const auto a = rich_profile("a", AnnotationLevel::Sentence);
    const auto b = rich_profile("b", AnnotationLevel::Word);
    const auto store = covering_store({a.problem_description, a.problem_type, a.performance_metric}, 2);
    const auto emb = embed_profiles({a, b}, store);
    const auto same = embed_profiles({a, a}, store);
    const auto pv = application_proximity(emb[0], emb[1]);
    const auto ps = application_proximity(same[0], same[1]);
    const auto c = pv.components();
    const auto cs = ps.components();
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        EXPECT_NEAR(c[i], cs[i], 1e-12);
    }
    EXPECT_EQ(c.back(), 0.0);
    EXPECT_EQ(cs.back(), 1.0);
    EXPECT_NEAR(ps.alpha() - pv.alpha(), 1.0 / 10.0, 1e-12);
}

TEST(Proximity, SymmetricOnKbProfiles)
{
    const auto kb = events_kb();
    const auto store = load_embeddings(data_path("event_vectors.vec"));
    auto apps = kb.applications();
    apps.push_back(load_profile("new_profile.json"));
    const auto emb = embed_profiles(apps, store);
    for (std::size_t i = 0; i < emb.size(); ++i) {
        for (std::size_t j = 0; j < emb.size(); ++j) {
            const auto ab = application_proximity(emb[i], emb[j]);
            const auto ba = application_proximity(emb[j], emb[i]);
            EXPECT_NEAR(ab.alpha(), ba.alpha(), 1e-12);
            for (double c : ab.components()) {
                EXPECT_GE(c, 0.0);
                EXPECT_LE(c, 1.0);
            }
        }
    }
}

TEST(Proximity, OrthogonalVocabulariesGiveZero)
{
    EmbeddingStore store(2);
    store.add("alpha", {1, 0});
    store.add("beta", {0, 1});
    const ApplicationProfile a{"a", "alpha", AnnotationLevel::Word, "alpha", "alpha"};
    const ApplicationProfile b{"b", "beta", AnnotationLevel::Sentence, "beta", "beta"};
    const auto emb = embed_profiles({a, b}, store);
    EXPECT_EQ(application_proximity(emb[0], emb[1]).alpha(), 0.0);
}

TEST(Norsim, Examples)
{
    const Matrix pf = {{0.9}, {0.4}};
    const auto ns = norsim(pf, {0.8, 0.5});
    EXPECT_NEAR(ns[0][0], 0.72, 1e-15);
    EXPECT_NEAR(ns[1][0], 0.20, 1e-15);
    EXPECT_EQ(norsim(pf, {0.0, 0.0}), (Matrix{{0.0}, {0.0}}));
    EXPECT_EQ(norsim(pf, {1.0, 1.0}), pf);
    EXPECT_THROW(norsim(pf, {1.0}), ValidationError);
}

TEST(Policy, WorkedColumn)
{
    const auto ns = norsim(Matrix{{0.9}, {0.4}}, {0.8, 0.5});
    const std::vector<double> col = {ns[0][0], ns[1][0]};
    EXPECT_NEAR(apply_policy(col, Policy::Aggressive), 0.20, 1e-12);
    EXPECT_NEAR(apply_policy(col, Policy::Conservative), 0.72, 1e-12);
    EXPECT_NEAR(apply_policy(col, Policy::Probable), 0.46, 1e-12);
    EXPECT_EQ(bind_set(col, Policy::Conservative, apply_policy(col, Policy::Conservative)),
              (std::vector<std::size_t>{0}));
    EXPECT_EQ(bind_set({0.5, 0.5}, Policy::Aggressive, 0.5), (std::vector<std::size_t>{0, 1}));
    EXPECT_EQ(bind_set({0.72, 0.0}, Policy::Probable, 0.36), (std::vector<std::size_t>{0}));
    EXPECT_THROW(apply_policy({}, Policy::Probable), EmptyKnowledgeBase);
}

TEST(Policy, OrderingAndDegenerateColumns)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> col(nlpfspl::testing::uniform(rng, 1, 8));
        for (auto& x : col) {
            x = u(rng) * u(rng);
        }
        const double lo = apply_policy(col, Policy::Aggressive);
        const double mid = apply_policy(col, Policy::Probable);
        const double hi = apply_policy(col, Policy::Conservative);
        EXPECT_LE(lo, mid);
        EXPECT_LE(mid, hi);
        const std::vector<double> flat(col.size(), col[0]);
        EXPECT_EQ(apply_policy(flat, Policy::Probable), col[0]);
        EXPECT_EQ(apply_policy(flat, Policy::Aggressive), col[0]);
        EXPECT_EQ(apply_policy({col[0]}, Policy::Conservative), col[0]);
    }
}

TEST(Ranking, SingleAppFollowsRelevanceRow)
{
    KnowledgeBase kb;
    kb.add_application({"a", "d", AnnotationLevel::Word, "t", "F1"},
                       {{"POS_Sequence := YES;", 0.2, std::string("x")},
                        {"NGram := 2;", 0.9, std::string("y")},
                        {"NGram := 3;", 0.5, std::string("z")},
                        {"NGram := 4;", 0.5, std::string("w")}});
    const auto set = rank_features(kb, {0.6}, Policy::Probable);
    std::vector<std::string> order;
    for (const auto& r : set.items) {
        order.push_back(r.feature_id);
    }
    EXPECT_EQ(order, (std::vector<std::string>{"y", "w", "z", "x"}));
    EXPECT_EQ(set.items[0].rank, 1u);
    EXPECT_NEAR(set.items[0].relevance, 0.54, 1e-15);
    EXPECT_THROW(rank_features(kb, {-0.1}, Policy::Probable), ValidationError);
    EXPECT_THROW(rank_features(KnowledgeBase{}, {}, Policy::Probable), EmptyKnowledgeBase);
}

TEST(Ranking, EvidenceCarriesAlphaTimesDelta)
{
    const auto kb = events_kb();
    const auto set = rank_features(kb, {0.3, 0.6, 0.9}, Policy::Conservative);
    for (const auto& r : set.items) {
        ASSERT_EQ(r.evidence.size(), 3u);
        for (const auto& e : r.evidence) {
            EXPECT_EQ(e.norsim, e.alpha * e.delta);
        }
        EXPECT_GE(r.relevance, 0.0);
        EXPECT_LE(r.relevance, 1.0);
    }
}

TEST(Recommend, ThreeMarkFeaturesOutrankOneMarkFeatures)
{
    const auto kb = events_kb();
    const auto store = load_embeddings(data_path("event_vectors.vec"));
    const auto np = load_profile("new_profile.json");
    for (auto policy : {Policy::Aggressive, Policy::Conservative, Policy::Probable}) {
        const auto set = recommend(kb, np, policy, store);
        ASSERT_EQ(set.items.size(), 7u);
        std::set<std::string> top;
        for (std::size_t r = 0; r < 5; ++r) {
            top.insert(set.items[r].feature_id);
        }
        EXPECT_EQ(top, (std::set<std::string>{"pos", "morph", "ortho", "dep", "lex"})) << to_string(policy);
        EXPECT_GT(set.items[4].relevance, set.items[5].relevance) << to_string(policy);
    }
}

TEST(Recommend, IdenticalProfileDominates)
{
    const auto kb = events_kb();
    const auto store = load_embeddings(data_path("event_vectors.vec"));
    auto twin = kb.applications()[1];
    twin.id = "twin";
    const auto set = recommend(kb, twin, Policy::Conservative, store);
    EXPECT_NEAR(set.alphas[1], set.proximities[1].alpha(), 1e-15);
    for (const auto& f : set.proximities[1].fields) {
        for (const auto* c : {&f.en, &f.act, &f.r}) {
            // 0 when absent or fully out of vocabulary, else the self-cosine.
            EXPECT_TRUE(c->value == 0.0 || std::abs(c->value - 1.0) < 1e-12) << c->value;
        }
    }
    EXPECT_LT(set.alphas[0], set.alphas[1]);
    EXPECT_LT(set.alphas[2], set.alphas[1]);
}

TEST(Recommend, MetricMismatchAndEmptyKb)
{
    const auto kb = events_kb();
    const auto store = load_embeddings(data_path("event_vectors.vec"));
    auto np = load_profile("new_profile.json");
    np.performance_metric = "accuracy";
    EXPECT_THROW(recommend(kb, np, Policy::Probable, store), ValidationError);
    EXPECT_THROW(recommend(KnowledgeBase{}, np, Policy::Probable, store), EmptyKnowledgeBase);
}

TEST(Recommend, JsonRoundTripAndDeterminism)
{
    const auto kb = events_kb();
    const auto store = load_embeddings(data_path("event_vectors.vec"));
    const auto np = load_profile("new_profile.json");
    const auto a = recommend(kb, np, Policy::Probable, store);
    const auto b = recommend(kb, np, Policy::Probable, store);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    const auto back = recommendations_from_json(nlohmann::json::parse(recommendations_to_json(a).dump()),
                                                Policy::Probable, np.id);
    EXPECT_EQ(back.items, a.items);
    EXPECT_EQ(back.alphas, a.alphas);
    EXPECT_EQ(parse_policy(" Conservative "), Policy::Conservative);
    EXPECT_FALSE(parse_policy("greedy").has_value());
}
