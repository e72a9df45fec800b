#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nlpfspl;
using nlpfspl::testing::data_path;
using nlpfspl::testing::hand_bm25;

namespace {

const std::vector<std::vector<std::string>> toy_docs = {{"a", "b"}, {"a", "c"}, {"a", "a", "d"}};

}  // namespace

TEST(Bm25, ToyCorpusMatchesFrozenValues)
{
    // Frozen from a separate script evaluating the formula term by term.
    const Bm25Corpus bm(toy_docs);
    EXPECT_NEAR(bm.weight("a", 0), 0.1418195480288033, 1e-12);
    EXPECT_NEAR(bm.weight("b", 0), 1.041708310095213, 1e-12);
    EXPECT_NEAR(bm.weight("c", 1), 1.041708310095213, 1e-12);
    EXPECT_NEAR(bm.weight("a", 2), 0.16994904515848328, 1e-12);
    EXPECT_NEAR(bm.weight("d", 2), 0.8781843311849177, 1e-12);
    EXPECT_LT(bm.weight("a", 2), bm.weight("d", 2));
}

TEST(Bm25, ToyCorpusMatchesHandFormula)
{
    const Bm25Corpus bm(toy_docs);
    const double avg = 7.0 / 3.0;
    for (std::size_t d = 0; d < toy_docs.size(); ++d) {
        const auto w = bm.weights_for(d);
        for (const auto& [term, value] : w.weights) {
            double df = 0;
            for (const auto& doc : toy_docs) {
                df += std::count(doc.begin(), doc.end(), term) > 0 ? 1 : 0;
            }
            const double tf = static_cast<double>(std::count(toy_docs[d].begin(), toy_docs[d].end(), term));
            EXPECT_NEAR(value, hand_bm25(3, df, tf, static_cast<double>(toy_docs[d].size()), avg), 1e-12) << term;
        }
    }
}

TEST(Bm25, UbiquitousWordKeepsPositiveIdf)
{
    const Bm25Corpus bm(toy_docs);
    EXPECT_NEAR(bm.idf("a"), std::log(1.0 + 0.5 / 3.5), 1e-15);
    EXPECT_NEAR(bm.idf("a"), 0.13353139262452257, 1e-15);
    EXPECT_GT(bm.idf("a"), 0.0);
}

TEST(Bm25, AbsentWordsAreAbsent)
{
    const Bm25Corpus bm(toy_docs);
    EXPECT_FALSE(bm.weights_for(0).contains("d"));
    EXPECT_FALSE(bm.weights_for(0).contains(""));
    EXPECT_EQ(bm.weight("zzz", 1), 0.0);
    EXPECT_THROW(Bm25Corpus({}), ValidationError);
}

TEST(Bm25, WeightFallsAsDocumentFrequencyRises)
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const double n = static_cast<double>(nlpfspl::testing::uniform(rng, 2, 40));
        const double tf = static_cast<double>(nlpfspl::testing::uniform(rng, 1, 5));
        const double len = static_cast<double>(nlpfspl::testing::uniform(rng, 1, 30));
        const double avg = static_cast<double>(nlpfspl::testing::uniform(rng, 1, 30));
        for (double df = 1; df < n; ++df) {
            EXPECT_GT(hand_bm25(n, df, tf, len, avg), hand_bm25(n, df + 1, tf, len, avg));
        }
    }
    // Same property through the implementation: "x" in one doc vs "y" in two.
    const Bm25Corpus bm({{"x", "y"}, {"y", "z"}, {"z", "w"}});
    EXPECT_GT(bm.weight("x", 0), bm.weight("y", 0));
}

TEST(Bm25, AllTogetherWeightsAggregateTermFrequency)
{
    const Bm25Corpus bm(toy_docs);
    const auto all = bm.weights_for_all();
    EXPECT_NEAR(all.weight("a"), hand_bm25(3, 3, 4, 7, 7.0 / 3.0), 1e-12);
}

TEST(Embeddings, LoadToyFixture)
{
    const auto store = load_embeddings(data_path("toy.vec"));
    EXPECT_EQ(store.dimension(), 3u);
    EXPECT_EQ(store.size(), 5u);
    EXPECT_EQ(*store.find("Physician"), (Vector{0.8, 0.3, 0.1}));
}

TEST(Embeddings, LoadFiftyDimensionalFixture)
{
    const auto store = load_embeddings(data_path("event_vectors.vec"));
    EXPECT_EQ(store.dimension(), 50u);
    EXPECT_EQ(store.size(), 40u);
}

TEST(Embeddings, DimensionMismatchReportsLine)
{
    try {
        parse_embeddings("a 1 2\nb 1 2 3\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_embeddings(""), ParseError);
    EXPECT_THROW(parse_embeddings("a 1 x\n"), ParseError);
    EXPECT_EQ(parse_embeddings("2 3\na 1 2 3\nb 4 5 6\n").dimension(), 3u);
}

TEST(Embeddings, WeightedWordVector)
{
    EmbeddingStore store(2);
    store.add("u", {1.0, 0.0});
    Bm25Weights w;
    w.weights["u"] = 2.0;
    EXPECT_EQ(weighted_word_vector("u", store, w), (Vector{2.0, 0.0}));
    EXPECT_EQ(weighted_word_vector("oov", store, w), (Vector{0.0, 0.0}));

    const auto toy = load_embeddings(data_path("toy.vec"));
    const Bm25Corpus bm({{"physician", "report"}, {"doctor"}});
    const auto weights = bm.weights_for(0);
    const double bw = hand_bm25(2, 1, 1, 2, 1.5);
    const auto v = weighted_word_vector("physician", toy, weights);
    EXPECT_NEAR(v[0], bw * 0.8, 1e-12);
    EXPECT_NEAR(v[1], bw * 0.3, 1e-12);
    EXPECT_NEAR(v[2], bw * 0.1, 1e-12);
}

TEST(Embeddings, TermEmbeddingIsMeanOfWords)
{
    EmbeddingStore store(2);
    store.add("p", {2.0, 0.0});
    store.add("q", {0.0, 2.0});
    EXPECT_EQ(term_embedding("p q", store), (Vector{1.0, 1.0}));
    EXPECT_EQ(term_embedding("p", store), (Vector{2.0, 0.0}));
    // Out-of-vocabulary words do not dilute the mean.
    EXPECT_EQ(term_embedding("p zz q", store), (Vector{1.0, 1.0}));
    EXPECT_EQ(term_embedding("q p", store), term_embedding("p q", store));

    const auto toy = load_embeddings(data_path("toy.vec"));
    const auto rs = term_embedding("report study", toy);
    EXPECT_NEAR(rs[0], (0.2 + 0.3) / 2, 1e-15);
    EXPECT_NEAR(rs[1], (0.1 + 0.2) / 2, 1e-15);
    EXPECT_NEAR(rs[2], (0.9 + 0.8) / 2, 1e-15);
}

TEST(Embeddings, FieldEmbeddingSumsChannels)
{
    EmbeddingStore store(2);
    store.add("p", {1.0, 0.0});
    store.add("q", {0.0, 1.0});
    Bm25Weights w;
    w.weights = {{"p", 1.0}, {"q", 1.0}};
    const auto fe = field_embedding(KeyTerms{{"p", "q"}, {}, {"p q"}}, store, w);
    EXPECT_TRUE(fe.has_en);
    EXPECT_FALSE(fe.has_act);
    EXPECT_EQ(fe.en, (Vector{1.0, 1.0}));
    EXPECT_EQ(fe.act, (Vector{0.0, 0.0}));
    EXPECT_EQ(fe.r, (Vector{0.5, 0.5}));
}

TEST(Cosine, Examples)
{
    EXPECT_EQ(cosine({1, 0}, {1, 0}), 1.0);
    EXPECT_EQ(cosine({1, 0}, {0, 1}), 0.0);
    EXPECT_NEAR(cosine({1, 2, 3}, {4, 5, 6}), 0.9746318461970762, 1e-12);
    EXPECT_NEAR(cosine({1, 2, 3}, {4, 5, 6}), 32.0 / std::sqrt(14.0 * 77.0), 1e-15);
    EXPECT_EQ(cosine({0, 0}, {1, 2}), 0.0);
    EXPECT_THROW(cosine({1}, {1, 2}), ValidationError);
}

TEST(Cosine, SymmetricAndScaleInvariant)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 500; ++i) {
        Vector u(8), v(8);
        for (auto& x : u) {
            x = g(rng);
        }
        for (auto& x : v) {
            x = g(rng);
        }
        EXPECT_DOUBLE_EQ(cosine(u, v), cosine(v, u));
        Vector cu = u;
        const double c = std::abs(g(rng)) + 0.01;
        for (auto& x : cu) {
            x *= c;
        }
        EXPECT_NEAR(cosine(cu, v), cosine(u, v), 1e-12);
        EXPECT_LE(std::abs(cosine(u, v)), 1.0 + 1e-12);
    }
}
