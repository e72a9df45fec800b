#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nlpfspl;
using nlpfspl::testing::data_path;

TEST(LoadConll, SampleSentenceOneHasTwelveTokens)
{
    const auto corpus = load_conll(data_path("sample.tsv"));
    ASSERT_EQ(corpus.documents().size(), 1u);
    const auto& para = corpus.documents()[0].paragraphs;
    ASSERT_EQ(para.size(), 1u);
    ASSERT_EQ(para[0].sentences.size(), 8u);
    const auto& s1 = para[0].sentences[0].tokens;
    ASSERT_EQ(s1.size(), 12u);
    const std::vector<std::string> tags = {"DT", "JJ", "AFX", "HYPH", "JJ", "NN", "NN", "IN", "DT", "JJ", "NN", "."};
    for (std::size_t i = 0; i < tags.size(); ++i) {
        EXPECT_EQ(s1[i].pos, tags[i]);
        EXPECT_EQ(s1[i].token_idx, i);
        EXPECT_EQ(s1[i].doc_id, "doc1");
    }
    EXPECT_EQ(s1[0].surface, "This");
    EXPECT_EQ(s1[11].surface, ".");
}

TEST(LoadConll, EmptyInputGivesEmptyCorpus)
{
    EXPECT_TRUE(parse_conll("").documents().empty());
    EXPECT_TRUE(parse_conll("\n\n").documents().empty());
}

TEST(LoadConll, DocumentChangeStartsNewDocumentWithOwnIndices)
{
    const auto c = parse_conll("a\t0\t0\tx\tNN\na\t0\t0\ty\tNN\n\nb\t0\t0\tz\tNN\n\nb\t0\t1\tw\tNN\n");
    ASSERT_EQ(c.documents().size(), 2u);
    EXPECT_EQ(c.documents()[0].id, "a");
    EXPECT_EQ(c.documents()[1].id, "b");
    EXPECT_EQ(c.documents()[1].paragraphs[0].sentences.size(), 2u);
    EXPECT_EQ(c.token_count(), 4u);
    EXPECT_EQ(c.sentence_count(), 3u);
}

TEST(LoadConll, ExtraColumnsAreIgnored)
{
    const auto c = parse_conll("a\t0\t0\tx\tNN\textra\tmore\n");
    EXPECT_EQ(c.token_count(), 1u);
    EXPECT_EQ(c.documents()[0].paragraphs[0].sentences[0].tokens[0].pos, "NN");
}

TEST(LoadConll, MalformedLineReportsLineNumber)
{
    try {
        parse_conll("a\t0\t0\tx\tNN\na\t0\t0\ty\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse_conll("a\tzero\t0\tx\tNN\n"), ParseError);
    EXPECT_THROW(parse_conll("a\t0\t0\t\tNN\n"), ParseError);
}

TEST(LoadConll, NonMonotoneIndicesAreStructureErrors)
{
    EXPECT_THROW(parse_conll("a\t0\t1\tx\tNN\n\na\t0\t0\ty\tNN\n"), StructureError);
    EXPECT_THROW(parse_conll("a\t1\t0\tx\tNN\n\na\t0\t0\ty\tNN\n"), StructureError);
}

TEST(LoadConll, MissingFileIsIoError) { EXPECT_THROW(load_conll(data_path("no-such-file.tsv")), IoError); }

TEST(LoadConll, SerializeRoundTrips)
{
    const auto text = text::read_file(data_path("sample.tsv"));
    const auto corpus = parse_conll(text);
    const auto out = serialize_conll(corpus);
    EXPECT_EQ(parse_conll(out).documents(), corpus.documents());
    EXPECT_EQ(text::split_ws(out), text::split_ws(text));
}

TEST(LoadConll, TokenCountEqualsSumOfSentenceLengths)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto c = nlpfspl::testing::random_corpus(rng);
        std::size_t sum = 0;
        for (const auto& d : c.documents()) {
            for (const auto& p : d.paragraphs) {
                for (const auto& s : p.sentences) {
                    EXPECT_GE(s.tokens.size(), 1u);
                    sum += s.tokens.size();
                }
            }
        }
        EXPECT_EQ(sum, c.token_count());
        EXPECT_EQ(c.addresses().size(), sum);
    }
}

TEST(TokenizeAndTag, SingleSentence)
{
    const auto c = tokenize_and_tag("Dog runs.");
    ASSERT_EQ(c.sentence_count(), 1u);
    const auto& toks = c.documents()[0].paragraphs[0].sentences[0].tokens;
    ASSERT_EQ(toks.size(), 3u);
    EXPECT_EQ(toks[0].surface, "Dog");
    EXPECT_EQ(toks[1].surface, "runs");
    EXPECT_EQ(toks[2].surface, ".");
    EXPECT_EQ(toks[2].pos, ".");
}

TEST(TokenizeAndTag, SampleTextHasEightSentencesInOneParagraph)
{
    const auto c = tokenize_and_tag(text::read_file(data_path("sample.txt")));
    ASSERT_EQ(c.documents().size(), 1u);
    EXPECT_EQ(c.documents()[0].paragraphs.size(), 1u);
    EXPECT_EQ(c.sentence_count(), 8u);
}

TEST(TokenizeAndTag, EmptyTextGivesEmptyCorpus) { EXPECT_TRUE(tokenize_and_tag("").documents().empty()); }

TEST(TokenizeAndTag, BlankLinesSeparateParagraphs)
{
    const auto c = tokenize_and_tag("One dog. Two cats.\n\nThird line here.");
    ASSERT_EQ(c.documents()[0].paragraphs.size(), 2u);
    EXPECT_EQ(c.documents()[0].paragraphs[0].sentences.size(), 2u);
    EXPECT_EQ(c.documents()[0].paragraphs[1].sentences.size(), 1u);
}

TEST(TokenizeAndTag, UnknownWordsDefaultToNoun)
{
    const auto c = tokenize_and_tag("zorblax");
    EXPECT_EQ(c.documents()[0].paragraphs[0].sentences[0].tokens[0].pos, "NN");
}

TEST(Normalization, ThesaurusMergesVariants)
{
    const auto th = load_thesaurus(data_path("thesaurus.tsv"));
    const NormalizationTable table(th);
    EXPECT_EQ(table.normalize("objective"), "goal");
    EXPECT_EQ(table.normalize("goal"), "goal");
    EXPECT_EQ(table.normalize("IP"), "intellectual property");
}

TEST(Normalization, StemsWithoutThesaurus)
{
    const NormalizationTable table;
    EXPECT_EQ(table.normalize("running"), "run");
    EXPECT_EQ(table.normalize("Running"), "run");
    EXPECT_EQ(table.normalize("conditions"), "condit");
}

TEST(Normalization, IsIdempotentOverSampleVocabulary)
{
    const auto corpus = load_conll(data_path("sample.tsv"));
    const auto table = build_normalization(corpus, load_thesaurus(data_path("thesaurus.tsv")));
    for (const auto& [word, rep] : table.table()) {
        EXPECT_EQ(table.normalize(rep), rep) << word;
        EXPECT_EQ(table.normalize(table.normalize(word)), table.normalize(word)) << word;
    }
}

TEST(Normalization, ThesaurusParseErrorHasLineNumber)
{
    try {
        parse_thesaurus("# comment\nok\tfine\nbroken line\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(Normalization, NormClassesAreFilled)
{
    const auto corpus = load_conll(data_path("sample.tsv"));
    const auto normed = with_norm_classes(corpus, build_normalization(corpus));
    const auto& tok = normed.documents()[0].paragraphs[0].sentences[2].tokens[3];
    ASSERT_TRUE(tok.norm_class.has_value());
    EXPECT_EQ(tok.surface, "worsening");
    EXPECT_EQ(*tok.norm_class, "worsen");
}

TEST(Stemmer, KnownOutputs)
{
    EXPECT_EQ(porter_stem("caresses"), "caress");
    EXPECT_EQ(porter_stem("ponies"), "poni");
    EXPECT_EQ(porter_stem("relational"), "relat");
    EXPECT_EQ(porter_stem("hopping"), "hop");
    EXPECT_EQ(porter_stem("generalization"), "gener");
}
