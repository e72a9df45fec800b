#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace nlpfspl;
using nlpfspl::testing::data_path;

namespace {

FeatureSpec sample_spec()
{
    FeatureSpec s;
    s.features.push_back({PosSequenceParams{}, {}});
    s.features.push_back({PosRegexParams{"NN"}, {}});
    s.features.push_back({SuffixPrefixParams{AffixKind::Suffix, 3, std::nullopt}, {}});
    s.features.push_back({CapitalizationParams{CapitalizationMode::First}, {}});
    s.features.push_back({SpecialCharsParams{{"@", "-"}}, {}});
    s.features.push_back({ContextWindowParams{3, ContextScope::Para}, {}});
    return s;
}

}  // namespace

TEST(Parse, SampleSpecFileMatchesExpectedAst)
{
    const auto spec = load_spec(data_path("sample_spec.fspl"));
    EXPECT_EQ(spec, sample_spec());
    EXPECT_EQ(spec.meta.analysis_unit, AnalysisUnit::Sentence);
    EXPECT_FALSE(spec.meta.normalize_variants);
    EXPECT_TRUE(validate(spec).empty());
}

TEST(Parse, InlineSampleFragment)
{
    const auto spec = parse("Syntactic_Unit := Word; POS_Regex := NN; Suffix_Prefix := [Suffix, 3, NULL]; "
                            "Capitalization := First; Special_Chars := @,-; Context_Window := [3, Para]");
    ASSERT_EQ(spec.features.size(), 5u);
    EXPECT_EQ(spec.meta.syntactic_unit, SUExpr::word());
    EXPECT_EQ(std::get<ContextWindowParams>(spec.features[4].params), (ContextWindowParams{3, ContextScope::Para}));
    EXPECT_EQ(std::get<SpecialCharsParams>(spec.features[3].params).chars, (std::vector<std::string>{"@", "-"}));
}

TEST(Parse, PhraseAndPosRegex)
{
    const auto spec = parse("Syntactic_Unit := Phrase AND POS Regex \"NN.*\";");
    EXPECT_EQ(spec.meta.syntactic_unit, SUExpr::all_of({SUExpr::phrase(), SUExpr::pos_regex("NN.*")}));
}

TEST(Parse, ZeroWidthWindowIsRejected)
{
    try {
        parse("Context_Window := [0, Sentence];");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
        EXPECT_GT(e.column(), 0u);
        EXPECT_NE(std::string(e.what()).find("width"), std::string::npos);
    }
}

TEST(Parse, ErrorsCarryLineAndColumn)
{
    try {
        parse("POS_Sequence := YES;\nBogus_Key := 3;\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_EQ(e.column(), 1u);
    }
    try {
        parse("Suffix_Prefix := [Suffix, 3];");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 1u);
    }
    EXPECT_THROW(parse("Context_Window := [2, Sentence"), ParseError);
    EXPECT_THROW(parse("Analysis_Unit := Sentence; BM25_Weight := YES;"), ParseError);
    EXPECT_THROW(parse("POSContext := NN;"), ParseError);
    EXPECT_THROW(parse("POS_Sequence := YES; POS_Sequence := YES;"), ParseError);
    EXPECT_THROW(parse("Syntactic_Unit := NOT Word;"), ParseError);
    EXPECT_THROW(parse("POS_Regex := \"(\";"), ParseError);
}

TEST(Parse, KeysAreCaseInsensitive)
{
    const auto a = parse("Syntactic_Unit := Word;\nPOS_Sequence := YES;\nContext_Window := [2, Sentence];");
    const auto b = parse("syntactic_unit := Word;\npos_SEQUENCE := YES;\nCONTEXT_WINDOW := [2, Sentence];");
    EXPECT_EQ(a, b);
}

TEST(Parse, NewlineTerminatesStatementsAndCommentsAreSkipped)
{
    const auto spec = parse("# header\nPOS_Sequence := YES\nContext_Window := [2, Sentence]; POSContext := NN|VB\n");
    ASSERT_EQ(spec.features.size(), 3u);
    EXPECT_EQ(std::get<PosContextParams>(spec.features[2].params).pattern, "NN|VB");
}

TEST(Parse, MetaElements)
{
    const auto spec = parse("Analysis_Unit := Document; Normalize_Morphosyntactic_Variants := YES;"
                            "Syntactic_Unit := NGram(2) OR (Word AND NOT Regex \"^[0-9]+$\");"
                            "Term_Frequency := YES; BM25_Weight := [1.5, 0.5]; InterArrival_Delay := patient;");
    EXPECT_EQ(spec.meta.analysis_unit, AnalysisUnit::Document);
    EXPECT_TRUE(spec.meta.normalize_variants);
    EXPECT_EQ(spec.meta.syntactic_unit,
              SUExpr::any_of({SUExpr::ngram(2),
                              SUExpr::all_of({SUExpr::word(), SUExpr::negate(SUExpr::char_regex("^[0-9]+$"))})}));
    EXPECT_EQ(std::get<Bm25WeightParams>(spec.features[1].params), (Bm25WeightParams{1.5, 0.5}));
    EXPECT_EQ(std::get<InterArrivalDelayParams>(spec.features[2].params).term, "patient");
}

TEST(Validate, SampleSpecIsClean) { EXPECT_TRUE(validate(sample_spec()).empty()); }

TEST(Validate, Bm25AtSentenceNeedsDocumentOrCorpus)
{
    FeatureSpec s;
    s.features.push_back({Bm25WeightParams{}, {}});
    const auto d = validate(s);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_NE(d[0].message.find("requires Document/Corpus AU"), std::string::npos);
}

TEST(Validate, EmptyFeatureList)
{
    const auto d = validate(FeatureSpec{});
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].message, "no features declared");
}

TEST(Validate, LinguisticFeatureAtCorpusAu)
{
    FeatureSpec s;
    s.meta.analysis_unit = AnalysisUnit::Corpus;
    s.features.push_back({PosSequenceParams{}, {}});
    EXPECT_EQ(validate(s).size(), 1u);
}

TEST(Serialize, SampleSpecIsOneStatementPerLine)
{
    const auto text = serialize(sample_spec());
    EXPECT_EQ(text, "Analysis_Unit := Sentence;\n"
                    "Syntactic_Unit := Word;\n"
                    "POS_Sequence := YES;\n"
                    "POS_Regex := NN;\n"
                    "Suffix_Prefix := [Suffix, 3, NULL];\n"
                    "Capitalization := First;\n"
                    "Special_Chars := @,-;\n"
                    "Context_Window := [3, Para];\n");
}

TEST(Serialize, MinimalSpecHasThreeStatements)
{
    FeatureSpec s;
    s.features.push_back({PosSequenceParams{}, {}});
    EXPECT_EQ(text::split(text::trim(serialize(s)), '\n').size(), 3u);
}

TEST(Serialize, LogicalExpressionIsParenthesized)
{
    FeatureSpec s;
    s.meta.syntactic_unit = SUExpr::all_of({SUExpr::phrase(), SUExpr::any_of({SUExpr::pos_regex("NN.*"),
                                                                              SUExpr::negate(SUExpr::word())})});
    s.features.push_back({PosSequenceParams{}, {}});
    const auto text = serialize(s);
    EXPECT_NE(text.find("(Phrase AND (POS Regex \"NN.*\" OR NOT Word))"), std::string::npos);
    EXPECT_EQ(parse(text), s);
}

TEST(RoundTrip, RandomSpecs)
{
    std::mt19937_64 rng(12345);
    for (int i = 0; i < 2000; ++i) {
        const auto spec = nlpfspl::testing::random_spec(rng);
        ASSERT_TRUE(validate(spec).empty()) << serialize(spec);
        const auto text = serialize(spec);
        FeatureSpec back;
        ASSERT_NO_THROW(back = parse(text)) << text;
        ASSERT_EQ(back, spec) << text;
        EXPECT_EQ(serialize(back), text);
    }
}

TEST(Totality, ArbitraryBytesEitherParseOrRaiseParseError)
{
    std::mt19937_64 rng(99);
    const std::string alphabet = "abcNNPOS_:=;[](),|\"\\#\n\t @-ANDORNOT0123456789\xc3\xa9\xff";
    for (int i = 0; i < 3000; ++i) {
        std::string s;
        const auto n = nlpfspl::testing::uniform(rng, 0, 80);
        for (std::size_t k = 0; k < n; ++k) {
            s += alphabet[nlpfspl::testing::uniform(rng, 0, alphabet.size() - 1)];
        }
        try {
            (void)parse(s);
        } catch (const ParseError& e) {
            EXPECT_GE(e.line(), 1u);
        }
    }
}
