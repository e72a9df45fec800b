#include <gtest/gtest.h>

#include <fstream>

#include "test_support.hpp"

using namespace nlpfspl;
using nlpfspl::testing::data_path;

namespace {

const AnnotatedCorpus& sample()
{
    static const AnnotatedCorpus c = load_conll(data_path("sample.tsv"));
    return c;
}

SyntacticUnitInstance word_at(std::size_t sent, std::size_t tok)
{
    const auto& s = sample().documents()[0].paragraphs[0].sentences[sent];
    return {{0, 0, sent, tok}, tok + 1, s.tokens[tok].surface};
}

// Surfaces of the fixture in file order, read straight from the TSV.
std::vector<std::string> raw_surfaces()
{
    std::ifstream in(data_path("sample.tsv"));
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        auto f = text::split(line, '\t');
        if (f.size() >= 5) {
            out.push_back(f[3]);
        }
    }
    return out;
}

}  // namespace

TEST(ResolveSU, WordGivesTwelveInstancesInFirstSentence)
{
    const auto all = resolve_syntactic_units(sample(), SUExpr::word());
    EXPECT_EQ(all.size(), sample().token_count());
    std::size_t first = 0;
    for (const auto& su : all) {
        first += su.first.sent == 0 ? 1 : 0;
        EXPECT_EQ(su.size(), 1u);
    }
    EXPECT_EQ(first, 12u);
}

TEST(ResolveSU, NGramOfTwoOnThreeTokens)
{
    const auto c = parse_conll("d\t0\t0\ta\tDT\nd\t0\t0\tb\tNN\nd\t0\t0\tc\tNN\n");
    const auto su = resolve_syntactic_units(c, SUExpr::ngram(2));
    ASSERT_EQ(su.size(), 2u);
    EXPECT_EQ(su[0].text, "a b");
    EXPECT_EQ(su[1].text, "b c");
}

TEST(ResolveSU, PosRegexMatchesEveryAdjectiveNounPair)
{
    // Oracle: every adjacent (JJ, NN) pair of the fixture, scanned from the raw tags.
    std::vector<std::string> expected;
    for (const auto& d : sample().documents()) {
        for (const auto& s : d.paragraphs[0].sentences) {
            for (std::size_t i = 0; i + 1 < s.tokens.size(); ++i) {
                if (s.tokens[i].pos == "JJ" && s.tokens[i + 1].pos == "NN") {
                    expected.push_back(s.tokens[i].surface + " " + s.tokens[i + 1].surface);
                }
            }
        }
    }
    std::vector<std::string> got;
    for (const auto& su : resolve_syntactic_units(sample(), SUExpr::pos_regex("JJ NN"))) {
        got.push_back(su.text);
    }
    EXPECT_EQ(got, expected);
    EXPECT_EQ(got, (std::vector<std::string>{"interventional study", "medical professional", "Spontaneous report",
                                             "unknown date", "first dose"}));
}

TEST(ResolveSU, PhraseAndPosFilter)
{
    const auto nps = resolve_syntactic_units(sample(), SUExpr::all_of({SUExpr::phrase(), SUExpr::pos_regex("DT JJ NN")}));
    std::vector<std::string> got;
    for (const auto& su : nps) {
        got.push_back(su.text);
    }
    EXPECT_NE(std::find(got.begin(), got.end(), "a medical professional"), got.end());
    EXPECT_NE(std::find(got.begin(), got.end(), "the first dose"), got.end());
}

TEST(ResolveSU, NegationExcludes)
{
    const auto su = resolve_syntactic_units(
        sample(), SUExpr::all_of({SUExpr::word(), SUExpr::negate(SUExpr::char_regex("[A-Za-z]+"))}));
    for (const auto& s : su) {
        EXPECT_FALSE(std::regex_match(s.text, std::regex("[A-Za-z]+"))) << s.text;
    }
    EXPECT_FALSE(su.empty());
}

TEST(ResolveSU, OrIsUnionWithoutDuplicates)
{
    const auto a = resolve_syntactic_units(sample(), SUExpr::pos_regex("NN"));
    const auto b = resolve_syntactic_units(sample(), SUExpr::pos_regex("JJ"));
    const auto u = resolve_syntactic_units(sample(), SUExpr::any_of({SUExpr::pos_regex("NN"), SUExpr::pos_regex("JJ")}));
    EXPECT_EQ(u.size(), a.size() + b.size());
}

TEST(Features, PosSequence)
{
    EXPECT_EQ(extract_pos_sequence(sample(), word_at(0, 5)), "NN");
    EXPECT_EQ(extract_pos_sequence(sample(), word_at(0, 3)), "HYPH");
    const SyntacticUnitInstance mp{{0, 0, 0, 9}, 11, "medical professional"};
    EXPECT_EQ(extract_pos_sequence(sample(), mp), "JJ NN");
}

TEST(Features, PosRegexIsFullMatch)
{
    const std::regex nn("NN");
    EXPECT_TRUE(extract_pos_regex("NN", nn));
    EXPECT_FALSE(extract_pos_regex("DT", nn));
    EXPECT_FALSE(extract_pos_regex("JJ", nn));
    EXPECT_FALSE(extract_pos_regex("NNS", nn));
}

TEST(Features, SuffixPrefix)
{
    EXPECT_EQ(extract_suffix_prefix("study", AffixKind::Suffix, 3), "udy");
    EXPECT_EQ(extract_suffix_prefix("a", AffixKind::Suffix, 3), "a");
    EXPECT_EQ(extract_suffix_prefix("study", AffixKind::Prefix, 2), "st");
    const std::regex vowel_end(".*[aeiou]");
    EXPECT_EQ(extract_suffix_prefix("study", AffixKind::Suffix, 3, &vowel_end), "");
    EXPECT_EQ(extract_suffix_prefix("cafe", AffixKind::Suffix, 2, &vowel_end), "fe");
    EXPECT_EQ(extract_suffix_prefix("naïve", AffixKind::Suffix, 3), "ïve");
}

TEST(Features, SuffixLengthIsMinOfNAndTextLength)
{
    for (const auto& w : raw_surfaces()) {
        for (std::size_t n = 1; n <= 6; ++n) {
            EXPECT_EQ(text::utf8_length(extract_suffix_prefix(w, AffixKind::Suffix, n)),
                      std::min(n, text::utf8_length(w)));
        }
    }
}

TEST(Features, Capitalization)
{
    EXPECT_TRUE(extract_capitalization("This", CapitalizationMode::First));
    EXPECT_FALSE(extract_capitalization("non", CapitalizationMode::First));
    EXPECT_TRUE(extract_capitalization("XYZ", CapitalizationMode::All));
    EXPECT_FALSE(extract_capitalization("XyZ", CapitalizationMode::All));
    EXPECT_FALSE(extract_capitalization("-", CapitalizationMode::All));
    EXPECT_TRUE(extract_capitalization("xYz", CapitalizationMode::Any));
    EXPECT_FALSE(extract_capitalization("", CapitalizationMode::First));
}

TEST(Features, SpecialChars)
{
    EXPECT_EQ(extract_special_chars("-", {"@", "-"}), (std::vector<bool>{false, true}));
    EXPECT_EQ(extract_special_chars("study", {"@", "-"}), (std::vector<bool>{false, false}));
    EXPECT_EQ(extract_special_chars("a@b", {"@"}), (std::vector<bool>{true}));
}

TEST(ContextWindow, FirstTokenIsTruncatedAtParagraphStart)
{
    EXPECT_EQ(extract_context_window(sample(), word_at(0, 0), 3, ContextScope::Para),
              (std::vector<std::string>{"XYZ", "non", "-"}));
}

TEST(ContextWindow, ParaScopeCrossesIntoNextSentence)
{
    EXPECT_EQ(extract_context_window(sample(), word_at(0, 9), 3, ContextScope::Para),
              (std::vector<std::string>{"report", "from", "a", "professional", ".", "Spontaneous"}));
}

TEST(ContextWindow, SentenceScopeWithTagFilter)
{
    const std::regex nn("NN");
    EXPECT_EQ(extract_context_window(sample(), word_at(0, 6), 2, ContextScope::Sentence, &nn),
              (std::vector<std::string>{"study"}));
}

TEST(ContextWindow, RepeatedSurfacesBeyondTheSentenceAreSkipped)
{
    // "a" from sentence 2 already occurs in sentence 1, so the window reaches "physician".
    EXPECT_EQ(extract_context_window(sample(), word_at(0, 10), 3, ContextScope::Para),
              (std::vector<std::string>{"from", "a", "medical", ".", "Spontaneous", "physician"}));
}

TEST(ContextWindow, ReportRowFollowsTheSkipRule)
{
    const std::vector<std::string> expected_report = {"-", "interventional", "study", "from", "a", "medical"};
    EXPECT_EQ(extract_context_window(sample(), word_at(0, 6), 3, ContextScope::Para), expected_report);
}

TEST(ContextWindow, MatchesBruteForceOracle)
{
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 300; ++i) {
        const auto corpus = nlpfspl::testing::random_corpus(rng);
        const auto flat = nlpfspl::testing::flatten(corpus);
        const std::size_t width = nlpfspl::testing::uniform(rng, 1, 6);
        const auto scope = static_cast<ContextScope>(nlpfspl::testing::uniform(rng, 0, 2));
        const auto sus = resolve_syntactic_units(corpus, SUExpr::word());
        for (const auto& su : sus) {
            const auto first = nlpfspl::testing::flat_index(flat, su.first);
            const auto last = nlpfspl::testing::flat_index(flat, su.address(su.size() - 1));
            const auto o = nlpfspl::testing::context_oracle(flat, first, last, width, scope);
            std::vector<std::string> expected;
            for (auto k : o.left) {
                expected.push_back(flat[k].surface);
            }
            for (auto k : o.right) {
                expected.push_back(flat[k].surface);
            }
            const auto got = extract_context_window(corpus, su, width, scope);
            ASSERT_EQ(got, expected);
            EXPECT_LE(got.size(), 2 * width);
        }
    }
}

TEST(HeadDirectionality, Examples)
{
    EXPECT_EQ(extract_head_directionality(sample(), word_at(0, 9)), HeadDirection::HeadFinal);
    EXPECT_EQ(extract_head_directionality(sample(), word_at(0, 10)), HeadDirection::HeadFinal);
    EXPECT_EQ(extract_head_directionality(sample(), word_at(0, 7)), HeadDirection::NotInPhrase);
    // "was started": VP head is the first verb.
    EXPECT_EQ(extract_head_directionality(sample(), word_at(3, 4)), HeadDirection::HeadInitial);
    EXPECT_EQ(extract_head_directionality(sample(), word_at(3, 4), PhraseFilter::NP), HeadDirection::NotInPhrase);
}

TEST(HeadDirectionality, ChunkerOnFirstSentence)
{
    std::vector<std::string> tags;
    for (const auto& t : sample().documents()[0].paragraphs[0].sentences[0].tokens) {
        tags.push_back(t.pos);
    }
    const auto chunks = chunk_tags(tags);
    ASSERT_EQ(chunks.size(), 2u);
    EXPECT_EQ(chunks[0], (Chunk{ChunkType::NP, 0, 7, 6}));
    EXPECT_EQ(chunks[1], (Chunk{ChunkType::NP, 8, 11, 10}));
}

TEST(SemanticSimilarity, ToyVectors)
{
    const auto store = load_embeddings(data_path("toy.vec"));
    // physician (0.8, 0.3, 0.1), doctor (0.7, 0.4, 0.2)
    const double dot = 0.8 * 0.7 + 0.3 * 0.4 + 0.1 * 0.2;
    const double expected = dot / (std::sqrt(0.64 + 0.09 + 0.01) * std::sqrt(0.49 + 0.16 + 0.04));
    EXPECT_NEAR(extract_semantic_similarity("physician", "doctor", store), expected, 1e-12);
    EXPECT_NEAR(extract_semantic_similarity("study", "study", store), 1.0, 1e-9);
    EXPECT_EQ(extract_semantic_similarity("zebra", "study", store), 0.0);
}

TEST(TermFrequency, PatientCountMatchesScan)
{
    std::size_t oracle = 0;
    for (const auto& w : raw_surfaces()) {
        oracle += text::to_lower(w) == "patient" ? 1 : 0;
    }
    EXPECT_EQ(oracle, 5u);
    const auto tf = extract_term_frequency(sample(), AnalysisUnit::Document);
    ASSERT_EQ(tf.size(), 1u);
    EXPECT_EQ(tf[0].at("patient"), oracle);
    EXPECT_EQ(tf[0].count("."), 0u);
}

TEST(TermFrequency, TrivialDocuments)
{
    const auto tf = extract_term_frequency(parse_conll("d\t0\t0\tx\tNN\n"), AnalysisUnit::Document);
    EXPECT_EQ(tf[0], (std::map<std::string, std::size_t>{{"x", 1}}));
    EXPECT_TRUE(extract_term_frequency(AnnotatedCorpus{}, AnalysisUnit::Document).empty());
    EXPECT_THROW(extract_term_frequency(sample(), AnalysisUnit::Sentence), ValidationError);
}

TEST(InterArrival, Examples)
{
    EXPECT_EQ(inter_arrival_delays({"a", "b", "a", "c", "c", "a"}, "a"), (std::vector<std::int64_t>{1, 2}));
    EXPECT_TRUE(inter_arrival_delays({"a", "b"}, "a").empty());
}

TEST(InterArrival, LevetiracetamMatchesPositionScan)
{
    std::vector<std::size_t> pos;
    const auto raw = raw_surfaces();
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == "levetiracetam") {
            pos.push_back(i);
        }
    }
    ASSERT_EQ(pos.size(), 2u);
    const auto oracle = static_cast<std::int64_t>(pos[1] - pos[0] - 1);
    EXPECT_EQ(oracle, 38);
    EXPECT_EQ(extract_inter_arrival_delays(sample(), "levetiracetam", AnalysisUnit::Document)[0],
              (std::vector<std::int64_t>{oracle}));
}

TEST(InterArrival, LengthAndSumBound)
{
    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto corpus = nlpfspl::testing::random_corpus(rng);
        const auto tf = extract_term_frequency(corpus, AnalysisUnit::Corpus)[0];
        const auto total = static_cast<std::int64_t>(corpus.token_count());
        for (const auto& [term, k] : tf) {
            const auto d = extract_inter_arrival_delays(corpus, term, AnalysisUnit::Corpus)[0];
            EXPECT_EQ(d.size(), k - 1);
            std::int64_t sum = 0;
            for (auto x : d) {
                EXPECT_GE(x, 0);
                sum += x;
            }
            EXPECT_LE(sum + static_cast<std::int64_t>(k), total);
        }
    }
}

TEST(FeatureMatrix, EmptyCorpusKeepsColumns)
{
    const auto m = build_feature_matrix(AnnotatedCorpus{}, load_spec(data_path("sample_spec.fspl")));
    EXPECT_EQ(m.row_count(), 0u);
    EXPECT_EQ(m.columns, (std::vector<std::string>{"POS_Sequence", "POS_Regex", "Suffix_Prefix", "Capitalization",
                                                   "Special_Chars", "Context_Window"}));
}

TEST(FeatureMatrix, TwoTokensOneFeature)
{
    const auto c = parse_conll("d\t0\t0\tDog\tNN\nd\t0\t0\truns\tVBZ\n");
    const auto m = build_feature_matrix(c, parse("POS_Sequence := YES;"));
    ASSERT_EQ(m.row_count(), 2u);
    ASSERT_EQ(m.column_count(), 1u);
    EXPECT_EQ(cell_to_text(m.at(1, "POS_Sequence")), "VBZ");
    EXPECT_EQ(m.keys[1], (RowKey{"runs", "d", 0, 0, 1, 2}));
}

TEST(FeatureMatrix, StatisticalRowsPerDocument)
{
    const auto m = build_feature_matrix(sample(), parse("Analysis_Unit := Document; Term_Frequency := YES; "
                                                        "InterArrival_Delay := levetiracetam;"));
    ASSERT_EQ(m.row_count(), 1u);
    const auto& tf = std::get<StringList>(m.at(0, "Term_Frequency"));
    EXPECT_NE(std::find(tf.begin(), tf.end(), "patient:5"), tf.end());
    EXPECT_TRUE(std::is_sorted(tf.begin(), tf.end()));
    EXPECT_EQ(std::get<IntList>(m.at(0, "InterArrival_Delay")), (IntList{38}));
    EXPECT_FALSE(m.keys[0].para_idx.has_value());
}

TEST(FeatureMatrix, RowCountIsIndependentOfFeatureValues)
{
    std::mt19937_64 rng(31);
    const auto store = load_embeddings(data_path("toy.vec"));
    for (int i = 0; i < 100; ++i) {
        const auto corpus = nlpfspl::testing::random_corpus(rng);
        auto spec = nlpfspl::testing::random_spec(rng);
        spec.meta.analysis_unit = AnalysisUnit::Sentence;
        std::erase_if(spec.features, [](const FeatureDecl& f) { return !allowed_at(f.name(), AnalysisUnit::Sentence); });
        if (spec.features.empty()) {
            continue;
        }
        ExtractionOptions opts;
        opts.embeddings = &store;
        const auto m = build_feature_matrix(corpus, spec, opts);
        EXPECT_EQ(m.row_count(), resolve_syntactic_units(corpus, spec).size());
        for (const auto& row : m.rows) {
            EXPECT_EQ(row.size(), m.column_count());
        }
    }
}

TEST(FeatureMatrix, DeterministicAcrossRunsAndThreads)
{
    const auto spec = load_spec(data_path("sample_spec.fspl"));
    const auto a = build_feature_matrix(sample(), spec);
    ExtractionOptions opts;
    opts.threads = 4;
    const auto b = build_feature_matrix(sample(), spec, opts);
    EXPECT_EQ(to_csv(a), to_csv(b));
    EXPECT_EQ(to_jsonl(a), to_jsonl(build_feature_matrix(sample(), spec)));
}

TEST(FeatureMatrix, SemanticSimilarityNeedsEmbeddings)
{
    const auto spec = parse("Semantic_Similarity := doctor;");
    EXPECT_THROW(build_feature_matrix(sample(), spec), Error);
    const auto store = load_embeddings(data_path("toy.vec"));
    ExtractionOptions opts;
    opts.embeddings = &store;
    const auto m = build_feature_matrix(sample(), spec, opts);
    for (std::size_t r = 0; r < m.row_count(); ++r) {
        if (m.keys[r].su == "physician") {
            EXPECT_NEAR(std::get<double>(m.at(r, "Semantic_Similarity")),
                        extract_semantic_similarity("physician", "doctor", store), 1e-15);
        }
    }
}

TEST(Export, CsvAndJsonl)
{
    ExtractionOptions opts;
    opts.row_filter = [](const AnnotatedCorpus&, const SyntacticUnitInstance& su) { return su.first.sent == 0; };
    const auto m = build_feature_matrix(sample(), load_spec(data_path("sample_spec.fspl")), opts);
    ASSERT_EQ(m.row_count(), 12u);
    const auto lines = text::split(text::trim(to_csv(m)), '\n');
    ASSERT_EQ(lines.size(), 13u);
    EXPECT_EQ(lines[0], "su,doc_id,para_idx,sent_idx,start,end,POS_Sequence,POS_Regex,Suffix_Prefix,Capitalization,"
                        "Special_Chars,Context_Window");
    EXPECT_EQ(lines[1], "This,doc1,0,0,0,1,DT,FALSE,his,TRUE,FALSE|FALSE,XYZ|non|-");
    const auto first = nlohmann::json::parse(text::split(to_jsonl(m), '\n')[2]);
    EXPECT_EQ(first["su"], "non");
    EXPECT_EQ(first["Special_Chars"], nlohmann::json::parse("[false,false]"));
    EXPECT_EQ(first["Context_Window"], nlohmann::json::parse(R"(["This","XYZ","-","interventional","study"])"));
}
