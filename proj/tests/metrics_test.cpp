#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "speechread/metrics.hpp"
#include "support.hpp"

using namespace speechread;
using namespace speechread::metrics;
using testing_support::reference_lexicon;

namespace {

ResponseLog make_log(std::initializer_list<std::pair<int, int>> rows)
{
    ResponseLog log;
    for (auto [t, r] : rows)
        log.push_back({t != 0, r != 0});
    return log;
}

SptKey key_of_numbers()
{
    std::vector<std::string> words;
    for (int i = 1; i <= 40; ++i)
        words.push_back("word" + std::to_string(i));
    return make_spt_key(words);
}

} // namespace

TEST(F1, PerfectResponderAfterWarmup)
{
    ResponseLog log;
    for (int i = 0; i < 36; ++i)
        log.push_back({i % 3 == 0, i % 3 == 0});
    auto r = f1_score(log, 9);
    EXPECT_EQ(r.tp, 9u);
    EXPECT_EQ(r.fp, 0u);
    EXPECT_EQ(r.fn, 0u);
    EXPECT_EQ(r.tn, 18u);
    EXPECT_DOUBLE_EQ(r.f1, 1.0);
}

TEST(F1, HandCountedMixedCase)
{
    auto r = f1_score(make_log({{1, 1}, {1, 1}, {0, 1}, {1, 0}, {0, 0}}), 0);
    EXPECT_NEAR(r.precision, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(r.f1, 2.0 / 3.0, 1e-12);
}

TEST(F1, NoResponsesGivesZero)
{
    auto r = f1_score(make_log({{1, 0}, {0, 0}, {1, 0}}), 0);
    EXPECT_EQ(r.recall, 0.0);
    EXPECT_EQ(r.precision, 0.0);
    EXPECT_EQ(r.f1, 0.0);
}

TEST(F1, NothingLeftAfterExclusionIsEmptyLog)
{
    try {
        f1_score(make_log({{1, 1}}), 9);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_log);
    }
}

TEST(F1, RandomLogsAgreeWithTrialByTrialCount)
{
    std::mt19937_64 rng(5);
    for (int round = 0; round < 300; ++round) {
        ResponseLog log(10 + rng() % 40);
        for (auto& t : log)
            t = {rng() % 3 == 0, rng() % 2 == 0};
        auto r = f1_score(log, 9);
        auto c = oracle::count_detections(log, 9);
        EXPECT_EQ(r.tp, c.tp);
        EXPECT_EQ(r.fp, c.fp);
        EXPECT_EQ(r.fn, c.fn);
        EXPECT_EQ(r.tn, c.tn);
        EXPECT_NEAR(r.f1, oracle::f1_from_counts(c), 1e-12);
    }
}

TEST(ResponseLogFile, HeaderCommentsAndFlags)
{
    auto log = parse_response_log("is_target,responded\n# warm-up\n1,1\ntrue,false\n0,0\r\n");
    ASSERT_EQ(log.size(), 3u);
    EXPECT_TRUE(log[1].is_target);
    EXPECT_FALSE(log[1].responded);
    EXPECT_THROW(parse_response_log("1,1\n1,maybe\n"), Error);
}

TEST(Spt, ScoreExtremes)
{
    auto key = key_of_numbers();
    SptResponses all;
    for (std::size_t i = 1; i <= 40; ++i)
        all[i] = key.words[i - 1];
    EXPECT_DOUBLE_EQ(spt_score(all, key), 100.0);

    SptResponses six;
    for (std::size_t i = 1; i <= 6; ++i)
        six[i] = key.words[i - 1];
    six[7] = "wrong";
    EXPECT_DOUBLE_EQ(spt_score(six, key), 15.0);

    EXPECT_DOUBLE_EQ(spt_score({}, key), 0.0);
}

TEST(Spt, CaseInsensitiveAndOutOfRangeIgnored)
{
    auto key = key_of_numbers();
    SptResponses r{{1, "WORD1"}, {2, " word2 "}, {41, "word40"}, {0, "word1"}};
    EXPECT_EQ(spt_correct(r, key), 2u);
}

TEST(Spt, QuartilesAndFiles)
{
    EXPECT_EQ(SptKey::quartile(1), 0u);
    EXPECT_EQ(SptKey::quartile(10), 0u);
    EXPECT_EQ(SptKey::quartile(11), 1u);
    EXPECT_EQ(SptKey::quartile(40), 3u);

    std::string key_file;
    for (int i = 1; i <= 40; ++i)
        key_file += "word" + std::to_string(i) + "\n";
    auto key = parse_spt_key(key_file);
    auto r = parse_spt_responses("video_number,word\n1,word1\n2,nope\n");
    EXPECT_EQ(spt_correct(r, key), 1u);
    EXPECT_THROW(parse_spt_key("only\nthree\nwords\n"), Error);
    EXPECT_THROW(parse_spt_responses("1,a\nx,b\n"), Error);
}

TEST(Levenshtein, Examples)
{
    EXPECT_EQ(levenshtein("abc", "abc"), 0u);
    EXPECT_EQ(levenshtein("kitten", "sitting"), 3u);
    EXPECT_EQ(levenshtein("", "ab"), 2u);
    EXPECT_EQ(levenshtein("ab", ""), 2u);
}

TEST(Levenshtein, KittenAgreesWithEditScriptSearch)
{
    EXPECT_EQ(oracle::edit_script_distance("kitten", "sitting"), 3u);
}

TEST(Levenshtein, CountsCodePointsNotBytes)
{
    EXPECT_EQ(levenshtein("caf\xC3\xA9", "cafe"), 1u);
}

TEST(Levenshtein, ShortAbStringsAgreeWithEditScriptSearch)
{
    auto table = oracle::ab_distance_table(4);
    for (const auto& [pair, d] : table)
        ASSERT_EQ(levenshtein(pair.first, pair.second), d) << pair.first << " -> " << pair.second;
}

TEST(TranscriptionErrors, IdenticalSentences)
{
    auto r = transcription_errors("Bat the ball", "bat the ball", reference_lexicon());
    EXPECT_EQ(r.word_error, 0u);
    EXPECT_EQ(r.char_error, 0u);
    EXPECT_EQ(r.normalized_char_error, 0.0);
    EXPECT_EQ(r.initial_phoneme_correct, true);
}

TEST(TranscriptionErrors, SingleWordInsertion)
{
    auto r = transcription_errors("the cat sat", "the cat sat down", reference_lexicon());
    EXPECT_EQ(r.word_error, 1u);
    EXPECT_EQ(r.char_error, 5u);
    EXPECT_NEAR(r.normalized_char_error, 5.0 / 11.0, 1e-12);
}

TEST(TranscriptionErrors, InitialPhonemeMismatch)
{
    auto r = transcription_errors("Bat the ball", "Mat the ball", reference_lexicon());
    EXPECT_EQ(r.initial_phoneme_correct, false);
    EXPECT_EQ(r.word_error, 1u);
}

TEST(TranscriptionErrors, PunctuationOnFirstWordIgnoredForLookup)
{
    auto r = transcription_errors("\"Pat, come here", "bat come here", reference_lexicon());
    EXPECT_EQ(r.initial_phoneme_correct, false);
}

TEST(TranscriptionErrors, UnknownFirstWordLeavesInitialUndecided)
{
    auto r = transcription_errors("zzqx is here", "bat is here", reference_lexicon());
    EXPECT_FALSE(r.initial_phoneme_correct.has_value());
    EXPECT_NE(r.initial_phoneme_note.find("unknown-word"), std::string::npos);
}

TEST(TranscriptionErrors, EmptyReferenceNormalizesByOne)
{
    auto r = transcription_errors("", "ab", reference_lexicon());
    EXPECT_EQ(r.char_error, 2u);
    EXPECT_EQ(r.normalized_char_error, 2.0);
}

TEST(Corpus, Means)
{
    std::vector<SentencePair> same{{"the cat", "the cat"}, {"a dog", "a dog"}};
    auto s = corpus_errors(same, reference_lexicon());
    EXPECT_EQ(s.mean_word_error, 0.0);
    EXPECT_EQ(s.initial_phoneme_accuracy, 1.0);

    std::vector<SentencePair> two{{"the cat sat", "a dog sat"}, {"one two three four", "five six seven eight"}};
    EXPECT_DOUBLE_EQ(corpus_errors(two, reference_lexicon()).mean_word_error, 3.0);
    EXPECT_THROW(corpus_errors(std::vector<SentencePair>{}, reference_lexicon()), Error);
}

TEST(Corpus, ParseRefHypPairs)
{
    auto pairs = parse_corpus("# fixture\nREF: the cat\nHYP: a cat\n\nREF: dog\nHYP: dog\n");
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].hypothesis, "a cat");
    EXPECT_THROW(parse_corpus("REF: a\nREF: b\n"), Error);
    EXPECT_THROW(parse_corpus("HYP: a\n"), Error);
    EXPECT_THROW(parse_corpus("REF: a\n"), Error);
}
