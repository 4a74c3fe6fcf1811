#include <gtest/gtest.h>

#include <map>
#include <set>

#include "speechread/lexicon.hpp"
#include "speechread/phoneme.hpp"
#include "support.hpp"

using namespace speechread;
using testing_support::reference_lexicon;

namespace {

Phoneme ph(std::string_view s) { return Phoneme::parse(s); }

PhonemeSequence seq(std::initializer_list<std::string_view> symbols)
{
    PhonemeSequence out;
    for (auto s : symbols)
        out.push_back(ph(s));
    return out;
}

std::vector<Viseme> vis(std::initializer_list<std::string_view> names)
{
    std::vector<Viseme> out;
    for (auto n : names)
        out.push_back(parse_viseme(n).value());
    return out;
}

void expect_error(ErrorCode code, auto&& fn)
{
    try {
        fn();
        ADD_FAILURE() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

} // namespace

TEST(VisemeOf, SpotAnchors)
{
    EXPECT_EQ(viseme_of(ph("P")), Viseme::p);
    EXPECT_EQ(viseme_of(ph("SIL")), Viseme::sp);
    EXPECT_EQ(viseme_of(ph("ER")), Viseme::er);
    EXPECT_EQ(viseme_of(ph("V")), Viseme::f);
    EXPECT_EQ(viseme_of("SP"), Viseme::sp);
}

TEST(VisemeOf, UnknownSymbolThrows)
{
    expect_error(ErrorCode::unknown_symbol, [] { viseme_of("XQ"); });
}

TEST(VisemeOf, EveryPhonemeHasExactlyOneClassAndFourteenClassesExist)
{
    std::map<Viseme, int> sizes;
    for (auto p : all_phonemes())
        ++sizes[p.viseme()];
    EXPECT_EQ(sizes.size(), 14u);
    std::size_t total = 0;
    for (auto v : all_visemes) {
        EXPECT_GT(sizes[v], 0) << to_string(v);
        EXPECT_EQ(viseme_members(v).size(), static_cast<std::size_t>(sizes[v]));
        total += viseme_members(v).size();
    }
    EXPECT_EQ(total, phoneme_count);
}

TEST(VisemeOf, SilenceAndShortPauseShareOneTableRow)
{
    std::set<int> rows;
    for (auto p : all_phonemes())
        rows.insert(p.info().table_row);
    EXPECT_EQ(rows.size(), phoneme_table_rows);
    EXPECT_EQ(ph("SIL").info().table_row, ph("SP").info().table_row);
}

TEST(VisemeOf, ConsonantVowelSplit)
{
    EXPECT_EQ(consonants().size(), 30u);
    std::size_t vowels = 0;
    for (auto p : all_phonemes())
        vowels += p.category() == PhonemeCategory::vowel ? 1 : 0;
    EXPECT_EQ(vowels, 17u);
}

TEST(ParseArpabet, StressDigitsAreStripped)
{
    EXPECT_EQ(parse_arpabet_token("AE1"), ph("AE"));
    EXPECT_EQ(parse_arpabet_token("ah0"), ph("AH"));
    EXPECT_EQ(parse_arpabet_token("T"), ph("T"));
    EXPECT_EQ(parse_arpabet_token("XQ"), std::nullopt);
}

TEST(ParseLexicon, SingleEntry)
{
    auto lex = parse_lexicon("BAT  B AE1 T\n");
    ASSERT_EQ(lex.size(), 1u);
    EXPECT_EQ(lex.pronounce("BAT"), seq({"B", "AE", "T"}));
}

TEST(ParseLexicon, TwoEntries)
{
    auto lex = parse_lexicon("FAN  F AE N\nVAN  V AE N");
    EXPECT_EQ(lex.size(), 2u);
    EXPECT_TRUE(lex.contains("fan"));
    EXPECT_TRUE(lex.contains("VAN"));
}

TEST(ParseLexicon, UnknownPhonemeIsParseErrorWithLine)
{
    try {
        parse_lexicon(";;; header\nFAN  F AE N\nBAT  B XQ T\n");
        FAIL() << "expected parse error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse_error);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(ParseLexicon, AlternatePronunciationsFoldUnderOneWord)
{
    auto lex = parse_lexicon("READ  R IY1 D\nREAD(2)  R EH1 D\n");
    EXPECT_EQ(lex.size(), 1u);
    ASSERT_NE(lex.find("read"), nullptr);
    EXPECT_EQ(lex.find("read")->size(), 2u);
    EXPECT_EQ(lex.pronounce("read"), seq({"R", "IY", "D"}));
}

TEST(ParseLexicon, CommentsAndBlankLinesIgnored)
{
    auto lex = parse_lexicon(";;; comment\n\n   \nPAT  P AE1 T\r\n");
    EXPECT_EQ(lex.size(), 1u);
}

TEST(ParseLexicon, LineWithoutPhonemesFails)
{
    expect_error(ErrorCode::parse_error, [] { parse_lexicon("BAT\n"); });
}

TEST(Pronounce, ReferenceLexiconLookup)
{
    const auto& lex = reference_lexicon();
    EXPECT_EQ(lex.pronounce("Bat"), seq({"B", "AE", "T"}));
    EXPECT_EQ(lex.pronounce("bat"), lex.pronounce("BAT"));
    expect_error(ErrorCode::unknown_word, [&] { lex.pronounce("zzqx"); });
}

TEST(InitialConsonant, Examples)
{
    EXPECT_EQ(initial_consonant(seq({"B", "AE", "T"})), ph("B"));
    EXPECT_EQ(initial_consonant(seq({"AE", "T"})), std::nullopt);
    EXPECT_EQ(initial_consonant(seq({"SIL"})), std::nullopt);
    expect_error(ErrorCode::empty_sequence, [] { initial_consonant(PhonemeSequence{}); });
}

TEST(VisemeSequence, Examples)
{
    EXPECT_EQ(viseme_sequence(seq({"F", "AE", "N"})), vis({"/f/", "/ey/", "/k/"}));
    EXPECT_EQ(viseme_sequence(seq({"V", "AE", "N"})), vis({"/f/", "/ey/", "/k/"}));
    EXPECT_TRUE(viseme_sequence(PhonemeSequence{}).empty());
}

TEST(VisemeSequence, LengthIsPreserved)
{
    std::mt19937 rng(11);
    auto all = all_phonemes();
    for (int round = 0; round < 200; ++round) {
        PhonemeSequence s;
        for (auto n = rng() % 12; n > 0; --n)
            s.push_back(all[rng() % all.size()]);
        auto v = viseme_sequence(s);
        ASSERT_EQ(v.size(), s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            EXPECT_EQ(v[i], viseme_of(s[i]));
    }
}

TEST(Homophenes, Examples)
{
    const auto& lex = reference_lexicon();
    EXPECT_TRUE(are_homophenous("fan", "van", lex));
    EXPECT_TRUE(are_homophenous("bat", "pat", lex));
    EXPECT_FALSE(are_homophenous("bat", "sun", lex));
    expect_error(ErrorCode::unknown_word, [&] { are_homophenous("bat", "zzqx", lex); });
}

TEST(Homophenes, RelationIsReflexiveAndSymmetric)
{
    const auto& lex = reference_lexicon();
    const std::vector<std::string> words = {"pat", "mat", "bat", "fan", "van", "sun", "done", "tonne", "kill", "nil"};
    for (const auto& a : words) {
        EXPECT_TRUE(are_homophenous(a, a, lex));
        for (const auto& b : words)
            EXPECT_EQ(are_homophenous(a, b, lex), are_homophenous(b, a, lex)) << a << " " << b;
    }
}

TEST(Lipshape, FromNameDerivesMembers)
{
    auto ls = Lipshape::from_name("Ch/Sh/J");
    EXPECT_EQ(ls.member_symbols(), "CH JH SH");
    EXPECT_EQ(Lipshape::from_name("P/B/M").members().size(), 3u);
    expect_error(ErrorCode::unknown_symbol, [] { Lipshape::from_name("P/Q"); });
}

TEST(Lipshape, RejectsVowelsAndEmptySets)
{
    expect_error(ErrorCode::not_a_consonant, [] { Lipshape("bad", {ph("P"), ph("AE")}); });
    expect_error(ErrorCode::invalid_config, [] { Lipshape("none", {}); });
}

TEST(ValidateWord, Examples)
{
    const auto& lex = reference_lexicon();
    auto pbm = Lipshape::from_name("P/B/M");
    EXPECT_TRUE(validate_word_for_lipshape("Puddle", pbm, lex).ok());

    auto lower = validate_word_for_lipshape("puddle", pbm, lex);
    ASSERT_EQ(lower.violations.size(), 1u);
    EXPECT_EQ(lower.violations[0].rule, WordRule::not_capitalized);

    auto sat = validate_word_for_lipshape("Sat", pbm, lex);
    ASSERT_EQ(sat.violations.size(), 1u);
    EXPECT_EQ(sat.violations[0].rule, WordRule::wrong_initial_phoneme);
    EXPECT_NE(sat.violations[0].message.find("S"), std::string::npos);
}

TEST(ValidateWord, AllViolationsReportedAtOnce)
{
    auto pbm = Lipshape::from_name("P/B/M");
    auto unknown = validate_word_for_lipshape("zzqx", pbm, reference_lexicon());
    ASSERT_EQ(unknown.violations.size(), 2u);
    EXPECT_EQ(unknown.violations[0].rule, WordRule::not_a_word);
    EXPECT_EQ(unknown.violations[1].rule, WordRule::not_capitalized);

    auto both = validate_word_for_lipshape("sat", pbm, reference_lexicon());
    EXPECT_EQ(both.violations.size(), 2u);
    EXPECT_EQ(both.messages().size(), 2u);
}

TEST(ValidateWord, VowelInitialWordFailsInitialRule)
{
    auto res = validate_word_for_lipshape("At", Lipshape::from_name("P/B/M"), reference_lexicon());
    ASSERT_EQ(res.violations.size(), 1u);
    EXPECT_EQ(res.violations[0].rule, WordRule::wrong_initial_phoneme);
}
