#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/lexicon.hpp"
#include "speechread/text.hpp"

namespace speechread::metrics {

// --- detection scoring ---------------------------------------------------

struct ResponseTrial {
    bool is_target = false;
    bool responded = false;
};

using ResponseLog = std::vector<ResponseTrial>;

struct ScoreReport {
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
};

/// Precision, recall and F1 over the trials after the first `exclude_first`.
/// A ratio with a zero denominator is reported as 0.
inline ScoreReport f1_score(std::span<const ResponseTrial> log, std::size_t exclude_first)
{
    if (exclude_first >= log.size())
        throw Error(ErrorCode::empty_log, "no trials remain after excluding the first " + std::to_string(exclude_first));
    ScoreReport r;
    for (const auto& t : log.subspan(exclude_first)) {
        if (t.is_target && t.responded)
            ++r.tp;
        else if (!t.is_target && t.responded)
            ++r.fp;
        else if (t.is_target)
            ++r.fn;
        else
            ++r.tn;
    }
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    r.precision = ratio(r.tp, r.tp + r.fp);
    r.recall = ratio(r.tp, r.tp + r.fn);
    r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

namespace detail {

inline bool parse_flag(std::string_view field, bool& out)
{
    auto v = text::to_lower(text::trim(field));
    if (v == "1" || v == "true" || v == "yes" || v == "y") {
        out = true;
        return true;
    }
    if (v == "0" || v == "false" || v == "no" || v == "n") {
        out = false;
        return true;
    }
    return false;
}

} // namespace detail

/// Response log CSV: `is_target,responded` per line (0/1 or true/false).
/// `#` lines are comments and a non-numeric first line is taken as a header.
inline ResponseLog parse_response_log(std::string_view content)
{
    ResponseLog log;
    auto all = text::lines(content);
    bool first = true;
    for (std::size_t n = 0; n < all.size(); ++n) {
        auto line = text::trim(all[n]);
        if (line.empty() || line.starts_with('#'))
            continue;
        auto fields = text::split(line, ',');
        ResponseTrial t;
        bool ok = fields.size() == 2 && detail::parse_flag(fields[0], t.is_target)
               && detail::parse_flag(fields[1], t.responded);
        if (!ok) {
            if (first) {
                first = false;
                continue;
            }
            throw Error(ErrorCode::parse_error, "response log line " + std::to_string(n + 1)
                                                    + ": expected 'is_target,responded'");
        }
        first = false;
        log.push_back(t);
    }
    return log;
}

// --- speechreading proficiency test --------------------------------------

inline constexpr std::size_t spt_words = 40;
inline constexpr std::size_t spt_quartile_size = 10;

/// Forty test words ordered by spoken frequency, ten per quartile.
struct SptKey {
    std::array<std::string, spt_words> words;

    static std::size_t quartile(std::size_t video_number) noexcept { return (video_number - 1) / spt_quartile_size; }
};

/// Guesses keyed by 1-based video number.
using SptResponses = std::map<std::size_t, std::string>;

inline SptKey make_spt_key(std::span<const std::string> words)
{
    if (words.size() != spt_words)
        throw Error(ErrorCode::parse_error, "SPT key needs exactly 40 words, got " + std::to_string(words.size()));
    SptKey key;
    std::copy(words.begin(), words.end(), key.words.begin());
    return key;
}

inline std::size_t spt_correct(const SptResponses& responses, const SptKey& key)
{
    std::size_t correct = 0;
    for (const auto& [number, guess] : responses)
        if (number >= 1 && number <= spt_words && text::iequals(text::trim(guess), text::trim(key.words[number - 1])))
            ++correct;
    return correct;
}

/// Percentage of the 40 words identified; one point per word.
inline double spt_score(const SptResponses& responses, const SptKey& key)
{
    return 100.0 * static_cast<double>(spt_correct(responses, key)) / static_cast<double>(spt_words);
}

inline SptKey parse_spt_key(std::string_view content)
{
    std::vector<std::string> words;
    for (const auto& line : text::lines(content)) {
        auto w = text::trim(line);
        if (!w.empty() && !w.starts_with('#'))
            words.emplace_back(w);
    }
    return make_spt_key(words);
}

/// Response sheet: `video_number,word` per line.
inline SptResponses parse_spt_responses(std::string_view content)
{
    SptResponses out;
    auto all = text::lines(content);
    for (std::size_t n = 0; n < all.size(); ++n) {
        auto line = text::trim(all[n]);
        if (line.empty() || line.starts_with('#'))
            continue;
        auto comma = line.find(',');
        std::size_t number = 0;
        bool ok = comma != std::string_view::npos;
        if (ok) {
            auto idx = text::trim(line.substr(0, comma));
            ok = !idx.empty() && std::all_of(idx.begin(), idx.end(), [](unsigned char c) { return std::isdigit(c); });
            if (ok)
                number = std::stoul(std::string(idx));
        }
        if (!ok) {
            if (n == 0)
                continue; // header
            throw Error(ErrorCode::parse_error, "SPT response line " + std::to_string(n + 1)
                                                    + ": expected 'video_number,word'");
        }
        out[number] = std::string(text::trim(line.substr(comma + 1)));
    }
    return out;
}

// --- edit distance ---------------------------------------------------------

/// Unit-cost insert/delete/substitute distance between two sequences.
template <class Seq>
std::size_t levenshtein_seq(const Seq& a, const Seq& b)
{
    const std::size_t n = a.size(), m = b.size();
    std::vector<std::size_t> row(m + 1);
    std::iota(row.begin(), row.end(), std::size_t{0});
    for (std::size_t i = 1; i <= n; ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t up = row[j];
            std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[m];
}

/// Character distance between UTF-8 strings, counted in code points.
inline std::size_t levenshtein(std::string_view a, std::string_view b)
{
    return levenshtein_seq(text::utf8_decode(a), text::utf8_decode(b));
}

// --- transcription errors -------------------------------------------------

struct ErrorReport {
    std::size_t word_error = 0;
    std::size_t char_error = 0;
    double normalized_char_error = 0;
    // nullopt when either first word is missing from the lexicon
    std::optional<bool> initial_phoneme_correct;
    std::string initial_phoneme_note;
};

namespace detail {

inline std::string strip_punct(std::string_view w)
{
    auto keep = [](unsigned char c) { return std::isalnum(c) || c == '\'' || c >= 0x80; };
    while (!w.empty() && !keep(static_cast<unsigned char>(w.front())))
        w.remove_prefix(1);
    while (!w.empty() && !keep(static_cast<unsigned char>(w.back())))
        w.remove_suffix(1);
    return std::string(w);
}

} // namespace detail

/// Lowercases both sentences, then measures word distance (whitespace tokens),
/// character distance, character distance over reference length, and whether
/// the first words share their first phoneme.
inline ErrorReport transcription_errors(std::string_view reference, std::string_view hypothesis,
                                        const Lexicon& lexicon)
{
    auto ref = text::to_lower(reference);
    auto hyp = text::to_lower(hypothesis);
    auto ref_words = text::split_ws(ref);
    auto hyp_words = text::split_ws(hyp);

    ErrorReport r;
    r.word_error = levenshtein_seq(ref_words, hyp_words);
    auto ref_chars = text::utf8_decode(ref);
    r.char_error = levenshtein_seq(ref_chars, text::utf8_decode(hyp));
    r.normalized_char_error =
        static_cast<double>(r.char_error) / static_cast<double>(std::max<std::size_t>(ref_chars.size(), 1));

    if (ref_words.empty() || hyp_words.empty()) {
        r.initial_phoneme_correct = ref_words.empty() && hyp_words.empty();
        if (ref_words.empty() != hyp_words.empty())
            r.initial_phoneme_note = "one sentence is empty";
        return r;
    }
    auto first_ref = detail::strip_punct(ref_words.front());
    auto first_hyp = detail::strip_punct(hyp_words.front());
    const auto* pr = lexicon.find(first_ref);
    const auto* ph = lexicon.find(first_hyp);
    if (!pr || !ph) {
        r.initial_phoneme_note = std::string(to_string(ErrorCode::unknown_word)) + ": '" + (pr ? first_hyp : first_ref) + "'";
        return r;
    }
    r.initial_phoneme_correct = pr->front().phonemes.front() == ph->front().phonemes.front();
    return r;
}

struct SentencePair {
    std::string reference;
    std::string hypothesis;
};

struct CorpusSummary {
    std::size_t pairs = 0;
    double mean_word_error = 0;
    double mean_normalized_char_error = 0;
    double initial_phoneme_accuracy = 0;
    std::size_t initial_phoneme_matches = 0;
};

inline CorpusSummary corpus_errors(std::span<const SentencePair> pairs, const Lexicon& lexicon)
{
    if (pairs.empty())
        throw Error(ErrorCode::empty_corpus, "corpus has no sentence pairs");
    CorpusSummary s;
    s.pairs = pairs.size();
    double word = 0, chars = 0;
    for (const auto& p : pairs) {
        auto r = transcription_errors(p.reference, p.hypothesis, lexicon);
        word += static_cast<double>(r.word_error);
        chars += r.normalized_char_error;
        if (r.initial_phoneme_correct.value_or(false))
            ++s.initial_phoneme_matches;
    }
    auto n = static_cast<double>(pairs.size());
    s.mean_word_error = word / n;
    s.mean_normalized_char_error = chars / n;
    s.initial_phoneme_accuracy = static_cast<double>(s.initial_phoneme_matches) / n;
    return s;
}

/// Corpus file: alternating `REF:` and `HYP:` lines.
inline std::vector<SentencePair> parse_corpus(std::string_view content)
{
    std::vector<SentencePair> out;
    std::optional<std::string> pending;
    auto all = text::lines(content);
    for (std::size_t n = 0; n < all.size(); ++n) {
        auto line = text::trim(all[n]);
        if (line.empty() || line.starts_with('#'))
            continue;
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::parse_error, "corpus line " + std::to_string(n + 1) + ": " + why);
        };
        if (line.starts_with("REF:")) {
            if (pending)
                fail("REF: without a following HYP:");
            pending = std::string(text::trim(line.substr(4)));
        } else if (line.starts_with("HYP:")) {
            if (!pending)
                fail("HYP: without a preceding REF:");
            out.push_back({*pending, std::string(text::trim(line.substr(4)))});
            pending.reset();
        } else {
            fail("expected REF: or HYP:");
        }
    }
    if (pending)
        throw Error(ErrorCode::parse_error, "corpus ends with an unmatched REF:");
    return out;
}

} // namespace speechread::metrics
