#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/phoneme.hpp"
#include "speechread/text.hpp"

namespace speechread {

struct PronunciationEntry {
    std::string word;
    PhonemeSequence phonemes;
};

/// Case-insensitive word to pronunciation map. The first pronunciation listed
/// for a word is its default; later ones are kept as alternates.
class Lexicon {
public:
    static std::string normalize(std::string_view word) { return text::to_upper(text::trim(word)); }

    void add(PronunciationEntry entry)
    {
        auto key = normalize(entry.word);
        entries_[key].push_back(std::move(entry));
    }

    bool contains(std::string_view word) const { return entries_.count(normalize(word)) != 0; }

    const std::vector<PronunciationEntry>* find(std::string_view word) const
    {
        auto it = entries_.find(normalize(word));
        return it == entries_.end() ? nullptr : &it->second;
    }

    const PhonemeSequence& pronounce(std::string_view word) const
    {
        if (auto* prons = find(word))
            return prons->front().phonemes;
        throw Error(ErrorCode::unknown_word, "word '" + std::string(text::trim(word)) + "' is not in the lexicon");
    }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::unordered_map<std::string, std::vector<PronunciationEntry>> entries_;
};

/// Parses lexicon text: `WORD` then whitespace then ARPABET tokens, each with
/// an optional stress digit. Lines starting with `;;;` are comments; blank
/// lines are skipped. A CMU-style alternate marker such as `WORD(2)` is folded
/// into `WORD`.
inline Lexicon parse_lexicon(std::string_view content)
{
    Lexicon lexicon;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        auto end = content.find('\n', pos);
        if (end == std::string_view::npos)
            end = content.size();
        auto line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.starts_with(";;;"))
            continue;
        auto trimmed = text::trim(line);
        if (trimmed.empty()) {
            if (end == content.size())
                break;
            continue;
        }
        auto fields = text::split_ws(trimmed);
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": " + why);
        };
        if (fields.size() < 2)
            fail("expected a word followed by phonemes");
        auto word = fields[0];
        if (word.size() > 3 && word.back() == ')') {
            auto open = word.rfind('(');
            if (open != std::string::npos && open > 0
                && std::all_of(word.begin() + static_cast<std::ptrdiff_t>(open) + 1, word.end() - 1,
                               [](unsigned char c) { return std::isdigit(c) != 0; }))
                word.erase(open);
        }
        PronunciationEntry entry{word, {}};
        for (std::size_t i = 1; i < fields.size(); ++i) {
            auto p = parse_arpabet_token(fields[i]);
            if (!p)
                fail("unknown phoneme token '" + fields[i] + "'");
            entry.phonemes.push_back(*p);
        }
        lexicon.add(std::move(entry));
        if (end == content.size())
            break;
    }
    return lexicon;
}

inline Lexicon load_lexicon(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io_failure, "cannot read lexicon file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_lexicon(buf.str());
}

inline const PhonemeSequence& pronounce(std::string_view word, const Lexicon& lexicon)
{
    return lexicon.pronounce(word);
}

/// A user-facing group of visually similar initial consonants, e.g. "P/B/M".
/// Lipshapes may overlap each other.
class Lipshape {
public:
    Lipshape(std::string name, std::set<Phoneme> members) : name_(std::move(name)), members_(std::move(members))
    {
        if (members_.empty())
            throw Error(ErrorCode::invalid_config, "lipshape '" + name_ + "' has no phonemes");
        for (auto p : members_)
            if (!p.is_consonant())
                throw Error(ErrorCode::not_a_consonant,
                            "lipshape member " + std::string(p.symbol()) + " is not a consonant");
    }

    /// Derives members from a slash-separated display name ("Ch/Sh/J").
    /// A bare "J" stands for JH.
    static Lipshape from_name(std::string_view name)
    {
        std::set<Phoneme> members;
        for (const auto& part : text::split(text::trim(name), '/')) {
            auto token = text::to_upper(text::trim(part));
            if (token == "J")
                token = "JH";
            auto p = Phoneme::find(token);
            if (!p)
                throw Error(ErrorCode::unknown_symbol, "lipshape '" + std::string(name) + "' names unknown phoneme '"
                                                           + std::string(text::trim(part)) + "'");
            members.insert(*p);
        }
        return Lipshape(std::string(text::trim(name)), std::move(members));
    }

    const std::string& name() const noexcept { return name_; }
    const std::set<Phoneme>& members() const noexcept { return members_; }
    bool contains(Phoneme p) const { return members_.count(p) != 0; }

    std::string member_symbols() const
    {
        std::string out;
        for (auto p : members_) {
            if (!out.empty())
                out += ' ';
            out += p.symbol();
        }
        return out;
    }

private:
    std::string name_;
    std::set<Phoneme> members_;
};

enum class WordRule { not_a_word, not_capitalized, wrong_initial_phoneme };

inline constexpr std::string_view to_string(WordRule rule) noexcept
{
    switch (rule) {
    case WordRule::not_a_word: return "not-a-word";
    case WordRule::not_capitalized: return "not-capitalized";
    case WordRule::wrong_initial_phoneme: return "wrong-initial-phoneme";
    }
    return "unknown";
}

struct Violation {
    WordRule rule;
    std::string message;
};

struct WordValidation {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }

    std::vector<std::string> messages() const
    {
        std::vector<std::string> out;
        for (const auto& v : violations)
            out.push_back(std::string(to_string(v.rule)) + ": " + v.message);
        return out;
    }
};

/// A word may join a lipshape when it is in the lexicon, starts with a
/// capital letter, and its default pronunciation opens with one of the
/// lipshape's consonants. The initial-phoneme rule is only checked for words
/// the lexicon knows.
inline WordValidation validate_word_for_lipshape(std::string_view word, const Lipshape& lipshape,
                                                 const Lexicon& lexicon)
{
    WordValidation result;
    auto stored = text::trim(word);
    const auto* prons = lexicon.find(stored);
    if (!prons)
        result.violations.push_back({WordRule::not_a_word, "'" + std::string(stored) + "' is not a known word"});
    if (stored.empty() || !std::isupper(static_cast<unsigned char>(stored.front())))
        result.violations.push_back({WordRule::not_capitalized, "word must start with a capital letter"});
    if (prons) {
        auto initial = initial_consonant(prons->front().phonemes);
        if (!initial || !lipshape.contains(*initial)) {
            std::string got = initial ? std::string(initial->symbol())
                                      : std::string(prons->front().phonemes.front().symbol()) + " (not a consonant)";
            result.violations.push_back({WordRule::wrong_initial_phoneme,
                                         "initial phoneme " + got + " is not in " + lipshape.name() + " {"
                                             + lipshape.member_symbols() + "}"});
        }
    }
    return result;
}

/// Two words are homophenes when their default pronunciations produce the
/// same viseme sequence.
inline bool are_homophenous(std::string_view a, std::string_view b, const Lexicon& lexicon)
{
    const auto& pa = lexicon.pronounce(a);
    const auto& pb = lexicon.pronounce(b);
    return viseme_sequence(pa) == viseme_sequence(pb);
}

} // namespace speechread
