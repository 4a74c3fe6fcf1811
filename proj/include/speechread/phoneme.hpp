#pragma once

#include <array>
#include <cctype>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speechread/error.hpp"

namespace speechread {

enum class PhonemeCategory { vowel, consonant, pause };

/// The fourteen visually distinct mouth-shape classes.
enum class Viseme : std::uint8_t { p, f, t, w, ch, ey, k, iy, ah, er, ao, uh, aa, sp };

inline constexpr std::size_t viseme_count = 14;

inline constexpr std::array<Viseme, viseme_count> all_visemes = {
    Viseme::p,  Viseme::f,  Viseme::t,  Viseme::w,  Viseme::ch, Viseme::ey, Viseme::k,
    Viseme::iy, Viseme::ah, Viseme::er, Viseme::ao, Viseme::uh, Viseme::aa, Viseme::sp,
};

inline constexpr std::string_view to_string(Viseme v) noexcept
{
    constexpr std::array<std::string_view, viseme_count> ids = {
        "/p/", "/f/", "/t/", "/w/", "/ch/", "/ey/", "/k/", "/iy/", "/ah/", "/er/", "/ao/", "/uh/", "/aa/", "/sp/",
    };
    return ids[static_cast<std::size_t>(v)];
}

inline std::optional<Viseme> parse_viseme(std::string_view id) noexcept
{
    for (auto v : all_visemes)
        if (to_string(v) == id)
            return v;
    return std::nullopt;
}

struct PhonemeInfo {
    std::string_view symbol;
    std::string_view ipa;
    PhonemeCategory category;
    Viseme viseme;
    // Row of the reference table. SIL and SP share the final row.
    std::uint8_t table_row;
};

namespace detail {

using C = PhonemeCategory;
using V = Viseme;

// Reference viseme table: 48 rows, 49 tokens (SIL and SP share a row).
inline constexpr std::array<PhonemeInfo, 49> phoneme_table = {{
    {"P", "p", C::consonant, V::p, 0},
    {"B", "b", C::consonant, V::p, 1},
    {"M", "m", C::consonant, V::p, 2},
    {"EM", "m̩", C::consonant, V::p, 3},
    {"F", "f", C::consonant, V::f, 4},
    {"V", "v", C::consonant, V::f, 5},
    {"T", "t", C::consonant, V::t, 6},
    {"D", "d", C::consonant, V::t, 7},
    {"S", "s", C::consonant, V::t, 8},
    {"Z", "z", C::consonant, V::t, 9},
    {"TH", "θ", C::consonant, V::t, 10},
    {"DH", "ð", C::consonant, V::t, 11},
    {"DX", "ɾ", C::consonant, V::t, 12},
    {"W", "w", C::consonant, V::w, 13},
    {"WH", "ʍ", C::consonant, V::w, 14},
    {"R", "r", C::consonant, V::w, 15},
    {"CH", "tʃ", C::consonant, V::ch, 16},
    {"JH", "dʒ", C::consonant, V::ch, 17},
    {"SH", "ʃ", C::consonant, V::ch, 18},
    {"ZH", "ʒ", C::consonant, V::ch, 19},
    {"EH", "ɛ", C::vowel, V::ey, 20},
    {"EY", "eɪ", C::vowel, V::ey, 21},
    {"AE", "æ", C::vowel, V::ey, 22},
    {"AW", "aʊ", C::vowel, V::ey, 23},
    {"K", "k", C::consonant, V::k, 24},
    {"G", "g", C::consonant, V::k, 25},
    {"N", "n", C::consonant, V::k, 26},
    {"L", "l", C::consonant, V::k, 27},
    {"NX", "ɾ̃", C::consonant, V::k, 28},
    {"HH", "h", C::consonant, V::k, 29},
    {"Y", "j", C::consonant, V::k, 30},
    {"EL", "l̩", C::consonant, V::k, 31},
    {"EN", "n̩", C::consonant, V::k, 32},
    {"NG", "ŋ", C::consonant, V::k, 33},
    {"IH", "ɪ", C::vowel, V::iy, 34},
    {"IY", "i", C::vowel, V::iy, 35},
    {"AH", "ʌ", C::vowel, V::ah, 36},
    {"AX", "ə", C::vowel, V::ah, 37},
    {"AY", "aɪ", C::vowel, V::ah, 38},
    {"ER", "ɝ", C::vowel, V::er, 39},
    {"AO", "ɔ", C::vowel, V::ao, 40},
    {"OY", "ɔɪ", C::vowel, V::ao, 41},
    {"IX", "ɨ", C::vowel, V::ao, 42},
    {"OW", "oʊ", C::vowel, V::ao, 43},
    {"UH", "ʊ", C::vowel, V::uh, 44},
    {"UW", "u", C::vowel, V::uh, 45},
    {"AA", "ɑ", C::vowel, V::aa, 46},
    {"SIL", "", C::pause, V::sp, 47},
    {"SP", "", C::pause, V::sp, 47},
}};

} // namespace detail

inline constexpr std::size_t phoneme_count = detail::phoneme_table.size();
inline constexpr std::size_t phoneme_table_rows = 48;

/// One ARPABET phoneme of the reference inventory. Only constructible from a
/// valid symbol, so every instance is in the inventory.
class Phoneme {
public:
    static constexpr std::optional<Phoneme> find(std::string_view symbol) noexcept
    {
        for (std::size_t i = 0; i < detail::phoneme_table.size(); ++i)
            if (detail::phoneme_table[i].symbol == symbol)
                return Phoneme(static_cast<std::uint8_t>(i));
        return std::nullopt;
    }

    static Phoneme parse(std::string_view symbol)
    {
        if (auto p = find(symbol))
            return *p;
        throw Error(ErrorCode::unknown_symbol, "unknown phoneme symbol '" + std::string(symbol) + "'");
    }

    static constexpr Phoneme at(std::size_t index) noexcept { return Phoneme(static_cast<std::uint8_t>(index)); }

    constexpr const PhonemeInfo& info() const noexcept { return detail::phoneme_table[index_]; }
    constexpr std::string_view symbol() const noexcept { return info().symbol; }
    constexpr std::string_view ipa() const noexcept { return info().ipa; }
    constexpr PhonemeCategory category() const noexcept { return info().category; }
    constexpr Viseme viseme() const noexcept { return info().viseme; }
    constexpr bool is_consonant() const noexcept { return category() == PhonemeCategory::consonant; }
    constexpr std::size_t index() const noexcept { return index_; }

    friend constexpr bool operator==(Phoneme, Phoneme) noexcept = default;
    friend constexpr auto operator<=>(Phoneme, Phoneme) noexcept = default;

private:
    constexpr explicit Phoneme(std::uint8_t index) noexcept : index_(index) {}

    std::uint8_t index_;
};

using PhonemeSequence = std::vector<Phoneme>;

inline std::vector<Phoneme> all_phonemes()
{
    std::vector<Phoneme> out;
    out.reserve(phoneme_count);
    for (std::size_t i = 0; i < phoneme_count; ++i)
        out.push_back(Phoneme::at(i));
    return out;
}

inline std::vector<Phoneme> consonants()
{
    std::vector<Phoneme> out;
    for (auto p : all_phonemes())
        if (p.is_consonant())
            out.push_back(p);
    return out;
}

inline Viseme viseme_of(Phoneme p) noexcept { return p.viseme(); }

inline Viseme viseme_of(std::string_view symbol) { return Phoneme::parse(symbol).viseme(); }

inline std::vector<Phoneme> viseme_members(Viseme v)
{
    std::vector<Phoneme> out;
    for (auto p : all_phonemes())
        if (p.viseme() == v)
            out.push_back(p);
    return out;
}

inline std::vector<Viseme> viseme_sequence(std::span<const Phoneme> phonemes)
{
    std::vector<Viseme> out;
    out.reserve(phonemes.size());
    for (auto p : phonemes)
        out.push_back(p.viseme());
    return out;
}

/// Parses a single ARPABET token, dropping one trailing stress digit (0-2).
inline std::optional<Phoneme> parse_arpabet_token(std::string_view token) noexcept
{
    if (token.size() >= 2 && token.back() >= '0' && token.back() <= '2')
        token.remove_suffix(1);
    if (auto p = Phoneme::find(token))
        return p;
    char upper[4] = {};
    if (token.size() > 3)
        return std::nullopt;
    for (std::size_t i = 0; i < token.size(); ++i)
        upper[i] = static_cast<char>(std::toupper(static_cast<unsigned char>(token[i])));
    return Phoneme::find(std::string_view(upper, token.size()));
}

/// First symbol when it is a consonant; nullopt for vowel or pause onsets.
inline std::optional<Phoneme> initial_consonant(std::span<const Phoneme> phonemes)
{
    if (phonemes.empty())
        throw Error(ErrorCode::empty_sequence, "phoneme sequence is empty");
    if (phonemes.front().is_consonant())
        return phonemes.front();
    return std::nullopt;
}

inline std::string join_symbols(std::span<const Phoneme> phonemes, std::string_view sep = " ")
{
    std::string out;
    for (std::size_t i = 0; i < phonemes.size(); ++i) {
        if (i)
            out += sep;
        out += phonemes[i].symbol();
    }
    return out;
}

} // namespace speechread
