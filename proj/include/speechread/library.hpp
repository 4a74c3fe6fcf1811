#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/lexicon.hpp"

namespace speechread {

template <class Tag>
struct Id {
    std::int64_t value = 0;

    friend constexpr auto operator<=>(Id, Id) = default;
};

using LipshapeId = Id<struct LipshapeTag>;
using WordId = Id<struct WordTag>;
using SpeakerId = Id<struct SpeakerTag>;
using VideoId = Id<struct VideoTag>;
using SessionId = Id<struct SessionTag>;

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

inline Timestamp now() { return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now()); }

inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp(std::chrono::milliseconds(ms)); }
inline std::int64_t epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }

/// "YYYY-MM-DD HH:MM:SS" in UTC.
inline std::string format_timestamp(Timestamp t)
{
    std::time_t secs = static_cast<std::time_t>(epoch_ms(t) / 1000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S", &tm);
    return buf;
}

inline std::optional<Timestamp> parse_timestamp(std::string_view s)
{
    std::tm tm{};
    int n = 0;
    std::string str(s);
    if (std::sscanf(str.c_str(), "%4d-%2d-%2d %2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday, &tm.tm_hour,
                    &tm.tm_min, &tm.tm_sec, &n)
            != 6
        || static_cast<std::size_t>(n) != str.size())
        return std::nullopt;
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return from_epoch_ms(static_cast<std::int64_t>(timegm(&tm)) * 1000);
}

struct LipshapeRecord {
    LipshapeId id;
    Lipshape shape;
    std::size_t word_count = 0;
};

struct WordEntry {
    WordId id;
    std::string text;
    LipshapeId lipshape;
    std::size_t video_count = 0;
};

/// Acknowledgments a speaker gives before any recording is stored.
struct ConsentRecord {
    bool informed_about_project = false;
    bool data_use = false;
    bool video_use = false;
    Timestamp granted_at{};

    bool complete() const noexcept { return informed_about_project && data_use && video_use; }

    static ConsentRecord full(Timestamp when = now()) { return {true, true, true, when}; }
};

struct Speaker {
    SpeakerId id;
    std::string first_name;
    std::string last_name;
    ConsentRecord consent;
    Timestamp created_at{};
    std::size_t video_count = 0;

    std::string full_name() const { return last_name.empty() ? first_name : first_name + " " + last_name; }
};

struct VideoRecord {
    VideoId id;
    WordId word;
    LipshapeId lipshape;
    SpeakerId speaker;
    std::string file; // relative to the private media directory
    bool has_audio = false;
    Timestamp recorded_at{};
};

struct Trial {
    VideoId video;
    std::string correct_word;
    std::string chosen_word;
    bool correct = false;
    Timestamp answered_at{};
};

struct SessionRecord {
    SessionId id;
    Timestamp date{};
    std::string speakers;
    std::string lipshapes;
    bool audio = false;
    std::vector<Trial> trials;
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;
};

/// Immutable snapshot of the library, ordered by id. Planning and analytics
/// work against this rather than against the store directly.
struct LibraryView {
    std::vector<LipshapeRecord> lipshapes;
    std::vector<WordEntry> words;
    std::vector<Speaker> speakers;
    std::vector<VideoRecord> videos;

    const LipshapeRecord* lipshape(LipshapeId id) const { return find_by_id(lipshapes, id); }
    const WordEntry* word(WordId id) const { return find_by_id(words, id); }
    const Speaker* speaker(SpeakerId id) const { return find_by_id(speakers, id); }
    const VideoRecord* video(VideoId id) const { return find_by_id(videos, id); }

    const LipshapeRecord* lipshape_named(std::string_view name) const
    {
        for (const auto& l : lipshapes)
            if (text::iequals(l.shape.name(), text::trim(name)))
                return &l;
        return nullptr;
    }

    std::vector<const WordEntry*> words_in(LipshapeId id) const
    {
        std::vector<const WordEntry*> out;
        for (const auto& w : words)
            if (w.lipshape == id)
                out.push_back(&w);
        return out;
    }

private:
    template <class T, class I>
    static const T* find_by_id(const std::vector<T>& rows, I id)
    {
        for (const auto& r : rows)
            if (r.id == id)
                return &r;
        return nullptr;
    }
};

} // namespace speechread
