#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/library.hpp"
#include "speechread/text.hpp"

namespace speechread::csv {

inline std::string quote(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
inline std::vector<std::string> split_record(std::string_view line)
{
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (quoted)
        throw Error(ErrorCode::parse_error, "unterminated quoted CSV field");
    return out;
}

inline constexpr std::string_view session_header =
    "session_id,date,speakers,lipshapes,audio,trial_index,video_id,correct_word,chosen_word,result";

/// One row per trial, trial_index counted from 1.
inline std::string export_sessions(std::span<const SessionRecord> records, bool header = true)
{
    std::string out;
    if (header)
        out += std::string(session_header) + "\n";
    for (const auto& r : records) {
        for (std::size_t i = 0; i < r.trials.size(); ++i) {
            const auto& t = r.trials[i];
            out += std::to_string(r.id.value) + "," + quote(format_timestamp(r.date)) + "," + quote(r.speakers) + ","
                 + quote(r.lipshapes) + "," + (r.audio ? "on" : "off") + "," + std::to_string(i + 1) + ","
                 + std::to_string(t.video.value) + "," + quote(t.correct_word) + "," + quote(t.chosen_word) + ","
                 + (t.correct ? "correct" : "incorrect") + "\n";
        }
    }
    return out;
}

/// Reads an exported trial log back into session records, grouped by
/// session_id in order of first appearance.
inline std::vector<SessionRecord> import_sessions(std::string_view content)
{
    std::vector<SessionRecord> out;
    std::map<std::int64_t, std::size_t> index;
    auto all = text::lines(content);
    for (std::size_t n = 0; n < all.size(); ++n) {
        const auto& line = all[n];
        if (text::trim(line).empty() || (n == 0 && line.starts_with("session_id")))
            continue;
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::parse_error, "session log line " + std::to_string(n + 1) + ": " + why);
        };
        auto f = split_record(line);
        if (f.size() != 10)
            fail("expected 10 fields");
        std::int64_t sid = 0, video = 0;
        try {
            sid = std::stoll(f[0]);
            video = std::stoll(f[6]);
        } catch (const std::logic_error&) {
            fail("session_id and video_id must be integers");
        }
        auto date = parse_timestamp(f[1]);
        if (!date)
            fail("bad date '" + f[1] + "'");
        if (f[4] != "on" && f[4] != "off")
            fail("audio must be on or off");
        if (f[9] != "correct" && f[9] != "incorrect")
            fail("result must be correct or incorrect");
        bool correct = f[9] == "correct";
        if (correct != (f[7] == f[8]))
            fail("result disagrees with the chosen word");

        auto [it, fresh] = index.try_emplace(sid, out.size());
        if (fresh) {
            SessionRecord r;
            r.id = SessionId{sid};
            r.date = *date;
            r.speakers = f[2];
            r.lipshapes = f[3];
            r.audio = f[4] == "on";
            out.push_back(std::move(r));
        }
        auto& r = out[it->second];
        r.trials.push_back({VideoId{video}, f[7], f[8], correct, *date});
        (correct ? r.n_correct : r.n_incorrect)++;
    }
    return out;
}

} // namespace speechread::csv
