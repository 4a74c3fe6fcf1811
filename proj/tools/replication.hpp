#pragma once

#include <array>
#include <cstdio>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "speechread/metrics.hpp"
#include "speechread/phoneme.hpp"
#include "speechread/practice.hpp"
#include "speechread/session_csv.hpp"

namespace speechread::replication {

struct VisemeClass {
    std::string_view viseme;
    std::vector<std::string_view> members;
};

// Expected phoneme-to-viseme partition, written out independently of the
// library's own table.
inline const std::vector<VisemeClass>& expected_viseme_classes()
{
    static const std::vector<VisemeClass> classes = {
        {"/p/", {"P", "B", "M", "EM"}},
        {"/f/", {"F", "V"}},
        {"/t/", {"T", "D", "S", "Z", "TH", "DH", "DX"}},
        {"/w/", {"W", "WH", "R"}},
        {"/ch/", {"CH", "JH", "SH", "ZH"}},
        {"/ey/", {"EH", "EY", "AE", "AW"}},
        {"/k/", {"K", "G", "N", "L", "NX", "HH", "Y", "EL", "EN", "NG"}},
        {"/iy/", {"IH", "IY"}},
        {"/ah/", {"AH", "AX", "AY"}},
        {"/er/", {"ER"}},
        {"/ao/", {"AO", "OY", "IX", "OW"}},
        {"/uh/", {"UH", "UW"}},
        {"/aa/", {"AA"}},
        {"/sp/", {"SIL", "SP"}},
    };
    return classes;
}

struct ParticipantCounts {
    std::string_view name;
    std::size_t sessions;
    std::size_t trials;
    std::size_t correct;
    std::size_t incorrect;
};

inline constexpr std::array<ParticipantCounts, 3> participant_summaries = {{
    {"P1", 14, 76, 62, 14},
    {"P2", 72, 706, 462, 244},
    {"P3", 43, 367, 234, 133},
}};

/// A session-log CSV with the participant's totals: trials spread as evenly
/// as possible over the sessions, the first `correct` answers right.
inline std::string synthetic_session_log(const ParticipantCounts& p)
{
    std::vector<SessionRecord> records;
    std::size_t answered = 0;
    for (std::size_t s = 0; s < p.sessions; ++s) {
        SessionRecord r;
        r.id = SessionId{static_cast<std::int64_t>(s + 1)};
        r.date = from_epoch_ms(1'546'300'800'000LL + static_cast<std::int64_t>(s) * 86'400'000LL);
        r.speakers = std::string(practice::all_speakers_label);
        r.lipshapes = std::string(practice::all_lipshapes_label);
        std::size_t n = p.trials / p.sessions + (s < p.trials % p.sessions ? 1 : 0);
        for (std::size_t i = 0; i < n; ++i, ++answered) {
            bool right = answered < p.correct;
            r.trials.push_back({VideoId{static_cast<std::int64_t>(i % 3 + 1)}, "Pat", right ? "Pat" : "Bat", right,
                                r.date});
        }
        records.push_back(std::move(r));
    }
    return csv::export_sessions(records);
}

/// 36 detection trials with a target on every third one.
inline metrics::ResponseLog detection_log(bool respond_to_targets, bool respond_to_others)
{
    metrics::ResponseLog log;
    for (std::size_t i = 0; i < 36; ++i) {
        bool target = i % 3 == 0;
        log.push_back({target, target ? respond_to_targets : respond_to_others});
    }
    return log;
}

inline constexpr std::size_t warmup_trials = 9;

struct SuiteResult {
    bool passed = false;
    std::string detail;
};

inline SuiteResult viseme_table_suite()
{
    std::size_t checked = 0;
    std::vector<std::string> problems;
    std::set<std::string_view> seen;
    std::set<int> rows;
    for (const auto& cls : expected_viseme_classes()) {
        for (auto symbol : cls.members) {
            seen.insert(symbol);
            auto p = Phoneme::find(symbol);
            if (!p) {
                problems.push_back(std::string(symbol) + " missing");
                continue;
            }
            rows.insert(p->info().table_row);
            if (to_string(p->viseme()) != cls.viseme)
                problems.push_back(std::string(symbol) + " maps to " + std::string(to_string(p->viseme())));
        }
    }
    for (auto p : all_phonemes())
        if (!seen.contains(p.symbol()))
            problems.push_back(std::string(p.symbol()) + " unexpected");
    checked = rows.size();
    if (all_visemes.size() != expected_viseme_classes().size())
        problems.push_back("class count " + std::to_string(all_visemes.size()));
    if (problems.empty())
        return {true, std::to_string(checked) + " mappings checked"};
    std::string detail;
    for (const auto& s : problems)
        detail += (detail.empty() ? "" : "; ") + s;
    return {false, detail};
}

inline SuiteResult f1_suite()
{
    auto perfect = metrics::f1_score(detection_log(true, false), warmup_trials);
    auto never = metrics::f1_score(detection_log(false, false), warmup_trials);
    char buf[96];
    std::snprintf(buf, sizeof buf, "perfect f1 %.3f, never-responder recall %.3f", perfect.f1, never.recall);
    return {perfect.f1 == 1.0 && never.recall == 0.0, buf};
}

inline SuiteResult summary_suite()
{
    std::string detail;
    bool ok = true;
    for (const auto& p : participant_summaries) {
        auto records = csv::import_sessions(synthetic_session_log(p));
        auto t = practice::summarize_sessions(records).totals;
        bool match = t.n_sessions == p.sessions && t.n_trials == p.trials && t.n_correct == p.correct
                  && t.n_incorrect == p.incorrect;
        ok = ok && match;
        detail += (detail.empty() ? "" : ", ") + std::string(p.name) + " " + std::to_string(t.n_sessions) + "/"
                + std::to_string(t.n_trials) + "/" + std::to_string(t.n_correct) + "/"
                + std::to_string(t.n_incorrect);
    }
    return {ok, detail};
}

} // namespace speechread::replication
