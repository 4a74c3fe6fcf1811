#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/library.hpp"
#include "speechread/text.hpp"

namespace speechread::practice {

enum class Mode { lipshape, word };

inline constexpr int min_trials = 1;
inline constexpr int max_trials = 10;
inline constexpr std::size_t choice_count = 3;

inline constexpr std::string_view all_speakers_label = "All Speakers";
inline constexpr std::string_view all_lipshapes_label = "All Lipshapes";

/// Session setup. An empty lipshape or speaker selector means ALL.
struct PracticeConfig {
    Mode mode = Mode::lipshape;
    std::optional<LipshapeId> lipshape;
    std::optional<WordId> word;
    std::optional<SpeakerId> speaker;
    bool audio = false;
    int trial_count = max_trials;
};

struct PlannedTrial {
    VideoId video;
    WordId word;
    std::string correct_word;
    std::array<std::string, choice_count> choices;
};

struct SessionPlan {
    PracticeConfig config;
    std::string speakers_label;
    std::string lipshapes_label;
    std::vector<PlannedTrial> trials;
};

namespace detail {

inline std::string speakers_label(const PracticeConfig& config, const LibraryView& library)
{
    if (!config.speaker)
        return std::string(all_speakers_label);
    const auto* s = library.speaker(*config.speaker);
    if (!s)
        throw Error(ErrorCode::missing_speaker, "no speaker with id " + std::to_string(config.speaker->value));
    return s->full_name();
}

// Unique word texts (case-insensitive), first spelling wins, in id order.
inline std::vector<std::string> word_pool(const LibraryView& library, std::optional<LipshapeId> lipshape)
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& w : library.words) {
        if (lipshape && !(w.lipshape == *lipshape))
            continue;
        if (seen.insert(text::to_upper(w.text)).second)
            out.push_back(w.text);
    }
    return out;
}

template <class Rng>
std::size_t uniform_index(Rng& rng, std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace detail

inline void validate_lipshape_config(const PracticeConfig& config)
{
    if (config.mode != Mode::lipshape)
        throw Error(ErrorCode::invalid_config, "config is not for lipshape practice");
    if (config.trial_count < min_trials || config.trial_count > max_trials)
        throw Error(ErrorCode::invalid_config, "trial count must be between 1 and 10, got "
                                                   + std::to_string(config.trial_count));
}

/// Builds a multiple-choice quiz. Videos are drawn with replacement from the
/// selection (an immediate repeat is re-drawn once when possible); the two
/// distractors are distinct other words from the same lipshape, or from the
/// whole library when all lipshapes are selected. Choice order is shuffled.
inline SessionPlan plan_lipshape_session(const PracticeConfig& config, const LibraryView& library, std::uint64_t seed)
{
    validate_lipshape_config(config);
    SessionPlan plan;
    plan.config = config;
    plan.speakers_label = detail::speakers_label(config, library);
    if (config.lipshape) {
        const auto* l = library.lipshape(*config.lipshape);
        if (!l)
            throw Error(ErrorCode::missing_lipshape, "no lipshape with id " + std::to_string(config.lipshape->value));
        plan.lipshapes_label = l->shape.name();
    } else {
        plan.lipshapes_label = std::string(all_lipshapes_label);
    }

    std::vector<const VideoRecord*> candidates;
    for (const auto& v : library.videos) {
        if (config.lipshape && !(v.lipshape == *config.lipshape))
            continue;
        if (config.speaker && !(v.speaker == *config.speaker))
            continue;
        candidates.push_back(&v);
    }
    if (candidates.empty())
        throw Error(ErrorCode::insufficient_videos, "not enough videos in the library for this session");

    auto pool = detail::word_pool(library, config.lipshape);
    std::mt19937_64 rng(seed);
    const VideoRecord* previous = nullptr;
    for (int i = 0; i < config.trial_count; ++i) {
        const auto* video = candidates[detail::uniform_index(rng, candidates.size())];
        if (video == previous && candidates.size() > 1)
            video = candidates[detail::uniform_index(rng, candidates.size())];
        previous = video;

        const auto* word = library.word(video->word);
        if (!word)
            throw Error(ErrorCode::missing_word, "video " + std::to_string(video->id.value) + " has no word");
        std::vector<const std::string*> eligible;
        for (const auto& w : pool)
            if (!text::iequals(w, word->text))
                eligible.push_back(&w);
        if (eligible.size() < choice_count - 1)
            throw Error(ErrorCode::insufficient_distractors,
                        "not enough other words to offer alongside '" + word->text + "'");
        auto a = detail::uniform_index(rng, eligible.size());
        auto b = detail::uniform_index(rng, eligible.size() - 1);
        if (b >= a)
            ++b;

        PlannedTrial trial{video->id, word->id, word->text, {word->text, *eligible[a], *eligible[b]}};
        std::shuffle(trial.choices.begin(), trial.choices.end(), rng);
        plan.trials.push_back(std::move(trial));
    }
    return plan;
}

/// Scores one answer. Does not track whether the trial was already answered;
/// LipshapeSession does.
inline Trial answer_trial(const SessionPlan& plan, std::size_t index, std::string_view choice, Timestamp at = now())
{
    if (index >= plan.trials.size())
        throw Error(ErrorCode::invalid_index, "trial index " + std::to_string(index) + " out of range");
    const auto& t = plan.trials[index];
    auto picked = std::find(t.choices.begin(), t.choices.end(), text::trim(choice));
    if (picked == t.choices.end())
        throw Error(ErrorCode::choice_not_offered, "'" + std::string(choice) + "' is not one of the offered choices");
    return {t.video, t.correct_word, *picked, *picked == t.correct_word, at};
}

inline SessionRecord finish_session(const SessionPlan& plan, std::span<const std::optional<Trial>> trials,
                                    Timestamp clock)
{
    if (trials.size() != plan.trials.size())
        throw Error(ErrorCode::incomplete_session, "session has " + std::to_string(plan.trials.size())
                                                       + " trials but " + std::to_string(trials.size())
                                                       + " results");
    SessionRecord record;
    record.date = clock;
    record.speakers = plan.speakers_label;
    record.lipshapes = plan.lipshapes_label;
    record.audio = plan.config.audio;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (!trials[i])
            throw Error(ErrorCode::incomplete_session, "trial " + std::to_string(i + 1) + " is unanswered");
        record.trials.push_back(*trials[i]);
        (trials[i]->correct ? record.n_correct : record.n_incorrect)++;
    }
    return record;
}

inline SessionRecord finish_session(const SessionPlan& plan, std::span<const Trial> trials, Timestamp clock)
{
    std::vector<std::optional<Trial>> wrapped(trials.begin(), trials.end());
    return finish_session(plan, wrapped, clock);
}

/// A quiz in progress: the plan plus at most one answer per trial.
class LipshapeSession {
public:
    explicit LipshapeSession(SessionPlan plan) : plan_(std::move(plan)), answers_(plan_.trials.size()) {}

    const SessionPlan& plan() const noexcept { return plan_; }
    const std::vector<std::optional<Trial>>& answers() const noexcept { return answers_; }

    Trial answer(std::size_t index, std::string_view choice, Timestamp at = now())
    {
        auto trial = answer_trial(plan_, index, choice, at);
        if (answers_[index])
            throw Error(ErrorCode::already_answered, "trial " + std::to_string(index + 1) + " was already answered");
        answers_[index] = trial;
        return trial;
    }

    bool complete() const
    {
        return std::all_of(answers_.begin(), answers_.end(), [](const auto& a) { return a.has_value(); });
    }

    SessionRecord finish(Timestamp clock = now()) const { return finish_session(plan_, answers_, clock); }

private:
    SessionPlan plan_;
    std::vector<std::optional<Trial>> answers_;
};

// --- word drill --------------------------------------------------------------

struct WordPlaylist {
    WordId word;
    std::vector<VideoId> videos;
    bool audio = false;
};

/// Every video of the chosen word (optionally one speaker's), in recording order.
inline WordPlaylist plan_word_session(const PracticeConfig& config, const LibraryView& library)
{
    if (config.mode != Mode::word || !config.word)
        throw Error(ErrorCode::invalid_config, "word practice needs a word");
    if (!library.word(*config.word))
        throw Error(ErrorCode::missing_word, "no word with id " + std::to_string(config.word->value));
    if (config.speaker && !library.speaker(*config.speaker))
        throw Error(ErrorCode::missing_speaker, "no speaker with id " + std::to_string(config.speaker->value));

    std::vector<const VideoRecord*> picked;
    for (const auto& v : library.videos)
        if (v.word == *config.word && (!config.speaker || v.speaker == *config.speaker))
            picked.push_back(&v);
    if (picked.empty())
        throw Error(ErrorCode::no_videos_for_word, "no videos recorded for this word");
    std::stable_sort(picked.begin(), picked.end(), [](const VideoRecord* a, const VideoRecord* b) {
        return a->recorded_at < b->recorded_at || (a->recorded_at == b->recorded_at && a->id < b->id);
    });
    WordPlaylist out{*config.word, {}, config.audio};
    for (const auto* v : picked)
        out.videos.push_back(v->id);
    return out;
}

// --- statistics ----------------------------------------------------------------

struct SummaryRow {
    SessionId id;
    Timestamp date;
    std::string speakers;
    std::string lipshapes;
    bool audio = false;
    std::size_t n_trials = 0;
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;

    std::string result() const { return std::to_string(n_correct) + "/" + std::to_string(n_trials); }
};

struct SummaryTotals {
    std::size_t n_sessions = 0;
    std::size_t n_trials = 0;
    std::size_t n_correct = 0;
    std::size_t n_incorrect = 0;

    friend bool operator==(const SummaryTotals&, const SummaryTotals&) = default;
};

struct SessionSummary {
    std::vector<SummaryRow> rows;
    SummaryTotals totals;
};

inline SessionSummary summarize_sessions(std::span<const SessionRecord> records)
{
    SessionSummary s;
    for (const auto& r : records) {
        std::size_t correct = static_cast<std::size_t>(
            std::count_if(r.trials.begin(), r.trials.end(), [](const Trial& t) { return t.correct; }));
        SummaryRow row{r.id, r.date, r.speakers, r.lipshapes, r.audio, r.trials.size(), correct,
                       r.trials.size() - correct};
        s.totals.n_sessions += 1;
        s.totals.n_trials += row.n_trials;
        s.totals.n_correct += row.n_correct;
        s.totals.n_incorrect += row.n_incorrect;
        s.rows.push_back(std::move(row));
    }
    return s;
}

// --- per-speaker confusion -----------------------------------------------------

struct Accuracy {
    std::size_t correct = 0;
    std::size_t total = 0;

    double ratio() const noexcept { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

/// How one user's answers to one speaker's videos are spread across the
/// offered words. The diagonal (word, word) counts correct answers.
struct ConfusionReport {
    SpeakerId speaker;
    std::map<std::pair<std::string, std::string>, std::size_t> counts;
    std::map<std::string, Accuracy> per_word;
    std::map<std::string, Accuracy> per_lipshape;

    std::size_t count(std::string_view correct, std::string_view chosen) const
    {
        auto it = counts.find({std::string(correct), std::string(chosen)});
        return it == counts.end() ? 0 : it->second;
    }
};

inline ConfusionReport confusion_report(std::span<const Trial> trials, SpeakerId speaker, const LibraryView& library)
{
    ConfusionReport report{speaker, {}, {}, {}};
    for (const auto& t : trials) {
        const auto* video = library.video(t.video);
        if (!video || !(video->speaker == speaker))
            throw Error(ErrorCode::speaker_mismatch, "trial video " + std::to_string(t.video.value)
                                                         + " is not a video of speaker "
                                                         + std::to_string(speaker.value));
        report.counts[{t.correct_word, t.chosen_word}] += 1;
        auto& word = report.per_word[t.correct_word];
        word.total += 1;
        word.correct += t.correct ? 1 : 0;
        const auto* shape = library.lipshape(video->lipshape);
        auto& ls = report.per_lipshape[shape ? shape->shape.name() : std::to_string(video->lipshape.value)];
        ls.total += 1;
        ls.correct += t.correct ? 1 : 0;
    }
    return report;
}

} // namespace speechread::practice
