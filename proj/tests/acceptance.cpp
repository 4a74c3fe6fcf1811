// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <sqlite3.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "replication.hpp"
#include "speechread/metrics.hpp"
#include "speechread/overlay.hpp"
#include "speechread/practice.hpp"
#include "speechread/store.hpp"
#include "support.hpp"

using namespace speechread;
namespace fs = std::filesystem;

namespace {

constexpr double f1_tolerance = 1e-12;
constexpr double spt_step = 2.5;
constexpr std::size_t random_f1_logs = 1000;
constexpr std::size_t levenshtein_max_len = 6;
constexpr std::size_t metric_axiom_pairs = 10000;
constexpr std::size_t generated_sessions = 10000;
constexpr std::size_t store_sequences = 3;
constexpr std::size_t store_ops_per_sequence = 1000;

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (ok)
            return;
        if (passed)
            detail = what;
        passed = false;
    }
};

struct Criterion {
    int number;
    std::string_view title;
    std::chrono::milliseconds budget;
    std::function<Outcome()> run;
};

std::string fmt(const char* pattern, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// --- 1 ------------------------------------------------------------------------

Outcome viseme_partition()
{
    Outcome out;
    std::map<std::string, std::set<std::string>> actual;
    std::set<int> rows;
    for (auto p : all_phonemes()) {
        actual[std::string(to_string(p.viseme()))].insert(std::string(p.symbol()));
        rows.insert(p.info().table_row);
    }
    std::map<std::string, std::set<std::string>> expected;
    for (const auto& cls : replication::expected_viseme_classes())
        for (auto m : cls.members)
            expected[std::string(cls.viseme)].insert(std::string(m));

    out.require(actual.size() == 14, fmt("%zu classes", actual.size()));
    out.require(actual == expected, "partition differs from the reference classes");
    out.require(rows.size() == 48, fmt("%zu table rows", rows.size()));
    out.require(to_string(viseme_of("P")) == "/p/", "P anchor");
    out.require(to_string(viseme_of("V")) == "/f/", "V anchor");
    out.require(to_string(viseme_of("SIL")) == "/sp/", "SIL anchor");
    if (out.passed)
        out.detail = fmt("%zu rows, %zu symbols, 14 classes", rows.size(), all_phonemes().size());
    return out;
}

// --- 2 ------------------------------------------------------------------------

Outcome display_set_derivation()
{
    Outcome out;
    const std::map<std::string, std::string> folded = {
        {"DX", "TH"}, {"DH", "TH"}, {"WH", "W"}, {"ZH", "SH"}, {"NX", "NG"}, {"EN", "NG"}, {"EM", "M"}, {"EL", "L"},
    };
    const std::set<std::string> expected_labels = {"P",  "B", "M",  "F",  "V",  "T", "D", "S", "Z", "TH", "W",
                                                   "R",  "CH", "JH", "SH", "K", "G", "N", "L", "HH", "Y", "NG"};

    auto set = overlay::display_set();
    std::set<std::string> labels;
    for (const auto& s : set)
        labels.insert(std::string(s.label));
    out.require(set.size() == 22, fmt("%zu symbols", set.size()));
    out.require(labels == expected_labels, "label set differs");

    std::size_t checked = 0;
    for (auto c : consonants()) {
        std::string sym(c.symbol());
        auto it = folded.find(sym);
        auto want = it == folded.end() ? sym : it->second;
        auto got = std::string(overlay::simplify(c).label);
        out.require(got == want, sym + " -> " + got + ", expected " + want);
        ++checked;
    }
    if (out.passed)
        out.detail = fmt("22 symbols, %zu consonants mapped", checked);
    return out;
}

// --- 3 ------------------------------------------------------------------------

Outcome layout_constraints()
{
    Outcome out;
    for (auto side : {overlay::Side::left, overlay::Side::right}) {
        auto layout = overlay::default_layout(side);
        out.require(layout.slots.size() == 22, fmt("%zu slots", layout.slots.size()));
        std::set<std::string_view> seen;
        std::map<Viseme, std::string> last_in_class;
        for (std::size_t i = 0; i < layout.slots.size(); ++i) {
            const auto& slot = layout.slots[i];
            seen.insert(slot.symbol.label);
            if (i > 0)
                out.require(layout.slots[i - 1].symbol.viseme != slot.symbol.viseme,
                            fmt("slots %zu and %zu share a viseme", i - 1, i));
            if (i > 0)
                out.require(layout.slots[i - 1].angle_deg > slot.angle_deg, "slots not ordered top to bottom");
            auto [it, fresh] = last_in_class.try_emplace(slot.symbol.viseme, std::string(slot.symbol.label));
            if (!fresh) {
                out.require(it->second < slot.symbol.label, it->second + " placed above " + std::string(slot.symbol.label));
                it->second = slot.symbol.label;
            }
        }
        out.require(seen.size() == 22, "labels repeat");
    }
    if (out.passed)
        out.detail = "both sides scanned";
    return out;
}

// --- 4 ------------------------------------------------------------------------

Outcome f1_replication()
{
    Outcome out;
    auto perfect = metrics::f1_score(replication::detection_log(true, false), replication::warmup_trials);
    auto never = metrics::f1_score(replication::detection_log(false, false), replication::warmup_trials);
    out.require(replication::detection_log(true, false).size() == 36, "log is not 36 trials");
    out.require(std::abs(perfect.f1 - 1.0) < f1_tolerance, fmt("perfect f1 %.6f", perfect.f1));
    out.require(never.recall == 0.0, fmt("never-responder recall %.6f", never.recall));

    std::mt19937_64 rng(2019);
    double worst = 0;
    for (std::size_t n = 0; n < random_f1_logs; ++n) {
        metrics::ResponseLog log(10 + rng() % 90);
        for (auto& t : log)
            t = {rng() % 3 == 0, rng() % 2 == 0};
        auto r = metrics::f1_score(log, replication::warmup_trials);
        auto c = oracle::count_detections(log, replication::warmup_trials);
        out.require(r.tp == c.tp && r.fp == c.fp && r.fn == c.fn && r.tn == c.tn, fmt("counts differ on log %zu", n));
        worst = std::max(worst, std::abs(r.f1 - oracle::f1_from_counts(c)));
    }
    out.require(worst <= f1_tolerance, fmt("max f1 deviation %.3g", worst));
    if (out.passed)
        out.detail = fmt("perfect f1 %.2f, never recall %.2f, %zu random logs, max dev %.1g", perfect.f1, never.recall,
                         random_f1_logs, worst);
    return out;
}

// --- 5 ------------------------------------------------------------------------

std::string random_word(std::mt19937_64& rng)
{
    static constexpr std::string_view alphabet = "abcde";
    std::string s(rng() % 13, ' ');
    for (auto& c : s)
        c = alphabet[rng() % alphabet.size()];
    return s;
}

Outcome levenshtein_oracle()
{
    Outcome out;
    auto table = oracle::ab_distance_table(levenshtein_max_len);
    for (const auto& [pair, d] : table) {
        auto got = metrics::levenshtein(pair.first, pair.second);
        out.require(got == d, "'" + pair.first + "' -> '" + pair.second + "'");
    }

    std::mt19937_64 rng(7);
    for (std::size_t n = 0; n < metric_axiom_pairs; ++n) {
        auto x = random_word(rng), y = random_word(rng), z = random_word(rng);
        auto dxy = metrics::levenshtein(x, y);
        out.require(metrics::levenshtein(x, x) == 0, "d(x,x) != 0");
        out.require((dxy == 0) == (x == y), "identity of indiscernibles");
        out.require(dxy == metrics::levenshtein(y, x), "symmetry");
        out.require(dxy <= metrics::levenshtein(x, z) + metrics::levenshtein(z, y), "triangle inequality");
    }
    if (out.passed)
        out.detail = fmt("%zu exhaustive pairs, %zu axiom pairs", table.size(), metric_axiom_pairs);
    return out;
}

// --- 6 ------------------------------------------------------------------------

LibraryView quiz_library(const fs::path& root)
{
    auto store = init_store(root);
    std::vector<SpeakerId> speakers;
    for (const char* name : {"Ann", "Ben", "Cat"})
        speakers.push_back(store.add_speaker(name, "Test", ConsentRecord::full()));
    std::mt19937_64 rng(11);
    for (const auto& w : store.words())
        for (auto s : speakers)
            if (rng() % 4 != 0)
                store.add_video(s, w.id, "clip", rng() % 2 == 0);
    return store.snapshot();
}

Outcome session_soundness()
{
    Outcome out;
    testing_support::TempDir dir;
    auto library = quiz_library(dir.path());

    std::map<std::int64_t, std::set<std::string>> words_of;
    for (const auto& w : library.words)
        words_of[w.lipshape.value].insert(text::to_lower(w.text));

    std::mt19937_64 rng(99);
    std::size_t trials = 0, skipped = 0;
    for (std::size_t n = 0; n < generated_sessions; ++n) {
        practice::PracticeConfig config;
        config.trial_count = 1 + static_cast<int>(rng() % 10);
        if (rng() % 3 != 0)
            config.lipshape = library.lipshapes[rng() % library.lipshapes.size()].id;
        if (rng() % 2 == 0)
            config.speaker = library.speakers[rng() % library.speakers.size()].id;

        practice::SessionPlan plan;
        try {
            plan = practice::plan_lipshape_session(config, library, n);
        } catch (const Error& e) {
            out.require(e.code() == ErrorCode::insufficient_videos, std::string("unexpected ") + e.what());
            ++skipped;
            continue;
        }
        out.require(plan.trials.size() == static_cast<std::size_t>(config.trial_count), "wrong trial count");
        for (const auto& t : plan.trials) {
            ++trials;
            std::set<std::string> distinct;
            for (const auto& c : t.choices)
                distinct.insert(text::to_lower(c));
            out.require(distinct.size() == 3, "choices repeat");
            out.require(distinct.contains(text::to_lower(t.correct_word)), "correct word missing from choices");
            const auto* video = library.video(t.video);
            out.require(video && library.word(video->word)->text == t.correct_word, "answer does not match video");
            if (config.lipshape) {
                out.require(video && video->lipshape == *config.lipshape, "video from another lipshape");
                for (const auto& c : distinct)
                    out.require(words_of[config.lipshape->value].contains(c), "foreign distractor '" + c + "'");
            }
            if (config.speaker)
                out.require(video && video->speaker == *config.speaker, "video from another speaker");
        }
    }
    out.require(skipped < generated_sessions / 10, fmt("%zu sessions could not be planned", skipped));

    std::size_t rejected = 0;
    for (int count : {-5, -1, 0, 11, 12, 100}) {
        practice::PracticeConfig config;
        config.trial_count = count;
        try {
            practice::plan_lipshape_session(config, library, 1);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::invalid_config)
                ++rejected;
        }
    }
    out.require(rejected == 6, fmt("%zu of 6 bad trial counts rejected", rejected));
    if (out.passed)
        out.detail = fmt("%zu sessions, %zu trials, 6 bad counts rejected", generated_sessions - skipped, trials);
    return out;
}

// --- 7 ------------------------------------------------------------------------

Outcome summary_replication()
{
    Outcome out;
    std::string detail;
    for (const auto& p : replication::participant_summaries) {
        auto records = csv::import_sessions(replication::synthetic_session_log(p));
        auto t = practice::summarize_sessions(records).totals;
        auto got = fmt("%zu/%zu/%zu/%zu", t.n_sessions, t.n_trials, t.n_correct, t.n_incorrect);
        auto want = fmt("%zu/%zu/%zu/%zu", p.sessions, p.trials, p.correct, p.incorrect);
        out.require(got == want, std::string(p.name) + " " + got + ", expected " + want);
        detail += (detail.empty() ? "" : ", ") + std::string(p.name) + " " + got;
    }
    if (out.passed)
        out.detail = detail;
    return out;
}

// --- 8 ------------------------------------------------------------------------

class RawDb {
public:
    explicit RawDb(const fs::path& file)
    {
        if (sqlite3_open_v2(file.c_str(), &db_, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK)
            throw std::runtime_error("cannot open " + file.string());
    }
    RawDb(const RawDb&) = delete;
    RawDb& operator=(const RawDb&) = delete;
    ~RawDb() { sqlite3_close(db_); }

    std::int64_t count(const char* sql) const
    {
        sqlite3_stmt* st = nullptr;
        if (sqlite3_prepare_v2(db_, sql, -1, &st, nullptr) != SQLITE_OK)
            throw std::runtime_error(sqlite3_errmsg(db_));
        std::int64_t n = sqlite3_step(st) == SQLITE_ROW ? sqlite3_column_int64(st, 0) : -1;
        sqlite3_finalize(st);
        return n;
    }

    std::set<std::string> strings(const char* sql) const
    {
        sqlite3_stmt* st = nullptr;
        if (sqlite3_prepare_v2(db_, sql, -1, &st, nullptr) != SQLITE_OK)
            throw std::runtime_error(sqlite3_errmsg(db_));
        std::set<std::string> out;
        while (sqlite3_step(st) == SQLITE_ROW)
            out.insert(reinterpret_cast<const char*>(sqlite3_column_text(st, 0)));
        sqlite3_finalize(st);
        return out;
    }

private:
    sqlite3* db_ = nullptr;
};

std::string integrity_problem(const RawDb& db, const fs::path& media)
{
    if (auto n = db.count("SELECT COUNT(*) FROM video WHERE speaker_id NOT IN (SELECT id FROM speaker) "
                          "OR word_id NOT IN (SELECT id FROM word)");
        n != 0)
        return fmt("%lld orphan videos", static_cast<long long>(n));
    if (auto n = db.count("SELECT COUNT(*) FROM speaker WHERE NOT (consent_informed = 1 AND consent_data = 1 "
                          "AND consent_video = 1)");
        n != 0)
        return fmt("%lld speakers without full consent", static_cast<long long>(n));
    std::set<std::string> files;
    for (const auto& entry : fs::directory_iterator(media))
        files.insert(entry.path().filename().string());
    if (files != db.strings("SELECT path FROM video"))
        return "media directory and video rows disagree";
    return {};
}

struct OpStats {
    std::size_t applied = 0;
    std::size_t rejected = 0;
};

const std::vector<std::pair<std::string_view, std::vector<std::string_view>>>& candidate_words()
{
    static const std::vector<std::pair<std::string_view, std::vector<std::string_view>>> words = {
        {"P/B/M", {"Pen", "Bell", "Map", "Pig", "Box", "Milk", "Pool", "Ball", "Moon", "Pot"}},
        {"S/D/T", {"Sand", "Dog", "Tea", "Sip", "Door", "Top", "Sea", "Dish"}},
        {"K/G/N", {"Cat", "Goat", "Net", "Kit", "Gun", "Nut", "Keep", "Gate"}},
        {"L/N/K", {"Lake", "Nose", "King", "Leaf", "Name", "Kettle"}},
        {"P/B/M", {"pen", "Xqzt", "Sand"}},
    };
    return words;
}

void random_operation(LibraryStore& store, std::mt19937_64& rng, OpStats& stats)
{
    auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
    auto speakers = store.speakers();
    auto words = store.words();
    auto videos = store.videos();
    try {
        switch (rng() % 9) {
        case 0:
        case 1: {
            ConsentRecord consent{rng() % 5 != 0, rng() % 5 != 0, rng() % 5 != 0, now()};
            store.add_speaker("Speaker", std::to_string(rng() % 1000), consent);
            break;
        }
        case 2:
            store.delete_speaker(speakers.empty() || rng() % 8 == 0 ? SpeakerId{999999} : pick(speakers).id);
            break;
        case 3: {
            const auto& [name, list] = pick(candidate_words());
            store.add_word(store.find_lipshape(name)->id, pick(list), testing_support::reference_lexicon());
            break;
        }
        case 4:
            store.delete_word(words.empty() || rng() % 8 == 0 ? WordId{999999} : pick(words).id);
            break;
        case 5:
        case 6:
            store.add_video(speakers.empty() || rng() % 10 == 0 ? SpeakerId{999999} : pick(speakers).id,
                            words.empty() ? WordId{999999} : pick(words).id, std::string(1 + rng() % 64, 'v'),
                            rng() % 2 == 0, rng() % 2 == 0 ? "webm" : "mp4");
            break;
        case 7: {
            if (videos.empty())
                throw Error(ErrorCode::missing_video, "no videos yet");
            std::optional<WordId> w;
            std::optional<SpeakerId> s;
            if (!words.empty() && rng() % 2 == 0)
                w = pick(words).id;
            if (!speakers.empty() && rng() % 2 == 0)
                s = rng() % 10 == 0 ? SpeakerId{999999} : pick(speakers).id;
            store.edit_video(pick(videos).id, w, s);
            break;
        }
        default:
            store.delete_video(videos.empty() || rng() % 8 == 0 ? VideoId{999999} : pick(videos).id);
            break;
        }
        ++stats.applied;
    } catch (const Error&) {
        ++stats.rejected;
    }
}

Outcome store_integrity()
{
    Outcome out;
    OpStats stats;
    for (std::size_t seq = 0; seq < store_sequences && out.passed; ++seq) {
        testing_support::TempDir dir;
        auto config = StoreConfig::in_directory(dir.path());
        auto store = init_store(dir.path());
        RawDb db(config.database);
        std::mt19937_64 rng(1000 + seq);
        for (std::size_t op = 0; op < store_ops_per_sequence; ++op) {
            random_operation(store, rng, stats);
            auto problem = integrity_problem(db, config.media_dir);
            out.require(problem.empty(), fmt("sequence %zu op %zu: ", seq, op) + problem);
            if (!out.passed)
                break;
        }
    }
    if (out.passed)
        out.detail = fmt("%zu ops (%zu applied, %zu rejected)", stats.applied + stats.rejected, stats.applied,
                         stats.rejected);
    return out;
}

// --- 9 ------------------------------------------------------------------------

Outcome homophenes()
{
    Outcome out;
    const auto& lex = testing_support::reference_lexicon();
    out.require(are_homophenous("fan", "van", lex), "fan/van");
    const char* group[] = {"Pat", "Mat", "Bat"};
    for (auto a : group)
        for (auto b : group)
            out.require(are_homophenous(a, b, lex), std::string(a) + "/" + b);
    out.require(!are_homophenous("bat", "sun", lex), "bat/sun");
    if (out.passed)
        out.detail = "fan~van, Pat~Mat~Bat, bat!~sun";
    return out;
}

// --- 10 -----------------------------------------------------------------------

Outcome spt_bounds()
{
    Outcome out;
    std::vector<std::string> words;
    for (int i = 1; i <= 40; ++i)
        words.push_back("word" + std::to_string(i));
    auto key = metrics::make_spt_key(words);

    auto sheet_with = [&](std::size_t correct) {
        metrics::SptResponses r;
        for (std::size_t i = 1; i <= 40; ++i)
            r[i] = i <= correct ? key.words[i - 1] : "miss";
        return r;
    };
    auto low = metrics::spt_score(sheet_with(6), key);
    auto high = metrics::spt_score(sheet_with(40), key);
    out.require(low == 15.0, fmt("6 correct scores %.2f", low));
    out.require(high == 100.0, fmt("40 correct scores %.2f", high));

    auto on_grid = [](double s) { return std::fmod(s, spt_step) == 0.0 && s >= 0.0 && s <= 100.0; };
    for (std::size_t c = 0; c <= 40; ++c)
        out.require(on_grid(metrics::spt_score(sheet_with(c), key)), fmt("%zu correct off grid", c));
    std::mt19937_64 rng(40);
    for (int n = 0; n < 1000; ++n) {
        metrics::SptResponses r;
        for (std::size_t i = 1; i <= 45; ++i)
            if (rng() % 3 != 0)
                r[i] = rng() % 2 == 0 ? words[(i - 1) % 40] : "other";
        out.require(on_grid(metrics::spt_score(r, key)), "random sheet off grid");
    }
    if (out.passed)
        out.detail = fmt("extremes %.0f%% and %.0f%%, 1041 sheets on the 2.5 grid", low, high);
    return out;
}

} // namespace

int main()
{
    using std::chrono::milliseconds;
    const std::vector<Criterion> criteria = {
        {1, "viseme table fidelity", milliseconds(1000), viseme_partition},
        {2, "display-set derivation", milliseconds(1000), display_set_derivation},
        {3, "layout constraints", milliseconds(1000), layout_constraints},
        {4, "F1 replication", milliseconds(5000), f1_replication},
        {5, "Levenshtein oracle equivalence", milliseconds(30000), levenshtein_oracle},
        {6, "session-generation soundness", milliseconds(60000), session_soundness},
        {7, "session summary replication", milliseconds(1000), summary_replication},
        {8, "store integrity", milliseconds(60000), store_integrity},
        {9, "homophene fixtures", milliseconds(1000), homophenes},
        {10, "SPT scoring bounds", milliseconds(1000), spt_bounds},
    };

    testing_support::reference_lexicon();

    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        auto elapsed = std::chrono::duration_cast<milliseconds>(std::chrono::steady_clock::now() - start);
        if (outcome.passed && elapsed > c.budget) {
            outcome.passed = false;
            outcome.detail += fmt("; over the %lld ms budget", static_cast<long long>(c.budget.count()));
        }
        failures += outcome.passed ? 0 : 1;
        std::printf("criterion %d: %s  %.*s (%s) [%lld ms]\n", c.number, outcome.passed ? "PASS" : "FAIL",
                    static_cast<int>(c.title.size()), c.title.data(), outcome.detail.c_str(),
                    static_cast<long long>(elapsed.count()));
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
