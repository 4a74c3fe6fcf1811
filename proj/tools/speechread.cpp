// speechread: headless driver for the speechreading library, practice
// sessions, metrics and overlay rendering.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "replication.hpp"
#include "speechread/lexicon.hpp"
#include "speechread/metrics.hpp"
#include "speechread/overlay.hpp"
#include "speechread/practice.hpp"
#include "speechread/session_csv.hpp"
#include "speechread/simulation.hpp"
#include "speechread/store.hpp"

namespace sr = speechread;
using json = nlohmann::json;

namespace {

enum class Format { csv, json };

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw sr::Error(sr::ErrorCode::io_failure, "cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string cell(const json& v)
{
    if (v.is_string())
        return sr::csv::quote(v.get<std::string>());
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_null())
        return "";
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
        return buf;
    }
    return v.dump();
}

/// Rows of named columns printed as CSV or as a JSON array of objects.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;

    void print(Format format, std::ostream& out) const
    {
        if (format == Format::json) {
            json arr = json::array();
            for (const auto& r : rows) {
                json obj = json::object();
                for (std::size_t i = 0; i < columns.size(); ++i)
                    obj[columns[i]] = r[i];
                arr.push_back(std::move(obj));
            }
            out << arr.dump(2) << "\n";
            return;
        }
        for (std::size_t i = 0; i < columns.size(); ++i)
            out << (i ? "," : "") << columns[i];
        out << "\n";
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i)
                out << (i ? "," : "") << cell(r[i]);
            out << "\n";
        }
    }
};

sr::Lexicon store_lexicon(const sr::LibraryStore& store, const std::string& override_path)
{
    auto path = override_path.empty() ? store.config().lexicon.string() : override_path;
    if (!sr::fs::exists(path))
        throw sr::Error(sr::ErrorCode::io_failure,
                        "no lexicon at '" + path + "'; run `speechread lexicon import <file>` first");
    return sr::load_lexicon(path);
}

bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

sr::LipshapeId resolve_lipshape(const sr::LibraryStore& store, const std::string& ref)
{
    if (all_digits(ref)) {
        sr::LipshapeId id{std::stoll(ref)};
        store.lipshape(id);
        return id;
    }
    auto rec = store.find_lipshape(ref);
    if (!rec)
        throw sr::Error(sr::ErrorCode::missing_lipshape, "no lipshape named '" + ref + "'");
    return rec->id;
}

sr::WordId resolve_word(const sr::LibraryStore& store, const std::string& ref)
{
    if (all_digits(ref)) {
        sr::WordId id{std::stoll(ref)};
        store.word(id);
        return id;
    }
    std::optional<sr::WordId> found;
    for (const auto& w : store.words()) {
        if (!sr::text::iequals(w.text, ref))
            continue;
        if (found)
            throw sr::Error(sr::ErrorCode::malformed_request,
                            "word '" + ref + "' is in several lipshapes; pass its id instead");
        found = w.id;
    }
    if (!found)
        throw sr::Error(sr::ErrorCode::missing_word, "no word '" + ref + "' in the library");
    return *found;
}

bool ask_yes(const std::string& question)
{
    std::cerr << question << " [y/N] " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer))
        return false;
    answer = sr::text::to_lower(sr::text::trim(answer));
    return answer == "y" || answer == "yes";
}

std::string ask(const std::string& question)
{
    std::cerr << question << ": " << std::flush;
    std::string answer;
    std::getline(std::cin, answer);
    return std::string(sr::text::trim(answer));
}

sr::overlay::Rect parse_rect(const std::string& value)
{
    auto parts = sr::text::split(value, ',');
    if (parts.size() != 4)
        throw sr::Error(sr::ErrorCode::invalid_config, "face box must be x,y,width,height");
    try {
        return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3])};
    } catch (const std::logic_error&) {
        throw sr::Error(sr::ErrorCode::invalid_config, "face box must be four numbers");
    }
}

Table session_rows(const sr::practice::SessionSummary& summary)
{
    Table t{{"session_id", "date", "speakers", "lipshapes", "audio", "result", "trials", "correct", "incorrect"}, {}};
    for (const auto& r : summary.rows)
        t.rows.push_back({r.id.value, sr::format_timestamp(r.date), r.speakers, r.lipshapes, r.audio ? "on" : "off",
                          r.result(), r.n_trials, r.n_correct, r.n_incorrect});
    return t;
}

int report_suite(std::string_view name, const sr::replication::SuiteResult& r)
{
    std::cout << name << ": " << (r.passed ? "PASS" : "FAIL") << ", " << r.detail << "\n";
    return r.passed ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Speechreading practice library, metrics and overlay tools"};
    app.require_subcommand(1);

    std::string store_dir = "speechread-library";
    if (const char* env = std::getenv("SPEECHREAD_STORE"); env && *env)
        store_dir = env;
    std::string lexicon_override;
    Format format = Format::csv;
    app.add_option("--store", store_dir, "Library directory (default $SPEECHREAD_STORE or ./speechread-library)");
    app.add_option("--lexicon", lexicon_override, "Pronunciation lexicon to use instead of the store's");
    app.add_option("--format", format, "Output format")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"csv", Format::csv}, {"json", Format::json}}));

    // init
    auto* init = app.add_subcommand("init", "Create an empty library with the default lipshapes");
    std::string init_path, init_lexicon;
    init->add_option("path", init_path, "Library directory")->required();
    init->add_option("--with-lexicon", init_lexicon, "Copy this lexicon into the new library");

    // lexicon import
    auto* lexicon = app.add_subcommand("lexicon", "Pronunciation lexicon")->require_subcommand(1);
    auto* lex_import = lexicon->add_subcommand("import", "Validate a CMU-style dictionary and install it");
    std::string lex_file;
    lex_import->add_option("file", lex_file)->required()->check(CLI::ExistingFile);

    // word add
    auto* word = app.add_subcommand("word", "Library words")->require_subcommand(1);
    auto* word_add = word->add_subcommand("add", "Add a word to a lipshape");
    std::string word_lipshape, word_text;
    word_add->add_option("lipshape", word_lipshape, "Lipshape name (e.g. P/B/M) or id")->required();
    word_add->add_option("word", word_text)->required();
    auto* word_list = word->add_subcommand("list", "List words");

    // speaker add
    auto* speaker = app.add_subcommand("speaker", "Speakers")->require_subcommand(1);
    auto* speaker_add = speaker->add_subcommand("add", "Add a speaker after asking for consent");
    std::string first_name, last_name;
    speaker_add->add_option("--first", first_name);
    speaker_add->add_option("--last", last_name);
    auto* speaker_list = speaker->add_subcommand("list", "List speakers");

    // video add
    auto* video = app.add_subcommand("video", "Videos")->require_subcommand(1);
    auto* video_add = video->add_subcommand("add", "Store a recording of a word");
    std::string video_speaker, video_word, video_file;
    bool video_audio = false;
    video_add->add_option("speaker", video_speaker, "Speaker id")->required();
    video_add->add_option("word", video_word, "Word id or text")->required();
    video_add->add_option("file", video_file)->required()->check(CLI::ExistingFile);
    video_add->add_flag("--audio", video_audio, "The clip has a usable audio track");

    // session simulate
    auto* session = app.add_subcommand("session", "Practice sessions")->require_subcommand(1);
    auto* simulate = session->add_subcommand("simulate", "Run a lipshape quiz with a simulated responder");
    std::string sim_lipshape = "ALL", sim_at;
    std::optional<std::int64_t> sim_speaker;
    int sim_trials = sr::practice::max_trials;
    std::uint64_t sim_seed = 0;
    std::vector<std::string> sim_oracle{"perfect"};
    bool sim_audio = false, sim_no_save = false;
    simulate->add_option("--lipshape", sim_lipshape, "Lipshape name or ALL");
    simulate->add_option("--speaker", sim_speaker, "Speaker id (default all speakers)");
    simulate->add_option("--trials", sim_trials);
    simulate->add_option("--seed", sim_seed);
    simulate->add_option("--oracle", sim_oracle, "perfect | random | confuse-matrix <file>")->expected(1, 2);
    simulate->add_option("--at", sim_at, "Timestamp to record (YYYY-MM-DD HH:MM:SS, default now)");
    simulate->add_flag("--audio", sim_audio);
    simulate->add_flag("--no-save", sim_no_save, "Do not store the session");

    // stats
    auto* stats = app.add_subcommand("stats", "Per-session results and totals");
    std::string stats_log;
    stats->add_option("--log", stats_log, "Summarize an exported session log instead of the store")
        ->check(CLI::ExistingFile);

    // metrics
    auto* f1 = app.add_subcommand("f1", "Precision, recall and F1 of a detection response log");
    std::string f1_log;
    std::size_t f1_exclude = sr::replication::warmup_trials;
    f1->add_option("--log", f1_log)->required()->check(CLI::ExistingFile);
    f1->add_option("--exclude", f1_exclude, "Leading trials to skip");

    auto* spt = app.add_subcommand("spt", "Score a 40-word proficiency test");
    std::string spt_key, spt_responses;
    spt->add_option("--key", spt_key)->required()->check(CLI::ExistingFile);
    spt->add_option("--responses", spt_responses)->required()->check(CLI::ExistingFile);

    auto* errors = app.add_subcommand("errors", "Word and character error of sentence transcriptions");
    std::string errors_corpus;
    errors->add_option("--corpus", errors_corpus)->required()->check(CLI::ExistingFile);

    // overlay render
    auto* overlay_cmd = app.add_subcommand("overlay", "Consonant overlay")->require_subcommand(1);
    auto* render = overlay_cmd->add_subcommand("render", "Write one SVG per transcript event");
    std::string ov_transcript, ov_out, ov_face = "0,0,640,480", ov_side = "left";
    std::vector<std::int64_t> ov_at;
    render->add_option("--transcript", ov_transcript)->required()->check(CLI::ExistingFile);
    render->add_option("--out", ov_out)->required();
    render->add_option("--at", ov_at, "Render at these times (ms) instead of once per event");
    render->add_option("--face", ov_face, "Face box x,y,width,height in pixels");
    render->add_option("--side", ov_side)->check(CLI::IsMember({"left", "right"}));

    // replicate
    auto* replicate = app.add_subcommand("replicate", "Run a fixture suite and print PASS or FAIL");
    std::string suite;
    replicate->add_option("--suite", suite)->required()->check(CLI::IsMember({"viseme-table", "f1", "summary"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    auto& out = std::cout;
    try {
        if (init->parsed()) {
            auto store = sr::init_store(init_path);
            if (!init_lexicon.empty()) {
                auto lex = sr::load_lexicon(init_lexicon);
                sr::fs::copy_file(init_lexicon, store.config().lexicon, sr::fs::copy_options::overwrite_existing);
                out << "lexicon: " << lex.size() << " words\n";
            }
            out << "initialized " << init_path << " with " << store.lipshapes().size() << " lipshapes\n";
            return 0;
        }
        if (replicate->parsed()) {
            if (suite == "viseme-table")
                return report_suite(suite, sr::replication::viseme_table_suite());
            if (suite == "f1")
                return report_suite(suite, sr::replication::f1_suite());
            return report_suite(suite, sr::replication::summary_suite());
        }
        if (f1->parsed()) {
            auto r = sr::metrics::f1_score(sr::metrics::parse_response_log(read_file(f1_log)), f1_exclude);
            Table{{"precision", "recall", "f1", "tp", "fp", "fn", "tn"},
                  {{r.precision, r.recall, r.f1, r.tp, r.fp, r.fn, r.tn}}}
                .print(format, out);
            return 0;
        }
        if (spt->parsed()) {
            auto key = sr::metrics::parse_spt_key(read_file(spt_key));
            auto responses = sr::metrics::parse_spt_responses(read_file(spt_responses));
            char score[16];
            std::snprintf(score, sizeof score, "%.1f", sr::metrics::spt_score(responses, key));
            Table{{"correct", "out_of", "score_percent"},
                  {{sr::metrics::spt_correct(responses, key), sr::metrics::spt_words, json::parse(score)}}}
                .print(format, out);
            return 0;
        }
        if (render->parsed()) {
            auto events = sr::overlay::parse_transcript(read_file(ov_transcript));
            auto layout = sr::overlay::default_layout(ov_side == "right" ? sr::overlay::Side::right
                                                                           : sr::overlay::Side::left);
            auto face = parse_rect(ov_face);
            auto frames = ov_at.empty() ? sr::overlay::render_events(layout, events, face)
                                        : sr::overlay::render_at(layout, events, ov_at, face);
            sr::fs::create_directories(ov_out);
            Table t{{"file", "time_ms"}, {}};
            for (const auto& f : frames) {
                auto path = sr::fs::path(ov_out) / f.name;
                std::ofstream file(path, std::ios::binary);
                if (!(file << f.svg))
                    throw sr::Error(sr::ErrorCode::io_failure, "cannot write '" + path.string() + "'");
                t.rows.push_back({path.string(), f.time_ms});
            }
            t.print(format, out);
            return 0;
        }
        if (stats->parsed() && !stats_log.empty()) {
            auto records = sr::csv::import_sessions(read_file(stats_log));
            auto summary = sr::practice::summarize_sessions(records);
            auto t = session_rows(summary);
            t.rows.push_back({"total", "", "", "", "", "", summary.totals.n_trials, summary.totals.n_correct,
                              summary.totals.n_incorrect});
            t.print(format, out);
            std::cerr << summary.totals.n_sessions << (summary.totals.n_sessions == 1 ? " session\n" : " sessions\n");
            return 0;
        }

        // Everything below works on a library directory.
        auto store = sr::LibraryStore(sr::StoreConfig::in_directory(store_dir));

        if (errors->parsed()) {
            auto lex = store_lexicon(store, lexicon_override);
            auto pairs = sr::metrics::parse_corpus(read_file(errors_corpus));
            Table t{{"reference", "hypothesis", "word_error", "char_error", "normalized_char_error",
                     "initial_phoneme_correct"},
                    {}};
            for (const auto& p : pairs) {
                auto r = sr::metrics::transcription_errors(p.reference, p.hypothesis, lex);
                t.rows.push_back({p.reference, p.hypothesis, r.word_error, r.char_error, r.normalized_char_error,
                                  r.initial_phoneme_correct ? json(*r.initial_phoneme_correct) : json(nullptr)});
            }
            auto sum = sr::metrics::corpus_errors(pairs, lex);
            t.print(format, out);
            std::fprintf(stderr, "%zu pairs, mean word error %.3f, initial phoneme accuracy %.3f (%zu)\n", sum.pairs,
                         sum.mean_word_error, sum.initial_phoneme_accuracy, sum.initial_phoneme_matches);
            return 0;
        }
        if (lex_import->parsed()) {
            auto lex = sr::load_lexicon(lex_file);
            sr::fs::copy_file(lex_file, store.config().lexicon, sr::fs::copy_options::overwrite_existing);
            out << "imported " << lex.size() << " words\n";
            return 0;
        }
        if (word_add->parsed()) {
            auto lex = store_lexicon(store, lexicon_override);
            auto id = store.add_word(resolve_lipshape(store, word_lipshape), word_text, lex);
            auto w = store.word(id);
            Table{{"id", "text", "lipshape_id"}, {{w.id.value, w.text, w.lipshape.value}}}.print(format, out);
            return 0;
        }
        if (word_list->parsed()) {
            Table t{{"id", "text", "lipshape", "videos"}, {}};
            auto view = store.snapshot();
            for (const auto& w : view.words)
                t.rows.push_back({w.id.value, w.text, view.lipshape(w.lipshape)->shape.name(), w.video_count});
            t.print(format, out);
            return 0;
        }
        if (speaker_add->parsed()) {
            if (first_name.empty())
                first_name = ask("First name");
            if (last_name.empty())
                last_name = ask("Last name");
            sr::ConsentRecord consent;
            consent.informed_about_project = ask_yes("Has the speaker been informed about the project?");
            consent.data_use = ask_yes("Does the speaker agree to the use of their data?");
            consent.video_use = ask_yes("Does the speaker agree to be recorded on video?");
            consent.granted_at = sr::now();
            auto id = store.add_speaker(first_name, last_name, consent);
            Table{{"id", "name"}, {{id.value, store.speaker(id).full_name()}}}.print(format, out);
            return 0;
        }
        if (speaker_list->parsed()) {
            Table t{{"id", "name", "videos"}, {}};
            for (const auto& s : store.speakers())
                t.rows.push_back({s.id.value, s.full_name(), s.video_count});
            t.print(format, out);
            return 0;
        }
        if (video_add->parsed()) {
            auto ext = sr::fs::path(video_file).extension().string();
            auto id = store.add_video(sr::SpeakerId{std::stoll(video_speaker)}, resolve_word(store, video_word),
                                      read_file(video_file), video_audio, ext.empty() ? "mp4" : ext.substr(1));
            auto v = store.video(id);
            Table{{"id", "word_id", "speaker_id", "file"}, {{v.id.value, v.word.value, v.speaker.value, v.file}}}
                .print(format, out);
            return 0;
        }
        if (simulate->parsed()) {
            const auto& kind = sim_oracle.front();
            sr::simulation::Responder responder;
            if (kind == "perfect" && sim_oracle.size() == 1)
                responder = sr::simulation::perfect_responder();
            else if (kind == "random" && sim_oracle.size() == 1)
                responder = sr::simulation::random_responder();
            else if (kind == "confuse-matrix" && sim_oracle.size() == 2)
                responder = sr::simulation::confusion_responder(
                    sr::simulation::parse_confusion_weights(read_file(sim_oracle[1])));
            else {
                std::cerr << "--oracle expects perfect, random or confuse-matrix <file>\n";
                return 2;
            }
            sr::Timestamp clock = sr::now();
            if (!sim_at.empty()) {
                auto t = sr::parse_timestamp(sim_at);
                if (!t) {
                    std::cerr << "--at expects YYYY-MM-DD HH:MM:SS\n";
                    return 2;
                }
                clock = *t;
            }
            sr::practice::PracticeConfig cfg;
            cfg.mode = sr::practice::Mode::lipshape;
            if (!sr::text::iequals(sim_lipshape, "ALL"))
                cfg.lipshape = resolve_lipshape(store, sim_lipshape);
            if (sim_speaker)
                cfg.speaker = sr::SpeakerId{*sim_speaker};
            cfg.audio = sim_audio;
            cfg.trial_count = sim_trials;
            auto plan = sr::practice::plan_lipshape_session(cfg, store.snapshot(), sim_seed);
            auto record = sr::simulation::simulate_session(plan, responder, sim_seed, clock);
            if (!sim_no_save)
                record = store.save_session(std::move(record));
            std::vector<sr::SessionRecord> one{record};
            if (format == Format::json) {
                json trials = json::array();
                for (const auto& t : record.trials)
                    trials.push_back({{"video_id", t.video.value}, {"correct_word", t.correct_word},
                                      {"chosen_word", t.chosen_word}, {"correct", t.correct}});
                out << json{{"session_id", record.id.value}, {"speakers", record.speakers},
                            {"lipshapes", record.lipshapes}, {"trials", trials},
                            {"correct", record.n_correct}, {"incorrect", record.n_incorrect}}
                           .dump(2)
                    << "\n";
            } else {
                out << sr::csv::export_sessions(one);
            }
            std::cerr << record.n_correct << "/" << record.trials.size() << " correct\n";
            return 0;
        }
        if (stats->parsed()) {
            auto summary = sr::practice::summarize_sessions(store.sessions());
            auto t = session_rows(summary);
            t.rows.push_back({"total", "", "", "", "", "", summary.totals.n_trials, summary.totals.n_correct,
                              summary.totals.n_incorrect});
            t.print(format, out);
            std::cerr << summary.totals.n_sessions << (summary.totals.n_sessions == 1 ? " session\n" : " sessions\n");
            return 0;
        }
    } catch (const sr::Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        for (const auto& d : e.details())
            std::cerr << "  " << d << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
