#pragma once

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "speechread/error.hpp"
#include "speechread/lexicon.hpp"
#include "speechread/metrics.hpp"
#include "speechread/overlay.hpp"
#include "speechread/practice.hpp"
#include "speechread/session_csv.hpp"
#include "speechread/store.hpp"

namespace speechread::service {

using json = nlohmann::json;

struct ServiceConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    fs::path store = "speechread-library";
    fs::path lexicon; // empty: use the store's lexicon.dict
    std::size_t max_upload_bytes = 100u * 1024u * 1024u;
    std::chrono::seconds session_idle{3600};
    bool log_requests = true;
};

/// Reads an optional JSON config file, then applies SPEECHREAD_* environment
/// overrides (BIND, PORT, STORE, LEXICON, MAX_UPLOAD_MB, SESSION_IDLE_SECONDS).
inline ServiceConfig load_config(const std::optional<fs::path>& file,
                                 const std::function<const char*(const char*)>& getenv = ::getenv)
{
    ServiceConfig cfg;
    if (file) {
        std::ifstream in(*file);
        if (!in)
            throw Error(ErrorCode::io_failure, "cannot read config file '" + file->string() + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::parse_error, std::string("config file: ") + e.what());
        }
        cfg.bind = j.value("bind", cfg.bind);
        cfg.port = j.value("port", cfg.port);
        cfg.store = j.value("store", cfg.store.string());
        cfg.lexicon = j.value("lexicon", cfg.lexicon.string());
        cfg.max_upload_bytes = j.value("max_upload_mb", cfg.max_upload_bytes / (1024u * 1024u)) * 1024u * 1024u;
        cfg.session_idle = std::chrono::seconds(j.value("session_idle_seconds", cfg.session_idle.count()));
        cfg.log_requests = j.value("log_requests", cfg.log_requests);
    }
    auto env = [&](const char* name) -> std::optional<std::string> {
        const char* v = getenv(name);
        return v && *v ? std::optional<std::string>(v) : std::nullopt;
    };
    try {
        if (auto v = env("SPEECHREAD_BIND"))
            cfg.bind = *v;
        if (auto v = env("SPEECHREAD_PORT"))
            cfg.port = std::stoi(*v);
        if (auto v = env("SPEECHREAD_STORE"))
            cfg.store = *v;
        if (auto v = env("SPEECHREAD_LEXICON"))
            cfg.lexicon = *v;
        if (auto v = env("SPEECHREAD_MAX_UPLOAD_MB"))
            cfg.max_upload_bytes = std::stoull(*v) * 1024u * 1024u;
        if (auto v = env("SPEECHREAD_SESSION_IDLE_SECONDS"))
            cfg.session_idle = std::chrono::seconds(std::stoll(*v));
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::parse_error, "bad numeric value in SPEECHREAD_* environment");
    }
    return cfg;
}

inline int http_status(ErrorCode code)
{
    switch (code) {
    case ErrorCode::missing_lipshape:
    case ErrorCode::missing_word:
    case ErrorCode::missing_speaker:
    case ErrorCode::missing_video:
    case ErrorCode::missing_session:
    case ErrorCode::unknown_word:
        return 404;
    case ErrorCode::consent_incomplete:
    case ErrorCode::duplicate_word:
    case ErrorCode::duplicate_lipshape:
    case ErrorCode::already_answered:
    case ErrorCode::incomplete_session:
        return 409;
    case ErrorCode::validation_failed:
    case ErrorCode::no_videos_for_word:
    case ErrorCode::speaker_mismatch:
        return 422;
    case ErrorCode::insufficient_videos:
    case ErrorCode::insufficient_distractors:
        return 507;
    case ErrorCode::payload_too_large:
        return 413;
    case ErrorCode::io_failure:
    case ErrorCode::corrupt_store:
        return 500;
    default:
        return 400;
    }
}

inline json error_body(ErrorCode code, const std::string& message, const std::vector<std::string>& details = {})
{
    json j{{"code", to_string(code)}, {"message", message}};
    if (!details.empty())
        j["details"] = details;
    return j;
}

// --- JSON shapes ---------------------------------------------------------------

inline json to_json(const LipshapeRecord& l)
{
    json phonemes = json::array();
    for (auto p : l.shape.members())
        phonemes.push_back(p.symbol());
    return {{"id", l.id.value}, {"name", l.shape.name()}, {"phonemes", phonemes}, {"word_count", l.word_count}};
}

inline json to_json(const WordEntry& w)
{
    return {{"id", w.id.value}, {"text", w.text}, {"lipshape_id", w.lipshape.value}, {"video_count", w.video_count}};
}

inline json to_json(const Speaker& s)
{
    return {{"id", s.id.value},
            {"first_name", s.first_name},
            {"last_name", s.last_name},
            {"video_count", s.video_count},
            {"created_at", format_timestamp(s.created_at)},
            {"consent",
             {{"informed_about_project", s.consent.informed_about_project},
              {"data_use", s.consent.data_use},
              {"video_use", s.consent.video_use},
              {"granted_at", format_timestamp(s.consent.granted_at)}}}};
}

inline json to_json(const VideoRecord& v)
{
    return {{"id", v.id.value},         {"word_id", v.word.value},       {"lipshape_id", v.lipshape.value},
            {"speaker_id", v.speaker.value}, {"has_audio", v.has_audio}, {"recorded_at", format_timestamp(v.recorded_at)}};
}

inline json to_json(const Trial& t)
{
    return {{"video_id", t.video.value},
            {"correct_word", t.correct_word},
            {"chosen_word", t.chosen_word},
            {"correct", t.correct},
            {"answered_at", format_timestamp(t.answered_at)}};
}

inline json to_json(const SessionRecord& r)
{
    json trials = json::array();
    for (const auto& t : r.trials)
        trials.push_back(to_json(t));
    return {{"id", r.id.value},           {"date", format_timestamp(r.date)}, {"speakers", r.speakers},
            {"lipshapes", r.lipshapes},   {"audio", r.audio ? "on" : "off"}, {"trials", trials},
            {"n_correct", r.n_correct},   {"n_incorrect", r.n_incorrect}};
}

inline json to_json(const overlay::OverlayLayout& layout)
{
    json slots = json::array();
    for (const auto& s : layout.slots)
        slots.push_back({{"index", s.index},
                         {"angle", s.angle_deg},
                         {"symbol", s.symbol.label},
                         {"viseme", to_string(s.symbol.viseme)}});
    return {{"slots", slots},
            {"anchor", {{"x", layout.anchor.x}, {"y", layout.anchor.y}}},
            {"radius", layout.radius},
            {"side", layout.side == overlay::Side::left ? "left" : "right"}};
}

inline json to_json(const metrics::ScoreReport& r)
{
    return {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
            {"tp", r.tp},               {"fp", r.fp},         {"fn", r.fn},
            {"tn", r.tn}};
}

inline json to_json(const metrics::ErrorReport& r)
{
    json j{{"word_error", r.word_error},
           {"char_error", r.char_error},
           {"normalized_char_error", r.normalized_char_error},
           {"initial_phoneme_correct", r.initial_phoneme_correct ? json(*r.initial_phoneme_correct) : json(nullptr)}};
    if (!r.initial_phoneme_note.empty())
        j["initial_phoneme_note"] = r.initial_phoneme_note;
    return j;
}

/// Quiz sessions held in memory between planning and finishing. Entries idle
/// longer than the configured limit are dropped.
class SessionRegistry {
public:
    explicit SessionRegistry(std::chrono::seconds idle) : idle_(idle) {}

    std::int64_t create(practice::SessionPlan plan)
    {
        std::lock_guard lock(mutex_);
        sweep();
        auto id = next_++;
        sessions_.emplace(id, Entry{practice::LipshapeSession(std::move(plan)), Clock::now()});
        return id;
    }

    /// Runs `fn` on the session under the registry lock.
    template <class Fn>
    auto with(std::int64_t id, Fn&& fn)
    {
        std::lock_guard lock(mutex_);
        sweep();
        auto it = sessions_.find(id);
        if (it == sessions_.end())
            throw Error(ErrorCode::missing_session, "no active session " + std::to_string(id));
        it->second.last_used = Clock::now();
        return fn(it->second.session);
    }

    void erase(std::int64_t id)
    {
        std::lock_guard lock(mutex_);
        sessions_.erase(id);
    }

    std::size_t size()
    {
        std::lock_guard lock(mutex_);
        sweep();
        return sessions_.size();
    }

private:
    using Clock = std::chrono::steady_clock;

    struct Entry {
        practice::LipshapeSession session;
        Clock::time_point last_used;
    };

    void sweep()
    {
        auto cutoff = Clock::now() - idle_;
        std::erase_if(sessions_, [&](const auto& kv) { return kv.second.last_used < cutoff; });
    }

    std::chrono::seconds idle_;
    std::mutex mutex_;
    std::map<std::int64_t, Entry> sessions_;
    std::int64_t next_ = 1;
};

/// HTTP/JSON facade. Each route delegates to one library, practice, overlay
/// or metrics operation; all persistence goes through the store.
class Service {
public:
    Service(LibraryStore& store, std::shared_ptr<const Lexicon> lexicon, ServiceConfig config = {})
        : store_(store), lexicon_(std::move(lexicon)), config_(std::move(config)), sessions_(config_.session_idle)
    {
        server_.set_payload_max_length(config_.max_upload_bytes);
        if (config_.log_requests)
            server_.set_logger([](const httplib::Request& req, const httplib::Response& res) {
                json line{{"ts", format_timestamp(now())}, {"method", req.method}, {"path", req.path},
                          {"status", res.status}, {"remote", req.remote_addr}};
                std::cout << line.dump() << std::endl;
            });
        routes();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    bool listen() { return server_.listen(config_.bind, config_.port); }

    int bind_to_any_port(const std::string& host = "127.0.0.1") { return server_.bind_to_any_port(host); }
    bool listen_after_bind() { return server_.listen_after_bind(); }
    void wait_until_ready() { server_.wait_until_ready(); }
    void stop() { server_.stop(); }

    SessionRegistry& sessions() noexcept { return sessions_; }

private:
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    static void reply(httplib::Response& res, int status, const json& body)
    {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static Handler guard(Handler fn)
    {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                reply(res, http_status(e.code()), error_body(e.code(), e.what(), e.details()));
            } catch (const json::exception& e) {
                reply(res, 400, error_body(ErrorCode::malformed_request, e.what()));
            } catch (const std::exception& e) {
                reply(res, 500, error_body(ErrorCode::io_failure, e.what()));
            }
        };
    }

    static json body(const httplib::Request& req)
    {
        if (req.body.empty())
            return json::object();
        auto j = json::parse(req.body);
        if (!j.is_object())
            throw Error(ErrorCode::malformed_request, "request body must be a JSON object");
        return j;
    }

    static std::int64_t path_id(const httplib::Request& req, std::size_t group = 1)
    {
        return std::stoll(req.matches[static_cast<int>(group)].str());
    }

    static std::int64_t as_id(const json& v, const char* what)
    {
        if (v.is_number_integer())
            return v.get<std::int64_t>();
        if (v.is_string()) {
            const auto& s = v.get_ref<const std::string&>();
            if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
                return std::stoll(s);
        }
        throw Error(ErrorCode::malformed_request, std::string(what) + " must be an id");
    }

    static const json& require(const json& j, const char* key)
    {
        auto it = j.find(key);
        if (it == j.end() || it->is_null())
            throw Error(ErrorCode::malformed_request, std::string("missing field '") + key + "'");
        return *it;
    }

    static bool is_all(const json& v) { return v.is_null() || (v.is_string() && text::iequals(v.get<std::string>(), "ALL")); }

    LipshapeId resolve_lipshape(const json& v) const
    {
        if (v.is_string() && !std::all_of(v.get_ref<const std::string&>().begin(), v.get_ref<const std::string&>().end(),
                                          [](unsigned char c) { return std::isdigit(c); })) {
            auto rec = store_.find_lipshape(v.get<std::string>());
            if (!rec)
                throw Error(ErrorCode::missing_lipshape, "no lipshape named '" + v.get<std::string>() + "'");
            return rec->id;
        }
        LipshapeId id{as_id(v, "lipshape")};
        store_.lipshape(id);
        return id;
    }

    std::optional<SpeakerId> resolve_speaker(const json& v) const
    {
        if (is_all(v))
            return std::nullopt;
        SpeakerId id{as_id(v, "speaker")};
        store_.speaker(id);
        return id;
    }

    static bool flag(const std::string& v) { return v == "1" || text::iequals(v, "true") || text::iequals(v, "on") || text::iequals(v, "yes"); }

    void routes()
    {
        auto& s = server_;

        // library
        s.Get("/lipshapes", guard([this](const auto&, auto& res) {
                  json out = json::array();
                  for (const auto& l : store_.lipshapes())
                      out.push_back(to_json(l));
                  reply(res, 200, out);
              }));
        s.Post("/lipshapes", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   auto name = require(j, "name").template get<std::string>();
                   auto shape = Lipshape::from_name(name);
                   if (j.contains("phonemes")) {
                       std::set<Phoneme> members;
                       for (const auto& p : j["phonemes"])
                           members.insert(Phoneme::parse(text::to_upper(p.template get<std::string>())));
                       shape = Lipshape(name, std::move(members));
                   }
                   auto id = store_.add_lipshape(shape);
                   reply(res, 201, to_json(store_.lipshape(id)));
               }));
        s.Get(R"(/lipshapes/(\d+)/words)", guard([this](const auto& req, auto& res) {
                  LipshapeId id{path_id(req)};
                  store_.lipshape(id);
                  json out = json::array();
                  for (const auto& w : store_.words(id))
                      out.push_back(to_json(w));
                  reply(res, 200, out);
              }));
        s.Post(R"(/lipshapes/(\d+)/words)", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   auto id = store_.add_word(LipshapeId{path_id(req)}, require(j, "text").template get<std::string>(),
                                             *lexicon_);
                   reply(res, 201, to_json(store_.word(id)));
               }));
        s.Post("/words", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   auto lipshape = resolve_lipshape(require(j, "lipshape"));
                   auto id = store_.add_word(lipshape, require(j, "text").template get<std::string>(), *lexicon_);
                   reply(res, 201, to_json(store_.word(id)));
               }));
        s.Get("/words", guard([this](const auto&, auto& res) {
                  json out = json::array();
                  for (const auto& w : store_.words())
                      out.push_back(to_json(w));
                  reply(res, 200, out);
              }));
        s.Delete(R"(/words/(\d+))", guard([this](const auto& req, auto& res) {
                     auto summary = store_.delete_word(WordId{path_id(req)});
                     reply(res, 200, {{"videos_deleted", summary.videos_deleted}});
                 }));

        // speakers
        s.Get("/speakers", guard([this](const auto&, auto& res) {
                  json out = json::array();
                  for (const auto& sp : store_.speakers())
                      out.push_back(to_json(sp));
                  reply(res, 200, out);
              }));
        s.Get(R"(/speakers/(\d+))", guard([this](const auto& req, auto& res) {
                  reply(res, 200, to_json(store_.speaker(SpeakerId{path_id(req)})));
              }));
        s.Post("/speakers", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   ConsentRecord consent;
                   if (auto it = j.find("consent"); it != j.end() && it->is_object()) {
                       consent.informed_about_project = it->value("informed_about_project", false);
                       consent.data_use = it->value("data_use", false);
                       consent.video_use = it->value("video_use", false);
                   }
                   consent.granted_at = now();
                   auto id = store_.add_speaker(require(j, "first_name").template get<std::string>(),
                                                j.value("last_name", std::string()), consent);
                   reply(res, 201, to_json(store_.speaker(id)));
               }));
        s.Delete(R"(/speakers/(\d+))", guard([this](const auto& req, auto& res) {
                     auto summary = store_.delete_speaker(SpeakerId{path_id(req)});
                     reply(res, 200, {{"videos_deleted", summary.videos_deleted}});
                 }));
        s.Get(R"(/speakers/(\d+)/confusion)", guard([this](const auto& req, auto& res) {
                  SpeakerId id{path_id(req)};
                  store_.speaker(id);
                  auto view = store_.snapshot();
                  std::vector<Trial> trials;
                  for (const auto& rec : store_.sessions())
                      for (const auto& t : rec.trials)
                          if (const auto* v = view.video(t.video); v && v->speaker == id)
                              trials.push_back(t);
                  auto report = practice::confusion_report(trials, id, view);
                  json counts = json::array();
                  for (const auto& [key, n] : report.counts)
                      counts.push_back({{"correct_word", key.first}, {"chosen_word", key.second}, {"count", n}});
                  json words = json::object(), shapes = json::object();
                  for (const auto& [w, a] : report.per_word)
                      words[w] = {{"correct", a.correct}, {"total", a.total}, {"accuracy", a.ratio()}};
                  for (const auto& [l, a] : report.per_lipshape)
                      shapes[l] = {{"correct", a.correct}, {"total", a.total}, {"accuracy", a.ratio()}};
                  reply(res, 200, {{"speaker_id", id.value}, {"counts", counts}, {"per_word", words},
                                   {"per_lipshape", shapes}});
              }));

        // videos
        s.Post("/videos", guard([this](const httplib::Request& req, auto& res) {
                   if (!req.is_multipart_form_data())
                       throw Error(ErrorCode::malformed_request, "POST /videos expects multipart/form-data");
                   auto field = [&](const char* name) -> std::optional<std::string> {
                       if (!req.has_file(name))
                           return std::nullopt;
                       return req.get_file_value(name).content;
                   };
                   auto speaker = field("speaker");
                   auto word = field("word");
                   if (!speaker || !word || !req.has_file("media"))
                       throw Error(ErrorCode::malformed_request, "fields 'speaker', 'word' and 'media' are required");
                   auto media = req.get_file_value("media");
                   std::string format = field("format").value_or("");
                   if (format.empty()) {
                       auto dot = media.filename.rfind('.');
                       format = dot == std::string::npos ? "mp4" : media.filename.substr(dot + 1);
                   }
                   auto id = store_.add_video(SpeakerId{as_id(json(*speaker), "speaker")},
                                              WordId{as_id(json(*word), "word")}, media.content,
                                              flag(field("has_audio").value_or("false")), format);
                   reply(res, 201, to_json(store_.video(id)));
               }));
        s.Get("/videos", guard([this](const httplib::Request& req, auto& res) {
                  VideoFilter filter;
                  if (req.has_param("word"))
                      filter.word = WordId{as_id(json(req.get_param_value("word")), "word")};
                  if (req.has_param("speaker"))
                      filter.speaker = SpeakerId{as_id(json(req.get_param_value("speaker")), "speaker")};
                  if (req.has_param("lipshape"))
                      filter.lipshape = resolve_lipshape(json(req.get_param_value("lipshape")));
                  json out = json::array();
                  for (const auto& v : store_.videos(filter))
                      out.push_back(to_json(v));
                  reply(res, 200, out);
              }));
        s.Get(R"(/videos/(\d+))", guard([this](const auto& req, auto& res) {
                  reply(res, 200, to_json(store_.video(VideoId{path_id(req)})));
              }));
        s.Get(R"(/videos/(\d+)/media)", guard([this](const auto& req, auto& res) {
                  auto bytes = store_.read_media(VideoId{path_id(req)});
                  res.status = 200;
                  res.set_content(bytes, "application/octet-stream");
              }));
        s.Patch(R"(/videos/(\d+))", guard([this](const auto& req, auto& res) {
                    auto j = body(req);
                    std::optional<WordId> word;
                    std::optional<SpeakerId> speaker;
                    if (j.contains("word"))
                        word = WordId{as_id(j["word"], "word")};
                    if (j.contains("speaker"))
                        speaker = SpeakerId{as_id(j["speaker"], "speaker")};
                    reply(res, 200, to_json(store_.edit_video(VideoId{path_id(req)}, word, speaker)));
                }));
        s.Delete(R"(/videos/(\d+))", guard([this](const auto& req, auto& res) {
                     VideoId id{path_id(req)};
                     store_.delete_video(id);
                     reply(res, 200, {{"deleted", id.value}});
                 }));

        // practice
        s.Post("/sessions/lipshape", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   practice::PracticeConfig cfg;
                   cfg.mode = practice::Mode::lipshape;
                   auto ls = j.value("lipshape", json("ALL"));
                   if (!is_all(ls))
                       cfg.lipshape = resolve_lipshape(ls);
                   cfg.speaker = resolve_speaker(j.value("speaker", json("ALL")));
                   cfg.audio = j.value("audio", false);
                   cfg.trial_count = j.value("trials", practice::max_trials);
                   std::uint64_t seed = j.contains("seed") ? j["seed"].template get<std::uint64_t>()
                                                           : std::random_device{}();
                   auto plan = practice::plan_lipshape_session(cfg, store_.snapshot(), seed);
                   json trials = json::array();
                   for (std::size_t i = 0; i < plan.trials.size(); ++i)
                       trials.push_back({{"index", i}, {"video_id", plan.trials[i].video.value},
                                         {"choices", plan.trials[i].choices}});
                   json out{{"speakers", plan.speakers_label}, {"lipshapes", plan.lipshapes_label},
                            {"audio", plan.config.audio}, {"trials", trials}};
                   out["session"] = sessions_.create(std::move(plan));
                   reply(res, 201, out);
               }));
        s.Post(R"(/sessions/(\d+)/answers)", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   auto index = require(j, "index").template get<std::int64_t>();
                   auto choice = require(j, "choice").template get<std::string>();
                   if (index < 0)
                       throw Error(ErrorCode::invalid_index, "trial index must be non-negative");
                   auto trial = sessions_.with(path_id(req), [&](practice::LipshapeSession& session) {
                       return session.answer(static_cast<std::size_t>(index), choice);
                   });
                   auto out = to_json(trial);
                   out["index"] = index;
                   out["result"] = trial.correct ? "correct" : "incorrect";
                   reply(res, 200, out);
               }));
        s.Post(R"(/sessions/(\d+)/finish)", guard([this](const auto& req, auto& res) {
                   auto sid = path_id(req);
                   auto record = sessions_.with(sid, [](practice::LipshapeSession& session) { return session.finish(); });
                   record = store_.save_session(std::move(record));
                   sessions_.erase(sid);
                   reply(res, 201, to_json(record));
               }));
        s.Get("/sessions", guard([this](const httplib::Request& req, auto& res) {
                  auto records = store_.sessions();
                  if (req.get_param_value("format") == "csv") {
                      res.status = 200;
                      res.set_content(csv::export_sessions(records), "text/csv");
                      return;
                  }
                  auto summary = practice::summarize_sessions(records);
                  json rows = json::array();
                  for (const auto& r : summary.rows)
                      rows.push_back({{"id", r.id.value},          {"date", format_timestamp(r.date)},
                                      {"speakers", r.speakers},   {"lipshapes", r.lipshapes},
                                      {"audio", r.audio ? "on" : "off"}, {"result", r.result()},
                                      {"n_trials", r.n_trials},   {"n_correct", r.n_correct},
                                      {"n_incorrect", r.n_incorrect}});
                  reply(res, 200, {{"rows", rows},
                                   {"totals",
                                    {{"n_sessions", summary.totals.n_sessions},
                                     {"n_trials", summary.totals.n_trials},
                                     {"n_correct", summary.totals.n_correct},
                                     {"n_incorrect", summary.totals.n_incorrect}}}});
              }));
        s.Post("/sessions/word", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   practice::PracticeConfig cfg;
                   cfg.mode = practice::Mode::word;
                   cfg.word = WordId{as_id(require(j, "word"), "word")};
                   cfg.speaker = resolve_speaker(j.value("speaker", json("ALL")));
                   cfg.audio = j.value("audio", false);
                   auto playlist = practice::plan_word_session(cfg, store_.snapshot());
                   json ids = json::array();
                   for (auto v : playlist.videos)
                       ids.push_back(v.value);
                   reply(res, 200, {{"word", playlist.word.value}, {"audio", playlist.audio}, {"videos", ids}});
               }));

        // overlay
        s.Get("/overlay/layout", guard([](const httplib::Request& req, auto& res) {
                  auto side = req.get_param_value("side") == "right" ? overlay::Side::right : overlay::Side::left;
                  reply(res, 200, to_json(overlay::default_layout(side)));
              }));
        s.Post("/overlay/render", guard([](const auto& req, auto& res) {
                   auto j = body(req);
                   auto events = overlay::parse_transcript(require(j, "transcript").template get<std::string>());
                   const auto& box = require(j, "face_box");
                   overlay::Rect face{box.value("x", 0.0), box.value("y", 0.0), box.value("width", 0.0),
                                      box.value("height", 0.0)};
                   auto side = j.value("side", std::string("left")) == "right" ? overlay::Side::right
                                                                               : overlay::Side::left;
                   auto layout = overlay::default_layout(side);
                   std::vector<overlay::RenderedFrame> frames;
                   if (j.contains("times_ms")) {
                       auto times = j["times_ms"].template get<std::vector<std::int64_t>>();
                       frames = overlay::render_at(layout, events, times, face);
                   } else {
                       frames = overlay::render_events(layout, events, face);
                   }
                   json docs = json::array();
                   for (const auto& f : frames)
                       docs.push_back({{"name", f.name}, {"time_ms", f.time_ms}, {"svg", f.svg}});
                   reply(res, 200, {{"documents", docs}});
               }));

        // metrics
        s.Post("/metrics/f1", guard([](const auto& req, auto& res) {
                   auto j = body(req);
                   metrics::ResponseLog log;
                   for (const auto& t : require(j, "trials"))
                       log.push_back({t.at("is_target").template get<bool>(), t.at("responded").template get<bool>()});
                   auto exclude = j.value("exclude_first", std::size_t{9});
                   reply(res, 200, to_json(metrics::f1_score(log, exclude)));
               }));
        s.Post("/metrics/spt", guard([](const auto& req, auto& res) {
                   auto j = body(req);
                   auto key = metrics::make_spt_key(require(j, "key").template get<std::vector<std::string>>());
                   metrics::SptResponses responses;
                   auto given = j.value("responses", json::object());
                   for (const auto& [k, v] : given.items())
                       responses[std::stoul(k)] = v.template get<std::string>();
                   reply(res, 200, {{"score", metrics::spt_score(responses, key)},
                                    {"correct", metrics::spt_correct(responses, key)},
                                    {"out_of", metrics::spt_words}});
               }));
        s.Post("/metrics/errors", guard([this](const auto& req, auto& res) {
                   auto j = body(req);
                   if (j.contains("pairs")) {
                       std::vector<metrics::SentencePair> pairs;
                       for (const auto& p : j["pairs"])
                           pairs.push_back({p.at("reference").template get<std::string>(),
                                            p.at("hypothesis").template get<std::string>()});
                       auto sum = metrics::corpus_errors(pairs, *lexicon_);
                       reply(res, 200, {{"pairs", sum.pairs},
                                        {"mean_word_error", sum.mean_word_error},
                                        {"mean_normalized_char_error", sum.mean_normalized_char_error},
                                        {"initial_phoneme_accuracy", sum.initial_phoneme_accuracy}});
                       return;
                   }
                   reply(res, 200, to_json(metrics::transcription_errors(require(j, "reference").template get<std::string>(),
                                                                          require(j, "hypothesis").template get<std::string>(),
                                                                          *lexicon_)));
               }));

        s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (!res.body.empty())
                return;
            if (res.status == 413)
                reply(res, 413, error_body(ErrorCode::payload_too_large, "upload exceeds the configured limit"));
            else if (res.status == 404)
                reply(res, 404, error_body(ErrorCode::malformed_request, "no such endpoint"));
        });
    }

    LibraryStore& store_;
    std::shared_ptr<const Lexicon> lexicon_;
    ServiceConfig config_;
    SessionRegistry sessions_;
    httplib::Server server_;
};

} // namespace speechread::service
