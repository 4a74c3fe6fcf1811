#pragma once

#include <sqlite3.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "speechread/error.hpp"
#include "speechread/lexicon.hpp"
#include "speechread/library.hpp"

namespace speechread {

namespace fs = std::filesystem;

namespace sql {

struct DbClose {
    void operator()(sqlite3* db) const noexcept { sqlite3_close_v2(db); }
};

struct StmtFinalize {
    void operator()(sqlite3_stmt* s) const noexcept { sqlite3_finalize(s); }
};

inline ErrorCode classify(int rc)
{
    switch (rc & 0xFF) {
    case SQLITE_NOTADB:
    case SQLITE_CORRUPT:
    case SQLITE_FORMAT:
        return ErrorCode::corrupt_store;
    default:
        return ErrorCode::io_failure;
    }
}

inline void check(sqlite3* db, int rc, std::string_view what)
{
    if (rc != SQLITE_OK && rc != SQLITE_DONE && rc != SQLITE_ROW)
        throw Error(classify(rc), std::string(what) + ": " + (db ? sqlite3_errmsg(db) : sqlite3_errstr(rc)));
}

class Statement {
public:
    Statement(sqlite3* db, std::string_view sql) : db_(db)
    {
        sqlite3_stmt* raw = nullptr;
        check(db, sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &raw, nullptr), "prepare");
        stmt_.reset(raw);
    }

    Statement& bind(int idx, std::int64_t v)
    {
        check(db_, sqlite3_bind_int64(stmt_.get(), idx, v), "bind");
        return *this;
    }

    Statement& bind(int idx, std::string_view v)
    {
        check(db_, sqlite3_bind_text(stmt_.get(), idx, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT),
              "bind");
        return *this;
    }

    Statement& bind(int idx, bool v) { return bind(idx, std::int64_t{v ? 1 : 0}); }

    // True while a row is available.
    bool step()
    {
        int rc = sqlite3_step(stmt_.get());
        if (rc == SQLITE_ROW)
            return true;
        check(db_, rc, "step");
        return false;
    }

    void run()
    {
        while (step()) {
        }
    }

    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_.get(), col); }

    std::string str(int col) const
    {
        auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_.get(), col));
        return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_.get(), col))) : std::string();
    }

private:
    sqlite3* db_;
    std::unique_ptr<sqlite3_stmt, StmtFinalize> stmt_;
};

} // namespace sql

/// Locations of the relational store, the private media directory and the
/// lexicon the library validates words against.
struct StoreConfig {
    fs::path database;
    fs::path media_dir;
    fs::path lexicon;

    static StoreConfig in_directory(const fs::path& root)
    {
        return {root / "library.sqlite3", root / "media", root / "lexicon.dict"};
    }
};

struct DeletionSummary {
    std::size_t videos_deleted = 0;
};

struct VideoFilter {
    std::optional<WordId> word;
    std::optional<SpeakerId> speaker;
    std::optional<LipshapeId> lipshape;
};

struct LipshapeSeed {
    std::string_view name;
    std::array<std::string_view, 3> words;
};

/// The six lipshapes and three example words each that a new library starts with.
inline constexpr std::array<LipshapeSeed, 6> default_lipshapes = {{
    {"P/B/M", {"Pat", "Bat", "Mat"}},
    {"S/D/T", {"Sun", "Done", "Tonne"}},
    {"K/G/N", {"Kill", "Gill", "Nil"}},
    {"Ch/Sh/J", {"Chill", "Shill", "Jill"}},
    {"L/N/K", {"Light", "Night", "Kite"}},
    {"Z/T/S", {"Zone", "Tone", "Sewn"}},
}};

/// Persistent speechreading library. Every call is serialized through one
/// connection, so a store can be shared across threads without extra locking.
/// Videos live as files in the media directory and are removed together with
/// their rows.
class LibraryStore {
public:
    static constexpr int schema_version = 1;

    explicit LibraryStore(StoreConfig config) : config_(std::move(config)), mutex_(std::make_unique<std::mutex>())
    {
        std::error_code ec;
        if (config_.database.has_parent_path())
            fs::create_directories(config_.database.parent_path(), ec);
        fs::create_directories(config_.media_dir, ec);
        if (ec || !fs::is_directory(config_.media_dir))
            throw Error(ErrorCode::io_failure, "cannot create media directory '" + config_.media_dir.string() + "'");

        sqlite3* raw = nullptr;
        int rc = sqlite3_open_v2(config_.database.c_str(), &raw,
                                 SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX, nullptr);
        db_.reset(raw);
        sql::check(db_.get(), rc, "open " + config_.database.string());
        sqlite3_busy_timeout(db_.get(), 5000);
        exec("PRAGMA foreign_keys = ON");
        migrate();
    }

    const StoreConfig& config() const noexcept { return config_; }

    // --- lipshapes ---------------------------------------------------------

    std::vector<LipshapeRecord> lipshapes() const
    {
        std::lock_guard lock(*mutex_);
        return lipshapes_locked();
    }

    LipshapeRecord lipshape(LipshapeId id) const
    {
        std::lock_guard lock(*mutex_);
        for (auto& l : lipshapes_locked())
            if (l.id == id)
                return l;
        throw Error(ErrorCode::missing_lipshape, "no lipshape with id " + std::to_string(id.value));
    }

    std::optional<LipshapeRecord> find_lipshape(std::string_view name) const
    {
        std::lock_guard lock(*mutex_);
        for (auto& l : lipshapes_locked())
            if (text::iequals(l.shape.name(), text::trim(name)))
                return l;
        return std::nullopt;
    }

    LipshapeId add_lipshape(const Lipshape& shape)
    {
        std::lock_guard lock(*mutex_);
        for (auto& l : lipshapes_locked())
            if (text::iequals(l.shape.name(), shape.name()))
                throw Error(ErrorCode::duplicate_lipshape, "lipshape '" + shape.name() + "' already exists");
        return insert_lipshape(shape);
    }

    // --- words -------------------------------------------------------------

    std::vector<WordEntry> words(std::optional<LipshapeId> lipshape = std::nullopt) const
    {
        std::lock_guard lock(*mutex_);
        return words_locked(lipshape);
    }

    WordEntry word(WordId id) const
    {
        std::lock_guard lock(*mutex_);
        for (auto& w : words_locked(std::nullopt))
            if (w.id == id)
                return w;
        throw Error(ErrorCode::missing_word, "no word with id " + std::to_string(id.value));
    }

    /// Stores `text` under the lipshape if it passes word validation.
    WordId add_word(LipshapeId lipshape_id, std::string_view word_text, const Lexicon& lexicon)
    {
        std::lock_guard lock(*mutex_);
        std::optional<LipshapeRecord> shape;
        for (auto& l : lipshapes_locked())
            if (l.id == lipshape_id)
                shape = l;
        if (!shape)
            throw Error(ErrorCode::missing_lipshape, "no lipshape with id " + std::to_string(lipshape_id.value));
        auto stored = std::string(text::trim(word_text));
        auto check = validate_word_for_lipshape(stored, shape->shape, lexicon);
        if (!check.ok())
            throw Error(ErrorCode::validation_failed, "'" + stored + "' cannot be added to " + shape->shape.name(),
                        check.messages());
        for (auto& w : words_locked(lipshape_id))
            if (text::iequals(w.text, stored))
                throw Error(ErrorCode::duplicate_word, "'" + stored + "' already exists in " + shape->shape.name());
        return insert_word(lipshape_id, stored);
    }

    DeletionSummary delete_word(WordId id)
    {
        std::lock_guard lock(*mutex_);
        if (!exists("word", id.value))
            throw Error(ErrorCode::missing_word, "no word with id " + std::to_string(id.value));
        return cascade_delete("word", "word_id", id.value);
    }

    // --- speakers ----------------------------------------------------------

    std::vector<Speaker> speakers() const
    {
        std::lock_guard lock(*mutex_);
        return speakers_locked();
    }

    Speaker speaker(SpeakerId id) const
    {
        std::lock_guard lock(*mutex_);
        for (auto& s : speakers_locked())
            if (s.id == id)
                return s;
        throw Error(ErrorCode::missing_speaker, "no speaker with id " + std::to_string(id.value));
    }

    /// Adds a speaker only when every consent acknowledgment is given;
    /// otherwise nothing is stored.
    SpeakerId add_speaker(std::string_view first, std::string_view last, const ConsentRecord& consent,
                          Timestamp when = now())
    {
        if (!consent.complete())
            throw Error(ErrorCode::consent_incomplete, "speaker consent incomplete; adding the speaker is cancelled");
        if (text::trim(first).empty())
            throw Error(ErrorCode::malformed_request, "speaker first name is empty");
        std::lock_guard lock(*mutex_);
        sql::Statement st(db_.get(), "INSERT INTO speaker(first_name, last_name, consent_informed, consent_data, "
                                     "consent_video, consent_at, created_at) VALUES(?,?,1,1,1,?,?)");
        st.bind(1, text::trim(first)).bind(2, text::trim(last)).bind(3, epoch_ms(consent.granted_at)).bind(4, epoch_ms(when));
        st.run();
        return SpeakerId{sqlite3_last_insert_rowid(db_.get())};
    }

    DeletionSummary delete_speaker(SpeakerId id)
    {
        std::lock_guard lock(*mutex_);
        if (!exists("speaker", id.value))
            throw Error(ErrorCode::missing_speaker, "no speaker with id " + std::to_string(id.value));
        return cascade_delete("speaker", "speaker_id", id.value);
    }

    // --- videos ------------------------------------------------------------

    /// Writes the payload into the media directory and records it under the
    /// word's lipshape. `format` is a container hint used as file extension.
    VideoId add_video(SpeakerId speaker_id, WordId word_id, std::string_view payload, bool has_audio,
                      std::string_view format = "mp4", Timestamp when = now())
    {
        if (payload.empty())
            throw Error(ErrorCode::malformed_request, "video payload is empty");
        std::lock_guard lock(*mutex_);
        if (!exists("speaker", speaker_id.value))
            throw Error(ErrorCode::missing_speaker, "no speaker with id " + std::to_string(speaker_id.value));
        auto lipshape_id = word_lipshape(word_id);
        auto ext = sanitize_format(format);

        Transaction tx(*this);
        sql::Statement ins(db_.get(), "INSERT INTO video(word_id, speaker_id, lipshape_id, path, has_audio, format, "
                                      "created_at) VALUES(?,?,?,'',?,?,?)");
        ins.bind(1, word_id.value).bind(2, speaker_id.value).bind(3, lipshape_id.value).bind(4, has_audio);
        ins.bind(5, ext).bind(6, epoch_ms(when));
        ins.run();
        VideoId id{sqlite3_last_insert_rowid(db_.get())};
        auto file = "video-" + std::to_string(id.value) + "." + ext;
        write_file(config_.media_dir / file, payload);
        try {
            sql::Statement upd(db_.get(), "UPDATE video SET path = ? WHERE id = ?");
            upd.bind(1, file).bind(2, id.value);
            upd.run();
            tx.commit();
        } catch (...) {
            std::error_code ec;
            fs::remove(config_.media_dir / file, ec);
            throw;
        }
        return id;
    }

    std::vector<VideoRecord> videos(const VideoFilter& filter = {}) const
    {
        std::lock_guard lock(*mutex_);
        return videos_locked(filter);
    }

    VideoRecord video(VideoId id) const
    {
        std::lock_guard lock(*mutex_);
        return video_locked(id);
    }

    fs::path media_path(VideoId id) const
    {
        std::lock_guard lock(*mutex_);
        return config_.media_dir / video_locked(id).file;
    }

    std::string read_media(VideoId id) const
    {
        auto path = media_path(id);
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(ErrorCode::io_failure, "cannot read media file '" + path.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }

    /// Retags a video; its lipshape always follows the (new) word.
    VideoRecord edit_video(VideoId id, std::optional<WordId> word_id, std::optional<SpeakerId> speaker_id)
    {
        std::lock_guard lock(*mutex_);
        auto rec = video_locked(id);
        if (speaker_id) {
            if (!exists("speaker", speaker_id->value))
                throw Error(ErrorCode::missing_speaker, "no speaker with id " + std::to_string(speaker_id->value));
            rec.speaker = *speaker_id;
        }
        if (word_id) {
            rec.lipshape = word_lipshape(*word_id);
            rec.word = *word_id;
        }
        sql::Statement st(db_.get(), "UPDATE video SET word_id = ?, speaker_id = ?, lipshape_id = ? WHERE id = ?");
        st.bind(1, rec.word.value).bind(2, rec.speaker.value).bind(3, rec.lipshape.value).bind(4, id.value);
        st.run();
        return rec;
    }

    void delete_video(VideoId id)
    {
        std::lock_guard lock(*mutex_);
        auto rec = video_locked(id);
        sql::Statement st(db_.get(), "DELETE FROM video WHERE id = ?");
        st.bind(1, id.value);
        st.run();
        std::error_code ec;
        fs::remove(config_.media_dir / rec.file, ec);
    }

    /// File names present in the media directory.
    std::vector<std::string> media_files() const
    {
        std::lock_guard lock(*mutex_);
        std::vector<std::string> out;
        for (const auto& entry : fs::directory_iterator(config_.media_dir))
            if (entry.is_regular_file())
                out.push_back(entry.path().filename().string());
        std::sort(out.begin(), out.end());
        return out;
    }

    // --- sessions ----------------------------------------------------------

    SessionRecord save_session(SessionRecord record)
    {
        record.n_correct = static_cast<std::size_t>(
            std::count_if(record.trials.begin(), record.trials.end(), [](const Trial& t) { return t.correct; }));
        record.n_incorrect = record.trials.size() - record.n_correct;
        std::lock_guard lock(*mutex_);
        Transaction tx(*this);
        sql::Statement st(db_.get(), "INSERT INTO session(started_at, speakers, lipshapes, audio) VALUES(?,?,?,?)");
        st.bind(1, epoch_ms(record.date)).bind(2, record.speakers).bind(3, record.lipshapes).bind(4, record.audio);
        st.run();
        record.id = SessionId{sqlite3_last_insert_rowid(db_.get())};
        for (std::size_t i = 0; i < record.trials.size(); ++i) {
            const auto& t = record.trials[i];
            sql::Statement tr(db_.get(), "INSERT INTO trial(session_id, idx, video_id, correct_word, chosen_word, "
                                         "result, answered_at) VALUES(?,?,?,?,?,?,?)");
            tr.bind(1, record.id.value).bind(2, static_cast<std::int64_t>(i)).bind(3, t.video.value);
            tr.bind(4, t.correct_word).bind(5, t.chosen_word).bind(6, t.correct).bind(7, epoch_ms(t.answered_at));
            tr.run();
        }
        tx.commit();
        return record;
    }

    std::vector<SessionRecord> sessions() const
    {
        std::lock_guard lock(*mutex_);
        return sessions_locked();
    }

    /// Consistent copy of every table, taken under the writer lock.
    LibraryView snapshot() const
    {
        std::lock_guard lock(*mutex_);
        LibraryView view;
        view.lipshapes = lipshapes_locked();
        view.words = words_locked(std::nullopt);
        view.speakers = speakers_locked();
        view.videos = videos_locked({});
        return view;
    }

    // --- backup ------------------------------------------------------------

    /// Writes `library.sqlite3` plus a `media/` copy into an empty directory.
    void export_archive(const fs::path& dir) const
    {
        std::lock_guard lock(*mutex_);
        std::error_code ec;
        if (fs::exists(dir) && !fs::is_empty(dir, ec))
            throw Error(ErrorCode::io_failure, "archive directory '" + dir.string() + "' is not empty");
        fs::create_directories(dir / "media", ec);
        if (ec)
            throw Error(ErrorCode::io_failure, "cannot create archive directory '" + dir.string() + "'");
        sql::Statement st(db_.get(), "VACUUM INTO ?");
        st.bind(1, (dir / "library.sqlite3").string());
        st.run();
        for (const auto& entry : fs::directory_iterator(config_.media_dir)) {
            fs::copy_file(entry.path(), dir / "media" / entry.path().filename(), ec);
            if (ec)
                throw Error(ErrorCode::io_failure, "cannot copy '" + entry.path().string() + "' into archive");
        }
    }

    /// Recreates a library at `target` from an exported archive. The target
    /// database must not exist yet.
    static LibraryStore import_archive(const fs::path& archive, const StoreConfig& target)
    {
        if (!fs::exists(archive / "library.sqlite3"))
            throw Error(ErrorCode::corrupt_store, "'" + archive.string() + "' is not a library archive");
        if (fs::exists(target.database))
            throw Error(ErrorCode::io_failure, "target store '" + target.database.string() + "' already exists");
        std::error_code ec;
        if (target.database.has_parent_path())
            fs::create_directories(target.database.parent_path(), ec);
        fs::create_directories(target.media_dir, ec);
        fs::copy_file(archive / "library.sqlite3", target.database, ec);
        if (ec)
            throw Error(ErrorCode::io_failure, "cannot restore database: " + ec.message());
        if (fs::exists(archive / "media"))
            for (const auto& entry : fs::directory_iterator(archive / "media")) {
                fs::copy_file(entry.path(), target.media_dir / entry.path().filename(),
                              fs::copy_options::overwrite_existing, ec);
                if (ec)
                    throw Error(ErrorCode::io_failure, "cannot restore media: " + ec.message());
            }
        return LibraryStore(target);
    }

private:
    class Transaction {
    public:
        explicit Transaction(LibraryStore& store) : store_(store) { store_.exec("BEGIN IMMEDIATE"); }
        Transaction(const Transaction&) = delete;
        Transaction& operator=(const Transaction&) = delete;
        ~Transaction()
        {
            if (!done_)
                sqlite3_exec(store_.db_.get(), "ROLLBACK", nullptr, nullptr, nullptr);
        }
        void commit()
        {
            store_.exec("COMMIT");
            done_ = true;
        }

    private:
        LibraryStore& store_;
        bool done_ = false;
    };

    void exec(const char* sql_text) const
    {
        char* err = nullptr;
        int rc = sqlite3_exec(db_.get(), sql_text, nullptr, nullptr, &err);
        std::string msg = err ? err : "";
        sqlite3_free(err);
        if (rc != SQLITE_OK)
            throw Error(sql::classify(rc), std::string("sqlite: ") + msg);
    }

    void migrate()
    {
        std::int64_t version = 0;
        {
            sql::Statement st(db_.get(), "PRAGMA user_version");
            if (st.step())
                version = st.integer(0);
        }
        if (version == schema_version) {
            sql::Statement st(db_.get(), "SELECT count(*) FROM sqlite_master WHERE type='table' AND name IN "
                                         "('lipshape','word','speaker','video','session','trial')");
            if (!st.step() || st.integer(0) != 6)
                throw Error(ErrorCode::corrupt_store, "store schema is incomplete");
            return;
        }
        if (version != 0)
            throw Error(ErrorCode::corrupt_store, "unsupported store schema version " + std::to_string(version));
        {
            sql::Statement st(db_.get(), "SELECT count(*) FROM sqlite_master");
            if (st.step() && st.integer(0) != 0)
                throw Error(ErrorCode::corrupt_store, "store file holds an unknown database");
        }

        Transaction tx(*this);
        exec(R"(
            CREATE TABLE lipshape(
                id INTEGER PRIMARY KEY,
                name TEXT NOT NULL UNIQUE COLLATE NOCASE,
                phonemes TEXT NOT NULL);
            CREATE TABLE word(
                id INTEGER PRIMARY KEY,
                text TEXT NOT NULL COLLATE NOCASE,
                lipshape_id INTEGER NOT NULL REFERENCES lipshape(id),
                UNIQUE(lipshape_id, text));
            CREATE TABLE speaker(
                id INTEGER PRIMARY KEY,
                first_name TEXT NOT NULL,
                last_name TEXT NOT NULL,
                consent_informed INTEGER NOT NULL CHECK(consent_informed = 1),
                consent_data INTEGER NOT NULL CHECK(consent_data = 1),
                consent_video INTEGER NOT NULL CHECK(consent_video = 1),
                consent_at INTEGER NOT NULL,
                created_at INTEGER NOT NULL);
            CREATE TABLE video(
                id INTEGER PRIMARY KEY,
                word_id INTEGER NOT NULL REFERENCES word(id) ON DELETE CASCADE,
                speaker_id INTEGER NOT NULL REFERENCES speaker(id) ON DELETE CASCADE,
                lipshape_id INTEGER NOT NULL REFERENCES lipshape(id),
                path TEXT NOT NULL,
                has_audio INTEGER NOT NULL,
                format TEXT NOT NULL,
                created_at INTEGER NOT NULL);
            CREATE TABLE session(
                id INTEGER PRIMARY KEY,
                started_at INTEGER NOT NULL,
                speakers TEXT NOT NULL,
                lipshapes TEXT NOT NULL,
                audio INTEGER NOT NULL);
            CREATE TABLE trial(
                id INTEGER PRIMARY KEY,
                session_id INTEGER NOT NULL REFERENCES session(id) ON DELETE CASCADE,
                idx INTEGER NOT NULL,
                video_id INTEGER NOT NULL,
                correct_word TEXT NOT NULL,
                chosen_word TEXT NOT NULL,
                result INTEGER NOT NULL,
                answered_at INTEGER NOT NULL);
            CREATE INDEX video_word ON video(word_id);
            CREATE INDEX video_speaker ON video(speaker_id);
            CREATE INDEX trial_session ON trial(session_id);
            PRAGMA user_version = 1;
        )");
        for (const auto& seed : default_lipshapes) {
            auto id = insert_lipshape(Lipshape::from_name(seed.name));
            for (auto w : seed.words)
                insert_word(id, w);
        }
        tx.commit();
    }

    LipshapeId insert_lipshape(const Lipshape& shape)
    {
        sql::Statement st(db_.get(), "INSERT INTO lipshape(name, phonemes) VALUES(?, ?)");
        st.bind(1, shape.name()).bind(2, shape.member_symbols());
        st.run();
        return LipshapeId{sqlite3_last_insert_rowid(db_.get())};
    }

    WordId insert_word(LipshapeId lipshape_id, std::string_view word_text)
    {
        sql::Statement st(db_.get(), "INSERT INTO word(text, lipshape_id) VALUES(?, ?)");
        st.bind(1, word_text).bind(2, lipshape_id.value);
        st.run();
        return WordId{sqlite3_last_insert_rowid(db_.get())};
    }

    bool exists(const char* table, std::int64_t id) const
    {
        sql::Statement st(db_.get(), std::string("SELECT 1 FROM ") + table + " WHERE id = ?");
        st.bind(1, id);
        return st.step();
    }

    LipshapeId word_lipshape(WordId id) const
    {
        sql::Statement st(db_.get(), "SELECT lipshape_id FROM word WHERE id = ?");
        st.bind(1, id.value);
        if (!st.step())
            throw Error(ErrorCode::missing_word, "no word with id " + std::to_string(id.value));
        return LipshapeId{st.integer(0)};
    }

    DeletionSummary cascade_delete(const char* table, const char* fk, std::int64_t id)
    {
        std::vector<std::string> files;
        {
            sql::Statement st(db_.get(), std::string("SELECT path FROM video WHERE ") + fk + " = ?");
            st.bind(1, id);
            while (st.step())
                files.push_back(st.str(0));
        }
        Transaction tx(*this);
        sql::Statement st(db_.get(), std::string("DELETE FROM ") + table + " WHERE id = ?");
        st.bind(1, id);
        st.run();
        tx.commit();
        for (const auto& f : files) {
            std::error_code ec;
            fs::remove(config_.media_dir / f, ec);
        }
        return {files.size()};
    }

    std::vector<LipshapeRecord> lipshapes_locked() const
    {
        std::vector<LipshapeRecord> out;
        sql::Statement st(db_.get(), "SELECT l.id, l.name, l.phonemes, (SELECT count(*) FROM word w WHERE "
                                     "w.lipshape_id = l.id) FROM lipshape l ORDER BY l.id");
        while (st.step()) {
            std::set<Phoneme> members;
            for (const auto& sym : text::split_ws(st.str(2))) {
                auto p = Phoneme::find(sym);
                if (!p)
                    throw Error(ErrorCode::corrupt_store, "lipshape row holds unknown phoneme '" + sym + "'");
                members.insert(*p);
            }
            out.push_back({LipshapeId{st.integer(0)}, Lipshape(st.str(1), std::move(members)),
                           static_cast<std::size_t>(st.integer(3))});
        }
        return out;
    }

    std::vector<WordEntry> words_locked(std::optional<LipshapeId> lipshape) const
    {
        std::vector<WordEntry> out;
        std::string q = "SELECT w.id, w.text, w.lipshape_id, (SELECT count(*) FROM video v WHERE v.word_id = w.id) "
                        "FROM word w";
        if (lipshape)
            q += " WHERE w.lipshape_id = ?";
        q += " ORDER BY w.id";
        sql::Statement st(db_.get(), q);
        if (lipshape)
            st.bind(1, lipshape->value);
        while (st.step())
            out.push_back({WordId{st.integer(0)}, st.str(1), LipshapeId{st.integer(2)},
                           static_cast<std::size_t>(st.integer(3))});
        return out;
    }

    std::vector<Speaker> speakers_locked() const
    {
        std::vector<Speaker> out;
        sql::Statement st(db_.get(), "SELECT s.id, s.first_name, s.last_name, s.consent_informed, s.consent_data, "
                                     "s.consent_video, s.consent_at, s.created_at, (SELECT count(*) FROM video v "
                                     "WHERE v.speaker_id = s.id) FROM speaker s ORDER BY s.id");
        while (st.step()) {
            Speaker s;
            s.id = SpeakerId{st.integer(0)};
            s.first_name = st.str(1);
            s.last_name = st.str(2);
            s.consent = {st.integer(3) == 1, st.integer(4) == 1, st.integer(5) == 1, from_epoch_ms(st.integer(6))};
            s.created_at = from_epoch_ms(st.integer(7));
            s.video_count = static_cast<std::size_t>(st.integer(8));
            out.push_back(std::move(s));
        }
        return out;
    }

    static VideoRecord read_video(const sql::Statement& st)
    {
        return {VideoId{st.integer(0)},     WordId{st.integer(1)}, LipshapeId{st.integer(2)},
                SpeakerId{st.integer(3)},   st.str(4),             st.integer(5) != 0,
                from_epoch_ms(st.integer(6))};
    }

    std::vector<VideoRecord> videos_locked(const VideoFilter& filter) const
    {
        std::string q = "SELECT id, word_id, lipshape_id, speaker_id, path, has_audio, created_at FROM video WHERE 1";
        if (filter.word)
            q += " AND word_id = ?1";
        if (filter.speaker)
            q += " AND speaker_id = ?2";
        if (filter.lipshape)
            q += " AND lipshape_id = ?3";
        q += " ORDER BY created_at, id";
        sql::Statement st(db_.get(), q);
        if (filter.word)
            st.bind(1, filter.word->value);
        if (filter.speaker)
            st.bind(2, filter.speaker->value);
        if (filter.lipshape)
            st.bind(3, filter.lipshape->value);
        std::vector<VideoRecord> out;
        while (st.step())
            out.push_back(read_video(st));
        return out;
    }

    VideoRecord video_locked(VideoId id) const
    {
        sql::Statement st(db_.get(), "SELECT id, word_id, lipshape_id, speaker_id, path, has_audio, created_at "
                                     "FROM video WHERE id = ?");
        st.bind(1, id.value);
        if (!st.step())
            throw Error(ErrorCode::missing_video, "no video with id " + std::to_string(id.value));
        return read_video(st);
    }

    std::vector<SessionRecord> sessions_locked() const
    {
        std::vector<SessionRecord> out;
        {
            sql::Statement st(db_.get(), "SELECT id, started_at, speakers, lipshapes, audio FROM session ORDER BY id");
            while (st.step()) {
                SessionRecord r;
                r.id = SessionId{st.integer(0)};
                r.date = from_epoch_ms(st.integer(1));
                r.speakers = st.str(2);
                r.lipshapes = st.str(3);
                r.audio = st.integer(4) != 0;
                out.push_back(std::move(r));
            }
        }
        sql::Statement st(db_.get(), "SELECT session_id, video_id, correct_word, chosen_word, result, answered_at "
                                     "FROM trial ORDER BY session_id, idx");
        std::size_t cursor = 0;
        while (st.step()) {
            SessionId sid{st.integer(0)};
            while (cursor < out.size() && out[cursor].id < sid)
                ++cursor;
            if (cursor == out.size() || !(out[cursor].id == sid))
                throw Error(ErrorCode::corrupt_store, "trial references missing session");
            auto& r = out[cursor];
            r.trials.push_back({VideoId{st.integer(1)}, st.str(2), st.str(3), st.integer(4) != 0,
                                from_epoch_ms(st.integer(5))});
            (r.trials.back().correct ? r.n_correct : r.n_incorrect)++;
        }
        return out;
    }

    static std::string sanitize_format(std::string_view format)
    {
        std::string out;
        for (unsigned char c : format)
            if (std::isalnum(c) && out.size() < 8)
                out += static_cast<char>(std::tolower(c));
        return out.empty() ? "mp4" : out;
    }

    static void write_file(const fs::path& path, std::string_view bytes)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            throw Error(ErrorCode::io_failure, "cannot write media file '" + path.string() + "'");
    }

    StoreConfig config_;
    std::unique_ptr<std::mutex> mutex_;
    std::unique_ptr<sqlite3, sql::DbClose> db_;
};

/// Opens (and on first use seeds) the library rooted at `root`.
inline LibraryStore init_store(const fs::path& root) { return LibraryStore(StoreConfig::in_directory(root)); }

} // namespace speechread
