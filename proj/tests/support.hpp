#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "speechread/lexicon.hpp"

namespace testing_support {

inline const speechread::Lexicon& reference_lexicon()
{
    static const speechread::Lexicon lexicon = speechread::load_lexicon(SPEECHREAD_TEST_LEXICON);
    return lexicon;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    TempDir()
    {
        std::random_device rd;
        auto base = std::filesystem::temp_directory_path();
        do {
            path_ = base / ("speechread-test-" + std::to_string(rd()) + std::to_string(rd()));
        } while (std::filesystem::exists(path_));
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testing_support
