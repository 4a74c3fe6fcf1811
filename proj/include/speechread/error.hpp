#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace speechread {

enum class ErrorCode {
    unknown_symbol,
    parse_error,
    unknown_word,
    empty_sequence,
    not_a_consonant,
    out_of_order_event,
    invalid_config,
    insufficient_videos,
    insufficient_distractors,
    invalid_index,
    choice_not_offered,
    already_answered,
    incomplete_session,
    no_videos_for_word,
    speaker_mismatch,
    empty_log,
    empty_corpus,
    io_failure,
    corrupt_store,
    consent_incomplete,
    validation_failed,
    duplicate_word,
    duplicate_lipshape,
    missing_lipshape,
    missing_word,
    missing_speaker,
    missing_video,
    missing_session,
    malformed_request,
    payload_too_large,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::unknown_symbol: return "unknown-symbol";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::unknown_word: return "unknown-word";
    case ErrorCode::empty_sequence: return "empty-sequence";
    case ErrorCode::not_a_consonant: return "not-a-consonant";
    case ErrorCode::out_of_order_event: return "out-of-order-event";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::insufficient_videos: return "insufficient-videos";
    case ErrorCode::insufficient_distractors: return "insufficient-distractors";
    case ErrorCode::invalid_index: return "invalid-index";
    case ErrorCode::choice_not_offered: return "choice-not-offered";
    case ErrorCode::already_answered: return "already-answered";
    case ErrorCode::incomplete_session: return "incomplete-session";
    case ErrorCode::no_videos_for_word: return "no-videos-for-word";
    case ErrorCode::speaker_mismatch: return "speaker-mismatch";
    case ErrorCode::empty_log: return "empty-log";
    case ErrorCode::empty_corpus: return "empty-corpus";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::corrupt_store: return "corrupt-store";
    case ErrorCode::consent_incomplete: return "consent-incomplete";
    case ErrorCode::validation_failed: return "validation-failed";
    case ErrorCode::duplicate_word: return "duplicate-word-in-lipshape";
    case ErrorCode::duplicate_lipshape: return "duplicate-lipshape";
    case ErrorCode::missing_lipshape: return "missing-lipshape";
    case ErrorCode::missing_word: return "missing-word";
    case ErrorCode::missing_speaker: return "missing-speaker";
    case ErrorCode::missing_video: return "missing-video";
    case ErrorCode::missing_session: return "missing-session";
    case ErrorCode::malformed_request: return "malformed-request";
    case ErrorCode::payload_too_large: return "payload-too-large";
    }
    return "unknown";
}

/// Domain failure raised by every module. `details` carries rule violations
/// for validation failures and is empty otherwise.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
        : std::runtime_error(message), code_(code), details_(std::move(details))
    {
    }

    ErrorCode code() const noexcept { return code_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    ErrorCode code_;
    std::vector<std::string> details_;
};

} // namespace speechread
