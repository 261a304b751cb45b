#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace slt {

// Sent verbatim as the system message of every chat-completion request.
// Byte-exact; a digest test pins it.
inline constexpr std::string_view kSystemPrompt =
    "You are a helpful assistant designed to generate a sentence based on the list of words "
    "entered by the user. You need to strictly follow these rules: 1. The user will only give "
    "the list of German words separated by a space, you just need to generate a meaningful "
    "sentence from them. 2. Only provide a response containing the generated sentence. If you "
    "cannot create a German sentence then respond with \"No Translation\".";

// Hypothesis sentence; empty optional = the No-Translation marker.
using Hypothesis = std::optional<std::string>;

struct TranslationRecord {
    std::string video_id;
    std::vector<std::string> glosses;  // words as sent in the prompt
    Hypothesis hypothesis;
    std::string raw_response;
    bool from_cache = false;
};

struct ClientConfig {
    std::string endpoint_url = "https://api.openai.com/v1/chat/completions";
    std::string api_key_env_name = "OPENAI_API_KEY";
    std::string model_name = "gpt-3.5-turbo";
    int max_retries = 3;
    std::chrono::milliseconds retry_backoff{200};
    int max_concurrency = 4;
    double temperature = 0.0;
};

// Base labels joined by single spaces, order preserved. Throws
// ValidationError on an empty list. strip_variants applies base_label to
// each gloss before joining.
std::string build_user_message(const std::vector<std::string>& glosses,
                               bool strip_variants = true);

// Maps a raw completion to a hypothesis. Responses that trim + lowercase +
// trailing '.'/'!' stripping down to "no translation" (and empty responses)
// become the No-Translation marker; anything else passes through trimmed.
Hypothesis normalize_response(const std::string& raw);

// Content-addressed on-disk store of raw completions, keyed by
// (model, system-prompt digest, user text). Writes are atomic
// (temp file + rename).
class TranslationCache {
public:
    explicit TranslationCache(std::filesystem::path dir);

    std::optional<std::string> lookup(const std::string& model,
                                      const std::string& user_text) const;
    void store(const std::string& model, const std::string& user_text,
               const std::string& raw_response) const;

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path key_path(const std::string& model,
                                   const std::string& user_text) const;

    std::filesystem::path dir_;
};

// Single-turn chat-completion client with caching, bounded retries on
// transport/5xx failures, and a max_concurrency cap on in-flight requests.
// Safe for concurrent use.
class Translator {
public:
    Translator(ClientConfig config, std::filesystem::path cache_dir);

    // skip_empty: empty gloss lists yield No-Translation without a network
    // call. With skip_empty = false an empty user message is sent anyway.
    TranslationRecord translate(const std::string& video_id,
                                const std::vector<std::string>& glosses,
                                bool skip_empty = true, bool strip_variants = true);

    const ClientConfig& config() const { return config_; }

private:
    std::string request_completion(const std::string& user_text,
                                   const std::string& video_id);
    std::string api_key(const std::string& video_id) const;

    ClientConfig config_;
    TranslationCache cache_;
    mutable std::mutex mutex_;
    std::condition_variable slot_free_;
    int in_flight_ = 0;
};

}  // namespace slt
