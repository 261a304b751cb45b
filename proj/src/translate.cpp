#include "slt/translate.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "slt/digest.hpp"
#include "slt/error.hpp"
#include "slt/vocab.hpp"

namespace slt {

using nlohmann::json;

std::string build_user_message(const std::vector<std::string>& glosses, bool strip_variants) {
    if (glosses.empty()) throw ValidationError("build_user_message: empty gloss list");
    std::string out;
    for (const auto& gloss : glosses) {
        if (!out.empty()) out += ' ';
        out += strip_variants ? base_label(gloss) : gloss;
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

Hypothesis normalize_response(const std::string& raw) {
    const std::string trimmed = trim(raw);
    if (trimmed.empty()) return std::nullopt;
    std::string probe = trimmed;
    while (!probe.empty() && (probe.back() == '.' || probe.back() == '!')) probe.pop_back();
    std::transform(probe.begin(), probe.end(), probe.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (probe == "no translation") return std::nullopt;
    return trimmed;
}

TranslationCache::TranslationCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path TranslationCache::key_path(const std::string& model,
                                                 const std::string& user_text) const {
    const std::string key = model + '\n' + sha256_hex(kSystemPrompt) + '\n' + user_text;
    return dir_ / (sha256_hex(key) + ".json");
}

std::optional<std::string> TranslationCache::lookup(const std::string& model,
                                                    const std::string& user_text) const {
    std::ifstream in(key_path(model, user_text), std::ios::binary);
    if (!in) return std::nullopt;
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("raw_response")) return std::nullopt;
    return j["raw_response"].get<std::string>();
}

void TranslationCache::store(const std::string& model, const std::string& user_text,
                             const std::string& raw_response) const {
    json j = {
        {"model", model},
        {"system_sha256", sha256_hex(kSystemPrompt)},
        {"user_text", user_text},
        {"raw_response", raw_response},
    };
    const auto path = key_path(model, user_text);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write cache file: " + tmp);
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, path);
}

Translator::Translator(ClientConfig config, std::filesystem::path cache_dir)
    : config_(std::move(config)), cache_(std::move(cache_dir)) {
    if (config_.max_retries < 0) throw ConfigError("max_retries must be >= 0");
    if (config_.max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
    if (config_.temperature < 0.0 || config_.temperature > 2.0)
        throw ConfigError("temperature must lie in [0,2]");
}

std::string Translator::api_key(const std::string& video_id) const {
    if (config_.api_key_env_name.empty()) return "";
    const char* key = std::getenv(config_.api_key_env_name.c_str());
    if (!key || !*key)
        throw ConfigError(video_id + ": API key environment variable " +
                          config_.api_key_env_name + " is not set");
    return key;
}

namespace {

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("bad endpoint url: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string extract_content(const std::string& body, const std::string& video_id) {
    json j = json::parse(body, nullptr, false);
    if (j.is_discarded())
        throw HttpError(200, video_id + ": completion response is not valid JSON");
    try {
        return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw HttpError(200, video_id + ": completion response missing choices[0].message.content");
    }
}

}  // namespace

std::string Translator::request_completion(const std::string& user_text,
                                           const std::string& video_id) {
    const std::string key = api_key(video_id);
    const auto [base, path] = split_endpoint(config_.endpoint_url);
    const json body = {
        {"model", config_.model_name},
        {"temperature", config_.temperature},
        {"messages",
         {{{"role", "system"}, {"content", std::string(kSystemPrompt)}},
          {{"role", "user"}, {"content", user_text}}}},
    };
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

    {
        std::unique_lock lock(mutex_);
        slot_free_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
        ++in_flight_;
    }
    struct SlotRelease {
        Translator* self;
        ~SlotRelease() {
            std::lock_guard lock(self->mutex_);
            --self->in_flight_;
            self->slot_free_.notify_one();
        }
    } release{this};

    std::string last_error = "no response";
    int last_status = 0;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(config_.retry_backoff * attempt);
        httplib::Client client(base);
        client.set_read_timeout(120, 0);
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            last_status = 0;
            continue;
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            last_status = res->status;
            continue;
        }
        if (res->status >= 400)
            throw HttpError(res->status,
                            video_id + ": HTTP " + std::to_string(res->status) + ": " + res->body);
        return extract_content(res->body, video_id);
    }
    throw HttpError(last_status, video_id + ": retries exhausted after " +
                                     std::to_string(config_.max_retries + 1) + " attempts (" +
                                     last_error + ")");
}

TranslationRecord Translator::translate(const std::string& video_id,
                                        const std::vector<std::string>& glosses,
                                        bool skip_empty, bool strip_variants) {
    TranslationRecord record;
    record.video_id = video_id;
    std::string user_text;
    if (!glosses.empty()) {
        user_text = build_user_message(glosses, strip_variants);
        for (const auto& gloss : glosses)
            record.glosses.push_back(strip_variants ? base_label(gloss) : gloss);
    } else if (skip_empty) {
        record.hypothesis = std::nullopt;
        return record;
    }

    if (auto cached = cache_.lookup(config_.model_name, user_text)) {
        record.raw_response = *cached;
        record.from_cache = true;
    } else {
        record.raw_response = request_completion(user_text, video_id);
        cache_.store(config_.model_name, user_text, record.raw_response);
    }
    record.hypothesis = normalize_response(record.raw_response);
    return record;
}

}  // namespace slt
