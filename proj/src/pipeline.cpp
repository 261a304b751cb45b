#include "slt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "slt/error.hpp"

namespace slt {

using nlohmann::json;

GlossSource parse_gloss_source(const std::string& name) {
    if (name == "spotter") return GlossSource::kSpotter;
    if (name == "ground_truth") return GlossSource::kGroundTruth;
    if (name == "ground_truth_in_vocab") return GlossSource::kGroundTruthInVocab;
    throw ConfigError("unknown gloss source: " + name);
}

std::string to_string(GlossSource source) {
    switch (source) {
        case GlossSource::kSpotter: return "spotter";
        case GlossSource::kGroundTruth: return "ground_truth";
        case GlossSource::kGroundTruthInVocab: return "ground_truth_in_vocab";
    }
    return "?";
}

std::vector<ManifestEntry> read_manifest(std::istream& in) {
    std::vector<ManifestEntry> entries;
    std::unordered_set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw FormatError("manifest line " + std::to_string(lineno) + ": invalid JSON object");
        ManifestEntry e;
        try {
            e.id = j.at("id").get<std::string>();
            e.scores_path = j.value("scores", "");
            e.reference = j.at("reference").get<std::string>();
            if (j.contains("gt_glosses"))
                e.gt_glosses = j["gt_glosses"].get<std::vector<std::string>>();
        } catch (const json::exception& ex) {
            throw FormatError("manifest line " + std::to_string(lineno) + ": " + ex.what());
        }
        if (!seen.insert(e.id).second)
            throw ValidationError("manifest: duplicate id '" + e.id + "'");
        entries.push_back(std::move(e));
    }
    return entries;
}

std::vector<ManifestEntry> read_manifest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read manifest: " + path);
    return read_manifest(in);
}

namespace {

std::mutex g_log_mutex;

void log_line(const std::string& level, const std::string& id, const std::string& stage,
              const std::string& msg) {
    std::lock_guard lock(g_log_mutex);
    std::cerr << level << '\t' << id << '\t' << stage << '\t' << msg << '\n';
}

std::vector<std::string> glosses_for_entry(const ManifestEntry& entry, const RunConfig& config,
                                           const Vocabulary& vocab) {
    switch (config.gloss_source) {
        case GlossSource::kSpotter: {
            if (entry.scores_path.empty())
                throw ConfigError(entry.id + ": manifest entry has no scores path");
            auto stream = read_score_stream_file(entry.scores_path);
            if (stream.vocab_hash != vocab.content_hash())
                throw ValidationError(entry.id + ": score stream vocab hash " + stream.vocab_hash +
                                      " does not match vocabulary " + vocab.content_hash());
            auto seq = spot(stream, config.spotting);
            std::vector<std::string> glosses;
            glosses.reserve(seq.items.size());
            for (const auto& item : seq.items) glosses.push_back(vocab.gloss_of(item.class_id));
            return glosses;
        }
        case GlossSource::kGroundTruth:
        case GlossSource::kGroundTruthInVocab: {
            if (!entry.gt_glosses)
                throw ConfigError(entry.id + ": gloss source " + to_string(config.gloss_source) +
                                  " requires gt_glosses");
            if (config.gloss_source == GlossSource::kGroundTruth) return *entry.gt_glosses;
            std::vector<std::string> glosses;
            for (const auto& g : *entry.gt_glosses)
                if (vocab.contains(g)) glosses.push_back(g);
            return glosses;
        }
    }
    return {};
}

std::filesystem::path effective_cache_dir(const RunConfig& config) {
    return config.cache_dir.empty() ? config.output_dir / "cache" : config.cache_dir;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

}  // namespace

std::string records_jsonl(const RunResult& result) {
    std::string out;
    for (const auto& entry : result.entries) {
        json j = {
            {"id", entry.record.video_id},
            {"glosses", entry.record.glosses},
            {"reference", entry.reference},
            {"from_cache", entry.record.from_cache},
        };
        if (entry.record.hypothesis)
            j["hypothesis"] = *entry.record.hypothesis;
        else
            j["hypothesis"] = nullptr;
        if (!entry.error.empty()) j["error"] = entry.error;
        out += j.dump();
        out += '\n';
    }
    return out;
}

RunResult translate_manifest(const std::vector<ManifestEntry>& manifest,
                             const RunConfig& config) {
    if (config.vocab_path.empty()) throw ConfigError("run: vocab_path is required");
    const Vocabulary vocab = Vocabulary::load_file(config.vocab_path);
    Translator translator(config.client, effective_cache_dir(config));

    RunResult result;
    result.entries.resize(manifest.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= manifest.size() || abort.load()) return;
            const auto& entry = manifest[i];
            auto& slot = result.entries[i];
            slot.reference = entry.reference;
            slot.record.video_id = entry.id;
            try {
                auto glosses = glosses_for_entry(entry, config, vocab);
                slot.record = translator.translate(entry.id, glosses, config.skip_empty,
                                                   config.strip_variants);
                slot.record.video_id = entry.id;
            } catch (const std::exception& e) {
                if (config.fail_fast) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    abort.store(true);
                    return;
                }
                slot.error = e.what();
                slot.record.hypothesis = std::string();
                log_line("ERROR", entry.id, "pipeline", e.what());
            }
        }
    };

    const int n_threads =
        std::max(1, std::min<int>(config.client.max_concurrency,
                                  static_cast<int>(manifest.size())));
    std::vector<std::thread> threads;
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);

    for (auto& entry : result.entries) {
        if (entry.error.empty() && !entry.record.hypothesis) ++result.n_no_translation;
        if (!entry.error.empty()) ++result.n_failed;
    }
    return result;
}

RunResult run(const std::vector<ManifestEntry>& manifest, const RunConfig& config) {
    if (manifest.empty()) throw ValidationError("run: empty manifest");
    std::filesystem::create_directories(config.output_dir);
    RunConfig sub = config;
    sub.cache_dir = effective_cache_dir(config);
    RunResult result = translate_manifest(manifest, sub);

    std::vector<std::string> hyps, refs;
    for (const auto& entry : result.entries) {
        hyps.push_back(entry.record.hypothesis.value_or(""));
        refs.push_back(entry.reference);
    }
    result.report = corpus_bleu(hyps, refs);

    write_text_file(config.output_dir / "records.jsonl", records_jsonl(result));
    write_text_file(config.output_dir / "report.json",
                    report_json(result.report, static_cast<int>(manifest.size()),
                                result.n_no_translation));
    write_text_file(config.output_dir / "report.md",
                    report_markdown(to_string(config.gloss_source), result.report));
    return result;
}

std::vector<std::pair<double, BleuReport>> sweep_threshold(
    const std::vector<ManifestEntry>& manifest, const RunConfig& config,
    const std::vector<double>& thresholds) {
    std::filesystem::create_directories(config.output_dir);
    std::vector<std::pair<double, BleuReport>> rows;
    json sweep_json = json::array();
    std::ostringstream md;
    md.setf(std::ios::fixed);
    md.precision(2);
    md << "| Threshold | B-1 | B-2 | B-3 | B-4 |\n|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const double t = std::clamp(thresholds[i], 0.0, 1.0);
        RunConfig sub = config;
        sub.spotting.threshold = t;
        sub.output_dir = config.output_dir / ("threshold_" + std::to_string(i));
        sub.cache_dir = effective_cache_dir(config);  // shared across the sweep
        auto result = run(manifest, sub);
        rows.emplace_back(t, result.report);
        sweep_json.push_back({{"threshold", t}, {"bleu", result.report.bleu}});
        md << "| " << t << " |";
        for (double b : result.report.bleu) md << ' ' << b << " |";
        md << '\n';
    }
    write_text_file(config.output_dir / "sweep.json", sweep_json.dump(2) + "\n");
    write_text_file(config.output_dir / "sweep.md", md.str());
    return rows;
}

namespace {

std::string trim_ws(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key " + key + ": bad boolean '" + value + "'");
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim_ws(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim_ws(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim_ws(line.substr(0, eq));
        std::string value = trim_ws(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        kv[section.empty() ? key : section + "." + key] = value;
    }
    return kv;
}

void apply_config(const std::map<std::string, std::string>& kv, RunConfig& config) {
    for (const auto& [key, value] : kv) {
        try {
            if (key == "spotting.threshold")
                config.spotting.threshold = std::stod(value);
            else if (key == "spotting.window_size")
                config.spotting.window_size = std::stoi(value);
            else if (key == "client.endpoint_url")
                config.client.endpoint_url = value;
            else if (key == "client.api_key_env")
                config.client.api_key_env_name = value;
            else if (key == "client.model")
                config.client.model_name = value;
            else if (key == "client.max_retries")
                config.client.max_retries = std::stoi(value);
            else if (key == "client.retry_backoff_ms")
                config.client.retry_backoff = std::chrono::milliseconds(std::stol(value));
            else if (key == "client.max_concurrency")
                config.client.max_concurrency = std::stoi(value);
            else if (key == "client.temperature")
                config.client.temperature = std::stod(value);
            else if (key == "run.vocab")
                config.vocab_path = value;
            else if (key == "run.output_dir")
                config.output_dir = value;
            else if (key == "run.gloss_source")
                config.gloss_source = parse_gloss_source(value);
            else if (key == "run.call_on_empty")
                config.skip_empty = !parse_bool(value, key);
            else if (key == "run.strip_variants")
                config.strip_variants = parse_bool(value, key);
            else if (key == "run.fail_fast")
                config.fail_fast = parse_bool(value, key);
            else
                throw ConfigError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key " + key + ": bad value '" + value + "'");
        }
    }
}

}  // namespace slt
