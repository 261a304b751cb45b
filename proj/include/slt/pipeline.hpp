#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slt/metrics.hpp"
#include "slt/spotter.hpp"
#include "slt/translate.hpp"
#include "slt/vocab.hpp"

namespace slt {

struct ManifestEntry {
    std::string id;
    std::string scores_path;
    std::string reference;
    std::optional<std::vector<std::string>> gt_glosses;
};

enum class GlossSource { kSpotter, kGroundTruth, kGroundTruthInVocab };

GlossSource parse_gloss_source(const std::string& name);
std::string to_string(GlossSource source);

struct RunConfig {
    SpottingConfig spotting;
    ClientConfig client;
    std::string vocab_path;
    std::filesystem::path output_dir;
    std::filesystem::path cache_dir;  // empty = output_dir/cache
    GlossSource gloss_source = GlossSource::kSpotter;
    bool skip_empty = true;       // --call-on-empty flips this
    bool strip_variants = true;
    bool fail_fast = false;
};

struct EntryResult {
    TranslationRecord record;
    std::string reference;
    std::string error;  // empty = ok; failed entries score as empty hypotheses
};

struct RunResult {
    std::vector<EntryResult> entries;
    BleuReport report;
    int n_no_translation = 0;
    int n_failed = 0;
};

// JSONL, one {"id", "scores", "reference", "gt_glosses"?} object per line.
std::vector<ManifestEntry> read_manifest(std::istream& in);
std::vector<ManifestEntry> read_manifest_file(const std::string& path);

// Gloss extraction + translation for every entry, no scoring and no file
// output. Per-entry failures are recorded unless fail_fast is set.
RunResult translate_manifest(const std::vector<ManifestEntry>& manifest,
                             const RunConfig& config);

// Full flow for one manifest: glosses per gloss_source, translation with a
// shared cache under output_dir/cache, corpus BLEU over all entries.
// Writes records.jsonl, report.json and report.md into output_dir.
RunResult run(const std::vector<ManifestEntry>& manifest, const RunConfig& config);

// One run per threshold with a shared translation cache; writes sweep.json
// and sweep.md alongside per-threshold output directories.
std::vector<std::pair<double, BleuReport>> sweep_threshold(
    const std::vector<ManifestEntry>& manifest, const RunConfig& config,
    const std::vector<double>& thresholds);

std::string records_jsonl(const RunResult& result);

// Flat "section.key = value" view of an INI-style config file.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_config(const std::map<std::string, std::string>& kv, RunConfig& config);

// CLI exit codes.
constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDataError = 2;
constexpr int kExitPartialFailure = 3;

}  // namespace slt
