// sltpipe: gloss spotting, LLM gloss-to-text translation, and evaluation.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "slt/error.hpp"
#include "slt/metrics.hpp"
#include "slt/pipeline.hpp"
#include "slt/segment.hpp"
#include "slt/spotter.hpp"
#include "slt/translate.hpp"
#include "slt/vocab.hpp"

using namespace slt;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string manifest_path;
    std::string gloss_source = "spotter";
    RunConfig run_config;
    bool call_on_empty = false;
    bool keep_variants = false;
};

void add_client_flags(CLI::App* cmd, ClientConfig& client) {
    cmd->add_option("--endpoint", client.endpoint_url, "Chat-completion endpoint URL");
    cmd->add_option("--api-key-env", client.api_key_env_name,
                    "Environment variable holding the API key");
    cmd->add_option("--model", client.model_name, "Model name");
    cmd->add_option("--max-retries", client.max_retries, "Retries on transport/5xx errors");
    cmd->add_option("--max-concurrency", client.max_concurrency,
                    "Upper bound on in-flight requests");
    cmd->add_option("--temperature", client.temperature, "Sampling temperature");
}

void add_run_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--manifest", opts.manifest_path, "Manifest JSONL")->required();
    cmd->add_option("--vocab", opts.run_config.vocab_path, "Vocabulary file");
    cmd->add_option("--out", opts.run_config.output_dir, "Output directory")->required();
    cmd->add_option("--threshold", opts.run_config.spotting.threshold,
                    "Spotting confidence threshold");
    cmd->add_option("--gloss-source", opts.gloss_source,
                    "spotter | ground_truth | ground_truth_in_vocab");
    cmd->add_flag("--call-on-empty", opts.call_on_empty,
                  "Send a request even when no gloss was spotted");
    cmd->add_flag("--keep-variants", opts.keep_variants,
                  "Send variant-suffixed gloss labels unchanged");
    cmd->add_flag("--fail-fast", opts.run_config.fail_fast, "Abort on the first entry failure");
    add_client_flags(cmd, opts.run_config.client);
}

// Config file first, then explicit flags on top.
void finalize(CLI::App* cmd, CommonOpts& opts, const std::string& config_path) {
    if (!config_path.empty()) {
        RunConfig from_file;
        apply_config(read_config_file(config_path), from_file);
        auto keep = [&](const char* flag) { return cmd->count(flag) == 0; };
        if (keep("--threshold")) opts.run_config.spotting.threshold = from_file.spotting.threshold;
        if (keep("--endpoint")) opts.run_config.client.endpoint_url = from_file.client.endpoint_url;
        if (keep("--api-key-env"))
            opts.run_config.client.api_key_env_name = from_file.client.api_key_env_name;
        if (keep("--model")) opts.run_config.client.model_name = from_file.client.model_name;
        if (keep("--max-retries")) opts.run_config.client.max_retries = from_file.client.max_retries;
        if (keep("--max-concurrency"))
            opts.run_config.client.max_concurrency = from_file.client.max_concurrency;
        if (keep("--temperature")) opts.run_config.client.temperature = from_file.client.temperature;
        opts.run_config.client.retry_backoff = from_file.client.retry_backoff;
        if (keep("--vocab") && !from_file.vocab_path.empty())
            opts.run_config.vocab_path = from_file.vocab_path;
        if (keep("--gloss-source")) opts.gloss_source = to_string(from_file.gloss_source);
        if (keep("--call-on-empty")) opts.call_on_empty = !from_file.skip_empty;
        if (keep("--fail-fast")) opts.run_config.fail_fast = from_file.fail_fast;
    }
    opts.run_config.gloss_source = parse_gloss_source(opts.gloss_source);
    opts.run_config.skip_empty = !opts.call_on_empty;
    opts.run_config.strip_variants = !opts.keep_variants;
}

std::vector<double> parse_thresholds(const std::string& csv) {
    std::vector<double> out;
    std::istringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw ConfigError("--thresholds: empty list");
    return out;
}

std::vector<int> read_int_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::vector<int> out;
    int v;
    while (in >> v) out.push_back(v);
    return out;
}

std::optional<ExternalMetric> read_external_metric(const std::string& spec) {
    if (spec.empty()) return std::nullopt;
    auto eq = spec.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--external: want NAME=path/to/per-sentence-scores");
    ExternalMetric metric{spec.substr(0, eq), 0.0};
    std::ifstream in(spec.substr(eq + 1));
    if (!in) throw ConfigError("cannot read external metric file: " + spec.substr(eq + 1));
    double v, sum = 0.0;
    long n = 0;
    while (in >> v) {
        sum += v;
        ++n;
    }
    if (n == 0) throw ConfigError("external metric file is empty");
    metric.mean = sum / n;
    return metric;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Sign-language-translation pipeline: spot glosses from classifier score "
                 "streams, translate them via a chat-completion endpoint, evaluate with BLEU"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "INI-style config file")->expected(1);

    // vocab build
    auto* vocab_cmd = app.add_subcommand("vocab", "Vocabulary operations");
    auto* vocab_build = vocab_cmd->add_subcommand("build", "Build a vocabulary from gloss spans");
    std::string spans_path, out_path;
    int min_count = 13;
    std::vector<std::string> exclusions = {"INDEX"};
    vocab_build->add_option("--spans", spans_path, "Span manifest (video<TAB>start<TAB>end<TAB>gloss)")
        ->required();
    vocab_build->add_option("--out", out_path, "Output vocabulary file")->required();
    vocab_build->add_option("--min-count", min_count, "Minimum sample count (default 13)");
    vocab_build->add_option("--exclude", exclusions, "Glosses to exclude (default INDEX)");

    // segment
    auto* segment_cmd = app.add_subcommand("segment", "Cut spans into fixed-length windows");
    std::string seg_spans, seg_vocab, seg_out;
    int window = kDefaultWindowSize, stride = kDefaultStride;
    segment_cmd->add_option("--spans", seg_spans, "Span manifest")->required();
    segment_cmd->add_option("--vocab", seg_vocab, "Vocabulary file")->required();
    segment_cmd->add_option("--out", seg_out, "Window manifest output (default stdout)");
    segment_cmd->add_option("--window", window, "Window size");
    segment_cmd->add_option("--stride", stride, "Stride for long spans");

    // spot
    auto* spot_cmd = app.add_subcommand("spot", "Decode one score stream into a gloss sequence");
    std::string spot_scores, spot_vocab;
    double spot_threshold = 0.7;
    spot_cmd->add_option("--scores", spot_scores, "Score stream file")->required();
    spot_cmd->add_option("--vocab", spot_vocab, "Vocabulary file")->required();
    spot_cmd->add_option("--threshold", spot_threshold, "Confidence threshold");

    // translate / run / sweep share the manifest flags
    auto* translate_cmd =
        app.add_subcommand("translate", "Translate a manifest, write records.jsonl only");
    CommonOpts translate_opts;
    add_run_flags(translate_cmd, translate_opts);

    auto* run_cmd = app.add_subcommand("run", "Full pipeline: spot, translate, evaluate");
    CommonOpts run_opts;
    add_run_flags(run_cmd, run_opts);

    auto* sweep_cmd = app.add_subcommand("sweep", "Run at several spotting thresholds");
    CommonOpts sweep_opts;
    std::string thresholds_csv = "0.0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    add_run_flags(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--thresholds", thresholds_csv, "Comma-separated thresholds");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "Score records or classifier predictions");
    std::string eval_records, eval_out, eval_external, eval_preds, eval_labels;
    eval_cmd->add_option("--records", eval_records, "records.jsonl with hypothesis + reference");
    eval_cmd->add_option("--out", eval_out, "Output directory (default stdout)");
    eval_cmd->add_option("--external", eval_external,
                         "NAME=path, per-sentence external scores to average into the report");
    eval_cmd->add_option("--predictions", eval_preds, "Predicted class ids, one per line");
    eval_cmd->add_option("--labels", eval_labels, "True class ids, one per line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfigError;
    }

    if (vocab_build->parsed()) {
        auto spans = read_spans_file(spans_path);
        auto vocab = Vocabulary::build(spans, min_count,
                                       {exclusions.begin(), exclusions.end()});
        vocab.save_file(out_path);
        std::cout << "wrote " << out_path << " (" << vocab.size() << " classes, hash "
                  << vocab.content_hash() << ")\n";
        return kExitOk;
    }
    if (segment_cmd->parsed()) {
        auto corpus = segment_corpus(read_spans_file(seg_spans), Vocabulary::load_file(seg_vocab),
                                     window, stride);
        if (seg_out.empty()) {
            write_window_manifest(std::cout, corpus);
        } else {
            std::ofstream out(seg_out, std::ios::binary);
            if (!out) throw ConfigError("cannot write " + seg_out);
            write_window_manifest(out, corpus);
        }
        std::cerr << corpus.windows.size() << " windows, " << corpus.skipped_out_of_vocab
                  << " out-of-vocabulary spans skipped\n";
        return kExitOk;
    }
    if (spot_cmd->parsed()) {
        auto vocab = Vocabulary::load_file(spot_vocab);
        auto stream = read_score_stream_file(spot_scores);
        if (stream.vocab_hash != vocab.content_hash())
            throw ValidationError("score stream vocab hash does not match the vocabulary");
        auto seq = spot(stream, {spot_threshold, stream.window_size});
        json items = json::array();
        for (const auto& item : seq.items)
            items.push_back({{"gloss", vocab.gloss_of(item.class_id)},
                             {"class_id", item.class_id},
                             {"confidence", item.peak_confidence},
                             {"first_window", item.first_window},
                             {"last_window", item.last_window}});
        std::cout << json{{"video_id", seq.video_id}, {"glosses", items}}.dump(2) << "\n";
        return kExitOk;
    }
    if (translate_cmd->parsed()) {
        finalize(translate_cmd, translate_opts, config_path);
        auto manifest = read_manifest_file(translate_opts.manifest_path);
        std::filesystem::create_directories(translate_opts.run_config.output_dir);
        auto result = translate_manifest(manifest, translate_opts.run_config);
        std::ofstream out(translate_opts.run_config.output_dir / "records.jsonl",
                          std::ios::binary);
        out << records_jsonl(result);
        std::cout << "wrote records for " << result.entries.size() << " entries ("
                  << result.n_no_translation << " No-Translation, " << result.n_failed
                  << " failed)\n";
        return result.n_failed ? kExitPartialFailure : kExitOk;
    }
    if (run_cmd->parsed()) {
        finalize(run_cmd, run_opts, config_path);
        auto manifest = read_manifest_file(run_opts.manifest_path);
        auto result = run(manifest, run_opts.run_config);
        std::cout << report_json(result.report, static_cast<int>(manifest.size()),
                                 result.n_no_translation);
        return result.n_failed ? kExitPartialFailure : kExitOk;
    }
    if (sweep_cmd->parsed()) {
        finalize(sweep_cmd, sweep_opts, config_path);
        auto manifest = read_manifest_file(sweep_opts.manifest_path);
        auto rows =
            sweep_threshold(manifest, sweep_opts.run_config, parse_thresholds(thresholds_csv));
        for (const auto& [threshold, report] : rows)
            std::cout << threshold << "\tB-1 " << report.bleu[0] << "\tB-4 " << report.bleu[3]
                      << "\n";
        return kExitOk;
    }
    if (eval_cmd->parsed()) {
        if (!eval_preds.empty() || !eval_labels.empty()) {
            if (eval_preds.empty() || eval_labels.empty())
                throw ConfigError("evaluate: --predictions and --labels go together");
            auto report = accuracy(read_int_lines(eval_preds), read_int_lines(eval_labels));
            std::cout << json{{"per_instance", report.per_instance},
                              {"per_class", report.per_class},
                              {"class_count", report.class_count},
                              {"instance_count", report.instance_count}}
                             .dump(2)
                      << "\n";
            return kExitOk;
        }
        if (eval_records.empty())
            throw ConfigError("evaluate: need --records or --predictions/--labels");
        std::ifstream in(eval_records, std::ios::binary);
        if (!in) throw ConfigError("cannot read " + eval_records);
        std::vector<std::string> hyps, refs;
        int n_no_translation = 0;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            json j = json::parse(line, nullptr, false);
            if (j.is_discarded()) throw FormatError("records file: invalid JSON line");
            if (j.at("hypothesis").is_null()) {
                hyps.emplace_back();
                ++n_no_translation;
            } else {
                hyps.push_back(j.at("hypothesis").get<std::string>());
            }
            refs.push_back(j.at("reference").get<std::string>());
        }
        auto report = corpus_bleu(hyps, refs);
        auto external = read_external_metric(eval_external);
        const std::string report_text =
            report_json(report, static_cast<int>(hyps.size()), n_no_translation, external);
        if (eval_out.empty()) {
            std::cout << report_text;
        } else {
            std::filesystem::create_directories(eval_out);
            std::ofstream json_out(std::filesystem::path(eval_out) / "report.json",
                                   std::ios::binary);
            json_out << report_text;
            std::ofstream md_out(std::filesystem::path(eval_out) / "report.md", std::ios::binary);
            md_out << report_markdown("evaluate", report, external);
        }
        return kExitOk;
    }
    return kExitConfigError;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDataError;
    }
}
