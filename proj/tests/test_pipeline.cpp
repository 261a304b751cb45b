#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slt/error.hpp"
#include "slt/pipeline.hpp"
#include "slt/segment.hpp"
#include "stub_server.hpp"
#include "test_util.hpp"

using namespace slt;
using nlohmann::json;
using slt::testing::StubServer;
using slt::testing::TempDir;

namespace {

struct World {
    TempDir tmp;
    Vocabulary vocab;
    std::string vocab_path;

    World() {
        std::vector<GlossSpan> spans;
        for (const std::string gloss : {"ABEND2", "ESSEN1", "FAMILIE1", "LETZTE", "MEHR",
                                        "RESTAURANT1", "URLAUB"})
            spans.push_back({"v", 0, 10, gloss});
        vocab = Vocabulary::build(spans, 1, {});
        vocab_path = (tmp.path() / "vocab.tsv").string();
        vocab.save_file(vocab_path);
        setenv("SLT_TEST_API_KEY", "test-key", 1);
    }

    // Score file whose thresholded argmax path spells out the given glosses.
    std::string write_scores(const std::string& name, const std::vector<std::string>& glosses,
                             double confidence = 0.9) {
        std::vector<std::pair<int, double>> peaks;
        for (const auto& g : glosses) peaks.emplace_back(*vocab.class_id_of(g), confidence);
        if (peaks.empty()) peaks.emplace_back(0, 0.3);  // below default threshold
        auto stream = slt::testing::make_dense_stream(peaks, static_cast<int>(vocab.size()),
                                                      vocab.content_hash());
        stream.video_id = name;
        const auto path = tmp.path() / (name + ".scores.jsonl");
        std::ofstream out(path, std::ios::binary);
        write_score_stream(out, stream);
        return path.string();
    }

    std::string write_manifest(const std::string& name, const json& lines) {
        const auto path = tmp.path() / name;
        std::ofstream out(path, std::ios::binary);
        for (const auto& line : lines) out << line.dump() << "\n";
        return path.string();
    }

    RunConfig config(const StubServer& server, const std::string& out_name) {
        RunConfig cfg;
        cfg.vocab_path = vocab_path;
        cfg.output_dir = tmp.path() / out_name;
        cfg.client.endpoint_url = server.endpoint();
        cfg.client.api_key_env_name = "SLT_TEST_API_KEY";
        cfg.client.retry_backoff = std::chrono::milliseconds(5);
        return cfg;
    }
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("manifest parsing") {
    std::istringstream in(
        R"({"id":"a","scores":"a.jsonl","reference":"Satz eins."})"
        "\n"
        R"({"id":"b","scores":"b.jsonl","reference":"Satz zwei.","gt_glosses":["LETZTE","MEHR"]})"
        "\n");
    auto entries = read_manifest(in);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].id == "a");
    CHECK(!entries[0].gt_glosses);
    REQUIRE(entries[1].gt_glosses);
    CHECK(entries[1].gt_glosses->size() == 2);

    std::istringstream dup(R"({"id":"a","reference":"x"})" "\n" R"({"id":"a","reference":"y"})" "\n");
    CHECK_THROWS_AS(read_manifest(dup), ValidationError);
    std::istringstream bad("not json\n");
    CHECK_THROWS_AS(read_manifest(bad), FormatError);
}

TEST_CASE("single-entry smoke run: scores -> spot -> translate -> BLEU") {
    World world;
    StubServer server([](const std::string& user) { return user; });  // echo
    auto manifest_path = world.write_manifest(
        "m.jsonl", json::array({{{"id", "vid1"},
                                 {"scores", world.write_scores("vid1", {"FAMILIE1", "ESSEN1"})},
                                 {"reference", "FAMILIE ESSEN"}}}));
    auto result = run(read_manifest_file(manifest_path), world.config(server, "out"));

    REQUIRE(result.entries.size() == 1);
    CHECK(result.entries[0].record.glosses == std::vector<std::string>{"FAMILIE", "ESSEN"});
    CHECK(result.entries[0].record.hypothesis == "FAMILIE ESSEN");
    CHECK(result.report.bleu[0] == doctest::Approx(100.0));
    CHECK(result.n_failed == 0);

    CHECK(std::filesystem::exists(world.tmp.path() / "out" / "records.jsonl"));
    auto report = json::parse(slurp(world.tmp.path() / "out" / "report.json"));
    CHECK(report["n_sentences"] == 1);
    CHECK(std::filesystem::exists(world.tmp.path() / "out" / "report.md"));
    CHECK(std::filesystem::exists(world.tmp.path() / "out" / "cache"));
}

TEST_CASE("ground_truth_in_vocab filters by vocabulary membership") {
    World world;
    StubServer server([](const std::string& user) { return "<" + user + ">"; });
    auto manifest_path = world.write_manifest(
        "m.jsonl", json::array({{{"id", "vid1"},
                                 {"reference", "Letztens war ich im Urlaub auf Sardinien."},
                                 {"gt_glosses", {"LETZTE", "URLAUB", "SARDINIEN"}}}}));
    auto cfg = world.config(server, "out_gt");
    cfg.gloss_source = GlossSource::kGroundTruthInVocab;
    auto result = run(read_manifest_file(manifest_path), cfg);
    CHECK(result.entries[0].record.glosses == std::vector<std::string>{"LETZTE", "URLAUB"});
    CHECK(result.entries[0].record.hypothesis == "<LETZTE URLAUB>");

    SUBCASE("plain ground_truth keeps everything") {
        cfg.gloss_source = GlossSource::kGroundTruth;
        cfg.output_dir = world.tmp.path() / "out_gt_all";
        auto all = run(read_manifest_file(manifest_path), cfg);
        CHECK(all.entries[0].record.glosses ==
              std::vector<std::string>{"LETZTE", "URLAUB", "SARDINIEN"});
    }
    SUBCASE("ground truth sources require gt_glosses") {
        auto missing = world.write_manifest(
            "m2.jsonl",
            json::array({{{"id", "nogt"}, {"reference", "x"}}}));
        cfg.fail_fast = true;
        cfg.output_dir = world.tmp.path() / "out_gt_missing";
        CHECK_THROWS_AS(run(read_manifest_file(missing), cfg), ConfigError);
    }
}

TEST_CASE("streams from a different vocabulary are rejected before spotting") {
    World world;
    StubServer server;
    auto scores = world.write_scores("vid1", {"MEHR"});
    // corrupt the vocab hash in the score header
    auto text = slurp(scores);
    auto pos = text.find(world.vocab.content_hash());
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 8, "deadbeef");
    {
        std::ofstream out(scores, std::ios::binary);
        out << text;
    }
    auto manifest_path = world.write_manifest(
        "m.jsonl",
        json::array({{{"id", "vid1"}, {"scores", scores}, {"reference", "Mehr."}}}));

    SUBCASE("fail fast throws") {
        auto cfg = world.config(server, "out_ff");
        cfg.fail_fast = true;
        CHECK_THROWS_AS(run(read_manifest_file(manifest_path), cfg), ValidationError);
    }
    SUBCASE("default records the failure and continues") {
        auto result = run(read_manifest_file(manifest_path), world.config(server, "out_cont"));
        CHECK(result.n_failed == 1);
        REQUIRE(!result.entries[0].error.empty());
        CHECK(server.calls() == 0);
        auto records = json::parse(slurp(world.tmp.path() / "out_cont" / "records.jsonl"));
        CHECK(records.contains("error"));
    }
}

TEST_CASE("warm-cache reruns are byte-identical with zero network calls") {
    World world;
    StubServer server([](const std::string& user) { return "Satz zu: " + user; });
    json lines = json::array();
    std::vector<std::vector<std::string>> gloss_sets = {
        {"FAMILIE1", "ESSEN1", "ABEND2", "RESTAURANT1"},
        {"LETZTE", "MEHR"},
        {"URLAUB"},
        {},  // below-threshold stream -> empty gloss sequence -> No Translation
        {"ESSEN1", "MEHR", "ESSEN1"},
    };
    for (std::size_t i = 0; i < gloss_sets.size(); ++i) {
        const std::string id = "vid" + std::to_string(i);
        lines.push_back({{"id", id},
                         {"scores", world.write_scores(id, gloss_sets[i])},
                         {"reference", "Referenzsatz Nummer " + std::to_string(i) + "."}});
    }
    auto manifest = read_manifest_file(world.write_manifest("m.jsonl", lines));

    auto cfg = world.config(server, "out_r1");
    cfg.cache_dir = world.tmp.path() / "shared_cache";
    run(manifest, cfg);  // cold
    const int cold_calls = server.calls();
    CHECK(cold_calls == 4);  // the empty entry is skipped

    cfg.output_dir = world.tmp.path() / "out_r2";
    auto r2 = run(manifest, cfg);
    cfg.output_dir = world.tmp.path() / "out_r3";
    auto r3 = run(manifest, cfg);
    CHECK(server.calls() == cold_calls);  // warm: zero extra calls
    CHECK(r2.n_no_translation == 1);

    CHECK(slurp(world.tmp.path() / "out_r2" / "records.jsonl") ==
          slurp(world.tmp.path() / "out_r3" / "records.jsonl"));
    CHECK(slurp(world.tmp.path() / "out_r2" / "report.json") ==
          slurp(world.tmp.path() / "out_r3" / "report.json"));
    auto report = json::parse(slurp(world.tmp.path() / "out_r2" / "report.json"));
    CHECK(report["n_sentences"] == 5);
    CHECK(report["n_no_translation"] == 1);

    // every entry appears exactly once, in manifest order
    std::istringstream records(slurp(world.tmp.path() / "out_r2" / "records.jsonl"));
    std::string line;
    int i = 0;
    while (std::getline(records, line))
        CHECK(json::parse(line)["id"] == "vid" + std::to_string(i++));
    CHECK(i == 5);
}

TEST_CASE("threshold sweep shares the cache and honors boundaries") {
    World world;
    StubServer server([](const std::string& user) { return user; });
    // mixed confidences so different thresholds spot different subsequences
    std::vector<std::pair<int, double>> peaks = {
        {*world.vocab.class_id_of("FAMILIE1"), 0.95},
        {*world.vocab.class_id_of("ESSEN1"), 0.6},
        {*world.vocab.class_id_of("MEHR"), 0.8},
        {*world.vocab.class_id_of("LETZTE"), 0.4},
    };
    auto stream = slt::testing::make_dense_stream(peaks, static_cast<int>(world.vocab.size()),
                                                  world.vocab.content_hash());
    stream.video_id = "mix";
    const auto scores_path = world.tmp.path() / "mix.scores.jsonl";
    {
        std::ofstream out(scores_path, std::ios::binary);
        write_score_stream(out, stream);
    }
    auto manifest = read_manifest_file(world.write_manifest(
        "m.jsonl", json::array({{{"id", "mix"},
                                 {"scores", scores_path.string()},
                                 {"reference", "FAMILIE ESSEN MEHR LETZTE"}}})));

    auto cfg = world.config(server, "sweep");
    auto rows = sweep_threshold(manifest, cfg, {0.0, 0.5, 0.7, 0.9, 1.01});
    REQUIRE(rows.size() == 5);
    CHECK(rows.back().first == doctest::Approx(1.0));  // clamped

    auto glosses_at = [&](int idx) {
        auto records = json::parse(slurp(world.tmp.path() / "sweep" /
                                         ("threshold_" + std::to_string(idx)) / "records.jsonl"));
        return records["glosses"].get<std::vector<std::string>>();
    };
    CHECK(glosses_at(0) == std::vector<std::string>{"FAMILIE", "ESSEN", "MEHR", "LETZTE"});
    CHECK(glosses_at(2) == std::vector<std::string>{"FAMILIE", "MEHR"});
    CHECK(glosses_at(4).empty());

    // subsequence audit across the sweep
    auto is_subseq = [](const std::vector<std::string>& small,
                        const std::vector<std::string>& big) {
        std::size_t i = 0;
        for (const auto& x : big)
            if (i < small.size() && small[i] == x) ++i;
        return i == small.size();
    };
    for (int idx = 1; idx < 5; ++idx) CHECK(is_subseq(glosses_at(idx), glosses_at(idx - 1)));

    CHECK(std::filesystem::exists(world.tmp.path() / "sweep" / "sweep.json"));
    CHECK(std::filesystem::exists(world.tmp.path() / "sweep" / "sweep.md"));
    // one user message per distinct thresholded gloss string, cache shared
    CHECK(server.calls() <= 4);
}

TEST_CASE("config file parsing and overrides") {
    TempDir tmp;
    const auto path = tmp.path() / "run.conf";
    {
        std::ofstream out(path);
        out << "# pipeline configuration\n"
               "[spotting]\n"
               "threshold = 0.5\n"
               "[client]\n"
               "endpoint_url = \"http://127.0.0.1:9/v1/chat/completions\"\n"
               "model = gpt-3.5-turbo\n"
               "max_concurrency = 2\n"
               "[run]\n"
               "gloss_source = ground_truth_in_vocab\n"
               "call_on_empty = true\n";
    }
    auto kv = read_config_file(path.string());
    RunConfig cfg;
    apply_config(kv, cfg);
    CHECK(cfg.spotting.threshold == doctest::Approx(0.5));
    CHECK(cfg.client.endpoint_url == "http://127.0.0.1:9/v1/chat/completions");
    CHECK(cfg.client.max_concurrency == 2);
    CHECK(cfg.gloss_source == GlossSource::kGroundTruthInVocab);
    CHECK(!cfg.skip_empty);

    CHECK_THROWS_AS(apply_config({{"run.nope", "1"}}, cfg), ConfigError);
    CHECK_THROWS_AS(apply_config({{"spotting.threshold", "abc"}}, cfg), ConfigError);
}
