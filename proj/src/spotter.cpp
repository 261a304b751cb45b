#include "slt/spotter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "slt/error.hpp"

namespace slt {

using nlohmann::json;

namespace {

constexpr double kSumSlack = 1e-3;

int expected_window_count(int num_frames, int window_size) {
    return num_frames >= window_size ? num_frames - window_size + 1 : 1;
}

void check_prob(double p, const std::string& video_id) {
    if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError(video_id + ": probability out of [0,1]: " + std::to_string(p));
}

}  // namespace

void validate_stream(const ScoreStream& stream) {
    if (stream.num_frames < 1) throw ValidationError(stream.video_id + ": num_frames must be >= 1");
    if (stream.window_size < 1)
        throw ValidationError(stream.video_id + ": window_size must be >= 1");
    const int expected = expected_window_count(stream.num_frames, stream.window_size);
    if (static_cast<int>(stream.windows.size()) != expected)
        throw ValidationError(stream.video_id + ": window count mismatch: expected " +
                              std::to_string(expected) + " got " +
                              std::to_string(stream.windows.size()));
    for (const auto& w : stream.windows) {
        if (stream.format == ScoreFormat::kDense) {
            if (w.dense.empty()) throw ValidationError(stream.video_id + ": empty dense window");
            if (stream.num_classes && static_cast<int>(w.dense.size()) != stream.num_classes)
                throw ValidationError(stream.video_id + ": dense window size != num_classes");
            double sum = 0.0;
            for (double p : w.dense) {
                check_prob(p, stream.video_id);
                sum += p;
            }
            if (std::abs(sum - 1.0) > kSumSlack)
                throw ValidationError(stream.video_id + ": dense probabilities sum to " +
                                      std::to_string(sum));
        } else {
            if (w.topk.empty()) throw ValidationError(stream.video_id + ": empty topk window");
            std::unordered_set<int> seen;
            double sum = 0.0;
            double prev = 1.0;
            for (const auto& [id, p] : w.topk) {
                if (id < 0 || (stream.num_classes && id >= stream.num_classes))
                    throw ValidationError(stream.video_id + ": topk class id out of range: " +
                                          std::to_string(id));
                if (!seen.insert(id).second)
                    throw ValidationError(stream.video_id + ": duplicate topk class id " +
                                          std::to_string(id));
                check_prob(p, stream.video_id);
                if (p > prev + 1e-12)
                    throw ValidationError(stream.video_id + ": topk entries not sorted by prob");
                prev = p;
                sum += p;
            }
            if (sum > 1.0 + kSumSlack)
                throw ValidationError(stream.video_id + ": topk probabilities sum to " +
                                      std::to_string(sum));
        }
    }
}

std::vector<Prediction> argmax_predictions(const ScoreStream& stream) {
    validate_stream(stream);
    std::vector<Prediction> preds;
    preds.reserve(stream.windows.size());
    for (const auto& w : stream.windows) {
        Prediction best{0, -1.0};
        if (stream.format == ScoreFormat::kDense) {
            for (int id = 0; id < static_cast<int>(w.dense.size()); ++id)
                if (w.dense[id] > best.prob) best = {id, w.dense[id]};
        } else {
            for (const auto& [id, p] : w.topk)
                if (p > best.prob || (p == best.prob && id < best.class_id)) best = {id, p};
        }
        preds.push_back(best);
    }
    return preds;
}

std::vector<int> collapse(const std::vector<int>& preds) {
    std::vector<int> out;
    for (int id : preds)
        if (out.empty() || out.back() != id) out.push_back(id);
    return out;
}

std::vector<int> GlossSequence::class_ids() const {
    std::vector<int> ids;
    ids.reserve(items.size());
    for (const auto& item : items) ids.push_back(item.class_id);
    return ids;
}

GlossSequence spot(const ScoreStream& stream, const SpottingConfig& config) {
    if (config.threshold < 0.0 || config.threshold > 1.0)
        throw ValidationError("threshold must lie in [0,1]");
    const auto preds = argmax_predictions(stream);
    GlossSequence seq;
    seq.video_id = stream.video_id;
    for (int w = 0; w < static_cast<int>(preds.size()); ++w) {
        const auto& p = preds[w];
        if (p.prob < config.threshold) continue;  // filter strictly before collapse
        if (!seq.items.empty() && seq.items.back().class_id == p.class_id) {
            auto& run = seq.items.back();
            run.peak_confidence = std::max(run.peak_confidence, p.prob);
            run.last_window = w;
        } else {
            seq.items.push_back({p.class_id, p.prob, w, w});
        }
    }
    return seq;
}

namespace {

json parse_line(const std::string& line, int lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
        throw FormatError("score file line " + std::to_string(lineno) + ": invalid JSON");
    return j;
}

}  // namespace

ScoreStream read_score_stream(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("score file: missing header line");
    json header = parse_line(line, 1);
    if (!header.is_object() || header.value("v", 0) != 1)
        throw FormatError("score file: bad header (want object with \"v\":1)");
    ScoreStream stream;
    try {
        stream.video_id = header.at("video_id").get<std::string>();
        stream.num_frames = header.at("num_frames").get<int>();
        stream.vocab_hash = header.at("vocab_hash").get<std::string>();
        stream.window_size = header.at("window_size").get<int>();
        const auto format = header.at("format").get<std::string>();
        if (format == "dense")
            stream.format = ScoreFormat::kDense;
        else if (format == "topk")
            stream.format = ScoreFormat::kTopK;
        else
            throw FormatError("score file: unknown format '" + format + "'");
        stream.num_classes = header.value("num_classes", 0);
    } catch (const json::exception& e) {
        throw FormatError(std::string("score file: bad header: ") + e.what());
    }

    int lineno = 1;
    int start_frame = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = parse_line(line, lineno);
        if (!j.is_array())
            throw FormatError("score file line " + std::to_string(lineno) + ": want an array");
        WindowScore w;
        w.start_frame = start_frame++;
        try {
            if (stream.format == ScoreFormat::kDense) {
                w.dense = j.get<std::vector<double>>();
            } else {
                for (const auto& pair : j) {
                    if (!pair.is_array() || pair.size() != 2)
                        throw FormatError("score file line " + std::to_string(lineno) +
                                          ": want [class_id, prob] pairs");
                    w.topk.emplace_back(pair[0].get<int>(), pair[1].get<double>());
                }
            }
        } catch (const json::exception& e) {
            throw FormatError("score file line " + std::to_string(lineno) + ": " + e.what());
        }
        stream.windows.push_back(std::move(w));
    }
    validate_stream(stream);
    return stream;
}

ScoreStream read_score_stream_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read score file: " + path);
    return read_score_stream(in);
}

void write_score_stream(std::ostream& out, const ScoreStream& stream) {
    validate_stream(stream);
    json header = {
        {"v", 1},
        {"video_id", stream.video_id},
        {"num_frames", stream.num_frames},
        {"vocab_hash", stream.vocab_hash},
        {"window_size", stream.window_size},
        {"format", stream.format == ScoreFormat::kDense ? "dense" : "topk"},
    };
    if (stream.num_classes) header["num_classes"] = stream.num_classes;
    out << header.dump() << "\n";
    for (const auto& w : stream.windows) {
        json row = json::array();
        if (stream.format == ScoreFormat::kDense) {
            row = w.dense;
        } else {
            for (const auto& [id, p] : w.topk) row.push_back(json::array({id, p}));
        }
        out << row.dump() << "\n";
    }
}

}  // namespace slt
