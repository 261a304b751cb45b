#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace slt {

enum class ScoreFormat { kDense, kTopK };

// Classifier posterior for one sliding-window position. Exactly one of
// dense / topk is populated, per the stream's format.
struct WindowScore {
    int start_frame = 0;
    std::vector<double> dense;
    std::vector<std::pair<int, double>> topk;  // sorted by descending prob
};

// Stride-1 window scores for one video. For T >= window_size there are
// exactly T - window_size + 1 windows; shorter (padded) videos carry one.
struct ScoreStream {
    std::string video_id;
    int num_frames = 0;
    std::string vocab_hash;
    int window_size = kDefaultScoreWindow;
    int num_classes = 0;  // 0 = unknown (topk stream without the header field)
    ScoreFormat format = ScoreFormat::kDense;
    std::vector<WindowScore> windows;

    static constexpr int kDefaultScoreWindow = 16;
};

struct SpottingConfig {
    double threshold = 0.7;
    int window_size = 16;
};

struct GlossSpotItem {
    int class_id = 0;
    double peak_confidence = 0.0;
    int first_window = 0;
    int last_window = 0;

    bool operator==(const GlossSpotItem&) const = default;
};

// Thresholded, collapsed prediction sequence for one video. Consecutive
// items always carry distinct class ids.
struct GlossSequence {
    std::string video_id;
    std::vector<GlossSpotItem> items;

    std::vector<int> class_ids() const;
};

struct Prediction {
    int class_id = 0;
    double prob = 0.0;
};

// One (argmax class, posterior) per window, in window order; ties break to
// the lowest class id.
std::vector<Prediction> argmax_predictions(const ScoreStream& stream);

// Replaces each maximal run of equal consecutive ids with a single id.
std::vector<int> collapse(const std::vector<int>& preds);

// Filter by prob >= threshold, then collapse, in that order. Each surviving
// item carries the run's peak confidence and its window extent.
GlossSequence spot(const ScoreStream& stream, const SpottingConfig& config);

// JSON-lines score file: header object then one window per line (dense:
// probability array; topk: [class_id, prob] pairs sorted by descending
// prob). Throws FormatError on malformed bytes and ValidationError on
// invariant breaches (window count, probability range, duplicate ids).
ScoreStream read_score_stream(std::istream& in);
ScoreStream read_score_stream_file(const std::string& path);
void write_score_stream(std::ostream& out, const ScoreStream& stream);

// Invariant checks shared by the reader and in-memory producers.
void validate_stream(const ScoreStream& stream);

}  // namespace slt
