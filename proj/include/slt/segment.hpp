#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slt/vocab.hpp"

namespace slt {

constexpr int kDefaultWindowSize = 16;
constexpr int kDefaultStride = 8;

// Fixed-length training clip. frame_indices is non-decreasing; a span
// shorter than the window is padded by repeating its last frame.
struct TrainingWindow {
    std::string video_id;
    std::string gloss;
    std::vector<int> frame_indices;
};

struct LabeledWindow {
    TrainingWindow window;
    int class_id = 0;
};

struct SegmentedCorpus {
    std::vector<LabeledWindow> windows;
    int skipped_out_of_vocab = 0;
};

// Cuts one span into windows: short spans yield a single last-frame-padded
// window; spans of length >= window yield floor((L - window)/stride) + 1
// windows at offsets 0, stride, 2*stride, ... Tail frames that do not fill
// a final full window are dropped. Throws ValidationError on empty spans.
std::vector<TrainingWindow> segment_span(const GlossSpan& span,
                                         int window = kDefaultWindowSize,
                                         int stride = kDefaultStride);

// segment_span over every span whose gloss is in the vocabulary; spans with
// out-of-vocabulary glosses are skipped and counted.
SegmentedCorpus segment_corpus(const std::vector<GlossSpan>& spans, const Vocabulary& vocab,
                               int window = kDefaultWindowSize, int stride = kDefaultStride);

// One "video_id<TAB>class_id<TAB>comma-separated-frame-indices" per window.
void write_window_manifest(std::ostream& out, const SegmentedCorpus& corpus);

}  // namespace slt
