#include "slt/segment.hpp"

#include <ostream>

#include "slt/error.hpp"

namespace slt {

std::vector<TrainingWindow> segment_span(const GlossSpan& span, int window, int stride) {
    if (window < 1 || stride < 1) throw ValidationError("window and stride must be >= 1");
    const int length = span.length();
    if (length <= 0)
        throw ValidationError("degenerate span for '" + span.gloss + "' in " + span.video_id);

    std::vector<TrainingWindow> out;
    if (length < window) {
        TrainingWindow w{span.video_id, span.gloss, {}};
        w.frame_indices.reserve(window);
        for (int f = span.start_frame; f < span.end_frame; ++f) w.frame_indices.push_back(f);
        w.frame_indices.resize(window, span.end_frame - 1);  // repeat the last frame
        out.push_back(std::move(w));
        return out;
    }
    for (int offset = 0; offset + window <= length; offset += stride) {
        TrainingWindow w{span.video_id, span.gloss, {}};
        w.frame_indices.reserve(window);
        for (int i = 0; i < window; ++i)
            w.frame_indices.push_back(span.start_frame + offset + i);
        out.push_back(std::move(w));
    }
    return out;
}

SegmentedCorpus segment_corpus(const std::vector<GlossSpan>& spans, const Vocabulary& vocab,
                               int window, int stride) {
    SegmentedCorpus corpus;
    for (const auto& span : spans) {
        auto class_id = vocab.class_id_of(span.gloss);
        if (!class_id) {
            ++corpus.skipped_out_of_vocab;
            continue;
        }
        for (auto& w : segment_span(span, window, stride))
            corpus.windows.push_back({std::move(w), *class_id});
    }
    return corpus;
}

void write_window_manifest(std::ostream& out, const SegmentedCorpus& corpus) {
    for (const auto& lw : corpus.windows) {
        out << lw.window.video_id << '\t' << lw.class_id << '\t';
        for (std::size_t i = 0; i < lw.window.frame_indices.size(); ++i) {
            if (i) out << ',';
            out << lw.window.frame_indices[i];
        }
        out << '\n';
    }
}

}  // namespace slt
