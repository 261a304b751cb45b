#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "slt/error.hpp"
#include "slt/metrics.hpp"
#include "slt/pipeline.hpp"
#include "slt/segment.hpp"
#include "slt/spotter.hpp"
#include "slt/translate.hpp"
#include "slt/vocab.hpp"

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace slt;

namespace {

Vocabulary build_vocabulary_py(const std::vector<GlossSpan>& spans, int min_count,
                               const std::set<std::string>& exclusions) {
    return Vocabulary::build(spans, min_count, exclusions);
}

}  // namespace

PYBIND11_MODULE(_sltpipe, m) {
    m.doc() = "Gloss spotting, LLM gloss-to-text translation, and BLEU evaluation";

    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);
    py::register_exception<HttpError>(m, "HttpError", PyExc_RuntimeError);

    py::class_<GlossSpan>(m, "GlossSpan")
        .def(py::init([](std::string video_id, int start_frame, int end_frame, std::string gloss) {
                 return GlossSpan{std::move(video_id), start_frame, end_frame, std::move(gloss)};
             }),
             py::arg("video_id"), py::arg("start_frame"), py::arg("end_frame"), py::arg("gloss"))
        .def_readwrite("video_id", &GlossSpan::video_id)
        .def_readwrite("start_frame", &GlossSpan::start_frame)
        .def_readwrite("end_frame", &GlossSpan::end_frame)
        .def_readwrite("gloss", &GlossSpan::gloss);

    py::class_<VocabEntry>(m, "VocabEntry")
        .def_readonly("gloss", &VocabEntry::gloss)
        .def_readonly("class_id", &VocabEntry::class_id)
        .def_readonly("sample_count", &VocabEntry::sample_count);

    py::class_<Vocabulary>(m, "Vocabulary")
        .def("class_id_of", &Vocabulary::class_id_of, py::arg("gloss"))
        .def("gloss_of", &Vocabulary::gloss_of, py::arg("class_id"))
        .def("entries", &Vocabulary::entries)
        .def("__len__", &Vocabulary::size)
        .def_property_readonly("content_hash", &Vocabulary::content_hash)
        .def_property_readonly("min_count", &Vocabulary::min_count)
        .def("save", &Vocabulary::save_file, py::arg("path"))
        .def_static("load", &Vocabulary::load_file, py::arg("path"))
        .def("dumps", [](const Vocabulary& v) {
            std::ostringstream out;
            v.save(out);
            return out.str();
        });

    m.def("build_vocabulary", &build_vocabulary_py, py::arg("spans"), py::arg("min_count") = 13,
          py::arg("exclusions") = std::set<std::string>{});
    m.def("base_label", &base_label, py::arg("gloss"));

    py::class_<TrainingWindow>(m, "TrainingWindow")
        .def_readonly("video_id", &TrainingWindow::video_id)
        .def_readonly("gloss", &TrainingWindow::gloss)
        .def_readonly("frame_indices", &TrainingWindow::frame_indices);

    m.def("segment_span", &segment_span, py::arg("span"), py::arg("window") = kDefaultWindowSize,
          py::arg("stride") = kDefaultStride);

    py::class_<SpottingConfig>(m, "SpottingConfig")
        .def(py::init<>())
        .def(py::init([](double threshold, int window_size) {
                 return SpottingConfig{threshold, window_size};
             }),
             py::arg("threshold") = 0.7, py::arg("window_size") = 16)
        .def_readwrite("threshold", &SpottingConfig::threshold)
        .def_readwrite("window_size", &SpottingConfig::window_size);

    py::class_<GlossSpotItem>(m, "GlossSpotItem")
        .def_readonly("class_id", &GlossSpotItem::class_id)
        .def_readonly("peak_confidence", &GlossSpotItem::peak_confidence)
        .def_readonly("first_window", &GlossSpotItem::first_window)
        .def_readonly("last_window", &GlossSpotItem::last_window);

    py::class_<GlossSequence>(m, "GlossSequence")
        .def_readonly("video_id", &GlossSequence::video_id)
        .def_readonly("items", &GlossSequence::items)
        .def("class_ids", &GlossSequence::class_ids);

    py::class_<ScoreStream>(m, "ScoreStream")
        .def_readonly("video_id", &ScoreStream::video_id)
        .def_readonly("num_frames", &ScoreStream::num_frames)
        .def_readonly("vocab_hash", &ScoreStream::vocab_hash)
        .def_readonly("window_size", &ScoreStream::window_size)
        .def("__len__", [](const ScoreStream& s) { return s.windows.size(); });

    m.def("read_score_stream", &read_score_stream_file, py::arg("path"));
    m.def(
        "read_score_stream_str",
        [](const std::string& text) {
            std::istringstream in(text);
            return read_score_stream(in);
        },
        py::arg("text"));
    m.def("collapse", &collapse, py::arg("preds"));
    m.def("spot", &spot, py::arg("stream"), py::arg("config") = SpottingConfig{});

    m.attr("SYSTEM_PROMPT") = std::string(kSystemPrompt);
    m.def("build_user_message", &build_user_message, py::arg("glosses"),
          py::arg("strip_variants") = true);
    m.def("normalize_response", &normalize_response, py::arg("raw"));

    py::class_<BleuReport>(m, "BleuReport")
        .def_readonly("bleu", &BleuReport::bleu)
        .def_readonly("precisions", &BleuReport::precisions)
        .def_readonly("brevity_penalty", &BleuReport::brevity_penalty)
        .def_readonly("hyp_len", &BleuReport::hyp_len)
        .def_readonly("ref_len", &BleuReport::ref_len);

    py::class_<AccuracyReport>(m, "AccuracyReport")
        .def_readonly("per_instance", &AccuracyReport::per_instance)
        .def_readonly("per_class", &AccuracyReport::per_class)
        .def_readonly("class_count", &AccuracyReport::class_count)
        .def_readonly("instance_count", &AccuracyReport::instance_count);

    m.def("tokenize_13a", &tokenize_13a, py::arg("text"));
    m.def("corpus_bleu", &corpus_bleu, py::arg("hypotheses"), py::arg("references"),
          py::arg("max_order") = 4);
    m.def("accuracy", &accuracy, py::arg("predictions"), py::arg("labels"));
}
