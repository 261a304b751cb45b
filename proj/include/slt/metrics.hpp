#pragma once

#include <optional>
#include <string>
#include <vector>

namespace slt {

// Corpus BLEU at orders 1..N on the 0-100 scale, reference-tool compatible
// (13a tokenization, case-sensitive, "exp" smoothing).
struct BleuReport {
    std::vector<double> bleu;        // bleu[n-1] = BLEU-n
    std::vector<double> precisions;  // modified n-gram precisions at max order
    double brevity_penalty = 1.0;
    long hyp_len = 0;
    long ref_len = 0;
};

struct AccuracyReport {
    double per_instance = 0.0;  // percent
    double per_class = 0.0;     // percent, averaged over classes present in labels
    int class_count = 0;
    int instance_count = 0;
};

// mteval-13a tokenization: entity unescaping, symbol padding, periods and
// commas detached unless digit-adjacent, split on whitespace.
std::vector<std::string> tokenize_13a(const std::string& text);

// Clipped modified n-gram precisions with exp smoothing and the standard
// brevity penalty. Hypotheses and references are tokenized with 13a,
// case-sensitive. Throws ValidationError on length mismatch or empty input.
BleuReport corpus_bleu(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references, int max_order = 4);

AccuracyReport accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Externally computed per-sentence metric (e.g. a neural score file);
// ingested and averaged, never computed here.
struct ExternalMetric {
    std::string name;
    double mean = 0.0;
};

// Report JSON ({bleu, precisions, bp, hyp_len, ref_len, tokenizer,
// smoothing, case_sensitive, n_sentences, n_no_translation,
// external_metric?}) and the B-1..B-4 markdown table.
std::string report_json(const BleuReport& report, int n_sentences, int n_no_translation,
                        const std::optional<ExternalMetric>& external = std::nullopt);
std::string report_markdown(const std::string& row_label, const BleuReport& report,
                            const std::optional<ExternalMetric>& external = std::nullopt);

}  // namespace slt
