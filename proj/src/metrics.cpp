#include "slt/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "slt/error.hpp"

namespace slt {

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

std::vector<std::string> tokenize_13a(const std::string& text) {
    std::string line = text;
    replace_all(line, "<skipped>", "");
    replace_all(line, "-\n", "");
    replace_all(line, "\n", " ");
    if (line.find('&') != std::string::npos) {
        replace_all(line, "&quot;", "\"");
        replace_all(line, "&amp;", "&");
        replace_all(line, "&lt;", "<");
        replace_all(line, "&gt;", ">");
    }
    line = " " + line + " ";

    // mteval-v13a language-independent rules, applied in order: pad ASCII
    // symbols, detach '.'/',' not adjacent to a digit, split digit-dash.
    static const std::regex symbol_re(R"(([\{-\~\[-\` -\&\(-\+\:-\@\/]))");
    static const std::regex period_before_re(R"(([^0-9])([\.,]))");
    static const std::regex period_after_re(R"(([\.,])([^0-9]))");
    static const std::regex digit_dash_re(R"(([0-9])(-))");
    line = std::regex_replace(line, symbol_re, " $1 ");
    line = std::regex_replace(line, period_before_re, "$1 $2 ");
    line = std::regex_replace(line, period_after_re, " $1 $2");
    line = std::regex_replace(line, digit_dash_re, "$1 $2 ");

    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

namespace {

// Joined with a separator no 13a token can contain.
std::map<std::string, long> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, long> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key += '\x1f';
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

constexpr double kLogZero = -9999999999.0;

double safe_log(double x) { return x == 0.0 ? kLogZero : std::log(x); }

// Geometric mean of exp-smoothed precisions at the given order, times BP.
double bleu_at_order(const std::vector<long>& correct, const std::vector<long>& total,
                     long hyp_len, long ref_len, int order) {
    std::vector<double> precisions(order, 0.0);
    double smooth_mteval = 1.0;
    for (int n = 1; n <= order; ++n) {
        if (total[n - 1] == 0) break;
        if (correct[n - 1] == 0) {
            smooth_mteval *= 2.0;
            precisions[n - 1] = 100.0 / (smooth_mteval * static_cast<double>(total[n - 1]));
        } else {
            precisions[n - 1] =
                100.0 * static_cast<double>(correct[n - 1]) / static_cast<double>(total[n - 1]);
        }
    }
    double bp = 1.0;
    if (hyp_len < ref_len)
        bp = hyp_len > 0 ? std::exp(1.0 - static_cast<double>(ref_len) / hyp_len) : 0.0;
    double log_sum = 0.0;
    for (int n = 0; n < order; ++n) log_sum += safe_log(precisions[n]);
    return bp * std::exp(log_sum / order);
}

}  // namespace

BleuReport corpus_bleu(const std::vector<std::string>& hypotheses,
                       const std::vector<std::string>& references, int max_order) {
    if (max_order < 1) throw ValidationError("max_order must be >= 1");
    if (hypotheses.size() != references.size() || hypotheses.empty())
        throw ValidationError("corpus_bleu: need equal, non-zero hypothesis/reference counts");

    std::vector<long> correct(max_order, 0), total(max_order, 0);
    long hyp_len = 0, ref_len = 0;
    for (std::size_t i = 0; i < hypotheses.size(); ++i) {
        const auto hyp = tokenize_13a(hypotheses[i]);
        const auto ref = tokenize_13a(references[i]);
        hyp_len += static_cast<long>(hyp.size());
        ref_len += static_cast<long>(ref.size());
        for (int n = 1; n <= max_order; ++n) {
            const auto hyp_ngrams = ngram_counts(hyp, n);
            if (hyp_ngrams.empty()) continue;
            const auto ref_ngrams = ngram_counts(ref, n);
            for (const auto& [key, count] : hyp_ngrams) {
                total[n - 1] += count;
                auto it = ref_ngrams.find(key);
                if (it != ref_ngrams.end()) correct[n - 1] += std::min(count, it->second);
            }
        }
    }

    BleuReport report;
    report.hyp_len = hyp_len;
    report.ref_len = ref_len;
    report.brevity_penalty = 1.0;
    if (hyp_len < ref_len)
        report.brevity_penalty =
            hyp_len > 0 ? std::exp(1.0 - static_cast<double>(ref_len) / hyp_len) : 0.0;
    for (int n = 1; n <= max_order; ++n)
        report.bleu.push_back(bleu_at_order(correct, total, hyp_len, ref_len, n));

    // Reported precisions use the full-order smoothing pass.
    report.precisions.assign(max_order, 0.0);
    double smooth_mteval = 1.0;
    for (int n = 1; n <= max_order; ++n) {
        if (total[n - 1] == 0) break;
        if (correct[n - 1] == 0) {
            smooth_mteval *= 2.0;
            report.precisions[n - 1] = 100.0 / (smooth_mteval * static_cast<double>(total[n - 1]));
        } else {
            report.precisions[n - 1] =
                100.0 * static_cast<double>(correct[n - 1]) / static_cast<double>(total[n - 1]);
        }
    }
    return report;
}

AccuracyReport accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || predictions.empty())
        throw ValidationError("accuracy: need equal, non-zero prediction/label counts");
    std::map<int, std::pair<long, long>> per_class;  // label -> (correct, total)
    long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        auto& [c, t] = per_class[labels[i]];
        ++t;
        if (predictions[i] == labels[i]) {
            ++c;
            ++correct;
        }
    }
    AccuracyReport report;
    report.instance_count = static_cast<int>(predictions.size());
    report.class_count = static_cast<int>(per_class.size());
    report.per_instance = 100.0 * correct / static_cast<double>(predictions.size());
    double acc_sum = 0.0;
    for (const auto& [label, ct] : per_class)
        acc_sum += static_cast<double>(ct.first) / static_cast<double>(ct.second);
    report.per_class = 100.0 * acc_sum / static_cast<double>(per_class.size());
    return report;
}

std::string report_json(const BleuReport& report, int n_sentences, int n_no_translation,
                        const std::optional<ExternalMetric>& external) {
    nlohmann::json j = {
        {"bleu", report.bleu},
        {"precisions", report.precisions},
        {"bp", report.brevity_penalty},
        {"hyp_len", report.hyp_len},
        {"ref_len", report.ref_len},
        {"tokenizer", "13a"},
        {"smoothing", "exp"},
        {"case_sensitive", true},
        {"n_sentences", n_sentences},
        {"n_no_translation", n_no_translation},
    };
    if (external) j["external_metric"] = {{"name", external->name}, {"mean", external->mean}};
    return j.dump(2) + "\n";
}

std::string report_markdown(const std::string& row_label, const BleuReport& report,
                            const std::optional<ExternalMetric>& external) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    const std::string ext_name = external ? external->name : "BLEURT";
    out << "| Method | B-1 | B-2 | B-3 | B-4 | " << ext_name << " |\n";
    out << "|---|---|---|---|---|---|\n";
    out << "| " << row_label << " |";
    for (int n = 0; n < 4; ++n) {
        if (n < static_cast<int>(report.bleu.size()))
            out << ' ' << report.bleu[n] << " |";
        else
            out << " - |";
    }
    if (external)
        out << ' ' << external->mean << " |\n";
    else
        out << " - |\n";
    return out.str();
}

}  // namespace slt
