#include "slt/vocab.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "slt/digest.hpp"
#include "slt/error.hpp"

namespace slt {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

namespace {

std::string hash_entries(const std::vector<VocabEntry>& entries) {
    std::string buf;
    for (const auto& e : entries) {
        buf += e.gloss;
        buf += '\t';
        buf += std::to_string(e.class_id);
        buf += '\n';
    }
    return sha256_hex(buf);
}

void check_label(const std::string& gloss) {
    if (gloss.empty()) throw ValidationError("empty gloss label");
    if (gloss.find_first_of(" \t\r\n") != std::string::npos)
        throw ValidationError("gloss label contains whitespace: '" + gloss + "'");
}

}  // namespace

Vocabulary Vocabulary::build(const std::vector<GlossSpan>& spans, int min_count,
                             const std::set<std::string>& exclusions) {
    if (min_count < 1) throw ValidationError("min_count must be >= 1");
    std::map<std::string, int> counts;  // ordered: lexicographic byte order
    for (const auto& span : spans) {
        check_label(span.gloss);
        ++counts[span.gloss];
    }
    Vocabulary vocab;
    vocab.min_count_ = min_count;
    for (const auto& [gloss, count] : counts) {
        if (count < min_count || exclusions.count(gloss)) continue;
        vocab.entries_.push_back({gloss, static_cast<int>(vocab.entries_.size()), count});
    }
    vocab.reindex();
    return vocab;
}

void Vocabulary::reindex() {
    index_.clear();
    for (const auto& e : entries_) index_[e.gloss] = e.class_id;
    content_hash_ = hash_entries(entries_);
}

std::optional<int> Vocabulary::class_id_of(const std::string& gloss) const {
    auto it = index_.find(gloss);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Vocabulary::save(std::ostream& out) const {
    out << "#vocab v1 hash=" << content_hash_ << " min_count=" << min_count_ << "\n";
    for (const auto& e : entries_)
        out << e.gloss << '\t' << e.class_id << '\t' << e.sample_count << "\n";
}

Vocabulary Vocabulary::load(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw FormatError("vocab file: missing header");
    std::smatch m;
    static const std::regex header_re(R"(#vocab v1 hash=([0-9a-f]+) min_count=(\d+))");
    if (!std::regex_match(header, m, header_re))
        throw FormatError("vocab file: bad header: '" + header + "'");
    Vocabulary vocab;
    vocab.min_count_ = std::stoi(m[2]);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        VocabEntry e;
        if (!(std::getline(ls, e.gloss, '\t') && ls >> e.class_id && ls.get() == '\t' &&
              ls >> e.sample_count))
            throw FormatError("vocab file: bad entry line: '" + line + "'");
        if (e.class_id != static_cast<int>(vocab.entries_.size()))
            throw FormatError("vocab file: class ids not dense at '" + e.gloss + "'");
        vocab.entries_.push_back(e);
    }
    vocab.reindex();
    if (vocab.content_hash_ != m[1])
        throw FormatError("vocab file: content hash mismatch (file says " + m[1].str() + ")");
    return vocab;
}

void Vocabulary::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write vocab file: " + path);
    save(out);
}

Vocabulary Vocabulary::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read vocab file: " + path);
    return load(in);
}

std::string base_label(const std::string& gloss) {
    static const std::regex variant_re(R"((?:[0-9]+[A-Z]*)+(?::[0-9A-Za-z]+)?$)");
    // Strip to a fixed point: a ":"-subvariant can mask an earlier variant
    // block (e.g. "10E:0:Z1:a" -> "10E:0:Z" -> "10E:").
    std::string label = gloss;
    for (;;) {
        std::smatch m;
        if (!std::regex_search(label, m, variant_re)) return label;
        if (m.position(0) == 0) return label;  // label is all variant code
        label = label.substr(0, static_cast<std::size_t>(m.position(0)));
    }
}

std::vector<GlossSpan> read_spans(std::istream& in) {
    std::vector<GlossSpan> spans;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        GlossSpan s;
        std::string start_s, end_s;
        if (!(std::getline(ls, s.video_id, '\t') && std::getline(ls, start_s, '\t') &&
              std::getline(ls, end_s, '\t') && std::getline(ls, s.gloss)))
            throw FormatError("span manifest line " + std::to_string(lineno) + ": bad line");
        try {
            s.start_frame = std::stoi(start_s);
            s.end_frame = std::stoi(end_s);
        } catch (const std::exception&) {
            throw FormatError("span manifest line " + std::to_string(lineno) + ": bad frame number");
        }
        if (s.start_frame < 0 || s.end_frame <= s.start_frame)
            throw ValidationError("span manifest line " + std::to_string(lineno) +
                                  ": end_frame must exceed start_frame >= 0");
        check_label(s.gloss);
        spans.push_back(std::move(s));
    }
    return spans;
}

std::vector<GlossSpan> read_spans_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read span manifest: " + path);
    return read_spans(in);
}

}  // namespace slt
