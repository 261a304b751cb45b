#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace slt {

// One frame-level gloss annotation. end_frame is exclusive.
struct GlossSpan {
    std::string video_id;
    int start_frame = 0;
    int end_frame = 0;
    std::string gloss;

    int length() const { return end_frame - start_frame; }
};

struct VocabEntry {
    std::string gloss;
    int class_id = 0;
    int sample_count = 0;

    bool operator==(const VocabEntry&) const = default;
};

// Gloss -> dense class-id map. Entries are sorted by byte-lexicographic
// gloss order and ids assigned 0..N-1 in that order, so the mapping is
// reproducible regardless of input ordering.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(const std::vector<GlossSpan>& spans, int min_count,
                            const std::set<std::string>& exclusions);

    std::optional<int> class_id_of(const std::string& gloss) const;
    bool contains(const std::string& gloss) const { return class_id_of(gloss).has_value(); }
    const std::string& gloss_of(int class_id) const { return entries_.at(class_id).gloss; }

    const std::vector<VocabEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    int min_count() const { return min_count_; }
    const std::string& content_hash() const { return content_hash_; }

    // Line format: header "#vocab v1 hash=<h> min_count=<k>", then one
    // "gloss<TAB>class_id<TAB>count" per entry.
    void save(std::ostream& out) const;
    static Vocabulary load(std::istream& in);
    void save_file(const std::string& path) const;
    static Vocabulary load_file(const std::string& path);

private:
    void reindex();

    std::vector<VocabEntry> entries_;
    std::unordered_map<std::string, int> index_;
    int min_count_ = 1;
    std::string content_hash_;
};

// Strips the trailing variant code from a gloss label: the maximal trailing
// run of digit-led blocks plus an optional ":"-prefixed subvariant
// ("NUM-EINER1A:1d" -> "NUM-EINER", "DDR4" -> "DDR"). Labels that are all
// variant code are returned unchanged so the result stays non-empty.
std::string base_label(const std::string& gloss);

// Span manifest: one "video_id<TAB>start<TAB>end<TAB>gloss" per line,
// '#'-prefixed lines ignored.
std::vector<GlossSpan> read_spans(std::istream& in);
std::vector<GlossSpan> read_spans_file(const std::string& path);

}  // namespace slt
