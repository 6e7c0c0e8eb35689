#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qwem {

// Replaces every non-alphabetical character with whitespace, lowercases, and
// splits; empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
  std::vector<std::string> words;                    // id -> word
  std::unordered_map<std::string, std::uint32_t> id_of;
  std::vector<std::uint64_t> counts;                 // id -> occurrence count
  std::uint64_t total_tokens = 0;                    // all tokens seen, OOV included

  std::uint32_t size() const { return static_cast<std::uint32_t>(words.size()); }
  std::optional<std::uint32_t> lookup(std::string_view w) const;
};

// A stream of documents; one call yields one tokenized document.
class DocSource {
 public:
  virtual ~DocSource() = default;
  virtual bool next(std::vector<std::string>& tokens) = 0;
  virtual void reset() = 0;  // rewind for multi-pass algorithms
};

// Reads newline-delimited (optionally gzipped) text, one document per line.
// Documents shorter than min_doc_tokens are skipped entirely.
class TextFileSource : public DocSource {
 public:
  explicit TextFileSource(std::string path, std::size_t min_doc_tokens = 0);
  bool next(std::vector<std::string>& tokens) override;
  void reset() override;

 private:
  std::string path_;
  std::size_t min_doc_tokens_;
  struct Reader;
  std::shared_ptr<Reader> reader_;
};

// In-memory documents, mainly for tests and the planted-corpus generator.
class MemorySource : public DocSource {
 public:
  explicit MemorySource(std::vector<std::vector<std::string>> docs)
      : docs_(std::move(docs)) {}
  bool next(std::vector<std::string>& tokens) override;
  void reset() override { pos_ = 0; }

 private:
  std::vector<std::vector<std::string>> docs_;
  std::size_t pos_ = 0;
};

// Top-V vocabulary by descending count (ties broken lexicographically);
// throws DataError when fewer than V distinct words are available.
Vocabulary build_vocabulary(DocSource& source, std::uint32_t V,
                            std::size_t min_doc_tokens = 0);

enum class OovMode {
  kRemove,  // out-of-vocabulary tokens removed before windowing (default)
  kMask,    // OOV tokens keep their positions but contribute no pairs
};

// One symmetric co-occurrence cell, keyed by i <= j. `count` accumulates one
// increment per (center, in-window neighbor) incidence over both orientations,
// and `sep_sum` the corresponding absolute token separations.
struct PairCell {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  std::uint64_t count = 0;
  std::uint64_t sep_sum = 0;
};

struct SkipGramStats {
  std::uint32_t V = 0;
  int L = 0;                                 // context length (L/2 per side)
  std::vector<PairCell> cells;               // sorted by (i, j), i <= j
  std::vector<std::uint64_t> unigram_counts; // size V, in-vocab occurrences
  std::uint64_t unigram_total = 0;
  // Normalizer for the ordered pair distribution: 2*sum_{i<j} count + sum_ii,
  // so that P_ij := pair_counts(i,j)/pair_total sums to 1 over ordered (i,j)
  // and stays marginal-consistent with P_i.
  std::uint64_t pair_total = 0;
  std::uint64_t total_tokens = 0;            // tokens scanned, OOV included

  double unigram_p(std::uint32_t i) const {
    return static_cast<double>(unigram_counts[i]) / static_cast<double>(unigram_total);
  }
  // Symmetric lookup; zero count when the pair never co-occurred.
  const PairCell* find(std::uint32_t i, std::uint32_t j) const;
  double joint_p(std::uint32_t i, std::uint32_t j) const {
    const PairCell* c = find(i, j);
    return c ? static_cast<double>(c->count) / static_cast<double>(pair_total) : 0.0;
  }
  // Mean absolute separation d_ij; only defined for counted pairs.
  double mean_sep(const PairCell& c) const {
    return static_cast<double>(c.sep_sum) / static_cast<double>(c.count);
  }
};

// Shard-parallel accumulation: each worker owns one accumulator; merging is
// commutative and associative, and finalize() canonicalizes ordering so the
// result is independent of sharding.
class StatsAccumulator {
 public:
  explicit StatsAccumulator(std::uint32_t V) : unigram_(V, 0) {}

  // ids: in-vocab token ids at their positions; OOV encoded as kOovId when
  // masking (positions preserved, pairs touching OOV skipped).
  static constexpr std::uint32_t kOovId = 0xffffffffu;
  void add_document(const std::vector<std::uint32_t>& ids, int L);
  void merge_from(const StatsAccumulator& other);
  void add_scanned_tokens(std::uint64_t n) { scanned_ += n; }

  SkipGramStats finalize(std::uint32_t V, int L) const;

 private:
  std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> cells_;
  std::vector<std::uint64_t> unigram_;
  std::uint64_t scanned_ = 0;
};

// Single-pass counting over the stream; throws DataError when no pair is
// observed. L must be even and >= 2.
SkipGramStats count_skipgrams(DocSource& source, const Vocabulary& vocab, int L,
                              OovMode oov = OovMode::kRemove);

// Word-frequency subsampling acceptance probability min(1, t/P + sqrt(t/P))
// with t = 1e-3.
double subsample_acceptance(double p_i);

// vocab.tsv: word<TAB>id<TAB>count, sorted by id, no header.
void write_vocab_tsv(const Vocabulary& vocab, const std::string& path);
Vocabulary read_vocab_tsv(const std::string& path);

// ".sgs" container: one-line JSON header + little-endian binary payload.
void write_sgs(const SkipGramStats& stats, const std::string& path);
SkipGramStats read_sgs(const std::string& path);

}  // namespace qwem
