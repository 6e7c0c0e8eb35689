#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qwem/corpus.hpp"

namespace qwem {

struct AnalogyTuple {
  std::uint32_t a = 0, b = 0, a2 = 0, b2 = 0;  // a : b :: a2 : b2
};

struct AnalogyCategory {
  std::string name;
  std::vector<AnalogyTuple> tuples;
};

struct AnalogySet {
  std::vector<AnalogyCategory> categories;
  std::size_t dropped_oov = 0;       // tuples with any out-of-vocabulary word
  std::size_t dropped_repeated = 0;  // tuples with a repeated slot

  std::size_t total_tuples() const;
};

// questions-words layout: ": category" headers, then four words per line.
// Words are lowercased before vocabulary lookup; offending tuples are dropped
// and counted, never masked.
AnalogySet load_analogy_set(const std::string& path, const Vocabulary& vocab);

struct SimilarityPair {
  std::uint32_t w1 = 0, w2 = 0;
  double human = 0.0;
};

struct SimilaritySet {
  std::vector<SimilarityPair> pairs;
  std::size_t dropped_oov = 0;
};

// Whitespace- or comma-separated "word1 word2 score" lines; '#' comments and
// a non-numeric header line are skipped.
SimilaritySet load_similarity_set(const std::string& path, const Vocabulary& vocab);

enum class AnalogyNorm {
  kFull,           // all embeddings unit-normalized, query a2^ + b^ - a^
  kCandidateOnly,  // only candidates normalized, query a2 + b - a
};

struct AnalogyCategoryResult {
  std::string name;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t flagged = 0;  // tuples hitting a zero-norm queried embedding
  double accuracy = 0.0;
};

struct AnalogyResult {
  std::vector<AnalogyCategoryResult> categories;
  std::size_t total = 0;
  std::size_t correct = 0;
  std::size_t flagged = 0;
  double accuracy = 0.0;
};

// Parallelogram completion: the winner is the argmax over the vocabulary,
// excluding a, b, a2 (never b2), of the candidate's normalized embedding
// dotted with the query; ties go to the lowest word id. A zero-norm
// embedding among the four queried words makes the tuple incorrect and
// flagged.
AnalogyResult analogy_accuracy(const Eigen::MatrixXd& W, const AnalogySet& data,
                               AnalogyNorm norm = AnalogyNorm::kFull);

// Rank correlation between human scores and model scores (inner products by
// default, cosine behind the flag), with average ranks on ties. Constant
// scores on either side leave the correlation undefined.
double spearman(const Eigen::MatrixXd& W, const SimilaritySet& data,
                bool cosine = false);

// Words closest (by cosine) to one principal direction of the embedding
// cloud, i.e. a right singular vector of W. The direction's sign is chosen
// so the strongest word projects positively; the returned pairs are
// (word, cosine), best first.
std::vector<std::pair<std::string, double>> pc_neighbors(
    const Eigen::MatrixXd& W, const Vocabulary& vocab, int component, int top_n);

}  // namespace qwem
