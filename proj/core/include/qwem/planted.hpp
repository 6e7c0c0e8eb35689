#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qwem {

// Synthetic corpus with planted analogy structure, a desk-scale stand-in for
// a natural corpus. Each sentence commits to a latent (group, relation, form)
// triple and mixes four word classes:
//   - group content words, shared by everything in the group,
//   - relation-form marker words, shared across groups,
//   - one cell word per (group, relation, form) — the analogy answers,
//   - common filler words.
// Cell words of the same group and relation but different form differ, in
// expectation, only by the marker-class direction, so "cell(g,r,a) :
// cell(g,r,b) :: cell(h,r,a) : cell(h,r,b)" forms the planted analogies.
// Group and relation frequencies decay (Zipf-like) to keep the target
// spectrum non-degenerate.
struct PlantedConfig {
  int groups = 25;
  int relations = 8;
  int group_words = 40;        // content words per group
  int marker_words = 20;       // words per (relation, form) marker class
  int common_words = 300;
  std::int64_t sentences = 120000;
  int sentence_len = 20;
  double p_group = 0.35;       // token-class mixture; remainder is filler
  double p_marker = 0.30;
  double p_cell = 0.10;
  double zipf_shift = 3.0;     // class weight of index k is 1/(k + shift)
  std::uint64_t seed = 7;

  int vocabulary_size() const;
  std::string describe() const;  // canonical one-line form for manifests
};

// Deterministic word inventory (lowercase ASCII letters only, so the
// tokenizer preserves every word).
struct PlantedWords {
  std::vector<std::vector<std::string>> group;          // [group][n]
  std::vector<std::vector<std::string>> marker;         // [relation*2+form][n]
  std::vector<std::string> cell;                        // [(group*R + rel)*2+form]
  std::vector<std::string> common;

  const std::string& cell_word(int g, int r, int form, int relations) const {
    return cell[static_cast<std::size_t>((g * relations + r) * 2 + form)];
  }
};

PlantedWords planted_words(const PlantedConfig& config);

// Writes `sentences` lines of space-separated tokens.
void write_planted_corpus(const PlantedConfig& config, const std::string& path);

// questions-words layout, one category per relation, all ordered group pairs.
void write_planted_analogies(const PlantedConfig& config, const std::string& path);

// "word1 word2 score" over sampled cell-word pairs; the score is the latent
// overlap (2 per shared group, 1 per shared relation, form as tie-break).
void write_planted_similarity(const PlantedConfig& config, const std::string& path,
                              int n_pairs, std::uint64_t seed);

}  // namespace qwem
