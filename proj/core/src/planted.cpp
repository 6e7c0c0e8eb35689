#include "qwem/planted.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "qwem/error.hpp"
#include "qwem/rng.hpp"

namespace qwem {

namespace {

std::string alpha2(int i) {
  if (i < 0 || i >= 26 * 26) throw UsageError("planted class index out of range");
  return {static_cast<char>('a' + i / 26), static_cast<char>('a' + i % 26)};
}

void validate(const PlantedConfig& c) {
  if (c.groups < 2 || c.groups > 500) throw UsageError("groups must be in [2, 500]");
  if (c.relations < 1 || c.relations > 300)
    throw UsageError("relations must be in [1, 300]");
  if (c.group_words < 1 || c.marker_words < 1 || c.common_words < 1)
    throw UsageError("word-class sizes must be positive");
  if (c.sentences < 1) throw UsageError("need at least one sentence");
  if (c.sentence_len < 2) throw UsageError("sentences need at least two tokens");
  if (c.p_group < 0 || c.p_marker < 0 || c.p_cell < 0 ||
      c.p_group + c.p_marker + c.p_cell > 1.0)
    throw UsageError("token-class probabilities must be a sub-distribution");
  if (c.zipf_shift <= 0) throw UsageError("zipf shift must be positive");
}

std::vector<double> zipf_weights(int n, double shift) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = 1.0 / (k + shift);
  return w;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open output file: " + path);
  return os;
}

}  // namespace

int PlantedConfig::vocabulary_size() const {
  return groups * group_words + relations * 2 * marker_words +
         groups * relations * 2 + common_words;
}

std::string PlantedConfig::describe() const {
  std::ostringstream os;
  os << "groups=" << groups << " relations=" << relations
     << " group_words=" << group_words << " marker_words=" << marker_words
     << " common_words=" << common_words << " sentences=" << sentences
     << " sentence_len=" << sentence_len << " p_group=" << p_group
     << " p_marker=" << p_marker << " p_cell=" << p_cell
     << " zipf_shift=" << zipf_shift << " seed=" << seed;
  return os.str();
}

PlantedWords planted_words(const PlantedConfig& config) {
  validate(config);
  PlantedWords words;
  words.group.resize(static_cast<std::size_t>(config.groups));
  for (int g = 0; g < config.groups; ++g)
    for (int n = 0; n < config.group_words; ++n)
      words.group[static_cast<std::size_t>(g)].push_back("wg" + alpha2(g) + alpha2(n));
  words.marker.resize(static_cast<std::size_t>(config.relations * 2));
  for (int r = 0; r < config.relations; ++r)
    for (int form = 0; form < 2; ++form)
      for (int n = 0; n < config.marker_words; ++n)
        words.marker[static_cast<std::size_t>(r * 2 + form)].push_back(
            "mk" + alpha2(r) + (form == 0 ? "a" : "b") + alpha2(n));
  for (int g = 0; g < config.groups; ++g)
    for (int r = 0; r < config.relations; ++r)
      for (int form = 0; form < 2; ++form)
        words.cell.push_back("cw" + alpha2(g) + alpha2(r) + (form == 0 ? "a" : "b"));
  for (int n = 0; n < config.common_words; ++n)
    words.common.push_back("cm" + alpha2(n));
  return words;
}

void write_planted_corpus(const PlantedConfig& config, const std::string& path) {
  validate(config);
  const PlantedWords words = planted_words(config);
  Rng rng(config.seed);
  const AliasTable group_pick(zipf_weights(config.groups, config.zipf_shift));
  const AliasTable relation_pick(zipf_weights(config.relations, config.zipf_shift));

  std::ofstream os = open_out(path);
  std::string line;
  for (std::int64_t s = 0; s < config.sentences; ++s) {
    const int g = static_cast<int>(group_pick.sample(rng));
    const int r = static_cast<int>(relation_pick.sample(rng));
    const int form = static_cast<int>(rng.uniform_index(2));
    line.clear();
    for (int t = 0; t < config.sentence_len; ++t) {
      const double u = rng.uniform01();
      const std::string* w;
      if (u < config.p_group) {
        const auto& pool = words.group[static_cast<std::size_t>(g)];
        w = &pool[rng.uniform_index(pool.size())];
      } else if (u < config.p_group + config.p_marker) {
        const auto& pool = words.marker[static_cast<std::size_t>(r * 2 + form)];
        w = &pool[rng.uniform_index(pool.size())];
      } else if (u < config.p_group + config.p_marker + config.p_cell) {
        w = &words.cell[static_cast<std::size_t>((g * config.relations + r) * 2 + form)];
      } else {
        w = &words.common[rng.uniform_index(words.common.size())];
      }
      if (t > 0) line.push_back(' ');
      line += *w;
    }
    line.push_back('\n');
    os << line;
  }
  if (!os) throw DataError("failed writing corpus: " + path);
}

void write_planted_analogies(const PlantedConfig& config, const std::string& path) {
  validate(config);
  const PlantedWords words = planted_words(config);
  std::ofstream os = open_out(path);
  for (int r = 0; r < config.relations; ++r) {
    os << ": rel" << alpha2(r) << "\n";
    for (int g = 0; g < config.groups; ++g)
      for (int h = 0; h < config.groups; ++h) {
        if (g == h) continue;
        os << words.cell_word(g, r, 0, config.relations) << ' '
           << words.cell_word(g, r, 1, config.relations) << ' '
           << words.cell_word(h, r, 0, config.relations) << ' '
           << words.cell_word(h, r, 1, config.relations) << '\n';
      }
  }
  if (!os) throw DataError("failed writing analogies: " + path);
}

void write_planted_similarity(const PlantedConfig& config, const std::string& path,
                              int n_pairs, std::uint64_t seed) {
  validate(config);
  if (n_pairs < 1) throw UsageError("need at least one similarity pair");
  const PlantedWords words = planted_words(config);
  Rng rng(seed);
  std::ofstream os = open_out(path);
  const auto n_cells = static_cast<std::uint64_t>(words.cell.size());
  for (int n = 0; n < n_pairs; ++n) {
    const auto c1 = rng.uniform_index(n_cells);
    std::uint64_t c2 = rng.uniform_index(n_cells);
    while (c2 == c1) c2 = rng.uniform_index(n_cells);
    const int g1 = static_cast<int>(c1) / (config.relations * 2);
    const int g2 = static_cast<int>(c2) / (config.relations * 2);
    const int r1 = (static_cast<int>(c1) / 2) % config.relations;
    const int r2 = (static_cast<int>(c2) / 2) % config.relations;
    const int f1 = static_cast<int>(c1) % 2;
    const int f2 = static_cast<int>(c2) % 2;
    const double score =
        2.0 * (g1 == g2) + 1.0 * (r1 == r2) + 0.25 * (f1 == f2);
    os << words.cell[c1] << ' ' << words.cell[c2] << ' ' << score << '\n';
  }
  if (!os) throw DataError("failed writing similarity pairs: " + path);
}

}  // namespace qwem
