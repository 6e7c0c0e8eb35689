#include "qwem/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qwem/error.hpp"
#include "qwem/text_io.hpp"

namespace qwem {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      cur.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if (c >= 'a' && c <= 'z') {
      cur.push_back(ch);
    } else {
      if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::optional<std::uint32_t> Vocabulary::lookup(std::string_view w) const {
  auto it = id_of.find(std::string(w));
  if (it == id_of.end()) return std::nullopt;
  return it->second;
}

struct TextFileSource::Reader {
  LineReader lines;
  explicit Reader(const std::string& path) : lines(path) {}
};

TextFileSource::TextFileSource(std::string path, std::size_t min_doc_tokens)
    : path_(std::move(path)),
      min_doc_tokens_(min_doc_tokens),
      reader_(std::make_shared<Reader>(path_)) {}

bool TextFileSource::next(std::vector<std::string>& tokens) {
  std::string line;
  while (reader_->lines.next_line(line)) {
    tokens = tokenize(line);
    if (tokens.size() >= min_doc_tokens_) return true;
  }
  return false;
}

void TextFileSource::reset() { reader_ = std::make_shared<Reader>(path_); }

bool MemorySource::next(std::vector<std::string>& tokens) {
  if (pos_ >= docs_.size()) return false;
  tokens = docs_[pos_++];
  return true;
}

Vocabulary build_vocabulary(DocSource& source, std::uint32_t V,
                            std::size_t min_doc_tokens) {
  if (V < 1) throw UsageError("build_vocabulary: V must be >= 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  std::uint64_t total = 0;
  std::vector<std::string> doc;
  while (source.next(doc)) {
    if (doc.size() < min_doc_tokens) continue;
    total += doc.size();
    for (const auto& w : doc) ++freq[w];
  }
  if (freq.size() < V) {
    throw DataError("vocabulary shortfall: requested V=" + std::to_string(V) +
                    " but the stream has only " + std::to_string(freq.size()) +
                    " distinct words");
  }
  std::vector<std::pair<std::string, std::uint64_t>> items(freq.begin(), freq.end());
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  items.resize(V);

  Vocabulary vocab;
  vocab.total_tokens = total;
  vocab.words.reserve(V);
  vocab.counts.reserve(V);
  for (std::uint32_t id = 0; id < V; ++id) {
    vocab.id_of.emplace(items[id].first, id);
    vocab.words.push_back(std::move(items[id].first));
    vocab.counts.push_back(items[id].second);
  }
  return vocab;
}

const PairCell* SkipGramStats::find(std::uint32_t i, std::uint32_t j) const {
  if (i > j) std::swap(i, j);
  auto it = std::lower_bound(cells.begin(), cells.end(), std::make_pair(i, j),
                             [](const PairCell& c, const std::pair<std::uint32_t, std::uint32_t>& k) {
                               return std::make_pair(c.i, c.j) < k;
                             });
  if (it == cells.end() || it->i != i || it->j != j) return nullptr;
  return &*it;
}

void StatsAccumulator::add_document(const std::vector<std::uint32_t>& ids, int L) {
  const int half = L / 2;
  const std::size_t n = ids.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (ids[t] == kOovId) continue;
    ++unigram_[ids[t]];
    for (int o = 1; o <= half && t + o < n; ++o) {
      const std::uint32_t a = ids[t];
      const std::uint32_t b = ids[t + o];
      if (b == kOovId) continue;
      const std::uint32_t lo = std::min(a, b);
      const std::uint32_t hi = std::max(a, b);
      auto& cell = cells_[(static_cast<std::uint64_t>(lo) << 32) | hi];
      // Both orientations of the incidence land in the same symmetric cell.
      cell.first += 2;
      cell.second += 2 * static_cast<std::uint64_t>(o);
    }
  }
}

void StatsAccumulator::merge_from(const StatsAccumulator& other) {
  for (const auto& [key, val] : other.cells_) {
    auto& cell = cells_[key];
    cell.first += val.first;
    cell.second += val.second;
  }
  for (std::size_t i = 0; i < unigram_.size(); ++i) unigram_[i] += other.unigram_[i];
  scanned_ += other.scanned_;
}

SkipGramStats StatsAccumulator::finalize(std::uint32_t V, int L) const {
  SkipGramStats stats;
  stats.V = V;
  stats.L = L;
  stats.unigram_counts = unigram_;
  stats.total_tokens = scanned_;
  stats.cells.reserve(cells_.size());
  for (const auto& [key, val] : cells_) {
    PairCell c;
    c.i = static_cast<std::uint32_t>(key >> 32);
    c.j = static_cast<std::uint32_t>(key & 0xffffffffu);
    c.count = val.first;
    c.sep_sum = val.second;
    stats.cells.push_back(c);
  }
  std::sort(stats.cells.begin(), stats.cells.end(), [](const PairCell& a, const PairCell& b) {
    return std::make_pair(a.i, a.j) < std::make_pair(b.i, b.j);
  });
  std::uint64_t pair_total = 0;
  for (const auto& c : stats.cells) pair_total += (c.i == c.j) ? c.count : 2 * c.count;
  stats.pair_total = pair_total;
  for (std::uint64_t u : stats.unigram_counts) stats.unigram_total += u;
  return stats;
}

SkipGramStats count_skipgrams(DocSource& source, const Vocabulary& vocab, int L,
                              OovMode oov) {
  if (L < 2 || L % 2 != 0)
    throw UsageError("count_skipgrams: context length L must be even and >= 2");
  StatsAccumulator acc(vocab.size());
  std::vector<std::string> doc;
  std::vector<std::uint32_t> ids;
  while (source.next(doc)) {
    acc.add_scanned_tokens(doc.size());
    ids.clear();
    for (const auto& w : doc) {
      auto id = vocab.lookup(w);
      if (id) {
        ids.push_back(*id);
      } else if (oov == OovMode::kMask) {
        ids.push_back(StatsAccumulator::kOovId);
      }
    }
    acc.add_document(ids, L);
  }
  SkipGramStats stats = acc.finalize(vocab.size(), L);
  if (stats.pair_total == 0)
    throw DataError("count_skipgrams: no co-occurrence pairs in the stream");
  return stats;
}

double subsample_acceptance(double p_i) {
  if (p_i <= 0.0) throw UsageError("subsample_acceptance: P_i must be positive");
  const double r = 1e-3 / p_i;
  return std::min(1.0, r + std::sqrt(r));
}

void write_vocab_tsv(const Vocabulary& vocab, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write vocabulary file: " + path);
  for (std::uint32_t id = 0; id < vocab.size(); ++id) {
    os << vocab.words[id] << '\t' << id << '\t' << vocab.counts[id] << '\n';
  }
  if (!os) throw DataError("write failed: " + path);
}

Vocabulary read_vocab_tsv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open vocabulary file: " + path);
  Vocabulary vocab;
  std::string line;
  std::uint32_t expect_id = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    std::uint32_t id;
    std::uint64_t count;
    if (!std::getline(ss, word, '\t') || !(ss >> id) || !(ss.ignore(1), ss >> count))
      throw DataError("malformed vocabulary line in " + path + ": " + line);
    if (id != expect_id)
      throw DataError("non-dense vocabulary ids in " + path + " (expected " +
                      std::to_string(expect_id) + ", got " + std::to_string(id) + ")");
    vocab.id_of.emplace(word, id);
    vocab.words.push_back(word);
    vocab.counts.push_back(count);
    vocab.total_tokens += count;
    ++expect_id;
  }
  if (vocab.words.empty()) throw DataError("empty vocabulary file: " + path);
  return vocab;
}

void write_sgs(const SkipGramStats& stats, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write stats file: " + path);
  nlohmann::ordered_json header;
  header["magic"] = "SGS1";
  header["V"] = stats.V;
  header["L"] = stats.L;
  header["pair_total"] = stats.pair_total;
  header["total_tokens"] = stats.total_tokens;
  os << header.dump() << '\n';
  write_u64_le(os, stats.cells.size());
  for (const auto& c : stats.cells) {
    write_u32_le(os, c.i);
    write_u32_le(os, c.j);
    write_u64_le(os, c.count);
    write_u64_le(os, c.sep_sum);
  }
  for (std::uint32_t i = 0; i < stats.V; ++i) write_u64_le(os, stats.unigram_counts[i]);
  if (!os) throw DataError("write failed: " + path);
}

SkipGramStats read_sgs(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open stats file: " + path);
  std::string header_line;
  if (!std::getline(is, header_line)) throw DataError("missing header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad stats header in " + path + ": " + e.what());
  }
  if (header.value("magic", "") != std::string("SGS1"))
    throw DataError("not an SGS1 file: " + path);

  SkipGramStats stats;
  stats.V = header.at("V").get<std::uint32_t>();
  stats.L = header.at("L").get<int>();
  stats.pair_total = header.at("pair_total").get<std::uint64_t>();
  stats.total_tokens = header.at("total_tokens").get<std::uint64_t>();

  const std::uint64_t n_pairs = read_u64_le(is);
  stats.cells.resize(n_pairs);
  for (std::uint64_t k = 0; k < n_pairs; ++k) {
    PairCell& c = stats.cells[k];
    c.i = read_u32_le(is);
    c.j = read_u32_le(is);
    c.count = read_u64_le(is);
    c.sep_sum = read_u64_le(is);
    if (c.i > c.j) throw DataError("stats record not in i<=j form: " + path);
    if (k > 0 && !(std::make_pair(stats.cells[k - 1].i, stats.cells[k - 1].j) <
                   std::make_pair(c.i, c.j)))
      throw DataError("stats records not sorted: " + path);
  }
  stats.unigram_counts.resize(stats.V);
  for (std::uint32_t i = 0; i < stats.V; ++i) {
    stats.unigram_counts[i] = read_u64_le(is);
    stats.unigram_total += stats.unigram_counts[i];
  }
  std::uint64_t pair_total = 0;
  for (const auto& c : stats.cells) pair_total += (c.i == c.j) ? c.count : 2 * c.count;
  if (pair_total != stats.pair_total)
    throw DataError("stats pair_total mismatch in " + path);
  return stats;
}

}  // namespace qwem
