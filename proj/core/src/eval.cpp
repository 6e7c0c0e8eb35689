#include "qwem/eval.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>

#include "qwem/error.hpp"
#include "qwem/text_io.hpp"
#include "qwem/threads.hpp"

namespace qwem {

namespace {

std::string lowercase(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t pos = 0;
  while (pos < n) {
    std::size_t end = pos + 1;
    while (end < n && values[order[end]] == values[order[pos]]) ++end;
    const double mean_rank = 0.5 * static_cast<double>(pos + 1 + end);  // 1-based
    for (std::size_t k = pos; k < end; ++k) ranks[order[k]] = mean_rank;
    pos = end;
  }
  return ranks;
}

}  // namespace

std::size_t AnalogySet::total_tuples() const {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.tuples.size();
  return n;
}

AnalogySet load_analogy_set(const std::string& path, const Vocabulary& vocab) {
  AnalogySet set;
  LineReader reader(path);
  std::string line;
  AnalogyCategory current;
  current.name = "(default)";
  const auto flush = [&] {
    if (!current.tuples.empty()) set.categories.push_back(std::move(current));
    current = AnalogyCategory{};
  };
  while (reader.next_line(line)) {
    if (line.empty()) continue;
    if (line[0] == ':') {
      flush();
      const auto fields = split_fields(line.substr(1));
      std::string name;
      for (const auto& f : fields) name += (name.empty() ? "" : " ") + f;
      current.name = name.empty() ? "(unnamed)" : name;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 4)
      throw DataError("malformed analogy line (need 4 words): " + line);
    std::uint32_t ids[4];
    bool oov = false;
    for (int k = 0; k < 4; ++k) {
      const auto id = vocab.lookup(lowercase(fields[static_cast<std::size_t>(k)]));
      if (!id) {
        oov = true;
        break;
      }
      ids[k] = *id;
    }
    if (oov) {
      ++set.dropped_oov;
      continue;
    }
    bool repeated = false;
    for (int p = 0; p < 4 && !repeated; ++p)
      for (int q = p + 1; q < 4; ++q)
        if (ids[p] == ids[q]) {
          repeated = true;
          break;
        }
    if (repeated) {
      ++set.dropped_repeated;
      continue;
    }
    current.tuples.push_back({ids[0], ids[1], ids[2], ids[3]});
  }
  flush();
  return set;
}

SimilaritySet load_similarity_set(const std::string& path, const Vocabulary& vocab) {
  SimilaritySet set;
  LineReader reader(path);
  std::string line;
  bool first_content_line = true;
  while (reader.next_line(line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 3)
      throw DataError("malformed similarity line (need word word score): " + line);
    char* end = nullptr;
    const double score = std::strtod(fields[2].c_str(), &end);
    if (end == fields[2].c_str() || *end != '\0') {
      if (first_content_line) {  // tolerate a header row
        first_content_line = false;
        continue;
      }
      throw DataError("non-numeric similarity score: " + line);
    }
    first_content_line = false;
    if (!std::isfinite(score))
      throw DataError("non-finite similarity score: " + line);
    const auto w1 = vocab.lookup(lowercase(fields[0]));
    const auto w2 = vocab.lookup(lowercase(fields[1]));
    if (!w1 || !w2) {
      ++set.dropped_oov;
      continue;
    }
    set.pairs.push_back({*w1, *w2, score});
  }
  return set;
}

AnalogyResult analogy_accuracy(const Eigen::MatrixXd& W, const AnalogySet& data,
                               AnalogyNorm norm) {
  if (data.total_tuples() == 0)
    throw UsageError("analogy set is empty after filtering");
  const auto V = static_cast<std::uint32_t>(W.rows());

  // Row-normalized copy; zero rows stay zero and are detected via the norms.
  Eigen::VectorXd norms = W.rowwise().norm();
  Eigen::MatrixXd What = W;
  for (std::uint32_t i = 0; i < V; ++i)
    if (norms(i) > 0.0) What.row(i) /= norms(i);

  AnalogyResult result;
  for (const auto& category : data.categories) {
    AnalogyCategoryResult cat;
    cat.name = category.name;
    cat.total = category.tuples.size();

    const std::size_t n = category.tuples.size();
    std::vector<std::uint8_t> tuple_correct(n, 0), tuple_flagged(n, 0);
    parallel_for_blocks(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t t = lo; t < hi; ++t) {
        const AnalogyTuple& q = category.tuples[t];
        if (q.a >= V || q.b >= V || q.a2 >= V || q.b2 >= V)
          throw UsageError("analogy tuple references a word outside the embedding");
        if (norms(q.a) == 0.0 || norms(q.b) == 0.0 || norms(q.a2) == 0.0 ||
            norms(q.b2) == 0.0) {
          tuple_flagged[t] = 1;
          continue;
        }
        Eigen::VectorXd query;
        if (norm == AnalogyNorm::kFull)
          query = (What.row(q.a2) + What.row(q.b) - What.row(q.a)).transpose();
        else
          query = (W.row(q.a2) + W.row(q.b) - W.row(q.a)).transpose();
        const Eigen::VectorXd scores = What * query;
        std::uint32_t winner = V;
        double best = 0.0;
        for (std::uint32_t w = 0; w < V; ++w) {
          if (w == q.a || w == q.b || w == q.a2) continue;
          if (winner == V || scores(w) > best) {
            winner = w;
            best = scores(w);
          }
        }
        tuple_correct[t] = winner == q.b2 ? 1 : 0;
      }
    });
    for (std::size_t t = 0; t < n; ++t) {
      cat.correct += tuple_correct[t];
      cat.flagged += tuple_flagged[t];
    }
    cat.accuracy = cat.total > 0
                       ? static_cast<double>(cat.correct) / static_cast<double>(cat.total)
                       : 0.0;
    result.total += cat.total;
    result.correct += cat.correct;
    result.flagged += cat.flagged;
    result.categories.push_back(std::move(cat));
  }
  result.accuracy = result.total > 0 ? static_cast<double>(result.correct) /
                                           static_cast<double>(result.total)
                                     : 0.0;
  return result;
}

double spearman(const Eigen::MatrixXd& W, const SimilaritySet& data, bool cosine) {
  if (data.pairs.size() < 2)
    throw UsageError("rank correlation needs at least 2 pairs");
  const auto V = static_cast<std::uint32_t>(W.rows());
  std::vector<double> model(data.pairs.size()), human(data.pairs.size());
  for (std::size_t n = 0; n < data.pairs.size(); ++n) {
    const auto& p = data.pairs[n];
    if (p.w1 >= V || p.w2 >= V)
      throw UsageError("similarity pair references a word outside the embedding");
    double score = W.row(p.w1).dot(W.row(p.w2));
    if (cosine) {
      const double den = W.row(p.w1).norm() * W.row(p.w2).norm();
      score = den > 0.0 ? score / den : 0.0;
    }
    model[n] = score;
    human[n] = p.human;
  }
  const std::vector<double> rm = average_ranks(model);
  const std::vector<double> rh = average_ranks(human);
  const double n = static_cast<double>(model.size());
  double mean_m = 0.0, mean_h = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    mean_m += rm[k];
    mean_h += rh[k];
  }
  mean_m /= n;
  mean_h /= n;
  double cov = 0.0, var_m = 0.0, var_h = 0.0;
  for (std::size_t k = 0; k < model.size(); ++k) {
    const double dm = rm[k] - mean_m;
    const double dh = rh[k] - mean_h;
    cov += dm * dh;
    var_m += dm * dm;
    var_h += dh * dh;
  }
  if (var_m == 0.0 || var_h == 0.0)
    throw DataError("rank correlation undefined: constant scores");
  return cov / std::sqrt(var_m * var_h);
}

std::vector<std::pair<std::string, double>> pc_neighbors(const Eigen::MatrixXd& W,
                                                         const Vocabulary& vocab,
                                                         int component, int top_n) {
  if (component < 0 || component >= W.cols())
    throw UsageError("principal component index out of range");
  if (top_n < 1) throw UsageError("need top_n >= 1");
  if (vocab.size() != static_cast<std::uint32_t>(W.rows()))
    throw UsageError("vocabulary size does not match the embedding");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinV);
  const double s = svd.singularValues()(component);
  if (!(s > 1e-12 * svd.singularValues()(0)))
    throw DataError("degenerate principal component: zero singular value");
  Eigen::VectorXd u = svd.matrixV().col(component);

  const auto V = static_cast<std::uint32_t>(W.rows());
  Eigen::VectorXd cosv(V);
  for (std::uint32_t i = 0; i < V; ++i) {
    const double wn = W.row(i).norm();
    cosv(i) = wn > 0.0 ? W.row(i).dot(u) / wn : 0.0;
  }
  // Resolve the direction's sign: strongest |cosine| word projects positively.
  std::uint32_t strongest = 0;
  for (std::uint32_t i = 1; i < V; ++i)
    if (std::abs(cosv(i)) > std::abs(cosv(strongest))) strongest = i;
  if (cosv(strongest) < 0.0) cosv = -cosv;

  std::vector<std::uint32_t> order(V);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return cosv(a) > cosv(b);
  });
  const int keep = std::min<int>(top_n, static_cast<int>(V));
  std::vector<std::pair<std::string, double>> out;
  out.reserve(static_cast<std::size_t>(keep));
  for (int k = 0; k < keep; ++k)
    out.emplace_back(vocab.words[order[static_cast<std::size_t>(k)]],
                     cosv(order[static_cast<std::size_t>(k)]));
  return out;
}

}  // namespace qwem
