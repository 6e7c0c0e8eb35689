#include "qwem/cli.hpp"

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qwem/corpus.hpp"
#include "qwem/dynamics.hpp"
#include "qwem/error.hpp"
#include "qwem/eval.hpp"
#include "qwem/manifest.hpp"
#include "qwem/mxc.hpp"
#include "qwem/planted.hpp"
#include "qwem/reweight.hpp"
#include "qwem/rng.hpp"
#include "qwem/spectral.hpp"
#include "qwem/svg.hpp"
#include "qwem/target.hpp"
#include "qwem/taskvec.hpp"
#include "qwem/text_io.hpp"
#include "qwem/threads.hpp"
#include "qwem/trainers.hpp"
#include "qwem/version.hpp"

namespace qwem {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string num17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string num6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string join2(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out directory must not be empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir + ": " + ec.message());
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (end != part.c_str() + part.size() || !std::isfinite(v))
      throw UsageError(std::string(flag) + ": cannot parse '" + part + "' as a number");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> out;
  for (double v : parse_double_list(text, flag)) {
    const int i = static_cast<int>(std::llround(v));
    if (static_cast<double>(i) != v)
      throw UsageError(std::string(flag) + ": expected integers");
    out.push_back(i);
  }
  return out;
}

std::string sanitize_name(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  if (out.empty()) out = "unnamed";
  return out;
}

std::vector<double> linspace_grid(double lo, double hi, int n) {
  if (n < 2) throw UsageError("time grid needs at least 2 points");
  if (!(hi > lo)) throw UsageError("time grid upper end must exceed the lower end");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    g[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return g;
}

std::vector<double> eig_col(const Eigen::MatrixXd& m, Eigen::Index c) {
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) v[static_cast<std::size_t>(r)] = m(r, c);
  return v;
}

// Accumulates one manifest per command: effective config, checksummed inputs,
// and every produced path. finish() stamps the end time and writes
// manifest-<command>.json into the output directory.
class CommandLog {
 public:
  CommandLog(std::string command, const std::string& out_dir, std::uint64_t seed)
      : dir_(out_dir) {
    ensure_out_dir(dir_);
    m_.command = std::move(command);
    m_.seed = seed;
    m_.started_at = utc_timestamp_now();
  }

  void config(const std::string& key, const std::string& value) { m_.add_config(key, value); }
  void config(const std::string& key, const char* value) { m_.add_config(key, value); }
  void config(const std::string& key, double value) { m_.add_config(key, num17(value)); }
  void config(const std::string& key, bool value) { m_.add_config(key, value ? "true" : "false"); }
  template <class T>
    requires std::is_integral_v<T>
  void config(const std::string& key, T value) {
    m_.add_config(key, std::to_string(value));
  }

  void input(const std::string& path) { m_.add_input(path); }

  std::string output(const std::string& name) {
    const std::string path = join2(dir_, name);
    m_.add_output(path);
    return path;
  }

  const std::string& dir() const { return dir_; }

  std::string finish() {
    m_.finished_at = utc_timestamp_now();
    const std::string path = join2(dir_, "manifest-" + m_.command + ".json");
    write_manifest(m_, path);
    return path;
  }

 private:
  RunManifest m_;
  std::string dir_;
};

LossKind parse_loss(const std::string& s) {
  if (s == "qwem") return LossKind::kQwem;
  if (s == "sgns") return LossKind::kSgns;
  throw UsageError("--loss: expected qwem|sgns, got '" + s + "'");
}

OovMode parse_oov(const std::string& s) {
  if (s == "remove") return OovMode::kRemove;
  if (s == "mask") return OovMode::kMask;
  throw UsageError("--oov: expected remove|mask, got '" + s + "'");
}

InitKind parse_init(const std::string& s) {
  if (s == "normal") return InitKind::kNormal;
  if (s == "w2v") return InitKind::kW2vDefault;
  throw UsageError("--init: expected normal|w2v, got '" + s + "'");
}

LrSchedule parse_schedule(const std::string& s) {
  if (s == "constant") return LrSchedule::kConstant;
  if (s == "step") return LrSchedule::kStep;
  throw UsageError("--lr-schedule: expected constant|step, got '" + s + "'");
}

const char* gkind_name(GKind k) {
  switch (k) {
    case GKind::kConstant: return "constant";
    case GKind::kRankOne: return "rank-one";
    case GKind::kGeneral: return "general";
  }
  return "?";
}

void apply_threads(int threads) {
  if (threads > 0) set_thread_count(static_cast<std::size_t>(threads));
}

// ---------------------------------------------------------------------------
// gen: planted-analogy corpus, analogy and similarity files
// ---------------------------------------------------------------------------

struct GenOpts {
  PlantedConfig pc;
  int similarity_pairs = 400;
  std::string out;
  int threads = 0;
};

void run_gen(const GenOpts& o) {
  apply_threads(o.threads);
  CommandLog log("gen", o.out, o.pc.seed);
  log.config("groups", o.pc.groups);
  log.config("relations", o.pc.relations);
  log.config("group-words", o.pc.group_words);
  log.config("marker-words", o.pc.marker_words);
  log.config("common-words", o.pc.common_words);
  log.config("sentences", o.pc.sentences);
  log.config("sentence-len", o.pc.sentence_len);
  log.config("p-group", o.pc.p_group);
  log.config("p-marker", o.pc.p_marker);
  log.config("p-cell", o.pc.p_cell);
  log.config("zipf-shift", o.pc.zipf_shift);
  log.config("seed", o.pc.seed);
  log.config("similarity-pairs", o.similarity_pairs);
  log.config("generator", o.pc.describe());

  write_planted_corpus(o.pc, log.output("corpus.txt"));
  write_planted_analogies(o.pc, log.output("analogies.txt"));
  write_planted_similarity(o.pc, log.output("similarity.txt"), o.similarity_pairs,
                           o.pc.seed + 1);
  std::cout << "planted corpus: " << o.pc.sentences << " sentences, vocabulary "
            << o.pc.vocabulary_size() << " words\n";
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// ingest: vocabulary construction only
// ---------------------------------------------------------------------------

struct IngestOpts {
  std::string corpus;
  std::uint32_t vocab = 10000;
  std::uint64_t min_doc_tokens = 500;
  std::string out;
  int threads = 0;
};

void run_ingest(const IngestOpts& o) {
  apply_threads(o.threads);
  CommandLog log("ingest", o.out, 0);
  log.config("corpus", o.corpus);
  log.config("vocab", o.vocab);
  log.config("min-doc-tokens", o.min_doc_tokens);
  log.input(o.corpus);

  TextFileSource src(o.corpus, o.min_doc_tokens);
  Vocabulary vocab = build_vocabulary(src, o.vocab, o.min_doc_tokens);
  write_vocab_tsv(vocab, log.output("vocab.tsv"));
  std::cout << "vocabulary: " << vocab.size() << " words, " << vocab.total_tokens
            << " tokens scanned\n";
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// stats: skip-gram co-occurrence statistics
// ---------------------------------------------------------------------------

struct StatsOpts {
  std::string corpus;
  std::uint32_t vocab = 0;
  std::string vocab_file;
  int window = 8;
  std::string oov = "remove";
  std::uint64_t min_doc_tokens = 500;
  std::string out;
  int threads = 0;
};

void run_stats(const StatsOpts& o) {
  apply_threads(o.threads);
  if ((o.vocab == 0) == o.vocab_file.empty())
    throw UsageError("stats: provide exactly one of --vocab (size) or --vocab-file");
  CommandLog log("stats", o.out, 0);
  log.config("corpus", o.corpus);
  if (o.vocab > 0) log.config("vocab", o.vocab);
  if (!o.vocab_file.empty()) log.config("vocab-file", o.vocab_file);
  log.config("window", o.window);
  log.config("oov", o.oov);
  log.config("min-doc-tokens", o.min_doc_tokens);
  const OovMode oov = parse_oov(o.oov);

  log.input(o.corpus);
  TextFileSource src(o.corpus, o.min_doc_tokens);
  Vocabulary vocab;
  if (o.vocab > 0) {
    vocab = build_vocabulary(src, o.vocab, o.min_doc_tokens);
    src.reset();
  } else {
    log.input(o.vocab_file);
    vocab = read_vocab_tsv(o.vocab_file);
  }
  SkipGramStats stats = count_skipgrams(src, vocab, o.window, oov);

  write_vocab_tsv(vocab, log.output("vocab.tsv"));
  write_sgs(stats, log.output("corpus.sgs"));
  std::cout << "stats: V=" << stats.V << ", window=" << stats.L << ", "
            << stats.cells.size() << " distinct pairs, pair total " << stats.pair_total
            << ", " << stats.total_tokens << " tokens scanned\n";
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// target: M*, PMI, or PPMI matrix from stored statistics
// ---------------------------------------------------------------------------

struct TargetOpts {
  std::string stats;
  std::string kind = "mstar";
  std::string reweight = "setting1";
  double negsample_k = 5.0;
  double negsample_exponent = 0.75;
  double pmi_floor = -20.0;
  std::string out;
  int threads = 0;
};

void run_target(const TargetOpts& o) {
  apply_threads(o.threads);
  if (o.kind != "mstar" && o.kind != "pmi" && o.kind != "ppmi")
    throw UsageError("--kind: expected mstar|pmi|ppmi, got '" + o.kind + "'");
  CommandLog log("target", o.out, 0);
  log.config("stats", o.stats);
  log.config("kind", o.kind);
  log.config("reweight", o.reweight);
  log.config("negsample-k", o.negsample_k);
  log.config("negsample-exponent", o.negsample_exponent);
  if (o.kind != "mstar") log.config("pmi-floor", o.pmi_floor);

  log.input(o.stats);
  SkipGramStats stats = read_sgs(o.stats);
  ReweightConfig rc = parse_reweight(o.reweight);
  rc.negsample_k = o.negsample_k;
  rc.negsample_exponent = o.negsample_exponent;

  TargetMatrix t = (o.kind == "mstar")
                       ? build_mstar(stats, rc)
                       : build_pmi(stats, rc, o.kind == "ppmi", o.pmi_floor);
  log.config("g-kind", gkind_name(t.g_kind));
  if (t.g_kind == GKind::kConstant) log.config("g-constant", t.g);
  if (o.kind != "mstar") log.config("floored-entries", t.floored_entries);

  write_mxc(t.M, o.kind, t.provenance, log.output(o.kind + ".mxc"));
  if (t.g_kind == GKind::kRankOne)
    write_mxc(t.g_vec, "gvec", t.provenance, log.output("gvec.mxc"));

  std::cout << "target " << o.kind << ": " << t.M.rows() << "x" << t.M.cols()
            << ", aggregate weight " << gkind_name(t.g_kind);
  if (t.g_kind == GKind::kConstant) std::cout << " (g=" << num6(t.g) << ")";
  if (o.kind != "mstar") std::cout << ", " << t.floored_entries << " entries floored";
  std::cout << "\n";
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// factorize: spectral embedding of a stored target matrix
// ---------------------------------------------------------------------------

struct FactorizeOpts {
  std::string target;
  int d = 50;
  std::string gvec;
  std::string out;
  int threads = 0;
};

void run_factorize(const FactorizeOpts& o) {
  apply_threads(o.threads);
  CommandLog log("factorize", o.out, 0);
  log.config("target", o.target);
  log.config("d", o.d);
  if (!o.gvec.empty()) log.config("gvec", o.gvec);

  log.input(o.target);
  MxcFile tf = read_mxc(o.target);
  if (tf.matrix.rows() != tf.matrix.cols())
    throw DataError("factorize: target matrix in " + o.target + " is not square");

  Eigen::MatrixXd W;
  std::string provenance;
  if (!o.gvec.empty()) {
    log.input(o.gvec);
    MxcFile gf = read_mxc(o.gvec);
    if (gf.matrix.cols() != 1 || gf.matrix.rows() != tf.matrix.rows())
      throw DataError("factorize: " + o.gvec + " must be a " +
                      std::to_string(tf.matrix.rows()) + "x1 weight vector");
    TargetMatrix t;
    t.M = tf.matrix;
    t.g_kind = GKind::kRankOne;
    t.g_vec = gf.matrix.col(0);
    W = weighted_minimizer(t, o.d);
    provenance = "spectral d=" + std::to_string(o.d) + " source=" + tf.name +
                 " weights=rank-one";
  } else {
    W = factorize_target(tf.matrix, o.d);
    provenance = "spectral d=" + std::to_string(o.d) + " source=" + tf.name;
    // W has identity right factor, so the fitted eigenvalues are recoverable
    // as squared column norms; store them alongside for downstream plots.
    Eigen::VectorXd eigvals = W.colwise().squaredNorm().transpose();
    write_mxc(eigvals, "eigvals", provenance, log.output("eigvals.mxc"));
  }
  write_mxc(W, "W", provenance, log.output("W.mxc"));
  std::cout << "factorize: W is " << W.rows() << "x" << W.cols() << " (" << provenance
            << ")\n";
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// train: minibatch SGD on the quartic or SGNS loss
// ---------------------------------------------------------------------------

struct TrainOpts {
  std::string stats;
  std::string target;
  int d = 200;
  std::string loss = "qwem";
  std::string reweight = "setting1";
  double negsample_k = 5.0;
  double negsample_exponent = 0.75;
  std::int64_t batch_pos = 50000;
  std::int64_t batch_neg = 50000;
  double lr = -1.0;  // sentinel: 0.5 for qwem, 0.025 for sgns
  std::string lr_schedule = "constant";
  std::int64_t steps = 1000;
  std::string init = "normal";
  double sigma2 = 1e-6;
  std::uint64_t seed = 1;
  std::int64_t probe_pairs = 1000000;
  int probes = 25;
  std::string out;
  int threads = 0;
};

std::vector<std::int64_t> probe_grid(std::int64_t steps, int probes) {
  if (probes < 2) probes = 2;
  std::vector<std::int64_t> grid;
  for (int k = 0; k < probes; ++k) {
    const double f = static_cast<double>(k) / static_cast<double>(probes - 1);
    const auto s = static_cast<std::int64_t>(std::llround(f * static_cast<double>(steps)));
    if (grid.empty() || s > grid.back()) grid.push_back(s);
  }
  return grid;
}

void run_train(const TrainOpts& o) {
  apply_threads(o.threads);
  CommandLog log("train", o.out, o.seed);

  TrainConfig cfg;
  cfg.d = o.d;
  cfg.loss = parse_loss(o.loss);
  cfg.reweight = parse_reweight(o.reweight);
  cfg.reweight.negsample_k = o.negsample_k;
  cfg.reweight.negsample_exponent = o.negsample_exponent;
  cfg.batch_pos = o.batch_pos;
  cfg.batch_neg = o.batch_neg;
  cfg.lr = o.lr >= 0 ? o.lr : (cfg.loss == LossKind::kSgns ? 0.025 : 0.5);
  cfg.lr_schedule = parse_schedule(o.lr_schedule);
  cfg.steps = o.steps;
  cfg.init = parse_init(o.init);
  cfg.init_sigma2 = o.sigma2;
  cfg.seed = o.seed;
  cfg.probe_pairs = o.probe_pairs;

  log.config("stats", o.stats);
  log.config("config", cfg.describe());
  log.config("config-checksum", cfg.checksum());
  log.config("probes", o.probes);
  if (!o.target.empty()) log.config("target", o.target);

  log.input(o.stats);
  SkipGramStats stats = read_sgs(o.stats);
  TargetMatrix tgt;
  const TargetMatrix* tp = nullptr;
  if (!o.target.empty()) {
    log.input(o.target);
    tgt.M = read_mxc(o.target).matrix;
    tp = &tgt;
  }

  TrainResult res = train(stats, cfg, probe_grid(o.steps, o.probes), tp);
  write_mxc(res.embedding.W, "W", res.embedding.provenance, log.output("W.mxc"));
  write_trace_csv(res.trace, log.output("trace.csv"));
  {
    std::ostringstream os;
    os.precision(17);
    os << "t,loss,stderr\n";
    for (std::size_t k = 0; k < res.trace.times.size(); ++k)
      os << res.trace.times[k] << "," << res.trace.loss[k] << ","
         << res.loss_stderr[k] << "\n";
    write_text_file(log.output("loss_stderr.csv"), os.str());
  }
  std::cout << "train: " << res.embedding.provenance << "\n";
  std::cout << "final probe loss " << num6(res.trace.loss.back()) << " +/- "
            << num6(res.loss_stderr.back()) << " at flow time "
            << num6(res.trace.times.back()) << "\n";
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// dynamics: gradient-flow integration and the small-initialization experiment
// ---------------------------------------------------------------------------

struct DynamicsOpts {
  std::string target;
  int d = 2;
  double sigma2 = 1e-6;
  std::uint64_t seed = 1;
  double t_max = 0.0;  // <= 0: 6 * tau_1 from the top eigenvalue
  int points = 201;
  double step = 0.0;  // <= 0: integrator default
  bool silent = false;
  std::string sigma2_list = "1e-4,1e-6,1e-8";
  double rescaled_max = 6.0;
  int rescaled_points = 241;
  std::string out;
  int threads = 0;
};

void run_dynamics(const DynamicsOpts& o) {
  apply_threads(o.threads);
  CommandLog log("dynamics", o.out, o.seed);
  log.config("target", o.target);
  log.config("d", o.d);
  log.config("seed", o.seed);

  log.input(o.target);
  MxcFile tf = read_mxc(o.target);
  const Eigen::MatrixXd& M = tf.matrix;
  if (M.rows() != M.cols())
    throw DataError("dynamics: target matrix in " + o.target + " is not square");

  if (o.silent) {
    log.config("silent", true);
    log.config("sigma2-list", o.sigma2_list);
    log.config("rescaled-max", o.rescaled_max);
    log.config("rescaled-points", o.rescaled_points);
    const std::vector<double> sigma2s = parse_double_list(o.sigma2_list, "--sigma2-list");
    const std::vector<double> grid = linspace_grid(0.0, o.rescaled_max, o.rescaled_points);
    SilentAlignmentReport rep = silent_alignment_experiment(M, o.d, sigma2s, o.seed, grid);

    std::ostringstream csv;
    csv.precision(17);
    csv << "sigma2,tau1,sup_distance,final_distance\n";
    ordered_json runs = ordered_json::array();
    for (const auto& r : rep.runs) {
      csv << r.sigma2 << "," << r.tau1 << "," << r.sup_distance << ","
          << r.final_distance << "\n";
      runs.push_back(ordered_json{{"sigma2", r.sigma2},
                                  {"tau1", r.tau1},
                                  {"sup_distance", r.sup_distance},
                                  {"final_distance", r.final_distance}});
      std::cout << "sigma2=" << num6(r.sigma2) << ": sup distance "
                << num6(r.sup_distance) << ", final distance "
                << num6(r.final_distance) << "\n";
    }
    write_text_file(log.output("silent.csv"), csv.str());
    ordered_json j{{"note", rep.note}, {"runs", runs}};
    write_text_file(log.output("silent.json"), j.dump(2) + "\n");
  } else {
    log.config("sigma2", o.sigma2);
    log.config("points", o.points);
    log.config("step", o.step);
    if (o.sigma2 < 0) throw UsageError("--sigma2 must be non-negative");

    SpectralDecomposition spec = eigh(M);
    double t_max = o.t_max;
    if (t_max <= 0) {
      if (spec.values(0) <= 0 || o.sigma2 <= 0)
        throw UsageError(
            "dynamics: --t-max is required unless the top eigenvalue and "
            "--sigma2 are positive");
      t_max = 6.0 * characteristic_time(spec.values(0), o.sigma2);
    }
    log.config("t-max", t_max);
    const std::vector<double> grid = linspace_grid(0.0, t_max, o.points);

    Rng rng(o.seed);
    Eigen::MatrixXd W0(M.rows(), o.d);
    const double scale = std::sqrt(o.sigma2);
    for (Eigen::Index i = 0; i < W0.rows(); ++i)
      for (Eigen::Index j = 0; j < W0.cols(); ++j) W0(i, j) = scale * rng.normal();

    DynamicsTrace trace = integrate_flow(M, W0, grid, o.step);
    trace.seed = o.seed;
    trace.sigma2 = o.sigma2;
    write_trace_csv(trace, log.output("trace.csv"));

    Eigen::BDCSVD<Eigen::MatrixXd> svd(W0);
    DynamicsTrace theory = aligned_flow(spec, svd.singularValues().head(o.d), o.d, grid);
    theory.seed = o.seed;
    theory.sigma2 = o.sigma2;
    write_trace_csv(theory, log.output("theory.csv"));

    std::cout << "dynamics: top eigenvalues";
    for (int k = 0; k < std::min<int>(o.d, static_cast<int>(spec.values.size())); ++k)
      std::cout << " " << num6(spec.values(k));
    std::cout << "; final loss " << num6(trace.loss.back()) << " at t="
              << num6(trace.times.back()) << "\n";
  }
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// eval: analogy / similarity benchmarks and principal-direction neighbors
// ---------------------------------------------------------------------------

struct EvalOpts {
  std::string embedding;
  std::string vocab;
  std::string analogies;
  std::string similarity;
  bool cosine = false;
  int pc_components = 0;
  int pc_top = 12;
  std::string out;
  int threads = 0;
};

std::string eval_markdown(const ordered_json& j) {
  std::ostringstream md;
  md << "# Benchmark summary\n";
  if (j.contains("analogy")) {
    const auto& a = j.at("analogy");
    md << "\n## Analogy completion\n\n";
    md << "| category | tuples | accuracy | candidate-only |\n";
    md << "|---|---:|---:|---:|\n";
    for (const auto& c : a.at("categories")) {
      md << "| " << c.at("name").get<std::string>() << " | "
         << c.at("total").get<std::uint64_t>() << " | "
         << fixed4(c.at("accuracy").get<double>()) << " | "
         << fixed4(c.at("accuracy_candidate_only").get<double>()) << " |\n";
    }
    md << "| **overall** | " << a.at("total").get<std::uint64_t>() << " | **"
       << fixed4(a.at("accuracy").get<double>()) << "** | **"
       << fixed4(a.at("accuracy_candidate_only").get<double>()) << "** |\n";
    md << "\nDropped tuples: " << a.at("dropped_oov").get<std::uint64_t>()
       << " out-of-vocabulary, " << a.at("dropped_repeated").get<std::uint64_t>()
       << " with repeated words. Flagged (zero-norm embedding): "
       << a.at("flagged").get<std::uint64_t>() << ".\n";
  }
  if (j.contains("similarity")) {
    const auto& s = j.at("similarity");
    md << "\n## Similarity\n\n";
    md << "Spearman rank correlation "
       << (s.at("cosine").get<bool>() ? "(cosine scores)" : "(inner-product scores)")
       << ": **" << fixed4(s.at("spearman").get<double>()) << "** over "
       << s.at("pairs").get<std::uint64_t>() << " pairs ("
       << s.at("dropped_oov").get<std::uint64_t>() << " dropped).\n";
  }
  if (j.contains("pc_neighbors")) {
    md << "\n## Principal-direction neighbors\n\n";
    int c = 0;
    for (const auto& comp : j.at("pc_neighbors")) {
      md << "- PC" << ++c << ":";
      for (const auto& entry : comp)
        md << " " << entry.at(0).get<std::string>() << " ("
           << fixed4(entry.at(1).get<double>()) << ")";
      md << "\n";
    }
  }
  return md.str();
}

void run_eval(const EvalOpts& o) {
  apply_threads(o.threads);
  if (o.analogies.empty() && o.similarity.empty() && o.pc_components <= 0)
    throw UsageError("eval: provide --analogies, --similarity, or --pc-components");
  CommandLog log("eval", o.out, 0);
  log.config("embedding", o.embedding);
  log.config("vocab", o.vocab);
  if (!o.analogies.empty()) log.config("analogies", o.analogies);
  if (!o.similarity.empty()) log.config("similarity", o.similarity);
  log.config("cosine", o.cosine);
  if (o.pc_components > 0) {
    log.config("pc-components", o.pc_components);
    log.config("pc-top", o.pc_top);
  }

  log.input(o.vocab);
  Vocabulary vocab = read_vocab_tsv(o.vocab);
  log.input(o.embedding);
  MxcFile emb = read_mxc(o.embedding);
  if (emb.matrix.rows() != static_cast<Eigen::Index>(vocab.size()))
    throw DataError("eval: embedding rows (" + std::to_string(emb.matrix.rows()) +
                    ") do not match vocabulary size (" + std::to_string(vocab.size()) +
                    ")");

  ordered_json out;
  out["embedding"] = ordered_json{{"path", o.embedding},
                                  {"name", emb.name},
                                  {"provenance", emb.provenance},
                                  {"V", emb.matrix.rows()},
                                  {"d", emb.matrix.cols()}};

  if (!o.analogies.empty()) {
    log.input(o.analogies);
    AnalogySet aset = load_analogy_set(o.analogies, vocab);
    AnalogyResult full = analogy_accuracy(emb.matrix, aset, AnalogyNorm::kFull);
    AnalogyResult cand = analogy_accuracy(emb.matrix, aset, AnalogyNorm::kCandidateOnly);
    ordered_json cats = ordered_json::array();
    for (std::size_t k = 0; k < full.categories.size(); ++k) {
      cats.push_back(ordered_json{
          {"name", full.categories[k].name},
          {"total", full.categories[k].total},
          {"correct", full.categories[k].correct},
          {"flagged", full.categories[k].flagged},
          {"accuracy", full.categories[k].accuracy},
          {"accuracy_candidate_only", cand.categories[k].accuracy}});
    }
    out["analogy"] = ordered_json{{"total", full.total},
                                  {"correct", full.correct},
                                  {"flagged", full.flagged},
                                  {"accuracy", full.accuracy},
                                  {"accuracy_candidate_only", cand.accuracy},
                                  {"dropped_oov", aset.dropped_oov},
                                  {"dropped_repeated", aset.dropped_repeated},
                                  {"categories", cats}};
    std::cout << "analogy accuracy: " << fixed4(full.accuracy) << " over " << full.total
              << " tuples (candidate-only " << fixed4(cand.accuracy) << ")\n";
  }

  if (!o.similarity.empty()) {
    log.input(o.similarity);
    SimilaritySet sset = load_similarity_set(o.similarity, vocab);
    const double rho = spearman(emb.matrix, sset, o.cosine);
    out["similarity"] = ordered_json{{"spearman", rho},
                                     {"pairs", sset.pairs.size()},
                                     {"dropped_oov", sset.dropped_oov},
                                     {"cosine", o.cosine}};
    std::cout << "similarity spearman: " << fixed4(rho) << " over " << sset.pairs.size()
              << " pairs\n";
  }

  if (o.pc_components > 0) {
    ordered_json comps = ordered_json::array();
    for (int c = 0; c < o.pc_components; ++c) {
      ordered_json arr = ordered_json::array();
      for (const auto& [word, cosv] : pc_neighbors(emb.matrix, vocab, c, o.pc_top))
        arr.push_back(ordered_json::array({word, cosv}));
      comps.push_back(arr);
    }
    out["pc_neighbors"] = comps;
  }

  write_text_file(log.output("eval.json"), out.dump(2) + "\n");
  write_text_file(log.output("eval.md"), eval_markdown(out));
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// taskvec: task-vector spectra, MP fits, and the SNR/accuracy sweep
// ---------------------------------------------------------------------------

struct TaskvecOpts {
  std::string embedding;
  std::string vocab;
  std::string analogies;
  std::string d_grid;
  double rank_tol = 1e-8;
  int nbins = 24;
  std::string out;
  int threads = 0;
};

std::vector<int> default_d_grid(int d) {
  std::vector<int> grid;
  for (int g = 1; g < d; g = std::max(g + 1, g + g / 2)) grid.push_back(g);
  grid.push_back(d);
  return grid;
}

void run_taskvec(const TaskvecOpts& o) {
  apply_threads(o.threads);
  CommandLog log("taskvec", o.out, 0);
  log.config("embedding", o.embedding);
  log.config("vocab", o.vocab);
  log.config("analogies", o.analogies);
  log.config("rank-tol", o.rank_tol);
  log.config("nbins", o.nbins);

  log.input(o.vocab);
  Vocabulary vocab = read_vocab_tsv(o.vocab);
  log.input(o.embedding);
  MxcFile emb = read_mxc(o.embedding);
  if (emb.matrix.rows() != static_cast<Eigen::Index>(vocab.size()))
    throw DataError("taskvec: embedding rows do not match vocabulary size");
  log.input(o.analogies);
  AnalogySet aset = load_analogy_set(o.analogies, vocab);
  if (aset.total_tuples() == 0)
    throw DataError("taskvec: no analogy tuples survived vocabulary filtering in " +
                    o.analogies);

  const int d = static_cast<int>(emb.matrix.cols());
  std::vector<int> grid =
      o.d_grid.empty() ? default_d_grid(d) : parse_int_list(o.d_grid, "--d-grid");
  {
    std::ostringstream gs;
    for (std::size_t k = 0; k < grid.size(); ++k) gs << (k ? "," : "") << grid[k];
    log.config("d-grid", gs.str());
  }

  std::vector<SnrSweepRow> rows = snr_sweep(emb.matrix, aset, grid, o.rank_tol);
  {
    std::ostringstream csv;
    csv.precision(17);
    csv << "category,d,snr,signal_in_mean,accuracy\n";
    for (const auto& r : rows)
      csv << sanitize_name(r.category) << "," << r.d_trunc << "," << r.snr << ","
          << r.signal_in_mean << "," << r.accuracy << "\n";
    write_text_file(log.output("sweep.csv"), csv.str());
  }

  ordered_json fits = ordered_json::array();
  std::set<std::string> used_names;
  for (const auto& cat : aset.categories) {
    std::string san = sanitize_name(cat.name);
    while (!used_names.insert(san).second) san += "_x";
    ordered_json entry;
    entry["category"] = cat.name;
    entry["file"] = san;
    try {
      auto pairs = pairs_from_category(cat);
      TaskVectorSet tv = build_task_vectors(emb.matrix, pairs, d, cat.name);
      entry["n"] = tv.R.rows();
      entry["d"] = d;
      entry["snr"] = spike_snr(tv, o.rank_tol);
      entry["signal_in_mean"] = signal_in_mean(tv);

      std::vector<double> lambdas(tv.spectrum.data(), tv.spectrum.data() + tv.spectrum.size());
      std::ostringstream sc;
      sc.precision(17);
      sc << "lambda\n";
      for (double v : lambdas) sc << v << "\n";
      write_text_file(log.output("spectrum_" + san + ".csv"), sc.str());

      Histogram h = histogram(lambdas, o.nbins);
      std::ostringstream hc;
      hc.precision(17);
      hc << "lo,hi,count\n";
      for (std::size_t b = 0; b + 1 < h.edges.size(); ++b)
        hc << h.edges[b] << "," << h.edges[b + 1] << "," << h.counts[b] << "\n";
      write_text_file(log.output("hist_" + san + ".csv"), hc.str());

      MPFit fit = mp_fit(tv);
      entry["mp"] = ordered_json{{"sigma2", fit.sigma2},
                                 {"d_eff", fit.d_eff},
                                 {"gamma", fit.gamma},
                                 {"lambda_minus", fit.lambda_minus},
                                 {"lambda_plus", fit.lambda_plus},
                                 {"ks", fit.ks},
                                 {"top_excluded", fit.top_excluded}};
      std::cout << "taskvec " << cat.name << ": n=" << tv.R.rows() << ", snr="
                << num6(spike_snr(tv, o.rank_tol)) << ", MP ks=" << num6(fit.ks)
                << " (d_eff=" << fit.d_eff << ")\n";
    } catch (const std::exception& e) {
      entry["skipped"] = e.what();
      std::cout << "taskvec " << cat.name << ": skipped (" << e.what() << ")\n";
    }
    fits.push_back(entry);
  }
  write_text_file(log.output("fits.json"), fits.dump(2) + "\n");
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// report: charts and tables from a run directory
// ---------------------------------------------------------------------------

struct ReportOpts {
  std::string run;
  std::string out;
  int nbins = 24;
  int threads = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::string& path) {
  CsvTable t;
  std::istringstream is(read_text_file(path));
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw DataError("empty CSV file: " + path);
  return t;
}

double csv_num(const std::string& cell, const std::string& path) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    throw DataError("non-numeric cell '" + cell + "' in " + path);
  return v;
}

DynamicsTrace trace_from_csv(const std::string& path) {
  CsvTable t = read_csv_table(path);
  const std::size_t ncols = t.header.size();
  if (ncols < 4 || (ncols - 2) % 2 != 0 || t.header[0] != "t" || t.header[1] != "loss")
    throw DataError("unrecognized trace layout in " + path);
  const std::size_t d = (ncols - 2) / 2;
  if (t.header[2] != "s1sq" || t.header[2 + d] != "align1")
    throw DataError("unrecognized trace layout in " + path);

  DynamicsTrace trace;
  const std::size_t n = t.rows.size();
  trace.mode_variance.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  trace.alignment.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t r = 0; r < n; ++r) {
    if (t.rows[r].size() != ncols) throw DataError("ragged row in " + path);
    trace.times.push_back(csv_num(t.rows[r][0], path));
    trace.loss.push_back(csv_num(t.rows[r][1], path));
    for (std::size_t k = 0; k < d; ++k) {
      trace.mode_variance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          csv_num(t.rows[r][2 + k], path);
      trace.alignment(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          csv_num(t.rows[r][2 + d + k], path);
    }
  }
  if (trace.times.empty()) throw DataError("no rows in " + path);
  return trace;
}

void run_report(const ReportOpts& o) {
  apply_threads(o.threads);
  if (!fs::is_directory(o.run)) throw DataError("run directory not found: " + o.run);
  const std::string outdir = o.out.empty() ? o.run : o.out;
  CommandLog log("report", outdir, 0);
  log.config("run", o.run);
  log.config("nbins", o.nbins);
  int artifacts = 0;

  auto in_run = [&](const std::string& name) { return join2(o.run, name); };
  auto have = [&](const std::string& name) { return fs::exists(in_run(name)); };
  auto emit_svg = [&](const std::string& name, const std::string& svg) {
    write_text_file(log.output(name), svg);
    std::cout << "wrote " << join2(outdir, name) << "\n";
    ++artifacts;
  };

  if (have("trace.csv")) {
    log.input(in_run("trace.csv"));
    DynamicsTrace trace = trace_from_csv(in_run("trace.csv"));
    const auto d = trace.mode_variance.cols();

    bool have_theory = have("theory.csv");
    DynamicsTrace theory;
    if (have_theory) {
      log.input(in_run("theory.csv"));
      theory = trace_from_csv(in_run("theory.csv"));
    }

    std::vector<Series> modes;
    for (Eigen::Index k = 0; k < d; ++k)
      modes.push_back({"mode " + std::to_string(k + 1), trace.times,
                       eig_col(trace.mode_variance, k), false});
    if (have_theory)
      for (Eigen::Index k = 0; k < std::min(d, theory.mode_variance.cols()); ++k)
        modes.push_back({"mode " + std::to_string(k + 1) + " (theory)", theory.times,
                         eig_col(theory.mode_variance, k), true});
    ChartConfig mc;
    mc.title = "Singular-value dynamics";
    mc.xlabel = "flow time";
    mc.ylabel = "mode variance s_k^2";
    emit_svg("report_modes.svg", line_chart_svg(modes, mc));

    // Half-saturation markers against the saturated plateau values; the last
    // recorded point of each mode stands in for lambda_k.
    const DynamicsTrace& sat = have_theory ? theory : trace;
    Eigen::VectorXd lam = sat.mode_variance.row(sat.mode_variance.rows() - 1).transpose();
    ChartConfig lc;
    lc.title = "Loss";
    lc.xlabel = "flow time";
    lc.ylabel = "loss";
    for (double tau : half_saturation_times(trace, lam.head(d)))
      if (std::isfinite(tau)) lc.x_markers.push_back(tau);
    emit_svg("report_loss.svg",
             line_chart_svg({{"loss", trace.times, trace.loss, false}}, lc));

    if (trace.alignment.size() > 0 && trace.alignment.maxCoeff() > 0.0) {
      std::vector<Series> al;
      for (Eigen::Index k = 0; k < d; ++k)
        al.push_back({"mode " + std::to_string(k + 1), trace.times,
                      eig_col(trace.alignment, k), false});
      ChartConfig ac;
      ac.title = "Alignment with target eigenvectors";
      ac.xlabel = "flow time";
      ac.ylabel = "squared subspace overlap";
      emit_svg("report_alignment.svg", line_chart_svg(al, ac));
    }
  }

  if (have("silent.csv")) {
    log.input(in_run("silent.csv"));
    CsvTable t = read_csv_table(in_run("silent.csv"));
    if (t.header.size() != 4) throw DataError("unrecognized layout in silent.csv");
    Series sup{"sup distance", {}, {}, false};
    Series fin{"final distance", {}, {}, true};
    for (const auto& r : t.rows) {
      const double s2 = csv_num(r[0], "silent.csv");
      sup.x.push_back(s2);
      sup.y.push_back(csv_num(r[2], "silent.csv"));
      fin.x.push_back(s2);
      fin.y.push_back(csv_num(r[3], "silent.csv"));
    }
    ChartConfig sc;
    sc.title = "Distance to the aligned trajectory";
    sc.xlabel = "initialization variance sigma^2";
    sc.ylabel = "relative distance";
    sc.logx = true;
    sc.logy = true;
    emit_svg("report_silent.svg", scatter_chart_svg({sup, fin}, sc));
  }

  if (have("eval.json")) {
    log.input(in_run("eval.json"));
    ordered_json j;
    try {
      j = ordered_json::parse(read_text_file(in_run("eval.json")));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("cannot parse eval.json: " + std::string(e.what()));
    }
    write_text_file(log.output("report_eval.md"), eval_markdown(j));
    std::cout << "wrote " << join2(outdir, "report_eval.md") << "\n";
    ++artifacts;
  }

  if (have("sweep.csv")) {
    log.input(in_run("sweep.csv"));
    CsvTable t = read_csv_table(in_run("sweep.csv"));
    if (t.header.size() != 5) throw DataError("unrecognized layout in sweep.csv");
    std::vector<std::string> order;
    std::map<std::string, std::size_t> index;
    std::vector<Series> snr, acc;
    for (const auto& r : t.rows) {
      if (!index.count(r[0])) {
        index[r[0]] = snr.size();
        order.push_back(r[0]);
        snr.push_back({r[0], {}, {}, false});
        acc.push_back({r[0], {}, {}, false});
      }
      const std::size_t k = index[r[0]];
      const double dv = csv_num(r[1], "sweep.csv");
      snr[k].x.push_back(dv);
      snr[k].y.push_back(csv_num(r[2], "sweep.csv"));
      acc[k].x.push_back(dv);
      acc[k].y.push_back(csv_num(r[4], "sweep.csv"));
    }
    ChartConfig c1;
    c1.title = "Task-vector spike SNR vs. truncation";
    c1.xlabel = "embedding dimension d'";
    c1.ylabel = "snr";
    emit_svg("report_snr.svg", line_chart_svg(snr, c1));
    ChartConfig c2;
    c2.title = "Analogy accuracy vs. truncation";
    c2.xlabel = "embedding dimension d'";
    c2.ylabel = "accuracy";
    emit_svg("report_accuracy.svg", line_chart_svg(acc, c2));
  }

  if (have("fits.json")) {
    log.input(in_run("fits.json"));
    ordered_json fits;
    try {
      fits = ordered_json::parse(read_text_file(in_run("fits.json")));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("cannot parse fits.json: " + std::string(e.what()));
    }
    for (const auto& entry : fits) {
      if (!entry.contains("file")) continue;
      const std::string san = entry.at("file").get<std::string>();
      const std::string spath = in_run("spectrum_" + san + ".csv");
      if (!fs::exists(spath)) continue;
      log.input(spath);
      CsvTable t = read_csv_table(spath);
      std::vector<double> lambdas;
      for (const auto& r : t.rows) lambdas.push_back(csv_num(r[0], spath));
      if (lambdas.empty()) continue;

      std::vector<Series> overlays;
      std::string title = "Task-vector spectrum: " + entry.at("category").get<std::string>();
      if (entry.contains("mp")) {
        const auto& mp = entry.at("mp");
        const double sigma2 = mp.at("sigma2").get<double>();
        const double gamma = mp.at("gamma").get<double>();
        const double d_eff = static_cast<double>(mp.at("d_eff").get<int>());
        const double lo = mp.at("lambda_minus").get<double>();
        const double hi = mp.at("lambda_plus").get<double>();
        if (mp.at("top_excluded").get<bool>() && lambdas.size() > 1)
          lambdas.erase(lambdas.begin());  // spectrum is stored descending
        for (double& v : lambdas) v /= d_eff;  // the fit lives on this scale
        Series curve{"MP fit", {}, {}, false};
        const int npts = 257;
        for (int p = 0; p < npts; ++p) {
          const double x = lo + (hi - lo) * static_cast<double>(p) / (npts - 1);
          curve.x.push_back(x);
          curve.y.push_back(mp_pdf(x, sigma2, gamma));
        }
        overlays.push_back(curve);
      }
      Histogram h = histogram(lambdas, o.nbins);
      ChartConfig hc;
      hc.title = title;
      hc.xlabel = entry.contains("mp") ? "gram eigenvalue / d_eff" : "gram eigenvalue";
      hc.ylabel = "density";
      emit_svg("report_mp_" + san + ".svg", histogram_svg(h, overlays, hc));
    }
  }

  if (artifacts == 0)
    throw DataError("no reportable artifacts (trace.csv, silent.csv, eval.json, "
                    "sweep.csv, fits.json) found in " + o.run);
  std::cout << "manifest: " << log.finish() << "\n";
}

// ---------------------------------------------------------------------------
// wiring
// ---------------------------------------------------------------------------

void add_threads_flag(CLI::App* sub, int& slot) {
  sub->add_option("--threads", slot, "worker threads")->envname("QWEM_THREADS");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"quadratic word embedding laboratory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  GenOpts gen;
  {
    CLI::App* c = app.add_subcommand("gen", "generate the planted-analogy corpus");
    c->add_option("--groups", gen.pc.groups, "latent groups")->capture_default_str();
    c->add_option("--relations", gen.pc.relations, "latent relations")->capture_default_str();
    c->add_option("--group-words", gen.pc.group_words, "content words per group")
        ->capture_default_str();
    c->add_option("--marker-words", gen.pc.marker_words, "words per relation-form marker")
        ->capture_default_str();
    c->add_option("--common-words", gen.pc.common_words, "shared filler words")
        ->capture_default_str();
    c->add_option("--sentences", gen.pc.sentences, "sentences to write")->capture_default_str();
    c->add_option("--sentence-len", gen.pc.sentence_len, "tokens per sentence")
        ->capture_default_str();
    c->add_option("--p-group", gen.pc.p_group, "group-word probability")->capture_default_str();
    c->add_option("--p-marker", gen.pc.p_marker, "marker-word probability")
        ->capture_default_str();
    c->add_option("--p-cell", gen.pc.p_cell, "cell-word probability")->capture_default_str();
    c->add_option("--zipf-shift", gen.pc.zipf_shift, "class-frequency decay shift")
        ->capture_default_str();
    c->add_option("--seed", gen.pc.seed, "generator seed")->capture_default_str();
    c->add_option("--similarity-pairs", gen.similarity_pairs, "similarity pairs to sample")
        ->capture_default_str();
    c->add_option("--out", gen.out, "output directory")->required();
    add_threads_flag(c, gen.threads);
    c->callback([&gen] { run_gen(gen); });
  }

  IngestOpts ingest;
  {
    CLI::App* c = app.add_subcommand("ingest", "build a vocabulary from a corpus");
    c->add_option("--corpus", ingest.corpus, "newline-delimited text (optionally .gz)")
        ->required();
    c->add_option("--vocab", ingest.vocab, "vocabulary size")->capture_default_str();
    c->add_option("--min-doc-tokens", ingest.min_doc_tokens, "skip shorter documents")
        ->capture_default_str();
    c->add_option("--out", ingest.out, "output directory")->required();
    add_threads_flag(c, ingest.threads);
    c->callback([&ingest] { run_ingest(ingest); });
  }

  StatsOpts stats;
  {
    CLI::App* c = app.add_subcommand("stats", "count skip-gram co-occurrence statistics");
    c->add_option("--corpus", stats.corpus, "newline-delimited text (optionally .gz)")
        ->required();
    c->add_option("--vocab", stats.vocab, "vocabulary size to build");
    c->add_option("--vocab-file", stats.vocab_file, "existing vocab.tsv to reuse");
    c->add_option("--window", stats.window, "context length L (L/2 per side)")
        ->capture_default_str();
    c->add_option("--oov", stats.oov, "out-of-vocabulary policy: remove|mask")
        ->capture_default_str();
    c->add_option("--min-doc-tokens", stats.min_doc_tokens, "skip shorter documents")
        ->capture_default_str();
    c->add_option("--out", stats.out, "output directory")->required();
    add_threads_flag(c, stats.threads);
    c->callback([&stats] { run_stats(stats); });
  }

  TargetOpts target;
  {
    CLI::App* c = app.add_subcommand("target", "build a target matrix from statistics");
    c->add_option("--stats", target.stats, "corpus.sgs from the stats step")->required();
    c->add_option("--kind", target.kind, "mstar|pmi|ppmi")->capture_default_str();
    c->add_option("--reweight", target.reweight,
                  "unit|setting1|dynwindow|subsample|negsample, joined with '+'")
        ->capture_default_str();
    c->add_option("--negsample-k", target.negsample_k, "negative-sample rate")
        ->capture_default_str();
    c->add_option("--negsample-exponent", target.negsample_exponent,
                  "negative-distribution power")
        ->capture_default_str();
    c->add_option("--pmi-floor", target.pmi_floor, "floor for zero-count PMI entries")
        ->capture_default_str();
    c->add_option("--out", target.out, "output directory")->required();
    add_threads_flag(c, target.threads);
    c->callback([&target] { run_target(target); });
  }

  FactorizeOpts fact;
  {
    CLI::App* c = app.add_subcommand("factorize", "spectral embedding of a target matrix");
    c->add_option("--target", fact.target, "target .mxc file")->required();
    c->add_option("--d", fact.d, "embedding dimension")->capture_default_str();
    c->add_option("--gvec", fact.gvec, "rank-one weight vector .mxc (weighted fit)");
    c->add_option("--out", fact.out, "output directory")->required();
    add_threads_flag(c, fact.threads);
    c->callback([&fact] { run_factorize(fact); });
  }

  TrainOpts train;
  {
    CLI::App* c = app.add_subcommand("train", "minibatch SGD on the quartic or SGNS loss");
    c->add_option("--stats", train.stats, "corpus.sgs from the stats step")->required();
    c->add_option("--d", train.d, "embedding dimension")->capture_default_str();
    c->add_option("--loss", train.loss, "qwem|sgns")->capture_default_str();
    c->add_option("--reweight", train.reweight, "reweighting scheme expression")
        ->capture_default_str();
    c->add_option("--negsample-k", train.negsample_k, "negative-sample rate")
        ->capture_default_str();
    c->add_option("--negsample-exponent", train.negsample_exponent,
                  "negative-distribution power")
        ->capture_default_str();
    c->add_option("--batch-pos", train.batch_pos, "positive pairs per step")
        ->capture_default_str();
    c->add_option("--batch-neg", train.batch_neg, "negative pairs per step")
        ->capture_default_str();
    c->add_option("--lr", train.lr, "learning rate (default: 0.5 qwem, 0.025 sgns)");
    c->add_option("--lr-schedule", train.lr_schedule, "constant|step")->capture_default_str();
    c->add_option("--steps", train.steps, "SGD steps")->capture_default_str();
    c->add_option("--init", train.init, "normal|w2v")->capture_default_str();
    c->add_option("--sigma2", train.sigma2, "initialization variance (normal init)")
        ->capture_default_str();
    c->add_option("--seed", train.seed, "RNG seed")->capture_default_str();
    c->add_option("--probe-pairs", train.probe_pairs, "held-out pairs per loss probe")
        ->capture_default_str();
    c->add_option("--probes", train.probes, "probe records along training")
        ->capture_default_str();
    c->add_option("--target", train.target, "target .mxc for alignment probes");
    c->add_option("--out", train.out, "output directory")->required();
    add_threads_flag(c, train.threads);
    c->callback([&train] { run_train(train); });
  }

  DynamicsOpts dyn;
  {
    CLI::App* c = app.add_subcommand("dynamics", "integrate the embedding gradient flow");
    c->add_option("--target", dyn.target, "target .mxc file")->required();
    c->add_option("--d", dyn.d, "embedding dimension")->capture_default_str();
    c->add_option("--sigma2", dyn.sigma2, "initialization variance")->capture_default_str();
    c->add_option("--seed", dyn.seed, "RNG seed")->capture_default_str();
    c->add_option("--t-max", dyn.t_max, "end of the time grid (default: 6 tau_1)");
    c->add_option("--points", dyn.points, "grid points")->capture_default_str();
    c->add_option("--step", dyn.step, "integrator step (default: 0.01 / lambda_1)");
    c->add_flag("--silent", dyn.silent, "run the small-initialization alignment sweep");
    c->add_option("--sigma2-list", dyn.sigma2_list, "sigma^2 values for --silent")
        ->capture_default_str();
    c->add_option("--rescaled-max", dyn.rescaled_max, "rescaled-time horizon for --silent")
        ->capture_default_str();
    c->add_option("--rescaled-points", dyn.rescaled_points, "grid points for --silent")
        ->capture_default_str();
    c->add_option("--out", dyn.out, "output directory")->required();
    add_threads_flag(c, dyn.threads);
    c->callback([&dyn] { run_dynamics(dyn); });
  }

  EvalOpts eval;
  {
    CLI::App* c = app.add_subcommand("eval", "analogy and similarity benchmarks");
    c->add_option("--embedding", eval.embedding, "embedding .mxc")->required();
    c->add_option("--vocab", eval.vocab, "vocab.tsv matching the embedding")->required();
    c->add_option("--analogies", eval.analogies, "questions-words style analogy file");
    c->add_option("--similarity", eval.similarity, "word1 word2 score similarity file");
    c->add_flag("--cosine", eval.cosine, "score similarity by cosine instead of dot");
    c->add_option("--pc-components", eval.pc_components,
                  "report neighbors of the first N principal directions");
    c->add_option("--pc-top", eval.pc_top, "neighbors per principal direction")
        ->capture_default_str();
    c->add_option("--out", eval.out, "output directory")->required();
    add_threads_flag(c, eval.threads);
    c->callback([&eval] { run_eval(eval); });
  }

  TaskvecOpts tv;
  {
    CLI::App* c = app.add_subcommand("taskvec", "task-vector spectra and MP fits");
    c->add_option("--embedding", tv.embedding, "embedding .mxc (spectral provenance)")
        ->required();
    c->add_option("--vocab", tv.vocab, "vocab.tsv matching the embedding")->required();
    c->add_option("--analogies", tv.analogies, "analogy file defining the pair sets")
        ->required();
    c->add_option("--d-grid", tv.d_grid, "comma-separated truncation dimensions");
    c->add_option("--rank-tol", tv.rank_tol, "relative rank tolerance for snr")
        ->capture_default_str();
    c->add_option("--nbins", tv.nbins, "histogram bins")->capture_default_str();
    c->add_option("--out", tv.out, "output directory")->required();
    add_threads_flag(c, tv.threads);
    c->callback([&tv] { run_taskvec(tv); });
  }

  ReportOpts rep;
  {
    CLI::App* c = app.add_subcommand("report", "charts and tables from a run directory");
    c->add_option("--run", rep.run, "run directory with artifacts")->required();
    c->add_option("--out", rep.out, "output directory (default: the run directory)");
    c->add_option("--nbins", rep.nbins, "histogram bins")->capture_default_str();
    add_threads_flag(c, rep.threads);
    c->callback([&rep] { run_report(rep); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace qwem
