#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "qwem/corpus.hpp"
#include "qwem/dynamics.hpp"
#include "qwem/rng.hpp"
#include "qwem/spectral.hpp"
#include "qwem/target.hpp"
#include "qwem/trainers.hpp"

namespace {

using qwem::Rng;

// A small synthetic corpus shared by the counting / target benchmarks.
qwem::SkipGramStats make_stats(std::uint32_t V, int docs, int len) {
  Rng rng(11);
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(static_cast<std::size_t>(docs));
  for (int d = 0; d < docs; ++d) {
    std::vector<std::string> doc;
    doc.reserve(static_cast<std::size_t>(len));
    for (int t = 0; t < len; ++t)
      doc.push_back("w" + std::to_string(rng.uniform_index(V)));
    corpus.push_back(std::move(doc));
  }
  qwem::MemorySource src(corpus);
  qwem::Vocabulary vocab = qwem::build_vocabulary(src, V, 0);
  src.reset();
  return qwem::count_skipgrams(src, vocab, 8);
}

void BM_count_skipgrams(benchmark::State& state) {
  Rng rng(11);
  std::vector<std::vector<std::string>> corpus;
  for (int d = 0; d < 2000; ++d) {
    std::vector<std::string> doc;
    for (int t = 0; t < 40; ++t) doc.push_back("w" + std::to_string(rng.uniform_index(300)));
    corpus.push_back(std::move(doc));
  }
  qwem::MemorySource src(corpus);
  qwem::Vocabulary vocab = qwem::build_vocabulary(src, 300, 0);
  for (auto _ : state) {
    src.reset();
    benchmark::DoNotOptimize(qwem::count_skipgrams(src, vocab, 8));
  }
}
BENCHMARK(BM_count_skipgrams);

void BM_build_mstar(benchmark::State& state) {
  const auto V = static_cast<std::uint32_t>(state.range(0));
  qwem::SkipGramStats stats = make_stats(V, 2000, 40);
  auto config = qwem::ReweightConfig::single(qwem::ReweightScheme::kSetting1);
  for (auto _ : state) benchmark::DoNotOptimize(qwem::build_mstar(stats, config));
}
BENCHMARK(BM_build_mstar)->Arg(200)->Arg(500);

void BM_eigh(benchmark::State& state) {
  const auto V = static_cast<Eigen::Index>(state.range(0));
  Rng rng(3);
  Eigen::MatrixXd A(V, V);
  for (Eigen::Index i = 0; i < V; ++i)
    for (Eigen::Index j = 0; j < V; ++j) A(i, j) = rng.normal();
  Eigen::MatrixXd M = 0.5 * (A + A.transpose());
  for (auto _ : state) benchmark::DoNotOptimize(qwem::eigh(M, 16));
}
BENCHMARK(BM_eigh)->Arg(256)->Arg(512);

void BM_sgd_step(benchmark::State& state) {
  qwem::SkipGramStats stats = make_stats(500, 2000, 40);
  qwem::Reweighting rw(qwem::ReweightConfig::single(qwem::ReweightScheme::kSetting1), stats);
  qwem::PairSampler sampler(stats, rw);
  Rng rng(5);
  Eigen::MatrixXd W(500, 64);
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = 1e-3 * rng.normal();
  for (auto _ : state) {
    auto batch = sampler.sample(10000, 10000, rng);
    auto [loss, grad] = qwem::loss_and_grad_qwem(W, batch.pos, batch.neg, batch.psi_pos,
                                                 batch.psi_neg);
    benchmark::DoNotOptimize(loss);
    benchmark::DoNotOptimize(grad);
  }
}
BENCHMARK(BM_sgd_step);

void BM_integrate_flow(benchmark::State& state) {
  Rng rng(7);
  Eigen::MatrixXd A(64, 64);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rng.normal();
  Eigen::MatrixXd M = (A * A.transpose()) / 64.0;
  Eigen::MatrixXd W0(64, 8);
  for (Eigen::Index i = 0; i < W0.rows(); ++i)
    for (Eigen::Index j = 0; j < W0.cols(); ++j) W0(i, j) = 1e-3 * rng.normal();
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(0.25 * k);
  for (auto _ : state) benchmark::DoNotOptimize(qwem::integrate_flow(M, W0, grid));
}
BENCHMARK(BM_integrate_flow);

}  // namespace

BENCHMARK_MAIN();
