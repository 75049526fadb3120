#include <benchmark/benchmark.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "orthofit/cpc.hpp"
#include "orthofit/factor.hpp"
#include "orthofit/matrix.hpp"
#include "orthofit/plr.hpp"

namespace {

using namespace orthofit;

DenseMatrix random_gaussian(std::mt19937_64& rng, std::size_t rows,
                            std::size_t cols) {
  std::normal_distribution<double> normal;
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

OrthogonalMatrix random_orthogonal(std::mt19937_64& rng, std::size_t d) {
  return OrthogonalMatrix(qr_decompose(random_gaussian(rng, d, d)).q);
}

DenseMatrix random_spd(std::mt19937_64& rng, std::size_t d) {
  const DenseMatrix g = random_gaussian(rng, d, d);
  DenseMatrix s = matmul(transpose(g), g);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) s(i, j) /= static_cast<double>(d);
    s(i, i) += 0.5;
  }
  return s;
}

// Two groups sharing a rotation but with different axis variances, so
// the CPC fits below run on data that actually satisfies the model.
GroupedDataset synthetic_groups(std::mt19937_64& rng, std::size_t d,
                                std::size_t n_per_group) {
  const OrthogonalMatrix q = random_orthogonal(rng, d);
  std::uniform_real_distribution<double> lam(0.3, 3.0);
  std::vector<std::string> names;
  std::vector<DenseMatrix> groups;
  for (std::size_t j = 0; j < 2; ++j) {
    DenseMatrix z = random_gaussian(rng, n_per_group, d);
    for (std::size_t c = 0; c < d; ++c) {
      const double sd = std::sqrt(lam(rng));
      for (std::size_t i = 0; i < n_per_group; ++i) z(i, c) *= sd;
    }
    groups.push_back(matmul(z, transpose(q.matrix())));
    names.push_back("g" + std::to_string(j));
  }
  return GroupedDataset(std::move(names), std::move(groups));
}

void BM_PlrCompose(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::vector<std::size_t> mapping(d);
  for (std::size_t i = 0; i < d; ++i) mapping[i] = i;
  std::shuffle(mapping.begin(), mapping.end(), rng);
  const Permutation p(mapping);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> sub(UnitLowerTriangular::packed_size(d));
  for (double& v : sub) v = u(rng);
  const UnitLowerTriangular l(d, sub);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plr_compose(p, l));
  }
}
BENCHMARK(BM_PlrCompose)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_PlrDecompose(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(11);
  const OrthogonalMatrix q = random_orthogonal(rng, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plr_decompose(q));
  }
}
BENCHMARK(BM_PlrDecompose)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_QrDecompose(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(13);
  const DenseMatrix a = random_gaussian(rng, d, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(qr_decompose(a));
  }
}
BENCHMARK(BM_QrDecompose)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_PluDecompose(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(17);
  const DenseMatrix a = random_gaussian(rng, d, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(plu_decompose(a));
  }
}
BENCHMARK(BM_PluDecompose)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_SymmetricEigen(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(19);
  const DenseMatrix s = random_spd(rng, d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(symmetric_eigen(s));
  }
}
BENCHMARK(BM_SymmetricEigen)->Arg(2)->Arg(5)->Arg(10)->Arg(20);

void BM_FgAlgorithm(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(23);
  const GroupedDataset data = synthetic_groups(rng, d, 80);
  const std::vector<GroupStats> stats = group_stats(data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fg_algorithm(stats));
  }
}
BENCHMARK(BM_FgAlgorithm)->Arg(2)->Arg(5)->Arg(10);

void BM_FitNCpc(benchmark::State& state) {
  std::mt19937_64 rng(29);
  const GroupedDataset data = synthetic_groups(rng, 2, 60);
  const ModelSpec spec{ModelFamily::Normal, ModelStructure::Cpc};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(data, spec));
  }
}
BENCHMARK(BM_FitNCpc)->Unit(benchmark::kMillisecond);

void BM_FitLnCpc(benchmark::State& state) {
  std::mt19937_64 rng(31);
  const GroupedDataset data = synthetic_groups(rng, 2, 60);
  const ModelSpec spec{ModelFamily::LeptokurticNormal, ModelStructure::Cpc};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(data, spec));
  }
}
BENCHMARK(BM_FitLnCpc)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
