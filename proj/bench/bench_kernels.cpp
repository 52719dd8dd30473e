// Serial reference vs OpenMP kernels.
//   ./bench_kernels --benchmark_filter=Gram
// Set OMP_NUM_THREADS to control the parallel variants.
#include <random>

#include <benchmark/benchmark.h>

#include "enmkl/harness.hpp"
#include "enmkl/kernel.hpp"
#include "enmkl/simdata.hpp"

using namespace enmkl;

namespace {

Points random_points(Eigen::Index n, Eigen::Index d, bool histogram) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Points p(n, d);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = unit(rng);
  if (histogram) p = p.array().colwise() / p.rowwise().sum().array();
  return p;
}

KernelFunc kernel_for(int kind) {
  return kind == 0 ? KernelFunc{KernelKind::Gaussian, 2.0, {}, ""}
                   : KernelFunc{KernelKind::ChiSquare, 1.0, {}, ""};
}

template <bool Parallel>
void BM_Gram(benchmark::State& state) {
  const Points p = random_points(state.range(0), 100, state.range(1) == 1);
  const KernelFunc k = kernel_for(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Eigen::MatrixXd g = Parallel ? build_gram(p, k) : build_gram_serial(p, k);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * (state.range(0) + 1) / 2);
}

template <bool Parallel>
void BM_CrossGram(benchmark::State& state) {
  const Points train = random_points(state.range(0), 100, state.range(1) == 1);
  const Points test = random_points(1000, 100, state.range(1) == 1);
  const KernelFunc k = kernel_for(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Eigen::MatrixXd g =
        Parallel ? build_cross_gram(test, train, k) : build_cross_gram_serial(test, train, k);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000 * state.range(0));
}

// One replicate of a small lambda x C grid; threads = 1 is the serial baseline.
void BM_Sweep(benchmark::State& state) {
  ToySpec spec;
  spec.goal = ToyGoal::ParameterSelection;
  spec.spectrum = SpectrumKind::Dense;
  spec.n_train = 100;
  spec.n_test = 200;
  const SweepProblem problem = problem_from(generate(spec));
  SweepPlan plan = SweepPlan::defaults();
  plan.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sweep_problem(plan, problem, 0).data());
}

}  // namespace

// args: samples, kernel (0 gaussian, 1 chi-square)
BENCHMARK_TEMPLATE(BM_Gram, false)->ArgsProduct({{200, 500, 1000}, {0, 1}})->Name("Gram/serial");
BENCHMARK_TEMPLATE(BM_Gram, true)->ArgsProduct({{200, 500, 1000}, {0, 1}})->Name("Gram/openmp");
BENCHMARK_TEMPLATE(BM_CrossGram, false)->ArgsProduct({{200, 500}, {0, 1}})->Name("CrossGram/serial");
BENCHMARK_TEMPLATE(BM_CrossGram, true)->ArgsProduct({{200, 500}, {0, 1}})->Name("CrossGram/openmp");
BENCHMARK(BM_Sweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
