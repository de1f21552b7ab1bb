// Timing harness for the density kernels and the multistart driver:
// serial vs OpenMP execution of the same code paths, and the low-rank
// evaluation against the dense reference. The parallel paths must agree
// with the serial ones bit for bit; the max abs difference is printed.

#include <chrono>
#include <iomanip>
#include <iostream>
#include <string>

#include <omp.h>

#include "tmfa/aecm.hpp"
#include "tmfa/datagen.hpp"
#include "tmfa/lowrank_gauss.hpp"

using namespace tmfa;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const std::string& name, double serial_s, double parallel_s, double max_diff) {
  std::cout << std::left << std::setw(28) << name << std::right << std::fixed
            << std::setprecision(3) << std::setw(10) << serial_s * 1e3 << " ms"
            << std::setw(10) << parallel_s * 1e3 << " ms" << std::setprecision(2)
            << std::setw(9) << serial_s / parallel_s << "x   max|diff| = " << std::scientific
            << std::setprecision(1) << max_diff << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  int n = 200000;
  int reps = 5;
  if (argc > 1) n = std::stoi(argv[1]);
  if (argc > 2) reps = std::stoi(argv[2]);

  std::cout << "threads: " << omp_get_max_threads() << ", rows: " << n << ", repeats: " << reps
            << "\n\n";

  const MfaParams truth = builtin_mixture_truth();
  Rng rng(1);
  auto [data, labels] = sample_mixture(truth, n, rng);

  // score matrix: serial vs parallel
  {
    Matrix serial_scores, parallel_scores;
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) serial_scores = score_matrix(data, truth, Exec::serial);
    const double ts = seconds_since(t0) / reps;
    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) parallel_scores = score_matrix(data, truth, Exec::parallel);
    const double tp = seconds_since(t0) / reps;
    report("score_matrix", ts, tp, (serial_scores - parallel_scores).cwiseAbs().maxCoeff());
  }

  // low-rank evaluation vs the dense reference, taller problem
  {
    const int p = 100, d = 5, evals = 20000;
    Rng krng(2);
    Vector psi(p);
    for (int k = 0; k < p; ++k) psi(k) = 0.1 + krng.uniform01();
    const ComponentKernel kernel(krng.normal_vector(p), krng.normal_matrix(p, d), psi);
    Matrix points = krng.normal_matrix(evals, p);

    double sum_woodbury = 0.0, sum_dense = 0.0;
    auto t0 = Clock::now();
    for (int i = 0; i < evals; ++i) sum_woodbury += kernel.log_density(points.row(i).transpose());
    const double tw = seconds_since(t0);
    t0 = Clock::now();
    for (int i = 0; i < evals; ++i)
      sum_dense += kernel.log_density_dense(points.row(i).transpose());
    const double td = seconds_since(t0);
    std::cout << std::left << std::setw(28) << "log_density p=100 d=5" << std::right
              << std::fixed << std::setprecision(3) << std::setw(10) << tw * 1e3
              << " ms (low-rank)" << std::setw(10) << td * 1e3 << " ms (dense)"
              << "   |sum diff| = " << std::scientific << std::setprecision(1)
              << std::abs(sum_woodbury - sum_dense) << '\n';
  }

  // full multistart fit: serial vs parallel starts
  {
    ScenarioSpec spec;
    spec.truth = truth;
    spec.n_clean = 2000;
    spec.n_noise = 10;
    spec.seed = 3;
    const GeneratedData gen = generate_scenario(spec);

    FitConfig config;
    config.n_components = 3;
    config.n_factors = 2;
    config.alpha = 0.06;
    config.bounds = {5.0, 3.0};
    config.n_starts = 10;
    config.seed = 4;

    auto t0 = Clock::now();
    const FitResult serial_fit = fit(gen.data, config, Exec::serial);
    const double ts = seconds_since(t0);
    t0 = Clock::now();
    const FitResult parallel_fit = fit(gen.data, config, Exec::parallel);
    const double tp = seconds_since(t0);
    report("fit (10 starts, n=2010)", ts, tp,
           std::abs(serial_fit.target - parallel_fit.target));
  }

  return 0;
}
