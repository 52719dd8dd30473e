#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "enmkl/kernel.hpp"
#include "enmkl/simdata.hpp"
#include "enmkl/solver.hpp"

namespace enmkl {

/// How C is chosen for each lambda. BestTest scores on the test set;
/// Validation picks C on a held-out slice of the training set.
enum class SelectC { BestTest, Fixed, Validation };

const char* select_c_name(SelectC s);
SelectC select_c_from_name(const std::string& name);

/// `count` points log-spaced in [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

struct SweepPlan {
  std::vector<double> lambdas;
  std::vector<double> Cs;
  int replicates = 1;
  SelectC select_c = SelectC::BestTest;
  double fixed_c = 0.0;              // used by SelectC::Fixed, must be one of Cs
  double validation_fraction = 0.25;  // used by SelectC::Validation
  std::uint64_t seed = 0;            // replicate r uses dataset seed `seed + r`
  bool warm_start = true;            // reuse the previous C's solution within a lambda
  SolverConfig solver;
  int threads = 0;                   // 0: MKL_THREADS or the OpenMP default

  /// lambda in {0, 0.1, ..., 1}, 8 values of C log-spaced in [0.01, 100].
  static SweepPlan defaults();
  void validate() const;
};

/// One fit of the grid. Rows are ordered by lambda, then C, then replicate.
struct SweepRow {
  double lambda = 0.0;
  double C = 0.0;
  int replicate = 0;
  double test_accuracy = 0.0;
  double validation_accuracy = 0.0;  // NaN unless SelectC::Validation
  std::size_t active_kernels = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;  // seconds; kept out of results.csv
};

struct LambdaSummary {
  double lambda = 0.0;
  double selected_c = 0.0;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  double mean_active = 0.0;
  double std_active = 0.0;
  int count = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<LambdaSummary> summary;
  double best_lambda = 0.0;
  SelectC select_c = SelectC::BestTest;
  double fixed_c = 0.0;
  std::size_t kernels = 0;
};

/// Train/test problem for one replicate of a sweep.
struct SweepProblem {
  GramSet grams;
  Eigen::VectorXd labels;
  std::vector<Eigen::MatrixXd> cross_test;
  Eigen::VectorXd test_labels;
};

SweepProblem problem_from(ToyProblem toy);

/// Per-lambda C selection and best-lambda (ties go to the smaller lambda).
void summarize(SweepResult& result);

/// Fits every (lambda, C) of the plan on one replicate's problem and appends
/// the rows. Lambda chains run in parallel; each chain walks C downwards.
std::vector<SweepRow> sweep_problem(const SweepPlan& plan, const SweepProblem& problem,
                                    int replicate);

/// Regenerates the toy problem with seed plan.seed + r for each replicate.
SweepResult run_sweep(const SweepPlan& plan, const ToySpec& base);

/// Fixed data; every replicate sees the same problem.
SweepResult run_sweep(const SweepPlan& plan, const SweepProblem& problem);

// Report files.
void write_results_csv(const std::string& path, const SweepResult& result);
void write_timings_csv(const std::string& path, const SweepResult& result);
void write_summary_csv(const std::string& path, const SweepResult& result);
void write_sweep_meta(const std::string& path, const SweepResult& result);

/// Reads results.csv and sweep.json from a sweep output directory and
/// recomputes the summary.
SweepResult read_sweep(const std::string& dir);

/// Geometry shared by the SVG plots: lambda in [0, 1] maps to the x axis.
struct PlotFrame {
  double width = 640.0;
  double height = 400.0;
  double left = 70.0;
  double right = 20.0;
  double top = 30.0;
  double bottom = 50.0;

  double x_of(double lambda) const { return left + lambda * (width - left - right); }
  double lambda_of(double x) const { return (x - left) / (width - left - right); }
};

std::string accuracy_svg(const SweepResult& result, const PlotFrame& frame = {});
std::string active_kernels_svg(const SweepResult& result, const PlotFrame& frame = {});

/// results.csv, timings.csv, summary.csv, sweep.json and both SVG plots.
void report(const SweepResult& result, const std::string& out_dir);

/// MKL_THREADS if set and positive, otherwise 0.
int threads_from_env();

}  // namespace enmkl
