#include "enmkl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <stdexcept>

#include <omp.h>

#include "enmkl/spectrum.hpp"

namespace enmkl {

const char* select_c_name(SelectC s) {
  switch (s) {
    case SelectC::BestTest:
      return "best-test";
    case SelectC::Fixed:
      return "fixed";
    case SelectC::Validation:
      return "validation";
  }
  return "unknown";
}

SelectC select_c_from_name(const std::string& name) {
  if (name == "best-test") return SelectC::BestTest;
  if (name == "fixed") return SelectC::Fixed;
  if (name == "validation") return SelectC::Validation;
  throw std::invalid_argument("unknown C selection policy '" + name + "'");
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi >= lo) || count < 1)
    throw std::invalid_argument("log grid needs 0 < lo <= hi and count >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(count));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

SweepPlan SweepPlan::defaults() {
  SweepPlan p;
  for (int i = 0; i <= 10; ++i) p.lambdas.push_back(i / 10.0);
  p.Cs = log_grid(0.01, 100.0, 8);
  return p;
}

namespace {

bool strictly_increasing(const std::vector<double>& v) {
  return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

}  // namespace

void SweepPlan::validate() const {
  if (lambdas.empty() || Cs.empty()) throw std::invalid_argument("sweep grid is empty");
  for (double l : lambdas)
    if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("lambdas must lie in [0, 1]");
  for (double c : Cs)
    if (!(c > 0.0)) throw std::invalid_argument("C values must be positive");
  if (!strictly_increasing(lambdas))
    throw std::invalid_argument("lambdas must be sorted and distinct");
  std::vector<double> cs = Cs;
  std::sort(cs.begin(), cs.end());
  if (!strictly_increasing(cs)) throw std::invalid_argument("C values must be distinct");
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  if (select_c == SelectC::Fixed && std::find(Cs.begin(), Cs.end(), fixed_c) == Cs.end())
    throw std::invalid_argument("fixed C must be one of the grid values");
  if (select_c == SelectC::Validation && !(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  solver.validate();
}

int threads_from_env() {
  if (const char* s = std::getenv("MKL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && v > 0) return static_cast<int>(v);
  }
  return 0;
}

SweepProblem problem_from(ToyProblem toy) {
  SweepProblem p;
  p.grams = std::move(toy.grams_train);
  p.labels = std::move(toy.train.labels);
  p.cross_test = std::move(toy.cross_test);
  p.test_labels = std::move(toy.test.labels);
  return p;
}

namespace {

// Fit on the leading rows, validate on the trailing ones. All pieces are
// sub-blocks of the full Grams so no kernel function is needed.
struct Split {
  SweepProblem fit_part;
  std::vector<Eigen::MatrixXd> cross_val;
  Eigen::VectorXd val_labels;
};

Split split_for_validation(const SweepProblem& p, double fraction) {
  const Eigen::Index n = p.labels.size();
  const auto n_val = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n))), 1, n - 2);
  const Eigen::Index n_fit = n - n_val;
  Split s;
  std::vector<Eigen::MatrixXd> mats;
  for (std::size_t m = 0; m < p.grams.size(); ++m) {
    mats.push_back(p.grams.mats[m].topLeftCorner(n_fit, n_fit));
    s.cross_val.push_back(p.grams.mats[m].bottomLeftCorner(n_val, n_fit));
    s.fit_part.cross_test.push_back(p.cross_test[m].leftCols(n_fit));
  }
  s.fit_part.grams = make_gram_set(std::move(mats), p.grams.kernels, {.normalize = false});
  s.fit_part.grams.normalized = p.grams.normalized;
  s.fit_part.labels = p.labels.head(n_fit);
  s.fit_part.test_labels = p.test_labels;
  s.val_labels = p.labels.tail(n_val);
  return s;
}

int resolve_threads(const SweepPlan& plan) {
  if (plan.threads > 0) return plan.threads;
  if (const int env = threads_from_env(); env > 0) return env;
  return omp_get_max_threads();
}

double sample_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::vector<SweepRow> sweep_problem(const SweepPlan& plan, const SweepProblem& problem,
                                    int replicate) {
  plan.validate();
  if (problem.cross_test.size() != problem.grams.size())
    throw DataError("sweep: cross Gram count does not match the bank");

  const bool validation = plan.select_c == SelectC::Validation;
  Split split;
  if (validation) split = split_for_validation(problem, plan.validation_fraction);
  const SweepProblem& work = validation ? split.fit_part : problem;

  std::vector<double> cs = plan.Cs;
  std::sort(cs.begin(), cs.end());
  const auto n_lambda = static_cast<std::ptrdiff_t>(plan.lambdas.size());
  const std::size_t n_c = cs.size();
  std::vector<SweepRow> rows(plan.lambdas.size() * n_c);

  std::string error;
#pragma omp parallel for schedule(dynamic) num_threads(resolve_threads(plan))
  for (std::ptrdiff_t li = 0; li < n_lambda; ++li) {
    const double lambda = plan.lambdas[static_cast<std::size_t>(li)];
    Solution previous;
    bool have_previous = false;
    for (std::size_t k = n_c; k-- > 0;) {
      SweepRow& row = rows[static_cast<std::size_t>(li) * n_c + k];
      row.lambda = lambda;
      row.C = cs[k];
      row.replicate = replicate;
      row.validation_accuracy = std::numeric_limits<double>::quiet_NaN();
      const auto start = std::chrono::steady_clock::now();
      try {
        const ElasticNetParams params{cs[k], lambda};
        Solution sol = fit(work.grams, work.labels, params, plan.solver,
                           plan.warm_start && have_previous ? &previous : nullptr);
        row.test_accuracy = accuracy(decision_function(sol, work.cross_test), work.test_labels);
        if (validation)
          row.validation_accuracy =
              accuracy(decision_function(sol, split.cross_val), split.val_labels);
        row.active_kernels = spectrum_of(sol, lambda).active_count;
        row.objective = sol.objective;
        row.iterations = sol.iterations;
        row.converged = sol.converged;
        previous = std::move(sol);
        have_previous = true;
      } catch (const SolverError&) {
        row.test_accuracy = std::numeric_limits<double>::quiet_NaN();
        row.objective = std::numeric_limits<double>::quiet_NaN();
        row.converged = false;
        have_previous = false;
      } catch (const std::exception& e) {
#pragma omp critical(enmkl_sweep_error)
        if (error.empty()) error = e.what();
        break;
      }
      row.wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  }
  if (!error.empty()) throw DataError("sweep failed: " + error);
  return rows;
}

namespace {

SweepResult assemble(const SweepPlan& plan, std::vector<std::vector<SweepRow>> per_rep,
                     std::size_t kernels) {
  SweepResult result;
  result.select_c = plan.select_c;
  result.fixed_c = plan.fixed_c;
  result.kernels = kernels;
  const std::size_t cells = per_rep.front().size();
  result.rows.reserve(cells * per_rep.size());
  for (std::size_t cell = 0; cell < cells; ++cell)
    for (auto& rep : per_rep) result.rows.push_back(rep[cell]);
  summarize(result);
  return result;
}

}  // namespace

SweepResult run_sweep(const SweepPlan& plan, const ToySpec& base) {
  plan.validate();
  std::vector<std::vector<SweepRow>> per_rep;
  for (int r = 0; r < plan.replicates; ++r) {
    ToySpec spec = base;
    spec.seed = plan.seed + static_cast<std::uint64_t>(r);
    per_rep.push_back(sweep_problem(plan, problem_from(generate(spec)), r));
  }
  return assemble(plan, std::move(per_rep), static_cast<std::size_t>(kernel_count(base.goal)));
}

SweepResult run_sweep(const SweepPlan& plan, const SweepProblem& problem) {
  plan.validate();
  std::vector<std::vector<SweepRow>> per_rep;
  for (int r = 0; r < plan.replicates; ++r) per_rep.push_back(sweep_problem(plan, problem, r));
  return assemble(plan, std::move(per_rep), problem.grams.size());
}

void summarize(SweepResult& result) {
  if (result.rows.empty()) throw DataError("cannot summarize an empty sweep");
  // lambda -> C -> rows
  std::map<double, std::map<double, std::vector<const SweepRow*>>> cells;
  for (const auto& row : result.rows) cells[row.lambda][row.C].push_back(&row);

  result.summary.clear();
  for (const auto& [lambda, by_c] : cells) {
    double chosen = std::numeric_limits<double>::quiet_NaN();
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& [c, rows] : by_c) {
      double score;
      if (result.select_c == SelectC::Fixed) {
        score = c == result.fixed_c ? 1.0 : -1.0;
      } else {
        std::vector<double> v;
        for (const SweepRow* r : rows) {
          const double x =
              result.select_c == SelectC::Validation ? r->validation_accuracy : r->test_accuracy;
          if (std::isfinite(x)) v.push_back(x);
        }
        if (v.empty()) continue;
        score = mean_of(v);
      }
      // Ascending C order: ">=" lets ties go to the larger (more regularized) C.
      if (score >= best_score) {
        best_score = score;
        chosen = c;
      }
    }
    LambdaSummary s;
    s.lambda = lambda;
    s.selected_c = chosen;
    std::vector<double> acc, active;
    if (by_c.count(chosen)) {
      for (const SweepRow* r : by_c.at(chosen)) {
        if (!std::isfinite(r->test_accuracy)) continue;
        acc.push_back(r->test_accuracy);
        active.push_back(static_cast<double>(r->active_kernels));
      }
    }
    s.count = static_cast<int>(acc.size());
    s.mean_accuracy = mean_of(acc);
    s.std_accuracy = sample_std(acc, s.mean_accuracy);
    s.mean_active = mean_of(active);
    s.std_active = sample_std(active, s.mean_active);
    result.summary.push_back(s);
  }

  double best = -1.0;
  result.best_lambda = result.summary.front().lambda;
  for (const auto& s : result.summary) {
    if (std::isfinite(s.mean_accuracy) && s.mean_accuracy > best) {
      best = s.mean_accuracy;
      result.best_lambda = s.lambda;
    }
  }
}

}  // namespace enmkl
