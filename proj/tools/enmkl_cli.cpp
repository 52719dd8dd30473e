// enmkl: elastic-net multiple kernel learning from the command line.
//
//   enmkl gen-data --goal feature --spectrum sparse --n-train 200 --n-test 1000 --seed 1 --out d
//   enmkl fit --data d --grams d/grams_train.mklg --lambda 0.5 --C 1 --out fit.json
//   enmkl sweep --data d --lambdas 0,0.5,1 --c-grid 0.01,100,8 --replicates 3 --seed 1 --out s
//   enmkl report --in s --out s
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 solver error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "enmkl/dataset.hpp"
#include "enmkl/harness.hpp"
#include "enmkl/kernel.hpp"
#include "enmkl/simdata.hpp"
#include "enmkl/solver.hpp"
#include "enmkl/spectrum.hpp"

namespace fs = std::filesystem;
using namespace enmkl;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kSolver = 3 };

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw std::invalid_argument("not a number: '" + tok + "'");
    }
  }
  return out;
}

int gen_data(const ToySpec& spec, const std::string& out) {
  const ToyProblem p = generate(spec);
  write_dataset(out, p);
  std::cout << "wrote " << goal_name(spec.goal) << '/' << spectrum_name(spec.spectrum) << " with "
            << p.kernels.size() << " kernels, " << spec.n_train << " train / " << spec.n_test
            << " test samples to " << out << '\n';
  return kOk;
}

bool evaluable(const std::vector<KernelFunc>& kernels) {
  for (const auto& k : kernels)
    if (k.kind == KernelKind::Precomputed) return false;
  return !kernels.empty();
}

int run_fit(const std::string& data_dir, const std::string& grams_path,
            const ElasticNetParams& params, const SolverConfig& cfg, const std::string& out,
            const std::string& spectrum_csv) {
  params.validate();
  cfg.validate();
  const Dataset ds = read_dataset(data_dir);
  const GramSet grams = load_grams(grams_path);
  if (grams.samples() != ds.train.size())
    throw DataError("gram bank has " + std::to_string(grams.samples()) + " samples, train.csv has " +
                    std::to_string(ds.train.size()));

  const Solution sol = fit(grams, ds.train, params, cfg);
  const KernelWeightSpectrum spec = spectrum_of(sol, params.lambda);

  nlohmann::json j;
  j["lambda"] = params.lambda;
  j["C"] = params.C;
  j["bias"] = sol.bias;
  j["objective"] = sol.objective;
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["kkt_residual"] = sol.kkt_residual;
  j["block_norms"] = sol.block_norms;
  j["beta"] = spec.beta;
  j["active_kernels"] = spec.active_count;
  j["kernels"] = nlohmann::json::array();
  for (const auto& k : grams.kernels) j["kernels"].push_back(k.describe());
  j["alphas"] = nlohmann::json::array();
  for (const auto& a : sol.alphas) j["alphas"].push_back(std::vector<double>(a.data(), a.data() + a.size()));

  std::vector<Eigen::MatrixXd> self(grams.mats.begin(), grams.mats.end());
  j["train_accuracy"] = accuracy(decision_function(sol, self), ds.train.labels);
  if (ds.test && evaluable(grams.kernels) && ds.test->features.cols() == ds.train.features.cols()) {
    const auto cross = build_cross_grams(ds.test->features, ds.train.features, grams.kernels);
    j["test_accuracy"] = accuracy(decision_function(sol, cross), ds.test->labels);
  }

  std::ofstream os(out);
  if (!os) throw DataError("cannot write '" + out + "'");
  os << j.dump(2) << '\n';
  if (!spectrum_csv.empty()) write_spectrum_csv(spectrum_csv, grams, sol, spec);

  std::cout << "objective " << sol.objective << ", " << spec.active_count << '/' << grams.size()
            << " active kernels, " << sol.iterations << " iterations"
            << (sol.converged ? "" : " (NOT converged)") << '\n';
  return sol.converged ? kOk : kSolver;
}

int run_sweep_cmd(const std::string& data_dir, SweepPlan plan, std::optional<std::uint64_t> seed,
                  const std::string& out) {
  const Dataset ds = read_dataset(data_dir);
  SweepResult result;
  if (ds.spec) {
    plan.seed = seed.value_or(ds.spec->seed);
    result = run_sweep(plan, *ds.spec);
  } else {
    if (!ds.test) throw DataError("sweep needs test.csv in '" + data_dir + "'");
    if (!evaluable(ds.kernels))
      throw DataError("sweep needs an evaluable kernel bank in meta.json");
    plan.seed = seed.value_or(0);
    SweepProblem p;
    p.grams = build_gram_set(ds.train.features, ds.kernels);
    p.labels = ds.train.labels;
    p.cross_test = build_cross_grams(ds.test->features, ds.train.features, ds.kernels);
    p.test_labels = ds.test->labels;
    result = run_sweep(plan, p);
  }
  report(result, out);
  std::size_t unconverged = 0;
  for (const auto& r : result.rows) unconverged += r.converged ? 0 : 1;
  std::cout << result.rows.size() << " fits, best lambda " << result.best_lambda;
  if (unconverged) std::cout << " (" << unconverged << " not converged)";
  std::cout << ", results in " << out << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elastic-net multiple kernel learning"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a simulated MKL problem");
  std::string goal = "feature", spectrum = "sparse", gen_out;
  ToySpec spec;
  double tau = 0.0;
  gen->add_option("--goal", goal, "feature | feature-param | param")
      ->check(CLI::IsMember({"feature", "feature-param", "param"}));
  gen->add_option("--spectrum", spectrum, "sparse | medium | dense")
      ->check(CLI::IsMember({"sparse", "medium", "dense"}));
  gen->add_option("--n-train", spec.n_train)->required();
  gen->add_option("--n-test", spec.n_test)->required();
  gen->add_option("--seed", spec.seed)->required();
  gen->add_option("--label-noise", spec.label_noise, "label flip probability");
  gen->add_option("--tau", tau, "decay constant of the medium spectrum (default M/5)");
  gen->add_option("--out", gen_out)->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit one (lambda, C) on a dataset");
  std::string fit_data, fit_grams, fit_out, fit_spectrum;
  ElasticNetParams params;
  SolverConfig cfg;
  fit_cmd->add_option("--data", fit_data)->required();
  fit_cmd->add_option("--grams", fit_grams, "binary gram file or CSV export directory")
      ->required();
  fit_cmd->add_option("--lambda", params.lambda)->required();
  fit_cmd->add_option("--C", params.C)->required();
  fit_cmd->add_option("--tol", cfg.tol);
  fit_cmd->add_option("--max-iter", cfg.max_iter);
  fit_cmd->add_option("--out", fit_out)->required();
  fit_cmd->add_option("--spectrum-csv", fit_spectrum, "also write the kernel-weight spectrum");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Grid over lambda and C with test evaluation");
  std::string sweep_data, sweep_out, lambdas = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1",
                                     c_grid = "0.01,100,8", select = "best-test";
  SweepPlan plan = SweepPlan::defaults();
  std::uint64_t sweep_seed = 0;
  bool cold = false;
  sweep->add_option("--data", sweep_data)->required();
  sweep->add_option("--lambdas", lambdas, "comma-separated list in [0, 1]");
  sweep->add_option("--c-grid", c_grid, "lo,hi,count (log-spaced)");
  sweep->add_option("--replicates", plan.replicates);
  auto* seed_opt = sweep->add_option("--seed", sweep_seed, "replicate r uses seed + r");
  sweep->add_option("--select", select, "best-test | fixed | validation")
      ->check(CLI::IsMember({"best-test", "fixed", "validation"}));
  sweep->add_option("--fixed-c", plan.fixed_c);
  sweep->add_option("--tol", plan.solver.tol);
  sweep->add_option("--max-iter", plan.solver.max_iter);
  sweep->add_flag("--cold-start", cold, "disable warm starts along the C path");
  sweep->add_option("--out", sweep_out)->required();

  // report
  auto* rep = app.add_subcommand("report", "Rebuild summary and plots from a sweep directory");
  std::string rep_in, rep_out;
  rep->add_option("--in", rep_in)->required();
  rep->add_option("--out", rep_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (gen->parsed()) {
      spec.goal = goal_from_name(goal);
      spec.spectrum = spectrum_from_name(spectrum);
      if (tau > 0.0) spec.decay_tau = tau;
      return gen_data(spec, gen_out);
    }
    if (fit_cmd->parsed()) return run_fit(fit_data, fit_grams, params, cfg, fit_out, fit_spectrum);
    if (sweep->parsed()) {
      plan.lambdas = parse_list(lambdas);
      const auto g = parse_list(c_grid);
      if (g.size() != 3) throw std::invalid_argument("--c-grid expects lo,hi,count");
      plan.Cs = log_grid(g[0], g[1], static_cast<int>(g[2]));
      plan.select_c = select_c_from_name(select);
      plan.warm_start = !cold;
      plan.validate();
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = sweep_seed;
      return run_sweep_cmd(sweep_data, plan, seed, sweep_out);
    }
    if (rep->parsed()) {
      const SweepResult r = read_sweep(rep_in);
      report(r, rep_out);
      std::cout << "best lambda " << r.best_lambda << ", report in " << rep_out << '\n';
      return kOk;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
