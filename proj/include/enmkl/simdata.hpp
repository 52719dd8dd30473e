#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "enmkl/kernel.hpp"
#include "enmkl/loss.hpp"

namespace enmkl {

// Feature selection: one Gaussian per input variable (100 variables).
// Feature & parameter: 12 bandwidths on each of 10 variables.
// Parameter selection: 12 bandwidths jointly over the same 10 variables.
enum class ToyGoal { FeatureSelection, FeatureAndParameter, ParameterSelection };
enum class SpectrumKind { Sparse, Medium, Dense };

const char* goal_name(ToyGoal goal);  // feature | feature-param | param
ToyGoal goal_from_name(const std::string& name);
const char* spectrum_name(SpectrumKind kind);  // sparse | medium | dense
SpectrumKind spectrum_from_name(const std::string& name);

struct ToySpec {
  ToyGoal goal = ToyGoal::FeatureSelection;
  SpectrumKind spectrum = SpectrumKind::Sparse;
  int n_train = 200;
  int n_test = 1000;
  std::uint64_t seed = 0;
  double label_noise = 0.0;
  std::optional<double> decay_tau;  // Medium spectrum; defaults to M / 5
  double feature_bandwidth = 1.0;   // FeatureSelection kernels

  void validate() const;
};

int input_dims(ToyGoal goal);
int kernel_count(ToyGoal goal);

/// The 12 bandwidths shared by the multi-bandwidth settings, log-spaced in [0.1, 10].
std::vector<double> bandwidth_grid();

std::vector<KernelFunc> kernel_bank(const ToySpec& spec);

/// True kernel weights, summing to one. Sparse puts 0.5 on two seed-chosen kernels.
Eigen::VectorXd true_spectrum(const ToySpec& spec);

/// f(x) = sum_m beta_m sum_j k_m(x, anchor_j) w_j; labels are sign(f - threshold).
struct LatentFunction {
  std::vector<KernelFunc> kernels;
  Eigen::VectorXd beta;
  Points anchors;
  Eigen::VectorXd weights;
  double threshold = 0.0;

  Eigen::VectorXd operator()(const Points& x) const;
};

struct ToyProblem {
  ToySpec spec;
  LabeledSet train;
  LabeledSet test;
  Eigen::VectorXd truth;
  std::vector<KernelFunc> kernels;
  GramSet grams_train;
  std::vector<Eigen::MatrixXd> cross_test;  // n_test x n_train per kernel
  LatentFunction latent;
};

/// Draws inputs i.i.d. standard normal, builds the latent score from the true
/// spectrum and thresholds it at the training median. Deterministic in spec.seed.
ToyProblem generate(const ToySpec& spec, const GramOptions& opts = {});

}  // namespace enmkl
