#include "enmkl/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace enmkl {

const char* goal_name(ToyGoal goal) {
  switch (goal) {
    case ToyGoal::FeatureSelection:
      return "feature";
    case ToyGoal::FeatureAndParameter:
      return "feature-param";
    case ToyGoal::ParameterSelection:
      return "param";
  }
  return "unknown";
}

ToyGoal goal_from_name(const std::string& name) {
  if (name == "feature") return ToyGoal::FeatureSelection;
  if (name == "feature-param") return ToyGoal::FeatureAndParameter;
  if (name == "param") return ToyGoal::ParameterSelection;
  throw std::invalid_argument("unknown goal '" + name + "'");
}

const char* spectrum_name(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::Sparse:
      return "sparse";
    case SpectrumKind::Medium:
      return "medium";
    case SpectrumKind::Dense:
      return "dense";
  }
  return "unknown";
}

SpectrumKind spectrum_from_name(const std::string& name) {
  if (name == "sparse") return SpectrumKind::Sparse;
  if (name == "medium") return SpectrumKind::Medium;
  if (name == "dense") return SpectrumKind::Dense;
  throw std::invalid_argument("unknown spectrum '" + name + "'");
}

void ToySpec::validate() const {
  if (n_train < 2 || n_test < 2) throw std::invalid_argument("n_train and n_test must be >= 2");
  if (!(label_noise >= 0.0 && label_noise < 0.5))
    throw std::invalid_argument("label_noise must lie in [0, 0.5)");
  if (decay_tau && !(*decay_tau > 0.0)) throw std::invalid_argument("decay tau must be positive");
  if (!(feature_bandwidth > 0.0)) throw std::invalid_argument("feature bandwidth must be positive");
}

int input_dims(ToyGoal goal) { return goal == ToyGoal::FeatureSelection ? 100 : 10; }

int kernel_count(ToyGoal goal) {
  switch (goal) {
    case ToyGoal::FeatureSelection:
      return 100;
    case ToyGoal::FeatureAndParameter:
      return 120;
    case ToyGoal::ParameterSelection:
      return 12;
  }
  return 0;
}

std::vector<double> bandwidth_grid() {
  std::vector<double> out(12);
  for (int i = 0; i < 12; ++i) out[i] = std::pow(10.0, -1.0 + 2.0 * i / 11.0);
  return out;
}

std::vector<KernelFunc> kernel_bank(const ToySpec& spec) {
  std::vector<KernelFunc> bank;
  switch (spec.goal) {
    case ToyGoal::FeatureSelection:
      for (int v = 0; v < 100; ++v)
        bank.push_back({KernelKind::Gaussian, spec.feature_bandwidth, {v}, {}});
      break;
    case ToyGoal::FeatureAndParameter:
      for (int v = 0; v < 10; ++v)
        for (double bw : bandwidth_grid()) bank.push_back({KernelKind::Gaussian, bw, {v}, {}});
      break;
    case ToyGoal::ParameterSelection:
      for (double bw : bandwidth_grid()) bank.push_back({KernelKind::Gaussian, bw, {}, {}});
      break;
  }
  return bank;
}

Eigen::VectorXd true_spectrum(const ToySpec& spec) {
  const int m_count = kernel_count(spec.goal);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m_count);
  switch (spec.spectrum) {
    case SpectrumKind::Sparse: {
      // Own stream so the support does not depend on how many samples are drawn.
      std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
      std::uniform_int_distribution<int> pick(0, m_count - 1);
      const int a = pick(rng);
      int b = pick(rng);
      while (b == a) b = pick(rng);
      beta(a) = 0.5;
      beta(b) = 0.5;
      break;
    }
    case SpectrumKind::Medium: {
      const double tau = spec.decay_tau.value_or(m_count / 5.0);
      for (int m = 0; m < m_count; ++m) beta(m) = std::exp(-(m + 1) / tau);
      beta /= beta.sum();
      break;
    }
    case SpectrumKind::Dense:
      beta.setConstant(1.0 / m_count);
      break;
  }
  return beta;
}

Eigen::VectorXd LatentFunction::operator()(const Points& x) const {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(x.rows());
  for (std::size_t m = 0; m < kernels.size(); ++m) {
    if (beta(static_cast<Eigen::Index>(m)) == 0.0) continue;
    f += beta(static_cast<Eigen::Index>(m)) * (build_cross_gram(x, anchors, kernels[m]) * weights);
  }
  return f;
}

namespace {

double median(Eigen::VectorXd v) {
  std::sort(v.data(), v.data() + v.size());
  const Eigen::Index n = v.size();
  return n % 2 ? v(n / 2) : 0.5 * (v(n / 2 - 1) + v(n / 2));
}

}  // namespace

ToyProblem generate(const ToySpec& spec, const GramOptions& opts) {
  spec.validate();
  ToyProblem p;
  p.spec = spec;
  p.kernels = kernel_bank(spec);
  p.truth = true_spectrum(spec);

  const int d = input_dims(spec.goal);
  const int n_all = spec.n_train + spec.n_test;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Points all(n_all, d);
  for (Eigen::Index i = 0; i < all.size(); ++i) all.data()[i] = normal(rng);
  Eigen::VectorXd w(n_all);
  const double w_scale = 1.0 / std::sqrt(static_cast<double>(n_all));
  for (Eigen::Index i = 0; i < n_all; ++i) w(i) = w_scale * normal(rng);

  p.latent.kernels = p.kernels;
  p.latent.beta = p.truth;
  p.latent.anchors = all;
  p.latent.weights = w;
  const Eigen::VectorXd f = p.latent(all);
  p.latent.threshold = median(f.head(spec.n_train));

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd labels(n_all);
  for (Eigen::Index i = 0; i < n_all; ++i) {
    labels(i) = f(i) >= p.latent.threshold ? 1.0 : -1.0;
    if (unif(rng) < spec.label_noise) labels(i) = -labels(i);
  }

  p.train.features = all.topRows(spec.n_train);
  p.train.labels = labels.head(spec.n_train);
  p.test.features = all.bottomRows(spec.n_test);
  p.test.labels = labels.tail(spec.n_test);

  p.grams_train = build_gram_set(p.train.features, p.kernels, opts);
  p.cross_test = build_cross_grams(p.test.features, p.train.features, p.kernels);
  return p;
}

}  // namespace enmkl
