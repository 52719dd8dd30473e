#include "enmkl/spectrum.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace enmkl {

namespace {
void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}
}  // namespace

double g_value(double x, double lambda) {
  check_lambda(lambda);
  if (x < 0.0) throw std::domain_error("g is only finite for x >= 0");
  return (1.0 - lambda) * std::sqrt(x) + 0.5 * lambda * x;
}

double g_conjugate(double beta, double lambda) {
  check_lambda(lambda);
  if (!(beta > 0.0)) throw std::domain_error("g_conjugate needs beta > 0");
  if (lambda * beta >= 1.0) throw std::domain_error("g_conjugate needs lambda * beta < 1");
  const double a = 1.0 - lambda;
  return -0.5 * a * a * beta / (1.0 - lambda * beta);
}

double beta_from_norm(double t, double lambda) {
  check_lambda(lambda);
  if (t < 0.0) throw std::domain_error("block norm must be nonnegative");
  if (t == 0.0) return 0.0;
  return t / ((1.0 - lambda) + lambda * t);
}

KernelWeightSpectrum spectrum_of(const Solution& sol, double lambda, double threshold) {
  KernelWeightSpectrum s;
  s.lambda = lambda;
  s.beta.reserve(sol.block_norms.size());
  for (double t : sol.block_norms) {
    double b = beta_from_norm(t, lambda);
    if (threshold > 0.0 && b <= threshold) b = 0.0;
    s.beta.push_back(b);
    if (b > 0.0) ++s.active_count;
  }
  return s;
}

Eigen::MatrixXd combined_kernel(const GramSet& grams, const KernelWeightSpectrum& spectrum) {
  if (spectrum.beta.size() != grams.size())
    throw DataError("combined_kernel: spectrum length does not match the bank");
  const Eigen::Index n = grams.samples();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t m = 0; m < grams.size(); ++m)
    if (spectrum.beta[m] != 0.0) out += spectrum.beta[m] * grams.mats[m];
  return out;
}

void write_spectrum_csv(const std::string& path, const GramSet& grams, const Solution& sol,
                        const KernelWeightSpectrum& spectrum) {
  if (spectrum.beta.size() != grams.size() || sol.block_norms.size() != grams.size())
    throw DataError("spectrum export: length mismatch");
  std::ofstream os(path);
  if (!os) throw DataError("cannot write '" + path + "'");
  os << "kernel_index,kernel_metadata,block_norm,beta\n" << std::setprecision(17);
  for (std::size_t m = 0; m < grams.size(); ++m) {
    std::string meta;
    for (char c : grams.kernels[m].describe()) meta += c == '"' ? std::string("\"\"") : std::string(1, c);
    os << m << ",\"" << meta << "\"," << sol.block_norms[m] << ',' << spectrum.beta[m] << '\n';
  }
}

}  // namespace enmkl
