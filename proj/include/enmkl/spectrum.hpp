#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "enmkl/kernel.hpp"
#include "enmkl/solver.hpp"

namespace enmkl {

/// Kernel weights beta_m of the combined kernel K(beta) = sum_m beta_m K_m
/// that reproduces a fitted elastic-net solution.
struct KernelWeightSpectrum {
  std::vector<double> beta;
  std::size_t active_count = 0;
  double lambda = 0.0;
};

/// g(x) = (1 - lambda) sqrt(x) + lambda/2 x for x >= 0. Throws for x < 0.
double g_value(double x, double lambda);

/// Concave conjugate of g evaluated at y = 1/(2 beta):
/// -1/2 (1 - lambda)^2 beta / (1 - lambda beta). Requires beta > 0, lambda beta < 1.
double g_conjugate(double beta, double lambda);

/// Minimizer over beta of t^2/(2 beta) - g*(1/(2 beta)): t / ((1 - lambda) + lambda t).
double beta_from_norm(double t, double lambda);

/// beta_m from the solution's block norms. `threshold` > 0 treats smaller
/// weights as inactive; the solver's own output needs no threshold.
KernelWeightSpectrum spectrum_of(const Solution& sol, double lambda, double threshold = 0.0);

Eigen::MatrixXd combined_kernel(const GramSet& grams, const KernelWeightSpectrum& spectrum);

/// CSV with columns kernel_index,kernel_metadata,block_norm,beta.
void write_spectrum_csv(const std::string& path, const GramSet& grams, const Solution& sol,
                        const KernelWeightSpectrum& spectrum);

}  // namespace enmkl
