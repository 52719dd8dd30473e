#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "enmkl/kernel.hpp"
#include "enmkl/loss.hpp"

namespace enmkl {

/// Numerical failure inside the solver (non-finite iterates).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Overall regularization strength C > 0 and the l1/l2 mix lambda in [0, 1].
/// lambda = 0 is sparse MKL, lambda = 1 uniformly-weighted MKL.
struct ElasticNetParams {
  double C = 1.0;
  double lambda = 0.5;

  void validate() const;
};

struct SolverConfig {
  double tol = 1e-6;  // KKT residual, relative to max(1, |grad at u=0, b=0|)
  int max_iter = 20000;
  bool restart = true;
  bool adaptive_step = true;  // backtracking below the global 1/L step

  void validate() const;
};

/**
 * Fitted model for the finite-dimensional elastic-net MKL problem
 *
 *   L(sum_m K_m alpha_m + b 1) + C sum_m [(1 - lambda) |alpha_m|_K + lambda/2 |alpha_m|_K^2]
 *
 * with |alpha|_K = sqrt(alpha^T K alpha). Blocks removed by the group
 * threshold are stored as exact zeros.
 */
struct Solution {
  std::vector<Eigen::VectorXd> alphas;
  double bias = 0.0;
  std::vector<double> block_norms;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  ElasticNetParams params;

  std::size_t kernels() const { return alphas.size(); }
  std::size_t active_blocks() const;
};

/// argmin_u 1/2 |u - v|^2 + eta C [(1 - lambda)|u| + lambda/2 |u|^2]
Eigen::VectorXd prox_block(const Eigen::VectorXd& v, double eta, const ElasticNetParams& params);

/// Objective value of (alphas, bias), evaluated with the Gram matrices.
double evaluate_objective(const GramSet& grams, const Eigen::VectorXd& labels,
                          const ElasticNetParams& params,
                          const std::vector<Eigen::VectorXd>& alphas, double bias);

/// |alpha|_K for one block.
double block_norm(const Eigen::MatrixXd& gram, const Eigen::VectorXd& alpha);

/**
 * Accelerated proximal gradient (FISTA with function-value restart) on the
 * factorized coordinates u_m, where K_m = G_m G_m^T and |alpha_m|_K = |u_m|.
 * The bias is an unpenalized extra coordinate. `warm_start` (same bank,
 * same training set) seeds the iterate; it does not change the minimizer.
 *
 * Returns with converged = false when max_iter is reached.
 */
Solution fit(const GramSet& grams, const Eigen::VectorXd& labels, const ElasticNetParams& params,
             const SolverConfig& cfg = {}, const Solution* warm_start = nullptr);

inline Solution fit(const GramSet& grams, const LabeledSet& data, const ElasticNetParams& params,
                    const SolverConfig& cfg = {}, const Solution* warm_start = nullptr) {
  return fit(grams, data.labels, params, cfg, warm_start);
}

/// Smallest C for which the bias-only model is optimal at this lambda (< 1).
double compute_c_max(const GramSet& grams, const Eigen::VectorXd& labels, double lambda);

/// lambda_max(sum_m G_m G_m^T + 1 1^T) by power iteration.
double top_eigenvalue(const GramSet& grams, double rel_tol = 1e-6);

/// sum_m K_test_m alpha_m + b for N_test x N cross Grams.
Eigen::VectorXd decision_function(const Solution& sol, const std::vector<Eigen::MatrixXd>& cross);

/// sign(score), ties go to +1.
Eigen::VectorXd predict_labels(const Eigen::VectorXd& scores);

/// Fraction of sign-correct predictions.
double accuracy(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels);

}  // namespace enmkl
