#include "enmkl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace enmkl {

void ElasticNetParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::invalid_argument("C must be positive");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
}

std::size_t Solution::active_blocks() const {
  return static_cast<std::size_t>(
      std::count_if(block_norms.begin(), block_norms.end(), [](double t) { return t > 0.0; }));
}

Eigen::VectorXd prox_block(const Eigen::VectorXd& v, double eta, const ElasticNetParams& params) {
  const double norm = v.norm();
  const double shrink = eta * params.C * (1.0 - params.lambda);
  if (norm <= shrink || norm == 0.0) return Eigen::VectorXd::Zero(v.size());
  const double scale = (norm - shrink) / (norm * (1.0 + eta * params.C * params.lambda));
  return scale * v;
}

double block_norm(const Eigen::MatrixXd& gram, const Eigen::VectorXd& alpha) {
  if (alpha.isZero(0.0)) return 0.0;
  return std::sqrt(std::max(alpha.dot(gram * alpha), 0.0));
}

double evaluate_objective(const GramSet& grams, const Eigen::VectorXd& labels,
                          const ElasticNetParams& params,
                          const std::vector<Eigen::VectorXd>& alphas, double bias) {
  if (alphas.size() != grams.size()) throw DataError("objective: block count mismatch");
  Eigen::VectorXd z = Eigen::VectorXd::Constant(labels.size(), bias);
  double reg = 0.0;
  for (std::size_t m = 0; m < alphas.size(); ++m) {
    if (alphas[m].size() != labels.size()) throw DataError("objective: block length mismatch");
    z.noalias() += grams.mats[m] * alphas[m];
    const double t = block_norm(grams.mats[m], alphas[m]);
    reg += (1.0 - params.lambda) * t + 0.5 * params.lambda * t * t;
  }
  return logistic_loss(z, labels) + params.C * reg;
}

namespace {

void check_inputs(const GramSet& grams, const Eigen::VectorXd& labels) {
  if (grams.size() == 0) throw DataError("empty kernel bank");
  if (grams.samples() != labels.size())
    throw DataError("gram size does not match the number of labels");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels(i) != 1.0 && labels(i) != -1.0) throw DataError("labels must be -1 or +1");
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) throw DataError("training labels contain a single class");
}

// All factors side by side: z = G u + b, with block m at columns [offset, offset + width).
struct Design {
  Eigen::MatrixXd g;
  std::vector<Eigen::Index> offset;
  std::vector<Eigen::Index> width;

  explicit Design(const GramSet& grams) {
    const Eigen::Index total = grams.total_rank();
    g.resize(grams.samples(), total);
    Eigen::Index at = 0;
    for (const auto& f : grams.factors) {
      offset.push_back(at);
      width.push_back(f.rank());
      if (f.rank() > 0) g.middleCols(at, f.rank()) = f.g();
      at += f.rank();
    }
  }
  std::size_t blocks() const { return offset.size(); }
};

// Regularizer in u-space.
double penalty(const Design& d, const Eigen::VectorXd& u, const ElasticNetParams& p) {
  double reg = 0.0;
  for (std::size_t m = 0; m < d.blocks(); ++m) {
    const double t = u.segment(d.offset[m], d.width[m]).norm();
    reg += (1.0 - p.lambda) * t + 0.5 * p.lambda * t * t;
  }
  return p.C * reg;
}

// Distance from the negative smooth gradient to the regularizer's
// subdifferential, maximized over blocks, plus the bias stationarity error.
double kkt_residual(const Design& d, const Eigen::VectorXd& u, const Eigen::VectorXd& grad_u,
                    double grad_b, const ElasticNetParams& p) {
  double worst = 0.0;
  for (std::size_t m = 0; m < d.blocks(); ++m) {
    const auto um = u.segment(d.offset[m], d.width[m]);
    const Eigen::VectorXd s = -grad_u.segment(d.offset[m], d.width[m]);
    const double norm = um.norm();
    double r;
    if (norm == 0.0) {
      r = std::max(0.0, s.norm() - p.C * (1.0 - p.lambda));
    } else {
      r = (s - p.C * ((1.0 - p.lambda) / norm + p.lambda) * um).norm();
    }
    worst = std::max(worst, r);
  }
  return worst + std::abs(grad_b);
}

}  // namespace

double top_eigenvalue(const GramSet& grams, double rel_tol) {
  const Design d(grams);
  const Eigen::Index n = grams.samples();
  std::mt19937_64 rng(0x5eedULL);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = unif(rng);
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < 10000; ++it) {
    Eigen::VectorXd w = d.g * (d.g.transpose() * v);
    w.array() += v.sum();
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - est) <= rel_tol * std::abs(next)) return next;
    est = next;
  }
  return est;
}

Solution fit(const GramSet& grams, const Eigen::VectorXd& labels, const ElasticNetParams& params,
             const SolverConfig& cfg, const Solution* warm_start) {
  params.validate();
  cfg.validate();
  check_inputs(grams, labels);

  const Design d(grams);
  const Eigen::Index n = labels.size();
  const Eigen::VectorXd& y = labels;

  // Logistic curvature is at most 1/4. The small inflation turns the power
  // iteration estimate (a lower bound) into a safe step.
  const double lipschitz = 0.25 * top_eigenvalue(grams) * 1.01;
  double local_l = lipschitz;

  // Convergence scale: gradient norm at u = 0, b = 0.
  const Eigen::VectorXd g0 = logistic_grad(Eigen::VectorXd::Zero(n), y);
  const double grad0 =
      std::sqrt((d.g.transpose() * g0).squaredNorm() + g0.sum() * g0.sum());
  const double tol_abs = cfg.tol * std::max(1.0, grad0);

  Eigen::VectorXd x_u = Eigen::VectorXd::Zero(d.g.cols());
  double x_b = 0.0;
  if (warm_start != nullptr) {
    if (warm_start->alphas.size() != grams.size())
      throw DataError("warm start has a different number of kernels");
    for (std::size_t m = 0; m < grams.size(); ++m) {
      const GramFactor& f = grams.factors[m];
      if (warm_start->alphas[m].size() != n) throw DataError("warm start has a different size");
      if (f.rank() > 0)
        x_u.segment(d.offset[m], d.width[m]) =
            f.sqrt_values.cwiseProduct(f.vectors.transpose() * warm_start->alphas[m]);
    }
    x_b = warm_start->bias;
  }

  // Forward products touch only nonzero blocks.
  auto forward = [&](const Eigen::VectorXd& u, double b, Eigen::VectorXd& z) {
    z.setConstant(n, b);
    for (std::size_t m = 0; m < d.blocks(); ++m) {
      const auto um = u.segment(d.offset[m], d.width[m]);
      if (!um.isZero(0.0)) z.noalias() += d.g.middleCols(d.offset[m], d.width[m]) * um;
    }
  };

  Eigen::VectorXd z_x(n);
  forward(x_u, x_b, z_x);
  double loss_x = logistic_loss(z_x, y);
  double f_x = loss_x + penalty(d, x_u, params);
  Eigen::VectorXd gl_x = logistic_grad(z_x, y);
  Eigen::VectorXd gu_x = d.g.transpose() * gl_x;
  double gb_x = gl_x.sum();
  bool have_grad_x = true;
  double residual = kkt_residual(d, x_u, gu_x, gb_x, params);

  Eigen::VectorXd y_u = x_u, gu_y = gu_x;
  double y_b = x_b, gb_y = gb_x, loss_y = loss_x;
  double t = 1.0;
  int iter = 0;
  bool fresh = true;  // y coincides with x

  // The exact residual costs one extra gradient; it is checked periodically.
  constexpr int kCheckEvery = 5;
  Eigen::VectorXd v, next_u, z_n(n), z_y, gl_n, gu_n;
  double gb_n = 0.0;
  bool grad_n_ready = false;
  while (residual > tol_abs && iter < cfg.max_iter) {
    ++iter;
    // With adaptive steps the local constant shrinks each iteration and is
    // doubled until the quadratic upper bound holds; it never exceeds the
    // global bound, where the test always passes.
    double trial_l = cfg.adaptive_step ? std::max(0.7 * local_l, 1e-8 * lipschitz) : lipschitz;
    double next_b = 0.0, loss_n = 0.0;
    for (;;) {
      const double eta = 1.0 / trial_l;
      v = y_u - eta * gu_y;
      next_u.resize(v.size());
      for (std::size_t m = 0; m < d.blocks(); ++m)
        next_u.segment(d.offset[m], d.width[m]) =
            prox_block(v.segment(d.offset[m], d.width[m]), eta, params);
      next_b = y_b - eta * gb_y;
      forward(next_u, next_b, z_n);
      loss_n = logistic_loss(z_n, y);
      grad_n_ready = false;
      if (trial_l >= lipschitz) break;
      const double db = next_b - y_b;
      const double step2 = (next_u - y_u).squaredNorm() + db * db;
      const double quad = 0.5 * trial_l * step2;
      const double noise = 1e-12 * std::abs(loss_y);
      if (quad > noise) {
        if (loss_n - loss_y - gu_y.dot(next_u - y_u) - gb_y * db <= quad + noise) break;
      } else {
        // Function values cannot resolve the bound any more; compare
        // gradients instead, whose rounding error is only linear in the step.
        gl_n = logistic_grad(z_n, y);
        gu_n.noalias() = d.g.transpose() * gl_n;
        gb_n = gl_n.sum();
        grad_n_ready = true;
        if ((gu_n - gu_y).dot(next_u - y_u) + (gb_n - gb_y) * db <= trial_l * step2) break;
      }
      trial_l = std::min(2.0 * trial_l, lipschitz);
    }
    local_l = trial_l;
    const double f_n = loss_n + penalty(d, next_u, params);
    if (!std::isfinite(f_n)) throw SolverError("objective became non-finite");

    if (cfg.restart && !fresh && f_n > f_x) {
      // Drop the momentum and retry from the last accepted point.
      if (!have_grad_x) {
        gl_x = logistic_grad(z_x, y);
        gu_x.noalias() = d.g.transpose() * gl_x;
        gb_x = gl_x.sum();
        have_grad_x = true;
      }
      y_u = x_u;
      y_b = x_b;
      gu_y = gu_x;
      gb_y = gb_x;
      loss_y = loss_x;
      t = 1.0;
      fresh = true;
      continue;
    }

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    const bool check = momentum == 0.0 || iter % kCheckEvery == 0 || iter == cfg.max_iter;
    if (check) {
      if (grad_n_ready) {
        gu_x = gu_n;
        gb_x = gb_n;
      } else {
        gl_n = logistic_grad(z_n, y);
        gu_x.noalias() = d.g.transpose() * gl_n;
        gb_x = gl_n.sum();
      }
      residual = kkt_residual(d, next_u, gu_x, gb_x, params);
    }
    have_grad_x = check;

    if (momentum == 0.0) {
      y_u = next_u;
      y_b = next_b;
      gu_y = gu_x;
      gb_y = gb_x;
      loss_y = loss_n;
      fresh = true;
    } else {
      y_u = next_u + momentum * (next_u - x_u);
      y_b = next_b + momentum * (next_b - x_b);
      z_y = z_n + momentum * (z_n - z_x);
      const Eigen::VectorXd gl_y = logistic_grad(z_y, y);
      loss_y = logistic_loss(z_y, y);
      gu_y.noalias() = d.g.transpose() * gl_y;
      gb_y = gl_y.sum();
      fresh = false;
    }
    x_u.swap(next_u);
    x_b = next_b;
    z_x.swap(z_n);
    loss_x = loss_n;
    f_x = f_n;
    t = t_next;
  }

  if (!have_grad_x) {
    gl_x = logistic_grad(z_x, y);
    gu_x.noalias() = d.g.transpose() * gl_x;
    residual = kkt_residual(d, x_u, gu_x, gl_x.sum(), params);
  }

  Solution sol;
  sol.params = params;
  sol.iterations = iter;
  sol.kkt_residual = residual;
  sol.converged = residual <= tol_abs;
  sol.bias = x_b;
  sol.alphas.resize(grams.size());
  sol.block_norms.resize(grams.size());
  for (std::size_t m = 0; m < grams.size(); ++m) {
    const GramFactor& f = grams.factors[m];
    const auto um = x_u.segment(d.offset[m], d.width[m]);
    if (f.rank() == 0 || um.isZero(0.0)) {
      sol.alphas[m] = Eigen::VectorXd::Zero(n);
    } else {
      sol.alphas[m] = f.vectors * um.cwiseQuotient(f.sqrt_values);
    }
    sol.block_norms[m] = block_norm(grams.mats[m], sol.alphas[m]);
  }
  sol.objective = evaluate_objective(grams, labels, params, sol.alphas, sol.bias);
  return sol;
}

double compute_c_max(const GramSet& grams, const Eigen::VectorXd& labels, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("compute_c_max needs lambda in [0, 1)");
  check_inputs(grams, labels);
  const auto [pos, neg] = class_counts(labels);
  const double bias = std::log(static_cast<double>(pos) / static_cast<double>(neg));
  const Eigen::VectorXd g = logistic_grad(Eigen::VectorXd::Constant(labels.size(), bias), labels);
  double worst = 0.0;
  for (const auto& f : grams.factors)
    if (f.rank() > 0) worst = std::max(worst, (f.g().transpose() * g).norm());
  return worst / (1.0 - lambda);
}

Eigen::VectorXd decision_function(const Solution& sol, const std::vector<Eigen::MatrixXd>& cross) {
  if (cross.size() != sol.alphas.size()) throw DataError("decision_function: kernel count mismatch");
  if (cross.empty()) throw DataError("decision_function: no kernels");
  const Eigen::Index rows = cross.front().rows();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(rows, sol.bias);
  for (std::size_t m = 0; m < cross.size(); ++m) {
    if (cross[m].rows() != rows || cross[m].cols() != sol.alphas[m].size())
      throw DataError("decision_function: cross gram shape mismatch");
    if (!sol.alphas[m].isZero(0.0))
      out.noalias() += cross[m] * sol.alphas[m];
  }
  return out;
}

Eigen::VectorXd predict_labels(const Eigen::VectorXd& scores) {
  return scores.unaryExpr([](double s) { return s >= 0.0 ? 1.0 : -1.0; });
}

double accuracy(const Eigen::VectorXd& scores, const Eigen::VectorXd& labels) {
  if (scores.size() != labels.size()) throw DataError("accuracy: length mismatch");
  if (scores.size() == 0) return 0.0;
  const Eigen::VectorXd pred = predict_labels(scores);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) hits += pred(i) == labels(i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace enmkl
