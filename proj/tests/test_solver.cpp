#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>
#include <Eigen/Eigenvalues>

#include "enmkl/solver.hpp"
#include "oracles.hpp"

using namespace enmkl;

namespace {

GramSet random_bank(Eigen::Index n, int m, std::mt19937_64& rng) {
  std::vector<Eigen::MatrixXd> mats;
  std::vector<KernelFunc> kernels;
  for (int k = 0; k < m; ++k) {
    mats.push_back(oracle::random_pd_gram(n, rng));
    kernels.push_back({KernelKind::Precomputed, 1.0, {}, "k" + std::to_string(k)});
  }
  return make_gram_set(std::move(mats), std::move(kernels));
}

// Gaussian kernels of different widths on random inputs: realistic, and
// nearly rank deficient for the wide ones.
GramSet gaussian_bank(Eigen::Index n, std::mt19937_64& rng, Points* out_points = nullptr) {
  std::normal_distribution<double> normal;
  Points p(n, 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = normal(rng);
  std::vector<KernelFunc> kernels{{KernelKind::Gaussian, 0.5, {}, ""},
                                  {KernelKind::Gaussian, 2.0, {}, ""},
                                  {KernelKind::Gaussian, 1.0, {0}, ""}};
  if (out_points) *out_points = p;
  return build_gram_set(p, kernels);
}

Eigen::VectorXd u_of(const GramFactor& f, const Eigen::VectorXd& alpha) {
  return f.sqrt_values.cwiseProduct(f.vectors.transpose() * alpha);
}

double objective_at_zero(const Eigen::VectorXd& y) {
  return static_cast<double>(y.size()) * std::log(2.0);
}

std::vector<Eigen::MatrixXd> mats_of(const GramSet& g) { return {g.mats.begin(), g.mats.end()}; }

}  // namespace

TEST_CASE("prox examples") {
  const Eigen::VectorXd v = Eigen::Vector3d(1.2, -1.6, 0.0);  // |v| = 2
  CHECK((prox_block(v, 1.0, {1.0, 0.0}) - 0.5 * v).norm() < 1e-15);
  CHECK((prox_block(v, 1.0, {1.0, 1.0}) - 0.5 * v).norm() < 1e-15);
  CHECK((prox_block(0.3 * v, 1.0, {1.0, 1.0}) - 0.15 * v).norm() < 1e-15);
  CHECK(prox_block(v, 1.0, {2.0, 0.0}).isZero(0.0));
  CHECK(prox_block(v, 4.0, {1.0, 0.5}).isZero(0.0));
  CHECK(prox_block(Eigen::VectorXd::Zero(4), 1.0, {1.0, 1.0}).isZero(0.0));
}

TEST_CASE("prox matches the radial minimizer on random inputs") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pos(0.01, 10.0), unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_int_distribution<int> dim(1, 50);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::VectorXd v(dim(rng));
    for (auto& x : v) x = normal(rng);
    const double eta = pos(rng);
    const ElasticNetParams p{pos(rng), trial % 10 == 0 ? 1.0 : unit(rng)};
    const Eigen::VectorXd expect = oracle::radial_prox(v, eta, p.C, p.lambda);
    CHECK((prox_block(v, eta, p) - expect).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("bias-only fit under an overwhelming penalty") {
  const Eigen::Index n = 10;
  Eigen::VectorXd y = Eigen::VectorXd::Ones(n);
  y.tail(3).setConstant(-1.0);
  const GramSet id = make_gram_set({Eigen::MatrixXd::Identity(n, n)}, {KernelFunc{}});
  const Solution sol = fit(id, y, {1e6, 1.0});
  CHECK(sol.converged);
  CHECK(sol.alphas[0].cwiseAbs().maxCoeff() < 1e-5);
  CHECK(sol.bias == doctest::Approx(std::log(7.0 / 3.0)).epsilon(1e-3));
}

TEST_CASE("small instance matches the barrier oracle") {
  std::mt19937_64 rng(32);
  const GramSet bank = random_bank(6, 2, rng);
  const Eigen::VectorXd y = oracle::random_labels(6, rng);
  const ElasticNetParams p{0.5, 0.5};
  const Solution sol = fit(bank, y, p);
  const auto ref = oracle::barrier_mkl(mats_of(bank), y, p.C, p.lambda);
  CHECK(sol.converged);
  CHECK(std::abs(sol.objective - ref.objective) <= 1e-6 * std::abs(ref.objective));
  CHECK(sol.objective ==
        doctest::Approx(evaluate_objective(bank, y, p, ref.alphas, ref.bias)).epsilon(1e-6));
}

TEST_CASE("fit agrees with the barrier oracle across lambda") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> c_dist(0.1, 10.0);
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::Index n = 4 + trial % 9;
    const int m = 1 + trial % 4;
    const GramSet bank = random_bank(n, m, rng);
    const Eigen::VectorXd y = oracle::random_labels(n, rng);
    const ElasticNetParams p{c_dist(rng), std::vector<double>{0.0, 0.3, 0.7, 1.0}[trial % 4]};
    const Solution sol = fit(bank, y, p);
    const auto ref = oracle::barrier_mkl(mats_of(bank), y, p.C, p.lambda);
    INFO("trial " << trial << " C=" << p.C << " lambda=" << p.lambda);
    CHECK(sol.converged);
    CHECK(std::abs(sol.objective - ref.objective) <= 1e-6 * std::abs(ref.objective));
  }
}

TEST_CASE("c_max examples") {
  std::mt19937_64 rng(34);
  const GramSet bank = random_bank(8, 3, rng);
  const Eigen::VectorXd y = oracle::random_labels(8, rng);
  CHECK(compute_c_max(bank, y, 0.5) == 2.0 * compute_c_max(bank, y, 0.0));

  const GramSet id = make_gram_set({Eigen::MatrixXd::Identity(2, 2)}, {KernelFunc{}});
  const Eigen::VectorXd pm = Eigen::Vector2d(1.0, -1.0);
  for (double lam : {0.0, 0.25, 0.9})
    CHECK(compute_c_max(id, pm, lam) == doctest::Approx(std::sqrt(0.5) / (1.0 - lam)));
  CHECK_THROWS_AS(compute_c_max(id, pm, 1.0), std::invalid_argument);
}

TEST_CASE("c_max is the sparsity threshold") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 6; ++trial) {
    const GramSet bank = trial % 2 ? random_bank(10, 3, rng) : gaussian_bank(12, rng);
    Eigen::VectorXd y = oracle::random_labels(bank.samples(), rng);
    if (trial < 2) {  // balanced labels: the bias-only fit has b = 0
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = i % 2 ? -1.0 : 1.0;
    }
    for (double lam : {0.0, 0.4}) {
      const double c_max = compute_c_max(bank, y, lam);
      const Solution above = fit(bank, y, {1.01 * c_max, lam});
      CHECK(above.active_blocks() == 0);
      for (const auto& a : above.alphas) CHECK(a.isZero(0.0));
      const Solution below = fit(bank, y, {0.5 * c_max, lam});
      CHECK(below.active_blocks() >= 1);
    }
  }
}

TEST_CASE("decision function examples") {
  Solution zero;
  zero.alphas = {Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  zero.bias = 0.3;
  const std::vector<Eigen::MatrixXd> cross{Eigen::MatrixXd::Random(5, 3),
                                           Eigen::MatrixXd::Random(5, 3)};
  const Eigen::VectorXd s = decision_function(zero, cross);
  CHECK(s == Eigen::VectorXd::Constant(5, 0.3));
  CHECK(predict_labels(s) == Eigen::VectorXd::Ones(5));
  CHECK(predict_labels(Eigen::Vector3d(0.0, -0.0, -1e-300)) == Eigen::Vector3d(1, 1, -1));
  CHECK_THROWS_AS(decision_function(zero, {cross[0]}), DataError);
  CHECK_THROWS_AS(decision_function(zero, {cross[0], Eigen::MatrixXd::Zero(5, 4)}), DataError);

  std::mt19937_64 rng(36);
  const GramSet bank = random_bank(7, 2, rng);
  const Eigen::VectorXd y = oracle::random_labels(7, rng);
  const Solution sol = fit(bank, y, {0.2, 0.3});
  Eigen::VectorXd train_scores = Eigen::VectorXd::Constant(7, sol.bias);
  for (std::size_t m = 0; m < 2; ++m) train_scores += bank.mats[m] * sol.alphas[m];
  CHECK((decision_function(sol, mats_of(bank)) - train_scores).norm() < 1e-12);

  // random solution vs. explicit loops
  Solution rnd;
  rnd.bias = -0.7;
  std::normal_distribution<double> normal;
  std::vector<Eigen::MatrixXd> cr;
  for (int m = 0; m < 3; ++m) {
    Eigen::VectorXd a(4);
    for (auto& v : a) v = normal(rng);
    rnd.alphas.push_back(a);
    Eigen::MatrixXd k(6, 4);
    for (Eigen::Index i = 0; i < k.size(); ++i) k.data()[i] = normal(rng);
    cr.push_back(k);
  }
  const Eigen::VectorXd fast = decision_function(rnd, cr);
  for (int i = 0; i < 6; ++i) {
    double acc = rnd.bias;
    for (int m = 0; m < 3; ++m)
      for (int j = 0; j < 4; ++j) acc += cr[m](i, j) * rnd.alphas[m](j);
    CHECK(fast(i) == doctest::Approx(acc).epsilon(1e-13));
  }
}

TEST_CASE("accuracy counts sign-correct predictions") {
  CHECK(accuracy(Eigen::Vector4d(1, -1, 0, 2), Eigen::Vector4d(1, -1, 1, -1)) == 0.75);
  CHECK(accuracy(Eigen::Vector2d(0, 0), Eigen::Vector2d(-1, -1)) == 0.0);
  CHECK_THROWS_AS(accuracy(Eigen::Vector2d(0, 0), Eigen::Vector3d(1, 1, 1)), DataError);
}

TEST_CASE("fit input validation") {
  const GramSet id = make_gram_set({Eigen::MatrixXd::Identity(3, 3)}, {KernelFunc{}});
  CHECK_THROWS_AS(fit(id, Eigen::Vector3d(1, 1, 1), {}), DataError);
  CHECK_THROWS_AS(fit(id, Eigen::Vector2d(1, -1), {}), DataError);
  CHECK_THROWS_AS(fit(id, Eigen::Vector3d(1, -1, 2), {}), DataError);
  CHECK_THROWS_AS(fit(id, Eigen::Vector3d(1, -1, 1), {0.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(fit(id, Eigen::Vector3d(1, -1, 1), {1.0, 1.5}), std::invalid_argument);
  SolverConfig bad;
  bad.max_iter = 0;
  CHECK_THROWS_AS(fit(id, Eigen::Vector3d(1, -1, 1), {}, bad), std::invalid_argument);

  // Running out of iterations is reported, not thrown.
  std::mt19937_64 rng(37);
  const GramSet bank = random_bank(10, 3, rng);
  const Eigen::VectorXd y = oracle::random_labels(10, rng);
  SolverConfig one;
  one.max_iter = 1;
  Solution s;
  CHECK_NOTHROW(s = fit(bank, y, {0.05, 0.0}, one));
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 1);
}

TEST_CASE("objective never rises with more iterations") {
  std::mt19937_64 rng(38);
  const GramSet bank = gaussian_bank(15, rng);
  const Eigen::VectorXd y = oracle::random_labels(15, rng);
  const ElasticNetParams p{0.05, 0.2};
  double previous = objective_at_zero(y);
  for (int k = 1; k <= 60; ++k) {
    SolverConfig cfg;
    cfg.max_iter = k;
    const Solution s = fit(bank, y, p, cfg);
    CHECK(s.objective <= previous * (1.0 + 1e-12));
    previous = std::min(previous, s.objective);
  }
  CHECK(fit(bank, y, p).objective <= objective_at_zero(y));
}

TEST_CASE("lambda = 0 solutions satisfy KKT blockwise with exact zeros") {
  std::mt19937_64 rng(39);
  for (int trial = 0; trial < 6; ++trial) {
    const GramSet bank = trial % 2 ? random_bank(12, 4, rng) : gaussian_bank(14, rng);
    const Eigen::VectorXd y = oracle::random_labels(bank.samples(), rng);
    const double c = 0.3 * compute_c_max(bank, y, 0.0);
    const ElasticNetParams p{c, 0.0};
    SolverConfig cfg;
    const Solution sol = fit(bank, y, p, cfg);
    REQUIRE(sol.converged);

    Eigen::VectorXd z = Eigen::VectorXd::Constant(y.size(), sol.bias);
    for (std::size_t m = 0; m < bank.size(); ++m) z += bank.mats[m] * sol.alphas[m];
    const Eigen::VectorXd grad = logistic_grad(z, y);
    const Eigen::VectorXd g0 = logistic_grad(Eigen::VectorXd::Zero(y.size()), y);
    double scale = g0.sum() * g0.sum();
    for (const auto& f : bank.factors) scale += (f.g().transpose() * g0).squaredNorm();
    const double tol = cfg.tol * std::max(1.0, std::sqrt(scale));

    for (std::size_t m = 0; m < bank.size(); ++m) {
      const GramFactor& f = bank.factors[m];
      const Eigen::VectorXd s = -(f.g().transpose() * grad);
      if (sol.alphas[m].isZero(0.0)) {
        CHECK(s.norm() <= c + tol);
      } else {
        const Eigen::VectorXd u = u_of(f, sol.alphas[m]);
        REQUIRE(u.norm() > 0.0);
        CHECK((s - c * u / u.norm()).norm() <= tol);
      }
    }
  }
}

TEST_CASE("kernel order does not matter") {
  std::mt19937_64 rng(40);
  for (int trial = 0; trial < 4; ++trial) {
    const GramSet bank = random_bank(9, 4, rng);
    const Eigen::VectorXd y = oracle::random_labels(9, rng);
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Eigen::MatrixXd> mats;
    std::vector<KernelFunc> kernels;
    for (int k : perm) {
      mats.push_back(bank.mats[k]);
      kernels.push_back(bank.kernels[k]);
    }
    const GramSet shuffled = make_gram_set(mats, kernels);
    const ElasticNetParams p{0.1 + 0.2 * trial, trial % 2 ? 0.0 : 0.6};
    SolverConfig cfg;
    cfg.tol = 1e-13;
    cfg.max_iter = 200000;
    const Solution a = fit(bank, y, p, cfg);
    const Solution b = fit(shuffled, y, p, cfg);
    CHECK(std::abs(a.objective - b.objective) <= 1e-10 * std::abs(a.objective));
    CHECK(std::abs(a.bias - b.bias) <= 1e-10);
    for (int k = 0; k < 4; ++k)
      CHECK((a.alphas[perm[k]] - b.alphas[k]).cwiseAbs().maxCoeff() <= 1e-8);
    const Eigen::VectorXd sa = decision_function(a, mats_of(bank));
    const Eigen::VectorXd sb = decision_function(b, mats_of(shuffled));
    CHECK((sa - sb).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("block norms agree with factor-space norms") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 6; ++trial) {
    const GramSet bank = trial % 2 ? random_bank(11, 3, rng) : gaussian_bank(16, rng);
    const Eigen::VectorXd y = oracle::random_labels(bank.samples(), rng);
    const Solution sol = fit(bank, y, {0.02, 0.5});
    for (std::size_t m = 0; m < bank.size(); ++m) {
      const double u = u_of(bank.factors[m], sol.alphas[m]).norm();
      CHECK(std::abs(sol.block_norms[m] - u) <= 1e-8);
      CHECK(sol.block_norms[m] == block_norm(bank.mats[m], sol.alphas[m]));
    }
  }
}

TEST_CASE("warm and cold starts reach the same solution") {
  std::mt19937_64 rng(42);
  const GramSet bank = gaussian_bank(25, rng);
  const Eigen::VectorXd y = oracle::random_labels(25, rng);
  for (double lam : {0.0, 0.5, 1.0}) {
    const Solution seed = fit(bank, y, {1.0, lam});
    const Solution warm = fit(bank, y, {0.1, lam}, {}, &seed);
    const Solution cold = fit(bank, y, {0.1, lam});
    CHECK(warm.converged);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-7));
    CHECK(warm.active_blocks() == cold.active_blocks());
  }
  Solution wrong;
  wrong.alphas = {Eigen::VectorXd::Zero(25)};
  CHECK_THROWS_AS(fit(bank, y, {0.1, 0.5}, {}, &wrong), DataError);
}

TEST_CASE("step-size and restart options do not change the minimizer") {
  std::mt19937_64 rng(43);
  const GramSet bank = random_bank(10, 3, rng);
  const Eigen::VectorXd y = oracle::random_labels(10, rng);
  const ElasticNetParams p{0.3, 0.3};
  const Solution ref = fit(bank, y, p);
  for (bool adaptive : {false, true})
    for (bool restart : {false, true}) {
      SolverConfig cfg;
      cfg.adaptive_step = adaptive;
      cfg.restart = restart;
      const Solution s = fit(bank, y, p, cfg);
      CHECK(s.converged);
      CHECK(s.objective == doctest::Approx(ref.objective).epsilon(1e-8));
    }
}

TEST_CASE("rank-deficient kernels are handled") {
  // duplicated points make the Gram singular
  Points p(6, 1);
  p << 0.0, 0.0, 1.0, 1.0, 2.0, -1.0;
  const GramSet bank =
      build_gram_set(p, {{KernelKind::Gaussian, 1.0, {}, ""}, {KernelKind::Gaussian, 5.0, {}, ""}});
  CHECK(bank.factors[0].rank() < 6);
  const Eigen::VectorXd y = (Eigen::VectorXd(6) << 1, 1, -1, -1, 1, -1).finished();
  const Solution sol = fit(bank, y, {0.1, 0.5});
  CHECK(sol.converged);
  CHECK(std::isfinite(sol.objective));
}

TEST_CASE("power iteration estimates the top eigenvalue") {
  std::mt19937_64 rng(44);
  const GramSet bank = random_bank(12, 3, rng);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Ones(12, 12);
  for (const auto& k : bank.mats) sum += k;
  const double exact = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sum).eigenvalues().maxCoeff();
  CHECK(top_eigenvalue(bank) == doctest::Approx(exact).epsilon(1e-5));
  CHECK(top_eigenvalue(bank) <= exact * (1.0 + 1e-12));
}
