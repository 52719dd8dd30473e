#include <cmath>
#include <random>

#include <doctest.h>

#include "enmkl/loss.hpp"
#include "oracles.hpp"

using namespace enmkl;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("logistic loss examples") {
  CHECK(logistic_loss(Eigen::VectorXd::Zero(4), vec({1, -1, 1, 1})) ==
        doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-15));
  CHECK(logistic_loss(Eigen::VectorXd::Zero(4), vec({1, -1, 1, 1})) ==
        doctest::Approx(2.772589).epsilon(1e-6));

  const double sat = logistic_loss(vec({1000}), vec({1}));
  CHECK(std::isfinite(sat));
  CHECK(sat >= 0.0);
  CHECK(sat <= 1e-300);
  CHECK(logistic_loss(vec({1000}), vec({-1})) == doctest::Approx(1000.0).epsilon(1e-15));
  CHECK(logistic_loss(vec({-1e6, 1e6}), vec({-1, -1})) == doctest::Approx(1e6).epsilon(1e-15));
}

TEST_CASE("logistic loss agrees with the naive formula where it is safe") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd z(8);
    for (auto& v : z) v = normal(rng);
    const Eigen::VectorXd y = oracle::random_labels(8, rng);
    CHECK(logistic_loss(z, y) == doctest::Approx(oracle::naive_logistic(z, y)).epsilon(1e-12));
  }
}

TEST_CASE("logistic gradient examples") {
  CHECK(logistic_grad(vec({0}), vec({1}))(0) == -0.5);
  CHECK(logistic_grad(vec({0}), vec({-1}))(0) == 0.5);
  const Eigen::VectorXd g = logistic_grad(vec({1000, -1000, 1000, -1000}), vec({1, 1, -1, -1}));
  CHECK(std::isfinite(g.sum()));
  CHECK(g(0) == doctest::Approx(0.0));
  CHECK(g(1) == doctest::Approx(-1.0));
  CHECK(g(2) == doctest::Approx(1.0));
  CHECK(g(3) == doctest::Approx(0.0));
}

TEST_CASE("loss and gradient reject length mismatch") {
  CHECK_THROWS_AS(logistic_loss(vec({0, 0}), vec({1})), DataError);
  CHECK_THROWS_AS(logistic_grad(vec({0, 0}), vec({1})), DataError);
}

TEST_CASE("gradient matches central differences at 100 random points") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> normal(0.0, 3.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + trial % 12;
    Eigen::VectorXd z(n);
    for (auto& v : z) v = normal(rng);
    const Eigen::VectorXd y = oracle::random_labels(std::max<Eigen::Index>(n, 2), rng).head(n);
    const Eigen::VectorXd g = logistic_grad(z, y);
    Eigen::VectorXd fd(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd zp = z, zm = z;
      zp(i) += h;
      zm(i) -= h;
      fd(i) = (logistic_loss(zp, y) - logistic_loss(zm, y)) / (2.0 * h);
    }
    CHECK((fd - g).norm() <= 1e-5 * g.norm());
    CHECK((g.array().abs() < 1.0).all());
  }
}

TEST_CASE("loss is convex along random segments") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd a(5), b(5);
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng);
    const Eigen::VectorXd y = oracle::random_labels(5, rng);
    const double mid = logistic_loss(0.5 * (a + b), y);
    CHECK(mid <= 0.5 * (logistic_loss(a, y) + logistic_loss(b, y)) + 1e-12);
  }
}

TEST_CASE("gradient is 1/4-Lipschitz per coordinate") {
  std::mt19937_64 rng(24);
  std::normal_distribution<double> normal(0.0, 4.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double a = normal(rng), b = normal(rng);
    const double y = trial % 2 ? 1.0 : -1.0;
    const double ga = logistic_grad(vec({a}), vec({y}))(0);
    const double gb = logistic_grad(vec({b}), vec({y}))(0);
    CHECK(std::abs(ga - gb) <= 0.25 * std::abs(a - b) + 1e-15);
  }
}

TEST_CASE("label validation and class counts") {
  LabeledSet ok{Points::Zero(3, 1), vec({1, -1, 1})};
  CHECK_NOTHROW(validate_labels(ok));
  CHECK(class_counts(ok.labels) == std::pair<Eigen::Index, Eigen::Index>{2, 1});
  LabeledSet bad{Points::Zero(3, 1), vec({1, 0, 1})};
  CHECK_THROWS_AS(validate_labels(bad), DataError);
  LabeledSet ragged{Points::Zero(2, 1), vec({1, -1, 1})};
  CHECK_THROWS_AS(validate_labels(ragged), DataError);
}
