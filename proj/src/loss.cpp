#include "enmkl/loss.hpp"

#include <cmath>

namespace enmkl {

void validate_labels(const LabeledSet& data) {
  if (data.features.rows() != data.labels.size())
    throw DataError("feature rows and label count differ");
  for (Eigen::Index i = 0; i < data.labels.size(); ++i)
    if (data.labels(i) != 1.0 && data.labels(i) != -1.0)
      throw DataError("labels must be -1 or +1");
}

std::pair<Eigen::Index, Eigen::Index> class_counts(const Eigen::VectorXd& labels) {
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) pos += labels(i) > 0.0 ? 1 : 0;
  return {pos, labels.size() - pos};
}

double logistic_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  if (z.size() != y.size()) throw DataError("logistic_loss: length mismatch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = y(i) * z(i);
    total += std::log1p(std::exp(-std::abs(t))) + std::max(0.0, -t);
  }
  return total;
}

Eigen::VectorXd logistic_grad(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  if (z.size() != y.size()) throw DataError("logistic_grad: length mismatch");
  Eigen::VectorXd g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = y(i) * z(i);
    // sigma(-t) without overflow on either tail
    const double s = t >= 0.0 ? std::exp(-t) / (1.0 + std::exp(-t)) : 1.0 / (1.0 + std::exp(t));
    g(i) = -y(i) * s;
  }
  return g;
}

}  // namespace enmkl
