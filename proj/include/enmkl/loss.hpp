#pragma once

#include <utility>

#include <Eigen/Core>

#include "enmkl/kernel.hpp"

namespace enmkl {

/// Training or test examples with labels in {-1, +1}.
struct LabeledSet {
  Points features;
  Eigen::VectorXd labels;

  Eigen::Index size() const { return labels.size(); }
};

/// Throws DataError unless every label is exactly -1 or +1 and the
/// feature/label counts agree.
void validate_labels(const LabeledSet& data);

/// Number of +1 and -1 labels.
std::pair<Eigen::Index, Eigen::Index> class_counts(const Eigen::VectorXd& labels);

/// sum_i log(1 + exp(-y_i z_i)), evaluated as log1p(exp(-|t|)) + max(0, -t).
double logistic_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& y);

/// Component i is -y_i / (1 + exp(y_i z_i)).
Eigen::VectorXd logistic_grad(const Eigen::VectorXd& z, const Eigen::VectorXd& y);

}  // namespace enmkl
