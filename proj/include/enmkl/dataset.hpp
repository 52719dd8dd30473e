#pragma once

#include <optional>
#include <string>
#include <vector>

#include "enmkl/kernel.hpp"
#include "enmkl/loss.hpp"
#include "enmkl/simdata.hpp"

namespace enmkl {

/**
 * A dataset directory on disk:
 *
 *   train.csv, test.csv   id,label,x0,x1,...
 *   meta.json             generator spec, seed, true spectrum, bandwidth grid, kernel bank
 *   grams_train.mklg      training Gram bank (binary)
 *
 * test.csv and the generator spec are optional when reading.
 */
struct Dataset {
  LabeledSet train;
  std::optional<LabeledSet> test;
  std::vector<KernelFunc> kernels;
  std::optional<ToySpec> spec;
  Eigen::VectorXd truth;
};

void write_labeled_csv(const std::string& path, const LabeledSet& data);
LabeledSet read_labeled_csv(const std::string& path);

void write_dataset(const std::string& dir, const ToyProblem& problem);
Dataset read_dataset(const std::string& dir);

}  // namespace enmkl
