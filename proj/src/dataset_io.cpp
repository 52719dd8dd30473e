#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "enmkl/dataset.hpp"
#include "parse.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace enmkl {

void write_labeled_csv(const std::string& path, const LabeledSet& data) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot write '" + path + "'");
  os << "id,label";
  for (Eigen::Index j = 0; j < data.features.cols(); ++j) os << ",x" << j;
  os << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    os << i << ',' << static_cast<int>(data.labels(i));
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) os << ',' << data.features(i, j);
    os << '\n';
  }
}

LabeledSet read_labeled_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(is, line)) throw DataError("'" + path + "' is empty");
  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  // the header fixes the width: id, label, then one column per feature
  const auto width = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (width < 2) throw DataError("'" + path + "': header needs id and label columns");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(detail::parse_double(tok));
      } catch (const std::exception&) {
        throw DataError("non-numeric field in '" + path + "'");
      }
    }
    if (vals.size() != width) throw DataError("'" + path + "': row width differs from the header");
    labels.push_back(vals[1]);
    rows.emplace_back(vals.begin() + 2, vals.end());
  }
  LabeledSet out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width - 2));
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.labels(static_cast<Eigen::Index>(i)) = labels[i];
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  validate_labels(out);
  return out;
}

namespace {

json kernel_to_json(const KernelFunc& k) {
  return {{"kind", kernel_kind_name(k.kind)},
          {"bandwidth", k.bandwidth},
          {"variables", k.variables},
          {"label", k.label}};
}

KernelFunc kernel_from_json(const json& j) {
  KernelFunc k;
  k.kind = kernel_kind_from_name(j.at("kind").get<std::string>());
  k.bandwidth = j.at("bandwidth").get<double>();
  k.variables = j.value("variables", std::vector<int>{});
  k.label = j.value("label", std::string{});
  return k;
}

json spec_to_json(const ToySpec& s) {
  json j = {{"goal", goal_name(s.goal)},
            {"spectrum", spectrum_name(s.spectrum)},
            {"n_train", s.n_train},
            {"n_test", s.n_test},
            {"seed", s.seed},
            {"label_noise", s.label_noise},
            {"feature_bandwidth", s.feature_bandwidth}};
  if (s.decay_tau) j["decay_tau"] = *s.decay_tau;
  return j;
}

ToySpec spec_from_json(const json& j) {
  ToySpec s;
  s.goal = goal_from_name(j.at("goal").get<std::string>());
  s.spectrum = spectrum_from_name(j.at("spectrum").get<std::string>());
  s.n_train = j.at("n_train").get<int>();
  s.n_test = j.at("n_test").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.label_noise = j.value("label_noise", 0.0);
  s.feature_bandwidth = j.value("feature_bandwidth", 1.0);
  if (j.contains("decay_tau")) s.decay_tau = j.at("decay_tau").get<double>();
  return s;
}

}  // namespace

void write_dataset(const std::string& dir, const ToyProblem& problem) {
  fs::create_directories(dir);
  write_labeled_csv((fs::path(dir) / "train.csv").string(), problem.train);
  write_labeled_csv((fs::path(dir) / "test.csv").string(), problem.test);

  json meta;
  meta["generator"] = spec_to_json(problem.spec);
  meta["seed"] = problem.spec.seed;
  meta["true_spectrum"] = std::vector<double>(problem.truth.data(),
                                              problem.truth.data() + problem.truth.size());
  meta["bandwidth_grid"] = bandwidth_grid();
  meta["kernels"] = json::array();
  for (const auto& k : problem.kernels) meta["kernels"].push_back(kernel_to_json(k));
  meta["gram_normalized"] = problem.grams_train.normalized;
  std::ofstream os(fs::path(dir) / "meta.json");
  if (!os) throw DataError("cannot write meta.json in '" + dir + "'");
  os << meta.dump(2) << '\n';

  write_gram_set((fs::path(dir) / "grams_train.mklg").string(), problem.grams_train);
}

Dataset read_dataset(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("'" + dir + "' is not a directory");
  Dataset ds;
  ds.train = read_labeled_csv((fs::path(dir) / "train.csv").string());
  if (fs::exists(fs::path(dir) / "test.csv"))
    ds.test = read_labeled_csv((fs::path(dir) / "test.csv").string());

  const fs::path meta_path = fs::path(dir) / "meta.json";
  if (fs::exists(meta_path)) {
    std::ifstream is(meta_path);
    json meta;
    try {
      meta = json::parse(is);
      if (meta.contains("generator")) ds.spec = spec_from_json(meta.at("generator"));
      if (meta.contains("kernels"))
        for (const auto& k : meta.at("kernels")) ds.kernels.push_back(kernel_from_json(k));
      if (meta.contains("true_spectrum")) {
        const auto v = meta.at("true_spectrum").get<std::vector<double>>();
        ds.truth = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      }
    } catch (const json::exception& e) {
      throw DataError("malformed meta.json: " + std::string(e.what()));
    } catch (const std::invalid_argument& e) {
      throw DataError("malformed meta.json: " + std::string(e.what()));
    }
  }
  return ds;
}

}  // namespace enmkl
