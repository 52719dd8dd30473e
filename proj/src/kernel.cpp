#include "enmkl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace enmkl {

const char* kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Gaussian:
      return "gaussian";
    case KernelKind::ChiSquare:
      return "chi2";
    case KernelKind::Precomputed:
      return "precomputed";
  }
  return "unknown";
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "gaussian") return KernelKind::Gaussian;
  if (name == "chi2") return KernelKind::ChiSquare;
  if (name == "precomputed") return KernelKind::Precomputed;
  throw DataError("unknown kernel kind '" + name + "'");
}

double eval_gaussian(std::span<const double> q, std::span<const double> q2, double gamma) {
  if (q.size() != q2.size()) throw DataError("eval_gaussian: dimension mismatch");
  if (!(gamma > 0.0)) throw DataError("eval_gaussian: bandwidth must be positive");
  double sq = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double d = q[j] - q2[j];
    sq += d * d;
  }
  return std::exp(-sq / (2.0 * gamma * gamma));
}

double eval_chi2(std::span<const double> q, std::span<const double> q2, double gamma) {
  if (q.size() != q2.size()) throw DataError("eval_chi2: dimension mismatch");
  if (!(gamma > 0.0)) throw DataError("eval_chi2: bandwidth must be positive");
  double acc = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] < 0.0 || q2[j] < 0.0) throw DataError("eval_chi2: negative histogram entry");
    const double s = q[j] + q2[j];
    if (s == 0.0) continue;
    const double d = q[j] - q2[j];
    acc += d * d / s;
  }
  return std::exp(-gamma * gamma * acc);
}

double KernelFunc::operator()(std::span<const double> q, std::span<const double> q2) const {
  switch (kind) {
    case KernelKind::Gaussian:
      return eval_gaussian(q, q2, bandwidth);
    case KernelKind::ChiSquare:
      return eval_chi2(q, q2, bandwidth);
    case KernelKind::Precomputed:
      break;
  }
  throw DataError("precomputed kernel '" + label + "' cannot be evaluated");
}

std::string KernelFunc::describe() const {
  if (!label.empty()) return label;
  std::ostringstream os;
  os << kernel_kind_name(kind) << "(gamma=" << bandwidth;
  if (!variables.empty()) {
    os << ";vars=";
    for (std::size_t i = 0; i < variables.size(); ++i) os << (i ? "|" : "") << variables[i];
  }
  os << ")";
  return os.str();
}

Points select_variables(const Points& points, const KernelFunc& k) {
  if (k.variables.empty()) return points;
  Points out(points.rows(), static_cast<Eigen::Index>(k.variables.size()));
  for (std::size_t c = 0; c < k.variables.size(); ++c) {
    const int v = k.variables[c];
    if (v < 0 || v >= points.cols()) throw DataError("kernel variable index out of range");
    out.col(static_cast<Eigen::Index>(c)) = points.col(v);
  }
  return out;
}

namespace {

std::span<const double> row_span(const Points& p, Eigen::Index i) {
  return {p.data() + i * p.cols(), static_cast<std::size_t>(p.cols())};
}

void check_kernel(const KernelFunc& k) {
  if (k.kind == KernelKind::Precomputed)
    throw DataError("precomputed kernel '" + k.label + "' cannot be evaluated");
  if (!(k.bandwidth > 0.0)) throw DataError("kernel bandwidth must be positive");
}

Points prepare(const Points& points, const KernelFunc& k) {
  if (points.rows() < 1) throw DataError("build_gram: empty input");
  check_kernel(k);
  return select_variables(points, k);
}

}  // namespace

Eigen::MatrixXd build_gram(const Points& points, const KernelFunc& k) {
  const Points x = prepare(points, k);
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd gram(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = row_span(x, i);
    for (Eigen::Index j = i; j < n; ++j) gram(i, j) = k(xi, row_span(x, j));
  }
  gram.triangularView<Eigen::StrictlyLower>() = gram.transpose();
  return gram;
}

Eigen::MatrixXd build_gram_serial(const Points& points, const KernelFunc& k) {
  const Points x = prepare(points, k);
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      gram(i, j) = k(row_span(x, i), row_span(x, j));
      gram(j, i) = gram(i, j);
    }
  }
  return gram;
}

Eigen::MatrixXd build_cross_gram(const Points& rows, const Points& cols, const KernelFunc& k) {
  if (rows.cols() != cols.cols()) throw DataError("build_cross_gram: dimension mismatch");
  const Points a = prepare(rows, k);
  const Points b = prepare(cols, k);
  Eigen::MatrixXd out(a.rows(), b.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto ai = row_span(a, i);
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = k(ai, row_span(b, j));
  }
  return out;
}

Eigen::MatrixXd build_cross_gram_serial(const Points& rows, const Points& cols,
                                        const KernelFunc& k) {
  if (rows.cols() != cols.cols()) throw DataError("build_cross_gram: dimension mismatch");
  const Points a = prepare(rows, k);
  const Points b = prepare(cols, k);
  Eigen::MatrixXd out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = k(row_span(a, i), row_span(b, j));
  return out;
}

Eigen::MatrixXd GramFactor::g() const { return vectors * sqrt_values.asDiagonal(); }

GramFactor factorize(const Eigen::MatrixXd& gram, double jitter_tol) {
  if (gram.rows() != gram.cols() || gram.rows() == 0)
    throw DataError("factorize: gram must be square and non-empty");
  const double scale = gram.cwiseAbs().maxCoeff();
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DataError("factorize: gram is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) throw DataError("factorize: eigendecomposition failed");
  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  const double top = std::max(ev(ev.size() - 1), 0.0);
  if (ev(0) < -jitter_tol * top || (top == 0.0 && ev(0) < 0.0))
    throw DataError("factorize: gram is not positive semidefinite");

  const double cut = jitter_tol * top;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
    if (ev(i) > cut && ev(i) > 0.0) keep.push_back(i);

  GramFactor f;
  f.vectors.resize(gram.rows(), static_cast<Eigen::Index>(keep.size()));
  f.sqrt_values.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    f.vectors.col(col) = eig.eigenvectors().col(keep[c]);
    f.sqrt_values(col) = std::sqrt(ev(keep[c]));
  }
  return f;
}

Eigen::MatrixXd normalize_gram(const Eigen::MatrixXd& gram) {
  if (gram.rows() != gram.cols()) throw DataError("normalize_gram: gram must be square");
  const Eigen::VectorXd d = gram.diagonal();
  if ((d.array() <= 0.0).any()) throw DataError("normalize_gram: non-positive diagonal entry");
  const Eigen::VectorXd s = d.array().rsqrt();
  Eigen::MatrixXd out = s.asDiagonal() * gram * s.asDiagonal();
  out.triangularView<Eigen::StrictlyLower>() = out.transpose();
  out.diagonal().setOnes();
  return out;
}

Eigen::Index GramSet::total_rank() const {
  Eigen::Index r = 0;
  for (const auto& f : factors) r += f.rank();
  return r;
}

GramSet make_gram_set(std::vector<Eigen::MatrixXd> mats, std::vector<KernelFunc> kernels,
                      const GramOptions& opts) {
  if (mats.empty()) throw DataError("gram set must contain at least one kernel");
  if (kernels.size() != mats.size()) throw DataError("gram set: metadata count mismatch");
  const Eigen::Index n = mats.front().rows();
  for (const auto& m : mats)
    if (m.rows() != n || m.cols() != n) throw DataError("gram set: inconsistent matrix sizes");

  GramSet set;
  set.kernels = std::move(kernels);
  set.mats = std::move(mats);
  set.normalized = opts.normalize;
  set.factors.resize(set.mats.size());

  const auto count = static_cast<std::ptrdiff_t>(set.mats.size());
  std::string error;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t m = 0; m < count; ++m) {
    try {
      if (opts.normalize) set.mats[m] = normalize_gram(set.mats[m]);
      set.factors[m] = factorize(set.mats[m], opts.jitter_tol);
    } catch (const DataError& e) {
#pragma omp critical
      if (error.empty()) error = "kernel " + std::to_string(m) + ": " + e.what();
    }
  }
  if (!error.empty()) throw DataError(error);
  return set;
}

GramSet build_gram_set(const Points& points, const std::vector<KernelFunc>& kernels,
                       const GramOptions& opts) {
  std::vector<Eigen::MatrixXd> mats;
  mats.reserve(kernels.size());
  for (const auto& k : kernels) mats.push_back(build_gram(points, k));
  return make_gram_set(std::move(mats), kernels, opts);
}

std::vector<Eigen::MatrixXd> build_cross_grams(const Points& test, const Points& train,
                                               const std::vector<KernelFunc>& kernels) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(kernels.size());
  for (const auto& k : kernels) out.push_back(build_cross_gram(test, train, k));
  return out;
}

}  // namespace enmkl
