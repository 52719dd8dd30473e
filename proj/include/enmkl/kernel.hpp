#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace enmkl {

/// Samples are stored one per row so that each sample is contiguous.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raised for malformed inputs (shape mismatches, invalid kernels, bad files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KernelKind { Gaussian, ChiSquare, Precomputed };

const char* kernel_kind_name(KernelKind kind);
KernelKind kernel_kind_from_name(const std::string& name);

/**
 * A kernel function together with the subset of input variables it reads.
 *
 * An empty `variables` list means the kernel looks at every input variable.
 * `Precomputed` kernels carry only metadata: their Gram matrices come from
 * outside (files) and they cannot be evaluated.
 */
struct KernelFunc {
  KernelKind kind = KernelKind::Gaussian;
  double bandwidth = 1.0;
  std::vector<int> variables;
  std::string label;

  double operator()(std::span<const double> q, std::span<const double> q2) const;
  std::string describe() const;
};

// exp(-sum_j (q_j - q2_j)^2 / (2 gamma^2))
double eval_gaussian(std::span<const double> q, std::span<const double> q2, double gamma);

// exp(-gamma^2 sum_j (q_j - q2_j)^2 / (q_j + q2_j)), empty bins (0/0) contribute 0.
double eval_chi2(std::span<const double> q, std::span<const double> q2, double gamma);

/// Columns of `points` selected by `k.variables` (all columns when empty).
Points select_variables(const Points& points, const KernelFunc& k);

/// Gram matrix over the rows of `points`. Upper triangle is computed in
/// parallel and mirrored, so the result is exactly symmetric.
Eigen::MatrixXd build_gram(const Points& points, const KernelFunc& k);

/// Single-threaded reference for build_gram. Same entries, bit for bit.
Eigen::MatrixXd build_gram_serial(const Points& points, const KernelFunc& k);

/// Cross Gram matrix, entry (i, j) = k(rows_i, cols_j).
Eigen::MatrixXd build_cross_gram(const Points& rows, const Points& cols, const KernelFunc& k);
Eigen::MatrixXd build_cross_gram_serial(const Points& rows, const Points& cols,
                                        const KernelFunc& k);

/**
 * Truncated eigen-factorization K ~= G G^T with G = V diag(sqrt_values).
 *
 * Only eigenvalues above jitter_tol * max eigenvalue are kept.
 */
struct GramFactor {
  Eigen::MatrixXd vectors;      // N x r, orthonormal columns
  Eigen::VectorXd sqrt_values;  // r, strictly positive
  Eigen::Index rank() const { return sqrt_values.size(); }
  Eigen::MatrixXd g() const;
};

inline constexpr double kDefaultJitterTol = 1e-10;

GramFactor factorize(const Eigen::MatrixXd& gram, double jitter_tol = kDefaultJitterTol);

/// D^{-1/2} K D^{-1/2} with D = diag(K).
Eigen::MatrixXd normalize_gram(const Eigen::MatrixXd& gram);

struct GramOptions {
  bool normalize = true;
  double jitter_tol = kDefaultJitterTol;
};

/// The kernel bank for one training set: matrices, factors and metadata.
struct GramSet {
  std::vector<KernelFunc> kernels;
  std::vector<Eigen::MatrixXd> mats;
  std::vector<GramFactor> factors;
  bool normalized = false;

  std::size_t size() const { return mats.size(); }
  Eigen::Index samples() const { return mats.empty() ? 0 : mats.front().rows(); }
  Eigen::Index total_rank() const;
};

/// Validates, optionally normalizes, and factorizes externally supplied Gram
/// matrices. Kernels are factorized in parallel.
GramSet make_gram_set(std::vector<Eigen::MatrixXd> mats, std::vector<KernelFunc> kernels,
                      const GramOptions& opts = {});

GramSet build_gram_set(const Points& points, const std::vector<KernelFunc>& kernels,
                       const GramOptions& opts = {});

/// Test-versus-train cross Grams for every kernel in the bank.
std::vector<Eigen::MatrixXd> build_cross_grams(const Points& test, const Points& train,
                                               const std::vector<KernelFunc>& kernels);

// Binary persistence: "MKLG", version, M, N, then per kernel a metadata
// record followed by the row-major lower triangle in float64.
inline constexpr std::uint32_t kGramFormatVersion = 1;

void write_gram_set(const std::string& path, const GramSet& grams);
GramSet read_gram_set(const std::string& path, const GramOptions& opts = {});

/// One `kernel_XXX.csv` per kernel plus `kernels.csv` with the metadata.
void export_gram_csv(const std::string& dir, const GramSet& grams);
GramSet import_gram_csv(const std::string& dir, const GramOptions& opts = {});

/// Dispatches on the path: directories are read as CSV exports, files as binary.
GramSet load_grams(const std::string& path, const GramOptions& opts = {});

}  // namespace enmkl
