#include <algorithm>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "enmkl/kernel.hpp"
#include "parse.hpp"

namespace fs = std::filesystem;

namespace enmkl {

static_assert(std::endian::native == std::endian::little,
              "gram files are written in little-endian byte order");

namespace {

constexpr char kMagic[4] = {'M', 'K', 'L', 'G'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("gram file truncated");
  return v;
}

std::string join_vars(const std::vector<int>& vars) {
  std::string s;
  for (std::size_t i = 0; i < vars.size(); ++i) s += (i ? "|" : "") + std::to_string(vars[i]);
  return s;
}

std::vector<int> split_vars(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, '|'))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_gram_set(const std::string& path, const GramSet& grams) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot open '" + path + "' for writing");
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kGramFormatVersion);
  put<std::uint64_t>(os, grams.size());
  put<std::uint64_t>(os, static_cast<std::uint64_t>(grams.samples()));
  for (std::size_t m = 0; m < grams.size(); ++m) {
    const KernelFunc& k = grams.kernels[m];
    put<std::uint32_t>(os, static_cast<std::uint32_t>(k.kind));
    put<double>(os, k.bandwidth);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(k.variables.size()));
    for (int v : k.variables) put<std::int32_t>(os, v);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(k.label.size()));
    os.write(k.label.data(), static_cast<std::streamsize>(k.label.size()));
    const Eigen::MatrixXd& mat = grams.mats[m];
    for (Eigen::Index i = 0; i < mat.rows(); ++i)
      for (Eigen::Index j = 0; j <= i; ++j) put<double>(os, mat(i, j));
  }
  if (!os) throw DataError("write failed for '" + path + "'");
}

GramSet read_gram_set(const std::string& path, const GramOptions& opts) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open gram file '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("'" + path + "' is not a gram file (bad magic)");
  const auto version = get<std::uint32_t>(is);
  if (version != kGramFormatVersion)
    throw DataError("unsupported gram file version " + std::to_string(version));
  const auto m_count = get<std::uint64_t>(is);
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(is));
  if (m_count == 0 || n == 0) throw DataError("gram file declares an empty bank");

  std::vector<KernelFunc> kernels(m_count);
  std::vector<Eigen::MatrixXd> mats(m_count);
  for (std::uint64_t m = 0; m < m_count; ++m) {
    KernelFunc& k = kernels[m];
    const auto kind = get<std::uint32_t>(is);
    if (kind > static_cast<std::uint32_t>(KernelKind::Precomputed))
      throw DataError("gram file: bad kernel kind");
    k.kind = static_cast<KernelKind>(kind);
    k.bandwidth = get<double>(is);
    const auto nv = get<std::uint32_t>(is);
    k.variables.resize(nv);
    for (auto& v : k.variables) v = get<std::int32_t>(is);
    const auto len = get<std::uint32_t>(is);
    k.label.resize(len);
    if (len && !is.read(k.label.data(), len)) throw DataError("gram file truncated");

    Eigen::MatrixXd& mat = mats[m];
    mat.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) mat(i, j) = mat(j, i) = get<double>(is);
  }
  return make_gram_set(std::move(mats), std::move(kernels), opts);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + '"';
}

std::string unquote(const std::string& s) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"') return s;
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    out += s[i];
    if (s[i] == '"' && s[i + 1] == '"') ++i;
  }
  return out;
}

}  // namespace

void export_gram_csv(const std::string& dir, const GramSet& grams) {
  fs::create_directories(dir);
  std::ofstream meta(fs::path(dir) / "kernels.csv");
  if (!meta) throw DataError("cannot write to '" + dir + "'");
  meta << "index,kind,bandwidth,variables,label\n";
  meta << std::setprecision(17);
  for (std::size_t m = 0; m < grams.size(); ++m) {
    const KernelFunc& k = grams.kernels[m];
    meta << m << ',' << kernel_kind_name(k.kind) << ',' << k.bandwidth << ','
         << join_vars(k.variables) << ',' << quote(k.label) << '\n';

    std::ostringstream name;
    name << "kernel_" << std::setw(3) << std::setfill('0') << m << ".csv";
    std::ofstream os(fs::path(dir) / name.str());
    os << std::setprecision(17);
    const Eigen::MatrixXd& mat = grams.mats[m];
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
      for (Eigen::Index j = 0; j < mat.cols(); ++j) os << (j ? "," : "") << mat(i, j);
      os << '\n';
    }
  }
}

namespace {

Eigen::MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& tok : split_csv(line)) {
      try {
        row.push_back(detail::parse_double(tok));
      } catch (const std::exception&) {
        throw DataError("non-numeric entry in '" + path.string() + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd mat(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n)
      throw DataError("'" + path.string() + "' is not a square matrix");
    for (Eigen::Index j = 0; j < n; ++j) mat(i, j) = rows[i][j];
  }
  return mat;
}

}  // namespace

GramSet import_gram_csv(const std::string& dir, const GramOptions& opts) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("kernel_") && name.ends_with(".csv")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no kernel_*.csv files in '" + dir + "'");

  std::vector<KernelFunc> kernels(files.size());
  for (std::size_t m = 0; m < files.size(); ++m) {
    kernels[m].kind = KernelKind::Precomputed;
    kernels[m].label = files[m].stem().string();
  }
  if (std::ifstream meta(fs::path(dir) / "kernels.csv"); meta) {
    std::string line;
    std::getline(meta, line);
    while (std::getline(meta, line)) {
      // label is the last column and may itself contain commas
      std::size_t cut = std::string::npos, from = 0;
      for (int commas = 0; commas < 4; ++commas) {
        cut = line.find(',', from);
        if (cut == std::string::npos) break;
        from = cut + 1;
      }
      if (cut == std::string::npos) throw DataError("malformed kernels.csv row");
      const auto f = split_csv(line.substr(0, cut));
      if (f.size() != 4) throw DataError("malformed kernels.csv row");
      const auto m = static_cast<std::size_t>(std::stoul(f[0]));
      if (m >= kernels.size()) throw DataError("kernels.csv refers to a missing kernel");
      kernels[m].kind = kernel_kind_from_name(f[1]);
      kernels[m].bandwidth = detail::parse_double(f[2]);
      kernels[m].variables = split_vars(f[3]);
      kernels[m].label = unquote(line.substr(cut + 1));
    }
  }

  std::vector<Eigen::MatrixXd> mats;
  for (const auto& f : files) mats.push_back(read_matrix_csv(f));
  return make_gram_set(std::move(mats), std::move(kernels), opts);
}

GramSet load_grams(const std::string& path, const GramOptions& opts) {
  if (fs::is_directory(path)) return import_gram_csv(path, opts);
  return read_gram_set(path, opts);
}

}  // namespace enmkl
