#include <algorithm>
#include <cmath>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "enmkl/harness.hpp"
#include "parse.hpp"

namespace fs = std::filesystem;

namespace enmkl {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  // shortest text that reads back to the same double
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write '" + path + "'");
  return os;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

}  // namespace

void write_results_csv(const std::string& path, const SweepResult& result) {
  auto os = open_out(path);
  os << "lambda,C,replicate,test_accuracy,validation_accuracy,active_kernels,objective,"
        "iterations,converged\n";
  for (const auto& r : result.rows)
    os << num(r.lambda) << ',' << num(r.C) << ',' << r.replicate << ',' << num(r.test_accuracy)
       << ',' << num(r.validation_accuracy) << ',' << r.active_kernels << ','
       << num(r.objective) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
}

void write_timings_csv(const std::string& path, const SweepResult& result) {
  auto os = open_out(path);
  os << "lambda,C,replicate,wall_time\n";
  for (const auto& r : result.rows)
    os << num(r.lambda) << ',' << num(r.C) << ',' << r.replicate << ',' << num(r.wall_time)
       << '\n';
}

void write_summary_csv(const std::string& path, const SweepResult& result) {
  auto os = open_out(path);
  os << "lambda,selected_C,mean_accuracy,std_accuracy,mean_active_kernels,std_active_kernels,"
        "replicates,best\n";
  for (const auto& s : result.summary)
    os << num(s.lambda) << ',' << num(s.selected_c) << ',' << num(s.mean_accuracy) << ','
       << num(s.std_accuracy) << ',' << num(s.mean_active) << ',' << num(s.std_active) << ','
       << s.count << ',' << (s.lambda == result.best_lambda ? 1 : 0) << '\n';
}

void write_sweep_meta(const std::string& path, const SweepResult& result) {
  nlohmann::json j = {{"select_c", select_c_name(result.select_c)},
                      {"fixed_c", result.fixed_c},
                      {"kernels", result.kernels},
                      {"best_lambda", result.best_lambda}};
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

SweepResult read_sweep(const std::string& dir) {
  SweepResult result;
  const fs::path meta = fs::path(dir) / "sweep.json";
  if (fs::exists(meta)) {
    std::ifstream is(meta);
    try {
      const auto j = nlohmann::json::parse(is);
      result.select_c = select_c_from_name(j.value("select_c", std::string("best-test")));
      result.fixed_c = j.value("fixed_c", 0.0);
      result.kernels = j.value("kernels", std::size_t{0});
    } catch (const std::exception& e) {
      throw DataError("malformed sweep.json: " + std::string(e.what()));
    }
  }

  const fs::path csv = fs::path(dir) / "results.csv";
  std::ifstream is(csv);
  if (!is) throw DataError("cannot open '" + csv.string() + "'");
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 9) throw DataError("results.csv: expected 9 columns");
    try {
      SweepRow r;
      r.lambda = detail::parse_double(f[0]);
      r.C = detail::parse_double(f[1]);
      r.replicate = std::stoi(f[2]);
      r.test_accuracy = detail::parse_double(f[3]);
      r.validation_accuracy = detail::parse_double(f[4]);
      r.active_kernels = std::stoul(f[5]);
      r.objective = detail::parse_double(f[6]);
      r.iterations = std::stoi(f[7]);
      r.converged = f[8] == "1";
      result.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw DataError("results.csv: malformed row '" + line + "'");
    }
  }
  if (result.rows.empty()) throw DataError("results.csv has no rows");
  summarize(result);
  return result;
}

namespace {

std::string star_path(double outer, double inner) {
  std::ostringstream os;
  for (int i = 0; i < 10; ++i) {
    const double r = i % 2 ? inner : outer;
    const double a = -M_PI / 2.0 + i * M_PI / 5.0;
    os << (i ? " L " : "M ") << num(r * std::cos(a)) << ' ' << num(r * std::sin(a));
  }
  os << " Z";
  return os.str();
}

struct Series {
  std::vector<double> x, mean, spread;
};

std::string plot_svg(const SweepResult& result, const PlotFrame& f, const Series& s,
                     const std::string& title, const std::string& y_label, double y_lo,
                     double y_hi, const std::string& color) {
  const double plot_h = f.height - f.top - f.bottom;
  auto y_of = [&](double v) {
    const double span = y_hi > y_lo ? y_hi - y_lo : 1.0;
    return f.top + plot_h * (1.0 - (v - y_lo) / span);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.width) << "\" height=\""
     << num(f.height) << "\" viewBox=\"0 0 " << num(f.width) << ' ' << num(f.height) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(f.width / 2) << "\" y=\"20\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";

  // axes
  const double x0 = f.x_of(0.0), x1 = f.x_of(1.0), yb = f.height - f.bottom;
  os << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(yb) << "\" x2=\"" << num(x1) << "\" y2=\""
     << num(yb) << "\"/>\n";
  os << "<line x1=\"" << num(x0) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(x0)
     << "\" y2=\"" << num(yb) << "\"/>\n";
  os << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double l = i / 5.0;
    os << "<text x=\"" << num(f.x_of(l)) << "\" y=\"" << num(yb + 16)
       << "\" text-anchor=\"middle\">" << num(l) << "</text>\n";
    const double v = y_lo + (y_hi - y_lo) * i / 5.0;
    os << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y_of(v) + 4)
       << "\" text-anchor=\"end\">" << num(std::round(v * 1000.0) / 1000.0) << "</text>\n";
  }
  os << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.height - 10)
     << "\" text-anchor=\"middle\">lambda</text>\n";
  os << "<text transform=\"translate(16," << num(f.top + plot_h / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << y_label << "</text>\n</g>\n";

  // error bars, curve, points
  os << "<g class=\"errorbars\" stroke=\"" << color << "\" stroke-opacity=\"0.5\">\n";
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!std::isfinite(s.mean[i]) || s.spread[i] <= 0.0) continue;
    os << "<line x1=\"" << num(f.x_of(s.x[i])) << "\" y1=\"" << num(y_of(s.mean[i] - s.spread[i]))
       << "\" x2=\"" << num(f.x_of(s.x[i])) << "\" y2=\"" << num(y_of(s.mean[i] + s.spread[i]))
       << "\"/>\n";
  }
  os << "</g>\n<polyline class=\"curve\" fill=\"none\" stroke=\"" << color
     << "\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < s.x.size(); ++i)
    if (std::isfinite(s.mean[i]))
      os << (i ? " " : "") << num(f.x_of(s.x[i])) << ',' << num(y_of(s.mean[i]));
  os << "\"/>\n";
  for (std::size_t i = 0; i < s.x.size(); ++i)
    if (std::isfinite(s.mean[i]))
      os << "<circle class=\"point\" cx=\"" << num(f.x_of(s.x[i])) << "\" cy=\""
         << num(y_of(s.mean[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";

  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.x[i] != result.best_lambda || !std::isfinite(s.mean[i])) continue;
    os << "<path class=\"star\" data-lambda=\"" << num(s.x[i]) << "\" transform=\"translate("
       << num(f.x_of(s.x[i])) << ',' << num(y_of(s.mean[i])) << ")\" d=\"" << star_path(9, 4)
       << "\" fill=\"magenta\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::string accuracy_svg(const SweepResult& result, const PlotFrame& frame) {
  Series s;
  double lo = 1.0, hi = 0.0;
  for (const auto& l : result.summary) {
    s.x.push_back(l.lambda);
    s.mean.push_back(l.mean_accuracy);
    s.spread.push_back(l.std_accuracy);
    if (std::isfinite(l.mean_accuracy)) {
      lo = std::min(lo, l.mean_accuracy - l.std_accuracy);
      hi = std::max(hi, l.mean_accuracy + l.std_accuracy);
    }
  }
  if (hi < lo) lo = 0.0, hi = 1.0;
  const double pad = std::max(0.01, 0.05 * (hi - lo));
  return plot_svg(result, frame, s, "Test accuracy (best C per lambda)", "accuracy",
                  std::max(0.0, lo - pad), std::min(1.0, hi + pad), "#1f77b4");
}

std::string active_kernels_svg(const SweepResult& result, const PlotFrame& frame) {
  Series s;
  double hi = 1.0;
  for (const auto& l : result.summary) {
    s.x.push_back(l.lambda);
    s.mean.push_back(l.mean_active);
    s.spread.push_back(l.std_active);
    if (std::isfinite(l.mean_active)) hi = std::max(hi, l.mean_active + l.std_active);
  }
  return plot_svg(result, frame, s, "Active kernels (best C per lambda)", "active kernels", 0.0,
                  hi * 1.05, "#d62728");
}

void report(const SweepResult& result, const std::string& out_dir) {
  if (result.rows.empty()) throw DataError("nothing to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create '" + out_dir + "': " + ec.message());
  const fs::path dir(out_dir);
  write_results_csv((dir / "results.csv").string(), result);
  if (std::any_of(result.rows.begin(), result.rows.end(),
                  [](const SweepRow& r) { return r.wall_time > 0.0; }))
    write_timings_csv((dir / "timings.csv").string(), result);
  write_summary_csv((dir / "summary.csv").string(), result);
  write_sweep_meta((dir / "sweep.json").string(), result);
  open_out((dir / "accuracy_vs_lambda.svg").string()) << accuracy_svg(result);
  open_out((dir / "active_kernels_vs_lambda.svg").string()) << active_kernels_svg(result);
}

}  // namespace enmkl
