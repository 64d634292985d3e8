#include "rosets/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace rosets::io {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto first = cell.find_first_not_of(" \t");
    const auto last = cell.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (!cell.empty() && *begin == '+') ++begin;
  const auto res = std::from_chars(begin, end, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ParseError(path + ":" + std::to_string(line) + ": '" + cell + "' is not a finite number");
  }
  return v;
}

Table read_table(const std::string& path, bool has_header) {
  std::istringstream in(read_text(path));
  Table t;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells = split(line);
    if (has_header && t.header.empty()) {
      t.header = std::move(cells);
      width = t.header.size();
      continue;
    }
    if (width == 0) width = cells.size();
    if (cells.size() != width) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                       " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, path, lineno));
    t.rows.push_back(std::move(row));
  }
  if (has_header && t.header.empty()) throw ParseError(path + ":1: missing header row");
  if (t.rows.empty()) throw ParseError(path + ": no data rows");
  return t;
}

Matrix to_matrix(const Table& t, std::size_t cols) {
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[i][j];
    }
  }
  return m;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  const Table t = read_table(path, true);
  if (t.header.size() < 2) throw ParseError(path + ":1: need at least one feature column and y");
  const std::size_t d = t.header.size() - 1;
  Matrix x = to_matrix(t, d);
  Vector y(x.rows());
  for (std::size_t i = 0; i < t.rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = t.rows[i][d];
  return Dataset(std::move(x), std::move(y));
}

std::string dataset_to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t j = 0; j < data.dim(); ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "y\n";
  const Matrix& x = data.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) out += format_double(x(i, j)) + ",";
    out += format_double(data.labels()[i]) + "\n";
  }
  return out;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  write_text(path, dataset_to_csv(data));
}

QueryBatch read_queries_csv(const std::string& path) {
  const Table t = read_table(path, true);
  std::size_t d = t.header.size();
  if (d >= 2 && t.header.back() == "y") --d;
  return QueryBatch(to_matrix(t, d));
}

Matrix read_matrix_csv(const std::string& path) {
  const Table t = read_table(path, false);
  return to_matrix(t, t.rows.front().size());
}

Json vector_to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ParseError("'" + what + "' must be an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ParseError("'" + what + "' entry " + std::to_string(i) + " is not a number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json box_to_json(const std::string& method, const BoxUncertaintySet& box, const Json& diagnostics) {
  Json j;
  j["method"] = method;
  j["lower"] = vector_to_json(box.lower());
  j["upper"] = vector_to_json(box.upper());
  j["diagnostics"] = diagnostics;
  return j;
}

BoxUncertaintySet box_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("lower") || !j.contains("upper")) {
    throw ParseError("box JSON needs 'lower' and 'upper' arrays");
  }
  return BoxUncertaintySet(vector_from_json(j["lower"], "lower"), vector_from_json(j["upper"], "upper"));
}

Json solution_to_json(const RobustSolution& sol) {
  Json j;
  j["weights"] = vector_to_json(sol.weights);
  j["objective"] = sol.objective;
  j["status"] = to_string(sol.status);
  j["kkt_residual"] = sol.kkt_residual;
  j["iterations"] = sol.iterations;
  if (!sol.message.empty()) j["message"] = sol.message;
  return j;
}

namespace {

Json config_to_json(const PipelineConfig& c) {
  Json j;
  j["method"] = to_string(c.method);
  j["kind"] = to_string(c.spec.kind);
  j["d"] = c.spec.d;
  j["true_coefficients"] = vector_to_json(c.spec.true_coefficients);
  j["intercept"] = c.spec.intercept;
  j["noise_scale"] = c.spec.noise_scale;
  j["offset"] = c.spec.offset;
  j["data_seed"] = c.spec.seed;
  j["n"] = c.n;
  j["m"] = c.m;
  j["delta"] = c.delta;
  j["delta_e"] = c.delta_e;
  j["delta_p"] = c.delta_p;
  j["delta_q"] = c.delta_q;
  j["eps"] = c.eps;
  j["norm_bound"] = c.norm_bound;
  j["loss_range"] = c.loss_range;
  j["target_miss"] = c.target_miss;
  j["min_return"] = c.min_return;
  j["long_only"] = c.long_only;
  j["rademacher"] = c.rademacher == RademacherMode::analytic ? "analytic" : "monte_carlo";
  j["threshold_mode"] = c.threshold_mode == ThresholdMode::rademacher ? "rademacher" : "population";
  j["oracle_samples"] = c.oracle_samples;
  return j;
}

}  // namespace

Json report_to_json(const GuaranteeReport& r) {
  Json j;
  j["theorem_id"] = r.theorem_id;
  j["method"] = r.method;
  j["bound"] = r.bound;
  j["raw_bound"] = r.raw_bound;
  j["bound_min"] = r.bound_min;
  j["bound_max"] = r.bound_max;
  j["empirical"] = r.empirical;
  j["coverage"] = r.coverage;
  j["ci"] = {r.wilson_ci.lo, r.wilson_ci.hi};
  j["trials"] = {{"outer", r.outer_trials}, {"inner", r.inner_trials}};
  j["feasible_events"] = r.feasible_events;
  j["infeasible_solves"] = r.infeasible_solves;
  j["norm_active_trials"] = r.norm_active_trials;
  j["per_trial_shortfalls"] = r.per_trial_shortfalls;
  j["vacuous"] = r.vacuous;
  j["pass"] = r.pass;
  Json plugins = Json::object();
  for (const auto& [k, v] : r.plugins) plugins[k] = v;
  j["plugins"] = plugins;
  if (!r.eps_sweep.empty()) {
    Json sweep = Json::array();
    for (const auto& [eps, b] : r.eps_sweep) sweep.push_back({{"eps", eps}, {"bound", b}});
    j["eps_sweep"] = sweep;
  }
  j["config"] = config_to_json(r.config);
  return j;
}

}  // namespace rosets::io
