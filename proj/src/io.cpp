#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hessavg/io.hpp"

namespace hessavg::io {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const fs::path& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": bad number '" + s + "'");
  }
}

// Non-comment, non-empty lines.
std::vector<std::string> data_lines(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    lines.push_back(line);
  }
  return lines;
}

int to_label(double v, const fs::path& path) {
  if (v == 1.0) return 1;
  if (v == -1.0) return -1;
  throw IoError(path.string() + ": labels must be +1 or -1");
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const std::string& buf, std::size_t& off, const fs::path& path) {
  if (off + 8 > buf.size()) throw IoError(path.string() + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[off + i])) << (8 * i);
  off += 8;
  return v;
}

constexpr std::string_view kMagic = "HAVG1";

}  // namespace

void write_dataset_csv(const fs::path& path, const Dataset& data) {
  data.validate();
  std::string out = std::string(kCsvVersionLine) + "\n";
  out += std::to_string(data.n()) + "," + std::to_string(data.d()) + "\n";
  for (Eigen::Index i = 0; i < data.A.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.A.cols(); ++j) {
      if (j) out += ',';
      out += format_double(data.A(i, j));
    }
    out += '\n';
  }
  for (std::size_t i = 0; i < data.b.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(data.b[i]);
  }
  out += '\n';
  write_text(path, out);
}

Dataset read_dataset_csv(const fs::path& path) {
  const auto lines = data_lines(path);
  if (lines.empty()) throw IoError(path.string() + ": empty dataset file");
  const auto head = split(lines[0], ',');
  if (head.size() != 2) throw IoError(path.string() + ": first line must be 'n,d'");
  const double nd = parse_double(head[0], path), dd = parse_double(head[1], path);
  if (nd < 1 || dd < 1 || nd != std::floor(nd) || dd != std::floor(dd))
    throw IoError(path.string() + ": bad dimensions");
  const auto n = static_cast<std::size_t>(nd), d = static_cast<std::size_t>(dd);
  if (lines.size() != n + 2) throw IoError(path.string() + ": expected n + 2 data lines");

  Dataset data;
  data.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    const auto cells = split(lines[i + 1], ',');
    if (cells.size() != d) throw IoError(path.string() + ": row " + std::to_string(i) + " has the wrong width");
    for (std::size_t j = 0; j < d; ++j)
      data.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(cells[j], path);
  }
  const auto labels = split(lines[n + 1], ',');
  if (labels.size() != n) throw IoError(path.string() + ": label row has the wrong width");
  for (const auto& s : labels) data.b.push_back(to_label(parse_double(s, path), path));
  try {
    data.validate();
  } catch (const ContractViolation& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return data;
}

void write_dataset_binary(const fs::path& path, const Dataset& data) {
  data.validate();
  std::string buf(kMagic);
  put_u64(buf, data.n());
  put_u64(buf, data.d());
  for (Eigen::Index i = 0; i < data.A.rows(); ++i)
    for (Eigen::Index j = 0; j < data.A.cols(); ++j) put_u64(buf, std::bit_cast<std::uint64_t>(data.A(i, j)));
  for (int b : data.b) put_u64(buf, std::bit_cast<std::uint64_t>(static_cast<double>(b)));
  write_text(path, buf);
}

Dataset read_dataset_binary(const fs::path& path) {
  const std::string buf = slurp(path);
  if (buf.compare(0, kMagic.size(), kMagic) != 0) throw IoError(path.string() + ": not a HAVG1 file");
  std::size_t off = kMagic.size();
  const auto n = get_u64(buf, off, path), d = get_u64(buf, off, path);
  if (n == 0 || d == 0 || (buf.size() - off) / 8 != n * d + n || (buf.size() - off) % 8 != 0)
    throw IoError(path.string() + ": size does not match header");
  Dataset data;
  data.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < d; ++j)
      data.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::bit_cast<double>(get_u64(buf, off, path));
  for (std::uint64_t i = 0; i < n; ++i) data.b.push_back(to_label(std::bit_cast<double>(get_u64(buf, off, path)), path));
  try {
    data.validate();
  } catch (const ContractViolation& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return data;
}

void write_quadratic_json(const fs::path& path, const QuadraticTest& q) {
  json j;
  j["kind"] = "quadratic";
  j["Q"] = json::array();
  for (Eigen::Index r = 0; r < q.Q().rows(); ++r) {
    std::vector<double> row(q.Q().row(r).begin(), q.Q().row(r).end());
    j["Q"].push_back(row);
  }
  j["c"] = std::vector<double>(q.c().begin(), q.c().end());
  write_text(path, j.dump(2) + "\n");
}

QuadraticTest read_quadratic_json(const fs::path& path) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (j.value("kind", "") != "quadratic") throw IoError(path.string() + ": expected kind 'quadratic'");
  try {
    const auto rows = j.at("Q").get<std::vector<std::vector<double>>>();
    const auto c = j.at("c").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(c.size());
    if (d == 0 || static_cast<Eigen::Index>(rows.size()) != d) throw IoError(path.string() + ": Q and c disagree");
    Matrix Q(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      if (static_cast<Eigen::Index>(rows[r].size()) != d) throw IoError(path.string() + ": Q is not square");
      for (Eigen::Index k = 0; k < d; ++k) Q(r, k) = rows[r][k];
    }
    return QuadraticTest(Q, Eigen::Map<const Vector>(c.data(), d));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::unique_ptr<Objective> load_objective(const fs::path& path, double reg_nu) {
  const auto ext = path.extension().string();
  if (ext == ".json") return std::make_unique<QuadraticTest>(read_quadratic_json(path));
  if (ext == ".bin") return std::make_unique<RegularizedLogistic>(read_dataset_binary(path), reg_nu);
  if (ext == ".csv") return std::make_unique<RegularizedLogistic>(read_dataset_csv(path), reg_nu);
  throw IoError(path.string() + ": unknown data extension (want .csv, .bin or .json)");
}

void write_gen_report(const fs::path& path, const DataGenConfig& config, const GenReport& report) {
  json j;
  j["n"] = config.n;
  j["d"] = config.d;
  j["coherence_mode"] = std::string(to_string(config.coherence_mode));
  j["kappa_A"] = config.kappa_A;
  j["reg_nu"] = config.reg_nu;
  j["seed"] = config.seed;
  j["measured_coherence"] = report.measured_coherence;
  j["measured_condition"] = report.measured_condition;
  j["x_true"] = std::vector<double>(report.x_true.begin(), report.x_true.end());
  write_text(path, j.dump(2) + "\n");
}

void write_trace_csv(const fs::path& path, const std::vector<IterationRecord>& records) {
  std::string out = std::string(kCsvVersionLine) + "\n";
  out += "t,f,grad_norm,hstar_error,stepsize,skipped,backtracks\n";
  for (const auto& r : records) {
    out += std::to_string(r.t) + "," + format_double(r.f_value) + "," + format_double(r.grad_norm) + "," +
           format_double(r.hstar_error) + "," + format_double(r.stepsize) + "," + (r.skipped ? "1" : "0") + "," +
           std::to_string(r.backtracks) + "\n";
  }
  write_text(path, out);
}

std::vector<IterationRecord> read_trace_csv(const fs::path& path) {
  const auto lines = data_lines(path);
  if (lines.empty() || lines[0].rfind("t,", 0) != 0) throw IoError(path.string() + ": missing trace header");
  std::vector<IterationRecord> recs;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto c = split(lines[i], ',');
    if (c.size() != 7) throw IoError(path.string() + ": trace row " + std::to_string(i) + " needs 7 columns");
    IterationRecord r;
    r.t = static_cast<int>(parse_double(c[0], path));
    r.f_value = parse_double(c[1], path);
    r.grad_norm = parse_double(c[2], path);
    r.hstar_error = parse_double(c[3], path);
    r.stepsize = parse_double(c[4], path);
    r.skipped = parse_double(c[5], path) != 0.0;
    r.backtracks = static_cast<int>(parse_double(c[6], path));
    recs.push_back(r);
  }
  return recs;
}

}  // namespace hessavg::io
