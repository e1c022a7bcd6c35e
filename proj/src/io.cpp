#include "gasg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gasg::io {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing '" + path + "'");
}

bool skip_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::parse, path + ":" + std::to_string(line_no) + ": " + what);
}

template <typename T>
T parse_number(const std::string& token, const std::string& path, std::size_t line_no) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && token[0] == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) parse_fail(path, line_no, "bad number '" + token + "'");
  return value;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  if (sep == ',') {
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find(',');
      out.push_back(trim(rest.substr(0, pos)));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
  } else {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
  }
  return out;
}

struct Entry {
  Index col;
  Index row;
  double value;
};

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Eigen::MatrixXd read_matrix(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<double> row;
    for (const std::string& tok : split(line, ',')) row.push_back(parse_number<double>(tok, path, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) parse_fail(path, line_no, "ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::parse, path + ": empty matrix");
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
  finish(out, path);
}

Dataset read_dataset(const std::string& path, const std::optional<std::string>& mask_path,
                     Index ambient_dim) {
  std::optional<std::set<std::pair<Index, Index>>> mask;
  if (mask_path) {
    std::ifstream in = open_in(*mask_path);
    mask.emplace();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      const auto tok = split(line, ' ');
      if (tok.size() != 2) parse_fail(*mask_path, line_no, "expected `col row`");
      mask->emplace(parse_number<Index>(tok[0], *mask_path, line_no),
                    parse_number<Index>(tok[1], *mask_path, line_no));
    }
  }

  std::vector<Entry> entries;
  Index rows = 0, cols = 0;
  {
    std::ifstream in = open_in(path);
    std::string line;
    std::size_t line_no = 0;
    std::optional<bool> dense;
    Index dense_row = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (skip_line(line)) continue;
      if (!dense) dense = line.find(',') != std::string::npos;
      if (*dense) {
        const auto tok = split(line, ',');
        if (dense_row > 0 && static_cast<Index>(tok.size()) != cols) parse_fail(path, line_no, "ragged row");
        cols = static_cast<Index>(tok.size());
        for (Index j = 0; j < cols; ++j) {
          entries.push_back({j, dense_row, parse_number<double>(tok[static_cast<std::size_t>(j)], path, line_no)});
        }
        rows = ++dense_row;
      } else {
        const auto tok = split(line, ' ');
        if (tok.size() != 3) parse_fail(path, line_no, "expected `col row value`");
        const Entry e{parse_number<Index>(tok[0], path, line_no), parse_number<Index>(tok[1], path, line_no),
                      parse_number<double>(tok[2], path, line_no)};
        if (e.col < 0 || e.row < 0) parse_fail(path, line_no, "negative index");
        rows = std::max(rows, e.row + 1);
        cols = std::max(cols, e.col + 1);
        entries.push_back(e);
      }
    }
  }
  if (ambient_dim > 0) {
    if (ambient_dim < rows) {
      throw Error(ErrorCode::shape_mismatch, path + ": row index beyond the given ambient dimension");
    }
    rows = ambient_dim;
  }
  if (rows == 0) throw Error(ErrorCode::parse, path + ": no observations");

  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  Dataset data;
  data.ambient_dim = rows;
  data.columns.resize(static_cast<std::size_t>(cols));
  std::vector<std::vector<double>> values(static_cast<std::size_t>(cols));
  for (Index j = 0; j < cols; ++j) data.columns[static_cast<std::size_t>(j)].column_id = j;
  for (const Entry& e : entries) {
    if (mask && !mask->count({e.col, e.row})) continue;
    auto& col = data.columns[static_cast<std::size_t>(e.col)];
    if (!col.indices.empty() && col.indices.back() == e.row) {
      throw Error(ErrorCode::parse, path + ": duplicate entry for column " + std::to_string(e.col) +
                                        " row " + std::to_string(e.row));
    }
    col.indices.push_back(e.row);
    values[static_cast<std::size_t>(e.col)].push_back(e.value);
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    data.columns[j].values = Eigen::Map<const Eigen::VectorXd>(values[j].data(), static_cast<Index>(values[j].size()));
  }
  return data;
}

void write_observations(const std::string& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  for (const ObservedVector& c : data.columns) {
    for (std::size_t i = 0; i < c.indices.size(); ++i) {
      out << c.column_id << ' ' << c.indices[i] << ' ' << format_real(c.values(static_cast<Index>(i))) << '\n';
    }
  }
  finish(out, path);
}

void write_mask(const std::string& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  for (const ObservedVector& c : data.columns) {
    for (Index row : c.indices) out << c.column_id << ' ' << row << '\n';
  }
  finish(out, path);
}

Subspace read_basis(const std::string& path) { return Subspace(read_matrix(path)); }

void write_basis(const std::string& path, const Subspace& s) { write_matrix(path, s.basis()); }

std::vector<Subspace> read_bases(const std::string& path, Index rank) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (rank < 1 || m.cols() % rank != 0) {
    throw Error(ErrorCode::shape_mismatch, path + ": column count is not a multiple of the rank");
  }
  std::vector<Subspace> out;
  for (Index c = 0; c < m.cols(); c += rank) out.emplace_back(m.middleCols(c, rank));
  return out;
}

void write_bases(const std::string& path, std::span<const Subspace> bases) {
  if (bases.empty()) throw Error(ErrorCode::invalid_shape, "no bases to write");
  Index cols = 0;
  for (const Subspace& s : bases) cols += s.rank();
  Eigen::MatrixXd m(bases.front().ambient_dim(), cols);
  Index at = 0;
  for (const Subspace& s : bases) {
    if (s.ambient_dim() != m.rows()) throw Error(ErrorCode::shape_mismatch, "bases differ in ambient dimension");
    m.middleCols(at, s.rank()) = s.basis();
    at += s.rank();
  }
  write_matrix(path, m);
}

std::vector<int> read_labels(const std::string& path) {
  std::ifstream in = open_in(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    labels.push_back(parse_number<int>(trim(line), path, line_no));
  }
  return labels;
}

void write_labels(const std::string& path, std::span<const int> labels) {
  std::ofstream out = open_out(path);
  for (int l : labels) out << l << '\n';
  finish(out, path);
}

RunTrace read_trace(const std::string& path) {
  std::ifstream in = open_in(path);
  RunTrace trace;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    if (!header) {
      if (trim(line) != kTraceHeader) parse_fail(path, line_no, "missing trace header");
      header = true;
      continue;
    }
    const auto tok = split(line, ',');
    if (tok.size() != 8) parse_fail(path, line_no, "expected 8 fields");
    TraceRecord r;
    r.iteration = parse_number<long>(tok[0], path, line_no);
    r.column_id = parse_number<Index>(tok[1], path, line_no);
    r.eta = parse_number<double>(tok[2], path, line_no);
    r.mu = parse_number<double>(tok[3], path, line_no);
    r.level = parse_number<int>(tok[4], path, line_no);
    r.residual_norm = parse_number<double>(tok[5], path, line_no);
    if (!tok[6].empty()) r.angle = parse_number<double>(tok[6], path, line_no);
    r.skipped = parse_number<int>(tok[7], path, line_no) != 0;
    trace.records.push_back(r);
  }
  if (!header) throw Error(ErrorCode::parse, path + ": missing trace header");
  return trace;
}

void write_trace(const std::string& path, const RunTrace& trace) {
  std::ofstream out = open_out(path);
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.iteration << ',' << r.column_id << ',' << format_real(r.eta) << ',' << format_real(r.mu) << ','
        << r.level << ',' << format_real(r.residual_norm) << ',' << (r.angle ? format_real(*r.angle) : "")
        << ',' << (r.skipped ? 1 : 0) << '\n';
  }
  finish(out, path);
}

std::string indexed_path(const std::string& path, std::size_t index) {
  const std::string id = std::to_string(index);
  if (const auto brace = path.find("{}"); brace != std::string::npos) {
    return path.substr(0, brace) + id + path.substr(brace + 2);
  }
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + "." + id;
  return path.substr(0, dot) + "." + id + path.substr(dot);
}

}  // namespace gasg::io
