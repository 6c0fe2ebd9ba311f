#include "gllrss/io.hpp"

#include "gllrss/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace gllrss {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(std::size_t line, std::size_t col, const std::string& what) {
  std::ostringstream os;
  os << "CSV parse error at line " << line << ", column " << col << ": " << what;
  throw DataError(os.str());
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc()) throw DataError("cannot format value");
  return std::string(buf, end);
}

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line_no == 1 && line.front() == '#') continue;

    std::vector<double> row;
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      ++col;
      const std::size_t comma = line.find(',', start);
      const std::string_view cell =
          trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                  : comma - start));
      if (cell.empty()) fail(line_no, col, "empty cell");
      double v = 0.0;
      const char* first = cell.data();
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(line_no, col, "not a number: '" + std::string(cell) + "'");
      }
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << "ragged row with " << row.size() << " values, expected " << rows.front().size();
      fail(line_no, row.size(), os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV contains no data rows");

  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    return parse_matrix_csv(buf.str());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_matrix_csv(const Matrix& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

void save_matrix(const Matrix& m, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << format_matrix_csv(m);
  if (!f) throw DataError("write failed for " + path.string());
}

std::filesystem::path edge_list_path(const std::filesystem::path& dense_path) {
  std::filesystem::path p = dense_path;
  p.replace_filename(dense_path.stem().string() + "_edges.csv");
  return p;
}

void save_laplacian(const CglMatrix& l, const std::filesystem::path& dense_path,
                    double tau_edge) {
  save_matrix(l.matrix(), dense_path);
  const auto edges = edge_list_path(dense_path);
  std::ofstream f(edges, std::ios::binary);
  if (!f) throw DataError("cannot write " + edges.string());
  f << "# i,j,weight\n";
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    for (Eigen::Index j = i + 1; j < l.size(); ++j) {
      if (-l(i, j) > tau_edge) f << i << ',' << j << ',' << format_double(-l(i, j)) << '\n';
    }
  }
}

}  // namespace gllrss
