#include "tmfa/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace tmfa {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, delim)) cells.push_back(cell);
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& cell, double& out) {
  const std::string s = strip(cell);
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

CsvData parse_csv_text(const std::string& text, const CsvOptions& options,
                       const std::string& origin) {
  std::vector<std::vector<std::string>> rows;
  {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (strip(line).empty()) continue;
      rows.push_back(split_line(line, options.delimiter));
    }
  }
  if (rows.empty()) throw std::invalid_argument(origin + ": no data rows");

  const std::size_t width = rows[0].size();
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].size() != width)
      throw std::invalid_argument(origin + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " cells, expected " +
                                  std::to_string(width));

  bool has_header = false;
  if (options.header == CsvOptions::Header::yes) {
    has_header = true;
  } else if (options.header == CsvOptions::Header::autodetect) {
    for (const auto& cell : rows[0]) {
      double ignored;
      if (!parse_double(cell, ignored)) {
        has_header = true;
        break;
      }
    }
  }

  CsvData out;
  out.had_header = has_header;
  std::vector<std::string> names(width);
  if (has_header)
    for (std::size_t c = 0; c < width; ++c) names[c] = strip(rows[0][c]);
  else
    for (std::size_t c = 0; c < width; ++c) names[c] = "col" + std::to_string(c + 1);

  int label_idx = -1;
  if (!options.label_column.empty()) {
    for (std::size_t c = 0; c < width; ++c)
      if (names[c] == options.label_column) label_idx = static_cast<int>(c);
    if (label_idx < 0 && !has_header) {
      // without a header the label column may be given as a 1-based index
      double as_num;
      if (parse_double(options.label_column, as_num) && as_num >= 1 &&
          as_num <= static_cast<double>(width))
        label_idx = static_cast<int>(as_num) - 1;
    }
    if (label_idx < 0)
      throw std::invalid_argument(origin + ": label column '" + options.label_column +
                                  "' not found");
    out.label_column = names[label_idx];
  }

  const std::size_t first_data = has_header ? 1 : 0;
  const std::size_t n = rows.size() - first_data;
  if (n == 0) throw std::invalid_argument(origin + ": header only, no data rows");
  const std::size_t p = width - (label_idx >= 0 ? 1 : 0);
  if (p == 0) throw std::invalid_argument(origin + ": no numeric columns");

  out.data.values.resize(n, p);
  out.data.column_names.clear();
  for (std::size_t c = 0; c < width; ++c)
    if (static_cast<int>(c) != label_idx) out.data.column_names.push_back(names[c]);
  if (label_idx >= 0) out.labels.resize(n);

  for (std::size_t r = 0; r < n; ++r) {
    const auto& cells = rows[r + first_data];
    std::size_t j = 0;
    for (std::size_t c = 0; c < width; ++c) {
      if (static_cast<int>(c) == label_idx) {
        out.labels[r] = strip(cells[c]);
        continue;
      }
      double v;
      if (!parse_double(cells[c], v))
        throw std::invalid_argument(origin + ": row " + std::to_string(r + first_data + 1) +
                                    ", column " + std::to_string(c + 1) + " ('" +
                                    strip(cells[c]) + "') is not numeric");
      out.data.values(r, j++) = v;
    }
  }
  out.data.validate();
  return out;
}

CsvData read_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open CSV file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_csv_text(buffer.str(), options, path);
}

void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& column_names,
               const std::vector<std::string>& extra_column, const std::string& extra_name) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);

  if (!column_names.empty()) {
    for (std::size_t c = 0; c < column_names.size(); ++c) {
      if (c) out << ',';
      out << column_names[c];
    }
    if (!extra_column.empty()) out << ',' << (extra_name.empty() ? "label" : extra_name);
    out << '\n';
  }
  for (int r = 0; r < values.rows(); ++r) {
    for (int c = 0; c < values.cols(); ++c) {
      if (c) out << ',';
      out << format_double(values(r, c));
    }
    if (!extra_column.empty()) out << ',' << extra_column[r];
    out << '\n';
  }
}

std::vector<int> encode_labels(const std::vector<std::string>& labels,
                               std::vector<std::string>& classes_out) {
  std::map<std::string, int> index;
  for (const auto& s : labels) index.emplace(s, 0);
  classes_out.clear();
  int next = 0;
  for (auto& [key, value] : index) {
    value = next++;
    classes_out.push_back(key);
  }
  std::vector<int> encoded(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) encoded[i] = index[labels[i]];
  return encoded;
}

}  // namespace tmfa
