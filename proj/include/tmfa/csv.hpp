#ifndef TMFA_CSV_HPP
#define TMFA_CSV_HPP

#include <optional>
#include <string>
#include <vector>

#include "tmfa/types.hpp"

namespace tmfa {

struct CsvOptions {
  char delimiter = ',';
  enum class Header { autodetect, yes, no } header = Header::autodetect;
  std::string label_column;  // excluded from the numeric matrix when set
};

struct CsvData {
  DataMatrix data;
  bool had_header = false;
  std::vector<std::string> labels;      // raw label strings, when a label column was set
  std::string label_column;
};

// Strict numeric CSV reader: '.' decimal, every non-label cell must parse as
// a double in full. Malformed input raises invalid_argument carrying the
// 1-based row and column of the offending cell.
CsvData read_csv(const std::string& path, const CsvOptions& options = {});
CsvData parse_csv_text(const std::string& text, const CsvOptions& options = {},
                       const std::string& origin = "<memory>");

// Doubles are written with shortest round-trip formatting.
void write_csv(const std::string& path, const Matrix& values,
               const std::vector<std::string>& column_names = {},
               const std::vector<std::string>& extra_column = {},
               const std::string& extra_name = "");

std::string format_double(double v);

// Distinct label strings in sorted order mapped to 0..K-1.
std::vector<int> encode_labels(const std::vector<std::string>& labels,
                               std::vector<std::string>& classes_out);

}  // namespace tmfa

#endif
