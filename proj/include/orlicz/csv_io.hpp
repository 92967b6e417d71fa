#pragma once

#include <string>
#include <vector>

namespace orlicz {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws DataError when absent
};

// Header row required; comma separated; '.' decimal point.
CsvTable read_csv(const std::string& path);

// 15 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double v);

std::string to_csv(const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

// Writes to a temporary sibling and renames it over `path`.
void write_text_atomic(const std::string& path, const std::string& content);
void write_csv_atomic(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace orlicz
