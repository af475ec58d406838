#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gcph::experiments {

using Cell = std::variant<std::string, std::int64_t, double>;

/// Shortest round-trip representation; identical input gives identical bytes.
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  /// Throws std::invalid_argument on a column count mismatch.
  void add_row(std::vector<Cell> row);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace gcph::experiments
