#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "lensqed/errors.hpp"
#include "lensqed/experiment.hpp"

namespace lensqed::experiment {

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void ResultTable::validate() const {
  if (columns.empty()) throw DomainError("result table has no columns");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != columns.size())
      throw DomainError("result table row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                        " values for " + std::to_string(columns.size()) + " columns");
    for (std::size_t c = 0; c < columns.size(); ++c)
      if (!std::isfinite(rows[r][c]))
        throw DomainError("non-finite value in result table (row " + std::to_string(r) + ", column " + columns[c] +
                          ")");
  }
}

std::string format_table(const ResultTable& table, const std::string& timestamp) {
  table.validate();
  std::string out;
  for (const auto& [key, value] : table.metadata) out += "# " + key + ": " + value + "\n";
  out += "# timestamp: " + timestamp + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + table.columns[c];
  out += "\n";
  char buf[40];
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.12g", row[c] == 0.0 ? 0.0 : row[c]);
      if (c) out += ",";
      out += buf;
    }
    out += "\n";
  }
  return out;
}

void write_table(const ResultTable& table, const std::string& path) {
  const std::string text = format_table(table, utc_now());
  if (path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    if (std::fflush(stdout) != 0) throw IoError("write to standard output failed");
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

}  // namespace lensqed::experiment
