#include "streamfilter/table.hpp"

#include <algorithm>
#include <ostream>

#include "streamfilter/errors.hpp"
#include "streamfilter/format.hpp"

namespace streamfilter {

Table::Table(std::string name, std::vector<std::string> columns) : name_(std::move(name)), columns_(std::move(columns)) {
  require(!columns_.empty(), "Table: need at least one column");
}

void Table::add_row(std::vector<std::string> row) {
  require(row.size() == columns_.size(), "Table::add_row: row width does not match header");
  rows_.push_back(std::move(row));
}

std::vector<std::string> Table::column(const std::string& name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  require(it != columns_.end(), "Table::column: no such column");
  const auto j = static_cast<std::size_t>(it - columns_.begin());
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[j]);
  return out;
}

void Table::write(std::ostream& os) const {
  for (const auto& [k, v] : notes_) os << "# " << k << '=' << v << '\n';
  for (std::size_t j = 0; j < columns_.size(); ++j) os << (j ? "," : "") << columns_[j];
  os << '\n';
  for (const auto& r : rows_) {
    for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << r[j];
    os << '\n';
  }
}

std::string cell(double x) { return format_real(x); }
std::string cell(int x) { return std::to_string(x); }
std::string cell(long x) { return std::to_string(x); }
std::string cell(long long x) { return std::to_string(x); }
std::string cell(unsigned long x) { return std::to_string(x); }
std::string cell(unsigned long long x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "1" : "0"; }

}  // namespace streamfilter
