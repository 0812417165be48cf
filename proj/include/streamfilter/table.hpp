#ifndef STREAMFILTER_TABLE_HPP_
#define STREAMFILTER_TABLE_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace streamfilter {

/// Comma-delimited result table. Notes are written first as "# key=value"
/// lines, then one header row naming every column.
class Table {
 public:
  Table(std::string name, std::vector<std::string> columns);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  void note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }
  void add_row(std::vector<std::string> row);
  /// Values of one column, in row order.
  std::vector<std::string> column(const std::string& name) const;

  void write(std::ostream& os) const;

 private:
  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> notes_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double x);
std::string cell(int x);
std::string cell(long x);
std::string cell(long long x);
std::string cell(unsigned long x);
std::string cell(unsigned long long x);
std::string cell(bool x);
inline std::string cell(const std::string& x) { return x; }
inline std::string cell(const char* x) { return x; }

}  // namespace streamfilter

#endif  // STREAMFILTER_TABLE_HPP_
