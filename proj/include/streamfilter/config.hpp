#ifndef STREAMFILTER_CONFIG_HPP_
#define STREAMFILTER_CONFIG_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace streamfilter {

/// Flat "key = value" text. '#' starts a comment; list values are
/// comma-separated. Keys may appear once.
class ConfigFile {
 public:
  static ConfigFile parse(std::istream& is);
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) const;
  std::optional<double> real(const std::string& key) const;
  std::optional<std::int64_t> integer(const std::string& key) const;
  std::optional<std::uint64_t> unsigned_integer(const std::string& key) const;
  std::optional<bool> boolean(const std::string& key) const;
  std::optional<std::vector<double>> reals(const std::string& key) const;
  std::optional<std::vector<std::int64_t>> integers(const std::string& key) const;
  std::optional<std::vector<std::string>> texts(const std::string& key) const;

  /// Throws ConfigError naming the first key (and its line) not in `known`.
  void reject_unknown(const std::set<std::string>& known) const;

 private:
  struct Entry {
    std::string value;
    std::size_t line;
  };
  [[noreturn]] void fail(const std::string& key, const char* expected) const;

  std::map<std::string, Entry> entries_;
};

}  // namespace streamfilter

#endif  // STREAMFILTER_CONFIG_HPP_
