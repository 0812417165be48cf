#include "streamfilter/config.hpp"

#include <fstream>
#include <istream>

#include "streamfilter/errors.hpp"
#include "streamfilter/format.hpp"

namespace streamfilter {

ConfigFile ConfigFile::parse(std::istream& is) {
  ConfigFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
    const std::string key(trim(view.substr(0, eq)));
    if (key.empty()) throw ParseError("empty key", lineno);
    if (out.entries_.count(key)) throw ParseError("duplicate key " + key, lineno);
    out.entries_[key] = {std::string(trim(view.substr(eq + 1))), lineno};
  }
  return out;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in);
}

void ConfigFile::fail(const std::string& key, const char* expected) const {
  const auto& e = entries_.at(key);
  throw ConfigError("config line " + std::to_string(e.line) + ": " + key + " must be " + expected);
}

std::optional<std::string> ConfigFile::text(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

std::optional<double> ConfigFile::real(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  auto x = parse_real(*v);
  if (!x) fail(key, "a real number");
  return x;
}

std::optional<std::int64_t> ConfigFile::integer(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  auto x = parse_int(*v);
  if (!x) fail(key, "an integer");
  return x;
}

std::optional<std::uint64_t> ConfigFile::unsigned_integer(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  auto x = parse_uint(*v);
  if (!x) fail(key, "a non-negative integer");
  return x;
}

std::optional<bool> ConfigFile::boolean(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  fail(key, "true or false");
}

std::optional<std::vector<std::string>> ConfigFile::texts(const std::string& key) const {
  auto v = text(key);
  if (!v) return std::nullopt;
  std::vector<std::string> out;
  if (v->empty()) return out;
  for (auto part : split(*v, ',')) out.emplace_back(trim(part));
  return out;
}

std::optional<std::vector<double>> ConfigFile::reals(const std::string& key) const {
  auto parts = texts(key);
  if (!parts) return std::nullopt;
  std::vector<double> out;
  for (const auto& p : *parts) {
    auto x = parse_real(p);
    if (!x) fail(key, "a list of real numbers");
    out.push_back(*x);
  }
  return out;
}

std::optional<std::vector<std::int64_t>> ConfigFile::integers(const std::string& key) const {
  auto parts = texts(key);
  if (!parts) return std::nullopt;
  std::vector<std::int64_t> out;
  for (const auto& p : *parts) {
    auto x = parse_int(p);
    if (!x) fail(key, "a list of integers");
    out.push_back(*x);
  }
  return out;
}

void ConfigFile::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, e] : entries_)
    if (!known.count(key)) throw ConfigError("config line " + std::to_string(e.line) + ": unknown key " + key);
}

}  // namespace streamfilter
