#ifndef STREAMFILTER_FORMAT_HPP_
#define STREAMFILTER_FORMAT_HPP_

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace streamfilter {

/// 17 significant digits; strtod of the result recovers the exact double.
std::string format_real(double x);

std::optional<double> parse_real(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace streamfilter

#endif  // STREAMFILTER_FORMAT_HPP_
