#ifndef TMPREDICT_TEXT_IO_HPP
#define TMPREDICT_TEXT_IO_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tmpredict {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Splits on commas; strips one trailing '\r' from the line first.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

}  // namespace tmpredict

#endif  // TMPREDICT_TEXT_IO_HPP
