#pragma once

#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace valueprobe::csv {

/// RFC 4180 quoting: fields with a comma, quote or line break are quoted.
std::string escape(std::string_view field);

/// Fixed 10-significant-digit rendering used in every report table.
std::string number(double v);
std::string number(const std::optional<double>& v);

void write_row(std::ostream& out, const std::vector<std::string>& fields);
void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);

std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace valueprobe::csv
