#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace qcw::cli {

using Json = nlohmann::ordered_json;

/// %.15g-style text, independent of the locale.
std::string format_number(double v);

/// RFC 4180 field: quoted when it contains a comma, a quote or a line break; quotes doubled.
std::string quote_field(std::string_view s);

/// Header plus rows of JSON scalars. Numbers render through format_number, null as an empty field.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Json>> rows;
};

std::string render_csv(const Table& t);
/// Array of objects keyed by the header.
Json table_json(const Table& t);

/// Records of an RFC 4180 document as raw strings; throws std::runtime_error on a malformed quote.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string emit_csv(const std::vector<std::vector<std::string>>& records);

}  // namespace qcw::cli
