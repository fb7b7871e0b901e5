#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace qcw::cli {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

std::string quote_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

namespace {

std::string cell_text(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
    if (v.is_number()) return format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace

std::string render_csv(const Table& t) {
    std::vector<std::vector<std::string>> records;
    records.push_back(t.header);
    for (const auto& row : t.rows) {
        std::vector<std::string> r;
        for (const auto& v : row) r.push_back(cell_text(v));
        records.push_back(std::move(r));
    }
    return emit_csv(records);
}

Json table_json(const Table& t) {
    Json arr = Json::array();
    for (const auto& row : t.rows) {
        Json obj = Json::object();
        for (std::size_t k = 0; k < t.header.size() && k < row.size(); ++k) obj[t.header[k]] = row[k];
        arr.push_back(std::move(obj));
    }
    return arr;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    std::size_t i = 0;
    bool field_started = false;
    const auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '"' && !field_started) {
            ++i;
            for (;;) {
                if (i >= text.size()) throw std::runtime_error("unterminated quoted field");
                if (text[i] == '"') {
                    if (i + 1 < text.size() && text[i + 1] == '"') {
                        field += '"';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                field += text[i++];
            }
            field_started = true;
            if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
                throw std::runtime_error("text after closing quote");
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\n' || c == '\r') {
            end_field();
            records.push_back(std::move(record));
            record.clear();
            i += (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
        } else {
            if (c == '"') throw std::runtime_error("quote inside an unquoted field");
            field += c;
            field_started = true;
            ++i;
        }
    }
    if (field_started || !record.empty()) {
        end_field();
        records.push_back(std::move(record));
    }
    return records;
}

std::string emit_csv(const std::vector<std::vector<std::string>>& records) {
    std::string out;
    for (const auto& r : records) {
        for (std::size_t k = 0; k < r.size(); ++k) {
            if (k) out += ',';
            out += quote_field(r[k]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace qcw::cli
