#pragma once

#include <string>
#include <string_view>

#include "csv.hpp"

namespace qcw::cli {

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view data);

/// UTC time as 2024-01-31T12:00:00.123Z.
std::string utc_timestamp();

struct RunManifest {
    std::string command;
    Json parameters = Json::object();
    Json seed;  ///< null for commands without randomness
    std::string started;
    std::string finished;
    std::string output_digest;
    Json warnings = Json::array();

    Json to_json() const;
};

}  // namespace qcw::cli
