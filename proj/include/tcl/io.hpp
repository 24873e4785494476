#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace tcl {

// Decimal rendering used by every text artifact: 17 significant digits in
// printf-%g style, '.' separator independent of any locale, so a given double
// always produces the same bytes.
std::string format_g17(double x);

// Column-major CSV writer. `header` names the columns; every column must have
// the same length. Rows end in '\n'; numbers go through format_g17.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

// Pretty-printed JSON document with a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& doc);

// Raw little-endian float64 dump at <dir>/<stem>.f64 plus a sidecar manifest
// at <dir>/<stem>.manifest.json. The manifest receives `count`, `dtype`,
// `byte_order`, and `data_file` fields on top of what the caller supplies.
// Returns the (data, manifest) paths written.
std::pair<std::string, std::string> write_binary_with_manifest(
    const std::string& dir, const std::string& stem,
    const std::vector<double>& data, nlohmann::json manifest);

}  // namespace tcl
