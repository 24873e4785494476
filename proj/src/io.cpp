#include "tcl/io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tcl/errors.hpp"

namespace tcl {

std::string format_g17(double x) {
  char buf[64];
  auto res =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) {
      throw ConfigError("cannot create output directory \"" +
                        p.parent_path().string() + "\": " + ec.message());
    }
  }
  std::ofstream out(path, mode);
  if (!out) throw ConfigError("cannot open \"" + path + "\" for writing");
  return out;
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) {
    throw ConfigError("csv writer: " + std::to_string(header.size()) +
                      " header names for " + std::to_string(columns.size()) +
                      " columns");
  }
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& col : columns) {
    if (col.size() != rows) {
      throw ConfigError("csv writer: ragged columns (" +
                        std::to_string(col.size()) + " vs " +
                        std::to_string(rows) + " rows)");
    }
  }
  std::ofstream out = open_out(path, std::ios::out | std::ios::trunc);
  std::string line;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) line += ',';
    line += header[c];
  }
  line += '\n';
  out << line;
  for (std::size_t r = 0; r < rows; ++r) {
    line.clear();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) line += ',';
      line += format_g17(columns[c][r]);
    }
    line += '\n';
    out << line;
  }
  out.flush();
  if (!out) throw ConfigError("write failed for \"" + path + "\"");
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out = open_out(path, std::ios::out | std::ios::trunc);
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) throw ConfigError("write failed for \"" + path + "\"");
}

std::pair<std::string, std::string> write_binary_with_manifest(
    const std::string& dir, const std::string& stem,
    const std::vector<double>& data, nlohmann::json manifest) {
  static_assert(sizeof(double) == 8, "float64 dump assumes 8-byte doubles");
  const std::string data_path =
      (std::filesystem::path(dir) / (stem + ".f64")).string();
  const std::string manifest_path =
      (std::filesystem::path(dir) / (stem + ".manifest.json")).string();
  {
    std::ofstream out =
        open_out(data_path, std::ios::out | std::ios::trunc | std::ios::binary);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    out.flush();
    if (!out) throw ConfigError("write failed for \"" + data_path + "\"");
  }
  manifest["count"] = data.size();
  manifest["dtype"] = "float64";
  manifest["byte_order"] = "little";
  manifest["data_file"] = stem + ".f64";
  write_json_file(manifest_path, manifest);
  return {data_path, manifest_path};
}

}  // namespace tcl
