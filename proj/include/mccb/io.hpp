#pragma once

// Demonstration files.
//
//   csv-dir : a directory of *.csv files (or one .csv file), one demonstration per
//             file, no header, one time step per row: v1,v2,...,vn
//   jsonl   : one JSON object per line: {"id": "...", "samples": [[...], ...]}

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "mccb/error.hpp"
#include "mccb/trajectory.hpp"

namespace mccb::io {

enum class Format { csv_dir, jsonl };

inline Format format_from_string(std::string_view s) {
  if (s == "csv-dir" || s == "csv") return Format::csv_dir;
  if (s == "jsonl") return Format::jsonl;
  throw config_error("io", "unknown dataset format '" + std::string(s) + "' (expected csv-dir or jsonl)");
}

inline std::string_view to_string(Format f) { return f == Format::csv_dir ? "csv-dir" : "jsonl"; }

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(std::string_view field, const std::string& where) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw config_error("io", where + ": malformed number '" + std::string(field) + "'");
  }
  return v;
}

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return m;
}

inline Trajectory make_trajectory(Eigen::MatrixXd samples, const std::string& where) {
  try {
    return Trajectory(std::move(samples));
  } catch (const Error& e) {
    throw config_error("io", where + ": " + e.what());
  }
}

}  // namespace detail

/// Parses one CSV demonstration. Blank lines are ignored.
inline Trajectory read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("io", "cannot open " + file.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(lineno);
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      row.push_back(detail::parse_number(body.substr(start, comma == std::string_view::npos ? comma : comma - start),
                                         where));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw config_error("io", where + ": dimension mismatch (" + std::to_string(row.size()) + " columns, expected " +
                                   std::to_string(rows.front().size()) + ")");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw config_error("io", file.string() + ": empty file");
  return detail::make_trajectory(detail::to_matrix(rows), file.string());
}

inline DemonstrationSet read_csv_dir(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw config_error("io", "dataset path does not exist: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw config_error("io", "no .csv files in " + path.string());
  std::vector<Trajectory> demos;
  std::vector<std::string> labels;
  for (const auto& f : files) {
    demos.push_back(read_csv(f));
    labels.push_back(f.stem().string());
  }
  return {std::move(demos), std::move(labels)};
}

inline DemonstrationSet read_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw config_error("io", "cannot open " + file.string());
  std::vector<Trajectory> demos;
  std::vector<std::string> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(lineno);
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw config_error("io", where + ": " + e.what());
    }
    if (!obj.is_object() || !obj.contains("samples") || !obj["samples"].is_array() || obj["samples"].empty()) {
      throw config_error("io", where + ": expected an object with a non-empty 'samples' array");
    }
    std::vector<std::vector<double>> rows;
    for (const auto& r : obj["samples"]) {
      if (!r.is_array() || r.empty()) throw config_error("io", where + ": each sample must be a non-empty array");
      std::vector<double> row;
      for (const auto& v : r) {
        if (!v.is_number()) throw config_error("io", where + ": non-numeric sample value");
        row.push_back(v.get<double>());
      }
      if (!rows.empty() && row.size() != rows.front().size()) {
        throw config_error("io", where + ": dimension mismatch inside one demonstration");
      }
      rows.push_back(std::move(row));
    }
    demos.push_back(detail::make_trajectory(detail::to_matrix(rows), where));
    labels.push_back(obj.contains("id") && obj["id"].is_string() ? obj["id"].get<std::string>()
                                                                  : "demo" + std::to_string(demos.size() - 1));
  }
  if (demos.empty()) throw config_error("io", file.string() + ": empty file");
  return {std::move(demos), std::move(labels)};
}

inline DemonstrationSet load_demonstrations(const std::filesystem::path& path, Format format) {
  if (!std::filesystem::exists(path)) throw config_error("io", "dataset path does not exist: " + path.string());
  return format == Format::csv_dir ? read_csv_dir(path) : read_jsonl(path);
}

/// Shortest round-trip decimal text for a double.
inline std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, ptr};
}

inline std::string to_csv(const Eigen::MatrixXd& samples) {
  std::string out;
  for (Index t = 0; t < samples.rows(); ++t) {
    for (Index i = 0; i < samples.cols(); ++i) {
      if (i > 0) out += ',';
      out += format_number(samples(t, i));
    }
    out += '\n';
  }
  return out;
}

inline void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw config_error("io", "cannot write " + file.string());
  out << text;
  if (!out) throw config_error("io", "write failed for " + file.string());
}

inline void write_csv(const std::filesystem::path& file, const Eigen::MatrixXd& samples) {
  write_text(file, to_csv(samples));
}

}  // namespace mccb::io
