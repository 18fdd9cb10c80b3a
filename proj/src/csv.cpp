#include "kgof/csv.hpp"

#include <charconv>
#include <fstream>

#include "kgof/errors.hpp"

namespace kgof {

namespace {

bool parse_double(std::string_view text, double& value) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' ||
                           text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  return result.ec == std::errc() && result.ptr == text.data() + text.size();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::vector<double> read_samples(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<double> values;
  values.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    double value = 0.0;
    if (!parse_double(lines[i], value)) {
      if (i == 0) continue;  // single header line
      fail(ErrorCode::IoError, "cannot parse line " + std::to_string(i + 1) +
                                   " of " + path + ": " + lines[i]);
    }
    values.push_back(value);
  }
  require(!values.empty(), ErrorCode::IoError, "no data in " + path);
  return values;
}

std::vector<std::pair<double, double>> read_samples_2d(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<std::pair<double, double>> values;
  values.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto comma = lines[i].find(',');
    double x = 0.0, y = 0.0;
    const bool ok = comma != std::string::npos &&
                    parse_double(lines[i].substr(0, comma), x) &&
                    parse_double(lines[i].substr(comma + 1), y);
    if (!ok) {
      if (i == 0) continue;
      fail(ErrorCode::IoError, "cannot parse line " + std::to_string(i + 1) +
                                   " of " + path + ": " + lines[i]);
    }
    values.emplace_back(x, y);
  }
  require(!values.empty(), ErrorCode::IoError, "no data in " + path);
  return values;
}

}  // namespace kgof
