#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "kgof/errors.hpp"
#include "kgof/gof.hpp"

namespace kgof {

void write_null_table(const NullTable& table, const std::string& path) {
  // Write to a temp file first, then rename, so readers never see a partial
  // table.
  const std::string temp = path + ".tmp";
  {
    std::ofstream out(temp);
    require(out.good(), ErrorCode::IoError, "cannot open " + temp);
    out << "# statistic: " << table.statistic_name << "\n";
    out << "# reps: " << table.reps << "\n";
    out << "# seed: " << table.seed << "\n";
    out << "# model: " << table.model << "\n";
    out << "# model_hash: " << fnv1a_hex(table.model) << "\n";
    char buffer[32];
    for (double value : table.values) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", value);
      out << buffer << "\n";
    }
    require(out.good(), ErrorCode::IoError, "write failed for " + temp);
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  require(!ec, ErrorCode::IoError, "rename failed: " + ec.message());
}

NullTable read_null_table(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);

  NullTable table;
  std::map<std::string, std::string> header;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      require(colon != std::string::npos, ErrorCode::IoError,
              "malformed header line: " + line);
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      const auto trim = [](std::string& s) {
        const auto begin = s.find_first_not_of(' ');
        const auto end = s.find_last_not_of(' ');
        s = begin == std::string::npos ? "" : s.substr(begin, end - begin + 1);
      };
      trim(key);
      trim(value);
      header[key] = value;
      continue;
    }
    std::istringstream parse(line);
    double value = 0.0;
    require(static_cast<bool>(parse >> value), ErrorCode::IoError,
            "malformed value line: " + line);
    table.values.push_back(value);
  }

  require(header.count("statistic") && header.count("reps") && header.count("seed"),
          ErrorCode::IoError, "missing header keys in " + path);
  table.statistic_name = header["statistic"];
  table.reps = std::stoll(header["reps"]);
  table.seed = std::stoull(header["seed"]);
  table.model = header.count("model") ? header["model"] : "";

  require(static_cast<long long>(table.values.size()) == table.reps,
          ErrorCode::IoError, "table length does not match reps header");
  require(std::is_sorted(table.values.begin(), table.values.end()),
          ErrorCode::IoError, "table values are not sorted");
  return table;
}

}  // namespace kgof
