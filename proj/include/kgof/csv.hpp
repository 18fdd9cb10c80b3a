#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kgof {

/// One numeric value per line; a single leading header line is skipped when
/// it does not parse as a number.
std::vector<double> read_samples(const std::string& path);

/// Two comma-separated values per line (2-D data), same header handling.
std::vector<std::pair<double, double>> read_samples_2d(const std::string& path);

}  // namespace kgof
