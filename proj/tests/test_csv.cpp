#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kgof/csv.hpp"
#include "kgof/errors.hpp"

using namespace kgof;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "kgof-test-csv";
  fs::create_directories(dir);
  const std::string path = (dir / name).string();
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("one value per line, optional header") {
  const std::string plain = write_temp("plain.csv", "0.5\n1.25\n-3\n");
  const auto values = read_samples(plain);
  REQUIRE(values.size() == 3);
  CHECK(values[0] == 0.5);
  CHECK(values[1] == 1.25);
  CHECK(values[2] == -3.0);

  const std::string headed = write_temp("headed.csv", "value\n0.5\n1.25\n");
  CHECK(read_samples(headed).size() == 2);

  const std::string bad = write_temp("bad.csv", "0.5\nnot-a-number\n");
  CHECK_THROWS_AS(read_samples(bad), Error);

  const std::string empty = write_temp("empty.csv", "");
  CHECK_THROWS_AS(read_samples(empty), Error);

  CHECK_THROWS_AS(read_samples("/nonexistent/file.csv"), Error);
}

TEST_CASE("two comma-separated values per line") {
  const std::string path = write_temp("pairs.csv", "x,y\n0.5,1.5\n2,3\n");
  const auto pairs = read_samples_2d(path);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].first == 0.5);
  CHECK(pairs[0].second == 1.5);
  CHECK(pairs[1].first == 2.0);
  CHECK(pairs[1].second == 3.0);
}
