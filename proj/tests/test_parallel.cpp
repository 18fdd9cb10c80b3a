#include <doctest.h>

#include <vector>

#include "kgof/accumulators.hpp"
#include "kgof/parallel.hpp"
#include "kgof/rng.hpp"

using namespace kgof;

namespace {

double replicate_value(std::uint64_t rep) {
  RandomStream stream(99, rep);
  double total = 0.0;
  for (int i = 0; i < 16; ++i) total += stream.next_normal();
  return total;
}

}  // namespace

TEST_CASE("parallel replicate fill matches the serial reference bitwise") {
  const std::uint64_t reps = 5000;
  std::vector<double> serial(reps), parallel(reps);
  replicate_for_serial(reps, [&](std::uint64_t rep) {
    serial[rep] = replicate_value(rep);
  });
  replicate_for_parallel(reps, [&](std::uint64_t rep) {
    parallel[rep] = replicate_value(rep);
  });
  CHECK(serial == parallel);
}

TEST_CASE("reduction merge agrees with the serial reference") {
  const std::uint64_t reps = 20000;
  auto body = [&](std::uint64_t rep, MeanAccumulator& acc) {
    acc.add(replicate_value(rep));
  };
  auto merge = [](MeanAccumulator& total, const MeanAccumulator& part) {
    total.merge(part);
  };
  const MeanAccumulator serial = replicate_reduce<MeanAccumulator>(
      reps, []() { return MeanAccumulator(); }, body, merge, /*threads=*/1);
  const MeanAccumulator parallel = replicate_reduce<MeanAccumulator>(
      reps, []() { return MeanAccumulator(); }, body, merge, /*threads=*/0);
  CHECK(serial.n == parallel.n);
  CHECK(serial.mean() == doctest::Approx(parallel.mean()).epsilon(1e-12));
  CHECK(serial.variance() == doctest::Approx(parallel.variance()).epsilon(1e-9));
}

TEST_CASE("covariance accumulator tracks exact second moments") {
  CovarianceAccumulator acc(2);
  Eigen::VectorXd a(2), b(2);
  a << 1.0, -1.0;
  b << 3.0, 1.0;
  acc.add(a);
  acc.add(b);
  const Eigen::MatrixXd cov = acc.covariance();
  // two-point sample: cov = E[xx^T] - mean mean^T
  CHECK(cov(0, 0) == doctest::Approx(1.0));
  CHECK(cov(1, 1) == doctest::Approx(1.0));
  CHECK(cov(0, 1) == doctest::Approx(1.0));
}
