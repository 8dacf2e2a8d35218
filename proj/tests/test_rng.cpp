#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "txsage/rng.hpp"

using txsage::Rng;

TEST_CASE("same seed reproduces the stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("derive is pure and addressable") {
  Rng root(7);
  Rng s1 = root.derive("batch", 3, 4);
  Rng s2 = root.derive("batch", 3, 4);
  Rng s3 = root.derive("batch", 3, 5);
  Rng s4 = root.derive("other", 3, 4);
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(s1.next_u64() != s3.next_u64());
  CHECK(s2.next_u64() != s4.next_u64());
}

TEST_CASE("below stays in range and covers all residues") {
  Rng rng(1);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    auto v = rng.below(7);
    REQUIRE(v < 7);
    ++seen[static_cast<int>(v)];
  }
  for (int c : seen) CHECK(c > 800);  // roughly uniform
}

TEST_CASE("next_double lies in [0,1)") {
  Rng rng(9);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double x = rng.next_double();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    mean += x;
  }
  mean /= 100000.0;
  CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("normal has zero mean, unit variance") {
  Rng rng(11);
  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum2 += x * x;
  }
  CHECK(std::abs(sum / n) < 0.02);
  CHECK(std::abs(sum2 / n - 1.0) < 0.03);
}
