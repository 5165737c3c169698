#include <doctest.h>

#include <cstdint>
#include <vector>

#include "armaopt/rng.hpp"

using armaopt::RngStream;

TEST_CASE("same seed reproduces the same stream") {
  RngStream a(1234), b(1234);
  for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge immediately") {
  RngStream a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 16; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("substreams are repeatable and do not consume the parent") {
  RngStream parent(99);
  const std::uint64_t before = RngStream(99).next_u64();

  RngStream c1 = parent.substream(7);
  RngStream c2 = parent.substream(7);
  for (int i = 0; i < 32; ++i) CHECK(c1.next_u64() == c2.next_u64());

  // Handing out substreams must not advance the parent.
  CHECK(parent.next_u64() == before);
}

TEST_CASE("two-key substream composes the one-key form") {
  RngStream parent(5);
  RngStream direct = parent.substream(3, 11);
  RngStream chained = parent.substream(3).substream(11);
  for (int i = 0; i < 16; ++i) CHECK(direct.next_u64() == chained.next_u64());
}

TEST_CASE("sibling substreams are distinct") {
  RngStream parent(42);
  RngStream a = parent.substream(0);
  RngStream b = parent.substream(1);
  int equal = 0;
  for (int i = 0; i < 16; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
}

TEST_CASE("uniform stays inside its interval") {
  RngStream rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-0.25, 0.75);
    CHECK(u >= -0.25);
    CHECK(u < 0.75);
  }
}

TEST_CASE("gaussian moments are sane on a long draw") {
  RngStream rng(2024);
  const int n = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gaussian(1.0, 2.0);
    sum += g;
    sumsq += g * g;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.05));
  CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}
