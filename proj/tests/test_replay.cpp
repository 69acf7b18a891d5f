#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "rowrl/noise.hpp"
#include "rowrl/replay.hpp"

using namespace rowrl;

namespace {
TransitionTuple tagged(double tag) {
  TransitionTuple t;
  t.r = tag;
  return t;
}
}  // namespace

TEST_CASE("ring buffer evicts the oldest tuple") {
  ReplayBuffer buf(5);
  for (int i = 0; i <= 5; ++i) buf.store(tagged(i));
  CHECK(buf.size() == 5);
  std::set<double> present;
  for (std::size_t i = 0; i < buf.size(); ++i) present.insert(buf.at(i).r);
  CHECK(present == std::set<double>{1, 2, 3, 4, 5});  // tuple #0 evicted
}

TEST_CASE("undersized buffers signal a skip") {
  ReplayBuffer buf(1000);
  for (int i = 0; i < 63; ++i) buf.store(tagged(i));
  std::mt19937_64 rng = make_rng(1, 0);
  CHECK_FALSE(buf.can_sample(64));
  CHECK(buf.sample(64, rng).empty());
  buf.store(tagged(63));
  CHECK(buf.sample(64, rng).size() == 64);
}

TEST_CASE("sampling is uniform without replacement and seeded") {
  ReplayBuffer buf(1000);
  for (int i = 0; i < 100; ++i) buf.store(tagged(i));
  std::mt19937_64 a = make_rng(2, 7), b = make_rng(2, 7);
  const auto sa = buf.sample(64, a);
  const auto sb = buf.sample(64, b);
  REQUIRE(sa.size() == 64);
  std::set<double> seen;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].r == sb[i].r);  // same seed, same draw
    seen.insert(sa[i].r);
  }
  CHECK(seen.size() == 64);  // no repeats within the minibatch
}

TEST_CASE("noise sigma decays geometrically and exactly") {
  NoiseProcess noise(0.2, 0.99, 1.0, 5, 0);
  noise.apply_decay();
  CHECK(noise.sigma() == 0.2 * 0.99);
  NoiseProcess n150(0.2, 0.99, 1.0, 5, 0);
  double expected = 0.2;
  for (int i = 0; i < 150; ++i) {
    n150.apply_decay();
    expected *= 0.99;
  }
  CHECK(n150.sigma() == expected);
  CHECK(n150.sigma() == Catch::Approx(0.04429035744777226).margin(1e-15));

  NoiseProcess constant(0.2, 1.0, 1.0, 5, 0);
  constant.apply_decay();
  CHECK(constant.sigma() == 0.2);
}

TEST_CASE("noise samples are zero mean") {
  NoiseProcess noise(0.2, 0.99, 1.0, 11, 3);
  double mean = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) mean += noise.sample();
  mean /= n;
  CHECK(std::fabs(mean) < 0.01);
}

TEST_CASE("zero sigma produces no disturbance") {
  NoiseProcess silent(0.0, 0.99, 1.0, 1, 0);
  for (int i = 0; i < 5; ++i) CHECK(silent.sample() == 0.0);
}
