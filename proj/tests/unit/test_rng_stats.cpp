#include <doctest.h>

#include <cmath>
#include <set>

#include "rcising/error.hpp"
#include "rcising/mc.hpp"
#include "rcising/rng.hpp"

using namespace rci;

TEST_CASE("philox4x32-10 known answers") {
  // Random123 kat_vectors.
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams replay from a block index") {
  CounterRng a(42, 3);
  std::vector<std::uint32_t> first;
  for (int i = 0; i < 12; ++i) first.push_back(a.next_u32());
  CounterRng b(42, 3, 1);
  CHECK(b.next_u32() == first[4]);
  a.seek(2);
  CHECK(a.next_u32() == first[8]);
  CounterRng other(42, 4);
  CHECK(other.next_u32() != first[0]);
}

TEST_CASE("uniform and bounded draws") {
  CounterRng rng(7, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.below(7);
    REQUIRE(k < 7);
    seen.insert(k);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("derived seeds") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(9, 5) == derive_seed(9, 5));
}

TEST_CASE("batch means") {
  std::vector<double> constant(1000, 0.25);
  const auto c = batch_means(constant);
  CHECK(c.mean == 0.25);
  CHECK(c.stderr_ == 0.0);
  CHECK(c.n_batches == 31);

  CounterRng rng(11, 0);
  std::vector<double> iid(40000);
  for (auto& v : iid) v = rng.uniform();
  const auto e = batch_means(iid);
  const double ideal = std::sqrt(1.0 / 12.0 / 40000.0);
  CHECK(e.n_batches == 64);
  CHECK(e.stderr_ > 0.6 * ideal);
  CHECK(e.stderr_ < 1.4 * ideal);

  try {
    batch_means(std::vector<double>(10, 1.0));
    FAIL("expected insufficient_data");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::insufficient_data);
  }
}

TEST_CASE("ratio batch means") {
  std::vector<double> num(256), den(256);
  for (int i = 0; i < 256; ++i) {
    den[static_cast<std::size_t>(i)] = 1.0 + (i % 3);
    num[static_cast<std::size_t>(i)] = 0.5 * den[static_cast<std::size_t>(i)];
  }
  const auto r = ratio_batch_means(num, den);
  CHECK(r.mean == doctest::Approx(0.5));
  CHECK(r.stderr_ == doctest::Approx(0.0));
}

TEST_CASE("chain combination") {
  Estimate a{1.0, 0.1, 100, 10, 0, 1};
  Estimate b{2.0, 0.2, 100, 10, 0, 1};
  const auto c = combine_chains({a, b});
  // Weights 100 and 25.
  CHECK(c.mean == doctest::Approx((100.0 * 1.0 + 25.0 * 2.0) / 125.0));
  CHECK(c.stderr_ == doctest::Approx(1.0 / std::sqrt(125.0)));
  CHECK(c.n_samples == 200);
  CHECK(c.chains == 2);

  Estimate z{3.0, 0.0, 100, 10, 0, 1};
  CHECK(combine_chains({a, z}).mean == doctest::Approx(2.0));
}
