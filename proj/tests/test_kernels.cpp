#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "urnmix/chain.hpp"
#include "urnmix/exact.hpp"

using namespace urnmix;

namespace {

using Key = std::pair<std::uint64_t, std::uint64_t>;  // (rack1, signs)

Key key(const SignedUrnState& s) { return {static_cast<std::uint64_t>(s.rack1), static_cast<std::uint64_t>(s.signs)}; }

std::map<Key, Rational> row_map(const KernelRow& row) {
  std::map<Key, Rational> out;
  for (std::size_t i = 0; i < row.entries.size(); ++i) out[key(row.entries[i].target)] += row.probability(i);
  return out;
}

// One-step law built from the position-level description: the racks are
// sorted lists, positions p, q are drawn, the balls at those positions are
// swapped when they sit on different racks, and signs are flipped by coins.
std::map<Key, Rational> position_oracle(const ModelSpec& model, const SignedUrnState& s) {
  const int n = model.n;
  std::vector<int> rack1, rack2;
  for (int b = 1; b <= n; ++b) ((s.rack1 >> (b - 1)) & 1 ? rack1 : rack2).push_back(b);
  std::vector<int> positions = rack1;
  positions.insert(positions.end(), rack2.begin(), rack2.end());
  auto on_rack1 = [&](int pos) { return pos < static_cast<int>(rack1.size()); };

  std::map<Key, Rational> law;
  auto add = [&](Mask rack, Mask signs, Rational p) { law[key({rack, signs})] += p; };

  if (model.family == Family::Classical) {
    const Rational p(1, static_cast<std::int64_t>(rack1.size() * rack2.size()));
    for (const int a : rack1)
      for (const int b : rack2) add(s.rack1 ^ ball_bit(a) ^ ball_bit(b), 0, p);
    return law;
  }
  const Rational pair(1, static_cast<std::int64_t>(n) * n);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const Mask a = ball_bit(positions[p]);
      const Mask b = ball_bit(positions[q]);
      const Mask moved = on_rack1(p) != on_rack1(q) ? s.rack1 ^ a ^ b : s.rack1;
      switch (model.family) {
        case Family::Variant:
          add(moved, 0, pair);
          break;
        case Family::IndependentFlips:
          if (p == q) {
            add(moved, s.signs, pair / 2);
            add(moved, s.signs ^ a, pair / 2);
          } else {
            for (int ca = 0; ca < 2; ++ca)
              for (int cb = 0; cb < 2; ++cb)
                add(moved, s.signs ^ (ca ? a : 0) ^ (cb ? b : 0), pair / 4);
          }
          break;
        case Family::PairedFlips:
          if (p == q) {
            add(moved, s.signs, pair / 2);
            add(moved, s.signs ^ a, pair / 2);
          } else {
            add(moved, s.signs, pair / 2);
            add(moved, s.signs ^ a ^ b, pair / 2);
          }
          break;
        default:
          break;
      }
    }
  return law;
}

const Family kAll[] = {Family::Classical, Family::Variant, Family::IndependentFlips, Family::PairedFlips};

// A stream that replays fixed raw values, for driving samplers by hand.
struct Scripted {
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  std::vector<result_type> values;
  std::size_t next = 0;
  result_type operator()() { return values.at(next++); }
};

// Raw value that uniform_below maps to index i out of n.
std::uint64_t raw_for(std::uint64_t i, std::uint64_t n) {
  const unsigned __int128 top = (static_cast<unsigned __int128>(i) << 64) + ((static_cast<unsigned __int128>(1) << 64) / 2);
  return static_cast<std::uint64_t>(top / n);
}

}  // namespace

TEST_CASE("initial states") {
  CHECK(initial_state({Family::Classical, 4, 2}).rack1 == Mask{0b11});
  const auto s = initial_state({Family::IndependentFlips, 3, 1});
  CHECK(s.rack1 == Mask{1});
  CHECK(s.signs == Mask{0});
  CHECK(initial_state({Family::Variant, 2, 1}).rack1 == Mask{1});
}

TEST_CASE("kernel row goldens") {
  const auto v = row_map(kernel_row({Family::Variant, 2, 1}, {1, 0}));
  CHECK(v.size() == 2);
  CHECK(v.at({1, 0}) == Rational(1, 2));
  CHECK(v.at({2, 0}) == Rational(1, 2));

  // Sign bits are (ball 1, ball 2) = (bit 0, bit 1).
  const auto ind = row_map(kernel_row({Family::IndependentFlips, 2, 1}, {1, 0}));
  CHECK(ind.size() == 7);
  CHECK(ind.at({1, 0b00}) == Rational(1, 4));
  CHECK(ind.at({1, 0b01}) == Rational(1, 8));
  CHECK(ind.at({1, 0b10}) == Rational(1, 8));
  for (const std::uint64_t signs : {0b00, 0b01, 0b10, 0b11}) CHECK(ind.at({2, signs}) == Rational(1, 8));

  const auto cl = row_map(kernel_row({Family::Classical, 4, 2}, {0b0011, 0}));
  CHECK(cl.size() == 4);
  for (const std::uint64_t t : {0b0101, 0b1001, 0b0110, 0b1010}) CHECK(cl.at({t, 0}) == Rational(1, 4));

  const auto pf = row_map(kernel_row({Family::PairedFlips, 2, 1}, {1, 0}));
  CHECK(pf.at({1, 0}) == Rational(1, 4));
  CHECK(pf.at({2, 0b00}) == Rational(1, 4));
  CHECK(pf.at({2, 0b11}) == Rational(1, 4));
  CHECK(pf.count({2, 0b01}) == 0);

  const auto vs = row_map(kernel_row({Family::Variant, 4, 2}, {0b0011, 0}));
  CHECK(vs.at({0b0011, 0}) == Rational(1, 2));
}

TEST_CASE("kernel rows match the position-level description") {
  for (const Family f : kAll)
    for (const auto& [n, r] : {std::pair{2, 1}, {3, 1}, {4, 1}, {4, 2}, {5, 2}, {6, 3}}) {
      const ModelSpec model{f, n, r};
      if (is_signed(f) && n > 5) continue;
      const StateSpace space(model);
      for (std::uint64_t x = 0; x < space.size(); ++x) {
        const auto s = space.unrank(x);
        CHECK(row_map(kernel_row(model, s)) == position_oracle(model, s));
      }
    }
}

TEST_CASE("kernels are symmetric and rows sum to one") {
  for (const Family f : kAll)
    for (const auto& [n, r] : {std::pair{3, 1}, {5, 2}, {6, 3}, {7, 2}}) {
      const ModelSpec model{f, n, r};
      const StateSpace space(model);
      std::map<std::pair<std::uint64_t, std::uint64_t>, std::int64_t> w;
      for (std::uint64_t x = 0; x < space.size(); ++x) {
        const auto row = kernel_row(model, space.unrank(x));
        std::int64_t total = 0;
        for (const auto& t : row.entries) {
          CHECK(t.weight > 0);
          total += t.weight;
          w[{x, space.rank(t.target)}] += t.weight;
        }
        CHECK(total == row.denominator);
      }
      bool symmetric = true;
      for (const auto& [xy, weight] : w) {
        const auto it = w.find({xy.second, xy.first});
        symmetric = symmetric && it != w.end() && it->second == weight;
      }
      CHECK(symmetric);
    }
}

TEST_CASE("classical rows have r(n-r) targets") {
  const ModelSpec model{Family::Classical, 7, 3};
  const StateSpace space(model);
  for (std::uint64_t x = 0; x < space.size(); ++x) CHECK(kernel_row(model, space.unrank(x)).entries.size() == 12);
}

TEST_CASE("kernel_row rejects foreign states") {
  CHECK_THROWS_AS(kernel_row({Family::Variant, 4, 2}, {0b0111, 0}), std::invalid_argument);
  CHECK_THROWS_AS(kernel_row({Family::Variant, 4, 2}, {0b0011, 1}), std::invalid_argument);
  CHECK_THROWS_AS(kernel_row({Family::PairedFlips, 4, 2}, {0b0011, 0b10000}), std::invalid_argument);
}

TEST_CASE("uniform_below with scripted draws") {
  Scripted rng{{raw_for(0, 5), ~std::uint64_t{0}, 0, raw_for(2, 5)}};
  CHECK(uniform_below(rng, 5) == 0);
  CHECK(uniform_below(rng, 5) == 4);
  CHECK(uniform_below(rng, 5) == 2);
}

TEST_CASE("samplers driven by scripted draws") {
  // Variant: repeated ball leaves the state alone, a cross pair swaps.
  Scripted same{{raw_for(1, 4), raw_for(1, 4)}};
  CHECK(step_variant(4, UrnState{0b0011}, same).rack1 == Mask{0b0011});
  Scripted cross{{raw_for(0, 4), raw_for(3, 4)}};
  CHECK(step_variant(4, UrnState{0b0011}, cross).rack1 == Mask{0b1010});

  // Classical n = 2: the only move is the swap.
  std::mt19937_64 mt(1);
  UrnState c{1};
  for (int t = 0; t < 10; ++t) {
    const UrnState next = step_classical(2, 1, c, mt);
    CHECK(next.rack1 != c.rack1);
    c = next;
  }

  // Independent flips: same ball, coin up -> its sign flips, subset fixed.
  Scripted single{{raw_for(2, 3), raw_for(2, 3), ~std::uint64_t{0}}};
  const auto s = step_independent_flips(3, SignedUrnState{1, 0}, single);
  CHECK(s.rack1 == Mask{1});
  CHECK(s.signs == Mask{0b100});

  // Paired flips: cross pair with coin up flips both moved balls.
  Scripted both{{raw_for(0, 3), raw_for(1, 3), ~std::uint64_t{0}}};
  const auto p = step_paired_flips(3, SignedUrnState{1, 0}, both);
  CHECK(p.rack1 == Mask{0b010});
  CHECK(p.signs == Mask{0b011});
}

TEST_CASE("paired flips change one sign only when the balls coincide") {
  std::mt19937_64 rng(5);
  SignedUrnState s{0b111, 0};
  for (int t = 0; t < 20000; ++t) {
    const auto next = step_paired_flips(7, s, rng);
    const int flipped = popcount(next.signs ^ s.signs);
    CHECK(flipped <= 2);
    if (flipped == 1) CHECK(next.rack1 == s.rack1);
    s = next;
  }
}

TEST_CASE("sampled one-step frequencies agree with kernel rows") {
  constexpr int kDraws = 1'000'000;
  for (const Family f : kAll) {
    const ModelSpec model{f, 4, 2};
    const SignedUrnState start{0b0011, is_signed(f) ? Mask{0b0101} : Mask{0}};
    const auto expected = row_map(kernel_row(model, start));
    std::mt19937_64 rng(42 + static_cast<int>(f));
    std::map<Key, int> seen;
    for (int t = 0; t < kDraws; ++t) ++seen[key(step(model, start, rng))];
    for (const auto& [k, count] : seen) CHECK(expected.count(k) == 1);
    for (const auto& [k, p] : expected) {
      const double q = to_double(p);
      const double se = std::sqrt(q * (1 - q) / kDraws);
      const double freq = static_cast<double>(seen[k]) / kDraws;
      CHECK(std::abs(freq - q) < 5 * se);
    }
  }
}

TEST_CASE("classical sampler from {1,2} hits each neighbour a quarter of the time") {
  constexpr int kDraws = 100'000;
  std::mt19937_64 rng(9);
  std::map<std::uint64_t, int> seen;
  for (int t = 0; t < kDraws; ++t) ++seen[static_cast<std::uint64_t>(step_classical(4, 2, UrnState{0b0011}, rng).rack1)];
  CHECK(seen.size() == 4);
  CHECK(seen.count(0b0011) == 0);
  CHECK(seen.count(0b1100) == 0);
  const double se = std::sqrt(0.25 * 0.75 / kDraws);
  for (const auto& [target, count] : seen) CHECK(std::abs(static_cast<double>(count) / kDraws - 0.25) < 4 * se);
}
