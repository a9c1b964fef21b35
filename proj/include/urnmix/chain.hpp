#pragma once

// State spaces, single-step samplers and exact one-step kernels for the four
// urn chains. Everything operates on ball labels: drawing an ordered pair of
// positions uniformly is the same as drawing an ordered pair of balls, since
// the sorted racks make position -> ball a bijection for any fixed state.

#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "urnmix/model.hpp"

namespace urnmix {

/// Labels of the balls on rack 1.
struct UrnState {
  Mask rack1 = 0;
  friend bool operator==(const UrnState&, const UrnState&) = default;
};

/// Rack-1 labels plus charges; a set sign bit means the ball is negative.
/// Unsigned families use this type with signs == 0.
struct SignedUrnState {
  Mask rack1 = 0;
  Mask signs = 0;
  friend bool operator==(const SignedUrnState&, const SignedUrnState&) = default;
};

constexpr Mask ball_bit(int ball) noexcept { return Mask{1} << (ball - 1); }

constexpr Mask low_mask(int count) noexcept {
  return count >= 128 ? ~Mask{0} : (Mask{1} << count) - 1;
}

// ---------------------------------------------------------------------------
// Random sources

/// Any full-range 64-bit generator. Tests inject scripted streams through this.
template <class G>
concept RandomSource = std::uniform_random_bit_generator<G> &&
                       std::same_as<typename G::result_type, std::uint64_t> &&
                       (G::min() == 0) && (G::max() == std::numeric_limits<std::uint64_t>::max());

/// Uniform integer in [0, bound). Lemire's multiply-and-reject, so the result is
/// identical on every platform for a given raw stream.
template <RandomSource G>
std::uint64_t uniform_below(G& rng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  u128 product = static_cast<u128>(rng()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>(rng()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

template <RandomSource G>
bool fair_coin(G& rng) {
  return (rng() >> 63) != 0;
}

/// Bit of the index-th (0-based) set bit of mask.
inline Mask nth_set_bit(Mask mask, std::uint64_t index) {
  for (; index > 0; --index) mask &= mask - 1;
  return lowest_bit(mask);
}

// ---------------------------------------------------------------------------
// Samplers

SignedUrnState initial_state(const ModelSpec& model);

template <RandomSource G>
UrnState step_classical(int n, int r, UrnState state, G& rng) {
  const Mask out = low_mask(n) & ~state.rack1;
  const Mask a = nth_set_bit(state.rack1, uniform_below(rng, static_cast<std::uint64_t>(r)));
  const Mask b = nth_set_bit(out, uniform_below(rng, static_cast<std::uint64_t>(n - r)));
  state.rack1 ^= a | b;
  return state;
}

template <RandomSource G>
UrnState step_variant(int n, UrnState state, G& rng) {
  const Mask a = ball_bit(static_cast<int>(uniform_below(rng, n)) + 1);
  const Mask b = ball_bit(static_cast<int>(uniform_below(rng, n)) + 1);
  if (((state.rack1 & a) != 0) != ((state.rack1 & b) != 0)) state.rack1 ^= a | b;
  return state;
}

template <RandomSource G>
SignedUrnState step_independent_flips(int n, SignedUrnState state, G& rng) {
  const Mask a = ball_bit(static_cast<int>(uniform_below(rng, n)) + 1);
  const Mask b = ball_bit(static_cast<int>(uniform_below(rng, n)) + 1);
  if (a == b) {
    if (fair_coin(rng)) state.signs ^= a;
    return state;
  }
  if (((state.rack1 & a) != 0) != ((state.rack1 & b) != 0)) state.rack1 ^= a | b;
  if (fair_coin(rng)) state.signs ^= a;
  if (fair_coin(rng)) state.signs ^= b;
  return state;
}

template <RandomSource G>
SignedUrnState step_paired_flips(int n, SignedUrnState state, G& rng) {
  const Mask a = ball_bit(static_cast<int>(uniform_below(rng, n)) + 1);
  const Mask b = ball_bit(static_cast<int>(uniform_below(rng, n)) + 1);
  if (a == b) {
    if (fair_coin(rng)) state.signs ^= a;
    return state;
  }
  if (((state.rack1 & a) != 0) != ((state.rack1 & b) != 0)) state.rack1 ^= a | b;
  if (fair_coin(rng)) state.signs ^= a | b;
  return state;
}

/// One step of whichever chain `model` names.
template <RandomSource G>
SignedUrnState step(const ModelSpec& model, SignedUrnState state, G& rng) {
  switch (model.family) {
    case Family::Classical:
      return {step_classical(model.n, model.r, UrnState{state.rack1}, rng).rack1, 0};
    case Family::Variant:
      return {step_variant(model.n, UrnState{state.rack1}, rng).rack1, 0};
    case Family::IndependentFlips:
      return step_independent_flips(model.n, state, rng);
    case Family::PairedFlips:
      return step_paired_flips(model.n, state, rng);
  }
  return state;
}

// ---------------------------------------------------------------------------
// Exact kernels

/// Common denominator of all one-step probabilities:
/// r(n-r), n^2, 4n^2 and 2n^2 for the four families.
std::int64_t kernel_denominator(const ModelSpec& model);

struct Transition {
  SignedUrnState target;
  std::int64_t weight = 0;  // probability = weight / denominator
};

struct KernelRow {
  SignedUrnState source;
  std::int64_t denominator = 1;
  std::vector<Transition> entries;  // distinct targets, positive weights

  Rational probability(std::size_t index) const {
    return Rational(entries[index].weight, denominator);
  }
};

/// Throws std::invalid_argument if the state is not a point of the model's space.
void check_state(const ModelSpec& model, const SignedUrnState& state);

/// Calls visit(target, weight) once per distinct target of the one-step law.
/// Weights are over kernel_denominator(model). No validation, no allocation.
template <class Visit>
void for_each_transition(const ModelSpec& model, const SignedUrnState& s, Visit&& visit) {
  const int n = model.n;
  const int r = model.r;
  const Mask all = low_mask(n);
  const Mask in = s.rack1;
  const Mask out = all & ~in;
  const auto same_rack_pairs = static_cast<std::int64_t>(r) * (r - 1) / 2 +
                               static_cast<std::int64_t>(n - r) * (n - r - 1) / 2;

  switch (model.family) {
    case Family::Classical:
      for (Mask ia = in; ia; ia &= ia - 1)
        for (Mask ob = out; ob; ob &= ob - 1)
          visit(SignedUrnState{in ^ (lowest_bit(ia) | lowest_bit(ob)), 0}, std::int64_t{1});
      return;

    case Family::Variant: {
      const std::int64_t stay = static_cast<std::int64_t>(n) * n - 2LL * r * (n - r);
      if (stay > 0) visit(SignedUrnState{in, 0}, stay);
      for (Mask ia = in; ia; ia &= ia - 1)
        for (Mask ob = out; ob; ob &= ob - 1)
          visit(SignedUrnState{in ^ (lowest_bit(ia) | lowest_bit(ob)), 0}, std::int64_t{2});
      return;
    }

    case Family::IndependentFlips: {
      // Over 4n^2: a fixed ordered pair with a fixed flip pattern weighs 1,
      // a repeated ball with a fixed flip outcome weighs 2.
      visit(s, 2LL * n + 2 * same_rack_pairs);
      for (Mask rest = all; rest; rest &= rest - 1) {
        const Mask a = lowest_bit(rest);
        const std::int64_t rack_size = (in & a) ? r : n - r;
        visit(SignedUrnState{in, s.signs ^ a}, 2 * rack_size);
      }
      for (const Mask rack : {in, out})
        for (Mask ra = rack; ra; ra &= ra - 1) {
          const Mask a = lowest_bit(ra);
          for (Mask rb = ra & (ra - 1); rb; rb &= rb - 1)
            visit(SignedUrnState{in, s.signs ^ a ^ lowest_bit(rb)}, std::int64_t{2});
        }
      for (Mask ia = in; ia; ia &= ia - 1)
        for (Mask ob = out; ob; ob &= ob - 1) {
          const Mask a = ia & (~ia + 1);
          const Mask b = ob & (~ob + 1);
          const Mask moved = in ^ (a | b);
          visit(SignedUrnState{moved, s.signs}, std::int64_t{2});
          visit(SignedUrnState{moved, s.signs ^ a}, std::int64_t{2});
          visit(SignedUrnState{moved, s.signs ^ b}, std::int64_t{2});
          visit(SignedUrnState{moved, s.signs ^ a ^ b}, std::int64_t{2});
        }
      return;
    }

    case Family::PairedFlips: {
      // Over 2n^2.
      visit(s, static_cast<std::int64_t>(n) + 2 * same_rack_pairs);
      for (Mask rest = all; rest; rest &= rest - 1)
        visit(SignedUrnState{in, s.signs ^ (lowest_bit(rest))}, std::int64_t{1});
      for (const Mask rack : {in, out})
        for (Mask ra = rack; ra; ra &= ra - 1) {
          const Mask a = lowest_bit(ra);
          for (Mask rb = ra & (ra - 1); rb; rb &= rb - 1)
            visit(SignedUrnState{in, s.signs ^ a ^ lowest_bit(rb)}, std::int64_t{2});
        }
      for (Mask ia = in; ia; ia &= ia - 1)
        for (Mask ob = out; ob; ob &= ob - 1) {
          const Mask a = ia & (~ia + 1);
          const Mask b = ob & (~ob + 1);
          const Mask moved = in ^ (a | b);
          visit(SignedUrnState{moved, s.signs}, std::int64_t{2});
          visit(SignedUrnState{moved, s.signs ^ a ^ b}, std::int64_t{2});
        }
      return;
    }
  }
}

/// Exact one-step distribution from `state`. Rows sum to exactly 1.
KernelRow kernel_row(const ModelSpec& model, const SignedUrnState& state);

}  // namespace urnmix
