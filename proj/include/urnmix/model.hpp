#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace urnmix {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;
using Rational = boost::rational<std::int64_t>;

// Bitmask over ball labels; ball b (1-based) is bit b-1.
using Mask = unsigned __int128;

// Largest n whose states fit in a Mask.
inline constexpr int kMaxBalls = 128;

inline int popcount(Mask m) noexcept {
  return std::popcount(static_cast<std::uint64_t>(m)) + std::popcount(static_cast<std::uint64_t>(m >> 64));
}

inline constexpr Mask lowest_bit(Mask m) noexcept { return m & (~m + 1); }

enum class Family { Classical, Variant, IndependentFlips, PairedFlips };

constexpr bool is_signed(Family f) noexcept {
  return f == Family::IndependentFlips || f == Family::PairedFlips;
}

std::string_view to_string(Family f) noexcept;

// Accepts the CLI spellings: classical, variant, independent, paired.
Family parse_family(std::string_view name);

struct ModelSpec {
  Family family = Family::Variant;
  int n = 2;
  int r = 1;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Throws std::invalid_argument unless n >= 2 and 1 <= r <= n/2.
void validate(const ModelSpec& model);

// validate() plus n <= kMaxBalls, for anything that materializes states.
void validate_states(const ModelSpec& model);

// Raised when a requested computation would exceed a configured state cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, std::uint64_t required, std::uint64_t cap)
      : std::runtime_error(what), required_(required), cap_(cap) {}

  std::uint64_t required() const noexcept { return required_; }
  std::uint64_t cap() const noexcept { return cap_; }

 private:
  std::uint64_t required_;
  std::uint64_t cap_;
};

inline double to_double(const Rational& q) {
  return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator());
}

}  // namespace urnmix
