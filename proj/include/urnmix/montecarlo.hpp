#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "urnmix/chain.hpp"
#include "urnmix/model.hpp"

namespace urnmix {

using Stream = std::mt19937_64;

/// Reproducible per-worker stream. The engine is seeded through std::seed_seq
/// from the four 32-bit halves of (seed, worker), whose output is fixed by the
/// standard, so streams are identical across platforms.
Stream derive_stream(std::uint64_t seed, std::uint64_t worker);

struct SimConfig {
  ModelSpec model;
  std::int64_t k = 0;
  std::uint64_t walkers = 1;
  std::uint64_t seed = 0;
};

struct SimOptions {
  unsigned threads = 1;
  bool keep_terminal_states = false;
};

struct SimSummary {
  double mean_s1 = 0.0;
  double stderr_s1 = 0.0;
  std::optional<double> empirical_tv;
  std::optional<double> tv_bias_ceiling;  // sqrt(|X| / walkers) / 2
  std::chrono::duration<double> elapsed{};
  std::vector<SignedUrnState> terminal_states;  // walker order; filled on request
};

/// Empirical TV is computed only when |X| <= kEmpiricalTvStateCap and
/// walkers >= kEmpiricalTvWalkersPerState * |X|.
inline constexpr std::uint64_t kEmpiricalTvStateCap = 100'000;
inline constexpr std::uint64_t kEmpiricalTvWalkersPerState = 50;

/// Walker w runs k steps from the initial state on derive_stream(seed, w).
/// Everything but `elapsed` is a pure function of the config.
SimSummary run(const SimConfig& config, const SimOptions& options = {});

/// Binary dump: magic "URNMC01\0", then per walker a little-endian u64 sign
/// mask followed by a little-endian u64 subset mask.
void write_terminal_states(std::ostream& out, std::span<const SignedUrnState> states);
std::vector<SignedUrnState> read_terminal_states(std::istream& in);

}  // namespace urnmix
