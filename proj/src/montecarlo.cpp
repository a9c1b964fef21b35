#include "urnmix/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "urnmix/exact.hpp"

namespace urnmix {

namespace {

constexpr char kMagic[8] = {'U', 'R', 'N', 'M', 'C', '0', '1', '\0'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

bool get_u64(std::istream& in, std::uint64_t& v) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) return false;
  v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return true;
}

}  // namespace

Stream derive_stream(std::uint64_t seed, std::uint64_t worker) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(worker), static_cast<std::uint32_t>(worker >> 32)};
  return Stream(seq);
}

SimSummary run(const SimConfig& config, const SimOptions& options) {
  const ModelSpec& model = config.model;
  validate_states(model);
  if (config.k < 0) throw std::invalid_argument("k must be nonnegative");
  if (config.walkers < 1) throw std::invalid_argument("walkers must be at least 1");

  const auto start = std::chrono::steady_clock::now();
  std::vector<SignedUrnState> terminal(config.walkers);
  const SignedUrnState x0 = initial_state(model);
  detail::parallel_for(config.walkers, options.threads, [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t w = begin; w < end; ++w) {
      Stream rng = derive_stream(config.seed, w);
      SignedUrnState s = x0;
      for (std::int64_t t = 0; t < config.k; ++t) s = step(model, s, rng);
      terminal[w] = s;
    }
  });

  SimSummary summary;
  // s1 depends only on how many of the balls 1..r have left rack 1, so an
  // integer histogram of that count gives the mean independent of threading.
  std::vector<std::uint64_t> crossed(model.r + 1, 0);
  const Mask home = low_mask(model.r);
  for (const auto& s : terminal) ++crossed[popcount(s.rack1 & ~home)];
  const double walkers = static_cast<double>(config.walkers);
  std::vector<double> s1(model.r + 1);
  for (int j = 0; j <= model.r; ++j)
    s1[j] = to_double(Rational(1) - Rational(std::int64_t{j} * model.n, std::int64_t{model.r} * (model.n - model.r)));
  double mean = 0.0;
  for (int j = 0; j <= model.r; ++j) mean += static_cast<double>(crossed[j]) * s1[j];
  mean /= walkers;
  double sq = 0.0;
  for (int j = 0; j <= model.r; ++j) sq += static_cast<double>(crossed[j]) * (s1[j] - mean) * (s1[j] - mean);
  summary.mean_s1 = mean;
  summary.stderr_s1 = config.walkers > 1 ? std::sqrt(sq / (walkers - 1) / walkers) : 0.0;

  const BigInt size = space_size(model);
  if (size <= BigInt(kEmpiricalTvStateCap) &&
      BigInt(config.walkers) >= BigInt(kEmpiricalTvWalkersPerState) * size) {
    const StateSpace space(model);
    std::vector<std::uint64_t> counts(space.size(), 0);
    for (const auto& s : terminal) ++counts[space.rank(s)];
    const double u = 1.0 / static_cast<double>(space.size());
    double tv = 0.0;
    for (const auto c : counts) tv += std::abs(static_cast<double>(c) / walkers - u);
    summary.empirical_tv = 0.5 * tv;
    summary.tv_bias_ceiling = 0.5 * std::sqrt(static_cast<double>(space.size()) / walkers);
  }

  summary.elapsed = std::chrono::steady_clock::now() - start;
  if (options.keep_terminal_states) summary.terminal_states = std::move(terminal);
  return summary;
}

void write_terminal_states(std::ostream& out, std::span<const SignedUrnState> states) {
  out.write(kMagic, sizeof kMagic);
  for (const auto& s : states) {
    if ((s.rack1 >> 64) != 0 || (s.signs >> 64) != 0)
      throw std::invalid_argument("terminal-state dump supports n <= 64");
    put_u64(out, static_cast<std::uint64_t>(s.signs));
    put_u64(out, static_cast<std::uint64_t>(s.rack1));
  }
  if (!out) throw std::runtime_error("failed writing terminal states");
}

std::vector<SignedUrnState> read_terminal_states(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error("not a terminal-state dump (bad magic)");
  std::vector<SignedUrnState> states;
  std::uint64_t signs = 0, subset = 0;
  while (get_u64(in, signs)) {
    if (!get_u64(in, subset)) throw std::runtime_error("truncated terminal-state record");
    states.push_back({subset, signs});
  }
  return states;
}

}  // namespace urnmix
