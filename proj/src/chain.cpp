#include "urnmix/chain.hpp"

#include <stdexcept>
#include <string>

namespace urnmix {

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Classical: return "classical";
    case Family::Variant: return "variant";
    case Family::IndependentFlips: return "independent";
    case Family::PairedFlips: return "paired";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "classical") return Family::Classical;
  if (name == "variant") return Family::Variant;
  if (name == "independent") return Family::IndependentFlips;
  if (name == "paired") return Family::PairedFlips;
  throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

void validate(const ModelSpec& model) {
  if (model.n < 2) throw std::invalid_argument("n must be at least 2 (got " + std::to_string(model.n) + ")");
  if (model.r < 1 || 2 * model.r > model.n)
    throw std::invalid_argument("r must lie in [1, n/2] (got r=" + std::to_string(model.r) +
                                ", n=" + std::to_string(model.n) + ")");
}

void validate_states(const ModelSpec& model) {
  validate(model);
  if (model.n > kMaxBalls)
    throw std::invalid_argument("state-level work supports n <= " + std::to_string(kMaxBalls) + " (got " +
                                std::to_string(model.n) + ")");
}

SignedUrnState initial_state(const ModelSpec& model) {
  validate_states(model);
  return {low_mask(model.r), 0};
}

std::int64_t kernel_denominator(const ModelSpec& model) {
  const std::int64_t n = model.n;
  switch (model.family) {
    case Family::Classical: return static_cast<std::int64_t>(model.r) * (n - model.r);
    case Family::Variant: return n * n;
    case Family::IndependentFlips: return 4 * n * n;
    case Family::PairedFlips: return 2 * n * n;
  }
  return 1;
}

void check_state(const ModelSpec& model, const SignedUrnState& state) {
  const Mask all = low_mask(model.n);
  if ((state.rack1 & ~all) != 0 || popcount(state.rack1) != model.r)
    throw std::invalid_argument("rack 1 must hold exactly r of the balls 1..n");
  if (is_signed(model.family) ? (state.signs & ~all) != 0 : state.signs != 0)
    throw std::invalid_argument("sign mask outside the model's balls");
}

KernelRow kernel_row(const ModelSpec& model, const SignedUrnState& state) {
  validate_states(model);
  check_state(model, state);
  KernelRow row;
  row.source = state;
  row.denominator = kernel_denominator(model);
  for_each_transition(model, state, [&](const SignedUrnState& target, std::int64_t weight) {
    row.entries.push_back({target, weight});
  });
  return row;
}

}  // namespace urnmix
