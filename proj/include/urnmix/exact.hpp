#pragma once

// Exhaustive enumeration and exact evolution: the brute-force reference that
// the closed-form spectral results are checked against.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "urnmix/chain.hpp"
#include "urnmix/model.hpp"

namespace urnmix {

/// Ranks states densely. Subsets are ranked colexicographically (combinadic);
/// a signed state has index signs * C(n, r) + subset_rank.
class StateSpace {
 public:
  explicit StateSpace(const ModelSpec& model);

  const ModelSpec& model() const noexcept { return model_; }
  std::uint64_t size() const noexcept { return size_; }
  std::uint64_t subset_count() const noexcept { return subsets_; }

  std::uint64_t rank(const SignedUrnState& state) const;
  SignedUrnState unrank(std::uint64_t index) const;

  std::uint64_t subset_rank(Mask rack1) const;
  Mask subset_unrank(std::uint64_t rank) const;

 private:
  ModelSpec model_;
  std::uint64_t subsets_ = 0;
  std::uint64_t size_ = 0;
  std::vector<std::vector<std::uint64_t>> binom_;  // binom_[m][t] = C(m, t), t <= r
};

/// C(n, r) unsigned, 2^n C(n, r) signed.
BigInt space_size(const ModelSpec& model);

struct EvolveOptions {
  std::uint64_t state_cap = 1'000'000;
  unsigned threads = 1;
};

/// A distribution over ranked states, stored as its excess over uniform,
/// excess[x] = P(x) - 1/|X|. Keeping the excess rather than P itself keeps
/// full relative precision in distances that are many orders below 1/|X|.
struct Distribution {
  ModelSpec model;
  std::vector<double> excess;

  std::size_t size() const noexcept { return excess.size(); }
  double uniform() const noexcept { return 1.0 / static_cast<double>(excess.size()); }
  double probability(std::size_t index) const noexcept { return uniform() + excess[index]; }
  std::vector<double> probabilities() const;
  double total_mass() const;
};

/// Repeated kernel application from the initial state. Each step gathers over
/// the target's own kernel row (the kernel is symmetric), so results do not
/// depend on the thread count.
class Evolver {
 public:
  Evolver(const ModelSpec& model, const EvolveOptions& options = {});

  const StateSpace& space() const noexcept { return space_; }
  const Distribution& current() const noexcept { return dist_; }
  std::int64_t steps() const noexcept { return steps_; }

  void step();
  void advance_to(std::int64_t k);

 private:
  StateSpace space_;
  EvolveOptions options_;
  Distribution dist_;
  std::vector<double> scratch_;
  std::int64_t steps_ = 0;
};

/// Throws CapacityError when |X| exceeds options.state_cap.
Distribution evolve(const ModelSpec& model, std::int64_t k, const EvolveOptions& options = {});

/// 1/2 sum |P(x) - 1/|X||.
double tv_distance(const Distribution& dist);

/// 1/4 |X| sum (P(x) - 1/|X|)^2.
double l2n_sq_distance(const Distribution& dist);

/// Marginal law of the rack-1 subset, as a Variant-model distribution of the
/// same (n, r). Valid for any family.
Distribution subset_marginal(const Distribution& dist);

/// rank,probability with 18 significant digits.
void write_distribution_csv(std::ostream& out, const Distribution& dist);

// ---------------------------------------------------------------------------
// Exact rational mode

inline constexpr std::uint64_t kRationalStateCap = 10'000;
inline constexpr std::int64_t kRationalStepCap = 50;

/// P(x) = weights[x] / denominator, denominator = kernel_denominator^k.
struct ExactDistribution {
  ModelSpec model;
  std::vector<BigInt> weights;
  BigInt denominator{1};

  BigRational probability(std::size_t index) const { return BigRational(weights[index], denominator); }
};

class ExactEvolver {
 public:
  ExactEvolver(const ModelSpec& model, const EvolveOptions& options = {});

  const ExactDistribution& current() const noexcept { return dist_; }
  std::int64_t steps() const noexcept { return steps_; }
  void step();

 private:
  StateSpace space_;
  EvolveOptions options_;
  ExactDistribution dist_;
  std::vector<BigInt> scratch_;
  std::int64_t steps_ = 0;
};

/// Throws CapacityError past kRationalStateCap states or kRationalStepCap steps.
ExactDistribution evolve_exact(const ModelSpec& model, std::int64_t k, const EvolveOptions& options = {});

BigRational tv_distance(const ExactDistribution& dist);
BigRational l2n_sq_distance(const ExactDistribution& dist);

/// Double-precision view of an exact distribution.
Distribution to_distribution(const ExactDistribution& dist);

// ---------------------------------------------------------------------------
// Spectra and traces

inline constexpr std::uint64_t kDenseEigenCap = 4096;

/// All |X| eigenvalues of the kernel matrix, sorted descending. The matrix is
/// checked for exact symmetry before it is handed to a symmetric solver.
std::vector<double> spectrum(const ModelSpec& model, std::uint64_t cap = kDenseEigenCap);

/// The catalog's prediction: each eigenvalue repeated dim * mult times, descending.
std::vector<double> catalog_spectrum(const ModelSpec& model);

struct TraceCheck {
  int k = 0;
  double kernel_trace = 0.0;    // Tr(K^k)
  double spectral_trace = 0.0;  // sum d m lambda^k
  double rel_error = 0.0;
  bool exact = false;           // both sides computed in rational arithmetic
};

inline constexpr std::uint64_t kDenseTraceCap = 1024;

/// Tr(K^k) against sum d m lambda^k for k = 1..kmax. Powers k <= 3 are
/// accumulated exactly from sparse rows (rel_error is 0 iff they agree exactly);
/// higher powers need |X| <= kDenseTraceCap and use dense double products.
std::vector<TraceCheck> trace_identity_check(const ModelSpec& model, int kmax,
                                             const EvolveOptions& options = {});

}  // namespace urnmix
