#pragma once

#include <cstdint>
#include <vector>

#include "urnmix/chain.hpp"
#include "urnmix/model.hpp"

namespace urnmix {

// Closed-form eigenvalues. Each throws std::out_of_range for indices outside
// the catalog ranges.

/// 1 - i(n-i+1) / (r(n-r)), for the forced-switch chain.
Rational eig_classical(int n, int r, int i);

/// 1 - 2i(n-i+1) / n^2. Independent of r apart from the range check.
Rational eig_variant(int n, int r, int i);

/// F(j, ell) = (j^2 - 2 ell (j-ell+1)) / n^2.
Rational eig_independent(int n, int j, int ell);

/// F(j, ell) + ((n-j)^2 - 2m(n-j-m+1) - (n-j)) / n^2.
Rational eig_paired(int n, int j, int ell, int m);

/// The non-trivial part of the spectrum as (log(d*m), log|lambda|) pairs, so that
/// sums of d m lambda^(2k) can be evaluated for n well past 64-bit dimensions.
class SpectralSum {
 public:
  explicit SpectralSum(const ModelSpec& model);

  /// 1/4 * sum over nontrivial rho of d m lambda^(2k).
  double l2n_sq(std::int64_t k) const;

  std::size_t term_count() const noexcept { return terms_.size(); }

 private:
  struct Term {
    double log_weight;
    double log_abs_eigenvalue;  // -inf for a zero eigenvalue
  };
  std::vector<Term> terms_;
};

double l2n_sq_bound(const ModelSpec& model, std::int64_t k);

/// Same sum in exact rational arithmetic, from the full catalog. Intended for n <= 30.
BigRational l2n_sq_bound_exact(const ModelSpec& model, std::int64_t k);

struct TvUpper {
  double raw = 0.0;
  double clamped = 0.0;  // min(raw, 1)
};

TvUpper tv_upper(const ModelSpec& model, std::int64_t k);

struct BoundCurvePoint {
  std::int64_t k = 0;
  double l2n_sq_bound = 0.0;
  double tv_upper_raw = 0.0;
  double tv_upper = 0.0;
};

std::vector<BoundCurvePoint> bound_curve(const ModelSpec& model, const std::vector<std::int64_t>& ks);

/// Step count at which the family's upper-bound theorem applies, rounded up:
///   Classical        1/2 r (1 - r/n) (log n + c)
///   Variant          1/4 n (log n + c)
///   IndependentFlips 1/4 n (log n + c)
///   PairedFlips      1/2 n (log n + c)
/// Throws std::invalid_argument for c <= 0.
std::int64_t theorem_k(const ModelSpec& model, double c);

// ---------------------------------------------------------------------------
// Lower-bound machinery for the variant chain.

/// First nontrivial spherical function, 1 - j n / (r(n-r)) where j counts
/// rack-1 balls with labels above r.
Rational spherical_s1(int n, int r, const UrnState& state);

/// E[s1] = (1 - 2/n)^k under k variant steps.
double moment_s1(int n, std::int64_t k);
/// E[s2] = (1 - 2/n)^(2k).
double moment_s2(int n, std::int64_t k);

/// Var(f) / E(f)^2 after k variant steps, f = sqrt(n-1) s1. Requires n >= 3.
double variance_ratio(int n, int r, std::int64_t k);

/// (n-2) log(n/(n-2r)) + 1/2 (n-2) log[1 + 1/4 (n-2)(1 - ((n-2r)/n)^2) e^-c];
/// +infinity when 2r = n.
double crossover_f(int n, int r, double c);

struct LowerBoundReport {
  double c = 0.0;
  std::int64_t k_threshold = 0;
  double tv_guarantee = 0.0;  // 1 - 1566 e^-c; may be negative (vacuous)
  double mean_f = 0.0;        // E[f] at k_threshold
  double var_ratio = 0.0;     // Var(f)/E(f)^2 at k_threshold

  bool vacuous() const noexcept { return tv_guarantee <= 0.0; }
};

/// Requires n >= 3 and 0 <= c <= log n.
LowerBoundReport lower_bound(int n, int r, double c);

}  // namespace urnmix
