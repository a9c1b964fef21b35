#include "urnmix/spectral.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "urnmix/catalog.hpp"

namespace urnmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::out_of_range(what);
}

void check_unsigned_index(int n, int r, int i) {
  require(n >= 2 && r >= 1 && 2 * r <= n, "eigenvalue: need n >= 2 and 1 <= r <= n/2");
  require(i >= 0 && i <= r, "eigenvalue: i outside [0, r]");
}

void check_signed_index(int n, int j, int ell) {
  require(n >= 1, "eigenvalue: need n >= 1");
  require(j >= 0 && j <= n, "eigenvalue: j outside [0, n]");
  require(ell >= 0 && 2 * ell <= j, "eigenvalue: ell outside [0, j/2]");
}

}  // namespace

Rational eig_classical(int n, int r, int i) {
  check_unsigned_index(n, r, i);
  return Rational(1) - Rational(static_cast<std::int64_t>(i) * (n - i + 1), static_cast<std::int64_t>(r) * (n - r));
}

Rational eig_variant(int n, int r, int i) {
  check_unsigned_index(n, r, i);
  return Rational(1) - Rational(2LL * i * (n - i + 1), static_cast<std::int64_t>(n) * n);
}

Rational eig_independent(int n, int j, int ell) {
  check_signed_index(n, j, ell);
  const std::int64_t num = static_cast<std::int64_t>(j) * j - 2LL * ell * (j - ell + 1);
  return Rational(num, static_cast<std::int64_t>(n) * n);
}

Rational eig_paired(int n, int j, int ell, int m) {
  check_signed_index(n, j, ell);
  require(m >= 0 && 2 * m <= n - j, "eigenvalue: m outside [0, (n-j)/2]");
  const std::int64_t rest = n - j;
  const std::int64_t num = static_cast<std::int64_t>(j) * j - 2LL * ell * (j - ell + 1) + rest * rest -
                           2LL * m * (rest - m + 1) - rest;
  return Rational(num, static_cast<std::int64_t>(n) * n);
}

// ---------------------------------------------------------------------------

SpectralSum::SpectralSum(const ModelSpec& model) {
  const int n = model.n;
  const int r = model.r;
  if (n < 2 || r < 1 || 2 * r > n) throw std::invalid_argument("spectral sum needs n >= 2 and 1 <= r <= n/2");

  auto push = [&](double log_weight, const Rational& lambda) {
    const double value = to_double(lambda);
    terms_.push_back({log_weight, value == 0.0 ? -kInf : std::log(std::abs(value))});
  };

  if (!is_signed(model.family)) {
    for (int i = 1; i <= r; ++i)
      push(log_dim_two_row(n, i),
           model.family == Family::Classical ? eig_classical(n, r, i) : eig_variant(n, r, i));
    return;
  }
  // The signed catalog without forming its big-integer dimensions.
  for (int j = 0; j <= n; ++j)
    for (int ell = 0; 2 * ell <= j; ++ell)
      for (int m = 0; 2 * m <= n - j; ++m) {
        if (j == n && ell == 0) continue;  // trivial
        const std::int64_t mult = signed_multiplicity(n, r, j, ell, m);
        if (mult == 0) continue;
        const double log_weight = log_binomial(n, j) + log_dim_two_row(j, ell) + log_dim_two_row(n - j, m) +
                                  std::log(static_cast<double>(mult));
        push(log_weight, model.family == Family::IndependentFlips ? eig_independent(n, j, ell)
                                                                  : eig_paired(n, j, ell, m));
      }
}

double SpectralSum::l2n_sq(std::int64_t k) const {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  double sum = 0.0;
  for (const auto& t : terms_) {
    if (k == 0) {
      sum += std::exp(t.log_weight);
    } else if (t.log_abs_eigenvalue != -kInf) {
      sum += std::exp(t.log_weight + 2.0 * static_cast<double>(k) * t.log_abs_eigenvalue);
    }
  }
  return 0.25 * sum;
}

double l2n_sq_bound(const ModelSpec& model, std::int64_t k) { return SpectralSum(model).l2n_sq(k); }

BigRational l2n_sq_bound_exact(const ModelSpec& model, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  BigRational sum = 0;
  for (const auto& e : catalog(model)) {
    if (is_trivial(e.label, model.n)) continue;
    const BigRational lambda(BigInt(e.eigenvalue.numerator()), BigInt(e.eigenvalue.denominator()));
    BigRational power = 1;
    for (std::int64_t t = 0; t < 2 * k; ++t) power *= lambda;
    sum += BigRational(e.dim * e.mult) * power;
  }
  return sum / 4;
}

TvUpper tv_upper(const ModelSpec& model, std::int64_t k) {
  const double raw = std::sqrt(l2n_sq_bound(model, k));
  return {raw, std::min(raw, 1.0)};
}

std::vector<BoundCurvePoint> bound_curve(const ModelSpec& model, const std::vector<std::int64_t>& ks) {
  const SpectralSum sum(model);
  std::vector<BoundCurvePoint> points;
  points.reserve(ks.size());
  for (const auto k : ks) {
    const double l2 = sum.l2n_sq(k);
    const double raw = std::sqrt(l2);
    points.push_back({k, l2, raw, std::min(raw, 1.0)});
  }
  return points;
}

std::int64_t theorem_k(const ModelSpec& model, double c) {
  validate(model);
  if (!(c > 0.0)) throw std::invalid_argument("theorem_k requires c > 0");
  const double n = model.n;
  const double r = model.r;
  const double span = std::log(n) + c;
  double k = 0.0;
  switch (model.family) {
    case Family::Classical: k = 0.5 * r * (1.0 - r / n) * span; break;
    case Family::Variant:
    case Family::IndependentFlips: k = 0.25 * n * span; break;
    case Family::PairedFlips: k = 0.5 * n * span; break;
  }
  return static_cast<std::int64_t>(std::ceil(k));
}

// ---------------------------------------------------------------------------

Rational spherical_s1(int n, int r, const UrnState& state) {
  if (n < 2 || r < 1 || 2 * r > n) throw std::invalid_argument("spherical_s1: need n >= 2 and 1 <= r <= n/2");
  const int crossed = popcount(state.rack1 & ~low_mask(r));
  return Rational(1) - Rational(static_cast<std::int64_t>(crossed) * n, static_cast<std::int64_t>(r) * (n - r));
}

double moment_s1(int n, std::int64_t k) {
  if (n < 2 || k < 0) throw std::invalid_argument("moment_s1: need n >= 2 and k >= 0");
  return std::pow(1.0 - 2.0 / n, static_cast<double>(k));
}

double moment_s2(int n, std::int64_t k) {
  if (n < 2 || k < 0) throw std::invalid_argument("moment_s2: need n >= 2 and k >= 0");
  return std::pow(1.0 - 2.0 / n, 2.0 * static_cast<double>(k));
}

double variance_ratio(int n, int r, std::int64_t k) {
  if (n < 3) throw std::invalid_argument("variance_ratio requires n >= 3");
  if (r < 1 || 2 * r > n) throw std::invalid_argument("variance_ratio requires 1 <= r <= n/2");
  if (k < 0) throw std::invalid_argument("variance_ratio requires k >= 0");
  const double nd = n;
  const double gap = n - 2 * r;
  const double mean_f = std::sqrt(nd - 1.0) * moment_s1(n, k);
  const double first = 1.0 / (mean_f * mean_f);
  const double second = (4.0 * nd * nd / (nd - 2.0)) / (nd * nd - gap * gap) *
                        ((gap / nd) * (gap / nd) * std::pow(1.0 - 2.0 / nd, -static_cast<double>(k)) - 1.0);
  const double third = (3.0 * nd - 2.0) / ((nd - 1.0) * (nd - 2.0));
  return first + second + third;
}

double crossover_f(int n, int r, double c) {
  if (n < 3) throw std::invalid_argument("crossover_f requires n >= 3");
  if (r < 1 || 2 * r > n) throw std::invalid_argument("crossover_f requires 1 <= r <= n/2");
  if (!(c >= 0.0)) throw std::invalid_argument("crossover_f requires c >= 0");
  if (2 * r == n) return kInf;
  const double nd = n;
  const double shrink = (nd - 2.0 * r) / nd;
  return (nd - 2.0) * std::log(nd / (nd - 2.0 * r)) +
         0.5 * (nd - 2.0) * std::log1p(0.25 * (nd - 2.0) * (1.0 - shrink * shrink) * std::exp(-c));
}

LowerBoundReport lower_bound(int n, int r, double c) {
  if (n < 3) throw std::invalid_argument("lower_bound requires n >= 3");
  if (r < 1 || 2 * r > n) throw std::invalid_argument("lower_bound requires 1 <= r <= n/2");
  if (!(c >= 0.0 && c <= std::log(static_cast<double>(n))))
    throw std::invalid_argument("lower_bound requires 0 <= c <= log n");
  const double quarter = 0.25 * n * (std::log(static_cast<double>(n)) - c);
  const double k = std::min(quarter, crossover_f(n, r, c));

  LowerBoundReport report;
  report.c = c;
  report.k_threshold = static_cast<std::int64_t>(std::floor(std::max(k, 0.0)));
  report.tv_guarantee = 1.0 - 1566.0 * std::exp(-c);
  report.mean_f = std::sqrt(n - 1.0) * moment_s1(n, report.k_threshold);
  report.var_ratio = variance_ratio(n, r, report.k_threshold);
  return report;
}

}  // namespace urnmix
