#include "urnmix/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "urnmix/spectral.hpp"

namespace urnmix {

namespace {

void check_catalog_range(int n, int r) {
  if (n < 2 || r < 1 || 2 * r > n)
    throw std::invalid_argument("catalog needs n >= 2 and 1 <= r <= n/2 (got n=" + std::to_string(n) +
                                ", r=" + std::to_string(r) + ")");
}

// Rows 0..n of Pascal's triangle.
std::vector<std::vector<BigInt>> pascal(int n) {
  std::vector<std::vector<BigInt>> rows(n + 1);
  for (int m = 0; m <= n; ++m) {
    rows[m].resize(m + 1);
    rows[m][0] = rows[m][m] = 1;
    for (int t = 1; t < m; ++t) rows[m][t] = rows[m - 1][t - 1] + rows[m - 1][t];
  }
  return rows;
}

BigInt two_row_from(const std::vector<std::vector<BigInt>>& rows, int m, int t) {
  return t == 0 ? rows[m][0] : rows[m][t] - rows[m][t - 1];
}

}  // namespace

bool is_trivial(const IrrepLabel& label, int n) {
  if (const auto* u = std::get_if<UnsignedIrrep>(&label)) return u->i == 0;
  const auto& s = std::get<SignedIrrep>(label);
  return s.j == n && s.ell == 0 && s.m == 0;
}

BigInt binomial(int n, int k) {
  if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  BigInt result = 1;
  for (int t = 1; t <= k; ++t) {
    result *= n - k + t;
    result /= t;
  }
  return result;
}

double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

BigInt dim_two_row(int n, int i) {
  if (i < 0 || 2 * i > n)
    throw std::invalid_argument("[" + std::to_string(n - i) + "," + std::to_string(i) + "] is not a partition");
  return binomial(n, i) - binomial(n, i - 1);
}

double log_dim_two_row(int n, int i) {
  if (i < 0 || 2 * i > n)
    throw std::invalid_argument("[" + std::to_string(n - i) + "," + std::to_string(i) + "] is not a partition");
  // C(n,i-1)/C(n,i) = i/(n-i+1)
  return log_binomial(n, i) + std::log1p(-static_cast<double>(i) / (n - i + 1));
}

Rational char_ratio_two_row(int n, int i) {
  if (n < 2) throw std::invalid_argument("char_ratio_two_row: n must be at least 2");
  if (i < 0 || 2 * i > n) throw std::invalid_argument("char_ratio_two_row: i outside [0, n/2]");
  const std::int64_t a = n - i;
  return Rational(a * (a - 1) + static_cast<std::int64_t>(i) * (i - 3), static_cast<std::int64_t>(n) * (n - 1));
}

std::vector<IrrepEntry> unsigned_catalog(int n, int r, Family family) {
  if (is_signed(family)) throw std::invalid_argument("unsigned_catalog: family must be classical or variant");
  check_catalog_range(n, r);
  std::vector<IrrepEntry> entries;
  entries.reserve(r + 1);
  for (int i = 0; i <= r; ++i) {
    IrrepEntry e;
    e.label = UnsignedIrrep{i};
    e.dim = dim_two_row(n, i);
    e.mult = 1;
    e.eigenvalue = family == Family::Classical ? eig_classical(n, r, i) : eig_variant(n, r, i);
    e.log_dim = log_dim_two_row(n, i);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::int64_t signed_multiplicity(int n, int r, int j, int ell, int m) {
  const int lo = std::max(ell, r - (n - j) + m);
  const int hi = std::min({r, j - ell, r - m});
  return hi >= lo ? hi - lo + 1 : 0;
}

std::vector<IrrepEntry> signed_catalog(int n, int r, Family family) {
  if (!is_signed(family)) throw std::invalid_argument("signed_catalog: family must be independent or paired");
  check_catalog_range(n, r);
  const auto rows = pascal(n);

  std::vector<IrrepEntry> entries;
  for (int j = 0; j <= n; ++j) {
    for (int ell = 0; 2 * ell <= j; ++ell) {
      for (int m = 0; 2 * m <= n - j; ++m) {
        std::int64_t mult = 0;
        const int i_lo = std::max(ell, r - (n - j));
        const int i_hi = std::min(r, j - ell);
        for (int i = i_lo; i <= i_hi; ++i)
          if (m <= std::min(r - i, (n - j) - (r - i))) ++mult;
        if (mult == 0) continue;

        IrrepEntry e;
        e.label = SignedIrrep{j, ell, m};
        e.dim = rows[n][j] * two_row_from(rows, j, ell) * two_row_from(rows, n - j, m);
        e.mult = mult;
        e.eigenvalue = family == Family::IndependentFlips ? eig_independent(n, j, ell) : eig_paired(n, j, ell, m);
        e.log_dim = log_binomial(n, j) + log_dim_two_row(j, ell) + log_dim_two_row(n - j, m);
        entries.push_back(std::move(e));
      }
    }
  }
  return entries;
}

std::vector<IrrepEntry> catalog(const ModelSpec& model) {
  return is_signed(model.family) ? signed_catalog(model.n, model.r, model.family)
                                 : unsigned_catalog(model.n, model.r, model.family);
}

BigInt total_dimension(const std::vector<IrrepEntry>& entries) {
  BigInt total = 0;
  for (const auto& e : entries) total += e.dim * e.mult;
  return total;
}

}  // namespace urnmix
