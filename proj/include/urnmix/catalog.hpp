#pragma once

// Exact bookkeeping for the irreducible constituents of L(X), where X is the
// rack-subset space S_n/(S_r x S_{n-r}) or its signed analogue
// (Z_2 wr S_n)/(S_r x S_{n-r}).

#include <cstdint>
#include <variant>
#include <vector>

#include "urnmix/model.hpp"

namespace urnmix {

/// Two-row partition [n-i, i]; i = 0 is the trivial representation.
struct UnsignedIrrep {
  int i = 0;
  friend bool operator==(const UnsignedIrrep&, const UnsignedIrrep&) = default;
};

/// Pair of two-row partitions ([j-ell, ell]; [(n-j)-m, m]).
struct SignedIrrep {
  int j = 0;
  int ell = 0;
  int m = 0;
  friend bool operator==(const SignedIrrep&, const SignedIrrep&) = default;
};

using IrrepLabel = std::variant<UnsignedIrrep, SignedIrrep>;

struct IrrepEntry {
  IrrepLabel label;
  BigInt dim;               // d_rho
  std::int64_t mult = 1;    // m_rho
  Rational eigenvalue{1};   // scalar of the chain's Fourier transform at rho
  double log_dim = 0.0;     // natural log of dim, for overflow-free bounds
};

/// True for [n] resp. ([n]; []).
bool is_trivial(const IrrepLabel& label, int n);

/// C(n, k) with C(n, k) = 0 for k < 0 or k > n.
BigInt binomial(int n, int k);

/// Natural log of C(n, k); -inf when the binomial is zero.
double log_binomial(int n, int k);

/// d_[n-i,i] = C(n,i) - C(n,i-1). Throws std::invalid_argument unless 0 <= i <= n/2.
BigInt dim_two_row(int n, int i);

/// log of dim_two_row(n, i), evaluated without forming the integer.
double log_dim_two_row(int n, int i);

/// chi_[n-i,i](transposition) / d_[n-i,i].
Rational char_ratio_two_row(int n, int i);

/// Multiplicity-free catalog, one entry per i = 0..r. family must be Classical or Variant.
std::vector<IrrepEntry> unsigned_catalog(int n, int r, Family family);

/// Signed catalog in lexicographic (j, ell, m) order. family must be
/// IndependentFlips or PairedFlips. Multiplicities are counted by walking the
/// i-range of the direct-sum decomposition.
std::vector<IrrepEntry> signed_catalog(int n, int r, Family family);

std::vector<IrrepEntry> catalog(const ModelSpec& model);

/// Number of i in [max(ell, r-(n-j)), min(r, j-ell)] with m <= min(r-i, (n-j)-(r-i)),
/// counted in O(1) as the length of the intersected interval.
std::int64_t signed_multiplicity(int n, int r, int j, int ell, int m);

/// Sum of dim * mult over a catalog.
BigInt total_dimension(const std::vector<IrrepEntry>& entries);

}  // namespace urnmix
