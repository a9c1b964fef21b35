#include "urnmix/exact.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "parallel.hpp"
#include "urnmix/catalog.hpp"

namespace urnmix {

namespace {

std::uint64_t checked_size(const ModelSpec& model) {
  const BigInt size = space_size(model);
  if (size > BigInt(std::numeric_limits<std::uint64_t>::max() / 2))
    throw CapacityError("state space does not fit in 64-bit indices", std::numeric_limits<std::uint64_t>::max(),
                        std::numeric_limits<std::uint64_t>::max() / 2);
  return static_cast<std::uint64_t>(size);
}

void enforce_cap(std::uint64_t size, std::uint64_t cap, const char* what) {
  if (size > cap)
    throw CapacityError(std::string(what) + " needs " + std::to_string(size) + " states, cap is " +
                            std::to_string(cap),
                        size, cap);
}

}  // namespace

// ---------------------------------------------------------------------------
// StateSpace

StateSpace::StateSpace(const ModelSpec& model) : model_(model) {
  validate_states(model);
  size_ = checked_size(model);
  binom_.assign(model.n + 1, std::vector<std::uint64_t>(model.r + 2, 0));
  for (int m = 0; m <= model.n; ++m) {
    binom_[m][0] = 1;
    for (int t = 1; t <= std::min(m, model.r + 1); ++t)
      binom_[m][t] = binom_[m - 1][t - 1] + (t <= m - 1 ? binom_[m - 1][t] : 0);
  }
  subsets_ = binom_[model.n][model.r];
}

std::uint64_t StateSpace::subset_rank(Mask rack1) const {
  std::uint64_t rank = 0;
  int t = 1;
  for (int c = 0; rack1 != 0; ++c, rack1 >>= 1)
    if (rack1 & 1) rank += binom_[c][t++];
  return rank;
}

Mask StateSpace::subset_unrank(std::uint64_t rank) const {
  Mask mask = 0;
  int c = model_.n - 1;
  for (int t = model_.r; t >= 1; --t) {
    while (binom_[c][t] > rank) --c;
    mask |= Mask{1} << c;
    rank -= binom_[c][t];
    --c;
  }
  return mask;
}

std::uint64_t StateSpace::rank(const SignedUrnState& state) const {
  return static_cast<std::uint64_t>(state.signs) * subsets_ + subset_rank(state.rack1);
}

SignedUrnState StateSpace::unrank(std::uint64_t index) const {
  return {subset_unrank(index % subsets_), static_cast<Mask>(index / subsets_)};
}

BigInt space_size(const ModelSpec& model) {
  validate(model);
  BigInt size = binomial(model.n, model.r);
  if (is_signed(model.family)) size <<= model.n;
  return size;
}

// ---------------------------------------------------------------------------
// Floating-point evolution

std::vector<double> Distribution::probabilities() const {
  std::vector<double> p(excess.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = probability(i);
  return p;
}

double Distribution::total_mass() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < excess.size(); ++i) sum += probability(i);
  return sum;
}

Evolver::Evolver(const ModelSpec& model, const EvolveOptions& options) : space_(model), options_(options) {
  enforce_cap(space_.size(), options_.state_cap, "exact evolution");
  dist_.model = model;
  dist_.excess.assign(space_.size(), -1.0 / static_cast<double>(space_.size()));
  dist_.excess[space_.rank(initial_state(model))] += 1.0;
  scratch_.resize(space_.size());
}

void Evolver::step() {
  const ModelSpec& model = space_.model();
  const double denominator = static_cast<double>(kernel_denominator(model));
  const std::vector<double>& old = dist_.excess;
  detail::parallel_for(space_.size(), options_.threads, [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t y = begin; y < end; ++y) {
      double sum = 0.0;
      for_each_transition(model, space_.unrank(y), [&](const SignedUrnState& x, std::int64_t w) {
        sum += static_cast<double>(w) * old[space_.rank(x)];
      });
      scratch_[y] = sum / denominator;
    }
  });
  // The exact excess has zero mean; removing the rounding drift keeps it from
  // sitting in the eigenvalue-1 direction where the kernel would never damp it.
  double mean = 0.0;
  for (const double v : scratch_) mean += v;
  mean /= static_cast<double>(scratch_.size());
  for (double& v : scratch_) v -= mean;
  dist_.excess.swap(scratch_);
  ++steps_;
}

void Evolver::advance_to(std::int64_t k) {
  if (k < steps_) throw std::invalid_argument("Evolver cannot step backwards");
  while (steps_ < k) step();
}

Distribution evolve(const ModelSpec& model, std::int64_t k, const EvolveOptions& options) {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  Evolver evolver(model, options);
  evolver.advance_to(k);
  return evolver.current();
}

double tv_distance(const Distribution& dist) {
  double sum = 0.0;
  for (const double e : dist.excess) sum += std::abs(e);
  return 0.5 * sum;
}

double l2n_sq_distance(const Distribution& dist) {
  double sum = 0.0;
  for (const double e : dist.excess) sum += e * e;
  return 0.25 * static_cast<double>(dist.excess.size()) * sum;
}

Distribution subset_marginal(const Distribution& dist) {
  const StateSpace space(dist.model);
  Distribution out;
  out.model = {Family::Variant, dist.model.n, dist.model.r};
  out.excess.assign(space.subset_count(), 0.0);
  for (std::uint64_t x = 0; x < dist.excess.size(); ++x) out.excess[x % space.subset_count()] += dist.excess[x];
  return out;
}

void write_distribution_csv(std::ostream& out, const Distribution& dist) {
  out << "rank,probability\n" << std::setprecision(18);
  for (std::size_t i = 0; i < dist.size(); ++i) out << i << ',' << dist.probability(i) << '\n';
}

// ---------------------------------------------------------------------------
// Rational evolution

ExactEvolver::ExactEvolver(const ModelSpec& model, const EvolveOptions& options) : space_(model), options_(options) {
  enforce_cap(space_.size(), std::min(options_.state_cap, kRationalStateCap), "rational evolution");
  dist_.model = model;
  dist_.weights.assign(space_.size(), BigInt(0));
  dist_.weights[space_.rank(initial_state(model))] = 1;
  dist_.denominator = 1;
  scratch_.resize(space_.size());
}

void ExactEvolver::step() {
  if (steps_ >= kRationalStepCap)
    throw CapacityError("rational evolution is limited to " + std::to_string(kRationalStepCap) + " steps",
                        static_cast<std::uint64_t>(steps_ + 1), static_cast<std::uint64_t>(kRationalStepCap));
  const ModelSpec& model = space_.model();
  const std::vector<BigInt>& old = dist_.weights;
  detail::parallel_for(space_.size(), options_.threads, [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t y = begin; y < end; ++y) {
      BigInt sum = 0;
      for_each_transition(model, space_.unrank(y), [&](const SignedUrnState& x, std::int64_t w) {
        sum += old[space_.rank(x)] * w;
      });
      scratch_[y] = std::move(sum);
    }
  });
  dist_.weights.swap(scratch_);
  dist_.denominator *= kernel_denominator(model);
  ++steps_;
}

ExactDistribution evolve_exact(const ModelSpec& model, std::int64_t k, const EvolveOptions& options) {
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  if (k > kRationalStepCap)
    throw CapacityError("rational evolution is limited to " + std::to_string(kRationalStepCap) + " steps",
                        static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(kRationalStepCap));
  ExactEvolver evolver(model, options);
  for (std::int64_t t = 0; t < k; ++t) evolver.step();
  return evolver.current();
}

BigRational tv_distance(const ExactDistribution& dist) {
  const BigInt size = dist.weights.size();
  BigInt sum = 0;
  for (const auto& w : dist.weights) sum += abs(size * w - dist.denominator);
  return BigRational(sum, 2 * size * dist.denominator);
}

BigRational l2n_sq_distance(const ExactDistribution& dist) {
  const BigInt size = dist.weights.size();
  BigInt sum = 0;
  for (const auto& w : dist.weights) {
    const BigInt d = size * w - dist.denominator;
    sum += d * d;
  }
  return BigRational(sum, 4 * size * dist.denominator * dist.denominator);
}

Distribution to_distribution(const ExactDistribution& dist) {
  const BigInt size = dist.weights.size();
  Distribution out;
  out.model = dist.model;
  out.excess.resize(dist.weights.size());
  for (std::size_t i = 0; i < dist.weights.size(); ++i)
    out.excess[i] = BigRational(size * dist.weights[i] - dist.denominator, size * dist.denominator)
                        .convert_to<double>();
  return out;
}

// ---------------------------------------------------------------------------
// Spectra and traces

namespace {

// Kernel weights as a dense matrix of integers (exact in double below 2^53).
Eigen::MatrixXd dense_weights(const StateSpace& space) {
  const auto size = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index x = 0; x < size; ++x)
    for_each_transition(space.model(), space.unrank(static_cast<std::uint64_t>(x)),
                        [&](const SignedUrnState& y, std::int64_t weight) {
                          w(x, static_cast<Eigen::Index>(space.rank(y))) += static_cast<double>(weight);
                        });
  return w;
}

}  // namespace

std::vector<double> spectrum(const ModelSpec& model, std::uint64_t cap) {
  const StateSpace space(model);
  enforce_cap(space.size(), cap, "dense spectrum");
  Eigen::MatrixXd w = dense_weights(space);
  const double asymmetry = (w - w.transpose()).cwiseAbs().maxCoeff() / static_cast<double>(kernel_denominator(model));
  if (asymmetry > 1e-15) throw std::logic_error("kernel matrix is not symmetric");
  const Eigen::MatrixXd k = 0.5 * (w + w.transpose()) / static_cast<double>(kernel_denominator(model));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
  std::vector<double> values(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

std::vector<double> catalog_spectrum(const ModelSpec& model) {
  std::vector<double> values;
  for (const auto& e : catalog(model)) {
    const auto copies = static_cast<std::uint64_t>(e.dim * e.mult);
    values.insert(values.end(), copies, to_double(e.eigenvalue));
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

std::vector<TraceCheck> trace_identity_check(const ModelSpec& model, int kmax, const EvolveOptions& options) {
  if (kmax < 1) throw std::invalid_argument("kmax must be at least 1");
  const StateSpace space(model);
  enforce_cap(space.size(), options.state_cap, "trace identity check");
  if (kmax > 3) enforce_cap(space.size(), kDenseTraceCap, "dense traces beyond k = 3");

  const auto entries = catalog(model);
  auto spectral_trace = [&](int k) {
    BigRational sum = 0;
    for (const auto& e : entries) {
      const BigRational lambda(BigInt(e.eigenvalue.numerator()), BigInt(e.eigenvalue.denominator()));
      BigRational power = 1;
      for (int t = 0; t < k; ++t) power *= lambda;
      sum += BigRational(e.dim * e.mult) * power;
    }
    return sum;
  };

  // Exact sparse traces of K, K^2, K^3 (numerators over D^k).
  BigInt t1 = 0, t2 = 0, t3 = 0;
  std::vector<std::pair<std::uint64_t, std::int64_t>> row_x, row_y;
  auto load_row = [&](std::uint64_t x, auto& row) {
    row.clear();
    for_each_transition(model, space.unrank(x), [&](const SignedUrnState& y, std::int64_t w) {
      row.emplace_back(space.rank(y), w);
    });
    std::sort(row.begin(), row.end());
  };
  auto lookup = [](const auto& row, std::uint64_t key) -> std::int64_t {
    const auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(key, std::numeric_limits<std::int64_t>::min()));
    return it != row.end() && it->first == key ? it->second : 0;
  };
  for (std::uint64_t x = 0; x < space.size(); ++x) {
    load_row(x, row_x);
    BigInt local2 = 0, local3 = 0;
    for (const auto& [y, wxy] : row_x) {
      if (y == x) t1 += wxy;
      local2 += BigInt(wxy) * wxy;  // K symmetric: K(x,y) K(y,x) = K(x,y)^2
      if (kmax >= 3) {
        load_row(y, row_y);
        BigInt inner = 0;
        for (const auto& [z, wyz] : row_y) {
          const std::int64_t wzx = lookup(row_x, z);
          if (wzx != 0) inner += BigInt(wyz) * wzx;
        }
        local3 += inner * wxy;
      }
    }
    t2 += local2;
    t3 += local3;
  }

  const BigInt d = kernel_denominator(model);
  std::vector<TraceCheck> rows;
  Eigen::MatrixXd kernel, power;
  if (kmax > 3) {
    kernel = dense_weights(space) / static_cast<double>(kernel_denominator(model));
    power = kernel * kernel * kernel;
  }
  for (int k = 1; k <= kmax; ++k) {
    TraceCheck row;
    row.k = k;
    const BigRational spectral = spectral_trace(k);
    row.spectral_trace = spectral.convert_to<double>();
    if (k <= 3) {
      const BigInt& numerator = k == 1 ? t1 : (k == 2 ? t2 : t3);
      BigInt scale = 1;
      for (int t = 0; t < k; ++t) scale *= d;
      const BigRational kernel_trace(numerator, scale);
      row.kernel_trace = kernel_trace.convert_to<double>();
      row.exact = true;
      const BigRational diff = kernel_trace - spectral;
      row.rel_error = diff == 0 ? 0.0
                                : std::abs(diff.convert_to<double>()) /
                                      std::max(std::abs(row.spectral_trace), std::numeric_limits<double>::min());
    } else {
      power = power * kernel;
      row.kernel_trace = power.trace();
      row.rel_error = std::abs(row.kernel_trace - row.spectral_trace) /
                      std::max(std::abs(row.spectral_trace), std::numeric_limits<double>::min());
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace urnmix
