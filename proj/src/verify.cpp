#include "urnmix/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "urnmix/exact.hpp"
#include "urnmix/montecarlo.hpp"
#include "urnmix/spectral.hpp"

namespace urnmix {

namespace {

const Family kUnsigned[] = {Family::Classical, Family::Variant};
const Family kSigned[] = {Family::IndependentFlips, Family::PairedFlips};

std::string label(const ModelSpec& m) {
  std::ostringstream os;
  os << to_string(m.family) << '(' << m.n << ',' << m.r << ')';
  return os.str();
}

std::vector<ModelSpec> spectrum_grid() {
  std::vector<ModelSpec> grid;
  for (const Family f : kUnsigned)
    for (const auto& [n, r] : {std::pair{4, 2}, {5, 2}, {6, 3}}) grid.push_back({f, n, r});
  for (const Family f : kSigned)
    for (const auto& [n, r] : {std::pair{2, 1}, {3, 1}, {4, 2}}) grid.push_back({f, n, r});
  return grid;
}

std::vector<IrrepEntry> effective_catalog(const ModelSpec& model, const VerifyOptions& options) {
  auto entries = catalog(model);
  if (options.eigenvalue_override)
    for (auto& e : entries) e.eigenvalue = options.eigenvalue_override(model, e);
  return entries;
}

std::vector<double> predicted_spectrum(const std::vector<IrrepEntry>& entries) {
  std::vector<double> values;
  for (const auto& e : entries)
    values.insert(values.end(), static_cast<std::uint64_t>(e.dim * e.mult), to_double(e.eigenvalue));
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double predicted_l2n(const std::vector<IrrepEntry>& entries, int n, std::int64_t k) {
  double sum = 0.0;
  for (const auto& e : entries) {
    if (is_trivial(e.label, n)) continue;
    sum += static_cast<double>(e.dim * e.mult) * std::pow(to_double(e.eigenvalue), 2.0 * static_cast<double>(k));
  }
  return 0.25 * sum;
}

double rel_err(double a, double b) {
  const double scale = std::abs(b);
  return scale > 0 ? std::abs(a - b) / scale : std::abs(a - b);
}

CheckResult dimension_identities() {
  CheckResult res{"dimension identities", true, ""};
  int cases = 0;
  for (int n = 2; n <= 14; ++n)
    for (int r = 1; 2 * r <= n; ++r)
      for (const Family f : kUnsigned) {
        const ModelSpec m{f, n, r};
        ++cases;
        if (total_dimension(catalog(m)) != space_size(m)) {
          res.passed = false;
          res.detail = "mismatch at " + label(m);
          return res;
        }
      }
  for (int n = 2; n <= 10; ++n)
    for (int r = 1; 2 * r <= n; ++r)
      for (const Family f : kSigned) {
        const ModelSpec m{f, n, r};
        ++cases;
        if (total_dimension(catalog(m)) != space_size(m)) {
          res.passed = false;
          res.detail = "mismatch at " + label(m);
          return res;
        }
      }
  res.detail = std::to_string(cases) + " models";
  return res;
}

CheckResult spectrum_match(const VerifyOptions& options) {
  CheckResult res{"spectrum match", true, ""};
  double worst = 0.0;
  for (const auto& m : spectrum_grid()) {
    const auto got = spectrum(m);
    const auto want = predicted_spectrum(effective_catalog(m, options));
    if (got.size() != want.size()) {
      res.passed = false;
      res.detail = "size mismatch at " + label(m);
      return res;
    }
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    if (worst > 1e-8) {
      res.passed = false;
      res.detail = "spectrum mismatch: max deviation " + std::to_string(worst) + " at " + label(m);
      return res;
    }
  }
  std::ostringstream os;
  os << "max deviation " << worst;
  res.detail = os.str();
  return res;
}

CheckResult plancherel(const std::vector<ModelSpec>& grid, std::int64_t kmax, const VerifyOptions& options) {
  CheckResult res{"Plancherel identity k<=" + std::to_string(kmax), true, ""};
  double worst = 0.0;
  for (const auto& m : grid) {
    const auto entries = effective_catalog(m, options);
    Evolver ev(m, {.state_cap = 1'000'000, .threads = options.threads});
    for (std::int64_t k = 1; k <= kmax; ++k) {
      ev.step();
      const double err = rel_err(l2n_sq_distance(ev.current()), predicted_l2n(entries, m.n, k));
      worst = std::max(worst, err);
      if (err > 1e-9) {
        res.passed = false;
        res.detail = "rel error " + std::to_string(err) + " at " + label(m) + " k=" + std::to_string(k);
        return res;
      }
    }
  }
  std::ostringstream os;
  os << "max rel error " << worst;
  res.detail = os.str();
  return res;
}

CheckResult tv_below_bound(const std::vector<ModelSpec>& grid, std::int64_t kmax, const VerifyOptions& options) {
  CheckResult res{"TV below spectral bound", true, ""};
  int violations = 0;
  for (const auto& m : grid) {
    const auto entries = effective_catalog(m, options);
    Evolver ev(m, {.state_cap = 1'000'000, .threads = options.threads});
    for (std::int64_t k = 1; k <= kmax; ++k) {
      ev.step();
      const double bound = std::sqrt(predicted_l2n(entries, m.n, k));
      if (tv_distance(ev.current()) > bound * (1 + 1e-12) + 1e-15) ++violations;
    }
  }
  res.passed = violations == 0;
  res.detail = std::to_string(violations) + " violations";
  return res;
}

CheckResult trace_identities(const VerifyOptions& options) {
  CheckResult res{"trace identities k<=3", true, ""};
  for (const auto& m : spectrum_grid()) {
    const auto entries = effective_catalog(m, options);
    for (const auto& t : trace_identity_check(m, 3)) {
      double predicted = 0.0;
      for (const auto& e : entries)
        predicted += static_cast<double>(e.dim * e.mult) * std::pow(to_double(e.eigenvalue), t.k);
      if (rel_err(t.kernel_trace, predicted) > 1e-10) {
        res.passed = false;
        res.detail = "trace mismatch at " + label(m) + " k=" + std::to_string(t.k);
        return res;
      }
    }
  }
  return res;
}

CheckResult moments(const VerifyOptions& options) {
  CheckResult res{"s1 moments under exact evolution", true, ""};
  for (const int n : {6, 8, 10}) {
    const ModelSpec m{Family::Variant, n, n / 2};
    Evolver ev(m, {.state_cap = 1'000'000, .threads = options.threads});
    for (std::int64_t k = 1; k <= 15; ++k) {
      ev.step();
      double mean = 0.0;
      for (std::uint64_t x = 0; x < ev.space().size(); ++x)
        mean += ev.current().probability(x) *
                to_double(spherical_s1(n, n / 2, UrnState{ev.space().unrank(x).rack1}));
      if (std::abs(mean - moment_s1(n, k)) > 1e-10) {
        res.passed = false;
        res.detail = "E[s1] off at " + label(m) + " k=" + std::to_string(k);
        return res;
      }
    }
  }
  return res;
}

CheckResult signed_marginals(const VerifyOptions& options) {
  CheckResult res{"signed chains project to the variant chain", true, ""};
  for (const Family f : kSigned) {
    Evolver signed_ev({f, 6, 3}, {.state_cap = 1'000'000, .threads = options.threads});
    Evolver plain({Family::Variant, 6, 3}, {.state_cap = 1'000'000, .threads = options.threads});
    for (int k = 1; k <= 10; ++k) {
      signed_ev.step();
      plain.step();
      const Distribution marginal = subset_marginal(signed_ev.current());
      for (std::size_t x = 0; x < marginal.size(); ++x)
        if (std::abs(marginal.probability(x) - plain.current().probability(x)) > 1e-12) {
          res.passed = false;
          res.detail = std::string(to_string(f)) + " k=" + std::to_string(k);
          return res;
        }
    }
  }
  return res;
}

CheckResult monte_carlo(const VerifyOptions& options) {
  CheckResult res{"Monte Carlo s1 mean", true, ""};
  const SimSummary s = run({{Family::Variant, 100, 50}, 115, 100'000, 20240601}, {.threads = options.threads});
  const double z = (s.mean_s1 - moment_s1(100, 115)) / s.stderr_s1;
  res.passed = std::abs(z) < 4;
  std::ostringstream os;
  os << "z = " << z;
  res.detail = os.str();
  return res;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& options) {
  std::vector<CheckResult> results;
  results.push_back(dimension_identities());
  results.push_back(spectrum_match(options));
  const auto small = spectrum_grid();
  if (options.level == VerifyLevel::Quick) {
    results.push_back(plancherel(small, 5, options));
    results.push_back(tv_below_bound(small, 5, options));
    return results;
  }
  auto grid = small;
  grid.push_back({Family::Variant, 12, 6});
  grid.push_back({Family::IndependentFlips, 6, 3});
  results.push_back(plancherel(grid, 20, options));
  results.push_back(tv_below_bound(grid, 20, options));
  results.push_back(trace_identities(options));
  results.push_back(moments(options));
  results.push_back(signed_marginals(options));
  results.push_back(monte_carlo(options));
  return results;
}

}  // namespace urnmix
