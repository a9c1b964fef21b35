// urnmix: catalogs, bound curves, exact evolution and Monte Carlo runs for the
// Bernoulli-Laplace urn chains.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "urnmix/catalog.hpp"
#include "urnmix/exact.hpp"
#include "urnmix/montecarlo.hpp"
#include "urnmix/spectral.hpp"
#include "urnmix/verify.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace urnmix;

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kVerifyFailed = 1, kInvalid = 2, kCap = 3 };

struct InvalidArgs : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Common {
  std::string family = "variant";
  int n = 0;
  int r = 0;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::uint64_t> seed;
  std::string output;
  std::uint64_t state_cap = 1'000'000;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fraction(const BigRational& q) {
  std::ostringstream os;
  os << numerator(q) << '/' << denominator(q);
  return os.str();
}

std::string sha256(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

// a:b:step, inclusive of b when it lands on the grid.
template <class T>
std::vector<T> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw InvalidArgs("grid must be a:b:step, got '" + spec + "'");
  T a, b, step;
  try {
    if constexpr (std::is_integral_v<T>) {
      a = std::stoll(parts[0]), b = std::stoll(parts[1]), step = std::stoll(parts[2]);
    } else {
      a = std::stod(parts[0]), b = std::stod(parts[1]), step = std::stod(parts[2]);
    }
  } catch (const std::exception&) {
    throw InvalidArgs("grid must be a:b:step, got '" + spec + "'");
  }
  if (!(step > 0) || b < a) throw InvalidArgs("grid needs step > 0 and a <= b");
  std::vector<T> out;
  if constexpr (std::is_integral_v<T>) {
    for (T v = a; v <= b; v += step) out.push_back(v);
  } else {
    const auto count = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9));
    for (std::int64_t i = 0; i <= count; ++i) out.push_back(a + static_cast<T>(i) * step);
  }
  return out;
}

ModelSpec model_of(const Common& c) {
  ModelSpec m;
  try {
    m = {parse_family(c.family), c.n, c.r};
    validate(m);
  } catch (const std::invalid_argument& e) {
    throw InvalidArgs(e.what());
  }
  return m;
}

json model_json(const ModelSpec& m) {
  return {{"family", std::string(to_string(m.family))}, {"n", m.n}, {"r", m.r}};
}

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  if (const char* env = std::getenv("URNMIX_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw InvalidArgs("URNMIX_SEED must be an unsigned integer");
    }
  }
  return 0;
}

// Writes the payload and its manifest. `checksummed` is what the checksum
// covers when it differs from the payload (simulate drops the elapsed field).
void emit(const Common& c, const std::string& command, const json& model, const json& params,
          std::optional<std::uint64_t> seed, std::chrono::steady_clock::time_point start,
          const std::string& payload, const std::string& checksummed) {
  if (c.output.empty()) {
    std::cout << payload << std::flush;
  } else {
    std::ofstream out(c.output, std::ios::binary);
    if (!(out << payload)) throw std::runtime_error("cannot write " + c.output);
  }
  json manifest;
  manifest["command"] = command;
  manifest["model"] = model;
  manifest["parameters"] = params;
  manifest["seed"] = seed ? json(*seed) : json(nullptr);
  manifest["tool_version"] = kVersion;
  manifest["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  manifest["output_checksums"] = {{c.output.empty() ? "stdout" : c.output, "sha256:" + sha256(checksummed)}};
  if (c.output.empty()) {
    std::cerr << manifest.dump() << '\n';
  } else {
    std::ofstream(c.output + ".manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
  }
}

std::string label_text(const IrrepLabel& label) {
  if (const auto* u = std::get_if<UnsignedIrrep>(&label)) return "i=" + std::to_string(u->i);
  const auto& s = std::get<SignedIrrep>(label);
  return "j=" + std::to_string(s.j) + ";l=" + std::to_string(s.ell) + ";m=" + std::to_string(s.m);
}

int cmd_catalog(const Common& c) {
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec m = model_of(c);
  const auto entries = catalog(m);
  std::ostringstream out;
  out << "family,n,r,label,dim,mult,eigenvalue_num,eigenvalue_den\n";
  for (const auto& e : entries)
    out << to_string(m.family) << ',' << m.n << ',' << m.r << ',' << label_text(e.label) << ',' << e.dim << ','
        << e.mult << ',' << e.eigenvalue.numerator() << ',' << e.eigenvalue.denominator() << '\n';
  out << "#total," << total_dimension(entries) << ',' << space_size(m) << '\n';
  emit(c, "catalog", model_json(m), json::object(), std::nullopt, start, out.str(), out.str());
  return kOk;
}

int cmd_bounds(const Common& c, const std::string& k_grid, const std::string& c_grid,
               std::optional<std::int64_t> k_single, std::optional<double> c_single) {
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec m = model_of(c);
  const int given = !k_grid.empty() + !c_grid.empty() + k_single.has_value() + c_single.has_value();
  if (given != 1) throw InvalidArgs("bounds needs exactly one of --k, --k-grid, --c, --c-grid");
  const bool variant = m.family == Family::Variant;
  std::ostringstream out;
  json params;
  if (!k_grid.empty() || k_single) {
    std::vector<std::int64_t> ks = k_single ? std::vector<std::int64_t>{*k_single} : parse_grid<std::int64_t>(k_grid);
    for (const auto k : ks)
      if (k < 0) throw InvalidArgs("k must be nonnegative");
    params["k_grid"] = k_single ? std::to_string(*k_single) : k_grid;
    out << "k,l2n_sq_bound,tv_upper_raw,tv_upper";
    if (variant) out << ",mean_s1,single_term_proxy";
    out << '\n';
    for (const auto& p : bound_curve(m, ks)) {
      out << p.k << ',' << fmt(p.l2n_sq_bound) << ',' << fmt(p.tv_upper_raw) << ',' << fmt(p.tv_upper);
      if (variant) {
        const double s2 = moment_s2(m.n, p.k);
        out << ',' << fmt(moment_s1(m.n, p.k)) << ',' << fmt((m.n - 1) * s2);
      }
      out << '\n';
    }
  } else {
    std::vector<double> cs = c_single ? std::vector<double>{*c_single} : parse_grid<double>(c_grid);
    params["c_grid"] = c_single ? fmt(*c_single) : c_grid;
    out << "c,theorem_k,l2n_sq_bound,tv_upper";
    if (variant) out << ",k_threshold,tv_guarantee,var_ratio,vacuous";
    out << '\n';
    for (const double cv : cs) {
      out << fmt(cv);
      if (cv > 0) {
        const std::int64_t k = theorem_k(m, cv);
        const auto t = tv_upper(m, k);
        out << ',' << k << ',' << fmt(t.raw * t.raw) << ',' << fmt(t.clamped);
      } else {
        out << ",,,";
      }
      if (variant) {
        if (m.n >= 3 && cv >= 0 && cv <= std::log(m.n)) {
          const auto lb = lower_bound(m.n, m.r, cv);
          out << ',' << lb.k_threshold << ',' << fmt(lb.tv_guarantee) << ',' << fmt(lb.var_ratio) << ','
              << (lb.vacuous() ? "true" : "false");
        } else {
          out << ",,,,";
        }
      }
      out << '\n';
    }
  }
  emit(c, "bounds", model_json(m), params, std::nullopt, start, out.str(), out.str());
  return kOk;
}

int cmd_exact(const Common& c, const std::string& k_grid, std::optional<std::int64_t> k_single, bool rational) {
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec m = model_of(c);
  if (k_grid.empty() == !k_single) throw InvalidArgs("exact needs exactly one of --k, --k-grid");
  std::vector<std::int64_t> ks = k_single ? std::vector<std::int64_t>{*k_single} : parse_grid<std::int64_t>(k_grid);
  for (const auto k : ks)
    if (k < 0) throw InvalidArgs("k must be nonnegative");
  try {
    validate_states(m);
  } catch (const std::invalid_argument& e) {
    throw InvalidArgs(e.what());
  }
  const EvolveOptions opts{.state_cap = c.state_cap, .threads = c.threads};
  std::ostringstream out;
  out << "k,tv_exact,l2n_sq_exact,tv_upper,plancherel_rel_err\n";
  if (rational) {
    ExactEvolver ev(m, opts);
    for (const auto k : ks) {
      if (k < ev.steps()) throw InvalidArgs("k grid must be ascending");
      if (k > kRationalStepCap)
        throw CapacityError("rational mode needs " + std::to_string(k) + " steps, cap is " +
                                std::to_string(kRationalStepCap),
                            static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(kRationalStepCap));
      while (ev.steps() < k) ev.step();
      const BigRational l2n = l2n_sq_distance(ev.current());
      const BigRational bound = l2n_sq_bound_exact(m, k);
      const BigRational diff = abs(l2n - bound);
      const BigRational rel = bound == 0 ? diff : BigRational(diff / bound);
      out << k << ',' << fraction(tv_distance(ev.current())) << ',' << fraction(l2n) << ','
          << fmt(tv_upper(m, k).clamped) << ',' << fraction(rel) << '\n';
    }
  } else {
    Evolver ev(m, opts);
    for (const auto k : ks) {
      if (k < ev.steps()) throw InvalidArgs("k grid must be ascending");
      ev.advance_to(k);
      const double l2n = l2n_sq_distance(ev.current());
      const double bound = l2n_sq_bound(m, k);
      const double rel = bound == 0 ? std::abs(l2n) : std::abs(l2n - bound) / bound;
      out << k << ',' << fmt(tv_distance(ev.current())) << ',' << fmt(l2n) << ',' << fmt(tv_upper(m, k).clamped)
          << ',' << fmt(rel) << '\n';
    }
  }
  json params{{"k_grid", k_single ? std::to_string(*k_single) : k_grid}, {"rational", rational},
              {"threads", c.threads}, {"state_cap", c.state_cap}};
  emit(c, "exact", model_json(m), params, std::nullopt, start, out.str(), out.str());
  return kOk;
}

int cmd_simulate(const Common& c, std::int64_t k, std::uint64_t walkers, const std::string& states_path) {
  const auto start = std::chrono::steady_clock::now();
  const ModelSpec m = model_of(c);
  if (k < 0 || walkers < 1) throw InvalidArgs("simulate needs k >= 0 and walkers >= 1");
  try {
    validate_states(m);
  } catch (const std::invalid_argument& e) {
    throw InvalidArgs(e.what());
  }
  const std::uint64_t seed = resolve_seed(c);
  const SimSummary s = run({m, k, walkers, seed}, {.threads = c.threads, .keep_terminal_states = !states_path.empty()});
  json j;
  j["family"] = std::string(to_string(m.family));
  j["n"] = m.n;
  j["r"] = m.r;
  j["k"] = k;
  j["walkers"] = walkers;
  j["seed"] = seed;
  j["mean_s1"] = s.mean_s1;
  j["stderr_s1"] = s.stderr_s1;
  j["expected_mean_s1"] = m.family == Family::Variant ? json(moment_s1(m.n, k)) : json(nullptr);
  j["empirical_tv"] = s.empirical_tv ? json(*s.empirical_tv) : json(nullptr);
  j["tv_bias_ceiling"] = s.tv_bias_ceiling ? json(*s.tv_bias_ceiling) : json(nullptr);
  const std::string stable = j.dump(2) + '\n';
  j["elapsed_seconds"] = s.elapsed.count();
  if (!states_path.empty()) {
    std::ofstream dump(states_path, std::ios::binary);
    write_terminal_states(dump, s.terminal_states);
  }
  json params{{"k", k}, {"walkers", walkers}, {"threads", c.threads}};
  if (!states_path.empty()) params["terminal_states"] = states_path;
  emit(c, "simulate", model_json(m), params, seed, start, j.dump(2) + '\n', stable);
  return kOk;
}

int cmd_verify(const Common& c, const std::string& level, bool mutate) {
  const auto start = std::chrono::steady_clock::now();
  VerifyOptions opts;
  if (level == "quick") {
    opts.level = VerifyLevel::Quick;
  } else if (level == "full") {
    opts.level = VerifyLevel::Full;
  } else {
    throw InvalidArgs("--level must be quick or full");
  }
  opts.threads = c.threads;
  if (mutate)
    opts.eigenvalue_override = [](const ModelSpec& m, const IrrepEntry& e) {
      return is_trivial(e.label, m.n) ? e.eigenvalue : e.eigenvalue + Rational(1, 1000);
    };
  const auto results = run_verification(opts);
  std::ostringstream out;
  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.passed;
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
  }
  out << (ok ? "verification passed\n" : "verification FAILED\n");
  emit(c, "verify", nullptr, {{"level", level}, {"threads", c.threads}}, std::nullopt, start, out.str(), out.str());
  return ok ? kOk : kVerifyFailed;
}

void add_model_flags(CLI::App* app, Common& c) {
  app->add_option("--family", c.family, "classical|variant|independent|paired")->required();
  app->add_option("--n", c.n, "number of balls")->required();
  app->add_option("--r", c.r, "size of rack 1")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bernoulli-Laplace urn chains: spectra, bounds, exact and simulated mixing"};
  app.require_subcommand(1);
  Common c;
  app.add_option("--threads", c.threads, "worker threads (default: hardware count)")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "master seed (fallback: URNMIX_SEED, then 0)");
  app.add_option("--output", c.output, "write output to PATH and the manifest to PATH.manifest.json");
  app.add_option("--state-cap", c.state_cap, "maximum states for exact evolution");
  app.set_version_flag("--version", kVersion);

  std::string k_grid, c_grid, level = "quick", states_path;
  std::optional<std::int64_t> k_single;
  std::optional<double> c_single;
  std::int64_t sim_k = 0;
  std::uint64_t walkers = 1;
  bool rational = false, mutate = false;

  auto* catalog_cmd = app.add_subcommand("catalog", "irreducible constituents, dimensions and eigenvalues (CSV)");
  add_model_flags(catalog_cmd, c);

  auto* bounds_cmd = app.add_subcommand("bounds", "upper-bound curve or theorem step counts (CSV)");
  add_model_flags(bounds_cmd, c);
  bounds_cmd->add_option("--k", k_single, "single step count");
  bounds_cmd->add_option("--k-grid", k_grid, "a:b:step");
  bounds_cmd->add_option("--c", c_single, "single offset c");
  bounds_cmd->add_option("--c-grid", c_grid, "a:b:step");

  auto* exact_cmd = app.add_subcommand("exact", "exact distances to uniform (CSV)");
  add_model_flags(exact_cmd, c);
  exact_cmd->add_option("--k", k_single, "single step count");
  exact_cmd->add_option("--k-grid", k_grid, "a:b:step");
  exact_cmd->add_flag("--rational", rational, "exact rational arithmetic");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo walkers (JSON)");
  add_model_flags(sim_cmd, c);
  sim_cmd->add_option("--k", sim_k, "steps per walker")->required();
  sim_cmd->add_option("--walkers", walkers, "number of walkers")->required();
  sim_cmd->add_option("--terminal-states", states_path, "binary dump of terminal states");

  auto* verify_cmd = app.add_subcommand("verify", "self-check suites");
  verify_cmd->add_option("--level", level, "quick|full");
  verify_cmd->add_flag("--mutate-eigenvalue", mutate)->group("");

  // Global flags are also accepted after the subcommand name.
  for (auto* sub : {catalog_cmd, bounds_cmd, exact_cmd, sim_cmd, verify_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*catalog_cmd) return cmd_catalog(c);
    if (*bounds_cmd) return cmd_bounds(c, k_grid, c_grid, k_single, c_single);
    if (*exact_cmd) return cmd_exact(c, k_grid, k_single, rational);
    if (*sim_cmd) return cmd_simulate(c, sim_k, walkers, states_path);
    if (*verify_cmd) return cmd_verify(c, level, mutate);
  } catch (const InvalidArgs& e) {
    std::cerr << "urnmix: " << e.what() << '\n';
    return kInvalid;
  } catch (const CapacityError& e) {
    std::cerr << "urnmix: " << e.what() << " (required " << e.required() << ", cap " << e.cap() << ")\n";
    return kCap;
  } catch (const std::invalid_argument& e) {
    std::cerr << "urnmix: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "urnmix: " << e.what() << '\n';
    return kVerifyFailed;
  }
  return kInvalid;
}
