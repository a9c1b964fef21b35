#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

struct Result {
  int code;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " URNMIX_CLI " " + args + " >cli_out.txt 2>cli_err.txt";
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp("cli_out.txt"), slurp("cli_err.txt")};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string f; std::getline(ss, f, ',');) out.push_back(f);
  return out;
}

}  // namespace

TEST_CASE("catalog") {
  auto r = cli("catalog --family independent --n 2 --r 1");
  CHECK(r.code == 0);
  auto l = lines(r.out);
  REQUIRE(l.size() == 7);
  CHECK(l.front() == "family,n,r,label,dim,mult,eigenvalue_num,eigenvalue_den");
  CHECK(l.back() == "#total,8,8");

  r = cli("catalog --family variant --n 4 --r 2");
  l = lines(r.out);
  REQUIRE(l.size() == 5);
  CHECK(l[2] == "variant,4,2,i=1,3,1,1,2");
  CHECK(l.back() == "#total,6,6");

  r = cli("catalog --family classical --n 5 --r 3");
  CHECK(r.code == 2);
  CHECK(r.err.find("r must lie") != std::string::npos);
  CHECK(cli("catalog --family nonsense --n 5 --r 2").code == 2);
  CHECK(cli("catalog --n 5 --r 2").code == 2);
}

TEST_CASE("bounds") {
  auto r = cli("bounds --family variant --n 100 --r 50 --c 2");
  CHECK(r.code == 0);
  auto row = fields(lines(r.out).at(1));
  CHECK(row.at(4) == "65");
  CHECK(row.at(7) == "true");

  r = cli("bounds --family variant --n 100 --r 50 --k-grid 216:216:1");
  row = fields(lines(r.out).at(1));
  CHECK(row.at(0) == "216");
  CHECK(std::stod(row.at(3)) == doctest::Approx(0.063583747953467842).epsilon(1e-15));

  r = cli("bounds --family paired --n 100 --r 50 --k 431");
  CHECK(std::stod(fields(lines(r.out).at(1)).at(3)) == doctest::Approx(0.006735689022140689).epsilon(1e-15));

  r = cli("bounds --family paired --n 20 --r 5 --k-grid 0:100:10");
  CHECK(lines(r.out).size() == 12);

  CHECK(cli("bounds --family variant --n 10 --r 5 --k-grid 5:1:1").code == 2);
  CHECK(cli("bounds --family variant --n 10 --r 5 --k-grid 1:5").code == 2);
  CHECK(cli("bounds --family variant --n 10 --r 5").code == 2);
  CHECK(cli("bounds --family variant --n 10 --r 5 --k 3 --c 1").code == 2);
}

TEST_CASE("exact") {
  auto r = cli("exact --family variant --n 2 --r 1 --k 1");
  CHECK(r.code == 0);
  CHECK(fields(lines(r.out).at(1)).at(1) == "0");

  r = cli("exact --family independent --n 2 --r 1 --k-grid 0:5:1");
  auto l = lines(r.out);
  REQUIRE(l.size() == 7);
  CHECK(l[0] == "k,tv_exact,l2n_sq_exact,tv_upper,plancherel_rel_err");
  for (std::size_t i = 1; i < l.size(); ++i) CHECK(std::stod(fields(l[i]).at(4)) <= 1e-9);

  r = cli("exact --family classical --n 2 --r 1 --k-grid 1:2:1");
  for (std::size_t i = 1; i <= 2; ++i) CHECK(std::stod(fields(lines(r.out).at(i)).at(1)) == 0.5);

  r = cli("exact --family variant --n 4 --r 2 --k 3 --rational");
  CHECK(r.code == 0);
  CHECK(fields(lines(r.out).at(1)).at(1) == "13/192");
  CHECK(fields(lines(r.out).at(1)).at(4) == "0/1");

  r = cli("exact --family variant --n 30 --r 15 --k 1");
  CHECK(r.code == 3);
  CHECK(r.err.find("155117520") != std::string::npos);
  CHECK(cli("exact --family variant --n 10 --r 5 --k 1 --state-cap 100").code == 3);
  CHECK(cli("exact --family paired --n 8 --r 4 --k 1 --rational").code == 3);
  CHECK(cli("exact --family variant --n 4 --r 2 --k 51 --rational").code == 3);
}

TEST_CASE("simulate") {
  auto r = cli("simulate --family variant --n 100 --r 50 --k 0 --walkers 10");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["mean_s1"].get<double>() == 1.0);

  const std::string args = "simulate --family independent --n 5 --r 2 --k 7 --walkers 20000 --seed 11";
  auto a = nlohmann::json::parse(cli(args + " --threads 1").out);
  auto b = nlohmann::json::parse(cli(args + " --threads 3").out);
  a.erase("elapsed_seconds");
  b.erase("elapsed_seconds");
  CHECK(a.dump() == b.dump());
  CHECK(a["empirical_tv"].is_number());

  // Seed from the environment when --seed is absent.
  auto e1 = nlohmann::json::parse(cli("simulate --family variant --n 8 --r 4 --k 3 --walkers 100", "URNMIX_SEED=11").out);
  CHECK(e1["seed"].get<std::uint64_t>() == 11);
  CHECK(cli("simulate --family variant --n 8 --r 4 --k 3 --walkers 100", "URNMIX_SEED=abc").code == 2);
}

TEST_CASE("manifests") {
  const std::string args = "simulate --family paired --n 6 --r 3 --k 4 --walkers 50 --seed 2 --terminal-states states.bin";
  auto r1 = cli(args + " --output sim1.json");
  auto r2 = cli(args + " --output sim2.json --threads 2");
  CHECK(r1.code == 0);
  const auto m1 = nlohmann::ordered_json::parse(slurp("sim1.json.manifest.json"));
  const auto m2 = nlohmann::ordered_json::parse(slurp("sim2.json.manifest.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : m1.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"command", "model", "parameters", "seed", "tool_version",
                                         "wall_time_seconds", "output_checksums"});
  CHECK(m1["output_checksums"]["sim1.json"] == m2["output_checksums"]["sim2.json"]);
  CHECK(slurp("states.bin").size() == 8 + 16 * 50);

  auto c = cli("catalog --family variant --n 6 --r 3");
  CHECK(c.err.find("\"command\":\"catalog\"") != std::string::npos);
  CHECK(c.err.find("sha256:") != std::string::npos);
}

TEST_CASE("verify") {
  auto r = cli("verify --level quick");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  r = cli("verify --level quick --mutate-eigenvalue");
  CHECK(r.code == 1);
  CHECK(r.out.find("spectrum mismatch") != std::string::npos);
  CHECK(cli("verify --level medium").code == 2);
}
