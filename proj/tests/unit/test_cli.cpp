#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "cli.hpp"

using exactreg::cli::run;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path fresh_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("exactreg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("list parsing") {
    CHECK(exactreg::cli::parse_int_list("2..6") == std::vector<int>{2, 3, 4, 5, 6});
    CHECK(exactreg::cli::parse_int_list("2,3,4") == std::vector<int>{2, 3, 4});
    CHECK(exactreg::cli::parse_real_list("0.05,0.1") == std::vector<double>{0.05, 0.1});
    CHECK_THROWS(exactreg::cli::parse_int_list("6..2"));
    CHECK_THROWS(exactreg::cli::parse_int_list("a"));
  }

  TEST_CASE("bounds-table for the B-infinity cell n=16, eps=0.05") {
    const auto r = call({"bounds-table", "--model", "binf", "--n", "16", "--eps", "0.05"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["ok"] == true);
    std::vector<std::string> names;
    for (const auto& b : j["bounds"]) names.push_back(b["name"]);
    CHECK(names == std::vector<std::string>{"binf_lower_prop", "binf_sphere_upper", "binf_margin_upper",
                                            "binf_linear_representer_upper", "binf_linear_margin_upper",
                                            "linear_polytope", "membership_failure"});
    CHECK(j["bounds"][0]["lower"].get<double>() == doctest::Approx(0.3210129061784215));
    CHECK(r.err.find("bounds-table finished") != std::string::npos);
  }

  TEST_CASE("bounds-table for Birkhoff") {
    const auto r = call({"bounds-table", "--model", "birkhoff", "--d", "4", "--eps", "0.25"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["bounds"][0]["name"] == "birkhoff_prob");
    CHECK(j["bounds"][0]["upper"].get<double>() == doctest::Approx(0.8805670317332803));
  }

  TEST_CASE("usage errors exit with 2") {
    CHECK(call({"bounds-table", "--model", "binf", "--n", "4", "--eps", "0.1", "--bogus"}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({}).code == 2);
    CHECK(call({"bounds-table", "--model", "binf", "--eps", "0.1"}).code == 2);
    CHECK(call({"bounds-table", "--model", "binf", "--n", "4", "--eps", "0.1", "--p-mode", "uniform"}).code == 2);
    const auto r = call({"verify-margin", "--dims", "2", "--eps", "0.1", "--samples", "2000"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--seed") != std::string::npos);
    CHECK(call({"thresholds", "--sizes", "2", "--trials", "10"}).code == 2);
    CHECK(call({"er-grid", "--seed", "1"}).code == 2);
    CHECK(call({"er-grid", "--config", "/nonexistent/grid.cfg"}).code == 2);
  }

  TEST_CASE("help exits with 0") { CHECK(call({"--help"}).code == 0); }

  TEST_CASE("a small verify-margin run passes") {
    const auto r = call({"verify-margin", "--dims", "2,3", "--eps", "0.1", "--samples", "200000", "--seed", "3",
                         "--threads", "2"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["ok"] == true);
    CHECK(j["seed"] == 3);
  }

  TEST_CASE("verify output does not depend on --threads") {
    const std::vector<std::string> base{"verify-representer", "--dims", "2..3", "--cases", "4", "--samples",
                                        "20000", "--seed", "5"};
    auto a = base, b = base;
    a.insert(a.end(), {"--threads", "1"});
    b.insert(b.end(), {"--threads", "3"});
    const auto ra = call(a), rb = call(b);
    CHECK(ra.code == 0);
    CHECK(ra.out == rb.out);
  }

  TEST_CASE("thresholds subcommand") {
    const auto r = call({"thresholds", "--model", "hypercube", "--sizes", "1,4", "--trials", "400", "--seed", "9"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["mean_eps_bar"].get<double>() == doctest::Approx(0.7979).epsilon(0.1));
    const auto e = call({"thresholds", "--model", "simplex", "--sizes", "3", "--trials", "10", "--seed", "1",
                         "--regularizer", "entropy"});
    CHECK(e.code == 0);
    CHECK(nlohmann::json::parse(e.out)["rows"][0]["bound_lower"] == "nan");
  }

  TEST_CASE("er-grid writes byte-identical files on reruns and across thread counts") {
    const auto dir = fresh_dir("grid");
    const auto cfg = dir / "grid.cfg";
    std::ofstream(cfg) << "model=hypercube\nn_list=2,4\nregularizer=quadratic\neps_min=0.01\neps_max=1\n"
                          "eps_points=5\ntrials=30\nseed=11\nout_dir="
                       << (dir / "a").string() << "\n";
    const auto r1 = call({"er-grid", "--config", cfg.string(), "--threads", "1"});
    REQUIRE(r1.code == 0);
    const auto r2 = call({"er-grid", "--config", cfg.string(), "--out-dir", (dir / "b").string(), "--threads", "3"});
    REQUIRE(r2.code == 0);
    for (const char* f : {"grid.csv", "thresholds.csv"}) {
      REQUIRE(fs::exists(dir / "a" / f));
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    // meta.json echoes out_dir, which is the only field allowed to differ.
    auto ma = nlohmann::json::parse(slurp(dir / "a" / "meta.json"));
    auto mb = nlohmann::json::parse(slurp(dir / "b" / "meta.json"));
    CHECK(ma["config"]["out_dir"] == (dir / "a").string());
    ma["config"].erase("out_dir");
    mb["config"].erase("out_dir");
    CHECK(ma == mb);
    const auto meta_first = slurp(dir / "a" / "meta.json");
    const auto first = slurp(dir / "a" / "grid.csv");
    CHECK(call({"er-grid", "--config", cfg.string()}).code == 0);
    CHECK(slurp(dir / "a" / "grid.csv") == first);
    CHECK(slurp(dir / "a" / "meta.json") == meta_first);
    const auto j = nlohmann::json::parse(r1.out);
    CHECK(j["cells"] == 10);
    CHECK(j["violations"].empty());
    // --seed overrides the config seed.
    CHECK(call({"er-grid", "--config", cfg.string(), "--out-dir", (dir / "c").string(), "--seed", "12"}).code == 0);
    CHECK(slurp(dir / "c" / "grid.csv") != first);
    fs::remove_all(dir);
  }

  TEST_CASE("er-grid reports config errors with the line number") {
    const auto dir = fresh_dir("badcfg");
    const auto cfg = dir / "bad.cfg";
    std::ofstream(cfg) << "seed=1\nn_list=4\nwidth=3\n";
    const auto r = call({"er-grid", "--config", cfg.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("a malformed EXACTREG_THREADS is a usage error") {
    ::setenv("EXACTREG_THREADS", "many", 1);
    const auto bad = call({"bounds-table", "--model", "binf", "--n", "4", "--eps", "0.1"});
    ::setenv("EXACTREG_THREADS", "2", 1);
    const auto good = call({"bounds-table", "--model", "binf", "--n", "4", "--eps", "0.1"});
    ::unsetenv("EXACTREG_THREADS");
    CHECK(bad.code == 2);
    CHECK(good.code == 0);
    CHECK(good.err.find("threads=2") != std::string::npos);
  }
}
