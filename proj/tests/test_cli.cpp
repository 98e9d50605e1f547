#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include "pideq/config.hpp"

using namespace pideq;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PIDEQ_CLI_PATH) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  while (std::fgets(buf.data(), int(buf.size()), p)) out += buf.data();
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pideq_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::size_t lines(const std::string& s) { return std::size_t(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config grammar") {
  const Config c = Config::parse("# settings\nalpha = 0.5   # trailing\n\n grid_n=128\nT = 2\n");
  CHECK(*c.number("alpha") == 0.5);
  CHECK(*c.integer("grid_n") == 128);
  CHECK(*c.number("T") == 2.0);
  CHECK_FALSE(c.number("dt").has_value());
  CHECK_THROWS_AS(Config::parse("beta = 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("alpha 1\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("alpha =\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("alpha = x1\n").number("alpha"), ConfigError);
  CHECK_THROWS_AS(Config::parse("grid_n = 12.5\n").integer("grid_n"), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/pideq.cfg"), ConfigError);
}

TEST_CASE("spectral") {
  const Run r = run("spectral --alpha 0");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("alpha,N,E,psi_norm,lambda,c_re,c_im\n", 0) == 0);
  CHECK(lines(r.out) == 18);
  CHECK(r.out.find("1.2609") != std::string::npos);
  const Run r3 = run("spectral --alpha 0.5 --dim 3");
  CHECK(r3.code == 0);
  CHECK(r3.out.find("\n5.0000000000000000e-01,3,,,") != std::string::npos);
  CHECK(run("spectral --dim 4").code != 0);
}

TEST_CASE("config file and flag precedence") {
  TempDir d;
  std::ofstream(d.path / "a.cfg") << "alpha = 0.25\n";
  const Run a = run("--config " + (d.path / "a.cfg").string() + " spectral");
  CHECK(a.code == 0);
  CHECK(a.out.find("\n2.5000000000000000e-01,2,") != std::string::npos);
  const Run b = run("--config " + (d.path / "a.cfg").string() + " spectral --alpha 0.125");
  CHECK(b.out.find("\n1.2500000000000000e-01,2,") != std::string::npos);
  std::ofstream(d.path / "bad.cfg") << "colour = blue\n";
  const Run c = run("--config " + (d.path / "bad.cfg").string() + " spectral");
  CHECK(c.code == 2);
  CHECK(c.out.find("unknown config key") != std::string::npos);
}

TEST_CASE("semigroup and resolve") {
  TempDir d;
  const Run s = run("--out " + d.path.string() + " semigroup --grid-n 64 --grid-L 20 --t 1 --datum gaussian:1,1");
  CHECK(s.code == 0);
  CHECK(s.out.find("free_part_norm,correction_norm,imag_residue\n") != std::string::npos);
  const std::string f = slurp(d.path / "semigroup.csv");
  CHECK(f.rfind("x,y,re,im\n", 0) == 0);
  CHECK(lines(f) == 1 + 64 * 64);
  const Run r = run("--out " + d.path.string() + " resolve --grid-n 64 --grid-L 20 --lambda 2 --datum gaussian:1,1,1,0");
  CHECK(r.code == 0);
  CHECK(fs::exists(d.path / "resolve.csv"));
  const Run bad = run("--out " + d.path.string() + " resolve --grid-n 64 --grid-L 20 --lambda -1");
  CHECK(bad.code == 2);
  CHECK(run("semigroup --grid-n 100").code == 2);
}

TEST_CASE("simulate") {
  TempDir d;
  const Run s = run("--out " + d.path.string() +
                    " simulate --grid-n 64 --grid-L 20 --u0 gaussian:1,1,1,0 --norm 1e-2 --T 0.1 --dt 1e-2 --save-every 5");
  CHECK(s.code == 0);
  const std::string m = slurp(d.path / "manifest.csv");
  CHECK(m.rfind("t,l2,l4,grad32,q_abs,rho,snapshot\n", 0) == 0);
  CHECK(lines(m) == 12);
  CHECK(fs::exists(d.path / "snap_000000.bin"));
  CHECK(fs::exists(d.path / "snap_000002.bin"));
  const Run p = run("--out " + d.path.string() +
                    " simulate --grid-n 64 --grid-L 20 --u0 " + (d.path / "snap_000002.bin").string() +
                    " --projected --T 0.1 --dt 1e-2");
  CHECK(p.code == 0);
}

TEST_CASE("decay and verify") {
  TempDir d;
  const Run r = run("--out " + d.path.string() + " decay --kind lemma42 --points 6");
  CHECK(r.code == 0);
  const std::string rep = slurp(d.path / "report.csv");
  CHECK(rep.rfind("kind,p,q,h1,h2,slope,theoretical,delta,r2,n,L\n", 0) == 0);
  CHECK(lines(rep) == 10);
  CHECK(run("decay --kind nope").code == 2);
  const Run v = run("verify --only 1 --only 12");
  CHECK(v.code == 0);
  CHECK(v.out.find("PASS  1") != std::string::npos);
  CHECK(v.out.find("PASS 12") != std::string::npos);
}
