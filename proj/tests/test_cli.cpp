#include "mlat/cli.hpp"
#include "mlat/config.hpp"
#include "mlat/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>
#include <algorithm>

using namespace mlat;
namespace fs = std::filesystem;

namespace {

const fs::path kSource(MLAT_SOURCE_DIR);

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mlat_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("digit ranges") {
  CHECK(cli::parse_digits_range("10..20") == std::vector<int>{10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
  CHECK(cli::parse_digits_range("20..10") == cli::parse_digits_range("10..20"));
  CHECK(cli::parse_digits_range("15") == std::vector<int>{15});
  CHECK_THROWS_AS(cli::parse_digits_range("3..10"), ConfigError);
  CHECK_THROWS_AS(cli::parse_digits_range("10..51"), ConfigError);
  CHECK_THROWS_AS(cli::parse_digits_range("ten"), ConfigError);
  CHECK_THROWS_AS(cli::parse_digits_range("10..."), ConfigError);
}

TEST_CASE("bundled configuration is the shipped file") {
  CHECK(cli::bundled_table1_config() == slurp(kSource / "configs" / "table1.cfg"));
}

TEST_CASE("protocol1 writes one summary row per digit count") {
  const fs::path a = scratch("p1a");
  const fs::path b = scratch("p1b");
  const Result ra = run({"protocol1", "--out", a.string()});
  REQUIRE(ra.code == cli::kOk);
  const std::string summary = slurp(a / "protocol1_summary.csv");
  CHECK(lines(summary) == 12);
  CHECK(summary.rfind("digits,mean_magnitude_mm,converged", 0) == 0);
  CHECK(lines(slurp(a / "protocol1_deviations.csv")) == 1 + 11 * 11);

  const Result rb = run({"protocol1", "--digits", "20..10", "--out", b.string()});
  REQUIRE(rb.code == cli::kOk);
  CHECK(slurp(b / "protocol1_summary.csv") == summary);
  CHECK(slurp(b / "protocol1_deviations.csv") == slurp(a / "protocol1_deviations.csv"));

  const std::string manifest = slurp(a / "run_manifest.txt");
  CHECK(manifest.find("bundled:table1.cfg") != std::string::npos);
  CHECK(manifest.find("mt19937_64") != std::string::npos);
}

TEST_CASE("explicit config file gives the same results as the bundled one") {
  const fs::path a = scratch("cfga");
  const fs::path b = scratch("cfgb");
  REQUIRE(run({"protocol1", "--digits", "12", "--out", a.string()}).code == cli::kOk);
  const std::string cfg = (kSource / "configs" / "table1.cfg").string();
  REQUIRE(run({"protocol1", "--digits", "12", "--config", cfg, "--out", b.string()}).code == cli::kOk);
  CHECK(slurp(a / "protocol1_deviations.csv") == slurp(b / "protocol1_deviations.csv"));
}

TEST_CASE("same seed gives byte-identical protocol2 output") {
  const fs::path a = scratch("p2a");
  const fs::path b = scratch("p2b");
  const std::vector<std::string> base{"protocol2", "--runs", "3", "--seed", "77", "--threads", "2", "--out"};
  std::vector<std::string> args = base;
  args.push_back(a.string());
  REQUIRE(run(args).code == cli::kOk);
  args = base;
  args.push_back(b.string());
  args[6] = "1";
  REQUIRE(run(args).code == cli::kOk);
  for (const char* f : {"protocol2_runs.csv", "protocol2_coverage.csv", "protocol2_summary.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(lines(slurp(a / "protocol2_summary.csv")) == 5);
  CHECK(lines(slurp(a / "protocol2_runs.csv")) == 1 + 4 * 3);
  CHECK(lines(slurp(a / "protocol2_coverage.csv")) == 1 + 4 * 10);

  const fs::path c = scratch("p2c");
  REQUIRE(run({"protocol2", "--runs", "3", "--seed", "78", "--experiments", "Exp2", "--out", c.string()}).code ==
          cli::kOk);
  CHECK(slurp(c / "protocol2_runs.csv") != slurp(a / "protocol2_runs.csv"));
}

TEST_CASE("custom experiments") {
  const fs::path a = scratch("p2x");
  const Result r = run({"protocol2", "--runs", "2", "--experiments", "12:with,14:without", "--out", a.string()});
  REQUIRE(r.code == cli::kOk);
  const std::string summary = slurp(a / "protocol2_summary.csv");
  CHECK(lines(summary) == 3);
  CHECK(run({"protocol2", "--runs", "2", "--experiments", "Exp9", "--out", a.string()}).code == cli::kConfigError);
  CHECK(run({"protocol2", "--runs", "2", "--experiments", "12:maybe", "--out", a.string()}).code ==
        cli::kConfigError);
  CHECK(run({"protocol2", "--runs", "2", "--seeding", "sideways", "--out", a.string()}).code == cli::kConfigError);
}

TEST_CASE("a single run cannot form coverage intervals") {
  const fs::path a = scratch("p2one");
  const Result r = run({"protocol2", "--runs", "1", "--experiments", "Exp1", "--out", a.string()});
  CHECK(r.code == cli::kSolverInvalid);
  const std::string cov = slurp(a / "protocol2_coverage.csv");
  CHECK(cov.find("at least 2") != std::string::npos);
}

TEST_CASE("edlen-budget") {
  const Result r = run({"edlen-budget"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out.find("U_Edlen,0.60") != std::string::npos);

  const Result zero = run({"edlen-budget", "--u-t", "0", "--u-f", "0", "--u-p", "0"});
  REQUIRE(zero.code == cli::kOk);
  CHECK(zero.out.find("U_Edlen,0,um/m") != std::string::npos);

  const Result table = run({"edlen-budget", "--preset", "budget_table"});
  REQUIRE(table.code == cli::kOk);
  CHECK(table.out.find("U_t,0.169,degC") != std::string::npos);

  const fs::path a = scratch("eb");
  REQUIRE(run({"edlen-budget", "--out", a.string()}).code == cli::kOk);
  CHECK(slurp(a / "edlen_budget.csv") == r.out);

  const Result bad = run({"edlen-budget", "--pressure", "200000"});
  CHECK(bad.code == cli::kDomainError);
  CHECK(bad.err.find("pressure") != std::string::npos);
}

TEST_CASE("error exit codes") {
  const fs::path a = scratch("errs");
  CHECK(run({"protocol1", "--config", (kSource / "configs" / "missing.cfg").string(), "--out", a.string()}).code ==
        cli::kConfigError);
  const Result teach =
      run({"protocol1", "--config", (kSource / "configs" / "teaching3.cfg").string(), "--out", a.string()});
  CHECK(teach.code == cli::kConfigError);
  CHECK(teach.err.find("underdetermined") != std::string::npos);
  CHECK(run({"protocol1", "--digits", "3..10", "--out", a.string()}).code == cli::kConfigError);
  CHECK(run({"protocol1", "--bogus"}).code == cli::kConfigError);
  CHECK(run({"nonsense"}).code == cli::kConfigError);
  CHECK_FALSE(fs::exists(a));

  const fs::path blocker = scratch("blocker");
  fs::create_directories(blocker.parent_path());
  std::ofstream(blocker) << "file";
  const Result io = run({"protocol1", "--digits", "10", "--out", (blocker / "sub").string()});
  CHECK(io.code == cli::kIoError);
  CHECK(io.err.find("I/O error") != std::string::npos);
}
