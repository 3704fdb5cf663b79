#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qecho/bounds.hpp"
#include "qecho/cli.hpp"
#include "qecho/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = qecho::cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("qecho_cli_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name, const std::string& content) const {
    std::ofstream(path / name) << content;
    return (path / name).string();
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string chain_config(double p2, const std::string& extra = "") {
  std::ostringstream os;
  os << R"({"lattice": {"type": "chain", "n": 3}, "p2": )" << p2
     << R"(, "d_max": 6, "n_traj": 40, "master_seed": 11)" << extra << "}";
  return os.str();
}

std::string synthetic_csv(double f0, double lambda, int n, int d_max) {
  std::ostringstream os;
  os << "depth,count,mean,stderr\n";
  const double floor = std::ldexp(1.0, -n);
  for (int d = 0; d <= d_max; ++d) {
    os << d << ",1000," << qecho::format_double(floor + f0 * std::exp(-lambda * d)) << ",0.001\n";
  }
  return os.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(call({}).code == 2);
  CHECK(call({"frobnicate"}).code == 2);
  CHECK(call({"--help"}).code == 0);
  CHECK(call({"run"}).code == 2);
  CHECK(call({"run", "/nonexistent/config.json"}).code == 2);
  CHECK(call({"fit", "/nonexistent/results.csv"}).code == 2);
}

TEST_CASE("noiseless run gives unit fidelity") {
  TempDir tmp;
  const std::string cfg = tmp.file("c.json", chain_config(0.0));
  const Result r = call({"run", cfg, "--output-dir", (tmp.path / "out").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("n=3 d_max=6 n_traj=40") != std::string::npos);
  CHECK(r.out.find("wall=") != std::string::npos);
  std::istringstream is(slurp(tmp.path / "out" / "results.csv"));
  const qecho::FidelityTable t = qecho::read_results_csv(is, 3);
  REQUIRE(t.rows.size() == 7);
  for (const auto& row : t.rows) CHECK(std::abs(row.mean - 1.0) < 1e-12);
  const json manifest = json::parse(slurp(tmp.path / "out" / "manifest.json"));
  CHECK(manifest.at("master_seed") == 11);
}

TEST_CASE("runs are byte-identical and carry the digest") {
  TempDir tmp;
  const std::string cfg = tmp.file("c.json", chain_config(0.02, R"(, "q": 0.01)"));
  REQUIRE(call({"run", cfg, "--output-dir", (tmp.path / "a").string()}).code == 0);
  REQUIRE(call({"run", cfg, "--output-dir", (tmp.path / "b").string(), "--workers", "3"}).code == 0);
  const std::string a = slurp(tmp.path / "a" / "results.csv");
  CHECK(a == slurp(tmp.path / "b" / "results.csv"));
  CHECK(slurp(tmp.path / "a" / "manifest.json") == slurp(tmp.path / "b" / "manifest.json"));
  const std::string digest = qecho::config_digest(qecho::parse_run_config(chain_config(0.02, R"(, "q": 0.01)")));
  CHECK(a.find("# config_digest=" + digest) != std::string::npos);
  CHECK(a.find("# master_seed=11") != std::string::npos);
}

TEST_CASE("config diagnostics") {
  TempDir tmp;
  const std::string mps = tmp.file("m.json", R"({"lattice": {"type": "grid", "rows": 2, "cols": 2}, "p2": 0.01,
    "d_max": 5, "n_traj": 10, "master_seed": 1, "engine": "mps"})");
  Result r = call({"run", mps, "--output-dir", tmp.path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("mps requires chain") != std::string::npos);

  const std::string bad = tmp.file("b.json", "{\n  \"lattice\": {\"type\": \"chain\", \"n\": 3},\n  \"p2\": 2,\n"
                                              "  \"d_max\": 5, \"n_traj\": 10, \"master_seed\": 1\n}");
  r = call({"run", bad, "--output-dir", tmp.path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("resource guard exits 3") {
  TempDir tmp;
  const std::string cfg = tmp.file("big.json", R"({"lattice": {"type": "chain", "n": 27}, "p2": 0.01,
    "d_max": 2, "n_traj": 10, "master_seed": 1})");
  CHECK(call({"run", cfg, "--output-dir", tmp.path.string()}).code == 3);
}

TEST_CASE("output directory from the environment") {
  TempDir tmp;
  const std::string cfg = tmp.file("c.json", chain_config(0.0));
  const fs::path target = tmp.path / "from_env";
  ::setenv(qecho::cli::kOutputDirEnv, target.string().c_str(), 1);
  const Result r = call({"run", cfg});
  ::unsetenv(qecho::cli::kOutputDirEnv);
  CHECK(r.code == 0);
  CHECK(fs::exists(target / "results.csv"));
  CHECK(fs::exists(target / "manifest.json"));
}

TEST_CASE("fit reproduces a synthetic exponential") {
  TempDir tmp;
  const std::string csv = tmp.file("r.csv", synthetic_csv(0.9, 0.05, 4, 30));
  const Result r = call({"fit", csv, "--n", "4", "--subtract-floor"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("fit").at("lambda").get<double>() == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(j.at("fit").at("f0_tilde").get<double>() == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(j.at("fit").at("points").size() > 0);
  CHECK(j.contains("table_digest"));

  const std::string out = (tmp.path / "fit.json").string();
  REQUIRE(call({"fit", csv, "--n", "4", "--subtract-floor", "-o", out}).code == 0);
  CHECK(slurp(out) == r.out);

  CHECK(call({"fit", csv, "--subtract-floor"}).code == 2);
}

TEST_CASE("fit two-regime flag") {
  TempDir tmp;
  std::ostringstream os;
  os << "depth,count,mean,stderr\n";
  for (int d = 0; d <= 40; ++d) {
    const double ln = d <= 20 ? -0.01 * d : -0.2 - 0.08 * (d - 20);
    os << d << ",1000," << qecho::format_double(std::exp(ln)) << ",0.0005\n";
  }
  const std::string csv = tmp.file("kink.csv", os.str());
  const Result r = call({"fit", csv, "--two-regime"});
  REQUIRE(r.code == 0);
  const json tr = json::parse(r.out).at("two_regime");
  CHECK(tr.at("significant").get<bool>());
  CHECK(tr.at("d_star").get<double>() == doctest::Approx(20).epsilon(0.1));
  CHECK(tr.at("lambda2").get<double>() > tr.at("lambda1").get<double>());
}

TEST_CASE("fit with a manifest adds predictions") {
  TempDir tmp;
  const std::string cfg = tmp.file("c.json", chain_config(0.02));
  const fs::path out = tmp.path / "run";
  REQUIRE(call({"run", cfg, "--output-dir", out.string()}).code == 0);
  const Result r = call({"fit", (out / "results.csv").string(), "--manifest", (out / "manifest.json").string(),
                         "--subtract-floor"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.at("predictions").size() == 2);
  CHECK(j.at("predictions")[0].at("method") == "mean_gate");
  CHECK(j.at("predictions")[1].at("method") == "twirl");
  CHECK(j.at("master_seed") == 11);
  CHECK(j.at("config_digest") == qecho::config_digest(qecho::parse_run_config(chain_config(0.02))));
}

TEST_CASE("fit error paths") {
  TempDir tmp;
  CHECK(call({"fit", tmp.file("bad.csv", "depth,count\n1,2\n")}).code == 2);
  CHECK(call({"fit", tmp.file("empty.csv", "")}).code == 2);
  // every point at or below the floor leaves nothing to fit
  std::ostringstream os;
  os << "depth,count,mean,stderr\n";
  for (int d = 0; d < 10; ++d) os << d << ",100,0.25,0.01\n";
  CHECK(call({"fit", tmp.file("floor.csv", os.str()), "--n", "2", "--subtract-floor"}).code == 4);
  CHECK(call({"fit", tmp.file("ok.csv", synthetic_csv(0.9, 0.05, 4, 10)), "--manifest",
              tmp.file("m.json", "{not json")})
            .code == 2);
}

TEST_CASE("plan numbers") {
  Result r = call({"plan", "--ns", "1e8", "--eps", "0.1", "--f", "0.999"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("max_nd            6907.75") != std::string::npos);
  CHECK(r.out.find("F_min") != std::string::npos);

  r = call({"plan", "--n", "80", "--D", "2"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("d_max             89") != std::string::npos);

  r = call({"plan", "--d-emqm", "6", "--t-emqm", qecho::format_double(qecho::constants::planck_time * 1e-50),
            "--l-emqm", qecho::format_double(qecho::constants::planck_length * 1e-50)});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("n_star");
  REQUIRE(pos != std::string::npos);
  const double n_star = std::stod(r.out.substr(pos + 18));
  CHECK(n_star > 1900);
  CHECK(n_star < 2000);

  CHECK(call({"plan"}).code == 2);
  CHECK(call({"plan", "--ns", "1e8", "--eps", "0.1"}).code == 2);
  CHECK(call({"plan", "--n", "80"}).code == 2);
  CHECK(call({"plan", "--ns", "1e8", "--eps", "0.1", "--f", "1.5"}).code == 2);
}

TEST_CASE("report joins data and fit") {
  TempDir tmp;
  const std::string csv = tmp.file("r.csv", synthetic_csv(0.9, 0.05, 4, 8));
  const std::string fit = (tmp.path / "fit.json").string();
  REQUIRE(call({"fit", csv, "--n", "4", "-o", fit}).code == 0);
  const Result r = call({"report", csv, fit});
  REQUIRE(r.code == 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  CHECK(line == "depth,mean,stderr,fit_value,residual");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 9);
  CHECK(call({"report", csv, tmp.file("junk.json", "[]")}).code == 2);
}

TEST_CASE("standalone binary exit codes") {
  const char* bin = std::getenv("QECHO_CLI");
  if (!bin) return;
  const std::string quiet = " >/dev/null 2>&1";
  auto status = [&](const std::string& args) {
    const int raw = std::system((std::string(bin) + " " + args + quiet).c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  CHECK(status("plan --n 80 --D 2") == 0);
  CHECK(status("plan --n 80") == 2);
  CHECK(status("run /nonexistent.json") == 2);
}

}
