#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "orthofit/dataset.hpp"
#include "support.hpp"

// ORTHOFIT_CLI_PATH is injected by the build: the full path of the
// orthofit executable these tests drive as a subprocess.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("orthofit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const fs::path base = workdir() / ("cmd" + std::to_string(counter++));
  const fs::path out = base.string() + ".out";
  const fs::path err = base.string() + ".err";
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += std::string(ORTHOFIT_CLI_PATH) + " " + args;
  cmd += " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (status >= 0 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// deterministic two-group dataset written once per process
const fs::path& synthetic_csv() {
  static const fs::path path = [] {
    testsupport::Rng rng(424242);
    testsupport::SyntheticSpec spec;
    spec.d = 2;
    spec.k = 2;
    spec.n_per_group = 40;
    const orthofit::GroupedDataset data = testsupport::synthetic_dataset(rng, spec);
    const fs::path p = workdir() / "synth.csv";
    std::ofstream out(p);
    orthofit::write_csv(out, data, "sp", {"x", "y"});
    return p;
  }();
  return path;
}

// two groups whose covariances share no rotation; large n makes the
// common-rotation restriction fail decisively
const fs::path& contrast_csv() {
  static const fs::path path = [] {
    testsupport::Rng rng(515151);
    const std::vector<double> mu{0.0, 0.0};
    const orthofit::DenseMatrix axis(2, 2, {9.0, 0.0, 0.0, 0.25});
    const orthofit::DenseMatrix tilted(2, 2, {4.625, 4.375, 4.375, 4.625});
    std::vector<std::string> names{"axis", "tilted"};
    std::vector<orthofit::DenseMatrix> groups{
        testsupport::sample_normal(rng, 200, mu, axis),
        testsupport::sample_normal(rng, 200, mu, tilted)};
    const orthofit::GroupedDataset data(std::move(names), std::move(groups));
    const fs::path p = workdir() / "contrast.csv";
    std::ofstream out(p);
    orthofit::write_csv(out, data, "sp", {"x", "y"});
    return p;
  }();
  return path;
}

std::string data_args(const fs::path& csv) {
  return "--data " + csv.string() + " --group sp --vars x,y";
}

}  // namespace

TEST_CASE("decompose reports factors and a reconstruction error") {
  const fs::path m = workdir() / "rot.txt";
  spit(m, "0.8 -0.6\n0.6 0.8\n");
  const RunResult r = run_cli("decompose " + m.string());
  CHECK(r.code == 0);
  // the sub-diagonal is 0.6 / 0.8, printed to round-trip precision
  CHECK(r.out.find("l: 0.7499999999999999") != std::string::npos);
  CHECK(r.out.find("p: 0 1") != std::string::npos);
  CHECK(r.out.find("reconstruction_error") != std::string::npos);
}

TEST_CASE("decompose accepts comma separated matrix files") {
  const fs::path m = workdir() / "eye.txt";
  spit(m, "1,0\n0,1\n");
  const RunResult r = run_cli("decompose " + m.string());
  CHECK(r.code == 0);
}

TEST_CASE("a non-orthogonal matrix exits with code 2") {
  const fs::path m = workdir() / "bad.txt";
  spit(m, "1 2\n3 4\n");
  const RunResult r = run_cli("decompose " + m.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("orthofit:") != std::string::npos);
}

TEST_CASE("fit emits schema-1 json with optimizer diagnostics") {
  const RunResult r =
      run_cli("fit " + data_args(synthetic_csv()) + " --models n-cpc --format json");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("schema").get<int>() == 1);
  CHECK(doc.at("command").get<std::string>() == "fit");
  REQUIRE(doc.at("models").size() == 1);
  const json& model = doc.at("models")[0];
  CHECK(model.at("model").get<std::string>() == "n-cpc");
  CHECK(std::isfinite(model.at("loglik").get<double>()));
  CHECK(model.at("m").get<int>() == 9);
  CHECK(model.at("n").get<int>() == 80);
  CHECK(model.at("stationarity_residual").get<double>() <= 1e-5);
  CHECK(model.at("optimizer").contains("iterations"));
  CHECK(model.at("optimizer").contains("converged"));
  const json& q = model.at("parameters").at("q")[0];
  CHECK(q.at("rows").get<int>() == 2);
  CHECK(q.at("cols").get<int>() == 2);
  CHECK(q.at("data").size() == 4);
}

TEST_CASE("fit table output scales eigenvalues by one hundred") {
  const RunResult r =
      run_cli("fit " + data_args(synthetic_csv()) + " --models n-pc --format table");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("eigenvalues (x100)") != std::string::npos);
}

TEST_CASE("unknown model names exit with code 1") {
  const RunResult r =
      run_cli("fit " + data_args(synthetic_csv()) + " --models n-cpc,banana");
  CHECK(r.code == 1);
  CHECK(r.err.find("banana") != std::string::npos);
}

TEST_CASE("a missing data file exits with code 1") {
  const RunResult r = run_cli("fit --data " + (workdir() / "absent.csv").string() +
                              " --group sp --vars x,y --models n-cpc");
  CHECK(r.code == 1);
}

TEST_CASE("a missing cell exits with code 1 and names the row") {
  const fs::path p = workdir() / "holey.csv";
  spit(p, "sp,x,y\na,1,2\na,,4\na,5,6\na,7,8\n");
  const RunResult r = run_cli("fit --data " + p.string() +
                              " --group sp --vars x,y --models n-cpc");
  CHECK(r.code == 1);
  CHECK(r.err.find("row 2") != std::string::npos);
}

TEST_CASE("an undersized group exits with code 3") {
  const fs::path p = workdir() / "solo.csv";
  std::ostringstream text;
  text << "sp,x,y\n";
  text << "lone,1,2\n";
  // a healthy second group
  testsupport::Rng rng(99);
  const orthofit::DenseMatrix g =
      testsupport::sample_normal(rng, 10, {0.0, 0.0}, orthofit::DenseMatrix::identity(2));
  for (std::size_t i = 0; i < g.rows(); ++i) {
    text << "full," << orthofit::format_double(g(i, 0)) << ','
         << orthofit::format_double(g(i, 1)) << '\n';
  }
  spit(p, text.str());
  const RunResult r = run_cli("fit --data " + p.string() +
                              " --group sp --vars x,y --models n-cpc");
  CHECK(r.code == 3);
  CHECK(r.err.find("lone") != std::string::npos);
}

TEST_CASE("json reports are byte-identical across runs") {
  const fs::path f1 = workdir() / "cmp1.json";
  const fs::path f2 = workdir() / "cmp2.json";
  const std::string base = "compare " + data_args(synthetic_csv()) + " --format json --out ";
  REQUIRE(run_cli(base + f1.string()).code == 0);
  REQUIRE(run_cli(base + f2.string()).code == 0);
  const std::string a = slurp(f1);
  const std::string b = slurp(f2);
  CHECK(!a.empty());
  CHECK(a == b);
}

TEST_CASE("compare json carries the information table and test grid") {
  const RunResult r =
      run_cli("compare " + data_args(synthetic_csv()) + " --format json");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("schema").get<int>() == 1);
  CHECK(doc.at("command").get<std::string>() == "compare");
  CHECK(doc.at("information").size() == 4);
  CHECK(doc.at("tests").size() == 5);
  CHECK(doc.contains("best_aic"));
  CHECK(doc.contains("best_bic"));
  // the information rows follow the fixed model order
  CHECK(doc.at("information")[0].at("model").get<std::string>() == "n-cpc");
  CHECK(doc.at("information")[1].at("model").get<std::string>() == "ln-cpc");
  CHECK(doc.at("information")[2].at("model").get<std::string>() == "n-pc");
  CHECK(doc.at("information")[3].at("model").get<std::string>() == "ln-pc");
}

TEST_CASE("decisive rejections render as 0.000 in the comparison table") {
  const RunResult r =
      run_cli("compare " + data_args(contrast_csv()) + " --format table");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("0.000") != std::string::npos);
}

TEST_CASE("the data directory environment variable resolves bare names") {
  const fs::path dir = workdir() / "datadir";
  fs::create_directories(dir);
  fs::copy_file(synthetic_csv(), dir / "bundled.csv",
                fs::copy_options::overwrite_existing);
  const RunResult r =
      run_cli("fit --data bundled.csv --group sp --vars x,y --models n-pc --format json",
              "ORTHOFIT_DATA_DIR=" + dir.string());
  CHECK(r.code == 0);

  // without the variable the bare name does not resolve
  const RunResult miss =
      run_cli("fit --data bundled.csv --group sp --vars x,y --models n-pc");
  CHECK(miss.code == 1);
}

TEST_CASE("kurtosis on axis-extreme points recovers the exact excess") {
  const fs::path p = workdir() / "sphere.csv";
  const double r2 = std::sqrt(2.0);
  std::ostringstream text;
  text << "sp,x,y\n";
  text << "s," << orthofit::format_double(r2) << ",0\n";
  text << "s," << orthofit::format_double(-r2) << ",0\n";
  text << "s,0," << orthofit::format_double(r2) << '\n';
  text << "s,0," << orthofit::format_double(-r2) << '\n';
  spit(p, text.str());
  const RunResult r = run_cli("kurtosis --data " + p.string() +
                              " --group sp --vars x,y --format json");
  REQUIRE(r.code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc.at("command").get<std::string>() == "kurtosis");
  REQUIRE(doc.at("groups").size() == 1);
  const json& g = doc.at("groups")[0];
  CHECK(g.at("name").get<std::string>() == "s");
  CHECK(std::fabs(g.at("excess").get<double>() + 4.0) <= 1e-9);
  CHECK(g.contains("z"));
  CHECK(g.contains("p_value"));
}

TEST_CASE("running without a subcommand fails, help succeeds") {
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("fit --help").code == 0);
}
