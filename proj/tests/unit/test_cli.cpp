#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crossbound/cli.hpp"
#include "crossbound/dataset.hpp"
#include "support/gff_dataset.hpp"

using namespace crossbound;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "crossbound");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "crossbound_test_cli";
  fs::create_directories(dir);
  fs::remove(dir / name);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has(const std::string& s, const std::string& what) { return s.find(what) != std::string::npos; }

Real number_after(const std::string& s, const std::string& label) {
  auto p = s.find(label);
  REQUIRE(p != std::string::npos);
  return std::strtold(s.c_str() + p + label.size(), nullptr);
}

}  // namespace

TEST_CASE("config files") {
  RunConfig cfg;
  std::istringstream good(
      "# comment\n"
      "[run]\n"
      "lambda = 7   # trailing\n"
      "mode = multi\n"
      "[grid]\n"
      "delta_step = 0.05\n"
      "asymptotic = false\n"
      "[dataset]\n"
      "rho = 0.2, 0.4\n"
      "points = 0.25 0.25; 0.2 0.3\n"
      "correlators = 1 1 1 1; 1 1 2 2\n");
  read_config(good, cfg);
  CHECK(cfg.lambda == 7);
  CHECK(cfg.mode == Mode::Multi);
  CHECK(cfg.grid.delta_step == 0.05L);
  CHECK(!cfg.grid.asymptotic);
  CHECK(cfg.rho.size() == 2);
  REQUIRE(cfg.points.size() == 2);
  CHECK(cfg.points[1].v0 == 0.3L);
  REQUIRE(cfg.correlators.size() == 2);
  CHECK(cfg.correlators[1][3] == 2);
  cfg.validate();

  std::ostringstream os;
  write_config(cfg, os);
  RunConfig back;
  std::istringstream is(os.str());
  read_config(is, back);
  std::ostringstream os2;
  write_config(back, os2);
  CHECK(os2.str() == os.str());

  auto error = [](const std::string& text) -> std::string {
    RunConfig c;
    std::istringstream in(text);
    try {
      read_config(in, c);
      c.validate();
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(has(error("[run]\nlambdas = 3\n"), "line 2"));
  CHECK(has(error("[run]\nlambdas = 3\n"), "unknown key"));
  CHECK(has(error("lambda = 3\n"), "outside a section"));
  CHECK(has(error("[run]\nlambda = 3.5\n"), "integer"));
  CHECK(has(error("[run]\nlambda\n"), "key = value"));
  CHECK(has(error("[run\n"), "section"));
  CHECK(has(error("[run]\nmode = double\n"), "mode"));
  CHECK(has(error("[run]\nlambda = 30\n"), "run.lambda"));
  CHECK(has(error("[run]\nprecision_bits = 80\n"), "64 or 113"));
  CHECK(has(error("[point]\nu = 3\nv = 0.1\n"), "convergence"));
  CHECK(has(error("[dataset]\nrho = 0.5, 1.5\n"), "(0, 1)"));
  CHECK(has(error("[dataset]\npoints = 0.25\n"), "two numbers"));
  CHECK(has(error("[grid]\nasymptotic = maybe\n"), "true or false"));
  CHECK(error("").empty());
}

TEST_CASE("version, help and usage errors") {
  auto v = invoke({"--version"});
  CHECK(v.code == 0);
  CHECK(has(v.out, std::string("crossbound ") + cli::kVersion));
  auto h = invoke({"--help"});
  CHECK(h.code == 0);
  CHECK(has(h.out, "exit codes"));
  CHECK(has(h.out, "solver failure"));
  CHECK(invoke({}).code == cli::kUsage);
  CHECK(invoke({"frobnicate"}).code == cli::kUsage);
  auto miss = invoke({"exclude", "--delta1", "0.5181489"});
  CHECK(miss.code == cli::kUsage);
  CHECK(has(miss.err, "--delta2"));
  CHECK(invoke({"exclude", "--delta1", "0.52", "--delta2", "x"}).code == cli::kUsage);
}

TEST_CASE("exponents command") {
  auto r = invoke({"exponents", "--delta-sigma", "0.5181489", "--delta-epsilon", "1.412625", "--delta3", "3.82968"});
  CHECK(r.code == 0);
  CHECK(has(r.out, "eta 0.0362978\n"));
  CHECK(has(r.out, "nu 0.629970863848\n"));
  CHECK(has(r.out, "omega 0.82968\n"));
  auto f = invoke({"exponents", "--delta-sigma", "0.5", "--delta-epsilon", "1"});
  CHECK(has(f.out, "eta 0\n"));
  CHECK(has(f.out, "nu 0.5\n"));
  CHECK(!has(f.out, "omega"));
  auto z = invoke({"exponents", "--delta-sigma", "0.5", "--delta-epsilon", "3"});
  CHECK(z.code == cli::kDomain);
  CHECK(has(z.err, "division by zero"));
}

TEST_CASE("exclude command") {
  auto ising = invoke({"exclude", "--delta1", "0.5181489", "--delta2", "1.412625"});
  CHECK(ising.code == 0);
  CHECK(has(ising.out, "NOT EXCLUDED"));
  CHECK(has(ising.out, "lambda 11"));
  auto gff = invoke({"exclude", "--delta1", "0.55", "--delta2", "1.10"});
  CHECK(gff.code == 0);
  CHECK(has(gff.out, "NOT EXCLUDED"));

  // config file, overridden by a flag
  const auto cfgp = scratch("exclude.cfg");
  {
    std::ofstream o(cfgp);
    o << "[run]\nlambda = 3\n";
  }
  const auto cert = scratch("cert.txt");
  auto ex = invoke({"exclude", "-c", cfgp.string(), "--lambda", "7", "--delta1", "0.5181489", "--delta2", "2.5",
                 "--certificate", cert.string()});
  CHECK(ex.code == 0);
  CHECK(has(ex.out, "lambda 7"));
  CHECK(has(ex.out, "EXCLUDED\n"));
  CHECK(!has(ex.out, "NOT EXCLUDED"));
  REQUIRE(fs::exists(cert));
  auto f = load_certificate_file(cert.string());
  CHECK(f.lambda_order == 7);
  CHECK(certificate_check(f).passed);

  CHECK(invoke({"exclude", "--delta1", "0.4", "--delta2", "1.4"}).code == cli::kDomain);
  CHECK(invoke({"exclude", "--set", "run.nope=1", "--delta1", "0.52", "--delta2", "1.4"}).code == cli::kConfig);
  CHECK(invoke({"exclude", "--set", "run.lambda", "--delta1", "0.52", "--delta2", "1.4"}).code == cli::kConfig);
  // a time limit too short for any cut round surfaces as a solver failure
  auto slow = invoke({"exclude", "--set", "solver.time_limit=1e-9", "--delta1", "0.5181489", "--delta2", "2.5"});
  CHECK(slow.code == cli::kSolver);
}

TEST_CASE("dataset-check command") {
  const auto gffp = scratch("gff.txt");
  {
    std::ofstream o(gffp);
    save_dataset(fixture::gff_dataset(0.6L, 3, 14), o);
  }
  auto r = invoke({"dataset-check", gffp.string()});
  CHECK(r.code == 0);
  CHECK(has(r.out, "growth verdict converges"));
  CHECK(number_after(r.out, "max residual ") < 1e-5L);

  const auto asym = scratch("asym.txt");
  {
    std::ofstream o(asym);
    o << "field 1 0.518 0 odd\nfield 2 1.41 0 even\nope 1 1 2 1.05\nope 2 1 1 1.1\n";
  }
  auto a = invoke({"dataset-check", asym.string()});
  CHECK(a.code == cli::kConfig);
  CHECK(has(a.err, "line 4"));
  CHECK(has(a.err, "asymmetric"));

  const auto empty = scratch("empty.txt");
  { std::ofstream o(empty); }
  auto e = invoke({"dataset-check", empty.string()});
  CHECK(e.code == 0);
  CHECK(has(e.out, "max residual 0\n"));

  CHECK(invoke({"dataset-check", (gffp.string() + ".missing")}).code == cli::kConfig);
  CHECK(invoke({"dataset-check", "--set", "dataset.correlators=1 1 99 99", gffp.string()}).code == cli::kConfig);
}

TEST_CASE("scan command") {
  const auto csv = scratch("scan.csv");
  const std::vector<std::string> args{"scan", "-o", csv.string(), "--lambda", "5",
                                      "--set", "scan.delta1_min=0.51", "--set", "scan.delta1_max=0.53",
                                      "--set", "scan.delta1_step=0.01", "--set", "scan.delta2_min=1.3",
                                      "--set", "scan.delta2_max=1.5", "--set", "scan.delta2_step=0.1"};
  auto r = invoke(args);
  CHECK(r.code == 0);
  CHECK(has(r.out, "nodes 9  reused 0  computed 9"));
  const std::string first = slurp(csv);
  CHECK(std::count(first.begin(), first.end(), '\n') == 10);
  CHECK(fs::exists(fs::path(csv).replace_extension(".gp")));

  auto again = invoke(args);
  CHECK(has(again.out, "reused 9  computed 0"));
  CHECK(slurp(csv) == first);

  auto bad = args;
  bad.push_back("--set");
  bad.push_back("scan.delta2_max=3.5");
  CHECK(invoke(bad).code == cli::kDomain);
}
