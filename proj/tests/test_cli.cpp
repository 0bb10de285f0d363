// Exercises the installed command line binary end to end: exit codes, error
// text, output determinism.  The binary's path arrives as the first plain
// argument (the build wires in the built tool); remaining arguments go to the
// test framework.
#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;

struct CliResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  std::string tag = std::to_string(getpid()) + "_" + std::to_string(counter++);
  std::string of = "/tmp/medsim_cli_" + tag + ".out";
  std::string ef = "/tmp/medsim_cli_" + tag + ".err";
  std::string cmd = (env.empty() ? std::string() : env + " ") + "'" + g_cli +
                    "' " + args + " >'" + of + "' 2>'" + ef + "'";
  int rc = std::system(cmd.c_str());
  CliResult r;
  if (rc >= 0 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
  r.out = slurp(of);
  r.err = slurp(ef);
  std::remove(of.c_str());
  std::remove(ef.c_str());
  return r;
}

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/medsim_cli_" + std::to_string(getpid()) + "_" + name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("version flag") {
  CliResult r = run_cli("--version");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "medsim 1.0.0"));
}

TEST_CASE("a subcommand is required") {
  CliResult r = run_cli("");
  CHECK(r.code != 0);
}

TEST_CASE("config validation happy path") {
  CliResult r = run_cli("check-config --set rho=16 --set n=5 --seed 3");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("ok n=5 f=2 rho=16", 0) == 0);
  CHECK(contains(r.out, " seed=3"));
}

TEST_CASE("unknown keys are rejected with the valid list") {
  CliResult r = run_cli("check-config --set rho=16 --set bogus=1");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "valid keys"));
  CHECK(contains(r.err, "bogus"));
}

TEST_CASE("structurally impossible configurations are rejected") {
  CliResult r = run_cli("check-config --set rho=16 --set n=5 --set f=9");
  CHECK(r.code == 2);
  CHECK(contains(r.err, "invalid configuration"));
}

TEST_CASE("config file parsing: comments, blanks, inline values") {
  std::string path = write_temp("good.cfg",
                                "# sample configuration\n"
                                "\n"
                                "rho = 16\n"
                                "n = 5   # five nodes\n"
                                "p_mon = 0.5\n");
  CliResult r = run_cli("check-config --config '" + path + "'");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "n=5"));
  CHECK(contains(r.out, "p_mon=0.5"));
  std::remove(path.c_str());
}

TEST_CASE("missing and malformed config files") {
  CliResult missing =
      run_cli("check-config --config /tmp/definitely_not_here_medsim.cfg");
  CHECK(missing.code == 2);
  CHECK(contains(missing.err, "cannot open"));

  std::string path = write_temp("bad.cfg", "rho = 16\nn 5\n");
  CliResult bad = run_cli("check-config --config '" + path + "'");
  CHECK(bad.code == 2);
  CHECK(contains(bad.err, "expected key=value"));
  CHECK(contains(bad.err, ":2"));  // the offending line is named
  std::remove(path.c_str());
}

TEST_CASE("simulation output is seed-deterministic") {
  std::string args = "simulate --stages 2 --set rho=16 --set n=5 --seed 11";
  CliResult a = run_cli(args);
  CliResult b = run_cli(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("trace-v1\n", 0) == 0);

  CliResult c = run_cli("simulate --stages 2 --set rho=16 --set n=5 --seed 12");
  CHECK(c.code == 0);
  CHECK(a.out != c.out);
}

TEST_CASE("simulation writes the same bytes to a file as to stdout") {
  std::string path = "/tmp/medsim_cli_" + std::to_string(getpid()) + "_trace.txt";
  std::string base = "simulate --stages 2 --full --check --set rho=16 --set n=5 --seed 11";
  CliResult to_stdout = run_cli(base);
  CliResult to_file = run_cli(base + " --out '" + path + "'");
  CHECK(to_stdout.code == 0);
  CHECK(to_file.code == 0);
  CHECK(to_file.out.empty());
  CHECK(slurp(path) == to_stdout.out);
  std::remove(path.c_str());
}

TEST_CASE("seed precedence: flag over environment over config") {
  CliResult env_only =
      run_cli("check-config --set rho=16", "MEDSIM_SEED=909");
  CHECK(env_only.code == 0);
  CHECK(contains(env_only.out, " seed=909"));

  CliResult flag_wins =
      run_cli("check-config --set rho=16 --seed 4", "MEDSIM_SEED=909");
  CHECK(flag_wins.code == 0);
  CHECK(contains(flag_wins.out, " seed=4"));

  CliResult cfg_only = run_cli("check-config --set rho=16 --set master_seed=55");
  CHECK(cfg_only.code == 0);
  CHECK(contains(cfg_only.out, " seed=55"));

  CliResult bad_env = run_cli("check-config --set rho=16", "MEDSIM_SEED=junk");
  CHECK(bad_env.code == 2);
  CHECK(contains(bad_env.err, "MEDSIM_SEED"));
}

TEST_CASE("reliability output") {
  CliResult r = run_cli(
      "reliability --set rho=16 --set n=4 --set f=1 --set delta_age=3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "exact 17/27 ("));

  CliResult mc = run_cli(
      "reliability --set rho=16 --set n=4 --set f=1 --set delta_age=3 "
      "--mc-stages 40 --seed 2");
  CHECK(mc.code == 0);
  CHECK(contains(mc.out, "exact 17/27 ("));
  CHECK(contains(mc.out, "mc mean="));
  CHECK(contains(mc.out, "stages=40"));
}

TEST_CASE("equilibrium check output and kind validation") {
  CliResult r = run_cli(
      "check-equilibrium --kind withhold-report --reps 3 "
      "--set rho=16 --set n=5 --seed 21");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "kind=withhold-report"));
  CHECK(contains(r.out, "tail_equal=yes"));
  CHECK(contains(r.out, "replicates=3"));

  CliResult bad = run_cli("check-equilibrium --kind no-such-kind --set rho=16");
  CHECK(bad.code == 2);
  CHECK(contains(bad.err, "valid kinds"));
  CHECK(contains(bad.err, "drop-forward-all"));
}

TEST_CASE("sweep emits one CSV row per deviation kind") {
  CliResult r = run_cli("sweep --reps 2 --set rho=16 --set n=5 --seed 5");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("n,f,rho,p_mon,delta_disc,deviation,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 7);
}

TEST_CASE("gap emits one CSV row per event count") {
  CliResult r = run_cli("gap --rho 16 --stages 6 --set n=5 --seed 5");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("rho,avg_u,ubar,gap,", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);
}

int main(int argc, char** argv) {
  std::vector<char*> pass;
  pass.push_back(argv[0]);
  for (int i = 1; i < argc; ++i) {
    if (g_cli.empty() && argv[i][0] != '-') {
      g_cli = argv[i];
      continue;
    }
    pass.push_back(argv[i]);
  }
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: %s <path-to-cli> [test options]\n", argv[0]);
    return 1;
  }
  doctest::Context ctx(static_cast<int>(pass.size()), pass.data());
  return ctx.run();
}
