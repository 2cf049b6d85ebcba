// Drives the installed command-line binary end to end: table output, JSON
// artifacts, exit codes for validation / budget / verification failures, and
// byte-identical reruns.

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "symlie/json_io.hpp"

namespace {

using symlie::Json;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix + SYMLIE_CLI_PATH + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {};
  RunResult r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

std::string write_file(const std::string& name, const std::string& text) {
  std::string path = temp_path(name);
  std::ofstream f(path);
  f << text;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const char* kZzzTarget = R"({"hamiltonian":
    {"n": 3, "mode": "exact", "terms": [{"pauli": "ZZZ", "num": -1, "den": 1}]},
    "t": 0.7})";

const char* kQuditTarget = R"({"qudit": {"n": 2, "d": 3, "gap": 1.0, "ancillas": 1},
    "hamiltonian": {"dims": [3, 3], "entries": [[2, 4, 0.0, 0.6], [4, 2, 0.0, -0.6]]},
    "t": 0.2})";

TEST(CliTest, DimsQubitsTable) {
  std::string out_path = temp_path("dims.json");
  RunResult r = run_cli("dims --qubits 3 --out " + out_path);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("dimension report: n=3 qubits"), std::string::npos);
  EXPECT_NE(r.out.find("pairwise irrep-gap bound: ok"), std::string::npos);
  Json j = symlie::parse_json_file(out_path);
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][0]["dim"], 4);
  EXPECT_EQ(j["rows"][1]["dim"], 19);
  EXPECT_EQ(j["rows"][2]["dim"], 20);
  EXPECT_EQ(j["pairwise_ok"], true);
}

TEST(CliTest, DimsQuditsReport) {
  RunResult r = run_cli("dims --qudits 2 --levels 3");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("dim = sum m^2 = 19"), std::string::npos);
  EXPECT_NE(r.out.find("closure cross-check: 19 (ok)"), std::string::npos);
}

TEST(CliTest, DimsValidation) {
  EXPECT_EQ(run_cli("dims").exit_code, 1);
  EXPECT_EQ(run_cli("dims --qubits 3 --qudits 2").exit_code, 1);
  EXPECT_EQ(run_cli("dims --qubits 3 --unknown-flag 1").exit_code, 1);
}

TEST(CliTest, ChargeTestReports) {
  std::string target = write_file("zzz.json", kZzzTarget);
  RunResult fail2 = run_cli("charge-test --target " + target + " --k 2");
  ASSERT_EQ(fail2.exit_code, 0) << fail2.out;
  Json j2 = symlie::parse_json_text(fail2.out);
  EXPECT_EQ(j2["pass"], false);
  EXPECT_EQ(j2["violations"]["3"], -1.0);

  RunResult pass3 = run_cli("charge-test --target " + target + " --k 3");
  ASSERT_EQ(pass3.exit_code, 0);
  Json j3 = symlie::parse_json_text(pass3.out);
  EXPECT_EQ(j3["pass"], true);
  EXPECT_TRUE(j3["violations"].empty());

  EXPECT_EQ(run_cli("charge-test --target " + temp_path("absent.json") + " --k 2").exit_code, 1);
}

TEST(CliTest, CloseDimensionAndBudget) {
  RunResult r = run_cli("close --qubits 3 --k 2");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("dimension: 19 (closed)"), std::string::npos);

  EXPECT_EQ(run_cli("close --qubits 3 --k 2 --max-dim 5").exit_code, 2);
  EXPECT_EQ(run_cli("close --qubits 3 --k 2", "SYMLIE_BUDGET_DIM=5 ").exit_code, 2);
  EXPECT_EQ(run_cli("close --qubits 3 --k 2", "SYMLIE_BUDGET_DIM=banana ").exit_code, 1);
  EXPECT_EQ(run_cli("close --qubits 3 --k 9").exit_code, 1);
}

TEST(CliTest, CloseMembership) {
  std::string target = write_file("zzz_member.json", kZzzTarget);
  RunResult r = run_cli("close --qubits 3 --k 2 --member " + target);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("member: no"), std::string::npos);
}

TEST(CliTest, CompileVerifyRoundTrip) {
  std::string target = write_file("zzz_compile.json", kZzzTarget);
  std::string plan_path = temp_path("plan.json");
  RunResult r = run_cli("compile --target " + target + " --epsilon 1e-2 --out " + plan_path);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("pass"), std::string::npos);
  Json plan = symlie::parse_json_file(plan_path);
  EXPECT_EQ(plan["level"], "pulse");
  EXPECT_GT(plan["steps"].size(), 0u);

  RunResult v = run_cli("verify --plan " + plan_path + " --target " + target);
  EXPECT_EQ(v.exit_code, 0) << v.out;

  // Same hamiltonian, different evolution time: the plan no longer matches.
  std::string wrong = write_file("zzz_wrong_t.json", R"({"hamiltonian":
    {"n": 3, "mode": "exact", "terms": [{"pauli": "ZZZ", "num": -1, "den": 1}]},
    "t": 0.9})");
  RunResult bad = run_cli("verify --plan " + plan_path + " --target " + wrong);
  EXPECT_EQ(bad.exit_code, 3) << bad.out;
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST(CliTest, CompileDeterministic) {
  std::string target = write_file("zzz_det.json", kZzzTarget);
  std::string p1 = temp_path("plan_a.json");
  std::string p2 = temp_path("plan_b.json");
  ASSERT_EQ(run_cli("compile --target " + target + " --out " + p1).exit_code, 0);
  ASSERT_EQ(run_cli("compile --target " + target + " --out " + p2).exit_code, 0);
  std::string a = slurp(p1), b = slurp(p2);
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
}

TEST(CliTest, CompileWithGeometry) {
  std::string target = write_file("zzz_geo.json", kZzzTarget);
  std::string plan_path = temp_path("plan_star.json");
  RunResult r = run_cli("compile --target " + target +
                        " --geometry chain-star --epsilon 1e-2 --out " + plan_path);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  RunResult bad = run_cli("compile --target " + target + " --geometry chain-zz --level hamiltonian");
  EXPECT_EQ(bad.exit_code, 1);

  // Off-diagonal charge-conserving target: synthesized without an ancilla,
  // star routing borrows one.
  std::string hop = write_file("hop_geo.json", R"({"hamiltonian": {"n": 3, "mode": "float",
    "terms": [{"pauli": "ZZI", "coeff": 0.4}, {"pauli": "XXI", "coeff": 0.3},
              {"pauli": "YYI", "coeff": 0.3}, {"pauli": "IZZ", "coeff": -0.2}]},
    "t": 0.5})");
  std::string hop_plan = temp_path("plan_hop_star.json");
  RunResult hr = run_cli("compile --target " + hop +
                         " --geometry chain-star --epsilon 1e-2 --out " + hop_plan);
  ASSERT_EQ(hr.exit_code, 0) << hr.out;
  Json plan = symlie::parse_json_file(hop_plan);
  EXPECT_EQ(plan["ancilla"].size(), 1u);
}

TEST(CliTest, QuditCompileAndVerify) {
  std::string target = write_file("fpair.json", kQuditTarget);
  std::string plan_path = temp_path("qplan.json");
  RunResult r = run_cli("qudit-compile --target " + target + " --level hamiltonian --out " +
                        plan_path);
  ASSERT_EQ(r.exit_code, 0) << r.out;
  Json plan = symlie::parse_json_file(plan_path);
  EXPECT_TRUE(plan.contains("qudit"));

  RunResult v = run_cli("verify --plan " + plan_path + " --target " + target);
  EXPECT_EQ(v.exit_code, 0) << v.out;
}

TEST(CliTest, IdentitiesSuite) {
  RunResult r = run_cli("identities --seed 7");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("v=2  c=+1"), std::string::npos);
  EXPECT_NE(r.out.find("v=3  c=-1"), std::string::npos);
  EXPECT_NE(r.out.find("identity suite: all hold"), std::string::npos);
}

TEST(CliTest, NoSubcommandFails) {
  EXPECT_EQ(run_cli("").exit_code, 1);
  EXPECT_EQ(run_cli("frobnicate").exit_code, 1);
}

}  // namespace
