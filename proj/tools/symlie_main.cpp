// symlie: reachability analysis and compilation for symmetric interactions.
//
// Subcommands: dims, charge-test, close, compile, verify, qudit-compile,
// identities. Human-readable tables go to standard output, artifacts to
// --out files, diagnostics to standard error.
//
// Exit codes: 0 success, 1 validation error, 2 budget exceeded,
// 3 verification failure.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"

#include "symlie/compiler.hpp"
#include "symlie/densesim.hpp"
#include "symlie/errors.hpp"
#include "symlie/json_io.hpp"
#include "symlie/lie_closure.hpp"
#include "symlie/pauli_core.hpp"
#include "symlie/qudit_energy.hpp"
#include "symlie/symmetry.hpp"

namespace {

using namespace symlie;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

// --max-dim wins over SYMLIE_BUDGET_DIM; absent both, the caller's default
// budget applies.
std::optional<long> dim_budget(long flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("SYMLIE_BUDGET_DIM")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v <= 0)
      throw ValidationError("SYMLIE_BUDGET_DIM must be a positive integer");
    return v;
  }
  return std::nullopt;
}

Mode mode_from_string(const std::string& s) {
  if (s == "exact") return Mode::exact;
  if (s == "float") return Mode::floating;
  throw ValidationError("unknown mode '" + s + "' (expected exact|float)");
}

void write_artifact(const std::string& out, const Json& j) {
  if (!out.empty()) write_json_file(out, j);
}

// Target files carry either {"hamiltonian": ..., "t": ...} or a bare
// Pauli-sum object.
CompileTarget load_target(const std::string& path) {
  Json j = parse_json_file(path);
  if (j.is_object() && j.contains("hamiltonian")) return compile_target_from_json(j);
  CompileTarget ct;
  ct.hamiltonian = pauli_sum_exact_from_json(j);
  return ct;
}

struct DimsOpts {
  int qubits = 0;
  int qudits = 0;
  int levels = 3;
  int kmin = 1;
  int kmax = 0;
  long max_dim = 0;
  std::string out;
};

void run_dims_qubits(const DimsOpts& o) {
  SymmetrySpec spec = SymmetrySpec::qubits(o.qubits);
  int kmax = o.kmax > 0 ? o.kmax : o.qubits;
  if (o.kmin < 1 || kmax < o.kmin || kmax > o.qubits)
    throw ValidationError("need 1 <= kmin <= kmax <= n");
  if (auto budget = dim_budget(o.max_dim)) {
    long full = full_symmetric_dim(spec);
    if (full > *budget)
      throw BudgetError("full symmetric dimension " + std::to_string(full) +
                        " exceeds budget " + std::to_string(*budget));
  }
  DimensionReport rep = dimension_report(o.qubits, o.kmin, kmax, spec);

  std::printf("dimension report: n=%d qubits\n", rep.n);
  std::printf("%4s %10s %11s %6s %8s %8s\n", "k", "dim h_k", "traceless", "S_k", "irreps",
              "gap ok");
  for (const auto& r : rep.rows)
    std::printf("%4d %10ld %11ld %6ld %8ld %8s\n", r.k, r.dim, r.dim_traceless, r.s_k_dim,
                r.irreps, r.gap_ok ? "yes" : "NO");
  std::printf("pairwise irrep-gap bound: %s\n", rep.pairwise_ok ? "ok" : "VIOLATED");

  Json j;
  j["n"] = rep.n;
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json row;
    row["k"] = r.k;
    row["dim"] = r.dim;
    row["dim_traceless"] = r.dim_traceless;
    row["s_k_dim"] = r.s_k_dim;
    row["irreps"] = r.irreps;
    row["gap_ok"] = r.gap_ok;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["pairwise_ok"] = rep.pairwise_ok;
  write_artifact(o.out, j);
  if (!rep.pairwise_ok) throw VerificationError("irrep-gap bound violated");
}

void run_dims_qudits(const DimsOpts& o) {
  QuditSpec qs;
  qs.n = o.qudits;
  qs.d = o.levels;
  qs.ancillas = 0;
  EnergyAlgebraReport rep = energy_algebra_dim(qs);

  std::printf("energy-conserving algebra: n=%d qudits, d=%d\n", qs.n, qs.d);
  std::printf("sector multiplicities:");
  for (long m : rep.multiplicities) std::printf(" %ld", m);
  std::printf("\ndim = sum m^2 = %ld\n", rep.dim);
  if (rep.closure_checked)
    std::printf("closure cross-check: %ld (%s)\n", rep.closure_dim,
                rep.closure_ok ? "ok" : "MISMATCH");
  if (rep.exact_checked) std::printf("exact closure: %ld\n", rep.exact_dim);

  Json j;
  j["n"] = qs.n;
  j["d"] = qs.d;
  j["multiplicities"] = rep.multiplicities;
  j["dim"] = rep.dim;
  Json cl;
  cl["checked"] = rep.closure_checked;
  cl["dim"] = rep.closure_dim;
  cl["ok"] = rep.closure_ok;
  j["closure"] = cl;
  Json ex;
  ex["checked"] = rep.exact_checked;
  ex["dim"] = rep.exact_dim;
  j["exact"] = ex;
  write_artifact(o.out, j);
  if (rep.closure_checked && !rep.closure_ok)
    throw VerificationError("closure dimension disagrees with sum m^2");
}

struct ChargeTestOpts {
  std::string target;
  int k = 0;
  std::string out;
};

void run_charge_test(const ChargeTestOpts& o) {
  CompileTarget ct = load_target(o.target);
  SkReport rep = s_k_test(ct.hamiltonian, o.k);
  Json j;
  j["pass"] = rep.pass;
  Json v = Json::object();
  for (const auto& [y, s] : rep.violations) v[std::to_string(y)] = to_double(s);
  j["violations"] = v;
  std::cout << dump_json(j);
  write_artifact(o.out, j);
}

struct CloseOpts {
  int qubits = 0;
  int k = 0;
  std::string mode = "exact";
  long max_dim = 0;
  std::string member;
  std::string out;
};

void run_close(const CloseOpts& o) {
  if (o.qubits < 1 || o.k < 1 || o.k > o.qubits)
    throw ValidationError("need 1 <= k <= qubits");
  SymmetrySpec spec = SymmetrySpec::qubits(o.qubits);
  std::vector<PauliSumQ> gens = klocal_symmetric_basis(o.qubits, o.k, spec);
  auto budget = dim_budget(o.max_dim);
  Mode mode = mode_from_string(o.mode);

  Json j;
  j["n"] = o.qubits;
  j["k"] = o.k;
  j["mode"] = o.mode;
  j["generator_count"] = gens.size();

  std::printf("closure: n=%d k=%d mode=%s\n", o.qubits, o.k, o.mode.c_str());
  std::printf("generators: %zu\n", gens.size());
  if (mode == Mode::exact) {
    LieBasis basis = close(gens, spec, budget);
    std::printf("dimension: %zu (%s)\n", basis.dimension(), basis.closed() ? "closed" : "open");
    j["dimension"] = basis.dimension();
    j["closed"] = basis.closed();
    if (!o.member.empty()) {
      PauliSumQ h = load_target(o.member).hamiltonian;
      auto m = basis.member(h);
      std::printf("member: %s residual %s\n", m.member ? "yes" : "no",
                  fmt("%.3e", to_double(m.residual)).c_str());
      Json mj;
      mj["member"] = m.member;
      mj["residual"] = to_double(m.residual);
      j["member"] = mj;
    }
    Json els = Json::array();
    for (const auto& e : basis.elements()) els.push_back(to_json(e));
    j["elements"] = els;
  } else {
    std::vector<PauliSumF> fgens;
    fgens.reserve(gens.size());
    for (const auto& g : gens) fgens.push_back(to_float(g));
    LieBasisF basis = close(fgens, spec, budget);
    std::printf("dimension: %zu (%s)\n", basis.dimension(), basis.closed() ? "closed" : "open");
    j["dimension"] = basis.dimension();
    j["closed"] = basis.closed();
    if (!o.member.empty()) {
      PauliSumF h = to_float(load_target(o.member).hamiltonian);
      auto m = basis.member(h);
      std::printf("member: %s residual %s\n", m.member ? "yes" : "no",
                  fmt("%.3e", m.residual).c_str());
      Json mj;
      mj["member"] = m.member;
      mj["residual"] = m.residual;
      j["member"] = mj;
    }
    Json els = Json::array();
    for (const auto& e : basis.elements()) els.push_back(to_json(e));
    j["elements"] = els;
  }
  write_artifact(o.out, j);
}

void print_verify(const VerifyReport& v) {
  std::printf("verify: sector %s  leakage %s  phase %s  tol %s  %s\n",
              fmt("%.3e", v.sector_distance).c_str(), fmt("%.3e", v.leakage).c_str(),
              fmt("%.6f", v.phase).c_str(), fmt("%.1e", v.tolerance).c_str(),
              v.pass ? "pass" : "FAIL");
}

Json verify_json(const VerifyReport& v) {
  Json j;
  j["sector_distance"] = v.sector_distance;
  j["leakage"] = v.leakage;
  j["phase"] = v.phase;
  j["tolerance"] = v.tolerance;
  j["pass"] = v.pass;
  return j;
}

struct CompileOpts {
  std::string target;
  std::string ancilla = "auto";
  double epsilon = 1e-2;
  std::string level = "pulse";
  std::string scheme = "trotter2";
  std::string geometry = "none";
  long max_dim = 0;
  std::string out;
};

void run_compile(const CompileOpts& o) {
  CompileTarget ct = load_target(o.target);
  const PauliSumQ& h = ct.hamiltonian;
  int n = h.n();
  if (n < 1) throw ValidationError("target hamiltonian is empty");

  CircuitPlan plan;
  if (h.diagonal()) {
    int anc = n;
    if (o.ancilla != "auto") {
      try {
        std::size_t pos = 0;
        anc = std::stoi(o.ancilla, &pos);
        if (pos != o.ancilla.size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        throw ValidationError("--ancilla expects 'auto' or a site index");
      }
      if (anc != n)
        throw ValidationError("the ancilla must be the site right after the system (" +
                              std::to_string(n) + ")");
    }
    plan = diagonal_with_ancilla(h, anc, ct.t);
  } else {
    SymmetrySpec spec = SymmetrySpec::qubits(n);
    if (!is_symmetric(h, spec))
      throw ValidationError("target is neither diagonal nor charge-conserving");
    LieBasis basis = close(klocal_symmetric_basis(n, 2, spec), spec, dim_budget(o.max_dim));
    plan = synthesize_hamiltonian(h, basis, ct.t);
  }

  std::printf("compile: n=%d terms=%zu t=%s level=%s\n", n, h.size(),
              fmt("%.6g", ct.t).c_str(), o.level.c_str());
  if (o.level == "pulse") {
    ExpandReport xr = expand_to_pulses(plan, o.epsilon, scheme_from_string(o.scheme));
    plan = xr.plan;
    std::printf("pulses: %ld  attempts %d  model %s  measured %s  leakage %s\n", xr.pulse_count,
                xr.attempts, fmt("%.3e", xr.model_error).c_str(),
                fmt("%.3e", xr.measured_error).c_str(), fmt("%.3e", xr.leakage).c_str());
  } else if (o.level != "hamiltonian") {
    throw ValidationError("unknown level '" + o.level + "' (expected hamiltonian|pulse)");
  }

  Geometry geo = geometry_from_string(o.geometry);
  if (geo != Geometry::none) {
    if (plan.level != PlanLevel::pulse)
      throw ValidationError("geometry routing requires a pulse-level plan");
    plan = swap_route(plan, geo);
    std::printf("routed (%s): %zu pulses\n", o.geometry.c_str(), plan.steps.size());
  }

  VerifyReport v = verify_plan(plan, to_float(h), ct.t);
  print_verify(v);
  write_artifact(o.out, to_json(plan));
  if (!o.out.empty()) std::printf("plan written to %s\n", o.out.c_str());
  if (!v.pass)
    throw VerificationError("compiled plan missed its tolerance (sector distance " +
                            fmt("%.3e", v.sector_distance) + ")");
}

struct VerifyOpts {
  std::string plan;
  std::string target;
  double epsilon = 0;
  std::string out;
};

void run_verify(const VerifyOpts& o) {
  Json pj = parse_json_file(o.plan);
  std::optional<double> tol;
  if (o.epsilon > 0) tol = o.epsilon;
  if (pj.is_object() && pj.contains("qudit")) {
    QuditPlan plan = qudit_plan_from_json(pj);
    QuditTarget qt = qudit_target_from_json(parse_json_file(o.target));
    QuditVerifyReport v = verify_qudit_plan(plan, qt.hamiltonian, qt.t, tol);
    std::printf("verify: sector %s  leakage %s  tol %s  %s\n",
                fmt("%.3e", v.sector_distance).c_str(), fmt("%.3e", v.leakage).c_str(),
                fmt("%.1e", v.tolerance).c_str(), v.pass ? "pass" : "FAIL");
    Json j;
    j["sector_distance"] = v.sector_distance;
    j["leakage"] = v.leakage;
    j["tolerance"] = v.tolerance;
    j["pass"] = v.pass;
    write_artifact(o.out, j);
    if (!v.pass) throw VerificationError("plan missed its tolerance");
    return;
  }
  CircuitPlan plan = plan_from_json(pj);
  CompileTarget ct = load_target(o.target);
  VerifyReport v = verify_plan(plan, to_float(ct.hamiltonian), ct.t, tol);
  print_verify(v);
  write_artifact(o.out, verify_json(v));
  if (!v.pass) throw VerificationError("plan missed its tolerance");
}

struct QuditCompileOpts {
  std::string target;
  double epsilon = 1e-2;
  std::string level = "pulse";
  std::string scheme = "trotter2";
  std::string out;
};

void run_qudit_compile(const QuditCompileOpts& o) {
  QuditTarget qt = qudit_target_from_json(parse_json_file(o.target));
  QuditPlan plan = qudit_synthesize(qt.hamiltonian, qt.spec, qt.t);
  std::printf("qudit-compile: n=%d d=%d t=%s level=%s\n", qt.spec.n, qt.spec.d,
              fmt("%.6g", qt.t).c_str(), o.level.c_str());
  if (o.level == "pulse") {
    QuditExpandReport xr = qudit_expand_to_pulses(plan, o.epsilon, scheme_from_string(o.scheme));
    plan = xr.plan;
    std::printf("pulses: %ld  attempts %d  model %s  measured %s  leakage %s\n", xr.pulse_count,
                xr.attempts, fmt("%.3e", xr.model_error).c_str(),
                fmt("%.3e", xr.measured_error).c_str(), fmt("%.3e", xr.leakage).c_str());
  } else if (o.level != "hamiltonian") {
    throw ValidationError("unknown level '" + o.level + "' (expected hamiltonian|pulse)");
  }
  QuditVerifyReport v = verify_qudit_plan(plan, qt.hamiltonian, qt.t);
  std::printf("verify: sector %s  leakage %s  tol %s  %s\n", fmt("%.3e", v.sector_distance).c_str(),
              fmt("%.3e", v.leakage).c_str(), fmt("%.1e", v.tolerance).c_str(),
              v.pass ? "pass" : "FAIL");
  write_artifact(o.out, to_json(plan));
  if (!o.out.empty()) std::printf("plan written to %s\n", o.out.c_str());
  if (!v.pass)
    throw VerificationError("compiled plan missed its tolerance (sector distance " +
                            fmt("%.3e", v.sector_distance) + ")");
}

struct IdentityOpts {
  unsigned long seed = 0;
  int vmax = 6;
  std::string out;
};

void run_identities(const IdentityOpts& o) {
  if (o.vmax < 2 || o.vmax > 16) throw ValidationError("need 2 <= vmax <= 16");
  std::mt19937_64 rng(o.seed);

  // Chain closing signs: ten random site tuples per length, each checked
  // symbolically; the sign must agree across tuples of the same length.
  std::map<int, int> signs;
  for (int v = 2; v <= o.vmax; ++v) {
    int n_total = v + 2;
    std::vector<int> all(n_total);
    std::iota(all.begin(), all.end(), 0);
    for (int rep = 0; rep < 10; ++rep) {
      std::shuffle(all.begin(), all.end(), rng);
      ChainSpec cs;
      cs.sites.assign(all.begin(), all.begin() + v);
      cs.n_total = n_total;
      ChainResult cr = chain_hamiltonian(cs);
      PauliSumQ want = cr.target;
      want *= Rational(cr.sign);
      if (!(cr.realized == want))
        throw VerificationError("chain identity mismatch at v=" + std::to_string(v));
      auto [it, fresh] = signs.try_emplace(v, cr.sign);
      if (!fresh && it->second != cr.sign)
        throw VerificationError("chain sign inconsistent at v=" + std::to_string(v));
    }
  }
  std::printf("chain closing signs (10 random tuples per v, exact):\n");
  for (const auto& [v, c] : signs) std::printf("  v=%d  c=%+d\n", v, c);

  // Two-pulse swap macro against the exact swap permutation, phase included.
  double swap_diff = 0;
  const int m = 4;
  for (auto [j, k] : std::vector<std::pair<int, int>>{{0, 1}, {1, 3}, {2, 0}}) {
    double phase = 0;
    std::vector<PlanStep> steps = swap_pulses(j, k, m, phase);
    CircuitPlan p;
    p.n = m;
    p.level = PlanLevel::pulse;
    p.steps = std::move(steps);
    p.phase = phase;
    Matrix u = run_plan(p);
    long dim = 1L << m;
    Matrix s = Matrix::Zero(dim, dim);
    for (long b = 0; b < dim; ++b) {
      long bj = (b >> (m - 1 - j)) & 1, bk = (b >> (m - 1 - k)) & 1;
      long bb = b;
      if (bj != bk) bb ^= (1L << (m - 1 - j)) | (1L << (m - 1 - k));
      s(bb, b) = 1;
    }
    swap_diff = std::max(swap_diff, (u - s).cwiseAbs().maxCoeff());
  }
  std::printf("swap identity: max deviation %s\n", fmt("%.3e", swap_diff).c_str());
  if (swap_diff > 1e-12) throw VerificationError("swap identity deviates");

  // Two-ancilla reduction of the pair hop, exact on the minimal space.
  Json ta = Json::array();
  for (auto [d, l, lp] : std::vector<std::tuple<int, int, int>>{{2, 1, 1}, {3, 1, 2}, {3, 2, 2}}) {
    QuditSpec qs;
    qs.n = 2;
    qs.d = d;
    qs.ancillas = 2;
    TwoAncillaReduction r = two_ancilla_reduce(qs, 0, 1, l, lp);
    std::printf("two-ancilla reduction: d=%d l=%d l'=%d  diff %s  %s\n", d, l, lp,
                fmt("%.3e", r.max_abs_diff).c_str(), r.identity_ok ? "ok" : "FAIL");
    Json row;
    row["d"] = d;
    row["l"] = l;
    row["lp"] = lp;
    row["max_diff"] = r.max_abs_diff;
    row["ok"] = r.identity_ok;
    ta.push_back(row);
    if (!r.identity_ok) throw VerificationError("two-ancilla reduction deviates");
  }
  std::printf("identity suite: all hold\n");

  Json j;
  Json cs = Json::object();
  for (const auto& [v, c] : signs) cs[std::to_string(v)] = c;
  j["chain_signs"] = cs;
  j["swap_max_diff"] = swap_diff;
  j["two_ancilla"] = ta;
  j["pass"] = true;
  write_artifact(o.out, j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"symmetric-unitary reachability analysis and compilation"};
  app.require_subcommand(1);

  DimsOpts dims;
  CLI::App* d = app.add_subcommand("dims", "closure dimension table with irrep-count bounds");
  d->add_option("--qubits", dims.qubits, "number of two-level sites");
  d->add_option("--qudits", dims.qudits, "number of equal-gap qudits (energy charges)");
  d->add_option("--levels", dims.levels, "levels per qudit (with --qudits)")->capture_default_str();
  d->add_option("--kmin", dims.kmin, "smallest locality")->capture_default_str();
  d->add_option("--kmax", dims.kmax, "largest locality (default n)");
  d->add_option("--max-dim", dims.max_dim, "closure dimension budget");
  d->add_option("--out", dims.out, "JSON artifact path");

  ChargeTestOpts charge;
  CLI::App* c = app.add_subcommand("charge-test", "weight-class test for a diagonal target");
  c->add_option("--target", charge.target, "target JSON file")->required();
  c->add_option("--k", charge.k, "locality bound")->required();
  c->add_option("--out", charge.out, "JSON artifact path");

  CloseOpts close_opts;
  CLI::App* cl = app.add_subcommand("close", "Lie closure of the k-local symmetric basis");
  cl->add_option("--qubits", close_opts.qubits, "number of two-level sites")->required();
  cl->add_option("--k", close_opts.k, "locality bound")->required();
  cl->add_option("--mode", close_opts.mode, "exact|float")->capture_default_str();
  cl->add_option("--max-dim", close_opts.max_dim, "closure dimension budget");
  cl->add_option("--member", close_opts.member, "test membership of this target JSON");
  cl->add_option("--out", close_opts.out, "JSON artifact path");

  CompileOpts comp;
  CLI::App* co = app.add_subcommand("compile", "compile a target hamiltonian into a plan");
  co->add_option("--target", comp.target, "target JSON file")->required();
  co->add_option("--ancilla", comp.ancilla, "'auto' or the ancilla site index")->capture_default_str();
  co->add_option("--epsilon", comp.epsilon, "pulse-level error budget")->capture_default_str();
  co->add_option("--level", comp.level, "hamiltonian|pulse")->capture_default_str();
  co->add_option("--scheme", comp.scheme, "trotter2|groupcomm")->capture_default_str();
  co->add_option("--geometry", comp.geometry, "none|chain-star|chain-zz")->capture_default_str();
  co->add_option("--max-dim", comp.max_dim, "closure dimension budget");
  co->add_option("--out", comp.out, "plan JSON path");

  VerifyOpts ver;
  CLI::App* ve = app.add_subcommand("verify", "certify a plan against a target");
  ve->add_option("--plan", ver.plan, "plan JSON file")->required();
  ve->add_option("--target", ver.target, "target JSON file")->required();
  ve->add_option("--epsilon", ver.epsilon, "tolerance override");
  ve->add_option("--out", ver.out, "JSON artifact path");

  QuditCompileOpts qc;
  CLI::App* q = app.add_subcommand("qudit-compile", "compile an energy-conserving qudit target");
  q->add_option("--target", qc.target, "qudit target JSON file")->required();
  q->add_option("--epsilon", qc.epsilon, "pulse-level error budget")->capture_default_str();
  q->add_option("--level", qc.level, "hamiltonian|pulse")->capture_default_str();
  q->add_option("--scheme", qc.scheme, "trotter2|groupcomm")->capture_default_str();
  q->add_option("--out", qc.out, "plan JSON path");

  IdentityOpts ids;
  CLI::App* id = app.add_subcommand("identities", "chain, swap, and two-ancilla identity suite");
  id->add_option("--seed", ids.seed, "random tuple seed")->capture_default_str();
  id->add_option("--vmax", ids.vmax, "largest chain length")->capture_default_str();
  id->add_option("--out", ids.out, "JSON artifact path");

  try {
    app.parse(argc, argv);
    if (d->parsed()) {
      if ((dims.qubits > 0) == (dims.qudits > 0))
        throw ValidationError("pass exactly one of --qubits / --qudits");
      if (dims.qubits > 0)
        run_dims_qubits(dims);
      else
        run_dims_qudits(dims);
    } else if (c->parsed()) {
      run_charge_test(charge);
    } else if (cl->parsed()) {
      run_close(close_opts);
    } else if (co->parsed()) {
      run_compile(comp);
    } else if (ve->parsed()) {
      run_verify(ver);
    } else if (q->parsed()) {
      run_qudit_compile(qc);
    } else if (id->parsed()) {
      run_identities(ids);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const VerificationError& e) {
    std::cerr << "verification failure: " << e.what() << "\n";
    return 3;
  } catch (const InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
