#include "symlie/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "symlie/errors.hpp"

namespace symlie {

namespace {

Json rational_to_json(const Rational& q) {
  std::int64_t num = 0, den = 1;
  if (fits_int64(q, num, den) && den == 1) return Json(num);
  return Json(rational_to_string(q));
}

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(static_cast<long>(j.get<std::int64_t>()));
  if (j.is_string()) return rational_from_string(j.get<std::string>());
  if (j.is_number_float()) {
    Rational q(j.get<double>());
    q.canonicalize();
    return q;
  }
  throw ValidationError("expected an integer or a p/q string for an exact coefficient");
}

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing JSON field \"") + key + "\"");
  return *it;
}

int int_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_integer()) throw ValidationError(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

double num_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw ValidationError(std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

std::vector<int> int_list(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of integers");
  std::vector<int> out;
  for (const Json& v : j) {
    if (!v.is_number_integer()) throw ValidationError(std::string(what) + " must contain integers");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace

Json to_json(const PauliSumQ& a) {
  Json terms = Json::array();
  for (const auto& [p, c] : a.terms()) {
    Json t;
    t["pauli"] = to_string(p, a.n());
    std::int64_t num = 0, den = 1;
    if (fits_int64(c, num, den)) {
      t["num"] = num;
      t["den"] = den;
    } else {
      t["coeff"] = rational_to_string(c);
    }
    terms.push_back(std::move(t));
  }
  Json j;
  j["n"] = a.n();
  j["mode"] = "exact";
  j["terms"] = std::move(terms);
  return j;
}

Json to_json(const PauliSumF& a) {
  Json terms = Json::array();
  for (const auto& [p, c] : a.terms()) {
    Json t;
    t["pauli"] = to_string(p, a.n());
    t["coeff"] = c;
    terms.push_back(std::move(t));
  }
  Json j;
  j["n"] = a.n();
  j["mode"] = "float";
  j["terms"] = std::move(terms);
  return j;
}

namespace {

template <class C, class CoeffFn>
PauliSumT<C> pauli_sum_from_json_impl(const Json& j, CoeffFn coeff) {
  int n = int_field(j, "n");
  PauliSumT<C> out(n);
  const Json& terms = field(j, "terms");
  if (!terms.is_array()) throw ValidationError("\"terms\" must be an array");
  for (const Json& t : terms) {
    const Json& ps = field(t, "pauli");
    if (!ps.is_string()) throw ValidationError("\"pauli\" must be a letter string");
    std::string s = ps.get<std::string>();
    if (static_cast<int>(s.size()) != n)
      throw ValidationError("pauli string length does not match n");
    out.add(pauli_from_string(s), coeff(t));
  }
  return out;
}

}  // namespace

PauliSumQ pauli_sum_exact_from_json(const Json& j) {
  return pauli_sum_from_json_impl<Rational>(j, [](const Json& t) -> Rational {
    if (t.contains("coeff")) {
      const Json& c = t["coeff"];
      if (c.is_string()) return rational_from_string(c.get<std::string>());
      return rational_from_json(c);
    }
    Rational num = rational_from_json(field(t, "num"));
    Rational den = t.contains("den") ? rational_from_json(t["den"]) : Rational(1);
    if (sgn(den) == 0) throw ValidationError("zero denominator in an exact coefficient");
    Rational q = num / den;
    q.canonicalize();
    return q;
  });
}

PauliSumF pauli_sum_float_from_json(const Json& j) {
  return pauli_sum_from_json_impl<double>(j, [](const Json& t) -> double {
    if (t.contains("coeff")) {
      const Json& c = t["coeff"];
      if (c.is_string()) return rational_from_string(c.get<std::string>()).get_d();
      if (!c.is_number()) throw ValidationError("\"coeff\" must be a number");
      return c.get<double>();
    }
    double num = num_field(t, "num");
    double den = t.contains("den") ? num_field(t, "den") : 1.0;
    if (den == 0) throw ValidationError("zero denominator in a coefficient");
    return num / den;
  });
}

Json to_json(const SymmetrySpec& spec) {
  // Compact forms for the common cases, explicit charge lists otherwise.
  bool all_qubits = !spec.sites.empty();
  for (const auto& site : spec.sites)
    all_qubits = all_qubits && site.size() == 2 && site[0] == Rational(1) && site[1] == Rational(-1);
  Json j;
  if (all_qubits) {
    j["qubits"] = static_cast<int>(spec.sites.size());
    return j;
  }
  bool all_energy = !spec.sites.empty();
  int d = spec.sites.empty() ? 0 : static_cast<int>(spec.sites[0].size());
  for (const auto& site : spec.sites) {
    all_energy = all_energy && static_cast<int>(site.size()) == d;
    for (int r = 0; all_energy && r < static_cast<int>(site.size()); ++r)
      all_energy = site[r] == Rational(r);
  }
  if (all_energy && d >= 2) {
    Json q;
    q["n"] = static_cast<int>(spec.sites.size());
    q["d"] = d;
    j["qudits"] = std::move(q);
    return j;
  }
  Json sites = Json::array();
  for (const auto& site : spec.sites) {
    Json row = Json::array();
    for (const Rational& c : site) row.push_back(rational_to_json(c));
    sites.push_back(std::move(row));
  }
  j["sites"] = std::move(sites);
  return j;
}

SymmetrySpec symmetry_from_json(const Json& j) {
  if (j.contains("qubits")) return SymmetrySpec::qubits(int_field(j, "qubits"));
  if (j.contains("qudits")) {
    const Json& q = field(j, "qudits");
    return SymmetrySpec::qudit_energy(int_field(q, "n"), int_field(q, "d"));
  }
  if (!j.contains("sites"))
    throw ValidationError("symmetry spec needs \"qubits\", \"qudits\", or \"sites\"");
  const Json& sites = field(j, "sites");
  if (!sites.is_array()) throw ValidationError("\"sites\" must be an array of charge lists");
  SymmetrySpec spec;
  for (const Json& row : sites) {
    if (!row.is_array() || row.size() < 2)
      throw ValidationError("every site needs at least two charges");
    std::vector<Rational> charges;
    for (const Json& c : row) charges.push_back(rational_from_json(c));
    spec.sites.push_back(std::move(charges));
  }
  return spec;
}

namespace {

const char* gen_kind_name(GenKind k) {
  switch (k) {
    case GenKind::R: return "R";
    case GenKind::T: return "T";
    case GenKind::Zlocal: return "Zlocal";
    case GenKind::Zmono: return "Zmono";
  }
  throw ValidationError("unknown generator kind");
}

GenKind gen_kind_from_name(const std::string& s) {
  if (s == "R") return GenKind::R;
  if (s == "T") return GenKind::T;
  if (s == "Zlocal") return GenKind::Zlocal;
  if (s == "Zmono") return GenKind::Zmono;
  throw ValidationError("unknown generator kind \"" + s + "\"");
}

}  // namespace

Json to_json(const GenRef& g) {
  Json j;
  j["gen"] = gen_kind_name(g.kind);
  j["sites"] = g.sites;
  return j;
}

GenRef gen_from_json(const Json& j) {
  GenRef g;
  const Json& k = field(j, "gen");
  if (!k.is_string()) throw ValidationError("\"gen\" must be a string");
  g.kind = gen_kind_from_name(k.get<std::string>());
  g.sites = int_list(field(j, "sites"), "\"sites\"");
  return g;
}

Json to_json(const CircuitPlan& plan) {
  Json j;
  j["n"] = plan.n;
  j["ancilla"] = plan.ancilla;
  j["level"] = to_string(plan.level);
  j["epsilon"] = plan.epsilon;
  j["scheme"] = plan.scheme;
  j["primitive_set"] = plan.primitive_set;
  Json prims = Json::array();
  for (const GenRef& g : plan.primitives) prims.push_back(to_json(g));
  j["primitives"] = std::move(prims);
  Json steps = Json::array();
  for (const PlanStep& st : plan.steps) {
    Json s;
    if (st.gen) {
      s["gen"] = gen_kind_name(st.gen->kind);
      s["sites"] = st.gen->sites;
    } else {
      s["ham"] = to_json(st.ham);
    }
    s["duration"] = st.duration;
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  j["phase"] = plan.phase;
  return j;
}

CircuitPlan plan_from_json(const Json& j) {
  CircuitPlan plan;
  plan.n = int_field(j, "n");
  if (j.contains("ancilla")) plan.ancilla = int_list(j["ancilla"], "\"ancilla\"");
  plan.level = plan_level_from_string(field(j, "level").get<std::string>());
  if (j.contains("epsilon")) plan.epsilon = num_field(j, "epsilon");
  if (j.contains("scheme")) plan.scheme = field(j, "scheme").get<std::string>();
  if (j.contains("primitive_set")) plan.primitive_set = field(j, "primitive_set").get<std::string>();
  if (j.contains("primitives"))
    for (const Json& g : j["primitives"]) plan.primitives.push_back(gen_from_json(g));
  const Json& steps = field(j, "steps");
  if (!steps.is_array()) throw ValidationError("\"steps\" must be an array");
  int total = plan.n + static_cast<int>(plan.ancilla.size());
  for (const Json& s : steps) {
    PlanStep st;
    st.duration = num_field(s, "duration");
    if (s.contains("gen")) {
      GenRef g = gen_from_json(s);
      st.ham = make_generator<double>(g, total);
      st.gen = g;
    } else {
      st.ham = pauli_sum_float_from_json(field(s, "ham"));
      if (st.ham.n() != total)
        throw ValidationError("step hamiltonian does not match the plan's site count");
    }
    plan.steps.push_back(std::move(st));
  }
  if (j.contains("phase")) plan.phase = num_field(j, "phase");
  return plan;
}

Json to_json(const QuditSpec& spec) {
  Json j;
  j["n"] = spec.n;
  j["d"] = spec.d;
  j["gap"] = spec.gap;
  j["ancillas"] = spec.ancillas;
  return j;
}

QuditSpec qudit_spec_from_json(const Json& j) {
  QuditSpec spec;
  spec.n = int_field(j, "n");
  spec.d = int_field(j, "d");
  if (j.contains("gap")) spec.gap = num_field(j, "gap");
  if (j.contains("ancillas")) spec.ancillas = int_field(j, "ancillas");
  spec.dims();  // validates
  return spec;
}

Json to_json(const QuditGen& g) {
  Json j;
  switch (g.kind) {
    case QuditGenKind::hop_star:
    case QuditGenKind::hop_pair:
      j["gen"] = "R";
      break;
    case QuditGenKind::z_level:
      j["gen"] = "Z";
      break;
    case QuditGenKind::z_ancilla:
      j["gen"] = "Za";
      break;
  }
  j["sites"] = g.sites;
  if (!g.levels.empty()) j["levels"] = g.levels;
  return j;
}

QuditGen qudit_gen_from_json(const Json& j) {
  QuditGen g;
  const Json& k = field(j, "gen");
  if (!k.is_string()) throw ValidationError("\"gen\" must be a string");
  std::string kind = k.get<std::string>();
  g.sites = int_list(field(j, "sites"), "\"sites\"");
  if (j.contains("levels")) g.levels = int_list(j["levels"], "\"levels\"");
  if (kind == "R") {
    if (g.levels.size() == 1)
      g.kind = QuditGenKind::hop_star;
    else if (g.levels.size() == 2)
      g.kind = QuditGenKind::hop_pair;
    else
      throw ValidationError("hop generators need one or two levels");
  } else if (kind == "Z") {
    g.kind = QuditGenKind::z_level;
  } else if (kind == "Za") {
    g.kind = QuditGenKind::z_ancilla;
  } else {
    throw ValidationError("unknown qudit generator kind \"" + kind + "\"");
  }
  return g;
}

Json to_json(const QuditOperator& op) {
  Json j;
  j["dims"] = op.dims;
  using Iter = Eigen::SparseMatrix<std::complex<double>>::InnerIterator;
  std::vector<std::tuple<long, long, double, double>> entries;
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (Iter it(op.mat, k); it; ++it)
      if (it.value() != std::complex<double>(0, 0))
        entries.emplace_back(it.row(), it.col(), it.value().real(), it.value().imag());
  std::sort(entries.begin(), entries.end());
  Json arr = Json::array();
  for (const auto& [r, c, re, im] : entries) arr.push_back(Json::array({r, c, re, im}));
  j["entries"] = std::move(arr);
  return j;
}

QuditOperator qudit_operator_from_json(const Json& j) {
  std::vector<int> dims = int_list(field(j, "dims"), "\"dims\"");
  const Json& arr = field(j, "entries");
  if (!arr.is_array()) throw ValidationError("\"entries\" must be an array");
  std::vector<std::tuple<long, long, std::complex<double>>> entries;
  for (const Json& e : arr) {
    if (!e.is_array() || (e.size() != 3 && e.size() != 4))
      throw ValidationError("every entry must be [row, col, re] or [row, col, re, im]");
    long r = e[0].get<long>();
    long c = e[1].get<long>();
    double re = e[2].get<double>();
    double im = e.size() == 4 ? e[3].get<double>() : 0.0;
    entries.emplace_back(r, c, std::complex<double>(re, im));
  }
  return qudit_operator(std::move(dims), entries);
}

Json to_json(const QuditPlan& plan) {
  Json j;
  j["qudit"] = to_json(plan.spec);
  j["level"] = to_string(plan.level);
  j["epsilon"] = plan.epsilon;
  j["scheme"] = plan.scheme;
  j["primitive_set"] = plan.primitive_set;
  Json prims = Json::array();
  for (const QuditGen& g : plan.primitives) prims.push_back(to_json(g));
  j["primitives"] = std::move(prims);
  Json steps = Json::array();
  for (const QuditStep& st : plan.steps) {
    Json s;
    if (st.gen) {
      Json g = to_json(*st.gen);
      for (auto& [key, val] : g.items()) s[key] = val;
    } else {
      s["ham"] = to_json(st.ham);
    }
    s["duration"] = st.duration;
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  j["phase"] = plan.phase;
  return j;
}

QuditPlan qudit_plan_from_json(const Json& j) {
  QuditPlan plan;
  plan.spec = qudit_spec_from_json(field(j, "qudit"));
  plan.level = plan_level_from_string(field(j, "level").get<std::string>());
  if (j.contains("epsilon")) plan.epsilon = num_field(j, "epsilon");
  if (j.contains("scheme")) plan.scheme = field(j, "scheme").get<std::string>();
  if (j.contains("primitive_set")) plan.primitive_set = field(j, "primitive_set").get<std::string>();
  if (j.contains("primitives"))
    for (const Json& g : j["primitives"]) plan.primitives.push_back(qudit_gen_from_json(g));
  const Json& steps = field(j, "steps");
  if (!steps.is_array()) throw ValidationError("\"steps\" must be an array");
  for (const Json& s : steps) {
    QuditStep st;
    st.duration = num_field(s, "duration");
    if (s.contains("gen")) {
      QuditGen g = qudit_gen_from_json(s);
      st.ham = build_interaction(plan.spec, g);
      st.gen = g;
    } else {
      st.ham = qudit_operator_from_json(field(s, "ham"));
      if (st.ham.dims != plan.spec.dims())
        throw ValidationError("step operator does not match the qudit spec");
    }
    plan.steps.push_back(std::move(st));
  }
  if (j.contains("phase")) plan.phase = num_field(j, "phase");
  return plan;
}

CompileTarget compile_target_from_json(const Json& j) {
  CompileTarget t;
  t.hamiltonian = pauli_sum_exact_from_json(field(j, "hamiltonian"));
  if (j.contains("t")) t.t = num_field(j, "t");
  return t;
}

QuditTarget qudit_target_from_json(const Json& j) {
  QuditTarget t;
  t.spec = qudit_spec_from_json(field(j, "qudit"));
  t.hamiltonian = qudit_operator_from_json(field(j, "hamiltonian"));
  if (j.contains("t")) t.t = num_field(j, "t");
  return t;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

Json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str());
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << dump_json(j);
  if (!out) throw ValidationError("failed writing " + path);
}

}  // namespace symlie
