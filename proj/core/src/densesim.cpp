#include "symlie/densesim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "symlie/errors.hpp"

namespace symlie {

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

void check_dim(long dim) {
  if (dim > kDenseBudget)
    throw BudgetError("dense dimension " + std::to_string(dim) + " exceeds budget " +
                      std::to_string(kDenseBudget));
}

// PauliString masks index sites as bit j = site j; dense indices put site 0
// in the most significant position.
std::uint64_t site_mask_to_index(std::uint64_t m, int n) {
  std::uint64_t out = 0;
  for (int j = 0; j < n; ++j)
    if (m >> j & 1) out |= 1ull << (n - 1 - j);
  return out;
}

}  // namespace

Matrix pauli_matrix(const PauliString& p, int n) {
  long dim = 1L << n;
  check_dim(dim);
  std::uint64_t xi = site_mask_to_index(p.x, n);
  std::uint64_t zi = site_mask_to_index(p.z, n);
  static const std::complex<double> kPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  std::complex<double> phase = kPow[std::popcount(p.x & p.z) & 3];
  Matrix m = Matrix::Zero(dim, dim);
  for (long col = 0; col < dim; ++col) {
    double sign = std::popcount(zi & static_cast<std::uint64_t>(col)) & 1 ? -1.0 : 1.0;
    m(static_cast<long>(col ^ static_cast<long>(xi)), col) = phase * sign;
  }
  return m;
}

Matrix to_matrix(const PauliSumF& a) {
  long dim = 1L << a.n();
  check_dim(dim);
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& [p, c] : a.terms()) m += c * pauli_matrix(p, a.n());
  return m;
}

Matrix to_matrix(const PauliSumQ& a) { return to_matrix(to_float(a)); }

double hermiticity_defect(const Matrix& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_defect(const Matrix& u) {
  Matrix g = u * u.adjoint();
  return (g - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Matrix expm_unitary(const Matrix& h, double t) {
  if (h.rows() != h.cols()) throw ValidationError("expm needs a square matrix");
  check_dim(h.rows());
  double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermiticity_defect(h) > 1e-12 * scale)
    throw ValidationError("expm input is not Hermitian");
  Matrix hs = (h + h.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hs);
  Eigen::VectorXcd ph(es.eigenvalues().size());
  for (long i = 0; i < ph.size(); ++i) ph(i) = std::exp(-kI * es.eigenvalues()(i) * t);
  Matrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  if (unitarity_defect(u) > 1e-12) throw InternalError("expm lost unitarity");
  return u;
}

Matrix run_plan(const CircuitPlan& plan) {
  int total = plan.total_sites();
  long dim = 1L << total;
  check_dim(dim);
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& step : plan.steps) {
    if (step.ham.n() != total) throw ValidationError("plan step site count mismatch");
    u = expm_unitary(to_matrix(step.ham), step.duration) * u;
  }
  return std::exp(kI * plan.phase) * u;
}

Vector run_plan_state(const CircuitPlan& plan, const Vector& input) {
  int total = plan.total_sites();
  long dim = 1L << total;
  check_dim(dim);
  if (input.size() != dim) throw ValidationError("state dimension mismatch");
  Vector v = input;
  for (const auto& step : plan.steps) {
    if (step.ham.n() != total) throw ValidationError("plan step site count mismatch");
    v = expm_unitary(to_matrix(step.ham), step.duration) * v;
  }
  return std::exp(kI * plan.phase) * v;
}

AncillaBlock ancilla_block(const Matrix& u, const std::vector<int>& dims, int n_ancilla) {
  if (n_ancilla < 0 || n_ancilla > static_cast<int>(dims.size()))
    throw ValidationError("bad ancilla count");
  long total = 1;
  for (int d : dims) total *= d;
  if (total != u.rows() || total != u.cols())
    throw ValidationError("dims do not match matrix");
  long anc = 1;
  for (std::size_t i = dims.size() - n_ancilla; i < dims.size(); ++i) anc *= dims[i];
  long sys = total / anc;

  AncillaBlock out;
  out.block.resize(sys, sys);
  for (long i = 0; i < sys; ++i)
    for (long j = 0; j < sys; ++j) out.block(i, j) = u(i * anc, j * anc);
  if (anc == 1) {
    out.leakage = 0;
    return out;
  }
  Matrix off(total - sys, sys);
  long r = 0;
  for (long i = 0; i < total; ++i) {
    if (i % anc == 0) continue;
    for (long j = 0; j < sys; ++j) off(r, j) = u(i, j * anc);
    ++r;
  }
  Eigen::JacobiSVD<Matrix> svd(off);
  out.leakage = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  return out;
}

AncillaBlock ancilla_block(const Matrix& u, int total_sites, int n_ancilla) {
  return ancilla_block(u, std::vector<int>(total_sites, 2), n_ancilla);
}

namespace {

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// Exact optimum for unitary w: eigenvalues lie on the unit circle, the best
// phase is the midpoint of the smallest arc containing them, and the norm is
// the chord to the arc edge.
double arc_distance(const Matrix& w) {
  Eigen::ComplexEigenSolver<Matrix> es(w);
  std::vector<double> ang;
  ang.reserve(es.eigenvalues().size());
  for (long i = 0; i < es.eigenvalues().size(); ++i) ang.push_back(std::arg(es.eigenvalues()(i)));
  std::sort(ang.begin(), ang.end());
  double two_pi = 2 * std::numbers::pi;
  double max_gap = ang.front() + two_pi - ang.back();
  for (std::size_t i = 1; i < ang.size(); ++i) max_gap = std::max(max_gap, ang[i] - ang[i - 1]);
  double arc = two_pi - max_gap;
  return 2 * std::sin(arc / 4);
}

}  // namespace

double distance(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols()) throw ValidationError("dimension mismatch");
  if (unitarity_defect(v) > 1e-8) throw ValidationError("reference matrix is not unitary");
  Matrix w = u * v.adjoint();
  if (unitarity_defect(u) <= 1e-8) return arc_distance(w);
  // Near-isometric block: align the phase on the trace, then refine by
  // golden-section search around it.
  long dim = w.rows();
  auto g = [&](double phi) {
    return spectral_norm(w - std::exp(kI * phi) * Matrix::Identity(dim, dim));
  };
  double best_phi = std::arg(w.trace());
  double lo = best_phi - 0.5, hi = best_phi + 0.5;
  double gr = (std::sqrt(5.0) - 1) / 2;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = g(a), fb = g(b);
  for (int it = 0; it < 60; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = g(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = g(b);
    }
  }
  return std::min(fa, fb);
}

void write_matrix(const std::string& path, const Matrix& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  f << "{\"rows\":" << m.rows() << ",\"cols\":" << m.cols()
    << ",\"format\":\"complex128-row-major\"}\n";
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      double re = m(i, j).real(), im = m(i, j).imag();
      f.write(reinterpret_cast<const char*>(&re), sizeof re);
      f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
}

Matrix read_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path);
  std::string header;
  std::getline(f, header);
  long rows = 0, cols = 0;
  if (std::sscanf(header.c_str(), "{\"rows\":%ld,\"cols\":%ld", &rows, &cols) != 2 ||
      rows <= 0 || cols <= 0)
    throw ValidationError("bad matrix header in " + path);
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) {
      double re = 0, im = 0;
      f.read(reinterpret_cast<char*>(&re), sizeof re);
      f.read(reinterpret_cast<char*>(&im), sizeof im);
      m(i, j) = {re, im};
    }
  if (!f) throw ValidationError("truncated matrix file " + path);
  return m;
}

std::string matrix_text(const Matrix& m) {
  std::string out;
  char buf[96];
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%s%.6g%+.6gi", j ? "  " : "", m(i, j).real(),
                    m(i, j).imag());
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace symlie
