#include "qraman/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qraman {

namespace {

void check_dim(int dim) {
  if (dim < 2 || dim > kMaxDim)
    throw std::invalid_argument("CMat: dim must be in [2, 8]");
}

void check_same(const CMat& a, const CMat& b, const char* what) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

CMat::CMat(int dim) : dim_(dim) { check_dim(dim); }

CMat CMat::identity(int dim) {
  CMat m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

CMat& CMat::operator+=(const CMat& o) {
  check_same(*this, o, "CMat::operator+=");
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}

CMat& CMat::operator-=(const CMat& o) {
  check_same(*this, o, "CMat::operator-=");
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) -= o(i, j);
  return *this;
}

CMat& CMat::operator*=(cplx s) {
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) (*this)(i, j) *= s;
  return *this;
}

CMat CMat::adjoint() const {
  CMat m(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m(i, j) = std::conj((*this)(j, i));
  return m;
}

cplx CMat::trace() const {
  cplx t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double CMat::fro_norm() const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) s += std::norm((*this)(i, j));
  return std::sqrt(s);
}

double CMat::max_abs() const {
  double m = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j)));
  return m;
}

double CMat::hermiticity_defect() const {
  double m = 0.0;
  for (int i = 0; i < dim_; ++i)
    for (int j = i; j < dim_; ++j)
      m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
  return m;
}

void CMat::hermitize() {
  for (int i = 0; i < dim_; ++i) {
    (*this)(i, i) = cplx((*this)(i, i).real(), 0.0);
    for (int j = i + 1; j < dim_; ++j) {
      cplx v = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
      (*this)(i, j) = v;
      (*this)(j, i) = std::conj(v);
    }
  }
}

CMat operator+(CMat a, const CMat& b) { return a += b; }
CMat operator-(CMat a, const CMat& b) { return a -= b; }
CMat operator*(cplx s, CMat a) { return a *= s; }

CMat operator*(const CMat& a, const CMat& b) {
  check_same(a, b, "CMat::operator*");
  const int n = a.dim();
  CMat m(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const cplx aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) m(i, j) += aik * b(k, j);
    }
  return m;
}

CMat commutator(const CMat& a, const CMat& b) {
  check_same(a, b, "commutator");
  return a * b - b * a;
}

CMat lindblad_apply(const CMat& a, const CMat& rho) {
  check_same(a, rho, "lindblad_apply");
  const CMat adag = a.adjoint();
  const CMat ada = adag * a;
  CMat out = 2.0 * ((a * rho) * adag);
  out -= ada * rho;
  out -= rho * ada;
  return out;
}

std::vector<double> hermitian_eigenvalues(const CMat& a, double tol) {
  const int n = a.dim();
  CMat m = a;
  m.hermitize();

  auto offdiag = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += std::norm(m(p, q));
    return std::sqrt(2.0 * s);
  };

  const double scale = std::max(1.0, m.fro_norm());
  for (int sweep = 0; sweep < 60 && offdiag() > tol * scale; ++sweep) {
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = m(p, q);
        const double g = std::abs(apq);
        if (g <= 1e-16 * scale) continue;
        // phase reduction: apq = g * u, then a real 2x2 rotation
        const cplx u = apq / g;
        const double app = m(p, p).real();
        const double aqq = m(q, q).real();
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // columns: col_p <- c*col_p - conj(s*u)*..., derived from U with
        // U(p,p)=c, U(q,q)=c, U(p,q)=s*u, U(q,p)=-s*conj(u); A <- U^dag A U
        for (int i = 0; i < n; ++i) {
          const cplx aip = m(i, p);
          const cplx aiq = m(i, q);
          m(i, p) = c * aip - s * std::conj(u) * aiq;
          m(i, q) = s * u * aip + c * aiq;
        }
        for (int j = 0; j < n; ++j) {
          const cplx apj = m(p, j);
          const cplx aqj = m(q, j);
          m(p, j) = c * apj - s * u * aqj;
          m(q, j) = s * std::conj(u) * apj + c * aqj;
        }
        m(p, q) = 0.0;
        m(q, p) = 0.0;
      }
    }
  }

  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = m(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

DensityReport validate_density(const DensityMatrix& rho) {
  DensityReport r;
  r.trace_defect = std::abs(rho.matrix.trace() - cplx(1.0));
  r.herm_defect = rho.matrix.hermiticity_defect();
  r.min_eigenvalue = hermitian_eigenvalues(rho.matrix).front();
  return r;
}

bool density_ok(const DensityReport& r, double tol) {
  return r.trace_defect <= tol && r.herm_defect <= tol &&
         r.min_eigenvalue >= -tol;
}

DensityMatrix basis_state(int dim, int level) {
  if (level < 0 || level >= dim)
    throw std::invalid_argument("basis_state: level out of range");
  DensityMatrix d{CMat(dim), 1e-9};
  d.matrix(level, level) = 1.0;
  return d;
}

}  // namespace qraman
