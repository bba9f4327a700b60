#pragma once

#include <array>
#include <complex>
#include <vector>

namespace qraman {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 8;

// Dense complex matrix of runtime dimension 2..8, value type, no heap.
// Entries outside the active dim x dim block stay zero.
class CMat {
 public:
  CMat() = default;
  explicit CMat(int dim);

  static CMat zero(int dim) { return CMat(dim); }
  static CMat identity(int dim);

  int dim() const { return dim_; }

  cplx& operator()(int r, int c) { return a_[r * kMaxDim + c]; }
  const cplx& operator()(int r, int c) const { return a_[r * kMaxDim + c]; }

  CMat& operator+=(const CMat& o);
  CMat& operator-=(const CMat& o);
  CMat& operator*=(cplx s);

  CMat adjoint() const;
  cplx trace() const;
  double fro_norm() const;
  double max_abs() const;
  // max |A_ij - conj(A_ji)|
  double hermiticity_defect() const;
  // A <- (A + A^dagger)/2
  void hermitize();

 private:
  int dim_ = 0;
  std::array<cplx, kMaxDim * kMaxDim> a_{};
};

CMat operator+(CMat a, const CMat& b);
CMat operator-(CMat a, const CMat& b);
CMat operator*(cplx s, CMat a);
CMat operator*(const CMat& a, const CMat& b);

// ab - ba
CMat commutator(const CMat& a, const CMat& b);

// L[A] rho = 2 A rho A^dag - A^dag A rho - rho A^dag A.  trace(L[A]rho) = 0.
CMat lindblad_apply(const CMat& a, const CMat& rho);

// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi rotations.
std::vector<double> hermitian_eigenvalues(const CMat& a, double tol = 1e-12);

struct DensityMatrix {
  CMat matrix;
  double tolerance = 1e-9;
};

struct DensityReport {
  double trace_defect = 0.0;    // |tr(rho) - 1|
  double herm_defect = 0.0;     // max |rho_ij - conj(rho_ji)|
  double min_eigenvalue = 0.0;  // of (rho + rho^dag)/2
};

DensityReport validate_density(const DensityMatrix& rho);
bool density_ok(const DensityReport& r, double tol);

// |level><level| as a density matrix
DensityMatrix basis_state(int dim, int level);

}  // namespace qraman
