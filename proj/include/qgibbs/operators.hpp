#pragma once

// Operators on tensor products of C^D indexed by a Region. Site 0 of the
// support is the most significant tensor leg.
//
// An operator is stored either densely or, when it is diagonal in the
// computational basis, as its diagonal only. Products and sums of diagonal
// operators stay diagonal; anything touching a dense operator goes dense.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qgibbs/geometry.hpp"

namespace qgibbs {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Eigen::Index kMaxDenseDim = 16384;
inline constexpr Eigen::Index kMaxDiagonalDim = Eigen::Index{1} << 22;
inline constexpr double kPdFloor = 1e-12;
inline constexpr double kHermitianTol = 1e-10;

class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a log or inverse is requested of an operator whose smallest
/// eigenvalue is below the positive-definiteness floor.
class NotPositiveDefinite : public OperatorError {
 public:
  NotPositiveDefinite(const std::string& what, double min_eig)
      : OperatorError(what), min_eigenvalue(min_eig) {}
  double min_eigenvalue;
};

Eigen::Index hilbert_dim(std::size_t sites, int local_dim);

class LocalOperator {
 public:
  LocalOperator() = default;
  LocalOperator(Region support, Matrix m, int local_dim = 2);
  /// Diagonal operator from its diagonal.
  LocalOperator(Region support, Vector diag, int local_dim = 2);
  static LocalOperator from_real_diagonal(Region support, const RealVector& diag, int local_dim = 2);

  static LocalOperator identity(Region support, int local_dim = 2);
  static LocalOperator zero(Region support, int local_dim = 2);
  static LocalOperator scalar(cplx c, int local_dim = 2);

  [[nodiscard]] const Region& support() const { return support_; }
  [[nodiscard]] int local_dim() const { return d_; }
  [[nodiscard]] Eigen::Index dim() const { return dim_; }
  [[nodiscard]] bool is_diagonal() const { return diagonal_; }

  /// Dense matrix (materialized from the diagonal when needed).
  [[nodiscard]] Matrix matrix() const;
  [[nodiscard]] const Matrix& dense() const;
  [[nodiscard]] const Vector& diagonal() const;
  /// Dense copy of the same operator.
  [[nodiscard]] LocalOperator to_dense() const;
  /// Diagonal copy, if the off-diagonal part is below tol.
  [[nodiscard]] std::optional<LocalOperator> try_diagonal(double tol = 1e-14) const;

  [[nodiscard]] cplx trace() const;
  [[nodiscard]] LocalOperator adjoint() const;
  [[nodiscard]] bool is_hermitian(double tol = kHermitianTol) const;
  /// Entrywise max |Q - Q^*|.
  [[nodiscard]] double hermitian_defect() const;

  LocalOperator& operator*=(cplx c);
  friend LocalOperator operator*(cplx c, LocalOperator q) { return q *= c; }
  friend LocalOperator operator*(LocalOperator q, cplx c) { return q *= c; }
  friend LocalOperator operator*(double c, LocalOperator q) { return q *= cplx(c); }
  LocalOperator operator-() const { return cplx(-1.0) * *this; }

 private:
  Region support_;
  int d_ = 2;
  Eigen::Index dim_ = 1;
  bool diagonal_ = true;
  Matrix dense_;
  Vector diag_ = Vector::Ones(1);
};

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b);
LocalOperator operator-(const LocalOperator& a, const LocalOperator& b);

/// Q tensored with the identity on Y \ supp(Q).
LocalOperator embed(const LocalOperator& q, const Region& y);
/// Product after embedding both factors into the union of supports.
LocalOperator mul(const LocalOperator& a, const LocalOperator& b);
LocalOperator commutator(const LocalOperator& a, const LocalOperator& b);
/// Tensor product of operators with disjoint supports.
LocalOperator kron(const LocalOperator& a, const LocalOperator& b);
/// Unnormalized trace over the sites in x.
LocalOperator partial_trace(const LocalOperator& q, const Region& x);
/// Normalized partial trace keeping `keep` (sites of keep outside supp(Q) are ignored).
LocalOperator cond_expectation(const LocalOperator& q, const Region& keep);

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns; identity for diagonal operators
  bool diagonal = false;
  /// Permutation taking ascending order to basis order when diagonal.
  std::vector<Eigen::Index> order;
};

EigenSystem eigensystem(const LocalOperator& q);
/// U f(Lambda) U^* for Hermitian q.
LocalOperator herm_fn(const LocalOperator& q, const std::function<double(double)>& f);
LocalOperator herm_fn_complex(const LocalOperator& q, const std::function<cplx(double)>& f);
/// U diag(f_values) U^* with f_values listed in ascending eigenvalue order.
LocalOperator from_spectrum(const LocalOperator& support_like, const EigenSystem& es, const Vector& f_values);
LocalOperator apply_fn(const LocalOperator& support_like, const EigenSystem& es,
                       const std::function<cplx(double)>& f);
LocalOperator herm_exp(const LocalOperator& q, cplx scale = 1.0);
LocalOperator herm_log(const LocalOperator& q, double pd_floor = kPdFloor);
LocalOperator herm_inverse(const LocalOperator& q, double pd_floor = kPdFloor);
LocalOperator herm_sqrt(const LocalOperator& q);

double op_norm(const LocalOperator& q);
double trace_norm(const LocalOperator& q);
/// Largest |entry| of q - r after embedding both into the union of supports.
double max_abs_diff(const LocalOperator& q, const LocalOperator& r);
/// Operator norm of q - r after embedding into the union of supports.
double op_norm_diff(const LocalOperator& q, const LocalOperator& r);

/// Norm of the part of q that is not of the form Q' (x) 1 with Q' on `region`.
/// Zero when q is supported in `region`.
double support_residual(const LocalOperator& q, const Region& region);
/// Restrict an operator known to be of the form Q' (x) 1 to Q' on `region`.
LocalOperator restrict_to(const LocalOperator& q, const Region& region);

LocalOperator pauli_x(const Site& s);
LocalOperator pauli_y(const Site& s);
LocalOperator pauli_z(const Site& s);
Matrix pauli_matrix(char which);

/// A Hermitian, unit-trace, positive semidefinite operator with its spectrum.
class DensityMatrix {
 public:
  explicit DensityMatrix(LocalOperator rho, double tol = kHermitianTol);

  [[nodiscard]] const LocalOperator& op() const { return rho_; }
  [[nodiscard]] const Region& support() const { return rho_.support(); }
  [[nodiscard]] const EigenSystem& eigen() const { return es_; }
  [[nodiscard]] double min_eigenvalue() const { return es_.values.size() ? es_.values(0) : 1.0; }
  [[nodiscard]] double entropy(double floor = 1e-14) const;
  [[nodiscard]] LocalOperator inverse(double pd_floor = kPdFloor) const;
  [[nodiscard]] LocalOperator log(double pd_floor = kPdFloor) const;
  [[nodiscard]] cplx expectation(const LocalOperator& o) const;

 private:
  LocalOperator rho_;
  EigenSystem es_;
};

}  // namespace qgibbs
