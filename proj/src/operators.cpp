#include "qgibbs/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace qgibbs {

Eigen::Index hilbert_dim(std::size_t sites, int local_dim) {
  Eigen::Index n = 1;
  for (std::size_t i = 0; i < sites; ++i) {
    n *= local_dim;
    if (n > kMaxDiagonalDim) throw OperatorError("Hilbert space dimension overflow");
  }
  return n;
}

namespace {

void check_dense_cap(Eigen::Index dim) {
  if (dim > kMaxDenseDim) {
    std::ostringstream os;
    os << "dense operator of dimension " << dim << " exceeds the cap " << kMaxDenseDim;
    throw OperatorError(os.str());
  }
}

// For part ⊆ full: offset into full's index of every basis state of part,
// listed in part's own index order. Remaining legs of full are zero.
std::vector<Eigen::Index> offsets(const Region& full, const Region& part, int d) {
  const std::size_t n = full.size();
  std::vector<Eigen::Index> offs{0};
  offs.reserve(static_cast<std::size_t>(hilbert_dim(part.size(), d)));
  for (const auto& s : part) {
    const int pos = full.index_of(s);
    if (pos < 0) throw OperatorError("site " + to_string(s) + " outside support");
    Eigen::Index stride = 1;
    for (std::size_t k = pos + 1; k < n; ++k) stride *= d;
    std::vector<Eigen::Index> next;
    next.reserve(offs.size() * d);
    for (auto o : offs)
      for (int digit = 0; digit < d; ++digit) next.push_back(o + digit * stride);
    offs.swap(next);
  }
  return offs;
}

void check_same_dim(const LocalOperator& a, const LocalOperator& b) {
  if (a.local_dim() != b.local_dim()) throw OperatorError("local dimension mismatch");
}

}  // namespace

LocalOperator::LocalOperator(Region support, Matrix m, int local_dim)
    : support_(std::move(support)), d_(local_dim), diagonal_(false), dense_(std::move(m)) {
  if (d_ < 1) throw OperatorError("local dimension must be positive");
  dim_ = hilbert_dim(support_.size(), d_);
  check_dense_cap(dim_);
  if (dense_.rows() != dim_ || dense_.cols() != dim_) {
    std::ostringstream os;
    os << "matrix is " << dense_.rows() << "x" << dense_.cols() << " but support " << to_string(support_)
       << " needs " << dim_;
    throw OperatorError(os.str());
  }
  diag_.resize(0);
}

LocalOperator::LocalOperator(Region support, Vector diag, int local_dim)
    : support_(std::move(support)), d_(local_dim), diagonal_(true), diag_(std::move(diag)) {
  if (d_ < 1) throw OperatorError("local dimension must be positive");
  dim_ = hilbert_dim(support_.size(), d_);
  if (diag_.size() != dim_) throw OperatorError("diagonal length does not match support");
}

LocalOperator LocalOperator::from_real_diagonal(Region support, const RealVector& diag, int local_dim) {
  return LocalOperator(std::move(support), Vector(diag.cast<cplx>()), local_dim);
}

LocalOperator LocalOperator::identity(Region support, int local_dim) {
  const auto n = hilbert_dim(support.size(), local_dim);
  return LocalOperator(std::move(support), Vector(Vector::Ones(n)), local_dim);
}

LocalOperator LocalOperator::zero(Region support, int local_dim) {
  const auto n = hilbert_dim(support.size(), local_dim);
  return LocalOperator(std::move(support), Vector(Vector::Zero(n)), local_dim);
}

LocalOperator LocalOperator::scalar(cplx c, int local_dim) {
  Vector v(1);
  v(0) = c;
  return LocalOperator(Region{}, v, local_dim);
}

Matrix LocalOperator::matrix() const {
  if (!diagonal_) return dense_;
  check_dense_cap(dim_);
  return diag_.asDiagonal();
}

const Matrix& LocalOperator::dense() const {
  if (diagonal_) throw OperatorError("dense() on a diagonal operator");
  return dense_;
}

const Vector& LocalOperator::diagonal() const {
  if (!diagonal_) throw OperatorError("diagonal() on a dense operator");
  return diag_;
}

LocalOperator LocalOperator::to_dense() const {
  if (!diagonal_) return *this;
  return LocalOperator(support_, matrix(), d_);
}

std::optional<LocalOperator> LocalOperator::try_diagonal(double tol) const {
  if (diagonal_) return *this;
  Matrix off = dense_;
  off.diagonal().setZero();
  if (dim_ > 0 && off.cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return LocalOperator(support_, Vector(dense_.diagonal()), d_);
}

cplx LocalOperator::trace() const { return diagonal_ ? diag_.sum() : dense_.trace(); }

LocalOperator LocalOperator::adjoint() const {
  if (diagonal_) return LocalOperator(support_, Vector(diag_.conjugate()), d_);
  return LocalOperator(support_, Matrix(dense_.adjoint()), d_);
}

double LocalOperator::hermitian_defect() const {
  if (diagonal_) return diag_.imag().cwiseAbs().maxCoeff();
  return (dense_ - dense_.adjoint()).cwiseAbs().maxCoeff();
}

bool LocalOperator::is_hermitian(double tol) const {
  const double scale = std::max(1.0, diagonal_ ? diag_.cwiseAbs().maxCoeff() : dense_.cwiseAbs().maxCoeff());
  return hermitian_defect() <= tol * scale;
}

LocalOperator& LocalOperator::operator*=(cplx c) {
  if (diagonal_) diag_ *= c;
  else dense_ *= c;
  return *this;
}

LocalOperator operator+(const LocalOperator& a, const LocalOperator& b) {
  check_same_dim(a, b);
  const Region u = a.support().unite(b.support());
  const LocalOperator ea = embed(a, u);
  const LocalOperator eb = embed(b, u);
  if (ea.is_diagonal() && eb.is_diagonal())
    return LocalOperator(u, Vector(ea.diagonal() + eb.diagonal()), a.local_dim());
  return LocalOperator(u, Matrix(ea.matrix() + eb.matrix()), a.local_dim());
}

LocalOperator operator-(const LocalOperator& a, const LocalOperator& b) { return a + (-b); }

LocalOperator embed(const LocalOperator& q, const Region& y) {
  if (q.support() == y) return q;
  if (!y.contains(q.support()))
    throw OperatorError("embed: support " + to_string(q.support()) + " not inside " + to_string(y));
  const int d = q.local_dim();
  const auto offx = offsets(y, q.support(), d);
  const auto offr = offsets(y, y.minus(q.support()), d);
  const Eigen::Index n = hilbert_dim(y.size(), d);
  if (q.is_diagonal()) {
    Vector out(n);
    const Vector& v = q.diagonal();
    for (std::size_t a = 0; a < offx.size(); ++a)
      for (auto r : offr) out(offx[a] + r) = v(static_cast<Eigen::Index>(a));
    return LocalOperator(y, out, d);
  }
  check_dense_cap(n);
  Matrix out = Matrix::Zero(n, n);
  const Matrix& m = q.dense();
  for (std::size_t b = 0; b < offx.size(); ++b)
    for (std::size_t a = 0; a < offx.size(); ++a) {
      const cplx v = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (v == cplx(0.0)) continue;
      for (auto r : offr) out(offx[a] + r, offx[b] + r) = v;
    }
  return LocalOperator(y, out, d);
}

LocalOperator mul(const LocalOperator& a, const LocalOperator& b) {
  check_same_dim(a, b);
  const Region u = a.support().unite(b.support());
  const LocalOperator ea = embed(a, u);
  const LocalOperator eb = embed(b, u);
  if (ea.is_diagonal() && eb.is_diagonal())
    return LocalOperator(u, Vector(ea.diagonal().cwiseProduct(eb.diagonal())), a.local_dim());
  if (ea.is_diagonal()) return LocalOperator(u, Matrix(ea.diagonal().asDiagonal() * eb.dense()), a.local_dim());
  if (eb.is_diagonal()) return LocalOperator(u, Matrix(ea.dense() * eb.diagonal().asDiagonal()), a.local_dim());
  return LocalOperator(u, Matrix(ea.dense() * eb.dense()), a.local_dim());
}

LocalOperator commutator(const LocalOperator& a, const LocalOperator& b) {
  if (a.is_diagonal() && b.is_diagonal())
    return LocalOperator::zero(a.support().unite(b.support()), a.local_dim());
  return mul(a, b) - mul(b, a);
}

LocalOperator kron(const LocalOperator& a, const LocalOperator& b) {
  if (a.support().intersects(b.support())) throw OperatorError("kron: supports overlap");
  return mul(a, b);
}

LocalOperator partial_trace(const LocalOperator& q, const Region& x) {
  if (x.empty()) return q;
  if (!q.support().contains(x))
    throw OperatorError("partial_trace: " + to_string(x) + " not inside support " + to_string(q.support()));
  const int d = q.local_dim();
  const Region keep = q.support().minus(x);
  const auto offk = offsets(q.support(), keep, d);
  const auto offt = offsets(q.support(), x, d);
  const auto nk = static_cast<Eigen::Index>(offk.size());
  if (q.is_diagonal()) {
    Vector out = Vector::Zero(nk);
    const Vector& v = q.diagonal();
    for (Eigen::Index k = 0; k < nk; ++k) {
      cplx s = 0.0;
      for (auto t : offt) s += v(offk[k] + t);
      out(k) = s;
    }
    return LocalOperator(keep, out, d);
  }
  const Matrix& m = q.dense();
  Matrix out = Matrix::Zero(nk, nk);
  for (Eigen::Index j = 0; j < nk; ++j)
    for (Eigen::Index i = 0; i < nk; ++i) {
      cplx s = 0.0;
      for (auto t : offt) s += m(offk[i] + t, offk[j] + t);
      out(i, j) = s;
    }
  return LocalOperator(keep, out, d);
}

LocalOperator cond_expectation(const LocalOperator& q, const Region& keep) {
  const Region traced = q.support().minus(keep);
  if (traced.empty()) return q;
  const double norm = static_cast<double>(hilbert_dim(traced.size(), q.local_dim()));
  return (1.0 / norm) * partial_trace(q, traced);
}

EigenSystem eigensystem(const LocalOperator& q) {
  if (!q.is_hermitian()) {
    std::ostringstream os;
    os << "operator is not Hermitian (defect " << q.hermitian_defect() << ")";
    throw OperatorError(os.str());
  }
  EigenSystem es;
  if (q.is_diagonal()) {
    const RealVector re = q.diagonal().real();
    es.diagonal = true;
    es.order.resize(static_cast<std::size_t>(re.size()));
    std::iota(es.order.begin(), es.order.end(), Eigen::Index{0});
    std::stable_sort(es.order.begin(), es.order.end(), [&](auto a, auto b) { return re(a) < re(b); });
    es.values.resize(re.size());
    for (std::size_t i = 0; i < es.order.size(); ++i) es.values(static_cast<Eigen::Index>(i)) = re(es.order[i]);
    return es;
  }
  const Matrix h = 0.5 * (q.dense() + q.dense().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) throw OperatorError("eigendecomposition failed");
  es.values = solver.eigenvalues();
  es.vectors = solver.eigenvectors();
  return es;
}

LocalOperator from_spectrum(const LocalOperator& support_like, const EigenSystem& es, const Vector& f_values) {
  const auto n = es.values.size();
  if (f_values.size() != n) throw OperatorError("spectrum length mismatch");
  if (es.diagonal) {
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(es.order[static_cast<std::size_t>(i)]) = f_values(i);
    return LocalOperator(support_like.support(), out, support_like.local_dim());
  }
  Matrix out = es.vectors * f_values.asDiagonal() * es.vectors.adjoint();
  return LocalOperator(support_like.support(), out, support_like.local_dim());
}

LocalOperator apply_fn(const LocalOperator& support_like, const EigenSystem& es,
                       const std::function<cplx(double)>& f) {
  Vector fv(es.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv(i) = f(es.values(i));
  return from_spectrum(support_like, es, fv);
}

LocalOperator herm_fn_complex(const LocalOperator& q, const std::function<cplx(double)>& f) {
  if (q.is_diagonal()) {
    if (!q.is_hermitian()) throw OperatorError("operator is not Hermitian");
    Vector out(q.dim());
    for (Eigen::Index i = 0; i < q.dim(); ++i) out(i) = f(q.diagonal()(i).real());
    return LocalOperator(q.support(), out, q.local_dim());
  }
  return apply_fn(q, eigensystem(q), f);
}

LocalOperator herm_fn(const LocalOperator& q, const std::function<double(double)>& f) {
  return herm_fn_complex(q, [&](double x) { return cplx(f(x)); });
}

LocalOperator herm_exp(const LocalOperator& q, cplx scale) {
  return herm_fn_complex(q, [scale](double x) { return std::exp(scale * x); });
}

namespace {

double min_eigenvalue(const LocalOperator& q) {
  if (q.is_diagonal()) return q.diagonal().real().minCoeff();
  return eigensystem(q).values(0);
}

void require_pd(const LocalOperator& q, double pd_floor, const char* what) {
  const double m = min_eigenvalue(q);
  if (!(m > pd_floor)) {
    std::ostringstream os;
    os << what << ": marginal not positive definite (min eigenvalue " << m << ")";
    throw NotPositiveDefinite(os.str(), m);
  }
}

}  // namespace

LocalOperator herm_log(const LocalOperator& q, double pd_floor) {
  if (!q.is_hermitian()) throw OperatorError("log of a non-Hermitian operator");
  require_pd(q, pd_floor, "log");
  return herm_fn(q, [](double x) { return std::log(x); });
}

LocalOperator herm_inverse(const LocalOperator& q, double pd_floor) {
  if (!q.is_hermitian()) throw OperatorError("inverse of a non-Hermitian operator");
  require_pd(q, pd_floor, "inverse");
  return herm_fn(q, [](double x) { return 1.0 / x; });
}

LocalOperator herm_sqrt(const LocalOperator& q) {
  return herm_fn(q, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

namespace {

bool nearly_hermitian(const Matrix& m) {
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale;
}

RealVector singular_values(const Matrix& m) {
  if (nearly_hermitian(m)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

}  // namespace

double op_norm(const LocalOperator& q) {
  if (q.is_diagonal()) return q.dim() ? q.diagonal().cwiseAbs().maxCoeff() : 0.0;
  const RealVector s = singular_values(q.dense());
  return s.size() ? s.maxCoeff() : 0.0;
}

double trace_norm(const LocalOperator& q) {
  if (q.is_diagonal()) return q.diagonal().cwiseAbs().sum();
  return singular_values(q.dense()).sum();
}

double max_abs_diff(const LocalOperator& q, const LocalOperator& r) {
  const LocalOperator diff = q - r;
  if (diff.is_diagonal()) return diff.dim() ? diff.diagonal().cwiseAbs().maxCoeff() : 0.0;
  return diff.dense().cwiseAbs().maxCoeff();
}

double op_norm_diff(const LocalOperator& q, const LocalOperator& r) { return op_norm(q - r); }

LocalOperator restrict_to(const LocalOperator& q, const Region& region) {
  return cond_expectation(q, region.intersect(q.support()));
}

double support_residual(const LocalOperator& q, const Region& region) {
  const LocalOperator proj = embed(restrict_to(q, region), q.support());
  return op_norm(q - proj);
}

Matrix pauli_matrix(char which) {
  Matrix m = Matrix::Zero(2, 2);
  switch (which) {
    case 'I': m(0, 0) = m(1, 1) = 1.0; break;
    case 'X': m(0, 1) = m(1, 0) = 1.0; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw OperatorError(std::string("unknown Pauli '") + which + "'");
  }
  return m;
}

LocalOperator pauli_x(const Site& s) { return LocalOperator(Region{s}, pauli_matrix('X')); }
LocalOperator pauli_y(const Site& s) { return LocalOperator(Region{s}, pauli_matrix('Y')); }

LocalOperator pauli_z(const Site& s) {
  Vector v(2);
  v << 1.0, -1.0;
  return LocalOperator(Region{s}, v);
}

DensityMatrix::DensityMatrix(LocalOperator rho, double tol) : rho_(std::move(rho)) {
  if (!rho_.is_hermitian(tol)) throw OperatorError("density matrix is not Hermitian");
  const cplx tr = rho_.trace();
  if (std::abs(tr - 1.0) > tol) {
    std::ostringstream os;
    os << "density matrix trace " << tr.real() << " differs from 1";
    throw OperatorError(os.str());
  }
  es_ = eigensystem(rho_);
  if (es_.values.size() && es_.values(0) < -1e-12) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << es_.values(0);
    throw NotPositiveDefinite(os.str(), es_.values(0));
  }
}

double DensityMatrix::entropy(double floor) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < es_.values.size(); ++i) {
    const double p = es_.values(i);
    if (p > floor) s -= p * std::log(p);
  }
  return s;
}

LocalOperator DensityMatrix::inverse(double pd_floor) const {
  if (!(min_eigenvalue() > pd_floor)) {
    std::ostringstream os;
    os << "marginal not positive definite on " << to_string(support()) << " (min eigenvalue "
       << min_eigenvalue() << ")";
    throw NotPositiveDefinite(os.str(), min_eigenvalue());
  }
  return apply_fn(rho_, es_, [](double x) { return cplx(1.0 / x); });
}

LocalOperator DensityMatrix::log(double pd_floor) const {
  if (!(min_eigenvalue() > pd_floor)) {
    std::ostringstream os;
    os << "marginal not positive definite on " << to_string(support()) << " (min eigenvalue "
       << min_eigenvalue() << ")";
    throw NotPositiveDefinite(os.str(), min_eigenvalue());
  }
  return apply_fn(rho_, es_, [](double x) { return cplx(std::log(x)); });
}

cplx DensityMatrix::expectation(const LocalOperator& o) const {
  const Region u = rho_.support().unite(o.support());
  if (u != rho_.support()) throw OperatorError("observable not supported inside the state's region");
  return mul(rho_, o).trace();
}

}  // namespace qgibbs
