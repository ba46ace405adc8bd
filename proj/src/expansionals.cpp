#include "qgibbs/expansionals.hpp"

#include <cmath>
#include <sstream>

#include "qgibbs/geometry.hpp"

namespace qgibbs {

namespace {

struct Spectral {
  RealVector e;
  Matrix u;  // columns are eigenvectors
};

Spectral spectral(const LocalOperator& h) {
  if (!h.is_hermitian()) throw OperatorError("Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h.matrix() + h.matrix().adjoint()));
  if (solver.info() != Eigen::Success) throw OperatorError("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

void require_regime(double phi_norm, double lambda, double s_abs) {
  if (!(lambda > 0)) throw RegimeError("outside analyticity regime: lambda must be positive");
  if (2 * phi_norm * s_abs >= lambda) {
    std::ostringstream os;
    os << "outside analyticity regime: |s| = " << s_abs << " >= lambda/(2||Phi||) = " << lambda / (2 * phi_norm);
    throw RegimeError(os.str());
  }
}

void require_disjoint(const Region& x, const Region& y) {
  if (x.intersects(y)) throw OperatorError("regions " + to_string(x) + " and " + to_string(y) + " overlap");
}

LocalOperator split_hamiltonian(const Interaction& phi, const Region& x, const Region& y) {
  return embed(hamiltonian(phi, x) + hamiltonian(phi, y), x.unite(y));
}

std::string describe(std::initializer_list<std::pair<const char*, const Region*>> regions) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [name, r] : regions) {
    if (!first) os << ' ';
    os << name << '=' << to_string(*r);
    first = false;
  }
  return os.str();
}

}  // namespace

LocalOperator time_evolution(const LocalOperator& h, const LocalOperator& q, cplx s) {
  const LocalOperator qe = embed(q, h.support());
  const cplx is = cplx(0, 1) * s;
  if (h.is_diagonal()) {
    if (!h.is_hermitian()) throw OperatorError("Hamiltonian is not Hermitian");
    const Vector& e = h.diagonal();
    if (qe.is_diagonal()) return qe;
    Matrix out = qe.dense();
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) *= std::exp(is * (e(i).real() - e(j).real()));
    return LocalOperator(h.support(), out, h.local_dim());
  }
  const Spectral sp = spectral(h);
  Matrix qt = sp.u.adjoint() * qe.matrix() * sp.u;
  for (Eigen::Index j = 0; j < qt.cols(); ++j)
    for (Eigen::Index i = 0; i < qt.rows(); ++i) qt(i, j) *= std::exp(is * (sp.e(i) - sp.e(j)));
  return LocalOperator(h.support(), Matrix(sp.u * qt * sp.u.adjoint()), h.local_dim());
}

double analyticity_radius(const Interaction& phi, double lambda, double mu) {
  const double n = norm_lambda_mu(phi, lambda, mu);
  return n > 0 ? lambda / (2 * n) : kInfiniteDistance;
}

std::pair<BoundReport, BoundReport> locality_bound_check(const Interaction& phi, const LocalOperator& q,
                                                         const Region& y, const Region& y_prime, cplx s,
                                                         double lambda, double mu) {
  const Region& z = q.support();
  if (!y.contains(z) || !y_prime.contains(y) || !phi.ambient().contains(y_prime))
    throw OperatorError("locality_bound_check: need supp(Q) in Y in Y' in the ambient region");
  const double n = norm_lambda_mu(phi, lambda, mu);
  const double sa = std::abs(s);
  require_regime(n, lambda, sa);

  const LocalOperator gy = time_evolution(hamiltonian(phi, y), q, s);
  const LocalOperator gyp = time_evolution(hamiltonian(phi, y_prime), q, s);
  const double base = op_norm(q) * std::exp(lambda * static_cast<double>(z.size()));
  const double den = lambda - 2 * n * sa;
  const Region outside = phi.ambient().minus(y);
  const double dz = outside.empty() ? kInfiniteDistance : dist(z, outside, phi.metric());

  BoundReport first = make_bound("locality_evolution", op_norm(gy), base * lambda / den);
  BoundReport second = make_bound("locality_difference", op_norm(gyp - gy),
                                  base * 2 * n * sa * lambda / (den * den) * std::exp(-mu * dz));
  for (BoundReport* r : {&first, &second}) {
    r->params = {{"lambda", lambda}, {"mu", mu}, {"phi_norm", n}, {"s_re", s.real()}, {"s_im", s.imag()},
                 {"dist", dz}};
    r->regions = describe({{"Z", &z}, {"Y", &y}, {"Y'", &y_prime}});
  }
  return {first, second};
}

Expansional expansional(const Interaction& phi, const Region& x, const Region& y, cplx s) {
  require_disjoint(x, y);
  const Region xy = x.unite(y);
  Expansional e;
  e.x = x;
  e.y = y;
  e.s = s;
  e.op = mul(herm_exp(hamiltonian(phi, xy), -s), herm_exp(split_hamiltonian(phi, x, y), s));
  return e;
}

LocalOperator expansional_adjoint_inverse(const Interaction& phi, const Region& x, const Region& y, double s) {
  require_disjoint(x, y);
  return mul(herm_exp(hamiltonian(phi, x.unite(y)), s), herm_exp(split_hamiltonian(phi, x, y), -s));
}

LocalOperator duhamel_oracle(const Interaction& phi, const Region& x, const Region& y, double beta, int steps) {
  require_disjoint(x, y);
  if (steps < 1) throw OperatorError("duhamel_oracle: steps must be positive");
  const Region xy = x.unite(y);
  const LocalOperator h0 = split_hamiltonian(phi, x, y);
  const LocalOperator w = embed(hamiltonian(phi, xy), xy) - h0;
  const Spectral sp = spectral(h0);
  const Matrix wt = sp.u.adjoint() * w.matrix() * sp.u;
  const Eigen::Index n = wt.rows();

  // In the eigenbasis of H, e^{-tH} W e^{tH} has entries W_ij e^{-t(E_i - E_j)}.
  auto g = [&](double t) {
    Matrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) out(i, j) = wt(i, j) * std::exp(-t * (sp.e(i) - sp.e(j)));
    return out;
  };
  Matrix f = Matrix::Identity(n, n);
  const double dt = beta / steps;
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Matrix gm = g(t + dt / 2);
    const Matrix k1 = -f * g(t);
    const Matrix k2 = -(f + 0.5 * dt * k1) * gm;
    const Matrix k3 = -(f + 0.5 * dt * k2) * gm;
    const Matrix k4 = -(f + dt * k3) * g(t + dt);
    f += (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return LocalOperator(xy, Matrix(sp.u * f * sp.u.adjoint()), phi.local_dim());
}

BoundReport expansional_bound_check(const Interaction& phi, const Region& a, const Region& b, double beta,
                                    double lambda, double mu) {
  require_disjoint(a, b);
  if (!(mu > 0)) throw OperatorError("expansional_bound_check: mu must be positive");
  const double n = norm_lambda_mu(phi, lambda, mu);
  const double ba = std::abs(beta);
  require_regime(n, lambda, ba);
  const double sab = boundary_exponential_sum(a, b, mu, phi.metric());
  const double sba = boundary_exponential_sum(b, a, mu, phi.metric());
  const double rate = n * ba * lambda / (lambda - 2 * n * ba);
  BoundReport r = make_bound("expansional_norm", op_norm(expansional(phi, a, b, beta).op),
                             std::exp(rate * std::min(sab, sba)));
  r.params = {{"lambda", lambda}, {"mu", mu}, {"beta", beta}, {"phi_norm", n}, {"sum_AB", sab}, {"sum_BA", sba}};
  r.regions = describe({{"A", &a}, {"B", &b}});
  return r;
}

BoundReport expansional_diff_bound_check(const Interaction& phi, const Region& a, const Region& b,
                                         const Region& c, double beta, double lambda, double mu) {
  require_disjoint(a, b);
  require_disjoint(a, c);
  require_disjoint(b, c);
  if (!(mu > 0)) throw OperatorError("expansional_diff_bound_check: mu must be positive");
  const double n = norm_lambda_mu(phi, lambda, mu);
  const double ba = std::abs(beta);
  require_regime(n, lambda, ba);
  const Region bc = b.unite(c);
  const double lhs = op_norm(expansional(phi, a, bc, beta).op - expansional(phi, a, b, beta).op);
  const double den = lambda - 2 * n * ba;
  const double s_bc = boundary_exponential_sum(a, bc, mu, phi.metric());
  const double s_c = boundary_exponential_sum(a, c, mu, phi.metric());
  const double rhs = std::exp(n * ba * lambda / den * s_bc) * ba * n * n * (lambda + ba) * (lambda + ba) /
                     (den * den) * s_c;
  BoundReport r = make_bound("expansional_difference", lhs, rhs);
  r.params = {{"lambda", lambda}, {"mu", mu},       {"beta", beta},
              {"phi_norm", n},    {"sum_A_BC", s_bc}, {"sum_A_C", s_c},
              {"dist_AC", dist(a, c, phi.metric())}};
  r.regions = describe({{"A", &a}, {"B", &b}, {"C", &c}});
  return r;
}

double simplified_constant(double phi_norm, double lambda, double mu, double beta, int lattice_dim) {
  return phi_norm * lambda * onion_nu(lattice_dim, mu) / (lambda - 2 * phi_norm * std::abs(beta));
}

BoundReport trace_inverse_expansional_check(const Interaction& phi, const Region& a, const Region& b, double beta,
                                            double lambda, double mu) {
  require_disjoint(a, b);
  if (beta < 0) throw OperatorError("trace_inverse_expansional_check: beta must be nonnegative");
  if (!(mu > 0)) throw OperatorError("trace_inverse_expansional_check: mu must be positive");
  const double n = norm_lambda_mu(phi, lambda, mu);
  require_regime(n, lambda, beta);
  const Region ab = a.unite(b);
  LocalOperator rho = herm_exp(hamiltonian(phi, ab), -beta);
  rho = embed(cplx(1.0) / rho.trace() * rho, ab);
  const cplx tr = mul(rho, expansional_adjoint_inverse(phi, a, b, beta)).trace();

  const int g = a.dim() ? a.dim() : b.dim();
  const double k = simplified_constant(n, lambda, mu, beta, g);
  const auto da = lattice_inner_boundary(a, 1.0, phi.metric()).size();
  const auto db = lattice_inner_boundary(b, 1.0, phi.metric()).size();
  const double m = static_cast<double>(std::min(da, db));
  BoundReport r = make_bound("trace_inverse_expansional", 1.0 / std::abs(tr), std::exp(beta * k * m));
  r.params = {{"lambda", lambda},
              {"mu", mu},
              {"beta", beta},
              {"phi_norm", n},
              {"K", k},
              {"nu", onion_nu(g, mu)},
              {"boundary_A", static_cast<double>(da)},
              {"boundary_B", static_cast<double>(db)}};
  r.regions = describe({{"A", &a}, {"B", &b}});
  return r;
}

}  // namespace qgibbs
