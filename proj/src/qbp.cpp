#include "qgibbs/qbp.hpp"

#include <cmath>
#include <sstream>

namespace qgibbs {

namespace {

void require_beta(double beta) {
  if (!(beta > 0)) throw QbpError("beta must be positive");
}

// Generator as a dense matrix on supp(h), from a fresh eigendecomposition.
Matrix generator_matrix(const LocalOperator& h, const Matrix& w, double beta) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h.matrix() + h.matrix().adjoint()));
  if (solver.info() != Eigen::Success) throw QbpError("eigendecomposition failed");
  const RealVector& e = solver.eigenvalues();
  const Matrix& u = solver.eigenvectors();
  Matrix wt = u.adjoint() * w * u;
  for (Eigen::Index j = 0; j < wt.cols(); ++j)
    for (Eigen::Index i = 0; i < wt.rows(); ++i) wt(i, j) *= filter_hat(e(i) - e(j), beta);
  return u * wt * u.adjoint();
}

void rk4_step(Matrix& y, const Matrix& g0, const Matrix& gm, const Matrix& g1, double dt, double c) {
  const Matrix k1 = c * g0 * y;
  const Matrix k2 = c * gm * (y + 0.5 * dt * k1);
  const Matrix k3 = c * gm * (y + 0.5 * dt * k2);
  const Matrix k4 = c * g1 * (y + dt * k3);
  y += (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

// RK4 for eta' = -(beta/2) g(sigma) eta on [0, s], with g supplied per sigma.
template <class G>
Matrix integrate(Eigen::Index n, double beta, double s, int steps, G&& g) {
  Matrix y = Matrix::Identity(n, n);
  const double dt = s / steps;
  Matrix g0 = g(0.0);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    Matrix g1 = g(t + dt);
    rk4_step(y, g0, g(t + dt / 2), g1, dt, -beta / 2);
    g0 = std::move(g1);
  }
  return y;
}

Matrix project(const Region& sup, const Matrix& gen, const Region& ball, int d) {
  return embed(cond_expectation(LocalOperator(sup, gen, d), ball), ball).matrix();
}

double factorization_residual(const LocalOperator& h, const LocalOperator& w, double beta, double s,
                              const LocalOperator& eta) {
  const LocalOperator target = herm_exp(h + s * w, -beta);
  const LocalOperator approx = mul(mul(eta, herm_exp(h, -beta)), eta.adjoint());
  return op_norm_diff(target, approx) / op_norm(target);
}

void check_steps(int steps) {
  if (steps < kQbpMinSteps) {
    std::ostringstream os;
    os << "at least " << kQbpMinSteps << " integration steps are required";
    throw QbpError(os.str());
  }
}

}  // namespace

double filter_hat(double omega, double beta) {
  const double x = beta * omega / 2;
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 3;
  return std::tanh(x) / x;
}

LocalOperator generator(const LocalOperator& h_s, const LocalOperator& w, double beta) {
  if (!h_s.is_hermitian()) throw QbpError("generator: H is not Hermitian");
  const LocalOperator we = embed(w, h_s.support());
  if (h_s.is_diagonal() && we.is_diagonal()) return we;
  return LocalOperator(h_s.support(), generator_matrix(h_s, we.matrix(), beta), h_s.local_dim());
}

QbpIntertwiner eta(const LocalOperator& h, const LocalOperator& w, double beta, double s, int steps, double tol) {
  require_beta(beta);
  check_steps(steps);
  if (!h.is_hermitian() || !w.is_hermitian()) throw QbpError("eta: H and W must be Hermitian");
  const Region& sup = h.support();
  const LocalOperator we = embed(w, sup);
  QbpIntertwiner r;
  r.h = h;
  r.w = we;
  r.beta = beta;
  r.s = s;
  r.steps = steps;
  const Matrix hm = h.matrix();
  const Matrix wm = we.matrix();
  const int d = h.local_dim();
  auto g = [&](double sigma) {
    return generator_matrix(LocalOperator(sup, Matrix(hm + sigma * wm), d), wm, beta);
  };
  r.eta = LocalOperator(sup, integrate(hm.rows(), beta, s, steps, g), d);
  r.norm = op_norm(r.eta);
  r.norm_bound = std::exp(beta / 2 * std::abs(s) * op_norm(w));
  r.residual = factorization_residual(h, we, beta, s, r.eta);
  if (!(r.residual <= tol)) {
    std::ostringstream os;
    os << "integration not converged: residual " << r.residual << " after " << steps << " steps";
    throw QbpError(os.str());
  }
  return r;
}

Region qbp_ball(const Region& w_support, double ell, const Region& ambient, const Metric& m) {
  if (w_support.empty()) return {};
  std::vector<Site> sites;
  for (const Site& x : ambient)
    if (dist(x, w_support, m) <= ell) sites.push_back(x);
  return Region(std::move(sites));
}

QbpIntertwiner eta_localized(const LocalOperator& h, const LocalOperator& w, double beta, double s, double ell,
                             int steps, const Metric& m) {
  require_beta(beta);
  check_steps(steps);
  const Region& sup = h.support();
  if (!sup.contains(w.support())) throw QbpError("eta_localized: supp(W) is outside supp(H)");
  const Region ball = qbp_ball(w.support(), ell, sup, m);
  const LocalOperator we = embed(w, sup);
  const Matrix hm = h.matrix();
  const Matrix wm = we.matrix();
  const int d = h.local_dim();
  auto g = [&](double sigma) {
    return project(sup, generator_matrix(LocalOperator(sup, Matrix(hm + sigma * wm), d), wm, beta), ball, d);
  };
  QbpIntertwiner r;
  r.h = h;
  r.w = we;
  r.beta = beta;
  r.s = s;
  r.steps = steps;
  r.eta = LocalOperator(ball, integrate(hilbert_dim(ball.size(), d), beta, s, steps, g), d);
  r.norm = op_norm(r.eta);
  r.norm_bound = std::exp(beta / 2 * std::abs(s) * op_norm(w));
  r.residual = factorization_residual(h, we, beta, s, embed(r.eta, sup));
  return r;
}

LocalizationSweep localization_sweep(const LocalOperator& h, const LocalOperator& w, double beta, double s,
                                     const std::vector<double>& ells, int steps, const Metric& m) {
  require_beta(beta);
  check_steps(steps);
  const Region& sup = h.support();
  if (!sup.contains(w.support())) throw QbpError("localization_sweep: supp(W) is outside supp(H)");
  const LocalOperator we = embed(w, sup);
  const Matrix hm = h.matrix();
  const Matrix wm = we.matrix();
  const int d = h.local_dim();

  // All flows advance in lockstep so each generator is diagonalized once.
  std::vector<Region> balls;
  std::vector<Matrix> ys;
  for (double ell : ells) {
    balls.push_back(qbp_ball(w.support(), ell, sup, m));
    ys.push_back(Matrix::Identity(hilbert_dim(balls.back().size(), d), hilbert_dim(balls.back().size(), d)));
  }
  Matrix full = Matrix::Identity(hm.rows(), hm.cols());
  auto g = [&](double sigma) { return generator_matrix(LocalOperator(sup, Matrix(hm + sigma * wm), d), wm, beta); };
  const double dt = s / steps;
  const double c = -beta / 2;
  Matrix g0 = g(0.0);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const Matrix gm = g(t + dt / 2);
    Matrix g1 = g(t + dt);
    rk4_step(full, g0, gm, g1, dt, c);
    for (std::size_t i = 0; i < balls.size(); ++i)
      rk4_step(ys[i], project(sup, g0, balls[i], d), project(sup, gm, balls[i], d), project(sup, g1, balls[i], d),
               dt, c);
    g0 = std::move(g1);
  }
  const LocalOperator eta_full(sup, full, d);
  if (const double res = factorization_residual(h, we, beta, s, eta_full); !(res <= kQbpConvergenceTol))
    throw QbpError("integration not converged: residual " + std::to_string(res));

  // eta~ = sqrt(Z(0)/Z(s)) eta.
  const double z0 = herm_exp(h, -beta).trace().real();
  const double zs = herm_exp(h + s * we, -beta).trace().real();
  const double scale_tilde = std::sqrt(z0 / zs);
  LocalizationSweep sw;
  double prev = kInfiniteDistance;
  for (std::size_t i = 0; i < balls.size(); ++i) {
    const double dist_ell = scale_tilde * op_norm_diff(eta_full, embed(LocalOperator(balls[i], ys[i], d), sup));
    sw.distances.emplace_back(ells[i], dist_ell);
    if (dist_ell > prev * (1 + 1e-9) + 1e-14) sw.nonincreasing = false;
    prev = dist_ell;
  }
  std::vector<std::pair<double, double>> usable;
  for (const auto& p : sw.distances)
    if (p.second > kDecayFloor) usable.push_back(p);
  if (usable.size() >= 3) {
    sw.fit = fit_decay(usable);
    sw.gamma = sw.fit.rate;
    const double wn = op_norm(w);
    const double scale = beta * std::abs(s) * static_cast<double>(w.support().size()) * wn *
                         std::exp(beta * std::abs(s) * wn);
    sw.kappa = scale > 0 ? sw.fit.prefactor / scale : 0.0;
  }
  return sw;
}

StatePathReport state_path_check(const Interaction& phi, const Region& lambda, const LocalOperator& w, double beta,
                                 double s, int steps) {
  const LocalOperator h = hamiltonian(phi, lambda);
  const QbpIntertwiner q = eta(h, w, beta, s, steps);
  const LocalOperator e0 = herm_exp(h, -beta);
  const LocalOperator es = herm_exp(h + s * q.w, -beta);
  const double z0 = e0.trace().real();
  const double zs = es.trace().real();
  const LocalOperator rho0 = cplx(1.0 / z0) * e0;
  const LocalOperator rhos = cplx(1.0 / zs) * es;
  const LocalOperator eta_t = cplx(std::sqrt(z0 / zs)) * q.eta;

  StatePathReport r;
  const double wn = op_norm(w);
  const double x = beta * std::abs(s) * wn;
  r.factorization_residual = trace_norm(rhos - mul(mul(eta_t, rho0), eta_t.adjoint()));
  if (r.factorization_residual > 1e-7) {
    std::ostringstream os;
    os << "integration not converged: state factorization residual " << r.factorization_residual;
    throw QbpError(os.str());
  }
  r.trace_distance = make_bound("qbp_trace_distance", trace_norm(rhos - rho0), std::expm1(2 * x));
  r.eta_norm = make_bound("qbp_eta_norm", q.norm, std::exp(x / 2));
  r.eta_tilde_norm = make_bound("qbp_eta_tilde_norm", op_norm(eta_t), std::exp(x));
  for (BoundReport* b : {&r.trace_distance, &r.eta_norm, &r.eta_tilde_norm}) {
    b->params = {{"beta", beta}, {"s", s}, {"W_norm", wn}, {"steps", steps}};
    b->regions = "W=" + to_string(w.support()) + " Lambda=" + to_string(lambda);
  }
  return r;
}

}  // namespace qgibbs
