#include "qgibbs/gibbs.hpp"

#include <cmath>
#include <sstream>

namespace qgibbs {

double log_sum_exp_neg(const RealVector& e, double beta) {
  if (e.size() == 0) return 0.0;
  const double shift = beta >= 0 ? e.minCoeff() : e.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) s += std::exp(-beta * (e(i) - shift));
  return -beta * shift + std::log(s);
}

GibbsEnsemble::GibbsEnsemble(const Interaction& phi, Region y, double beta)
    : region_(std::move(y)), beta_(beta), h_(qgibbs::hamiltonian(phi, region_)) {
  init();
}

GibbsEnsemble::GibbsEnsemble(LocalOperator h, double beta) : region_(h.support()), beta_(beta), h_(std::move(h)) {
  init();
}

void GibbsEnsemble::init() {
  if (!(beta_ > 0)) throw OperatorError("inverse temperature must be positive");
  if (!h_.is_diagonal() && h_.dim() > kMaxDenseDim) throw OperatorError("Gibbs state exceeds the dense cap");
  es_ = eigensystem(h_);
  log_z_ = log_sum_exp_neg(es_.values, beta_);
  probs_.resize(es_.values.size());
  for (Eigen::Index i = 0; i < probs_.size(); ++i) probs_(i) = std::exp(-beta_ * es_.values(i) - log_z_);
}

const LocalOperator& GibbsEnsemble::state() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!state_) {
    state_ = std::make_unique<LocalOperator>(from_spectrum(h_, es_, probs_.cast<cplx>()));
  }
  return *state_;
}

const DensityMatrix& GibbsEnsemble::marginal(const Region& x) const {
  if (!region_.contains(x)) throw OperatorError("marginal: " + to_string(x) + " not inside " + to_string(region_));
  const LocalOperator& rho = state();
  std::lock_guard<std::mutex> lock(mu_);
  auto it = marginals_.find(x);
  if (it != marginals_.end()) return *it->second;
  LocalOperator red = partial_trace(rho, region_.minus(x));
  auto dm = std::make_unique<DensityMatrix>(std::move(red), 1e-9);
  auto& slot = marginals_[x];
  slot = std::move(dm);
  return *slot;
}

cplx GibbsEnsemble::expectation(const LocalOperator& o) const {
  const DensityMatrix& r = marginal(o.support());
  return r.expectation(o);
}

double log_partition(const Interaction& phi, const Region& y, double beta) {
  if (y.empty()) return 0.0;
  const LocalOperator h = hamiltonian(phi, y);
  if (h.is_diagonal()) return log_sum_exp_neg(h.diagonal().real(), beta);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h.dense() + h.dense().adjoint()), Eigen::EigenvaluesOnly);
  return log_sum_exp_neg(solver.eigenvalues(), beta);
}

Kappa kappa(const Interaction& phi, const Region& a, const Region& b, const Region& c, double beta) {
  if (a.intersects(b) || b.intersects(c) || a.intersects(c)) throw OperatorError("kappa: regions must be disjoint");
  const Region all = a.unite(b).unite(c);
  if (all != phi.ambient()) throw OperatorError("kappa: A, B, C must partition the ambient region");
  const double lk = log_partition(phi, b, beta) + log_partition(phi, all, beta) - log_partition(phi, b.unite(c), beta) -
                    log_partition(phi, a.unite(b), beta);
  Kappa k;
  k.log_value = lk;
  k.value = std::exp(lk);
  k.abs_minus_one = std::abs(std::expm1(lk));
  return k;
}

}  // namespace qgibbs
