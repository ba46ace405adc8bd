#pragma once

// Gibbs states e^{-beta H_Y} / Z_Y with log-domain partition data.

#include <map>
#include <memory>
#include <mutex>

#include "qgibbs/interactions.hpp"
#include "qgibbs/operators.hpp"

namespace qgibbs {

class GibbsEnsemble {
 public:
  GibbsEnsemble(const Interaction& phi, Region y, double beta);
  /// Gibbs state of an explicit Hamiltonian.
  GibbsEnsemble(LocalOperator h, double beta);

  [[nodiscard]] const Region& region() const { return region_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] double log_partition() const { return log_z_; }
  [[nodiscard]] const LocalOperator& hamiltonian() const { return h_; }
  /// Eigenvalues of H in ascending order.
  [[nodiscard]] const RealVector& energies() const { return es_.values; }
  [[nodiscard]] const LocalOperator& state() const;
  /// Reduced state on x, cached.
  [[nodiscard]] const DensityMatrix& marginal(const Region& x) const;
  [[nodiscard]] cplx expectation(const LocalOperator& o) const;

 private:
  void init();

  Region region_;
  double beta_;
  LocalOperator h_;
  EigenSystem es_;
  double log_z_ = 0.0;
  RealVector probs_;  // Boltzmann weights in eigen order

  mutable std::mutex mu_;
  mutable std::unique_ptr<LocalOperator> state_;
  mutable std::map<Region, std::unique_ptr<DensityMatrix>> marginals_;
};

/// log Tr e^{-beta H_Y}; zero for the empty region.
double log_partition(const Interaction& phi, const Region& y, double beta);

/// logsumexp(-beta * e).
double log_sum_exp_neg(const RealVector& e, double beta);

struct Kappa {
  double value = 1.0;
  double abs_minus_one = 0.0;
  double log_value = 0.0;
};

/// Z_B Z_Lambda / (Z_BC Z_AB) for a partition Lambda = A u B u C of the ambient.
Kappa kappa(const Interaction& phi, const Region& a, const Region& b, const Region& c, double beta);

}  // namespace qgibbs
