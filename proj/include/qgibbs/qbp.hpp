#pragma once

// Quantum belief propagation along H(s) = H + sW: the filtered generator,
// the intertwiner eta with e^{-beta H(s)} = eta e^{-beta H} eta^*, its
// localized version and the state-path bounds.

#include <vector>

#include "qgibbs/correlations.hpp"
#include "qgibbs/interactions.hpp"
#include "qgibbs/report.hpp"

namespace qgibbs {

class QbpError : public OperatorError {
 public:
  using OperatorError::OperatorError;
};

inline constexpr int kQbpMinSteps = 100;
inline constexpr double kQbpConvergenceTol = 1e-6;

/// tanh(beta w / 2) / (beta w / 2), equal to 1 at w = 0.
double filter_hat(double omega, double beta);

struct QbpFilter {
  double beta = 1.0;
  double operator()(double omega) const { return filter_hat(omega, beta); }
};

/// In the eigenbasis of h_s: W_ij f^(E_i - E_j). Lives on supp(h_s).
LocalOperator generator(const LocalOperator& h_s, const LocalOperator& w, double beta);

struct QbpIntertwiner {
  LocalOperator eta;
  LocalOperator h;
  LocalOperator w;
  double beta = 0.0;
  double s = 0.0;
  int steps = 0;
  double residual = 0.0;  // ||e^{-beta H(s)} - eta e^{-beta H} eta^*|| / ||e^{-beta H(s)}||
  double norm = 0.0;
  double norm_bound = 0.0;  // e^{(beta/2) s ||W||}
  [[nodiscard]] bool norm_holds(double slack = 1e-8) const { return norm <= norm_bound + slack; }
};

/// RK4 solution of d eta/ds = -(beta/2) h(s) eta, eta(0) = 1. Throws QbpError
/// when the factorization residual exceeds `tol`.
QbpIntertwiner eta(const LocalOperator& h, const LocalOperator& w, double beta, double s, int steps = 200,
                   double tol = kQbpConvergenceTol);

/// Sites of `ambient` within distance ell of `w_support`.
Region qbp_ball(const Region& w_support, double ell, const Region& ambient, const Metric& m = {});

/// Same flow with the generator replaced by its conditional expectation on
/// the ball of radius ell around supp(W). The result lives on that ball.
QbpIntertwiner eta_localized(const LocalOperator& h, const LocalOperator& w, double beta, double s, double ell,
                             int steps = 200, const Metric& m = {});

struct LocalizationSweep {
  std::vector<std::pair<double, double>> distances;  // (ell, ||eta~ - eta~_ell||)
  bool nonincreasing = true;
  DecayFit fit;
  double gamma = 0.0;  // fitted decay rate
  double kappa = 0.0;  // prefactor over beta s |X| ||W|| e^{beta s ||W||}
};

LocalizationSweep localization_sweep(const LocalOperator& h, const LocalOperator& w, double beta, double s,
                                     const std::vector<double>& ells, int steps = 200, const Metric& m = {});

struct StatePathReport {
  BoundReport trace_distance;  // ||rho(s) - rho(0)||_1 <= e^{2 beta s ||W||} - 1
  BoundReport eta_norm;        // ||eta|| <= e^{(beta/2) s ||W||}
  BoundReport eta_tilde_norm;  // ||eta~|| <= e^{beta s ||W||}
  double factorization_residual = 0.0;  // ||rho(s) - eta~ rho(0) eta~^*||_1
  [[nodiscard]] bool holds() const {
    return trace_distance.holds() && eta_norm.holds(1e-8) && eta_tilde_norm.holds(1e-8) &&
           factorization_residual <= 1e-7;
  }
};

StatePathReport state_path_check(const Interaction& phi, const Region& lambda, const LocalOperator& w, double beta,
                                 double s = 1.0, int steps = 200);

}  // namespace qgibbs
