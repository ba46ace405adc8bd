#pragma once

// Complex-time evolution, Araki expansionals E_{X,Y}(s) and the norm bounds
// they satisfy for interactions with finite ||Phi||_{lambda,mu}.

#include <utility>

#include "qgibbs/interactions.hpp"
#include "qgibbs/report.hpp"

namespace qgibbs {

/// e^{isH} Q e^{-isH}; Q is embedded into supp(H) first.
LocalOperator time_evolution(const LocalOperator& h, const LocalOperator& q, cplx s);

/// Raised when |s| is not below lambda / (2 ||Phi||).
class RegimeError : public OperatorError {
 public:
  using OperatorError::OperatorError;
};

/// lambda / (2 ||Phi||_{lambda,mu}); infinite for the zero interaction.
double analyticity_radius(const Interaction& phi, double lambda, double mu);

/// Bounds on ||Gamma^s_{H_Y}(Q)|| and ||Gamma^s_{H_Y'}(Q) - Gamma^s_{H_Y}(Q)||
/// for Q supported in Z, Z in Y in Y'. The complement of Y is taken inside
/// the ambient region of phi.
std::pair<BoundReport, BoundReport> locality_bound_check(const Interaction& phi, const LocalOperator& q,
                                                         const Region& y, const Region& y_prime, cplx s,
                                                         double lambda, double mu);

struct Expansional {
  Region x, y;
  cplx s = 0.0;
  LocalOperator op;  // on x u y
};

/// e^{-s H_{XY}} e^{s (H_X + H_Y)} for disjoint X, Y.
Expansional expansional(const Interaction& phi, const Region& x, const Region& y, cplx s = 1.0);

/// e^{s H_{XY}} e^{-s (H_X + H_Y)}, the inverse of E_{X,Y}(s)^*.
LocalOperator expansional_adjoint_inverse(const Interaction& phi, const Region& x, const Region& y, double s);

/// F(beta) for F' = -F e^{-tH} W e^{tH}, F(0) = 1, with H = H_X + H_Y and
/// W = H_{XY} - H, integrated by fixed-step RK4. Equals E_{X,Y}(beta).
LocalOperator duhamel_oracle(const Interaction& phi, const Region& x, const Region& y, double beta, int steps);

/// ||E_{A,B}(beta)|| against the exponential boundary-sum bound.
BoundReport expansional_bound_check(const Interaction& phi, const Region& a, const Region& b, double beta,
                                    double lambda, double mu);

/// ||E_{A,BC}(beta) - E_{A,B}(beta)|| against its bound.
BoundReport expansional_diff_bound_check(const Interaction& phi, const Region& a, const Region& b,
                                         const Region& c, double beta, double lambda, double mu);

/// K = ||Phi|| lambda nu / (lambda - 2 ||Phi|| beta) with the onion constant nu.
double simplified_constant(double phi_norm, double lambda, double mu, double beta, int lattice_dim);

/// |Tr[rho^{AB} E^{*-1}_{A,B}(beta)]^{-1}| against e^{beta K min(|dA|, |dB|)}.
BoundReport trace_inverse_expansional_check(const Interaction& phi, const Region& a, const Region& b, double beta,
                                            double lambda, double mu);

}  // namespace qgibbs
