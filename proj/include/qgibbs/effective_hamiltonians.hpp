#pragma once

// Weak and strong local effective Hamiltonians of Gibbs marginals. The
// strong interaction is built two ways: Mobius inversion of marginal logs
// over the subset lattice (any model, |Lambda| <= 12) and the cluster
// expansion (commuting models only).

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgibbs/interactions.hpp"
#include "qgibbs/polymers.hpp"

namespace qgibbs {

class EffectiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMobiusMaxSites = 12;

enum class Construction { Mobius, Cluster, Direct };

/// Hamiltonian: terms sum to -(1/beta) log E_L[e^{-beta H}].
/// Log: terms sum to log E_L[e^{-beta H}]. The two differ by a factor -beta.
enum class Convention { Hamiltonian, Log };

std::string construction_name(Construction c);
std::string convention_name(Convention c);

struct EffectiveInteraction {
  std::map<Region, LocalOperator> terms;  // X -> term supported in X n L
  Region ambient;
  Region kept;
  double beta = 0.0;
  int local_dim = 2;
  Construction construction = Construction::Direct;
  Convention convention = Convention::Hamiltonian;

  // Cluster construction only: norm of the highest included order, per X and overall.
  std::map<Region, double> truncation;
  double truncation_estimate = 0.0;

  /// sum_{X inside lambda} terms, on lambda n L.
  [[nodiscard]] LocalOperator sum(const Region& lambda) const;
  /// Same terms rescaled to the other convention.
  [[nodiscard]] EffectiveInteraction as(Convention target) const;
  /// sup_x sum_{X containing x} ||term_X|| e^{b(X)}, x over the ambient.
  [[nodiscard]] double norm_b(const SubadditiveWeight& b) const;
  /// Term for X, or the zero operator on X n L when absent.
  [[nodiscard]] LocalOperator term(const Region& x) const;
};

struct WeakEffectiveHamiltonian {
  LocalOperator h;  // on L n Lambda
  Region lambda;
  Region kept;
  double beta = 0.0;
  double log_z_rest = 0.0;  // log Z_{Lambda \ L}
};

/// -(1/beta) log tr_{Lambda\L}[e^{-beta H_Lambda}] + (1/beta) log Z_{Lambda\L}.
WeakEffectiveHamiltonian weak_effective(const Interaction& phi, const Region& lambda, const Region& l, double beta);

/// -(1/beta) log E_L[e^{-beta H_Lambda}], on L n Lambda.
LocalOperator strong_marginal_log(const Interaction& phi, const Region& lambda, const Region& l, double beta);

/// Phi~_X = sum_{Y inside X} (-1)^{|X\Y|} G(Y), G(Y) = -(1/beta) log E_L[e^{-beta H_Y}],
/// Hamiltonian convention. Terms with entries below drop_tol are omitted.
EffectiveInteraction mobius_effective(const Interaction& phi, const Region& l, double beta, const Region& lambda,
                                      double drop_tol = 1e-13);

struct ClusterOptions {
  int k_max = 4;  // highest total order in beta
  int m_max = 4;  // most polymers per cluster
  SubadditiveWeight a = SubadditiveWeight::constant(1.0);
  SubadditiveWeight b = SubadditiveWeight::zero();
  bool certify = true;  // run the convergence check first
  std::size_t cap = 2'000'000;
};

/// Truncated cluster sum over clusters of polymers whose joint support is X,
/// Log convention. Throws EffectiveError when the convergence check fails.
EffectiveInteraction cluster_effective(const Interaction& phi, const Region& l, double beta,
                                       const ClusterOptions& opts = {});

/// Sum over X inside lambda meeting L of the terms of a Hamiltonian-convention
/// strong interaction. Equals the weak effective Hamiltonian.
LocalOperator weak_from_strong(const EffectiveInteraction& e, const Region& lambda);

/// Largest support residual of a term outside X n L.
double support_defect(const EffectiveInteraction& e);
/// Largest difference between terms X of e1 and e2 over X with X n L1 = X n L2.
double consistency_defect(const EffectiveInteraction& e1, const EffectiveInteraction& e2);
/// ||sum_{X inside Lambda} terms - G(Lambda)|| for a Hamiltonian-convention interaction.
double telescoping_residual(const EffectiveInteraction& e, const Interaction& phi);

struct DecayCertificate {
  std::string name;
  double threshold = 0.0;  // admissible |beta|
  double beta = 0.0;       // where the interaction was built
  double norm = 0.0;       // ||Phi~||_b, Log convention
  double limit = 0.0;
  bool strict = false;     // norm < limit rather than <=
  double truncation = 0.0;
  [[nodiscard]] bool pass() const { return strict ? norm < limit : norm <= limit; }
};

struct DecayReport {
  DecayCertificate exponential;    // |beta| <= eps/(2||Phi||_{eps,b}) gives < eps/2
  DecayCertificate finite_degree;  // |beta| < 1/(d(1+d)e^2||Phi||_b) gives <= 1
  std::vector<std::pair<double, double>> sweep;  // (beta, ||Phi~||_b)
  bool monotone = true;
  [[nodiscard]] bool pass() const { return exponential.pass() && finite_degree.pass(); }
};

/// eps / (2 ||Phi||_{eps,b}) with ||.||_{eps,b} the norm for eps |X| + b(X).
double exponential_threshold(const Interaction& phi, double eps, const SubadditiveWeight& b);
/// 1 / (d (1 + d) e^2 ||Phi||_b), d the degree of the support family.
double finite_degree_threshold(const Interaction& phi, const SubadditiveWeight& b);

/// Both decay certificates for a commuting interaction, built at `fraction`
/// of each threshold and conditioned on L, plus a sweep of the norm in beta.
DecayReport decay_certificates(const Interaction& phi, double eps, const SubadditiveWeight& b, const Region& l,
                               int k_max = 4, double fraction = 0.5, int sweep_points = 5);

nlohmann::json to_json(const EffectiveInteraction& e);
EffectiveInteraction effective_from_json(const nlohmann::json& j);

}  // namespace qgibbs
