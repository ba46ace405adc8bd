#pragma once

// Local interactions Phi = (Phi_X), decay norms, Hamiltonians and model
// builders.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qgibbs/geometry.hpp"
#include "qgibbs/operators.hpp"

namespace qgibbs {

class Interaction {
 public:
  explicit Interaction(Region ambient = {}, int local_dim = 2, Metric metric = {});

  /// Adds `term` to Phi_X with X = supp(term). Terms must be Hermitian and
  /// inside the ambient region.
  void add(const LocalOperator& term);

  [[nodiscard]] const Region& ambient() const { return ambient_; }
  [[nodiscard]] int local_dim() const { return d_; }
  [[nodiscard]] const Metric& metric() const { return metric_; }
  [[nodiscard]] const std::map<Region, LocalOperator>& terms() const { return terms_; }
  [[nodiscard]] std::vector<Region> supports() const;
  [[nodiscard]] bool empty() const { return terms_.empty(); }
  /// True when every term is stored diagonally.
  [[nodiscard]] bool is_diagonal() const;

  /// Terms with X inside y, on ambient y.
  [[nodiscard]] Interaction restricted(const Region& y) const;
  /// Phi scaled by a real factor.
  [[nodiscard]] Interaction scaled(double c) const;

 private:
  Region ambient_;
  int d_;
  Metric metric_;
  std::map<Region, LocalOperator> terms_;
};

/// Subadditive set function b with a human-readable form.
struct SubadditiveWeight {
  std::function<double(const Region&)> eval;
  std::string form;

  double operator()(const Region& x) const { return eval(x); }

  static SubadditiveWeight zero();
  static SubadditiveWeight constant(double c);
  /// lambda |X| + mu diam(X).
  static SubadditiveWeight linear(double lambda, double mu, Metric m = {});
  /// Pointwise sum of two weights.
  static SubadditiveWeight sum(const SubadditiveWeight& a, const SubadditiveWeight& b);
};

/// sup_x sum_{X containing x} ||Phi_X|| e^{b(X)}, sup over the ambient.
double norm_b(const Interaction& phi, const SubadditiveWeight& b);
/// ||Phi||_{lambda,mu} with the interaction's metric.
double norm_lambda_mu(const Interaction& phi, double lambda, double mu);
/// Spot check of b(X u Y) <= b(X) + b(Y) on the given pairs.
bool check_subadditive(const SubadditiveWeight& b, const std::vector<std::pair<Region, Region>>& pairs,
                       double tol = 1e-12);

/// H_Y = sum_{X inside Y} Phi_X on Y.
LocalOperator hamiltonian(const Interaction& phi, const Region& y);

/// Pairs of ambient sites at lattice (l1) distance one.
std::vector<std::pair<Site, Site>> nearest_neighbor_bonds(const Region& ambient);

Interaction ising(const Region& ambient, double j, double h);
Interaction tfim(const Region& ambient, double j, double g_field);
Interaction heisenberg(const Region& ambient, double jx, double jy, double jz);

struct RangeProfile {
  double range = 1.0;        // maximal diameter of a term
  int max_set_size = 2;      // terms live on sets of at most this many sites
  double lambda = 0.0;       // the norm targeted is ||Phi||_{lambda,mu}
  double mu = 0.0;           // terms are damped by e^{-mu diam}
  double target_norm = 1.0;
  bool diagonal = false;     // classical (diagonal) terms only
};

Interaction random_short_range(const Region& ambient, std::uint64_t seed, const RangeProfile& profile);

/// max over X in S of #{Y in S : Y meets X}, counting X itself.
int degree(const Interaction& phi);

struct CommutingReport {
  bool pass = true;
  double worst_commutator = 0.0;
  std::string witness;     // description of the worst pair
  std::size_t family_size = 0;
  bool truncated = false;  // word enumeration hit the cap
};

/// Commutation test of the finite family {Phi_X} together with E_L of
/// products of up to word_len_max terms, for each sampled L. Necessary but
/// not sufficient for the hypothesis on the full algebra.
CommutingReport commuting_hypothesis_check(const Interaction& phi, int word_len_max,
                                           const std::vector<Region>& sample_ls, double tol = 1e-10,
                                           std::size_t word_cap = 400);

}  // namespace qgibbs
