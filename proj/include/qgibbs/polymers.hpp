#pragma once

// Polymer model over the support family S of an interaction: multisets of
// sets of S, connectivity, Ursell functions, weights
// w(gamma) = (-beta)^k / k! sum over orderings of E_L[Phi_X1 ... Phi_Xk],
// truncated partition functions and convergence-criterion checks.

#include <boost/rational.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qgibbs/interactions.hpp"

namespace qgibbs {

class PolymerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Multiset of regions in canonical (sorted) form.
class Multiset {
 public:
  Multiset() = default;
  explicit Multiset(std::vector<Region> elements);
  Multiset(std::initializer_list<Region> elements) : Multiset(std::vector<Region>(elements)) {}

  /// Distinct regions with multiplicities, sorted.
  [[nodiscard]] std::vector<std::pair<Region, int>> entries() const;
  [[nodiscard]] const std::vector<Region>& elements() const { return elements_; }
  [[nodiscard]] int order() const { return static_cast<int>(elements_.size()); }
  [[nodiscard]] bool empty() const { return elements_.empty(); }
  /// Union of the elements.
  [[nodiscard]] Region support() const;
  /// gamma v gamma'.
  [[nodiscard]] Multiset join(const Multiset& other) const;

  friend bool operator==(const Multiset&, const Multiset&) = default;
  friend auto operator<=>(const Multiset& a, const Multiset& b) { return a.elements_ <=> b.elements_; }

 private:
  std::vector<Region> elements_;
};

std::string to_string(const Multiset& g);

bool is_connected(const Multiset& g);
/// gamma ^ gamma' != empty: some element of one meets some element of the other.
bool overlaps(const Multiset& a, const Multiset& b);
/// chi(Z, gamma): whether [Z] v gamma is connected.
bool chi(const Region& z, const Multiset& g);

using Rational = boost::rational<long long>;
inline constexpr int kUrsellMaxOrder = 7;

/// Sum over connected spanning subgraphs G of the graph on m vertices of
/// prod_{ij in G} xi_ij, with xi_ij = -1 when `overlap[i][j]` and 0 otherwise.
long long connected_graph_sum(const std::vector<std::vector<bool>>& overlap);

/// phi(gamma_1, ..., gamma_m) = (1/m!) sum_{G connected} prod xi(gamma_i, gamma_j).
Rational ursell(const std::vector<Multiset>& gammas, int m_max = kUrsellMaxOrder);

/// w(gamma) for the interaction phi, conditioned on L. The support is supp(gamma) n L.
LocalOperator weight(const Multiset& g, const Interaction& phi, const Region& l, double beta);

/// Polymers over a fixed family of sets, as sorted index lists.
struct PolymerIndex {
  std::vector<int> idx;    // indices into the family, nondecreasing
  std::uint64_t mask = 0;  // union of the sets as an ambient bit mask
};

/// Connected multisets of order 1..k_max over `family`, grouped by order
/// (result[k-1] holds order k). `cap` bounds the total count.
std::vector<std::vector<PolymerIndex>> enumerate_polymers(const std::vector<Region>& family, const Region& ambient,
                                                          int k_max, std::size_t cap = 10'000'000);

/// max over X in the family of #{Y : Y meets X}, counting X.
int family_degree(const std::vector<Region>& family);

struct PolymerCount {
  std::size_t count = 0;
  double bound = 0.0;  // (e d)^k
  [[nodiscard]] bool holds() const { return static_cast<double>(count) <= bound; }
};

/// Number of order-k polymers over `family` that contain x as an element.
PolymerCount count_polymers_containing(const Region& x, int k, const std::vector<Region>& family);

struct PolymerEntry {
  PolymerIndex index;
  int order = 0;
  LocalOperator weight;
  double norm = 0.0;
};

class PolymerModel {
 public:
  /// Polymers of order <= k_max over the nonzero terms of phi, with weights
  /// conditioned on L. Throws when two terms fail to commute.
  PolymerModel(const Interaction& phi, Region l, double beta, int k_max = 5, std::size_t cap = 10'000'000);

  [[nodiscard]] const Interaction& interaction() const { return phi_; }
  [[nodiscard]] const Region& kept() const { return l_; }
  [[nodiscard]] double beta() const { return beta_; }
  [[nodiscard]] int k_max() const { return k_max_; }
  [[nodiscard]] const std::vector<Region>& family() const { return family_; }
  [[nodiscard]] const std::vector<PolymerEntry>& polymers() const { return polymers_; }
  [[nodiscard]] Multiset multiset(const PolymerEntry& p) const;
  [[nodiscard]] Region region_of(std::uint64_t mask) const;

 private:
  Interaction phi_;
  Region l_;
  double beta_;
  int k_max_;
  std::vector<Region> family_;
  std::vector<PolymerEntry> polymers_;
};

/// 1 + sum_{m <= m_max} (1/m!) sum over m-tuples of pairwise disjoint
/// polymers of the weight products, on L n Lambda.
LocalOperator truncated_partition_function(const PolymerModel& model, int m_max,
                                           std::size_t cap = 10'000'000);

struct KpReport {
  double sum_i = 0.0;          // sum_gamma ||w|| e^{a+b}
  bool cond_ii = true;
  double worst_ii_ratio = 0.0;  // max over gamma* of lhs / a(gamma*)
  Multiset witness_ii;
  bool aux = true;             // per-Z condition on products of ||Phi_X|| e^{a+b}
  double worst_aux_ratio = 0.0;
  Region witness_aux;
  double tail_estimate = 0.0;  // size of the highest included order
  [[nodiscard]] bool pass() const { return std::isfinite(sum_i) && cond_ii && aux; }
};

/// Conditions of the abstract convergence criterion for the weights
/// w e^{b}, and the per-Z hypothesis feeding it, up to order k_max.
KpReport kp_condition_check(const PolymerModel& model, const SubadditiveWeight& a, const SubadditiveWeight& b);

struct RecursionReport {
  bool hypothesis = true;
  double worst_hypothesis_ratio = 0.0;
  Region hypothesis_witness;
  bool multiset_bound = true;  // sums over S_k <= e^{c(Z)} - 1
  bool polymer_bound = true;   // sums over P_k <= c(Z)
  double worst_multiset_margin = 0.0;
  double worst_polymer_margin = 0.0;
  std::string message;
  [[nodiscard]] bool pass() const { return hypothesis && multiset_bound && polymer_bound; }
};

/// Given sum_X chi(Z,X) u(X) e^{c(X)} <= c(Z),
/// the truncated multiset and polymer sums obey their bounds for each Z.
RecursionReport recursion_check(const std::vector<Region>& family, const std::function<double(const Region&)>& u,
                                const SubadditiveWeight& c, int k_max);

/// Per-order term counts and norms: order,count,norm_sum,norm_max.
std::string polymer_diagnostics_csv(const PolymerModel& model);

}  // namespace qgibbs
