#include "qgibbs/polymers.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace qgibbs {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

long long factorial_ll(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Union-find connectivity of the sets selected by idx (repeats allowed).
bool connected_indices(const std::vector<int>& idx, const std::vector<std::uint64_t>& masks,
                       std::uint64_t seed = 0) {
  if (idx.empty()) return true;
  std::uint64_t reached = seed ? seed : masks[static_cast<std::size_t>(idx.front())];
  std::vector<bool> used(idx.size(), false);
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::uint64_t m = masks[static_cast<std::size_t>(idx[i])];
      if (!used[i] && (m & reached)) {
        used[i] = true;
        reached |= m;
        grew = true;
      }
    }
  }
  return std::all_of(used.begin(), used.end(), [](bool b) { return b; });
}

std::vector<std::uint64_t> family_masks(const std::vector<Region>& family, const Region& ambient) {
  if (ambient.size() > 64) throw PolymerError("polymer enumeration supports at most 64 sites");
  std::vector<std::uint64_t> masks;
  masks.reserve(family.size());
  for (const auto& x : family) {
    if (x.empty()) throw PolymerError("empty set in polymer family");
    masks.push_back(ambient.mask_of(x));
  }
  return masks;
}

Region family_union(const std::vector<Region>& family) {
  Region u;
  for (const auto& x : family) u = u.unite(x);
  return u;
}

// Multisets gamma of order 1..k_max with seed v gamma connected (seed != 0),
// or gamma connected by itself (seed == 0).
std::vector<std::vector<PolymerIndex>> grow(const std::vector<std::uint64_t>& masks, std::uint64_t seed, int k_max,
                                            std::size_t cap) {
  std::vector<std::vector<PolymerIndex>> out;
  if (k_max < 1) return out;
  std::size_t total = 0;
  std::vector<PolymerIndex> level;
  for (std::size_t j = 0; j < masks.size(); ++j)
    if (!seed || (masks[j] & seed)) level.push_back({{static_cast<int>(j)}, masks[j]});
  total += level.size();
  out.push_back(level);
  for (int k = 2; k <= k_max; ++k) {
    std::set<std::vector<int>> seen;
    std::vector<PolymerIndex> next;
    for (const auto& p : out.back()) {
      const std::uint64_t reach = p.mask | seed;
      for (std::size_t j = 0; j < masks.size(); ++j) {
        if (!(masks[j] & reach)) continue;
        std::vector<int> idx = p.idx;
        idx.insert(std::upper_bound(idx.begin(), idx.end(), static_cast<int>(j)), static_cast<int>(j));
        if (!seen.insert(idx).second) continue;
        next.push_back({std::move(idx), p.mask | masks[j]});
        if (++total > cap) throw PolymerError("polymer enumeration exceeded the cap; lower k_max");
      }
    }
    out.push_back(std::move(next));
  }
  return out;
}

double sum_over(const std::vector<int>& idx, const std::vector<double>& per_set) {
  double s = 0.0;
  for (int i : idx) s += per_set[static_cast<std::size_t>(i)];
  return s;
}

}  // namespace

Multiset::Multiset(std::vector<Region> elements) : elements_(std::move(elements)) {
  std::sort(elements_.begin(), elements_.end());
}

std::vector<std::pair<Region, int>> Multiset::entries() const {
  std::vector<std::pair<Region, int>> out;
  for (const auto& x : elements_) {
    if (!out.empty() && out.back().first == x) ++out.back().second;
    else out.emplace_back(x, 1);
  }
  return out;
}

Region Multiset::support() const { return family_union(elements_); }

Multiset Multiset::join(const Multiset& other) const {
  std::vector<Region> all = elements_;
  all.insert(all.end(), other.elements_.begin(), other.elements_.end());
  return Multiset(std::move(all));
}

std::string to_string(const Multiset& g) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < g.elements().size(); ++i) os << (i ? "," : "") << to_string(g.elements()[i]);
  os << ']';
  return os.str();
}

bool is_connected(const Multiset& g) {
  if (g.empty()) throw PolymerError("is_connected: empty multiset");
  const Region amb = g.support();
  std::vector<int> idx(g.elements().size());
  std::iota(idx.begin(), idx.end(), 0);
  return connected_indices(idx, family_masks(g.elements(), amb));
}

bool overlaps(const Multiset& a, const Multiset& b) {
  for (const auto& x : a.elements())
    for (const auto& y : b.elements())
      if (x.intersects(y)) return true;
  return false;
}

bool chi(const Region& z, const Multiset& g) { return is_connected(g.join(Multiset{z})); }

long long connected_graph_sum(const std::vector<std::vector<bool>>& overlap) {
  const std::size_t m = overlap.size();
  if (m == 0) return 0;
  if (m > 20) throw PolymerError("connected_graph_sum: too many vertices");
  std::vector<std::uint32_t> adj(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i != j && overlap[i][j]) adj[i] |= 1u << j;
  const std::uint32_t full = (1u << m) - 1;
  // g(S) = sum over all graphs on S of prod xi = prod (1 + xi) = [S has no overlapping pair].
  std::vector<char> indep(full + 1, 0);
  indep[0] = 1;
  for (std::uint32_t s = 1; s <= full; ++s) {
    const int v = std::countr_zero(s);
    const std::uint32_t rest = s & (s - 1);
    indep[s] = indep[rest] && !(adj[static_cast<std::size_t>(v)] & rest);
  }
  // g(S) = sum_{T in S, T contains min S} c(T) g(S \ T).
  std::vector<long long> c(full + 1, 0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    const std::uint32_t low = s & (~s + 1);
    long long v = indep[s];
    const std::uint32_t others = s ^ low;
    if (others == 0) {
      c[s] = v;
      continue;
    }
    for (std::uint32_t sub = (others - 1) & others;; sub = (sub - 1) & others) {
      // T = low | sub, a proper subset of S since sub != others.
      const std::uint32_t t = low | sub;
      if (indep[s ^ t]) v -= c[t];
      if (sub == 0) break;
    }
    c[s] = v;
  }
  return c[full];
}

Rational ursell(const std::vector<Multiset>& gammas, int m_max) {
  const int m = static_cast<int>(gammas.size());
  if (m == 0) throw PolymerError("ursell: no polymers");
  if (m > m_max) {
    std::ostringstream os;
    os << "ursell: order " << m << " exceeds the limit " << m_max << "; lower k_max or m_max";
    throw PolymerError(os.str());
  }
  std::vector<std::vector<bool>> ov(static_cast<std::size_t>(m), std::vector<bool>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) ov[i][j] = i != j && overlaps(gammas[i], gammas[j]);
  return Rational(connected_graph_sum(ov), factorial_ll(m));
}

LocalOperator weight(const Multiset& g, const Interaction& phi, const Region& l, double beta) {
  if (g.empty()) throw PolymerError("weight: empty multiset");
  std::vector<const LocalOperator*> ops;
  for (const auto& x : g.elements()) {
    auto it = phi.terms().find(x);
    if (it == phi.terms().end()) throw PolymerError("weight: " + to_string(x) + " carries no interaction term");
    ops.push_back(&it->second);
  }
  const auto ent = g.entries();
  for (std::size_t i = 0; i < ent.size(); ++i)
    for (std::size_t j = i + 1; j < ent.size(); ++j) {
      const LocalOperator& a = phi.terms().at(ent[i].first);
      const LocalOperator& b = phi.terms().at(ent[j].first);
      if (a.is_diagonal() && b.is_diagonal()) continue;
      if (!ent[i].first.intersects(ent[j].first)) continue;
      if (op_norm(commutator(a, b)) > 1e-8)
        throw PolymerError("commuting hypothesis violated between " + to_string(ent[i].first) + " and " +
                           to_string(ent[j].first));
    }
  LocalOperator prod = *ops.front();
  for (std::size_t i = 1; i < ops.size(); ++i) prod = mul(prod, *ops[i]);
  double mult = 1.0;
  for (const auto& e : ent) mult *= factorial(e.second);
  const double coeff = std::pow(-beta, g.order()) / mult;
  return cplx(coeff) * cond_expectation(prod, l);
}

std::vector<std::vector<PolymerIndex>> enumerate_polymers(const std::vector<Region>& family, const Region& ambient,
                                                          int k_max, std::size_t cap) {
  return grow(family_masks(family, ambient), 0, k_max, cap);
}

int family_degree(const std::vector<Region>& family) {
  int best = 0;
  for (const auto& x : family) {
    int n = 0;
    for (const auto& y : family) n += x.intersects(y) ? 1 : 0;
    best = std::max(best, n);
  }
  return best;
}

PolymerCount count_polymers_containing(const Region& x, int k, const std::vector<Region>& family) {
  auto pos = std::find(family.begin(), family.end(), x);
  if (pos == family.end()) throw PolymerError("count_polymers_containing: set not in family");
  if (k < 1) throw PolymerError("count_polymers_containing: order must be positive");
  const int ix = static_cast<int>(pos - family.begin());
  const auto levels = enumerate_polymers(family, family_union(family), k);
  PolymerCount pc;
  for (const auto& p : levels.back())
    if (std::binary_search(p.idx.begin(), p.idx.end(), ix)) ++pc.count;
  pc.bound = std::pow(std::exp(1.0) * family_degree(family), k);
  return pc;
}

PolymerModel::PolymerModel(const Interaction& phi, Region l, double beta, int k_max, std::size_t cap)
    : phi_(phi), l_(std::move(l)), beta_(beta), k_max_(k_max) {
  if (k_max < 1) throw PolymerError("k_max must be positive");
  for (const auto& [x, q] : phi.terms())
    if (op_norm(q) > 0) family_.push_back(x);
  for (std::size_t i = 0; i < family_.size(); ++i)
    for (std::size_t j = i + 1; j < family_.size(); ++j) {
      const LocalOperator& a = phi.terms().at(family_[i]);
      const LocalOperator& b = phi.terms().at(family_[j]);
      if ((a.is_diagonal() && b.is_diagonal()) || !family_[i].intersects(family_[j])) continue;
      if (op_norm(commutator(a, b)) > 1e-10)
        throw PolymerError("commuting hypothesis violated between " + to_string(family_[i]) + " and " +
                           to_string(family_[j]));
    }
  const auto levels = enumerate_polymers(family_, phi.ambient(), k_max, cap);
  for (std::size_t k = 0; k < levels.size(); ++k)
    for (const auto& p : levels[k]) {
      PolymerEntry e;
      e.index = p;
      e.order = static_cast<int>(k + 1);
      e.weight = weight(multiset(e), phi_, l_, beta_);
      e.norm = op_norm(e.weight);
      polymers_.push_back(std::move(e));
    }
}

Multiset PolymerModel::multiset(const PolymerEntry& p) const {
  std::vector<Region> el;
  for (int i : p.index.idx) el.push_back(family_[static_cast<std::size_t>(i)]);
  return Multiset(std::move(el));
}

Region PolymerModel::region_of(std::uint64_t mask) const { return phi_.ambient().subset(mask); }

LocalOperator truncated_partition_function(const PolymerModel& model, int m_max, std::size_t cap) {
  const Region target = model.kept().intersect(model.interaction().ambient());
  const int d = model.interaction().local_dim();
  LocalOperator total = LocalOperator::identity(target, d);
  const auto& ps = model.polymers();
  std::size_t terms = 0;
  // Unordered sets of pairwise disjoint polymers; the 1/m! cancels the orderings.
  auto rec = [&](auto&& self, std::size_t start, int depth, std::uint64_t used, const LocalOperator& prod) -> void {
    for (std::size_t i = start; i < ps.size(); ++i) {
      if (ps[i].index.mask & used) continue;
      const LocalOperator next = mul(prod, ps[i].weight);
      total = total + embed(next, target);
      if (++terms > cap) throw PolymerError("truncated_partition_function exceeded the term cap");
      if (depth + 1 < m_max) self(self, i + 1, depth + 1, used | ps[i].index.mask, next);
    }
  };
  if (m_max >= 1) rec(rec, 0, 0, 0, LocalOperator::identity(Region{}, d));
  return total;
}

KpReport kp_condition_check(const PolymerModel& model, const SubadditiveWeight& a, const SubadditiveWeight& b) {
  const auto& fam = model.family();
  std::vector<double> av(fam.size()), bv(fam.size()), phin(fam.size());
  for (std::size_t i = 0; i < fam.size(); ++i) {
    av[i] = a(fam[i]);
    bv[i] = b(fam[i]);
    phin[i] = op_norm(model.interaction().terms().at(fam[i]));
  }
  const auto& ps = model.polymers();
  std::vector<double> scaled(ps.size());
  KpReport r;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    scaled[i] = ps[i].norm * std::exp(sum_over(ps[i].index.idx, av) + sum_over(ps[i].index.idx, bv));
    r.sum_i += scaled[i];
    if (ps[i].order == model.k_max()) r.tail_estimate += scaled[i];
  }
  for (std::size_t s = 0; s < ps.size(); ++s) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (ps[i].index.mask & ps[s].index.mask) lhs += scaled[i];
    const double rhs = sum_over(ps[s].index.idx, av);
    const double ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? kInfiniteDistance : 0.0);
    if (ratio > r.worst_ii_ratio) {
      r.worst_ii_ratio = ratio;
      r.witness_ii = model.multiset(ps[s]);
    }
  }
  r.cond_ii = r.worst_ii_ratio <= 1.0 + 1e-12;

  const double babs = std::abs(model.beta());
  std::vector<double> prod(ps.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    double p = 1.0;
    for (int j : ps[i].index.idx) p *= babs * phin[static_cast<std::size_t>(j)] * std::exp(av[j] + bv[j]);
    prod[i] = p;
  }
  const Region& amb = model.interaction().ambient();
  for (std::size_t z = 0; z < fam.size(); ++z) {
    const std::uint64_t zm = amb.mask_of(fam[z]);
    double lhs = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (ps[i].index.mask & zm) lhs += prod[i];
    const double ratio = av[z] > 0 ? lhs / av[z] : (lhs > 0 ? kInfiniteDistance : 0.0);
    if (ratio > r.worst_aux_ratio) {
      r.worst_aux_ratio = ratio;
      r.witness_aux = fam[z];
    }
  }
  r.aux = r.worst_aux_ratio <= 1.0 + 1e-12;
  return r;
}

RecursionReport recursion_check(const std::vector<Region>& family, const std::function<double(const Region&)>& u,
                                const SubadditiveWeight& c, int k_max) {
  RecursionReport r;
  const Region amb = family_union(family);
  const auto masks = family_masks(family, amb);
  std::vector<double> uv(family.size()), cv(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    uv[i] = u(family[i]);
    cv[i] = c(family[i]);
  }
  for (std::size_t z = 0; z < family.size(); ++z) {
    double lhs = 0.0;
    for (std::size_t x = 0; x < family.size(); ++x)
      if (masks[x] & masks[z]) lhs += uv[x] * std::exp(cv[x]);
    const double ratio = cv[z] > 0 ? lhs / cv[z] : (lhs > 0 ? kInfiniteDistance : 0.0);
    if (ratio > r.worst_hypothesis_ratio) {
      r.worst_hypothesis_ratio = ratio;
      r.hypothesis_witness = family[z];
    }
  }
  r.hypothesis = r.worst_hypothesis_ratio <= 1.0 + 1e-12;
  if (!r.hypothesis) {
    r.message = "hypothesis violated at " + to_string(r.hypothesis_witness);
    return r;
  }
  r.worst_multiset_margin = r.worst_polymer_margin = kInfiniteDistance;
  for (std::size_t z = 0; z < family.size(); ++z) {
    double s_sum = 0.0, p_sum = 0.0;
    for (const auto& level : grow(masks, masks[z], k_max, 10'000'000))
      for (const auto& g : level) {
        double w = 1.0;
        for (int i : g.idx) w *= uv[static_cast<std::size_t>(i)];
        s_sum += w;
        if (connected_indices(g.idx, masks)) p_sum += w;
      }
    r.worst_multiset_margin = std::min(r.worst_multiset_margin, std::expm1(cv[z]) - s_sum);
    r.worst_polymer_margin = std::min(r.worst_polymer_margin, cv[z] - p_sum);
  }
  r.multiset_bound = r.worst_multiset_margin >= -1e-12;
  r.polymer_bound = r.worst_polymer_margin >= -1e-12;
  r.message = r.pass() ? "ok" : "bound violated";
  return r;
}

std::string polymer_diagnostics_csv(const PolymerModel& model) {
  std::ostringstream os;
  os.precision(12);
  os << "order,count,norm_sum,norm_max\n";
  for (int k = 1; k <= model.k_max(); ++k) {
    std::size_t n = 0;
    double sum = 0.0, mx = 0.0;
    for (const auto& p : model.polymers())
      if (p.order == k) {
        ++n;
        sum += p.norm;
        mx = std::max(mx, p.norm);
      }
    os << k << ',' << n << ',' << sum << ',' << mx << '\n';
  }
  return os.str();
}

}  // namespace qgibbs
