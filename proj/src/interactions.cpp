#include "qgibbs/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace qgibbs {

Interaction::Interaction(Region ambient, int local_dim, Metric metric)
    : ambient_(std::move(ambient)), d_(local_dim), metric_(metric) {}

void Interaction::add(const LocalOperator& term) {
  if (term.support().empty()) throw OperatorError("interaction term with empty support");
  if (term.local_dim() != d_) throw OperatorError("interaction term has the wrong local dimension");
  if (!ambient_.contains(term.support()))
    throw OperatorError("term on " + to_string(term.support()) + " outside ambient " + to_string(ambient_));
  if (!term.is_hermitian()) throw OperatorError("interaction term on " + to_string(term.support()) + " not Hermitian");
  auto it = terms_.find(term.support());
  if (it == terms_.end()) terms_.emplace(term.support(), term);
  else it->second = it->second + term;
}

std::vector<Region> Interaction::supports() const {
  std::vector<Region> out;
  out.reserve(terms_.size());
  for (const auto& [x, q] : terms_) out.push_back(x);
  return out;
}

bool Interaction::is_diagonal() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& kv) { return kv.second.is_diagonal(); });
}

Interaction Interaction::restricted(const Region& y) const {
  Interaction out(y, d_, metric_);
  for (const auto& [x, q] : terms_)
    if (y.contains(x)) out.terms_.emplace(x, q);
  return out;
}

Interaction Interaction::scaled(double c) const {
  Interaction out(ambient_, d_, metric_);
  for (const auto& [x, q] : terms_) out.terms_.emplace(x, c * q);
  return out;
}

SubadditiveWeight SubadditiveWeight::zero() {
  return {[](const Region&) { return 0.0; }, "0"};
}

SubadditiveWeight SubadditiveWeight::constant(double c) {
  std::ostringstream os;
  os << c;
  return {[c](const Region&) { return c; }, os.str()};
}

SubadditiveWeight SubadditiveWeight::linear(double lambda, double mu, Metric m) {
  std::ostringstream os;
  os << lambda << "|X| + " << mu << " diam(X)";
  return {[=](const Region& x) { return x.empty() ? 0.0 : lambda * static_cast<double>(x.size()) + mu * diam(x, m); },
          os.str()};
}

SubadditiveWeight SubadditiveWeight::sum(const SubadditiveWeight& a, const SubadditiveWeight& b) {
  return {[a, b](const Region& x) { return a(x) + b(x); }, a.form + " + " + b.form};
}

bool check_subadditive(const SubadditiveWeight& b, const std::vector<std::pair<Region, Region>>& pairs, double tol) {
  return std::all_of(pairs.begin(), pairs.end(),
                     [&](const auto& p) { return b(p.first.unite(p.second)) <= b(p.first) + b(p.second) + tol; });
}

double norm_b(const Interaction& phi, const SubadditiveWeight& b) {
  std::map<Site, double> acc;
  for (const auto& [x, q] : phi.terms()) {
    const double w = op_norm(q) * std::exp(b(x));
    for (const auto& s : x) acc[s] += w;
  }
  double sup = 0.0;
  for (const auto& [s, v] : acc) sup = std::max(sup, v);
  return sup;
}

double norm_lambda_mu(const Interaction& phi, double lambda, double mu) {
  if (lambda < 0 || mu < 0) throw OperatorError("decay parameters must be nonnegative");
  return norm_b(phi, SubadditiveWeight::linear(lambda, mu, phi.metric()));
}

LocalOperator hamiltonian(const Interaction& phi, const Region& y) {
  if (!phi.ambient().contains(y))
    throw OperatorError("hamiltonian: region " + to_string(y) + " outside ambient");
  const int d = phi.local_dim();
  const Eigen::Index n = hilbert_dim(y.size(), d);
  bool diag = true;
  for (const auto& [x, q] : phi.terms())
    if (y.contains(x) && !q.is_diagonal()) diag = false;
  if (diag) {
    Vector acc = Vector::Zero(n);
    for (const auto& [x, q] : phi.terms())
      if (y.contains(x)) acc += embed(q, y).diagonal();
    return LocalOperator(y, acc, d);
  }
  if (n > kMaxDenseDim) throw OperatorError("hamiltonian: dense dimension exceeds cap");
  Matrix acc = Matrix::Zero(n, n);
  for (const auto& [x, q] : phi.terms()) {
    if (!y.contains(x)) continue;
    const LocalOperator e = embed(q, y);
    if (e.is_diagonal()) acc.diagonal() += e.diagonal();
    else acc += e.dense();
  }
  return LocalOperator(y, acc, d);
}

std::vector<std::pair<Site, Site>> nearest_neighbor_bonds(const Region& ambient) {
  const Metric l1(Metric::Norm::L1);
  std::vector<std::pair<Site, Site>> out;
  for (std::size_t i = 0; i < ambient.size(); ++i)
    for (std::size_t j = i + 1; j < ambient.size(); ++j)
      if (l1(ambient[i], ambient[j]) == 1.0) out.emplace_back(ambient[i], ambient[j]);
  return out;
}

namespace {

LocalOperator site_op(const Site& s, char which) {
  if (which == 'Z') return pauli_z(s);
  return LocalOperator(Region{s}, pauli_matrix(which));
}

LocalOperator bond_op(const Site& a, const Site& b, char which) { return mul(site_op(a, which), site_op(b, which)); }

}  // namespace

Interaction ising(const Region& ambient, double j, double h) {
  Interaction phi(ambient);
  if (j != 0.0)
    for (const auto& [a, b] : nearest_neighbor_bonds(ambient)) phi.add(j * bond_op(a, b, 'Z'));
  if (h != 0.0)
    for (const auto& s : ambient) phi.add(h * pauli_z(s));
  return phi;
}

Interaction tfim(const Region& ambient, double j, double g_field) {
  Interaction phi(ambient);
  if (j != 0.0)
    for (const auto& [a, b] : nearest_neighbor_bonds(ambient)) phi.add(j * bond_op(a, b, 'Z'));
  if (g_field != 0.0)
    for (const auto& s : ambient) phi.add(g_field * site_op(s, 'X'));
  return phi;
}

Interaction heisenberg(const Region& ambient, double jx, double jy, double jz) {
  Interaction phi(ambient);
  for (const auto& [a, b] : nearest_neighbor_bonds(ambient)) {
    LocalOperator t = LocalOperator::zero(Region{a, b});
    if (jx != 0.0) t = t + jx * bond_op(a, b, 'X');
    if (jy != 0.0) t = t + jy * bond_op(a, b, 'Y');
    if (jz != 0.0) t = t + jz * bond_op(a, b, 'Z');
    if (op_norm(t) > 0.0) phi.add(t);
  }
  return phi;
}

namespace {

void collect_sets(const Region& ambient, std::size_t start, std::vector<Site>& cur, const RangeProfile& p,
                  const Metric& m, std::vector<Region>& out) {
  if (!cur.empty()) out.emplace_back(cur);
  if (static_cast<int>(cur.size()) == p.max_set_size) return;
  for (std::size_t i = start; i < ambient.size(); ++i) {
    const Site& s = ambient[i];
    const bool close = std::all_of(cur.begin(), cur.end(), [&](const Site& c) { return m(c, s) <= p.range; });
    if (!close) continue;
    cur.push_back(s);
    collect_sets(ambient, i + 1, cur, p, m, out);
    cur.pop_back();
  }
}

}  // namespace

Interaction random_short_range(const Region& ambient, std::uint64_t seed, const RangeProfile& profile) {
  if (profile.max_set_size < 1) throw OperatorError("random_short_range: max_set_size must be >= 1");
  Interaction raw(ambient);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.5, 1.0);
  std::vector<Region> sets;
  std::vector<Site> cur;
  collect_sets(ambient, 0, cur, profile, raw.metric(), sets);
  std::sort(sets.begin(), sets.end());
  for (const auto& x : sets) {
    const Eigen::Index n = hilbert_dim(x.size(), 2);
    LocalOperator t;
    if (profile.diagonal) {
      RealVector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
      t = LocalOperator::from_real_diagonal(x, v);
    } else {
      Matrix g(n, n);
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < n; ++r) g(r, c) = cplx(normal(rng), normal(rng));
      t = LocalOperator(x, Matrix(0.5 * (g + g.adjoint())));
    }
    const double nrm = op_norm(t);
    if (nrm == 0.0) continue;
    const double damp = std::exp(-profile.mu * diam(x, raw.metric()));
    raw.add((scale(rng) * damp / nrm) * t);
  }
  const double current = norm_lambda_mu(raw, profile.lambda, profile.mu);
  if (current == 0.0) return raw;
  return raw.scaled(profile.target_norm / current);
}

int degree(const Interaction& phi) {
  const auto s = phi.supports();
  int best = 0;
  for (const auto& x : s) {
    int c = 0;
    for (const auto& y : s)
      if (x.intersects(y)) ++c;
    best = std::max(best, c);
  }
  return best;
}

CommutingReport commuting_hypothesis_check(const Interaction& phi, int word_len_max,
                                           const std::vector<Region>& sample_ls, double tol,
                                           std::size_t word_cap) {
  if (word_len_max < 1) throw OperatorError("word_len_max must be >= 1");
  CommutingReport rep;
  std::vector<LocalOperator> family;
  std::vector<std::string> labels;
  std::vector<const LocalOperator*> gens;
  std::vector<std::string> gen_labels;
  for (const auto& [x, q] : phi.terms()) {
    family.push_back(q);
    labels.push_back("Phi_" + to_string(x));
    gens.push_back(&q);
    gen_labels.push_back(to_string(x));
  }
  for (const auto& l : sample_ls) {
    std::size_t produced = 0;
    std::vector<std::size_t> word;
    // Breadth-first over word length, lexicographic within a length.
    for (int len = 1; len <= word_len_max && produced < word_cap; ++len) {
      word.assign(static_cast<std::size_t>(len), 0);
      while (produced < word_cap && !gens.empty()) {
        LocalOperator prod = *gens[word[0]];
        std::string lab = "E_" + to_string(l) + "[" + gen_labels[word[0]];
        for (std::size_t k = 1; k < word.size(); ++k) {
          prod = mul(prod, *gens[word[k]]);
          lab += " " + gen_labels[word[k]];
        }
        family.push_back(cond_expectation(prod, l));
        labels.push_back(lab + "]");
        ++produced;
        std::size_t pos = word.size();
        while (pos > 0 && ++word[pos - 1] == gens.size()) word[--pos] = 0;
        if (pos == 0) break;
      }
      if (len < word_len_max && produced >= word_cap) rep.truncated = true;
    }
  }
  rep.family_size = family.size();
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = i + 1; j < family.size(); ++j) {
      if (family[i].is_diagonal() && family[j].is_diagonal()) continue;
      if (family[i].support().empty() || family[j].support().empty()) continue;
      const double c = op_norm(commutator(family[i], family[j]));
      if (c > rep.worst_commutator) {
        rep.worst_commutator = c;
        rep.witness = "[" + labels[i] + ", " + labels[j] + "]";
      }
    }
  rep.pass = rep.worst_commutator <= tol;
  return rep;
}

}  // namespace qgibbs
