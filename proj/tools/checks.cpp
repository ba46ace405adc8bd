#include "checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qgibbs/expansionals.hpp"
#include "qgibbs/gibbs.hpp"
#include "qgibbs/polymers.hpp"
#include "qgibbs/qbp.hpp"

namespace qgibbs::cli {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kRoundoff = 1e-12;

Interaction window_model(const ExperimentConfig& cfg) {
  return cfg.model.build(Region::chain(std::min(cfg.window, cfg.model.sites)));
}

CheckResult from_bound(const std::string& id, const BoundReport& b, const Interaction& phi, double beta,
                       double dist = kNan) {
  CheckResult r;
  r.id = id;
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = dist;
  r.lhs = b.lhs;
  r.rhs = b.rhs;
  r.margin = b.margin;
  r.params = b.params;
  r.status = b.holds(kBoundTol) ? status::kPass : status::kFail;
  if (!b.regions.empty()) r.note = b.regions;
  return r;
}

CheckResult tolerance_result(const std::string& id, double value, double tol, const Interaction& phi, double beta) {
  CheckResult r;
  r.id = id;
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = kNan;
  r.lhs = value;
  r.rhs = tol;
  r.margin = tol - value;
  r.status = value <= tol ? status::kPass : status::kFail;
  return r;
}

CheckResult skipped(const std::string& id, const Interaction& phi, double beta, const std::string& status,
                    const std::string& note) {
  CheckResult r;
  r.id = id;
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = r.lhs = r.rhs = r.margin = kNan;
  r.status = status;
  r.note = note;
  return r;
}

template <class F>
std::vector<CheckResult> in_regime(const std::string& id, const Interaction& phi, double beta, F&& f) {
  try {
    return f();
  } catch (const RegimeError& e) {
    return {skipped(id, phi, beta, status::kOutOfRegime, e.what())};
  } catch (const PolymerError& e) {
    return {skipped(id, phi, beta, status::kOutOfRegime, e.what())};
  }
}

LocalOperator pauli(char which, const Site& s) {
  switch (which) {
    case 'X': return pauli_x(s);
    case 'Y': return pauli_y(s);
    default: return pauli_z(s);
  }
}

// Split of the window into three consecutive blocks.
struct Blocks {
  Region a, b, c;
};

Blocks blocks(int n) {
  const int na = std::max(1, n / 3);
  const int nb = std::max(1, (n - na) / 2);
  Blocks out;
  out.a = Region::interval(0, na - 1);
  out.b = Region::interval(na, na + nb - 1);
  out.c = na + nb <= n - 1 ? Region::interval(na + nb, n - 1) : Region{};
  return out;
}

Rational brute_ursell(const std::vector<Multiset>& g) {
  const int m = static_cast<int>(g.size());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) edges.emplace_back(i, j);
  long long total = 0;
  for (std::uint64_t sub = 0; sub < (std::uint64_t{1} << edges.size()); ++sub) {
    long long prod = 1;
    std::vector<int> parent(m);
    for (int i = 0; i < m; ++i) parent[i] = i;
    auto root = [&](int x) {
      while (parent[x] != x) x = parent[x];
      return x;
    };
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (!(sub >> e & 1)) continue;
      const auto [i, j] = edges[e];
      prod *= overlaps(g[i], g[j]) ? -1 : 0;
      parent[root(i)] = root(j);
    }
    int comps = 0;
    for (int i = 0; i < m; ++i) comps += root(i) == i;
    if (comps == 1) total += prod;
  }
  long long fact = 1;
  for (int i = 2; i <= m; ++i) fact *= i;
  return Rational(total, fact);
}

std::vector<CheckResult> run_mixing_strong(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = cfg.model.build();
  return {check_mixing_strong(phi, cfg.a, cfg.c, beta, cfg.lambda, cfg.mu)};
}

std::vector<CheckResult> run_mixing_weak(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = cfg.model.build();
  return {check_mixing_weak(phi, cfg.a, cfg.b, cfg.c, beta, cfg.lambda, cfg.mu)};
}

std::vector<CheckResult> run_kappa_decay(const ExperimentConfig& cfg, double beta) {
  const ModelSpec spec = cfg.model;
  return {check_kappa_decay([&](const Region& r) { return spec.build(r); }, beta, cfg.sweep, cfg.threads)};
}

std::vector<CheckResult> run_local_indist(const ExperimentConfig& cfg, double beta) {
  const ModelSpec spec = cfg.model;
  CheckResult r = check_local_indist([&](const Region& x) { return spec.build(x); }, beta, cfg.sweep,
                                     pauli(cfg.observable, Site{0}), cfg.threads);
  return {r};
}

std::vector<CheckResult> run_hierarchy(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = cfg.model.build();
  return {check_hierarchy_sweep(phi, beta, cfg.hierarchy_a, cfg.hierarchy_cs, cfg.seed, cfg.threads).result};
}

std::vector<CheckResult> run_duhamel(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  const int n = static_cast<int>(phi.ambient().size());
  const Region x = Region::interval(0, n / 2 - 1), y = Region::interval(n / 2, n - 1);
  const double err = op_norm_diff(duhamel_oracle(phi, x, y, beta, 2000), expansional(phi, x, y, beta).op);
  CheckResult r = tolerance_result("duhamel", err, 1e-8, phi, beta);
  r.params["steps"] = 2000;
  return {r};
}

std::vector<CheckResult> run_expansional_bounds(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  return in_regime("expansional_bounds", phi, beta, [&] {
    const Blocks bl = blocks(static_cast<int>(phi.ambient().size()));
    std::vector<CheckResult> out;
    out.push_back(from_bound("expansional_norm", expansional_bound_check(phi, bl.a, bl.b.unite(bl.c), beta,
                                                                         cfg.lambda, cfg.mu),
                             phi, beta));
    if (!bl.c.empty())
      out.push_back(from_bound("expansional_difference",
                               expansional_diff_bound_check(phi, bl.a, bl.b, bl.c, beta, cfg.lambda, cfg.mu), phi,
                               beta));
    out.push_back(from_bound("trace_inverse_expansional",
                             trace_inverse_expansional_check(phi, bl.a, bl.b.unite(bl.c), beta, cfg.lambda, cfg.mu),
                             phi, beta));
    return out;
  });
}

std::vector<CheckResult> run_locality_bounds(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  return in_regime("locality_bounds", phi, beta, [&] {
    const int n = static_cast<int>(phi.ambient().size());
    const Region y = Region::interval(0, std::max(0, n - 2));
    const LocalOperator q = pauli_z(Site{0});
    const double s = 0.5 * std::min(beta, analyticity_radius(phi, cfg.lambda, cfg.mu));
    const auto [evolved, diff] = locality_bound_check(phi, q, y, phi.ambient(), cplx(0.0, s), cfg.lambda, cfg.mu);
    return std::vector<CheckResult>{from_bound("time_evolution_norm", evolved, phi, beta),
                                    from_bound("time_evolution_difference", diff, phi, beta)};
  });
}

std::vector<CheckResult> run_qbp(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = cfg.model.build(Region::chain(std::min(cfg.window, std::min(cfg.model.sites, 5))));
  const LocalOperator w = 0.5 * pauli_z(Site{0});
  const StatePathReport rep = state_path_check(phi, phi.ambient(), w, beta, 1.0, 400);
  std::vector<CheckResult> out;
  for (const BoundReport* b : {&rep.trace_distance, &rep.eta_norm, &rep.eta_tilde_norm})
    out.push_back(from_bound(b->id, *b, phi, beta));
  out.push_back(tolerance_result("qbp_factorization", rep.factorization_residual, 1e-7, phi, beta));
  return out;
}

std::vector<CheckResult> run_effective_properties(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  const Region& lambda = phi.ambient();
  const Region l1 = Region::interval(0, 1), l2 = Region::interval(0, 2);
  const EffectiveInteraction e1 = mobius_effective(phi, l1, beta, lambda);
  const EffectiveInteraction e2 = mobius_effective(phi, l2, beta, lambda);
  std::vector<CheckResult> out;
  out.push_back(tolerance_result("effective_support", std::max(support_defect(e1), support_defect(e2)), 1e-9, phi,
                                 beta));
  out.push_back(tolerance_result("effective_consistency", consistency_defect(e1, e2), 1e-9, phi, beta));
  out.push_back(tolerance_result("effective_telescoping",
                                 std::max(telescoping_residual(e1, phi), telescoping_residual(e2, phi)), 1e-9, phi,
                                 beta));
  double inside = 0.0;
  for (const auto& [x, q] : phi.terms())
    if (l2.contains(x)) inside = std::max(inside, op_norm_diff(e2.term(x), q));
  out.push_back(tolerance_result("effective_inside_l", inside, 1e-9, phi, beta));
  const WeakEffectiveHamiltonian weak = weak_effective(phi, lambda, l1, beta);
  out.push_back(tolerance_result("effective_weak", op_norm_diff(weak_from_strong(e1, lambda), weak.h), 1e-8, phi,
                                 beta));
  return out;
}

std::vector<CheckResult> run_cluster_vs_mobius(const ExperimentConfig& cfg, double) {
  const Interaction phi = cfg.model.build(Region::chain(std::min(cfg.window, std::min(cfg.model.sites, 6))));
  const double beta = 0.5 * finite_degree_threshold(phi, SubadditiveWeight::zero());
  if (!phi.is_diagonal())
    return {skipped("cluster_vs_mobius", phi, beta, status::kOutOfRegime, "cluster expansion needs commuting terms")};
  if (!std::isfinite(beta)) return {skipped("cluster_vs_mobius", phi, 0.0, status::kPass, "zero interaction")};
  return in_regime("cluster_vs_mobius", phi, beta, [&] {
    ClusterOptions opts;
    opts.k_max = 5;
    opts.m_max = 4;
    const Region l = Region::interval(0, 1);
    const EffectiveInteraction c = cluster_effective(phi, l, beta, opts);
    const EffectiveInteraction m = mobius_effective(phi, l, beta, phi.ambient()).as(Convention::Log);
    double worst = 0.0;
    for (const auto& [x, q] : m.terms) worst = std::max(worst, op_norm_diff(q, c.term(x)));
    for (const auto& [x, q] : c.terms) worst = std::max(worst, op_norm_diff(q, m.term(x)));
    // Both constructions carry roundoff from matrix logarithms; below
    // kRoundoff the comparison says nothing.
    CheckResult r = tolerance_result("cluster_vs_mobius", worst, c.truncation_estimate + kRoundoff, phi, beta);
    r.params["truncation_estimate"] = c.truncation_estimate;
    std::vector<CheckResult> out{r};
    out.push_back(tolerance_result("cluster_truncation", c.truncation_estimate, 1e-4, phi, beta));
    return out;
  });
}

std::vector<CheckResult> run_decay_certificates(const ExperimentConfig& cfg, double) {
  const Interaction phi = cfg.model.build(Region::chain(std::min(cfg.window, std::min(cfg.model.sites, 5))));
  if (!phi.is_diagonal())
    return {skipped("decay_certificates", phi, 0.0, status::kOutOfRegime, "cluster expansion needs commuting terms")};
  const DecayReport rep =
      decay_certificates(phi, 1.0, SubadditiveWeight::linear(0.2, 0.1, phi.metric()), Region::interval(0, 1), 3);
  std::vector<CheckResult> out;
  for (const DecayCertificate* d : {&rep.exponential, &rep.finite_degree}) {
    CheckResult r;
    r.id = "decay_" + d->name;
    r.model_hash = model_hash(phi);
    r.beta = d->beta;
    r.dist = kNan;
    r.lhs = d->norm;
    r.rhs = d->limit;
    r.margin = d->limit - d->norm;
    r.params = {{"threshold", d->threshold}, {"truncation", d->truncation}};
    r.status = d->pass() ? status::kPass : status::kFail;
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> run_ursell(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  std::vector<Multiset> pool;
  for (const Region& x : phi.supports()) {
    pool.push_back(Multiset{x});
    if (pool.size() >= 4) break;
  }
  if (pool.size() >= 2) pool.push_back(Multiset{pool[0].elements()[0], pool[1].elements()[0]});
  double worst = 0.0;
  std::size_t tried = 0;
  // Every tuple of length <= 4 drawn from the pool.
  for (int m = 1; m <= 4; ++m) {
    std::vector<std::size_t> idx(m, 0);
    while (true) {
      std::vector<Multiset> g;
      for (std::size_t i : idx) g.push_back(pool[i]);
      const Rational diff = ursell(g) - brute_ursell(g);
      worst = std::max(worst, std::abs(boost::rational_cast<double>(diff)));
      ++tried;
      int k = m - 1;
      while (k >= 0 && ++idx[k] == pool.size()) idx[k--] = 0;
      if (k < 0) break;
    }
  }
  const Region r0{Site{0}};
  const Rational triple = ursell({Multiset{r0}, Multiset{r0}, Multiset{r0}});
  CheckResult r = tolerance_result("ursell", worst, 0.0, phi, beta);
  r.params = {{"tuples", static_cast<double>(tried)}, {"triple", boost::rational_cast<double>(triple)}};
  if (triple != Rational(1, 3)) {
    r.status = status::kFail;
    r.note = "pairwise-overlapping triple is not 1/3";
  }
  return {r};
}

std::vector<CheckResult> run_polymer_counting(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  const std::vector<Region> family = phi.supports();
  CheckResult r;
  r.id = "polymer_counting";
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = kNan;
  r.status = status::kPass;
  if (family.empty()) {
    r.lhs = r.rhs = r.margin = 0.0;
    return {r};
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 4; ++k) {
    const PolymerCount c = count_polymers_containing(family.front(), k, family);
    r.samples.push_back({static_cast<double>(k), static_cast<double>(c.count), c.bound,
                         c.bound - static_cast<double>(c.count), status::kSample});
    if (c.bound - static_cast<double>(c.count) < worst) {
      worst = c.bound - static_cast<double>(c.count);
      r.lhs = static_cast<double>(c.count);
      r.rhs = c.bound;
    }
    if (!c.holds()) r.status = status::kFail;
  }
  r.margin = worst;
  r.params["degree"] = family_degree(family);
  return {r};
}

std::vector<CheckResult> run_inequality_chain(const ExperimentConfig& cfg, double beta) {
  const Interaction phi = window_model(cfg);
  const Region& lambda = phi.ambient();
  const GibbsEnsemble ens(phi, lambda, beta);
  const Region a{lambda.sites().front()}, c{lambda.sites().back()};
  const InequalityChain ch = inequality_chain(ens, a, c);
  CheckResult pinsker;
  pinsker.id = "pinsker";
  pinsker.model_hash = model_hash(phi);
  pinsker.beta = beta;
  pinsker.dist = dist(a, c, phi.metric());
  pinsker.lhs = 0.5 * ch.trace_distance * ch.trace_distance;
  pinsker.rhs = ch.mutual_information;
  pinsker.margin = pinsker.rhs - pinsker.lhs;
  pinsker.status = ch.pinsker_holds ? status::kPass : status::kFail;
  CheckResult cov = pinsker;
  cov.id = "covariance_trace_distance";
  cov.lhs = ch.covariance_lower;
  cov.rhs = ch.trace_distance;
  cov.margin = cov.rhs - cov.lhs;
  cov.status = ch.covariance_holds ? status::kPass : status::kFail;
  return {pinsker, cov};
}

std::vector<CheckSpec> build_registry() {
  return {
      {"mixing_strong", "mixing norm against the strong effective Hamiltonian bound",
       {"mobius_effective", "norm_lambda_mu", "boundary_exponential_sum", "mixing_norm"}, false, run_mixing_strong},
      {"mixing_weak", "mixing norm against the weak bound with |kappa - 1|",
       {"mobius_effective", "weak_effective", "kappa", "mixing_norm"}, false, run_mixing_weak},
      {"kappa_decay", "decay of |kappa_ABC - 1| in dist(A, C)", {"kappa", "fit_decay"}, true, run_kappa_decay},
      {"local_indist", "decay of local indistinguishability in the shield width",
       {"local_indistinguishability", "fit_decay"}, true, run_local_indist},
      {"hierarchy_sweep", "mixing, mutual information and covariance against distance",
       {"mixing_norm", "mutual_information", "covariance", "inequality_chain", "fit_decay"}, true, run_hierarchy},
      {"duhamel", "expansional against the Duhamel ODE oracle", {"expansional", "duhamel_oracle"}, false,
       run_duhamel},
      {"expansional_bounds", "norm, difference and trace-inverse bounds on expansionals",
       {"expansional_bound_check", "expansional_diff_bound_check", "trace_inverse_expansional_check"}, false,
       run_expansional_bounds},
      {"locality_bounds", "complex-time evolution bounds",
       {"time_evolution", "locality_bound_check", "analyticity_radius"}, false, run_locality_bounds},
      {"qbp", "belief propagation intertwiner and state path bounds", {"eta", "generator", "state_path_check"},
       false, run_qbp},
      {"effective_properties", "support, consistency and telescoping of the Mobius interaction",
       {"mobius_effective", "weak_effective", "support_defect", "consistency_defect", "telescoping_residual"}, false,
       run_effective_properties},
      {"cluster_vs_mobius", "cluster expansion against Mobius inversion",
       {"cluster_effective", "kp_condition_check", "ursell", "weight", "mobius_effective"}, false,
       run_cluster_vs_mobius},
      {"decay_certificates", "decay of the cluster interaction inside the computed thresholds",
       {"decay_certificates", "cluster_effective"}, false, run_decay_certificates},
      {"ursell", "Ursell function against a brute-force graph sum", {"ursell", "connected_graph_sum"}, false,
       run_ursell},
      {"polymer_counting", "polymer counts against (e d)^k", {"count_polymers_containing", "family_degree"}, false,
       run_polymer_counting},
      {"inequality_chain", "Pinsker and covariance inequalities",
       {"inequality_chain", "mutual_information", "covariance"}, false, run_inequality_chain},
  };
}

}  // namespace

const std::vector<CheckSpec>& registry() {
  static const std::vector<CheckSpec> r = build_registry();
  return r;
}

const CheckSpec& find_check(const std::string& id) {
  for (const CheckSpec& c : registry())
    if (c.id == id) return c;
  throw ConfigError("unknown check '" + id + "'");
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const CheckSpec& c : registry()) out.push_back(c.id);
    return out;
  }();
  return names;
}

std::vector<std::string> default_checks(bool sweep_only) {
  std::vector<std::string> out;
  for (const CheckSpec& c : registry())
    if (!sweep_only || c.sweep) out.push_back(c.id);
  return out;
}

}  // namespace qgibbs::cli
