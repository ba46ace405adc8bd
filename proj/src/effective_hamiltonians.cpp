#include "qgibbs/effective_hamiltonians.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qgibbs/gibbs.hpp"

namespace qgibbs {

namespace {

void require_positive_beta(double beta) {
  if (!(beta > 0)) throw EffectiveError("beta must be positive");
}

void require_inside(const Interaction& phi, const Region& lambda) {
  if (!phi.ambient().contains(lambda))
    throw EffectiveError("region " + to_string(lambda) + " is not inside the ambient region");
}

double max_entry(const LocalOperator& q) {
  if (q.is_diagonal()) return q.diagonal().size() ? q.diagonal().cwiseAbs().maxCoeff() : 0.0;
  return q.dense().size() ? q.dense().cwiseAbs().maxCoeff() : 0.0;
}

// e^{-beta (H - E0)} for H = H_lambda, with E0 its ground energy.
std::pair<LocalOperator, double> shifted_boltzmann(const Interaction& phi, const Region& lambda, double beta) {
  const LocalOperator h = hamiltonian(phi, lambda);
  const double e0 = eigensystem(h).values(0);
  const LocalOperator shifted = h - e0 * LocalOperator::identity(h.support(), phi.local_dim());
  return {herm_exp(shifted, -beta), e0};
}

LocalOperator finish_log(const LocalOperator& m, double beta, double e0, int d) {
  return cplx(-1.0 / beta) * herm_log(m) + e0 * LocalOperator::identity(m.support(), d);
}

// Runs f(i) for i in [0, n) over a few worker threads, rethrowing the first failure.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 8));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto run = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::string construction_name(Construction c) {
  switch (c) {
    case Construction::Mobius: return "mobius";
    case Construction::Cluster: return "cluster";
    case Construction::Direct: return "direct";
  }
  return "direct";
}

std::string convention_name(Convention c) { return c == Convention::Log ? "log" : "hamiltonian"; }

LocalOperator EffectiveInteraction::sum(const Region& lambda) const {
  const Region target = kept.intersect(lambda);
  LocalOperator total = LocalOperator::zero(target, local_dim);
  for (const auto& [x, q] : terms)
    if (lambda.contains(x)) total = total + embed(q, target);
  return total;
}

EffectiveInteraction EffectiveInteraction::as(Convention target) const {
  if (target == convention) return *this;
  if (beta == 0.0) throw EffectiveError("cannot change convention at beta = 0");
  const double f = target == Convention::Log ? -beta : -1.0 / beta;
  EffectiveInteraction out = *this;
  out.convention = target;
  for (auto& [x, q] : out.terms) q *= cplx(f);
  for (auto& [x, v] : out.truncation) v *= std::abs(f);
  out.truncation_estimate *= std::abs(f);
  return out;
}

double EffectiveInteraction::norm_b(const SubadditiveWeight& b) const {
  std::vector<std::pair<const Region*, double>> weighted;
  for (const auto& [x, q] : terms) weighted.emplace_back(&x, op_norm(q) * std::exp(b(x)));
  double best = 0.0;
  for (const Site& s : ambient) {
    double acc = 0.0;
    for (const auto& [x, w] : weighted)
      if (x->contains(s)) acc += w;
    best = std::max(best, acc);
  }
  return best;
}

LocalOperator EffectiveInteraction::term(const Region& x) const {
  const auto it = terms.find(x);
  return it != terms.end() ? it->second : LocalOperator::zero(x.intersect(kept), local_dim);
}

WeakEffectiveHamiltonian weak_effective(const Interaction& phi, const Region& lambda, const Region& l, double beta) {
  require_positive_beta(beta);
  require_inside(phi, lambda);
  const auto [e, e0] = shifted_boltzmann(phi, lambda, beta);
  const Region rest = lambda.minus(l);
  WeakEffectiveHamiltonian w;
  w.lambda = lambda;
  w.kept = lambda.intersect(l);
  w.beta = beta;
  w.log_z_rest = log_partition(phi, rest, beta);
  const LocalOperator marginal = partial_trace(e, rest);
  w.h = finish_log(marginal, beta, e0, phi.local_dim()) +
        (w.log_z_rest / beta) * LocalOperator::identity(marginal.support(), phi.local_dim());
  return w;
}

LocalOperator strong_marginal_log(const Interaction& phi, const Region& lambda, const Region& l, double beta) {
  require_positive_beta(beta);
  require_inside(phi, lambda);
  if (lambda.empty()) return LocalOperator::zero(Region{}, phi.local_dim());
  const auto [e, e0] = shifted_boltzmann(phi, lambda, beta);
  return finish_log(cond_expectation(e, l), beta, e0, phi.local_dim());
}

EffectiveInteraction mobius_effective(const Interaction& phi, const Region& l, double beta, const Region& lambda,
                                      double drop_tol) {
  require_positive_beta(beta);
  require_inside(phi, lambda);
  if (lambda.size() > kMobiusMaxSites) {
    std::ostringstream os;
    os << "mobius_effective: " << lambda.size() << " sites exceed the subset cap of " << kMobiusMaxSites;
    throw EffectiveError(os.str());
  }
  const std::size_t n = lambda.size();
  const std::size_t count = std::size_t{1} << n;
  std::vector<LocalOperator> f(count);
  parallel_for(count, [&](std::size_t m) { f[m] = strong_marginal_log(phi, lambda.subset(m), l, beta); });

  // In-place Mobius transform over the subset lattice.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t m = 0; m < count; ++m)
      if (m & bit) f[m] = f[m] - f[m ^ bit];
  }

  EffectiveInteraction e;
  e.ambient = lambda;
  e.kept = l;
  e.beta = beta;
  e.local_dim = phi.local_dim();
  e.construction = Construction::Mobius;
  e.convention = Convention::Hamiltonian;
  for (std::size_t m = 1; m < count; ++m) {
    if (max_entry(f[m]) <= drop_tol) continue;
    const Region x = lambda.subset(m);
    e.terms.emplace(x, embed(f[m], x.intersect(l)));
  }
  return e;
}

EffectiveInteraction cluster_effective(const Interaction& phi, const Region& l, double beta,
                                       const ClusterOptions& opts) {
  if (opts.m_max < 1 || opts.m_max > kUrsellMaxOrder)
    throw EffectiveError("cluster_effective: m_max must lie in [1, 7]");
  const PolymerModel model(phi, l, beta, opts.k_max, opts.cap);
  if (opts.certify) {
    const KpReport kp = kp_condition_check(model, opts.a, opts.b);
    if (!kp.pass()) {
      std::ostringstream os;
      os << "outside certified beta regime: beta = " << beta << ", worst ratio "
         << std::max(kp.worst_ii_ratio, kp.worst_aux_ratio);
      throw EffectiveError(os.str());
    }
  }

  const auto& ps = model.polymers();
  const int d = phi.local_dim();
  std::vector<std::map<std::uint64_t, LocalOperator>> by_order(static_cast<std::size_t>(opts.k_max) + 1);
  std::vector<std::size_t> chosen;
  std::size_t visited = 0;

  auto connected = [&]() {
    const std::size_t n = chosen.size();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < n; ++j)
        if (!seen[j] && (ps[chosen[i]].index.mask & ps[chosen[j]].index.mask)) {
          seen[j] = true;
          stack.push_back(j);
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
  };

  // Clusters as multisets of polymers; an ordered tuple sum over the same
  // polymers contributes n!/prod(mult!) times phi, and phi carries 1/n!.
  auto rec = [&](auto&& self, std::size_t start, int order, std::uint64_t mask, const LocalOperator& prod) -> void {
    if (!chosen.empty() && connected()) {
      const std::size_t n = chosen.size();
      std::vector<std::vector<bool>> ov(n, std::vector<bool>(n, false));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ov[i][j] = (ps[chosen[i]].index.mask & ps[chosen[j]].index.mask) != 0;
      const long long gsum = connected_graph_sum(ov);
      int mult = 1, run = 1;
      for (std::size_t i = 1; i < n; ++i) {
        run = chosen[i] == chosen[i - 1] ? run + 1 : 1;
        mult *= run;
      }
      if (gsum != 0) {
        auto& slot = by_order[static_cast<std::size_t>(order)];
        const LocalOperator contrib = cplx(static_cast<double>(gsum) / mult) * prod;
        auto it = slot.find(mask);
        if (it == slot.end())
          slot.emplace(mask, contrib);
        else
          it->second = it->second + contrib;
      }
    }
    if (static_cast<int>(chosen.size()) == opts.m_max) return;
    for (std::size_t i = start; i < ps.size(); ++i) {
      if (order + ps[i].order > opts.k_max) continue;
      if (++visited > opts.cap) throw EffectiveError("cluster_effective: cluster cap exceeded");
      chosen.push_back(i);
      self(self, i, order + ps[i].order, mask | ps[i].index.mask,
           chosen.size() == 1 ? ps[i].weight : mul(prod, ps[i].weight));
      chosen.pop_back();
    }
  };
  rec(rec, 0, 0, 0, LocalOperator::identity(Region{}, d));

  EffectiveInteraction e;
  e.ambient = phi.ambient();
  e.kept = l;
  e.beta = beta;
  e.local_dim = d;
  e.construction = Construction::Cluster;
  e.convention = Convention::Log;
  std::map<std::uint64_t, LocalOperator> acc;
  for (const auto& level : by_order)
    for (const auto& [mask, q] : level) {
      auto it = acc.find(mask);
      if (it == acc.end())
        acc.emplace(mask, q);
      else
        it->second = it->second + q;
    }
  // The last order with any nonzero contribution sets the truncation estimate.
  for (auto lvl = by_order.rbegin(); lvl != by_order.rend(); ++lvl) {
    double top = 0.0;
    std::map<Region, double> per;
    for (const auto& [mask, q] : *lvl) {
      const double v = op_norm(q);
      per[model.region_of(mask)] = v;
      top = std::max(top, v);
    }
    if (top > 0.0) {
      e.truncation = std::move(per);
      e.truncation_estimate = top;
      break;
    }
  }
  for (const auto& [mask, q] : acc) {
    const Region x = model.region_of(mask);
    e.terms.emplace(x, embed(q, x.intersect(l)));
  }
  return e;
}

LocalOperator weak_from_strong(const EffectiveInteraction& e, const Region& lambda) {
  const EffectiveInteraction h = e.as(Convention::Hamiltonian);
  const Region target = h.kept.intersect(lambda);
  LocalOperator total = LocalOperator::zero(target, h.local_dim);
  for (const auto& [x, q] : h.terms)
    if (lambda.contains(x) && x.intersects(h.kept)) total = total + embed(q, target);
  return total;
}

double support_defect(const EffectiveInteraction& e) {
  double worst = 0.0;
  for (const auto& [x, q] : e.terms) worst = std::max(worst, support_residual(q, x.intersect(e.kept)));
  return worst;
}

double consistency_defect(const EffectiveInteraction& e1, const EffectiveInteraction& e2) {
  const EffectiveInteraction other = e2.as(e1.convention);
  std::set<Region> keys;
  for (const auto& [x, q] : e1.terms) keys.insert(x);
  for (const auto& [x, q] : other.terms) keys.insert(x);
  double worst = 0.0;
  for (const Region& x : keys)
    if (x.intersect(e1.kept) == x.intersect(other.kept))
      worst = std::max(worst, op_norm_diff(e1.term(x), other.term(x)));
  return worst;
}

double telescoping_residual(const EffectiveInteraction& e, const Interaction& phi) {
  const EffectiveInteraction h = e.as(Convention::Hamiltonian);
  return op_norm_diff(h.sum(h.ambient), strong_marginal_log(phi, h.ambient, h.kept, h.beta));
}

double exponential_threshold(const Interaction& phi, double eps, const SubadditiveWeight& b) {
  const double n_eps = norm_b(phi, SubadditiveWeight::sum(SubadditiveWeight::linear(eps, 0.0, phi.metric()), b));
  return n_eps > 0 ? eps / (2 * n_eps) : kInfiniteDistance;
}

double finite_degree_threshold(const Interaction& phi, const SubadditiveWeight& b) {
  const double nb = norm_b(phi, b);
  const double deg = degree(phi);
  return nb > 0 ? 1.0 / (deg * (1 + deg) * std::exp(2.0) * nb) : kInfiniteDistance;
}

DecayReport decay_certificates(const Interaction& phi, double eps, const SubadditiveWeight& b, const Region& l,
                               int k_max, double fraction, int sweep_points) {
  if (!(eps > 0)) throw EffectiveError("decay_certificates: eps must be positive");
  if (!(fraction > 0 && fraction <= 1)) throw EffectiveError("decay_certificates: fraction must lie in (0, 1]");
  DecayReport r;
  auto build = [&](double beta, const SubadditiveWeight& a) {
    ClusterOptions o;
    o.k_max = k_max;
    o.m_max = std::min(k_max, kUrsellMaxOrder);
    o.a = a;
    o.b = b;
    return cluster_effective(phi, l, beta, o);
  };

  DecayCertificate& ex = r.exponential;
  ex.name = "exponential";
  ex.limit = eps / 2;
  ex.strict = true;
  ex.threshold = exponential_threshold(phi, eps, b);
  ex.beta = std::isfinite(ex.threshold) ? fraction * ex.threshold : 1.0;
  const SubadditiveWeight a_eps = SubadditiveWeight::linear(eps / 2, 0.0, phi.metric());
  {
    const EffectiveInteraction e = build(ex.beta, a_eps);
    ex.norm = e.norm_b(b);
    ex.truncation = e.truncation_estimate;
  }

  DecayCertificate& fd = r.finite_degree;
  fd.name = "finite_degree";
  fd.limit = 1.0;
  fd.threshold = finite_degree_threshold(phi, b);
  fd.beta = std::isfinite(fd.threshold) ? fraction * fd.threshold : 1.0;
  {
    const EffectiveInteraction e = build(fd.beta, SubadditiveWeight::constant(1.0));
    fd.norm = e.norm_b(b);
    fd.truncation = e.truncation_estimate;
  }

  const double top = std::min(ex.threshold, fd.threshold);
  if (std::isfinite(top) && sweep_points > 0) {
    const SubadditiveWeight a = fd.threshold <= ex.threshold ? SubadditiveWeight::constant(1.0) : a_eps;
    double prev = -1.0;
    for (int i = 1; i <= sweep_points; ++i) {
      const double beta = fraction * top * i / sweep_points;
      const double v = build(beta, a).norm_b(b);
      r.sweep.emplace_back(beta, v);
      if (v < prev) r.monotone = false;
      prev = v;
    }
  }
  return r;
}

nlohmann::json to_json(const EffectiveInteraction& e) {
  auto region_json = [](const Region& r) {
    nlohmann::json out = nlohmann::json::array();
    for (const Site& s : r) out.push_back(s.coords);
    return out;
  };
  nlohmann::json j;
  j["construction"] = construction_name(e.construction);
  j["convention"] = convention_name(e.convention);
  j["beta"] = e.beta;
  j["local_dim"] = e.local_dim;
  j["kept"] = region_json(e.kept);
  j["ambient"] = region_json(e.ambient);
  j["truncation_estimate"] = e.truncation_estimate;
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [x, q] : e.terms) {
    nlohmann::json t;
    t["sites"] = region_json(x);
    t["support"] = region_json(q.support());
    const Matrix m = q.matrix();
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
    t["matrix"] = std::move(entries);
    t["norm"] = op_norm(q);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

EffectiveInteraction effective_from_json(const nlohmann::json& j) {
  auto region = [](const nlohmann::json& a) {
    std::vector<Site> sites;
    for (const auto& s : a) sites.emplace_back(s.get<std::vector<int>>());
    return Region(std::move(sites));
  };
  EffectiveInteraction e;
  const std::string c = j.at("construction").get<std::string>();
  e.construction = c == "mobius" ? Construction::Mobius : c == "cluster" ? Construction::Cluster : Construction::Direct;
  e.convention = j.at("convention").get<std::string>() == "log" ? Convention::Log : Convention::Hamiltonian;
  e.beta = j.at("beta").get<double>();
  e.local_dim = j.at("local_dim").get<int>();
  e.kept = region(j.at("kept"));
  e.ambient = region(j.at("ambient"));
  e.truncation_estimate = j.value("truncation_estimate", 0.0);
  for (const auto& t : j.at("terms")) {
    const Region support = region(t.at("support"));
    const Eigen::Index dim = hilbert_dim(support.size(), e.local_dim);
    const auto& entries = t.at("matrix");
    if (static_cast<Eigen::Index>(entries.size()) != dim * dim) throw EffectiveError("term matrix has the wrong size");
    Matrix m(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index col = 0; col < dim; ++col) {
        const auto& p = entries[static_cast<std::size_t>(r * dim + col)];
        m(r, col) = cplx(p.at(0).get<double>(), p.at(1).get<double>());
      }
    LocalOperator q(support, m, e.local_dim);
    if (auto diag = q.try_diagonal(0.0)) q = *diag;
    e.terms.emplace(region(t.at("sites")), std::move(q));
  }
  return e;
}

}  // namespace qgibbs
