#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "qgibbs/effective_hamiltonians.hpp"
#include "qgibbs/gibbs.hpp"

using namespace qgibbs;

namespace {

Interaction decoupled_ising(int n, int cut, double j, double h) {
  Interaction phi(Region::chain(n));
  const Interaction left = ising(Region::interval(0, cut - 1), j, h);
  const Interaction right = ising(Region::interval(cut, n - 1), j, h);
  for (const auto& [x, q] : left.terms()) phi.add(q);
  for (const auto& [x, q] : right.terms()) phi.add(q);
  return phi;
}

// Naive Mobius sum, one subset at a time.
LocalOperator mobius_term_naive(const Interaction& phi, const Region& l, double beta, const Region& x) {
  LocalOperator acc = LocalOperator::zero(x.intersect(l));
  const std::uint64_t full = (std::uint64_t{1} << x.size()) - 1;
  for (std::uint64_t m = 0; m <= full; ++m) {
    const Region y = x.subset(m);
    const int sign = (x.size() - y.size()) % 2 ? -1 : 1;
    acc = acc + embed(cplx(sign) * strong_marginal_log(phi, y, l, beta), x.intersect(l));
  }
  return acc;
}

double half_finite_degree_threshold(const Interaction& phi) {
  const double deg = degree(phi);
  return 0.5 / (deg * (1 + deg) * std::exp(2.0) * norm_b(phi, SubadditiveWeight::zero()));
}

}  // namespace

TEST_CASE("weak effective Hamiltonian") {
  const double beta = 0.6;
  const Region l = Region::interval(0, 2);
  const Interaction split = decoupled_ising(6, 3, 0.8, 0.3);
  const WeakEffectiveHamiltonian w = weak_effective(split, split.ambient(), l, beta);
  CHECK(w.h.support() == l);
  CHECK(op_norm_diff(w.h, hamiltonian(split, l)) < 1e-12);

  const Interaction phi = ising(Region::chain(6), 1.0, 0.4);
  const WeakEffectiveHamiltonian all = weak_effective(phi, phi.ambient(), phi.ambient(), beta);
  CHECK(all.log_z_rest == 0.0);
  CHECK(op_norm_diff(all.h, hamiltonian(phi, phi.ambient())) < 1e-12);

  // rho_L = e^{-beta H^} Z_{Lambda\L} / Z_Lambda.
  const WeakEffectiveHamiltonian r = weak_effective(phi, phi.ambient(), l, beta);
  const LocalOperator boltz = herm_exp(hamiltonian(phi, phi.ambient()), -beta);
  const LocalOperator rho_l = cplx(1.0 / boltz.trace().real()) * partial_trace(boltz, Region::interval(3, 5));
  const double factor = std::exp(r.log_z_rest - log_partition(phi, phi.ambient(), beta));
  CHECK(op_norm_diff(rho_l, cplx(factor) * herm_exp(r.h, -beta)) < 1e-9);
  CHECK(r.h.is_hermitian());

  const Interaction tf = tfim(Region::chain(4), 1.0, 0.7);
  const WeakEffectiveHamiltonian q = weak_effective(tf, tf.ambient(), Region::interval(1, 2), beta);
  const LocalOperator bq = herm_exp(hamiltonian(tf, tf.ambient()), -beta);
  const LocalOperator rq = cplx(1.0 / bq.trace().real()) * partial_trace(bq, Region{Site{0}, Site{3}});
  CHECK(op_norm_diff(rq, cplx(std::exp(q.log_z_rest - log_partition(tf, tf.ambient(), beta))) *
                             herm_exp(q.h, -beta)) < 1e-9);

  CHECK_THROWS_AS(weak_effective(phi, phi.ambient(), l, 0.0), EffectiveError);
  CHECK_THROWS_AS(weak_effective(phi, Region::chain(7), l, beta), EffectiveError);
}

TEST_CASE("strong marginal log") {
  const double beta = 0.8;
  const Region l = Region::interval(0, 2);
  const Interaction zero(Region::chain(5));
  CHECK(op_norm(strong_marginal_log(zero, zero.ambient(), l, beta)) < 1e-14);

  const Interaction split = decoupled_ising(6, 3, 1.0, 0.2);
  CHECK(op_norm_diff(strong_marginal_log(split, split.ambient(), l, beta), hamiltonian(split, l)) > 0.0);
  // Decoupled: the log splits into H_L plus a constant from the rest.
  const LocalOperator s = strong_marginal_log(split, split.ambient(), l, beta);
  const double rest = log_partition(split, Region::interval(3, 5), beta) - 3 * std::log(2.0);
  CHECK(op_norm_diff(s, hamiltonian(split, l) - (rest / beta) * LocalOperator::identity(l)) < 1e-12);

  // tr and E_L differ by D^{|Lambda\L|}.
  const Interaction phi = ising(Region::chain(6), 1.0, 0.4);
  const LocalOperator strong = strong_marginal_log(phi, phi.ambient(), l, beta);
  const WeakEffectiveHamiltonian weak = weak_effective(phi, phi.ambient(), l, beta);
  const double shift = (weak.log_z_rest - 3 * std::log(2.0)) / beta;
  CHECK(op_norm_diff(weak.h - strong, shift * LocalOperator::identity(l)) < 1e-11);
  CHECK(strong.support() == l);
}

TEST_CASE("Mobius effective interaction") {
  const double beta = 0.5;
  const Region chain = Region::chain(5);
  const Region l = Region::interval(0, 2);
  const Interaction phi = ising(chain, 1.0, 0.3);
  const EffectiveInteraction e = mobius_effective(phi, l, beta, chain);
  CHECK(e.construction == Construction::Mobius);
  CHECK(telescoping_residual(e, phi) < 1e-9);
  CHECK(support_defect(e) < 1e-9);
  for (const auto& [x, q] : phi.terms())
    if (l.contains(x)) CHECK(op_norm_diff(e.term(x), q) < 1e-9);
  for (const auto& [x, q] : e.terms) CHECK(q.is_hermitian(1e-9));

  const EffectiveInteraction full = mobius_effective(phi, chain, beta, chain);
  for (const auto& [x, q] : full.terms) {
    const auto it = phi.terms().find(x);
    CHECK(op_norm_diff(q, it != phi.terms().end() ? it->second : LocalOperator::zero(x)) < 1e-9);
  }

  // Fast transform against the naive subset sum.
  for (const Region& x : {Region::interval(1, 3), Region{Site{0}, Site{4}}, Region::interval(2, 4)})
    CHECK(op_norm_diff(e.term(x), mobius_term_naive(phi, l, beta, x)) < 1e-10);

  // Non-commuting models still run; X inside L still reproduces Phi_X.
  const Interaction tf = tfim(Region::chain(4), 1.0, 0.6);
  const EffectiveInteraction et = mobius_effective(tf, Region::interval(0, 1), beta, tf.ambient());
  CHECK(telescoping_residual(et, tf) < 1e-9);
  CHECK(support_defect(et) < 1e-9);
  CHECK(op_norm_diff(et.term(Region::interval(0, 1)), tf.terms().at(Region::interval(0, 1))) < 1e-9);

  CHECK_THROWS_AS(mobius_effective(ising(Region::chain(13), 1.0, 0.1), l, beta, Region::chain(13)), EffectiveError);
}

TEST_CASE("property: consistency and weak from strong on diagonal models") {
  testing::Gen gen(17);
  for (int t = 0; t < 6; ++t) {
    const Region chain = Region::chain(5);
    RangeProfile p;
    p.range = 2;
    p.diagonal = true;
    p.target_norm = gen.uniform(0.5, 2.0);
    const Interaction phi = random_short_range(chain, 900 + t, p);
    const double beta = gen.uniform(0.2, 1.0);
    const Region l = gen.subset(chain);
    // L' agrees with L on {0,1,2} and differs on {3,4}.
    Region lp = l.intersect(Region::interval(0, 2));
    if (!l.contains(Site{3})) lp = lp.unite(Region{Site{3}});
    const EffectiveInteraction e = mobius_effective(phi, l, beta, chain);
    const EffectiveInteraction ep = mobius_effective(phi, lp, beta, chain);
    CHECK(consistency_defect(e, ep) < 1e-9);
    CHECK(telescoping_residual(e, phi) < 1e-9);
    const WeakEffectiveHamiltonian w = weak_effective(phi, chain, l, beta);
    CHECK(op_norm_diff(weak_from_strong(e, chain), w.h) < 1e-8);
  }
}

TEST_CASE("cluster effective interaction") {
  const Region chain = Region::chain(4);
  const Region l = Region::interval(0, 1);
  const Interaction phi = ising(chain, 1.0, 0.5);

  // Leading order: -beta E_L[Phi_X].
  ClusterOptions loose;
  loose.certify = false;
  loose.k_max = 2;
  loose.m_max = 2;
  const double tiny = 1e-4;
  const EffectiveInteraction small = cluster_effective(phi, l, tiny, loose);
  for (const auto& [x, q] : phi.terms())
    CHECK(op_norm_diff(small.term(x), cplx(-tiny) * cond_expectation(q, l)) < 10 * tiny * tiny);

  // Central check against the Mobius oracle at half the finite-degree threshold.
  const double beta = half_finite_degree_threshold(phi);
  ClusterOptions opts;
  opts.k_max = 4;
  opts.m_max = 4;
  const EffectiveInteraction c = cluster_effective(phi, l, beta, opts);
  const EffectiveInteraction m = mobius_effective(phi, l, beta, chain).as(Convention::Log);
  REQUIRE(c.truncation_estimate > 0.0);
  double worst = 0.0;
  for (const auto& [x, q] : m.terms) worst = std::max(worst, op_norm_diff(q, c.term(x)));
  for (const auto& [x, q] : c.terms) worst = std::max(worst, op_norm_diff(q, m.term(x)));
  CHECK(worst <= c.truncation_estimate);
  // Decay: sum over X containing x of ||Phi~_X|| <= a({x}) = 1.
  CHECK(c.norm_b(SubadditiveWeight::zero()) <= 1.0);
  CHECK(support_defect(c) < 1e-12);

  // A larger beta outside the certificate, with the check turned off.
  ClusterOptions deep;
  deep.certify = false;
  deep.k_max = 5;
  deep.m_max = 5;
  const EffectiveInteraction c2 = cluster_effective(phi, l, 0.05, deep);
  const EffectiveInteraction m2 = mobius_effective(phi, l, 0.05, chain).as(Convention::Log);
  double worst2 = 0.0;
  for (const auto& [x, q] : m2.terms) worst2 = std::max(worst2, op_norm_diff(q, c2.term(x)));
  CHECK(worst2 <= c2.truncation_estimate);
  CHECK(worst2 > 0.0);
  const LocalOperator target = herm_log(cond_expectation(herm_exp(hamiltonian(phi, chain), -0.05), l));
  CHECK(op_norm_diff(c2.sum(chain), target) < 10 * c2.truncation_estimate);

  CHECK_THROWS_WITH_AS(cluster_effective(phi, l, 100 * beta, opts), doctest::Contains("outside certified"),
                       EffectiveError);
  CHECK_THROWS_AS(cluster_effective(tfim(chain, 1.0, 0.5), l, beta, loose), PolymerError);
}

TEST_CASE("decay certificates") {
  const SubadditiveWeight b = SubadditiveWeight::linear(0.2, 0.1);
  const DecayReport none = decay_certificates(Interaction(Region::chain(4)), 1.0, b, Region::interval(0, 1), 3);
  CHECK(std::isinf(none.exponential.threshold));
  CHECK(std::isinf(none.finite_degree.threshold));
  CHECK(none.exponential.norm == 0.0);
  CHECK(none.finite_degree.norm == 0.0);
  CHECK(none.pass());

  const Interaction phi = ising(Region::chain(5), 1.0, 0.5);
  const DecayReport r = decay_certificates(phi, 1.0, b, Region::interval(0, 1), 3);
  CHECK(r.exponential.pass());
  CHECK(r.finite_degree.pass());
  CHECK(r.exponential.norm > 0.0);
  CHECK(r.exponential.norm < 0.5);
  CHECK(r.finite_degree.norm <= 1.0);
  REQUIRE(r.sweep.size() == 5);
  CHECK(r.monotone);
  CHECK(r.sweep.back().second > r.sweep.front().second);
}

TEST_CASE("JSON round trip") {
  const Interaction phi = tfim(Region::chain(3), 1.0, 0.4);
  const EffectiveInteraction e = mobius_effective(phi, Region::interval(0, 1), 0.7, phi.ambient());
  const nlohmann::json j = to_json(e);
  CHECK(j.at("construction") == "mobius");
  CHECK(j.at("terms").size() == e.terms.size());
  const auto& first = j.at("terms").at(0);
  CHECK(first.contains("sites"));
  CHECK(first.contains("norm"));
  const EffectiveInteraction back = effective_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.terms.size() == e.terms.size());
  CHECK(back.kept == e.kept);
  CHECK(consistency_defect(e, back) < 1e-15);
}
