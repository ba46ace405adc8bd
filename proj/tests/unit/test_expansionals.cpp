#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "qgibbs/expansionals.hpp"
#include "qgibbs/gibbs.hpp"

using namespace qgibbs;

namespace {

const cplx I(0, 1);

// Direct e^{isH} Q e^{-isH} from dense matrix exponentials of the spectrum.
LocalOperator evolve_ref(const LocalOperator& h, const LocalOperator& q, cplx s) {
  return mul(mul(herm_exp(h, I * s), q), herm_exp(h, -I * s));
}

Interaction random_model(const Region& r, std::uint64_t seed, double target, int range = 1) {
  RangeProfile p;
  p.range = range;
  p.lambda = 0.5;
  p.mu = 0.5;
  p.target_norm = target;
  return random_short_range(r, seed, p);
}

}  // namespace

TEST_CASE("time evolution") {
  testing::Gen gen(1);
  const Region r = Region::chain(3);
  const LocalOperator h = gen.hermitian(r);
  const LocalOperator q = gen.any_operator(Region{Site{1}});
  CHECK(max_abs_diff(time_evolution(h, q, 0.0), embed(q, r)) < 1e-13);
  CHECK(op_norm(time_evolution(h, q, 0.7)) == doctest::Approx(op_norm(q)));
  const LocalOperator z = pauli_z(Site{0});
  CHECK(max_abs_diff(time_evolution(hamiltonian(ising(r, 1.0, 0.3), r), z, cplx(0.4, 0.9)), embed(z, r)) < 1e-14);
  for (cplx s : {cplx(0.3, 0.0), cplx(0.0, 0.2), cplx(-0.4, 0.35)})
    CHECK(max_abs_diff(time_evolution(h, q, s), evolve_ref(h, q, s)) < 1e-11);
  const LocalOperator hd = hamiltonian(ising(r, 0.8, -0.2), r);
  CHECK(max_abs_diff(time_evolution(hd, pauli_x(Site{2}), cplx(0.1, 0.3)),
                     evolve_ref(hd, pauli_x(Site{2}), cplx(0.1, 0.3))) < 1e-12);
}

TEST_CASE("locality bounds") {
  const Region chain = Region::chain(8);
  const Interaction phi = ising(chain, 0.1, 0.05);
  const double lambda = 1.0, mu = 0.5;
  REQUIRE(analyticity_radius(phi, lambda, mu) > 0.1);
  const LocalOperator q = pauli_x(Site{3});

  const auto [at0, diff0] = locality_bound_check(phi, q, Region::interval(1, 6), chain, 0.0, lambda, mu);
  CHECK(at0.lhs == doctest::Approx(1.0));
  CHECK(at0.rhs == doctest::Approx(std::exp(lambda)));
  CHECK(diff0.lhs < 1e-14);

  const auto [same1, same2] =
      locality_bound_check(phi, q, Region::interval(1, 6), Region::interval(1, 6), 0.1 * I, lambda, mu);
  CHECK(same2.lhs == 0.0);
  CHECK(same2.holds());

  const auto [m1, m2] = locality_bound_check(phi, q, Region::interval(1, 6), chain, 0.1 * I, lambda, mu);
  CHECK(m1.holds());
  CHECK(m2.holds());
  CHECK(m1.lhs > 1.0);
  CHECK(m2.lhs > 0.0);
  CHECK(m2.params.at("dist") == 3.0);

  CHECK_THROWS_AS(locality_bound_check(phi, q, Region::interval(1, 6), chain, 5.0 * I, lambda, mu), RegimeError);
  CHECK_THROWS_AS(locality_bound_check(phi, q, Region::interval(4, 6), chain, 0.0, lambda, mu), OperatorError);
}

TEST_CASE("expansional basics") {
  const Region chain = Region::chain(4);
  const Region x = Region::interval(0, 1), y = Region::interval(2, 3);
  Interaction split(chain);
  split.add(cplx(0.6) * mul(pauli_x(Site{0}), pauli_x(Site{1})));
  split.add(cplx(0.6) * mul(pauli_y(Site{2}), pauli_z(Site{3})));
  CHECK(max_abs_diff(expansional(split, x, y, 0.8).op, LocalOperator::identity(chain)) < 1e-13);

  const Interaction phi = random_model(chain, 11, 1.0, 2);
  CHECK(max_abs_diff(expansional(phi, x, y, 0.0).op, LocalOperator::identity(chain)) < 1e-14);
  const Expansional e = expansional(phi, x, y, 0.7);
  CHECK(max_abs_diff(e.op, expansional(phi, y, x, 0.7).op) < 1e-13);
  CHECK(max_abs_diff(mul(e.op, expansional_adjoint_inverse(phi, x, y, 0.7).adjoint()), LocalOperator::identity(chain)) <
        1e-9);
  CHECK_THROWS_AS(expansional(phi, x, Region::interval(1, 2), 0.1), OperatorError);
}

TEST_CASE("Duhamel oracle") {
  const Region chain = Region::chain(4);
  const Region x = Region::interval(0, 1), y = Region::interval(2, 3);
  Interaction split(chain);
  split.add(cplx(0.9) * mul(pauli_x(Site{0}), pauli_z(Site{1})));
  CHECK(max_abs_diff(duhamel_oracle(split, x, y, 0.5, 100), LocalOperator::identity(chain)) < 1e-14);

  const Interaction phi = random_model(chain, 21, 2.0, 2);
  const double beta = 0.3;
  const LocalOperator exact = expansional(phi, x, y, beta).op;
  CHECK(op_norm_diff(duhamel_oracle(phi, x, y, beta, 2000), exact) <= 1e-8);

  // Fourth order: halving the step cuts the error about 16-fold.
  const Interaction strong = random_model(chain, 22, 6.0, 2);
  const LocalOperator ref = expansional(strong, x, y, 1.0).op;
  const double e1 = op_norm_diff(duhamel_oracle(strong, x, y, 1.0, 20), ref);
  const double e2 = op_norm_diff(duhamel_oracle(strong, x, y, 1.0, 40), ref);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("expansional norm bound") {
  const Region chain = Region::chain(6);
  const double lambda = 0.5, mu = 0.5;
  Interaction split(chain);
  split.add(cplx(0.3) * pauli_z(Site{1}));
  const BoundReport dec = expansional_bound_check(split, Region::interval(0, 2), Region::interval(3, 5), 0.2, lambda,
                                                  mu);
  CHECK(dec.lhs == doctest::Approx(1.0));
  CHECK(dec.holds());

  const Interaction phi = ising(chain, 0.2, 0.1);
  const BoundReport adj = expansional_bound_check(phi, Region::interval(0, 2), Region::interval(3, 5), 0.1, lambda,
                                                  mu);
  CHECK(adj.holds());
  CHECK(adj.lhs > 1.0);
  CHECK_THROWS_AS(expansional_bound_check(phi, Region::interval(0, 2), Region::interval(3, 5), 2.0, lambda, mu),
                  RegimeError);
}

TEST_CASE("expansional difference bound") {
  const Region chain = Region::chain(8);
  const double lambda = 0.5, mu = 0.5;
  Interaction left(chain);
  left.add(cplx(0.3) * mul(pauli_x(Site{1}), pauli_x(Site{2})));
  left.add(cplx(0.2) * pauli_y(Site{3}));
  const BoundReport zero = expansional_diff_bound_check(left, Region::interval(0, 1), Region::interval(2, 4),
                                                        Region::interval(6, 7), 0.1, lambda, mu);
  CHECK(zero.lhs < 1e-14);

  const Interaction phi = random_model(chain, 31, 0.8, 1);
  const Region a = Region::interval(0, 1);
  const BoundReport fig = expansional_diff_bound_check(phi, a, Region::interval(2, 4), Region::interval(5, 7), 0.2,
                                                       lambda, mu);
  CHECK(fig.holds());
  CHECK(fig.lhs > 0.0);

  double prev = kInfiniteDistance;
  for (int k = 2; k <= 5; ++k) {
    const BoundReport r = expansional_diff_bound_check(phi, a, Region::interval(2, k), Region::interval(k + 1, 7),
                                                       0.2, lambda, mu);
    CHECK(r.holds());
    CHECK(r.lhs < prev);
    prev = r.lhs;
  }
}

TEST_CASE("trace of the inverse expansional") {
  const Region chain = Region::chain(8);
  const Region a = Region::interval(0, 3), b = Region::interval(4, 7);
  const double lambda = 0.5, mu = 0.5;
  const BoundReport free = trace_inverse_expansional_check(Interaction(chain), a, b, 0.3, lambda, mu);
  CHECK(free.lhs == doctest::Approx(1.0));
  CHECK(free.holds());

  const Interaction phi = ising(chain, 0.2, 0.1);
  const BoundReport r = trace_inverse_expansional_check(phi, a, b, 0.1, lambda, mu);
  CHECK(r.holds());
  // Tr[rho^{AB} E^{*-1}] = Z_A Z_B / Z_AB.
  const double oracle = std::exp(log_partition(phi, chain, 0.1) - log_partition(phi, a, 0.1) -
                                 log_partition(phi, b, 0.1));
  CHECK(r.lhs == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(r.params.at("boundary_A") == 2.0);
  CHECK(r.params.at("K") == doctest::Approx(simplified_constant(r.params.at("phi_norm"), lambda, mu, 0.1, 1)));
  CHECK(trace_inverse_expansional_check(phi, a, b, 1e-6, lambda, mu).lhs == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("property: bounds hold across random in-regime models") {
  testing::Gen gen(9);
  const double lambda = 0.5, mu = 0.5;
  for (int t = 0; t < 50; ++t) {
    const Region chain = Region::chain(gen.integer(4, 6));
    const Interaction phi = random_model(chain, 4000 + t, gen.uniform(0.2, 2.0), gen.integer(1, 2));
    const double beta = gen.uniform(0.05, 0.95) * analyticity_radius(phi, lambda, mu);
    const int cut = gen.integer(1, static_cast<int>(chain.size()) - 2);
    const Region a = Region::interval(0, cut - 1);
    const Region b = Region::interval(cut, cut);
    const Region c = Region::interval(cut + 1, static_cast<int>(chain.size()) - 1);
    CHECK(expansional_bound_check(phi, a, b.unite(c), beta, lambda, mu).holds());
    CHECK(expansional_diff_bound_check(phi, a, b, c, beta, lambda, mu).holds());
    CHECK(trace_inverse_expansional_check(phi, a, b.unite(c), beta, lambda, mu).holds());
    const auto [l1, l2] = locality_bound_check(phi, pauli_x(Site{cut}), b, chain, cplx(0, beta), lambda, mu);
    CHECK(l1.holds());
    CHECK(l2.holds());
  }
}
