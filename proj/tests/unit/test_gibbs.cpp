#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "qgibbs/gibbs.hpp"

using namespace qgibbs;

TEST_CASE("single spin in a field") {
  const Region one = Region::chain(1);
  const double h = 0.7, beta = 1.3;
  const GibbsEnsemble g(ising(one, 0.0, h), one, beta);
  CHECK(g.log_partition() == doctest::Approx(std::log(2 * std::cosh(beta * h))));
  CHECK(g.expectation(pauli_z(Site{0})).real() == doctest::Approx(-std::tanh(beta * h)));
  CHECK(g.state().trace().real() == doctest::Approx(1.0));
}

TEST_CASE("two-site marginals") {
  const Region two = Region::chain(2);
  const double j = -0.9, beta = 0.8;
  const GibbsEnsemble g(ising(two, j, 0.0), two, beta);
  // Zero field: each marginal is maximally mixed, <ZZ> = -tanh(beta J).
  const DensityMatrix& m0 = g.marginal(Region{Site{0}});
  CHECK(max_abs_diff(m0.op(), LocalOperator::identity(Region{Site{0}}) * cplx(0.5)) < 1e-14);
  CHECK(g.expectation(mul(pauli_z(Site{0}), pauli_z(Site{1}))).real() == doctest::Approx(-std::tanh(beta * j)));
  CHECK(&g.marginal(Region{Site{0}}) == &m0);
  CHECK_THROWS_AS((void)g.marginal(Region{Site{4}}), OperatorError);
}

TEST_CASE("dense and diagonal paths agree") {
  const Region chain = Region::chain(4);
  const Interaction phi = ising(chain, 0.6, 0.3);
  const GibbsEnsemble diag(phi, chain, 1.1);
  const GibbsEnsemble dense(hamiltonian(phi, chain).to_dense(), 1.1);
  CHECK(diag.log_partition() == doctest::Approx(dense.log_partition()).epsilon(1e-13));
  CHECK(max_abs_diff(diag.state(), dense.state()) < 1e-13);
  CHECK(log_partition(phi, chain, 1.1) == doctest::Approx(diag.log_partition()).epsilon(1e-13));
}

TEST_CASE("input validation") {
  const Region one = Region::chain(1);
  CHECK_THROWS_AS(GibbsEnsemble(ising(one, 0.0, 1.0), one, 0.0), OperatorError);
  CHECK_THROWS_AS(GibbsEnsemble(ising(one, 0.0, 1.0), one, -1.0), OperatorError);
  CHECK(log_partition(ising(one, 0.0, 1.0), Region{}, 2.0) == 0.0);
}

TEST_CASE("log-sum-exp is stable") {
  RealVector e(3);
  e << 1000.0, 1000.0, 2000.0;
  CHECK(log_sum_exp_neg(e, 1.0) == doctest::Approx(-1000.0 + std::log(2.0)));
}

TEST_CASE("kappa") {
  const Region chain = Region::chain(9);
  const Region a = Region::interval(0, 2), b = Region::interval(3, 5), c = Region::interval(6, 8);
  CHECK(kappa(Interaction(chain), a, b, c, 1.0).value == doctest::Approx(1.0));
  CHECK(kappa(Interaction(chain), a, b, c, 1.0).abs_minus_one == 0.0);

  const Interaction phi = tfim(chain, 0.8, 0.5);
  const double beta = 0.6;
  const Kappa k = kappa(phi, a, b, c, beta);
  auto z = [&](const Region& y) { return std::exp(GibbsEnsemble(phi, y, beta).log_partition()); };
  const double direct = z(b) * z(chain) / (z(b.unite(c)) * z(a.unite(b)));
  CHECK(k.value == doctest::Approx(direct).epsilon(1e-10));
  CHECK(k.abs_minus_one == doctest::Approx(std::abs(direct - 1)).epsilon(1e-6));

  // Without a field the boundary weights of A and C do not depend on the
  // spins of B, so kappa = 1; a field breaks this.
  CHECK(kappa(ising(chain, 1.0, 0.0), a, b, c, beta).abs_minus_one < 1e-12);
  CHECK(kappa(ising(chain, 1.0, 0.4), a, b, c, beta).abs_minus_one > 1e-4);
  CHECK_THROWS_AS(kappa(phi, a, b, Region::interval(5, 8), beta), OperatorError);
  CHECK_THROWS_AS(kappa(phi, a, b, Region::interval(6, 7), beta), OperatorError);
}

TEST_CASE("property: marginals are consistent") {
  testing::Gen gen(17);
  for (int t = 0; t < 10; ++t) {
    RangeProfile p;
    p.range = 2;
    p.target_norm = gen.uniform(0.2, 1.5);
    const Region chain = Region::chain(4);
    const GibbsEnsemble g(random_short_range(chain, 900 + t, p), chain, gen.uniform(0.1, 2.0));
    const Region x = gen.subset(chain);
    const DensityMatrix& mx = g.marginal(x);
    CHECK(mx.op().trace().real() == doctest::Approx(1.0));
    CHECK(mx.min_eigenvalue() > 0.0);
    if (x.size() > 1) {
      const Region y{x.sites().front()};
      CHECK(max_abs_diff(partial_trace(mx.op(), x.minus(y)), g.marginal(y).op()) < 1e-12);
    }
  }
}
