#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include "../support/generators.hpp"
#include "qgibbs/correlations.hpp"

using namespace qgibbs;

namespace {

const Region kA{Site{0}};
const Region kC{Site{1}};

LocalOperator pure(const Region& r, const Vector& psi) { return LocalOperator(r, Matrix(psi * psi.adjoint())); }

LocalOperator bell() {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return pure(Region::chain(2), psi);
}

LocalOperator classical_pair() {
  RealVector p(4);
  p << 0.5, 0.0, 0.0, 0.5;
  return LocalOperator::from_real_diagonal(Region::chain(2), p);
}

LocalOperator pauli_string(const Region& r, std::size_t code) {
  LocalOperator out = LocalOperator::scalar(1.0);
  for (const Site& s : r) {
    out = mul(out, LocalOperator(Region{s}, pauli_matrix("IXYZ"[code % 4])));
    code /= 4;
  }
  return embed(out, r);
}

// max over Pauli strings P_A, P_C of |Tr[M (P_A (x) P_C)]|.
double pauli_oracle(const LocalOperator& m, const Region& a, const Region& c) {
  const std::size_t na = std::size_t{1} << (2 * a.size()), nc = std::size_t{1} << (2 * c.size());
  double best = 0.0;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      best = std::max(best, std::abs(mul(m, kron(pauli_string(a, i), pauli_string(c, j))).trace()));
  return best;
}

}  // namespace

TEST_CASE("covariance on reference states") {
  testing::Gen gen(1);
  const LocalOperator prod = kron(gen.density(kA), gen.density(kC));
  const CovarianceBounds p = covariance(prod, kA, kC);
  CHECK(p.upper < 1e-10);
  CHECK(p.lower < 1e-10);

  // M = diag(1/4,-1/4,-1/4,1/4): Z (x) Z attains ||M||_1 = 1.
  const CovarianceBounds cl = covariance(classical_pair(), kA, kC);
  CHECK(cl.upper == doctest::Approx(1.0));
  CHECK(cl.lower == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(mul(correlation_operator(classical_pair(), kA, kC), kron(pauli_z(Site{0}), pauli_z(Site{1}))).trace()) ==
        doctest::Approx(1.0));

  CHECK_THROWS_AS(covariance(classical_pair(), kA, kA), OperatorError);
  CHECK_THROWS_AS(covariance(classical_pair(), kA, kC, 0), OperatorError);
}

TEST_CASE("mutual information on reference states") {
  testing::Gen gen(2);
  CHECK(mutual_information(kron(gen.density(kA), gen.density(kC)), kA, kC) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(mutual_information(bell(), kA, kC) == doctest::Approx(2 * std::log(2.0)));
  CHECK(mutual_information(classical_pair(), kA, kC) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("inequality chain on reference states") {
  testing::Gen gen(3);
  const InequalityChain prod = inequality_chain(kron(gen.density(kA), gen.density(kC)), kA, kC);
  CHECK(prod.holds());
  CHECK(prod.trace_distance < 1e-10);
  const InequalityChain cl = inequality_chain(classical_pair(), kA, kC);
  CHECK(cl.holds());
  CHECK(cl.mutual_information == doctest::Approx(std::log(2.0)));
  CHECK(cl.trace_distance == doctest::Approx(1.0));
  CHECK(cl.covariance_lower == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mixing norm") {
  const Region chain = Region::chain(4);
  const GibbsEnsemble free(Interaction(chain), chain, 2.0);
  CHECK(mixing_norm(free, Region{Site{0}}, Region{Site{3}}).value() < 1e-12);

  // Blocks {0,1} and {2,3} do not interact.
  Interaction split(chain);
  split.add(cplx(0.7) * mul(pauli_x(Site{0}), pauli_x(Site{1})));
  split.add(cplx(0.4) * mul(pauli_z(Site{2}), pauli_y(Site{3})));
  const GibbsEnsemble blocks(split, chain, 1.3);
  CHECK(mixing_norm(blocks, Region::interval(0, 1), Region::interval(2, 3)).value() < 1e-10);
  CHECK(mixing_norm(blocks, Region{Site{0}}, Region{Site{1}}).value() > 0.1);

  const Region ten = Region::chain(10);
  const GibbsEnsemble ising10(ising(ten, 1.0, 0.3), ten, 0.5);
  double prev = kInfiniteDistance;
  for (int k = 3; k <= 8; ++k) {
    const double v = mixing_norm(ising10, Region::interval(0, 1), Region::interval(k, k + 1)).value();
    CHECK(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("local indistinguishability") {
  const Region chain = Region::chain(6);
  const Region a{Site{0}};
  Interaction left(chain);
  left.add(cplx(0.8) * mul(pauli_x(Site{0}), pauli_x(Site{1})));
  left.add(cplx(0.5) * pauli_z(Site{1}));
  CHECK(local_indistinguishability(left, a, Region::interval(1, 2), Region::interval(3, 5), pauli_z(Site{0}), 1.0) <
        1e-12);

  const Interaction phi = tfim(chain, 1.0, 0.8);
  CHECK(local_indistinguishability(phi, a, Region::interval(1, 2), Region::interval(3, 5),
                                   LocalOperator::identity(a), 1.0) < 1e-12);
  double prev = kInfiniteDistance;
  for (int w = 1; w <= 4; ++w) {
    const double v = local_indistinguishability(phi, a, Region::interval(1, w), Region::interval(w + 1, 5),
                                                pauli_x(Site{0}), 1.0);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(local_indistinguishability(phi, a, Region::interval(1, 2), Region::interval(3, 4),
                                             pauli_z(Site{0}), 1.0),
                  OperatorError);
}

TEST_CASE("decay fits") {
  std::vector<std::pair<double, double>> exact;
  for (int d = 1; d <= 6; ++d) exact.emplace_back(d, 2.0 * std::exp(-0.7 * d));
  const DecayFit f = fit_decay(exact);
  CHECK(f.rate == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(f.prefactor == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(f.residual < 1e-12);

  CHECK(fit_decay({{1, 0.3}, {2, 0.3}, {3, 0.3}}).rate == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS(fit_decay({{1, 0.3}, {2, 1e-14}, {3, 0.3}}));

  testing::Gen gen(4);
  std::vector<std::pair<double, double>> noisy;
  for (int d = 0; d < 20; ++d) noisy.emplace_back(d, 3.0 * std::exp(-0.5 * d) * std::exp(gen.normal() * 0.1));
  CHECK(std::abs(fit_decay(noisy).rate - 0.5) < 0.05);
}

TEST_CASE("csv rows") {
  const Region chain = Region::chain(3);
  const GibbsEnsemble g(tfim(chain, 1.0, 0.5), chain, 1.0);
  const CorrelationReport r = mutual_information(g, Region{Site{0}}, Region{Site{2}});
  CHECK(r.distance == 2.0);
  CHECK(csv_header_correlations() == "measure,dA_C,beta,value_lower,value_upper");
  CHECK(csv_row(r).rfind("mutual_information,2,1,", 0) == 0);
}

TEST_CASE("property: covariance interval on random two-qubit states") {
  testing::Gen gen(5);
  for (int t = 0; t < 100; ++t) {
    const LocalOperator rho = gen.density(Region::chain(2));
    const CovarianceBounds b = covariance(rho, kA, kC, 2, 100, 1000 + t);
    CHECK(b.lower <= b.upper + 1e-12);
    CHECK(b.lower >= 0.0);
  }
}

TEST_CASE("property: covariance meets the Pauli oracle") {
  testing::Gen gen(6);
  int certified = 0;
  for (int t = 0; t < 20; ++t) {
    const Region ac = Region::chain(t % 2 ? 3 : 2);
    const Region a{Site{0}};
    const Region c = ac.minus(a);
    // Mixtures of Pauli products make product observables optimal more often.
    LocalOperator rho = LocalOperator::identity(ac) * cplx(1.0 / static_cast<double>(hilbert_dim(ac.size(), 2)));
    const LocalOperator p = pauli_string(ac, static_cast<std::size_t>(gen.integer(1, (1 << (2 * ac.size())) - 1)));
    rho = rho + cplx(gen.uniform(0.0, 0.9) / static_cast<double>(hilbert_dim(ac.size(), 2))) * p;
    const CovarianceBounds b = covariance(rho, a, c, 20, 300, 77 + t);
    const double oracle = pauli_oracle(correlation_operator(rho, a, c), a, c);
    CHECK(b.lower >= oracle - 1e-8);
    if (std::abs(oracle - b.upper) < 1e-9) {
      ++certified;
      CHECK(b.upper - b.lower <= 1e-6);
    }
  }
  CHECK(certified > 0);
}

TEST_CASE("property: measures on random Gibbs states") {
  testing::Gen gen(7);
  for (int t = 0; t < 50; ++t) {
    RangeProfile prof;
    prof.range = 2;
    prof.target_norm = gen.uniform(0.3, 1.5);
    const Region chain = Region::chain(3);
    const GibbsEnsemble g(random_short_range(chain, 500 + t, prof), chain, gen.uniform(0.2, 2.0));
    const Region a{Site{0}}, c{Site{2}};
    const double mi = mutual_information(g, a, c).value();
    CHECK(mi >= 0.0);
    CHECK(mi == doctest::Approx(mutual_information(g, c, a).value()).epsilon(1e-9));
    const InequalityChain ch = inequality_chain(g, a, c);
    CHECK(ch.holds());
    // Hoelder: ||rho_AC - rho_A rho_C||_1 <= ||X|| ||rho_A rho_C||_1 = mixing norm.
    const double mix = mixing_norm(g, a, c).value();
    CHECK(ch.trace_distance <= mix + 5e-9);
    CHECK(ch.trace_distance <= 4.0 * mix + 5e-9);
  }
}
