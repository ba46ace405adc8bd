#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/generators.hpp"
#include "qgibbs/operators.hpp"

using namespace qgibbs;

namespace {

// Kronecker product with the first factor as the outer leg.
Matrix kron_ref(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

const Site s0{0}, s1{1}, s2{2}, s3{3};

}  // namespace

TEST_CASE("embedding follows the outer-leg convention") {
  const LocalOperator z0 = pauli_z(s0);
  const LocalOperator e = embed(z0, Region::chain(2));
  Vector expect(4);
  expect << 1, 1, -1, -1;
  REQUIRE(e.is_diagonal());
  CHECK((e.diagonal() - expect).norm() == 0.0);

  const LocalOperator x1 = pauli_x(s1);
  const Matrix ex = embed(x1, Region::chain(3)).matrix();
  const Matrix ref = kron_ref(kron_ref(pauli_matrix('I'), pauli_matrix('X')), pauli_matrix('I'));
  CHECK((ex - ref).norm() == 0.0);

  CHECK(max_abs_diff(embed(LocalOperator::identity(Region{s1}), Region::chain(3)),
                     LocalOperator::identity(Region::chain(3))) == 0.0);
  CHECK_THROWS_AS(embed(pauli_x(s3), Region::chain(2)), OperatorError);
}

TEST_CASE("embedding is an isometry") {
  testing::Gen gen(1);
  for (int t = 0; t < 20; ++t) {
    const LocalOperator q = gen.any_operator(Region{s0, s2});
    CHECK(op_norm(embed(q, Region::chain(4))) == doctest::Approx(op_norm(q)).epsilon(1e-12));
  }
}

TEST_CASE("products and commutators") {
  const LocalOperator zz = mul(pauli_z(s0), pauli_z(s1));
  CHECK(zz.is_diagonal());
  CHECK((zz.matrix() - kron_ref(pauli_matrix('Z'), pauli_matrix('Z'))).norm() == 0.0);
  CHECK(op_norm(commutator(pauli_z(s0), pauli_z(s1))) == 0.0);
  const LocalOperator c = commutator(pauli_x(s0), pauli_z(s0));
  const LocalOperator expect = cplx(0, -2) * pauli_y(s0);
  CHECK(max_abs_diff(c, expect) < 1e-15);

  testing::Gen gen(2);
  const LocalOperator a = gen.any_operator(Region{s0});
  const LocalOperator b = gen.any_operator(Region{s2});
  const Matrix ref = kron_ref(a.matrix(), b.matrix());
  CHECK((kron(a, b).matrix() - ref).norm() < 1e-13);
}

TEST_CASE("partial traces") {
  testing::Gen gen(3);
  const LocalOperator a = gen.any_operator(Region{s0});
  const LocalOperator b = gen.any_operator(Region{s1, s2});
  const LocalOperator ab = kron(a, b);
  CHECK(max_abs_diff(partial_trace(ab, b.support()), b.trace() * a) < 1e-12);
  const LocalOperator all = partial_trace(ab, ab.support());
  CHECK(all.support().empty());
  CHECK(std::abs(all.trace() - ab.trace()) < 1e-12);

  Matrix bell = Matrix::Zero(4, 4);
  bell(0, 0) = bell(0, 3) = bell(3, 0) = bell(3, 3) = 0.5;
  const LocalOperator phi(Region::chain(2), bell);
  CHECK(max_abs_diff(partial_trace(phi, Region{s1}), 0.5 * LocalOperator::identity(Region{s0})) < 1e-15);
  CHECK_THROWS_AS(partial_trace(phi, Region{s2}), OperatorError);
}

TEST_CASE("conditional expectations") {
  testing::Gen gen(4);
  const Region r = Region::chain(3);
  CHECK(max_abs_diff(cond_expectation(LocalOperator::identity(r), Region{s1}), LocalOperator::identity(Region{s1})) <
        1e-15);
  for (int t = 0; t < 10; ++t) {
    const LocalOperator q = gen.any_operator(r);
    const LocalOperator e = cond_expectation(q, Region{s0, s2});
    CHECK(max_abs_diff(cond_expectation(e, Region{s0, s2}), e) < 1e-14);
    const LocalOperator full = cond_expectation(q, Region{});
    CHECK(std::abs(full.trace() - q.trace() / 8.0) < 1e-12);
  }
  // Sites of keep outside the support are ignored.
  const LocalOperator q = gen.any_operator(Region{s0, s1});
  CHECK(cond_expectation(q, Region{s1, s3}).support() == Region{s1});
}

TEST_CASE("Hermitian matrix functions") {
  testing::Gen gen(5);
  const Region r = Region::chain(3);
  CHECK(max_abs_diff(herm_exp(LocalOperator::zero(r).to_dense()), LocalOperator::identity(r)) < 1e-14);
  for (int t = 0; t < 10; ++t) {
    const LocalOperator h = gen.hermitian(r);
    CHECK(max_abs_diff(herm_log(herm_exp(h)), h) < 1e-9);
    const auto es = eigensystem(herm_exp(h));
    const auto eh = eigensystem(h);
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
      CHECK(es.values(i) == doctest::Approx(std::exp(eh.values(i))).epsilon(1e-10));
  }
  Vector d(2);
  d << 0.3, -1.2;
  const LocalOperator diag(Region{s0}, d);
  const LocalOperator ed = herm_exp(diag);
  CHECK(std::abs(ed.diagonal()(0) - std::exp(0.3)) < 1e-15);
  CHECK(std::abs(ed.diagonal()(1) - std::exp(-1.2)) < 1e-15);

  CHECK_THROWS_AS(herm_exp(gen.any_operator(r)), OperatorError);
  try {
    herm_log(diag);
    FAIL("expected an exception");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.min_eigenvalue == doctest::Approx(-1.2));
    CHECK(std::string(e.what()).find("marginal not positive definite") != std::string::npos);
  }
}

TEST_CASE("norms") {
  const LocalOperator id = LocalOperator::identity(Region::chain(3));
  CHECK(op_norm(id) == 1.0);
  CHECK(trace_norm(id) == 8.0);
  CHECK(op_norm(pauli_x(s0)) == doctest::Approx(1.0));
  CHECK(trace_norm(pauli_x(s0)) == doctest::Approx(2.0));
  testing::Gen gen(6);
  for (int t = 0; t < 30; ++t) {
    const LocalOperator q = gen.any_operator(Region::chain(2));
    CHECK(op_norm(q) <= trace_norm(q));
    CHECK(op_norm(q) == doctest::Approx(Eigen::JacobiSVD<Matrix>(q.matrix()).singularValues()(0)).epsilon(1e-10));
  }
}

TEST_CASE("property: trace duality of partial trace and embedding") {
  testing::Gen gen(7);
  const Region r = Region::chain(4);
  for (int t = 0; t < 40; ++t) {
    const Region x = gen.subset(r);
    const LocalOperator q = gen.any_operator(r);
    const Region rest = r.minus(x);
    const LocalOperator rr = gen.any_operator(rest);
    const cplx lhs = mul(partial_trace(q, x), rr).trace();
    const cplx rhs = mul(q, embed(rr, r)).trace();
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(rhs)));
  }
}

TEST_CASE("property: embed then trace the added sites") {
  testing::Gen gen(8);
  const Region r = Region::chain(4);
  for (int t = 0; t < 30; ++t) {
    const Region x = gen.subset(r);
    const LocalOperator q = gen.any_operator(x);
    const Region added = r.minus(x);
    const double factor = std::pow(2.0, static_cast<double>(added.size()));
    CHECK(max_abs_diff(partial_trace(embed(q, r), added), factor * q) < 1e-11);
  }
}

TEST_CASE("diagonal and dense paths agree") {
  testing::Gen gen(9);
  const Region r = Region::chain(4);
  for (int t = 0; t < 20; ++t) {
    const LocalOperator d = gen.real_diagonal(gen.subset(r));
    const LocalOperator dd = d.to_dense();
    const Region keep = gen.subset(r);
    CHECK(max_abs_diff(cond_expectation(d, keep), cond_expectation(dd, keep)) < 1e-13);
    CHECK(max_abs_diff(embed(d, r), embed(dd, r)) < 1e-15);
    CHECK(op_norm(d) == doctest::Approx(op_norm(dd)).epsilon(1e-12));
    CHECK(trace_norm(d) == doctest::Approx(trace_norm(dd)).epsilon(1e-12));
    CHECK(max_abs_diff(herm_exp(d, -0.4), herm_exp(dd, -0.4)) < 1e-12);
  }
}

TEST_CASE("support residual detects leakage") {
  testing::Gen gen(10);
  const LocalOperator q = embed(gen.hermitian(Region{s1}), Region::chain(3));
  CHECK(support_residual(q, Region{s1}) < 1e-13);
  CHECK(support_residual(q, Region{s0}) > 1e-3);
}

TEST_CASE("density matrices") {
  testing::Gen gen(11);
  const DensityMatrix rho(gen.density(Region::chain(2)));
  CHECK(rho.entropy() > 0.0);
  CHECK(max_abs_diff(mul(rho.op(), rho.inverse()), LocalOperator::identity(Region::chain(2))) < 1e-9);
  CHECK_THROWS_AS(DensityMatrix(LocalOperator::identity(Region::chain(2))), OperatorError);
  Vector p(2);
  p << 1.0, 0.0;
  const DensityMatrix pure(LocalOperator(Region{s0}, p));
  CHECK(pure.entropy() == 0.0);
  CHECK_THROWS_AS((void)pure.inverse(), NotPositiveDefinite);
}
