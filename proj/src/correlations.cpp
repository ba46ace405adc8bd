#include "qgibbs/correlations.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace qgibbs {

namespace {

void check_pair(const LocalOperator& rho, const Region& a, const Region& c) {
  if (a.empty() || c.empty()) throw OperatorError("correlation: empty region");
  if (a.intersects(c)) throw OperatorError("correlation: regions " + to_string(a) + " and " + to_string(c) + " overlap");
  if (!rho.support().contains(a.unite(c)))
    throw OperatorError("correlation: regions not inside state support " + to_string(rho.support()));
}

LocalOperator reduce(const LocalOperator& rho, const Region& keep) {
  return partial_trace(rho, rho.support().minus(keep));
}

double entropy_of(const LocalOperator& rho) { return DensityMatrix(rho, 1e-9).entropy(); }

LocalOperator random_contraction(const Region& support, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const Eigen::Index dim = hilbert_dim(support.size(), d);
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = cplx(n(rng), n(rng));
  LocalOperator q(support, m, d);
  return cplx(1.0 / op_norm(q)) * q;
}

// Best contraction against x: returns (||x||_1, V U^*) for x = U S V^*.
std::pair<double, LocalOperator> best_response(const LocalOperator& x) {
  Eigen::JacobiSVD<Matrix> svd(x.matrix(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {svd.singularValues().sum(),
          LocalOperator(x.support(), Matrix(svd.matrixV() * svd.matrixU().adjoint()), x.local_dim())};
}

CorrelationReport make_report(Measure kind, const Region& a, const Region& c, double lo, double hi, double beta,
                              const Metric& m) {
  CorrelationReport r;
  r.measure = kind;
  r.a = a;
  r.c = c;
  r.lower = lo;
  r.upper = hi;
  r.distance = dist(a, c, m);
  r.beta = beta;
  return r;
}

}  // namespace

std::string measure_name(Measure m) {
  switch (m) {
    case Measure::Covariance: return "covariance";
    case Measure::MutualInformation: return "mutual_information";
    case Measure::MixingNorm: return "mixing_norm";
    case Measure::LocalIndistinguishability: return "local_indistinguishability";
    case Measure::TraceDistance: return "trace_distance";
  }
  return "unknown";
}

std::string csv_header_correlations() { return "measure,dA_C,beta,value_lower,value_upper"; }

std::string csv_row(const CorrelationReport& r) {
  std::ostringstream os;
  os << std::setprecision(12) << measure_name(r.measure) << ',' << r.distance << ',' << r.beta << ',' << r.lower
     << ',' << r.upper;
  return os.str();
}

LocalOperator correlation_operator(const LocalOperator& rho, const Region& a, const Region& c) {
  check_pair(rho, a, c);
  const LocalOperator rac = reduce(rho, a.unite(c));
  return rac - kron(reduce(rac, a), reduce(rac, c));
}

CovarianceBounds covariance(const LocalOperator& rho, const Region& a, const Region& c, int restarts, int iters,
                            std::uint64_t seed) {
  if (restarts < 1) throw OperatorError("covariance: restarts must be >= 1");
  const LocalOperator m = correlation_operator(rho, a, c).to_dense();
  const int d = rho.local_dim();
  CovarianceBounds out;
  out.upper = trace_norm(m);
  out.best_a = LocalOperator::identity(a, d);
  out.best_c = LocalOperator::identity(c, d);
  std::mt19937_64 rng(seed);
  for (int r = 0; r < restarts; ++r) {
    LocalOperator oc = random_contraction(c, d, rng);
    LocalOperator oa;
    double value = -1.0;
    for (int it = 0; it < iters; ++it) {
      auto [va, next_a] = best_response(partial_trace(mul(m, oc), c));
      auto [vc, next_c] = best_response(partial_trace(mul(m, next_a), a));
      oa = std::move(next_a);
      oc = std::move(next_c);
      const bool stalled = vc - value < 1e-10;
      value = std::max(value, std::max(va, vc));
      if (stalled) break;
    }
    if (value > out.lower) {
      out.lower = value;
      out.best_a = oa;
      out.best_c = oc;
    }
  }
  out.lower = std::min(out.lower, out.upper);
  return out;
}

CorrelationReport covariance(const GibbsEnsemble& ens, const Region& a, const Region& c, int restarts, int iters,
                             std::uint64_t seed, const Metric& m) {
  const CovarianceBounds b = covariance(ens.marginal(a.unite(c)).op(), a, c, restarts, iters, seed);
  return make_report(Measure::Covariance, a, c, b.lower, b.upper, ens.beta(), m);
}

double mutual_information(const LocalOperator& rho, const Region& a, const Region& c) {
  check_pair(rho, a, c);
  const LocalOperator rac = reduce(rho, a.unite(c));
  const double mi = entropy_of(reduce(rac, a)) + entropy_of(reduce(rac, c)) - entropy_of(rac);
  return mi < 0 && mi > -1e-10 ? 0.0 : mi;
}

CorrelationReport mutual_information(const GibbsEnsemble& ens, const Region& a, const Region& c, const Metric& m) {
  const double v = mutual_information(ens.marginal(a.unite(c)).op(), a, c);
  return make_report(Measure::MutualInformation, a, c, v, v, ens.beta(), m);
}

double mixing_norm(const LocalOperator& rho, const Region& a, const Region& c, double pd_floor) {
  check_pair(rho, a, c);
  const LocalOperator rac = reduce(rho, a.unite(c));
  const LocalOperator inv = kron(DensityMatrix(reduce(rac, a), 1e-9).inverse(pd_floor),
                                 DensityMatrix(reduce(rac, c), 1e-9).inverse(pd_floor));
  return op_norm(mul(rac, inv) - LocalOperator::identity(rac.support(), rac.local_dim()));
}

CorrelationReport mixing_norm(const GibbsEnsemble& ens, const Region& a, const Region& c, double pd_floor,
                              const Metric& m) {
  const double v = mixing_norm(ens.marginal(a.unite(c)).op(), a, c, pd_floor);
  return make_report(Measure::MixingNorm, a, c, v, v, ens.beta(), m);
}

double local_indistinguishability(const Interaction& phi, const Region& a, const Region& b, const Region& c,
                                  const LocalOperator& o_a, double beta) {
  if (a.intersects(b) || a.intersects(c) || b.intersects(c))
    throw OperatorError("local_indistinguishability: regions must be disjoint");
  if (a.unite(b).unite(c) != phi.ambient())
    throw OperatorError("local_indistinguishability: A, B, C must partition the ambient region");
  if (!a.contains(o_a.support())) throw OperatorError("local_indistinguishability: observable not supported in A");
  const GibbsEnsemble full(phi, phi.ambient(), beta);
  const GibbsEnsemble cut(phi, a.unite(b), beta);
  return std::abs(full.expectation(o_a) - cut.expectation(o_a));
}

InequalityChain inequality_chain(const LocalOperator& rho, const Region& a, const Region& c, double tol) {
  InequalityChain ch;
  ch.mutual_information = mutual_information(rho, a, c);
  ch.trace_distance = trace_norm(correlation_operator(rho, a, c));
  ch.covariance_lower = covariance(rho, a, c, 4, 100).lower;
  ch.pinsker_holds = ch.mutual_information + tol >= 0.5 * ch.trace_distance * ch.trace_distance;
  ch.covariance_holds = ch.trace_distance + tol >= ch.covariance_lower;
  return ch;
}

InequalityChain inequality_chain(const GibbsEnsemble& ens, const Region& a, const Region& c, double tol) {
  return inequality_chain(ens.marginal(a.unite(c)).op(), a, c, tol);
}

DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples, double floor) {
  DecayFit fit;
  for (const auto& s : samples)
    if (s.second > floor && std::isfinite(s.second)) fit.samples.push_back(s);
  const auto n = static_cast<double>(fit.samples.size());
  if (fit.samples.size() < 3) throw std::invalid_argument("fit_decay: fewer than 3 samples above the floor");
  double sx = 0, sy = 0;
  for (const auto& [d, v] : fit.samples) {
    sx += d;
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [d, v] : fit.samples) {
    sxx += (d - mx) * (d - mx);
    sxy += (d - mx) * (std::log(v) - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_decay: all samples at the same distance");
  const double slope = sxy / sxx;
  fit.rate = -slope;
  fit.prefactor = std::exp(my - slope * mx);
  double ss = 0;
  for (const auto& [d, v] : fit.samples) {
    const double e = std::log(v) - (my + slope * (d - mx));
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace qgibbs
