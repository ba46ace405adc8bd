#include "qgibbs/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "qgibbs/expansionals.hpp"
#include "qgibbs/gibbs.hpp"

namespace qgibbs {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
 public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

void bound_status(CheckResult& r) {
  r.margin = r.rhs - r.lhs;
  r.status = r.margin >= -kBoundTol ? status::kPass : status::kFail;
}

// Mobius interactions for L in {A, C, AC, empty}, in that order.
std::vector<EffectiveInteraction> effective_family(const Interaction& phi, const Region& a, const Region& c,
                                                   double beta) {
  const Region& lambda = phi.ambient();
  std::vector<EffectiveInteraction> out;
  for (const Region& l : {a, c, a.unite(c), Region{}}) out.push_back(mobius_effective(phi, l, beta, lambda));
  return out;
}

void check_partition(const Interaction& phi, const Region& a, const Region& b, const Region& c) {
  if (a.empty() || c.empty()) throw std::invalid_argument("A and C must be nonempty");
  if (a.intersects(b) || a.intersects(c) || b.intersects(c)) throw std::invalid_argument("regions must be disjoint");
  if (a.unite(b).unite(c) != phi.ambient()) throw std::invalid_argument("A, B, C must partition the ambient region");
}

struct ChainGeometry {
  Region lambda, a, b, c;
  double dist = 0.0;
};

ChainGeometry chain_geometry(const ChainSweep& s, int width) {
  if (s.a_size < 1 || s.c_size < 1 || width < 0) throw std::invalid_argument("chain sweep: bad sizes");
  ChainGeometry g;
  const int n = s.a_size + width + s.c_size;
  g.lambda = Region::chain(n);
  g.a = Region::interval(0, s.a_size - 1);
  g.b = width > 0 ? Region::interval(s.a_size, s.a_size + width - 1) : Region{};
  g.c = Region::interval(s.a_size + width, n - 1);
  g.dist = width + 1;
  return g;
}

template <class F>
CheckResult chain_decay(std::string id, const ChainSweep& sweep, double beta, int threads, F&& value) {
  const Stopwatch clock;
  if (sweep.widths.empty()) throw std::invalid_argument(id + ": no widths");
  std::vector<std::pair<double, double>> samples(sweep.widths.size());
  parallel_for(sweep.widths.size(), threads, [&](std::size_t i) {
    const ChainGeometry g = chain_geometry(sweep, sweep.widths[i]);
    samples[i] = {g.dist, value(g)};
  });
  std::sort(samples.begin(), samples.end());
  CheckResult r = decay_verdict(std::move(id), samples);
  r.beta = beta;
  r.params["a_size"] = sweep.a_size;
  r.params["c_size"] = sweep.c_size;
  r.runtime = clock.seconds();
  return r;
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads > 0 ? threads : 1, n));
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

std::string digest(const std::string& bytes) {
  std::uint64_t h = kFnvOffset;
  fnv(h, bytes.data(), bytes.size());
  return hex64(h);
}

std::string model_hash(const Interaction& phi) {
  std::uint64_t h = kFnvOffset;
  const int d = phi.local_dim();
  fnv(h, &d, sizeof d);
  const std::string amb = to_string(phi.ambient());
  fnv(h, amb.data(), amb.size());
  for (const auto& [x, q] : phi.terms()) {
    const std::string s = to_string(x);
    fnv(h, s.data(), s.size());
    const Matrix m = q.matrix();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double re = m(i, j).real() + 0.0, im = m(i, j).imag() + 0.0;  // folds -0 into +0
        fnv(h, &re, sizeof re);
        fnv(h, &im, sizeof im);
      }
  }
  return hex64(h);
}

double effective_norm(const EffectiveInteraction& e, double lambda, double mu, const Metric& m, bool meeting_l) {
  double best = 0.0;
  std::vector<std::pair<const Region*, double>> weighted;
  for (const auto& [x, q] : e.terms) {
    if (meeting_l && !x.intersects(e.kept)) continue;
    weighted.emplace_back(&x, op_norm(q) * std::exp(lambda * static_cast<double>(x.size()) + mu * diam(x, m)));
  }
  for (const Site& s : e.ambient) {
    double acc = 0.0;
    for (const auto& [x, w] : weighted)
      if (x->contains(s)) acc += w;
    best = std::max(best, acc);
  }
  return best;
}

double mixing_bound(double c, double delta, double lambda, double mu, double beta, const Region& a,
                    const Region& c_region, const Metric& m, double extra) {
  if (!(beta < lambda / (2 * delta)) && delta > 0)
    throw RegimeError("mixing bound: beta is not below lambda / (2 Delta)");
  const double t = c * delta * lambda * beta / (lambda - 2 * delta * beta) *
                   boundary_exponential_sum(a, c_region, mu, m);
  return std::exp(t) * (t + extra);
}

CheckResult check_mixing_strong(const Interaction& phi, const Region& a, const Region& c, double beta,
                                double lambda, double mu) {
  const Stopwatch clock;
  check_partition(phi, a, phi.ambient().minus(a.unite(c)), c);
  CheckResult r;
  r.id = "mixing_strong";
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = dist(a, c, phi.metric());
  double delta = 0.0;
  for (const EffectiveInteraction& e : effective_family(phi, a, c, beta))
    delta = std::max(delta, effective_norm(e, lambda, mu, phi.metric()));
  r.params = {{"Delta", delta}, {"lambda", lambda}, {"mu", mu}, {"beta_max", lambda / (2 * delta)}};
  r.lhs = mixing_norm(GibbsEnsemble(phi, phi.ambient(), beta), a, c).value();
  if (delta > 0 && !(beta < lambda / (2 * delta))) {
    r.status = status::kOutOfRegime;
    r.rhs = r.margin = kNan;
    r.note = "beta is not below lambda / (2 Delta)";
  } else {
    r.rhs = mixing_bound(4, delta, lambda, mu, beta, a, c, phi.metric());
    bound_status(r);
  }
  r.runtime = clock.seconds();
  return r;
}

CheckResult check_mixing_weak(const Interaction& phi, const Region& a, const Region& b, const Region& c, double beta,
                              double lambda, double mu) {
  const Stopwatch clock;
  check_partition(phi, a, b, c);
  CheckResult r;
  r.id = "mixing_weak";
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = dist(a, c, phi.metric());
  double delta = 0.0;
  const Region& lambda_region = phi.ambient();
  for (const Region& l : {a, c, a.unite(c)})
    delta = std::max(delta, effective_norm(mobius_effective(phi, l, beta, lambda_region), lambda, mu,
                                           phi.metric(), true));
  const Kappa k = kappa(phi, a, b, c, beta);
  r.params = {{"Delta", delta},
              {"lambda", lambda},
              {"mu", mu},
              {"beta_max", lambda / (2 * delta)},
              {"kappa_minus_one", k.abs_minus_one}};
  r.lhs = mixing_norm(GibbsEnsemble(phi, lambda_region, beta), a, c).value();
  if (delta > 0 && !(beta < lambda / (2 * delta))) {
    r.status = status::kOutOfRegime;
    r.rhs = r.margin = kNan;
    r.note = "beta is not below lambda / (2 Delta)";
  } else {
    r.rhs = mixing_bound(3, delta, lambda, mu, beta, a, c, phi.metric(), k.abs_minus_one);
    bound_status(r);
    if (!phi.is_diagonal()) {
      r.status = status::kInformational;
      r.note = "off-diagonal terms: short-range weak interaction not certified";
    }
  }
  r.runtime = clock.seconds();
  return r;
}

CheckResult decay_verdict(std::string id, const std::vector<std::pair<double, double>>& samples,
                          double residual_max) {
  CheckResult r;
  r.id = std::move(id);
  std::size_t above = 0;
  for (const auto& [d, v] : samples) {
    r.samples.push_back({d, v, kNan, kNan, status::kSample});
    if (v > kDecayFloor && std::isfinite(v)) ++above;
  }
  r.dist = kNan;
  r.params["samples"] = static_cast<double>(samples.size());
  if (above == 0) {
    r.status = status::kPass;
    r.note = "decayed below precision";
    r.lhs = r.rhs = r.margin = kNan;
    return r;
  }
  if (above < 3) {
    r.status = status::kFail;
    r.note = "fewer than 3 samples above the floor";
    r.lhs = r.rhs = r.margin = kNan;
    return r;
  }
  const DecayFit fit = fit_decay(samples);
  for (CheckRow& row : r.samples) {
    row.rhs = fit.prefactor * std::exp(-fit.rate * row.dist);
    row.margin = row.rhs - row.lhs;
  }
  // Summary row: lhs is the fitted rate, rhs the log residual.
  r.lhs = fit.rate;
  r.rhs = fit.residual;
  r.margin = std::min(fit.rate, residual_max - fit.residual);
  r.params["alpha"] = fit.rate;
  r.params["K"] = fit.prefactor;
  r.params["log_residual"] = fit.residual;
  r.params["residual_max"] = residual_max;
  r.status = fit.rate > 0 && fit.residual < residual_max ? status::kPass : status::kFail;
  return r;
}

CheckResult check_kappa_decay(const ModelFactory& model, double beta, const ChainSweep& sweep, int threads) {
  CheckResult r = chain_decay("kappa_decay", sweep, beta, threads, [&](const ChainGeometry& g) {
    return kappa(model(g.lambda), g.a, g.b, g.c, beta).abs_minus_one;
  });
  r.model_hash = model_hash(model(chain_geometry(sweep, sweep.widths.front()).lambda));
  return r;
}

CheckResult check_local_indist(const ModelFactory& model, double beta, const ChainSweep& sweep,
                               const LocalOperator& observable, int threads) {
  CheckResult r = chain_decay("local_indist", sweep, beta, threads, [&](const ChainGeometry& g) {
    return local_indistinguishability(model(g.lambda), g.a, g.b, g.c, observable, beta);
  });
  r.model_hash = model_hash(model(chain_geometry(sweep, sweep.widths.front()).lambda));
  return r;
}

HierarchySweep check_hierarchy_sweep(const Interaction& phi, double beta, const Region& a,
                                     const std::vector<Region>& cs, std::uint64_t seed, int threads) {
  const Stopwatch clock;
  const GibbsEnsemble ens(phi, phi.ambient(), beta);
  HierarchySweep out;
  out.rows.resize(cs.size());
  parallel_for(cs.size(), threads, [&](std::size_t i) {
    const Region& c = cs[i];
    if (c.intersects(a)) throw std::invalid_argument("hierarchy sweep: C meets A");
    const LocalOperator rac = ens.marginal(a.unite(c)).op();
    HierarchyRow& row = out.rows[i];
    row.dist = dist(a, c, phi.metric());
    row.mixing = mixing_norm(rac, a, c);
    const CovarianceBounds cov = covariance(rac, a, c, 4, 100, seed + i);
    row.covariance_lower = cov.lower;
    row.covariance_upper = cov.upper;
    const InequalityChain ch = inequality_chain(rac, a, c);
    row.mutual_information = ch.mutual_information;
    row.chain_holds = ch.holds();
  });
  std::sort(out.rows.begin(), out.rows.end(), [](const auto& x, const auto& y) { return x.dist < y.dist; });

  std::vector<std::pair<double, double>> mix, mi, cov;
  bool chain = true;
  for (const HierarchyRow& row : out.rows) {
    mix.emplace_back(row.dist, row.mixing);
    mi.emplace_back(row.dist, row.mutual_information);
    cov.emplace_back(row.dist, row.covariance_lower);
    chain = chain && row.chain_holds;
  }
  const CheckResult fm = decay_verdict("hierarchy_mixing", mix);
  const CheckResult fi = decay_verdict("hierarchy_mi", mi);
  const CheckResult fc = decay_verdict("hierarchy_cov", cov);

  CheckResult& r = out.result;
  r.id = "hierarchy_sweep";
  r.model_hash = model_hash(phi);
  r.beta = beta;
  r.dist = kNan;
  r.params["alpha_mixing"] = fm.params.count("alpha") ? fm.params.at("alpha") : kNan;
  r.params["alpha_mi"] = fi.params.count("alpha") ? fi.params.at("alpha") : kNan;
  r.params["alpha_cov"] = fc.params.count("alpha") ? fc.params.at("alpha") : kNan;
  r.params["chain_holds"] = chain ? 1.0 : 0.0;
  for (const CheckResult* f : {&fm, &fi, &fc})
    for (CheckRow row : f->samples) {
      row.status = f->id;
      r.samples.push_back(row);
    }
  r.lhs = std::min({fm.lhs, fi.lhs, fc.lhs});
  r.rhs = std::max({fm.rhs, fi.rhs, fc.rhs});
  r.margin = std::min({fm.margin, fi.margin, fc.margin});
  const bool fits = fm.passed() && fi.passed() && fc.passed();
  r.status = fits && chain ? status::kPass : status::kFail;
  if (!chain) r.note = "inequality chain violated";
  for (const CheckResult* f : {&fm, &fi, &fc})
    if (!f->note.empty()) r.note += (r.note.empty() ? "" : "; ") + f->id + ": " + f->note;
  try {
    out.mixing_fit = fit_decay(mix);
    out.mi_fit = fit_decay(mi);
    out.cov_fit = fit_decay(cov);
  } catch (const std::invalid_argument&) {
    // Too few samples above the floor; the verdicts above already say so.
  }
  r.runtime = clock.seconds();
  return out;
}

std::string csv_header() { return "check_id,model_hash,beta,dist,lhs,rhs,margin,status"; }

std::vector<std::string> csv_rows(const CheckResult& r) {
  std::vector<std::string> out;
  auto line = [&](double d, double lhs, double rhs, double margin, const std::string& st) {
    out.push_back(r.id + ',' + r.model_hash + ',' + fmt(r.beta) + ',' + fmt(d) + ',' + fmt(lhs) + ',' + fmt(rhs) +
                  ',' + fmt(margin) + ',' + st);
  };
  for (const CheckRow& s : r.samples) line(s.dist, s.lhs, s.rhs, s.margin, s.status);
  line(r.dist, r.lhs, r.rhs, r.margin, r.status);
  return out;
}

nlohmann::json to_json(const CheckResult& r) {
  auto num = [](double v) -> nlohmann::json { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json j;
  j["check_id"] = r.id;
  j["model_hash"] = r.model_hash;
  j["beta"] = r.beta;
  j["dist"] = num(r.dist);
  j["lhs"] = num(r.lhs);
  j["rhs"] = num(r.rhs);
  j["margin"] = num(r.margin);
  j["status"] = r.status;
  if (!r.note.empty()) j["note"] = r.note;
  j["runtime_s"] = r.runtime;
  nlohmann::json p = nlohmann::json::object();
  for (const auto& [k, v] : r.params) p[k] = num(v);
  j["params"] = p;
  nlohmann::json s = nlohmann::json::array();
  for (const CheckRow& row : r.samples)
    s.push_back({{"dist", num(row.dist)}, {"value", num(row.lhs)}, {"fit", num(row.rhs)}, {"series", row.status}});
  j["samples"] = s;
  return j;
}

}  // namespace qgibbs
