#pragma once

// Mixing-bound checks on concrete models, decay sweeps over chain
// geometries, and their CSV / JSON rendering.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgibbs/correlations.hpp"
#include "qgibbs/effective_hamiltonians.hpp"

namespace qgibbs {

namespace status {
inline constexpr const char* kPass = "pass";
inline constexpr const char* kFail = "fail";
inline constexpr const char* kOutOfRegime = "out of regime";
inline constexpr const char* kInformational = "informational";
inline constexpr const char* kSample = "sample";
}  // namespace status

inline constexpr double kBoundTol = 1e-9;
inline constexpr double kDecayResidualMax = 0.5;

/// One line of the CSV output. dist is NaN for rows without a distance.
struct CheckRow {
  double dist = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  std::string status;
};

struct CheckResult {
  std::string id;
  std::string model_hash;
  double beta = 0.0;
  double dist = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  std::string status;
  std::string note;
  double runtime = 0.0;  // seconds
  std::map<std::string, double> params;
  std::vector<CheckRow> samples;  // per-distance values of sweeps

  [[nodiscard]] bool passed() const { return status == status::kPass; }
  [[nodiscard]] bool failed() const { return status == status::kFail; }
};

/// 16 hex digits of the FNV-1a hash of `bytes`.
std::string digest(const std::string& bytes);

/// Hex FNV-1a digest of the supports and matrix entries of phi.
std::string model_hash(const Interaction& phi);

/// sup_x sum_{X containing x} ||Phi~_X|| e^{lambda |X| + mu diam X}; with
/// `meeting_l` only the X that meet the kept region count.
double effective_norm(const EffectiveInteraction& e, double lambda, double mu, const Metric& m,
                      bool meeting_l = false);

/// exp(T) (T + extra) with T = c Delta lambda beta / (lambda - 2 Delta beta) sum_{x in A} e^{-mu dist(x, C)}.
double mixing_bound(double c, double delta, double lambda, double mu, double beta, const Region& a,
                    const Region& c_region, const Metric& m, double extra = 0.0);

/// Mixing norm of the Gibbs state of phi on its ambient region against
/// exp(T) T with T built from Delta = max_L ||Phi~^L||_{lambda,mu}, L in {A, C, AC, empty}.
CheckResult check_mixing_strong(const Interaction& phi, const Region& a, const Region& c, double beta,
                                double lambda, double mu);

/// Same with the weak interactions (terms meeting L), constant 3 and the
/// extra |kappa_ABC - 1|. Models with off-diagonal terms are informational.
CheckResult check_mixing_weak(const Interaction& phi, const Region& a, const Region& b, const Region& c, double beta,
                              double lambda, double mu);

/// Chains A | B | C with |B| running over `widths`.
struct ChainSweep {
  int a_size = 1;
  int c_size = 1;
  std::vector<int> widths;
};

using ModelFactory = std::function<Interaction(const Region&)>;

/// Fit of |kappa_ABC - 1| against dist(A, C).
CheckResult check_kappa_decay(const ModelFactory& model, double beta, const ChainSweep& sweep, int threads = 1);

/// Fit of |Tr[rho^{ABC} O] - Tr[rho^{AB} O]| against dist(A, C). O lives on A
/// with site 0 as its first site.
CheckResult check_local_indist(const ModelFactory& model, double beta, const ChainSweep& sweep,
                               const LocalOperator& observable, int threads = 1);

struct HierarchyRow {
  double dist = 0.0;
  double mixing = 0.0;
  double mutual_information = 0.0;
  double covariance_lower = 0.0;
  double covariance_upper = 0.0;
  bool chain_holds = true;
};

struct HierarchySweep {
  CheckResult result;
  std::vector<HierarchyRow> rows;
  DecayFit mixing_fit, mi_fit, cov_fit;
};

/// A fixed, C = {c} for each c in `cs` on the ambient region of phi: mixing
/// value, mutual information and covariance per distance, the inequality
/// chain at each, and three decay fits.
HierarchySweep check_hierarchy_sweep(const Interaction& phi, double beta, const Region& a,
                                     const std::vector<Region>& cs, std::uint64_t seed = 1, int threads = 1);

/// Decay check verdict from a set of (distance, value) samples.
CheckResult decay_verdict(std::string id, const std::vector<std::pair<double, double>>& samples,
                          double residual_max = kDecayResidualMax);

/// check_id,model_hash,beta,dist,lhs,rhs,margin,status
std::string csv_header();
/// Sample rows followed by the summary row.
std::vector<std::string> csv_rows(const CheckResult& r);

nlohmann::json to_json(const CheckResult& r);

/// Runs f(0..n-1) on up to `threads` workers and rethrows the first failure.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& f);

}  // namespace qgibbs
