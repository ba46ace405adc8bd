#pragma once

// Correlation measures between disjoint regions of a state: covariance,
// mutual information, the mixing-condition norm and local
// indistinguishability, plus exponential decay fits.

#include <cstdint>
#include <string>
#include <vector>

#include "qgibbs/gibbs.hpp"

namespace qgibbs {

enum class Measure { Covariance, MutualInformation, MixingNorm, LocalIndistinguishability, TraceDistance };

std::string measure_name(Measure m);

struct CorrelationReport {
  Measure measure = Measure::Covariance;
  Region a, c;
  double lower = 0.0;
  double upper = 0.0;
  double distance = 0.0;
  double beta = 0.0;

  [[nodiscard]] double value() const { return lower; }
};

std::string csv_header_correlations();
std::string csv_row(const CorrelationReport& r);

/// rho_AC - rho_A (x) rho_C for a state whose support contains A and C.
LocalOperator correlation_operator(const LocalOperator& rho, const Region& a, const Region& c);

struct CovarianceBounds {
  double lower = 0.0;
  double upper = 0.0;
  LocalOperator best_a;
  LocalOperator best_c;
};

/// Certified interval for sup |Tr[M (O_A (x) O_C)]| over ||O_A||, ||O_C|| <= 1.
/// Lower bound by alternating maximization from random starts, upper bound ||M||_1.
CovarianceBounds covariance(const LocalOperator& rho, const Region& a, const Region& c, int restarts = 8,
                            int iters = 200, std::uint64_t seed = 1);
CorrelationReport covariance(const GibbsEnsemble& ens, const Region& a, const Region& c, int restarts = 8,
                             int iters = 200, std::uint64_t seed = 1, const Metric& m = Metric{});

double mutual_information(const LocalOperator& rho, const Region& a, const Region& c);
CorrelationReport mutual_information(const GibbsEnsemble& ens, const Region& a, const Region& c,
                                     const Metric& m = Metric{});

/// || rho_AC (rho_A^{-1} (x) rho_C^{-1}) - 1 ||.
double mixing_norm(const LocalOperator& rho, const Region& a, const Region& c, double pd_floor = kPdFloor);
CorrelationReport mixing_norm(const GibbsEnsemble& ens, const Region& a, const Region& c,
                              double pd_floor = kPdFloor, const Metric& m = Metric{});

/// |Tr[rho^{ABC} O_A] - Tr[rho^{AB} O_A]|.
double local_indistinguishability(const Interaction& phi, const Region& a, const Region& b, const Region& c,
                                  const LocalOperator& o_a, double beta);

struct InequalityChain {
  double mutual_information = 0.0;
  double trace_distance = 0.0;  // ||rho_AC - rho_A (x) rho_C||_1
  double covariance_lower = 0.0;
  bool pinsker_holds = false;
  bool covariance_holds = false;
  [[nodiscard]] bool holds() const { return pinsker_holds && covariance_holds; }
};

InequalityChain inequality_chain(const LocalOperator& rho, const Region& a, const Region& c, double tol = 1e-10);
InequalityChain inequality_chain(const GibbsEnsemble& ens, const Region& a, const Region& c, double tol = 1e-10);

struct DecayFit {
  std::vector<std::pair<double, double>> samples;  // (distance, value) above the floor
  double rate = 0.0;                                // alpha
  double prefactor = 0.0;                           // K
  double residual = 0.0;                            // rms of log residuals
};

inline constexpr double kDecayFloor = 1e-12;

/// Least squares fit of log v = log K - alpha d.
DecayFit fit_decay(const std::vector<std::pair<double, double>>& samples, double floor = kDecayFloor);

}  // namespace qgibbs
