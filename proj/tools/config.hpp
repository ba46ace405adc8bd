#pragma once

// Experiment configuration read from a YAML file.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgibbs/interactions.hpp"
#include "qgibbs/verify.hpp"

namespace qgibbs::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  std::string family = "ising";  // ising | tfim | heisenberg | random
  int sites = 8;
  double j = 1.0;
  double h = 0.5;
  double jx = 1.0, jy = 1.0, jz = 1.0;
  std::uint64_t seed = 1;
  RangeProfile profile;  // random family only

  /// The model on an arbitrary chain region.
  [[nodiscard]] Interaction build(const Region& ambient) const;
  [[nodiscard]] Interaction build() const { return build(Region::chain(sites)); }
};

struct ExperimentConfig {
  std::string path;
  std::string hash;  // digest of the file contents
  ModelSpec model;
  Region a, b, c;
  std::vector<double> betas{0.2};
  double lambda = 0.5;
  double mu = 0.5;
  ChainSweep sweep;
  char observable = 'Z';  // Pauli on site 0 for local_indist
  Region hierarchy_a;
  std::vector<Region> hierarchy_cs;
  std::vector<std::string> checks;
  bool checks_listed = false;  // a `checks` key was present, possibly empty
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out_dir = "qgibbs_out";
  std::size_t max_sites = 12;
  int window = 6;  // sites used by the self-test checks
};

/// Parses and validates. Errors carry "path:line:" prefixes.
ExperimentConfig load_config(const std::string& path);

/// Check names accepted in the `checks` list.
const std::vector<std::string>& known_checks();

}  // namespace qgibbs::cli
