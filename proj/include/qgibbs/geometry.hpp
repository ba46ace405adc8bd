#pragma once

// Finite sublattices of Z^g: sites, canonically ordered regions, p-metrics
// and the boundary quantities used by the locality bounds.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgibbs {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Site {
  std::vector<int> coords;

  Site() = default;
  Site(std::initializer_list<int> c) : coords(c) {}
  explicit Site(std::vector<int> c) : coords(std::move(c)) {}

  [[nodiscard]] int dim() const { return static_cast<int>(coords.size()); }

  friend bool operator==(const Site&, const Site&) = default;
  friend auto operator<=>(const Site& a, const Site& b) { return a.coords <=> b.coords; }
};

std::string to_string(const Site& s);

/// Distance on Z^g induced by the l_p norm, p in {1, 2, inf}.
class Metric {
 public:
  enum class Norm { L1, L2, LInf };

  constexpr Metric() = default;
  constexpr explicit Metric(Norm n) : norm_(n) {}

  static Metric parse(const std::string& name);

  [[nodiscard]] Norm norm() const { return norm_; }
  [[nodiscard]] double operator()(const Site& x, const Site& y) const;
  [[nodiscard]] std::string name() const;

 private:
  Norm norm_ = Norm::LInf;
};

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Finite set of sites, kept sorted lexicographically and duplicate free.
/// The position of a site in `sites()` is its tensor leg in any operator
/// supported on the region.
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Site> sites);
  Region(std::initializer_list<Site> sites) : Region(std::vector<Site>(sites)) {}

  /// Sites 0..n-1 of a one-dimensional chain.
  static Region chain(int n);
  /// Sites lo..hi (inclusive) of a one-dimensional chain.
  static Region interval(int lo, int hi);
  /// Axis-aligned box with inclusive corners.
  static Region box(const std::vector<int>& lo, const std::vector<int>& hi);

  [[nodiscard]] const std::vector<Site>& sites() const { return sites_; }
  [[nodiscard]] std::size_t size() const { return sites_.size(); }
  [[nodiscard]] bool empty() const { return sites_.empty(); }
  /// Lattice dimension, 0 for the empty region.
  [[nodiscard]] int dim() const { return sites_.empty() ? 0 : sites_.front().dim(); }
  [[nodiscard]] const Site& operator[](std::size_t i) const { return sites_[i]; }
  [[nodiscard]] auto begin() const { return sites_.begin(); }
  [[nodiscard]] auto end() const { return sites_.end(); }

  [[nodiscard]] bool contains(const Site& s) const;
  [[nodiscard]] bool contains(const Region& other) const;
  [[nodiscard]] bool intersects(const Region& other) const;
  /// Leg index of `s`, or -1 when absent.
  [[nodiscard]] int index_of(const Site& s) const;

  [[nodiscard]] Region unite(const Region& other) const;
  [[nodiscard]] Region intersect(const Region& other) const;
  [[nodiscard]] Region minus(const Region& other) const;

  /// Sub-region selected by a bit mask over leg positions (bit i = site i).
  [[nodiscard]] Region subset(std::uint64_t mask) const;
  /// Bit mask of `sub` relative to this region; `sub` must be contained.
  [[nodiscard]] std::uint64_t mask_of(const Region& sub) const;

  friend bool operator==(const Region&, const Region&) = default;
  friend auto operator<=>(const Region& a, const Region& b) { return a.sites_ <=> b.sites_; }

 private:
  std::vector<Site> sites_;
};

std::string to_string(const Region& r);

/// Parses "box: [x0,y0]..[x1,y1]" or a coordinate list "[0,0],[0,1]" / "0,1,2".
Region parse_region(const std::string& text);

double dist(const Region& x, const Region& y, const Metric& m);
double dist(const Site& x, const Region& y, const Metric& m);
double diam(const Region& x, const Metric& m);

/// Sites of A within distance r of ambient \ A. Empty when A == ambient.
Region inner_boundary(const Region& a, double r, const Region& ambient, const Metric& m);

/// Sites of A within distance r of Z^g \ A (the ambient is the whole lattice).
Region lattice_inner_boundary(const Region& a, double r, const Metric& m);

/// Sites of ambient \ A at distance <= 1 from A.
Region outer_boundary(const Region& a, const Region& ambient, const Metric& m);

/// sup_k (2k+1)^g e^{-mu k/2} * sum_{j>=0} e^{-mu j/2}.
double onion_nu(int lattice_dim, double mu);

struct BoundarySum {
  double exact = 0.0;        // sum_{v in A} e^{-mu dist(v, X)}
  double onion_bound = 0.0;  // |dA| * nu * e^{-(mu/2) dist(A, X)}
  std::size_t boundary_size = 0;
  double nu = 0.0;
};

/// Exact boundary sum and its onion bound. |dA| is the inner 1-boundary of A
/// relative to the infinite lattice, as in the shell-counting argument.
BoundarySum boundary_sum(const Region& a, const Region& x, double mu, const Metric& m);

/// Exact sum_{v in A} e^{-mu dist(v, X)}; zero when X is empty.
double boundary_exponential_sum(const Region& a, const Region& x, double mu, const Metric& m);

}  // namespace qgibbs
