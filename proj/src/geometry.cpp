#include "qgibbs/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace qgibbs {

std::string to_string(const Site& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.coords.size(); ++i) {
    if (i) os << ',';
    os << s.coords[i];
  }
  os << ')';
  return os.str();
}

Metric Metric::parse(const std::string& name) {
  if (name == "1" || name == "l1") return Metric(Norm::L1);
  if (name == "2" || name == "l2") return Metric(Norm::L2);
  if (name == "inf" || name == "linf" || name == "sup") return Metric(Norm::LInf);
  throw GeometryError("unknown metric '" + name + "' (expected 1, 2 or inf)");
}

double Metric::operator()(const Site& x, const Site& y) const {
  if (x.dim() != y.dim()) throw GeometryError("sites of different lattice dimension");
  double acc = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    const double d = std::abs(x.coords[i] - y.coords[i]);
    switch (norm_) {
      case Norm::L1: acc += d; break;
      case Norm::L2: acc += d * d; break;
      case Norm::LInf: acc = std::max(acc, d); break;
    }
  }
  return norm_ == Norm::L2 ? std::sqrt(acc) : acc;
}

std::string Metric::name() const {
  switch (norm_) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    case Norm::LInf: return "inf";
  }
  return "inf";
}

Region::Region(std::vector<Site> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end())
    throw GeometryError("duplicate site in region");
  for (const auto& s : sites_) {
    if (s.dim() < 1) throw GeometryError("site with empty coordinate vector");
    if (s.dim() != sites_.front().dim()) throw GeometryError("mixed lattice dimensions in region");
  }
}

Region Region::chain(int n) { return n <= 0 ? Region{} : interval(0, n - 1); }

Region Region::interval(int lo, int hi) {
  std::vector<Site> s;
  for (int i = lo; i <= hi; ++i) s.push_back(Site{i});
  return Region(std::move(s));
}

Region Region::box(const std::vector<int>& lo, const std::vector<int>& hi) {
  if (lo.size() != hi.size() || lo.empty()) throw GeometryError("box corners of mismatched dimension");
  std::vector<Site> out;
  std::vector<int> cur = lo;
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (hi[i] < lo[i]) return Region{};
  while (true) {
    out.emplace_back(cur);
    int axis = static_cast<int>(cur.size()) - 1;
    while (axis >= 0 && cur[axis] == hi[axis]) {
      cur[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
    ++cur[axis];
  }
  return Region(std::move(out));
}

bool Region::contains(const Site& s) const { return std::binary_search(sites_.begin(), sites_.end(), s); }

bool Region::contains(const Region& other) const {
  return std::includes(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end());
}

bool Region::intersects(const Region& other) const {
  auto a = sites_.begin();
  auto b = other.sites_.begin();
  while (a != sites_.end() && b != other.sites_.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a;
    else ++b;
  }
  return false;
}

int Region::index_of(const Site& s) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it == sites_.end() || !(*it == s)) return -1;
  return static_cast<int>(it - sites_.begin());
}

Region Region::unite(const Region& other) const {
  Region r;
  std::set_union(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                 std::back_inserter(r.sites_));
  return r;
}

Region Region::intersect(const Region& other) const {
  Region r;
  std::set_intersection(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                        std::back_inserter(r.sites_));
  return r;
}

Region Region::minus(const Region& other) const {
  Region r;
  std::set_difference(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end(),
                      std::back_inserter(r.sites_));
  return r;
}

Region Region::subset(std::uint64_t mask) const {
  Region r;
  for (std::size_t i = 0; i < sites_.size(); ++i)
    if (mask & (std::uint64_t{1} << i)) r.sites_.push_back(sites_[i]);
  return r;
}

std::uint64_t Region::mask_of(const Region& sub) const {
  std::uint64_t m = 0;
  for (const auto& s : sub) {
    const int i = index_of(s);
    if (i < 0) throw GeometryError("mask_of: " + to_string(s) + " not in region");
    m |= std::uint64_t{1} << i;
  }
  return m;
}

std::string to_string(const Region& r) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) os << ',';
    if (r[i].dim() == 1) os << r[i].coords[0];
    else os << to_string(r[i]);
  }
  os << '}';
  return os.str();
}

namespace {

std::string strip(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::string tok;
  std::istringstream is(s);
  while (std::getline(is, tok, ',')) {
    tok = strip(tok);
    if (tok.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw GeometryError("bad integer '" + tok + "' in region literal");
    }
    if (used != tok.size()) throw GeometryError("bad integer '" + tok + "' in region literal");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> bracket_groups(const std::string& s) {
  std::vector<std::string> groups;
  std::size_t pos = 0;
  while ((pos = s.find('[', pos)) != std::string::npos) {
    const auto close = s.find(']', pos);
    if (close == std::string::npos) throw GeometryError("unbalanced '[' in region literal");
    groups.push_back(s.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return groups;
}

}  // namespace

Region parse_region(const std::string& text) {
  const std::string t = strip(text);
  if (t.empty() || t == "{}" || t == "[]") return Region{};
  if (t.rfind("box:", 0) == 0) {
    const std::string body = strip(t.substr(4));
    const auto dots = body.find("..");
    if (dots == std::string::npos) throw GeometryError("box literal needs 'lo..hi': " + text);
    auto lo_g = bracket_groups(body.substr(0, dots));
    auto hi_g = bracket_groups(body.substr(dots + 2));
    std::vector<int> lo, hi;
    if (lo_g.size() == 1 && hi_g.size() == 1) {
      lo = parse_int_list(lo_g[0]);
      hi = parse_int_list(hi_g[0]);
    } else {
      lo = parse_int_list(body.substr(0, dots));
      hi = parse_int_list(body.substr(dots + 2));
    }
    if (lo.empty() || lo.size() != hi.size()) throw GeometryError("malformed box literal: " + text);
    return Region::box(lo, hi);
  }
  const auto groups = bracket_groups(t);
  std::vector<Site> sites;
  if (!groups.empty()) {
    for (const auto& g : groups) sites.emplace_back(parse_int_list(g));
  } else {
    for (int v : parse_int_list(t)) sites.push_back(Site{v});
  }
  return Region(std::move(sites));
}

double dist(const Site& x, const Region& y, const Metric& m) {
  if (y.empty()) throw GeometryError("empty region");
  double best = kInfiniteDistance;
  for (const auto& s : y) best = std::min(best, m(x, s));
  return best;
}

double dist(const Region& x, const Region& y, const Metric& m) {
  if (x.empty() || y.empty()) throw GeometryError("empty region");
  if (x.dim() != y.dim()) throw GeometryError("regions of different lattice dimension");
  double best = kInfiniteDistance;
  for (const auto& s : x) best = std::min(best, dist(s, y, m));
  return best;
}

double diam(const Region& x, const Metric& m) {
  if (x.empty()) throw GeometryError("empty region");
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) best = std::max(best, m(x[i], x[j]));
  return best;
}

Region inner_boundary(const Region& a, double r, const Region& ambient, const Metric& m) {
  if (!ambient.contains(a)) throw GeometryError("inner_boundary: region not inside ambient");
  const Region comp = ambient.minus(a);
  if (comp.empty() || a.empty()) return Region{};
  std::vector<Site> out;
  for (const auto& v : a)
    if (dist(v, comp, m) <= r) out.push_back(v);
  return Region(std::move(out));
}

Region lattice_inner_boundary(const Region& a, double r, const Metric& m) {
  if (a.empty()) return Region{};
  const int g = a.dim();
  const int reach = static_cast<int>(std::floor(r));
  std::vector<Site> out;
  for (const auto& v : a) {
    std::vector<int> lo(g), hi(g);
    for (int i = 0; i < g; ++i) {
      lo[i] = v.coords[i] - reach;
      hi[i] = v.coords[i] + reach;
    }
    bool near = false;
    for (const auto& w : Region::box(lo, hi)) {
      if (!a.contains(w) && m(v, w) <= r) {
        near = true;
        break;
      }
    }
    if (near) out.push_back(v);
  }
  return Region(std::move(out));
}

Region outer_boundary(const Region& a, const Region& ambient, const Metric& m) {
  if (!ambient.contains(a)) throw GeometryError("outer_boundary: region not inside ambient");
  if (a.empty()) return Region{};
  std::vector<Site> out;
  for (const auto& v : ambient.minus(a))
    if (dist(v, a, m) <= 1.0) out.push_back(v);
  return Region(std::move(out));
}

double onion_nu(int lattice_dim, double mu) {
  if (mu <= 0) throw GeometryError("onion constant needs mu > 0");
  // (2k+1)^g e^{-mu k/2} is unimodal in k; scan past the maximum.
  const double kstar = 2.0 * lattice_dim / mu;
  const int kmax = static_cast<int>(std::ceil(kstar)) + 2;
  double sup = 0.0;
  for (int k = 0; k <= kmax; ++k)
    sup = std::max(sup, std::pow(2.0 * k + 1.0, lattice_dim) * std::exp(-mu * k / 2.0));
  return sup / (1.0 - std::exp(-mu / 2.0));
}

double boundary_exponential_sum(const Region& a, const Region& x, double mu, const Metric& m) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (const auto& v : a) s += std::exp(-mu * dist(v, x, m));
  return s;
}

BoundarySum boundary_sum(const Region& a, const Region& x, double mu, const Metric& m) {
  if (a.intersects(x)) throw GeometryError("boundary_sum: regions overlap");
  if (mu <= 0) throw GeometryError("boundary_sum: mu must be positive");
  BoundarySum out;
  out.exact = boundary_exponential_sum(a, x, mu, m);
  out.boundary_size = lattice_inner_boundary(a, 1.0, m).size();
  out.nu = onion_nu(a.empty() ? 1 : a.dim(), mu);
  const double d = (a.empty() || x.empty()) ? kInfiniteDistance : dist(a, x, m);
  out.onion_bound = static_cast<double>(out.boundary_size) * out.nu * std::exp(-0.5 * mu * d);
  return out;
}

}  // namespace qgibbs
