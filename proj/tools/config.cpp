#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace qgibbs::cli {

namespace {

const std::set<std::string> kTopKeys = {"model", "regions", "beta", "norm", "sweep", "hierarchy", "checks",
                                        "seed",  "threads", "output", "caps"};

[[noreturn]] void fail(const std::string& path, const YAML::Node& n, const std::string& what) {
  std::ostringstream os;
  os << path << ':';
  if (n && n.Mark().line >= 0) os << n.Mark().line + 1 << ':';
  os << ' ' << what;
  throw ConfigError(os.str());
}

template <class T>
T read(const std::string& path, const YAML::Node& parent, const std::string& key, T fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, n, "bad value for '" + key + "'");
  }
}

Region read_region(const std::string& path, const YAML::Node& parent, const std::string& key) {
  const YAML::Node n = parent[key];
  if (!n) fail(path, parent, "missing region '" + key + "'");
  try {
    if (n.IsSequence()) {
      std::vector<Site> sites;
      for (const auto& v : n) sites.push_back(Site{v.as<int>()});
      return Region(std::move(sites));
    }
    return parse_region(n.as<std::string>());
  } catch (const std::exception& e) {
    fail(path, n, "bad region '" + key + "': " + e.what());
  }
}

void check_keys(const std::string& path, const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(path, kv.first, "unknown key '" + key + "' in " + where);
  }
}

}  // namespace

Interaction ModelSpec::build(const Region& ambient) const {
  if (family == "ising") return ising(ambient, j, h);
  if (family == "tfim") return tfim(ambient, j, h);
  if (family == "heisenberg") return heisenberg(ambient, jx, jy, jz);
  if (family == "random") return random_short_range(ambient, seed, profile);
  throw ConfigError("unknown model family '" + family + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  ExperimentConfig cfg;
  cfg.path = path;
  cfg.hash = digest(buf.str());

  YAML::Node root;
  try {
    root = YAML::Load(buf.str());
  } catch (const YAML::ParserException& e) {
    throw ConfigError(path + ':' + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw ConfigError(path + ": empty configuration");
  if (!root.IsMap()) fail(path, root, "top level must be a mapping");
  check_keys(path, root, kTopKeys, "top level");

  const YAML::Node model = root["model"];
  if (!model || !model.IsMap()) fail(path, root, "missing 'model' block");
  check_keys(path, model, {"family", "sites", "j", "h", "jx", "jy", "jz", "seed", "range", "max_set_size",
                           "target_norm", "diagonal"},
             "model");
  ModelSpec& m = cfg.model;
  m.family = read<std::string>(path, model, "family", m.family);
  if (m.family != "ising" && m.family != "tfim" && m.family != "heisenberg" && m.family != "random")
    fail(path, model["family"], "unknown model family '" + m.family + "'");
  m.sites = read<int>(path, model, "sites", m.sites);
  m.j = read<double>(path, model, "j", m.j);
  m.h = read<double>(path, model, "h", m.h);
  m.jx = read<double>(path, model, "jx", m.jx);
  m.jy = read<double>(path, model, "jy", m.jy);
  m.jz = read<double>(path, model, "jz", m.jz);
  m.seed = read<std::uint64_t>(path, model, "seed", m.seed);
  m.profile.range = read<double>(path, model, "range", 1.0);
  m.profile.max_set_size = read<int>(path, model, "max_set_size", 2);
  m.profile.target_norm = read<double>(path, model, "target_norm", 1.0);
  m.profile.diagonal = read<bool>(path, model, "diagonal", false);

  if (const YAML::Node caps = root["caps"]) {
    check_keys(path, caps, {"max_sites", "window"}, "caps");
    cfg.max_sites = read<std::size_t>(path, caps, "max_sites", cfg.max_sites);
    cfg.window = read<int>(path, caps, "window", cfg.window);
  }
  if (m.sites < 2 || static_cast<std::size_t>(m.sites) > cfg.max_sites)
    fail(path, model["sites"], "sites must lie in [2, " + std::to_string(cfg.max_sites) + "]");
  if (cfg.window < 2) fail(path, root["caps"], "window must be at least 2");
  const Region ambient = Region::chain(m.sites);

  if (const YAML::Node regions = root["regions"]) {
    check_keys(path, regions, {"A", "B", "C"}, "regions");
    cfg.a = read_region(path, regions, "A");
    cfg.c = read_region(path, regions, "C");
    cfg.b = regions["B"] ? read_region(path, regions, "B") : ambient.minus(cfg.a.unite(cfg.c));
    if (cfg.a.empty() || cfg.c.empty()) fail(path, regions, "A and C must be nonempty");
    if (cfg.a.intersects(cfg.b) || cfg.a.intersects(cfg.c) || cfg.b.intersects(cfg.c))
      fail(path, regions, "regions must be disjoint");
    for (const Region* r : {&cfg.a, &cfg.b, &cfg.c})
      if (!ambient.contains(*r)) fail(path, regions, "region " + to_string(*r) + " lies outside the chain");
    if (cfg.a.unite(cfg.b).unite(cfg.c) != ambient) fail(path, regions, "A, B, C must cover the chain");
  } else {
    const int n = m.sites;
    cfg.a = Region{Site{0}};
    cfg.c = Region{Site{n - 1}};
    cfg.b = ambient.minus(cfg.a.unite(cfg.c));
  }

  if (const YAML::Node beta = root["beta"]) {
    cfg.betas.clear();
    auto number = [&](const YAML::Node& v) {
      try {
        return v.as<double>();
      } catch (const YAML::Exception&) {
        fail(path, v, "beta values must be numbers");
      }
    };
    if (beta.IsSequence())
      for (const auto& v : beta) cfg.betas.push_back(number(v));
    else
      cfg.betas.push_back(number(beta));
    if (cfg.betas.empty()) fail(path, beta, "beta list is empty");
    for (double b : cfg.betas)
      if (!(b > 0)) fail(path, beta, "beta values must be positive");
  }

  if (const YAML::Node norm = root["norm"]) {
    check_keys(path, norm, {"lambda", "mu"}, "norm");
    cfg.lambda = read<double>(path, norm, "lambda", cfg.lambda);
    cfg.mu = read<double>(path, norm, "mu", cfg.mu);
    if (!(cfg.lambda > 0) || !(cfg.mu > 0)) fail(path, norm, "lambda and mu must be positive");
  }

  cfg.sweep.widths = {1, 2, 3, 4, 5, 6};
  if (const YAML::Node sweep = root["sweep"]) {
    check_keys(path, sweep, {"a_size", "c_size", "widths", "observable"}, "sweep");
    cfg.sweep.a_size = read<int>(path, sweep, "a_size", 1);
    cfg.sweep.c_size = read<int>(path, sweep, "c_size", 1);
    cfg.sweep.widths = read<std::vector<int>>(path, sweep, "widths", cfg.sweep.widths);
    const auto obs = read<std::string>(path, sweep, "observable", "Z");
    if (obs != "X" && obs != "Y" && obs != "Z") fail(path, sweep["observable"], "observable must be X, Y or Z");
    cfg.observable = obs[0];
    if (cfg.sweep.a_size < 1 || cfg.sweep.c_size < 1) fail(path, sweep, "a_size and c_size must be positive");
    if (cfg.sweep.widths.empty()) fail(path, sweep, "widths must be nonempty");
    for (int w : cfg.sweep.widths) {
      if (w < 0) fail(path, sweep["widths"], "widths must be nonnegative");
      if (static_cast<std::size_t>(cfg.sweep.a_size + w + cfg.sweep.c_size) > cfg.max_sites)
        fail(path, sweep["widths"], "sweep chain exceeds max_sites");
    }
  }

  cfg.hierarchy_a = Region{Site{0}};
  for (int k = 2; k < m.sites; ++k) cfg.hierarchy_cs.push_back(Region{Site{k}});
  if (const YAML::Node hier = root["hierarchy"]) {
    check_keys(path, hier, {"A", "C_sites"}, "hierarchy");
    if (hier["A"]) cfg.hierarchy_a = read_region(path, hier, "A");
    if (hier["C_sites"]) {
      cfg.hierarchy_cs.clear();
      for (int k : read<std::vector<int>>(path, hier, "C_sites", {})) cfg.hierarchy_cs.push_back(Region{Site{k}});
    }
    for (const Region& c : cfg.hierarchy_cs)
      if (!ambient.contains(c) || c.intersects(cfg.hierarchy_a))
        fail(path, hier, "hierarchy site " + to_string(c) + " is outside the chain or meets A");
  }

  if (const YAML::Node checks = root["checks"]) {
    cfg.checks_listed = true;
    if (!checks.IsSequence() && !checks.IsNull()) fail(path, checks, "'checks' must be a list");
    for (const auto& v : checks) {
      const auto name = v.as<std::string>();
      const auto& known = known_checks();
      if (std::find(known.begin(), known.end(), name) == known.end())
        fail(path, v, "unknown check '" + name + "'");
      cfg.checks.push_back(name);
    }
  }

  cfg.seed = read<std::uint64_t>(path, root, "seed", cfg.seed);
  cfg.threads = read<int>(path, root, "threads", cfg.threads);
  if (cfg.threads < 1) fail(path, root["threads"], "threads must be positive");
  if (const YAML::Node out = root["output"]) {
    check_keys(path, out, {"dir"}, "output");
    cfg.out_dir = read<std::string>(path, out, "dir", cfg.out_dir);
  }
  return cfg;
}

}  // namespace qgibbs::cli
