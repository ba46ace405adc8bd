// qgibbs_verify: runs named checks from a YAML experiment file and writes
// CSV and JSON reports.
//
// Exit codes: 0 all enabled checks pass, 2 a check failed, 3 configuration
// error, 4 numerical breakdown.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "checks.hpp"
#include "config.hpp"
#include "qgibbs/expansionals.hpp"
#include "qgibbs/verify.hpp"

namespace fs = std::filesystem;
using namespace qgibbs;
using namespace qgibbs::cli;

namespace {

enum Exit { kOk = 0, kCheckFailure = 2, kConfigError = 3, kNumerical = 4 };

struct Options {
  std::string config;
  std::vector<std::string> checks;
  std::string out;
  int threads = 0;
  long long seed = -1;
  std::string input;  // report
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::vector<std::string> split_ids(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const std::string& s : raw) {
    std::stringstream ss(s);
    for (std::string id; std::getline(ss, id, ',');)
      if (!id.empty()) out.push_back(id);
  }
  return out;
}

ExperimentConfig prepare(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (o.threads > 0) cfg.threads = o.threads;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (!o.checks.empty()) {
    cfg.checks = split_ids(o.checks);
    cfg.checks_listed = true;
    for (const std::string& id : cfg.checks) find_check(id);
  }
  return cfg;
}

int describe(const Options& o) {
  const ExperimentConfig cfg = prepare(o);
  const Interaction phi = cfg.model.build();
  std::cout << "config        " << cfg.path << " (hash " << cfg.hash << ")\n"
            << "model         " << cfg.model.family << " on " << cfg.model.sites << " sites, " << phi.terms().size()
            << " terms, hash " << model_hash(phi) << '\n'
            << "diagonal      " << (phi.is_diagonal() ? "yes" : "no") << '\n'
            << "degree        " << degree(phi) << '\n'
            << "norm          ||Phi||_{" << cfg.lambda << ',' << cfg.mu
            << "} = " << norm_lambda_mu(phi, cfg.lambda, cfg.mu) << '\n'
            << "radius        lambda/(2||Phi||) = " << analyticity_radius(phi, cfg.lambda, cfg.mu) << '\n'
            << "regions       A=" << to_string(cfg.a) << " B=" << to_string(cfg.b) << " C=" << to_string(cfg.c)
            << '\n'
            << "beta          ";
  for (double b : cfg.betas) std::cout << b << ' ';
  std::cout << "\ncaps          max_sites=" << cfg.max_sites << " window=" << cfg.window
            << " dense_dim=" << kMaxDenseDim << '\n'
            << "checks        ";
  for (const std::string& id : cfg.checks_listed ? cfg.checks : default_checks(false)) std::cout << id << ' ';
  std::cout << "\navailable\n";
  for (const CheckSpec& c : registry()) std::cout << "  " << std::left << std::setw(22) << c.id << c.summary << '\n';
  return kOk;
}

nlohmann::json coverage(const std::vector<std::string>& ids) {
  std::map<std::string, std::set<std::string>> ops;
  for (const CheckSpec& c : registry())
    for (const std::string& op : c.operations) ops[op];
  for (const std::string& id : ids)
    for (const std::string& op : find_check(id).operations) ops[op].insert(id);
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [op, by] : ops) j[op] = std::vector<std::string>(by.begin(), by.end());
  return j;
}

int run_checks(const Options& o, bool sweep_only, const std::string& csv_name, const std::string& json_name) {
  const ExperimentConfig cfg = prepare(o);
  const std::vector<std::string> ids = cfg.checks_listed ? cfg.checks : default_checks(sweep_only);
  if (ids.empty()) {
    std::cerr << "warning: no checks enabled\n";
    return kOk;
  }
  std::vector<CheckResult> results;
  for (double beta : cfg.betas)
    for (const std::string& id : ids) {
      const CheckSpec& spec = find_check(id);
      if (sweep_only && !spec.sweep) continue;
      for (CheckResult& r : spec.run(cfg, beta)) results.push_back(std::move(r));
    }

  fs::create_directories(cfg.out_dir);
  const std::string stamp = timestamp();
  {
    std::ofstream csv(fs::path(cfg.out_dir) / csv_name);
    csv << "# generated " << stamp << '\n';
    csv << "# config_hash " << cfg.hash << '\n';
    csv << csv_header() << '\n';
    for (const CheckResult& r : results)
      for (const std::string& line : csv_rows(r)) csv << line << '\n';
  }
  std::map<std::string, int> counts;
  nlohmann::json checks = nlohmann::json::array();
  for (const CheckResult& r : results) {
    ++counts[r.status];
    checks.push_back(to_json(r));
  }
  const int code = counts[status::kFail] > 0 ? kCheckFailure : kOk;
  nlohmann::json report;
  report["generated"] = stamp;
  report["config"] = cfg.path;
  report["config_hash"] = cfg.hash;
  report["seed"] = cfg.seed;
  report["checks"] = checks;
  report["summary"] = counts;
  report["coverage"] = coverage(ids);
  report["exit_code"] = code;
  std::ofstream(fs::path(cfg.out_dir) / json_name) << report.dump(2) << '\n';

  for (const CheckResult& r : results) {
    std::cout << std::left << std::setw(28) << r.id << std::setw(15) << r.status << " beta=" << r.beta;
    if (std::isfinite(r.margin)) std::cout << " margin=" << r.margin;
    if (!r.note.empty()) std::cout << "  (" << r.note << ')';
    std::cout << '\n';
  }
  std::cout << "summary:";
  for (const auto& [s, n] : counts) std::cout << ' ' << s << '=' << n;
  std::cout << "\nwrote " << (fs::path(cfg.out_dir) / csv_name).string() << '\n';
  return code;
}

int report(const Options& o) {
  std::string path = o.input;
  if (path.empty()) {
    std::string dir = o.out;
    if (dir.empty() && !o.config.empty()) dir = load_config(o.config).out_dir;
    if (dir.empty()) throw ConfigError("report: give --input, --out or --config");
    path = (fs::path(dir) / "report.json").string();
  }
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  std::cout << "report " << path << " (config hash " << j.value("config_hash", "?") << ", generated "
            << j.value("generated", "?") << ")\n";
  int failed = 0;
  for (const auto& c : j.at("checks")) {
    const std::string st = c.at("status");
    failed += st == status::kFail;
    std::cout << "  " << std::left << std::setw(28) << c.at("check_id").get<std::string>() << st << '\n';
  }
  std::cout << "coverage:\n";
  for (const auto& [op, by] : j.at("coverage").items())
    std::cout << "  " << std::left << std::setw(34) << op << (by.empty() ? "-" : by.dump()) << '\n';
  return failed > 0 ? kCheckFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gibbs state locality and mixing checks"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config, "experiment YAML file");
    if (config_required) c->required()->check(CLI::ExistingFile);
    sub->add_option("--check", o.checks, "check ids, comma separated")->delimiter(',');
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "base seed")->check(CLI::NonNegativeNumber);
  };
  auto* d = app.add_subcommand("describe", "print the model, caps and available checks");
  auto* s = app.add_subcommand("sweep", "run the distance sweeps");
  auto* v = app.add_subcommand("verify", "run the enabled checks");
  auto* r = app.add_subcommand("report", "summarize a previous report.json");
  add_common(d, true);
  add_common(s, true);
  add_common(v, true);
  add_common(r, false);
  r->add_option("--input", o.input, "report.json to read");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (d->parsed()) return describe(o);
    if (s->parsed()) return run_checks(o, true, "sweep.csv", "sweep.json");
    if (v->parsed()) return run_checks(o, false, "results.csv", "report.json");
    if (r->parsed()) return report(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const GeometryError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical breakdown: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
