#include "mlat/cli.hpp"

#include "mlat/bundled_configs.hpp"
#include "mlat/config.hpp"
#include "mlat/errors.hpp"
#include "mlat/protocols.hpp"

#include <CLI11.hpp>
#include <boost/version.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace mlat::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

int parse_int(const std::string& text, const char* what) {
  int v = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": not an integer '" + text + "'");
  }
  return v;
}

// Output files are assembled in memory and written after all computation.
class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  void flush() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    for (const auto& [name, content] : files_) {
      const fs::path path = dir_ / name;
      std::ofstream f(path, std::ios::binary | std::ios::trunc);
      f << content;
      f.close();
      if (!f) throw IoError("cannot write " + path.string());
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::string config_path;
  std::uint64_t seed = 20240101;
  std::string out_dir = "out";
};

struct Loaded {
  RunInputs inputs;
  std::string origin;
  std::uint64_t hash = 0;
};

Loaded load(const std::string& path) {
  Loaded l;
  if (path.empty()) {
    l.origin = "bundled:table1.cfg";
    l.inputs = parse_config(bundled_table1_config(), l.origin);
    l.hash = fnv1a64(bundled_table1_config());
    return l;
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read configuration file " + path);
  std::ostringstream text;
  text << f.rdbuf();
  l.origin = path;
  l.inputs = parse_config(text.str(), path);
  l.hash = fnv1a64(text.str());
  return l;
}

std::string manifest(const std::string& command, const Loaded& cfg, std::uint64_t seed,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ostringstream m;
  m << "tool=mlatsim " << MLAT_VERSION << "\n";
  m << "command=" << command << "\n";
  m << "config=" << cfg.origin << "\n";
  m << "config_fnv1a64=" << hex64(cfg.hash) << "\n";
  m << "seed=" << seed << "\n";
  m << "rng=" << RngStream::kAlgorithm << " + splitmix64 stream derivation\n";
  for (const auto& [k, v] : extra) m << k << "=" << v << "\n";
  m << "boost=" << BOOST_LIB_VERSION << "\n";
  m << "cli11=" << CLI11_VERSION << "\n";
#if defined(__clang__)
  m << "compiler=clang " << __clang_version__ << "\n";
#elif defined(__GNUC__)
  m << "compiler=gcc " << __VERSION__ << "\n";
#endif
  return m.str();
}

// ---------------------------------------------------------------- protocol 1

int cmd_protocol1(const Common& c, const std::string& digits_text, std::ostream& out) {
  const Loaded cfg = load(c.config_path);
  const std::vector<int> digits = parse_digits_range(digits_text);
  Protocol1Options opt;
  opt.setup_radius_mm = cfg.inputs.budget.setup_radius_mm;
  const Protocol1Report r = run_protocol1(cfg.inputs.network, digits, c.seed, opt);

  std::string dev = "point_id,digits,dx_mm,dy_mm,dz_mm,magnitude_mm\n";
  for (const auto& d : r.deviations) {
    dev += std::to_string(d.point_id) + "," + std::to_string(d.digits) + "," + fmt(d.dx_mm) + "," + fmt(d.dy_mm) +
           "," + fmt(d.dz_mm) + "," + fmt(d.magnitude_mm) + "\n";
  }
  std::string sum = "digits,mean_magnitude_mm,converged,iterations,residual_norm_m,failure\n";
  bool all_ok = true;
  for (const auto& d : r.per_digits) {
    all_ok = all_ok && d.converged;
    sum += std::to_string(d.digits) + "," + fmt(d.mean_magnitude_mm) + "," + (d.converged ? "1" : "0") + "," +
           std::to_string(d.iterations) + "," + (d.solved ? fmt(d.residual_norm_m) : "") + "," + quote(d.failure) + "\n";
  }

  Writer w(c.out_dir);
  w.add("protocol1_deviations.csv", dev);
  w.add("protocol1_summary.csv", sum);
  w.add("run_manifest.txt",
        manifest("protocol1", cfg, c.seed,
                 {{"digits", std::to_string(digits.front()) + ".." + std::to_string(digits.back())},
                  {"setup_radius_mm", fmt(opt.setup_radius_mm)}}));
  w.flush();

  out << "digits  mean |M_si - M_i| (mm)\n";
  for (const auto& d : r.per_digits) {
    out << "  " << d.digits << "    " << (d.solved ? fmt(d.mean_magnitude_mm) : "failed: " + d.failure) << "\n";
  }
  if (!all_ok) {
    out << "some digit counts did not converge; see protocol1_summary.csv\n";
    return kSolverInvalid;
  }
  return kOk;
}

// ---------------------------------------------------------------- protocol 2

std::vector<ExperimentSpec> parse_experiments(const std::string& list, int runs) {
  const std::vector<ExperimentSpec> defaults = default_experiments(runs);
  if (list.empty()) return defaults;
  std::vector<ExperimentSpec> chosen;
  std::stringstream ss(list);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    const auto it = std::find_if(defaults.begin(), defaults.end(), [&](const ExperimentSpec& e) { return e.id == token; });
    if (it != defaults.end()) {
      chosen.push_back(*it);
      continue;
    }
    // Custom: DIGITS:with or DIGITS:without.
    const auto colon = token.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("unknown experiment '" + token + "' (use Exp1..Exp4 or DIGITS:with / DIGITS:without)");
    }
    const std::string mode = token.substr(colon + 1);
    if (mode != "with" && mode != "without") throw ConfigError("experiment '" + token + "': expected with or without");
    ExperimentSpec e;
    e.digits = parse_int(token.substr(0, colon), "experiment digits");
    e.with_uncertainties = mode == "with";
    e.id = "D" + std::to_string(e.digits) + (e.with_uncertainties ? "_with" : "_without");
    e.runs = runs;
    chosen.push_back(e);
  }
  if (chosen.empty()) throw ConfigError("--experiments lists no experiment");
  return chosen;
}

int cmd_protocol2(const Common& c, const std::string& experiments_text, int runs, const std::string& seeding_text,
                  unsigned threads, std::ostream& out) {
  const Loaded cfg = load(c.config_path);
  const std::vector<ExperimentSpec> experiments = parse_experiments(experiments_text, runs);
  Protocol2Options opt;
  if (seeding_text == "paired") {
    opt.seeding = Seeding::paired;
  } else if (seeding_text == "independent") {
    opt.seeding = Seeding::independent;
  } else {
    throw ConfigError("--seeding must be paired or independent");
  }
  opt.threads = threads;
  const Protocol2Report r = run_protocol2(cfg.inputs.network, cfg.inputs.budget, experiments, c.seed, opt);
  const size_t nd = r.nominal_distances_m.size();

  std::string runs_csv = "experiment,run,ok,iterations";
  for (size_t k = 0; k < nd; ++k) runs_csv += ",dev_M1M" + std::to_string(k + 2) + "_mm";
  runs_csv += ",failure\n";
  std::string cov = "experiment,distance,nominal_distance_m,coverage_interval_mm,error\n";
  std::string sum =
      "experiment,digits,uncertainties,largest_coverage_interval_mm,mean_coverage_interval_mm,failed_runs,valid\n";
  bool all_valid = true;
  for (const auto& e : r.experiments) {
    for (const auto& run : e.runs) {
      runs_csv += e.spec.id + "," + std::to_string(run.run) + "," + (run.ok ? "1" : "0") + "," +
                  std::to_string(run.iterations);
      for (size_t k = 0; k < nd; ++k) runs_csv += "," + (run.ok ? fmt(run.deviations_mm[k]) : std::string());
      runs_csv += "," + quote(run.failure) + "\n";
    }
    for (size_t k = 0; k < nd; ++k) {
      cov += e.spec.id + ",M1M" + std::to_string(k + 2) + "," + fmt(r.nominal_distances_m[k]) + "," +
             fmt(e.coverage_mm[k]) + "," + quote(e.coverage_errors[k]) + "\n";
    }
    sum += e.spec.id + "," + std::to_string(e.spec.digits) + "," + (e.spec.with_uncertainties ? "with" : "without") +
           "," + fmt(e.largest_coverage_mm) + "," + fmt(e.mean_coverage_mm) + "," + std::to_string(e.failed_runs) +
           "," + (e.valid ? "1" : "0") + "\n";
    all_valid = all_valid && e.valid;
  }

  std::string ids;
  for (const auto& e : experiments) ids += (ids.empty() ? "" : ",") + e.id;
  Writer w(c.out_dir);
  w.add("protocol2_runs.csv", runs_csv);
  w.add("protocol2_coverage.csv", cov);
  w.add("protocol2_summary.csv", sum);
  w.add("run_manifest.txt", manifest("protocol2", cfg, c.seed,
                                     {{"experiments", ids},
                                      {"runs", std::to_string(runs)},
                                      {"seeding", seeding_text},
                                      {"U_RP_um", fmt(r.smr_position_um)},
                                      {"U_Edlen_um_per_m", fmt(r.edlen_um_per_m)},
                                      {"setup_radius_mm", fmt(r.setup_radius_mm)}}));
  w.flush();

  out << "experiment  digits  uncertainties  largest (mm)  mean (mm)  failed  valid\n";
  for (const auto& e : r.experiments) {
    out << "  " << e.spec.id << "  " << e.spec.digits << "  " << (e.spec.with_uncertainties ? "with" : "without")
        << "  " << fmt(e.largest_coverage_mm) << "  " << fmt(e.mean_coverage_mm) << "  " << e.failed_runs << "  "
        << (e.valid ? "yes" : "no") << "\n";
    for (size_t k = 0; k < nd; ++k) {
      if (!e.coverage_errors[k].empty()) out << "    M1M" << k + 2 << ": " << e.coverage_errors[k] << "\n";
    }
  }
  if (!all_valid) {
    out << "one or more experiments are not valid; see protocol2_summary.csv\n";
    return kSolverInvalid;
  }
  return kOk;
}

// ---------------------------------------------------------------- edlen budget

struct EdlenFlags {
  std::optional<double> t, p, f, ut, uf, up, lambda;
  std::string preset;
};

int cmd_edlen(const Common& c, bool out_given, const EdlenFlags& flags, std::ostream& out) {
  UncertaintyBudget b;
  if (!c.config_path.empty()) b = load(c.config_path).inputs.budget;
  if (flags.preset == "datasheet") {
    b.sensors = edlen::SensorBudget::datasheet();
  } else if (flags.preset == "budget_table") {
    b.sensors = edlen::SensorBudget::budget_table();
  } else if (!flags.preset.empty()) {
    throw ConfigError("--preset must be datasheet or budget_table");
  }
  if (flags.t) b.nominal_air.temperature_c = *flags.t;
  if (flags.p) b.nominal_air.pressure_pa = *flags.p;
  if (flags.f) b.nominal_air.humidity_pct = *flags.f;
  if (flags.ut) b.sensors.temperature_c = *flags.ut;
  if (flags.uf) b.sensors.humidity_pct = *flags.uf;
  if (flags.up) b.sensors.pressure_pa = *flags.up;
  if (flags.lambda) b.sensors.lambda_vacuum_um = *flags.lambda;

  const edlen::BudgetBreakdown r = edlen::budget_breakdown(b.nominal_air, b.sensors);
  std::string csv = "quantity,value,unit\n";
  csv += "temperature," + fmt(b.nominal_air.temperature_c) + ",degC\n";
  csv += "pressure," + fmt(b.nominal_air.pressure_pa) + ",Pa\n";
  csv += "humidity," + fmt(b.nominal_air.humidity_pct) + ",%RH\n";
  csv += "lambda_vacuum," + fmt(b.sensors.lambda_vacuum_um) + ",um\n";
  csv += "U_t," + fmt(b.sensors.temperature_c) + ",degC\n";
  csv += "U_f," + fmt(b.sensors.humidity_pct) + ",%RH\n";
  csv += "U_p," + fmt(b.sensors.pressure_pa) + ",Pa\n";
  csv += "refractive_index," + fmt(r.refractive_index) + ",1\n";
  csv += "temperature_contribution," + fmt(r.temperature_um_per_m) + ",um/m\n";
  csv += "humidity_contribution," + fmt(r.humidity_um_per_m) + ",um/m\n";
  csv += "pressure_contribution," + fmt(r.pressure_um_per_m) + ",um/m\n";
  csv += "U_Edlen," + fmt(r.combined_um_per_m) + ",um/m\n";
  out << csv;
  if (out_given) {
    Writer w(c.out_dir);
    w.add("edlen_budget.csv", csv);
    w.flush();
  }
  return kOk;
}

}  // namespace

std::vector<int> parse_digits_range(const std::string& text) {
  const auto dots = text.find("..");
  int lo = 0;
  int hi = 0;
  if (dots == std::string::npos) {
    lo = hi = parse_int(text, "--digits");
  } else {
    lo = parse_int(text.substr(0, dots), "--digits");
    hi = parse_int(text.substr(dots + 2), "--digits");
  }
  if (lo > hi) std::swap(lo, hi);
  if (lo < mp::kMinDigits || hi > mp::kMaxDigits) {
    throw ConfigError("--digits must lie in [" + std::to_string(mp::kMinDigits) + ", " +
                      std::to_string(mp::kMaxDigits) + "], got " + text);
  }
  std::vector<int> out;
  for (int d = lo; d <= hi; ++d) out.push_back(d);
  return out;
}

const std::string& bundled_table1_config() {
  static const std::string text(kBundledTable1Cfg);
  return text;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential multilateration simulator: digits and uncertainty studies", "mlatsim"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "network configuration file (default: bundled table1.cfg)");
    sub->add_option("--seed", common.seed, "root seed")->capture_default_str();
    sub->add_option("--out", common.out_dir, "output directory")->capture_default_str();
  };

  std::string digits = "10..20";
  CLI::App* p1 = app.add_subcommand("protocol1", "noise-free solve at a sweep of digit counts");
  add_common(p1);
  p1->add_option("--digits", digits, "digit range A..B")->capture_default_str();

  std::string experiments;
  int runs = 55;
  std::string seeding = "paired";
  unsigned threads = 0;
  CLI::App* p2 = app.add_subcommand("protocol2", "Monte Carlo coverage intervals per experiment");
  add_common(p2);
  p2->add_option("--experiments", experiments, "comma list of Exp1..Exp4 or DIGITS:with|without (default: all four)");
  p2->add_option("--runs", runs, "runs per experiment")->capture_default_str();
  p2->add_option("--seeding", seeding, "paired or independent random streams across experiments")->capture_default_str();
  p2->add_option("--threads", threads, "worker threads (0: all cores)")->capture_default_str();

  EdlenFlags ef;
  CLI::App* eb = app.add_subcommand("edlen-budget", "refractive index and U_Edlen from the sensor budget");
  add_common(eb);
  eb->add_option("--temperature", ef.t, "nominal temperature, degC");
  eb->add_option("--pressure", ef.p, "nominal pressure, Pa");
  eb->add_option("--humidity", ef.f, "nominal relative humidity, %");
  eb->add_option("--u-t", ef.ut, "temperature sensor uncertainty, degC");
  eb->add_option("--u-f", ef.uf, "humidity sensor uncertainty, %RH");
  eb->add_option("--u-p", ef.up, "pressure sensor uncertainty, Pa");
  eb->add_option("--lambda", ef.lambda, "vacuum wavelength, um");
  eb->add_option("--preset", ef.preset, "datasheet or budget_table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "mlatsim: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (p1->parsed()) return cmd_protocol1(common, digits, out);
    if (p2->parsed()) return cmd_protocol2(common, experiments, runs, seeding, threads, out);
    return cmd_edlen(common, eb->count("--out") > 0, ef, out);
  } catch (const ConfigError& e) {
    err << "mlatsim: configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "mlatsim: domain error: " << e.what() << "\n";
    return kDomainError;
  } catch (const SolverError& e) {
    err << "mlatsim: solver error: " << e.what() << "\n";
    return kSolverInvalid;
  } catch (const IoError& e) {
    err << "mlatsim: I/O error: " << e.what() << "\n";
    return kIoError;
  }
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mlat::cli
