#include "crossbound/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "crossbound/dataset.hpp"

namespace crossbound::cli {

#ifndef CROSSBOUND_VERSION
#define CROSSBOUND_VERSION "0.0.0"
#endif

const char* const kVersion = CROSSBOUND_VERSION;

namespace {

void stamp(std::ostream& out) { out << "crossbound " << kVersion << '\n'; }

std::string default_certificate(const RunConfig& cfg, Real d1, Real d2) {
  return "certificate_" + std::string(mode_name(cfg.mode)) + "_L" + std::to_string(cfg.lambda) + "_" + fmt12(d1) +
         "_" + fmt12(d2) + ".txt";
}

}  // namespace

int cmd_exclude(const RunConfig& cfg, Real delta1, Real delta2, std::ostream& out) {
  cfg.validate();
  const ScanSettings s = cfg.scan_settings();
  const GapAssumptions gaps = s.gaps(delta1, delta2);
  const Verdict v = exclude(cfg.mode, delta1, delta2, gaps, cfg.lambda, cfg.grid, s.solver);
  const Diagnostics& dg = v.diagnostics;

  stamp(out);
  out << "mode " << mode_name(cfg.mode) << "  d " << fmt12(cfg.d) << "  lambda " << cfg.lambda << "  point "
      << fmt12(cfg.point.u0) << ' ' << fmt12(cfg.point.v0) << '\n';
  out << "delta1 " << fmt12(delta1) << "  delta2 " << fmt12(delta2) << '\n';
  out << "grid step " << fmt12(dg.delta_step) << "  max " << fmt12(dg.delta_max) << "  spin_max " << dg.spin_max
      << "  generators " << dg.generators << "  active " << dg.active << '\n';
  out << "rounds " << dg.rounds << "  iterations " << dg.iterations << "  rows " << dg.rows << '\n';
  out << "alpha_h " << fmt12(dg.alpha_h) << "  min_action " << fmt12(dg.min_action) << "  residual "
      << fmt12(dg.residual) << '\n';
  if (!dg.note.empty()) out << "note " << dg.note << '\n';

  switch (v.status) {
    case Status::NotExcluded:
      out << "NOT EXCLUDED\n";
      return kOk;
    case Status::SolverFailure:
      out << "SOLVER FAILURE\n";
      return kSolver;
    case Status::Excluded: break;
  }
  const std::string path = cfg.certificate.empty() ? default_certificate(cfg, delta1, delta2) : cfg.certificate;
  save_certificate(*v.certificate, path);
  out << "EXCLUDED\n";
  out << "certificate " << path << "  checked at " << cfg.precision_bits << " bits\n";
  return kOk;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out) {
  cfg.validate();
  const ScanGrid grid = cfg.scan_grid();
  grid.validate();
  if (!cfg.certificate_dir.empty()) std::filesystem::create_directories(cfg.certificate_dir);
  const ScanRun r = run_scan(grid, cfg.output);
  long ex = 0, ne = 0, fail = 0;
  for (const auto& row : r.map.rows) {
    if (row.status == Status::Excluded) ++ex;
    else if (row.status == Status::NotExcluded) ++ne;
    else ++fail;
  }
  stamp(out);
  out << "mode " << mode_name(cfg.mode) << "  d " << fmt12(cfg.d) << "  lambda " << cfg.lambda << "  workers "
      << cfg.workers << "  seed " << cfg.seed << '\n';
  out << "nodes " << r.map.rows.size() << "  reused " << r.reused << "  computed " << r.computed << '\n';
  out << "excluded " << ex << "  not_excluded " << ne << "  solver_failure " << fail << '\n';
  out << "csv " << cfg.output << '\n';
  out << "plot " << r.plot_path << '\n';
  return fail ? kSolver : kOk;
}

int cmd_dataset_check(const RunConfig& cfg, const std::string& path, std::ostream& out) {
  cfg.validate();
  const CFTDataset ds = load_dataset_file(path, cfg.d);

  std::vector<std::array<int, 4>> corr = cfg.correlators;
  // default: <iiii> for every scalar with couplings in its own OPE, else for
  // every scalar, else the unit correlator
  if (corr.empty()) {
    std::vector<int> scalars, coupled;
    for (int i : ds.indices()) {
      if (!i || ds.field(i).spin != 0) continue;
      scalars.push_back(i);
      for (int k : ds.indices())
        if (k && ds.ope(i, i, k) != 0) {
          coupled.push_back(i);
          break;
        }
    }
    for (int i : coupled.empty() ? scalars : coupled) corr.push_back({i, i, i, i});
    if (corr.empty()) corr.push_back({0, 0, 0, 0});
  }
  for (const auto& c : corr)
    for (int i : c)
      if (!ds.has_field(i)) throw ConfigError("correlator names unknown field " + std::to_string(i));

  stamp(out);
  out << "dataset " << path << "  fields " << ds.indices().size() - 1 << "  couplings " << ds.ope_entries()
      << "  d " << fmt12(cfg.d) << '\n';

  std::set<std::pair<int, int>> pairs;
  for (const auto& c : corr) {
    pairs.insert({std::min(c[0], c[1]), std::max(c[0], c[1])});
    pairs.insert({std::min(c[2], c[3]), std::max(c[2], c[3])});
  }
  bool all_converge = true;
  for (auto [i, j] : pairs) {
    const GrowthReport g = growth_check(ds, i, j, cfg.rho);
    all_converge = all_converge && g.converges;
    out << "growth " << i << ' ' << j << "  " << (g.converges ? "converges" : "diverges");
    for (std::size_t k = 0; k < cfg.rho.size(); ++k)
      out << "  rho " << fmt12(cfg.rho[k]) << ": " << fmt12(g.partial_sums[k]);
    out << '\n';
  }
  out << "growth verdict " << (all_converge ? "converges" : "diverges") << '\n';

  Real worst = 0;
  for (const auto& c : corr) {
    const Real r = crossing_residual(ds, c[0], c[1], c[2], c[3], cfg.points, cfg.truncation, cfg.series_order);
    worst = std::max(worst, r);
    out << "crossing " << c[0] << ' ' << c[1] << ' ' << c[2] << ' ' << c[3] << "  truncation "
        << fmt12(cfg.truncation) << "  points " << cfg.points.size() << "  residual " << fmt12(r) << '\n';
  }
  out << "max residual " << fmt12(worst) << '\n';
  return kOk;
}

int cmd_exponents(Real delta_sigma, Real delta_epsilon, std::optional<Real> delta3, Real d, std::ostream& out) {
  const Exponents e = to_exponents(delta_sigma, delta_epsilon, delta3, d);
  stamp(out);
  out << "d " << fmt12(d) << "  delta_sigma " << fmt12(delta_sigma) << "  delta_epsilon " << fmt12(delta_epsilon);
  if (delta3) out << "  delta3 " << fmt12(*delta3);
  out << '\n';
  out << "eta " << fmt12(e.eta) << '\n';
  out << "nu " << fmt12(e.nu) << '\n';
  if (e.omega) out << "omega " << fmt12(*e.omega) << '\n';
  return kOk;
}

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string d, lambda, mode, workers, seed, bits;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "config file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "override a config key, section.key=value (repeatable)");
  app->add_option("--d", c.d, "spacetime dimension");
  app->add_option("-L,--lambda", c.lambda, "derivative order");
  app->add_option("--mode", c.mode, "single or multi");
  app->add_option("-j,--workers", c.workers, "worker threads");
  app->add_option("--seed", c.seed, "seed for randomized checks");
  app->add_option("--precision-bits", c.bits, "certificate check precision, 64 or 113");
}

RunConfig build_config(const Common& c, const std::vector<std::pair<std::string, std::string>>& extra) {
  RunConfig cfg;
  if (!c.config.empty()) read_config_file(c.config, cfg);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  const std::pair<const char*, const std::string*> named[] = {{"run.d", &c.d},         {"run.lambda", &c.lambda},
                                                              {"run.mode", &c.mode},   {"run.workers", &c.workers},
                                                              {"run.seed", &c.seed},   {"run.precision_bits", &c.bits}};
  for (const auto& [k, v] : named)
    if (!v->empty()) cfg.set(k, *v);
  for (const auto& [k, v] : extra)
    if (!v.empty()) cfg.set(k, v);
  return cfg;
}

const char* const kExitCodes =
    "exit codes:\n"
    "  0  command ran (any verdict other than a solver failure)\n"
    "  1  internal error\n"
    "  2  usage error (unknown or missing flag)\n"
    "  3  configuration or input file error\n"
    "  4  domain error (point outside the allowed range, division by zero)\n"
    "  5  solver failure\n";

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"crossbound: numerical bootstrap bounds on scalar dimensions", "crossbound"};
  app.set_version_flag("--version", std::string("crossbound ") + kVersion);
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Common ce, cs, cd, cx, cc;

  auto* ex = app.add_subcommand("exclude", "test one (delta1, delta2) point, write a certificate if excluded");
  add_common(ex, ce);
  Real d1 = 0, d2 = 0;
  std::string cert;
  ex->add_option("--delta1", d1, "dimension of the odd scalar")->required();
  ex->add_option("--delta2", d2, "dimension of the even scalar")->required();
  ex->add_option("--certificate", cert, "certificate output path");

  auto* sc = app.add_subcommand("scan", "resumable scan of the (delta1, delta2) plane into a CSV and plot script");
  add_common(sc, cs);
  std::string csv, cdir;
  sc->add_option("-o,--out", csv, "CSV path");
  sc->add_option("--certificate-dir", cdir, "save certificates of excluded nodes here");

  auto* dc = app.add_subcommand("dataset-check", "growth condition and crossing residuals of a dataset file");
  add_common(dc, cd);
  std::string dfile, trunc;
  dc->add_option("dataset", dfile, "dataset file")->required();
  dc->add_option("--truncation", trunc, "largest exchanged dimension kept");

  auto* xp = app.add_subcommand("exponents", "critical exponents from scaling dimensions");
  add_common(xp, cx);
  Real ds = 0, de = 0, d3 = 0;
  auto* d3opt = xp->add_option("--delta3", d3, "dimension of the first irrelevant even scalar");
  xp->add_option("--delta-sigma", ds, "odd scalar dimension")->required();
  xp->add_option("--delta-epsilon", de, "even scalar dimension")->required();

  auto* sh = app.add_subcommand("show-config", "print the effective configuration");
  add_common(sh, cc);

  for (auto* s : {ex, sc, dc, xp, sh}) s->footer(kExitCodes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (ex->parsed()) return cmd_exclude(build_config(ce, {{"exclude.certificate", cert}}), d1, d2, out);
    if (sc->parsed())
      return cmd_scan(build_config(cs, {{"scan.output", csv}, {"scan.certificate_dir", cdir}}), out);
    if (dc->parsed()) return cmd_dataset_check(build_config(cd, {{"dataset.truncation", trunc}}), dfile, out);
    if (xp->parsed()) {
      const RunConfig cfg = build_config(cx, {});
      return cmd_exponents(ds, de, d3opt->count() ? std::optional<Real>(d3) : std::nullopt, cfg.d, out);
    }
    if (sh->parsed()) {
      const RunConfig cfg = build_config(cc, {});
      cfg.validate();
      write_config(cfg, out);
      return kOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const SolverFailure& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolver;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace crossbound::cli
