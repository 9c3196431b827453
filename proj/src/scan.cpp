#include "crossbound/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace crossbound {

namespace {

Real round12(Real x) { return std::strtold(fmt12(x).c_str(), nullptr); }

std::string node_key(Real d1, Real d2, int lambda, Real step) {
  return fmt12(d1) + "," + fmt12(d2) + "," + std::to_string(lambda) + "," + fmt12(step);
}

Status parse_status(const std::string& s) {
  if (s == "excluded") return Status::Excluded;
  if (s == "not_excluded") return Status::NotExcluded;
  if (s == "solver_failure") return Status::SolverFailure;
  throw ConfigError("unknown status '" + s + "'");
}

Real parse_real(const std::string& s) {
  char* end = nullptr;
  const Real x = std::strtold(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(x)) throw ConfigError("bad number '" + s + "'");
  return x;
}

long parse_long(const std::string& s) {
  char* end = nullptr;
  const long x = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ConfigError("bad integer '" + s + "'");
  return x;
}

}  // namespace

std::vector<Real> Range::values() const {
  std::vector<Real> out;
  if (hi < lo) return out;
  if (!(step > 0)) {
    if (hi == lo) out.push_back(round12(lo));
    return out;
  }
  const Real slack = step * 1e-9L;
  for (long k = 0;; ++k) {
    const Real x = lo + k * step;
    if (x > hi + slack) break;
    out.push_back(round12(x));
  }
  return out;
}

GapAssumptions ScanSettings::gaps(Real delta1, Real delta2) const {
  return GapAssumptions::standard(mode, delta1, delta2, solver.d, grid.spin_max, irrelevant);
}

void ScanSettings::validate() const {
  if (lambda < 1 || lambda > kDefaultMaxLambda) throw ConfigError("lambda order out of range");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (solver.time_limit < 0) throw ConfigError("time limit must be nonnegative");
  grid.validate();
}

void ScanGrid::validate() const {
  settings.validate();
  const Real lo = unitarity_min(settings.solver.d, 0), hi = settings.solver.d;
  for (const Range* r : {&delta1, &delta2}) {
    if (r->hi < r->lo) continue;
    if (r->step < 0 || (r->step == 0 && r->hi != r->lo)) throw ConfigError("scan step must be positive");
    if (r->lo < lo - 1e-12L || r->hi > hi + 1e-12L)
      throw DomainError("scan ranges must lie between " + fmt12(lo) + " and " + fmt12(hi));
  }
}

std::vector<std::pair<Real, Real>> ScanGrid::nodes() const {
  std::vector<std::pair<Real, Real>> out;
  const auto b = delta2.values();
  for (Real x : delta1.values())
    for (Real y : b) out.emplace_back(x, y);
  return out;
}

ScanRow evaluate_node(Real delta1, Real delta2, const ScanSettings& s) {
  ScanRow row;
  row.delta1 = delta1;
  row.delta2 = delta2;
  row.lambda = s.lambda;
  row.grid_step = s.grid.delta_step;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Verdict v = exclude(s.mode, delta1, delta2, s.gaps(delta1, delta2), s.lambda, s.grid, s.solver);
    row.status = v.status;
    row.note = v.diagnostics.note;
    if (v.certificate && !s.certificate_dir.empty()) {
      std::filesystem::create_directories(s.certificate_dir);
      row.certificate = s.certificate_dir + "/cert_" + fmt12(delta1) + "_" + fmt12(delta2) + ".txt";
      save_certificate(*v.certificate, row.certificate);
    }
  } catch (const SolverFailure& e) {
    row.status = Status::SolverFailure;
    row.note = e.what();
  }
  if (s.record_time)
    row.time_ms = long(std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                           .count());
  return row;
}

ExclusionMap scan_plane(const ScanGrid& grid, const std::vector<ScanRow>& done,
                        const std::function<void(const ScanRow&)>& on_row) {
  grid.validate();
  const auto nodes = grid.nodes();
  const ScanSettings& s = grid.settings;
  std::map<std::string, const ScanRow*> have;
  for (const auto& r : done) have[node_key(r.delta1, r.delta2, r.lambda, r.grid_step)] = &r;

  ExclusionMap map;
  map.rows.resize(nodes.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto it = have.find(node_key(nodes[i].first, nodes[i].second, s.lambda, s.grid.delta_step));
    if (it != have.end()) map.rows[i] = *it->second;
    else todo.push_back(i);
  }

  std::atomic<std::size_t> next{0};
  std::mutex writer;
  std::exception_ptr error;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next++;
      if (k >= todo.size()) return;
      const std::size_t i = todo[k];
      try {
        ScanRow row = evaluate_node(nodes[i].first, nodes[i].second, s);
        std::lock_guard<std::mutex> lock(writer);
        map.rows[i] = row;
        if (on_row) on_row(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(writer);
        if (!error) error = std::current_exception();
        next = todo.size();
      }
    }
  };
  const int nw = std::min<int>(s.workers, int(todo.size()));
  if (nw <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return map;
}

const char* const kScanHeader = "delta1,delta2,status,lambda,grid_step,time_ms";

std::string scan_csv_line(const ScanRow& r) {
  return fmt12(r.delta1) + "," + fmt12(r.delta2) + "," + status_name(r.status) + "," + std::to_string(r.lambda) +
         "," + fmt12(r.grid_step) + "," + std::to_string(r.time_ms);
}

void write_scan_csv(const ExclusionMap& map, std::ostream& os) {
  os << kScanHeader << '\n';
  for (const auto& r : map.rows) os << scan_csv_line(r) << '\n';
}

std::vector<ScanRow> read_scan_csv(std::istream& is) {
  std::vector<ScanRow> rows;
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      if (no == 1) {
        if (line != kScanHeader) throw ConfigError("unexpected header");
        continue;
      }
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      if (f.size() != 6) throw ConfigError("expected 6 fields, got " + std::to_string(f.size()));
      ScanRow r;
      r.delta1 = parse_real(f[0]);
      r.delta2 = parse_real(f[1]);
      r.status = parse_status(f[2]);
      r.lambda = int(parse_long(f[3]));
      r.grid_step = parse_real(f[4]);
      r.time_ms = parse_long(f[5]);
      rows.push_back(r);
    } catch (const ConfigError& e) {
      throw ConfigError("scan csv line " + std::to_string(no) + ": " + e.what());
    }
  }
  if (no == 0) throw ConfigError("scan csv line 1: missing header");
  return rows;
}

void write_plot_script(const std::string& csv_path, std::ostream& os) {
  const std::string name = std::filesystem::path(csv_path).filename().string();
  os << "# gnuplot script; run from the directory holding " << name << "\n"
     << "set datafile separator ','\n"
     << "set xlabel 'delta1'\n"
     << "set ylabel 'delta2'\n"
     << "set key outside right\n"
     << "set grid\n"
     << "f = '" << name << "'\n"
     << "plot f every ::1 using 1:(strcol(3) eq 'excluded' ? $2 : NaN) with points pt 5 lc rgb '#c0392b' "
        "title 'excluded', \\\n"
     << "     f every ::1 using 1:(strcol(3) eq 'not_excluded' ? $2 : NaN) with points pt 7 lc rgb '#2471a3' "
        "title 'allowed', \\\n"
     << "     f every ::1 using 1:(strcol(3) eq 'solver_failure' ? $2 : NaN) with points pt 2 lc rgb '#7f8c8d' "
        "title 'failure'\n"
     << "pause -1\n";
}

ScanRun run_scan(const ScanGrid& grid, const std::string& csv_path) {
  grid.validate();
  namespace fs = std::filesystem;
  std::vector<ScanRow> done;
  if (fs::exists(csv_path)) {
    std::ifstream in(csv_path, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    // an interrupted append can leave a partial last line
    const auto cut = text.rfind('\n');
    text = cut == std::string::npos ? std::string() : text.substr(0, cut + 1);
    if (!text.empty()) {
      std::istringstream is(text);
      done = read_scan_csv(is);
    }
  }
  // rewrite what is kept so appends start on a clean line
  {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + csv_path);
    out << kScanHeader << '\n';
    for (const auto& r : done) out << scan_csv_line(r) << '\n';
  }

  ScanRun run;
  std::ofstream app(csv_path, std::ios::binary | std::ios::app);
  run.map = scan_plane(grid, done, [&](const ScanRow& r) {
    app << scan_csv_line(r) << '\n';
    app.flush();
    ++run.computed;
  });
  app.close();
  run.reused = long(run.map.rows.size()) - run.computed;

  const std::string tmp = csv_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    write_scan_csv(run.map, out);
  }
  fs::rename(tmp, csv_path);

  fs::path plot(csv_path);
  plot.replace_extension(".gp");
  run.plot_path = plot.string();
  std::ofstream gp(run.plot_path, std::ios::binary | std::ios::trunc);
  write_plot_script(csv_path, gp);
  return run;
}

BisectResult bound_bisect(Real delta1, const BisectSettings& bs) {
  const ScanSettings& s = bs.scan;
  s.validate();
  if (!(bs.tol > 0)) throw ConfigError("bisection tolerance must be positive");
  const Real d = s.solver.d;
  Real hi = bs.hi < 0 ? d : bs.hi;
  const Real floor = bs.lo < 0 ? unitarity_min(d, 0) : bs.lo;
  if (!(floor < hi)) throw ConfigError("empty bisection bracket");
  if (bs.lo < 0 && !(bs.descent_step > 0)) throw ConfigError("descent step must be positive");
  const Real hi0 = hi;

  BisectResult res;
  auto excluded = [&](Real x) {
    res.probes.push_back(evaluate_node(delta1, x, s));
    return res.probes.back().status == Status::Excluded;
  };

  if (!excluded(hi)) {
    res.no_exclusion = true;
    res.bound = res.excluded = hi;
    return res;
  }
  Real lo = floor;
  if (bs.lo < 0) {
    for (long k = 1;; ++k) {
      const Real x = std::max(floor, hi0 - k * bs.descent_step);
      if (!excluded(x)) {
        lo = x;
        break;
      }
      hi = x;
      if (x == floor) {
        res.all_excluded = true;
        res.bound = res.excluded = floor;
        return res;
      }
    }
  } else if (excluded(lo)) {
    res.all_excluded = true;
    res.bound = res.excluded = lo;
    return res;
  }
  const Real lo0 = floor;
  while (hi - lo > bs.tol) {
    const Real mid = (lo + hi) / 2;
    (excluded(mid) ? hi : lo) = mid;
  }
  res.bound = lo;
  res.excluded = hi;

  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < bs.spot_checks && hi0 - hi > bs.tol; ++k) {
    const Real x = hi + (hi0 - hi) * Real(1 - u(rng));
    if (!excluded(x)) res.monotone = false;
  }
  if (res.monotone) return res;

  res.downgraded = true;
  ScanGrid col;
  col.delta1 = {delta1, delta1, 0};
  col.delta2 = {lo0, hi0, bs.column_step};
  col.settings = s;
  col.settings.certificate_dir.clear();
  res.column = scan_plane(col).rows;
  res.bound = lo0;
  res.excluded = hi0;
  for (const auto& r : res.column)
    if (r.status != Status::Excluded) res.bound = std::max(res.bound, r.delta2);
  for (const auto& r : res.column)
    if (r.status == Status::Excluded && r.delta2 > res.bound) res.excluded = std::min(res.excluded, r.delta2);
  return res;
}

Exponents to_exponents(Real delta_sigma, Real delta_epsilon, std::optional<Real> delta3, Real d) {
  if (delta_epsilon == d)
    throw DomainError("nu = 1/(d - delta_epsilon) is a division by zero at delta_epsilon = d");
  Exponents e;
  e.eta = 2 * delta_sigma - (d - 2);
  e.nu = 1 / (d - delta_epsilon);
  if (delta3) e.omega = *delta3 - d;
  return e;
}

Dimensions from_exponents(const Exponents& e, Real d) {
  if (e.nu == 0) throw DomainError("nu = 0 has no finite delta_epsilon");
  Dimensions out;
  out.delta_sigma = (e.eta + d - 2) / 2;
  out.delta_epsilon = d - 1 / e.nu;
  if (e.omega) out.delta3 = *e.omega + d;
  return out;
}

}  // namespace crossbound
