#include "crossbound/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace crossbound {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

Real real_of(const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const Real x = std::strtold(t.c_str(), &end);
  if (t.empty() || *end || !std::isfinite(x)) throw ConfigError("expected a number, got '" + v + "'");
  return x;
}

long long int_of(const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || *end) throw ConfigError("expected an integer, got '" + v + "'");
  return x;
}

bool bool_of(const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("expected true or false, got '" + v + "'");
}

std::vector<Real> reals_of(const std::string& v, char sep) {
  std::vector<Real> out;
  for (const auto& p : split(v, sep))
    if (!p.empty()) out.push_back(real_of(p));
  return out;
}

std::string join(const std::vector<Real>& xs, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? sep : "") + fmt12(xs[i]);
  return s;
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key real_key(T RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = T(real_of(v)); },
          [m](const RunConfig& c) { return fmt12(Real(c.*m)); }};
}

template <class T>
Key int_key(T RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = T(int_of(v)); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Key str_key(std::string RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& v) { c.*m = trim(v); }, [m](const RunConfig& c) { return c.*m; }};
}

Key range_key(Range RunConfig::*r, Real Range::*f) {
  return {[r, f](RunConfig& c, const std::string& v) { (c.*r).*f = real_of(v); },
          [r, f](const RunConfig& c) { return fmt12((c.*r).*f); }};
}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> k;
    k["run.d"] = real_key(&RunConfig::d);
    k["run.lambda"] = int_key(&RunConfig::lambda);
    k["run.mode"] = {[](RunConfig& c, const std::string& v) { c.mode = parse_mode(trim(v)); },
                     [](const RunConfig& c) { return std::string(mode_name(c.mode)); }};
    k["run.workers"] = int_key(&RunConfig::workers);
    k["run.seed"] = {[](RunConfig& c, const std::string& v) {
                       const long long s = int_of(v);
                       if (s < 0) throw ConfigError("seed must be nonnegative");
                       c.seed = std::uint64_t(s);
                     },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
    k["run.precision_bits"] = int_key(&RunConfig::precision_bits);

    k["point.u"] = {[](RunConfig& c, const std::string& v) { c.point.u0 = real_of(v); },
                    [](const RunConfig& c) { return fmt12(c.point.u0); }};
    k["point.v"] = {[](RunConfig& c, const std::string& v) { c.point.v0 = real_of(v); },
                    [](const RunConfig& c) { return fmt12(c.point.v0); }};

    k["grid.delta_step"] = {[](RunConfig& c, const std::string& v) { c.grid.delta_step = real_of(v); },
                            [](const RunConfig& c) { return fmt12(c.grid.delta_step); }};
    k["grid.delta_max"] = {[](RunConfig& c, const std::string& v) { c.grid.delta_max = real_of(v); },
                           [](const RunConfig& c) { return fmt12(c.grid.delta_max); }};
    k["grid.spin_max"] = {[](RunConfig& c, const std::string& v) { c.grid.spin_max = int(int_of(v)); },
                          [](const RunConfig& c) { return std::to_string(c.grid.spin_max); }};
    k["grid.asymptotic"] = {[](RunConfig& c, const std::string& v) { c.grid.asymptotic = bool_of(v); },
                            [](const RunConfig& c) { return std::string(c.grid.asymptotic ? "true" : "false"); }};

    k["solver.series_order"] = int_key(&RunConfig::series_order);
    k["solver.margin"] = real_key(&RunConfig::margin);
    k["solver.max_rounds"] = int_key(&RunConfig::max_rounds);
    k["solver.max_iterations"] = int_key(&RunConfig::max_iterations);
    k["solver.check_epsilon"] = real_key(&RunConfig::check_epsilon);
    k["solver.time_limit"] = real_key(&RunConfig::time_limit);

    k["gaps.irrelevant"] = real_key(&RunConfig::irrelevant);

    k["scan.delta1_min"] = range_key(&RunConfig::delta1, &Range::lo);
    k["scan.delta1_max"] = range_key(&RunConfig::delta1, &Range::hi);
    k["scan.delta1_step"] = range_key(&RunConfig::delta1, &Range::step);
    k["scan.delta2_min"] = range_key(&RunConfig::delta2, &Range::lo);
    k["scan.delta2_max"] = range_key(&RunConfig::delta2, &Range::hi);
    k["scan.delta2_step"] = range_key(&RunConfig::delta2, &Range::step);
    k["scan.output"] = str_key(&RunConfig::output);
    k["scan.certificate_dir"] = str_key(&RunConfig::certificate_dir);
    k["scan.record_time"] = {[](RunConfig& c, const std::string& v) { c.record_time = bool_of(v); },
                             [](const RunConfig& c) { return std::string(c.record_time ? "true" : "false"); }};

    k["exclude.certificate"] = str_key(&RunConfig::certificate);

    k["dataset.truncation"] = real_key(&RunConfig::truncation);
    k["dataset.rho"] = {[](RunConfig& c, const std::string& v) { c.rho = reals_of(v, ','); },
                        [](const RunConfig& c) { return join(c.rho, ", "); }};
    k["dataset.points"] = {[](RunConfig& c, const std::string& v) {
                             std::vector<CrossingPoint> pts;
                             for (const auto& p : split(v, ';')) {
                               if (p.empty()) continue;
                               auto uv = reals_of(p, ' ');
                               if (uv.size() != 2) throw ConfigError("a point is two numbers 'u v', got '" + p + "'");
                               pts.push_back({uv[0], uv[1]});
                             }
                             c.points = pts;
                           },
                           [](const RunConfig& c) {
                             std::string s;
                             for (std::size_t i = 0; i < c.points.size(); ++i)
                               s += (i ? "; " : "") + fmt12(c.points[i].u0) + ' ' + fmt12(c.points[i].v0);
                             return s;
                           }};
    k["dataset.correlators"] = {[](RunConfig& c, const std::string& v) {
                                  std::vector<std::array<int, 4>> cs;
                                  for (const auto& p : split(v, ';')) {
                                    if (p.empty()) continue;
                                    std::istringstream is(p);
                                    std::array<int, 4> a{};
                                    std::string extra;
                                    if (!(is >> a[0] >> a[1] >> a[2] >> a[3]) || (is >> extra))
                                      throw ConfigError("a correlator is four field indices, got '" + p + "'");
                                    cs.push_back(a);
                                  }
                                  c.correlators = cs;
                                },
                                [](const RunConfig& c) {
                                  std::string s;
                                  for (std::size_t i = 0; i < c.correlators.size(); ++i) {
                                    const auto& a = c.correlators[i];
                                    s += (i ? "; " : "") + std::to_string(a[0]) + ' ' + std::to_string(a[1]) + ' ' +
                                         std::to_string(a[2]) + ' ' + std::to_string(a[3]);
                                  }
                                  return s;
                                }};
    return k;
  }();
  return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = keys().find(key);
  if (it == keys().end()) throw ConfigError("unknown key '" + key + "'");
  try {
    it->second.set(*this, value);
  } catch (const ConfigError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (!(d > 2)) throw ConfigError("run.d must exceed 2");
  if (lambda < 1 || lambda > kDefaultMaxLambda)
    throw ConfigError("run.lambda must be between 1 and " + std::to_string(kDefaultMaxLambda));
  if (precision_bits != 64 && precision_bits != 113) throw ConfigError("run.precision_bits must be 64 or 113");
  if (workers < 1) throw ConfigError("run.workers must be at least 1");
  if (!(point.u0 > 0 && point.v0 > 0) || !in_crossing_region(point))
    throw ConfigError("point must lie in the convergence region of both channels");
  grid.validate();
  if (series_order < 1) throw ConfigError("solver.series_order must be positive");
  if (!(margin >= 0)) throw ConfigError("solver.margin must be nonnegative");
  if (max_rounds < 1 || max_iterations < 1) throw ConfigError("solver limits must be positive");
  if (!(check_epsilon > 0)) throw ConfigError("solver.check_epsilon must be positive");
  if (!(time_limit >= 0)) throw ConfigError("solver.time_limit must be nonnegative");
  for (const Range* r : {&delta1, &delta2})
    if (!(r->step > 0)) throw ConfigError("scan steps must be positive");
  if (output.empty()) throw ConfigError("scan.output must be set");
  if (!(truncation > 0)) throw ConfigError("dataset.truncation must be positive");
  if (rho.empty()) throw ConfigError("dataset.rho needs at least one sample");
  for (Real r : rho)
    if (!(r > 0 && r < 1)) throw ConfigError("dataset.rho samples must lie in (0, 1)");
  if (points.empty()) throw ConfigError("dataset.points needs at least one point");
  for (const auto& c : correlators)
    for (int i : c)
      if (i < 0) throw ConfigError("correlator indices must be nonnegative");
}

SolverOptions RunConfig::solver() const {
  SolverOptions o;
  o.d = d;
  o.point = point;
  o.series_order = series_order;
  o.margin = margin;
  o.max_rounds = max_rounds;
  o.max_iterations = max_iterations;
  o.precision_bits = precision_bits;
  o.check_epsilon = check_epsilon;
  o.time_limit = time_limit;
  return o;
}

ScanSettings RunConfig::scan_settings() const {
  ScanSettings s;
  s.mode = mode;
  s.lambda = lambda;
  s.grid = grid;
  s.solver = solver();
  s.irrelevant = irrelevant;
  s.workers = workers;
  s.seed = seed;
  s.record_time = record_time;
  s.certificate_dir = certificate_dir;
  return s;
}

ScanGrid RunConfig::scan_grid() const {
  ScanGrid g;
  g.delta1 = delta1;
  g.delta2 = delta2;
  g.settings = scan_settings();
  return g;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, v] : keys()) out.push_back(k);
  return out;
}

void read_config(std::istream& is, RunConfig& cfg, const std::string& name) {
  std::string line, section;
  int ln = 0;
  while (std::getline(is, line)) {
    ++ln;
    auto fail = [&](const std::string& msg) {
      throw ConfigError(name + " line " + std::to_string(ln) + ": " + msg);
    };
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail("empty section name");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if (section.empty()) fail("key '" + key + "' outside a section");
    try {
      cfg.set(section + "." + key, value);
    } catch (const ConfigError& e) {
      fail(e.what());
    }
  }
}

void read_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path);
  read_config(is, cfg, path);
}

void write_config(const RunConfig& cfg, std::ostream& os) {
  std::string section;
  for (const auto& [k, key] : keys()) {
    const auto dot = k.find('.');
    const std::string s = k.substr(0, dot);
    if (s != section) {
      os << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    os << k.substr(dot + 1) << " = " << key.get(cfg) << '\n';
  }
}

}  // namespace crossbound
