#include "qsel/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "qsel/covering.hpp"
#include "qsel/landscape.hpp"
#include "qsel/model_operators.hpp"
#include "qsel/spin.hpp"
#include "qsel/symplectic.hpp"

namespace qsel {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidInput, what); }

// Typed access to one JSON object; remembers which keys were read so leftovers can be
// rejected.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) bad(where_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void mark(const std::string& key) { seen_.insert(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    seen_.insert(key);
    if (!has(key)) return def;
    return as_number(j_.at(key), key);
  }
  double number(const std::string& key) {
    require(key);
    return number(key, 0.0);
  }

  long integer(const std::string& key, long def) {
    seen_.insert(key);
    if (!has(key)) return def;
    return as_integer(j_.at(key), key);
  }
  long integer(const std::string& key) {
    require(key);
    return integer(key, 0);
  }

  bool boolean(const std::string& key, bool def) {
    seen_.insert(key);
    if (!has(key)) return def;
    if (!j_.at(key).is_boolean()) bad(where_ + "." + key + ": expected a boolean");
    return j_.at(key).get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    seen_.insert(key);
    if (!has(key)) return def;
    if (!j_.at(key).is_string()) bad(where_ + "." + key + ": expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    seen_.insert(key);
    if (!has(key)) return def;
    const json& a = j_.at(key);
    if (!a.is_array()) bad(where_ + "." + key + ": expected an array");
    std::vector<double> out;
    for (const auto& v : a) out.push_back(as_number(v, key));
    return out;
  }

  std::vector<long> integers(const std::string& key) {
    require(key);
    seen_.insert(key);
    const json& a = j_.at(key);
    if (!a.is_array()) bad(where_ + "." + key + ": expected an array");
    std::vector<long> out;
    for (const auto& v : a) out.push_back(as_integer(v, key));
    return out;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad(where_ + ": unknown field '" + it.key() + "'");
  }

  const std::string& where() const { return where_; }

 private:
  void require(const std::string& key) const {
    if (!has(key)) bad(where_ + ": missing field '" + key + "'");
  }
  double as_number(const json& v, const std::string& key) const {
    if (!v.is_number()) bad(where_ + "." + key + ": expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad(where_ + "." + key + ": not finite");
    return d;
  }
  long as_integer(const json& v, const std::string& key) const {
    if (!v.is_number_integer()) bad(where_ + "." + key + ": expected an integer");
    return v.get<long>();
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& what) {
  if (!ok) bad(what);
}

// ---- shared sub-schemas ----

ModelSpec preset_model(const std::string& name) {
  if (name == "crossing") return crossing_spec();
  if (name == "crossing_abs") return crossing_abs_spec();
  if (name == "harmonic") return harmonic_spec(2);
  if (name == "harmonic1d") return harmonic_spec(1);
  if (name == "airy") return airy_spec();
  bad("model.preset: unknown preset '" + name + "'");
}

json vec2(const Eigen::Vector2d& v) { return json::array({v(0), v(1)}); }

Eigen::Vector2d read_vec2(Fields& f, const std::string& key, const Eigen::Vector2d& def) {
  const std::vector<double> v = f.numbers(key, {def(0), def(1)});
  check(v.size() == 2, f.where() + "." + key + ": expected two entries");
  return Eigen::Vector2d(v[0], v[1]);
}

ModelSpec model_from_json(const json& j) {
  Fields f(j, "model");
  const std::string preset = f.string("preset", "crossing");
  ModelSpec s = preset_model(preset);
  s.dim = static_cast<int>(f.integer("dim", s.dim));
  if (f.has("kinetic")) {
    const json& k = f.raw("kinetic");
    check(k.is_array() && k.size() == 2 && k[0].is_array() && k[1].is_array() &&
              k[0].size() == 2 && k[1].size() == 2,
          "model.kinetic: expected a 2x2 array");
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        check(k[a][b].is_number(), "model.kinetic: expected numbers");
        s.kinetic(a, b) = k[a][b].get<double>();
      }
  } else {
    f.mark("kinetic");
  }
  s.quartic = f.number("quartic", s.quartic);
  s.harmonic = read_vec2(f, "harmonic", s.harmonic);
  s.absolute = read_vec2(f, "absolute", s.absolute);
  s.linear = read_vec2(f, "linear", s.linear);
  s.hbar = f.number("hbar", s.hbar);
  s.R = f.number("R", s.R);
  const bool has_m = f.has("M"), has_h = f.has("h");
  s.M = static_cast<int>(f.integer("M", s.M));
  const double h = f.number("h", 0.0);
  if (has_h) {
    check(h > 0.0, "model.h must be positive");
    const long m = std::lround(2.0 * s.R / h) - 1;
    if (has_m && m != s.M) bad("model: M and h disagree");
    s.M = static_cast<int>(m);
    if (std::abs(s.spacing() - h) > 1e-9 * h) bad("model: 2R/h must be an integer");
  }
  s.v_cut = f.number("v_cut", std::numeric_limits<double>::infinity());
  f.done();
  validate_model(s);
  const double unknowns = std::pow(static_cast<double>(s.M), s.dim);
  if (!std::isfinite(s.v_cut) && unknowns > kMaxGridUnknowns)
    throw Error(ErrorKind::GridTooLarge, "model grid exceeds the unknown limit");
  return s;
}

json model_to_json(const ModelSpec& s, const std::string& preset) {
  json j;
  j["preset"] = preset;
  j["dim"] = s.dim;
  j["kinetic"] = json::array({vec2(s.kinetic.row(0).transpose()), vec2(s.kinetic.row(1).transpose())});
  j["quartic"] = s.quartic;
  j["harmonic"] = vec2(s.harmonic);
  j["absolute"] = vec2(s.absolute);
  j["linear"] = vec2(s.linear);
  j["hbar"] = s.hbar;
  j["R"] = s.R;
  j["M"] = s.M;
  j["v_cut"] = std::isfinite(s.v_cut) ? json(s.v_cut) : json(nullptr);
  return j;
}

json normalize_model(const json& j) {
  const std::string preset = j.is_object() && j.contains("preset") && j["preset"].is_string()
                                 ? j["preset"].get<std::string>()
                                 : "crossing";
  return model_to_json(model_from_json(j), preset);
}

TriangleGraph graph_from_name(const std::string& name) {
  std::vector<int> args;
  std::string head = name;
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    head = name.substr(0, colon);
    std::string rest = name.substr(colon + 1);
    std::replace(rest.begin(), rest.end(), 'x', ' ');
    std::istringstream in(rest);
    int v;
    while (in >> v) args.push_back(v);
    if (!in.eof()) bad("graph: cannot parse '" + name + "'");
  }
  if (head == "triangle" && args.empty()) return triangle_graph();
  if (head == "leaf" && args.empty()) return leaf_graph();
  if (head == "obstructed" && args.empty()) return obstructed_graph();
  if (head == "husimi" && args.size() == 1) return husimi_graph(args[0]);
  if (head == "loop" && args.size() == 1) return loop_graph(args[0]);
  if (head == "kagome" && args.size() == 2) return kagome_patch(args[0], args[1]);
  throw Error(ErrorKind::InvalidGraph, "unknown graph '" + name + "'");
}

ConfigFamily family_from_name(const std::string& name) {
  if (name == "leaf") return leaf_family();
  if (name == "four_loop_a") return four_loop_family_a();
  if (name == "four_loop_b") return four_loop_family_b();
  bad("landscape-scan.family: unknown family '" + name + "'");
}

// ---- per-command schemas ----

json normalize_melin(const json& p) {
  Fields f(p, "melin-quad");
  const long n = f.integer("n");
  check(n >= 1 && n <= 64, "melin-quad.n must be in [1, 64]");
  const std::vector<double> m = f.numbers("matrix", {});
  check(static_cast<long>(m.size()) == 4 * n * n, "melin-quad.matrix must hold (2n)^2 entries");
  const long cutoff = f.integer("oracle_cutoff", 0);
  check(cutoff >= 0 && cutoff <= 200, "melin-quad.oracle_cutoff must be in [0, 200]");
  f.done();
  Eigen::MatrixXd mat(2 * n, 2 * n);
  for (long r = 0; r < 2 * n; ++r)
    for (long c = 0; c < 2 * n; ++c) mat(r, c) = m[r * 2 * n + c];
  QuadraticForm q(mat);  // shape and symmetry
  return {{"n", n}, {"matrix", m}, {"oracle_cutoff", cutoff}};
}

json normalize_landscape(const json& p) {
  Fields f(p, "landscape-scan");
  const std::string family = f.string("family", "leaf");
  const ConfigFamily fam = family_from_name(family);
  const long points = f.integer("points", 64);
  check(points >= 1 && points <= 100000, "landscape-scan.points must be in [1, 100000]");
  const double lo = f.number("theta_min", fam.theta_min);
  const double hi = f.number("theta_max", fam.theta_max);
  check(lo < hi, "landscape-scan: theta_min must be below theta_max");
  f.done();
  return {{"family", family}, {"points", points}, {"theta_min", lo}, {"theta_max", hi}};
}

json normalize_spectrum(const json& p) {
  Fields f(p, "spectrum");
  const std::string exp = f.string("experiment", "triangle");
  check(exp == "triangle" || exp == "sphere_z2" || exp == "sphere_miniwell" || exp == "graph",
        "spectrum.experiment must be triangle, sphere_z2, sphere_miniwell or graph");
  const std::vector<long> ns = f.integers("N");
  check(!ns.empty(), "spectrum.N must not be empty");
  for (long n : ns) check(n >= 1 && n <= 100000, "spectrum.N entries must be in [1, 100000]");
  const double eps = f.number("epsilon", 0.3);
  if (exp == "sphere_miniwell") check(std::abs(eps) < 1.0, "spectrum.epsilon must satisfy |epsilon| < 1");
  const std::string graph = f.string("graph", "triangle");
  if (exp == "graph") graph_from_name(graph);
  const long levels = f.integer("levels", 4);
  check(levels >= 2 && levels <= 32, "spectrum.levels must be in [2, 32]");
  f.done();
  return {{"experiment", exp}, {"N", ns}, {"epsilon", eps}, {"graph", graph}, {"levels", levels}};
}

json normalize_weyl(const json& p) {
  Fields f(p, "modelops-weyl");
  json model = normalize_model(f.has("model") ? f.raw("model") : json::object());
  f.mark("model");
  const double lo = f.number("lambda_min", 20.0);
  const double hi = f.number("lambda_max", 200.0);
  const long points = f.integer("points", 10);
  const std::string spacing = f.string("spacing", "linear");
  const double r = f.number("r", 1.0);
  f.done();
  check(lo > 0.0 && lo < hi, "modelops-weyl: need 0 < lambda_min < lambda_max");
  check(points >= 3 && points <= 1000, "modelops-weyl.points must be in [3, 1000]");
  check(spacing == "linear" || spacing == "log", "modelops-weyl.spacing must be linear or log");
  check(r > 0.0, "modelops-weyl.r must be positive");
  return {{"model", model}, {"lambda_min", lo}, {"lambda_max", hi},
          {"points", points}, {"spacing", spacing}, {"r", r}};
}

json normalize_scaling(const json& p) {
  Fields f(p, "modelops-scaling");
  json model = normalize_model(f.has("model") ? f.raw("model") : json::object());
  f.mark("model");
  const std::vector<double> hbars = f.numbers("hbar", {0.05, 0.1, 0.2});
  check(!hbars.empty(), "modelops-scaling.hbar must not be empty");
  for (double h : hbars) check(h > 0.0, "modelops-scaling.hbar entries must be positive");
  const bool agmon = f.boolean("agmon", false);
  f.done();
  return {{"model", model}, {"hbar", hbars}, {"agmon", agmon}};
}

json normalize_cover(const json& p) {
  Fields f(p, "cover-demo");
  const long m = f.integer("m", 2);
  check(m == 1 || m == 2, "cover-demo.m must be 1 or 2");
  const long n = f.integer("n", 256);
  check(n >= 2 && n <= (m == 1 ? 1 << 20 : 4096), "cover-demo.n out of range");
  const std::string density = f.string("density", "random");
  check(density == "uniform" || density == "spike" || density == "strip" || density == "random",
        "cover-demo.density must be uniform, spike, strip or random");
  const double width = f.number("width", 0.05);
  check(width > 0.0, "cover-demo.width must be positive");
  const std::vector<double> center = f.numbers("center", {0.5, 0.5});
  check(center.size() == 2, "cover-demo.center needs two entries");
  const double a = f.number("a", 0.2);
  const double t = f.number("t", 0.3);
  if (!(a > 0.0 && a <= 0.25) || !(t > 0.0 && t < 1.0))
    throw Error(ErrorKind::ParamOutOfRange, "cover-demo needs 0 < a <= 1/4 and 0 < t < 1");
  const long trials = f.integer("trials", 1);
  check(trials >= 1 && trials <= 100000, "cover-demo.trials must be in [1, 100000]");
  f.done();
  return {{"m", m}, {"n", n}, {"density", density}, {"width", width}, {"center", center},
          {"a", a}, {"t", t}, {"trials", trials}};
}

json normalize_params(const std::string& command, const json& params) {
  if (command == "melin-quad") return normalize_melin(params);
  if (command == "landscape-scan") return normalize_landscape(params);
  if (command == "spectrum") return normalize_spectrum(params);
  if (command == "modelops-weyl") return normalize_weyl(params);
  if (command == "modelops-scaling") return normalize_scaling(params);
  if (command == "cover-demo") return normalize_cover(params);
  bad("unknown subcommand '" + command + "'");
}

// ---- runners ----

ExperimentOutput run_melin(const json& p) {
  const int n = p["n"].get<int>();
  const std::vector<double> m = p["matrix"].get<std::vector<double>>();
  Eigen::MatrixXd mat(2 * n, 2 * n);
  for (int r = 0; r < 2 * n; ++r)
    for (int c = 0; c < 2 * n; ++c) mat(r, c) = m[r * 2 * n + c];
  const QuadraticForm q(mat);
  const MelinValue mu = melin_value(q);
  const SymplecticSpectrum spec = symplectic_eigenvalues(q);
  const KernelIsotropy iso = is_kernel_isotropic(q);

  ExperimentOutput out;
  Table t{"symplectic", {"index", "lambda"}, {}};
  for (size_t i = 0; i < spec.eigenvalues.size(); ++i)
    t.add({static_cast<long>(i), spec.eigenvalues[i]});
  out.tables.push_back(t);
  out.result = {{"mu", mu.value},
                {"fast_sum", mu.fast_sum},
                {"trace_term", mu.trace_term},
                {"symplectic_eigenvalues", spec.eigenvalues},
                {"zero_modes", spec.zero_mode_dimension},
                {"kernel_isotropic", iso.isotropic}};
  const int cutoff = p["oracle_cutoff"].get<int>();
  if (cutoff > 0) {
    const double oracle = fock_melin_oracle(q, cutoff);
    out.result["oracle"] = oracle;
    out.result["oracle_difference"] = std::abs(oracle - mu.value);
  }
  out.summary = {{"mu", mu.value}};
  return out;
}

ExperimentOutput run_landscape(const json& p, const RunOptions& opts) {
  const ConfigFamily fam = family_from_name(p["family"].get<std::string>());
  const std::vector<double> grid = periodic_grid(
      p["theta_min"].get<double>(), p["theta_max"].get<double>(), p["points"].get<int>());
  const std::vector<ScanPoint> pts = family_scan(fam, grid, opts.jobs);

  ExperimentOutput out;
  Table t{"landscape", {"theta", "energy", "residual", "mu"}, {}};
  Series s{"mu", {}, {}, Series::Style::Line};
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, arg = 0.0, res = 0.0;
  for (const auto& pt : pts) {
    t.add({pt.theta, pt.energy, pt.residual, pt.mu});
    s.x.push_back(pt.theta);
    s.y.push_back(pt.mu);
    lo = std::min(lo, pt.mu);
    hi = std::max(hi, pt.mu);
    res = std::max(res, pt.residual);
  }
  // First grid point within rounding of the minimum, so flat landscapes report theta_min.
  for (const auto& pt : pts)
    if (pt.mu <= lo + 1e-9 * std::max(1.0, std::abs(lo))) {
      arg = pt.theta;
      break;
    }
  out.tables.push_back(t);
  out.plots.push_back({"landscape", "Melin value along " + fam.id, "theta", "mu", false, false, {s}, {}});
  const bool colorable = is_planar_three_coloring(fam.at(arg), 1e-9);
  out.result = {{"family", fam.id},     {"mu_min", lo},        {"mu_max", hi},
                {"mu_spread", hi - lo}, {"theta_at_min", arg}, {"max_residual", res},
                {"three_coloring_at_min", colorable}};
  out.summary = {{"mu_min", lo}, {"mu_spread", hi - lo}};
  return out;
}

json power_json(const PowerFit& f) {
  return {{"exponent", f.exponent}, {"exponent_se", f.exponent_se}, {"prefactor", f.prefactor},
          {"r2", f.r2}, {"points", f.points}};
}

ExperimentOutput run_spectrum(const json& p, const RunOptions& opts) {
  const std::string exp = p["experiment"].get<std::string>();
  std::vector<int> ns;
  for (const auto& v : p["N"]) ns.push_back(v.get<int>());
  ExperimentOutput out;
  Table t{"spectrum", {"N", "lambda_min", "gap", "width"}, {}};

  if (exp == "graph") {
    const TriangleGraph g = graph_from_name(p["graph"].get<std::string>());
    const int k = p["levels"].get<int>();
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    Table lv{"levels", {"N", "level", "value"}, {}};
    Series s{"lambda_min", {}, {}, Series::Style::Points};
    double last = 0.0;
    for (int N : ns) {
      const SpinOperator op = assemble_graph_operator(g, N);
      const int kk = static_cast<int>(std::min<long>(k, op.dimension()));
      const EigenPairs e = lowest_spectrum(op, kk);
      const double gap = kk > 1 ? e.values(1) - e.values(0) : 0.0;
      t.add({static_cast<long>(N), e.values(0), gap, std::numeric_limits<double>::quiet_NaN()});
      for (int i = 0; i < kk; ++i) lv.add({static_cast<long>(N), static_cast<long>(i), e.values(i)});
      s.x.push_back(N);
      s.y.push_back(e.values(0));
      last = e.values(0);
    }
    out.tables = {t, lv};
    out.plots.push_back({"spectrum", "Lowest level of T_N(h)", "N", "lambda_min", false, false, {s}, {}});
    out.result = {{"experiment", exp}, {"graph", p["graph"]}, {"lambda_min", last}};
    out.summary = {{"lambda_min_at_max_N", last}};
    return out;
  }

  ScalingSpec spec;
  spec.experiment = exp;
  spec.N = ns;
  spec.epsilon = p["epsilon"].get<double>();
  spec.jobs = opts.jobs;
  const ScalingResult r = scaling_study(spec);
  Series s{"N (lambda_min - min h)", {}, {}, Series::Style::Line};
  for (const auto& row : r.rows) {
    t.add({static_cast<long>(row.N), row.lambda_min, row.gap, row.width});
    s.x.push_back(row.N);
    s.y.push_back(row.N * (row.lambda_min - r.symbol_min));
  }
  out.tables.push_back(t);
  out.plots.push_back({"spectrum", "Rescaled lowest level, " + exp, "N",
                       "N (lambda_min - min h)", true, false, {s}, {}});
  out.result = {{"experiment", exp},
                {"symbol_min", r.symbol_min},
                {"mu_min", r.mu_min},
                {"lambda_min", r.rows.front().lambda_min}};
  if (r.rows.size() - r.rows.size() / 2 >= 2) {
    out.result["leading"] = power_json(r.leading);
    out.result["correction"] = power_json(r.correction);
    if (r.has_width) out.result["width"] = power_json(r.width);
  }
  out.summary = {{"lambda_min_at_min_N", r.rows.front().lambda_min}};
  return out;
}

std::vector<double> lambda_grid(const json& p) {
  const double lo = p["lambda_min"].get<double>(), hi = p["lambda_max"].get<double>();
  const int n = p["points"].get<int>();
  const bool log = p["spacing"].get<std::string>() == "log";
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const double f = static_cast<double>(i) / (n - 1);
    out[i] = log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f;
  }
  out.back() = hi;
  return out;
}

ExperimentOutput run_weyl(const json& p, const RunOptions& opts) {
  const ModelSpec spec = model_from_json(p["model"]);
  const double r = p["r"].get<double>();
  const DiscretizedOperator op = build(spec);
  log_info("modelops-weyl: " + std::to_string(op.matrix.rows()) + " unknowns");
  const CountCurve c = weyl_count(op, lambda_grid(p), r, opts.jobs);

  ExperimentOutput out;
  Table t{"weyl", {"lambda", "count", "count_over_power"}, {}};
  Series pts{"N / Lambda^(3r/2)", {}, {}, Series::Style::Points};
  Series fit{"a + b log Lambda", {}, {}, Series::Style::Line};
  for (size_t i = 0; i < c.lambda.size(); ++i) {
    const double ratio = c.count[i] / std::pow(c.lambda[i], 1.5 * r);
    t.add({c.lambda[i], c.count[i], ratio});
    pts.x.push_back(c.lambda[i]);
    pts.y.push_back(ratio);
    fit.x.push_back(c.lambda[i]);
    fit.y.push_back(c.log_model.coef(0) + c.log_model.coef(1) * std::log(c.lambda[i]));
  }
  out.tables.push_back(t);
  out.plots.push_back({"weyl", "Eigenvalue count against the log-corrected law", "Lambda",
                       "N / Lambda^(3r/2)", true, false, {pts, fit}, {}});
  const auto ci = c.log_model.confidence(1);
  out.result = {{"unknowns", static_cast<long>(op.matrix.rows())},
                {"h", c.h},
                {"reliability_bound", c.reliability_bound},
                {"intercept", c.log_model.coef(0)},
                {"slope", c.log_model.coef(1)},
                {"slope_ci", {ci.first, ci.second}},
                {"r2", c.log_model.r2},
                {"f_test_p", c.f_test_p},
                {"power", power_json(c.power_model)},
                {"rss_log_model_logspace", c.rss_log_model_logspace},
                {"rss_power_model_logspace", c.rss_power_model_logspace},
                {"log_beats_power", c.log_beats_power},
                {"ratio_mean", c.ratio_mean},
                {"ratio_spread", c.ratio_spread}};
  out.summary = {{"slope", c.log_model.coef(1)}, {"r2", c.log_model.r2},
                 {"log_beats_power", c.log_beats_power}};
  return out;
}

ExperimentOutput run_scaling(const json& p, const RunOptions& opts) {
  const ModelSpec base = model_from_json(p["model"]);
  const std::vector<double> hbars = p["hbar"].get<std::vector<double>>();
  const HbarScaling s = hbar_scaling(base, hbars, opts.jobs);

  ExperimentOutput out;
  Table t{"scaling",
          {"hbar", "R", "M", "lambda0", "lambda0_error", "gap", "gap_error", "ratio", "gap_ratio",
           "converged"},
          {}};
  Series l0{"lambda0", {}, {}, Series::Style::Points};
  Series ref{"c hbar^(4/3)", {}, {}, Series::Style::Line};
  for (const auto& r : s.rows) {
    t.add({r.hbar, r.R, static_cast<long>(r.M), r.lambda0, r.lambda0_error, r.gap, r.gap_error,
           r.ratio, r.gap_ratio, static_cast<long>(r.converged)});
    l0.x.push_back(r.hbar);
    l0.y.push_back(r.lambda0);
  }
  if (!s.rows.empty()) {
    std::vector<HbarRow> sorted = s.rows;
    std::sort(sorted.begin(), sorted.end(), [](auto& a, auto& b) { return a.hbar < b.hbar; });
    for (const auto& r : sorted) {
      ref.x.push_back(r.hbar);
      ref.y.push_back(sorted.front().ratio * std::pow(r.hbar, 4.0 / 3.0));
    }
  }
  out.tables.push_back(t);
  out.plots.push_back({"scaling", "Ground level against hbar", "hbar", "lambda0", true, true,
                       {l0, ref}, {}});
  bool all_converged = true;
  for (const auto& r : s.rows) all_converged = all_converged && r.converged;
  out.result = {{"ratio_spread", s.ratio_spread},
                {"gap_ratio_spread", s.gap_ratio_spread},
                {"all_converged", all_converged}};
  if (p["agmon"].get<bool>()) {
    const DiscretizedOperator op = build(base);
    const GroundState g = ground_and_gap(op);
    const AgmonFit a = agmon_fit(op, g.vector);
    out.result["agmon"] = {{"exponent", a.exponent}, {"rate", a.rate},  {"log_coef", a.log_coef},
                           {"r2", a.r2},             {"shells", a.shells}, {"r_lo", a.r_lo},
                           {"r_hi", a.r_hi}};
  }
  out.summary = {{"ratio_spread", s.ratio_spread}, {"gap_ratio_spread", s.gap_ratio_spread}};
  return out;
}

DensityGrid make_density(const json& p, std::uint64_t seed) {
  const int m = p["m"].get<int>(), n = p["n"].get<int>();
  const std::string kind = p["density"].get<std::string>();
  if (kind == "uniform") return DensityGrid::uniform(m, n);
  if (kind == "strip") return DensityGrid::strip(m, n, p["width"].get<double>());
  if (kind == "spike") {
    std::vector<double> c = p["center"].get<std::vector<double>>();
    c.resize(m);
    return DensityGrid::spike(m, n, c, p["width"].get<double>());
  }
  return DensityGrid::random(m, n, seed);
}

ExperimentOutput run_cover(const json& p, std::uint64_t seed) {
  const int m = p["m"].get<int>();
  const double a = p["a"].get<double>(), t = p["t"].get<double>();
  const int trials = p["trials"].get<int>();

  ExperimentOutput out;
  Table boxes{"boxes", {"trial", "box", "lo0", "hi0", "lo1", "hi1"}, {}};
  Table reports{"cover_reports",
                {"trial", "boxes", "L", "t_prime", "max_diameter", "min_separation",
                 "separation_target", "overlap_ratio", "overlap_bound", "covers", "passed"},
                {}};
  Plot plot{"cover", "Boxes of the first trial", "x0", m == 2 ? "x1" : "box", false, false, {}, {}};
  bool all = true;
  double worst_overlap = 0.0;
  for (int k = 0; k < trials; ++k) {
    const DensityGrid f = make_density(p, seed + static_cast<std::uint64_t>(k));
    const BoxCover cover = cut_cover(f, a, t);
    const CoverReport rep = verify_cover(cover, f, a, t);
    for (size_t b = 0; b < cover.boxes.size(); ++b) {
      const Box& bx = cover.boxes[b];
      const double lo1 = m == 2 ? bx.lo[1] : std::numeric_limits<double>::quiet_NaN();
      const double hi1 = m == 2 ? bx.hi[1] : std::numeric_limits<double>::quiet_NaN();
      boxes.add({static_cast<long>(k), static_cast<long>(b), bx.lo[0], bx.hi[0], lo1, hi1});
      if (k == 0) {
        if (m == 2)
          plot.rects.push_back({bx.lo[0], bx.lo[1], bx.hi[0], bx.hi[1]});
        else
          plot.rects.push_back({bx.lo[0], double(b), bx.hi[0], b + 0.8});
      }
    }
    reports.add({static_cast<long>(k), static_cast<long>(rep.boxes), static_cast<long>(cover.L),
                 cover.t_prime, rep.max_diameter, rep.min_separation, rep.separation_target,
                 rep.overlap_ratio, rep.overlap_bound, static_cast<long>(rep.covers),
                 static_cast<long>(rep.all())});
    all = all && rep.all();
    worst_overlap = std::max(worst_overlap, rep.overlap_ratio / rep.overlap_bound);
  }
  out.tables = {boxes, reports};
  out.plots.push_back(plot);
  out.result = {{"trials", trials}, {"all_passed", all}, {"worst_overlap_over_bound", worst_overlap}};
  out.summary = out.result;
  return out;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"melin-quad",    "landscape-scan",
                                                 "spectrum",      "modelops-weyl",
                                                 "modelops-scaling", "cover-demo"};
  return names;
}

ExperimentConfig parse_config(const json& doc, const std::string& command) {
  Fields f(doc, "config");
  ExperimentConfig cfg;
  cfg.command = f.string("command", command);
  if (!command.empty() && cfg.command != command)
    bad("config names command '" + cfg.command + "' but '" + command + "' was requested");
  if (std::find(subcommands().begin(), subcommands().end(), cfg.command) == subcommands().end())
    bad("unknown subcommand '" + cfg.command + "'");
  if (f.has("seed")) {
    const json& s = f.raw("seed");
    if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<long>() < 0))
      bad("config.seed must be a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  } else {
    f.mark("seed");
  }
  cfg.output = f.string("output", "out");
  cfg.params = normalize_params(cfg.command, f.has("params") ? f.raw("params") : json::object());
  f.mark("params");
  f.done();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::string& command) {
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
  return parse_config(doc, command);
}

json to_json(const ExperimentConfig& cfg) {
  return {{"command", cfg.command}, {"seed", cfg.seed}, {"output", cfg.output},
          {"params", cfg.params}};
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunOptions o = opts;
  if (o.deterministic) o.jobs = 1;
  o.jobs = std::max(1, o.jobs);
  // Recheck: callers may hand-build configs.
  const json p = normalize_params(cfg.command, cfg.params);
  log_debug("params " + p.dump());
  if (cfg.command == "melin-quad") return run_melin(p);
  if (cfg.command == "landscape-scan") return run_landscape(p, o);
  if (cfg.command == "spectrum") return run_spectrum(p, o);
  if (cfg.command == "modelops-weyl") return run_weyl(p, o);
  if (cfg.command == "modelops-scaling") return run_scaling(p, o);
  return run_cover(p, cfg.seed);
}

json RunManifest::to_json() const {
  return {{"config_hash", config_hash}, {"tool_version", tool_version}, {"wall_time", wall_time},
          {"files", files}, {"summary", summary}};
}

RunManifest write_artifacts(const ExperimentConfig& cfg, const ExperimentOutput& out,
                            const std::filesystem::path& dir, double wall_time, bool plots) {
  std::filesystem::create_directories(dir);
  RunManifest m;
  m.config_hash = hex64(fnv1a(qsel::to_json(cfg).dump()));
  m.tool_version = kToolVersion;
  m.wall_time = wall_time;
  m.summary = out.summary;
  for (const auto& t : out.tables) {
    write_text(dir / (t.name + ".csv"), to_csv(t));
    m.files.push_back(t.name + ".csv");
  }
  write_text(dir / "result.json", out.result.dump(2) + "\n");
  m.files.push_back("result.json");
  if (plots)
    for (const auto& p : out.plots) {
      write_text(dir / (p.name + ".svg"), to_svg(p));
      m.files.push_back(p.name + ".svg");
    }
  write_text(dir / "config.json", qsel::to_json(cfg).dump(2) + "\n");
  m.files.push_back("config.json");
  write_text(dir / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NoConvergence:
    case ErrorKind::QuadratureFail:
    case ErrorKind::WindowEmpty:
    case ErrorKind::UnreliableWindow:
    case ErrorKind::NotAtMinimum:
    case ErrorKind::DegenerateFamily:
    case ErrorKind::SmoothnessMismatch:
      return 3;
    default:
      return 2;
  }
}

// ---- regression ----

namespace {

struct Tolerances {
  double def = 1e-8;
  std::map<std::string, double> fields;

  double at(const std::string& key) const {
    auto it = fields.find(key);
    return it == fields.end() ? def : it->second;
  }
};

Tolerances load_tolerances(const std::filesystem::path& path) {
  Tolerances t;
  if (!std::filesystem::exists(path)) return t;
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    bad(path.string() + ": " + e.what());
  }
  Fields f(j, "tolerances");
  t.def = f.number("default", t.def);
  if (f.has("fields")) {
    const json& fs = f.raw("fields");
    check(fs.is_object(), "tolerances.fields must be an object");
    for (auto it = fs.begin(); it != fs.end(); ++it) {
      check(it.value().is_number() && it.value().get<double>() >= 0.0,
            "tolerances.fields values must be nonnegative numbers");
      t.fields[it.key()] = it.value().get<double>();
    }
  } else {
    f.mark("fields");
  }
  f.done();
  return t;
}

bool is_integer_text(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool parse_double(const std::string& s, double& v) {
  try {
    size_t used = 0;
    v = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

bool close(double e, double a, double tol) {
  if (std::isnan(e) || std::isnan(a)) return std::isnan(e) && std::isnan(a);
  if (e == a) return true;
  return std::abs(e - a) <= tol * std::max(std::abs(e), std::abs(a));
}

void compare_scalar(const std::string& expected, const std::string& actual, bool integer,
                    double tol, FieldDiff base, std::vector<FieldDiff>& diffs) {
  bool ok;
  if (integer) {
    ok = expected == actual;
    tol = 0.0;
  } else {
    double e, a;
    ok = parse_double(expected, e) && parse_double(actual, a) ? close(e, a, tol)
                                                                : expected == actual;
  }
  if (!ok) {
    base.expected = expected;
    base.actual = actual;
    base.tolerance = tol;
    diffs.push_back(base);
  }
}

void compare_csv(const std::string& case_name, const std::string& file, const std::string& exp,
                 const std::string& act, const Tolerances& tol, std::vector<FieldDiff>& diffs) {
  const auto e = parse_csv(exp), a = parse_csv(act);
  FieldDiff base{case_name, file, "", "", "", 0.0};
  if (e.empty() || a.empty() || e[0] != a[0] || e.size() != a.size()) {
    base.field = "shape";
    base.expected = std::to_string(e.size()) + " rows";
    base.actual = std::to_string(a.size()) + " rows";
    diffs.push_back(base);
    return;
  }
  const auto& header = e[0];
  for (size_t r = 1; r < e.size(); ++r) {
    if (e[r].size() != a[r].size() || e[r].size() != header.size()) {
      base.field = "row " + std::to_string(r);
      base.expected = std::to_string(e[r].size()) + " fields";
      base.actual = std::to_string(a[r].size()) + " fields";
      diffs.push_back(base);
      continue;
    }
    for (size_t c = 0; c < header.size(); ++c) {
      base.field = header[c] + "[" + std::to_string(r - 1) + "]";
      compare_scalar(e[r][c], a[r][c], is_integer_text(e[r][c]), tol.at(file + ":" + header[c]),
                     base, diffs);
    }
  }
}

void compare_json(const std::string& case_name, const std::string& file, const std::string& path,
                  const json& e, const json& a, const Tolerances& tol,
                  std::vector<FieldDiff>& diffs) {
  FieldDiff base{case_name, file, path.empty() ? "/" : path, "", "", 0.0};
  if (e.is_object() && a.is_object()) {
    for (auto it = e.begin(); it != e.end(); ++it) {
      if (!a.contains(it.key())) {
        base.field = path + "/" + it.key();
        base.expected = it.value().dump();
        base.actual = "(missing)";
        diffs.push_back(base);
      } else {
        compare_json(case_name, file, path + "/" + it.key(), it.value(), a[it.key()], tol, diffs);
      }
    }
    for (auto it = a.begin(); it != a.end(); ++it)
      if (!e.contains(it.key())) {
        base.field = path + "/" + it.key();
        base.expected = "(missing)";
        base.actual = it.value().dump();
        diffs.push_back(base);
      }
    return;
  }
  if (e.is_array() && a.is_array() && e.size() == a.size()) {
    for (size_t i = 0; i < e.size(); ++i)
      compare_json(case_name, file, path + "/" + std::to_string(i), e[i], a[i], tol, diffs);
    return;
  }
  if (e.is_number() && a.is_number()) {
    const bool integer = e.is_number_integer() && a.is_number_integer();
    const double t = tol.at(file + ":" + path);
    if (integer ? e.get<long>() != a.get<long>() : !close(e.get<double>(), a.get<double>(), t)) {
      base.expected = e.dump();
      base.actual = a.dump();
      base.tolerance = integer ? 0.0 : t;
      diffs.push_back(base);
    }
    return;
  }
  if (e != a) {
    base.expected = e.dump();
    base.actual = a.dump();
    diffs.push_back(base);
  }
}

}  // namespace

RegressionReport regression(const std::filesystem::path& golden, const std::filesystem::path& work,
                            const RunOptions& opts) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(golden))
    throw Error(ErrorKind::MissingGolden, "no golden directory at " + golden.string());
  std::vector<fs::path> cases;
  for (const auto& entry : fs::directory_iterator(golden))
    if (entry.is_directory()) cases.push_back(entry.path());
  std::sort(cases.begin(), cases.end());
  if (cases.empty()) throw Error(ErrorKind::MissingGolden, "no cases under " + golden.string());

  RegressionReport report;
  for (const auto& dir : cases) {
    const std::string name = dir.filename().string();
    if (!fs::exists(dir / "config.json"))
      throw Error(ErrorKind::MissingGolden, name + ": config.json missing");
    const ExperimentConfig cfg = load_config(dir / "config.json");
    const Tolerances tol = load_tolerances(dir / "tolerances.json");
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string f = entry.path().filename().string();
      if (entry.path().extension() == ".csv" || f == "result.json") files.push_back(f);
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::MissingGolden, name + ": no golden outputs");

    log_info("regression: " + name);
    const ExperimentOutput out = run_experiment(cfg, opts);
    write_artifacts(cfg, out, work / name, 0.0, false);
    report.cases.push_back(name);
    for (const auto& f : files) {
      const fs::path actual = work / name / f;
      if (!fs::exists(actual)) {
        report.diffs.push_back({name, f, "(file)", "present", "(missing)", 0.0});
        continue;
      }
      if (f == "result.json")
        compare_json(name, f, "", json::parse(read_text(dir / f)), json::parse(read_text(actual)),
                     tol, report.diffs);
      else
        compare_csv(name, f, read_text(dir / f), read_text(actual), tol, report.diffs);
    }
  }
  return report;
}

}  // namespace qsel
