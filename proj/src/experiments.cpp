#include "pdrssn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace pdrssn {

// ---------------------------------------------------------------------------
// Generators

template <class M>
Image<M> gen_piecewise_signal(const typename M::Point& p1, const typename M::Point& p2, int ell) {
  if (ell < 1) throw InvalidArgument("piecewise signal: ell must be >= 1");
  if (!M::is_point(p1, 1e-10) || !M::is_point(p2, 1e-10)) {
    throw InvalidArgument("piecewise signal: endpoints are not valid points");
  }
  Image<M> h(2 * ell, 1, p1);
  for (int i = ell; i < 2 * ell; ++i) h.points[i] = p2;
  return h;
}

double exact_rof_delta(double dist, int ell, double alpha) {
  if (!(dist > 0.0)) throw InvalidArgument("exact minimizer: endpoints must differ");
  if (ell < 1 || alpha < 0.0) throw InvalidArgument("exact minimizer: need ell >= 1 and alpha >= 0");
  return std::min(0.5, (alpha / ell) / dist);
}

template <class M>
Image<M> exact_rof_minimizer(const typename M::Point& p1, const typename M::Point& p2, int ell,
                             double alpha) {
  const double delta = exact_rof_delta(M::dist(p1, p2), ell, alpha);
  return gen_piecewise_signal<M>(M::geodesic(p1, p2, delta), M::geodesic(p2, p1, delta), ell);
}

Sphere2::Point lemniscate_center() { return Eigen::Vector3d(1.0, 0.0, 1.0) / std::sqrt(2.0); }

Image<Sphere2> gen_lemniscate(int n_points) {
  if (n_points < 2) throw InvalidArgument("lemniscate: need at least 2 points");
  const Eigen::Vector3d north(0.0, 0.0, 1.0);
  const Eigen::Vector3d center = lemniscate_center();
  const double a = M_PI / 2.0;
  Image<Sphere2> img(n_points, 1, center);
  for (int i = 0; i < n_points; ++i) {
    const double t = 2.0 * M_PI * i / n_points;
    const double s = std::sin(t), c = std::cos(t);
    const Eigen::Vector3d v(a * c / (s * s + 1.0), a * c * s / (s * s + 1.0), 0.0);
    img.points[i] = Sphere2::exp(center, Sphere2::transport(north, center, v));
  }
  return img;
}

Image<Sphere2> gen_rotations_image(int n) {
  if (n < 3) throw InvalidArgument("rotations image: N must be >= 3");
  Image<Sphere2> img(n, n, Eigen::Vector3d::UnitX());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double x = M_PI * i / (n - 1);
      const double y = M_PI * j / (n - 1);
      img(i, j) = Eigen::Vector3d(std::cos(x) * std::cos(y), std::sin(x) * std::cos(y), std::sin(y));
    }
  }
  return img;
}

namespace {

Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

Eigen::Matrix3d rot_x(double b) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(b), -std::sin(b), 0, std::sin(b), std::cos(b);
  return r;
}

Eigen::Matrix3d sym(const Eigen::Matrix3d& a) { return 0.5 * (a + a.transpose()); }

}  // namespace

Image<Spd3> gen_spd_image(int n) {
  if (n < 2) throw InvalidArgument("SPD image: N must be >= 2");
  const Eigen::Matrix3d zl = 4.0 * Eigen::Matrix3d::Identity();
  Eigen::Matrix3d a = rot_z(2.0 * M_PI / 3.0), b = rot_x(M_PI / 3.0);
  const Eigen::Matrix3d zo = sym(a * b * Eigen::Vector3d(2, 4, 8).asDiagonal() * b.transpose() * a.transpose());
  a = rot_z(-4.0 * M_PI / 3.0);
  b = rot_x(-M_PI / 3.0);
  const Eigen::Matrix3d zt = sym(a * b * Eigen::Vector3d(8.0 / std::sqrt(2.0), 8.0, std::sqrt(2.0)).asDiagonal() *
                                 b.transpose() * a.transpose());
  const double fraction = 0.66;
  auto param = [&](int r) {
    return r / (2.0 * (n - 1)) + ((r + 1) > fraction * n ? 0.5 : 0.0);
  };
  Image<Spd3> img(n, n, zo);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      Eigen::Matrix3d x = zo;
      if (r > 0) x = Spd3::geodesic(zo, zt, param(r));
      if (c > 0) x = Spd3::geodesic(x, zl, param(c));
      img(r, c) = x;
    }
  }
  return img;
}

template <>
Image<Sphere2> gen_image_2d<Sphere2>(int n) {
  return gen_rotations_image(n);
}

template <>
Image<Spd3> gen_image_2d<Spd3>(int n) {
  return gen_spd_image(n);
}

template <class M>
Image<M> add_noise(const Image<M>& img, double stddev, std::uint64_t seed) {
  if (!(stddev >= 0.0)) throw InvalidArgument("add_noise: stddev must be >= 0");
  std::mt19937_64 rng(seed);
  Image<M> out = img;
  if (stddev == 0.0) return out;
  for (auto& x : out.points) x = M::exp(x, random_tangent<M>(x, stddev, rng).value);
  return out;
}

// ---------------------------------------------------------------------------
// Configuration

std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::KnownMinimizer1D:
      return "known_minimizer_1d";
    case ExperimentKind::Denoise2D:
      return "denoise_2d";
    case ExperimentKind::Scaling:
      return "scaling";
    case ExperimentKind::InexactRates:
      return "inexact_rates";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  for (auto k : {ExperimentKind::KnownMinimizer1D, ExperimentKind::Denoise2D, ExperimentKind::Scaling,
                 ExperimentKind::InexactRates}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

namespace {

std::string_view kind_name(ResidualKind k) {
  switch (k) {
    case ResidualKind::Exact:
      return "exact";
    case ResidualKind::ConstantRel:
      return "constant_rel";
    case ResidualKind::DecayingRel:
      return "decaying_rel";
    case ResidualKind::InjectedRandom:
      return "injected";
  }
  return "?";
}

ResidualSchedule schedule_from_json(const nlohmann::json& j) {
  const std::string kind = j.value("kind", "exact");
  ResidualSchedule s;
  if (kind == "exact") {
    s = ResidualSchedule::exact();
  } else if (kind == "constant_rel") {
    s = ResidualSchedule::constant_rel(j.at("a").get<double>());
  } else if (kind == "decaying_rel") {
    s = ResidualSchedule::decaying_rel(j.at("c").get<double>());
  } else if (kind == "injected") {
    s = ResidualSchedule::injected(j.at("a").get<double>(), j.value("decaying", false),
                                   j.value("seed", std::uint64_t{0}));
  } else {
    throw ConfigError("unknown residual schedule '" + kind + "'");
  }
  return s;
}

nlohmann::json schedule_to_json(const ResidualSchedule& s) {
  nlohmann::json j{{"kind", kind_name(s.kind)}};
  switch (s.kind) {
    case ResidualKind::Exact:
      break;
    case ResidualKind::ConstantRel:
      j["a"] = s.a;
      break;
    case ResidualKind::DecayingRel:
      j["c"] = s.a;
      break;
    case ResidualKind::InjectedRandom:
      j["a"] = s.a;
      j["decaying"] = s.decaying;
      j["seed"] = s.seed;
      break;
  }
  return j;
}

template <class M>
typename M::Point default_base(const ExperimentConfig& cfg);

template <>
Sphere2::Point default_base<Sphere2>(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::KnownMinimizer1D:
      return Eigen::Vector3d::UnitX();
    case ExperimentKind::InexactRates:
      return lemniscate_center();
    default:
      return Eigen::Vector3d::UnitZ();
  }
}

template <>
Spd3::Point default_base<Spd3>(const ExperimentConfig&) {
  return Eigen::Matrix3d::Identity();
}

template <class M>
typename M::Point base_point(const ExperimentConfig& cfg) {
  if (cfg.base_point.is_null()) return default_base<M>(cfg);
  return point_from_json<M>(cfg.base_point);
}

Eigen::Matrix3d spd_known_direction() {
  Eigen::Matrix3d x;
  x << 1, 2, 2, 2, 2, 0, 2, 0, 6;
  return 2.0 * x / x.norm();
}

template <class M>
std::pair<typename M::Point, typename M::Point> default_endpoints();

template <>
std::pair<Sphere2::Point, Sphere2::Point> default_endpoints<Sphere2>() {
  return {Eigen::Vector3d(1, 1, 0).normalized(), Eigen::Vector3d(1, -1, 0).normalized()};
}

template <>
std::pair<Spd3::Point, Spd3::Point> default_endpoints<Spd3>() {
  const Eigen::Matrix3d id = Eigen::Matrix3d::Identity();
  return {Spd3::exp(id, spd_known_direction()), Spd3::exp(id, -spd_known_direction())};
}

template <class M>
std::pair<typename M::Point, typename M::Point> endpoints(const ExperimentConfig& cfg) {
  auto e = default_endpoints<M>();
  if (!cfg.dataset.p1.is_null()) e.first = point_from_json<M>(cfg.dataset.p1);
  if (!cfg.dataset.p2.is_null()) e.second = point_from_json<M>(cfg.dataset.p2);
  return e;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    c.manifold = manifold_kind_from_string(j.value("manifold", std::string("Sphere2")));
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      c.dataset.ell = d.value("ell", c.dataset.ell);
      if (d.contains("p1")) c.dataset.p1 = d.at("p1");
      if (d.contains("p2")) c.dataset.p2 = d.at("p2");
      c.dataset.n = d.value("n", c.dataset.n);
      c.dataset.sizes = d.value("sizes", c.dataset.sizes);
      c.dataset.n_points = d.value("n_points", c.dataset.n_points);
      c.dataset.noise_stddev = d.value("noise_stddev", c.dataset.noise_stddev);
      c.dataset.seed = d.value("seed", c.dataset.seed);
    }
    if (j.contains("params")) {
      const auto& p = j.at("params");
      c.alpha = p.value("alpha", c.alpha);
      c.beta = p.value("beta", c.beta);
      c.sigma = p.value("sigma", c.sigma);
      c.tau = p.value("tau", c.tau);
      if (p.contains("q")) c.q = tv_norm_from_string(p.at("q").get<std::string>());
      if (p.contains("base_point")) c.base_point = p.at("base_point");
    }
    // lRCPA starts from the model steps unless given separately.
    c.solver.sigma = c.sigma;
    c.solver.tau = c.tau;
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
      c.solver.eps_rel_stop = s.value("eps_rel_stop", c.solver.eps_rel_stop);
      c.solver.sigma = s.value("lrcpa_sigma", c.solver.sigma);
      c.solver.tau = s.value("lrcpa_tau", c.solver.tau);
      c.solver.gamma = s.value("gamma", c.solver.gamma);
      c.solver.presteps_eps = s.value("presteps_eps", c.solver.presteps_eps);
      c.solver.max_presteps = s.value("max_presteps", c.solver.max_presteps);
      if (s.contains("warm_start")) {
        c.solver.warm_start = warm_start_from_string(s.at("warm_start").get<std::string>());
      }
      c.lrcpa_max_iters = s.value("lrcpa_max_iters", c.lrcpa_max_iters);
    }
    if (j.contains("schedules")) {
      c.schedules.clear();
      for (const auto& s : j.at("schedules")) c.schedules.push_back(schedule_from_json(s));
    }
    if (j.contains("warm_starts")) {
      for (const auto& w : j.at("warm_starts")) c.warm_starts.push_back(warm_start_from_string(w.get<std::string>()));
    }
    c.targets = j.value("targets", c.targets);
    c.output_dir = j.value("output_dir", c.output_dir);
  } catch (const ConfigError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = to_string(experiment);
  j["manifold"] = to_string(manifold);
  nlohmann::json d{{"ell", dataset.ell}, {"n", dataset.n}, {"sizes", dataset.sizes},
                   {"n_points", dataset.n_points}, {"noise_stddev", dataset.noise_stddev},
                   {"seed", dataset.seed}};
  if (!dataset.p1.is_null()) d["p1"] = dataset.p1;
  if (!dataset.p2.is_null()) d["p2"] = dataset.p2;
  j["dataset"] = d;
  j["params"] = {{"alpha", alpha}, {"beta", beta}, {"sigma", sigma}, {"tau", tau}, {"q", to_string(q)}};
  if (!base_point.is_null()) j["params"]["base_point"] = base_point;
  j["solver"] = {{"max_iters", solver.max_iters},       {"eps_rel_stop", solver.eps_rel_stop},
                 {"lrcpa_sigma", solver.sigma},         {"lrcpa_tau", solver.tau},
                 {"gamma", solver.gamma},               {"presteps_eps", solver.presteps_eps},
                 {"max_presteps", solver.max_presteps}, {"warm_start", to_string(solver.warm_start)},
                 {"lrcpa_max_iters", lrcpa_max_iters}};
  j["schedules"] = nlohmann::json::array();
  for (const auto& s : schedules) j["schedules"].push_back(schedule_to_json(s));
  j["warm_starts"] = nlohmann::json::array();
  for (auto w : warm_starts) j["warm_starts"].push_back(to_string(w));
  j["targets"] = targets;
  j["output_dir"] = output_dir;
  return j;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
  if (!(alpha > 0.0)) fail("alpha must be positive");
  if (!(beta >= 0.0)) fail("beta must be non-negative");
  if (!(sigma > 0.0) || !(tau > 0.0)) fail("sigma and tau must be positive");
  if (!(dataset.noise_stddev >= 0.0)) fail("noise_stddev must be non-negative");
  if (lrcpa_max_iters < 1) fail("lrcpa_max_iters must be >= 1");
  try {
    solver.validate();
    for (const auto& s : schedules) s.validate();
  } catch (const InvalidArgument& e) {
    fail(e.what());
  }
  if (schedules.empty()) fail("at least one schedule is required");
  for (double t : targets)
    if (!(t > 0.0)) fail("targets must be positive");
  switch (experiment) {
    case ExperimentKind::KnownMinimizer1D:
      if (dataset.ell < 1) fail("ell must be >= 1");
      break;
    case ExperimentKind::Denoise2D:
      if (dataset.n < 3) fail("n must be >= 3");
      break;
    case ExperimentKind::Scaling:
      if (dataset.sizes.empty()) fail("sizes must not be empty");
      for (int n : dataset.sizes)
        if (n < 3) fail("sizes must be >= 3");
      break;
    case ExperimentKind::InexactRates:
      if (manifold != ManifoldKind::Sphere2) fail("inexact_rates uses the S2 lemniscate");
      if (dataset.n_points < 2) fail("n_points must be >= 2");
      break;
  }
  try {
    auto check_points = [&]<class M>(M) {
      if (!base_point.is_null()) point_from_json<M>(base_point);
      const auto [p1, p2] = endpoints<M>(*this);
      if (experiment == ExperimentKind::KnownMinimizer1D && !(M::dist(p1, p2) > 0.0)) {
        fail("the two signal levels p1 and p2 must differ");
      }
    };
    if (manifold == ManifoldKind::Sphere2) {
      check_points(Sphere2{});
    } else {
      check_points(Spd3{});
    }
  } catch (const InvalidArgument& e) {
    fail(e.what());
  } catch (const nlohmann::json::exception& e) {
    fail(e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// Reports

bool RunReport::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok(); });
}

const RunRecord* RunReport::find(const std::string& name) const {
  for (const auto& r : runs)
    if (r.name == name) return &r;
  return nullptr;
}

std::vector<SummaryRow> summarize(const RunRecord& run, Stage stage, const std::vector<double>& targets) {
  std::vector<SummaryRow> rows;
  for (double t : targets) {
    SummaryRow s;
    s.solver = run.name;
    s.target_eps = t;
    s.iters = run.trace.stage_iters_to(t, stage);
    const int at = run.trace.first_reaching(t);
    const TraceRow* row = at >= 0 ? &run.trace.rows[at] : (run.trace.empty() ? nullptr : &run.trace.back());
    if (row) {
      s.cpu_seconds = row->cpu_seconds;
      s.final_dist_to_reference = row->dist_ref;
    }
    rows.push_back(s);
  }
  return rows;
}

std::vector<std::optional<double>> newton_q_rates(const SolverTrace& trace) {
  return q_rate(trace.only(Stage::Newton));
}

nlohmann::json RunReport::summary_json() const {
  nlohmann::json j;
  j["experiment"] = to_string(experiment);
  j["manifold"] = to_string(manifold);
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json q = nlohmann::json::array();
    for (const auto& v : newton_q_rates(r.trace)) q.push_back(v ? nlohmann::json(*v) : nlohmann::json());
    nlohmann::json rj{{"name", r.name}, {"ok", r.ok()}, {"rows", r.trace.rows.size()}, {"q_rates", q}};
    if (!r.ok()) {
      rj["error"] = r.error;
      rj["error_kind"] = r.error_kind;
    }
    j["runs"].push_back(rj);
  }
  j["summary"] = nlohmann::json::array();
  for (const auto& s : summary) {
    nlohmann::json sj{{"solver", s.solver}, {"target_eps", s.target_eps}, {"iters", s.iters},
                      {"cpu_seconds", s.cpu_seconds}};
    sj["final_dist_to_reference"] =
        s.final_dist_to_reference ? nlohmann::json(*s.final_dist_to_reference) : nlohmann::json();
    j["summary"].push_back(sj);
  }
  return j;
}

namespace {

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const Stagnation*>(&e)) return "Stagnation";
  if (dynamic_cast<const SingularSystem*>(&e)) return "SingularSystem";
  if (dynamic_cast<const NonFiniteIterate*>(&e)) return "NonFiniteIterate";
  if (dynamic_cast<const InjectivityError*>(&e)) return "InjectivityError";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "InvalidArgument";
  return "Error";
}

// Runs `body`, turning library errors into a failed record so that sibling
// runs still execute.
template <class F>
RunRecord guarded(const std::string& name, F body) {
  RunRecord rec;
  rec.name = name;
  try {
    rec.trace = body();
  } catch (const SolverFailure& e) {
    rec.trace = e.trace();
    rec.error = e.what();
    rec.error_kind = error_kind(e);
  } catch (const Error& e) {
    rec.error = e.what();
    rec.error_kind = error_kind(e);
  }
  return rec;
}

std::string sanitize(std::string s) {
  for (auto& ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

template <class M>
TvParams<M> make_params(const ExperimentConfig& cfg) {
  TvParams<M> p;
  p.alpha = cfg.alpha;
  p.beta = cfg.beta;
  p.sigma = cfg.sigma;
  p.tau = cfg.tau;
  p.q = cfg.q;
  p.base_point = base_point<M>(cfg);
  p.validate();
  return p;
}

std::vector<double> targets_or(const ExperimentConfig& cfg, double fallback) {
  return cfg.targets.empty() ? std::vector<double>{fallback} : cfg.targets;
}

template <class M>
Image<M> denoise_data(const ExperimentConfig& cfg, int n) {
  return add_noise(gen_image_2d<M>(n), cfg.dataset.noise_stddev, cfg.dataset.seed);
}

template <class M>
void run_known_minimizer(const ExperimentConfig& cfg, RunReport& rep) {
  const auto params = make_params<M>(cfg);
  const auto [p1, p2] = endpoints<M>(cfg);
  const auto h = gen_piecewise_signal<M>(p1, p2, cfg.dataset.ell);
  const auto ref = exact_rof_minimizer<M>(p1, p2, cfg.dataset.ell, cfg.alpha);
  auto starts = cfg.warm_starts;
  if (starts.empty()) starts.push_back(cfg.solver.warm_start);
  for (auto ws : starts) {
    SolverConfig sc = cfg.solver;
    sc.warm_start = ws;
    auto rec = guarded("pd_rssn_" + std::string(to_string(ws)), [&] {
      return run_pd_rssn(h, h, params, sc, cfg.schedules.front(), &ref).trace;
    });
    for (auto& s : summarize(rec, Stage::Newton, targets_or(cfg, sc.eps_rel_stop))) {
      if (!rec.trace.empty()) s.final_dist_to_reference = rec.trace.back().dist_ref;
      rep.summary.push_back(s);
    }
    rep.runs.push_back(std::move(rec));
  }
}

template <class M>
void run_denoise(const ExperimentConfig& cfg, RunReport& rep) {
  const auto params = make_params<M>(cfg);
  const auto h = denoise_data<M>(cfg, cfg.dataset.n);
  const auto targets = targets_or(cfg, cfg.solver.eps_rel_stop);
  const double smallest = *std::min_element(targets.begin(), targets.end());

  SolverConfig sc = cfg.solver;
  sc.warm_start = WarmStart::Presteps;
  sc.eps_rel_stop = std::min(sc.eps_rel_stop, smallest);
  auto newton = guarded("pd_rssn", [&] {
    return run_pd_rssn(h, h, params, sc, cfg.schedules.front()).trace;
  });
  SummaryRow pre;
  pre.solver = "presteps";
  pre.target_eps = sc.presteps_eps;
  pre.iters = newton.trace.stage_iters_to(sc.presteps_eps, Stage::Prestep);
  const auto pre_rows = newton.trace.only(Stage::Prestep);
  if (!pre_rows.empty()) pre.cpu_seconds = pre_rows.back().cpu_seconds;
  rep.summary.push_back(pre);
  for (auto& s : summarize(newton, Stage::Newton, targets)) rep.summary.push_back(s);
  rep.runs.push_back(std::move(newton));

  SolverConfig lc = cfg.solver;
  lc.eps_rel_stop = smallest;
  lc.max_iters = cfg.lrcpa_max_iters;
  auto first = guarded("lrcpa", [&] {
    return lrcpa(h, DualField<M>::zeros(h.rows, h.cols, params.base_point), h, params, lc).trace;
  });
  for (auto& s : summarize(first, Stage::Lrcpa, targets)) rep.summary.push_back(s);
  rep.runs.push_back(std::move(first));
}

template <class M>
void run_scaling(const ExperimentConfig& cfg, RunReport& rep) {
  const auto params = make_params<M>(cfg);
  SolverConfig sc = cfg.solver;
  sc.warm_start = WarmStart::Presteps;
  for (int n : cfg.dataset.sizes) {
    const auto h = denoise_data<M>(cfg, n);
    auto rec = guarded("pd_rssn_N" + std::to_string(n), [&] {
      return run_pd_rssn(h, h, params, sc, cfg.schedules.front()).trace;
    });
    for (auto& s : summarize(rec, Stage::Newton, targets_or(cfg, sc.eps_rel_stop))) rep.summary.push_back(s);
    rep.runs.push_back(std::move(rec));
  }
}

void run_inexact(const ExperimentConfig& cfg, RunReport& rep) {
  const auto params = make_params<Sphere2>(cfg);
  const auto h = add_noise(gen_lemniscate(cfg.dataset.n_points), cfg.dataset.noise_stddev, cfg.dataset.seed);
  SolverConfig sc = cfg.solver;
  sc.warm_start = WarmStart::Presteps;
  for (std::size_t i = 0; i < cfg.schedules.size(); ++i) {
    const auto& sched = cfg.schedules[i];
    auto rec = guarded("irssn_" + std::to_string(i) + "_" + sanitize(sched.name()), [&] {
      return run_pd_rssn(h, h, params, sc, sched).trace;
    });
    for (auto& s : summarize(rec, Stage::Newton, targets_or(cfg, sc.eps_rel_stop))) rep.summary.push_back(s);
    rep.runs.push_back(std::move(rec));
  }
}

template <class M>
void dispatch(const ExperimentConfig& cfg, RunReport& rep) {
  switch (cfg.experiment) {
    case ExperimentKind::KnownMinimizer1D:
      run_known_minimizer<M>(cfg, rep);
      break;
    case ExperimentKind::Denoise2D:
      run_denoise<M>(cfg, rep);
      break;
    case ExperimentKind::Scaling:
      run_scaling<M>(cfg, rep);
      break;
    case ExperimentKind::InexactRates:
      if constexpr (std::is_same_v<M, Sphere2>) {
        run_inexact(cfg, rep);
      } else {
        throw ConfigError("inexact_rates uses the S2 lemniscate");
      }
      break;
  }
}

template <class M>
nlohmann::json dataset_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  switch (cfg.experiment) {
    case ExperimentKind::KnownMinimizer1D: {
      const auto [p1, p2] = endpoints<M>(cfg);
      j["data"] = image_to_json(gen_piecewise_signal<M>(p1, p2, cfg.dataset.ell));
      j["reference"] = image_to_json(exact_rof_minimizer<M>(p1, p2, cfg.dataset.ell, cfg.alpha));
      break;
    }
    case ExperimentKind::Denoise2D:
      j["data"] = image_to_json(denoise_data<M>(cfg, cfg.dataset.n));
      break;
    case ExperimentKind::Scaling:
      j["sizes"] = cfg.dataset.sizes;
      j["images"] = nlohmann::json::array();
      for (int n : cfg.dataset.sizes) j["images"].push_back(image_to_json(denoise_data<M>(cfg, n)));
      break;
    case ExperimentKind::InexactRates:
      if constexpr (std::is_same_v<M, Sphere2>) {
        j["clean"] = image_to_json(gen_lemniscate(cfg.dataset.n_points));
        j["data"] = image_to_json(
            add_noise(gen_lemniscate(cfg.dataset.n_points), cfg.dataset.noise_stddev, cfg.dataset.seed));
      }
      break;
  }
  return j;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  RunReport rep;
  rep.experiment = cfg.experiment;
  rep.manifold = cfg.manifold;
  if (cfg.manifold == ManifoldKind::Sphere2) {
    dispatch<Sphere2>(cfg, rep);
  } else {
    dispatch<Spd3>(cfg, rep);
  }
  return rep;
}

nlohmann::json generate_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  return cfg.manifold == ManifoldKind::Sphere2 ? dataset_json<Sphere2>(cfg) : dataset_json<Spd3>(cfg);
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "traces");
  for (const auto& r : report.runs) {
    std::ofstream out(dir / "traces" / (r.name + ".csv"));
    if (!out) throw InvalidArgument("cannot write trace for run " + r.name);
    r.trace.write_csv(out);
  }
  std::ofstream out(dir / "summary.json");
  if (!out) throw InvalidArgument("cannot write summary.json in " + dir.string());
  out << std::setw(2) << report.summary_json() << '\n';
}

nlohmann::json read_summary(const std::filesystem::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw InvalidArgument("no summary.json in " + dir.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("summary.json: ") + e.what());
  }
  return j;
}

std::string format_summary(const nlohmann::json& summary) {
  std::ostringstream os;
  os << "experiment " << summary.value("experiment", "?") << " on " << summary.value("manifold", "?") << "\n";
  os << std::left << std::setw(28) << "solver" << std::right << std::setw(12) << "target" << std::setw(8)
     << "iters" << std::setw(12) << "cpu [s]" << std::setw(14) << "dist_ref" << "\n";
  for (const auto& s : summary.at("summary")) {
    os << std::left << std::setw(28) << s.at("solver").get<std::string>() << std::right << std::setw(12)
       << std::setprecision(3) << s.at("target_eps").get<double>() << std::setw(8);
    const int it = s.at("iters").get<int>();
    if (it >= 0) {
      os << it;
    } else {
      os << "-";
    }
    os << std::setw(12) << std::fixed << std::setprecision(3) << s.at("cpu_seconds").get<double>()
       << std::defaultfloat << std::setw(14);
    const auto& d = s.at("final_dist_to_reference");
    if (d.is_null()) {
      os << "-";
    } else {
      os << std::setprecision(4) << d.get<double>();
    }
    os << "\n";
  }
  for (const auto& r : summary.at("runs")) {
    if (!r.value("ok", true)) {
      os << "run " << r.at("name").get<std::string>() << " failed (" << r.value("error_kind", "Error")
         << "): " << r.value("error", "") << "\n";
    }
  }
  return os.str();
}

template Image<Sphere2> gen_piecewise_signal<Sphere2>(const Sphere2::Point&, const Sphere2::Point&, int);
template Image<Spd3> gen_piecewise_signal<Spd3>(const Spd3::Point&, const Spd3::Point&, int);
template Image<Sphere2> exact_rof_minimizer<Sphere2>(const Sphere2::Point&, const Sphere2::Point&, int, double);
template Image<Spd3> exact_rof_minimizer<Spd3>(const Spd3::Point&, const Spd3::Point&, int, double);
template Image<Sphere2> add_noise<Sphere2>(const Image<Sphere2>&, double, std::uint64_t);
template Image<Spd3> add_noise<Spd3>(const Image<Spd3>&, double, std::uint64_t);

}  // namespace pdrssn
