#include "pdrssn/solvers.hpp"

#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <ctime>
#include <iomanip>
#include <istream>
#include <sstream>

namespace pdrssn {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Prestep:
      return "prestep";
    case Stage::Newton:
      return "newton";
    case Stage::Lrcpa:
      return "lrcpa";
  }
  return "?";
}

namespace {

Stage stage_from_string(const std::string& s) {
  if (s == "prestep") return Stage::Prestep;
  if (s == "newton") return Stage::Newton;
  if (s == "lrcpa") return Stage::Lrcpa;
  throw InvalidArgument("unknown trace stage '" + s + "'");
}

double cpu_now() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

}  // namespace

// ---------------------------------------------------------------------------
// SolverTrace

void SolverTrace::append(const SolverTrace& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

SolverTrace SolverTrace::only(Stage stage) const {
  SolverTrace t;
  for (const auto& r : rows)
    if (r.stage == stage) t.rows.push_back(r);
  return t;
}

int SolverTrace::first_reaching(double target) const {
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].eps_rel <= target) return static_cast<int>(i);
  return -1;
}

int SolverTrace::stage_iters_to(double target, Stage stage) const {
  int first = -1;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].stage != stage) continue;
    if (first < 0) first = static_cast<int>(i);
    if (rows[i].eps_rel <= target) return static_cast<int>(i) - first;
  }
  return -1;
}

void SolverTrace::write_csv(std::ostream& os) const {
  os << "iter,stage,x_norm,eps_rel,cost,resid_norm,dist_ref,cpu_seconds\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const auto& r : rows) {
    line.str("");
    line << r.iter << ',' << to_string(r.stage) << ',' << r.x_norm << ',' << r.eps_rel << ','
         << r.cost << ',' << r.resid_norm << ',';
    if (r.dist_ref) line << *r.dist_ref;
    line << ',' << r.cpu_seconds << '\n';
    os << line.str();
  }
}

SolverTrace SolverTrace::read_csv(std::istream& is) {
  SolverTrace t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("iter,stage", 0) != 0) {
    throw InvalidArgument("trace CSV: missing header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() == 7) f.emplace_back();
    if (f.size() != 8) throw InvalidArgument("trace CSV: expected 8 fields");
    TraceRow r;
    r.iter = std::stoi(f[0]);
    r.stage = stage_from_string(f[1]);
    r.x_norm = std::stod(f[2]);
    r.eps_rel = std::stod(f[3]);
    r.cost = std::stod(f[4]);
    r.resid_norm = std::stod(f[5]);
    if (!f[6].empty()) r.dist_ref = std::stod(f[6]);
    r.cpu_seconds = std::stod(f[7]);
    t.rows.push_back(r);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Schedules and config

double ResidualSchedule::step(int k) const {
  switch (kind) {
    case ResidualKind::Exact:
      return 0.0;
    case ResidualKind::ConstantRel:
      return a;
    case ResidualKind::DecayingRel:
      return a / std::max(1, k);
    case ResidualKind::InjectedRandom:
      return decaying ? a / std::max(1, k) : a;
  }
  return 0.0;
}

std::string ResidualSchedule::name() const {
  std::ostringstream os;
  switch (kind) {
    case ResidualKind::Exact:
      return "exact";
    case ResidualKind::ConstantRel:
      os << "constant_rel(" << a << ")";
      break;
    case ResidualKind::DecayingRel:
      os << "decaying_rel(" << a << ")";
      break;
    case ResidualKind::InjectedRandom:
      os << "injected(" << a << (decaying ? "/k" : "") << ")";
      break;
  }
  return os.str();
}

void ResidualSchedule::validate() const {
  if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidArgument("residual schedule: a must be >= 0");
  if (a >= 1.0 && kind != ResidualKind::Exact) {
    throw InvalidArgument("residual schedule: a must be < 1");
  }
}

std::string_view to_string(WarmStart w) {
  switch (w) {
    case WarmStart::Cold:
      return "cold";
    case WarmStart::DualWarm:
      return "dual_warm";
    case WarmStart::Presteps:
      return "presteps";
  }
  return "?";
}

WarmStart warm_start_from_string(std::string_view name) {
  if (name == "cold") return WarmStart::Cold;
  if (name == "dual_warm" || name == "warm") return WarmStart::DualWarm;
  if (name == "presteps") return WarmStart::Presteps;
  throw InvalidArgument("unknown warm start '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw InvalidArgument("max_iters must be >= 1");
  if (!(eps_rel_stop > 0.0)) throw InvalidArgument("eps_rel_stop must be positive");
  if (!(sigma > 0.0) || !(tau > 0.0)) throw InvalidArgument("lRCPA steps must be positive");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be non-negative");
  if (!(presteps_eps > 0.0)) throw InvalidArgument("presteps_eps must be positive");
  if (max_presteps < 0) throw InvalidArgument("max_presteps must be non-negative");
}

// ---------------------------------------------------------------------------
// Linear solves

namespace {

Eigen::VectorXd lu_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot >= 1e-14 * scale)) {
    std::ostringstream os;
    os << "Newton matrix is singular (smallest pivot " << pivot << ", scale " << scale << ")";
    throw SingularSystem(os.str(), {});
  }
  Eigen::VectorXd x = lu.solve(b);
  // Iterative refinement for the 1e-12 relative residual target.
  const double bn = b.norm();
  for (int it = 0; it < 2; ++it) {
    const Eigen::VectorXd r = b - a * x;
    if (r.norm() <= 1e-12 * bn) break;
    x += lu.solve(r);
  }
  return x;
}

}  // namespace

NewtonDirection solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, ResidualKind kind,
                             double rel, std::mt19937_64& rng) {
  if (a.rows() != a.cols() || a.rows() != rhs.size()) throw InvalidArgument("solve: shape mismatch");
  if (!rhs.allFinite() || !a.allFinite()) throw NonFiniteIterate("Newton system is not finite", {});
  NewtonDirection out;
  const double bn = rhs.norm();
  if (bn == 0.0) {
    out.coords = Eigen::VectorXd::Zero(rhs.size());
    return out;
  }
  switch (kind) {
    case ResidualKind::Exact:
      out.coords = lu_solve(a, rhs);
      break;
    case ResidualKind::ConstantRel:
    case ResidualKind::DecayingRel: {
      if (rel <= 0.0) {
        out.coords = lu_solve(a, rhs);
        break;
      }
      Eigen::GMRES<Eigen::MatrixXd, Eigen::IdentityPreconditioner> gmres;
      gmres.set_restart(static_cast<int>(a.rows()));
      gmres.setMaxIterations(4 * static_cast<int>(a.rows()));
      gmres.compute(a);
      // The internal residual estimate is not exact; aim a little lower and
      // verify explicitly.
      gmres.setTolerance(0.5 * rel);
      out.coords = gmres.solve(rhs);
      if (!((a * out.coords - rhs).norm() <= rel * bn)) {
        gmres.setTolerance(0.05 * rel);
        out.coords = gmres.solveWithGuess(rhs, out.coords);
      }
      if (!((a * out.coords - rhs).norm() <= rel * bn)) {
        throw SingularSystem("Krylov solve stagnated above the requested relative residual", {});
      }
      break;
    }
    case ResidualKind::InjectedRandom: {
      Eigen::VectorXd u(rhs.size());
      std::normal_distribution<double> normal(0.0, 1.0);
      do {
        for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(rng);
      } while (u.norm() == 0.0);
      // Slightly inside the bound so that rounding cannot push it over.
      const Eigen::VectorXd r = (rel * bn * (1.0 - 1e-8) / u.norm()) * u;
      out.coords = lu_solve(a, rhs + r);
      break;
    }
  }
  out.achieved_resid = (a * out.coords - rhs).norm();
  if (!out.coords.allFinite()) throw NonFiniteIterate("Newton direction is not finite", {});
  return out;
}

template <class M>
NewtonDirection solve_newton(const NewtonSystem<M>& system, ResidualKind kind, double a,
                             std::mt19937_64& rng) {
  return solve_linear(system.matrix, system.rhs, kind, a, rng);
}

// ---------------------------------------------------------------------------

template <class M>
double image_dist(const Image<M>& a, const Image<M>& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw InvalidArgument("image_dist: shapes differ");
  double s = 0.0;
  for (int px = 0; px < a.pixels(); ++px) {
    const double d = M::dist(a.points[px], b.points[px]);
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

template <class M>
bool image_finite(const Image<M>& p) {
  for (const auto& x : p.points)
    if (!x.allFinite()) return false;
  return true;
}

template <class M>
bool dual_finite(const DualField<M>& f) {
  for (const auto& x : f.values)
    if (!x.allFinite()) return false;
  return true;
}

template <class M>
TraceRow make_row(int iter, Stage stage, double xn, double x0, const Image<M>& p, const Image<M>& h,
                  const TvParams<M>& params, const TraceContext<M>& ctx, double cpu_start) {
  TraceRow r;
  r.iter = iter;
  r.stage = stage;
  r.x_norm = xn;
  r.eps_rel = x0 > 0.0 ? xn / x0 : 0.0;
  r.cost = cost(p, h, params);
  if (ctx.reference) r.dist_ref = image_dist(p, *ctx.reference);
  r.cpu_seconds = ctx.cpu_offset + (cpu_now() - cpu_start);
  return r;
}

}  // namespace

template <class M>
SolveResult<M> pd_rssn(const Image<M>& p0, const DualField<M>& xi0, const Image<M>& h,
                       const TvParams<M>& params, const SolverConfig& cfg,
                       const ResidualSchedule& schedule, const TraceContext<M>& ctx) {
  params.validate();
  cfg.validate();
  schedule.validate();
  const double cpu_start = cpu_now();
  std::mt19937_64 rng(schedule.seed);
  SolveResult<M> res{p0, xi0, {}};
  std::optional<double> x0 = ctx.x0_norm;
  StagnationMonitor stagnation;

  for (int k = 0;; ++k) {
    NewtonSystem<M> sys;
    try {
      sys = newton_system(res.p, res.xi, h, params);
    } catch (const InjectivityError& e) {
      throw NonFiniteIterate(std::string("Newton iterate left the domain of log: ") + e.what(), res.trace);
    }
    if (!std::isfinite(sys.x_norm) || !sys.matrix.allFinite()) {
      throw NonFiniteIterate("vector field is not finite at Newton iteration " + std::to_string(k),
                             res.trace);
    }
    if (!x0) x0 = sys.x_norm;
    TraceRow row = make_row(k, Stage::Newton, sys.x_norm, *x0, res.p, h, params, ctx, cpu_start);
    if (row.eps_rel <= cfg.eps_rel_stop || sys.x_norm == 0.0 || k >= cfg.max_iters) {
      res.trace.rows.push_back(row);
      break;
    }

    NewtonDirection dir;
    try {
      dir = solve_newton(sys, schedule.kind, schedule.step(k + 1), rng);
    } catch (SolverFailure& e) {
      res.trace.rows.push_back(row);
      e.set_trace(res.trace);
      throw;
    }
    row.resid_norm = dir.achieved_resid;
    row.cpu_seconds = ctx.cpu_offset + (cpu_now() - cpu_start);
    res.trace.rows.push_back(row);

    const auto step = from_coords(dir.coords, res.p, params.base_point, sys.index_map);
    Image<M> p_new = res.p;
    for (int px = 0; px < p_new.pixels(); ++px) {
      p_new.points[px] = M::exp(res.p.points[px], step.primal.at(px).value);
    }
    DualField<M> xi_new = res.xi;
    for (std::size_t n = 0; n < xi_new.values.size(); ++n) xi_new.values[n] += step.dual.values[n];
    if (!image_finite(p_new) || !dual_finite(xi_new)) {
      throw NonFiniteIterate("Newton iterate is not finite", res.trace);
    }

    DualField<M> dxi = xi_new;
    for (std::size_t n = 0; n < dxi.values.size(); ++n) dxi.values[n] -= res.xi.values[n];
    const double dp = image_dist(p_new, res.p);
    const double dd = field_norm(dxi);
    const double displacement = std::sqrt(dp * dp + dd * dd);
    const bool stalled = stagnation.update(displacement, dir.coords.norm());
    res.p = std::move(p_new);
    res.xi = std::move(xi_new);
    if (stalled) {
      std::ostringstream os;
      os << "Newton iteration stagnated at iteration " << k + 1 << ": step norm " << dir.coords.norm()
         << " but the iterate does not move (primal steps of length a multiple of 2*pi map back "
            "to the same point under exp)";
      throw Stagnation(os.str(), res.trace);
    }
  }
  return res;
}

template <class M>
DualField<M> warm_start_dual(const Image<M>& p0, const Image<M>& h, const TvParams<M>& params) {
  if (p0.rows != h.rows || p0.cols != h.cols) throw InvalidArgument("warm_start_dual: shapes differ");
  const auto& base = params.base_point;
  const Image<M> m_img(p0.rows, p0.cols, base);
  auto log_p = TangentGrid<M>::zeros(m_img, 1);
  for (int px = 0; px < p0.pixels(); ++px) log_p.at(px).value = M::log(base, p0.points[px]);
  auto arg = tv_diff(m_img, log_p, base);
  for (auto& v : arg.values) v *= params.tau;
  return prox_dual(arg, params.tau, params.beta, params.q);
}

template <class M>
SolveResult<M> lrcpa(const Image<M>& p0, const DualField<M>& xi0, const Image<M>& h,
                     const TvParams<M>& params, const SolverConfig& cfg, const TraceContext<M>& ctx,
                     Stage stage) {
  params.validate();
  cfg.validate();
  const double cpu_start = cpu_now();
  const auto& base = params.base_point;
  const Image<M> m_img(p0.rows, p0.cols, base);
  SolveResult<M> res{p0, xi0, {}};
  Image<M> p_bar = p0;
  double sigma = cfg.sigma;
  double tau = cfg.tau;

  double xn = field_norm(vector_field(res.p, res.xi, h, params));
  const double x0 = ctx.x0_norm.value_or(xn);
  for (int n = 0;; ++n) {
    if (!std::isfinite(xn)) throw NonFiniteIterate("lRCPA iterate is not finite", res.trace);
    const TraceRow row = make_row(n, stage, xn, x0, res.p, h, params, ctx, cpu_start);
    res.trace.rows.push_back(row);
    if (row.eps_rel <= cfg.eps_rel_stop || xn == 0.0 || n >= cfg.max_iters) break;

    // Dual step, linearized at the constant image m̃.
    auto log_bar = TangentGrid<M>::zeros(m_img, 1);
    for (int px = 0; px < p_bar.pixels(); ++px) log_bar.at(px).value = M::log(base, p_bar.points[px]);
    auto arg = tv_diff(m_img, log_bar, base);
    for (std::size_t i = 0; i < arg.values.size(); ++i) {
      arg.values[i] = res.xi.values[i] + tau * arg.values[i];
    }
    res.xi = prox_dual(arg, tau, params.beta, params.q);

    // Primal step.
    const auto w = tv_diff_adjoint(m_img, res.xi);
    Image<M> moved = res.p;
    for (int px = 0; px < moved.pixels(); ++px) {
      const auto& pp = res.p.points[px];
      moved.points[px] = M::exp(pp, M::transport(base, pp, -sigma * w.at(px).value));
    }
    const Image<M> p_new = prox_data(moved, h, params.alpha, sigma);

    double theta = 1.0;
    if (cfg.gamma > 0.0) {
      theta = 1.0 / std::sqrt(1.0 + 2.0 * cfg.gamma * sigma);
      sigma *= theta;
      tau /= theta;
    }
    for (int px = 0; px < p_bar.pixels(); ++px) {
      p_bar.points[px] = M::geodesic(res.p.points[px], p_new.points[px], 1.0 + theta);
    }
    res.p = p_new;
    xn = field_norm(vector_field(res.p, res.xi, h, params));
  }
  return res;
}

template <class M>
SolveResult<M> run_pd_rssn(const Image<M>& p0, const Image<M>& h, const TvParams<M>& params,
                           const SolverConfig& cfg, const ResidualSchedule& schedule,
                           const Image<M>* reference) {
  TraceContext<M> ctx;
  ctx.reference = reference;
  switch (cfg.warm_start) {
    case WarmStart::Cold:
      return pd_rssn(p0, DualField<M>::zeros(p0.rows, p0.cols, params.base_point), h, params, cfg,
                     schedule, ctx);
    case WarmStart::DualWarm:
      return pd_rssn(p0, warm_start_dual(p0, h, params), h, params, cfg, schedule, ctx);
    case WarmStart::Presteps:
      break;
  }
  SolverConfig pre_cfg = cfg;
  pre_cfg.eps_rel_stop = cfg.presteps_eps;
  pre_cfg.max_iters = std::max(1, cfg.max_presteps);
  auto pre = lrcpa(p0, DualField<M>::zeros(p0.rows, p0.cols, params.base_point), h, params, pre_cfg,
                   ctx, Stage::Prestep);
  TraceContext<M> newton_ctx = ctx;
  newton_ctx.x0_norm = pre.trace.rows.front().x_norm;
  newton_ctx.cpu_offset = pre.trace.back().cpu_seconds;
  try {
    auto res = pd_rssn(pre.p, pre.xi, h, params, cfg, schedule, newton_ctx);
    pre.trace.append(res.trace);
    res.trace = std::move(pre.trace);
    return res;
  } catch (SolverFailure& e) {
    pre.trace.append(e.trace());
    e.set_trace(pre.trace);
    throw;
  }
}

// ---------------------------------------------------------------------------

std::vector<double> eps_rel(const SolverTrace& trace) {
  if (trace.empty()) throw InvalidArgument("eps_rel: empty trace");
  std::vector<double> out;
  const double x0 = trace.rows.front().x_norm;
  for (const auto& r : trace.rows) out.push_back(x0 > 0.0 ? r.x_norm / x0 : 0.0);
  return out;
}

std::vector<std::optional<double>> q_rate(const std::vector<double>& x) {
  std::vector<std::optional<double>> q(x.size());
  for (std::size_t k = 2; k < x.size(); ++k) {
    if (!(x[k] > 0.0) || !(x[k - 1] > 0.0) || !(x[k - 2] > 0.0)) continue;
    const double num = std::log(x[k] / x[k - 1]);
    const double den = std::log(x[k - 1] / x[k - 2]);
    if (den == 0.0 || !std::isfinite(num) || !std::isfinite(den)) continue;
    q[k] = num / den;
  }
  return q;
}

std::vector<std::optional<double>> q_rate(const SolverTrace& trace) {
  std::vector<double> x;
  for (const auto& r : trace.rows) x.push_back(r.x_norm);
  return q_rate(x);
}

#define PDRSSN_INSTANTIATE_SOLVERS(M)                                                              \
  template NewtonDirection solve_newton<M>(const NewtonSystem<M>&, ResidualKind, double,          \
                                           std::mt19937_64&);                                      \
  template SolveResult<M> pd_rssn<M>(const Image<M>&, const DualField<M>&, const Image<M>&,        \
                                     const TvParams<M>&, const SolverConfig&,                      \
                                     const ResidualSchedule&, const TraceContext<M>&);             \
  template SolveResult<M> lrcpa<M>(const Image<M>&, const DualField<M>&, const Image<M>&,          \
                                   const TvParams<M>&, const SolverConfig&, const TraceContext<M>&, \
                                   Stage);                                                         \
  template DualField<M> warm_start_dual<M>(const Image<M>&, const Image<M>&, const TvParams<M>&);  \
  template SolveResult<M> run_pd_rssn<M>(const Image<M>&, const Image<M>&, const TvParams<M>&,     \
                                         const SolverConfig&, const ResidualSchedule&,             \
                                         const Image<M>*);                                         \
  template double image_dist<M>(const Image<M>&, const Image<M>&);

PDRSSN_INSTANTIATE_SOLVERS(Sphere2)
PDRSSN_INSTANTIATE_SOLVERS(Spd3)

#undef PDRSSN_INSTANTIATE_SOLVERS

}  // namespace pdrssn
