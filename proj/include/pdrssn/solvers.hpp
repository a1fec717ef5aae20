#pragma once

// PD-RSSN, its inexact variant with residual schedules, the lRCPA baseline
// and convergence metrics.

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "pdrssn/tvmodel.hpp"

namespace pdrssn {

enum class Stage { Prestep, Newton, Lrcpa };

std::string_view to_string(Stage s);

struct TraceRow {
  int iter = 0;
  Stage stage = Stage::Newton;
  double x_norm = 0.0;
  double eps_rel = 1.0;
  double cost = 0.0;
  double resid_norm = 0.0;
  std::optional<double> dist_ref;
  double cpu_seconds = 0.0;
};

struct SolverTrace {
  std::vector<TraceRow> rows;

  bool empty() const { return rows.empty(); }
  const TraceRow& back() const { return rows.back(); }
  /// Appends the rows of `other` unchanged; iteration numbers stay per stage.
  void append(const SolverTrace& other);
  /// Rows of one stage only.
  SolverTrace only(Stage stage) const;
  /// First row index at which eps_rel <= target, or -1.
  int first_reaching(double target) const;
  /// Number of rows of the given stage before eps_rel first drops to target;
  /// -1 if never reached.
  int stage_iters_to(double target, Stage stage) const;

  void write_csv(std::ostream& os) const;
  static SolverTrace read_csv(std::istream& is);
};

/// Solver errors carry the trace recorded up to the failure.
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, SolverTrace trace) : Error(what), trace_(std::move(trace)) {}
  const SolverTrace& trace() const { return trace_; }
  void set_trace(SolverTrace t) { trace_ = std::move(t); }

 private:
  SolverTrace trace_;
};

class SingularSystem : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

class NonFiniteIterate : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

/// The Newton step is non-negligible but the iterate does not move.
class Stagnation : public SolverFailure {
 public:
  using SolverFailure::SolverFailure;
};

enum class ResidualKind { Exact, ConstantRel, DecayingRel, InjectedRandom };

/// Relative residual allowed (or injected) at Newton iteration k >= 1.
struct ResidualSchedule {
  ResidualKind kind = ResidualKind::Exact;
  double a = 0.0;          ///< ConstantRel: a; DecayingRel: c in c / k
  bool decaying = false;   ///< InjectedRandom only: a / k instead of a
  std::uint64_t seed = 0;  ///< InjectedRandom only

  static ResidualSchedule exact() { return {}; }
  static ResidualSchedule constant_rel(double a) { return {ResidualKind::ConstantRel, a, false, 0}; }
  static ResidualSchedule decaying_rel(double c) { return {ResidualKind::DecayingRel, c, true, 0}; }
  static ResidualSchedule injected(double a, bool decaying, std::uint64_t seed) {
    return {ResidualKind::InjectedRandom, a, decaying, seed};
  }

  double step(int k) const;
  std::string name() const;
  void validate() const;
};

enum class WarmStart { Cold, DualWarm, Presteps };

std::string_view to_string(WarmStart w);
WarmStart warm_start_from_string(std::string_view name);

struct SolverConfig {
  int max_iters = 50;
  double eps_rel_stop = 1e-10;
  double sigma = 0.5;  ///< initial lRCPA primal step
  double tau = 0.5;    ///< initial lRCPA dual step
  double gamma = 0.0;  ///< lRCPA acceleration
  double presteps_eps = 0.5;
  int max_presteps = 100000;
  WarmStart warm_start = WarmStart::Cold;

  void validate() const;
};

struct NewtonDirection {
  Eigen::VectorXd coords;
  double achieved_resid = 0.0;  ///< ||V d + X|| in stacked coordinates
};

/// Solves V d = -X + r. `a` is the relative residual a_k for this step; the
/// random generator is only used by InjectedRandom.
template <class M>
NewtonDirection solve_newton(const NewtonSystem<M>& system, ResidualKind kind, double a,
                             std::mt19937_64& rng);

/// Solver core shared by all kinds, on a plain matrix and right-hand side.
NewtonDirection solve_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& rhs, ResidualKind kind,
                             double rel, std::mt19937_64& rng);

/// Extra bookkeeping for traces that continue an earlier run.
template <class M>
struct TraceContext {
  std::optional<double> x0_norm;      ///< eps_rel denominator; default: own first ||X||
  const Image<M>* reference = nullptr;  ///< fills dist_ref when set
  double cpu_offset = 0.0;
};

template <class M>
struct SolveResult {
  Image<M> p;
  DualField<M> xi;
  SolverTrace trace;
};

template <class M>
SolveResult<M> pd_rssn(const Image<M>& p0, const DualField<M>& xi0, const Image<M>& h,
                       const TvParams<M>& params, const SolverConfig& cfg,
                       const ResidualSchedule& schedule, const TraceContext<M>& ctx = {});

/// Runs until eps_rel <= cfg.eps_rel_stop (measured with params' steps) or
/// cfg.max_iters; rows are tagged with `stage`.
template <class M>
SolveResult<M> lrcpa(const Image<M>& p0, const DualField<M>& xi0, const Image<M>& h,
                     const TvParams<M>& params, const SolverConfig& cfg, const TraceContext<M>& ctx = {},
                     Stage stage = Stage::Lrcpa);

template <class M>
DualField<M> warm_start_dual(const Image<M>& p0, const Image<M>& h, const TvParams<M>& params);

/// Flags a Newton iteration whose iterate stops moving while the step does
/// not vanish: three consecutive steps with displacement < 1e-12 and step
/// norm >= 1e-8.
class StagnationMonitor {
 public:
  /// Returns true once the iteration counts as stagnated.
  bool update(double displacement, double step_norm) {
    stalled_ = (displacement < 1e-12 && step_norm >= 1e-8) ? stalled_ + 1 : 0;
    return stalled_ >= 3;
  }

 private:
  int stalled_ = 0;
};

/// Full PD-RSSN run from data: initialization per cfg.warm_start (lRCPA
/// pre-steps to cfg.presteps_eps for Presteps), then Newton. The eps_rel
/// denominator is ||X|| at the very first point.
template <class M>
SolveResult<M> run_pd_rssn(const Image<M>& p0, const Image<M>& h, const TvParams<M>& params,
                           const SolverConfig& cfg, const ResidualSchedule& schedule,
                           const Image<M>* reference = nullptr);

std::vector<double> eps_rel(const SolverTrace& trace);
/// q^k = log(x_k / x_{k-1}) / log(x_{k-1} / x_{k-2}); absent where undefined.
std::vector<std::optional<double>> q_rate(const SolverTrace& trace);
std::vector<std::optional<double>> q_rate(const std::vector<double>& x_norms);

/// sqrt of the sum of squared pixel distances.
template <class M>
double image_dist(const Image<M>& a, const Image<M>& b);

}  // namespace pdrssn
