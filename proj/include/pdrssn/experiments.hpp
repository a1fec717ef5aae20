#pragma once

// Synthetic data, the exact 1D minimizer, and the experiment runner behind
// the command line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pdrssn/solvers.hpp"

namespace pdrssn {

// ---------------------------------------------------------------------------
// Generators

/// 2ℓ samples: p1 for the first ℓ, p2 for the rest.
template <class M>
Image<M> gen_piecewise_signal(const typename M::Point& p1, const typename M::Point& p2, int ell);

/// Shrinkage parameter of the exact minimizer; alpha = 0 gives 0.
double exact_rof_delta(double dist, int ell, double alpha);

template <class M>
Image<M> exact_rof_minimizer(const typename M::Point& p1, const typename M::Point& p2, int ell,
                             double alpha);

/// Crossing point of the lemniscate.
Sphere2::Point lemniscate_center();
/// Figure-8 around lemniscate_center(), sampled at t_i = 2 pi i / n; the
/// samples with t = pi/2 and 3 pi/2 sit on the crossing.
Image<Sphere2> gen_lemniscate(int n_points);

/// S²: half rotations about two axes across the image. Needs N >= 3 so that
/// neighbors are never antipodal.
Image<Sphere2> gen_rotations_image(int n);
/// SPD3: piecewise smooth field between three fixed tensors.
Image<Spd3> gen_spd_image(int n);

template <class M>
Image<M> gen_image_2d(int n);

template <class M>
Image<M> add_noise(const Image<M>& img, double stddev, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Configuration

enum class ExperimentKind { KnownMinimizer1D, Denoise2D, Scaling, InexactRates };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string_view name);

struct DatasetConfig {
  int ell = 10;                  ///< KnownMinimizer1D
  nlohmann::json p1, p2;         ///< KnownMinimizer1D endpoints, as points
  int n = 12;                    ///< Denoise2D image size
  std::vector<int> sizes;        ///< Scaling image sizes
  int n_points = 128;            ///< InexactRates samples
  double noise_stddev = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::KnownMinimizer1D;
  ManifoldKind manifold = ManifoldKind::Sphere2;
  DatasetConfig dataset;
  // Model parameters; base_point is kept as JSON until the manifold is known.
  double alpha = 1.0, beta = 0.0, sigma = 0.5, tau = 0.5;
  TvNorm q = TvNorm::Isotropic;
  nlohmann::json base_point;
  SolverConfig solver;
  int lrcpa_max_iters = 20000;  ///< Denoise2D baseline budget
  std::vector<ResidualSchedule> schedules{ResidualSchedule::exact()};
  std::vector<WarmStart> warm_starts;  ///< KnownMinimizer1D; default {solver.warm_start}
  std::vector<double> targets;         ///< eps_rel levels tabulated in the summary
  std::string output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws ConfigError.
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Reports

struct SummaryRow {
  std::string solver;
  double target_eps = 0.0;
  int iters = -1;  ///< -1: target not reached
  double cpu_seconds = 0.0;
  std::optional<double> final_dist_to_reference;
};

struct RunRecord {
  std::string name;
  SolverTrace trace;
  std::string error;       ///< empty on success
  std::string error_kind;  ///< e.g. "Stagnation"
  bool ok() const { return error.empty(); }
};

struct RunReport {
  ExperimentKind experiment = ExperimentKind::KnownMinimizer1D;
  ManifoldKind manifold = ManifoldKind::Sphere2;
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;

  bool all_ok() const;
  const RunRecord* find(const std::string& name) const;
  nlohmann::json summary_json() const;
};

/// Summary rows of one run, one per target: iterations of `stage` until the
/// target is first reached, and the cpu time at that row.
std::vector<SummaryRow> summarize(const RunRecord& run, Stage stage, const std::vector<double>& targets);

/// Newton-stage q-rates of a run, absent entries as nullopt.
std::vector<std::optional<double>> newton_q_rates(const SolverTrace& trace);

RunReport run_experiment(const ExperimentConfig& cfg);

/// Writes <dir>/traces/<run>.csv and <dir>/summary.json.
void write_report(const RunReport& report, const std::filesystem::path& dir);
/// Reads summary.json back (traces are not needed for the tables).
nlohmann::json read_summary(const std::filesystem::path& dir);
/// Plain-text table of a summary.json.
std::string format_summary(const nlohmann::json& summary);

/// Dataset(s) of an experiment as JSON: {"data": image, "reference": image?}
/// or, for Scaling, {"sizes": [...], "images": [...]}.
nlohmann::json generate_dataset(const ExperimentConfig& cfg);

}  // namespace pdrssn
