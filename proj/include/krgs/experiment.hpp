#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "krgs/data.hpp"
#include "krgs/graph.hpp"
#include "krgs/linalg.hpp"
#include "krgs/noise.hpp"

namespace krgs {

struct SynthSpec {
  Index nodes = 45;
  Index days = 92;
  Index bandwidth = 8;       // Laplacian eigenvectors kept by the generator
  double rho = 0.7;          // day-to-day correlation
  double noise_floor = 0.05;
  double mean = 0.0;         // constant offset added to every value
};

enum class DatasetSource { kSynthetic, kFiles };

struct ExperimentConfig {
  DatasetSource source = DatasetSource::kSynthetic;
  std::string nodes_csv;
  std::string signals_csv;
  SynthSpec synth;

  Index n_train = 46;
  std::vector<Index> train_sizes;  // empty means {n_train}

  // Kernel width grid: absolute values win if non-empty, otherwise the scale
  // grid is multiplied by the median pairwise training-input distance.
  std::vector<double> sigma_grid;
  std::vector<double> sigma_scale_grid = {0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> alpha_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> beta_grid = {0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0};

  double delta = 0.1;
  int max_iterations = 10;
  double tol = 1e-8;
  bool literal_delta_weights = false;

  NoiseKind noise_kind = NoiseKind::kMissing;
  double noise_fraction = 0.25;
  double noise_factor = 4.0;

  int trials = 100;
  int folds = 4;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool plot = false;

  void validate() const;
};

/// Flat key = value file; '#' starts a comment, blank lines ignored, unknown
/// or repeated keys are errors. Keys are documented in the README.
ExperimentConfig load_experiment_config(const std::string& path);

/// Sets one config field from its config-file key; used both by the file
/// loader and by CLI overrides. Throws ConfigError on unknown key/bad value.
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

/// Canonical (key, value) echo of everything that identifies the experiment.
/// Deliberately excludes out_dir and plot, which affect where results go but
/// not what they are.
std::vector<std::pair<std::string, std::string>> config_echo(
    const ExperimentConfig& config);

// ---- NMSE -----------------------------------------------------------------

/// Squared-error energy split into the two halves of the NMSE ratio, so that
/// Monte Carlo aggregation can average numerators and denominators
/// separately before taking the log.
struct ErrorEnergy {
  double num = 0.0;  // ||predictions - truths||_F^2
  double den = 0.0;  // ||truths||_F^2
};

ErrorEnergy error_energy(const Matrix& predictions, const Matrix& truths);

/// 10 log10(num / den); -infinity when num == 0, error when den == 0.
double nmse_db_from_energy(double num, double den);

/// Single-run NMSE in dB over a set of test points (rows).
double nmse_db(const Matrix& predictions, const Matrix& truths);

// ---- Dataset assembly -------------------------------------------------------

struct Dataset {
  NodeTable nodes;
  SignalSeries signals;
  Graph graph;
};

/// Loads or synthesizes the dataset named by the config, along with the
/// geodesic graph over its nodes. Pure function of the config (incl. seed).
Dataset build_dataset(const ExperimentConfig& config);

/// Median over all unordered pairs of training inputs of their Euclidean
/// distance (lower median); 1.0 if every distance is zero.
double median_pairwise_distance(const Matrix& X);

// ---- Seed derivation ---------------------------------------------------------

/// Stream seeds are derived from the master seed by tagged chaining so that
/// coordinates, signals, the cross-validation corruption, and every Monte
/// Carlo trial draw from independent streams.
std::uint64_t coords_seed(std::uint64_t master);
std::uint64_t signals_seed(std::uint64_t master);
std::uint64_t cv_seed(std::uint64_t master);
std::uint64_t trial_seed(std::uint64_t master, Index train_size, int trial);

// ---- Cross-validation --------------------------------------------------------

struct CvChoice {
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
};

struct CvEntry {
  double sigma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double nmse_db = 0.0;
  int folds_failed = 0;
};

struct CvResult {
  CvChoice best;
  std::vector<CvEntry> table;  // one entry per grid point
};

/// Contiguous chronological index ranges [begin, end) partitioning `size`
/// rows into `folds` blocks whose sizes differ by at most one.
std::vector<std::pair<Index, Index>> fold_bounds(Index size, int folds);

/// Grid search by k-fold forward-chained-free CV: each grid point is fit on
/// folds-minus-one and scored on the held-out fold against the given (noisy)
/// targets; fold energies are pooled before the dB conversion. Ties on the
/// score break toward the smallest (alpha, beta, sigma).
CvResult cross_validate(const PairSet& train, const Graph& graph,
                        const ExperimentConfig& config);

// ---- Monte Carlo -------------------------------------------------------------

struct McRow {
  int iteration = 0;
  Index train_size = 0;
  double nmse_db = 0.0;
  int trials_ok = 0;
  int trials_failed = 0;
};

struct McResult {
  std::vector<McRow> rows;  // grouped by train size, iteration ascending
  CvChoice chosen;
  bool cv_ran = false;
  std::vector<CvEntry> cv_table;
  long jitter_events = 0;
  int trials_failed_total = 0;
  std::vector<std::pair<std::string, std::string>> metadata;
};

/// The full protocol: build dataset, split, pick hyperparameters (CV when
/// the grid has more than one point), then per train size run `trials`
/// corruption draws, fit with per-iteration test scoring against clean
/// targets, and aggregate. Throws SolverThresholdError when more than 10% of
/// a size's trials fail.
McResult monte_carlo_experiment(const ExperimentConfig& config);

/// Writes nmse_by_iteration.csv and run_metadata.csv (plus cv_results.csv
/// when CV ran, and nmse_by_iteration.svg when config.plot) under
/// config.out_dir, creating the directory if needed.
void write_experiment_outputs(const McResult& result,
                              const ExperimentConfig& config);

}  // namespace krgs
