#include "krgs/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "krgs/csv.hpp"
#include "krgs/errors.hpp"
#include "krgs/kernels.hpp"
#include "krgs/regression.hpp"
#include "krgs/rng.hpp"

namespace krgs {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::uint64_t kCoordsTag = 1;
constexpr std::uint64_t kSignalsTag = 2;
constexpr std::uint64_t kCvTag = 3;
constexpr std::uint64_t kTrialTag = 4;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("config key '" + key + "': bad value '" + value + "'");
}

double parse_double_or_throw(const std::string& key, const std::string& value) {
  double v = 0.0;
  if (!csv::parse_field(value, v)) bad_value(key, value);
  return v;
}

long parse_long_or_throw(const std::string& key, const std::string& value) {
  long v = 0;
  if (!csv::parse_field(value, v)) bad_value(key, value);
  return v;
}

bool parse_bool_or_throw(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<double> parse_double_list(const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const std::string& part : split_list(value))
    out.push_back(parse_double_or_throw(key, part));
  return out;
}

std::vector<Index> parse_index_list(const std::string& key,
                                    const std::string& value) {
  std::vector<Index> out;
  for (const std::string& part : split_list(value))
    out.push_back(static_cast<Index>(parse_long_or_throw(key, part)));
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += csv::format_double(v[i]);
  }
  return out;
}

std::string join_indices(const std::vector<Index>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(v[i]);
  }
  return out;
}

void check(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::vector<Index> effective_sizes(const ExperimentConfig& config) {
  return config.train_sizes.empty() ? std::vector<Index>{config.n_train}
                                    : config.train_sizes;
}

// Absolute kernel widths for the grid; `median` is consulted only when the
// config asks for scaled widths.
std::vector<double> resolve_sigmas(const ExperimentConfig& config,
                                   std::optional<double> median) {
  if (!config.sigma_grid.empty()) return config.sigma_grid;
  std::vector<double> out;
  out.reserve(config.sigma_scale_grid.size());
  for (double s : config.sigma_scale_grid) out.push_back(s * median.value());
  return out;
}

Hyperparams hyper_from(const ExperimentConfig& config, double alpha,
                       double beta) {
  Hyperparams h;
  h.alpha = alpha;
  h.beta = beta;
  h.delta = config.delta;
  h.max_iterations = config.max_iterations;
  h.tol = config.tol;
  h.literal_delta_weights = config.literal_delta_weights;
  return h;
}

NoiseSpec noise_from(const ExperimentConfig& config, std::uint64_t seed) {
  NoiseSpec spec;
  spec.kind = config.noise_kind;
  spec.fraction = config.noise_fraction;
  spec.scale_factor = config.noise_factor;
  spec.seed = seed;
  return spec;
}

// Keep concurrent trials from exhausting memory: each in-flight fit holds a
// few MN x MN dense matrices.
[[maybe_unused]] int trial_thread_cap(Index mn) {
#ifdef _OPENMP
  const double bytes_per_trial = 3.0 * 8.0 * double(mn) * double(mn);
  const double budget = 3.5e9;
  const double cap = std::min(double(omp_get_max_threads()),
                              budget / std::max(bytes_per_trial, 1.0));
  return static_cast<int>(std::max(1.0, cap));
#else
  return 1;
#endif
}

struct SvgSeries {
  Index train_size;
  std::vector<std::pair<int, double>> points;  // (iteration, nmse_db)
};

void write_nmse_svg(const std::vector<McRow>& rows, const std::string& path) {
  std::vector<SvgSeries> series;
  int max_iter = 1;
  double ymin = kInf, ymax = -kInf;
  for (const McRow& r : rows) {
    auto it = std::find_if(series.begin(), series.end(), [&](const SvgSeries& s) {
      return s.train_size == r.train_size;
    });
    if (it == series.end()) {
      series.push_back({r.train_size, {}});
      it = series.end() - 1;
    }
    max_iter = std::max(max_iter, r.iteration);
    if (std::isfinite(r.nmse_db)) {
      it->points.emplace_back(r.iteration, r.nmse_db);
      ymin = std::min(ymin, r.nmse_db);
      ymax = std::max(ymax, r.nmse_db);
    }
  }

  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  const double w = 720, h = 480, left = 70, right = 150, top = 30, bottom = 50;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << w
      << " " << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  if (!std::isfinite(ymin)) {
    out << "<text x=\"40\" y=\"40\">no finite NMSE values to plot</text>\n"
        << "</svg>\n";
    return;
  }
  if (ymin == ymax) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double plot_w = w - left - right, plot_h = h - top - bottom;
  auto xs = [&](double iter) {
    return left + plot_w * (max_iter > 1 ? (iter - 1) / (max_iter - 1) : 0.5);
  };
  auto ys = [&](double v) { return top + plot_h * (ymax - v) / (ymax - ymin); };

  char buf[64];
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = ymin + (ymax - ymin) * t / 4.0;
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    out << "<line x1=\"" << left << "\" x2=\"" << left + plot_w << "\" y1=\""
        << ys(v) << "\" y2=\"" << ys(v)
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 8 << "\" y=\""
        << ys(v) + 4 << "\" text-anchor=\"end\">" << buf << "</text>\n";
  }
  const int stride = max_iter > 20 ? max_iter / 10 : 1;
  for (int i = 1; i <= max_iter; i += stride) {
    out << "<text x=\"" << xs(i) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\">" << i << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\">iteration</text>\n";
  out << "<text x=\"18\" y=\"" << top + plot_h / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + plot_h / 2 << ")\">NMSE (dB)</text>\n";

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [iter, v] : series[s].points) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", xs(iter), ys(v));
      out << buf;
    }
    out << "\"/>\n";
    const double ly = top + 16 + 18 * double(s);
    out << "<line x1=\"" << left + plot_w + 12 << "\" x2=\""
        << left + plot_w + 36 << "\" y1=\"" << ly << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << left + plot_w + 42 << "\" y=\"" << ly + 4
        << "\">N=" << series[s].train_size << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw ConfigError(path + ": write failed");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (source == DatasetSource::kFiles) {
    check(!nodes_csv.empty() && !signals_csv.empty(),
          "dataset = files requires nodes_csv and signals_csv");
  } else {
    check(synth.nodes >= 2, "synth_nodes must be >= 2");
    check(synth.days >= 2, "synth_days must be >= 2");
    check(synth.bandwidth >= 1 && synth.bandwidth <= synth.nodes,
          "synth_bandwidth must lie in [1, synth_nodes]");
    check(synth.rho >= 0.0 && synth.rho < 1.0, "synth_rho must be in [0, 1)");
    check(std::isfinite(synth.noise_floor) && synth.noise_floor >= 0.0,
          "synth_noise_floor must be >= 0");
    check(std::isfinite(synth.mean), "synth_mean must be finite");
  }
  check(n_train >= 1, "n_train must be >= 1");
  for (Index s : train_sizes) check(s >= 1, "train_sizes entries must be >= 1");
  if (!sigma_grid.empty()) {
    for (double s : sigma_grid)
      check(std::isfinite(s) && s > 0.0, "sigma_grid entries must be > 0");
  } else {
    check(!sigma_scale_grid.empty(),
          "one of sigma_grid / sigma_scale_grid must be non-empty");
    for (double s : sigma_scale_grid)
      check(std::isfinite(s) && s > 0.0,
            "sigma_scale_grid entries must be > 0");
  }
  check(!alpha_grid.empty(), "alpha_grid must be non-empty");
  for (double a : alpha_grid)
    check(std::isfinite(a) && a > 0.0, "alpha_grid entries must be > 0");
  check(!beta_grid.empty(), "beta_grid must be non-empty");
  for (double b : beta_grid)
    check(std::isfinite(b) && b >= 0.0, "beta_grid entries must be >= 0");
  check(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
  check(max_iterations >= 1, "i_max must be >= 1");
  check(std::isfinite(tol) && tol >= 0.0, "tol must be >= 0");
  check(noise_fraction >= 0.0 && noise_fraction <= 1.0,
        "noise_fraction must lie in [0, 1]");
  check(std::isfinite(noise_factor), "noise_factor must be finite");
  check(trials >= 1, "trials must be >= 1");
  check(folds >= 2, "folds must be >= 2");
}

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
  if (key == "dataset") {
    if (value == "synthetic")
      config.source = DatasetSource::kSynthetic;
    else if (value == "files")
      config.source = DatasetSource::kFiles;
    else
      bad_value(key, value);
  } else if (key == "nodes_csv") {
    config.nodes_csv = value;
  } else if (key == "signals_csv") {
    config.signals_csv = value;
  } else if (key == "synth_nodes") {
    config.synth.nodes = static_cast<Index>(parse_long_or_throw(key, value));
  } else if (key == "synth_days") {
    config.synth.days = static_cast<Index>(parse_long_or_throw(key, value));
  } else if (key == "synth_bandwidth") {
    config.synth.bandwidth =
        static_cast<Index>(parse_long_or_throw(key, value));
  } else if (key == "synth_rho") {
    config.synth.rho = parse_double_or_throw(key, value);
  } else if (key == "synth_noise_floor") {
    config.synth.noise_floor = parse_double_or_throw(key, value);
  } else if (key == "synth_mean") {
    config.synth.mean = parse_double_or_throw(key, value);
  } else if (key == "n_train") {
    config.n_train = static_cast<Index>(parse_long_or_throw(key, value));
  } else if (key == "train_sizes") {
    config.train_sizes = parse_index_list(key, value);
  } else if (key == "sigma_grid") {
    config.sigma_grid = parse_double_list(key, value);
  } else if (key == "sigma_scale_grid") {
    config.sigma_scale_grid = parse_double_list(key, value);
  } else if (key == "alpha_grid") {
    config.alpha_grid = parse_double_list(key, value);
  } else if (key == "beta_grid") {
    config.beta_grid = parse_double_list(key, value);
  } else if (key == "delta") {
    config.delta = parse_double_or_throw(key, value);
  } else if (key == "i_max") {
    config.max_iterations =
        static_cast<int>(parse_long_or_throw(key, value));
  } else if (key == "tol") {
    config.tol = parse_double_or_throw(key, value);
  } else if (key == "literal_delta_weights") {
    config.literal_delta_weights = parse_bool_or_throw(key, value);
  } else if (key == "noise_kind") {
    if (value == "missing")
      config.noise_kind = NoiseKind::kMissing;
    else if (value == "scaling")
      config.noise_kind = NoiseKind::kScaling;
    else
      bad_value(key, value);
  } else if (key == "noise_fraction") {
    config.noise_fraction = parse_double_or_throw(key, value);
  } else if (key == "noise_factor") {
    config.noise_factor = parse_double_or_throw(key, value);
  } else if (key == "trials") {
    config.trials = static_cast<int>(parse_long_or_throw(key, value));
  } else if (key == "folds") {
    config.folds = static_cast<int>(parse_long_or_throw(key, value));
  } else if (key == "seed") {
    std::uint64_t v = 0;
    if (!csv::parse_field(value, v)) bad_value(key, value);
    config.seed = v;
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "plot") {
    config.plot = parse_bool_or_throw(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  ExperimentConfig config;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
    try {
      apply_config_entry(config, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return config;
}

std::vector<std::pair<std::string, std::string>> config_echo(
    const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> echo;
  echo.emplace_back("dataset", config.source == DatasetSource::kFiles
                                   ? "files"
                                   : "synthetic");
  echo.emplace_back("nodes_csv", config.nodes_csv);
  echo.emplace_back("signals_csv", config.signals_csv);
  echo.emplace_back("synth_nodes", std::to_string(config.synth.nodes));
  echo.emplace_back("synth_days", std::to_string(config.synth.days));
  echo.emplace_back("synth_bandwidth", std::to_string(config.synth.bandwidth));
  echo.emplace_back("synth_rho", csv::format_double(config.synth.rho));
  echo.emplace_back("synth_noise_floor",
                    csv::format_double(config.synth.noise_floor));
  echo.emplace_back("synth_mean", csv::format_double(config.synth.mean));
  echo.emplace_back("n_train", std::to_string(config.n_train));
  echo.emplace_back("train_sizes", join_indices(effective_sizes(config)));
  echo.emplace_back("sigma_grid", config.sigma_grid.empty()
                                      ? "auto"
                                      : join_doubles(config.sigma_grid));
  echo.emplace_back("sigma_scale_grid", join_doubles(config.sigma_scale_grid));
  echo.emplace_back("alpha_grid", join_doubles(config.alpha_grid));
  echo.emplace_back("beta_grid", join_doubles(config.beta_grid));
  echo.emplace_back("delta", csv::format_double(config.delta));
  echo.emplace_back("i_max", std::to_string(config.max_iterations));
  echo.emplace_back("tol", csv::format_double(config.tol));
  echo.emplace_back("literal_delta_weights",
                    config.literal_delta_weights ? "true" : "false");
  echo.emplace_back("noise_kind", config.noise_kind == NoiseKind::kMissing
                                      ? "missing"
                                      : "scaling");
  echo.emplace_back("noise_fraction", csv::format_double(config.noise_fraction));
  echo.emplace_back("noise_factor", csv::format_double(config.noise_factor));
  echo.emplace_back("trials", std::to_string(config.trials));
  echo.emplace_back("folds", std::to_string(config.folds));
  echo.emplace_back("seed", std::to_string(config.seed));
  return echo;
}

ErrorEnergy error_energy(const Matrix& predictions, const Matrix& truths) {
  if (predictions.rows() != truths.rows() ||
      predictions.cols() != truths.cols())
    throw std::invalid_argument("error_energy: shape mismatch");
  if (predictions.rows() == 0)
    throw std::invalid_argument("error_energy: empty prediction set");
  return {(predictions - truths).squaredNorm(), truths.squaredNorm()};
}

double nmse_db_from_energy(double num, double den) {
  if (!(den > 0.0))
    throw std::invalid_argument(
        "nmse: zero error denominator (truths are all zero)");
  if (num == 0.0) return -kInf;
  return 10.0 * std::log10(num / den);
}

double nmse_db(const Matrix& predictions, const Matrix& truths) {
  const ErrorEnergy e = error_energy(predictions, truths);
  return nmse_db_from_energy(e.num, e.den);
}

Dataset build_dataset(const ExperimentConfig& config) {
  config.validate();
  Dataset ds;
  if (config.source == DatasetSource::kFiles) {
    auto [nodes, signals] = load_dataset(config.nodes_csv, config.signals_csv);
    ds.nodes = std::move(nodes);
    ds.signals = std::move(signals);
  } else {
    ds.nodes = synth_nodes(config.synth.nodes, coords_seed(config.seed));
  }
  ds.graph = build_graph(
      adjacency_from_distances(geodesic_distances(ds.nodes.coords())));
  if (config.source == DatasetSource::kSynthetic) {
    ds.signals = synth_dataset(ds.graph, config.synth.days,
                               config.synth.bandwidth, config.synth.rho,
                               config.synth.noise_floor,
                               signals_seed(config.seed));
    ds.signals.values.array() += config.synth.mean;
    ds.signals.units = "synthetic";
  }
  return ds;
}

double median_pairwise_distance(const Matrix& X) {
  const Index n = X.rows();
  if (n < 2)
    throw std::invalid_argument(
        "median_pairwise_distance: need at least two inputs");
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      dists.push_back((X.row(i) - X.row(j)).norm());
  const std::size_t mid = (dists.size() - 1) / 2;  // lower median
  std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
  const double med = dists[mid];
  return med > 0.0 ? med : 1.0;
}

std::uint64_t coords_seed(std::uint64_t master) {
  return derive_seed(master, kCoordsTag);
}
std::uint64_t signals_seed(std::uint64_t master) {
  return derive_seed(master, kSignalsTag);
}
std::uint64_t cv_seed(std::uint64_t master) {
  return derive_seed(master, kCvTag);
}
std::uint64_t trial_seed(std::uint64_t master, Index train_size, int trial) {
  const std::uint64_t per_sweep = derive_seed(
      derive_seed(master, kTrialTag), static_cast<std::uint64_t>(train_size));
  return derive_seed(per_sweep, static_cast<std::uint64_t>(trial));
}

std::vector<std::pair<Index, Index>> fold_bounds(Index size, int folds) {
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (size < folds)
    throw std::invalid_argument("degenerate folds: " + std::to_string(size) +
                                " rows cannot fill " + std::to_string(folds) +
                                " folds");
  std::vector<std::pair<Index, Index>> bounds;
  for (int f = 0; f < folds; ++f)
    bounds.emplace_back(size * f / folds, size * (f + 1) / folds);
  return bounds;
}

CvResult cross_validate(const PairSet& train, const Graph& graph,
                        const ExperimentConfig& config) {
  const Index n = train.size();
  const auto bounds = fold_bounds(n, config.folds);

  std::optional<double> median;
  if (config.sigma_grid.empty())
    median = median_pairwise_distance(train.inputs);
  const std::vector<double> sigmas = resolve_sigmas(config, median);

  std::vector<CvEntry> entries;
  for (double sigma : sigmas)
    for (double alpha : config.alpha_grid)
      for (double beta : config.beta_grid)
        entries.push_back({sigma, alpha, beta, kInf, 0});

  // Fold splits are shared by every grid point; build them once.
  struct Fold {
    Matrix fit_in, fit_tg, val_in, val_tg;
  };
  std::vector<Fold> fold_data;
  for (const auto& [begin, end] : bounds) {
    Fold f;
    const Index len = end - begin;
    f.val_in = train.inputs.middleRows(begin, len);
    f.val_tg = train.targets.middleRows(begin, len);
    f.fit_in.resize(n - len, train.inputs.cols());
    f.fit_tg.resize(n - len, train.targets.cols());
    f.fit_in << train.inputs.topRows(begin),
        train.inputs.bottomRows(n - end);
    f.fit_tg << train.targets.topRows(begin),
        train.targets.bottomRows(n - end);
    fold_data.push_back(std::move(f));
  }

  std::vector<std::string> fatal(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t g = 0; g < entries.size(); ++g) {
    CvEntry& e = entries[g];
    try {
      const KernelSpec kernel = KernelSpec::gaussian(e.sigma);
      const Hyperparams hyper = hyper_from(config, e.alpha, e.beta);
      double num = 0.0, den = 0.0;
      for (const Fold& f : fold_data) {
        try {
          const TrainingSet ts = make_training_set(f.fit_in, f.fit_tg, graph);
          const KrgsModel model = fit_krgs(ts, kernel, hyper);
          const ErrorEnergy err =
              error_energy(predict(model, f.val_in), f.val_tg);
          num += err.num;
          den += err.den;
        } catch (const SolverError&) {
          ++e.folds_failed;
        }
      }
      e.nmse_db = (e.folds_failed > 0 || !(den > 0.0))
                      ? kInf
                      : nmse_db_from_energy(num, den);
    } catch (const std::exception& ex) {
      fatal[g] = ex.what();
    }
  }
  for (const std::string& f : fatal)
    if (!f.empty()) throw std::runtime_error("cross_validate: " + f);

  const CvEntry* best = nullptr;
  for (const CvEntry& e : entries) {
    if (!best || e.nmse_db < best->nmse_db ||
        (e.nmse_db == best->nmse_db &&
         std::tie(e.alpha, e.beta, e.sigma) <
             std::tie(best->alpha, best->beta, best->sigma)))
      best = &e;
  }
  if (!best || best->nmse_db == kInf)
    throw SolverError("cross-validation failed on every grid point");
  return {{best->alpha, best->beta, best->sigma}, std::move(entries)};
}

McResult monte_carlo_experiment(const ExperimentConfig& config) {
  config.validate();
  const Dataset ds = build_dataset(config);
  const PairSet pairs = make_pairs(ds.signals);
  const auto [train_all, test] = split_train_test(pairs, config.n_train);
  const std::vector<Index> sizes = effective_sizes(config);
  for (Index s : sizes)
    check(s <= train_all.size(),
          "train_sizes entry " + std::to_string(s) +
              " exceeds the training pool of " +
              std::to_string(train_all.size()));

  std::optional<double> median;
  if (config.sigma_grid.empty())
    median = median_pairwise_distance(train_all.inputs);
  const std::vector<double> sigmas = resolve_sigmas(config, median);
  const std::size_t grid_points =
      sigmas.size() * config.alpha_grid.size() * config.beta_grid.size();

  McResult result;
  if (grid_points == 1) {
    result.chosen = {config.alpha_grid[0], config.beta_grid[0], sigmas[0]};
  } else {
    const PairSet cv_train{
        train_all.inputs,
        apply_noise(train_all.targets, noise_from(config, cv_seed(config.seed)))};
    CvResult cv = cross_validate(cv_train, ds.graph, config);
    result.chosen = cv.best;
    result.cv_table = std::move(cv.table);
    result.cv_ran = true;
  }

  const KernelSpec kernel = KernelSpec::gaussian(result.chosen.sigma);
  const Hyperparams hyper =
      hyper_from(config, result.chosen.alpha, result.chosen.beta);

  struct TrialOut {
    std::vector<ErrorEnergy> energies;
    long jitter = 0;
    bool failed = false;
    std::string fatal;
  };

  for (Index size : sizes) {
    const Matrix sub_in = train_all.inputs.topRows(size);
    const Matrix sub_tg = train_all.targets.topRows(size);
    const Matrix cross = kernel_cross(kernel, sub_in, test.inputs);
    std::vector<TrialOut> slots(static_cast<std::size_t>(config.trials));
    [[maybe_unused]] const int cap =
        trial_thread_cap(size * ds.graph.node_count);

#pragma omp parallel for schedule(dynamic) num_threads(cap)
    for (int t = 0; t < config.trials; ++t) {
      TrialOut& slot = slots[static_cast<std::size_t>(t)];
      try {
        const Matrix corrupted = apply_noise(
            sub_tg, noise_from(config, trial_seed(config.seed, size, t)));
        const TrainingSet ts =
            make_training_set(sub_in, corrupted, ds.graph, sub_tg);
        slot.energies.resize(static_cast<std::size_t>(hyper.max_iterations));
        const auto observer = [&](int iter, const Matrix& psi) {
          slot.energies[static_cast<std::size_t>(iter - 1)] =
              error_energy(cross * psi, test.targets);
        };
        const KrgsModel model = fit_krgs(ts, kernel, hyper, observer);
        // A converged fit keeps its final coefficients for the remaining
        // iterations of the table.
        for (int i = model.diagnostics.iterations_run;
             i < hyper.max_iterations; ++i)
          slot.energies[static_cast<std::size_t>(i)] =
              slot.energies[static_cast<std::size_t>(
                  model.diagnostics.iterations_run - 1)];
        slot.jitter = model.diagnostics.jitter_count;
      } catch (const SolverError&) {
        slot.failed = true;
      } catch (const std::exception& e) {
        slot.fatal = e.what();
      }
    }

    int failed = 0;
    for (const TrialOut& slot : slots) {
      if (!slot.fatal.empty())
        throw std::runtime_error("monte_carlo_experiment: " + slot.fatal);
      if (slot.failed) ++failed;
      result.jitter_events += slot.jitter;
    }
    const int ok = config.trials - failed;
    result.trials_failed_total += failed;
    if (failed * 10 > config.trials)
      throw SolverThresholdError(
          "training size " + std::to_string(size) + ": " +
          std::to_string(failed) + " of " + std::to_string(config.trials) +
          " trials failed (threshold 10%)");

    for (int iter = 1; iter <= hyper.max_iterations; ++iter) {
      double sum_num = 0.0, sum_den = 0.0;
      for (const TrialOut& slot : slots) {
        if (slot.failed) continue;
        sum_num += slot.energies[static_cast<std::size_t>(iter - 1)].num;
        sum_den += slot.energies[static_cast<std::size_t>(iter - 1)].den;
      }
      const double mean_num = sum_num / ok;
      const double mean_den = sum_den / ok;
      result.rows.push_back(
          {iter, size, nmse_db_from_energy(mean_num, mean_den), ok, failed});
    }
  }

  result.metadata.emplace_back("rng_algorithm", std::string(kRngAlgorithmId));
  for (auto& kv : config_echo(config)) result.metadata.push_back(kv);
  result.metadata.emplace_back("dataset_nodes",
                               std::to_string(ds.graph.node_count));
  result.metadata.emplace_back("dataset_days",
                               std::to_string(ds.signals.days()));
  result.metadata.emplace_back(
      "sigma_source", config.sigma_grid.empty() ? "scaled" : "absolute");
  result.metadata.emplace_back(
      "median_pairwise_distance",
      median ? csv::format_double(*median) : std::string("n/a"));
  result.metadata.emplace_back("cv_ran", result.cv_ran ? "true" : "false");
  result.metadata.emplace_back("cv_grid_points", std::to_string(grid_points));
  result.metadata.emplace_back("chosen_alpha",
                               csv::format_double(result.chosen.alpha));
  result.metadata.emplace_back("chosen_beta",
                               csv::format_double(result.chosen.beta));
  result.metadata.emplace_back("chosen_sigma",
                               csv::format_double(result.chosen.sigma));
  result.metadata.emplace_back("jitter_events",
                               std::to_string(result.jitter_events));
  result.metadata.emplace_back("trials_failed_total",
                               std::to_string(result.trials_failed_total));
  return result;
}

void write_experiment_outputs(const McResult& result,
                              const ExperimentConfig& config) {
  if (config.out_dir.empty())
    throw ConfigError("out_dir must be set to write experiment outputs");
  std::filesystem::create_directories(config.out_dir);
  const std::filesystem::path dir(config.out_dir);

  {
    std::ofstream out(dir / "nmse_by_iteration.csv");
    if (!out) throw ConfigError("cannot write nmse_by_iteration.csv");
    out << "iteration,N,nmse_db,trials_ok,trials_failed\n";
    for (const McRow& r : result.rows)
      out << r.iteration << ',' << r.train_size << ','
          << csv::format_double(r.nmse_db) << ',' << r.trials_ok << ','
          << r.trials_failed << '\n';
    if (!out) throw ConfigError("write failed: nmse_by_iteration.csv");
  }
  {
    std::ofstream out(dir / "run_metadata.csv");
    if (!out) throw ConfigError("cannot write run_metadata.csv");
    out << "key,value\n";
    for (const auto& [k, v] : result.metadata)
      out << csv::escape(k) << ',' << csv::escape(v) << '\n';
    if (!out) throw ConfigError("write failed: run_metadata.csv");
  }
  if (result.cv_ran) {
    std::ofstream out(dir / "cv_results.csv");
    if (!out) throw ConfigError("cannot write cv_results.csv");
    out << "sigma,alpha,beta,nmse_db,folds_failed\n";
    for (const CvEntry& e : result.cv_table)
      out << csv::format_double(e.sigma) << ',' << csv::format_double(e.alpha)
          << ',' << csv::format_double(e.beta) << ','
          << csv::format_double(e.nmse_db) << ',' << e.folds_failed << '\n';
    if (!out) throw ConfigError("write failed: cv_results.csv");
  }
  if (config.plot)
    write_nmse_svg(result.rows, (dir / "nmse_by_iteration.svg").string());
}

}  // namespace krgs
