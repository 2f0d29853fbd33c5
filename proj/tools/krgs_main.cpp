#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "krgs/csv.hpp"
#include "krgs/data.hpp"
#include "krgs/errors.hpp"
#include "krgs/experiment.hpp"
#include "krgs/graph.hpp"
#include "krgs/kernels.hpp"
#include "krgs/model_io.hpp"
#include "krgs/noise.hpp"
#include "krgs/regression.hpp"

namespace {

using namespace krgs;

Graph graph_from_nodes(const NodeTable& nodes) {
  return build_graph(
      adjacency_from_distances(geodesic_distances(nodes.coords())));
}

struct SynthArgs {
  SynthSpec spec;
  std::uint64_t seed = 0;
  std::string out_dir;
};

int run_synth(const SynthArgs& args) {
  std::filesystem::create_directories(args.out_dir);
  ExperimentConfig config;
  config.source = DatasetSource::kSynthetic;
  config.synth = args.spec;
  config.seed = args.seed;
  const Dataset ds = build_dataset(config);
  const std::filesystem::path dir(args.out_dir);
  write_nodes_csv(ds.nodes, (dir / "nodes.csv").string());
  write_signals_csv(ds.signals, (dir / "signals.csv").string());
  std::cout << "wrote " << (dir / "nodes.csv").string() << " ("
            << ds.nodes.size() << " nodes) and "
            << (dir / "signals.csv").string() << " (" << ds.signals.days()
            << " days)\n";
  return 0;
}

struct FitArgs {
  std::string nodes_csv, signals_csv, out_dir;
  Index n_train = 46;
  std::string kernel = "gaussian";
  double sigma = 1.0;
  Hyperparams hyper;
};

int run_fit(const FitArgs& args) {
  const auto [nodes, signals] = load_dataset(args.nodes_csv, args.signals_csv);
  const Graph graph = graph_from_nodes(nodes);
  const PairSet pairs = make_pairs(signals);
  const auto [train, test] = split_train_test(pairs, args.n_train);

  const KernelSpec kernel = args.kernel == "linear"
                                ? KernelSpec::linear()
                                : KernelSpec::gaussian(args.sigma);
  const TrainingSet ts = make_training_set(train.inputs, train.targets, graph);
  const KrgsModel model = fit_krgs(ts, kernel, args.hyper);

  std::filesystem::create_directories(args.out_dir);
  const std::filesystem::path dir(args.out_dir);
  save_model(model, (dir / "model.txt").string());
  {
    std::ofstream out(dir / "fit_summary.csv");
    if (!out) throw ConfigError("cannot write fit_summary.csv");
    out << "iteration,cost,gradient_norm,coef_rel_change,jitter\n";
    const auto& d = model.diagnostics;
    for (int i = 0; i < d.iterations_run; ++i) {
      out << (i + 1) << ',' << csv::format_double(d.cost_history[i]) << ','
          << csv::format_double(d.gradient_norms[i]) << ',';
      if (i >= 1) out << csv::format_double(d.coef_rel_changes[i - 1]);
      else out << "n/a";
      out << ',' << (d.jitter_by_iteration[i] ? 1 : 0) << '\n';
    }
    if (!out) throw ConfigError("write failed: fit_summary.csv");
  }
  const double train_nmse = nmse_db(predict(model, train.inputs), train.targets);
  const double test_nmse = nmse_db(predict(model, test.inputs), test.targets);
  std::cout << "fit " << model.diagnostics.iterations_run << " iterations ("
            << (model.diagnostics.converged ? "converged" : "iteration cap")
            << "), final cost " << model.state.cost_history.back() << '\n'
            << "train NMSE " << train_nmse << " dB, test NMSE " << test_nmse
            << " dB\n"
            << "model saved to " << (dir / "model.txt").string() << '\n';
  return 0;
}

struct PredictArgs {
  std::string model_path, signals_csv, out_path;
};

int run_predict(const PredictArgs& args) {
  const KrgsModel model = load_model(args.model_path);
  const SignalSeries inputs =
      load_signals_csv(args.signals_csv, model.train_inputs.cols());
  const Matrix preds = predict(model, inputs.values);
  SignalSeries out;
  out.dates = inputs.dates;  // prediction row keeps its input's date label
  out.values = preds;
  write_signals_csv(out, args.out_path);
  std::cout << "wrote " << preds.rows() << " predictions to " << args.out_path
            << '\n';
  return 0;
}

struct CvArgs {
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int run_cv(const CvArgs& args) {
  ExperimentConfig config = load_experiment_config(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  config.validate();
  const Dataset ds = build_dataset(config);
  const PairSet pairs = make_pairs(ds.signals);
  const auto [train, test] = split_train_test(pairs, config.n_train);
  const PairSet cv_train{
      train.inputs,
      [&] {
        NoiseSpec spec;
        spec.kind = config.noise_kind;
        spec.fraction = config.noise_fraction;
        spec.scale_factor = config.noise_factor;
        spec.seed = cv_seed(config.seed);
        return apply_noise(train.targets, spec);
      }()};
  const CvResult cv = cross_validate(cv_train, ds.graph, config);
  std::cout << "best alpha " << csv::format_double(cv.best.alpha)
            << ", beta " << csv::format_double(cv.best.beta) << ", sigma "
            << csv::format_double(cv.best.sigma) << '\n';
  if (!args.out_dir.empty()) {
    std::filesystem::create_directories(args.out_dir);
    const auto path = std::filesystem::path(args.out_dir) / "cv_results.csv";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write cv_results.csv");
    out << "sigma,alpha,beta,nmse_db,folds_failed\n";
    for (const CvEntry& e : cv.table)
      out << csv::format_double(e.sigma) << ',' << csv::format_double(e.alpha)
          << ',' << csv::format_double(e.beta) << ','
          << csv::format_double(e.nmse_db) << ',' << e.folds_failed << '\n';
    std::cout << "wrote " << path.string() << '\n';
  }
  return 0;
}

int run_experiment_cmd(const ExperimentConfig& config) {
  const McResult result = monte_carlo_experiment(config);
  write_experiment_outputs(result, config);
  std::cout << "hyperparameters: alpha "
            << csv::format_double(result.chosen.alpha) << ", beta "
            << csv::format_double(result.chosen.beta) << ", sigma "
            << csv::format_double(result.chosen.sigma)
            << (result.cv_ran ? " (cross-validated)" : " (single grid point)")
            << '\n';
  for (const McRow& r : result.rows)
    if (r.iteration == 1 || r.iteration == config.max_iterations)
      std::cout << "N=" << r.train_size << " iteration " << r.iteration
                << ": NMSE " << csv::format_double(r.nmse_db) << " dB ("
                << r.trials_ok << " ok, " << r.trials_failed << " failed)\n";
  std::cout << "outputs written to " << config.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel regression over graphs, robust to sparse noise"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic dataset as CSV files");
  synth_cmd->add_option("--nodes", synth.spec.nodes, "node count")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--days", synth.spec.days, "days to generate")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--bandwidth", synth.spec.bandwidth,
                        "smooth eigenvector count");
  synth_cmd->add_option("--rho", synth.spec.rho, "day-to-day correlation");
  synth_cmd->add_option("--noise-floor", synth.spec.noise_floor,
                        "dense noise level");
  synth_cmd->add_option("--mean", synth.spec.mean, "constant signal offset");
  synth_cmd->add_option("--seed", synth.seed, "master seed")->required();
  synth_cmd->add_option("--out-dir", synth.out_dir, "output directory")
      ->required();

  FitArgs fit;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model on CSV data");
  fit_cmd->add_option("--nodes-csv", fit.nodes_csv, "node table")->required();
  fit_cmd->add_option("--signals-csv", fit.signals_csv, "signal series")
      ->required();
  fit_cmd->add_option("--n-train", fit.n_train, "training pairs (chronological prefix)");
  fit_cmd->add_option("--kernel", fit.kernel, "gaussian|linear")
      ->check(CLI::IsMember({"gaussian", "linear"}));
  fit_cmd->add_option("--sigma", fit.sigma, "gaussian kernel width");
  fit_cmd->add_option("--alpha", fit.hyper.alpha, "norm regularization")
      ->required();
  fit_cmd->add_option("--beta", fit.hyper.beta, "graph regularization");
  fit_cmd->add_option("--delta", fit.hyper.delta, "reweighting constant");
  fit_cmd->add_option("--i-max", fit.hyper.max_iterations, "IRLS iterations");
  fit_cmd->add_option("--tol", fit.hyper.tol, "early-stop tolerance");
  fit_cmd->add_flag("--literal-weights", fit.hyper.literal_delta_weights,
                    "sign-sensitive reweighting variant");
  fit_cmd->add_option("--out-dir", fit.out_dir, "output directory")
      ->required();

  PredictArgs pred;
  CLI::App* pred_cmd =
      app.add_subcommand("predict", "apply a saved model to a signals CSV");
  pred_cmd->add_option("--model", pred.model_path, "model file")->required();
  pred_cmd->add_option("--signals-csv", pred.signals_csv, "input rows")
      ->required();
  pred_cmd->add_option("--out", pred.out_path, "predictions CSV")->required();

  CvArgs cv;
  CLI::App* cv_cmd =
      app.add_subcommand("cv", "grid-search hyperparameters by k-fold CV");
  cv_cmd->add_option("--config", cv.config_path, "experiment config file")
      ->required();
  CLI::Option* cv_seed_opt =
      cv_cmd->add_option("--seed", cv.seed, "master seed override");
  cv_cmd->add_option("--out-dir", cv.out_dir, "write cv_results.csv here");

  std::string run_config_path, run_out_dir, run_noise_kind;
  std::uint64_t run_seed = 0;
  bool run_plot = false;
  int run_trials = 0, run_imax = 0;
  long run_ntrain = 0;
  CLI::App* run_cmd =
      app.add_subcommand("run", "full Monte Carlo experiment with CSV outputs");
  run_cmd->add_option("--config", run_config_path, "experiment config file")
      ->required();
  run_cmd->add_option("--seed", run_seed, "master seed")->required();
  run_cmd->add_option("--out-dir", run_out_dir, "output directory")
      ->required();
  run_cmd->add_flag("--plot", run_plot, "also write an SVG chart");
  CLI::Option* trials_opt =
      run_cmd->add_option("--trials", run_trials, "Monte Carlo trials");
  CLI::Option* imax_opt =
      run_cmd->add_option("--i-max", run_imax, "IRLS iterations");
  CLI::Option* ntrain_opt =
      run_cmd->add_option("--n-train", run_ntrain, "training pairs");
  CLI::Option* nk_opt = run_cmd->add_option("--noise-kind", run_noise_kind,
                                            "missing|scaling override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (pred_cmd->parsed()) return run_predict(pred);
    if (cv_cmd->parsed()) {
      cv.seed_set = cv_seed_opt->count() > 0;
      return run_cv(cv);
    }
    ExperimentConfig config = load_experiment_config(run_config_path);
    config.seed = run_seed;
    config.out_dir = run_out_dir;
    config.plot = run_plot;
    if (trials_opt->count()) config.trials = run_trials;
    if (imax_opt->count()) config.max_iterations = run_imax;
    if (ntrain_opt->count()) config.n_train = static_cast<Index>(run_ntrain);
    if (nk_opt->count()) apply_config_entry(config, "noise_kind", run_noise_kind);
    return run_experiment_cmd(config);
  } catch (const SolverThresholdError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
