#include "krgs/model_io.hpp"

#include <fstream>

#include "krgs/csv.hpp"
#include "krgs/errors.hpp"

namespace krgs {
namespace {

constexpr char kMagic[] = "krgs-model";
constexpr char kVersion[] = "v1";

void write_matrix(std::ofstream& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << csv::format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_matrix(std::ifstream& in, Index rows, Index cols,
                   const std::string& path) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      if (!(in >> m(r, c)))
        throw ConfigError(path + ": truncated matrix block");
  return m;
}

[[noreturn]] void malformed(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": malformed model file (" + what + ")");
}

}  // namespace

void save_model(const KrgsModel& model, const std::string& path) {
  if (model.kernel.is_precomputed())
    throw ConfigError("cannot serialize a precomputed-kernel model");
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << kMagic << ' ' << kVersion << '\n';
  if (model.kernel.is_gaussian())
    out << "kernel gaussian " << csv::format_double(model.kernel.sigma())
        << '\n';
  else
    out << "kernel linear\n";
  out << "hyper " << csv::format_double(model.hyper.alpha) << ' '
      << csv::format_double(model.hyper.beta) << ' '
      << csv::format_double(model.hyper.delta) << ' '
      << model.hyper.max_iterations << ' '
      << csv::format_double(model.hyper.tol) << ' '
      << (model.hyper.literal_delta_weights ? 1 : 0) << '\n';
  out << "train " << model.train_inputs.rows() << ' '
      << model.train_inputs.cols() << '\n';
  write_matrix(out, model.train_inputs);
  out << "coef " << model.dual_coef.rows() << ' ' << model.dual_coef.cols()
      << '\n';
  write_matrix(out, model.dual_coef);
  out << "end\n";
  if (!out) throw ConfigError(path + ": write failed");
}

KrgsModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::string word, version;
  if (!(in >> word >> version) || word != kMagic || version != kVersion)
    malformed(path, "bad header");

  KrgsModel model;
  if (!(in >> word) || word != "kernel") malformed(path, "missing kernel");
  if (!(in >> word)) malformed(path, "missing kernel family");
  if (word == "gaussian") {
    double sigma = 0.0;
    if (!(in >> sigma)) malformed(path, "missing sigma");
    model.kernel = KernelSpec::gaussian(sigma);
  } else if (word == "linear") {
    model.kernel = KernelSpec::linear();
  } else {
    malformed(path, "unknown kernel family '" + word + "'");
  }

  int literal = 0;
  if (!(in >> word) || word != "hyper" || !(in >> model.hyper.alpha) ||
      !(in >> model.hyper.beta) || !(in >> model.hyper.delta) ||
      !(in >> model.hyper.max_iterations) || !(in >> model.hyper.tol) ||
      !(in >> literal))
    malformed(path, "bad hyper line");
  model.hyper.literal_delta_weights = literal != 0;

  Index rows = 0, cols = 0;
  if (!(in >> word) || word != "train" || !(in >> rows) || !(in >> cols) ||
      rows < 1 || cols < 1)
    malformed(path, "bad train header");
  model.train_inputs = read_matrix(in, rows, cols, path);

  if (!(in >> word) || word != "coef" || !(in >> rows) || !(in >> cols) ||
      rows != model.train_inputs.rows() || cols < 1)
    malformed(path, "bad coef header");
  model.dual_coef = read_matrix(in, rows, cols, path);

  if (!(in >> word) || word != "end") malformed(path, "missing end marker");
  return model;
}

}  // namespace krgs
