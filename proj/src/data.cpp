#include "krgs/data.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "krgs/csv.hpp"
#include "krgs/errors.hpp"
#include "krgs/rng.hpp"

namespace krgs {
namespace {

[[noreturn]] void fail_at(const std::string& path, std::size_t line,
                          const std::string& what) {
  throw ConfigError(path + ":" + std::to_string(line) + ": " + what);
}

bool parse_double_strict(const std::string& s, double& out) {
  return csv::parse_field(s, out);
}

bool parse_long_strict(const std::string& s, long& out) {
  return csv::parse_field(s, out);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

NodeTable load_nodes(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ConfigError(path + ": empty file");
  if (csv::split_line(lines[0]) !=
      std::vector<std::string>{"id", "name", "lat", "lon"})
    fail_at(path, 1, "expected header id,name,lat,lon");
  NodeTable table;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) fail_at(path, r + 1, "blank row");
    const auto f = csv::split_line(lines[r]);
    if (f.size() != 4)
      fail_at(path, r + 1,
              "expected 4 fields, got " + std::to_string(f.size()));
    Node node;
    if (!parse_long_strict(f[0], node.id)) fail_at(path, r + 1, "bad id");
    if (node.id != static_cast<long>(r - 1))
      fail_at(path, r + 1,
              "ids must be contiguous from 0 in order; expected " +
                  std::to_string(r - 1) + ", got " + std::to_string(node.id));
    node.name = f[1];
    if (!parse_double_strict(f[2], node.lat) || !std::isfinite(node.lat) ||
        node.lat < -90.0 || node.lat > 90.0)
      fail_at(path, r + 1, "latitude out of range");
    if (!parse_double_strict(f[3], node.lon) || !std::isfinite(node.lon) ||
        node.lon < -180.0 || node.lon > 180.0)
      fail_at(path, r + 1, "longitude out of range");
    table.nodes.push_back(std::move(node));
  }
  if (table.nodes.empty()) throw ConfigError(path + ": no nodes");
  return table;
}

}  // namespace

SignalSeries load_signals_csv(const std::string& path, Index node_count) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ConfigError(path + ": empty file");
  const auto header = csv::split_line(lines[0]);
  if (header.size() != static_cast<std::size_t>(node_count) + 1 ||
      header[0] != "date")
    fail_at(path, 1,
            "expected header date,v0,...,v" + std::to_string(node_count - 1) +
                " to match the " + std::to_string(node_count) + "-node table");
  for (Index i = 0; i < node_count; ++i)
    if (header[static_cast<std::size_t>(i) + 1] != "v" + std::to_string(i))
      fail_at(path, 1, "column " + std::to_string(i + 2) + " must be v" +
                           std::to_string(i));
  SignalSeries series;
  series.values.resize(static_cast<Index>(lines.size()) - 1, node_count);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto f = csv::split_line(lines[r]);
    if (f.size() != static_cast<std::size_t>(node_count) + 1)
      fail_at(path, r + 1,
              "expected " + std::to_string(node_count + 1) + " fields, got " +
                  std::to_string(f.size()));
    if (f[0].empty()) fail_at(path, r + 1, "empty date");
    if (!series.dates.empty() && f[0] <= series.dates.back())
      fail_at(path, r + 1, "dates must be strictly increasing");
    series.dates.push_back(f[0]);
    for (Index c = 0; c < node_count; ++c) {
      double v = 0.0;
      if (!parse_double_strict(f[static_cast<std::size_t>(c) + 1], v) ||
          !std::isfinite(v))
        fail_at(path, r + 1, "bad value in column v" + std::to_string(c));
      series.values(static_cast<Index>(r) - 1, c) = v;
    }
  }
  if (series.days() == 0) throw ConfigError(path + ": no signal rows");
  return series;
}

std::vector<GeoCoord> NodeTable::coords() const {
  std::vector<GeoCoord> out;
  out.reserve(nodes.size());
  for (const Node& n : nodes) out.emplace_back(n.lat, n.lon);
  return out;
}

std::pair<NodeTable, SignalSeries> load_dataset(
    const std::string& nodes_path, const std::string& signals_path) {
  NodeTable table = load_nodes(nodes_path);
  SignalSeries series = load_signals_csv(signals_path, table.size());
  return {std::move(table), std::move(series)};
}

void write_nodes_csv(const NodeTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << "id,name,lat,lon\n";
  for (const Node& n : table.nodes) {
    out << n.id << ',' << csv::escape(n.name) << ','
        << csv::format_double(n.lat) << ',' << csv::format_double(n.lon)
        << '\n';
  }
  if (!out) throw ConfigError(path + ": write failed");
}

void write_signals_csv(const SignalSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << "date";
  for (Index i = 0; i < series.values.cols(); ++i) out << ",v" << i;
  out << '\n';
  for (Index r = 0; r < series.days(); ++r) {
    out << csv::escape(series.dates[static_cast<std::size_t>(r)]);
    for (Index c = 0; c < series.values.cols(); ++c)
      out << ',' << csv::format_double(series.values(r, c));
    out << '\n';
  }
  if (!out) throw ConfigError(path + ": write failed");
}

PairSet make_pairs(const SignalSeries& series) {
  const Index d = series.days();
  if (d < 2)
    throw std::invalid_argument(
        "make_pairs: need at least 2 days, got " + std::to_string(d));
  return {series.values.topRows(d - 1), series.values.bottomRows(d - 1)};
}

std::pair<PairSet, PairSet> split_train_test(const PairSet& pairs,
                                             Index n_train) {
  const Index total = pairs.size();
  if (n_train < 1 || n_train >= total)
    throw std::invalid_argument("split_train_test: n_train must lie in [1, " +
                                std::to_string(total - 1) + "], got " +
                                std::to_string(n_train));
  const Index n_test = total - n_train;
  PairSet train{pairs.inputs.topRows(n_train), pairs.targets.topRows(n_train)};
  PairSet test{pairs.inputs.bottomRows(n_test),
               pairs.targets.bottomRows(n_test)};
  return {std::move(train), std::move(test)};
}

SignalSeries synth_dataset(const Graph& graph, Index days,
                           Index smooth_bandwidth, double temporal_corr,
                           double noise_floor, std::uint64_t seed) {
  const Index m = graph.node_count;
  if (days < 1) throw std::invalid_argument("synth_dataset: days must be >= 1");
  if (smooth_bandwidth < 1 || smooth_bandwidth > m)
    throw std::invalid_argument(
        "synth_dataset: smooth_bandwidth must lie in [1, node count]");
  if (!(temporal_corr >= 0.0 && temporal_corr < 1.0))
    throw std::invalid_argument("synth_dataset: temporal_corr must be in [0,1)");
  if (!std::isfinite(noise_floor) || noise_floor < 0.0)
    throw std::invalid_argument("synth_dataset: noise_floor must be >= 0");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(graph.laplacian);
  if (eig.info() != Eigen::Success)
    throw SolverError("synth_dataset: Laplacian eigendecomposition failed");
  const Matrix smooth_basis = eig.eigenvectors().leftCols(smooth_bandwidth);

  Rng rng(seed);
  const double innovation = std::sqrt(1.0 - temporal_corr * temporal_corr);
  SignalSeries series;
  series.values.resize(days, m);
  Vector state = Vector::Zero(m);
  Vector coef(smooth_bandwidth);
  Vector eps(m);
  for (Index t = 0; t < days; ++t) {
    for (Index i = 0; i < smooth_bandwidth; ++i) coef(i) = rng.normal();
    for (Index i = 0; i < m; ++i) eps(i) = rng.normal();
    state = temporal_corr * state + innovation * (smooth_basis * coef) +
            noise_floor * eps;
    series.values.row(t) = state.transpose();

    const auto day = std::chrono::sys_days(std::chrono::year{2017} /
                                           std::chrono::month{9} /
                                           std::chrono::day{1}) +
                     std::chrono::days(t);
    const std::chrono::year_month_day ymd(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    series.dates.emplace_back(buf);
  }
  return series;
}

NodeTable synth_nodes(Index count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("synth_nodes: count must be >= 1");
  Rng rng(seed);
  NodeTable table;
  for (Index i = 0; i < count; ++i) {
    Node node;
    node.id = static_cast<long>(i);
    node.name = "node" + std::to_string(i);
    node.lat = rng.uniform(55.0, 68.5);
    node.lon = rng.uniform(11.0, 24.0);
    table.nodes.push_back(std::move(node));
  }
  return table;
}

}  // namespace krgs
