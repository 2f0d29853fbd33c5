#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "krgs/graph.hpp"
#include "krgs/linalg.hpp"

namespace krgs {

struct Node {
  long id = 0;
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
};

/// ids are required to be 0..n-1 in file order so that signal column v_i
/// unambiguously belongs to node id i.
struct NodeTable {
  std::vector<Node> nodes;

  Index size() const { return static_cast<Index>(nodes.size()); }
  std::vector<GeoCoord> coords() const;
};

struct SignalSeries {
  std::vector<std::string> dates;  // opaque labels, strictly increasing
  Matrix values;                   // days x M
  std::string units;               // annotation only; not serialized

  Index days() const { return values.rows(); }
};

/// Parses and cross-validates the two CSV files. Errors carry the file name
/// and 1-based line number.
std::pair<NodeTable, SignalSeries> load_dataset(const std::string& nodes_path,
                                                const std::string& signals_path);

/// Parses a signals CSV alone, validating its width against an expected
/// node count.
SignalSeries load_signals_csv(const std::string& path, Index node_count);

void write_nodes_csv(const NodeTable& table, const std::string& path);
void write_signals_csv(const SignalSeries& series, const std::string& path);

/// Next-day prediction pairs: row n of inputs is day n, row n of targets is
/// day n+1. A series of D days yields D-1 pairs.
struct PairSet {
  Matrix inputs;   // pairs x M
  Matrix targets;  // pairs x M

  Index size() const { return inputs.rows(); }
};

PairSet make_pairs(const SignalSeries& series);

/// Chronological split: first n_train pairs train, the rest test.
std::pair<PairSet, PairSet> split_train_test(const PairSet& pairs,
                                             Index n_train);

/// Synthetic daily series of graph-smooth, AR(1)-correlated signals:
///   z_t = rho z_{t-1} + sqrt(1 - rho^2) U_s c_t + noise_floor e_t
/// with z_{-1} = 0, U_s the smooth_bandwidth Laplacian eigenvectors of
/// smallest eigenvalue, and c_t, e_t standard normal draws. Dates are
/// consecutive ISO days from 2017-09-01.
SignalSeries synth_dataset(const Graph& graph, Index days,
                           Index smooth_bandwidth, double temporal_corr,
                           double noise_floor, std::uint64_t seed);

/// Random node table with coordinates in a Sweden-sized box; companion to
/// synth_dataset for file-free experiments.
NodeTable synth_nodes(Index count, std::uint64_t seed);

}  // namespace krgs
