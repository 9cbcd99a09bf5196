#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stgof/common.hpp"

namespace stgof {

// Undirected simple graph in CSR form. Neighbor lists are sorted and strictly
// increasing (no multi-edges), symmetric, and never contain the node itself.
// Immutable after construction, safe to share across threads.
class AdjacencyMatrix {
 public:
  struct BuildStats {
    std::int64_t self_loops_dropped = 0;
    std::int64_t duplicate_edges_dropped = 0;
  };

  AdjacencyMatrix() = default;

  // Builds from an arbitrary edge collection: either orientation, duplicates
  // and self loops tolerated (dropped and counted).
  static AdjacencyMatrix from_edges(int n, std::span<const std::pair<int, int>> edges,
                                    BuildStats* stats = nullptr);

  int node_count() const { return n_; }
  std::int64_t edge_count() const { return m_; }

  std::span<const int> neighbors(int i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  int degree(int i) const { return static_cast<int>(offsets_[i + 1] - offsets_[i]); }
  bool has_edge(int i, int j) const;

  // y = A x for dense x (both length n).
  void multiply(const double* x, double* y) const;

 private:
  int n_ = 0;
  std::int64_t m_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<int> adj_;
};

struct DegreeProfile {
  std::vector<int> degrees;
  double mean = 0.0;
  int max = 0;
  int min = 0;
};

enum class Indexing { ZeroBased, OneBased };

struct LoadedGraph {
  AdjacencyMatrix graph;
  // original_labels[v] is the label node v carried in the input file
  // (after the one-based shift, if any); nodes are always relabeled 0..n-1
  // in ascending order of original label.
  std::vector<std::int64_t> original_labels;
  AdjacencyMatrix::BuildStats stats;
};

// Text edge lists: one "u v" pair per line, '#' starts a comment, blank lines
// ignored. Throws ParseError with the offending line number, or Error for an
// empty graph.
LoadedGraph load_edge_list(const std::string& path, Indexing indexing = Indexing::ZeroBased);

// Canonical form: sorted unique "u v" lines with u < v, zero-based.
void save_edge_list(const AdjacencyMatrix& a, const std::string& path);
std::string edge_list_string(const AdjacencyMatrix& a);

bool is_connected(const AdjacencyMatrix& a);

struct ComponentResult {
  AdjacencyMatrix graph;
  std::vector<int> old_index;  // old_index[new] = old node id
};

// Subgraph on the largest connected component; ties go to the component
// containing the smallest node id.
ComponentResult largest_component(const AdjacencyMatrix& a);

DegreeProfile degrees(const AdjacencyMatrix& a);

}  // namespace stgof
