#include "stgof/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace stgof {

AdjacencyMatrix AdjacencyMatrix::from_edges(int n, std::span<const std::pair<int, int>> edges,
                                            BuildStats* stats) {
  if (n < 0) throw ContractError("node count must be nonnegative");
  BuildStats local;
  std::vector<std::vector<int>> nbr(n);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) throw ContractError("edge endpoint out of range");
    if (u == v) {
      ++local.self_loops_dropped;
      continue;
    }
    nbr[u].push_back(v);
    nbr[v].push_back(u);
  }
  AdjacencyMatrix a;
  a.n_ = n;
  a.offsets_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    auto& list = nbr[i];
    std::sort(list.begin(), list.end());
    const auto last = std::unique(list.begin(), list.end());
    // each duplicate undirected edge shows up twice in the symmetric lists
    local.duplicate_edges_dropped += (list.end() - last);
    list.erase(last, list.end());
    a.offsets_[i + 1] = a.offsets_[i] + static_cast<std::int64_t>(list.size());
  }
  local.duplicate_edges_dropped /= 2;
  a.adj_.reserve(a.offsets_[n]);
  for (int i = 0; i < n; ++i) a.adj_.insert(a.adj_.end(), nbr[i].begin(), nbr[i].end());
  a.m_ = a.offsets_[n] / 2;
  if (stats) *stats = local;
  return a;
}

bool AdjacencyMatrix::has_edge(int i, int j) const {
  const auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

void AdjacencyMatrix::multiply(const double* x, double* y) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::int64_t k = offsets_[i]; k < offsets_[i + 1]; ++k) s += x[adj_[k]];
    y[i] = s;
  }
}

LoadedGraph load_edge_list(const std::string& path, Indexing indexing) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list: " + path);

  const std::int64_t base = (indexing == Indexing::OneBased) ? 1 : 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::int64_t u, v;
    if (!(ls >> u)) continue;  // blank or comment-only line
    std::string extra;
    if (!(ls >> v) || (ls >> extra)) {
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected two whitespace-separated node tokens");
    }
    if (u < base || v < base) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": node id below indexing base");
    }
    raw.emplace_back(u - base, v - base);
  }
  if (raw.empty()) throw Error("empty graph: no edges in " + path);

  // compact observed labels to 0..n-1 in ascending order
  std::map<std::int64_t, int> remap;
  for (const auto& [u, v] : raw) {
    remap.emplace(u, 0);
    remap.emplace(v, 0);
  }
  LoadedGraph out;
  out.original_labels.reserve(remap.size());
  int next = 0;
  for (auto& [label, id] : remap) {
    id = next++;
    out.original_labels.push_back(label);
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(raw.size());
  for (const auto& [u, v] : raw) edges.emplace_back(remap[u], remap[v]);
  out.graph = AdjacencyMatrix::from_edges(next, edges, &out.stats);
  return out;
}

std::string edge_list_string(const AdjacencyMatrix& a) {
  std::string s;
  for (int i = 0; i < a.node_count(); ++i) {
    for (int j : a.neighbors(i)) {
      if (j <= i) continue;
      s += std::to_string(i);
      s += ' ';
      s += std::to_string(j);
      s += '\n';
    }
  }
  return s;
}

void save_edge_list(const AdjacencyMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write edge list: " + path);
  out << edge_list_string(a);
}

namespace {

// BFS from `start`, returns visited count; comp[v] set to `id` for reached v.
int bfs_mark(const AdjacencyMatrix& a, int start, int id, std::vector<int>& comp) {
  std::vector<int> queue{start};
  comp[start] = id;
  int count = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v : a.neighbors(u)) {
      if (comp[v] < 0) {
        comp[v] = id;
        queue.push_back(v);
        ++count;
      }
    }
  }
  return count;
}

}  // namespace

bool is_connected(const AdjacencyMatrix& a) {
  const int n = a.node_count();
  if (n == 0) return false;
  std::vector<int> comp(n, -1);
  return bfs_mark(a, 0, 0, comp) == n;
}

ComponentResult largest_component(const AdjacencyMatrix& a) {
  const int n = a.node_count();
  if (n < 1) throw ContractError("largest_component: empty graph");
  std::vector<int> comp(n, -1);
  int best_id = -1, best_size = 0;
  int id = 0;
  for (int v = 0; v < n; ++v) {
    if (comp[v] >= 0) continue;
    const int size = bfs_mark(a, v, id, comp);
    // strict > keeps the earliest (smallest minimum node id) on ties
    if (size > best_size) {
      best_size = size;
      best_id = id;
    }
    ++id;
  }

  ComponentResult out;
  out.old_index.reserve(best_size);
  std::vector<int> new_index(n, -1);
  for (int v = 0; v < n; ++v) {
    if (comp[v] == best_id) {
      new_index[v] = static_cast<int>(out.old_index.size());
      out.old_index.push_back(v);
    }
  }
  std::vector<std::pair<int, int>> edges;
  for (int v = 0; v < n; ++v) {
    if (comp[v] != best_id) continue;
    for (int w : a.neighbors(v)) {
      if (w > v) edges.emplace_back(new_index[v], new_index[w]);
    }
  }
  out.graph = AdjacencyMatrix::from_edges(best_size, edges);
  return out;
}

DegreeProfile degrees(const AdjacencyMatrix& a) {
  DegreeProfile p;
  const int n = a.node_count();
  p.degrees.resize(n);
  if (n == 0) return p;
  p.min = a.degree(0);
  for (int i = 0; i < n; ++i) {
    const int d = a.degree(i);
    p.degrees[i] = d;
    p.max = std::max(p.max, d);
    p.min = std::min(p.min, d);
  }
  p.mean = 2.0 * static_cast<double>(a.edge_count()) / n;
  return p;
}

}  // namespace stgof
