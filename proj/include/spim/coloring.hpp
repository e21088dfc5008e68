#pragma once

// DSATUR greedy coloring. Color blocks are independent sets, so all p-bits of
// one color can be updated simultaneously while remaining a valid Gibbs
// chain. Clamped nodes are colored (the graph is instance-independent) but
// excluded from the update blocks.

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "spim/model.hpp"

namespace spim {

struct Coloring {
  std::vector<int> colors;               // node -> color id
  int num_colors = 0;
  std::vector<std::vector<int>> blocks;  // color -> unclamped nodes, ascending
};

/// Greedy DSATUR: repeatedly color the node with the most distinctly colored
/// neighbors (ties: higher degree, then lower index), using the smallest
/// feasible color. Deterministic for a given model.
inline Coloring dsatur(const IsingModel& model) {
  const int n = model.n;
  Coloring out;
  out.colors.assign(static_cast<size_t>(n), -1);
  if (n == 0) return out;

  std::vector<std::set<int>> neighbor_colors(static_cast<size_t>(n));
  std::vector<int> degree(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) degree[static_cast<size_t>(i)] = model.degree(i);

  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (out.colors[static_cast<size_t>(i)] >= 0) continue;
      if (pick < 0) {
        pick = i;
        continue;
      }
      const size_t si = neighbor_colors[static_cast<size_t>(i)].size();
      const size_t sp = neighbor_colors[static_cast<size_t>(pick)].size();
      if (si > sp ||
          (si == sp && degree[static_cast<size_t>(i)] > degree[static_cast<size_t>(pick)]))
        pick = i;
    }
    int color = 0;
    while (neighbor_colors[static_cast<size_t>(pick)].count(color)) ++color;
    out.colors[static_cast<size_t>(pick)] = color;
    out.num_colors = std::max(out.num_colors, color + 1);
    for (const auto& [j, w] : model.adj[static_cast<size_t>(pick)])
      neighbor_colors[static_cast<size_t>(j)].insert(color);
  }

  out.blocks.assign(static_cast<size_t>(out.num_colors), {});
  for (int i = 0; i < n; ++i)
    if (!model.is_clamped(i)) out.blocks[static_cast<size_t>(out.colors[static_cast<size_t>(i)])].push_back(i);
  return out;
}

/// True iff no edge joins two nodes of the same color.
inline bool validate(const IsingModel& model, const Coloring& coloring) {
  if (static_cast<int>(coloring.colors.size()) != model.n) return false;
  for (int i = 0; i < model.n; ++i)
    for (const auto& [j, w] : model.adj[static_cast<size_t>(i)])
      if (coloring.colors[static_cast<size_t>(i)] == coloring.colors[static_cast<size_t>(j)]) return false;
  return true;
}

/// Graph density rho = 2|E| / (|V|^2 - |V|); 1 for a complete graph.
inline double density(const IsingModel& model) {
  if (model.n < 2) throw std::invalid_argument("density needs at least two nodes");
  const double nv = model.n;
  return 2.0 * static_cast<double>(model.edge_count()) / (nv * nv - nv);
}

/// Density ceiling of a graph whose nodes have at most k neighbors.
inline double density_max(int k, int n) {
  if (n < 2) throw std::invalid_argument("density_max needs at least two nodes");
  return static_cast<double>(k) / static_cast<double>(n - 1);
}

/// Model JSON with the coloring embedded as a "coloring" array (node -> color).
inline nlohmann::json model_to_json(const IsingModel& model, const Coloring& coloring) {
  nlohmann::json j = model_to_json(model);
  j["coloring"] = coloring.colors;
  return j;
}

inline Coloring coloring_from_model_json(const nlohmann::json& j, const IsingModel& model) {
  Coloring out;
  out.colors = j.at("coloring").get<std::vector<int>>();
  if (static_cast<int>(out.colors.size()) != model.n)
    throw std::invalid_argument("embedded coloring does not cover the model");
  for (int c : out.colors) out.num_colors = std::max(out.num_colors, c + 1);
  out.blocks.assign(static_cast<size_t>(out.num_colors), {});
  for (int i = 0; i < model.n; ++i)
    if (!model.is_clamped(i)) out.blocks[static_cast<size_t>(out.colors[static_cast<size_t>(i)])].push_back(i);
  return out;
}

inline void write_coloring_csv(const Coloring& coloring, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "node,color\n";
  for (size_t i = 0; i < coloring.colors.size(); ++i) out << i << ',' << coloring.colors[i] << '\n';
}

inline Coloring read_coloring_csv(const std::string& path, const IsingModel& model) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Coloring out;
  out.colors.assign(static_cast<size_t>(model.n), -1);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const int node = std::stoi(line.substr(0, comma));
    const int color = std::stoi(line.substr(comma + 1));
    model.check_node(node);
    out.colors[static_cast<size_t>(node)] = color;
    out.num_colors = std::max(out.num_colors, color + 1);
  }
  for (int col : out.colors)
    if (col < 0) throw std::runtime_error("coloring CSV does not cover all nodes");
  out.blocks.assign(static_cast<size_t>(out.num_colors), {});
  for (int i = 0; i < model.n; ++i)
    if (!model.is_clamped(i)) out.blocks[static_cast<size_t>(out.colors[static_cast<size_t>(i)])].push_back(i);
  return out;
}

}  // namespace spim
