#pragma once

#include <string>
#include <vector>

#include "rxt/partition.hpp"

namespace rxt {

// Rooted tree whose vertices are the non-empty blocks of a hierarchy on [n].
// Stored as nodes; leaves carry labels 1..n.
class GrownTree {
 public:
  struct Node {
    int parent = -1;
    std::vector<int> children;
    int label = 0;  // > 0 on leaves
  };

  GrownTree() = default;
  static GrownTree single_leaf();
  static GrownTree cherry();
  static GrownTree star(int n);
  static GrownTree from_hierarchy(const Hierarchy& h);

  // Builder interface; parent = -1 creates the root.
  int add_internal(int parent);
  int add_leaf(int parent, int label);
  // Checks labels are exactly 1..n and internal vertices have >= 2 children.
  void finalize();

  int n() const { return static_cast<int>(leaf_.size()); }
  int root() const { return root_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int v) const { return nodes_[v]; }
  std::vector<Node>& nodes() { return nodes_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int leaf_node(int label) const;
  void set_root(int v) { root_ = v; }
  // Rebuilds the label index after direct node edits.
  void reindex();

  Hierarchy to_hierarchy() const;
  // Leaf-label set of every node, indexed by node.
  std::vector<Block> blocks() const;
  // "(1,(2,3));" with children ordered by least label.
  std::string newick() const;
  // Delabelled shape in canonical form.
  std::string shape_key() const;
  // Number of nodes on the path from the root to each node, indexed by node.
  std::vector<int> node_depths() const;
  int height() const;
  std::vector<int> leaf_counts() const;

 private:
  std::vector<Node> nodes_;
  std::vector<int> leaf_;  // label - 1 -> node
  int root_ = -1;
};

// Rooted tree with edge lengths. Vertex 0 is the root; length[v] is the
// length of the edge from v to its parent.
class MetricTree {
 public:
  struct Vertex {
    int parent = -1;
    double length = 0.0;
    int label = 0;  // > 0 on labelled leaves
    std::vector<int> children;
  };

  MetricTree();
  int add_vertex(int parent, double length, int label = 0);

  int size() const { return static_cast<int>(vertices_.size()); }
  const Vertex& vertex(int v) const { return vertices_[v]; }
  std::vector<Vertex>& vertices() { return vertices_; }
  const std::vector<Vertex>& vertices() const { return vertices_; }
  int leaf_count() const;
  double total_length() const;
  double height() const;
  std::vector<double> root_distances() const;
  // Distances between all vertices.
  std::vector<std::vector<double>> distance_matrix() const;
  MetricTree scaled(double factor) const;
  // "((1:1,2:1):2);" with children ordered by least label below.
  std::string newick() const;

 private:
  std::vector<Vertex> vertices_;
};

}  // namespace rxt
