#pragma once

// Naive recursive DF-QuAD over an index-based tree. Written from the
// definitions alone; shares no code with the library.

#include <cmath>
#include <vector>

namespace oracle {

struct Node {
  double base = 0.5;
  std::vector<int> attackers;
  std::vector<int> supporters;
};

inline double aggregate(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double keep = 1.0;
  for (double v : values) keep *= 1.0 - v;
  return 1.0 - keep;
}

inline double combine(double base, double attack, double support) {
  if (attack == support) return base;
  if (attack > support) return base - base * std::fabs(support - attack);
  return base + (1.0 - base) * std::fabs(support - attack);
}

inline double strength(const std::vector<Node>& tree, int node) {
  std::vector<double> att, sup;
  for (int a : tree[node].attackers) att.push_back(strength(tree, a));
  for (int s : tree[node].supporters) sup.push_back(strength(tree, s));
  return combine(tree[node].base, aggregate(att), aggregate(sup));
}

}  // namespace oracle
