#pragma once

// Depth-limited CART over one-hot finding indicators, used as a baseline.

#include <array>
#include <bitset>
#include <span>
#include <string>
#include <vector>

#include "plx/casegen.hpp"
#include "plx/toxkb.hpp"

namespace plx::dtree {

using FeatureVector = std::bitset<toxkb::kIndicatorCount>;
using ClassCounts = std::array<std::size_t, toxkb::kToxidromeCount>;

FeatureVector encode(std::span<const toxkb::Finding> findings);

struct Sample {
  FeatureVector features;
  toxkb::Toxidrome label;
};

std::vector<Sample> samples_from(const std::vector<casegen::Case>& cases);

// Gini impurity 1 - sum p_i^2. Throws std::invalid_argument on an empty node.
double gini(std::span<const std::size_t> counts);

struct Node {
  bool leaf = true;
  std::size_t feature = 0;  // split on this indicator: absent goes left, present right
  int left = -1;
  int right = -1;
  toxkb::Toxidrome label{};
  ClassCounts counts{};
  int depth = 0;
};

class Tree {
 public:
  toxkb::Toxidrome predict(const FeatureVector& x) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;
  std::string to_text() const;

 private:
  friend Tree fit(std::span<const Sample>, int);
  std::vector<Node> nodes_;
};

// Greedy CART with Gini. Ties between splits go to the lowest indicator
// index; ties between leaf classes go to the lexicographically first name.
Tree fit(std::span<const Sample> samples, int max_depth = 3);

}  // namespace plx::dtree
