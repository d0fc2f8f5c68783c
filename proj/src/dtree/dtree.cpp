#include <numeric>
#include <stdexcept>

#include "plx/dtree.hpp"

namespace plx::dtree {

using toxkb::Toxidrome;

namespace {

constexpr double kMinGain = 1e-12;

double weighted_impurity(const ClassCounts& c, std::size_t n) {
  if (n == 0) return 0.0;
  double sq = 0.0;
  for (std::size_t x : c) sq += static_cast<double>(x) * static_cast<double>(x);
  return static_cast<double>(n) - sq / static_cast<double>(n);
}

Toxidrome majority(const ClassCounts& c) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] > c[best]) best = i;
  }
  return toxkb::kToxidromes[best];
}

void grow(std::vector<Node>& nodes, std::span<const Sample> all, std::vector<std::size_t> idx,
          int node, int max_depth) {
  ClassCounts counts{};
  for (std::size_t i : idx) ++counts[static_cast<std::size_t>(all[i].label)];
  nodes[node].counts = counts;
  nodes[node].label = majority(counts);
  const std::size_t n = idx.size();
  std::size_t classes = 0;
  for (std::size_t c : counts) classes += c > 0;
  if (nodes[node].depth >= max_depth || classes <= 1) return;

  const double parent = weighted_impurity(counts, n);
  double best_gain = kMinGain;
  int best_feature = -1;
  for (std::size_t f = 0; f < toxkb::kIndicatorCount; ++f) {
    ClassCounts right{};
    std::size_t nr = 0;
    for (std::size_t i : idx) {
      if (all[i].features[f]) {
        ++right[static_cast<std::size_t>(all[i].label)];
        ++nr;
      }
    }
    if (nr == 0 || nr == n) continue;
    ClassCounts left{};
    for (std::size_t k = 0; k < left.size(); ++k) left[k] = counts[k] - right[k];
    double gain = (parent - weighted_impurity(left, n - nr) - weighted_impurity(right, nr)) /
                  static_cast<double>(n);
    if (gain > best_gain + kMinGain) {
      best_gain = gain;
      best_feature = static_cast<int>(f);
    }
  }
  if (best_feature < 0) return;

  std::vector<std::size_t> li, ri;
  for (std::size_t i : idx) (all[i].features[static_cast<std::size_t>(best_feature)] ? ri : li).push_back(i);
  const int depth = nodes[node].depth + 1;
  const int l = static_cast<int>(nodes.size());
  nodes.push_back({});
  nodes.back().depth = depth;
  const int r = static_cast<int>(nodes.size());
  nodes.push_back({});
  nodes.back().depth = depth;
  nodes[node].leaf = false;
  nodes[node].feature = static_cast<std::size_t>(best_feature);
  nodes[node].left = l;
  nodes[node].right = r;
  grow(nodes, all, std::move(li), l, max_depth);
  grow(nodes, all, std::move(ri), r, max_depth);
}

void dump(const std::vector<Node>& nodes, int at, const std::string& indent, std::string& out) {
  const Node& n = nodes[at];
  if (n.leaf) {
    out += indent + "-> " + std::string(toxkb::name(n.label)) + " [";
    for (std::size_t i = 0; i < n.counts.size(); ++i) out += (i ? "," : "") + std::to_string(n.counts[i]);
    out += "]\n";
    return;
  }
  auto [sign, value] = toxkb::indicator(n.feature);
  std::string test = std::string(toxkb::name(sign)) + "=" + std::string(toxkb::name(value));
  out += indent + "if not " + test + ":\n";
  dump(nodes, n.left, indent + "  ", out);
  out += indent + "if " + test + ":\n";
  dump(nodes, n.right, indent + "  ", out);
}

}  // namespace

FeatureVector encode(std::span<const toxkb::Finding> findings) {
  FeatureVector x;
  for (const auto& f : findings) x.set(toxkb::indicator_index(f.sign, f.value));
  return x;
}

std::vector<Sample> samples_from(const std::vector<casegen::Case>& cases) {
  std::vector<Sample> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back({encode(c.findings), c.intended});
  return out;
}

double gini(std::span<const std::size_t> counts) {
  std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (n == 0) throw std::invalid_argument("gini of an empty node");
  double sq = 0.0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(n);
    sq += p * p;
  }
  return 1.0 - sq;
}

Tree fit(std::span<const Sample> samples, int max_depth) {
  if (samples.empty()) throw std::invalid_argument("cannot fit a tree on no samples");
  if (max_depth < 0) throw std::invalid_argument("max_depth must be non-negative");
  Tree t;
  t.nodes_.push_back({});
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  grow(t.nodes_, samples, std::move(idx), 0, max_depth);
  return t;
}

Toxidrome Tree::predict(const FeatureVector& x) const {
  int at = 0;
  while (!nodes_[at].leaf) at = x[nodes_[at].feature] ? nodes_[at].right : nodes_[at].left;
  return nodes_[at].label;
}

int Tree::depth() const {
  int d = 0;
  for (const Node& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::string Tree::to_text() const {
  std::string out;
  dump(nodes_, 0, "", out);
  return out;
}

}  // namespace plx::dtree
