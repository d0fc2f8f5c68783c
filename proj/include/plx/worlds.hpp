#pragma once

// Grounding and exact possible-world inference.
//
// Each annotated clause instance becomes a choice group: at most one of its
// outcomes is selected, with the remaining mass left to a residual "none".
// Groups are independent. A world fixes one choice per group; its atoms are
// the least model of the selected outcomes under the deterministic rules.
// Conditional groups are rewritten as an unconditional group over fresh
// internal atoms plus guarded rules, so the guard decides whether the
// selected outcome has any effect.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "plx/rulelang.hpp"

namespace plx::worlds {

using AtomId = std::uint32_t;

struct GroundAtom {
  std::string predicate;
  std::vector<std::string> args;

  bool operator==(const GroundAtom&) const = default;
  std::string to_string() const;
};

// Parses text such as "hasToxidrome(pt,opioid)".
GroundAtom parse_ground_atom(std::string_view text);

struct Observation {
  GroundAtom atom;
  bool value = true;
};

struct Outcome {
  AtomId atom;
  double weight;
};

struct ChoiceGroup {
  std::vector<Outcome> outcomes;
  double residual = 0.0;
  std::vector<AtomId> guard;  // empty for unconditional groups
  std::vector<AtomId> heads;  // user-visible head atom per outcome
  std::size_t clause = 0;     // index of the source clause
  double total() const;
};

struct GroundRule {
  AtomId head;
  std::vector<AtomId> body;
  std::string text;
};

class GroundProgram {
 public:
  const std::vector<ChoiceGroup>& groups() const { return groups_; }
  // Rules in dependency order: a rule only reads heads of earlier rules.
  const std::vector<GroundRule>& rules() const { return rules_; }
  const std::vector<Observation>& evidence() const { return evidence_; }
  const std::vector<GroundAtom>& queries() const { return queries_; }

  std::size_t atom_count() const { return atoms_.size(); }
  const GroundAtom& atom(AtomId id) const { return atoms_[id]; }
  std::optional<AtomId> find(const GroundAtom& atom) const;
  bool is_internal(AtomId id) const { return internal_[id]; }

  // Atoms whose truth can influence `id` (including `id`).
  std::vector<bool> ancestors(std::span<const AtomId> roots) const;
  const std::vector<std::size_t>& defining_rules(AtomId id) const { return defining_rules_[id]; }
  const std::vector<std::size_t>& defining_groups(AtomId id) const {
    return defining_groups_[id];
  }

 private:
  friend class Grounder;
  AtomId intern(const GroundAtom& atom, bool internal);
  void finish();

  std::vector<GroundAtom> atoms_;
  std::vector<bool> internal_;
  std::unordered_map<std::string, AtomId> index_;
  std::vector<ChoiceGroup> groups_;
  std::vector<GroundRule> rules_;
  std::vector<Observation> evidence_;
  std::vector<GroundAtom> queries_;
  std::vector<std::vector<std::size_t>> defining_rules_;
  std::vector<std::vector<std::size_t>> defining_groups_;
};

// Instantiates every clause once per assignment of individuals to its
// variables. Fails on probability sums above 1 and on cyclic rules.
GroundProgram ground(const rulelang::Program& program, std::span<const std::string> individuals);

struct InferenceOptions {
  // Upper bound on the number of choice groups that must be branched on.
  std::size_t enumeration_cap = 20;
};

struct World {
  static constexpr int kResidual = -1;      // group selected nothing
  static constexpr int kInactive = -2;      // guard false, selection irrelevant
  static constexpr int kMarginalized = -3;  // group cannot affect the query
  static constexpr int kOther = -4;         // residual or an outcome irrelevant to the query
  std::vector<int> selection;               // per group: outcome index or a code above
  double weight = 0.0;
};

// Truth of `atom` in the least model of the world. Unknown atoms are false.
bool holds(const World& world, const GroundProgram& program, const GroundAtom& atom);

// Probability of `query` given the program's evidence plus `evidence`.
// Evidence on atoms that no clause defines is taken as asserted fact.
double query_probability(const GroundProgram& program, const GroundAtom& query,
                         std::span<const Observation> evidence = {},
                         const InferenceOptions& options = {});

struct Posterior {
  std::vector<GroundAtom> labels;
  std::vector<double> probabilities;  // P(label | evidence), same order as labels
  double evidence_probability = 0.0;

  std::vector<double> normalized() const;
  // Index of the most probable label; ties go to the lexicographically smallest.
  std::size_t argmax() const;
};

Posterior posterior(const GroundProgram& program, std::span<const GroundAtom> labels,
                    std::span<const Observation> evidence = {},
                    const InferenceOptions& options = {});

double evidence_probability(const GroundProgram& program,
                            std::span<const Observation> evidence = {},
                            const InferenceOptions& options = {});

struct Explanation {
  World world;
  double probability = 0.0;  // world weight divided by P(evidence)
  std::vector<std::string> choices;
  std::vector<std::string> fired_rules;
};

// The heaviest worlds in which `label` holds and the evidence is satisfied.
std::vector<Explanation> explain(const GroundProgram& program, const GroundAtom& label,
                                 std::span<const Observation> evidence, std::size_t top_n,
                                 const InferenceOptions& options = {});

// Sum of the weights of all worlds, enumerating every group.
double total_weight(const GroundProgram& program, const InferenceOptions& options = {});

using WorldVisitor = std::function<void(const World&, const std::vector<char>& model)>;

// Visits every world class consistent with the evidence, branching on groups
// relevant to `targets` and the evidence. The model passed to the visitor is
// exact for `targets`.
void enumerate(const GroundProgram& program, std::span<const AtomId> targets,
               std::span<const Observation> evidence, const InferenceOptions& options,
               const WorldVisitor& visit);

}  // namespace plx::worlds
