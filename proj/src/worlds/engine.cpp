#include <algorithm>
#include <map>
#include <queue>

#include "plx/worlds.hpp"

namespace plx::worlds {

namespace {

struct Branch {
  int selection;
  double weight;
};

// How to walk the worlds for one combination of targets and evidence.
struct Plan {
  std::vector<std::size_t> order;                // group index per position
  std::vector<std::vector<Branch>> branches;     // per position
  std::vector<double> totals;                    // per position
  std::vector<int> guard_ready;                  // last position the guard depends on, -2 if unguarded
  std::vector<std::vector<std::pair<AtomId, bool>>> checks;  // evidence settled at each position
  std::vector<std::pair<AtomId, bool>> root_checks;
  std::vector<std::size_t> rules;                // rule indices needed for the relevant atoms
  std::vector<char> facts;
};

std::map<std::string, const Observation*> merge_evidence(const GroundProgram& gp,
                                                        std::span<const Observation> extra) {
  std::map<std::string, const Observation*> merged;
  auto add = [&](const Observation& o) {
    auto [it, fresh] = merged.emplace(o.atom.to_string(), &o);
    if (!fresh && it->second->value != o.value) {
      throw InferenceError(InferenceError::Kind::InconsistentEvidence,
                           "evidence on " + o.atom.to_string() + " is both true and false");
    }
  };
  for (const auto& o : gp.evidence()) add(o);
  for (const auto& o : extra) add(o);
  return merged;
}

Plan make_plan(const GroundProgram& gp, std::span<const AtomId> targets,
               std::span<const Observation> evidence, std::size_t cap, bool exhaustive) {
  Plan plan;
  plan.facts.assign(gp.atom_count(), 0);
  std::vector<std::pair<AtomId, bool>> checked;
  for (const auto& [text, obs] : merge_evidence(gp, evidence)) {
    auto id = gp.find(obs->atom);
    if (!id) continue;
    const bool value = obs->value;
    bool defined = !gp.defining_rules(*id).empty() || !gp.defining_groups(*id).empty();
    if (defined) {
      checked.emplace_back(*id, value);
    } else if (value) {
      plan.facts[*id] = 1;
    }
  }

  std::vector<AtomId> roots(targets.begin(), targets.end());
  for (const auto& [id, v] : checked) roots.push_back(id);
  std::vector<bool> relevant = exhaustive ? std::vector<bool>(gp.atom_count(), true)
                                          : gp.ancestors(roots);

  std::vector<AtomId> evidence_atoms;
  for (const auto& [id, v] : checked) evidence_atoms.push_back(id);
  std::vector<bool> evidence_cone = gp.ancestors(evidence_atoms);

  const auto& groups = gp.groups();
  std::vector<std::size_t> chosen;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    bool any = std::any_of(groups[g].outcomes.begin(), groups[g].outcomes.end(),
                           [&](const Outcome& o) { return relevant[o.atom]; });
    if (any) chosen.push_back(g);
  }
  if (chosen.size() > cap) {
    throw InferenceError(InferenceError::Kind::CapExceeded,
                         "query needs " + std::to_string(chosen.size()) +
                             " choice groups, more than the enumeration cap of " +
                             std::to_string(cap));
  }

  // Which chosen groups can change the truth of a set of atoms.
  std::vector<std::vector<std::size_t>> guard_deps(groups.size());
  std::vector<std::vector<std::size_t>> dependents(groups.size());
  std::vector<std::size_t> indegree(groups.size(), 0);
  auto cone_groups = [&](const std::vector<bool>& atoms) {
    std::vector<std::size_t> out;
    for (std::size_t g : chosen) {
      for (const Outcome& o : groups[g].outcomes) {
        if (atoms[o.atom]) {
          out.push_back(g);
          break;
        }
      }
    }
    return out;
  };
  for (std::size_t g : chosen) {
    if (groups[g].guard.empty()) continue;
    guard_deps[g] = cone_groups(gp.ancestors(groups[g].guard));
    for (std::size_t d : guard_deps[g]) {
      dependents[d].push_back(g);
      ++indegree[g];
    }
  }

  // Groups feeding the evidence go first so that inconsistent branches are cut early.
  auto key = [&](std::size_t g) {
    bool feeds_evidence = std::any_of(groups[g].outcomes.begin(), groups[g].outcomes.end(),
                                      [&](const Outcome& o) { return evidence_cone[o.atom]; });
    return std::make_pair(feeds_evidence ? 0 : 1, g);
  };
  std::priority_queue<std::pair<int, std::size_t>, std::vector<std::pair<int, std::size_t>>,
                      std::greater<>>
      ready;
  for (std::size_t g : chosen) {
    if (indegree[g] == 0) ready.push(key(g));
  }
  std::vector<int> position(groups.size(), -1);
  while (!ready.empty()) {
    std::size_t g = ready.top().second;
    ready.pop();
    position[g] = static_cast<int>(plan.order.size());
    plan.order.push_back(g);
    for (std::size_t u : dependents[g]) {
      if (--indegree[u] == 0) ready.push(key(u));
    }
  }
  if (plan.order.size() != chosen.size()) {
    throw GroundingError("cyclic dependency between choice groups");
  }

  const std::size_t n = plan.order.size();
  plan.branches.resize(n);
  plan.totals.resize(n);
  plan.guard_ready.assign(n, -2);
  plan.checks.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const ChoiceGroup& grp = groups[plan.order[p]];
    double other = grp.residual;
    bool merged = false;
    for (std::size_t i = 0; i < grp.outcomes.size(); ++i) {
      const Outcome& o = grp.outcomes[i];
      if (relevant[o.atom]) {
        if (o.weight > 0.0) plan.branches[p].push_back({static_cast<int>(i), o.weight});
      } else {
        other += o.weight;
        merged = true;
      }
    }
    if (other > 0.0) {
      plan.branches[p].push_back({merged ? World::kOther : World::kResidual, other});
    }
    plan.totals[p] = grp.total();
    if (!grp.guard.empty()) {
      int last = -1;
      for (std::size_t d : guard_deps[plan.order[p]]) last = std::max(last, position[d]);
      plan.guard_ready[p] = last;
    }
  }

  for (const auto& [id, value] : checked) {
    std::vector<bool> cone = gp.ancestors(std::span<const AtomId>(&id, 1));
    int last = -1;
    for (std::size_t g : cone_groups(cone)) last = std::max(last, position[g]);
    if (last < 0) {
      plan.root_checks.emplace_back(id, value);
    } else {
      plan.checks[last].emplace_back(id, value);
    }
  }

  for (std::size_t r = 0; r < gp.rules().size(); ++r) {
    if (relevant[gp.rules()[r].head]) plan.rules.push_back(r);
  }
  return plan;
}

class Walker {
 public:
  Walker(const GroundProgram& gp, const Plan& plan, bool want_model, const WorldVisitor& visit)
      : gp_(gp), plan_(plan), want_model_(want_model), visit_(visit) {
    const std::size_t n = plan.order.size();
    world_.selection.assign(gp.groups().size(), World::kMarginalized);
    guard_models_.resize(n);
    check_models_.resize(n);
  }

  void run() {
    if (!plan_.root_checks.empty()) {
      build_model(0, root_model_);
      if (!satisfied(plan_.root_checks, root_model_)) return;
      descend(0, 1.0, &root_model_, 0);
    } else {
      descend(0, 1.0, nullptr, 0);
    }
  }

 private:
  // Model using the selections made at positions [0, upto).
  void build_model(std::size_t upto, std::vector<char>& model) const {
    model = plan_.facts;
    for (std::size_t p = 0; p < upto; ++p) {
      std::size_t g = plan_.order[p];
      int s = world_.selection[g];
      if (s >= 0) model[gp_.groups()[g].outcomes[static_cast<std::size_t>(s)].atom] = 1;
    }
    const auto& rules = gp_.rules();
    for (std::size_t r : plan_.rules) {
      const GroundRule& rule = rules[r];
      if (model[rule.head]) continue;
      bool fire = true;
      for (AtomId b : rule.body) {
        if (!model[b]) {
          fire = false;
          break;
        }
      }
      if (fire) model[rule.head] = 1;
    }
  }

  static bool satisfied(const std::vector<std::pair<AtomId, bool>>& checks,
                        const std::vector<char>& model) {
    for (const auto& [id, value] : checks) {
      if (static_cast<bool>(model[id]) != value) return false;
    }
    return true;
  }

  void descend(std::size_t pos, double weight, const std::vector<char>* model,
               std::size_t model_upto) {
    const std::size_t n = plan_.order.size();
    if (pos == n) {
      world_.weight = weight;
      if (want_model_ && (model == nullptr || model_upto < n)) {
        build_model(n, leaf_model_);
        model = &leaf_model_;
      }
      visit_(world_, model ? *model : empty_);
      return;
    }
    const std::size_t g = plan_.order[pos];
    if (plan_.guard_ready[pos] != -2) {
      if (model == nullptr || static_cast<int>(model_upto) <= plan_.guard_ready[pos]) {
        build_model(pos, guard_models_[pos]);
        model = &guard_models_[pos];
        model_upto = pos;
      }
      bool active = true;
      for (AtomId a : gp_.groups()[g].guard) {
        if (!(*model)[a]) {
          active = false;
          break;
        }
      }
      if (!active) {
        world_.selection[g] = World::kInactive;
        settle(pos, weight * plan_.totals[pos], model, model_upto);
        world_.selection[g] = World::kMarginalized;
        return;
      }
    }
    for (const Branch& b : plan_.branches[pos]) {
      world_.selection[g] = b.selection;
      settle(pos, weight * b.weight, model, model_upto);
    }
    world_.selection[g] = World::kMarginalized;
  }

  void settle(std::size_t pos, double weight, const std::vector<char>* model,
              std::size_t model_upto) {
    if (plan_.checks[pos].empty()) {
      descend(pos + 1, weight, model, model_upto);
      return;
    }
    build_model(pos + 1, check_models_[pos]);
    if (!satisfied(plan_.checks[pos], check_models_[pos])) return;
    descend(pos + 1, weight, &check_models_[pos], pos + 1);
  }

  const GroundProgram& gp_;
  const Plan& plan_;
  bool want_model_;
  const WorldVisitor& visit_;
  World world_;
  std::vector<std::vector<char>> guard_models_;
  std::vector<std::vector<char>> check_models_;
  std::vector<char> root_model_;
  std::vector<char> leaf_model_;
  const std::vector<char> empty_;
};

std::vector<char> least_model(const GroundProgram& gp, const std::vector<int>& selection) {
  std::vector<char> model(gp.atom_count(), 0);
  for (std::size_t g = 0; g < gp.groups().size() && g < selection.size(); ++g) {
    if (selection[g] >= 0) {
      model[gp.groups()[g].outcomes[static_cast<std::size_t>(selection[g])].atom] = 1;
    }
  }
  for (const GroundRule& r : gp.rules()) {
    if (model[r.head]) continue;
    if (std::all_of(r.body.begin(), r.body.end(), [&](AtomId b) { return model[b] != 0; })) {
      model[r.head] = 1;
    }
  }
  return model;
}

double joint_probability(const GroundProgram& gp, std::optional<AtomId> target,
                         std::span<const Observation> evidence, const InferenceOptions& options) {
  std::vector<AtomId> targets;
  if (target) targets.push_back(*target);
  double sum = 0.0;
  enumerate(gp, targets, evidence, options, [&](const World& w, const std::vector<char>& m) {
    if (!target || m[*target]) sum += w.weight;
  });
  return sum;
}

double require_evidence(const GroundProgram& gp, std::span<const Observation> evidence,
                        const InferenceOptions& options) {
  double z = joint_probability(gp, std::nullopt, evidence, options);
  if (!(z > 0.0)) {
    throw InferenceError(InferenceError::Kind::InconsistentEvidence,
                         "the evidence has probability zero");
  }
  return z;
}

}  // namespace

void enumerate(const GroundProgram& program, std::span<const AtomId> targets,
               std::span<const Observation> evidence, const InferenceOptions& options,
               const WorldVisitor& visit) {
  Plan plan = make_plan(program, targets, evidence, options.enumeration_cap, false);
  Walker(program, plan, !targets.empty(), visit).run();
}

bool holds(const World& world, const GroundProgram& program, const GroundAtom& atom) {
  auto id = program.find(atom);
  if (!id) return false;
  return least_model(program, world.selection)[*id] != 0;
}

double evidence_probability(const GroundProgram& program, std::span<const Observation> evidence,
                            const InferenceOptions& options) {
  return joint_probability(program, std::nullopt, evidence, options);
}

double query_probability(const GroundProgram& program, const GroundAtom& query,
                         std::span<const Observation> evidence, const InferenceOptions& options) {
  double z = require_evidence(program, evidence, options);
  auto id = program.find(query);
  if (!id) return 0.0;
  return std::clamp(joint_probability(program, id, evidence, options) / z, 0.0, 1.0);
}

Posterior posterior(const GroundProgram& program, std::span<const GroundAtom> labels,
                    std::span<const Observation> evidence, const InferenceOptions& options) {
  Posterior out;
  out.evidence_probability = require_evidence(program, evidence, options);
  for (const GroundAtom& label : labels) {
    out.labels.push_back(label);
    auto id = program.find(label);
    double p = id ? joint_probability(program, id, evidence, options) / out.evidence_probability
                  : 0.0;
    out.probabilities.push_back(std::clamp(p, 0.0, 1.0));
  }
  return out;
}

std::vector<double> Posterior::normalized() const {
  double sum = 0.0;
  for (double p : probabilities) sum += p;
  if (!(sum > 0.0)) {
    throw InferenceError(InferenceError::Kind::NoSupport, "no label has positive probability");
  }
  std::vector<double> out;
  for (double p : probabilities) out.push_back(p / sum);
  return out;
}

std::size_t Posterior::argmax() const {
  if (probabilities.empty()) throw InferenceError(InferenceError::Kind::NoSupport, "no labels");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i) {
    if (probabilities[i] > probabilities[best] ||
        (probabilities[i] == probabilities[best] &&
         labels[i].to_string() < labels[best].to_string())) {
      best = i;
    }
  }
  return best;
}

std::vector<Explanation> explain(const GroundProgram& program, const GroundAtom& label,
                                 std::span<const Observation> evidence, std::size_t top_n,
                                 const InferenceOptions& options) {
  double z = require_evidence(program, evidence, options);
  auto id = program.find(label);
  std::vector<Explanation> best;
  if (!id || top_n == 0) return best;
  AtomId target = *id;
  std::vector<bool> upstream = program.ancestors(std::span<const AtomId>(&target, 1));

  enumerate(program, std::span<const AtomId>(&target, 1), evidence, options,
            [&](const World& w, const std::vector<char>& model) {
              if (!model[target]) return;
              if (best.size() == top_n && w.weight <= best.back().world.weight) return;
              Explanation e;
              e.world = w;
              e.probability = w.weight / z;
              for (const GroundRule& r : program.rules()) {
                if (!upstream[r.head] || !model[r.head]) continue;
                if (std::all_of(r.body.begin(), r.body.end(),
                                [&](AtomId b) { return model[b] != 0; })) {
                  e.fired_rules.push_back(r.text);
                }
              }
              auto at = std::upper_bound(best.begin(), best.end(), w.weight,
                                         [](double x, const Explanation& y) {
                                           return x > y.world.weight;
                                         });
              best.insert(at, std::move(e));
              if (best.size() > top_n) best.pop_back();
            });

  for (Explanation& e : best) {
    for (std::size_t g = 0; g < program.groups().size(); ++g) {
      int s = e.world.selection[g];
      if (s < 0) continue;
      const ChoiceGroup& grp = program.groups()[g];
      auto i = static_cast<std::size_t>(s);
      std::string text = rulelang::format_number(grp.outcomes[i].weight) +
                         "::" + program.atom(grp.heads[i]).to_string();
      if (!grp.guard.empty()) {
        text += " given ";
        for (std::size_t k = 0; k < grp.guard.size(); ++k) {
          if (k) text += ", ";
          text += program.atom(grp.guard[k]).to_string();
        }
      }
      e.choices.push_back(text);
    }
  }
  return best;
}

double total_weight(const GroundProgram& program, const InferenceOptions& options) {
  Plan plan = make_plan(program, {}, {}, options.enumeration_cap, true);
  double sum = 0.0;
  Walker(program, plan, false, [&](const World& w, const std::vector<char>&) {
    sum += w.weight;
  }).run();
  return sum;
}

}  // namespace plx::worlds
