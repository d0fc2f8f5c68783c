#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "plx/worlds.hpp"

namespace plx::worlds {

using rulelang::Atom;
using rulelang::Binding;
using rulelang::Clause;
using rulelang::Literal;
using rulelang::ProbExpr;
using rulelang::Program;

namespace {
constexpr double kSumTolerance = 1e-9;
constexpr std::size_t kMaxInstances = 1'000'000;
const std::string kChoicePredicate = "__choice";
}  // namespace

std::string GroundAtom::to_string() const {
  std::string out = predicate;
  if (args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ',';
    out += args[i];
  }
  return out + ')';
}

GroundAtom parse_ground_atom(std::string_view text) {
  auto program = rulelang::parse_program(std::string(text) + ".");
  if (program.clauses.size() != 1 || !program.clauses[0].deterministic ||
      !program.clauses[0].body.empty()) {
    throw SemanticError("not a ground atom: " + std::string(text));
  }
  const Atom& a = program.clauses[0].head[0].atom;
  if (!a.is_ground()) throw SemanticError("not a ground atom: " + std::string(text));
  GroundAtom out{a.predicate, {}};
  for (const auto& t : a.args) out.args.push_back(t.name);
  return out;
}

double ChoiceGroup::total() const {
  double sum = residual;
  for (const Outcome& o : outcomes) sum += o.weight;
  return sum;
}

std::optional<AtomId> GroundProgram::find(const GroundAtom& atom) const {
  auto it = index_.find(atom.to_string());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AtomId GroundProgram::intern(const GroundAtom& atom, bool internal) {
  auto [it, fresh] = index_.emplace(atom.to_string(), static_cast<AtomId>(atoms_.size()));
  if (fresh) {
    atoms_.push_back(atom);
    internal_.push_back(internal);
  }
  return it->second;
}

std::vector<bool> GroundProgram::ancestors(std::span<const AtomId> roots) const {
  std::vector<bool> seen(atoms_.size(), false);
  std::vector<AtomId> stack;
  for (AtomId r : roots) {
    if (!seen[r]) {
      seen[r] = true;
      stack.push_back(r);
    }
  }
  auto push = [&](AtomId a) {
    if (!seen[a]) {
      seen[a] = true;
      stack.push_back(a);
    }
  };
  while (!stack.empty()) {
    AtomId a = stack.back();
    stack.pop_back();
    for (std::size_t r : defining_rules_[a]) {
      for (AtomId b : rules_[r].body) push(b);
    }
    for (std::size_t g : defining_groups_[a]) {
      for (AtomId b : groups_[g].guard) push(b);
    }
  }
  return seen;
}

void GroundProgram::finish() {
  const std::size_t n = atoms_.size();
  defining_groups_.assign(n, {});
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (const Outcome& o : groups_[g].outcomes) defining_groups_[o.atom].push_back(g);
  }

  // Order rules so that every body atom is settled before the rule is read.
  std::vector<std::vector<std::size_t>> by_head(n);
  for (std::size_t r = 0; r < rules_.size(); ++r) by_head[rules_[r].head].push_back(r);
  std::vector<std::vector<AtomId>> users(n);
  std::vector<std::size_t> pending(n, 0);
  for (AtomId a = 0; a < n; ++a) {
    std::set<AtomId> deps;
    for (std::size_t r : by_head[a]) deps.insert(rules_[r].body.begin(), rules_[r].body.end());
    pending[a] = deps.size();
    for (AtomId d : deps) users[d].push_back(a);
  }
  std::deque<AtomId> ready;
  for (AtomId a = 0; a < n; ++a) {
    if (pending[a] == 0) ready.push_back(a);
  }
  std::vector<GroundRule> ordered;
  ordered.reserve(rules_.size());
  std::size_t settled = 0;
  while (!ready.empty()) {
    AtomId a = ready.front();
    ready.pop_front();
    ++settled;
    for (std::size_t r : by_head[a]) ordered.push_back(rules_[r]);
    for (AtomId u : users[a]) {
      if (--pending[u] == 0) ready.push_back(u);
    }
  }
  if (settled != n) {
    for (AtomId a = 0; a < n; ++a) {
      if (pending[a] != 0) {
        throw GroundingError("cyclic dependency through " + atoms_[a].to_string());
      }
    }
  }
  rules_ = std::move(ordered);
  defining_rules_.assign(n, {});
  for (std::size_t r = 0; r < rules_.size(); ++r) defining_rules_[rules_[r].head].push_back(r);
}

class Grounder {
 public:
  Grounder(const Program& program, std::span<const std::string> individuals)
      : prog_(program), people_(individuals.begin(), individuals.end()) {}

  GroundProgram run() {
    for (std::size_t c = 0; c < prog_.clauses.size(); ++c) ground_clause(c);
    for (const auto& e : prog_.evidence) {
      GroundAtom a = to_ground(e.atom, {});
      out_.intern(a, false);
      out_.evidence_.push_back({a, e.value});
    }
    for (const auto& q : prog_.queries) {
      GroundAtom a = to_ground(q, {});
      out_.intern(a, false);
      out_.queries_.push_back(a);
    }
    out_.finish();
    return std::move(out_);
  }

 private:
  using Assignment = std::map<std::string, std::string>;

  static GroundAtom to_ground(const Atom& a, const Assignment& env) {
    GroundAtom g{a.predicate, {}};
    for (const auto& t : a.args) g.args.push_back(t.is_variable() ? env.at(t.name) : t.name);
    return g;
  }

  void ground_clause(std::size_t index) {
    const Clause& c = prog_.clauses[index];
    std::vector<std::string> vars;
    auto collect = [&](const Atom& a) {
      for (const auto& t : a.args) {
        if (t.is_variable() && std::find(vars.begin(), vars.end(), t.name) == vars.end()) {
          vars.push_back(t.name);
        }
      }
    };
    for (const auto& h : c.head) collect(h.atom);
    for (const Literal& l : c.body) {
      if (const auto* a = std::get_if<Atom>(&l)) collect(*a);
    }
    double count = std::pow(static_cast<double>(people_.size()), static_cast<double>(vars.size()));
    if (count > static_cast<double>(kMaxInstances)) {
      throw GroundingError("clause " + std::to_string(index + 1) + " has too many instances");
    }
    Assignment env;
    instantiate(c, index, vars, 0, env);
  }

  void instantiate(const Clause& c, std::size_t index, const std::vector<std::string>& vars,
                   std::size_t depth, Assignment& env) {
    if (depth == vars.size()) {
      emit(c, index, env);
      return;
    }
    for (const auto& p : people_) {
      env[vars[depth]] = p;
      instantiate(c, index, vars, depth + 1, env);
    }
    env.erase(vars[depth]);
  }

  void emit(const Clause& c, std::size_t index, const Assignment& env) {
    std::vector<AtomId> body;
    std::map<std::string, double> bound;
    std::string body_text;
    for (const Literal& l : c.body) {
      if (const auto* b = std::get_if<Binding>(&l)) {
        bound[b->var] = b->value;
        continue;
      }
      GroundAtom g = to_ground(std::get<Atom>(l), env);
      if (!body_text.empty()) body_text += ", ";
      body_text += g.to_string();
      body.push_back(out_.intern(g, false));
    }
    std::string tail = body_text.empty() ? "" : " :- " + body_text;

    if (c.deterministic) {
      GroundAtom h = to_ground(c.head[0].atom, env);
      out_.rules_.push_back({out_.intern(h, false), body, h.to_string() + tail + "."});
      return;
    }

    ChoiceGroup group;
    group.clause = index;
    group.guard = body;
    double sum = 0.0;
    std::vector<double> weights;
    for (const auto& h : c.head) {
      double w = h.prob.kind == ProbExpr::Kind::Const ? h.prob.value
                                                      : h.prob.value * bound.at(h.prob.var);
      if (!(w >= 0.0) || w > 1.0 + kSumTolerance) {
        throw GroundingError("clause " + std::to_string(index + 1) + ": probability " +
                             rulelang::format_number(w) + " outside [0,1]");
      }
      weights.push_back(w);
      sum += w;
    }
    if (sum > 1.0 + kSumTolerance) {
      throw GroundingError("clause " + std::to_string(index + 1) + ": probabilities sum to " +
                           rulelang::format_number(sum) + ", more than 1");
    }
    group.residual = std::max(0.0, 1.0 - sum);
    const std::size_t gid = out_.groups_.size();
    for (std::size_t i = 0; i < c.head.size(); ++i) {
      GroundAtom h = to_ground(c.head[i].atom, env);
      AtomId head = out_.intern(h, false);
      group.heads.push_back(head);
      if (body.empty()) {
        group.outcomes.push_back({head, weights[i]});
        continue;
      }
      GroundAtom aux{kChoicePredicate, {std::to_string(gid), std::to_string(i)}};
      AtomId aux_id = out_.intern(aux, true);
      group.outcomes.push_back({aux_id, weights[i]});
      std::vector<AtomId> guarded = body;
      guarded.push_back(aux_id);
      out_.rules_.push_back({head, guarded,
                             rulelang::format_number(weights[i]) + "::" + h.to_string() + tail +
                                 "."});
    }
    out_.groups_.push_back(std::move(group));
  }

  const Program& prog_;
  std::vector<std::string> people_;
  GroundProgram out_;
};

GroundProgram ground(const Program& program, std::span<const std::string> individuals) {
  return Grounder(program, individuals).run();
}

}  // namespace plx::worlds
