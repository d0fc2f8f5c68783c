#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "plx/toxkb.hpp"

namespace plx::toxkb {

namespace {

constexpr double kPriorTolerance = 1e-9;
constexpr std::string_view kLabelPredicate = "hasToxidrome";
constexpr std::string_view kSerotoninAlias = "serotonergic";

std::string_view trim(std::string_view s) {
  const char* blank = " \t\r\n";
  auto b = s.find_first_not_of(blank);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(blank);
  return s.substr(b, e - b + 1);
}

std::optional<Sign> sign_of_predicate(const std::string& pred) {
  for (Sign s : kSigns) {
    if (predicate(s) == pred) return s;
  }
  return std::nullopt;
}

std::optional<Toxidrome> toxidrome_of(const std::string& text) {
  if (text == kSerotoninAlias) return Toxidrome::serotonin_toxicity;
  try {
    return parse_toxidrome(text);
  } catch (const DataError&) {
    return std::nullopt;
  }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Priors uniform_priors() {
  Priors p;
  p.fill(1.0 / kToxidromeCount);
  return p;
}

Priors parse_priors(std::string_view text) {
  Priors p{};
  std::array<bool, kToxidromeCount> seen{};
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto where = "priors line " + std::to_string(line_no) + ": ";
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw KbError(where + "expected name = probability");
    std::string key(trim(line.substr(0, eq)));
    std::string_view num = trim(line.substr(eq + 1));
    Toxidrome t;
    try {
      t = parse_toxidrome(key);
    } catch (const DataError& e) {
      throw KbError(where + e.what());
    }
    double v = 0.0;
    auto [end, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc() || end != num.data() + num.size() || !(v >= 0.0 && v <= 1.0)) {
      throw KbError(where + "probability must be a number in [0,1]");
    }
    auto i = static_cast<std::size_t>(t);
    if (seen[i]) throw KbError(where + key + " given twice");
    seen[i] = true;
    p[i] = v;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < kToxidromeCount; ++i) {
    if (!seen[i]) throw KbError("priors: missing " + std::string(name(kToxidromes[i])));
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kPriorTolerance) {
    throw KbError("priors sum to " + rulelang::format_number(sum) + ", not 1");
  }
  return p;
}

Priors load_priors(const std::filesystem::path& path) { return parse_priors(read_file(path)); }

LintReport lint(const rulelang::Program& program) {
  using rulelang::Atom;
  using rulelang::ClauseKind;
  LintReport r;
  std::set<Sign> prior_signs;
  std::map<Toxidrome, std::size_t> goals;

  for (std::size_t i = 0; i < program.clauses.size(); ++i) {
    const auto& c = program.clauses[i];
    std::string where = "clause " + std::to_string(i + 1) + " `" + rulelang::to_string(c) + "`: ";
    auto check_finding = [&](const Atom& a) -> std::optional<Sign> {
      auto s = sign_of_predicate(a.predicate);
      if (!s || a.args.size() != 2) {
        r.problems.push_back(where + a.predicate + " is not a sign predicate");
        return std::nullopt;
      }
      try {
        if (!in_domain(*s, parse_value(a.args[1].name))) throw DataError("");
      } catch (const DataError&) {
        r.problems.push_back(where + a.args[1].name + " is not a value of " +
                             std::string(name(*s)));
        return std::nullopt;
      }
      return s;
    };
    auto check_label = [&](const Atom& a) -> std::optional<Toxidrome> {
      if (a.predicate != kLabelPredicate || a.args.size() != 2) {
        r.problems.push_back(where + "head must be " + std::string(kLabelPredicate) + "/2");
        return std::nullopt;
      }
      auto t = toxidrome_of(a.args[1].name);
      if (!t) r.problems.push_back(where + "unknown toxidrome " + a.args[1].name);
      return t;
    };
    auto check_body = [&]() {
      for (const auto& lit : c.body) {
        if (const auto* a = std::get_if<Atom>(&lit)) check_finding(*a);
      }
    };

    switch (rulelang::classify(c)) {
      case ClauseKind::PriorGroup: {
        ++r.prior_groups;
        std::set<Value> values;
        std::optional<Sign> sign;
        for (const auto& h : c.head) {
          auto s = check_finding(h.atom);
          if (!s) continue;
          if (sign && *sign != *s) r.problems.push_back(where + "mixes several signs");
          sign = s;
          values.insert(parse_value(h.atom.args[1].name));
        }
        if (!sign) break;
        if (!prior_signs.insert(*sign).second) {
          r.problems.push_back(where + "second prior group for " + std::string(name(*sign)));
        }
        if (values.size() != domain(*sign).size()) {
          r.problems.push_back(where + "does not cover every value of " + std::string(name(*sign)));
        }
        break;
      }
      case ClauseKind::Linking:
        ++r.linking;
        for (const auto& h : c.head) check_label(h.atom);
        check_body();
        break;
      case ClauseKind::Goal: {
        ++r.goals;
        if (auto t = check_label(c.head[0].atom)) ++goals[*t];
        check_body();
        break;
      }
      case ClauseKind::Fact:
        ++r.facts;
        r.problems.push_back(where + "unconditional facts are not expected");
        break;
    }
  }

  auto expect = [&](const char* what, std::size_t got, std::size_t want) {
    if (got != want) {
      r.problems.push_back(std::string("expected ") + std::to_string(want) + " " + what +
                           " clauses, found " + std::to_string(got));
    }
  };
  expect("prior group", r.prior_groups, kSignCount);
  expect("linking", r.linking, 21);
  expect("goal", r.goals, kToxidromeCount);
  for (Toxidrome t : kToxidromes) {
    if (goals[t] != 1) {
      r.problems.push_back("expected one goal clause for " + std::string(name(t)) + ", found " +
                           std::to_string(goals[t]));
    }
  }
  return r;
}

KnowledgeBase::KnowledgeBase(rulelang::Program program, Priors priors,
                             worlds::InferenceOptions options)
    : program_(std::move(program)), priors_(priors), options_(options) {
  double sum = 0.0;
  for (double p : priors_) {
    if (!(p >= 0.0)) throw KbError("priors must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kPriorTolerance) {
    throw KbError("priors sum to " + rulelang::format_number(sum) + ", not 1");
  }
  const std::string people[] = {std::string(kPatient)};
  ground_ = worlds::ground(program_, people);
  for (Toxidrome t : kToxidromes) {
    worlds::GroundAtom atom{std::string(kLabelPredicate), {std::string(kPatient), std::string(name(t))}};
    if (t == Toxidrome::serotonin_toxicity && !ground_.find(atom)) {
      worlds::GroundAtom alias{std::string(kLabelPredicate),
                               {std::string(kPatient), std::string(kSerotoninAlias)}};
      if (ground_.find(alias)) atom = alias;
    }
    labels_[static_cast<std::size_t>(t)] = atom;
  }
}

worlds::GroundAtom KnowledgeBase::label(Toxidrome t) const {
  return labels_[static_cast<std::size_t>(t)];
}

std::vector<worlds::Observation> KnowledgeBase::evidence(std::span<const Finding> findings) const {
  std::vector<worlds::Observation> out;
  std::set<Sign> seen;
  for (const Finding& f : findings) {
    if (!in_domain(f.sign, f.value)) {
      throw DataError(std::string(name(f.value)) + " is not a value of " + std::string(name(f.sign)));
    }
    if (!seen.insert(f.sign).second) {
      throw DataError("sign " + std::string(name(f.sign)) + " given more than once");
    }
    out.push_back({{std::string(predicate(f.sign)), {std::string(kPatient), std::string(name(f.value))}},
                   true});
  }
  return out;
}

Classification KnowledgeBase::classify(std::span<const Finding> findings) const {
  auto ev = evidence(findings);
  std::vector<worlds::GroundAtom> labels(labels_.begin(), labels_.end());
  worlds::Posterior post = worlds::posterior(ground_, labels, ev, options_);
  Classification c;
  c.evidence_probability = post.evidence_probability;
  double sum = 0.0;
  for (std::size_t i = 0; i < kToxidromeCount; ++i) {
    c.likelihood[i] = post.probabilities[i];
    c.posterior[i] = priors_[i] * post.probabilities[i];
    sum += c.posterior[i];
  }
  if (!(sum > 0.0)) {
    throw InferenceError(InferenceError::Kind::NoSupport, "the findings support no toxidrome");
  }
  std::size_t best = 0;
  for (std::size_t i = 0; i < kToxidromeCount; ++i) {
    c.posterior[i] /= sum;
    if (c.posterior[i] > c.posterior[best]) best = i;
  }
  c.best = kToxidromes[best];
  return c;
}

std::vector<worlds::Explanation> KnowledgeBase::explain(std::span<const Finding> findings,
                                                        Toxidrome t, std::size_t top_n) const {
  return worlds::explain(ground_, label(t), evidence(findings), top_n, options_);
}

std::vector<SelfTestFailure> KnowledgeBase::self_test() const {
  std::vector<SelfTestFailure> failures;
  for (Toxidrome t : kToxidromes) {
    const auto& tpl = template_of(t);
    const auto i = static_cast<std::size_t>(t);
    for (const auto& [kind, findings] :
         {std::pair<std::string, std::vector<Finding>>{"abnormal", tpl.abnormal()},
          std::pair<std::string, std::vector<Finding>>{"full", tpl.all()}}) {
      Classification c;
      try {
        c = classify(findings);
      } catch (const InferenceError& e) {
        failures.push_back({t, "its " + kind + " findings give no answer: " + e.what()});
        continue;
      }
      for (std::size_t j = 0; j < kToxidromeCount; ++j) {
        if (j != i && c.posterior[j] >= c.posterior[i]) {
          failures.push_back({t, "its " + kind + " findings rank " +
                                     std::string(name(kToxidromes[j])) + " at least as high"});
          break;
        }
      }
      if (kind == "full" && c.likelihood[i] < 1.0 - 1e-12) {
        failures.push_back({t, "its full findings leave it uncertain (no goal clause fires)"});
      }
    }
  }
  return failures;
}

KnowledgeBase load_kb_source(std::string_view source, const LoadOptions& options) {
  KnowledgeBase kb(rulelang::parse_program(source), options.priors.value_or(uniform_priors()),
                   options.inference);
  if (options.self_test) {
    auto failures = kb.self_test();
    if (!failures.empty()) {
      std::string msg = "knowledge base self-test failed:";
      for (const auto& f : failures) {
        msg += " " + std::string(name(f.toxidrome)) + ": " + f.reason + ";";
      }
      throw KbError(msg);
    }
  }
  return kb;
}

KnowledgeBase load_kb(const std::filesystem::path& path, const LoadOptions& options) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw KbError(e.what());
  }
  try {
    return load_kb_source(text, options);
  } catch (const SyntaxError& e) {
    throw KbError(path.string() + ":" + e.what());
  }
}

}  // namespace plx::toxkb
