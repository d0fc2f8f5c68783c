#pragma once

// Toxidrome vocabulary, the canonical finding templates and the loader for
// the rule-language knowledge base.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plx/rulelang.hpp"
#include "plx/worlds.hpp"

namespace plx::toxkb {

// Declared in lexicographic order of their names, so enum order breaks ties.
enum class Toxidrome {
  anticholinergic,
  cholinergic,
  opioid,
  sedative_hypnotic,
  serotonin_toxicity,
  sympathomimetic,
};
inline constexpr std::size_t kToxidromeCount = 6;
inline constexpr std::array<Toxidrome, kToxidromeCount> kToxidromes{
    Toxidrome::anticholinergic,  Toxidrome::cholinergic,        Toxidrome::opioid,
    Toxidrome::sedative_hypnotic, Toxidrome::serotonin_toxicity, Toxidrome::sympathomimetic};

enum class Sign {
  heart_rate,
  blood_pressure,
  pupil_diameter,
  secretions,
  temperature,
  respiratory_rate,
  mental_status,
};
inline constexpr std::size_t kSignCount = 7;
inline constexpr std::array<Sign, kSignCount> kSigns{
    Sign::heart_rate,  Sign::blood_pressure,   Sign::pupil_diameter, Sign::secretions,
    Sign::temperature, Sign::respiratory_rate, Sign::mental_status};

enum class Value { increased, normal, decreased, large, small, agitated, alert, sedated, delirious };

std::string_view name(Toxidrome t);
std::string_view name(Sign s);
std::string_view name(Value v);
Toxidrome parse_toxidrome(std::string_view text);
Sign parse_sign(std::string_view text);
Value parse_value(std::string_view text);

// Values a sign can take, in a fixed order.
std::span<const Value> domain(Sign s);
bool in_domain(Sign s, Value v);
// Predicate used for the sign in the knowledge base, e.g. heartRate.
std::string_view predicate(Sign s);

// 22 sign/value indicators: signs in declaration order, values in domain order.
inline constexpr std::size_t kIndicatorCount = 22;
std::size_t indicator_index(Sign s, Value v);
std::pair<Sign, Value> indicator(std::size_t index);

struct Finding {
  Sign sign;
  Value value;
  bool operator==(const Finding&) const = default;
};

Finding parse_finding(std::string_view text);  // "heart_rate=increased"
std::string to_string(const Finding& f);

struct ToxidromeTemplate {
  Toxidrome toxidrome;
  std::array<Value, kSignCount> values;  // indexed by Sign

  Value at(Sign s) const { return values[static_cast<std::size_t>(s)]; }
  // Findings that differ from normal (never includes an alert mental status).
  std::vector<Finding> abnormal() const;
  std::vector<Finding> all() const;
};

const ToxidromeTemplate& template_of(Toxidrome t);
const ToxidromeTemplate& template_of(std::string_view name);

using Priors = std::array<double, kToxidromeCount>;
Priors uniform_priors();
// Flat "name = probability" lines; '#' starts a comment. All six must be given.
Priors parse_priors(std::string_view text);
Priors load_priors(const std::filesystem::path& path);

struct LintReport {
  std::size_t prior_groups = 0;
  std::size_t linking = 0;
  std::size_t goals = 0;
  std::size_t facts = 0;
  std::vector<std::string> problems;

  std::size_t total() const { return prior_groups + linking + goals + facts; }
  bool ok() const { return problems.empty(); }
};

// Expects 7 prior groups (one per sign), 21 linking clauses and one goal
// clause per toxidrome, every predicate drawn from the vocabulary.
LintReport lint(const rulelang::Program& program);

struct Classification {
  std::array<double, kToxidromeCount> likelihood{};  // P(hasToxidrome | findings)
  std::array<double, kToxidromeCount> posterior{};   // prior-weighted and normalized
  Toxidrome best = Toxidrome::anticholinergic;
  double evidence_probability = 0.0;
};

struct SelfTestFailure {
  Toxidrome toxidrome;
  std::string reason;
};

class KnowledgeBase {
 public:
  KnowledgeBase(rulelang::Program program, Priors priors, worlds::InferenceOptions options = {});

  const rulelang::Program& program() const { return program_; }
  const worlds::GroundProgram& ground() const { return ground_; }
  const Priors& priors() const { return priors_; }
  const worlds::InferenceOptions& options() const { return options_; }

  worlds::GroundAtom label(Toxidrome t) const;
  std::vector<worlds::Observation> evidence(std::span<const Finding> findings) const;

  // Throws InferenceError when the findings are impossible or support no toxidrome.
  Classification classify(std::span<const Finding> findings) const;
  std::vector<worlds::Explanation> explain(std::span<const Finding> findings, Toxidrome t,
                                           std::size_t top_n) const;

  // Each template, given as its abnormal findings and as all seven findings,
  // must make its own toxidrome the strict argmax, and the seven findings
  // must make it certain through its goal clause.
  std::vector<SelfTestFailure> self_test() const;

 private:
  rulelang::Program program_;
  worlds::GroundProgram ground_;
  Priors priors_;
  worlds::InferenceOptions options_;
  std::array<worlds::GroundAtom, kToxidromeCount> labels_;
};

inline constexpr std::string_view kPatient = "pt";

struct LoadOptions {
  std::optional<Priors> priors;
  worlds::InferenceOptions inference;
  bool self_test = true;
};

KnowledgeBase load_kb(const std::filesystem::path& path, const LoadOptions& options = {});
KnowledgeBase load_kb_source(std::string_view source, const LoadOptions& options = {});

std::string read_file(const std::filesystem::path& path);

}  // namespace plx::toxkb
