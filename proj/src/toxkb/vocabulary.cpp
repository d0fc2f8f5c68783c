#include <algorithm>

#include "plx/toxkb.hpp"

namespace plx::toxkb {

namespace {

constexpr std::array<std::string_view, kToxidromeCount> kToxNames{
    "anticholinergic", "cholinergic", "opioid", "sedative_hypnotic", "serotonin_toxicity",
    "sympathomimetic"};
constexpr std::array<std::string_view, kSignCount> kSignNames{
    "heart_rate", "blood_pressure", "pupil_diameter", "secretions",
    "temperature", "respiratory_rate", "mental_status"};
constexpr std::array<std::string_view, kSignCount> kPredicates{
    "heartRate", "bloodPressure", "pupilDiameter", "secretions",
    "temperature", "respiratoryRate", "mentalStatus"};
constexpr std::array<std::string_view, 9> kValueNames{
    "increased", "normal", "decreased", "large", "small", "agitated", "alert", "sedated",
    "delirious"};

constexpr std::array<Value, 3> kLevel{Value::increased, Value::normal, Value::decreased};
constexpr std::array<Value, 3> kSize{Value::large, Value::normal, Value::small};
constexpr std::array<Value, 4> kMental{Value::agitated, Value::alert, Value::sedated,
                                       Value::delirious};

template <typename E, std::size_t N>
E lookup(const std::array<std::string_view, N>& names, std::string_view text, const char* what) {
  auto it = std::find(names.begin(), names.end(), text);
  if (it == names.end()) {
    std::string known;
    for (auto n : names) known += (known.empty() ? "" : ", ") + std::string(n);
    throw DataError(std::string("unknown ") + what + " '" + std::string(text) + "' (expected one of: " +
                    known + ")");
  }
  return static_cast<E>(it - names.begin());
}

using V = Value;
const std::array<ToxidromeTemplate, kToxidromeCount> kTemplates{{
    {Toxidrome::anticholinergic,
     {V::increased, V::normal, V::large, V::decreased, V::increased, V::normal, V::delirious}},
    {Toxidrome::cholinergic,
     {V::decreased, V::normal, V::small, V::increased, V::normal, V::decreased, V::sedated}},
    {Toxidrome::opioid,
     {V::normal, V::normal, V::small, V::normal, V::normal, V::decreased, V::sedated}},
    {Toxidrome::sedative_hypnotic,
     {V::normal, V::normal, V::normal, V::normal, V::normal, V::normal, V::sedated}},
    {Toxidrome::serotonin_toxicity,
     {V::increased, V::increased, V::normal, V::normal, V::increased, V::normal, V::agitated}},
    {Toxidrome::sympathomimetic,
     {V::increased, V::increased, V::large, V::normal, V::increased, V::increased, V::agitated}},
}};

}  // namespace

std::string_view name(Toxidrome t) { return kToxNames[static_cast<std::size_t>(t)]; }
std::string_view name(Sign s) { return kSignNames[static_cast<std::size_t>(s)]; }
std::string_view name(Value v) { return kValueNames[static_cast<std::size_t>(v)]; }
std::string_view predicate(Sign s) { return kPredicates[static_cast<std::size_t>(s)]; }

Toxidrome parse_toxidrome(std::string_view text) {
  return lookup<Toxidrome>(kToxNames, text, "toxidrome");
}
Sign parse_sign(std::string_view text) { return lookup<Sign>(kSignNames, text, "sign"); }
Value parse_value(std::string_view text) { return lookup<Value>(kValueNames, text, "value"); }

std::span<const Value> domain(Sign s) {
  switch (s) {
    case Sign::pupil_diameter: return kSize;
    case Sign::mental_status: return kMental;
    default: return kLevel;
  }
}

bool in_domain(Sign s, Value v) {
  auto d = domain(s);
  return std::find(d.begin(), d.end(), v) != d.end();
}

std::size_t indicator_index(Sign s, Value v) {
  std::size_t base = 0;
  for (Sign t : kSigns) {
    auto d = domain(t);
    if (t == s) {
      auto it = std::find(d.begin(), d.end(), v);
      if (it == d.end()) {
        throw DataError(std::string(name(v)) + " is not a value of " + std::string(name(s)));
      }
      return base + static_cast<std::size_t>(it - d.begin());
    }
    base += d.size();
  }
  throw DataError("unknown sign");
}

std::pair<Sign, Value> indicator(std::size_t index) {
  for (Sign s : kSigns) {
    auto d = domain(s);
    if (index < d.size()) return {s, d[index]};
    index -= d.size();
  }
  throw DataError("indicator index out of range");
}

Finding parse_finding(std::string_view text) {
  auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw DataError("finding must look like sign=value: " + std::string(text));
  }
  Finding f{parse_sign(text.substr(0, eq)), parse_value(text.substr(eq + 1))};
  if (!in_domain(f.sign, f.value)) {
    throw DataError(std::string(name(f.value)) + " is not a value of " + std::string(name(f.sign)));
  }
  return f;
}

std::string to_string(const Finding& f) {
  return std::string(name(f.sign)) + "=" + std::string(name(f.value));
}

std::vector<Finding> ToxidromeTemplate::abnormal() const {
  std::vector<Finding> out;
  for (Sign s : kSigns) {
    if (at(s) != Value::normal && at(s) != Value::alert) out.push_back({s, at(s)});
  }
  return out;
}

std::vector<Finding> ToxidromeTemplate::all() const {
  std::vector<Finding> out;
  for (Sign s : kSigns) out.push_back({s, at(s)});
  return out;
}

const ToxidromeTemplate& template_of(Toxidrome t) { return kTemplates[static_cast<std::size_t>(t)]; }

const ToxidromeTemplate& template_of(std::string_view text) {
  return template_of(parse_toxidrome(text));
}

}  // namespace plx::toxkb
