#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "plx/casegen.hpp"

namespace plx::casegen {

using toxkb::Finding;
using toxkb::Sign;
using toxkb::Toxidrome;
using toxkb::kSigns;
using toxkb::kToxidromes;

Case generate_case(Rng& rng, int difficulty, std::uint64_t id) {
  if (difficulty < 0 || difficulty > kMaxDifficulty) {
    throw DataError("difficulty must be between 0 and 5");
  }
  Case c;
  c.id = id;
  c.difficulty = difficulty;
  c.intended = kToxidromes[rng.below(kToxidromes.size())];
  std::vector<Toxidrome> others;
  for (Toxidrome t : kToxidromes) {
    if (t != c.intended) others.push_back(t);
  }
  c.distractor = others[rng.below(others.size())];

  // Partial Fisher-Yates: the first 5 slots are the chosen signs, in draw order.
  std::array<Sign, toxkb::kSignCount> signs = kSigns;
  for (std::size_t i = 0; i < kFindingsPerCase; ++i) {
    std::size_t j = i + rng.below(signs.size() - i);
    std::swap(signs[i], signs[j]);
  }
  const std::size_t from_intended = kFindingsPerCase - static_cast<std::size_t>(difficulty);
  for (std::size_t i = 0; i < kFindingsPerCase; ++i) {
    const auto& tpl = toxkb::template_of(i < from_intended ? c.intended : c.distractor);
    c.findings.push_back({signs[i], tpl.at(signs[i])});
  }
  return c;
}

std::vector<Case> generate_dataset(std::uint64_t seed, std::size_t n,
                                   const DifficultyWeights& weights) {
  if (n == 0) throw DataError("dataset size must be positive");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DataError("difficulty weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DataError("difficulty weights must sum to 1");

  Rng rng(seed);
  std::vector<Case> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.unit();
    int k = static_cast<int>(kDatasetDifficulties) - 1;
    double acc = 0.0;
    for (int d = 0; d < static_cast<int>(kDatasetDifficulties); ++d) {
      acc += weights[static_cast<std::size_t>(d)];
      if (u < acc && weights[static_cast<std::size_t>(d)] > 0.0) {
        k = d;
        break;
      }
    }
    while (weights[static_cast<std::size_t>(k)] == 0.0) --k;
    out.push_back(generate_case(rng, k, i));
  }
  return out;
}

Counts count_cases(const std::vector<Case>& cases) {
  Counts counts{};
  for (const Case& c : cases) {
    ++counts[static_cast<std::size_t>(c.intended)][static_cast<std::size_t>(c.difficulty)];
  }
  return counts;
}

void write_counts_csv(std::ostream& out, const Counts& counts) {
  std::size_t columns = kDatasetDifficulties;
  for (const auto& row : counts) {
    for (std::size_t k = columns; k < row.size(); ++k) {
      if (row[k] > 0) columns = k + 1;
    }
  }
  out << "toxidrome";
  for (std::size_t k = 0; k < columns; ++k) out << ",difficulty_" << k;
  out << '\n';
  for (Toxidrome t : kToxidromes) {
    out << toxkb::name(t);
    for (std::size_t k = 0; k < columns; ++k) out << ',' << counts[static_cast<std::size_t>(t)][k];
    out << '\n';
  }
}

std::string to_json_line(const Case& c) {
  nlohmann::ordered_json j;
  j["id"] = c.id;
  j["difficulty"] = c.difficulty;
  j["intended"] = toxkb::name(c.intended);
  j["distractor"] = toxkb::name(c.distractor);
  j["findings"] = nlohmann::ordered_json::array();
  for (const Finding& f : c.findings) {
    j["findings"].push_back({{"sign", toxkb::name(f.sign)}, {"value", toxkb::name(f.value)}});
  }
  return j.dump();
}

Case parse_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed case: ") + e.what());
  }
  try {
    Case c;
    c.id = j.at("id").get<std::uint64_t>();
    c.difficulty = j.at("difficulty").get<int>();
    if (c.difficulty < 0 || c.difficulty > kMaxDifficulty) throw DataError("difficulty out of range");
    c.intended = toxkb::parse_toxidrome(j.at("intended").get<std::string>());
    c.distractor = toxkb::parse_toxidrome(j.at("distractor").get<std::string>());
    for (const auto& f : j.at("findings")) {
      Finding x{toxkb::parse_sign(f.at("sign").get<std::string>()),
                toxkb::parse_value(f.at("value").get<std::string>())};
      if (!toxkb::in_domain(x.sign, x.value)) {
        throw DataError(toxkb::to_string(x) + " is outside the sign's domain");
      }
      c.findings.push_back(x);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed case: ") + e.what());
  }
}

void write_jsonl(std::ostream& out, const std::vector<Case>& cases) {
  for (const Case& c : cases) out << to_json_line(c) << '\n';
}

std::vector<Case> read_jsonl(std::istream& in) {
  std::vector<Case> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_json_line(line));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Case> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return read_jsonl(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Verdict plausibility_filter(const Case& c, const std::vector<PlausibilityRule>& rules) {
  std::set<Sign> seen;
  for (const Finding& f : c.findings) {
    if (!seen.insert(f.sign).second) {
      return {false, "sign " + std::string(toxkb::name(f.sign)) + " appears twice"};
    }
  }
  for (const auto& rule : rules) {
    bool all = !rule.pattern.empty();
    for (const Finding& p : rule.pattern) {
      bool found = false;
      for (const Finding& f : c.findings) found = found || f == p;
      all = all && found;
    }
    if (all) return {false, rule.reason};
  }
  return {};
}

std::vector<PlausibilityRule> parse_plausibility_rules(const std::string& text) {
  std::vector<PlausibilityRule> rules;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    line = line.substr(0, line.find('#'));
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    PlausibilityRule rule;
    auto colon = line.find(':');
    std::string pattern = line.substr(0, colon);
    if (colon != std::string::npos) {
      rule.reason = line.substr(colon + 1);
      rule.reason.erase(0, rule.reason.find_first_not_of(" \t"));
      rule.reason.erase(rule.reason.find_last_not_of(" \t\r") + 1);
    }
    std::size_t p = 0;
    while (p <= pattern.size()) {
      std::size_t comma = pattern.find(',', p);
      if (comma == std::string::npos) comma = pattern.size();
      std::string item = pattern.substr(p, comma - p);
      p = comma + 1;
      item.erase(0, item.find_first_not_of(" \t"));
      item.erase(item.find_last_not_of(" \t\r") + 1);
      if (item.empty()) continue;
      try {
        rule.pattern.push_back(toxkb::parse_finding(item));
      } catch (const DataError& e) {
        throw DataError("plausibility rules line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    if (rule.reason.empty()) rule.reason = "matches an implausible combination";
    rules.push_back(std::move(rule));
  }
  return rules;
}

}  // namespace plx::casegen
