#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "plx/evalkappa.hpp"

namespace plx::evalkappa {

using casegen::Case;
using toxkb::Toxidrome;

namespace {

std::size_t ix(Toxidrome t) { return static_cast<std::size_t>(t); }

PairReport make_row(const std::string& pair, int difficulty, const ConfusionMatrix& m,
                    std::size_t abstentions) {
  PairReport r;
  r.pair = pair;
  r.difficulty = difficulty;
  r.matrix = m;
  r.abstentions = abstentions;
  r.stats = kappa(m);
  return r;
}

nlohmann::ordered_json row_json(const PairReport& r) {
  nlohmann::ordered_json j;
  j["type"] = r.pair;
  j["difficulty"] = r.difficulty;
  j["kappa"] = r.stats.kappa;
  j["p_o"] = r.stats.p_o;
  j["p_e"] = r.stats.p_e;
  j["n"] = r.stats.n;
  j["abstentions"] = r.abstentions;
  j["degenerate"] = r.stats.degenerate;
  j["matrix"] = nlohmann::ordered_json::array();
  for (std::size_t a = 0; a < r.matrix.size(); ++a) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t b = 0; b < r.matrix.size(); ++b) row.push_back(r.matrix.at(a, b));
    j["matrix"].push_back(row);
  }
  return j;
}

// Labels from external raters, merged into one consensus label per case.
struct Raters {
  std::vector<std::string> names;
  std::map<std::uint64_t, std::map<std::string, Toxidrome>> by_case;

  explicit Raters(const std::vector<ExternalLabel>& labels) {
    for (const auto& l : labels) {
      if (std::find(names.begin(), names.end(), l.rater) == names.end()) names.push_back(l.rater);
      auto [it, fresh] = by_case[l.id].emplace(l.rater, l.label);
      if (!fresh && it->second != l.label) {
        throw DataError("rater " + l.rater + " gives two labels for case " + std::to_string(l.id));
      }
    }
  }

  std::optional<Toxidrome> consensus(std::uint64_t id) const {
    auto it = by_case.find(id);
    if (it == by_case.end() || it->second.size() != names.size()) return std::nullopt;
    Toxidrome first = it->second.begin()->second;
    for (const auto& [rater, label] : it->second) {
      if (label != first) return std::nullopt;
    }
    return first;
  }

  std::optional<Toxidrome> of(std::uint64_t id, const std::string& rater) const {
    auto it = by_case.find(id);
    if (it == by_case.end()) return std::nullopt;
    auto jt = it->second.find(rater);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }
};

}  // namespace

const PairReport* BenchmarkResult::find(const std::string& pair, int difficulty) const {
  for (const auto& r : rows) {
    if (r.pair == pair && r.difficulty == difficulty) return &r;
  }
  return nullptr;
}

std::vector<ExternalLabel> read_external_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<ExternalLabel> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ExternalLabel l;
      l.id = j.at("id").get<std::uint64_t>();
      l.label = toxkb::parse_toxidrome(j.at("label").get<std::string>());
      if (j.contains("rater")) l.rater = j.at("rater").get<std::string>();
      out.push_back(std::move(l));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

BenchmarkResult run_benchmark(const toxkb::KnowledgeBase& kb, const std::vector<Case>& input,
                              const BenchmarkConfig& config) {
  BenchmarkResult result;
  std::vector<Case> cases;
  for (const Case& c : input) {
    if (config.plausibility && !casegen::plausibility_filter(c, *config.plausibility).plausible) {
      ++result.excluded;
      continue;
    }
    cases.push_back(c);
  }
  if (cases.empty()) throw DataError("the dataset has no cases to evaluate");

  std::map<int, std::vector<std::size_t>> by_difficulty;
  for (std::size_t i = 0; i < cases.size(); ++i) by_difficulty[cases[i].difficulty].push_back(i);

  result.outcomes.resize(cases.size());
  for (std::size_t i = 0; i < cases.size(); ++i) {
    CaseOutcome& o = result.outcomes[i];
    o.id = cases[i].id;
    o.difficulty = cases[i].difficulty;
    o.intended = cases[i].intended;
    try {
      o.tak = kb.classify(cases[i].findings).best;
    } catch (const InferenceError&) {
      ++result.abstentions;
    }
  }

  Raters raters(config.external);
  const bool humans = !config.external.empty();

  for (const auto& [k, idx] : by_difficulty) {
    std::vector<dtree::Sample> samples;
    for (std::size_t i : idx) samples.push_back({dtree::encode(cases[i].findings), cases[i].intended});
    dtree::Tree tree = dtree::fit(samples, config.max_depth);
    result.trees[k] = tree.to_text();

    ConfusionMatrix tak(toxkb::kToxidromeCount), dt(toxkb::kToxidromeCount);
    std::size_t tak_abstain = 0;
    for (std::size_t s = 0; s < idx.size(); ++s) {
      CaseOutcome& o = result.outcomes[idx[s]];
      o.tree = tree.predict(samples[s].features);
      dt.add(ix(o.intended), ix(o.tree));
      if (o.tak) {
        tak.add(ix(o.intended), ix(*o.tak));
      } else {
        ++tak_abstain;
      }
    }
    if (tak.total() > 0) result.rows.push_back(make_row("tak_vs_intended", k, tak, tak_abstain));
    result.rows.push_back(make_row("dt_vs_intended", k, dt, 0));

    std::vector<dtree::Sample> train, test;
    for (std::size_t s = 0; s < samples.size(); ++s) (s % 2 == 0 ? train : test).push_back(samples[s]);
    if (!test.empty()) {
      dtree::Tree half = dtree::fit(train, config.max_depth);
      ConfusionMatrix m(toxkb::kToxidromeCount);
      for (const auto& x : test) m.add(ix(x.label), ix(half.predict(x.features)));
      result.heldout.push_back(make_row("dt_heldout_vs_intended", k, m, 0));
    }

    if (!humans) continue;
    ConfusionMatrix h_int(toxkb::kToxidromeCount), h_tak(toxkb::kToxidromeCount),
        h_h(toxkb::kToxidromeCount);
    std::size_t miss_int = 0, miss_tak = 0, miss_hh = 0;
    for (std::size_t i : idx) {
      const CaseOutcome& o = result.outcomes[i];
      auto h = raters.consensus(o.id);
      if (h) {
        h_int.add(ix(o.intended), ix(*h));
      } else {
        ++miss_int;
      }
      if (h && o.tak) {
        h_tak.add(ix(*o.tak), ix(*h));
      } else {
        ++miss_tak;
      }
      if (raters.names.size() >= 2) {
        auto a = raters.of(o.id, raters.names[0]);
        auto b = raters.of(o.id, raters.names[1]);
        if (a && b) {
          h_h.add(ix(*a), ix(*b));
        } else {
          ++miss_hh;
        }
      }
    }
    if (raters.names.size() >= 2 && h_h.total() > 0) {
      result.rows.push_back(make_row("human_vs_human", k, h_h, miss_hh));
    }
    if (h_int.total() > 0) result.rows.push_back(make_row("human_vs_intended", k, h_int, miss_int));
    if (h_tak.total() > 0) result.rows.push_back(make_row("human_vs_tak", k, h_tak, miss_tak));
  }
  return result;
}

void write_kappa_csv(std::ostream& out, const BenchmarkResult& result) {
  out << "type,difficulty,kappa\n";
  for (const auto& r : result.rows) {
    std::ostringstream k;
    k << std::fixed << std::setprecision(6) << r.stats.kappa;
    out << r.pair << ',' << r.difficulty << ',' << k.str() << '\n';
  }
}

std::string report_json(const BenchmarkResult& result) {
  nlohmann::ordered_json j;
  j["cases"] = result.outcomes.size();
  j["excluded"] = result.excluded;
  j["abstentions"] = result.abstentions;
  j["labels"] = nlohmann::ordered_json::array();
  for (Toxidrome t : toxkb::kToxidromes) j["labels"].push_back(toxkb::name(t));
  j["kappas"] = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) j["kappas"].push_back(row_json(r));
  j["heldout"] = nlohmann::ordered_json::array();
  for (const auto& r : result.heldout) j["heldout"].push_back(row_json(r));
  j["trees"] = nlohmann::ordered_json::object();
  for (const auto& [k, text] : result.trees) j["trees"][std::to_string(k)] = text;
  return j.dump(2);
}

}  // namespace plx::evalkappa
