#pragma once

// Agreement statistics and the benchmark harness that compares the
// knowledge base and the decision-tree baseline with the intended labels.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plx/casegen.hpp"
#include "plx/dtree.hpp"
#include "plx/toxkb.hpp"

namespace plx::evalkappa {

// Square count matrix. Rows are the reference rater, columns the other one.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t labels);
  ConfusionMatrix(std::initializer_list<std::initializer_list<std::size_t>> rows);

  void add(std::size_t reference, std::size_t other, std::size_t times = 1);
  std::size_t at(std::size_t reference, std::size_t other) const;
  std::size_t size() const { return n_; }
  std::size_t total() const;
  ConfusionMatrix transposed() const;

 private:
  std::size_t n_;
  std::vector<std::size_t> cells_;
};

struct KappaStats {
  double kappa = 0.0;
  double p_o = 0.0;  // observed agreement
  double p_e = 0.0;  // agreement expected from the marginals
  std::size_t n = 0;
  // Set when p_e == 1; kappa is then 1 for full agreement and 0 otherwise.
  bool degenerate = false;
};

// Cohen's kappa. Throws DataError on an empty matrix.
KappaStats kappa(const ConfusionMatrix& m);

struct PairReport {
  std::string pair;  // e.g. "tak_vs_intended"
  int difficulty = 0;
  KappaStats stats;
  ConfusionMatrix matrix{toxkb::kToxidromeCount};
  std::size_t abstentions = 0;
};

struct ExternalLabel {
  std::uint64_t id = 0;
  std::string rater = "human";
  toxkb::Toxidrome label{};
};

// JSONL with fields id, label and an optional rater.
std::vector<ExternalLabel> read_external_labels(const std::filesystem::path& path);

struct BenchmarkConfig {
  int max_depth = 3;
  std::vector<ExternalLabel> external;
  std::optional<std::vector<casegen::PlausibilityRule>> plausibility;  // unset: no filtering
};

struct CaseOutcome {
  std::uint64_t id = 0;
  int difficulty = 0;
  toxkb::Toxidrome intended{};
  std::optional<toxkb::Toxidrome> tak;  // empty when the knowledge base abstained
  toxkb::Toxidrome tree{};
};

struct BenchmarkResult {
  std::vector<PairReport> rows;     // one per pair and difficulty present
  std::vector<PairReport> heldout;  // tree fit on half the cases, scored on the rest
  std::vector<CaseOutcome> outcomes;
  std::map<int, std::string> trees;
  std::size_t excluded = 0;
  std::size_t abstentions = 0;

  const PairReport* find(const std::string& pair, int difficulty) const;
};

BenchmarkResult run_benchmark(const toxkb::KnowledgeBase& kb, const std::vector<casegen::Case>& cases,
                              const BenchmarkConfig& config = {});

// Columns type,difficulty,kappa.
void write_kappa_csv(std::ostream& out, const BenchmarkResult& result);
std::string report_json(const BenchmarkResult& result);

}  // namespace plx::evalkappa
