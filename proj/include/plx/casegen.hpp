#pragma once

// Synthetic benchmark cases. A case mixes 5-k findings from an intended
// toxidrome's template with k findings from a distractor's template, on
// disjoint signs.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "plx/toxkb.hpp"

namespace plx::casegen {

// mt19937_64 with bounded draws done by rejection, so a seed yields the same
// stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  // Uniform in [0, n).
  std::size_t below(std::size_t n);
  // Uniform in [0, 1) with 53 random bits.
  double unit();

 private:
  std::mt19937_64 engine_;
};

inline constexpr std::size_t kFindingsPerCase = 5;
// generate_case accepts k up to 5; datasets draw k from {0, 1, 2}.
inline constexpr int kMaxDifficulty = 5;
inline constexpr std::size_t kDatasetDifficulties = 3;

struct Case {
  std::uint64_t id = 0;
  int difficulty = 0;
  toxkb::Toxidrome intended{};
  toxkb::Toxidrome distractor{};
  std::vector<toxkb::Finding> findings;
  bool operator==(const Case&) const = default;
};

Case generate_case(Rng& rng, int difficulty, std::uint64_t id = 0);

using DifficultyWeights = std::array<double, kDatasetDifficulties>;
inline constexpr DifficultyWeights kEqualDifficulty{1.0 / 3, 1.0 / 3, 1.0 / 3};

std::vector<Case> generate_dataset(std::uint64_t seed, std::size_t n,
                                   const DifficultyWeights& weights = kEqualDifficulty);

// Cases per (intended toxidrome, difficulty).
using Counts = std::array<std::array<std::size_t, kMaxDifficulty + 1>, toxkb::kToxidromeCount>;
// One row per toxidrome; columns for difficulties 0-2 and any higher one present.
Counts count_cases(const std::vector<Case>& cases);
void write_counts_csv(std::ostream& out, const Counts& counts);

std::string to_json_line(const Case& c);
Case parse_json_line(const std::string& line);
void write_jsonl(std::ostream& out, const std::vector<Case>& cases);
std::vector<Case> read_jsonl(std::istream& in);
std::vector<Case> read_jsonl(const std::filesystem::path& path);

// Optional exclusion of clinically implausible combinations.
struct PlausibilityRule {
  std::vector<toxkb::Finding> pattern;  // the case is excluded if it has all of these
  std::string reason;
};

struct Verdict {
  bool plausible = true;
  std::string reason;
};

// Also rejects a case that gives the same sign twice.
Verdict plausibility_filter(const Case& c, const std::vector<PlausibilityRule>& rules = {});
// One rule per line: "sign=value, sign=value: reason". '#' starts a comment.
std::vector<PlausibilityRule> parse_plausibility_rules(const std::string& text);

}  // namespace plx::casegen
