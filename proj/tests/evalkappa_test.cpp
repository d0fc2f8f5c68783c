#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "plx/evalkappa.hpp"

using namespace plx;
using namespace plx::evalkappa;

namespace {

const toxkb::KnowledgeBase& shipped() {
  static const toxkb::KnowledgeBase kb = toxkb::load_kb(std::string(PLX_DATA_DIR) + "/toxkb.plx");
  return kb;
}

ConfusionMatrix random_matrix(std::mt19937_64& rng, std::size_t n) {
  ConfusionMatrix m(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) m.add(a, b, rng() % 20);
  }
  m.add(0, 0);
  return m;
}

}  // namespace

TEST(Kappa, DiagonalIsOne) {
  ConfusionMatrix m{{10, 0, 0}, {0, 7, 0}, {0, 0, 3}};
  EXPECT_DOUBLE_EQ(kappa(m).kappa, 1.0);
}

TEST(Kappa, HandComputedTwoByTwo) {
  ConfusionMatrix m{{45, 5}, {15, 35}};
  KappaStats s = kappa(m);
  EXPECT_NEAR(s.p_o, 0.8, 1e-15);
  EXPECT_NEAR(s.p_e, 0.5, 1e-15);
  EXPECT_NEAR(s.kappa, 0.6, 1e-15);
  EXPECT_EQ(s.n, 100u);
  EXPECT_FALSE(s.degenerate);
}

TEST(Kappa, MarginalProductIsZero) {
  std::vector<std::size_t> rows{1, 2, 3}, cols{2, 3, 5};
  ConfusionMatrix m(3);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) m.add(a, b, rows[a] * cols[b]);
  }
  EXPECT_NEAR(kappa(m).kappa, 0.0, 1e-9);
}

TEST(Kappa, CanBeNegative) {
  ConfusionMatrix m{{0, 10}, {10, 0}};
  EXPECT_DOUBLE_EQ(kappa(m).kappa, -1.0);
}

TEST(Kappa, DegenerateSingleCategory) {
  ConfusionMatrix m{{10, 0}, {0, 0}};
  KappaStats s = kappa(m);
  EXPECT_TRUE(s.degenerate);
  EXPECT_DOUBLE_EQ(s.kappa, 1.0);
}

TEST(Kappa, EmptyMatrixFails) { EXPECT_THROW(kappa(ConfusionMatrix(3)), DataError); }

TEST(Kappa, SymmetricInRaters) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    ConfusionMatrix m = random_matrix(rng, 2 + rng() % 5);
    EXPECT_NEAR(kappa(m).kappa, kappa(m.transposed()).kappa, 1e-12);
  }
}

TEST(Kappa, InvariantUnderRelabeling) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    std::size_t n = 2 + rng() % 5;
    ConfusionMatrix m = random_matrix(rng, n);
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < n; ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    ConfusionMatrix p(n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) p.add(perm[a], perm[b], m.at(a, b));
    }
    EXPECT_NEAR(kappa(m).kappa, kappa(p).kappa, 1e-12);
  }
}

TEST(Benchmark, DifficultyZeroOnly) {
  auto cases = casegen::generate_dataset(42, 300, {1.0, 0.0, 0.0});
  auto r = run_benchmark(shipped(), cases);
  ASSERT_NE(r.find("tak_vs_intended", 0), nullptr);
  EXPECT_GE(r.find("tak_vs_intended", 0)->stats.kappa, 0.8);
  EXPECT_EQ(r.find("tak_vs_intended", 1), nullptr);
  EXPECT_EQ(r.abstentions, 0u);
}

TEST(Benchmark, ShuffledLabelsGiveChanceAgreement) {
  auto cases = casegen::generate_dataset(42, 300, {1.0, 0.0, 0.0});
  std::vector<toxkb::Toxidrome> labels;
  for (const auto& c : cases) labels.push_back(c.intended);
  std::mt19937_64 rng(5);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < cases.size(); ++i) cases[i].intended = labels[i];
  auto r = run_benchmark(shipped(), cases);
  EXPECT_LE(std::abs(r.find("tak_vs_intended", 0)->stats.kappa), 0.1);
}

TEST(Benchmark, SeededOrderingAndCsvShape) {
  auto r = run_benchmark(shipped(), casegen::generate_dataset(42, 300));
  double k0 = r.find("tak_vs_intended", 0)->stats.kappa;
  double k1 = r.find("tak_vs_intended", 1)->stats.kappa;
  double k2 = r.find("tak_vs_intended", 2)->stats.kappa;
  EXPECT_GT(k0, k1);
  EXPECT_GT(k1, k2);
  std::ostringstream csv;
  write_kappa_csv(csv, r);
  std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  EXPECT_EQ(text.rfind("type,difficulty,kappa\n", 0), 0u);
  EXPECT_EQ(r.heldout.size(), 3u);
  auto json = report_json(r);
  EXPECT_NE(json.find("\"p_e\""), std::string::npos);
  EXPECT_NE(json.find("\"abstentions\""), std::string::npos);
}

TEST(Benchmark, ExternalLabelsCopiedFromIntendedAgreeFully) {
  auto cases = casegen::generate_dataset(42, 60);
  BenchmarkConfig cfg;
  for (const auto& c : cases) cfg.external.push_back({c.id, "human", c.intended});
  auto r = run_benchmark(shipped(), cases, cfg);
  for (int k = 0; k < 3; ++k) {
    ASSERT_NE(r.find("human_vs_intended", k), nullptr);
    EXPECT_DOUBLE_EQ(r.find("human_vs_intended", k)->stats.kappa, 1.0);
    ASSERT_NE(r.find("human_vs_tak", k), nullptr);
    EXPECT_NEAR(r.find("human_vs_tak", k)->stats.kappa, r.find("tak_vs_intended", k)->stats.kappa, 1e-12);
  }
  EXPECT_EQ(r.find("human_vs_human", 0), nullptr);
}

TEST(Benchmark, TwoRatersAddHumanPair) {
  auto cases = casegen::generate_dataset(42, 60);
  BenchmarkConfig cfg;
  for (const auto& c : cases) {
    cfg.external.push_back({c.id, "a", c.intended});
    cfg.external.push_back({c.id, "b", c.id % 4 == 0 ? c.distractor : c.intended});
  }
  auto r = run_benchmark(shipped(), cases, cfg);
  ASSERT_NE(r.find("human_vs_human", 0), nullptr);
  EXPECT_LT(r.find("human_vs_human", 0)->stats.kappa, 1.0);
  EXPECT_GT(r.find("human_vs_intended", 0)->abstentions, 0u);
}

TEST(Benchmark, EngineRefusalsAreCountedAsAbstentions) {
  toxkb::LoadOptions opts;
  opts.self_test = false;
  auto kb = toxkb::load_kb(std::string(PLX_DATA_DIR) + "/examples/agitation.plx", opts);
  auto cases = casegen::generate_dataset(42, 120);
  std::size_t agitated = 0;
  for (const auto& c : cases) {
    for (const auto& f : c.findings) agitated += f.value == toxkb::Value::agitated;
  }
  auto r = run_benchmark(kb, cases);
  EXPECT_EQ(r.abstentions, cases.size() - agitated);
  std::size_t scored = 0;
  for (const auto& row : r.rows) {
    if (row.pair == "tak_vs_intended") scored += row.stats.n + row.abstentions;
  }
  EXPECT_EQ(scored, cases.size());
}

TEST(Benchmark, PlausibilityFilterExcludesCases) {
  auto cases = casegen::generate_dataset(42, 300);
  BenchmarkConfig cfg;
  cfg.plausibility = casegen::parse_plausibility_rules("mental_status=agitated: test rule\n");
  auto r = run_benchmark(shipped(), cases, cfg);
  EXPECT_GT(r.excluded, 0u);
  EXPECT_EQ(r.outcomes.size() + r.excluded, cases.size());
}

TEST(Benchmark, EmptyDatasetFails) { EXPECT_THROW(run_benchmark(shipped(), {}), DataError); }

TEST(ExternalLabels, ReadsJsonl) {
  auto path = std::filesystem::temp_directory_path() / "plx_labels_test.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id":1,"label":"opioid"})" << "\n" << R"({"id":2,"label":"cholinergic","rater":"r2"})" << "\n";
  }
  auto labels = read_external_labels(path);
  ASSERT_EQ(labels.size(), 2u);
  EXPECT_EQ(labels[0].rater, "human");
  EXPECT_EQ(labels[1].rater, "r2");
  {
    std::ofstream out(path);
    out << R"({"id":1,"label":"lsd"})" << "\n";
  }
  EXPECT_THROW(read_external_labels(path), DataError);
  std::filesystem::remove(path);
}
