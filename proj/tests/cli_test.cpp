#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "plx/casegen.hpp"
#include "plx/cli.hpp"

namespace fs = std::filesystem;
using plx::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("plx_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name, std::ios::binary) << text;
  }

  fs::path dir_;
};

const std::string kData = PLX_DATA_DIR;

}  // namespace

TEST_F(Cli, GenerateWritesDeterministicDataset) {
  auto a = call({"generate", "--seed", "42", "--n", "300", "--output-dir", path("a")});
  auto b = call({"generate", "--seed", "42", "--n", "300", "--output-dir", path("b")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  std::string first = slurp(path("a/dataset.jsonl"));
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 300);
  EXPECT_EQ(first, slurp(path("b/dataset.jsonl")));
  EXPECT_EQ(slurp(path("a/counts.csv")), slurp(path("b/counts.csv")));
}

TEST_F(Cli, GenerateRejectsBadArguments) {
  EXPECT_EQ(call({"generate", "--seed", "1", "--n", "0", "-o", path("x")}).code, 2);
  EXPECT_EQ(call({"generate", "--n", "5", "-o", path("x")}).code, 2);
  EXPECT_EQ(call({"generate", "--seed", "1", "--difficulty-weights", "0.5,0.5,0.5", "-o", path("x")}).code, 2);
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"frobnicate"}).code, 2);
}

TEST_F(Cli, HelpExitsCleanly) { EXPECT_EQ(call({"--help"}).code, 0); }

TEST_F(Cli, ClassifyInlineUnderAgitationKb) {
  auto r = call({"classify", "--kb", kData + "/examples/agitation.plx", "--skip-self-test", "--finding",
                 "mental_status=agitated"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["argmax"], "sympathomimetic");
  EXPECT_NEAR(j["posterior"]["sympathomimetic"].get<double>(), 0.8, 1e-12);
  EXPECT_NEAR(j["posterior"]["serotonin_toxicity"].get<double>(), 0.2, 1e-12);
}

TEST_F(Cli, ClassifyUnknownSignNamesVocabulary) {
  auto r = call({"classify", "--finding", "pulse=fast"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("heart_rate"), std::string::npos);
  EXPECT_NE(r.err.find("mental_status"), std::string::npos);
}

TEST_F(Cli, ClassifyCaseFile) {
  plx::casegen::Rng rng(3);
  plx::casegen::Case c;
  do {
    c = plx::casegen::generate_case(rng, 0, 17);
  } while (c.intended != plx::toxkb::Toxidrome::cholinergic);
  write("cases.jsonl", plx::casegen::to_json_line(c) + "\n");
  auto r = call({"classify", "--cases", path("cases.jsonl"), "--explain"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["id"], 17);
  EXPECT_EQ(j["argmax"], "cholinergic");
  EXPECT_FALSE(j["explanation"]["worlds"].empty());
}

TEST_F(Cli, ExplainChosenToxidrome) {
  auto r = call({"explain", "--finding", "pupil_diameter=small", "--toxidrome", "cholinergic", "--top-n", "2",
                 "--output", path("ex.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(slurp(path("ex.json")));
  EXPECT_EQ(j["explanation"]["toxidrome"], "cholinergic");
  EXPECT_EQ(j["explanation"]["worlds"].size(), 2u);
}

TEST_F(Cli, ClassifyNeedsInput) {
  EXPECT_EQ(call({"classify"}).code, 2);
  EXPECT_EQ(call({"classify", "--kb", path("missing.plx"), "--finding", "heart_rate=normal"}).code, 2);
}

TEST_F(Cli, EvaluateSeededRun) {
  auto r = call({"evaluate", "--seed", "42", "--n", "300", "-o", path("ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string csv = slurp(path("ev/kappas.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.rfind("type,difficulty,kappa\n", 0), 0u);
  auto report = nlohmann::json::parse(slurp(path("ev/report.json")));
  EXPECT_EQ(report["cases"], 300);
  EXPECT_EQ(report["kappas"].size(), 6u);
  auto again = call({"evaluate", "--seed", "42", "--n", "300", "-o", path("ev2")});
  EXPECT_EQ(csv, slurp(path("ev2/kappas.csv")));
  EXPECT_EQ(slurp(path("ev/report.json")), slurp(path("ev2/report.json")));
}

TEST_F(Cli, EvaluateEmptyDatasetFails) {
  write("empty.jsonl", "");
  auto r = call({"evaluate", "--seed", "1", "--dataset", path("empty.jsonl"), "-o", path("ev")});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, EvaluateRequiresSeed) { EXPECT_EQ(call({"evaluate", "-o", path("ev")}).code, 2); }

TEST_F(Cli, EvaluateWithExternalLabels) {
  ASSERT_EQ(call({"generate", "--seed", "8", "--n", "90", "-o", path("g")}).code, 0);
  std::ifstream in(path("g/dataset.jsonl"));
  std::string labels, line;
  while (std::getline(in, line)) {
    auto c = plx::casegen::parse_json_line(line);
    labels += "{\"id\":" + std::to_string(c.id) + ",\"label\":\"" + std::string(plx::toxkb::name(c.intended)) + "\"}\n";
  }
  write("humans.jsonl", labels);
  auto r = call({"evaluate", "--seed", "8", "--dataset", path("g/dataset.jsonl"), "--external-labels",
                 path("humans.jsonl"), "-o", path("ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  std::string csv = slurp(path("ev/kappas.csv"));
  for (int k = 0; k < 3; ++k) {
    EXPECT_NE(csv.find("human_vs_intended," + std::to_string(k) + ",1.000000"), std::string::npos) << csv;
  }
}

TEST_F(Cli, ValidateShippedKb) {
  auto r = call({"kb-validate"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("clauses: 34 (7 prior groups, 21 linking, 6 goal)"), std::string::npos);
  EXPECT_NE(r.out.find("result: pass"), std::string::npos);
}

TEST_F(Cli, ValidateNamesOverfullGroup) {
  write("bad.plx", "0.7::heartRate(X,increased); 0.5::heartRate(X,normal).\n");
  auto r = call({"kb-validate", "--kb", path("bad.plx")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("0.7::heartRate(X,increased)"), std::string::npos) << r.err;
}

TEST_F(Cli, ValidateNamesToxidromeWithoutGoal) {
  std::ifstream in(kData + "/toxkb.plx");
  std::string kb, line;
  while (std::getline(in, line)) {
    if (line.rfind("hasToxidrome(X,opioid) :-", 0) == 0) continue;
    kb += line + "\n";
  }
  write("nogoal.plx", kb);
  auto r = call({"kb-validate", "--kb", path("nogoal.plx")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("self-test: opioid"), std::string::npos) << r.out;
}
