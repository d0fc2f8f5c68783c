#include "plx/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plx/casegen.hpp"
#include "plx/evalkappa.hpp"
#include "plx/toxkb.hpp"

namespace plx::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

const CLI::Validator kPositive(
    [](std::string& text) -> std::string {
      std::size_t used = 0;
      try {
        if (std::stoll(text, &used) > 0 && used == text.size()) return {};
      } catch (const std::exception&) {
      }
      return "must be a positive integer, got '" + text + "'";
    },
    "POSITIVE");

struct KbFlags {
  std::string kb = PLX_DEFAULT_KB;
  std::string priors;
  std::size_t cap = worlds::InferenceOptions{}.enumeration_cap;
  bool skip_self_test = false;

  void attach(CLI::App* app, bool allow_skip) {
    app->add_option("--kb", kb, "Knowledge base file")->check(CLI::ExistingFile)->capture_default_str();
    app->add_option("--priors", priors, "Toxidrome priors (name = probability lines)")
        ->check(CLI::ExistingFile);
    app->add_option("--enumeration-cap", cap, "Most choice groups one query may branch on")
        ->check(kPositive)
        ->capture_default_str();
    if (allow_skip) app->add_flag("--skip-self-test", skip_self_test, "Load a KB that fails the self-test");
  }

  toxkb::LoadOptions options() const {
    toxkb::LoadOptions o;
    if (!priors.empty()) o.priors = toxkb::load_priors(priors);
    o.inference.enumeration_cap = cap;
    o.self_test = !skip_self_test;
    return o;
  }
};

casegen::DifficultyWeights parse_weights(const std::vector<double>& w) {
  if (w.empty()) return casegen::kEqualDifficulty;
  if (w.size() != casegen::kDatasetDifficulties) {
    throw UsageError("--difficulty-weights needs three values");
  }
  casegen::DifficultyWeights out{};
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) throw UsageError("--difficulty-weights must be non-negative");
    out[i] = w[i];
    sum += w[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw UsageError("--difficulty-weights must sum to 1");
  return out;
}

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

ordered_json per_toxidrome(const std::array<double, toxkb::kToxidromeCount>& v) {
  ordered_json j;
  for (toxkb::Toxidrome t : toxkb::kToxidromes) j[std::string(toxkb::name(t))] = v[static_cast<std::size_t>(t)];
  return j;
}

ordered_json classify_json(const toxkb::KnowledgeBase& kb, const ordered_json& id,
                           const std::vector<toxkb::Finding>& findings, bool explain,
                           std::optional<toxkb::Toxidrome> focus, std::size_t top_n) {
  ordered_json j;
  j["id"] = id;
  try {
    auto c = kb.classify(findings);
    j["posterior"] = per_toxidrome(c.posterior);
    j["likelihood"] = per_toxidrome(c.likelihood);
    j["argmax"] = toxkb::name(c.best);
    j["evidence_probability"] = c.evidence_probability;
    if (explain) {
      toxkb::Toxidrome target = focus.value_or(c.best);
      ordered_json ex;
      ex["toxidrome"] = toxkb::name(target);
      ex["worlds"] = ordered_json::array();
      for (const auto& e : kb.explain(findings, target, top_n)) {
        ex["worlds"].push_back({{"probability", e.probability},
                                {"choices", e.choices},
                                {"fired_rules", e.fired_rules}});
      }
      j["explanation"] = ex;
    }
  } catch (const InferenceError& e) {
    j["abstained"] = true;
    j["reason"] = e.what();
  }
  return j;
}

int cmd_generate(std::uint64_t seed, std::size_t n, const std::vector<double>& weights,
                 const std::string& dir, std::ostream& out) {
  auto w = parse_weights(weights);
  prepare_dir(dir);
  auto cases = casegen::generate_dataset(seed, n, w);
  fs::path data = fs::path(dir) / "dataset.jsonl";
  fs::path counts = fs::path(dir) / "counts.csv";
  {
    auto f = open_out(data);
    casegen::write_jsonl(f, cases);
  }
  {
    auto f = open_out(counts);
    casegen::write_counts_csv(f, casegen::count_cases(cases));
  }
  out << "wrote " << cases.size() << " cases to " << data.string() << " and counts to "
      << counts.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Probabilistic toxidrome reasoning: generate cases, classify, evaluate"};
  app.name("plx");
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::size_t n = 300;
  std::vector<double> weights;
  std::string out_dir = ".";

  auto* gen = app.add_subcommand("generate", "Write a seeded synthetic dataset and its counts table");
  gen->add_option("--seed", seed, "Random seed")->required();
  gen->add_option("--n", n, "Number of cases")->check(kPositive)->capture_default_str();
  gen->add_option("--difficulty-weights", weights, "Weights for difficulties 0,1,2")->delimiter(',');
  gen->add_option("--output-dir,-o", out_dir, "Where dataset.jsonl and counts.csv go")->capture_default_str();

  KbFlags cls_kb;
  std::string cases_path, output_path, toxidrome;
  std::vector<std::string> findings;
  bool explain_flag = false;
  std::size_t top_n = 3;
  auto* cls = app.add_subcommand("classify", "Posterior over the six toxidromes for each case");
  auto* exp = app.add_subcommand("explain", "Classify and list the heaviest supporting worlds");
  for (auto* sub : {cls, exp}) {
    cls_kb.attach(sub, true);
    auto* c = sub->add_option("--cases", cases_path, "JSONL dataset")->check(CLI::ExistingFile);
    auto* f = sub->add_option("--finding", findings, "Inline finding sign=value (repeatable)");
    c->excludes(f);
    f->excludes(c);
    sub->add_option("--top-n", top_n, "Worlds per explanation")->check(kPositive)->capture_default_str();
    sub->add_option("--output", output_path, "Write JSON lines here instead of standard output");
  }
  cls->add_flag("--explain", explain_flag, "Include an explanation for the argmax");
  exp->add_option("--toxidrome", toxidrome, "Explain this toxidrome instead of the argmax");

  KbFlags eval_kb;
  std::string dataset_path, labels_path, rules_path;
  auto* eval = app.add_subcommand("evaluate", "Kappa of the KB and the tree baseline against intended labels");
  eval_kb.attach(eval, true);
  eval->add_option("--seed", seed, "Random seed for the generated dataset")->required();
  eval->add_option("--n", n, "Number of cases")->check(kPositive)->capture_default_str();
  eval->add_option("--difficulty-weights", weights, "Weights for difficulties 0,1,2")->delimiter(',');
  eval->add_option("--dataset", dataset_path, "Evaluate this JSONL dataset instead of generating one")
      ->check(CLI::ExistingFile);
  eval->add_option("--external-labels", labels_path, "JSONL of human labels (id, label, rater)")
      ->check(CLI::ExistingFile);
  eval->add_option("--plausibility-rules", rules_path, "Exclude cases matching these patterns")
      ->check(CLI::ExistingFile);
  eval->add_option("--output-dir,-o", out_dir, "Where kappas.csv and report.json go")->capture_default_str();

  KbFlags val_kb;
  auto* val = app.add_subcommand("kb-validate", "Parse, ground, lint and self-test a knowledge base");
  val_kb.attach(val, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_generate(seed, n, weights, out_dir, out);

    if (cls->parsed() || exp->parsed()) {
      const bool explain = exp->parsed() || explain_flag;
      std::optional<toxkb::Toxidrome> focus;
      std::vector<toxkb::Finding> inline_findings;
      try {
        if (!toxidrome.empty()) focus = toxkb::parse_toxidrome(toxidrome);
        for (const auto& f : findings) inline_findings.push_back(toxkb::parse_finding(f));
      } catch (const DataError& e) {
        throw UsageError(e.what());
      }
      if (cases_path.empty() && findings.empty()) throw UsageError("give --cases or at least one --finding");
      auto kb = toxkb::load_kb(cls_kb.kb, cls_kb.options());
      std::ofstream file;
      std::ostream* sink = &out;
      if (!output_path.empty()) {
        file = open_out(output_path);
        sink = &file;
      }
      if (!cases_path.empty()) {
        for (const auto& c : casegen::read_jsonl(cases_path)) {
          *sink << classify_json(kb, c.id, c.findings, explain, focus, top_n).dump() << "\n";
        }
      } else {
        *sink << classify_json(kb, "inline", inline_findings, explain, focus, top_n).dump() << "\n";
      }
      return kOk;
    }

    if (eval->parsed()) {
      auto w = parse_weights(weights);
      prepare_dir(out_dir);
      auto kb = toxkb::load_kb(eval_kb.kb, eval_kb.options());
      auto cases = dataset_path.empty() ? casegen::generate_dataset(seed, n, w)
                                        : casegen::read_jsonl(dataset_path);
      evalkappa::BenchmarkConfig cfg;
      if (!labels_path.empty()) cfg.external = evalkappa::read_external_labels(labels_path);
      if (!rules_path.empty()) {
        cfg.plausibility = casegen::parse_plausibility_rules(toxkb::read_file(rules_path));
      }
      auto result = evalkappa::run_benchmark(kb, cases, cfg);
      {
        auto f = open_out(fs::path(out_dir) / "kappas.csv");
        evalkappa::write_kappa_csv(f, result);
      }
      {
        auto f = open_out(fs::path(out_dir) / "report.json");
        f << evalkappa::report_json(result) << "\n";
      }
      evalkappa::write_kappa_csv(out, result);
      out << "cases: " << result.outcomes.size() << ", excluded: " << result.excluded
          << ", abstentions: " << result.abstentions << "\n";
      return kOk;
    }

    if (val->parsed()) {
      auto opts = val_kb.options();
      opts.self_test = false;
      auto kb = toxkb::load_kb(val_kb.kb, opts);
      auto report = toxkb::lint(kb.program());
      out << "parse: ok\n";
      out << "clauses: " << report.total() << " (" << report.prior_groups << " prior groups, "
          << report.linking << " linking, " << report.goals << " goal)\n";
      out << "ground: " << kb.ground().groups().size() << " choice groups, "
          << kb.ground().rules().size() << " rules\n";
      bool ok = report.ok();
      for (const auto& p : report.problems) out << "lint: " << p << "\n";
      auto failures = kb.self_test();
      for (const auto& f : failures) {
        out << "self-test: " << toxkb::name(f.toxidrome) << ": " << f.reason << "\n";
      }
      ok = ok && failures.empty();
      out << (ok ? "result: pass\n" : "result: fail\n");
      return ok ? kOk : kRuntimeError;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace plx::cli
