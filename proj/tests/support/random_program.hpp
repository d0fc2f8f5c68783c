#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "naive_oracle.hpp"
#include "plx/rulelang.hpp"

namespace plx::oracle {

struct RandomProgramLimits {
  std::size_t max_groups = 12;
  std::size_t max_rules = 20;
  std::size_t atoms = 10;
  std::size_t max_worlds = 200'000;
};

struct RandomCase {
  rulelang::Program program;
  std::string text;
  std::string query;
  NaiveEvidence evidence;
};

// Acyclic propositional program with random annotated and deterministic clauses.
RandomCase random_case(std::mt19937_64& rng, const RandomProgramLimits& limits = {});

}  // namespace plx::oracle
