#pragma once

// Parser and printer for the probabilistic rule language used by the
// toxidrome knowledge base. See docs/rule-language.md for the grammar.

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plx/error.hpp"

namespace plx::rulelang {

enum class TokenKind {
  Number,
  Symbol,    // lowercase-initial identifier
  Variable,  // uppercase- or underscore-initial identifier
  ColonColon,
  ColonDash,
  Semicolon,
  Comma,
  Period,
  LParen,
  RParen,
  Star,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  SourceLocation where;
};

std::string_view to_string(TokenKind kind);

// The returned sequence always ends with a TokenKind::End token.
std::vector<Token> tokenize(std::string_view source);

struct Term {
  enum class Kind { Constant, Variable };
  Kind kind = Kind::Constant;
  std::string name;

  static Term constant(std::string name) { return {Kind::Constant, std::move(name)}; }
  static Term variable(std::string name) { return {Kind::Variable, std::move(name)}; }
  bool is_variable() const { return kind == Kind::Variable; }
  bool operator==(const Term&) const = default;
};

struct Atom {
  std::string predicate;
  std::vector<Term> args;

  bool is_ground() const;
  bool operator==(const Atom&) const = default;
};

// Either a literal probability or coefficient * Var, where Var is bound
// by an `is` literal in the same clause body.
struct ProbExpr {
  enum class Kind { Const, Scaled };
  Kind kind = Kind::Const;
  double value = 0.0;  // the probability for Const, the coefficient for Scaled
  std::string var;

  static ProbExpr constant(double p) { return {Kind::Const, p, {}}; }
  static ProbExpr scaled(double coefficient, std::string var) {
    return {Kind::Scaled, coefficient, std::move(var)};
  }
  bool operator==(const ProbExpr&) const = default;
};

struct Binding {
  std::string var;
  double value = 0.0;
  bool operator==(const Binding&) const = default;
};

using Literal = std::variant<Atom, Binding>;

struct HeadElement {
  ProbExpr prob;
  Atom atom;
  bool operator==(const HeadElement&) const = default;
};

struct Clause {
  std::vector<HeadElement> head;
  std::vector<Literal> body;
  bool deterministic = false;  // a single unannotated head

  bool has_atom_body() const;
  bool operator==(const Clause&) const = default;
};

struct Evidence {
  Atom atom;
  bool value = true;
  bool operator==(const Evidence&) const = default;
};

struct Program {
  std::vector<Clause> clauses;
  std::vector<Atom> queries;
  std::vector<Evidence> evidence;
  bool operator==(const Program&) const = default;
};

enum class ClauseKind {
  PriorGroup,   // annotated, no atoms in the body
  Linking,      // annotated, conditioned on body atoms
  Goal,         // deterministic with a body
  Fact,         // deterministic without a body
};
ClauseKind classify(const Clause& clause);

Program parse_program(const std::vector<Token>& tokens);
Program parse_program(std::string_view source);

// Canonical text: one statement per line, shortest round-trip numbers.
std::string print_program(const Program& program);
std::string to_string(const Atom& atom);
std::string to_string(const Clause& clause);
std::string format_number(double value);

}  // namespace plx::rulelang
