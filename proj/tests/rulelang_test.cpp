#include <gtest/gtest.h>

#include <random>

#include "plx/rulelang.hpp"

using namespace plx;
using namespace plx::rulelang;

namespace {

const char* kPriorGroup =
    "0.10::salivation(X,decreased); 0.10::salivation(X,increased); 0.80::salivation(X,usual).";
const char* kAgitation =
    "4*P::hasToxidrome(X,sympathomimetic); P::hasToxidrome(X,serotonergic) :- "
    "mentalStatus(X,agitated), P is 0.2.";
const char* kCholinergic =
    "hasToxidrome(X,cholinergic) :- salivation(X, increased), urination(X, increased), "
    "pupilDiameter(X,small).";

std::vector<TokenKind> kinds(const std::vector<Token>& toks) {
  std::vector<TokenKind> out;
  for (const auto& t : toks) out.push_back(t.kind);
  return out;
}

}  // namespace

TEST(Tokenize, AnnotatedFact) {
  auto toks = tokenize("0.3::a.");
  EXPECT_EQ(kinds(toks), (std::vector<TokenKind>{TokenKind::Number, TokenKind::ColonColon,
                                                 TokenKind::Symbol, TokenKind::Period,
                                                 TokenKind::End}));
  EXPECT_DOUBLE_EQ(toks[0].number, 0.3);
}

TEST(Tokenize, ScaledProbabilityAndBinding) {
  auto toks = tokenize("4*P::h(X) :- P is 0.2.");
  EXPECT_EQ(kinds(toks),
            (std::vector<TokenKind>{TokenKind::Number, TokenKind::Star, TokenKind::Variable,
                                    TokenKind::ColonColon, TokenKind::Symbol, TokenKind::LParen,
                                    TokenKind::Variable, TokenKind::RParen, TokenKind::ColonDash,
                                    TokenKind::Variable, TokenKind::Symbol, TokenKind::Number,
                                    TokenKind::Period, TokenKind::End}));
}

TEST(Tokenize, CommentsAndPositions) {
  auto toks = tokenize("% header\n  a.\n");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0].where.line, 2);
  EXPECT_EQ(toks[0].where.column, 3);
}

TEST(Tokenize, RejectsStrayCharacter) {
  try {
    tokenize("a.\n b & c.");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.where().line, 2);
    EXPECT_EQ(e.where().column, 4);
  }
}

TEST(Tokenize, ExponentNumbers) {
  auto toks = tokenize("1e-05::a. 2.5E+1");
  EXPECT_DOUBLE_EQ(toks[0].number, 1e-5);
  EXPECT_DOUBLE_EQ(toks[4].number, 25.0);
}

TEST(Parse, PriorGroup) {
  Program p = parse_program(kPriorGroup);
  ASSERT_EQ(p.clauses.size(), 1u);
  const Clause& c = p.clauses[0];
  EXPECT_FALSE(c.deterministic);
  ASSERT_EQ(c.head.size(), 3u);
  EXPECT_EQ(c.head[2].prob, ProbExpr::constant(0.80));
  EXPECT_EQ(c.head[2].atom.predicate, "salivation");
  EXPECT_EQ(c.head[2].atom.args[1], Term::constant("usual"));
  EXPECT_EQ(classify(c), ClauseKind::PriorGroup);
}

TEST(Parse, ScaledDisjunction) {
  Program p = parse_program(kAgitation);
  const Clause& c = p.clauses.at(0);
  EXPECT_EQ(c.head[0].prob, ProbExpr::scaled(4, "P"));
  EXPECT_EQ(c.head[1].prob, ProbExpr::scaled(1, "P"));
  ASSERT_EQ(c.body.size(), 2u);
  EXPECT_EQ(std::get<Binding>(c.body[1]), (Binding{"P", 0.2}));
  EXPECT_EQ(classify(c), ClauseKind::Linking);
}

TEST(Parse, DeterministicGoal) {
  Program p = parse_program(kCholinergic);
  const Clause& c = p.clauses.at(0);
  EXPECT_TRUE(c.deterministic);
  EXPECT_EQ(c.body.size(), 3u);
  EXPECT_EQ(classify(c), ClauseKind::Goal);
}

TEST(Parse, Directives) {
  Program p = parse_program("0.5::a. query(a). evidence(b, false).");
  ASSERT_EQ(p.queries.size(), 1u);
  EXPECT_EQ(p.queries[0].predicate, "a");
  ASSERT_EQ(p.evidence.size(), 1u);
  EXPECT_FALSE(p.evidence[0].value);
}

TEST(Parse, RejectsProbabilityMassAboveOne) {
  EXPECT_THROW(parse_program("0.6::a; 0.5::b."), SemanticError);
  EXPECT_NO_THROW(parse_program("0.5::a; 0.5::b."));
}

TEST(Parse, RejectsUnboundProbabilityVariable) {
  EXPECT_THROW(parse_program("P::a :- b."), SemanticError);
  EXPECT_THROW(parse_program("P::a :- P is 0.1, P is 0.2."), SemanticError);
}

TEST(Parse, RejectsDuplicateHeads) { EXPECT_THROW(parse_program("0.1::a; 0.2::a."), SemanticError); }

TEST(Parse, RejectsArityMismatch) { EXPECT_THROW(parse_program("a(x). b :- a(x,y)."), SemanticError); }

TEST(Parse, RejectsDeterministicHeadOfPriorPredicate) {
  EXPECT_THROW(parse_program("0.2::s(X,high). s(X,low) :- t(X)."), SemanticError);
  EXPECT_NO_THROW(parse_program("0.2::s(X,high) :- u(X). s(X,low) :- t(X)."));
}

TEST(Parse, RejectsUnannotatedDisjunction) {
  EXPECT_THROW(parse_program("a; b."), SyntaxError);
}

TEST(Parse, ErrorCarriesPosition) {
  try {
    parse_program("a :- b\nc.");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.where().line, 2);
    EXPECT_EQ(e.where().column, 1);
  }
}

TEST(Print, CanonicalText) {
  Program p = parse_program(std::string(kAgitation) + kCholinergic);
  EXPECT_EQ(print_program(p),
            "4*P::hasToxidrome(X,sympathomimetic); P::hasToxidrome(X,serotonergic) :- "
            "mentalStatus(X,agitated), P is 0.2.\n"
            "hasToxidrome(X,cholinergic) :- salivation(X,increased), urination(X,increased), "
            "pupilDiameter(X,small).\n");
}

TEST(Print, RoundTripIsStructural) {
  Program p = parse_program(std::string(kPriorGroup) + kAgitation + kCholinergic +
                            "query(hasToxidrome(pt,cholinergic)). evidence(mentalStatus(pt,agitated), true).");
  Program q = parse_program(print_program(p));
  EXPECT_EQ(p, q);
  EXPECT_EQ(print_program(q), print_program(p));
}

TEST(Print, ParsingIsDeterministic) {
  std::string src = std::string(kPriorGroup) + kAgitation;
  EXPECT_EQ(parse_program(src), parse_program(src));
}

TEST(Fuzz, RandomBytesNeverCrash) {
  std::mt19937_64 rng(7);
  const std::string alphabet = "abcXY_09.:-;,()*% \n\tisqueryevidence\x01\xff";
  for (int i = 0; i < 5000; ++i) {
    std::string s(rng() % 40, ' ');
    for (char& c : s) c = alphabet[rng() % alphabet.size()];
    try {
      Program p = parse_program(s);
      EXPECT_EQ(parse_program(print_program(p)), p) << s;
    } catch (const SyntaxError&) {
    } catch (const SemanticError&) {
    }
  }
}
