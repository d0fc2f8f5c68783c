#include <algorithm>
#include <map>
#include <set>

#include "plx/rulelang.hpp"

namespace plx::rulelang {

bool Atom::is_ground() const {
  return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

bool Clause::has_atom_body() const {
  return std::any_of(body.begin(), body.end(),
                     [](const Literal& l) { return std::holds_alternative<Atom>(l); });
}

ClauseKind classify(const Clause& clause) {
  bool atoms = clause.has_atom_body();
  if (clause.deterministic) return atoms ? ClauseKind::Goal : ClauseKind::Fact;
  return atoms ? ClauseKind::Linking : ClauseKind::PriorGroup;
}

namespace {

constexpr double kSumTolerance = 1e-9;

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {
    if (toks_.empty() || toks_.back().kind != TokenKind::End) {
      throw SyntaxError("token stream is not terminated", {});
    }
  }

  Program run() {
    while (peek().kind != TokenKind::End) statement();
    check_predicate_roles();
    return std::move(prog_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }

  const Token& take() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& what, const Token& at) const {
    std::string got = at.kind == TokenKind::End ? "end of input" : "'" + at.text + "'";
    throw SyntaxError(what + ", found " + got, at.where);
  }

  const Token& expect(TokenKind kind, const char* context) {
    if (peek().kind != kind) {
      fail("expected " + std::string(to_string(kind)) + " " + context, peek());
    }
    return take();
  }

  void statement() {
    const Token& first = peek();
    if (first.kind == TokenKind::Symbol && (first.text == "query" || first.text == "evidence") &&
        peek(1).kind == TokenKind::LParen) {
      directive();
      return;
    }
    clause();
  }

  void directive() {
    const Token& name = take();
    expect(TokenKind::LParen, "after directive name");
    SourceLocation at = peek().where;
    Atom a = atom();
    if (!a.is_ground()) {
      throw SyntaxError(name.text + " directive needs a ground atom: " + to_string(a), at);
    }
    note_arity(a, at);
    if (name.text == "query") {
      expect(TokenKind::RParen, "to close query");
      prog_.queries.push_back(std::move(a));
    } else {
      expect(TokenKind::Comma, "between evidence atom and truth value");
      const Token& v = peek();
      if (v.kind != TokenKind::Symbol || (v.text != "true" && v.text != "false")) {
        fail("expected 'true' or 'false'", v);
      }
      take();
      expect(TokenKind::RParen, "to close evidence");
      prog_.evidence.push_back({std::move(a), v.text == "true"});
    }
    expect(TokenKind::Period, "at end of directive");
  }

  Atom atom() {
    const Token& name = peek();
    if (name.kind != TokenKind::Symbol) fail("expected predicate name", name);
    take();
    if (name.text == "query" || name.text == "evidence" || name.text == "is") {
      throw SyntaxError("'" + name.text + "' is reserved", name.where);
    }
    Atom a{name.text, {}};
    if (peek().kind != TokenKind::LParen) return a;
    take();
    for (;;) {
      const Token& t = peek();
      if (t.kind == TokenKind::Symbol) {
        a.args.push_back(Term::constant(t.text));
      } else if (t.kind == TokenKind::Variable) {
        a.args.push_back(Term::variable(t.text));
      } else {
        fail("expected argument", t);
      }
      take();
      if (peek().kind == TokenKind::Comma) {
        take();
        continue;
      }
      expect(TokenKind::RParen, "after arguments");
      return a;
    }
  }

  HeadElement annotated_element() {
    const Token& t = peek();
    ProbExpr prob;
    if (t.kind == TokenKind::Number) {
      take();
      if (peek().kind == TokenKind::Star) {
        take();
        const Token& var = expect(TokenKind::Variable, "after '*'");
        prob = ProbExpr::scaled(t.number, var.text);
      } else {
        prob = ProbExpr::constant(t.number);
      }
    } else if (t.kind == TokenKind::Variable) {
      take();
      prob = ProbExpr::scaled(1.0, t.text);
    } else {
      fail("expected probability annotation", t);
    }
    expect(TokenKind::ColonColon, "after probability");
    return {prob, atom()};
  }

  void clause() {
    SourceLocation start = peek().where;
    Clause c;
    if (peek().kind == TokenKind::Symbol) {
      c.deterministic = true;
      c.head.push_back({ProbExpr::constant(1.0), atom()});
      if (peek().kind == TokenKind::Semicolon) {
        fail("disjunctive heads need probability annotations", peek());
      }
    } else {
      c.head.push_back(annotated_element());
      while (peek().kind == TokenKind::Semicolon) {
        take();
        c.head.push_back(annotated_element());
      }
    }
    if (peek().kind == TokenKind::ColonDash) {
      take();
      for (;;) {
        c.body.push_back(literal());
        if (peek().kind != TokenKind::Comma) break;
        take();
      }
    }
    expect(TokenKind::Period, "at end of clause");
    validate(c, start);
    prog_.clauses.push_back(std::move(c));
  }

  Literal literal() {
    if (peek().kind == TokenKind::Variable && peek(1).kind == TokenKind::Symbol &&
        peek(1).text == "is") {
      std::string var = take().text;
      take();
      const Token& n = expect(TokenKind::Number, "after 'is'");
      return Binding{std::move(var), n.number};
    }
    return atom();
  }

  [[noreturn]] void semantic(const Clause& c, SourceLocation at, const std::string& msg) const {
    throw SemanticError("line " + std::to_string(at.line) + ": clause " +
                        std::to_string(prog_.clauses.size() + 1) + " `" + to_string(c) +
                        "`: " + msg);
  }

  void validate(const Clause& c, SourceLocation at) {
    std::map<std::string, int> bound;
    std::set<std::string> atom_vars;
    for (const Literal& lit : c.body) {
      if (const auto* b = std::get_if<Binding>(&lit)) {
        if (++bound[b->var] > 1) semantic(c, at, "variable " + b->var + " is bound more than once");
      } else {
        for (const Term& t : std::get<Atom>(lit).args) {
          if (t.is_variable()) atom_vars.insert(t.name);
        }
      }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < c.head.size(); ++i) {
      const HeadElement& h = c.head[i];
      for (const Term& t : h.atom.args) {
        if (t.is_variable()) atom_vars.insert(t.name);
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (c.head[j].atom == h.atom) {
          semantic(c, at, "head atom " + to_string(h.atom) + " appears twice");
        }
      }
      if (h.prob.kind == ProbExpr::Kind::Const) {
        if (h.prob.value > 1.0 + kSumTolerance) {
          semantic(c, at, "probability " + format_number(h.prob.value) + " exceeds 1");
        }
        total += h.prob.value;
      } else {
        if (h.prob.value <= 0.0) semantic(c, at, "scale factor must be positive");
        if (!bound.count(h.prob.var)) {
          semantic(c, at, "probability variable " + h.prob.var + " is not bound by 'is'");
        }
      }
    }
    if (total > 1.0 + kSumTolerance) {
      semantic(c, at, "head probabilities sum to " + format_number(total) + ", more than 1");
    }
    for (const auto& [var, n] : bound) {
      if (atom_vars.count(var)) {
        semantic(c, at, "variable " + var + " is used both as a term and as a probability");
      }
    }
    for (const HeadElement& h : c.head) note_arity(h.atom, at, &c);
    for (const Literal& lit : c.body) {
      if (const auto* a = std::get_if<Atom>(&lit)) note_arity(*a, at, &c);
    }
  }

  void note_arity(const Atom& a, SourceLocation at, const Clause* c = nullptr) {
    auto [it, fresh] = arity_.emplace(a.predicate, a.args.size());
    if (!fresh && it->second != a.args.size()) {
      std::string msg = "predicate " + a.predicate + " used with arity " +
                        std::to_string(a.args.size()) + " and " + std::to_string(it->second);
      if (c) semantic(*c, at, msg);
      throw SemanticError("line " + std::to_string(at.line) + ": " + msg);
    }
  }

  void check_predicate_roles() const {
    std::set<std::string> prior_heads;
    for (const Clause& c : prog_.clauses) {
      if (classify(c) != ClauseKind::PriorGroup) continue;
      for (const HeadElement& h : c.head) prior_heads.insert(h.atom.predicate);
    }
    for (std::size_t i = 0; i < prog_.clauses.size(); ++i) {
      const Clause& c = prog_.clauses[i];
      if (c.deterministic && prior_heads.count(c.head[0].atom.predicate)) {
        throw SemanticError("clause " + std::to_string(i + 1) + " `" + to_string(c) +
                            "`: predicate " + c.head[0].atom.predicate +
                            " is already defined by an unconditional probabilistic group");
      }
    }
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  Program prog_;
  std::map<std::string, std::size_t> arity_;
};

}  // namespace

Program parse_program(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

Program parse_program(std::string_view source) { return parse_program(tokenize(source)); }

}  // namespace plx::rulelang
