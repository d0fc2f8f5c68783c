#include <array>
#include <charconv>

#include "plx/rulelang.hpp"

namespace plx::rulelang {

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

std::string to_string(const Atom& atom) {
  std::string out = atom.predicate;
  if (atom.args.empty()) return out;
  out += '(';
  for (std::size_t i = 0; i < atom.args.size(); ++i) {
    if (i) out += ',';
    out += atom.args[i].name;
  }
  out += ')';
  return out;
}

namespace {

std::string to_string(const ProbExpr& p) {
  if (p.kind == ProbExpr::Kind::Const) return format_number(p.value);
  if (p.value == 1.0) return p.var;
  return format_number(p.value) + "*" + p.var;
}

std::string to_string(const Literal& lit) {
  if (const auto* b = std::get_if<Binding>(&lit)) return b->var + " is " + format_number(b->value);
  return to_string(std::get<Atom>(lit));
}

}  // namespace

std::string to_string(const Clause& clause) {
  std::string out;
  if (clause.deterministic) {
    out = to_string(clause.head.front().atom);
  } else {
    for (std::size_t i = 0; i < clause.head.size(); ++i) {
      if (i) out += "; ";
      out += to_string(clause.head[i].prob) + "::" + to_string(clause.head[i].atom);
    }
  }
  if (!clause.body.empty()) {
    out += " :- ";
    for (std::size_t i = 0; i < clause.body.size(); ++i) {
      if (i) out += ", ";
      out += to_string(clause.body[i]);
    }
  }
  return out + ".";
}

std::string print_program(const Program& program) {
  std::string out;
  for (const Clause& c : program.clauses) out += to_string(c) + "\n";
  for (const Evidence& e : program.evidence) {
    out += "evidence(" + to_string(e.atom) + ", " + (e.value ? "true" : "false") + ").\n";
  }
  for (const Atom& q : program.queries) out += "query(" + to_string(q) + ").\n";
  return out;
}

}  // namespace plx::rulelang
