#include <cctype>
#include <charconv>
#include <cstdio>

#include "plx/rulelang.hpp"

namespace plx {

namespace {
std::string located(const std::string& message, SourceLocation where) {
  return std::to_string(where.line) + ":" + std::to_string(where.column) + ": " + message;
}
}  // namespace

SyntaxError::SyntaxError(const std::string& message, SourceLocation where)
    : Error(located(message, where)), where_(where), detail_(message) {}

}  // namespace plx

namespace plx::rulelang {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Number: return "number";
    case TokenKind::Symbol: return "symbol";
    case TokenKind::Variable: return "variable";
    case TokenKind::ColonColon: return "'::'";
    case TokenKind::ColonDash: return "':-'";
    case TokenKind::Semicolon: return "';'";
    case TokenKind::Comma: return "','";
    case TokenKind::Period: return "'.'";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::Star: return "'*'";
    case TokenKind::End: return "end of input";
  }
  return "token";
}

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string describe_char(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u >= 0x21 && u < 0x7f) return std::string("'") + c + "'";
  char buf[8];
  std::snprintf(buf, sizeof buf, "\\x%02x", u);
  return buf;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_blank();
      SourceLocation at = here();
      if (pos_ >= src_.size()) {
        out.push_back({TokenKind::End, "", 0.0, at});
        return out;
      }
      char c = src_[pos_];
      if (is_digit(c)) {
        out.push_back(number(at));
      } else if (std::islower(static_cast<unsigned char>(c))) {
        out.push_back({TokenKind::Symbol, identifier(), 0.0, at});
      } else if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back({TokenKind::Variable, identifier(), 0.0, at});
      } else {
        out.push_back(punctuation(at));
      }
    }
  }

 private:
  SourceLocation here() const { return {line_, col_}; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        return;
      }
    }
  }

  std::string identifier() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
    return std::string(src_.substr(start, pos_ - start));
  }

  Token number(SourceLocation at) {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && is_digit(src_[pos_ + 1])) {
      advance();
      while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && is_digit(src_[look])) {
        while (pos_ < look) advance();
        while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
      }
    }
    if (pos_ < src_.size() && is_ident_char(src_[pos_])) {
      throw SyntaxError("malformed number", at);
    }
    std::string text(src_.substr(start, pos_ - start));
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw SyntaxError("number out of range: " + text, at);
    }
    return {TokenKind::Number, std::move(text), value, at};
  }

  Token punctuation(SourceLocation at) {
    char c = src_[pos_];
    auto single = [&](TokenKind kind) {
      advance();
      return Token{kind, std::string(1, c), 0.0, at};
    };
    switch (c) {
      case ';': return single(TokenKind::Semicolon);
      case ',': return single(TokenKind::Comma);
      case '.': return single(TokenKind::Period);
      case '(': return single(TokenKind::LParen);
      case ')': return single(TokenKind::RParen);
      case '*': return single(TokenKind::Star);
      case ':':
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == ':') {
          advance();
          advance();
          return {TokenKind::ColonColon, "::", 0.0, at};
        }
        if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
          advance();
          advance();
          return {TokenKind::ColonDash, ":-", 0.0, at};
        }
        throw SyntaxError("expected '::' or ':-' after ':'", at);
      default:
        throw SyntaxError("unexpected character " + describe_char(c), at);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace plx::rulelang
