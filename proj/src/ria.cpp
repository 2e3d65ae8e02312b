// Copyright 2026 The fusesim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fusesim/ria.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "fusesim/topology.hpp"

namespace fusesim {

IndexExpr::Kind IndexExpr::kind() const {
  if (atoms.empty()) return Kind::Affine;
  return atoms.front().kind == NonAffineAtom::Kind::FloorDiv ? Kind::FloorDiv : Kind::Mod;
}

bool IndexExpr::is_unit_offset_of(const std::string& own) const {
  if (!atoms.empty() || coeffs.size() != 1) return false;
  auto it = coeffs.find(own);
  return it != coeffs.end() && it->second == 1;
}

namespace {

struct Token {
  enum class Type { Ident, Int, Punct, End };
  Type type = Type::End;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int column = 1;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip();
      Token t;
      t.line = line_;
      t.column = col_;
      t.offset = pos_;
      if (pos_ >= src_.size()) {
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.type = Token::Type::Ident;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          t.text.push_back(src_[pos_]);
          advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.type = Token::Type::Int;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          t.text.push_back(src_[pos_]);
          advance();
        }
        if (t.text.size() > 9) throw ParseError("integer too large", t.line, t.column);
        t.value = std::stoll(t.text);
      } else if (std::string_view("[](),=+-*/%").find(c) != std::string_view::npos) {
        t.type = Token::Type::Punct;
        t.text = std::string(1, c);
        advance();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", t.line, t.column);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> toks) : src_(src), toks_(std::move(toks)) {}

  RecurrenceSystem run() {
    while (peek().type != Token::Type::End) {
      if (is_ident("var")) {
        decl_var();
      } else if (is_ident("const")) {
        decl_const();
      } else {
        relation();
      }
    }
    if (sys_.relations.empty()) throw ParseError("expected at least one relation", peek().line, peek().column);
    resolve();
    return std::move(sys_);
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(i_ + ahead, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool is_ident(std::string_view s) const { return peek().type == Token::Type::Ident && peek().text == s; }
  bool is_punct(char c) const { return peek().type == Token::Type::Punct && peek().text[0] == c; }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    throw ParseError(msg, at.line, at.column);
  }
  std::string describe(const Token& t) const {
    return t.type == Token::Type::End ? "end of input" : "'" + t.text + "'";
  }
  void expect(char c) {
    if (!is_punct(c)) fail(std::string("expected '") + c + "', found " + describe(peek()), peek());
    next();
  }
  const Token& expect_ident(const char* what) {
    if (peek().type != Token::Type::Ident) fail(std::string("expected ") + what + ", found " + describe(peek()), peek());
    return next();
  }
  std::int64_t expect_int() {
    if (peek().type != Token::Type::Int) fail("expected integer, found " + describe(peek()), peek());
    return next().value;
  }
  static bool keyword(const std::string& s) { return s == "var" || s == "const" || s == "floor"; }

  void decl_var() {
    next();
    const Token& name = expect_ident("variable name");
    if (keyword(name.text)) fail("reserved word '" + name.text + "'", name);
    expect('[');
    std::int64_t arity = expect_int();
    expect(']');
    if (declared_.count(name.text)) fail("variable '" + name.text + "' declared twice", name);
    declared_[name.text] = static_cast<int>(arity);
  }

  void decl_const() {
    next();
    const Token& name = expect_ident("constant name");
    if (keyword(name.text)) fail("reserved word '" + name.text + "'", name);
    expect('=');
    std::int64_t v = expect_int();
    if (sys_.constants.count(name.text)) fail("constant '" + name.text + "' defined twice", name);
    sys_.constants[name.text] = static_cast<int>(v);
  }

  void relation() {
    Relation r;
    const Token& name = expect_ident("relation left-hand side");
    if (keyword(name.text)) fail("reserved word '" + name.text + "'", name);
    if (sys_.constants.count(name.text)) fail("'" + name.text + "' is a constant", name);
    r.lhs = name.text;
    r.line = name.line;
    lhs_pos_.push_back({name.line, name.column});
    expect('[');
    while (true) {
      const Token& idx = peek();
      if (idx.type != Token::Type::Ident || keyword(idx.text) || sys_.constants.count(idx.text) ||
          peek(1).type != Token::Type::Punct || (peek(1).text != "," && peek(1).text != "]")) {
        fail("left-hand side indices must be plain loop indices", idx);
      }
      next();
      if (std::find(r.lhs_indices.begin(), r.lhs_indices.end(), idx.text) != r.lhs_indices.end()) {
        fail("loop index '" + idx.text + "' repeated on the left-hand side", idx);
      }
      r.lhs_indices.push_back(idx.text);
      if (is_punct(']')) break;
      expect(',');
    }
    expect(']');
    expect('=');
    r.terms.push_back(term(r));
    while (is_punct('+') || is_punct('*')) {
      r.ops.push_back(next().text[0]);
      r.terms.push_back(term(r));
    }
    sys_.relations.push_back(std::move(r));
  }

  Term term(const Relation& r) {
    Term t;
    const Token& head = peek();
    t.line = head.line;
    t.column = head.column;
    const std::size_t start = head.offset;
    if (head.type == Token::Type::Int) {
      t.literal = next().value;
    } else if (head.type == Token::Type::Ident && !keyword(head.text) && !sys_.constants.count(head.text)) {
      t.name = next().text;
      if (is_punct('[')) {
        next();
        t.bracketed = true;
        if (!is_punct(']')) {
          t.indices.push_back(index(r));
          while (is_punct(',')) {
            next();
            t.indices.push_back(index(r));
          }
        }
        expect(']');
      }
    } else if (head.type == Token::Type::Ident && sys_.constants.count(head.text)) {
      t.literal = sys_.constants.at(next().text);
    } else {
      fail("expected a term, found " + describe(head), head);
    }
    t.text = std::string(src_.substr(start, toks_[i_ - 1].offset + toks_[i_ - 1].text.size() - start));
    return t;
  }

  int modulus() {
    const Token& t = peek();
    int m;
    if (t.type == Token::Type::Int) {
      m = static_cast<int>(next().value);
    } else if (t.type == Token::Type::Ident && sys_.constants.count(t.text)) {
      m = sys_.constants.at(next().text);
    } else {
      fail("expected modulus, found " + describe(t), t);
    }
    if (m < 2) fail("modulus must be at least 2", t);
    return m;
  }

  const Token& loop_index(const Relation& r) {
    const Token& t = expect_ident("loop index");
    if (std::find(r.lhs_indices.begin(), r.lhs_indices.end(), t.text) == r.lhs_indices.end()) {
      fail("unknown loop index '" + t.text + "'", t);
    }
    return t;
  }

  IndexExpr index(const Relation& r) {
    IndexExpr e;
    const std::size_t start = peek().offset;
    int sign = 1;
    if (is_punct('-')) {
      next();
      sign = -1;
    }
    while (true) {
      const Token& t = peek();
      if (t.type == Token::Type::Int) {
        std::int64_t v = next().value;
        if (is_punct('*')) {
          next();
          e.coeffs[loop_index(r).text] += sign * static_cast<int>(v);
        } else {
          e.offset += sign * static_cast<int>(v);
        }
      } else if (t.type == Token::Type::Ident && t.text == "floor") {
        next();
        expect('(');
        const Token& base = loop_index(r);
        expect('/');
        int m = modulus();
        expect(')');
        e.atoms.push_back({NonAffineAtom::Kind::FloorDiv, base.text, m, sign});
      } else if (t.type == Token::Type::Ident && sys_.constants.count(t.text)) {
        e.offset += sign * sys_.constants.at(next().text);
      } else if (t.type == Token::Type::Ident) {
        const Token& base = loop_index(r);
        if (is_punct('%')) {
          next();
          int m = modulus();
          e.atoms.push_back({NonAffineAtom::Kind::Mod, base.text, m, sign});
        } else {
          e.coeffs[base.text] += sign;
        }
      } else {
        fail("expected index expression, found " + describe(t), t);
      }
      if (is_punct('+')) {
        sign = 1;
      } else if (is_punct('-')) {
        sign = -1;
      } else {
        break;
      }
      next();
    }
    for (auto it = e.coeffs.begin(); it != e.coeffs.end();) {
      it = it->second == 0 ? e.coeffs.erase(it) : std::next(it);
    }
    e.text = std::string(src_.substr(start, toks_[i_ - 1].offset + toks_[i_ - 1].text.size() - start));
    return e;
  }

  void resolve() {
    sys_.variables = declared_;
    for (std::size_t ri = 0; ri < sys_.relations.size(); ++ri) {
      const Relation& r = sys_.relations[ri];
      const int arity = static_cast<int>(r.lhs_indices.size());
      auto [it, inserted] = sys_.variables.try_emplace(r.lhs, arity);
      if (!inserted && it->second != arity) {
        throw ParseError("arity mismatch for '" + r.lhs + "': " + std::to_string(arity) + " vs " +
                             std::to_string(it->second),
                         lhs_pos_[ri].first, lhs_pos_[ri].second);
      }
    }
    for (const Relation& r : sys_.relations) {
      for (const Term& t : r.terms) {
        if (t.is_literal()) continue;
        auto it = sys_.variables.find(t.name);
        if (it == sys_.variables.end()) throw ParseError("undeclared variable '" + t.name + "'", t.line, t.column);
        if (it->second != static_cast<int>(t.indices.size())) {
          throw ParseError("arity mismatch for '" + t.name + "': " + std::to_string(t.indices.size()) + " vs " +
                               std::to_string(it->second),
                           t.line, t.column);
        }
        if (t.name == r.lhs) {
          bool zero = true;
          for (std::size_t d = 0; d < t.indices.size(); ++d) {
            zero = zero && t.indices[d].is_unit_offset_of(r.lhs_indices[d]) && t.indices[d].offset == 0;
          }
          if (zero) {
            throw ParseError("'" + t.text + "' reads its own value at zero offset (single assignment)", t.line,
                             t.column);
          }
        }
      }
    }
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t i_ = 0;
  std::map<std::string, int> declared_;
  std::vector<std::pair<int, int>> lhs_pos_;
  RecurrenceSystem sys_;
};

std::string atom_reason(const IndexExpr& e) {
  const NonAffineAtom& a = e.atoms.front();
  return std::string(a.kind == NonAffineAtom::Kind::FloorDiv ? "floor-div" : "mod") + " of loop index '" + a.base +
         "'";
}

}  // namespace

RecurrenceSystem parse_recurrences(std::string_view source) {
  Lexer lex(source);
  Parser p(source, lex.run());
  return p.run();
}

RiaVerdict classify(const RecurrenceSystem& sys) {
  RiaVerdict v;
  std::map<std::string, std::size_t> assigned;
  for (std::size_t ri = 0; ri < sys.relations.size(); ++ri) {
    const Relation& r = sys.relations[ri];
    auto [it, inserted] = assigned.try_emplace(r.lhs, ri);
    if (!inserted) {
      v.single_assignment = false;
      v.witnesses.push_back({'b', ri, r.lhs, -1, "", -1,
                             "'" + r.lhs + "' is also assigned by relation " + std::to_string(it->second)});
    }
    for (std::size_t ti = 0; ti < r.terms.size(); ++ti) {
      const Term& t = r.terms[ti];
      if (t.is_literal()) continue;
      const int term = static_cast<int>(ti);
      if (t.indices.empty()) {
        v.indexed = false;
        v.witnesses.push_back({'a', ri, r.lhs, term, t.text, -1, "'" + t.name + "' has no indices"});
        continue;
      }
      if (t.indices.size() != r.lhs_indices.size()) {
        v.constant_offsets = false;
        v.witnesses.push_back({'c', ri, r.lhs, term, t.text,
                               static_cast<int>(std::min(t.indices.size(), r.lhs_indices.size())),
                               "index count differs from the left-hand side"});
        continue;
      }
      bool all_zero = true;
      for (std::size_t d = 0; d < t.indices.size(); ++d) {
        const IndexExpr& e = t.indices[d];
        const std::string& own = r.lhs_indices[d];
        if (e.is_unit_offset_of(own)) {
          all_zero = all_zero && e.offset == 0;
          continue;
        }
        all_zero = false;
        v.constant_offsets = false;
        std::string reason;
        if (!e.atoms.empty()) {
          reason = "offset depends on " + atom_reason(e);
        } else {
          std::vector<std::string> dep;
          if (!e.coeffs.count(own) || e.coeffs.at(own) != 1) dep.push_back(own);
          for (const auto& [idx, c] : e.coeffs) {
            if (idx != own) dep.push_back(idx);
          }
          reason = "offset depends on loop index '" + dep.front() + "'";
        }
        v.witnesses.push_back({'c', ri, r.lhs, term, t.text, static_cast<int>(d), reason});
      }
      if (all_zero && t.name == r.lhs) {
        v.single_assignment = false;
        v.witnesses.push_back({'b', ri, r.lhs, term, t.text, -1, "zero-offset self dependence"});
      }
    }
  }
  v.is_ria = v.single_assignment && v.indexed && v.constant_offsets;
  return v;
}

OffsetTable offset_table(const RecurrenceSystem& sys) {
  OffsetTable table;
  for (std::size_t ri = 0; ri < sys.relations.size(); ++ri) {
    const Relation& r = sys.relations[ri];
    for (std::size_t ti = 0; ti < r.terms.size(); ++ti) {
      const Term& t = r.terms[ti];
      if (t.is_literal()) continue;
      std::optional<std::vector<int>> off;
      if (!t.indices.empty() && t.indices.size() == r.lhs_indices.size()) {
        std::vector<int> o;
        for (std::size_t d = 0; d < t.indices.size(); ++d) {
          if (!t.indices[d].is_unit_offset_of(r.lhs_indices[d])) break;
          o.push_back(t.indices[d].offset);
        }
        if (o.size() == t.indices.size()) off = std::move(o);
      }
      table[{ri, ti}] = std::move(off);
    }
  }
  return table;
}

std::string format_system(const RecurrenceSystem& sys) {
  std::ostringstream out;
  for (const auto& [name, value] : sys.constants) out << "const " << name << " = " << value << '\n';
  for (const auto& [name, arity] : sys.variables) out << "var " << name << '[' << arity << "]\n";
  for (const Relation& r : sys.relations) {
    out << r.lhs << '[';
    for (std::size_t d = 0; d < r.lhs_indices.size(); ++d) out << (d ? "," : "") << r.lhs_indices[d];
    out << "] = ";
    for (std::size_t ti = 0; ti < r.terms.size(); ++ti) {
      if (ti) out << ' ' << r.ops[ti - 1] << ' ';
      out << r.terms[ti].text;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace fusesim
