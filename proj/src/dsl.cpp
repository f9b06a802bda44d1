#include "clognet/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

namespace clognet::dsl {

const Property* ProjectFile::find_property(const std::string& name) const {
  for (const auto& p : properties)
    if (p.name == name) return &p;
  return nullptr;
}

void ProjectFile::link() {
  net.types = types;
  net.schema = schema;
  instance.schema = schema;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok {
  Ident,
  Int,
  Str,
  PoolLit,   // Type#index
  LParen,
  RParen,
  LBrace,
  RBrace,
  LBracket,
  RBracket,
  Semi,
  Colon,
  Comma,
  Star,
  Dot,
  Eq,
  Neq,
  Geq,
  Arrow,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;      // identifier/string payload
  std::int64_t number = 0;
  std::string pool_type;  // for PoolLit
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string file, const std::string& text) : file_(std::move(file)) {
    std::size_t i = 0, line = 1, col = 1;
    auto begin_span = [&]() {
      SourceSpan s;
      s.file = file_;
      s.line = static_cast<int>(line);
      s.column = static_cast<int>(col);
      return s;
    };
    auto advance = [&](std::size_t n) {
      for (std::size_t k = 0; k < n; ++k, ++i) {
        if (text[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
    };
    while (i < text.size()) {
      char c = text[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance(1);
        continue;
      }
      if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
        while (i < text.size() && text[i] != '\n') advance(1);
        continue;
      }
      if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
        advance(2);
        while (i + 1 < text.size() && !(text[i] == '*' && text[i + 1] == '/'))
          advance(1);
        advance(std::min<std::size_t>(2, text.size() - i));
        continue;
      }
      Token tok;
      tok.span = begin_span();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = i;
        while (i < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[i])) ||
                text[i] == '_'))
          advance(1);
        tok.text = text.substr(start, i - start);
        tok.kind = Tok::Ident;
        // pool literal: Ident '#' digits, no spaces
        if (i < text.size() && text[i] == '#' && i + 1 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
          advance(1);
          std::size_t num_start = i;
          while (i < text.size() &&
                 std::isdigit(static_cast<unsigned char>(text[i])))
            advance(1);
          tok.kind = Tok::PoolLit;
          tok.pool_type = tok.text;
          tok.number = std::stoll(text.substr(num_start, i - num_start));
        }
        tok.span.end_line = static_cast<int>(line);
        tok.span.end_column = static_cast<int>(col);
        tokens_.push_back(std::move(tok));
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = i;
        while (i < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i])))
          advance(1);
        tok.kind = Tok::Int;
        tok.number = std::stoll(text.substr(start, i - start));
        tokens_.push_back(std::move(tok));
        continue;
      }
      if (c == '"') {
        advance(1);
        std::size_t start = i;
        while (i < text.size() && text[i] != '"') advance(1);
        tok.kind = Tok::Str;
        tok.text = text.substr(start, i - start);
        if (i < text.size()) advance(1);
        tokens_.push_back(std::move(tok));
        continue;
      }
      auto two = [&](char a, char b) {
        return c == a && i + 1 < text.size() && text[i + 1] == b;
      };
      if (two('!', '=')) {
        tok.kind = Tok::Neq;
        advance(2);
      } else if (two('>', '=')) {
        tok.kind = Tok::Geq;
        advance(2);
      } else if (two('-', '>')) {
        tok.kind = Tok::Arrow;
        advance(2);
      } else {
        switch (c) {
          case '(': tok.kind = Tok::LParen; break;
          case ')': tok.kind = Tok::RParen; break;
          case '{': tok.kind = Tok::LBrace; break;
          case '}': tok.kind = Tok::RBrace; break;
          case '[': tok.kind = Tok::LBracket; break;
          case ']': tok.kind = Tok::RBracket; break;
          case ';': tok.kind = Tok::Semi; break;
          case ':': tok.kind = Tok::Colon; break;
          case ',': tok.kind = Tok::Comma; break;
          case '*': tok.kind = Tok::Star; break;
          case '.': tok.kind = Tok::Dot; break;
          case '=': tok.kind = Tok::Eq; break;
          default:
            tok.kind = Tok::End;
            tok.text = std::string(1, c);
            break;
        }
        if (tok.kind == Tok::End) {
          bad_.push_back(tok);
          advance(1);
          continue;
        }
        advance(1);
      }
      tokens_.push_back(std::move(tok));
    }
    Token end;
    end.kind = Tok::End;
    end.span.file = file_;
    end.span.line = static_cast<int>(line);
    end.span.column = static_cast<int>(col);
    tokens_.push_back(std::move(end));
  }

  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<Token>& bad() const { return bad_; }

 private:
  std::string file_;
  std::vector<Token> tokens_;
  std::vector<Token> bad_;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::Str: return "string";
    case Tok::PoolLit: return "pool value";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Comma: return "','";
    case Tok::Star: return "'*'";
    case Tok::Dot: return "'.'";
    case Tok::Eq: return "'='";
    case Tok::Neq: return "'!='";
    case Tok::Geq: return "'>='";
    case Tok::Arrow: return "'->'";
    case Tok::End: return "end of input";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Parser

struct ParseAbort {};  // unwinds one top-level item after a reported error

// intermediate guard/property expression
struct PExpr {
  enum class Kind { True, Rel, Eq, PlaceAtom, Not, And, Or, Exists };
  Kind kind = Kind::True;
  RelAtom rel;
  Term lhs, rhs;
  bool neq = false;
  PlaceAtom place_atom;
  std::vector<std::string> bound;  // Exists
  std::vector<PExpr> children;
  SourceSpan span;
};

class Parser {
 public:
  Parser(ProjectFile& project, ValidationReport& report)
      : project_(project), report_(report) {}

  void parse_file(const std::string& path) {
    std::error_code ec;
    auto canonical = std::filesystem::weakly_canonical(path, ec);
    std::string key = ec ? path : canonical.string();
    if (!seen_files_.insert(key).second) return;  // include each file once

    std::ifstream in(path);
    if (!in) {
      report_.add("io-error", "cannot open '" + path + "'");
      return;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    parse_text(path, buffer.str());
  }

  void parse_text(const std::string& name, const std::string& text) {
    Lexer lexer(name, text);
    for (const Token& bad : lexer.bad())
      report_.add("bad-character", "unexpected character '" + bad.text + "'",
                  bad.span);
    auto saved_tokens = std::move(tokens_);
    auto saved_pos = pos_;
    tokens_ = lexer.tokens();
    pos_ = 0;
    while (peek().kind != Tok::End) {
      try {
        parse_item(name);
      } catch (const ParseAbort&) {
        // resynchronize on ';' or '}'
        while (peek().kind != Tok::End && peek().kind != Tok::Semi &&
               peek().kind != Tok::RBrace)
          ++pos_;
        if (peek().kind != Tok::End) ++pos_;
      }
    }
    tokens_ = std::move(saved_tokens);
    pos_ = saved_pos;
  }

 private:
  const Token& peek(int ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  Token next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& expected) {
    report_.add("syntax-error",
                "expected " + expected + ", found " +
                    std::string(tok_name(peek().kind)) +
                    (peek().kind == Tok::Ident ? " '" + peek().text + "'" : ""),
                peek().span);
    throw ParseAbort{};
  }

  Token expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(what);
    return next();
  }

  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }

  bool at_keyword(const char* kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }

  bool accept_keyword(const char* kw) {
    if (!at_keyword(kw)) return false;
    ++pos_;
    return true;
  }

  Token expect_keyword(const char* kw) {
    if (!at_keyword(kw)) fail(std::string("'") + kw + "'");
    return next();
  }

  // ---- items ----

  void parse_item(const std::string& current_file) {
    if (accept_keyword("type")) return parse_type();
    if (accept_keyword("const")) return parse_const();
    if (accept_keyword("relation")) return parse_relation();
    if (accept_keyword("facts")) return parse_facts();
    if (accept_keyword("place")) return parse_place();
    if (accept_keyword("transition")) return parse_transition();
    if (accept_keyword("marking")) return parse_marking();
    if (accept_keyword("property")) return parse_property();
    if (accept_keyword("include")) return parse_include(current_file);
    fail(
        "'type', 'const', 'relation', 'facts', 'place', 'transition', "
        "'marking', 'property' or 'include'");
  }

  void parse_type() {
    Token name = expect(Tok::Ident, "type name");
    DataType type;
    type.name = name.text;
    if (accept(Tok::LBrace)) {
      while (!accept(Tok::RBrace)) {
        Token lit = expect(Tok::Ident, "enumeration constant");
        type.enumeration.push_back(lit.text);
        declare_constant(lit.text, Value::symbol(type.name, lit.text),
                         lit.span);
        if (!accept(Tok::Semi) && peek().kind != Tok::RBrace)
          fail("';' or '}'");
      }
    } else {
      expect(Tok::Semi, "';'");
    }
    if (project_.types.has(type.name)) {
      report_.add("duplicate-type", "type '" + type.name + "' declared twice",
                  name.span);
      return;
    }
    project_.types.add(std::move(type));
  }

  void parse_const() {
    Token name = expect(Tok::Ident, "constant name");
    expect(Tok::Colon, "':'");
    Token type = expect(Tok::Ident, "type name");
    expect(Tok::Semi, "';'");
    if (!project_.types.has(type.text))
      report_.add("unknown-type",
                  "constant '" + name.text + "' uses unknown type '" +
                      type.text + "'",
                  type.span);
    declare_constant(name.text, Value::symbol(type.text, name.text),
                     name.span);
  }

  void declare_constant(const std::string& name, Value v,
                        const SourceSpan& span) {
    auto [it, inserted] = project_.constants.emplace(name, std::move(v));
    (void)it;
    if (!inserted)
      report_.add("duplicate-constant",
                  "constant '" + name + "' already declared", span);
  }

  void parse_relation() {
    Token name = expect(Tok::Ident, "relation name");
    RelationSchema rel;
    rel.name = name.text;
    rel.span = name.span;
    bool key_seen = false;
    expect(Tok::LParen, "'('");
    do {
      Token attr = expect(Tok::Ident, "attribute name");
      expect(Tok::Colon, "':'");
      Token type = expect(Tok::Ident, "type name");
      if (!project_.types.has(type.text))
        report_.add("unknown-type", "attribute '" + attr.text +
                        "' uses unknown type '" + type.text + "'",
                    type.span);
      rel.attributes.push_back({attr.text, type.text});
      if (accept_keyword("key")) {
        if (key_seen)
          report_.add("duplicate-key",
                      "relation '" + rel.name + "' marks two key attributes",
                      attr.span);
        key_seen = true;
        rel.pk_index = rel.attributes.size() - 1;
      }
      if (accept(Tok::Arrow)) {
        Token target = expect(Tok::Ident, "relation name");
        rel.fks.push_back({rel.attributes.size() - 1, target.text});
      }
    } while (accept(Tok::Comma));
    expect(Tok::RParen, "')'");
    expect(Tok::Semi, "';'");
    if (project_.schema->find(rel.name))
      report_.add("duplicate-relation",
                  "relation '" + rel.name + "' declared twice", name.span);
    else
      project_.schema->relations.push_back(std::move(rel));
  }

  Value parse_value() {
    if (peek().kind == Tok::PoolLit) {
      Token t = next();
      if (!project_.types.has(t.pool_type))
        report_.add("unknown-type", "pool value '" + t.pool_type + "#" +
                        std::to_string(t.number) + "' uses unknown type",
                    t.span);
      else if (const DataType* dt = project_.types.find(t.pool_type);
               dt && !dt->unbounded())
        report_.add("pool-of-finite-type",
                    "type '" + t.pool_type + "' is finite; pool values need "
                        "an unbounded type",
                    t.span);
      return Value::pool_value(t.pool_type, t.number);
    }
    Token t = expect(Tok::Ident, "value");
    auto it = project_.constants.find(t.text);
    if (it == project_.constants.end()) {
      report_.add("unknown-constant",
                  "'" + t.text + "' is not a declared constant", t.span);
      return Value::symbol("?", t.text);
    }
    return it->second;
  }

  Tuple parse_value_tuple() {
    Tuple tuple;
    if (accept(Tok::LParen)) {
      do tuple.push_back(parse_value());
      while (accept(Tok::Comma));
      expect(Tok::RParen, "')'");
    } else {
      tuple.push_back(parse_value());
    }
    return tuple;
  }

  void parse_facts() {
    Token rel = expect(Tok::Ident, "relation name");
    expect(Tok::LBrace, "'{'");
    while (!accept(Tok::RBrace)) {
      Tuple t = parse_value_tuple();
      project_.instance.add_fact(rel.text, std::move(t));
      if (!accept(Tok::Semi) && peek().kind != Tok::RBrace) fail("';' or '}'");
    }
    if (!project_.schema->find(rel.text))
      report_.add("unknown-relation",
                  "facts given for unknown relation '" + rel.text + "'",
                  rel.span);
  }

  void parse_place() {
    Token name = expect(Tok::Ident, "place name");
    expect(Tok::Colon, "':'");
    Place place;
    place.name = name.text;
    place.span = name.span;
    do {
      Token type = expect(Tok::Ident, "type name");
      if (!project_.types.has(type.text))
        report_.add("unknown-type", "place '" + place.name +
                        "' uses unknown type '" + type.text + "'",
                    type.span);
      place.color.push_back(type.text);
    } while (accept(Tok::Star));
    expect(Tok::Semi, "';'");
    project_.net.places.push_back(std::move(place));
  }

  Term parse_term() {
    if (peek().kind == Tok::PoolLit) return Term::make_const(parse_value());
    Token t = expect(Tok::Ident, "term");
    auto it = project_.constants.find(t.text);
    if (it != project_.constants.end()) return Term::make_const(it->second);
    return Term::make_var(t.text);
  }

  // ---- guard / property expressions ----

  PExpr parse_expr(bool allow_or, bool allow_place_atoms) {
    PExpr first = parse_conj(allow_place_atoms);
    if (!allow_or || !at_keyword("or")) return first;
    PExpr out;
    out.kind = PExpr::Kind::Or;
    out.span = first.span;
    out.children.push_back(std::move(first));
    while (accept_keyword("or"))
      out.children.push_back(parse_conj(allow_place_atoms));
    return out;
  }

  PExpr parse_conj(bool allow_place_atoms) {
    PExpr first = parse_unit(allow_place_atoms);
    if (!at_keyword("and")) return first;
    PExpr out;
    out.kind = PExpr::Kind::And;
    out.span = first.span;
    out.children.push_back(std::move(first));
    while (accept_keyword("and"))
      out.children.push_back(parse_unit(allow_place_atoms));
    return out;
  }

  PExpr parse_unit(bool allow_place_atoms) {
    SourceSpan span = peek().span;
    if (accept_keyword("not")) {
      PExpr out;
      out.kind = PExpr::Kind::Not;
      out.span = span;
      out.children.push_back(parse_unit(allow_place_atoms));
      return out;
    }
    if (accept_keyword("exists")) {
      PExpr out;
      out.kind = PExpr::Kind::Exists;
      out.span = span;
      do out.bound.push_back(expect(Tok::Ident, "variable").text);
      while (accept(Tok::Comma));
      expect(Tok::Dot, "'.'");
      out.children.push_back(parse_conj(allow_place_atoms));
      return out;
    }
    if (accept_keyword("true")) {
      PExpr out;
      out.span = span;
      return out;
    }
    if (accept(Tok::LParen)) {
      PExpr inner = parse_conj(allow_place_atoms);
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (peek().kind == Tok::LBracket) {
      if (!allow_place_atoms) fail("a guard atom");
      return parse_place_atom();
    }
    // relation atom or equality
    if (peek().kind == Tok::Ident && peek(1).kind == Tok::LParen &&
        project_.constants.find(peek().text) == project_.constants.end()) {
      Token rel = next();
      next();  // '('
      PExpr out;
      out.kind = PExpr::Kind::Rel;
      out.span = rel.span;
      out.rel.relation = rel.text;
      do out.rel.args.push_back(parse_term());
      while (accept(Tok::Comma));
      expect(Tok::RParen, "')'");
      return out;
    }
    PExpr out;
    out.kind = PExpr::Kind::Eq;
    out.span = span;
    out.lhs = parse_term();
    if (accept(Tok::Neq))
      out.neq = true;
    else
      expect(Tok::Eq, "'=' or '!='");
    out.rhs = parse_term();
    return out;
  }

  PExpr parse_place_atom() {
    Token open = expect(Tok::LBracket, "'['");
    Token place = expect(Tok::Ident, "place name");
    PExpr out;
    out.kind = PExpr::Kind::PlaceAtom;
    out.span = open.span;
    out.place_atom.place = place.text;
    if (accept(Tok::LParen)) {
      do out.place_atom.args.push_back(parse_term());
      while (accept(Tok::Comma));
      expect(Tok::RParen, "')'");
    }
    expect(Tok::Geq, "'>='");
    Token count = expect(Tok::Int, "count");
    out.place_atom.min_count = static_cast<std::uint64_t>(count.number);
    expect(Tok::RBracket, "']'");
    return out;
  }

  // true if the subtree contains a relation atom
  static bool contains_rel(const PExpr& e) {
    if (e.kind == PExpr::Kind::Rel) return true;
    return std::any_of(e.children.begin(), e.children.end(), contains_rel);
  }

  Condition to_condition(const PExpr& e) {
    switch (e.kind) {
      case PExpr::Kind::True:
        return Condition::truth();
      case PExpr::Kind::Eq: {
        Condition eq = Condition::eq(e.lhs, e.rhs);
        return e.neq ? Condition::neg(std::move(eq)) : eq;
      }
      case PExpr::Kind::Not:
        return Condition::neg(to_condition(e.children.at(0)));
      case PExpr::Kind::And: {
        Condition acc = to_condition(e.children.at(0));
        for (std::size_t i = 1; i < e.children.size(); ++i)
          acc = Condition::conj(std::move(acc), to_condition(e.children[i]));
        return acc;
      }
      default:
        report_.add("guard-structure",
                    "relation atoms cannot appear under this operator",
                    e.span);
        throw ParseAbort{};
    }
  }

  ConjunctiveQuery to_cq(const PExpr& e) {
    ConjunctiveQuery cq;
    const PExpr* body = &e;
    while (body->kind == PExpr::Kind::Exists) {
      for (const auto& var : body->bound)
        cq.exist_vars.push_back(Term::make_var(var));
      body = &body->children.at(0);
    }
    std::vector<Condition> conds;
    std::function<void(const PExpr&)> walk = [&](const PExpr& node) {
      switch (node.kind) {
        case PExpr::Kind::And:
          for (const auto& c : node.children) walk(c);
          return;
        case PExpr::Kind::Rel:
          cq.atoms.push_back(node.rel);
          return;
        case PExpr::Kind::Not:
          if (node.children.at(0).kind == PExpr::Kind::Rel) {
            RelAtom atom = node.children.at(0).rel;
            atom.negated = true;
            cq.atoms.push_back(std::move(atom));
            return;
          }
          if (contains_rel(node)) {
            report_.add("guard-structure",
                        "negation over relation atoms must be atomic",
                        node.span);
            throw ParseAbort{};
          }
          conds.push_back(to_condition(node));
          return;
        case PExpr::Kind::Exists:
          report_.add("guard-structure",
                      "'exists' is only allowed as a query prefix", node.span);
          throw ParseAbort{};
        case PExpr::Kind::Or:
          report_.add("guard-structure",
                      "'or' is only allowed at the top level of a guard",
                      node.span);
          throw ParseAbort{};
        case PExpr::Kind::PlaceAtom:
          report_.add("guard-structure",
                      "place atoms are only allowed in properties", node.span);
          throw ParseAbort{};
        default:
          conds.push_back(to_condition(node));
          return;
      }
    };
    walk(*body);
    if (conds.empty()) {
      cq.condition = Condition::truth();
    } else {
      Condition acc = std::move(conds.front());
      for (std::size_t i = 1; i < conds.size(); ++i)
        acc = Condition::conj(std::move(acc), std::move(conds[i]));
      cq.condition = std::move(acc);
    }
    return cq;
  }

  void parse_transition() {
    Token name = expect(Tok::Ident, "transition name");
    Transition t;
    t.name = name.text;
    t.span = name.span;
    expect(Tok::LBrace, "'{'");
    while (!accept(Tok::RBrace)) {
      if (accept_keyword("guard")) {
        expect(Tok::Colon, "':'");
        PExpr expr = parse_expr(/*allow_or=*/true, /*place_atoms=*/false);
        expect(Tok::Semi, "';'");
        // a pure condition (no atoms, no quantifier, no union) is the
        // transition's φ; anything else is the query Q
        if (expr.kind != PExpr::Kind::Or && !contains_rel(expr) &&
            expr.kind != PExpr::Kind::Exists) {
          t.guard_condition = to_condition(expr);
        } else {
          UnionQuery q;
          if (expr.kind == PExpr::Kind::Or) {
            for (const auto& d : expr.children) q.disjuncts.push_back(to_cq(d));
          } else {
            q.disjuncts.push_back(to_cq(expr));
          }
          t.guard_query = std::move(q);
        }
        continue;
      }
      bool is_in = at_keyword("in");
      if (is_in || at_keyword("out")) {
        Token kw = next();
        Token place = expect(Tok::Ident, "place name");
        expect(Tok::Colon, "':'");
        Arc arc;
        arc.place = place.text;
        arc.span = kw.span;
        if (peek().kind == Tok::Int) {
          Token count = next();
          expect(Tok::Star, "'*'");
          arc.inscription.multiplicity =
              static_cast<std::uint64_t>(count.number);
        }
        auto parse_ins_term = [&]() {
          if (accept_keyword("nu")) {
            Token var = expect(Tok::Ident, "variable");
            return InsTerm::make_fresh(var.text);
          }
          if (peek().kind == Tok::PoolLit)
            return InsTerm::make_const(parse_value());
          Token id = expect(Tok::Ident, "inscription term");
          auto it = project_.constants.find(id.text);
          if (it != project_.constants.end())
            return InsTerm::make_const(it->second);
          return InsTerm::make_var(id.text);
        };
        if (accept(Tok::LParen)) {
          do arc.inscription.tuple.push_back(parse_ins_term());
          while (accept(Tok::Comma));
          expect(Tok::RParen, "')'");
        } else {
          arc.inscription.tuple.push_back(parse_ins_term());
        }
        expect(Tok::Semi, "';'");
        (is_in ? t.inputs : t.outputs).push_back(std::move(arc));
        continue;
      }
      fail("'guard', 'in', 'out' or '}'");
    }
    project_.net.transitions.push_back(std::move(t));
  }

  void parse_marking() {
    expect(Tok::LBrace, "'{'");
    while (!accept(Tok::RBrace)) {
      Token place = expect(Tok::Ident, "place name");
      expect(Tok::Colon, "':'");
      expect(Tok::LBrace, "'{'");
      while (!accept(Tok::RBrace)) {
        std::uint64_t count = 1;
        if (peek().kind == Tok::Int) {
          count = static_cast<std::uint64_t>(next().number);
          expect(Tok::Star, "'*'");
        }
        Tuple tuple = parse_value_tuple();
        project_.initial_marking.add(place.text, std::move(tuple), count);
        if (!accept(Tok::Semi) && peek().kind != Tok::RBrace)
          fail("';' or '}'");
      }
      accept(Tok::Semi);
    }
  }

  PropExpr to_prop(const PExpr& e) {
    switch (e.kind) {
      case PExpr::Kind::True:
        return PropExpr{};
      case PExpr::Kind::PlaceAtom:
        return PropExpr::place(e.place_atom);
      case PExpr::Kind::Rel:
        return PropExpr::rel(e.rel);
      case PExpr::Kind::Eq: {
        PropExpr eq = PropExpr::eq(e.lhs, e.rhs);
        return e.neq ? PropExpr::neg(std::move(eq)) : eq;
      }
      case PExpr::Kind::Not:
        return PropExpr::neg(to_prop(e.children.at(0)));
      case PExpr::Kind::And: {
        PropExpr acc = to_prop(e.children.at(0));
        for (std::size_t i = 1; i < e.children.size(); ++i)
          acc = PropExpr::conj(std::move(acc), to_prop(e.children[i]));
        return acc;
      }
      default:
        report_.add("property-structure",
                    "this operator is not allowed in a property body", e.span);
        throw ParseAbort{};
    }
  }

  void parse_property() {
    Token name = expect(Tok::Ident, "property name");
    expect(Tok::Eq, "'='");
    Property prop;
    prop.name = name.text;
    prop.span = name.span;
    if (accept_keyword("exists")) {
      do prop.vars.push_back(Term::make_var(expect(Tok::Ident, "variable").text));
      while (accept(Tok::Comma));
      expect(Tok::Dot, "'.'");
    }
    PExpr body = parse_expr(/*allow_or=*/false, /*place_atoms=*/true);
    expect(Tok::Semi, "';'");
    prop.body = to_prop(body);
    for (const auto& existing : project_.properties)
      if (existing.name == prop.name)
        report_.add("duplicate-property",
                    "property '" + prop.name + "' declared twice", name.span);
    project_.properties.push_back(std::move(prop));
  }

  void parse_include(const std::string& current_file) {
    Token path = expect(Tok::Str, "file path");
    expect(Tok::Semi, "';'");
    std::filesystem::path base =
        std::filesystem::path(current_file).parent_path();
    parse_file((base / path.text).string());
  }

  ProjectFile& project_;
  ValidationReport& report_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::set<std::string> seen_files_;
};

}  // namespace

std::optional<ProjectFile> parse_project(const std::vector<std::string>& paths,
                                         ValidationReport& report) {
  ProjectFile project;
  Parser parser(project, report);
  for (const std::string& path : paths) parser.parse_file(path);
  if (!report.ok()) return std::nullopt;
  project.link();
  return project;
}

std::optional<ProjectFile> parse_project_text(const std::string& name,
                                              const std::string& text,
                                              ValidationReport& report) {
  ProjectFile project;
  Parser parser(project, report);
  parser.parse_text(name, text);
  if (!report.ok()) return std::nullopt;
  project.link();
  return project;
}

// ---------------------------------------------------------------------------
// Step files

std::optional<std::vector<SimStep>> parse_steps(const ProjectFile& project,
                                                const std::string& name,
                                                const std::string& text,
                                                ValidationReport& report) {
  Lexer lexer(name, text);
  const auto& tokens = lexer.tokens();
  for (const Token& bad : lexer.bad())
    report.add("bad-character", "unexpected character '" + bad.text + "'",
               bad.span);
  std::vector<SimStep> steps;
  std::size_t pos = 0;
  auto peek = [&]() -> const Token& {
    return tokens[std::min(pos, tokens.size() - 1)];
  };
  auto next = [&]() -> const Token& {
    return tokens[std::min(pos++, tokens.size() - 1)];
  };
  while (peek().kind != Tok::End) {
    if (!(peek().kind == Tok::Ident && peek().text == "step")) {
      report.add("syntax-error", "expected 'step'", peek().span);
      return std::nullopt;
    }
    SimStep step;
    step.span = next().span;  // 'step'
    if (peek().kind != Tok::Ident) {
      report.add("syntax-error", "expected transition name", peek().span);
      return std::nullopt;
    }
    step.transition = next().text;
    if (peek().kind == Tok::Ident && peek().text == "with") {
      ++pos;
      while (true) {
        if (peek().kind != Tok::Ident) {
          report.add("syntax-error", "expected variable name", peek().span);
          return std::nullopt;
        }
        std::string var = next().text;
        if (peek().kind != Tok::Eq) {
          report.add("syntax-error", "expected '='", peek().span);
          return std::nullopt;
        }
        ++pos;
        Value value;
        if (peek().kind == Tok::PoolLit) {
          const Token& t = next();
          value = Value::pool_value(t.pool_type, t.number);
        } else if (peek().kind == Tok::Ident) {
          const Token& t = next();
          auto it = project.constants.find(t.text);
          if (it == project.constants.end()) {
            report.add("unknown-constant",
                       "'" + t.text + "' is not a declared constant", t.span);
            return std::nullopt;
          }
          value = it->second;
        } else {
          report.add("syntax-error", "expected a value", peek().span);
          return std::nullopt;
        }
        step.binding[var] = value;
        if (peek().kind == Tok::Comma) {
          ++pos;
          continue;
        }
        break;
      }
    }
    if (peek().kind != Tok::Semi) {
      report.add("syntax-error", "expected ';'", peek().span);
      return std::nullopt;
    }
    ++pos;
    steps.push_back(std::move(step));
  }
  if (!report.ok()) return std::nullopt;
  return steps;
}

// ---------------------------------------------------------------------------
// Pretty printing

namespace {

std::string term_text(const Term& t) { return t.str(); }

std::string condition_text(const Condition& c, bool parenthesize) {
  switch (c.kind) {
    case Condition::Kind::True:
      return "true";
    case Condition::Kind::Eq:
      return term_text(c.lhs) + " = " + term_text(c.rhs);
    case Condition::Kind::Not: {
      const Condition& inner = c.children.at(0);
      if (inner.kind == Condition::Kind::Eq)
        return term_text(inner.lhs) + " != " + term_text(inner.rhs);
      return "not (" + condition_text(inner, false) + ")";
    }
    case Condition::Kind::And: {
      std::string out;
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) out += " and ";
        out += condition_text(c.children[i], true);
      }
      return parenthesize ? "(" + out + ")" : out;
    }
  }
  return "true";
}

std::string cq_text(const ConjunctiveQuery& cq) {
  std::string out;
  if (!cq.exist_vars.empty()) {
    out += "exists ";
    for (std::size_t i = 0; i < cq.exist_vars.size(); ++i) {
      if (i) out += ", ";
      out += cq.exist_vars[i].var;
    }
    out += ". ";
  }
  bool first = true;
  for (const RelAtom& atom : cq.atoms) {
    if (!first) out += " and ";
    first = false;
    out += atom.negated ? "not " : "";
    out += atom.relation + "(";
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      if (i) out += ", ";
      out += term_text(atom.args[i]);
    }
    out += ")";
  }
  if (!cq.condition.is_true() || first) {
    if (!first) out += " and ";
    out += condition_text(cq.condition, true);
  }
  return out;
}

std::string prop_text(const PropExpr& e) {
  switch (e.kind) {
    case PropExpr::Kind::True:
      return "true";
    case PropExpr::Kind::Place: {
      std::string out = "[" + e.place_atom.place;
      if (!e.place_atom.args.empty()) {
        out += "(";
        for (std::size_t i = 0; i < e.place_atom.args.size(); ++i) {
          if (i) out += ", ";
          out += term_text(e.place_atom.args[i]);
        }
        out += ")";
      }
      return out + " >= " + std::to_string(e.place_atom.min_count) + "]";
    }
    case PropExpr::Kind::Rel: {
      std::string out = e.rel_atom.negated ? "not " : "";
      out += e.rel_atom.relation + "(";
      for (std::size_t i = 0; i < e.rel_atom.args.size(); ++i) {
        if (i) out += ", ";
        out += term_text(e.rel_atom.args[i]);
      }
      return out + ")";
    }
    case PropExpr::Kind::Eq:
      return term_text(e.lhs) + " = " + term_text(e.rhs);
    case PropExpr::Kind::Not: {
      const PropExpr& inner = e.children.at(0);
      if (inner.kind == PropExpr::Kind::Eq)
        return term_text(inner.lhs) + " != " + term_text(inner.rhs);
      return "not (" + prop_text(inner) + ")";
    }
    case PropExpr::Kind::And: {
      std::string out;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += " and ";
        const PropExpr& c = e.children[i];
        bool wrap = c.kind == PropExpr::Kind::And;
        out += wrap ? "(" + prop_text(c) + ")" : prop_text(c);
      }
      return out;
    }
  }
  return "true";
}

}  // namespace

std::string condition_str(const Condition& c) { return condition_text(c, false); }

std::string query_str(const UnionQuery& q) {
  std::string out;
  for (std::size_t i = 0; i < q.disjuncts.size(); ++i) {
    if (i) out += " or ";
    out += cq_text(q.disjuncts[i]);
  }
  return out;
}

std::string property_str(const Property& p) {
  std::string out;
  if (!p.vars.empty()) {
    out += "exists ";
    for (std::size_t i = 0; i < p.vars.size(); ++i) {
      if (i) out += ", ";
      out += p.vars[i].var;
    }
    out += ". ";
  }
  return out + prop_text(p.body);
}

std::string pretty_print(const ProjectFile& project) {
  std::ostringstream os;
  for (const DataType& t : project.types.types()) {
    os << "type " << t.name;
    if (!t.enumeration.empty()) {
      os << " { ";
      for (std::size_t i = 0; i < t.enumeration.size(); ++i) {
        if (i) os << "; ";
        os << t.enumeration[i];
      }
      os << " }";
    } else {
      os << ";";
    }
    os << "\n";
  }
  // enumeration literals are already constants; print the rest
  for (const auto& [name, value] : project.constants) {
    const DataType* dt = project.types.find(value.type);
    bool from_enum =
        dt && std::find(dt->enumeration.begin(), dt->enumeration.end(),
                        name) != dt->enumeration.end();
    if (!from_enum) os << "const " << name << ": " << value.type << ";\n";
  }
  for (const RelationSchema& rel : project.schema->relations) {
    os << "relation " << rel.name << "(";
    for (std::size_t i = 0; i < rel.attributes.size(); ++i) {
      if (i) os << ", ";
      os << rel.attributes[i].name << ": " << rel.attributes[i].type;
      if (rel.pk_index == i) os << " key";
      for (const auto& fk : rel.fks)
        if (fk.attr_index == i) os << " -> " << fk.target_relation;
    }
    os << ");\n";
  }
  for (const auto& [rel, facts] : project.instance.facts) {
    os << "facts " << rel << " {";
    bool first = true;
    for (const Tuple& t : facts) {
      os << (first ? " " : "; ");
      first = false;
      if (t.size() == 1)
        os << t[0].str();
      else
        os << tuple_str(t);
    }
    os << " }\n";
  }
  for (const Place& p : project.net.places) {
    os << "place " << p.name << ": ";
    for (std::size_t i = 0; i < p.color.size(); ++i) {
      if (i) os << " * ";
      os << p.color[i];
    }
    os << ";\n";
  }
  for (const Transition& t : project.net.transitions) {
    os << "transition " << t.name << " {\n";
    if (t.guard_query)
      os << "  guard: " << query_str(*t.guard_query) << ";\n";
    else if (!t.guard_condition.is_true())
      os << "  guard: " << condition_str(t.guard_condition) << ";\n";
    auto arc_text = [](const Arc& arc) {
      std::string out;
      if (arc.inscription.multiplicity != 1)
        out += std::to_string(arc.inscription.multiplicity) + " * ";
      out += "(";
      for (std::size_t i = 0; i < arc.inscription.tuple.size(); ++i) {
        if (i) out += ", ";
        out += arc.inscription.tuple[i].str();
      }
      return out + ")";
    };
    for (const Arc& arc : t.inputs)
      os << "  in " << arc.place << ": " << arc_text(arc) << ";\n";
    for (const Arc& arc : t.outputs)
      os << "  out " << arc.place << ": " << arc_text(arc) << ";\n";
    os << "}\n";
  }
  if (!project.initial_marking.places.empty()) {
    os << "marking {\n";
    for (const auto& [place, tokens] : project.initial_marking.places) {
      if (tokens.empty()) continue;
      os << "  " << place << ": {";
      bool first = true;
      for (const auto& [tuple, count] : tokens) {
        os << (first ? " " : "; ");
        first = false;
        if (count != 1) os << count << " * ";
        if (tuple.size() == 1)
          os << tuple[0].str();
        else
          os << tuple_str(tuple);
      }
      os << " }\n";
    }
    os << "}\n";
  }
  for (const Property& p : project.properties)
    os << "property " << p.name << " = " << property_str(p) << ";\n";
  return os.str();
}

}  // namespace clognet::dsl
