#include "varcomp/parser.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lexer.hpp"
#include "varcomp/errors.hpp"

namespace varcomp {

namespace {

using detail::Tok;
using detail::Token;

// ---------------------------------------------------------------- AST

struct IndexArg {
  bool is_var = false;
  int value = 0;  // 0-based literal
  std::string name;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

enum class Kind : std::uint8_t { Num, Ref, Call, Neg, Add, Sub, Mul, Div, Pow };

/// `D1(q[v])` has deriv = Count; `D(q[v]; t, i)` has deriv = List.
enum class Deriv : std::uint8_t { None, Count, List };

struct Node {
  Kind kind = Kind::Num;
  Rational num;
  std::string name;
  std::vector<IndexArg> indices;
  bool bracketed = false;
  Deriv deriv = Deriv::None;
  int deriv_count = 0;
  std::vector<IndexArg> deriv_list;  // base literals are resolved to values, others are variables
  std::vector<NodePtr> kids;
  int line = 0;
  int column = 0;
};

using Env = std::map<std::string, int>;

Rational decimal_rational(const std::string& text) {
  std::string mant = text;
  long exp10 = 0;
  const auto epos = mant.find_first_of("eE");
  if (epos != std::string::npos) {
    exp10 = std::stol(mant.substr(epos + 1));
    mant = mant.substr(0, epos);
  }
  const auto dot = mant.find('.');
  if (dot != std::string::npos) {
    exp10 -= static_cast<long>(mant.size() - dot - 1);
    mant.erase(dot, 1);
  }
  if (mant.empty()) mant = "0";
  Rational r{boost::multiprecision::cpp_int(mant)};
  boost::multiprecision::cpp_int ten = 10;
  boost::multiprecision::cpp_int scale = boost::multiprecision::pow(ten, static_cast<unsigned>(std::labs(exp10)));
  if (exp10 >= 0) return r * Rational(scale);
  return r / Rational(scale);
}

bool is_function_name(const std::string& s) {
  static const std::set<std::string> names{"sqrt", "exp", "log", "sin", "cos", "tan", "abs"};
  return names.count(s) != 0;
}

/// Derivative operator spelled D1, D2, ...; returns its order.
std::optional<int> count_operator(const std::string& s) {
  if (s.size() < 2 || s[0] != 'D') return std::nullopt;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) return std::nullopt;
  }
  return std::stoi(s.substr(1));
}

// ---------------------------------------------------------------- token parser

class Parser {
 public:
  Parser(std::vector<Token> tokens, const JetSpec* spec) : toks_(std::move(tokens)), spec_(spec) {}

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(const std::string& w) const { return at(Tok::Ident) && peek().text == w; }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().line, peek().column, expected, detail::describe(peek()));
  }
  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(what);
    return take();
  }
  void expect_word(const std::string& w) {
    if (!at_word(w)) fail("'" + w + "'");
    take();
  }
  std::string ident(const std::string& what) { return expect(Tok::Ident, what).text; }

  int positive_int(const std::string& what) {
    const Token t = expect(Tok::Number, what);
    if (t.text.find_first_not_of("0123456789") != std::string::npos) {
      throw SyntaxError(t.line, t.column, what, detail::describe(t));
    }
    return std::stoi(t.text);
  }

  Rational signed_rational(const std::string& what) {
    bool neg = false;
    if (at(Tok::Minus)) {
      take();
      neg = true;
    }
    Rational r = decimal_rational(expect(Tok::Number, what).text);
    if (at(Tok::Slash)) {
      take();
      const Token d = expect(Tok::Number, "a denominator");
      const Rational den = decimal_rational(d.text);
      if (den == 0) throw SemanticError(std::to_string(d.line) + ":" + std::to_string(d.column) + ": division by zero");
      r /= den;
    }
    return neg ? Rational(-r) : r;
  }

  // expr := term (('+'|'-') term)*
  NodePtr expr() {
    NodePtr lhs = term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const Token op = take();
      NodePtr rhs = term();
      auto n = std::make_shared<Node>();
      n->kind = op.kind == Tok::Plus ? Kind::Add : Kind::Sub;
      n->kids = {lhs, rhs};
      n->line = op.line;
      n->column = op.column;
      lhs = n;
    }
    return lhs;
  }

  // term := unary (('*'|'/') unary)*
  NodePtr term() {
    NodePtr lhs = unary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      const Token op = take();
      NodePtr rhs = unary();
      auto n = std::make_shared<Node>();
      n->kind = op.kind == Tok::Star ? Kind::Mul : Kind::Div;
      n->kids = {lhs, rhs};
      n->line = op.line;
      n->column = op.column;
      lhs = n;
    }
    return lhs;
  }

  NodePtr unary() {
    if (at(Tok::Minus)) {
      const Token op = take();
      auto n = std::make_shared<Node>();
      n->kind = Kind::Neg;
      n->kids = {unary()};
      n->line = op.line;
      n->column = op.column;
      return n;
    }
    if (at(Tok::Plus)) take();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (!at(Tok::Caret)) return base;
    const Token op = take();
    NodePtr exponent;
    if (at(Tok::Minus)) {
      const Token m = take();
      auto n = std::make_shared<Node>();
      n->kind = Kind::Neg;
      n->kids = {primary()};
      n->line = m.line;
      n->column = m.column;
      exponent = n;
    } else {
      exponent = primary();
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pow;
    n->kids = {base, exponent};
    n->line = op.line;
    n->column = op.column;
    return n;
  }

  std::vector<IndexArg> index_list(Tok close) {
    std::vector<IndexArg> out;
    do {
      if (!out.empty()) take();
      if (at(Tok::Number)) {
        const Token t = peek();
        const int v = positive_int("an index");
        if (v < 1) throw SemanticError(std::to_string(t.line) + ":" + std::to_string(t.column) + ": indices start at 1");
        out.push_back({false, v - 1, {}});
      } else if (at(Tok::Ident)) {
        out.push_back({true, 0, take().text});
      } else {
        fail("an index");
      }
    } while (at(Tok::Comma));
    expect(close, close == Tok::RBracket ? "']'" : "')'");
    return out;
  }

  /// name[indices]? without any derivative operator.
  NodePtr plain_ref() {
    const Token t = expect(Tok::Ident, "a name");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Ref;
    n->name = t.text;
    n->line = t.line;
    n->column = t.column;
    if (at(Tok::LBracket)) {
      take();
      n->bracketed = true;
      n->indices = index_list(Tok::RBracket);
    }
    return n;
  }

  NodePtr primary() {
    const Token t = peek();
    if (at(Tok::Number)) {
      take();
      auto n = std::make_shared<Node>();
      n->kind = Kind::Num;
      n->num = decimal_rational(t.text);
      n->line = t.line;
      n->column = t.column;
      return n;
    }
    if (at(Tok::LParen)) {
      take();
      NodePtr inner = expr();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (!at(Tok::Ident)) fail("an expression");
    if (peek(1).kind == Tok::LParen) {
      if (t.text == "D") {
        take();
        take();
        auto ref = std::const_pointer_cast<Node>(plain_ref());
        ref->deriv = Deriv::List;
        expect(Tok::Semicolon, "';'");
        for (auto& a : index_list(Tok::RParen)) {
          if (a.is_var && spec_ && spec_->find_base(a.name)) {
            a = IndexArg{false, *spec_->find_base(a.name), {}};
          }
          ref->deriv_list.push_back(a);
        }
        ref->line = t.line;
        ref->column = t.column;
        return ref;
      }
      if (auto k = count_operator(t.text)) {
        take();
        take();
        auto ref = std::const_pointer_cast<Node>(plain_ref());
        expect(Tok::RParen, "')'");
        ref->deriv = Deriv::Count;
        ref->deriv_count = *k;
        ref->line = t.line;
        ref->column = t.column;
        return ref;
      }
      if (is_function_name(t.text)) {
        take();
        take();
        auto n = std::make_shared<Node>();
        n->kind = Kind::Call;
        n->name = t.text;
        n->kids = {expr()};
        expect(Tok::RParen, "')'");
        n->line = t.line;
        n->column = t.column;
        return n;
      }
    }
    return plain_ref();
  }

  std::size_t pos_ = 0;

 private:
  std::vector<Token> toks_;
  const JetSpec* spec_;
};

// ---------------------------------------------------------------- semantics

[[noreturn]] void semantic(const Node& n, const std::string& msg) {
  throw SemanticError(std::to_string(n.line) + ":" + std::to_string(n.column) + ": " + msg);
}

/// Resolves names against the chart and expands Einstein sums. `T` is Expr
/// (symbolic) or double (numeric, with a point).
class Resolver {
 public:
  Resolver(const JetSpec& spec, std::map<int, int>* field_orders, JetSpec* mutable_spec = nullptr)
      : spec_(spec), field_orders_(field_orders), mutable_spec_(mutable_spec) {}

  // Free index names of a node, with occurrence counts.
  std::map<std::string, int> free_counts(const Node& n, const Env& env) const {
    std::map<std::string, int> out;
    switch (n.kind) {
      case Kind::Num:
        break;
      case Kind::Ref:
        for (const auto& a : n.indices) {
          if (a.is_var && !env.count(a.name)) ++out[a.name];
        }
        for (const auto& a : n.deriv_list) {
          if (a.is_var && !env.count(a.name)) ++out[a.name];
        }
        break;
      case Kind::Call:
      case Kind::Neg:
        return free_counts(*n.kids[0], env);
      case Kind::Pow:
        for (const auto& [k, c] : free_counts(*n.kids[0], env)) out[k] = 1;
        break;
      case Kind::Add:
      case Kind::Sub:
        for (const auto& kid : n.kids) {
          for (const auto& name : chain_free(*kid, env)) out[name] = 1;
        }
        break;
      case Kind::Mul:
      case Kind::Div: {
        std::vector<const Node*> factors;
        flatten(n, factors);
        for (const Node* f : factors) {
          if (f->kind == Kind::Add || f->kind == Kind::Sub) {
            for (const auto& name : chain_free(*f, env)) ++out[name];
          } else {
            for (const auto& [k, c] : free_counts(*f, env)) out[k] += c;
          }
        }
        break;
      }
    }
    return out;
  }

  /// Names that stay free after the node's own summation.
  std::set<std::string> chain_free(const Node& n, const Env& env) const {
    std::set<std::string> out;
    const bool chain = n.kind == Kind::Mul || n.kind == Kind::Div || n.kind == Kind::Ref;
    for (const auto& [k, c] : free_counts(n, env)) {
      if (!chain || c < 2) out.insert(k);
    }
    return out;
  }

  void flatten(const Node& n, std::vector<const Node*>& out) const {
    if (n.kind == Kind::Mul || n.kind == Kind::Div) {
      flatten(*n.kids[0], out);
      flatten(*n.kids[1], out);
    } else {
      out.push_back(&n);
    }
  }

  void collect_ranges(const Node& n, const std::string& name, std::set<int>& out) const {
    if (n.kind == Kind::Ref) {
      for (const auto& a : n.deriv_list) {
        if (a.is_var && a.name == name) out.insert(spec_.base_dim());
      }
      for (std::size_t k = 0; k < n.indices.size(); ++k) {
        if (!n.indices[k].is_var || n.indices[k].name != name) continue;
        if (auto f = spec_.find_field(n.name)) {
          const auto& shape = spec_.fields()[static_cast<std::size_t>(*f)].shape;
          if (k < shape.size()) out.insert(shape[k]);
        } else if (auto p = spec_.find_param(n.name)) {
          const auto& shape = spec_.params()[static_cast<std::size_t>(*p)].shape;
          if (shape && k < shape->size()) out.insert((*shape)[k]);
        } else if (auto at = spec_.find_atom(n.name)) {
          const auto& shape = spec_.atoms()[static_cast<std::size_t>(*at)].shape;
          if (k < shape.size()) out.insert(shape[k]);
        }
      }
    }
    for (const auto& kid : n.kids) collect_ranges(*kid, name, out);
  }

  int range_of(const Node& chain, const std::string& name) const {
    std::set<int> ranges;
    collect_ranges(chain, name, ranges);
    if (ranges.empty()) semantic(chain, "cannot infer the range of summation index '" + name + "'");
    if (ranges.size() > 1) semantic(chain, "summation index '" + name + "' ranges over different dimensions");
    return *ranges.begin();
  }

  /// Free names of a whole right-hand side must be bound.
  void check_closed(const Node& n, const Env& env, const std::string& where) const {
    for (const auto& name : chain_free(n, env)) {
      semantic(n, "free index '" + name + "' not on the left-hand side" + where);
    }
  }

  // ---- symbolic evaluation

  Expr eval(const Node& n, const Env& env) const {
    switch (n.kind) {
      case Kind::Num:
        return Expr(n.num);
      case Kind::Ref:
      case Kind::Mul:
      case Kind::Div:
        return eval_chain(n, env);
      case Kind::Call:
        semantic(n, "function '" + n.name + "' is only allowed in atom value expressions");
      case Kind::Neg:
        return -eval(*n.kids[0], env);
      case Kind::Add:
        return eval(*n.kids[0], env) + eval(*n.kids[1], env);
      case Kind::Sub:
        return eval(*n.kids[0], env) - eval(*n.kids[1], env);
      case Kind::Pow: {
        const Expr e = eval(*n.kids[1], env);
        const auto c = e.constant_value();
        if (!c || denominator(*c) != 1) semantic(n, "exponents must be integer constants");
        const Expr b = eval(*n.kids[0], env);
        const auto k = static_cast<int>(numerator(*c));
        if (k < 0 && b.terms().size() != 1) semantic(n, "negative power of a sum");
        if (k < 0 && b.is_zero()) semantic(n, "negative power of zero");
        return b.pow(k);
      }
    }
    return Expr();
  }

  template <class Fn>
  void for_each_assignment(const Node& chain, const Env& env, Fn&& fn) const {
    std::vector<std::string> summed;
    for (const auto& [name, c] : free_counts(chain, env)) {
      if (c >= 2 && (chain.kind == Kind::Mul || chain.kind == Kind::Div || chain.kind == Kind::Ref)) {
        summed.push_back(name);
      }
    }
    std::vector<int> ranges;
    for (const auto& name : summed) ranges.push_back(range_of(chain, name));
    Env local = env;
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == summed.size()) {
        fn(local);
        return;
      }
      for (int v = 0; v < ranges[k]; ++v) {
        local[summed[k]] = v;
        rec(k + 1);
      }
    };
    rec(0);
  }

  Expr eval_chain(const Node& n, const Env& env) const {
    std::vector<const Node*> factors;
    if (n.kind == Kind::Ref) {
      factors.push_back(&n);
    } else {
      flatten_div(n, factors);
    }
    Expr total;
    for_each_assignment(n, env, [&](const Env& local) {
      Expr prod(1);
      for (const Node* f : factors) {
        if (f->kind == Kind::Div) {
          const Expr num = eval_chain_part(*f->kids[0], local);
          const Expr den = eval_chain_part(*f->kids[1], local);
          prod *= num * invert(den, *f);
        } else {
          prod *= eval_chain_part(*f, local);
        }
        if (prod.is_zero()) break;
      }
      total += prod;
    });
    return total;
  }

  // Divisions keep their two sides as one factor; sides are products themselves.
  void flatten_div(const Node& n, std::vector<const Node*>& out) const {
    if (n.kind == Kind::Mul) {
      flatten_div(*n.kids[0], out);
      flatten_div(*n.kids[1], out);
    } else {
      out.push_back(&n);
    }
  }

  Expr eval_chain_part(const Node& n, const Env& env) const {
    if (n.kind == Kind::Ref) return Expr::symbol(symbol_of(n, env));
    if (n.kind == Kind::Mul) {
      return eval_chain_part(*n.kids[0], env) * eval_chain_part(*n.kids[1], env);
    }
    if (n.kind == Kind::Div) {
      return eval_chain_part(*n.kids[0], env) * invert(eval_chain_part(*n.kids[1], env), n);
    }
    return eval(n, env);
  }

  static Expr invert(const Expr& e, const Node& at) {
    if (e.is_zero()) semantic(at, "division by zero");
    if (e.terms().size() != 1) semantic(at, "division by a sum is not supported");
    return e.pow(-1);
  }

  int index_value(const IndexArg& a, const Env& env, const Node& at) const {
    if (!a.is_var) return a.value;
    auto it = env.find(a.name);
    if (it == env.end()) semantic(at, "free index '" + a.name + "' not on the left-hand side");
    return it->second;
  }

  std::vector<int> index_values(const std::vector<IndexArg>& args, const Env& env, const Node& at) const {
    std::vector<int> out;
    for (const auto& a : args) out.push_back(index_value(a, env, at));
    return out;
  }

  Symbol symbol_of(const Node& n, const Env& env) const {
    const auto idx = index_values(n.indices, env, n);
    if (auto f = spec_.find_field(n.name)) {
      const auto& decl = spec_.fields()[static_cast<std::size_t>(*f)];
      if (idx.size() != decl.shape.size()) {
        semantic(n, "field '" + n.name + "' expects " + std::to_string(decl.shape.size()) + " indices");
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= decl.shape[k]) semantic(n, "index " + std::to_string(idx[k] + 1) + " out of range for field '" + n.name + "'");
      }
      std::vector<int> J;
      if (n.deriv == Deriv::Count) {
        if (spec_.base_dim() != 1) semantic(n, "D" + std::to_string(n.deriv_count) + "() needs a single base variable; use D(f; ...)");
        J.assign(static_cast<std::size_t>(n.deriv_count), 0);
      } else if (n.deriv == Deriv::List) {
        for (const auto& a : n.deriv_list) {
          const int v = index_value(a, env, n);
          if (v >= spec_.base_dim()) semantic(n, "derivative index out of range");
          J.push_back(v);
        }
      }
      const Symbol s = Symbol::jet(spec_.component(*f, idx), MultiIndex(J));
      if (field_orders_) {
        const auto it = field_orders_->find(*f);
        if (it != field_orders_->end() && s.order() > it->second) {
          semantic(n, "order overflow: " + spec_.symbol_name(s) + " exceeds the declared order " +
                          std::to_string(it->second) + " of field '" + n.name + "'");
        }
      }
      return s;
    }
    if (n.deriv != Deriv::None) semantic(n, "derivatives apply to fields only, not '" + n.name + "'");
    if (auto b = spec_.find_base(n.name)) {
      if (n.bracketed) semantic(n, "base variable '" + n.name + "' takes no indices");
      return Symbol::base(*b);
    }
    if (auto p = spec_.find_param(n.name)) {
      if (mutable_spec_ && !spec_.params()[static_cast<std::size_t>(*p)].arity) {
        mutable_spec_->param_decl(*p).arity = static_cast<int>(idx.size());
      }
      return Symbol::param(*p, spec_.canonical_param_indices(*p, idx));
    }
    if (auto a = spec_.find_atom(n.name)) return Symbol::atom(*a, spec_.canonical_atom_indices(*a, idx));
    semantic(n, "unknown name '" + n.name + "'");
  }

  // ---- numeric evaluation (atom values)

  double value(const Node& n, const Env& env, const JetPoint& p) const {
    switch (n.kind) {
      case Kind::Num:
        return static_cast<double>(n.num);
      case Kind::Ref:
      case Kind::Mul:
      case Kind::Div: {
        double total = 0.0;
        std::vector<const Node*> factors;
        if (n.kind == Kind::Ref) {
          factors.push_back(&n);
        } else {
          flatten_div(n, factors);
        }
        for_each_assignment(n, env, [&](const Env& local) {
          double prod = 1.0;
          for (const Node* f : factors) prod *= value_part(*f, local, p);
          total += prod;
        });
        return total;
      }
      case Kind::Call: {
        const double x = value(*n.kids[0], env, p);
        if (n.name == "sqrt") return std::sqrt(x);
        if (n.name == "exp") return std::exp(x);
        if (n.name == "log") return std::log(x);
        if (n.name == "sin") return std::sin(x);
        if (n.name == "cos") return std::cos(x);
        if (n.name == "tan") return std::tan(x);
        return std::abs(x);
      }
      case Kind::Neg:
        return -value(*n.kids[0], env, p);
      case Kind::Add:
        return value(*n.kids[0], env, p) + value(*n.kids[1], env, p);
      case Kind::Sub:
        return value(*n.kids[0], env, p) - value(*n.kids[1], env, p);
      case Kind::Pow:
        return std::pow(value(*n.kids[0], env, p), value(*n.kids[1], env, p));
    }
    return 0.0;
  }

  double value_part(const Node& n, const Env& env, const JetPoint& p) const {
    if (n.kind == Kind::Ref) {
      const Symbol s = symbol_of(n, env);
      if (s.kind == SymbolKind::Atom) semantic(n, "atom values may not refer to other atoms");
      return p.value(s);
    }
    if (n.kind == Kind::Mul) return value_part(*n.kids[0], env, p) * value_part(*n.kids[1], env, p);
    if (n.kind == Kind::Div) return value_part(*n.kids[0], env, p) / value_part(*n.kids[1], env, p);
    return value(n, env, p);
  }

 private:
  const JetSpec& spec_;
  std::map<int, int>* field_orders_;
  JetSpec* mutable_spec_;
};

// ---------------------------------------------------------------- derivative rules

struct RulePattern {
  std::vector<IndexArg> atom_indices;
  int field = 0;
  std::vector<IndexArg> field_indices;
  Deriv deriv = Deriv::None;
  int deriv_count = 0;
  std::vector<IndexArg> deriv_list;
  NodePtr rhs;
};

bool bind(const IndexArg& pat, int value, Env& env) {
  if (!pat.is_var) return pat.value == value;
  auto [it, inserted] = env.emplace(pat.name, value);
  return inserted || it->second == value;
}

bool bind_all(const std::vector<IndexArg>& pats, const std::vector<int>& values, Env& env) {
  if (pats.size() != values.size()) return false;
  for (std::size_t k = 0; k < pats.size(); ++k) {
    if (!bind(pats[k], values[k], env)) return false;
  }
  return true;
}

/// Matches a sorted multi-index against a derivative pattern (any order of
/// the pattern entries).
bool bind_multi(const RulePattern& r, const std::vector<int>& J, Env& env) {
  if (r.deriv == Deriv::None) return J.empty();
  if (r.deriv == Deriv::Count) {
    return static_cast<int>(J.size()) == r.deriv_count && std::all_of(J.begin(), J.end(), [](int i) { return i == 0; });
  }
  if (r.deriv_list.size() != J.size()) return false;
  std::vector<int> perm = J;
  do {
    Env trial = env;
    if (bind_all(r.deriv_list, perm, trial)) {
      env = std::move(trial);
      return true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// ---------------------------------------------------------------- statements

struct Holder {
  std::shared_ptr<const JetSpec> snapshot;
};

class FileParser {
 public:
  explicit FileParser(std::string_view text) : tokens_(detail::tokenize(text)) {}

  ProblemFile run() {
    out_.spec = std::make_shared<JetSpec>();
    holder_ = std::make_shared<Holder>();
    Parser p(tokens_, out_.spec.get());
    while (!p.at(Tok::End)) statement(p);

    auto& spec = *out_.spec;
    int r = 0;
    for (const auto& [f, o] : field_orders_) r = std::max(r, o);
    spec.set_max_order(r);
    spec.validate();

    // Rules and evaluators resolve names against a rule-free copy of the chart.
    JetSpec snapshot = spec;
    for (int a = 0; a < static_cast<int>(snapshot.atoms().size()); ++a) {
      snapshot.atom_decl(a).derivative = nullptr;
      snapshot.atom_decl(a).evaluator = nullptr;
    }
    holder_->snapshot = std::make_shared<const JetSpec>(std::move(snapshot));

    const Resolver res(spec, &field_orders_, &spec);
    if (!source_stmts_.empty() && lagrangian_) {
      throw SemanticError("a problem defines either a source form or a Lagrangian, not both");
    }
    if (!source_stmts_.empty()) {
      SourceForm eps{out_.spec, std::vector<Expr>(static_cast<std::size_t>(spec.component_count()))};
      for (const auto& st : source_stmts_) {
        const auto& decl = spec.fields()[static_cast<std::size_t>(st.field)];
        for (int c = decl.first_component; c < decl.first_component + decl.component_count; ++c) {
          Env env;
          const auto& idx = spec.components()[static_cast<std::size_t>(c)].indices;
          for (std::size_t k = 0; k < idx.size(); ++k) env[st.indices[k]] = idx[k];
          res.check_closed(*st.rhs, env, " of source '" + out_.source_name + "'");
          eps.components[static_cast<std::size_t>(c)] = res.eval(*st.rhs, env);
        }
      }
      out_.source = std::move(eps);
    }
    if (lagrangian_) {
      res.check_closed(*lagrangian_, {}, " of Lagrangian '" + out_.lagrangian_name + "'");
      out_.lagrangian = Lagrangian{out_.spec, res.eval(*lagrangian_, {})};
    }
    if (!out_.scale_declared) out_.scaled_fields = spec.all_field_ids();
    return std::move(out_);
  }

 private:
  struct SourceStmt {
    int field;
    std::vector<std::string> indices;
    NodePtr rhs;
  };

  void statement(Parser& p) {
    if (!p.at(Tok::Ident)) p.fail("a statement keyword");
    const Token kw = p.take();
    if (kw.text == "base") {
      do {
        if (p.at(Tok::Comma)) p.take();
        const Token name = p.expect(Tok::Ident, "a base variable name");
        declare(name, [&] { out_.spec->add_base(name.text); });
      } while (p.at(Tok::Comma));
    } else if (kw.text == "field") {
      field_decl(p);
    } else if (kw.text == "param") {
      param_decl(p);
    } else if (kw.text == "atom") {
      atom_decl(p);
    } else if (kw.text == "deriv") {
      deriv_decl(p);
    } else if (kw.text == "source") {
      source_decl(p);
    } else if (kw.text == "lagrangian") {
      const Token name = p.expect(Tok::Ident, "a Lagrangian name");
      if (lagrangian_) throw SemanticError(at(name) + "only one Lagrangian may be defined");
      p.expect(Tok::Equals, "'='");
      out_.lagrangian_name = name.text;
      lagrangian_ = p.expr();
    } else if (kw.text == "scale") {
      do {
        if (p.at(Tok::Comma)) p.take();
        const Token name = p.expect(Tok::Ident, "a field name");
        const auto f = out_.spec->find_field(name.text);
        if (!f) throw SemanticError(at(name) + "unknown field '" + name.text + "'");
        out_.scaled_fields.push_back(*f);
      } while (p.at(Tok::Comma));
      out_.scale_declared = true;
    } else if (kw.text == "check") {
      check_decl(p);
    } else {
      throw SyntaxError(kw.line, kw.column, "a statement keyword", detail::describe(kw));
    }
    p.expect(Tok::Semicolon, "';'");
  }

  static std::string at(const Token& t) { return std::to_string(t.line) + ":" + std::to_string(t.column) + ": "; }

  template <class Fn>
  void declare(const Token& name, Fn&& fn) {
    try {
      fn();
    } catch (const SemanticError& e) {
      throw SemanticError(at(name) + e.what());
    }
  }

  std::vector<int> shape(Parser& p) {
    std::vector<int> dims;
    if (!p.at(Tok::LBracket)) return dims;
    p.take();
    do {
      if (!dims.empty()) p.take();
      dims.push_back(p.positive_int("a dimension"));
    } while (p.at(Tok::Comma));
    p.expect(Tok::RBracket, "']'");
    return dims;
  }

  void field_decl(Parser& p) {
    std::vector<std::pair<Token, std::vector<int>>> names;
    do {
      if (p.at(Tok::Comma)) p.take();
      const Token name = p.expect(Tok::Ident, "a field name");
      names.emplace_back(name, shape(p));
    } while (p.at(Tok::Comma));
    bool sym = false;
    if (p.at_word("sym")) {
      p.take();
      sym = true;
    }
    p.expect_word("order");
    const int order = p.positive_int("an integer order");
    for (auto& [name, dims] : names) {
      declare(name, [&] {
        const int id = out_.spec->add_field(name.text, dims, sym);
        field_orders_[id] = order;
      });
    }
  }

  void param_decl(Parser& p) {
    do {
      if (p.at(Tok::Comma)) p.take();
      const Token name = p.expect(Tok::Ident, "a parameter name");
      std::optional<std::vector<int>> dims;
      if (p.at(Tok::LBracket)) dims = shape(p);
      bool sym = false;
      std::optional<int> arity;
      if (p.at_word("sym")) {
        p.take();
        sym = true;
      } else if (p.at_word("sym2")) {
        p.take();
        sym = true;
        arity = 2;
        if (dims && dims->size() != 2) throw SemanticError(at(name) + "sym2 parameters take exactly 2 indices");
      }
      declare(name, [&] { out_.spec->add_param(name.text, dims, sym, arity); });
    } while (p.at(Tok::Comma));
  }

  void atom_decl(Parser& p) {
    const Token name = p.expect(Tok::Ident, "an atom name");
    AtomDecl decl;
    decl.name = name.text;
    decl.shape = shape(p);
    if (p.at_word("sym")) {
      p.take();
      decl.symmetric = true;
    }
    if (p.at_word("weight")) {
      p.take();
      decl.weight = p.signed_rational("a rational weight");
    }
    if (p.at_word("depends")) {
      p.take();
      do {
        if (p.at(Tok::Comma)) p.take();
        const Token f = p.expect(Tok::Ident, "a field name");
        const auto id = out_.spec->find_field(f.text);
        if (!id) throw SemanticError(at(f) + "unknown field '" + f.text + "'");
        decl.depends.push_back(*id);
      } while (p.at(Tok::Comma));
    }
    if (p.at_word("order")) {
      p.take();
      decl.order = p.positive_int("an integer order");
    }
    NodePtr value;
    if (p.at_word("value")) {
      p.take();
      value = p.expr();
      if (!decl.shape.empty()) throw SemanticError(at(name) + "value expressions are supported for scalar atoms only");
    }
    if (value) {
      auto holder = holder_;
      decl.evaluator = [holder, value](const std::vector<int>&, const JetPoint& point) {
        const Resolver res(*holder->snapshot, nullptr);
        return res.value(*value, {}, point);
      };
    }
    auto rules = std::make_shared<std::vector<RulePattern>>();
    rules_[name.text] = rules;
    auto holder = holder_;
    decl.derivative = [holder, rules](const std::vector<int>& indices, const Symbol& var) -> std::optional<Expr> {
      const JetSpec& spec = *holder->snapshot;
      if (var.kind != SymbolKind::Field) return std::nullopt;
      const auto& comp = spec.components().at(static_cast<std::size_t>(var.id));
      for (const auto& r : *rules) {
        if (comp.field != r.field) continue;
        Env env;
        if (!bind_all(r.atom_indices, indices, env)) continue;
        if (!bind_all(r.field_indices, comp.indices, env)) continue;
        if (!bind_multi(r, var.indices, env)) continue;
        return Resolver(spec, nullptr).eval(*r.rhs, env);
      }
      return std::nullopt;
    };
    declare(name, [&] { out_.spec->add_atom(std::move(decl)); });
  }

  void deriv_decl(Parser& p) {
    const Token name = p.peek();
    auto atom = p.plain_ref();
    const auto it = rules_.find(atom->name);
    if (it == rules_.end()) throw SemanticError(at(name) + "unknown atom '" + atom->name + "'");
    p.expect_word("wrt");
    const Token wt = p.peek();
    const NodePtr target = p.primary();
    if (target->kind != Kind::Ref) throw SyntaxError(wt.line, wt.column, "a jet coordinate", detail::describe(wt));
    const auto field = out_.spec->find_field(target->name);
    if (!field) throw SemanticError(at(wt) + "'" + target->name + "' is not a field");
    p.expect(Tok::Equals, "'='");
    RulePattern r;
    r.atom_indices = atom->indices;
    r.field = *field;
    r.field_indices = target->indices;
    r.deriv = target->deriv;
    r.deriv_count = target->deriv_count;
    r.deriv_list = target->deriv_list;
    r.rhs = p.expr();
    it->second->push_back(std::move(r));
  }

  void source_decl(Parser& p) {
    const Token name = p.expect(Tok::Ident, "a source name");
    std::vector<std::string> indices;
    if (p.at(Tok::LBracket)) {
      p.take();
      do {
        if (!indices.empty()) p.take();
        indices.push_back(p.ident("an index name"));
      } while (p.at(Tok::Comma));
      p.expect(Tok::RBracket, "']'");
    }
    std::optional<int> field;
    if (p.at_word("for")) {
      p.take();
      const Token f = p.expect(Tok::Ident, "a field name");
      field = out_.spec->find_field(f.text);
      if (!field) throw SemanticError(at(f) + "unknown field '" + f.text + "'");
    } else if (out_.spec->fields().size() == 1) {
      field = 0;
    } else {
      throw SemanticError(at(name) + "source needs 'for FIELD' when several fields are declared");
    }
    p.expect(Tok::Equals, "'='");
    NodePtr rhs = p.expr();
    if (!out_.source_name.empty() && out_.source_name != name.text) {
      throw SemanticError(at(name) + "only one source form may be defined");
    }
    for (const auto& st : source_stmts_) {
      if (st.field == *field) throw SemanticError(at(name) + "field already has source components");
    }
    const auto& decl = out_.spec->fields()[static_cast<std::size_t>(*field)];
    if (indices.size() != decl.shape.size()) {
      throw SemanticError(at(name) + "source for field '" + decl.name + "' needs " + std::to_string(decl.shape.size()) +
                          " free indices");
    }
    for (const auto& i : indices) {
      if (std::count(indices.begin(), indices.end(), i) > 1) {
        throw SemanticError(at(name) + "repeated free index '" + i + "'");
      }
    }
    out_.source_name = name.text;
    source_stmts_.push_back({*field, std::move(indices), std::move(rhs)});
  }

  void check_decl(Parser& p) {
    bool any = false;
    while (p.at(Tok::Ident)) {
      const Token w = p.take();
      if (w.text == "points") {
        out_.checks.points = p.positive_int("a point count");
        if (out_.checks.points < 1) throw SemanticError(at(w) + "point count must be at least 1");
      } else if (w.text == "seed") {
        out_.checks.seed = std::stoull(p.expect(Tok::Number, "a seed").text);
      } else if (w.text == "tol") {
        const Token t = p.expect(Tok::Number, "a tolerance");
        out_.checks.tolerance = std::stod(t.text);
        if (!(out_.checks.tolerance > 0)) throw SemanticError(at(t) + "tolerance must be positive");
      } else {
        throw SyntaxError(w.line, w.column, "'points', 'seed' or 'tol'", detail::describe(w));
      }
      any = true;
    }
    if (!any) p.fail("'points', 'seed' or 'tol'");
  }

  std::vector<Token> tokens_;
  ProblemFile out_;
  std::shared_ptr<Holder> holder_;
  std::map<int, int> field_orders_;
  std::map<std::string, std::shared_ptr<std::vector<RulePattern>>> rules_;
  std::vector<SourceStmt> source_stmts_;
  NodePtr lagrangian_;
};

}  // namespace

ProblemFile parse(std::string_view text) { return FileParser(text).run(); }

Expr parse_expression(std::string_view text, const JetSpec& spec) {
  Parser p(detail::tokenize(text), &spec);
  NodePtr n = p.expr();
  if (!p.at(Tok::End)) p.fail("end of expression");
  const Resolver res(spec, nullptr);
  res.check_closed(*n, {}, "");
  return res.eval(*n, {});
}

std::vector<std::pair<Symbol, double>> parse_point(std::string_view text, const JetSpec& spec) {
  std::vector<std::pair<Symbol, double>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  const Resolver res(spec, nullptr);
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::tokenize(line);
    for (auto& t : toks) t.line = lineno;
    if (toks.size() == 1) continue;
    Parser p(std::move(toks), &spec);
    const NodePtr ref = p.primary();
    if (ref->kind != Kind::Ref) p.fail("a coordinate or parameter");
    p.expect(Tok::Equals, "'='");
    bool neg = false;
    if (p.at(Tok::Minus) || p.at(Tok::Plus)) neg = p.take().kind == Tok::Minus;
    const Token num = p.expect(Tok::Number, "a number");
    if (!p.at(Tok::End)) p.fail("end of line");
    for (const auto& a : ref->indices) {
      if (a.is_var) semantic(*ref, "point coordinates need literal indices");
    }
    for (const auto& a : ref->deriv_list) {
      if (a.is_var) semantic(*ref, "unknown base variable '" + a.name + "'");
    }
    const Symbol s = res.symbol_of(*ref, {});
    if (s.kind == SymbolKind::Atom) semantic(*ref, "atoms cannot be assigned in a point file");
    for (const auto& [prev, v] : out) {
      if (prev == s) semantic(*ref, "coordinate assigned twice");
    }
    const double v = std::stod(num.text);
    out.emplace_back(s, neg ? -v : v);
  }
  return out;
}

}  // namespace varcomp
