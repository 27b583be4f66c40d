#include "sbl/signature.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "sbl/term.hpp"

namespace sbl {

namespace {

// `arrow`/`rg` are deliberately absent: a term constructor may carry those
// names (the formula macros shadow them in formula syntax).
const std::set<std::string> kReservedWords = {
    "top", "bot", "and", "or", "not", "mu", "dia", "lift",
    "hole1", "hole2", "sort", "op", "eq", "rule", "logic", "bind",
};

bool reserved_name(const std::string& s) {
  if (s.empty()) return true;
  if (kReservedWords.count(s)) return true;
  switch (s[0]) {
    case '$': case '~': case '#': case '(': case ')': case '\\': return true;
    default: return false;
  }
}

}  // namespace

ArgDescriptor ArgDescriptor::plain(std::string s) {
  ArgDescriptor d;
  d.kind = Kind::Plain;
  d.sort = std::move(s);
  return d;
}

ArgDescriptor ArgDescriptor::variadic(std::string s) {
  ArgDescriptor d;
  d.kind = Kind::Variadic;
  d.sort = std::move(s);
  return d;
}

ArgDescriptor ArgDescriptor::abstraction(std::string bound, std::string body, bool variadic,
                                         int count) {
  ArgDescriptor d;
  d.kind = Kind::Abstraction;
  d.sort = std::move(bound);
  d.body_sort = std::move(body);
  d.variadic_binder = variadic;
  d.bound_count = count;
  return d;
}

std::string ArgDescriptor::text() const {
  switch (kind) {
    case Kind::Plain: return sort;
    case Kind::Variadic: return sort + "*";
    case Kind::Abstraction: {
      std::string out = "bind ";
      if (variadic_binder) {
        out += sort + "*";
      } else {
        for (int i = 0; i < bound_count; ++i) {
          if (i) out += " ";
          out += sort;
        }
      }
      return out + " . " + body_sort;
    }
  }
  return "?";
}

std::string Diagnostic::text() const {
  static const char* names[] = {
      "SyntaxError",       "UnknownSort",  "ArityMismatch", "BadAttribute",
      "DuplicateName",     "UnboundMetavariable", "BadEquation", "BadPattern",
  };
  std::string out = names[static_cast<int>(code)];
  out += ": " + message;
  if (line > 0) out += " (line " + std::to_string(line) + ")";
  return out;
}

bool Presentation::has_sort(const std::string& s) const {
  return std::find(sorts.begin(), sorts.end(), s) != sorts.end();
}

bool Presentation::logic_enabled(const std::string& s) const {
  return std::find(logic_sorts.begin(), logic_sorts.end(), s) != logic_sorts.end();
}

const ConstructorDecl* Presentation::find_constructor(const std::string& name) const {
  for (const auto& c : constructors)
    if (c.name == name) return &c;
  return nullptr;
}

const RewriteRuleDecl* Presentation::find_rule(const std::string& name) const {
  for (const auto& r : rules)
    if (r.name == name) return &r;
  return nullptr;
}

namespace {

bool binary_same_sorted(const ConstructorDecl& c) {
  return c.args.size() == 2 && c.args[0].kind == ArgDescriptor::Kind::Plain &&
         c.args[1].kind == ArgDescriptor::Kind::Plain && c.args[0].sort == c.result &&
         c.args[1].sort == c.result;
}

}  // namespace

const ConstructorDecl* Presentation::application_constructor() const {
  const ConstructorDecl* unique = nullptr;
  int candidates = 0;
  for (const auto& c : constructors) {
    if (!binary_same_sorted(c) || c.assoc) continue;
    if (c.name == "app") return &c;
    ++candidates;
    unique = &c;
  }
  return candidates == 1 ? unique : nullptr;
}

const ConstructorDecl* Presentation::parallel_constructor() const {
  const ConstructorDecl* unique = nullptr;
  for (const auto& c : constructors) {
    if (!binary_same_sorted(c) || !c.assoc || !c.comm) continue;
    if (c.name == "|") return &c;
    if (unique) return nullptr;
    unique = &c;
  }
  return unique;
}

// ---------- DSL parsing ----------

namespace {

struct Line {
  int number;
  std::vector<std::string> tokens;
  std::string rest_after;  // raw remainder, used by eq/rule pattern text
};

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ' ' || ch == '\t' || ch == ',') {
      if (!cur.empty()) out.push_back(cur), cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    auto toks = split_tokens(raw);
    if (toks.empty()) continue;
    lines.push_back({no, std::move(toks), raw});
  }
  return lines;
}

// Parses `<arg>, ...` up to `->`, returning descriptors.
std::vector<ArgDescriptor> parse_arg_list(const std::vector<std::string>& toks, size_t begin,
                                          size_t end, int line) {
  std::vector<ArgDescriptor> out;
  size_t i = begin;
  while (i < end) {
    if (toks[i] == "bind") {
      ++i;
      std::string bound;
      bool variadic = false;
      int count = 0;
      while (i < end && toks[i] != ".") {
        std::string s = toks[i];
        if (s.size() > 1 && s.back() == '*') {
          s.pop_back();
          variadic = true;
        } else {
          ++count;
        }
        if (!bound.empty() && bound != s)
          throw SyntaxError("binder sorts must agree, got " + bound + " and " + s, line);
        bound = s;
        ++i;
      }
      if (i >= end || toks[i] != ".")
        throw SyntaxError("expected `.` in binder argument", line);
      ++i;
      if (i >= end) throw SyntaxError("missing binder body sort", line);
      if (bound.empty()) throw SyntaxError("binder binds no sort", line);
      if (variadic && count > 0)
        throw SyntaxError("binder is either fixed-arity or variadic, not both", line);
      out.push_back(ArgDescriptor::abstraction(bound, toks[i], variadic, count));
      ++i;
    } else {
      std::string s = toks[i];
      if (s.size() > 1 && s.back() == '*') {
        s.pop_back();
        out.push_back(ArgDescriptor::variadic(s));
      } else {
        out.push_back(ArgDescriptor::plain(s));
      }
      ++i;
    }
  }
  return out;
}

Presentation parse_impl(const std::string& text) {
  Presentation p;
  auto lines = split_lines(text);
  if (lines.empty()) throw SyntaxError("empty presentation", 1);

  // First pass: sorts, constructors, logic directives.
  for (const auto& ln : lines) {
    const auto& t = ln.tokens;
    if (t[0] == "sort") {
      if (t.size() != 2) throw SyntaxError("expected `sort <name>`", ln.number);
      p.sorts.push_back(t[1]);
    } else if (t[0] == "op") {
      if (t.size() < 4 || t[2] != ":")
        throw SyntaxError("expected `op <name> : <args> -> <sort> [attrs]`", ln.number);
      ConstructorDecl c;
      c.name = t[1];
      c.line = ln.number;
      auto arrow = std::find(t.begin(), t.end(), "->");
      if (arrow == t.end()) throw SyntaxError("missing `->` in op declaration", ln.number);
      size_t ai = static_cast<size_t>(arrow - t.begin());
      c.args = parse_arg_list(t, 3, ai, ln.number);
      if (ai + 1 >= t.size()) throw SyntaxError("missing result sort", ln.number);
      c.result = t[ai + 1];
      for (size_t i = ai + 2; i < t.size(); ++i) {
        if (t[i] == "assoc") {
          c.assoc = true;
        } else if (t[i] == "assoc-comm") {
          c.assoc = true;
          c.comm = true;
        } else if (t[i] == "unit") {
          if (i + 1 >= t.size()) throw SyntaxError("`unit` needs an op name", ln.number);
          c.unit = t[++i];
        } else {
          throw SyntaxError("unknown attribute `" + t[i] + "`", ln.number);
        }
      }
      p.constructors.push_back(std::move(c));
    } else if (t[0] == "logic") {
      for (size_t i = 1; i < t.size(); ++i) p.logic_sorts.push_back(t[i]);
    } else if (t[0] == "eq" || t[0] == "rule") {
      // second pass
    } else {
      throw SyntaxError("unknown directive `" + t[0] + "`", ln.number);
    }
  }
  if (p.logic_sorts.empty()) p.logic_sorts = p.sorts;

  // Second pass: equations and rules, now that operators are known.
  for (const auto& ln : lines) {
    const auto& t = ln.tokens;
    try {
      if (t[0] == "eq") {
        auto raw = ln.rest_after;
        auto pos = raw.find("eq");
        raw = raw.substr(pos + 2);
        auto eqpos = raw.find('=');
        if (eqpos == std::string::npos) throw SyntaxError("missing `=` in equation", ln.number);
        EquationDecl e;
        e.line = ln.number;
        e.lhs = parse_pattern(p, raw.substr(0, eqpos));
        e.rhs = parse_pattern(p, raw.substr(eqpos + 1));
        p.equations.push_back(std::move(e));
      } else if (t[0] == "rule") {
        if (t.size() < 4 || t[2] != ":")
          throw SyntaxError("expected `rule <name> : <lhs> => <rhs>`", ln.number);
        auto raw = ln.rest_after;
        auto colon = raw.find(':');
        auto arrow = raw.find("=>");
        if (arrow == std::string::npos)
          throw SyntaxError("missing `=>` in rule", ln.number);
        RewriteRuleDecl r;
        r.name = t[1];
        r.line = ln.number;
        r.lhs = parse_pattern(p, raw.substr(colon + 1, arrow - colon - 1));
        r.rhs = parse_pattern(p, raw.substr(arrow + 2));
        p.rules.push_back(std::move(r));
      }
    } catch (const SyntaxError& e) {
      if (e.line > 0) throw;
      throw SyntaxError(e.what(), ln.number);
    }
  }
  return p;
}

}  // namespace

Presentation parse_presentation_unvalidated(const std::string& text) {
  return parse_impl(text);
}

Presentation parse_presentation(const std::string& text) {
  Presentation p = parse_impl(text);
  auto diags = validate(p);
  if (!diags.empty()) {
    std::string msg = "invalid presentation:";
    for (const auto& d : diags) msg += "\n  " + d.text();
    throw SyntaxError(msg, diags.front().line);
  }
  return p;
}

// ---------- validation ----------

namespace {

using Code = Diagnostic::Code;

struct Validator {
  const Presentation& p;
  std::vector<Diagnostic>& diags;

  void add(Code c, std::string msg, int line = 0) {
    diags.push_back({c, std::move(msg), line});
  }

  // Collected metavariable signatures: sort text, or descriptor text for
  // abstraction positions; "" when the position could not be inferred.
  using VarSorts = std::map<std::string, std::string>;

  void walk_args(const TermPtr& node, const ConstructorDecl& c, bool rhs, int line,
                 VarSorts& vars, const std::map<std::string, const ArgDescriptor*>& absvars,
                 std::map<std::string, const ArgDescriptor*>* abs_out);

  void walk(const TermPtr& node, const std::string& expected, bool rhs, int line,
            VarSorts& vars, const std::map<std::string, const ArgDescriptor*>& absvars,
            std::map<std::string, const ArgDescriptor*>* abs_out) {
    if (!node) return;
    switch (node->kind) {
      case Term::Kind::Meta:
        if (!expected.empty()) {
          auto [it, fresh] = vars.emplace(node->head, expected);
          if (!fresh && !it->second.empty() && it->second != expected)
            add(Code::BadPattern,
                "metavariable $" + node->head + " used at sorts " + it->second + " and " +
                    expected,
                line);
        } else {
          vars.emplace(node->head, "");
        }
        return;
      case Term::Kind::Atom:
        if (reserved_name(node->head))
          add(Code::BadPattern, "reserved atom name `" + node->head + "`", line);
        if (!expected.empty() && !node->sort.empty() && node->sort != expected)
          add(Code::BadPattern, "atom `" + node->head + "` at sort " + expected, line);
        return;
      case Term::Kind::Hole:
        add(Code::BadPattern, "holes are not allowed in rewrite patterns", line);
        return;
      case Term::Kind::Var:
        return;
      case Term::Kind::Abs:
        walk(node->args.empty() ? nullptr : node->args[0], "", rhs, line, vars, absvars,
             abs_out);
        return;
      case Term::Kind::Splice:
        if (!rhs) {
          add(Code::BadPattern, "splices may only appear on a rule right-hand side", line);
          return;
        }
        walk(node->args.empty() ? nullptr : node->args[0], expected, rhs, line, vars, absvars,
             abs_out);
        return;
      case Term::Kind::MetaApp: {
        if (!rhs) {
          add(Code::BadPattern, "abstraction application may only appear on a right-hand side",
              line);
          return;
        }
        auto it = absvars.find(node->head);
        if (it == absvars.end()) {
          add(Code::UnboundMetavariable,
              "$" + node->head + " applied but not bound to an abstraction on the left", line);
        }
        for (const auto& a : node->args)
          walk(a, it == absvars.end() ? "" : it->second->sort, rhs, line, vars, absvars,
               abs_out);
        return;
      }
      case Term::Kind::Apply:
      case Term::Kind::Flat: {
        const ConstructorDecl* c = p.find_constructor(node->head);
        if (!c) {
          add(Code::BadPattern, "unknown operator `" + node->head + "`", line);
          return;
        }
        if (!expected.empty() && c->result != expected)
          add(Code::BadPattern,
              "operator `" + node->head + "` has sort " + c->result + ", expected " + expected,
              line);
        if (node->kind == Term::Kind::Flat) {
          int seqs = 0;
          for (const auto& e : node->args) {
            if (e->kind == Term::Kind::Meta && e->seq) {
              ++seqs;
              vars.emplace(e->head, c->result + "*");
              continue;
            }
            walk(e, c->result, rhs, line, vars, absvars, abs_out);
          }
          if (seqs > 1)
            add(Code::BadPattern, "at most one sequence metavariable per multiset pattern",
                line);
        } else {
          walk_args(node, *c, rhs, line, vars, absvars, abs_out);
        }
        return;
      }
    }
  }
};

void Validator::walk_args(const TermPtr& node, const ConstructorDecl& c, bool rhs, int line,
                          VarSorts& vars,
                          const std::map<std::string, const ArgDescriptor*>& absvars,
                          std::map<std::string, const ArgDescriptor*>* abs_out) {
  size_t fixed_before = 0, fixed_after = 0;
  int variadic_at = -1;
  for (size_t i = 0; i < c.args.size(); ++i) {
    if (c.args[i].kind == ArgDescriptor::Kind::Variadic) {
      if (variadic_at >= 0) return;  // declaration-level diagnostic reported elsewhere
      variadic_at = static_cast<int>(i);
    } else {
      (variadic_at < 0 ? fixed_before : fixed_after)++;
    }
  }
  if (variadic_at < 0 && node->args.size() != c.args.size()) {
    add(Code::ArityMismatch, "operator `" + c.name + "` expects " +
                                 std::to_string(c.args.size()) + " arguments",
        line);
    return;
  }
  if (variadic_at >= 0 && node->args.size() < fixed_before + fixed_after) {
    add(Code::ArityMismatch, "operator `" + c.name + "` expects at least " +
                                 std::to_string(fixed_before + fixed_after) + " arguments",
        line);
    return;
  }

  size_t n = node->args.size();
  if (variadic_at >= 0) {
    int seqs = 0;
    for (size_t i = fixed_before; i + fixed_after < n + 0u && i < n; ++i) {
      const auto& a = node->args[i];
      if ((a->kind == Term::Kind::Meta && a->seq) || a->kind == Term::Kind::Splice) ++seqs;
    }
    if (seqs > 1)
      add(Code::BadPattern,
          "at most one sequence element per variadic region of `" + c.name + "`", line);
  }
  for (size_t i = 0; i < n; ++i) {
    const ArgDescriptor* d;
    if (variadic_at < 0) {
      d = &c.args[i];
    } else if (i < fixed_before) {
      d = &c.args[i];
    } else if (i >= n - fixed_after) {
      d = &c.args[c.args.size() - (n - i)];
    } else {
      d = &c.args[variadic_at];
    }
    const auto& a = node->args[i];
    switch (d->kind) {
      case ArgDescriptor::Kind::Plain:
        if (a->kind == Term::Kind::Meta && a->seq)
          add(Code::BadPattern, "sequence metavariable at a plain argument of `" + c.name + "`",
              line);
        walk(a, d->sort, rhs, line, vars, absvars, abs_out);
        break;
      case ArgDescriptor::Kind::Variadic:
        if (a->kind == Term::Kind::Meta && a->seq) {
          auto [it, fresh] = vars.emplace(a->head, d->sort + "*");
          if (!fresh && it->second != d->sort + "*")
            add(Code::BadPattern, "metavariable $" + a->head + " used at mixed sorts", line);
        } else {
          walk(a, d->sort, rhs, line, vars, absvars, abs_out);
        }
        break;
      case ArgDescriptor::Kind::Abstraction:
        if (a->kind == Term::Kind::Meta) {
          vars.emplace(a->head, d->text());
          if (abs_out) abs_out->emplace(a->head, d);
        } else if (a->kind == Term::Kind::Abs) {
          if (!d->variadic_binder && a->bound != d->bound_count)
            add(Code::ArityMismatch, "binder count mismatch under `" + c.name + "`", line);
          walk(a->args.empty() ? nullptr : a->args[0], d->body_sort, rhs, line, vars, absvars,
               abs_out);
        } else {
          add(Code::BadPattern, "expected an abstraction argument under `" + c.name + "`",
              line);
        }
        break;
    }
  }
}

void collect_metas(const TermPtr& t, std::map<std::string, int>& out) {
  if (!t) return;
  if (t->kind == Term::Kind::Meta) {
    out[t->head]++;
    return;
  }
  if (t->kind == Term::Kind::MetaApp) out[t->head]++;
  for (const auto& a : t->args) collect_metas(a, out);
}

// Lexicographic path order with precedence = declaration position (later
// declarations are greater, ties by name); metavariables are minimal
// constants. Guarantees termination of the oriented equations.
struct Lpo {
  const Presentation& p;

  std::pair<int, std::string> prec(const TermPtr& t) const {
    switch (t->kind) {
      case Term::Kind::Apply:
      case Term::Kind::Flat: {
        int idx = 0;
        for (size_t i = 0; i < p.constructors.size(); ++i)
          if (p.constructors[i].name == t->head) idx = static_cast<int>(i) + 2;
        return {idx, t->head};
      }
      case Term::Kind::Abs:
        return {1, "\\"};
      default:
        return {0, t->head};
    }
  }

  static bool is_leaf(const TermPtr& t) {
    return t->kind == Term::Kind::Meta || t->kind == Term::Kind::Atom ||
           t->kind == Term::Kind::Var;
  }

  bool eq(const TermPtr& a, const TermPtr& b) const { return compare(a, b) == 0; }

  bool gt(const TermPtr& s, const TermPtr& t) const {
    if (is_leaf(s)) return false;
    if (is_leaf(t)) {
      if (t->kind == Term::Kind::Meta) return occurs(s, t);
      // atoms and ground leaves are below any composite
      return true;
    }
    // (1) some argument of s dominates t
    for (const auto& a : s->args)
      if (eq(a, t) || gt(a, t)) return true;
    auto ps = prec(s), pt = prec(t);
    if (ps > pt) {
      for (const auto& b : t->args)
        if (!gt(s, b)) return false;
      return true;
    }
    if (ps == pt) {
      // lexicographic on arguments
      size_t n = std::min(s->args.size(), t->args.size());
      size_t i = 0;
      while (i < n && eq(s->args[i], t->args[i])) ++i;
      bool lex = (i < n) ? gt(s->args[i], t->args[i]) : s->args.size() > t->args.size();
      if (!lex) return false;
      for (const auto& b : t->args)
        if (!eq(s, b) && !gt(s, b)) return false;
      return true;
    }
    return false;
  }

  bool occurs(const TermPtr& s, const TermPtr& v) const {
    if (eq(s, v)) return true;
    for (const auto& a : s->args)
      if (occurs(a, v)) return true;
    return false;
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Presentation& p) {
  std::vector<Diagnostic> diags;
  Validator v{p, diags};

  std::set<std::string> seen_sorts;
  for (const auto& s : p.sorts) {
    if (reserved_name(s)) v.add(Code::BadPattern, "reserved sort name `" + s + "`");
    if (!seen_sorts.insert(s).second) v.add(Code::DuplicateName, "duplicate sort `" + s + "`");
  }
  for (const auto& s : p.logic_sorts)
    if (!p.has_sort(s)) v.add(Code::UnknownSort, "logic sort `" + s + "` is not declared");

  std::set<std::string> seen_ctors;
  for (const auto& c : p.constructors) {
    if (reserved_name(c.name))
      v.add(Code::BadPattern, "reserved operator name `" + c.name + "`", c.line);
    if (!seen_ctors.insert(c.name).second)
      v.add(Code::DuplicateName, "duplicate operator `" + c.name + "`", c.line);
    if (!p.has_sort(c.result))
      v.add(Code::UnknownSort, "unknown result sort `" + c.result + "`", c.line);
    int variadics = 0;
    for (const auto& a : c.args) {
      if (!p.has_sort(a.sort))
        v.add(Code::UnknownSort, "unknown argument sort `" + a.sort + "`", c.line);
      if (a.kind == ArgDescriptor::Kind::Variadic) ++variadics;
      if (a.kind == ArgDescriptor::Kind::Abstraction && !p.has_sort(a.body_sort))
        v.add(Code::UnknownSort, "unknown binder body sort `" + a.body_sort + "`", c.line);
    }
    if (variadics > 1)
      v.add(Code::ArityMismatch, "`" + c.name + "` has more than one variadic argument",
            c.line);
    if (c.assoc && !binary_same_sorted(c))
      v.add(Code::BadAttribute,
            "`assoc` requires a binary operator over its own sort (`" + c.name + "`)", c.line);
    if (!c.unit.empty()) {
      if (!c.assoc)
        v.add(Code::BadAttribute, "`unit` requires `assoc` or `assoc-comm` (`" + c.name + "`)",
              c.line);
      const ConstructorDecl* u = p.find_constructor(c.unit);
      if (!u || !u->args.empty() || u->result != c.result)
        v.add(Code::BadAttribute,
              "unit `" + c.unit + "` of `" + c.name + "` must be a nullary operator of sort " +
                  c.result,
              c.line);
    }
  }

  Lpo lpo{p};
  for (const auto& e : p.equations) {
    if (!e.lhs || !e.rhs) {
      v.add(Code::BadEquation, "incomplete equation", e.line);
      continue;
    }
    if (e.lhs->kind == Term::Kind::Meta) {
      v.add(Code::BadEquation, "equation left-hand side is a bare metavariable", e.line);
      continue;
    }
    Validator::VarSorts lv, rv;
    std::map<std::string, const ArgDescriptor*> labs;
    v.walk(e.lhs, "", false, e.line, lv, {}, &labs);
    v.walk(e.rhs, "", false, e.line, rv, labs, nullptr);
    std::map<std::string, int> lm, rm;
    collect_metas(e.lhs, lm);
    collect_metas(e.rhs, rm);
    for (const auto& [name, _] : rm)
      if (!lm.count(name))
        v.add(Code::UnboundMetavariable, "$" + name + " on equation right-hand side only",
              e.line);
    for (const auto& [name, _] : lm)
      if (!rm.count(name))
        v.add(Code::UnboundMetavariable,
              "$" + name + " does not occur on the equation right-hand side", e.line);
    if (!lpo.gt(e.lhs, e.rhs))
      v.add(Code::BadEquation,
            "equation is not oriented: right-hand side must be strictly smaller", e.line);
  }

  std::set<std::string> seen_rules;
  for (const auto& r : p.rules) {
    if (!seen_rules.insert(r.name).second)
      v.add(Code::DuplicateName, "duplicate rule `" + r.name + "`", r.line);
    if (!r.lhs || !r.rhs) {
      v.add(Code::BadPattern, "incomplete rule", r.line);
      continue;
    }
    if (r.lhs->kind == Term::Kind::Meta) {
      v.add(Code::BadPattern, "rule left-hand side is a bare metavariable", r.line);
      continue;
    }
    Validator::VarSorts lv, rv;
    std::map<std::string, const ArgDescriptor*> labs;
    v.walk(r.lhs, "", false, r.line, lv, {}, &labs);
    v.walk(r.rhs, "", true, r.line, rv, labs, nullptr);
    std::map<std::string, int> lm, rm;
    collect_metas(r.lhs, lm);
    collect_metas(r.rhs, rm);
    for (const auto& [name, _] : rm)
      if (!lm.count(name))
        v.add(Code::UnboundMetavariable,
              "$" + name + " on the right-hand side of rule " + r.name + " only", r.line);
    for (const auto& [name, sort] : rv) {
      auto it = lv.find(name);
      if (it == lv.end() || it->second.empty() || sort.empty()) continue;
      // a sequence variable is used elementwise inside a splice template
      if (it->second == sort || it->second == sort + "*") continue;
      v.add(Code::BadPattern, "metavariable $" + name + " changes sort in rule " + r.name,
            r.line);
    }
  }

  std::sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.line, a.code, a.message) < std::tie(b.line, b.code, b.message);
  });
  return diags;
}

// ---------- pretty printing ----------

namespace {

std::string pattern_text(const Presentation& p, const TermPtr& t);

std::string pattern_args_text(const Presentation& p, const std::vector<TermPtr>& args) {
  std::string out;
  for (const auto& a : args) {
    out += " ";
    if (a->kind == Term::Kind::Splice) {
      out += pattern_text(p, a->args[0]) + " ...";
    } else if (a->kind == Term::Kind::Meta && a->seq) {
      out += "$" + a->head + " ...";
    } else {
      out += pattern_text(p, a);
    }
  }
  return out;
}

std::string pattern_text(const Presentation& p, const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Meta: return "$" + t->head;
    case Term::Kind::MetaApp: return "($" + t->head + pattern_args_text(p, t->args) + ")";
    case Term::Kind::Apply:
    case Term::Kind::Flat:
      if (t->args.empty()) return "(" + t->head + ")";
      return "(" + t->head + pattern_args_text(p, t->args) + ")";
    default: return pretty(p, t);
  }
}

}  // namespace

std::string pretty_print(const Presentation& p) {
  std::ostringstream out;
  for (const auto& s : p.sorts) out << "sort " << s << "\n";
  for (const auto& c : p.constructors) {
    out << "op " << c.name << " :";
    for (size_t i = 0; i < c.args.size(); ++i)
      out << (i ? ", " : " ") << c.args[i].text();
    out << " -> " << c.result;
    if (c.assoc && c.comm) out << " assoc-comm";
    else if (c.assoc) out << " assoc";
    if (!c.unit.empty()) out << " unit " << c.unit;
    out << "\n";
  }
  if (p.logic_sorts != p.sorts) {
    out << "logic";
    for (size_t i = 0; i < p.logic_sorts.size(); ++i)
      out << (i ? ", " : " ") << p.logic_sorts[i];
    out << "\n";
  }
  for (const auto& e : p.equations)
    out << "eq " << pattern_text(p, e.lhs) << " = " << pattern_text(p, e.rhs) << "\n";
  for (const auto& r : p.rules)
    out << "rule " << r.name << " : " << pattern_text(p, r.lhs) << " => "
        << pattern_text(p, r.rhs) << "\n";
  return out.str();
}

bool operator==(const Presentation& a, const Presentation& b) {
  if (a.sorts != b.sorts || a.logic_sorts != b.logic_sorts) return false;
  if (!(a.constructors == b.constructors)) return false;
  if (a.equations.size() != b.equations.size() || a.rules.size() != b.rules.size())
    return false;
  for (size_t i = 0; i < a.equations.size(); ++i) {
    if (compare(a.equations[i].lhs, b.equations[i].lhs) != 0) return false;
    if (compare(a.equations[i].rhs, b.equations[i].rhs) != 0) return false;
  }
  for (size_t i = 0; i < a.rules.size(); ++i) {
    if (a.rules[i].name != b.rules[i].name) return false;
    if (compare(a.rules[i].lhs, b.rules[i].lhs) != 0) return false;
    if (compare(a.rules[i].rhs, b.rules[i].rhs) != 0) return false;
  }
  return true;
}

// ---------- builtins ----------

namespace {

const std::map<std::string, std::string>& builtin_sources() {
  static const std::map<std::string, std::string> sources = {
      {"mon",
       "# free monoid: words over the generators, built with an associative\n"
       "# product with unit; canonical forms are the words themselves\n"
       "sort S\n"
       "op e : -> S\n"
       "op \xC2\xB7 : S, S -> S assoc unit e\n"},
      {"mon-tree",
       "# monoid words stored as raw binary trees; normalization shifts\n"
       "# parentheses right and deletes units\n"
       "sort S\n"
       "op e : -> S\n"
       "op \xC2\xB7 : S, S -> S\n"
       "rule a : (\xC2\xB7 (\xC2\xB7 $x $y) $z) => (\xC2\xB7 $x (\xC2\xB7 $y $z))\n"
       "rule l : (\xC2\xB7 e $x) => $x\n"
       "rule r : (\xC2\xB7 $x e) => $x\n"},
      {"ski",
       "sort T\n"
       "op S : -> T\n"
       "op K : -> T\n"
       "op I : -> T\n"
       "op app : T, T -> T\n"
       "rule sigma : (app (app (app S $x) $y) $z) => (app (app $x $z) (app $y $z))\n"
       "rule kappa : (app (app K $y) $z) => $y\n"
       "rule iota : (app I $z) => $z\n"},
      {"ski-arrow",
       "# ski plus an inert arrow type constructor on terms\n"
       "sort T\n"
       "op S : -> T\n"
       "op K : -> T\n"
       "op I : -> T\n"
       "op app : T, T -> T\n"
       "op arrow : T, T -> T\n"
       "rule sigma : (app (app (app S $x) $y) $z) => (app (app $x $z) (app $y $z))\n"
       "rule kappa : (app (app K $y) $z) => $y\n"
       "rule iota : (app I $z) => $z\n"},
      {"rhopi",
       "# reflective higher-order pi calculus: quoted processes as names,\n"
       "# communication gated by the comm catalyst (preserved by chi)\n"
       "sort N\n"
       "sort P\n"
       "op send : N, P* -> P\n"
       "op recv : N, bind N* . P -> P\n"
       "op | : P, P -> P assoc-comm unit 0\n"
       "op 0 : -> P\n"
       "op comm : -> P\n"
       "op quote : P -> N\n"
       "op * : N -> P\n"
       "eq (* (quote $p)) = $p\n"
       "rule chi : (| (send $x $p ...) (recv $x $q) (comm)) => (| ($q (quote $p) ...) (comm))\n"},
      {"group-action",
       "# a group acting on a set; equations fold the action through the\n"
       "# group structure\n"
       "sort G\n"
       "sort V\n"
       "op e : -> G\n"
       "op m : G, G -> G assoc unit e\n"
       "op inv : G -> G\n"
       "op act : G, V -> V\n"
       "eq (act e $v) = $v\n"
       "eq (act (m $g $h) $v) = (act $g (act $h $v))\n"},
  };
  return sources;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"mon",       "mon-tree", "ski",
                                                 "ski-arrow", "rhopi",    "group-action"};
  return names;
}

const std::string& builtin_source(const std::string& name) {
  const auto& sources = builtin_sources();
  auto it = sources.find(name);
  if (it == sources.end()) throw UnknownBuiltinError("unknown builtin `" + name + "`");
  return it->second;
}

Presentation builtin(const std::string& name) {
  return parse_presentation(builtin_source(name));
}

}  // namespace sbl
