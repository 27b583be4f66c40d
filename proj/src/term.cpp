#include "sbl/term.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "sbl/rewrite.hpp"

namespace sbl {

// ---------- construction ----------

namespace {
TermPtr make(Term t) { return std::make_shared<const Term>(std::move(t)); }
}  // namespace

TermPtr mk_apply(std::string ctor, std::vector<TermPtr> args) {
  Term t;
  t.kind = Term::Kind::Apply;
  t.head = std::move(ctor);
  t.args = std::move(args);
  return make(std::move(t));
}

TermPtr mk_atom(std::string sort, std::string name) {
  Term t;
  t.kind = Term::Kind::Atom;
  t.sort = std::move(sort);
  t.head = std::move(name);
  return make(std::move(t));
}

TermPtr mk_var(int index, int position) {
  Term t;
  t.kind = Term::Kind::Var;
  t.index = index;
  t.position = position;
  return make(std::move(t));
}

TermPtr mk_abs(int bound, TermPtr body) {
  Term t;
  t.kind = Term::Kind::Abs;
  t.bound = bound;
  t.args = {std::move(body)};
  return make(std::move(t));
}

TermPtr mk_flat(std::string ctor, std::vector<TermPtr> elems) {
  Term t;
  t.kind = Term::Kind::Flat;
  t.head = std::move(ctor);
  t.args = std::move(elems);
  return make(std::move(t));
}

TermPtr mk_hole(int number, std::string sort) {
  Term t;
  t.kind = Term::Kind::Hole;
  t.index = number;
  t.sort = std::move(sort);
  return make(std::move(t));
}

TermPtr mk_meta(std::string name, std::string sort, bool seq_var) {
  Term t;
  t.kind = Term::Kind::Meta;
  t.head = std::move(name);
  t.sort = std::move(sort);
  t.seq = seq_var;
  return make(std::move(t));
}

namespace {

TermPtr mk_splice(TermPtr tmpl) {
  Term t;
  t.kind = Term::Kind::Splice;
  t.args = {std::move(tmpl)};
  return make(std::move(t));
}

}  // namespace

// ---------- order, size, keys ----------

namespace {
int kind_rank(Term::Kind k) {
  switch (k) {
    case Term::Kind::Atom: return 0;
    case Term::Kind::Var: return 1;
    case Term::Kind::Apply: return 2;
    case Term::Kind::Flat: return 3;
    case Term::Kind::Abs: return 4;
    case Term::Kind::Hole: return 5;
    case Term::Kind::Meta: return 6;
    case Term::Kind::MetaApp: return 7;
    case Term::Kind::Splice: return 8;
  }
  return 9;
}
}  // namespace

int compare(const Term& a, const Term& b) {
  if (&a == &b) return 0;
  if (int d = kind_rank(a.kind) - kind_rank(b.kind)) return d;
  switch (a.kind) {
    case Term::Kind::Atom:
      if (int d = a.head.compare(b.head)) return d;
      return a.sort.compare(b.sort);
    case Term::Kind::Var:
      if (int d = a.index - b.index) return d;
      return a.position - b.position;
    case Term::Kind::Hole:
      return a.index - b.index;
    case Term::Kind::Meta:
      if (int d = a.head.compare(b.head)) return d;
      return static_cast<int>(a.seq) - static_cast<int>(b.seq);
    case Term::Kind::Abs:
      if (int d = a.bound - b.bound) return d;
      break;
    default:
      if (int d = a.head.compare(b.head)) return d;
      break;
  }
  if (a.args.size() != b.args.size()) return a.args.size() < b.args.size() ? -1 : 1;
  for (size_t i = 0; i < a.args.size(); ++i)
    if (int d = compare(a.args[i], b.args[i])) return d;
  return 0;
}

int compare(const TermPtr& a, const TermPtr& b) {
  if (a == b) return 0;
  if (!a || !b) return a ? 1 : -1;
  return compare(*a, *b);
}

bool structurally_equal(const TermPtr& a, const TermPtr& b) { return compare(a, b) == 0; }

size_t term_size(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Atom:
    case Term::Kind::Var:
    case Term::Kind::Hole:
    case Term::Kind::Meta:
      return 1;
    case Term::Kind::Abs:
      return 1 + term_size(t->args[0]);
    case Term::Kind::Flat: {
      size_t s = t->args.empty() ? 0 : t->args.size() - 1;
      for (const auto& a : t->args) s += term_size(a);
      return s;
    }
    default: {
      size_t s = 1;
      for (const auto& a : t->args) s += term_size(a);
      return s;
    }
  }
}

std::string term_key(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Atom: return "a:" + t->sort + ":" + t->head;
    case Term::Kind::Var:
      return "v" + std::to_string(t->index) + "." + std::to_string(t->position);
    case Term::Kind::Hole: return "h" + std::to_string(t->index);
    case Term::Kind::Meta: return "$" + t->head + (t->seq ? "..." : "");
    case Term::Kind::Abs:
      return "\\" + std::to_string(t->bound) + "." + term_key(t->args[0]);
    case Term::Kind::Splice: return term_key(t->args[0]) + "...";
    default: {
      std::string out = t->kind == Term::Kind::Flat ? "[" : "(";
      if (t->kind == Term::Kind::MetaApp) out += "$";
      out += t->head;
      for (const auto& a : t->args) out += " " + term_key(a);
      out += t->kind == Term::Kind::Flat ? "]" : ")";
      return out;
    }
  }
}

// ---------- generators ----------

const std::vector<std::string>& GeneratorSet::of(const std::string& sort) const {
  static const std::vector<std::string> none;
  auto it = atoms.find(sort);
  return it == atoms.end() ? none : it->second;
}

std::optional<std::string> GeneratorSet::sort_of_atom(const std::string& name) const {
  for (const auto& [sort, names] : atoms)
    if (std::find(names.begin(), names.end(), name) != names.end()) return sort;
  return std::nullopt;
}

std::string fresh_atom_name(size_t i) { return "~f" + std::to_string(i); }

std::vector<TermPtr> binder_candidates(const Presentation& p, const TermPtr& enclosing,
                                       const std::string& sort) {
  std::vector<TermPtr> out;
  std::set<std::string> seen;
  auto push = [&](const TermPtr& u) {
    if (seen.insert(term_key(u)).second) out.push_back(u);
  };
  auto sort_matches = [&](const TermPtr& u, const std::string& s) {
    try {
      return sort_of(p, u) == s;
    } catch (const SortError&) {
      return false;
    }
  };
  auto subs = closed_subterms(enclosing);
  for (const auto& u : subs)
    if (sort_matches(u, sort)) push(u);
  for (const auto& c : p.constructors) {
    if (c.args.size() != 1 || c.args[0].kind != ArgDescriptor::Kind::Plain ||
        c.result != sort)
      continue;
    for (const auto& u : subs)
      if (sort_matches(u, c.args[0].sort)) push(canonicalize(p, mk_apply(c.name, {u})));
  }
  return out;
}

// ---------- sorts, closedness, atoms ----------

std::string sort_of(const Presentation& p, const TermPtr& t,
                    const std::vector<BinderFrame>& binders) {
  switch (t->kind) {
    case Term::Kind::Atom:
    case Term::Kind::Hole:
    case Term::Kind::Meta:
      return t->sort;
    case Term::Kind::Var:
      if (static_cast<size_t>(t->index) < binders.size())
        return binders[t->index].sort;
      throw SortError("bound variable escapes its binder");
    case Term::Kind::Abs:
      throw SortError("an abstraction has no first-class sort");
    case Term::Kind::MetaApp:
    case Term::Kind::Splice:
      return t->sort;
    default: {
      const ConstructorDecl* c = p.find_constructor(t->head);
      if (!c) throw SortError("unknown operator `" + t->head + "`");
      return c->result;
    }
  }
}

namespace {
// Largest de Bruijn index escaping the term, plus one; 0 means closed.
int max_free(const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Var: return t->index + 1;
    case Term::Kind::Abs: return std::max(0, max_free(t->args[0]) - 1);
    default: {
      int m = 0;
      for (const auto& a : t->args) m = std::max(m, max_free(a));
      return m;
    }
  }
}
}  // namespace

bool is_closed(const TermPtr& t) { return max_free(t) == 0; }

std::vector<TermPtr> closed_subterms(const TermPtr& t) {
  std::map<std::string, TermPtr> seen;
  std::function<void(const TermPtr&)> walk = [&](const TermPtr& u) {
    if (u->kind != Term::Kind::Abs && max_free(u) == 0) seen.emplace(term_key(u), u);
    for (const auto& a : u->args) walk(a);
  };
  walk(t);
  std::vector<TermPtr> out;
  for (auto& [_, u] : seen) out.push_back(u);
  std::sort(out.begin(), out.end(), TermLess{});
  return out;
}

void collect_atoms(const TermPtr& t, GeneratorSet& into) {
  if (t->kind == Term::Kind::Atom) {
    auto& v = into.atoms[t->sort];
    if (std::find(v.begin(), v.end(), t->head) == v.end()) v.push_back(t->head);
  }
  for (const auto& a : t->args) collect_atoms(a, into);
}

// ---------- S-expression reading ----------

namespace {

struct SNode {
  bool is_list = false;
  std::string token;
  std::vector<SNode> kids;
};

struct Lexer {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
  }
  bool done() {
    skip();
    return i >= s.size();
  }
  std::string next() {
    skip();
    if (i >= s.size()) throw SyntaxError("unexpected end of input");
    char c = s[i];
    if (c == '(' || c == ')') {
      ++i;
      return std::string(1, c);
    }
    size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\n' && s[i] != '\r' &&
           s[i] != '(' && s[i] != ')')
      ++i;
    return s.substr(start, i - start);
  }
};

SNode read_sexpr(Lexer& lx) {
  std::string tok = lx.next();
  if (tok == ")") throw SyntaxError("unexpected `)`");
  if (tok != "(") {
    SNode n;
    // split a trailing ellipsis glued to a token
    if (tok.size() > 3 && tok.ends_with("...")) {
      n.token = tok.substr(0, tok.size() - 3);
      lx.i -= 3;
    } else {
      n.token = tok;
    }
    return n;
  }
  SNode n;
  n.is_list = true;
  for (;;) {
    lx.skip();
    if (lx.i >= lx.s.size()) throw SyntaxError("missing `)`");
    if (lx.s[lx.i] == ')') {
      ++lx.i;
      return n;
    }
    n.kids.push_back(read_sexpr(lx));
  }
}

SNode read_single(const std::string& text) {
  Lexer lx{text};
  SNode n = read_sexpr(lx);
  if (!lx.done()) throw SyntaxError("trailing input after term");
  return n;
}

enum class Mode { Term, Pattern, Context };

struct Resolver {
  const Presentation& p;
  const GeneratorSet& gens;
  Mode mode;
  std::vector<std::pair<std::vector<std::string>, std::string>> scopes;  // names, sort
  std::map<int, std::string> hole_sorts;  // context mode
  std::map<std::string, std::string> meta_sorts;

  TermPtr resolve(const SNode& n, const std::string& expected);
  TermPtr resolve_token(const std::string& tok, const std::string& expected);
  TermPtr resolve_apply(const ConstructorDecl& c, const SNode& n, const std::string& expected);
  TermPtr resolve_abs(const SNode& n, const ArgDescriptor& d);
  TermPtr resolve_arg(const SNode& n, const ArgDescriptor& d);

  void check_sort(const std::string& have, const std::string& expected,
                  const std::string& what) {
    if (!expected.empty() && !have.empty() && have != expected)
      throw SortError(what + " has sort " + have + " but " + expected + " was expected");
  }
};

bool is_ellipsis(const SNode& n) { return !n.is_list && n.token == "..."; }

TermPtr Resolver::resolve_token(const std::string& tok, const std::string& expected) {
  if (tok.empty()) throw SyntaxError("empty token");
  if (tok[0] == '$') {
    if (mode != Mode::Pattern)
      throw SyntaxError("metavariable `" + tok + "` outside a pattern");
    std::string name = tok.substr(1);
    if (name.empty()) throw SyntaxError("empty metavariable name");
    auto [it, fresh] = meta_sorts.emplace(name, expected);
    if (!fresh && it->second.empty()) it->second = expected;
    return mk_meta(name, it->second);
  }
  if (tok == "hole1" || tok == "hole2") {
    if (mode != Mode::Context) throw SyntaxError("`" + tok + "` outside a context");
    int idx = tok == "hole1" ? 1 : 2;
    if (expected.empty()) throw SortError("cannot infer the sort of " + tok);
    auto [it, fresh] = hole_sorts.emplace(idx, expected);
    if (!fresh) throw SyntaxError("hole " + std::to_string(idx) + " occurs twice");
    return mk_hole(idx, expected);
  }
  // innermost binder scope wins
  for (size_t up = 0; up < scopes.size(); ++up) {
    const auto& [names, sort] = scopes[scopes.size() - 1 - up];
    for (size_t j = 0; j < names.size(); ++j) {
      if (names[j] == tok) {
        check_sort(sort, expected, "bound name `" + tok + "`");
        return mk_var(static_cast<int>(up), static_cast<int>(j));
      }
    }
  }
  if (const ConstructorDecl* c = p.find_constructor(tok)) {
    if (!c->args.empty())
      throw SyntaxError("operator `" + tok + "` needs arguments");
    check_sort(c->result, expected, "operator `" + tok + "`");
    return mk_apply(tok, {});
  }
  if (auto s = gens.sort_of_atom(tok)) {
    check_sort(*s, expected, "atom `" + tok + "`");
    return mk_atom(*s, tok);
  }
  if (tok[0] == kFreshAtomPrefix)
    throw SyntaxError("atom names starting with `~` are reserved");
  std::string sort = expected;
  if (sort.empty()) {
    if (p.sorts.size() == 1) sort = p.sorts[0];
    else throw SortError("cannot infer the sort of atom `" + tok + "`");
  }
  if (!p.has_sort(sort)) throw SortError("unknown sort `" + sort + "`");
  return mk_atom(sort, tok);
}

TermPtr Resolver::resolve_abs(const SNode& n, const ArgDescriptor& d) {
  // (\ x1 .. xn body)
  if (n.kids.size() < 2) throw SyntaxError("abstraction needs a body");
  std::vector<std::string> names;
  for (size_t i = 1; i + 1 < n.kids.size(); ++i) {
    if (n.kids[i].is_list) throw SyntaxError("binder names must be identifiers");
    names.push_back(n.kids[i].token);
  }
  if (!d.variadic_binder && static_cast<int>(names.size()) != d.bound_count)
    throw ArityError("abstraction binds " + std::to_string(names.size()) + " names, expected " +
                     std::to_string(d.bound_count));
  scopes.push_back({names, d.sort});
  TermPtr body = resolve(n.kids.back(), d.body_sort);
  scopes.pop_back();
  return mk_abs(static_cast<int>(names.size()), body);
}

TermPtr Resolver::resolve_arg(const SNode& n, const ArgDescriptor& d) {
  if (d.kind == ArgDescriptor::Kind::Abstraction) {
    if (n.is_list && !n.kids.empty() && !n.kids[0].is_list && n.kids[0].token == "\\")
      return resolve_abs(n, d);
    if (!n.is_list && !n.token.empty() && n.token[0] == '$')
      return resolve_token(n.token, d.text());
    throw SyntaxError("expected an abstraction `(\\ names body)`");
  }
  return resolve(n, d.sort);
}

TermPtr Resolver::resolve_apply(const ConstructorDecl& c, const SNode& n,
                                const std::string& expected) {
  check_sort(c.result, expected, "operator `" + c.name + "`");

  // gather raw argument expressions, folding `expr ...` into splices
  std::vector<std::pair<SNode, bool>> raw;  // (node, spliced)
  for (size_t i = 1; i < n.kids.size(); ++i) {
    if (is_ellipsis(n.kids[i])) {
      if (raw.empty()) throw SyntaxError("`...` without a preceding element");
      if (raw.back().second) throw SyntaxError("doubled `...`");
      raw.back().second = true;
    } else {
      raw.push_back({n.kids[i], false});
    }
  }

  if (c.assoc) {
    // n-ary surface form; elements all at the result sort
    std::vector<TermPtr> elems;
    for (auto& [node, spliced] : raw) {
      TermPtr e = resolve(node, c.result);
      if (spliced) {
        if (mode != Mode::Pattern) throw SyntaxError("`...` outside a pattern");
        if (e->kind == Term::Kind::Meta) {
          Term m = *e;
          m.seq = true;
          e = make(std::move(m));
        } else {
          e = mk_splice(e);
        }
      }
      elems.push_back(e);
    }
    return mk_flat(c.name, std::move(elems));
  }

  size_t fixed_before = 0, fixed_after = 0;
  int variadic_at = -1;
  for (size_t i = 0; i < c.args.size(); ++i) {
    if (c.args[i].kind == ArgDescriptor::Kind::Variadic) variadic_at = static_cast<int>(i);
    else (variadic_at < 0 ? fixed_before : fixed_after)++;
  }
  size_t got = raw.size();
  if (variadic_at < 0) {
    if (got != c.args.size())
      throw ArityError("operator `" + c.name + "` expects " +
                       std::to_string(c.args.size()) + " arguments, got " +
                       std::to_string(got));
  } else if (got < fixed_before + fixed_after) {
    throw ArityError("operator `" + c.name + "` expects at least " +
                     std::to_string(fixed_before + fixed_after) + " arguments");
  }

  std::vector<TermPtr> args;
  for (size_t i = 0; i < got; ++i) {
    const ArgDescriptor* d;
    if (variadic_at < 0) d = &c.args[i];
    else if (i < fixed_before) d = &c.args[i];
    else if (i >= got - fixed_after) d = &c.args[c.args.size() - (got - i)];
    else d = &c.args[variadic_at];

    auto& [node, spliced] = raw[i];
    if (spliced) {
      if (mode != Mode::Pattern) throw SyntaxError("`...` outside a pattern");
      if (d->kind != ArgDescriptor::Kind::Variadic)
        throw SyntaxError("`...` at a non-variadic argument of `" + c.name + "`");
      if (!node.is_list && !node.token.empty() && node.token[0] == '$') {
        args.push_back(mk_meta(node.token.substr(1), d->sort + "*", true));
      } else {
        args.push_back(mk_splice(resolve(node, d->sort)));
      }
      continue;
    }
    args.push_back(resolve_arg(node, *d));
  }
  return mk_apply(c.name, std::move(args));
}

TermPtr Resolver::resolve(const SNode& n, const std::string& expected) {
  if (!n.is_list) return resolve_token(n.token, expected);
  if (n.kids.empty()) throw SyntaxError("empty expression `()`");

  const SNode& head = n.kids[0];
  if (!head.is_list) {
    if (head.token == "\\")
      throw SyntaxError("abstraction outside an abstraction argument position");
    if (head.token[0] == '$' && mode == Mode::Pattern) {
      // abstraction application ($q arg*) on a rule right-hand side
      std::vector<TermPtr> args;
      for (size_t i = 1; i < n.kids.size(); ++i) {
        if (is_ellipsis(n.kids[i])) {
          if (args.empty()) throw SyntaxError("`...` without a preceding element");
          args.back() = args.back()->kind == Term::Kind::Meta
                            ? mk_meta(args.back()->head, args.back()->sort, true)
                            : mk_splice(args.back());
        } else {
          args.push_back(resolve(n.kids[i], ""));
        }
      }
      Term t;
      t.kind = Term::Kind::MetaApp;
      t.head = head.token.substr(1);
      t.sort = expected;
      t.args = std::move(args);
      return make(std::move(t));
    }
    if (const ConstructorDecl* c = p.find_constructor(head.token)) {
      // `(K I)` is application sugar when K is nullary
      if (!(c->args.empty() && n.kids.size() > 1)) return resolve_apply(*c, n, expected);
    }
    if (n.kids.size() == 1) return resolve(head, expected);
  }

  // application sugar: (t u v) left-folds through the application operator
  const ConstructorDecl* app = p.application_constructor();
  if (!app) {
    std::string h = head.is_list ? "(...)" : head.token;
    throw SyntaxError("unknown operator `" + h + "` and no application operator to fold with");
  }
  check_sort(app->result, expected, "application");
  TermPtr acc = resolve(head, app->args[0].sort);
  if (n.kids.size() < 2) throw SyntaxError("application needs an argument");
  for (size_t i = 1; i < n.kids.size(); ++i)
    acc = mk_apply(app->name, {acc, resolve(n.kids[i], app->args[1].sort)});
  return acc;
}

}  // namespace

TermPtr parse_term(const Presentation& p, const std::string& text, const GeneratorSet& gens,
                   const std::string& expected_sort) {
  Resolver r{p, gens, Mode::Term, {}, {}, {}};
  TermPtr t = r.resolve(read_single(text), expected_sort);
  return canonicalize(p, t);
}

TermPtr parse_pattern(const Presentation& p, const std::string& text,
                      const std::string& expected_sort) {
  GeneratorSet none;
  Resolver r{p, none, Mode::Pattern, {}, {}, {}};
  return r.resolve(read_single(text), expected_sort);
}

Context parse_context(const Presentation& p, const std::string& text,
                      const std::string& expected_sort) {
  GeneratorSet none;
  Resolver r{p, none, Mode::Context, {}, {}, {}};
  TermPtr body = r.resolve(read_single(text), expected_sort);
  Context ctx;
  ctx.body = body;
  ctx.result_sort = sort_of(p, body);
  for (int i = 1; static_cast<size_t>(i) <= r.hole_sorts.size(); ++i) {
    auto it = r.hole_sorts.find(i);
    if (it == r.hole_sorts.end())
      throw SyntaxError("context holes must be numbered consecutively from hole1");
    ctx.hole_sorts.push_back(it->second);
  }
  return ctx;
}

// ---------- pretty printing ----------

namespace {

void pretty_rec(const Presentation& p, const TermPtr& t, std::vector<std::vector<std::string>>& scopes,
                int& counter, std::string& out) {
  switch (t->kind) {
    case Term::Kind::Atom:
      out += t->head;
      return;
    case Term::Kind::Var: {
      size_t up = static_cast<size_t>(t->index);
      if (up < scopes.size()) {
        const auto& names = scopes[scopes.size() - 1 - up];
        if (static_cast<size_t>(t->position) < names.size()) {
          out += names[t->position];
          return;
        }
      }
      out += "?v" + std::to_string(t->index) + "." + std::to_string(t->position);
      return;
    }
    case Term::Kind::Hole:
      out += t->index == 1 ? "hole1" : "hole2";
      return;
    case Term::Kind::Meta:
      out += "$" + t->head;
      if (t->seq) out += " ...";
      return;
    case Term::Kind::Abs: {
      std::vector<std::string> names;
      for (int i = 0; i < t->bound; ++i) names.push_back("x" + std::to_string(counter++));
      out += "(\\";
      for (const auto& nm : names) out += " " + nm;
      out += " ";
      scopes.push_back(names);
      pretty_rec(p, t->args[0], scopes, counter, out);
      scopes.pop_back();
      out += ")";
      return;
    }
    case Term::Kind::Apply:
    case Term::Kind::Flat: {
      if (t->args.empty() && t->kind == Term::Kind::Apply) {
        out += t->head;
        return;
      }
      out += "(" + t->head;
      for (const auto& a : t->args) {
        out += " ";
        pretty_rec(p, a, scopes, counter, out);
      }
      out += ")";
      return;
    }
    case Term::Kind::MetaApp: {
      out += "($" + t->head;
      for (const auto& a : t->args) {
        out += " ";
        pretty_rec(p, a, scopes, counter, out);
      }
      out += ")";
      return;
    }
    case Term::Kind::Splice:
      pretty_rec(p, t->args[0], scopes, counter, out);
      out += " ...";
      return;
  }
}

}  // namespace

std::string pretty(const Presentation& p, const TermPtr& t) {
  std::string out;
  std::vector<std::vector<std::string>> scopes;
  int counter = 0;
  pretty_rec(p, t, scopes, counter, out);
  return out;
}

// ---------- canonicalization ----------

namespace {

// Multiset/sequence view of a term at a flattened constructor: elements of a
// same-headed Flat, nothing for the unit, the term itself otherwise.
std::vector<TermPtr> flat_view(const ConstructorDecl& c, const TermPtr& t) {
  if (t->kind == Term::Kind::Flat && t->head == c.name) return t->args;
  if (!c.unit.empty() && t->kind == Term::Kind::Apply && t->head == c.unit && t->args.empty())
    return {};
  return {t};
}

TermPtr rebuild_flat(const ConstructorDecl& c, std::vector<TermPtr> elems) {
  if (elems.empty()) {
    if (c.unit.empty()) throw SortError("empty `" + c.name + "` without a unit");
    return mk_apply(c.unit, {});
  }
  if (elems.size() == 1) return elems[0];
  if (c.comm) std::stable_sort(elems.begin(), elems.end(), TermLess{});
  return mk_flat(c.name, std::move(elems));
}

// Applies the first oriented equation that matches at this node (children are
// already canonical); returns null when none applies.
TermPtr apply_equation_here(const Presentation& p, const TermPtr& t) {
  for (const auto& e : p.equations) {
    auto ms = match(p, e.lhs, t);
    if (ms.empty()) continue;
    const Match& m = ms.front();
    TermPtr replaced = apply_subst(p, e.rhs, m.subst);
    if (!replaced) continue;
    if (e.lhs->kind == Term::Kind::Flat) {
      const ConstructorDecl* c = p.find_constructor(e.lhs->head);
      auto view = flat_view(*c, t);
      std::vector<TermPtr> rest;
      std::set<int> sel(m.selection.begin(), m.selection.end());
      for (size_t i = 0; i < view.size(); ++i)
        if (!sel.count(static_cast<int>(i))) rest.push_back(view[i]);
      bool lhs_has_rest = false;
      for (const auto& el : e.lhs->args)
        if (el->kind == Term::Kind::Meta && el->seq) lhs_has_rest = true;
      std::vector<TermPtr> elems = flat_view(*c, replaced);
      if (!lhs_has_rest) elems.insert(elems.end(), rest.begin(), rest.end());
      return rebuild_flat(*c, std::move(elems));
    }
    return replaced;
  }
  return nullptr;
}

}  // namespace

TermPtr canonicalize(const Presentation& p, const TermPtr& t) {
  switch (t->kind) {
    case Term::Kind::Atom:
    case Term::Kind::Var:
    case Term::Kind::Hole:
    case Term::Kind::Meta:
      return t;
    case Term::Kind::Abs: {
      TermPtr body = canonicalize(p, t->args[0]);
      return body == t->args[0] ? t : mk_abs(t->bound, body);
    }
    case Term::Kind::MetaApp:
    case Term::Kind::Splice:
      return t;  // pattern fragments are left as written
    case Term::Kind::Apply:
    case Term::Kind::Flat: {
      std::vector<TermPtr> args;
      args.reserve(t->args.size());
      bool changed = t->kind == Term::Kind::Flat;  // Flat is always rebuilt
      for (const auto& a : t->args) {
        TermPtr c = canonicalize(p, a);
        changed |= c != a;
        args.push_back(std::move(c));
      }
      const ConstructorDecl* c = p.find_constructor(t->head);
      TermPtr node;
      if (c && c->assoc) {
        std::vector<TermPtr> elems;
        for (const auto& a : args) {
          auto view = flat_view(*c, a);
          elems.insert(elems.end(), view.begin(), view.end());
        }
        node = rebuild_flat(*c, std::move(elems));
      } else {
        node = changed ? mk_apply(t->head, std::move(args)) : t;
      }
      if (!p.equations.empty()) {
        if (TermPtr rewritten = apply_equation_here(p, node))
          return canonicalize(p, rewritten);
      }
      return node;
    }
  }
  return t;
}

bool equal(const Presentation& p, const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  return compare(canonicalize(p, a), canonicalize(p, b)) == 0;
}

// ---------- decomposition ----------

namespace {

DecompTuple tuple_of_free_apply(const ConstructorDecl& c, const TermPtr& t) {
  DecompTuple tuple;
  size_t fixed_before = 0, fixed_after = 0;
  int variadic_at = -1;
  for (size_t i = 0; i < c.args.size(); ++i) {
    if (c.args[i].kind == ArgDescriptor::Kind::Variadic) variadic_at = static_cast<int>(i);
    else (variadic_at < 0 ? fixed_before : fixed_after)++;
  }
  size_t n = t->args.size();
  size_t vi = 0;
  for (size_t d = 0; d < c.args.size(); ++d) {
    DecompArg a;
    if (static_cast<int>(d) == variadic_at) {
      a.is_list = true;
      size_t count = n - fixed_before - fixed_after;
      for (size_t k = 0; k < count; ++k) a.list.push_back(t->args[vi++]);
    } else {
      a.term = t->args[vi++];
    }
    tuple.push_back(std::move(a));
  }
  return tuple;
}

}  // namespace

std::vector<DecompTuple> decompose(const Presentation& p, const TermPtr& t,
                                   const ConstructorDecl& c) {
  std::vector<DecompTuple> out;
  if (c.assoc) {
    auto view = flat_view(c, t);
    size_t k = view.size();
    // parts of a canonical flat are canonical except when an equation fires
    // on the smaller multiset, so re-canonicalize
    auto rebuild = [&](std::vector<TermPtr> elems) {
      return canonicalize(p, rebuild_flat(c, std::move(elems)));
    };
    if (!c.comm) {
      for (size_t i = 0; i <= k; ++i) {
        if (c.unit.empty() && (i == 0 || i == k)) continue;
        std::vector<TermPtr> l(view.begin(), view.begin() + static_cast<long>(i));
        std::vector<TermPtr> r(view.begin() + static_cast<long>(i), view.end());
        DecompTuple tup(2);
        tup[0].term = rebuild(std::move(l));
        tup[1].term = rebuild(std::move(r));
        out.push_back(std::move(tup));
      }
    } else {
      // all ordered bipartitions of the multiset, deduplicated
      std::set<std::string> seen;
      for (size_t mask = 0; mask < (size_t{1} << k); ++mask) {
        if (c.unit.empty() && (mask == 0 || mask + 1 == (size_t{1} << k))) continue;
        std::vector<TermPtr> l, r;
        for (size_t i = 0; i < k; ++i)
          ((mask >> i) & 1 ? l : r).push_back(view[i]);
        DecompTuple tup(2);
        tup[0].term = rebuild(std::move(l));
        tup[1].term = rebuild(std::move(r));
        std::string key = term_key(tup[0].term) + "\x1f" + term_key(tup[1].term);
        if (seen.insert(key).second) out.push_back(std::move(tup));
      }
    }
  } else if (t->kind == Term::Kind::Apply && t->head == c.name) {
    out.push_back(tuple_of_free_apply(c, t));
  }
  std::sort(out.begin(), out.end(), [](const DecompTuple& a, const DecompTuple& b) {
    auto key = [](const DecompTuple& tp) {
      std::string k;
      for (const auto& x : tp) {
        if (x.is_list) {
          k += "[";
          for (const auto& e : x.list) k += term_key(e) + " ";
          k += "]";
        } else {
          k += term_key(x.term);
        }
        k += "\x1f";
      }
      return k;
    };
    return key(a) < key(b);
  });
  return out;
}

TermPtr compose(const Presentation& p, const ConstructorDecl& c, const DecompTuple& args) {
  std::vector<TermPtr> flat;
  for (const auto& a : args) {
    if (a.is_list)
      flat.insert(flat.end(), a.list.begin(), a.list.end());
    else
      flat.push_back(a.term);
  }
  return canonicalize(p, mk_apply(c.name, std::move(flat)));
}

// ---------- plugging and instantiation ----------

namespace {

TermPtr replace_holes(const TermPtr& t, const std::vector<TermPtr>& fillers) {
  if (t->kind == Term::Kind::Hole) return fillers[static_cast<size_t>(t->index - 1)];
  if (t->args.empty()) return t;
  std::vector<TermPtr> args;
  bool changed = false;
  for (const auto& a : t->args) {
    TermPtr r = replace_holes(a, fillers);
    changed |= r != a;
    args.push_back(std::move(r));
  }
  if (!changed) return t;
  Term copy = *t;
  copy.args = std::move(args);
  return make(std::move(copy));
}

}  // namespace

TermPtr plug(const Presentation& p, const Context& ctx, const std::vector<TermPtr>& fillers) {
  if (fillers.size() != ctx.hole_count())
    throw ArityError("context expects " + std::to_string(ctx.hole_count()) + " fillers, got " +
                     std::to_string(fillers.size()));
  for (size_t i = 0; i < fillers.size(); ++i) {
    if (!is_closed(fillers[i])) throw SortError("context fillers must be closed terms");
    std::string s = sort_of(p, fillers[i]);
    if (s != ctx.hole_sorts[i])
      throw SortError("filler " + std::to_string(i + 1) + " has sort " + s + ", expected " +
                      ctx.hole_sorts[i]);
  }
  return canonicalize(p, replace_holes(ctx.body, fillers));
}

TermPtr shift_vars(const TermPtr& t, int delta, int cutoff) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (t->index >= cutoff) return mk_var(t->index + delta, t->position);
      return t;
    case Term::Kind::Abs: {
      TermPtr body = shift_vars(t->args[0], delta, cutoff + 1);
      return body == t->args[0] ? t : mk_abs(t->bound, body);
    }
    default: {
      if (t->args.empty()) return t;
      std::vector<TermPtr> args;
      bool changed = false;
      for (const auto& a : t->args) {
        TermPtr r = shift_vars(a, delta, cutoff);
        changed |= r != a;
        args.push_back(std::move(r));
      }
      if (!changed) return t;
      Term copy = *t;
      copy.args = std::move(args);
      return make(std::move(copy));
    }
  }
}

namespace {

TermPtr subst_rec(const TermPtr& t, const std::vector<TermPtr>& values, int depth) {
  switch (t->kind) {
    case Term::Kind::Var:
      if (t->index == depth) {
        if (static_cast<size_t>(t->position) >= values.size())
          throw ArityError("bound variable position out of range");
        return shift_vars(values[static_cast<size_t>(t->position)], depth, 0);
      }
      if (t->index > depth) return mk_var(t->index - 1, t->position);
      return t;
    case Term::Kind::Abs: {
      TermPtr body = subst_rec(t->args[0], values, depth + 1);
      return body == t->args[0] ? t : mk_abs(t->bound, body);
    }
    default: {
      if (t->args.empty()) return t;
      std::vector<TermPtr> args;
      bool changed = false;
      for (const auto& a : t->args) {
        TermPtr r = subst_rec(a, values, depth);
        changed |= r != a;
        args.push_back(std::move(r));
      }
      if (!changed) return t;
      Term copy = *t;
      copy.args = std::move(args);
      return make(std::move(copy));
    }
  }
}

}  // namespace

TermPtr instantiate(const Presentation& p, const TermPtr& abs,
                    const std::vector<TermPtr>& values) {
  if (abs->kind != Term::Kind::Abs) throw ArityError("instantiate expects an abstraction");
  if (static_cast<size_t>(abs->bound) != values.size())
    throw ArityError("abstraction binds " + std::to_string(abs->bound) + " names, got " +
                     std::to_string(values.size()) + " values");
  return canonicalize(p, subst_rec(abs->args[0], values, 0));
}

// ---------- enumeration ----------

namespace {

struct Enumerator {
  const Presentation& p;
  const GeneratorSet& gens;
  EnumOptions opts;
  // raw trees per (sort, exact size, binder stack key)
  std::map<std::string, std::vector<TermPtr>> memo;

  static std::string binder_key(const std::vector<BinderFrame>& binders) {
    std::string k;
    for (const auto& b : binders) k += b.sort + ":" + std::to_string(b.count) + ";";
    return k;
  }

  const std::vector<TermPtr>& raw(const std::string& sort, size_t size,
                                  const std::vector<BinderFrame>& binders) {
    std::string key = sort + "|" + std::to_string(size) + "|" + binder_key(binders);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::vector<TermPtr> out;
    if (size >= 1) build(sort, size, binders, out);
    return memo.emplace(std::move(key), std::move(out)).first->second;
  }

  void build(const std::string& sort, size_t size, const std::vector<BinderFrame>& binders,
             std::vector<TermPtr>& out) {
    if (size == 1) {
      for (const auto& a : gens.of(sort)) out.push_back(mk_atom(sort, a));
      for (size_t up = 0; up < binders.size(); ++up)
        if (binders[up].sort == sort)
          for (int j = 0; j < binders[up].count; ++j)
            out.push_back(mk_var(static_cast<int>(up), j));
      for (const auto& c : p.constructors)
        if (c.result == sort && c.args.empty()) out.push_back(mk_apply(c.name, {}));
      return;
    }
    for (const auto& c : p.constructors) {
      if (c.result != sort || c.args.empty()) continue;
      std::vector<TermPtr> acc;
      fill_args(c, 0, size - 1, binders, acc, out);
    }
  }

  void fill_args(const ConstructorDecl& c, size_t di, size_t remaining,
                 const std::vector<BinderFrame>& binders, std::vector<TermPtr>& acc,
                 std::vector<TermPtr>& out) {
    if (di == c.args.size()) {
      if (remaining == 0) out.push_back(mk_apply(c.name, acc));
      return;
    }
    const ArgDescriptor& d = c.args[di];
    size_t min_rest = 0;
    for (size_t j = di + 1; j < c.args.size(); ++j)
      min_rest += c.args[j].kind == ArgDescriptor::Kind::Variadic ? 0 : 1;

    switch (d.kind) {
      case ArgDescriptor::Kind::Plain: {
        for (size_t k = 1; k + min_rest <= remaining; ++k) {
          for (const auto& t : raw(d.sort, k, binders)) {
            acc.push_back(t);
            fill_args(c, di + 1, remaining - k, binders, acc, out);
            acc.pop_back();
          }
        }
        return;
      }
      case ArgDescriptor::Kind::Variadic: {
        fill_run(c, di, remaining, min_rest, binders, acc, out);
        return;
      }
      case ArgDescriptor::Kind::Abstraction: {
        std::vector<int> counts;
        if (d.variadic_binder) {
          for (int k = 0; k <= opts.max_binder_count; ++k) counts.push_back(k);
        } else {
          counts.push_back(d.bound_count);
        }
        for (int bc : counts) {
          std::vector<BinderFrame> inner = binders;
          inner.insert(inner.begin(), BinderFrame{d.sort, bc});
          for (size_t k = 1; k + 1 + min_rest <= remaining; ++k) {
            for (const auto& body : raw(d.body_sort, k, inner)) {
              acc.push_back(mk_abs(bc, body));
              fill_args(c, di + 1, remaining - k - 1, binders, acc, out);
              acc.pop_back();
            }
          }
        }
        return;
      }
    }
  }

  // zero or more variadic elements, each of size >= 1
  void fill_run(const ConstructorDecl& c, size_t di, size_t remaining, size_t min_rest,
                const std::vector<BinderFrame>& binders, std::vector<TermPtr>& acc,
                std::vector<TermPtr>& out) {
    // stop the run here
    fill_args(c, di + 1, remaining, binders, acc, out);
    const ArgDescriptor& d = c.args[di];
    for (size_t k = 1; k + min_rest <= remaining; ++k) {
      for (const auto& t : raw(d.sort, k, binders)) {
        acc.push_back(t);
        fill_run(c, di, remaining - k, min_rest, binders, acc, out);
        acc.pop_back();
      }
    }
  }
};

}  // namespace

std::vector<TermPtr> enumerate_open_terms(const Presentation& p, const std::string& sort,
                                          const GeneratorSet& gens, size_t max_size,
                                          const std::vector<BinderFrame>& binders,
                                          const EnumOptions& opts) {
  Enumerator en{p, gens, opts, {}};
  std::map<std::string, TermPtr> dedup;
  for (size_t n = 1; n <= max_size; ++n) {
    for (const auto& t : en.raw(sort, n, binders)) {
      TermPtr c = canonicalize(p, t);
      if (term_size(c) <= max_size) dedup.emplace(term_key(c), c);
    }
  }
  std::vector<TermPtr> out;
  out.reserve(dedup.size());
  for (auto& [_, t] : dedup) out.push_back(t);
  std::sort(out.begin(), out.end(), [](const TermPtr& a, const TermPtr& b) {
    size_t sa = term_size(a), sb = term_size(b);
    if (sa != sb) return sa < sb;
    return compare(a, b) < 0;
  });
  return out;
}

std::vector<TermPtr> enumerate_terms(const Presentation& p, const std::string& sort,
                                     const GeneratorSet& gens, size_t max_size,
                                     const EnumOptions& opts) {
  return enumerate_open_terms(p, sort, gens, max_size, {}, opts);
}

std::vector<TermPtr> enumerate_abstractions(const Presentation& p, const ArgDescriptor& desc,
                                            const GeneratorSet& gens, size_t max_body_size,
                                            const EnumOptions& opts) {
  std::vector<int> counts;
  if (desc.variadic_binder) {
    for (int k = 0; k <= opts.max_binder_count; ++k) counts.push_back(k);
  } else {
    counts.push_back(desc.bound_count);
  }
  std::map<std::string, TermPtr> dedup;
  for (int bc : counts) {
    std::vector<BinderFrame> frame = {BinderFrame{desc.sort, bc}};
    for (const auto& body :
         enumerate_open_terms(p, desc.body_sort, gens, max_body_size, frame, opts)) {
      TermPtr a = mk_abs(bc, body);
      dedup.emplace(term_key(a), a);
    }
  }
  std::vector<TermPtr> out;
  for (auto& [_, t] : dedup) out.push_back(t);
  std::sort(out.begin(), out.end(), TermLess{});
  return out;
}

}  // namespace sbl
