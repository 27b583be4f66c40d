#include "sbl/formula.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace sbl {

namespace {
FormulaPtr make(Formula f) { return std::make_shared<const Formula>(std::move(f)); }
}  // namespace

FormulaPtr Formula::top(std::string sort) {
  Formula f;
  f.kind = Kind::Top;
  f.sort = std::move(sort);
  return make(std::move(f));
}
FormulaPtr Formula::bot(std::string sort) {
  Formula f;
  f.kind = Kind::Bot;
  f.sort = std::move(sort);
  return make(std::move(f));
}
FormulaPtr Formula::conj(FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = Kind::And;
  f.sort = a->sort;
  f.kids = {std::move(a), std::move(b)};
  return make(std::move(f));
}
FormulaPtr Formula::disj(FormulaPtr a, FormulaPtr b) {
  Formula f;
  f.kind = Kind::Or;
  f.sort = a->sort;
  f.kids = {std::move(a), std::move(b)};
  return make(std::move(f));
}
FormulaPtr Formula::neg(FormulaPtr a) {
  Formula f;
  f.kind = Kind::Not;
  f.sort = a->sort;
  f.kids = {std::move(a)};
  return make(std::move(f));
}
FormulaPtr Formula::lifted(std::string ctor, std::string sort, std::vector<FormulaArg> args) {
  Formula f;
  f.kind = Kind::Lifted;
  f.head = std::move(ctor);
  f.sort = std::move(sort);
  f.cargs = std::move(args);
  return make(std::move(f));
}
FormulaPtr Formula::atom(std::string sort, std::string name) {
  Formula f;
  f.kind = Kind::AtomLit;
  f.sort = std::move(sort);
  f.head = std::move(name);
  return make(std::move(f));
}
FormulaPtr Formula::modal(FormulaPtr u, Context ctx, FormulaPtr v) {
  Formula f;
  f.kind = Kind::Modal;
  f.sort = ctx.hole_sorts.at(0);
  f.ctx = std::move(ctx);
  f.kids = {std::move(u), std::move(v)};
  return make(std::move(f));
}
FormulaPtr Formula::mu(std::string var, FormulaPtr body) {
  Formula f;
  f.kind = Kind::Mu;
  f.head = std::move(var);
  f.sort = body->sort;
  f.kids = {std::move(body)};
  return make(std::move(f));
}
FormulaPtr Formula::var(std::string name, std::string sort) {
  Formula f;
  f.kind = Kind::Var;
  f.head = std::move(name);
  f.sort = std::move(sort);
  return make(std::move(f));
}

// ---------- derived forms ----------

DerivedForms derived_forms(const Presentation& p) {
  DerivedForms d;
  d.rg = p.parallel_constructor();
  d.arrow = p.application_constructor();
  return d;
}

namespace {

Context two_hole_context(const ConstructorDecl& c) {
  Context ctx;
  ctx.body = mk_apply(c.name, {mk_hole(1, c.args[0].sort), mk_hole(2, c.args[1].sort)});
  ctx.hole_sorts = {c.args[0].sort, c.args[1].sort};
  ctx.result_sort = c.result;
  return ctx;
}

}  // namespace

FormulaPtr expand_rg(const Presentation& p, FormulaPtr u, FormulaPtr v) {
  const ConstructorDecl* c = p.parallel_constructor();
  if (!c) throw MacroError("`rg` needs an assoc-comm parallel operator");
  return Formula::modal(std::move(u), two_hole_context(*c), std::move(v));
}

FormulaPtr expand_arrow(const Presentation& p, FormulaPtr u, FormulaPtr v) {
  const ConstructorDecl* c = p.application_constructor();
  if (!c) throw MacroError("`arrow` needs a binary application operator");
  return Formula::modal(std::move(u), two_hole_context(*c), std::move(v));
}

// ---------- parsing ----------

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
    if (i >= s.size()) throw SyntaxError("unexpected end of formula");
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
  if (tok == ")") throw SyntaxError("unexpected `)` in formula");
  if (tok != "(") {
    SNode n;
    n.token = tok;
    return n;
  }
  SNode n;
  n.is_list = true;
  for (;;) {
    lx.skip();
    if (lx.i >= lx.s.size()) throw SyntaxError("missing `)` in formula");
    if (lx.s[lx.i] == ')') {
      ++lx.i;
      return n;
    }
    n.kids.push_back(read_sexpr(lx));
  }
}

std::string snode_text(const SNode& n) {
  if (!n.is_list) return n.token;
  std::string out = "(";
  for (size_t i = 0; i < n.kids.size(); ++i) {
    if (i) out += " ";
    out += snode_text(n.kids[i]);
  }
  return out + ")";
}

bool is_abs_pseudo_sort(const std::string& s) { return s.rfind("bind ", 0) == 0; }

struct FResolver {
  const Presentation& p;
  std::vector<std::string> mu_scope;
  std::vector<std::pair<std::vector<std::string>, std::string>> binder_scope;  // names, sort

  bool in_mu_scope(const std::string& name) const {
    return std::find(mu_scope.begin(), mu_scope.end(), name) != mu_scope.end();
  }
  const std::string* binder_sort(const std::string& name) const {
    for (auto it = binder_scope.rbegin(); it != binder_scope.rend(); ++it)
      for (const auto& n : it->first)
        if (n == name) return &it->second;
    return nullptr;
  }

  FormulaPtr resolve(const SNode& n, const std::string& sort);
  FormulaArg resolve_arg(const SNode& n, const ArgDescriptor& d);
  FormulaPtr resolve_abs_position(const SNode& n, const ArgDescriptor& d);
};

FormulaPtr FResolver::resolve(const SNode& n, const std::string& sort) {
  if (!n.is_list) {
    const std::string& tok = n.token;
    if (tok == "top") return Formula::top(sort);
    if (tok == "bot") return Formula::bot(sort);
    if (in_mu_scope(tok)) return Formula::var(tok, sort);
    if (const std::string* bs = binder_sort(tok)) {
      if (*bs != sort)
        throw SortError("bound name `" + tok + "` has sort " + *bs + ", expected " + sort);
      return Formula::atom(sort, tok);
    }
    if (const ConstructorDecl* c = p.find_constructor(tok)) {
      if (!c->args.empty()) throw SyntaxError("operator `" + tok + "` needs arguments");
      if (c->result != sort)
        throw SortError("`" + tok + "` has sort " + c->result + ", expected " + sort);
      return Formula::lifted(tok, sort, {});
    }
    if (tok.empty() || tok[0] == '~' || tok[0] == '$' || tok[0] == '\\')
      throw SyntaxError("bad atom name `" + tok + "`");
    if (sort.empty()) throw SortError("cannot infer the sort of atom `" + tok + "`");
    return Formula::atom(sort, tok);
  }

  if (n.kids.empty()) throw SyntaxError("empty formula `()`");
  const SNode& head = n.kids[0];
  if (head.is_list) throw SyntaxError("formula head must be an identifier");
  const std::string& h = head.token;

  auto need = [&](size_t k) {
    if (n.kids.size() != k + 1)
      throw SyntaxError("`" + h + "` takes " + std::to_string(k) + " arguments");
  };

  if (h == "and" || h == "or") {
    if (n.kids.size() < 3) throw SyntaxError("`" + h + "` takes at least 2 arguments");
    FormulaPtr acc = resolve(n.kids[1], sort);
    for (size_t i = 2; i < n.kids.size(); ++i) {
      FormulaPtr rhs = resolve(n.kids[i], sort);
      acc = h == "and" ? Formula::conj(acc, rhs) : Formula::disj(acc, rhs);
    }
    return acc;
  }
  if (h == "not") {
    need(1);
    return Formula::neg(resolve(n.kids[1], sort));
  }
  if (h == "mu") {
    need(2);
    if (n.kids[1].is_list) throw SyntaxError("`mu` variable must be an identifier");
    mu_scope.push_back(n.kids[1].token);
    FormulaPtr body = resolve(n.kids[2], sort);
    mu_scope.pop_back();
    return Formula::mu(n.kids[1].token, body);
  }
  if (h == "dia") {
    need(3);
    Context ctx = parse_context(p, snode_text(n.kids[2]));
    if (ctx.hole_count() != 2) throw SyntaxError("`dia` context needs exactly two holes");
    if (!sort.empty() && ctx.hole_sorts[0] != sort)
      throw SortError("`dia` context hole1 has sort " + ctx.hole_sorts[0] + ", expected " +
                      sort);
    FormulaPtr u = resolve(n.kids[1], ctx.hole_sorts[1]);
    FormulaPtr v = resolve(n.kids[3], ctx.result_sort);
    return Formula::modal(u, std::move(ctx), v);
  }
  if (h == "rg" || h == "arrow") {
    need(2);
    const ConstructorDecl* c =
        h == "rg" ? p.parallel_constructor() : p.application_constructor();
    if (!c)
      throw MacroError("`" + h + "` is unavailable: no " +
                       (h == "rg" ? std::string("assoc-comm parallel")
                                  : std::string("binary application")) +
                       " operator in this calculus");
    if (!sort.empty() && c->args[0].sort != sort)
      throw SortError("`" + h + "` lives at sort " + c->args[0].sort);
    FormulaPtr u = resolve(n.kids[1], c->args[1].sort);
    FormulaPtr v = resolve(n.kids[2], c->result);
    return h == "rg" ? expand_rg(p, u, v) : expand_arrow(p, u, v);
  }
  if (h == "lift") {
    need(1);
    TermPtr t = parse_term(p, snode_text(n.kids[1]), {}, sort);
    return lift_term(p, t);
  }

  const ConstructorDecl* c = p.find_constructor(h);
  if (!c) throw SyntaxError("unknown operator or keyword `" + h + "`");
  if (!sort.empty() && c->result != sort)
    throw SortError("`" + h + "` has sort " + c->result + ", expected " + sort);

  if (c->assoc) {
    // n-ary surface syntax folds right into binary lifts
    if (n.kids.size() < 3) throw SyntaxError("`" + h + "` takes at least 2 arguments");
    std::vector<FormulaPtr> elems;
    for (size_t i = 1; i < n.kids.size(); ++i) elems.push_back(resolve(n.kids[i], c->result));
    FormulaPtr acc = elems.back();
    for (size_t i = elems.size() - 1; i-- > 0;) {
      FormulaArg a1, a2;
      a1.plain = elems[i];
      a2.plain = acc;
      acc = Formula::lifted(c->name, c->result, {std::move(a1), std::move(a2)});
    }
    return acc;
  }

  size_t fixed_before = 0, fixed_after = 0;
  int variadic_at = -1;
  for (size_t i = 0; i < c->args.size(); ++i) {
    if (c->args[i].kind == ArgDescriptor::Kind::Variadic) variadic_at = static_cast<int>(i);
    else (variadic_at < 0 ? fixed_before : fixed_after)++;
  }
  size_t got = n.kids.size() - 1;
  if (variadic_at < 0 && got != c->args.size())
    throw ArityError("`" + h + "` expects " + std::to_string(c->args.size()) + " arguments");
  if (variadic_at >= 0 && got < fixed_before + fixed_after)
    throw ArityError("`" + h + "` expects at least " +
                     std::to_string(fixed_before + fixed_after) + " arguments");

  std::vector<FormulaArg> args(c->args.size());
  size_t ki = 1;
  for (size_t d = 0; d < c->args.size(); ++d) {
    if (static_cast<int>(d) == variadic_at) {
      FormulaArg a;
      a.kind = FormulaArg::Kind::VariadicList;
      size_t count = got - fixed_before - fixed_after;
      for (size_t j = 0; j < count; ++j)
        a.list.push_back(resolve(n.kids[ki++], c->args[d].sort));
      args[d] = std::move(a);
    } else {
      args[d] = resolve_arg(n.kids[ki++], c->args[d]);
    }
  }
  return Formula::lifted(c->name, c->result, std::move(args));
}

FormulaArg FResolver::resolve_arg(const SNode& n, const ArgDescriptor& d) {
  FormulaArg a;
  if (d.kind == ArgDescriptor::Kind::Abstraction) {
    if (n.is_list && !n.kids.empty() && !n.kids[0].is_list &&
        (n.kids[0].token == "\\" || n.kids[0].token == "\\fresh")) {
      a.kind = FormulaArg::Kind::Binder;
      a.generic = n.kids[0].token == "\\fresh";
      if (n.kids.size() < 2) throw SyntaxError("binder formula needs a body");
      for (size_t i = 1; i + 1 < n.kids.size(); ++i) {
        if (n.kids[i].is_list) throw SyntaxError("binder names must be identifiers");
        a.binders.push_back(n.kids[i].token);
      }
      if (!d.variadic_binder && static_cast<int>(a.binders.size()) != d.bound_count)
        throw ArityError("binder formula binds " + std::to_string(a.binders.size()) +
                         " names, expected " + std::to_string(d.bound_count));
      binder_scope.push_back({a.binders, d.sort});
      a.plain = resolve(n.kids.back(), d.body_sort);
      binder_scope.pop_back();
      return a;
    }
    // boolean screen over abstractions: top, bot and combinations of them
    a.kind = FormulaArg::Kind::Plain;
    a.plain = resolve_abs_position(n, d);
    return a;
  }
  a.kind = FormulaArg::Kind::Plain;
  a.plain = resolve(n, d.sort);
  return a;
}

FormulaPtr FResolver::resolve_abs_position(const SNode& n, const ArgDescriptor& d) {
  std::string pseudo = d.text();
  if (!n.is_list) {
    if (n.token == "top") return Formula::top(pseudo);
    if (n.token == "bot") return Formula::bot(pseudo);
    throw SyntaxError("an abstraction argument takes a binder `(\\ x f)`, top or bot");
  }
  if (n.kids.empty() || n.kids[0].is_list) throw SyntaxError("bad abstraction argument");
  const std::string& h = n.kids[0].token;
  if (h == "not" && n.kids.size() == 2)
    return Formula::neg(resolve_abs_position(n.kids[1], d));
  if ((h == "and" || h == "or") && n.kids.size() >= 3) {
    FormulaPtr acc = resolve_abs_position(n.kids[1], d);
    for (size_t i = 2; i < n.kids.size(); ++i) {
      FormulaPtr rhs = resolve_abs_position(n.kids[i], d);
      acc = h == "and" ? Formula::conj(acc, rhs) : Formula::disj(acc, rhs);
    }
    return acc;
  }
  throw SyntaxError("an abstraction argument takes a binder `(\\ x f)`, top or bot");
}

// ---------- positivity and closedness ----------

void check_positivity(const FormulaPtr& f, std::map<std::string, bool>& polarity, bool even) {
  switch (f->kind) {
    case Formula::Kind::Var: {
      auto it = polarity.find(f->head);
      if (it != polarity.end() && it->second != even)
        throw NonPositiveError("fixed-point variable " + f->head +
                               " occurs under an odd number of negations");
      return;
    }
    case Formula::Kind::Not:
      check_positivity(f->kids[0], polarity, !even);
      return;
    case Formula::Kind::Mu: {
      auto it = polarity.find(f->head);
      std::optional<bool> saved =
          it != polarity.end() ? std::optional<bool>(it->second) : std::nullopt;
      polarity[f->head] = even;
      check_positivity(f->kids[0], polarity, even);
      if (saved) polarity[f->head] = *saved;
      else polarity.erase(f->head);
      return;
    }
    default:
      for (const auto& k : f->kids) check_positivity(k, polarity, even);
      for (const auto& a : f->cargs) {
        if (a.plain) check_positivity(a.plain, polarity, even);
        for (const auto& g : a.list) check_positivity(g, polarity, even);
      }
      return;
  }
}

void check_closed(const FormulaPtr& f, std::set<std::string> bound) {
  switch (f->kind) {
    case Formula::Kind::Var:
      if (!bound.count(f->head)) throw UnboundVarError("unbound variable " + f->head);
      return;
    case Formula::Kind::Mu:
      bound.insert(f->head);
      check_closed(f->kids[0], bound);
      return;
    default:
      for (const auto& k : f->kids) check_closed(k, bound);
      for (const auto& a : f->cargs) {
        if (a.plain) check_closed(a.plain, bound);
        for (const auto& g : a.list) check_closed(g, bound);
      }
      return;
  }
}

}  // namespace

FormulaPtr parse_formula(const Presentation& p, const std::string& sort,
                         const std::string& text) {
  if (!p.has_sort(sort)) throw SortError("unknown sort `" + sort + "`");
  if (!p.logic_enabled(sort))
    throw LogicNotEnabledError("sort " + sort + " carries no Boolean layer");
  Lexer lx{text};
  SNode n = read_sexpr(lx);
  if (!lx.done()) throw SyntaxError("trailing input after formula");
  FResolver r{p, {}, {}};
  FormulaPtr f = r.resolve(n, sort);
  std::map<std::string, bool> polarity;
  check_positivity(f, polarity, true);
  check_closed(f, {});
  sort_check(p, f);
  return f;
}

// ---------- sort checking ----------

namespace {

void sort_check_rec(const Presentation& p, const FormulaPtr& f,
                    std::map<std::string, std::string>& mu_sorts) {
  const std::string& s = f->sort;
  bool abs_pos = is_abs_pseudo_sort(s);
  if (!abs_pos && !p.has_sort(s)) throw SortError("formula at unknown sort `" + s + "`");
  switch (f->kind) {
    case Formula::Kind::Top:
    case Formula::Kind::Bot:
      break;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      if (f->kids[0]->sort != s || f->kids[1]->sort != s)
        throw SortError("connective children change sort");
      break;
    case Formula::Kind::Not:
      if (f->kids[0]->sort != s) throw SortError("negation changes sort");
      break;
    case Formula::Kind::AtomLit:
      if (abs_pos) throw SortError("atom literal at an abstraction position");
      break;
    case Formula::Kind::Var: {
      auto it = mu_sorts.find(f->head);
      if (it != mu_sorts.end() && it->second != s)
        throw SortError("variable " + f->head + " used at two sorts");
      break;
    }
    case Formula::Kind::Mu: {
      auto it = mu_sorts.find(f->head);
      std::optional<std::string> saved =
          it != mu_sorts.end() ? std::optional<std::string>(it->second) : std::nullopt;
      mu_sorts[f->head] = s;
      if (f->kids[0]->sort != s) throw SortError("mu body changes sort");
      if (!p.logic_enabled(s))
        throw LogicNotEnabledError("sort " + s + " carries no Boolean layer");
      sort_check_rec(p, f->kids[0], mu_sorts);
      if (saved) mu_sorts[f->head] = *saved;
      else mu_sorts.erase(f->head);
      return;
    }
    case Formula::Kind::Modal: {
      if (!f->ctx || f->ctx->hole_count() != 2)
        throw SortError("modal operator needs a two-hole context");
      if (f->ctx->hole_sorts[0] != s)
        throw SortError("modal context hole1 disagrees with the formula sort");
      if (f->kids[0]->sort != f->ctx->hole_sorts[1])
        throw SortError("modal witness formula disagrees with hole2");
      if (f->kids[1]->sort != f->ctx->result_sort)
        throw SortError("modal goal formula disagrees with the context result sort");
      break;
    }
    case Formula::Kind::Lifted: {
      const ConstructorDecl* c = p.find_constructor(f->head);
      if (!c) throw SortError("lift of unknown operator `" + f->head + "`");
      if (c->result != s) throw SortError("lifted `" + f->head + "` changes sort");
      if (c->assoc) {
        if (!f->cargs.empty()) {
          if (f->cargs.size() != 2) throw SortError("lifted `" + f->head + "` must be binary");
          for (const auto& a : f->cargs)
            if (a.kind != FormulaArg::Kind::Plain || a.plain->sort != c->result)
              throw SortError("lifted `" + f->head + "` argument at the wrong sort");
        }
        break;
      }
      if (f->cargs.size() != c->args.size())
        throw SortError("lifted `" + f->head + "` arity mismatch");
      for (size_t i = 0; i < c->args.size(); ++i) {
        const ArgDescriptor& d = c->args[i];
        const FormulaArg& a = f->cargs[i];
        switch (d.kind) {
          case ArgDescriptor::Kind::Plain:
            if (a.kind != FormulaArg::Kind::Plain || a.plain->sort != d.sort)
              throw SortError("lifted `" + f->head + "` argument " + std::to_string(i + 1) +
                              " at the wrong sort");
            break;
          case ArgDescriptor::Kind::Variadic:
            if (a.kind != FormulaArg::Kind::VariadicList)
              throw SortError("lifted `" + f->head + "` needs a variadic list argument");
            for (const auto& g : a.list)
              if (g->sort != d.sort) throw SortError("variadic element at the wrong sort");
            break;
          case ArgDescriptor::Kind::Abstraction:
            if (a.kind == FormulaArg::Kind::Binder) {
              if (!d.variadic_binder && static_cast<int>(a.binders.size()) != d.bound_count)
                throw SortError("binder formula count mismatch");
              if (a.plain->sort != d.body_sort)
                throw SortError("binder formula body at the wrong sort");
            } else if (a.kind == FormulaArg::Kind::Plain) {
              if (!is_abs_pseudo_sort(a.plain->sort))
                throw SortError("abstraction argument needs a binder or top/bot");
            } else {
              throw SortError("abstraction argument needs a binder or top/bot");
            }
            break;
        }
      }
      break;
    }
  }
  bool boolean = f->kind == Formula::Kind::Top || f->kind == Formula::Kind::Bot ||
                 f->kind == Formula::Kind::And || f->kind == Formula::Kind::Or ||
                 f->kind == Formula::Kind::Not || f->kind == Formula::Kind::Var;
  if (boolean && !abs_pos && !p.logic_enabled(s))
    throw LogicNotEnabledError("sort " + s + " carries no Boolean layer");
  for (const auto& k : f->kids) sort_check_rec(p, k, mu_sorts);
  for (const auto& a : f->cargs) {
    if (a.plain) sort_check_rec(p, a.plain, mu_sorts);
    for (const auto& g : a.list) sort_check_rec(p, g, mu_sorts);
  }
}

}  // namespace

std::string sort_check(const Presentation& p, const FormulaPtr& f) {
  std::map<std::string, std::string> mu_sorts;
  sort_check_rec(p, f, mu_sorts);
  return f->sort;
}

// ---------- lifting terms ----------

namespace {

FormulaPtr lift_rec(const Presentation& p, const TermPtr& t,
                    std::vector<std::vector<std::string>>& scopes,
                    std::vector<std::string>& scope_sorts, int& counter);

FormulaArg lift_arg(const Presentation& p, const ArgDescriptor& d, const TermPtr& t,
                    std::vector<std::vector<std::string>>& scopes,
                    std::vector<std::string>& scope_sorts, int& counter) {
  FormulaArg a;
  if (d.kind == ArgDescriptor::Kind::Abstraction) {
    if (t->kind != Term::Kind::Abs) throw SortError("expected an abstraction to lift");
    a.kind = FormulaArg::Kind::Binder;
    a.generic = true;
    for (int i = 0; i < t->bound; ++i) a.binders.push_back("b" + std::to_string(counter++));
    scopes.push_back(a.binders);
    scope_sorts.push_back(d.sort);
    a.plain = lift_rec(p, t->args[0], scopes, scope_sorts, counter);
    scopes.pop_back();
    scope_sorts.pop_back();
    return a;
  }
  a.kind = FormulaArg::Kind::Plain;
  a.plain = lift_rec(p, t, scopes, scope_sorts, counter);
  return a;
}

FormulaPtr lift_rec(const Presentation& p, const TermPtr& t,
                    std::vector<std::vector<std::string>>& scopes,
                    std::vector<std::string>& scope_sorts, int& counter) {
  switch (t->kind) {
    case Term::Kind::Atom:
      return Formula::atom(t->sort, t->head);
    case Term::Kind::Var: {
      size_t up = static_cast<size_t>(t->index);
      if (up >= scopes.size()) throw SortError("cannot lift an open term");
      const auto& names = scopes[scopes.size() - 1 - up];
      return Formula::atom(scope_sorts[scope_sorts.size() - 1 - up],
                           names.at(static_cast<size_t>(t->position)));
    }
    case Term::Kind::Flat: {
      const ConstructorDecl* c = p.find_constructor(t->head);
      FormulaPtr acc = lift_rec(p, t->args.back(), scopes, scope_sorts, counter);
      for (size_t i = t->args.size() - 1; i-- > 0;) {
        FormulaArg a1, a2;
        a1.plain = lift_rec(p, t->args[i], scopes, scope_sorts, counter);
        a2.plain = acc;
        acc = Formula::lifted(c->name, c->result, {std::move(a1), std::move(a2)});
      }
      return acc;
    }
    case Term::Kind::Apply: {
      const ConstructorDecl* c = p.find_constructor(t->head);
      if (!c) throw SortError("lift of unknown operator `" + t->head + "`");
      std::vector<FormulaArg> args(c->args.size());
      size_t fixed_before = 0, fixed_after = 0;
      int variadic_at = -1;
      for (size_t i = 0; i < c->args.size(); ++i) {
        if (c->args[i].kind == ArgDescriptor::Kind::Variadic)
          variadic_at = static_cast<int>(i);
        else (variadic_at < 0 ? fixed_before : fixed_after)++;
      }
      size_t ti = 0;
      for (size_t d = 0; d < c->args.size(); ++d) {
        if (static_cast<int>(d) == variadic_at) {
          FormulaArg a;
          a.kind = FormulaArg::Kind::VariadicList;
          size_t count = t->args.size() - fixed_before - fixed_after;
          for (size_t j = 0; j < count; ++j)
            a.list.push_back(lift_rec(p, t->args[ti++], scopes, scope_sorts, counter));
          args[d] = std::move(a);
        } else {
          args[d] = lift_arg(p, c->args[d], t->args[ti++], scopes, scope_sorts, counter);
        }
      }
      return Formula::lifted(c->name, c->result, std::move(args));
    }
    default:
      throw SortError("term cannot be lifted to a formula");
  }
}

}  // namespace

FormulaPtr lift_term(const Presentation& p, const TermPtr& t) {
  std::vector<std::vector<std::string>> scopes;
  std::vector<std::string> scope_sorts;
  int counter = 0;
  return lift_rec(p, canonicalize(p, t), scopes, scope_sorts, counter);
}

// ---------- pretty printing ----------

namespace {

void pretty_rec(const Presentation& p, const FormulaPtr& f, std::string& out) {
  switch (f->kind) {
    case Formula::Kind::Top: out += "top"; return;
    case Formula::Kind::Bot: out += "bot"; return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      out += f->kind == Formula::Kind::And ? "(and " : "(or ";
      pretty_rec(p, f->kids[0], out);
      out += " ";
      pretty_rec(p, f->kids[1], out);
      out += ")";
      return;
    case Formula::Kind::Not:
      out += "(not ";
      pretty_rec(p, f->kids[0], out);
      out += ")";
      return;
    case Formula::Kind::AtomLit: out += f->head; return;
    case Formula::Kind::Var: out += f->head; return;
    case Formula::Kind::Mu:
      out += "(mu " + f->head + " ";
      pretty_rec(p, f->kids[0], out);
      out += ")";
      return;
    case Formula::Kind::Modal:
      out += "(dia ";
      pretty_rec(p, f->kids[0], out);
      out += " " + pretty(p, f->ctx->body) + " ";
      pretty_rec(p, f->kids[1], out);
      out += ")";
      return;
    case Formula::Kind::Lifted: {
      if (f->cargs.empty()) {
        out += f->head;
        return;
      }
      out += "(" + f->head;
      for (const auto& a : f->cargs) {
        switch (a.kind) {
          case FormulaArg::Kind::Plain:
            out += " ";
            pretty_rec(p, a.plain, out);
            break;
          case FormulaArg::Kind::VariadicList:
            for (const auto& g : a.list) {
              out += " ";
              pretty_rec(p, g, out);
            }
            break;
          case FormulaArg::Kind::Binder:
            out += a.generic ? " (\\fresh" : " (\\";
            for (const auto& b : a.binders) out += " " + b;
            out += " ";
            pretty_rec(p, a.plain, out);
            out += ")";
            break;
        }
      }
      out += ")";
      return;
    }
  }
}

}  // namespace

std::string pretty(const Presentation& p, const FormulaPtr& f) {
  std::string out;
  pretty_rec(p, f, out);
  return out;
}

// ---------- denotation size bound ----------

std::optional<size_t> denotation_size_bound(const Presentation& p, const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Bot: return 0;
    case Formula::Kind::AtomLit: return 1;
    case Formula::Kind::And: {
      auto a = denotation_size_bound(p, f->kids[0]);
      auto b = denotation_size_bound(p, f->kids[1]);
      if (a && b) return std::min(*a, *b);
      return a ? a : b;
    }
    case Formula::Kind::Or: {
      auto a = denotation_size_bound(p, f->kids[0]);
      auto b = denotation_size_bound(p, f->kids[1]);
      if (a && b) return std::max(*a, *b);
      return std::nullopt;
    }
    case Formula::Kind::Lifted: {
      size_t total = 1;
      for (const auto& a : f->cargs) {
        switch (a.kind) {
          case FormulaArg::Kind::Plain: {
            if (is_abs_pseudo_sort(a.plain->sort)) return std::nullopt;
            auto b = denotation_size_bound(p, a.plain);
            if (!b) return std::nullopt;
            total += *b;
            break;
          }
          case FormulaArg::Kind::VariadicList: {
            for (const auto& g : a.list) {
              auto b = denotation_size_bound(p, g);
              if (!b) return std::nullopt;
              total += *b;
            }
            break;
          }
          case FormulaArg::Kind::Binder: {
            auto b = denotation_size_bound(p, a.plain);
            if (!b) return std::nullopt;
            total += *b + 1;
            break;
          }
        }
      }
      return total;
    }
    default:
      return std::nullopt;  // top, not, modal, mu, var
  }
}

// ---------- atom substitution and collection ----------

namespace {

FormulaPtr subst_atom_impl(const FormulaPtr& f, const std::string& from,
                           const std::function<FormulaPtr(const Formula&)>& repl) {
  switch (f->kind) {
    case Formula::Kind::AtomLit:
      if (f->head == from) return repl(*f);
      return f;
    default: {
      Formula copy = *f;
      bool changed = false;
      for (auto& k : copy.kids) {
        FormulaPtr r = subst_atom_impl(k, from, repl);
        changed |= r != k;
        k = r;
      }
      for (auto& a : copy.cargs) {
        bool shadowed =
            std::find(a.binders.begin(), a.binders.end(), from) != a.binders.end();
        if (a.plain && !shadowed) {
          FormulaPtr r = subst_atom_impl(a.plain, from, repl);
          changed |= r != a.plain;
          a.plain = r;
        }
        for (auto& g : a.list) {
          if (shadowed) continue;
          FormulaPtr r = subst_atom_impl(g, from, repl);
          changed |= r != g;
          g = r;
        }
      }
      if (!changed) return f;
      return make(std::move(copy));
    }
  }
}

}  // namespace

FormulaPtr subst_atom(const FormulaPtr& f, const std::string& from, const FormulaPtr& repl) {
  return subst_atom_impl(f, from, [&](const Formula&) { return repl; });
}

FormulaPtr subst_atom(const FormulaPtr& f, const std::string& from, const std::string& to) {
  return subst_atom_impl(f, from,
                         [&](const Formula& node) { return Formula::atom(node.sort, to); });
}

void collect_atoms(const FormulaPtr& f, GeneratorSet& into) {
  if (f->kind == Formula::Kind::AtomLit && !is_abs_pseudo_sort(f->sort)) {
    auto& v = into.atoms[f->sort];
    if (std::find(v.begin(), v.end(), f->head) == v.end()) v.push_back(f->head);
  }
  for (const auto& k : f->kids) collect_atoms(k, into);
  for (const auto& a : f->cargs) {
    if (a.plain) collect_atoms(a.plain, into);
    for (const auto& g : a.list) collect_atoms(g, into);
  }
  if (f->kind == Formula::Kind::Modal && f->ctx) collect_atoms(f->ctx->body, into);
}

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->sort != b->sort || a->head != b->head) return false;
  if (a->kids.size() != b->kids.size() || a->cargs.size() != b->cargs.size()) return false;
  for (size_t i = 0; i < a->kids.size(); ++i)
    if (!formula_equal(a->kids[i], b->kids[i])) return false;
  for (size_t i = 0; i < a->cargs.size(); ++i) {
    const auto& x = a->cargs[i];
    const auto& y = b->cargs[i];
    if (x.kind != y.kind || x.binders != y.binders || x.generic != y.generic) return false;
    if ((x.plain == nullptr) != (y.plain == nullptr)) return false;
    if (x.plain && !formula_equal(x.plain, y.plain)) return false;
    if (x.list.size() != y.list.size()) return false;
    for (size_t j = 0; j < x.list.size(); ++j)
      if (!formula_equal(x.list[j], y.list[j])) return false;
  }
  if (a->kind == Formula::Kind::Modal) {
    if ((a->ctx ? 1 : 0) != (b->ctx ? 1 : 0)) return false;
    if (a->ctx && compare(a->ctx->body, b->ctx->body) != 0) return false;
  }
  return true;
}

}  // namespace sbl
