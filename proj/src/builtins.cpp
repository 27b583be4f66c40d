#include "sbl/builtins.hpp"

#include <json.hpp>

#include <map>

namespace sbl {

namespace {

const std::string kMeteredSource =
    "# rhopi with a consumable comm: each communication burns one catalyst\n"
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
    "rule chi : (| (send $x $p ...) (recv $x $q) (comm)) => (| ($q (quote $p) ...))\n";

// D(x) as concrete syntax, reused in several corpus entries.
const char* kServer = "(recv x (\\ y (| (send x (* y)) (* y))))";

Fixture make_mon() {
  Fixture f;
  f.name = "mon";
  f.source = builtin_source("mon");
  f.presentation = builtin("mon");
  f.default_gens.atoms["S"] = {"a", "b", "c", "d"};
  f.corpus_max_size = 5;
  f.formula_sorts = {{"prime", "S"}, {"worked", "S"}, {"unit-word", "S"}, {"splittable", "S"}};
  f.formulae = {
      {"prime", "(and (not e) (not (\xC2\xB7 (not e) (not e))))"},
      {"worked", "(\xC2\xB7 (or a (\xC2\xB7 b d)) (or c d))"},
      {"unit-word", "e"},
      {"splittable", "(\xC2\xB7 (not e) (not e))"},
  };
  f.sample_terms = {
      {"gen", "a"},
      {"word2", "(\xC2\xB7 a b)"},
      {"word3", "(\xC2\xB7 a (\xC2\xB7 b c))"},
  };
  f.expected = {
      {"a", "prime", VerdictKind::True, "hand-checked"},
      {"b", "prime", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 a b)", "prime", VerdictKind::False, "hand-checked"},
      {"(\xC2\xB7 a (\xC2\xB7 a b))", "prime", VerdictKind::False, "hand-checked"},
      {"e", "prime", VerdictKind::False, "definition"},
      {"(\xC2\xB7 a c)", "worked", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 a d)", "worked", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 (\xC2\xB7 b d) c)", "worked", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 (\xC2\xB7 b d) d)", "worked", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 a b)", "worked", VerdictKind::False, "brute-force"},
      {"e", "unit-word", VerdictKind::True, "definition"},
      {"a", "unit-word", VerdictKind::False, "definition"},
      {"a", "splittable", VerdictKind::False, "hand-checked"},
      {"(\xC2\xB7 a b)", "splittable", VerdictKind::True, "hand-checked"},
  };
  return f;
}

Fixture make_mon_tree() {
  Fixture f;
  f.name = "mon-tree";
  f.source = builtin_source("mon-tree");
  f.presentation = builtin("mon-tree");
  f.default_gens.atoms["S"] = {"a", "b"};
  f.corpus_max_size = 5;
  f.formula_sorts = {{"left-unit", "S"}, {"to-unit", "S"}, {"to-a", "S"}};
  f.formulae = {
      {"left-unit", "(\xC2\xB7 e top)"},
      // behavioral: t with t\xC2\xB7e reducible to a bare unit / generator
      {"to-unit", "(arrow (lift e) (lift e))"},
      {"to-a", "(arrow (lift e) (lift a))"},
  };
  f.sample_terms = {
      {"skewed", "(\xC2\xB7 (\xC2\xB7 e a) (\xC2\xB7 b e))"},
  };
  f.expected = {
      {"(\xC2\xB7 e a)", "left-unit", VerdictKind::True, "definition"},
      {"(\xC2\xB7 a e)", "left-unit", VerdictKind::False, "definition"},
      {"e", "to-unit", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 e e)", "to-unit", VerdictKind::True, "hand-checked"},
      {"a", "to-unit", VerdictKind::False, "hand-checked"},
      {"a", "to-a", VerdictKind::True, "hand-checked"},
      {"(\xC2\xB7 e a)", "to-a", VerdictKind::True, "hand-checked"},
      {"b", "to-a", VerdictKind::False, "hand-checked"},
  };
  return f;
}

Fixture make_ski(bool with_arrow_ctor) {
  Fixture f;
  f.name = with_arrow_ctor ? "ski-arrow" : "ski";
  f.source = builtin_source(f.name);
  f.presentation = builtin(f.name);
  f.default_gens = {};  // closed combinators
  f.corpus_max_size = 4;
  f.formula_sorts = {{"k-lift", "T"}, {"arrow-kk", "T"}, {"arrow-ii", "T"}, {"k-redex", "T"}};
  f.formulae = {
      {"k-lift", "(lift K)"},
      {"arrow-kk", "(arrow (lift K) (lift K))"},
      {"arrow-ii", "(arrow (lift I) (lift I))"},
      {"k-redex", "(app (app K top) top)"},
  };
  f.sample_terms = {
      {"skk", "((S K) K)"},
      {"ki-x", "(app (app K I) (app I I))"},
  };
  f.expected = {
      {"K", "k-lift", VerdictKind::True, "definition"},
      {"((K K) I)", "k-lift", VerdictKind::False, "definition"},
      {"((S K) K)", "arrow-kk", VerdictKind::True, "hand-checked"},
      {"I", "arrow-kk", VerdictKind::True, "hand-checked"},
      {"K", "arrow-ii", VerdictKind::False, "brute-force"},
      {"(app I I)", "arrow-ii", VerdictKind::True, "hand-checked"},
      {"(app (app K K) I)", "k-redex", VerdictKind::True, "definition"},
      {"(app K K)", "k-redex", VerdictKind::False, "definition"},
  };
  return f;
}

Fixture make_rhopi() {
  Fixture f;
  f.name = "rhopi";
  f.source = builtin_source("rhopi");
  f.presentation = builtin("rhopi");
  f.default_gens.atoms["N"] = {"x"};
  f.corpus_max_size = 4;
  f.formula_sorts = {{"liveness", "P"},   {"comm-lift", "P"},  {"send1", "P"},
                     {"quoted-top", "N"}, {"firewall", "P"},   {"rg-comm", "P"}};
  f.formulae = {
      {"liveness", "(mu X (| (recv top (\\ x X)) top))"},
      {"comm-lift", "comm"},
      {"send1", "(send top top)"},
      {"quoted-top", "(quote top)"},
      {"firewall",
       "(mu X (| (recv (quote 0) (\\ x (| (or X 0) (not (recv (quote (not 0)) top))))) "
       "(not (recv (quote (not 0)) top))))"},
      {"rg-comm", "(rg comm (| comm comm))"},
  };
  f.sample_terms = {
      {"contention", "(| (recv x (\\ u (* u))) (recv x (\\ v 0)) (send x (comm)) (comm))"},
      {"message-order", "(| (send x (comm)) (send x 0) (recv x (\\ u (* u))) (comm))"},
      {"server", kServer},
      {"bang0", std::string("(| (send x ") + kServer + ") " + kServer + ")"},
      {"bang0-comm", std::string("(| (send x ") + kServer + ") " + kServer + " (comm))"},
  };
  f.expected = {
      {"0", "liveness", VerdictKind::False, "brute-force"},
      {"(send x 0)", "liveness", VerdictKind::False, "brute-force"},
      {std::string("(| (send x ") + kServer + ") " + kServer + ")", "liveness",
       VerdictKind::True, "hand-checked"},
      {"comm", "comm-lift", VerdictKind::True, "definition"},
      {"(| comm comm)", "comm-lift", VerdictKind::False, "definition"},
      {"(send x 0)", "send1", VerdictKind::True, "definition"},
      {"(send x)", "send1", VerdictKind::False, "definition"},
      {"(quote 0)", "quoted-top", VerdictKind::True, "hand-checked"},
      {"x", "quoted-top", VerdictKind::False, "hand-checked"},
      {"(recv (quote 0) (\\ y 0))", "firewall", VerdictKind::True, "hand-checked"},
      {"(recv (quote comm) (\\ y 0))", "firewall", VerdictKind::False, "hand-checked"},
      {"0", "firewall", VerdictKind::False, "hand-checked"},
      {"comm", "rg-comm", VerdictKind::True, "hand-checked"},
      {"0", "rg-comm", VerdictKind::False, "brute-force"},
  };
  return f;
}

Fixture make_rhopi_metered() {
  Fixture f;
  f.name = "rhopi-metered";
  f.source = kMeteredSource;
  f.presentation = parse_presentation(kMeteredSource);
  f.default_gens.atoms["N"] = {"x"};
  f.corpus_max_size = 4;
  f.formula_sorts = {{"comm-lift", "P"}, {"send1", "P"}};
  f.formulae = {
      {"comm-lift", "comm"},
      {"send1", "(send top top)"},
  };
  f.sample_terms = {
      {"one-shot", "(| (send x 0) (recv x (\\ u (* u))) (comm))"},
  };
  f.expected = {
      {"comm", "comm-lift", VerdictKind::True, "definition"},
      {"(send x 0)", "send1", VerdictKind::True, "definition"},
  };
  return f;
}

Fixture make_group_action() {
  Fixture f;
  f.name = "group-action";
  f.source = builtin_source("group-action");
  f.presentation = builtin("group-action");
  f.default_gens.atoms["G"] = {"g", "h"};
  f.default_gens.atoms["V"] = {"v"};
  f.corpus_max_size = 5;
  f.sample_terms = {
      {"fold", "(act (m g h) v)"},
      {"idact", "(act e v)"},
  };
  return f;
}

const std::map<std::string, Fixture>& all_fixtures() {
  static const std::map<std::string, Fixture> fixtures = [] {
    std::map<std::string, Fixture> m;
    for (Fixture f : {make_mon(), make_mon_tree(), make_ski(false), make_ski(true),
                      make_rhopi(), make_rhopi_metered(), make_group_action()})
      m.emplace(f.name, std::move(f));
    return m;
  }();
  return fixtures;
}

}  // namespace

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : all_fixtures()) out.push_back(name);
    return out;
  }();
  return names;
}

const Fixture& fixture(const std::string& name) {
  const auto& m = all_fixtures();
  auto it = m.find(name);
  if (it == m.end()) throw UnknownBuiltinError("unknown fixture `" + name + "`");
  return it->second;
}

FormulaPtr Fixture::formula(const std::string& fname) const {
  for (const auto& [n, text] : formulae)
    if (n == fname) return parse_formula(presentation, formula_sorts.at(n), text);
  throw UnknownBuiltinError("fixture " + name + " has no formula `" + fname + "`");
}

TermPtr Fixture::sample(const std::string& sname) const {
  for (const auto& [n, text] : sample_terms)
    if (n == sname) return parse_term(presentation, text, default_gens);
  throw UnknownBuiltinError("fixture " + name + " has no sample term `" + sname + "`");
}

std::vector<NamedFormula> Fixture::corpus() const {
  std::vector<NamedFormula> out;
  for (const auto& [n, text] : formulae)
    out.push_back({n, parse_formula(presentation, formula_sorts.at(n), text)});
  return out;
}

std::string corpus_json(const Fixture& f) {
  nlohmann::json j;
  j["calculus"] = f.name;
  j["max_size"] = f.corpus_max_size;
  nlohmann::json gens = nlohmann::json::object();
  for (const auto& [sort, names] : f.default_gens.atoms) gens[sort] = names;
  j["gens"] = gens;
  nlohmann::json formulas = nlohmann::json::array();
  for (const auto& [n, text] : f.formulae)
    formulas.push_back({{"name", n}, {"sort", f.formula_sorts.at(n)}, {"text", text}});
  j["formulas"] = formulas;
  nlohmann::json expected = nlohmann::json::array();
  for (const auto& e : f.expected) {
    const char* v = e.verdict == VerdictKind::True    ? "true"
                    : e.verdict == VerdictKind::False ? "false"
                                                      : "unknown";
    expected.push_back(
        {{"term", e.term}, {"formula", e.formula}, {"verdict", v}, {"origin", e.origin}});
  }
  j["expected"] = expected;
  return j.dump(2) + "\n";
}

TermPtr rhopi_server(const Presentation& p, const TermPtr& chan) {
  // recv(x, y -> send(x, *y) | *y)
  const ConstructorDecl* deref = p.find_constructor("*");
  const ConstructorDecl* send = p.find_constructor("send");
  const ConstructorDecl* recv = p.find_constructor("recv");
  const ConstructorDecl* par = p.parallel_constructor();
  if (!deref || !send || !recv || !par)
    throw UnknownBuiltinError("presentation lacks the rhopi operators");
  TermPtr dy = mk_apply(deref->name, {mk_var(0, 0)});
  TermPtr body = mk_apply(par->name, {mk_apply(send->name, {shift_vars(chan, 1), dy}), dy});
  return canonicalize(p, mk_apply(recv->name, {chan, mk_abs(1, body)}));
}

TermPtr rhopi_bang(const Presentation& p, const TermPtr& proc, const TermPtr& chan) {
  // send(x, D(x) | P) | D(x)
  const ConstructorDecl* send = p.find_constructor("send");
  const ConstructorDecl* par = p.parallel_constructor();
  TermPtr d = rhopi_server(p, chan);
  TermPtr payload = mk_apply(par->name, {d, proc});
  return canonicalize(
      p, mk_apply(par->name, {mk_apply(send->name, {chan, payload}), d}));
}

}  // namespace sbl
