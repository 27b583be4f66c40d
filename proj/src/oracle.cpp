#include "sbl/oracle.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace sbl {

const TermSet& Universe::of(const std::string& sort) const {
  static const TermSet empty;
  auto it = by_sort.find(sort);
  return it == by_sort.end() ? empty : it->second;
}

bool Universe::contains(const TermPtr& t) const {
  std::string s;
  try {
    s = sort_of(*p, t);
  } catch (const SortError&) {
    return false;
  }
  auto it = by_sort.find(s);
  return it != by_sort.end() && it->second.count(t) > 0;
}

Universe build_universe(const Presentation& p, const GeneratorSet& gens, size_t max_size) {
  Universe u;
  u.p = &p;
  u.gens = gens;
  u.max_size = max_size;
  for (const auto& s : p.sorts) {
    TermSet set;
    for (const auto& t : enumerate_terms(p, s, gens, max_size)) set.insert(t);
    u.by_sort.emplace(s, std::move(set));
  }
  return u;
}

namespace {

bool set_equal(const TermSet& a, const TermSet& b) {
  if (a.size() != b.size()) return false;
  auto it = a.begin();
  auto jt = b.begin();
  for (; it != a.end(); ++it, ++jt)
    if (compare(*it, *jt) != 0) return false;
  return true;
}

bool is_abs_pseudo(const std::string& s) { return s.rfind("bind ", 0) == 0; }

struct OCtx {
  const Presentation& p;
  const Universe& base;
  SearchBudget rw;
  bool truncated = false;
  std::map<std::string, Universe> extended;  // keyed by the added fresh atoms

  // Universe over the base generators plus reserved fresh atoms, used to
  // denote binder bodies instantiated at a generic point.
  const Universe& extend(const std::vector<std::pair<std::string, std::string>>& fresh) {
    if (fresh.empty()) return base;
    std::string key;
    for (const auto& [sort, name] : fresh) key += sort + "=" + name + ";";
    auto it = extended.find(key);
    if (it != extended.end()) return it->second;
    GeneratorSet gens = base.gens;
    for (const auto& [sort, name] : fresh) gens.atoms[sort].push_back(name);
    Universe u = build_universe(p, gens, base.max_size);
    return extended.emplace(std::move(key), std::move(u)).first->second;
  }
};

using MuSets = std::map<std::string, TermSet>;

TermSet denote_rec(OCtx& cx, const FormulaPtr& f, const Universe& u, const MuSets& env,
                   size_t fresh_depth);

// Constant truth value of a top/bot screen over abstraction arguments.
bool abs_screen_value(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Top: return true;
    case Formula::Kind::Bot: return false;
    case Formula::Kind::Not: return !abs_screen_value(f->kids[0]);
    case Formula::Kind::And: return abs_screen_value(f->kids[0]) && abs_screen_value(f->kids[1]);
    case Formula::Kind::Or: return abs_screen_value(f->kids[0]) || abs_screen_value(f->kids[1]);
    default: return false;
  }
}

// Does the constructed term's abstraction argument satisfy the binder
// formula? Same candidate rule as the checker: the fresh tuple plus names
// derived from the constructed term itself; membership is set membership of
// the instantiated body in the (possibly fresh-extended) universe denotation.
bool binder_holds(OCtx& cx, const TermPtr& constructed, const TermPtr& q,
                  const FormulaArg& arg, const ArgDescriptor& desc, const Universe& u,
                  const MuSets& env, size_t fresh_depth) {
  size_t k = arg.binders.size();
  if (q->kind != Term::Kind::Abs || static_cast<size_t>(q->bound) != k) return false;

  std::vector<std::vector<TermPtr>> tuples;
  {
    std::vector<TermPtr> fresh;
    for (size_t j = 0; j < k; ++j)
      fresh.push_back(mk_atom(desc.sort, fresh_atom_name(fresh_depth + j)));
    tuples.push_back(std::move(fresh));
  }
  if (!arg.generic && k > 0) {
    auto singles = binder_candidates(cx.p, constructed, desc.sort);
    std::vector<std::vector<TermPtr>> acc = {{}};
    for (size_t j = 0; j < k; ++j) {
      std::vector<std::vector<TermPtr>> next;
      for (const auto& pre : acc)
        for (const auto& cnd : singles) {
          auto cp = pre;
          cp.push_back(cnd);
          next.push_back(std::move(cp));
        }
      acc = std::move(next);
    }
    for (auto& tp : acc)
      if (!tp.empty()) tuples.push_back(std::move(tp));
  }

  for (const auto& tp : tuples) {
    TermPtr inst = instantiate(cx.p, q, tp);
    FormulaPtr body = arg.plain;
    std::vector<std::pair<std::string, std::string>> fresh_added;
    for (size_t j = 0; j < k; ++j) {
      if (tp[j]->kind == Term::Kind::Atom) {
        body = subst_atom(body, arg.binders[j], tp[j]->head);
        if (!tp[j]->head.empty() && tp[j]->head[0] == kFreshAtomPrefix)
          fresh_added.push_back({tp[j]->sort, tp[j]->head});
      } else {
        body = subst_atom(body, arg.binders[j], lift_term(cx.p, tp[j]));
      }
    }
    const Universe& uu = fresh_added.empty() ? u : cx.extend(fresh_added);
    TermSet set = denote_rec(cx, body, uu, env, fresh_depth + k);
    if (set.count(inst)) return true;
  }
  return false;
}

TermSet denote_lifted(OCtx& cx, const FormulaPtr& f, const Universe& u, const MuSets& env,
                      size_t fresh_depth) {
  TermSet out;
  const ConstructorDecl* c = cx.p.find_constructor(f->head);
  if (!c) return out;

  if (c->assoc) {
    TermSet a = denote_rec(cx, f->cargs[0].plain, u, env, fresh_depth);
    TermSet b = denote_rec(cx, f->cargs[1].plain, u, env, fresh_depth);
    for (const auto& x : a)
      for (const auto& y : b) {
        TermPtr t = canonicalize(cx.p, mk_apply(c->name, {x, y}));
        if (u.contains(t)) out.insert(t);
      }
    return out;
  }

  // one candidate list per declared argument
  struct Slot {
    std::vector<TermPtr> terms;            // plain and abstraction candidates
    std::vector<std::vector<TermPtr>> lists;  // variadic candidates
    bool is_list = false;
    bool needs_binder_test = false;
  };
  std::vector<Slot> slots(c->args.size());
  for (size_t i = 0; i < c->args.size(); ++i) {
    const ArgDescriptor& d = c->args[i];
    const FormulaArg& a = f->cargs[i];
    Slot& slot = slots[i];
    switch (d.kind) {
      case ArgDescriptor::Kind::Plain: {
        TermSet s = denote_rec(cx, a.plain, u, env, fresh_depth);
        slot.terms.assign(s.begin(), s.end());
        break;
      }
      case ArgDescriptor::Kind::Variadic: {
        slot.is_list = true;
        std::vector<std::vector<TermPtr>> acc = {{}};
        for (const auto& g : a.list) {
          TermSet s = denote_rec(cx, g, u, env, fresh_depth);
          std::vector<std::vector<TermPtr>> next;
          for (const auto& pre : acc)
            for (const auto& x : s) {
              auto cp = pre;
              cp.push_back(x);
              next.push_back(std::move(cp));
            }
          acc = std::move(next);
        }
        slot.lists = std::move(acc);
        break;
      }
      case ArgDescriptor::Kind::Abstraction: {
        if (a.kind == FormulaArg::Kind::Plain && is_abs_pseudo(a.plain->sort)) {
          if (!abs_screen_value(a.plain)) return out;  // nothing can satisfy it
          slot.terms = enumerate_abstractions(cx.p, d, u.gens, u.max_size);
        } else {
          slot.terms = enumerate_abstractions(cx.p, d, u.gens, u.max_size);
          slot.needs_binder_test = true;
        }
        break;
      }
    }
    if (!slot.is_list && slot.terms.empty()) return out;
    if (slot.is_list && slot.lists.empty()) return out;
  }

  // product of candidates: construct, land in the universe, then run the
  // binder tests against the constructed term
  DecompTuple tuple(c->args.size());
  std::function<void(size_t)> iter = [&](size_t i) {
    if (i == c->args.size()) {
      TermPtr t = compose(cx.p, *c, tuple);
      if (!u.contains(t)) return;
      if (out.count(t)) return;
      for (size_t j = 0; j < c->args.size(); ++j) {
        if (!slots[j].needs_binder_test) continue;
        if (!binder_holds(cx, t, tuple[j].term, f->cargs[j], c->args[j], u, env, fresh_depth))
          return;
      }
      out.insert(t);
      return;
    }
    if (slots[i].is_list) {
      for (const auto& lst : slots[i].lists) {
        tuple[i].is_list = true;
        tuple[i].list = lst;
        iter(i + 1);
      }
      return;
    }
    for (const auto& x : slots[i].terms) {
      tuple[i].is_list = false;
      tuple[i].term = x;
      iter(i + 1);
    }
  };
  iter(0);
  return out;
}

TermSet denote_rec(OCtx& cx, const FormulaPtr& f, const Universe& u, const MuSets& env,
                   size_t fresh_depth) {
  switch (f->kind) {
    case Formula::Kind::Top:
      return u.of(f->sort);
    case Formula::Kind::Bot:
      return {};
    case Formula::Kind::AtomLit: {
      TermSet out;
      TermPtr a = mk_atom(f->sort, f->head);
      if (u.contains(a)) out.insert(a);
      return out;
    }
    case Formula::Kind::And: {
      TermSet a = denote_rec(cx, f->kids[0], u, env, fresh_depth);
      TermSet b = denote_rec(cx, f->kids[1], u, env, fresh_depth);
      TermSet out;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                            std::inserter(out, out.begin()), TermLess{});
      return out;
    }
    case Formula::Kind::Or: {
      TermSet a = denote_rec(cx, f->kids[0], u, env, fresh_depth);
      TermSet b = denote_rec(cx, f->kids[1], u, env, fresh_depth);
      TermSet out;
      std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.begin()),
                     TermLess{});
      return out;
    }
    case Formula::Kind::Not: {
      TermSet a = denote_rec(cx, f->kids[0], u, env, fresh_depth);
      const TermSet& all = u.of(f->sort);
      TermSet out;
      std::set_difference(all.begin(), all.end(), a.begin(), a.end(),
                          std::inserter(out, out.begin()), TermLess{});
      return out;
    }
    case Formula::Kind::Var: {
      auto it = env.find(f->head);
      return it == env.end() ? TermSet{} : it->second;
    }
    case Formula::Kind::Mu: {
      TermSet d = u.of(f->sort);
      for (;;) {
        MuSets env2 = env;
        env2[f->head] = d;
        TermSet next = denote_rec(cx, f->kids[0], u, env2, fresh_depth);
        if (set_equal(next, d)) return d;
        d = std::move(next);
      }
    }
    case Formula::Kind::Lifted:
      return denote_lifted(cx, f, u, env, fresh_depth);
    case Formula::Kind::Modal: {
      TermSet uu = denote_rec(cx, f->kids[0], u, env, fresh_depth);
      TermSet vv = denote_rec(cx, f->kids[1], u, env, fresh_depth);
      TermSet out;
      auto goal = [&](const TermPtr& s) { return vv.count(s) ? Tri::True : Tri::False; };
      for (const auto& t : u.of(f->sort)) {
        for (const auto& w : uu) {
          TermPtr start = plug(cx.p, *f->ctx, {t, w});
          ReachResult r = reachable(cx.p, start, goal, cx.rw);
          if (r.status == SearchStatus::Truncated) cx.truncated = true;
          if (r.status == SearchStatus::Found) {
            out.insert(t);
            break;
          }
        }
      }
      return out;
    }
  }
  return {};
}

}  // namespace

OracleResult direct_denote(const Presentation& p, const FormulaPtr& f, const Universe& u,
                           const SearchBudget& rw_budget) {
  OCtx cx{p, u, rw_budget, false, {}};
  OracleResult res;
  res.members = denote_rec(cx, f, u, {}, 0);
  res.truncated = cx.truncated;
  return res;
}

// ---------- comparison ----------

bool CompareReport::agreed() const {
  if (!discrepancies.empty()) return false;
  for (const auto& e : unknowns)
    if (!e.oracle_truncated) return false;
  return true;
}

std::string CompareReport::text(const Presentation& p) const {
  std::ostringstream out;
  out << "checked " << checked << " term/formula pairs: " << discrepancies.size()
      << " discrepancies, " << unknowns.size() << " unknowns\n";
  for (const auto& d : discrepancies)
    out << "  MISMATCH " << pretty(p, d.term) << " : " << d.formula_label << " checker="
        << (d.checker == VerdictKind::True ? "true" : "false")
        << " oracle=" << (d.oracle_member ? "member" : "non-member") << "\n";
  for (const auto& e : unknowns)
    out << "  UNKNOWN " << pretty(p, e.term) << " : " << e.formula_label << " (" << e.reason
        << (e.oracle_truncated ? "; oracle truncated too" : "; oracle complete") << ")\n";
  return out.str();
}

CompareReport compare(const Presentation& p, const std::vector<NamedFormula>& formulae,
                      const GeneratorSet& gens, size_t max_size, const Budget& budget) {
  CompareReport report;
  Universe u = build_universe(p, gens, max_size);
  SearchBudget rw{budget.rewrite_depth, budget.explore_nodes};
  for (const auto& nf : formulae) {
    OracleResult oracle = direct_denote(p, nf.formula, u, rw);
    for (const auto& t : u.of(nf.formula->sort)) {
      report.checked++;
      Verdict v = check(p, t, nf.formula, budget);
      bool member = oracle.members.count(t) > 0;
      switch (v.kind) {
        case VerdictKind::True:
          if (!member) report.discrepancies.push_back({t, nf.name, v.kind, member});
          break;
        case VerdictKind::False:
          if (member) report.discrepancies.push_back({t, nf.name, v.kind, member});
          break;
        case VerdictKind::Unknown:
          report.unknowns.push_back({t, nf.name, v.unknown_reason, oracle.truncated});
          break;
      }
    }
  }
  return report;
}

}  // namespace sbl
