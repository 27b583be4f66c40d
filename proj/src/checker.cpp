#include "sbl/checker.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

namespace sbl {

Verdict kleene_not(Verdict v) {
  switch (v.kind) {
    case VerdictKind::True: return Verdict::no();
    case VerdictKind::False: return Verdict::yes();
    default: return v;
  }
}

Verdict kleene_and(Verdict a, Verdict b) {
  if (a.is_false()) return a;
  if (b.is_false()) return b;
  if (a.is_unknown()) return a;
  if (b.is_unknown()) return b;
  if (b.witness && !a.witness) return b;
  return a;
}

Verdict kleene_or(Verdict a, Verdict b) {
  if (a.is_true()) return a;
  if (b.is_true()) return b;
  if (a.is_unknown()) return a;
  if (b.is_unknown()) return b;
  return a;
}

namespace {

struct MuFrame {
  FormulaPtr body;
  std::set<std::string> assumptions;  // term keys already being established
};
using MuEnv = std::map<std::string, MuFrame>;

struct CheckCtx {
  const Presentation& p;
  const Budget& budget;
  CheckStats& stats;
};

Verdict check_rec(CheckCtx& cx, const TermPtr& t, const FormulaPtr& f, MuEnv env,
                  size_t fresh_depth);

// Boolean screens over abstraction values (top/bot combinations) are
// constant: every abstraction satisfies top and none satisfies bot.
Verdict eval_abs_screen(const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::Top: return Verdict::yes();
    case Formula::Kind::Bot: return Verdict::no();
    case Formula::Kind::Not: return kleene_not(eval_abs_screen(f->kids[0]));
    case Formula::Kind::And:
      return kleene_and(eval_abs_screen(f->kids[0]), eval_abs_screen(f->kids[1]));
    case Formula::Kind::Or:
      return kleene_or(eval_abs_screen(f->kids[0]), eval_abs_screen(f->kids[1]));
    default: return Verdict::unknown("unrecognized abstraction screen");
  }
}

Verdict check_lifted(CheckCtx& cx, const TermPtr& t, const FormulaPtr& f, const MuEnv& env,
                     size_t fresh_depth);

Verdict enter_mu(CheckCtx& cx, const std::string& var, const TermPtr& t, MuEnv env,
                 size_t fresh_depth) {
  auto it = env.find(var);
  if (it == env.end()) return Verdict::unknown("unbound fixed-point variable " + var);
  std::string key = term_key(t);
  if (it->second.assumptions.count(key)) return Verdict::yes();  // coinduction
  if (cx.stats.unfoldings >= cx.budget.unfold_guard)
    return Verdict::unknown("unfold guard exhausted");
  cx.stats.unfoldings++;
  it->second.assumptions.insert(key);
  return check_rec(cx, t, it->second.body, env, fresh_depth);
}

Verdict check_rec(CheckCtx& cx, const TermPtr& t, const FormulaPtr& f, MuEnv env,
                  size_t fresh_depth) {
  switch (f->kind) {
    case Formula::Kind::Top: return Verdict::yes();
    case Formula::Kind::Bot: return Verdict::no();
    case Formula::Kind::AtomLit:
      return (t->kind == Term::Kind::Atom && t->head == f->head && t->sort == f->sort)
                 ? Verdict::yes()
                 : Verdict::no();
    case Formula::Kind::Not:
      return kleene_not(check_rec(cx, t, f->kids[0], env, fresh_depth));
    case Formula::Kind::And: {
      Verdict a = check_rec(cx, t, f->kids[0], env, fresh_depth);
      if (a.is_false()) return a;
      return kleene_and(a, check_rec(cx, t, f->kids[1], env, fresh_depth));
    }
    case Formula::Kind::Or: {
      Verdict a = check_rec(cx, t, f->kids[0], env, fresh_depth);
      if (a.is_true()) return a;
      return kleene_or(a, check_rec(cx, t, f->kids[1], env, fresh_depth));
    }
    case Formula::Kind::Mu: {
      MuFrame frame;
      frame.body = f->kids[0];
      env[f->head] = std::move(frame);
      return enter_mu(cx, f->head, t, env, fresh_depth);
    }
    case Formula::Kind::Var:
      return enter_mu(cx, f->head, t, env, fresh_depth);
    case Formula::Kind::Lifted:
      return check_lifted(cx, t, f, env, fresh_depth);
    case Formula::Kind::Modal: {
      const FormulaPtr& u = f->kids[0];
      const FormulaPtr& v = f->kids[1];
      const std::string& u_sort = f->ctx->hole_sorts[1];
      auto bound = denotation_size_bound(cx.p, u);
      bool complete = bound && *bound <= cx.budget.witness_size;
      size_t cap = bound ? std::min(*bound, cx.budget.witness_size) : cx.budget.witness_size;

      GeneratorSet gens;
      collect_atoms(t, gens);
      collect_atoms(u, gens);
      collect_atoms(v, gens);

      bool any_unknown = !complete;
      std::string reason = complete ? "" : "witness enumeration truncated";
      if (cap > 0) {
        for (const auto& w : enumerate_terms(cx.p, u_sort, gens, cap)) {
          cx.stats.witnesses_tried++;
          Verdict uv = check_rec(cx, w, u, env, fresh_depth);
          if (uv.is_false()) continue;
          TermPtr start = plug(cx.p, *f->ctx, {t, w});
          auto goal = [&](const TermPtr& s) {
            Verdict g = check_rec(cx, s, v, env, fresh_depth);
            if (g.is_true()) return Tri::True;
            return g.is_false() ? Tri::False : Tri::Unknown;
          };
          ReachResult r = reachable(cx.p, start, goal,
                                    {cx.budget.rewrite_depth, cx.budget.explore_nodes});
          cx.stats.states_explored += r.explored;
          if (r.trace) cx.stats.rewrite_steps += r.trace->length();
          if (r.status == SearchStatus::Found) {
            if (uv.is_true()) {
              Witness wit;
              wit.terms = {w};
              wit.trace = r.trace;
              return Verdict::yes(std::move(wit));
            }
            any_unknown = true;  // the witness itself was uncertain
            reason = "witness satisfaction uncertain";
            continue;
          }
          if (r.status == SearchStatus::Truncated) {
            any_unknown = true;
            reason = "reachability budget exhausted";
          } else if (r.goal_unknown) {
            any_unknown = true;
            reason = "goal verdicts uncertain";
          }
        }
      }
      return any_unknown ? Verdict::unknown(reason) : Verdict::no();
    }
  }
  return Verdict::unknown("unhandled formula");
}

Verdict check_lifted(CheckCtx& cx, const TermPtr& t, const FormulaPtr& f, const MuEnv& env,
                     size_t fresh_depth) {
  const ConstructorDecl* c = cx.p.find_constructor(f->head);
  if (!c) return Verdict::no();
  auto tuples = decompose(cx.p, t, *c);
  bool any_unknown = false;
  std::string reason;
  for (const auto& tuple : tuples) {
    Verdict all = Verdict::yes();
    std::vector<TermPtr> witness_terms;
    size_t nargs = c->assoc ? 2 : c->args.size();
    for (size_t i = 0; i < nargs && !all.is_false(); ++i) {
      const FormulaArg& a = f->cargs[i];
      const DecompArg& d = tuple[i];
      Verdict v;
      switch (a.kind) {
        case FormulaArg::Kind::Plain: {
          if (a.plain->sort.rfind("bind ", 0) == 0) {
            v = eval_abs_screen(a.plain);
          } else {
            v = check_rec(cx, d.term, a.plain, env, fresh_depth);
          }
          break;
        }
        case FormulaArg::Kind::VariadicList: {
          if (!d.is_list || d.list.size() != a.list.size()) {
            v = Verdict::no();
            break;
          }
          v = Verdict::yes();
          for (size_t j = 0; j < a.list.size() && !v.is_false(); ++j)
            v = kleene_and(v, check_rec(cx, d.list[j], a.list[j], env, fresh_depth));
          break;
        }
        case FormulaArg::Kind::Binder: {
          const TermPtr& q = d.term;
          if (q->kind != Term::Kind::Abs ||
              static_cast<size_t>(q->bound) != a.binders.size()) {
            v = Verdict::no();
            break;
          }
          const ArgDescriptor& desc = c->args[i];
          size_t k = a.binders.size();
          std::vector<std::vector<TermPtr>> cand_tuples;
          {
            std::vector<TermPtr> fresh;
            for (size_t j = 0; j < k; ++j)
              fresh.push_back(mk_atom(desc.sort, fresh_atom_name(fresh_depth + j)));
            cand_tuples.push_back(std::move(fresh));
          }
          if (!a.generic && k > 0) {
            // "when it receives that message": names already in flight
            auto singles = binder_candidates(cx.p, t, desc.sort);
            if (k == 1) {
              for (const auto& cnd : singles) cand_tuples.push_back({cnd});
            } else {
              // k-fold product, fresh-mixed tuples omitted
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
              for (auto& tp : acc) cand_tuples.push_back(std::move(tp));
            }
          }
          v = Verdict::no();
          for (const auto& tp : cand_tuples) {
            TermPtr inst = instantiate(cx.p, q, tp);
            FormulaPtr body = a.plain;
            for (size_t j = 0; j < k; ++j) {
              if (tp[j]->kind == Term::Kind::Atom)
                body = subst_atom(body, a.binders[j], tp[j]->head);
              else
                body = subst_atom(body, a.binders[j], lift_term(cx.p, tp[j]));
            }
            Verdict bv = check_rec(cx, inst, body, env, fresh_depth + k);
            if (bv.is_true()) {
              v = bv;
              break;
            }
            if (bv.is_unknown()) v = kleene_or(v, bv);
          }
          break;
        }
      }
      if (!d.is_list && d.term) witness_terms.push_back(d.term);
      all = kleene_and(all, v);
    }
    if (all.is_true()) {
      Witness wit;
      wit.terms = std::move(witness_terms);
      return Verdict::yes(std::move(wit));
    }
    if (all.is_unknown()) {
      any_unknown = true;
      reason = all.unknown_reason;
    }
  }
  return any_unknown ? Verdict::unknown(reason) : Verdict::no();
}

}  // namespace

Verdict check(const Presentation& p, const TermPtr& t, const FormulaPtr& f,
              const Budget& budget, CheckStats* stats) {
  if (!budget.valid()) throw ArityError("budgets must be positive");
  CheckStats local;
  CheckCtx cx{p, budget, stats ? *stats : local};
  TermPtr ct = canonicalize(p, t);
  std::string s = sort_of(p, ct);
  if (s != f->sort)
    throw SortError("term has sort " + s + " but the formula lives at " + f->sort);
  return check_rec(cx, ct, f, {}, 0);
}

CorpusReport check_corpus(const Presentation& p, const std::vector<CorpusEntry>& pairs,
                          const Budget& budget) {
  CorpusReport report;
  for (const auto& e : pairs) {
    CorpusRow row;
    row.label = e.label;
    auto t0 = std::chrono::steady_clock::now();
    row.verdict = check(p, e.term, e.formula, budget, &row.stats);
    auto t1 = std::chrono::steady_clock::now();
    row.millis = std::chrono::duration<double, std::milli>(t1 - t0).count();
    if (row.verdict.is_unknown()) report.unknowns++;
    report.rows.push_back(std::move(row));
  }
  return report;
}

Denotation denote(const Presentation& p, const FormulaPtr& f, const GeneratorSet& gens,
                  size_t max_size, const Budget& budget) {
  Denotation d;
  for (const auto& t : enumerate_terms(p, f->sort, gens, max_size)) {
    Verdict v = check(p, t, f, budget);
    if (v.is_true()) d.members.push_back(t);
    if (v.is_unknown()) d.complete = false;
  }
  return d;
}

}  // namespace sbl
