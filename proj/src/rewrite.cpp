#include "sbl/rewrite.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace sbl {

bool Binding::operator==(const Binding& o) const {
  if (is_list != o.is_list) return false;
  if (!is_list) return compare(term, o.term) == 0;
  if (list.size() != o.list.size()) return false;
  for (size_t i = 0; i < list.size(); ++i)
    if (compare(list[i], o.list[i]) != 0) return false;
  return true;
}

namespace {

std::string binding_key(const Binding& b) {
  if (!b.is_list) return term_key(b.term);
  std::string k = "[";
  for (const auto& t : b.list) k += term_key(t) + " ";
  return k + "]";
}

std::string subst_key(const Subst& s) {
  std::string k;
  for (const auto& [name, b] : s) k += name + "=" + binding_key(b) + ";";
  return k;
}

// Multiset/sequence view of a term at a flattened constructor.
std::vector<TermPtr> view_of(const ConstructorDecl& c, const TermPtr& t) {
  if (t->kind == Term::Kind::Flat && t->head == c.name) return t->args;
  if (!c.unit.empty() && t->kind == Term::Kind::Apply && t->head == c.unit && t->args.empty())
    return {};
  return {t};
}

using Cont = std::function<void(Subst&)>;

struct Matcher {
  const Presentation& p;

  void single(const TermPtr& pat, const TermPtr& t, Subst& th, const Cont& k) {
    switch (pat->kind) {
      case Term::Kind::Meta: {
        auto it = th.find(pat->head);
        if (it != th.end()) {
          if (!it->second.is_list && compare(it->second.term, t) == 0) k(th);
          return;
        }
        Binding b;
        b.term = t;
        th.emplace(pat->head, std::move(b));
        k(th);
        th.erase(pat->head);
        return;
      }
      case Term::Kind::Atom:
        if (t->kind == Term::Kind::Atom && t->head == pat->head && t->sort == pat->sort) k(th);
        return;
      case Term::Kind::Var:
        if (t->kind == Term::Kind::Var && t->index == pat->index &&
            t->position == pat->position)
          k(th);
        return;
      case Term::Kind::Abs:
        if (t->kind == Term::Kind::Abs && t->bound == pat->bound)
          single(pat->args[0], t->args[0], th, k);
        return;
      case Term::Kind::Apply:
        apply_node(pat, t, th, k);
        return;
      case Term::Kind::Flat:
        flat_node(pat, t, th, false, nullptr, k);
        return;
      default:
        return;  // MetaApp/Splice/Hole never occur on a matching side
    }
  }

  // Free-constructor application; the argument region may hold one sequence
  // metavariable, which captures the run the fixed elements leave over.
  void apply_node(const TermPtr& pat, const TermPtr& t, Subst& th, const Cont& k) {
    if (t->kind != Term::Kind::Apply || t->head != pat->head) return;
    seq_region(pat->args, 0, t->args, 0, t->args.size(), th, k);
  }

  // Matches pattern elements pi.. against view[lo..hi): plain elements one-
  // to-one, a sequence metavariable takes the middle run.
  void seq_region(const std::vector<TermPtr>& pats, size_t pi, const std::vector<TermPtr>& view,
                  size_t lo, size_t hi, Subst& th, const Cont& k) {
    if (pi == pats.size()) {
      if (lo == hi) k(th);
      return;
    }
    const TermPtr& pe = pats[pi];
    if (pe->kind == Term::Kind::Meta && pe->seq) {
      size_t after = pats.size() - pi - 1;  // remaining fixed elements
      if (hi - lo < after) return;
      size_t take = hi - lo - after;
      auto it = th.find(pe->head);
      if (it != th.end()) {
        if (!it->second.is_list || it->second.list.size() != take) return;
        for (size_t i = 0; i < take; ++i)
          if (compare(it->second.list[i], view[lo + i]) != 0) return;
        seq_region(pats, pi + 1, view, lo + take, hi, th, k);
        return;
      }
      Binding b;
      b.is_list = true;
      for (size_t i = 0; i < take; ++i) b.list.push_back(view[lo + i]);
      th.emplace(pe->head, std::move(b));
      seq_region(pats, pi + 1, view, lo + take, hi, th, k);
      th.erase(pe->head);
      return;
    }
    if (lo == hi) return;
    single(pe, view[lo], th, [&](Subst& th2) { seq_region(pats, pi + 1, view, lo + 1, hi, th2, k); });
  }

  // Pattern over a flattened constructor. At the root of a rule (`root`
  // true) the unselected remainder is preserved implicitly; nested
  // occurrences must cover the whole view. `sel_out`, when set, receives the
  // matched element indices.
  void flat_node(const TermPtr& pat, const TermPtr& t, Subst& th, bool root,
                 std::vector<int>* sel_out, const Cont& k) {
    const ConstructorDecl* c = p.find_constructor(pat->head);
    if (!c) return;
    // sort guard: the subject must live at the constructor's sort
    std::string ts;
    try {
      ts = sort_of(p, t);
    } catch (const SortError&) {
      return;
    }
    if (ts != c->result) return;
    auto view = view_of(*c, t);

    std::vector<TermPtr> singles;
    const Term* rest = nullptr;
    for (const auto& e : pat->args) {
      if (e->kind == Term::Kind::Meta && e->seq) rest = e.get();
      else singles.push_back(e);
    }

    if (!c->comm) {
      ordered_flat(*c, singles, rest, view, th, root, sel_out, k);
      return;
    }

    // assoc-comm: assign each single pattern to a distinct view element
    size_t n = view.size();
    if (singles.size() > n) return;
    std::vector<int> chosen;
    std::vector<bool> used(n, false);
    std::set<std::string> emitted;
    std::function<void(size_t)> assign = [&](size_t si) {
      if (si == singles.size()) {
        if (!root && !rest && chosen.size() != n) return;
        std::vector<TermPtr> leftover;
        for (size_t i = 0; i < n; ++i)
          if (!used[i]) leftover.push_back(view[i]);
        bool bound_rest = false;
        if (rest) {
          auto it = th.find(rest->head);
          if (it != th.end()) {
            Binding want;
            want.is_list = true;
            want.list = leftover;
            if (!(it->second == want)) return;
          } else {
            Binding b;
            b.is_list = true;
            b.list = leftover;
            th.emplace(rest->head, std::move(b));
            bound_rest = true;
          }
        }
        std::vector<int> sel = chosen;
        std::sort(sel.begin(), sel.end());
        std::string key = subst_key(th);
        for (int i : sel) key += "," + std::to_string(i);
        if (emitted.insert(key).second) {
          if (sel_out) *sel_out = sel;
          k(th);
        }
        if (bound_rest) th.erase(rest->head);
        return;
      }
      for (size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        used[i] = true;
        chosen.push_back(static_cast<int>(i));
        single(singles[si], view[i], th, [&](Subst&) { assign(si + 1); });
        chosen.pop_back();
        used[i] = false;
      }
    };
    assign(0);
  }

  // assoc (ordered): non-meta elements match one view element each,
  // metavariable elements match nonempty runs (bound as rebuilt segments).
  void ordered_flat(const ConstructorDecl& c, const std::vector<TermPtr>& singles,
                    const Term* rest, const std::vector<TermPtr>& view, Subst& th, bool root,
                    std::vector<int>* sel_out, const Cont& k) {
    if (rest) return;  // explicit rest is an assoc-comm feature
    size_t n = view.size();
    auto rebuild_run = [&](size_t lo, size_t hi) -> TermPtr {
      if (hi - lo == 1) return view[lo];
      std::vector<TermPtr> elems(view.begin() + static_cast<long>(lo),
                                 view.begin() + static_cast<long>(hi));
      return mk_flat(c.name, std::move(elems));
    };
    std::function<void(size_t, size_t, size_t)> seg = [&](size_t si, size_t start, size_t pos) {
      if (si == singles.size()) {
        if (!root && (start != 0 || pos != n)) return;
        if (sel_out) {
          sel_out->clear();
          for (size_t i = start; i < pos; ++i) sel_out->push_back(static_cast<int>(i));
        }
        k(th);
        return;
      }
      const TermPtr& pe = singles[si];
      if (pe->kind == Term::Kind::Meta) {
        for (size_t take = 1; pos + take <= n; ++take) {
          TermPtr run = rebuild_run(pos, pos + take);
          auto it = th.find(pe->head);
          if (it != th.end()) {
            if (!it->second.is_list && compare(it->second.term, run) == 0)
              seg(si + 1, start, pos + take);
            continue;
          }
          Binding b;
          b.term = run;
          th.emplace(pe->head, std::move(b));
          seg(si + 1, start, pos + take);
          th.erase(pe->head);
        }
        return;
      }
      if (pos >= n) return;
      single(pe, view[pos], th, [&](Subst&) { seg(si + 1, start, pos + 1); });
    };
    size_t max_start = root ? (n >= singles.size() ? n - std::min(n, singles.size()) : 0) : 0;
    for (size_t start = 0; start <= max_start; ++start) {
      seg(0, start, start);
      if (!root) break;
    }
  }
};

}  // namespace

std::vector<Match> match(const Presentation& p, const TermPtr& pattern, const TermPtr& t) {
  std::vector<Match> out;
  std::set<std::string> seen;
  Matcher m{p};
  Subst th;
  auto emit = [&](const Subst& s, std::vector<int> sel) {
    std::string key = subst_key(s);
    for (int i : sel) key += "," + std::to_string(i);
    if (seen.insert(key).second) out.push_back({s, std::move(sel)});
  };
  if (pattern->kind == Term::Kind::Flat) {
    std::vector<int> sel;
    m.flat_node(pattern, t, th, true, &sel, [&](Subst& s) { emit(s, sel); });
  } else {
    m.single(pattern, t, th, [&](Subst& s) { emit(s, {}); });
  }
  return out;
}

// ---------- substitution application ----------

namespace {

void collect_metas(const TermPtr& t, std::set<std::string>& out) {
  if (t->kind == Term::Kind::Meta || t->kind == Term::Kind::MetaApp) out.insert(t->head);
  for (const auto& a : t->args) collect_metas(a, out);
}

TermPtr apply_rec(const Presentation& p, const TermPtr& pat, const Subst& s);

// Expands one argument slot: splices and sequence metavariables produce runs.
bool expand_into(const Presentation& p, const TermPtr& pat, const Subst& s,
                 std::vector<TermPtr>& out) {
  if (pat->kind == Term::Kind::Meta && pat->seq) {
    auto it = s.find(pat->head);
    if (it == s.end() || !it->second.is_list) return false;
    for (const auto& t : it->second.list) out.push_back(t);
    return true;
  }
  if (pat->kind == Term::Kind::Splice) {
    // the template maps elementwise over its list-bound metavariables
    const TermPtr& tmpl = pat->args[0];
    std::set<std::string> metas;
    collect_metas(tmpl, metas);
    std::vector<std::string> mapped;
    size_t len = 0;
    for (const auto& name : metas) {
      auto it = s.find(name);
      if (it == s.end()) return false;
      if (!it->second.is_list) continue;
      if (!mapped.empty() && it->second.list.size() != len) return false;
      len = it->second.list.size();
      mapped.push_back(name);
    }
    if (mapped.empty()) return false;
    for (size_t i = 0; i < len; ++i) {
      Subst si = s;
      for (const auto& name : mapped) {
        Binding b;
        b.term = s.at(name).list[i];
        si[name] = std::move(b);
      }
      TermPtr inst = apply_rec(p, tmpl, si);
      if (!inst) return false;
      out.push_back(inst);
    }
    return true;
  }
  TermPtr one = apply_rec(p, pat, s);
  if (!one) return false;
  out.push_back(one);
  return true;
}

TermPtr apply_rec(const Presentation& p, const TermPtr& pat, const Subst& s) {
  switch (pat->kind) {
    case Term::Kind::Meta: {
      auto it = s.find(pat->head);
      if (it == s.end() || it->second.is_list) return nullptr;
      return it->second.term;
    }
    case Term::Kind::MetaApp: {
      auto it = s.find(pat->head);
      if (it == s.end() || it->second.is_list) return nullptr;
      TermPtr abs = it->second.term;
      if (abs->kind != Term::Kind::Abs) return nullptr;
      std::vector<TermPtr> values;
      for (const auto& a : pat->args)
        if (!expand_into(p, a, s, values)) return nullptr;
      if (static_cast<size_t>(abs->bound) != values.size()) return nullptr;
      return instantiate(p, abs, values);
    }
    case Term::Kind::Apply:
    case Term::Kind::Flat: {
      std::vector<TermPtr> args;
      for (const auto& a : pat->args)
        if (!expand_into(p, a, s, args)) return nullptr;
      Term copy = *pat;
      copy.args = std::move(args);
      return std::make_shared<const Term>(std::move(copy));
    }
    case Term::Kind::Abs: {
      TermPtr body = apply_rec(p, pat->args[0], s);
      if (!body) return nullptr;
      return mk_abs(pat->bound, body);
    }
    default:
      return pat;
  }
}

}  // namespace

TermPtr apply_subst(const Presentation& p, const TermPtr& pattern, const Subst& s) {
  return apply_rec(p, pattern, s);
}

// ---------- rule application, step, replay ----------

namespace {

TermPtr rebuild_at(const TermPtr& t, const Path& path, size_t depth, const TermPtr& repl) {
  if (depth == path.size()) return repl;
  int idx = path[depth];
  if (idx < 0 || static_cast<size_t>(idx) >= t->args.size())
    throw ReplayError("path goes through a missing child");
  Term copy = *t;
  copy.args[static_cast<size_t>(idx)] = rebuild_at(t->args[static_cast<size_t>(idx)], path,
                                                   depth + 1, repl);
  return std::make_shared<const Term>(std::move(copy));
}

const TermPtr* node_at(const TermPtr& t, const Path& path) {
  const TermPtr* cur = &t;
  for (int idx : path) {
    if (idx < 0 || static_cast<size_t>(idx) >= (*cur)->args.size()) return nullptr;
    cur = &(*cur)->args[static_cast<size_t>(idx)];
  }
  return cur;
}

bool lhs_has_rest(const TermPtr& lhs) {
  if (lhs->kind != Term::Kind::Flat) return false;
  for (const auto& e : lhs->args)
    if (e->kind == Term::Kind::Meta && e->seq) return true;
  return false;
}

// Rewrites `node` with one match of the rule; returns null when the rhs does
// not apply (e.g. an abstraction arity mismatch).
TermPtr rewrite_node(const Presentation& p, const RewriteRuleDecl& r, const TermPtr& node,
                     const Match& m) {
  TermPtr replaced = apply_subst(p, r.rhs, m.subst);
  if (!replaced) return nullptr;
  if (r.lhs->kind == Term::Kind::Flat) {
    const ConstructorDecl* c = p.find_constructor(r.lhs->head);
    if (!c) return nullptr;
    auto view = view_of(*c, node);
    std::set<int> sel(m.selection.begin(), m.selection.end());
    std::vector<TermPtr> elems = view_of(*c, replaced);
    if (!lhs_has_rest(r.lhs)) {
      for (size_t i = 0; i < view.size(); ++i)
        if (!sel.count(static_cast<int>(i))) elems.push_back(view[i]);
    }
    if (elems.empty() && c->unit.empty()) return nullptr;
    if (elems.empty()) return mk_apply(c->unit, {});
    if (elems.size() == 1) return elems[0];
    return mk_flat(c->name, std::move(elems));
  }
  return replaced;
}

void positions_rec(const TermPtr& t, Path& path, std::vector<std::pair<Path, TermPtr>>& out) {
  out.push_back({path, t});
  for (size_t i = 0; i < t->args.size(); ++i) {
    path.push_back(static_cast<int>(i));
    positions_rec(t->args[i], path, out);
    path.pop_back();
  }
}

std::string step_key(const TraceStep& s) {
  std::string k = s.rule + "@";
  for (int i : s.path) k += std::to_string(i) + ".";
  k += "|";
  for (int i : s.selection) k += std::to_string(i) + ",";
  return k + "|" + subst_key(s.subst);
}

}  // namespace

std::vector<Successor> step(const Presentation& p, const TermPtr& t) {
  std::vector<Successor> out;
  std::set<std::string> seen;
  std::vector<std::pair<Path, TermPtr>> positions;
  Path root;
  positions_rec(t, root, positions);
  for (const auto& [path, node] : positions) {
    for (const auto& r : p.rules) {
      for (const auto& m : match(p, r.lhs, node)) {
        TermPtr replaced = rewrite_node(p, r, node, m);
        if (!replaced) continue;
        TermPtr target = canonicalize(p, rebuild_at(t, path, 0, replaced));
        TraceStep s{r.name, path, m.selection, m.subst};
        std::string key = term_key(target) + "\x1f" + step_key(s);
        if (seen.insert(key).second) out.push_back({target, std::move(s)});
      }
    }
  }
  return out;
}

TermPtr apply_step(const Presentation& p, const TermPtr& t, const TraceStep& s) {
  const RewriteRuleDecl* r = p.find_rule(s.rule);
  if (!r) throw ReplayError("unknown rule `" + s.rule + "`");
  const TermPtr* node = node_at(t, s.path);
  if (!node) throw ReplayError("stale position in trace step");
  for (const auto& m : match(p, r->lhs, *node)) {
    if (!(m.selection == s.selection)) continue;
    bool same = m.subst.size() == s.subst.size();
    for (auto it = m.subst.begin(); same && it != m.subst.end(); ++it) {
      auto jt = s.subst.find(it->first);
      same = jt != s.subst.end() && it->second == jt->second;
    }
    if (!same) continue;
    TermPtr replaced = rewrite_node(p, *r, *node, m);
    if (!replaced) throw ReplayError("recorded step no longer applies");
    return canonicalize(p, rebuild_at(t, s.path, 0, replaced));
  }
  throw ReplayError("no match reproduces the recorded step");
}

TermPtr replay(const Presentation& p, const TermPtr& source,
               const std::vector<TraceStep>& steps) {
  TermPtr cur = source;
  for (const auto& s : steps) cur = apply_step(p, cur, s);
  return cur;
}

// ---------- search ----------

ReachResult reachable(const Presentation& p, const TermPtr& start,
                      const std::function<Tri(const TermPtr&)>& goal,
                      const SearchBudget& budget) {
  ReachResult res;
  struct Edge {
    std::string parent;
    TraceStep step;
  };
  std::unordered_map<std::string, Edge> parents;
  std::unordered_map<std::string, TermPtr> terms;
  std::deque<std::pair<std::string, size_t>> queue;

  auto build_trace = [&](const std::string& key) {
    Trace tr;
    std::vector<TraceStep> rev;
    std::string cur = key;
    while (true) {
      auto it = parents.find(cur);
      if (it == parents.end() || it->second.parent.empty()) break;
      rev.push_back(it->second.step);
      cur = it->second.parent;
    }
    std::reverse(rev.begin(), rev.end());
    tr.source = start;
    tr.steps = std::move(rev);
    tr.target = terms.at(key);
    return tr;
  };

  std::string start_key = term_key(start);
  terms[start_key] = start;
  parents[start_key] = {"", {}};
  res.explored = 1;
  Tri g = goal(start);
  if (g == Tri::True) {
    res.status = SearchStatus::Found;
    res.trace = build_trace(start_key);
    return res;
  }
  if (g == Tri::Unknown) res.goal_unknown = true;
  queue.push_back({start_key, 0});

  bool truncated = false;
  while (!queue.empty()) {
    auto [key, depth] = queue.front();
    queue.pop_front();
    TermPtr cur = terms.at(key);
    auto succs = step(p, cur);
    if (depth >= budget.depth) {
      for (const auto& s : succs)
        if (!parents.count(term_key(s.term))) truncated = true;
      continue;
    }
    for (const auto& s : succs) {
      std::string skey = term_key(s.term);
      if (parents.count(skey)) continue;
      if (res.explored >= budget.nodes) {
        truncated = true;
        break;
      }
      parents[skey] = {key, s.step};
      terms[skey] = s.term;
      res.explored++;
      Tri sg = goal(s.term);
      if (sg == Tri::True) {
        res.status = SearchStatus::Found;
        res.trace = build_trace(skey);
        return res;
      }
      if (sg == Tri::Unknown) res.goal_unknown = true;
      queue.push_back({skey, depth + 1});
    }
    if (truncated) break;
  }
  res.status = truncated ? SearchStatus::Truncated : SearchStatus::Exhausted;
  return res;
}

// ---------- normalization ----------

namespace {

// First redex in post-order (leftmost-innermost), with its rule and match.
bool first_redex(const Presentation& p, const TermPtr& t, Path& path,
                 const RewriteRuleDecl** rule, Match* m) {
  for (size_t i = 0; i < t->args.size(); ++i) {
    path.push_back(static_cast<int>(i));
    if (first_redex(p, t->args[i], path, rule, m)) return true;
    path.pop_back();
  }
  for (const auto& r : p.rules) {
    auto ms = match(p, r.lhs, t);
    if (!ms.empty()) {
      *rule = &r;
      *m = ms.front();
      return true;
    }
  }
  return false;
}

}  // namespace

NormalizeResult normalize(const Presentation& p, const TermPtr& t, const SearchBudget& budget) {
  NormalizeResult res;
  res.term = t;
  for (size_t n = 0; n < budget.depth; ++n) {
    Path path;
    const RewriteRuleDecl* rule = nullptr;
    Match m;
    if (!first_redex(p, res.term, path, &rule, &m)) return res;
    const TermPtr* node = node_at(res.term, path);
    TermPtr replaced = rewrite_node(p, *rule, *node, m);
    if (!replaced) return res;  // arity-blocked rhs: treat as no redex
    res.steps.push_back({rule->name, path, m.selection, m.subst});
    res.term = canonicalize(p, rebuild_at(res.term, path, 0, replaced));
  }
  Path path;
  const RewriteRuleDecl* rule = nullptr;
  Match m;
  if (first_redex(p, res.term, path, &rule, &m)) res.exhausted = true;
  return res;
}

// ---------- trace rendering ----------

std::string TraceStep::text(const Presentation& p) const {
  std::string out = rule + "@/";
  for (size_t i = 0; i < path.size(); ++i) {
    if (i) out += "/";
    out += std::to_string(path[i]);
  }
  if (!selection.empty()) {
    out += " [";
    for (size_t i = 0; i < selection.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(selection[i]);
    }
    out += "]";
  }
  out += " {";
  bool first = true;
  for (const auto& [name, b] : subst) {
    if (!first) out += ", ";
    first = false;
    out += name + "=";
    if (b.is_list) {
      out += "[";
      for (size_t i = 0; i < b.list.size(); ++i) {
        if (i) out += ", ";
        out += pretty(p, b.list[i]);
      }
      out += "]";
    } else {
      out += pretty(p, b.term);
    }
  }
  out += "}";
  return out;
}

std::string trace_text(const Presentation& p, const Trace& tr) {
  std::ostringstream out;
  out << pretty(p, tr.source) << "\n";
  for (const auto& s : tr.steps) out << "  " << s.text(p) << "\n";
  out << "=> " << pretty(p, tr.target) << "\n";
  return out.str();
}

}  // namespace sbl
