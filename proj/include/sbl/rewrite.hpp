#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbl/term.hpp"

namespace sbl {

// A metavariable binding: one term, or a term sequence for `$xs ...`.
struct Binding {
  bool is_list = false;
  TermPtr term;
  std::vector<TermPtr> list;

  bool operator==(const Binding& o) const;
};
using Subst = std::map<std::string, Binding>;

// One match of a pattern against a term. For patterns over flattened
// constructors, `selection` names the matched element indices (in canonical
// order); the unselected remainder is preserved by rule application unless
// the pattern captured it in an explicit sequence metavariable.
struct Match {
  Subst subst;
  std::vector<int> selection;
};

// All ways the pattern matches the canonical term at its root. Matching is
// selection-based: pattern elements of a flattened constructor are assigned
// to distinct elements of the subject (a contiguous segment for assoc, any
// sub-multiset for assoc-comm); unit elements are never invented. Nonlinear
// metavariables are matched by structural equality. Deterministic order;
// duplicate substitutions over permutations of equal elements are collapsed.
std::vector<Match> match(const Presentation& p, const TermPtr& pattern, const TermPtr& t);

// Instantiates a pattern under a substitution (pattern rhs side: expands
// splices and applies MetaApp abstraction applications). Not canonicalized.
// Returns null when a MetaApp arity does not fit its abstraction.
TermPtr apply_subst(const Presentation& p, const TermPtr& pattern, const Subst& s);

// Path from the root: child indices (Flat children are element indices,
// Abs child 0 is the body).
using Path = std::vector<int>;

struct TraceStep {
  std::string rule;
  Path path;
  std::vector<int> selection;  // Flat element selection, empty otherwise
  Subst subst;

  std::string text(const Presentation& p) const;  // rule@path [sel] {var=term,...}
};

struct Trace {
  TermPtr source;
  std::vector<TraceStep> steps;
  TermPtr target;

  size_t length() const { return steps.size(); }
};

struct Successor {
  TermPtr term;  // canonical
  TraceStep step;
};

// All one-step successors of a canonical term: every rule, every position
// (including under binders), every match; canonicalized and deduplicated by
// (target, step). Deterministic order.
std::vector<Successor> step(const Presentation& p, const TermPtr& t);

struct SearchBudget {
  size_t depth = 64;     // maximum rewrite steps along a path
  size_t nodes = 10000;  // maximum distinct states explored
};

enum class SearchStatus { Found, Exhausted, Truncated };

// Three-valued goal for searches; see checker.hpp for the Kleene reading.
enum class Tri { False, True, Unknown };

struct ReachResult {
  SearchStatus status = SearchStatus::Exhausted;
  std::optional<Trace> trace;   // set when status == Found
  bool goal_unknown = false;    // some explored state had an Unknown goal verdict
  size_t explored = 0;
};

// Breadth-first search over canonical forms from `start`, visited-set pruned.
// Found: some state satisfied the goal (with the witnessing trace).
// Exhausted: the reachable set was fully explored and no state satisfied it.
// Truncated: a budget bound cut the search off.
ReachResult reachable(const Presentation& p, const TermPtr& start,
                      const std::function<Tri(const TermPtr&)>& goal,
                      const SearchBudget& budget);

struct NormalizeResult {
  TermPtr term;       // normal form, or the last term seen when exhausted
  bool exhausted = false;
  std::vector<TraceStep> steps;
};

// Applies the first rule at the leftmost-innermost redex until no rule
// applies, recording the trace. Stops after budget.depth steps.
NormalizeResult normalize(const Presentation& p, const TermPtr& t, const SearchBudget& budget);

// Replays recorded steps from `source`; throws ReplayError when a step no
// longer applies as recorded.
TermPtr replay(const Presentation& p, const TermPtr& source, const std::vector<TraceStep>& steps);

// Applies one recorded step; the building block of replay and step().
TermPtr apply_step(const Presentation& p, const TermPtr& t, const TraceStep& s);

std::string trace_text(const Presentation& p, const Trace& tr);

}  // namespace sbl
