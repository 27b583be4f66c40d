#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sbl/signature.hpp"

namespace sbl {

// One node of a term tree. Terms double as rewrite patterns (Meta, MetaApp,
// Splice nodes) and as contexts (Hole nodes); plain well-sorted terms never
// contain those kinds. Terms are immutable and freely shared.
//
// Canonical forms: arguments of `assoc` constructors are flattened into Flat
// nodes (sorted when the constructor is also commutative), unit elements are
// dropped, and every oriented structural equation is applied to fixpoint.
struct Term {
  enum class Kind {
    Apply,    // head = constructor, args = arguments (variadic run inlined)
    Atom,     // head = atom name, sort set
    Var,      // de Bruijn bound variable: index = binders up, position = slot
    Abs,      // bound = number of names bound, args[0] = body
    Flat,     // head = assoc constructor, args = flattened elements
    Hole,     // context hole, index = 1-based hole number, sort set
    Meta,     // pattern metavariable, head = name (no `$`), seq = sequence
    MetaApp,  // pattern rhs only: head = abstraction metavariable, args applied
    Splice,   // pattern rhs only: args[0] template, maps over sequence metas
  };
  Kind kind;
  std::string head;
  std::string sort;  // Atom/Hole/Meta: the declared sort
  std::vector<TermPtr> args;
  int index = 0;     // Var: de Bruijn distance; Hole: hole number
  int position = 0;  // Var: slot within the binder
  int bound = 0;     // Abs: bound count
  bool seq = false;  // Meta: sequence metavariable
};

TermPtr mk_apply(std::string ctor, std::vector<TermPtr> args);
TermPtr mk_atom(std::string sort, std::string name);
TermPtr mk_var(int index, int position);
TermPtr mk_abs(int bound, TermPtr body);
TermPtr mk_flat(std::string ctor, std::vector<TermPtr> elems);
TermPtr mk_hole(int number, std::string sort);
TermPtr mk_meta(std::string name, std::string sort, bool seq_var = false);

// Finite supply of generator atoms per sort.
struct GeneratorSet {
  std::map<std::string, std::vector<std::string>> atoms;

  const std::vector<std::string>& of(const std::string& sort) const;
  std::optional<std::string> sort_of_atom(const std::string& name) const;
  bool empty() const { return atoms.empty(); }
};

// A term with numbered holes; hole i is filled by plug()'s i-th argument.
struct Context {
  TermPtr body;
  std::vector<std::string> hole_sorts;  // hole_sorts[i] is the sort of hole i+1
  std::string result_sort;

  size_t hole_count() const { return hole_sorts.size(); }
};

// Total structural order on terms; canonical Flat elements of commutative
// constructors are kept sorted by it. Returns <0, 0 or >0.
int compare(const Term& a, const Term& b);
int compare(const TermPtr& a, const TermPtr& b);
bool structurally_equal(const TermPtr& a, const TermPtr& b);
struct TermLess {
  bool operator()(const TermPtr& a, const TermPtr& b) const { return compare(a, b) < 0; }
};

// Node count; a Flat of k elements counts as k-1 binary nodes, so the size is
// invariant under congruence.
size_t term_size(const TermPtr& t);

// Unambiguous serialization of a term, usable as a hash/visited-set key.
std::string term_key(const TermPtr& t);

// Human-readable S-expression form; parse_term round-trips it.
std::string pretty(const Presentation& p, const TermPtr& t);

// Sort of a term; open terms need the enclosing binder sorts, innermost first.
struct BinderFrame {
  std::string sort;
  int count = 0;
};
std::string sort_of(const Presentation& p, const TermPtr& t,
                    const std::vector<BinderFrame>& binders = {});

// True when the term has no free de Bruijn variables.
bool is_closed(const TermPtr& t);

// All distinct closed subterms (including the term itself), canonical order.
std::vector<TermPtr> closed_subterms(const TermPtr& t);

// Atoms occurring in a term, grouped per sort.
void collect_atoms(const TermPtr& t, GeneratorSet& into);

// Parses the S-expression term syntax: `(op arg*)`, bare atoms/nullary
// constructors, abstraction `(\ x1 .. xn body)`, and application sugar
// `(t u v)` folding through the presentation's application constructor when
// the head is not an operator name. Unknown identifiers in argument position
// become atoms of the expected sort; `gens` may pin atom sorts explicitly.
// `expected_sort` is required only when the sort is otherwise ambiguous.
// The result is canonical.
TermPtr parse_term(const Presentation& p, const std::string& text,
                   const GeneratorSet& gens = {},
                   const std::string& expected_sort = "");

// Parses a pattern: term syntax plus `$x` metavariables, `$xs ...` sequence
// metavariables, `($q arg*)` abstraction application and `expr ...` splices.
TermPtr parse_pattern(const Presentation& p, const std::string& text,
                      const std::string& expected_sort = "");

// Parses a context: term syntax plus `hole1`/`hole2`.
Context parse_context(const Presentation& p, const std::string& text,
                      const std::string& expected_sort = "");

// Rebuilds the canonical form bottom-up: flattens assoc constructors, drops
// units, sorts commutative elements and applies the presentation's oriented
// equations to fixpoint. Idempotent.
TermPtr canonicalize(const Presentation& p, const TermPtr& t);

// Structural-congruence equality: canonical forms are compared structurally,
// which makes alpha-equivalence (de Bruijn) and bag permutation free.
bool equal(const Presentation& p, const TermPtr& a, const TermPtr& b);

// One argument tuple of a decomposition. Variadic runs are grouped.
struct DecompArg {
  bool is_list = false;
  TermPtr term;                // when !is_list (plain and abstraction args)
  std::vector<TermPtr> list;   // when is_list
};
using DecompTuple = std::vector<DecompArg>;

// All tuples (u1..un) with c(u1..un) congruent to t: the unique preimage for
// free constructors, contiguous splits (including unit splits) for assoc
// constructors, and all ordered sub-multiset bipartitions for assoc-comm
// constructors. Complete and finite; deterministic order.
std::vector<DecompTuple> decompose(const Presentation& p, const TermPtr& t,
                                   const ConstructorDecl& c);

// Builds c(args) and canonicalizes; the inverse direction of decompose.
TermPtr compose(const Presentation& p, const ConstructorDecl& c, const DecompTuple& args);

// Fills the context's holes; fillers must be closed and sort-correct.
TermPtr plug(const Presentation& p, const Context& ctx, const std::vector<TermPtr>& fillers);

// Applies an abstraction to argument terms (capture-avoiding de Bruijn
// substitution), then canonicalizes. Throws ArityError on a count mismatch.
TermPtr instantiate(const Presentation& p, const TermPtr& abs,
                    const std::vector<TermPtr>& values);

// Shifts free variables at or above `cutoff` by `delta`.
TermPtr shift_vars(const TermPtr& t, int delta, int cutoff = 0);

// Enumeration of canonical terms. Binder multiplicity does not contribute to
// node size, so variadic binders are capped at `max_binder_count` names.
struct EnumOptions {
  int max_binder_count = 2;
};

// Every canonical term of the sort with at most max_size nodes, each exactly
// once, ordered by (size, term order). Abstraction bodies draw on the
// enclosing binder variables in addition to the generators.
std::vector<TermPtr> enumerate_terms(const Presentation& p, const std::string& sort,
                                     const GeneratorSet& gens, size_t max_size,
                                     const EnumOptions& opts = {});

// Same, for open terms under the given binder stack (innermost first).
std::vector<TermPtr> enumerate_open_terms(const Presentation& p, const std::string& sort,
                                          const GeneratorSet& gens, size_t max_size,
                                          const std::vector<BinderFrame>& binders,
                                          const EnumOptions& opts = {});

// Abstraction terms admissible for an abstraction argument descriptor, with
// bodies of at most max_body_size nodes.
std::vector<TermPtr> enumerate_abstractions(const Presentation& p, const ArgDescriptor& desc,
                                            const GeneratorSet& gens, size_t max_body_size,
                                            const EnumOptions& opts = {});

// Reserved atom namespace for checker-introduced fresh names; parse_term
// rejects user atoms that start with this prefix.
inline constexpr char kFreshAtomPrefix = '~';
std::string fresh_atom_name(size_t i);

// Candidate pool for instantiating a binder formula against an abstraction
// found inside `enclosing`: every closed subterm of the enclosing term at the
// binder sort, plus single-constructor closures of closed subterms (for
// rhopi, the quotes of the message payloads already in flight). Deterministic
// order. Checker and oracle share this rule.
std::vector<TermPtr> binder_candidates(const Presentation& p, const TermPtr& enclosing,
                                       const std::string& sort);

}  // namespace sbl
