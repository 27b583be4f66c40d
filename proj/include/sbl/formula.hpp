#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbl/term.hpp"

namespace sbl {

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Argument of a lifted constructor, mirroring the ArgDescriptor shapes.
// Abstraction positions take either a Binder (names bound over a body
// formula) or a boolean combination of Top/Bot over abstractions.
struct FormulaArg {
  enum class Kind { Plain, VariadicList, Binder };
  Kind kind = Kind::Plain;
  FormulaPtr plain;                  // Plain and Binder body live here
  std::vector<FormulaPtr> list;      // VariadicList
  std::vector<std::string> binders;  // Binder: bound name(s)
  // Binder: when set, the body is checked at one reserved fresh atom only
  // (the generic point); otherwise satisfaction is existential over a
  // candidate set of names drawn from the checked term (fresh atom first,
  // then closed subterms of matching sort and their one-constructor
  // closures, e.g. quotes of subterm processes).
  bool generic = false;
};

struct Formula {
  enum class Kind {
    Top, Bot, And, Or, Not,
    Lifted,   // head = constructor name, cargs
    AtomLit,  // head = atom name (or a binder-bound name reference)
    Modal,    // kids[0] = u, kids[1] = v, ctx set
    Mu,       // head = variable, kids[0] = body (greatest fixed point)
    Var,      // head = variable
  };
  Kind kind;
  std::string sort;  // sort of the formula (every node carries one)
  std::string head;
  std::vector<FormulaPtr> kids;
  std::vector<FormulaArg> cargs;  // Lifted
  std::optional<Context> ctx;     // Modal

  static FormulaPtr top(std::string sort);
  static FormulaPtr bot(std::string sort);
  static FormulaPtr conj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr disj(FormulaPtr a, FormulaPtr b);
  static FormulaPtr neg(FormulaPtr a);
  static FormulaPtr lifted(std::string ctor, std::string sort, std::vector<FormulaArg> args);
  static FormulaPtr atom(std::string sort, std::string name);
  static FormulaPtr modal(FormulaPtr u, Context ctx, FormulaPtr v);
  static FormulaPtr mu(std::string var, FormulaPtr body);
  static FormulaPtr var(std::string name, std::string sort);
};

// Parses the S-expression formula syntax over the presentation:
//   top bot (and f g..) (or f g..) (not f) (mu X f) X
//   (ctor arg*)            lifted constructor, nullary constructors bare
//   a                      atom literal (neither constructor nor bound var)
//   (\ x f) (\fresh x f)   binder arguments for abstraction positions
//   (dia u ctxterm v)      modal operator; ctx term uses hole1/hole2
//   (rg u v) (arrow u v)   derived modal forms (see derived_forms)
//   (lift term)            singleton formula of a term
// The result is sort-checked against `sort` and positivity-checked.
FormulaPtr parse_formula(const Presentation& p, const std::string& sort,
                         const std::string& text);

// Recomputes and verifies the sort of a formula built programmatically.
// Throws SortError (including when the sort has no Boolean layer).
std::string sort_check(const Presentation& p, const FormulaPtr& f);

// Thrown by parse_formula when a fixed-point variable occurs under an odd
// number of negations.
struct NonPositiveError : Error {
  using Error::Error;
};
struct UnboundVarError : Error {
  using Error::Error;
};

// Derived modal macros available in a presentation.
struct DerivedForms {
  const ConstructorDecl* rg = nullptr;     // u ⟨par ◦1 ◦2⟩ v
  const ConstructorDecl* arrow = nullptr;  // u ⟨app ◦1 ◦2⟩ v
};
DerivedForms derived_forms(const Presentation& p);

// Expands `rg`/`arrow` to their Modal form; throws MacroError when the
// presentation lacks the constructor the macro needs.
FormulaPtr expand_rg(const Presentation& p, FormulaPtr u, FormulaPtr v);
FormulaPtr expand_arrow(const Presentation& p, FormulaPtr u, FormulaPtr v);

// The singleton formula denoting exactly this closed term: constructors are
// lifted pointwise, atoms become literals and abstractions become generic
// binders.
FormulaPtr lift_term(const Presentation& p, const TermPtr& t);

// Round-trips through parse_formula.
std::string pretty(const Presentation& p, const FormulaPtr& f);

// Upper bound on the node size of any member of the formula's denotation,
// when one exists (no Top/Not/Modal/Mu/Var along a positive path). Witness
// enumeration is exhaustive below this bound.
std::optional<size_t> denotation_size_bound(const Presentation& p, const FormulaPtr& f);

// Substitutes an atom name for a (binder-bound) atom literal name, honoring
// shadowing by inner binders. The formula overload replaces the literal by an
// arbitrary formula (e.g. the lift of a quoted-process name).
FormulaPtr subst_atom(const FormulaPtr& f, const std::string& from, const std::string& to);
FormulaPtr subst_atom(const FormulaPtr& f, const std::string& from, const FormulaPtr& repl);

// Atoms mentioned by the formula, grouped per sort.
void collect_atoms(const FormulaPtr& f, GeneratorSet& into);

bool formula_equal(const FormulaPtr& a, const FormulaPtr& b);

}  // namespace sbl
