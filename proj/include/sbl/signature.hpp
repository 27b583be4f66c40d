#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sbl/errors.hpp"

namespace sbl {

struct Term;
using TermPtr = std::shared_ptr<const Term>;

// Argument position of a constructor: a plain sort, a variadic run of one
// sort, or an abstraction binding names of one sort over a body sort.
struct ArgDescriptor {
  enum class Kind { Plain, Variadic, Abstraction };
  Kind kind = Kind::Plain;
  std::string sort;                 // Plain/Variadic element sort; Abstraction bound sort
  std::string body_sort;            // Abstraction only
  bool variadic_binder = false;     // Abstraction: any bound count
  int bound_count = 0;              // Abstraction: fixed count when !variadic_binder

  static ArgDescriptor plain(std::string s);
  static ArgDescriptor variadic(std::string s);
  static ArgDescriptor abstraction(std::string bound, std::string body, bool variadic,
                                   int count = 0);
  bool operator==(const ArgDescriptor&) const = default;

  // Canonical rendering, e.g. "P", "P*", "bind N* . P".
  std::string text() const;
};

struct ConstructorDecl {
  std::string name;
  std::vector<ArgDescriptor> args;
  std::string result;
  bool assoc = false;       // associative (flattened-sequence canonical form)
  bool comm = false;        // with assoc: commutative (sorted-multiset canonical form)
  std::string unit;         // optional nullary unit constructor, requires assoc
  int line = 0;

  bool flattened() const { return assoc; }
  bool has_unit() const { return !unit.empty(); }
  bool operator==(const ConstructorDecl& o) const {
    return name == o.name && args == o.args && result == o.result && assoc == o.assoc &&
           comm == o.comm && unit == o.unit;
  }
};

// Oriented structural equation, applied left-to-right during canonicalization.
struct EquationDecl {
  TermPtr lhs;
  TermPtr rhs;
  int line = 0;
};

struct RewriteRuleDecl {
  std::string name;
  TermPtr lhs;
  TermPtr rhs;
  int line = 0;
};

struct Diagnostic {
  enum class Code {
    SyntaxError,
    UnknownSort,
    ArityMismatch,
    BadAttribute,
    DuplicateName,
    UnboundMetavariable,
    BadEquation,
    BadPattern,
  };
  Code code;
  std::string message;
  int line = 0;

  std::string text() const;
  bool operator==(const Diagnostic&) const = default;
};

struct Presentation {
  std::vector<std::string> sorts;
  std::vector<ConstructorDecl> constructors;
  std::vector<EquationDecl> equations;
  std::vector<RewriteRuleDecl> rules;
  std::vector<std::string> logic_sorts;  // sorts carrying Boolean connectives

  bool has_sort(const std::string& s) const;
  bool logic_enabled(const std::string& s) const;
  const ConstructorDecl* find_constructor(const std::string& name) const;
  const RewriteRuleDecl* find_rule(const std::string& name) const;

  // The binary same-sorted constructor used by the `arrow` formula macro
  // (prefers one literally named "app"), and the assoc-comm constructor used
  // by `rg`. Null when absent or ambiguous.
  const ConstructorDecl* application_constructor() const;
  const ConstructorDecl* parallel_constructor() const;
};

// Parses the line-oriented presentation DSL:
//   sort <name>
//   op <name> : <arg>, ... -> <sort> [assoc] [assoc-comm] [unit <op>]
//   eq <pattern> = <pattern>
//   rule <name> : <pattern> => <pattern>
//   logic <sort>, ...          (defaults to all sorts when omitted)
//   # comment
// where <arg> is `<sort>`, `<sort>*` or `bind <sort>[*| <sort>...] . <sort>`,
// patterns are S-expressions and metavariables are written `$x` (`$xs ...`
// for sequence metavariables).
// Throws SyntaxError on malformed input and reports validation problems
// (see validate) as a SyntaxError listing the diagnostics.
Presentation parse_presentation(const std::string& text);

// Same grammar, but skips validation; used to inspect broken presentations.
Presentation parse_presentation_unvalidated(const std::string& text);

// Structural well-formedness of a presentation. Empty result means valid.
// Deterministic: diagnostics are sorted by (line, code, message).
std::vector<Diagnostic> validate(const Presentation& p);

// Renders a presentation back to DSL source; parse_presentation of the
// result reproduces the presentation.
std::string pretty_print(const Presentation& p);

// Built-in calculi: "mon", "mon-tree", "ski", "ski-arrow", "rhopi",
// "group-action". Throws UnknownBuiltinError otherwise.
Presentation builtin(const std::string& name);
const std::vector<std::string>& builtin_names();

// DSL source text behind builtin(); exposed so fixtures can ship it as files.
const std::string& builtin_source(const std::string& name);

bool operator==(const Presentation& a, const Presentation& b);

}  // namespace sbl
