#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbl/checker.hpp"
#include "sbl/formula.hpp"

namespace sbl {

// One golden expectation: term against named formula under default budgets.
struct ExpectedVerdict {
  std::string term;     // term source
  std::string formula;  // name in the fixture's formula table
  VerdictKind verdict;
  std::string origin;   // how the expectation was established
};

// A shipped calculus with its formula corpus and golden expectations.
struct Fixture {
  std::string name;
  std::string source;  // presentation DSL
  Presentation presentation;
  std::vector<std::pair<std::string, std::string>> formulae;  // name -> source (sorted text)
  std::map<std::string, std::string> formula_sorts;
  std::vector<std::pair<std::string, std::string>> sample_terms;  // name -> source
  std::vector<ExpectedVerdict> expected;
  GeneratorSet default_gens;   // generators used by the corpus
  size_t corpus_max_size = 5;  // universe size for oracle comparison

  FormulaPtr formula(const std::string& name) const;
  TermPtr sample(const std::string& name) const;
  std::vector<NamedFormula> corpus() const;  // parsed formula table
};

// Fixture names: the builtins plus "rhopi-metered" (comm consumed by chi).
const std::vector<std::string>& fixture_names();
const Fixture& fixture(const std::string& name);  // throws UnknownBuiltinError

// Serialization of a fixture's corpus and expectations (JSON), the format
// shipped under fixtures/ and accepted by the CLI's compare subcommand.
std::string corpus_json(const Fixture& f);

// Replication encoding for rhopi: D(x) = recv(x, y -> send(x, *y) | *y) and
// bang(P, x) = send(x, D(x) | P) | D(x).
TermPtr rhopi_server(const Presentation& p, const TermPtr& chan);
TermPtr rhopi_bang(const Presentation& p, const TermPtr& proc, const TermPtr& chan);

}  // namespace sbl
