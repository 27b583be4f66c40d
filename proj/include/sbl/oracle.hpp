#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "sbl/checker.hpp"
#include "sbl/formula.hpp"

namespace sbl {

using TermSet = std::set<TermPtr, TermLess>;

// Finite per-sort stand-in for the full term algebra: every canonical term of
// each sort up to max_size over the generators. Closed under decomposition
// because subterms are never larger than their parents.
struct Universe {
  const Presentation* p = nullptr;
  GeneratorSet gens;
  size_t max_size = 0;
  std::map<std::string, TermSet> by_sort;

  const TermSet& of(const std::string& sort) const;
  bool contains(const TermPtr& t) const;
};

Universe build_universe(const Presentation& p, const GeneratorSet& gens, size_t max_size);

struct OracleResult {
  TermSet members;
  bool truncated = false;  // some modal search hit the rewrite budget
};

// Ground-truth denotation over the universe, computed eagerly with set
// operations: complement is relative to the universe, lifted constructors
// are images over products of argument denotations, modal operators search
// reachability exhaustively up to rw_budget and mu iterates a decreasing
// chain down to the greatest fixed point. Written independently of the
// checker (construction vs decomposition, sets vs membership recursion).
OracleResult direct_denote(const Presentation& p, const FormulaPtr& f, const Universe& u,
                           const SearchBudget& rw_budget);

struct Discrepancy {
  TermPtr term;
  std::string formula_label;
  VerdictKind checker;   // True or False
  bool oracle_member;
};

struct UnknownEntry {
  TermPtr term;
  std::string formula_label;
  std::string reason;
  bool oracle_truncated;  // the oracle also ran out of rewrite budget here
};

struct CompareReport {
  std::vector<Discrepancy> discrepancies;
  std::vector<UnknownEntry> unknowns;
  size_t checked = 0;

  bool clean() const { return discrepancies.empty(); }
  // Discrepancy-free and every Unknown excused by oracle truncation.
  bool agreed() const;
  std::string text(const Presentation& p) const;
};

struct NamedFormula {
  std::string name;
  FormulaPtr formula;
};

// Runs checker and oracle over every universe term of each formula's sort and
// cross-checks: checker True must be an oracle member, checker False must not
// be. Unknowns are listed, flagged with whether the oracle was truncated.
CompareReport compare(const Presentation& p, const std::vector<NamedFormula>& formulae,
                      const GeneratorSet& gens, size_t max_size, const Budget& budget);

}  // namespace sbl
