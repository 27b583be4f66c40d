#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sbl/formula.hpp"
#include "sbl/rewrite.hpp"

namespace sbl {

struct Budget {
  size_t rewrite_depth = 64;    // reachability / normalization step bound
  size_t explore_nodes = 10000; // states per reachability search
  size_t witness_size = 5;      // modal witness enumeration cap (node size)
  size_t unfold_guard = 256;    // distinct (term, mu-var) unfoldings per check

  bool valid() const {
    return rewrite_depth > 0 && explore_nodes > 0 && witness_size > 0 && unfold_guard > 0;
  }
};

enum class VerdictKind { True, False, Unknown };

struct Witness {
  std::vector<TermPtr> terms;   // e.g. the modal witness term
  std::optional<Trace> trace;   // e.g. the modal reachability trace
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::string unknown_reason;            // set when kind == Unknown
  std::optional<Witness> witness;        // may accompany True

  static Verdict yes() { return {VerdictKind::True, "", std::nullopt}; }
  static Verdict yes(Witness w) { return {VerdictKind::True, "", std::move(w)}; }
  static Verdict no() { return {VerdictKind::False, "", std::nullopt}; }
  static Verdict unknown(std::string reason) {
    return {VerdictKind::Unknown, std::move(reason), std::nullopt};
  }
  bool is_true() const { return kind == VerdictKind::True; }
  bool is_false() const { return kind == VerdictKind::False; }
  bool is_unknown() const { return kind == VerdictKind::Unknown; }
};

// Strong Kleene connectives on verdicts (witnesses propagate best-effort).
Verdict kleene_not(Verdict v);
Verdict kleene_and(Verdict a, Verdict b);
Verdict kleene_or(Verdict a, Verdict b);

struct CheckStats {
  size_t states_explored = 0;
  size_t rewrite_steps = 0;
  size_t unfoldings = 0;
  size_t witnesses_tried = 0;
};

// Decides membership of a canonical closed term in a closed formula's
// denotation. Boolean connectives follow strong Kleene; lifted constructors
// quantify over decompositions; modal operators enumerate witnesses up to
// budget.witness_size and search reachability; mu is coinductive (revisiting
// a term under the same variable succeeds). Unknown is returned only on
// genuine budget truncation, never as a shortcut.
Verdict check(const Presentation& p, const TermPtr& t, const FormulaPtr& f,
              const Budget& budget, CheckStats* stats = nullptr);

struct CorpusEntry {
  TermPtr term;
  FormulaPtr formula;
  std::string label;
};

struct CorpusRow {
  std::string label;
  Verdict verdict;
  CheckStats stats;
  double millis = 0.0;  // informational; not part of the deterministic payload
};

struct CorpusReport {
  std::vector<CorpusRow> rows;
  size_t unknowns = 0;
};

CorpusReport check_corpus(const Presentation& p, const std::vector<CorpusEntry>& pairs,
                          const Budget& budget);

struct Denotation {
  std::vector<TermPtr> members;  // canonical order
  bool complete = true;          // no enumerated term came back Unknown
};

// { t in enumerate_terms(max_size) | check(t, f) is True }.
Denotation denote(const Presentation& p, const FormulaPtr& f, const GeneratorSet& gens,
                  size_t max_size, const Budget& budget);

}  // namespace sbl
