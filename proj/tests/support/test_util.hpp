// Shared helpers for the unit and acceptance suites: compact fixture
// construction through the parser, plus the brute-force finite-model
// enumerator used as the independent oracle for satisfiability claims.

#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "soverify/model.hpp"
#include "soverify/parser.hpp"
#include "soverify/system.hpp"

namespace soverify::testing {

inline TwoLevelSystem parse_system(const std::string& text) {
  SpecFile f = parse_spec(text);
  return std::move(f.systems.at(0));
}

inline FormulaPtr fml(const TwoLevelSystem& sys, const std::string& text,
                      const std::vector<std::pair<std::string, SortId>>& binders = {}) {
  return parse_formula_in_system(sys, text, binders);
}

// Enumerates every finite structure for the listed symbols over the given
// domain sizes. Enumerated sorts are pinned to their constant lists (their
// domain size argument is ignored); other constants and all listed
// functions/predicates range over every possible table. The callback
// returns false to stop early; enumerate_models returns false when stopped.
struct ModelEnumerator {
  const Signature& sig;
  std::vector<int> domain_sizes;  // by SortId; enumerated sorts auto-sized
  std::vector<FunId> funs;        // functions and constants to interpret
  std::vector<PredId> preds;      // predicates to interpret

  bool run(const std::function<bool(const FiniteStructure&)>& cb) const {
    FiniteStructure m;
    m.domains.resize(sig.num_sorts());
    for (size_t s = 0; s < sig.num_sorts(); ++s) {
      const SortDecl& d = sig.sort(static_cast<SortId>(s));
      if (d.enumerated) {
        for (FunId c : d.edt_constants) m.domains[s].push_back(sig.fun(c).name);
      } else {
        int n = s < domain_sizes.size() ? domain_sizes[s] : 0;
        for (int i = 0; i < n; ++i)
          m.domains[s].push_back(d.name + "!" + std::to_string(i));
      }
    }
    // EDT constants interpret as themselves
    for (size_t s = 0; s < sig.num_sorts(); ++s) {
      const SortDecl& d = sig.sort(static_cast<SortId>(s));
      for (size_t i = 0; i < d.edt_constants.size(); ++i)
        m.funcs[{d.edt_constants[i], false}][{}] = static_cast<int>(i);
    }
    return enumerate_funs(m, 0, cb);
  }

private:
  static void tuples(const std::vector<int>& sizes,
                     const std::function<void(const std::vector<int>&)>& cb) {
    std::vector<int> idx(sizes.size(), 0);
    for (int s : sizes)
      if (s == 0) return;
    while (true) {
      cb(idx);
      size_t k = idx.size();
      while (k > 0) {
        if (++idx[k - 1] < sizes[k - 1]) break;
        idx[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
  }

  bool enumerate_funs(FiniteStructure& m, size_t fi,
                      const std::function<bool(const FiniteStructure&)>& cb) const {
    if (fi == funs.size()) return enumerate_preds(m, 0, cb);
    const FunDecl& d = sig.fun(funs[fi]);
    std::vector<int> arg_sizes;
    for (SortId s : d.args) arg_sizes.push_back(m.domain_size(s));
    int result_size = m.domain_size(d.result);
    if (result_size == 0) return true;  // nothing to interpret into
    std::vector<std::vector<int>> rows;
    tuples(arg_sizes, [&](const std::vector<int>& t) { rows.push_back(t); });
    // value vector per row
    std::vector<int> val(rows.size(), 0);
    while (true) {
      auto& table = m.funcs[{funs[fi], false}];
      table.clear();
      for (size_t r = 0; r < rows.size(); ++r) table[rows[r]] = val[r];
      if (!enumerate_funs(m, fi + 1, cb)) return false;
      size_t k = val.size();
      while (k > 0) {
        if (++val[k - 1] < result_size) break;
        val[k - 1] = 0;
        --k;
      }
      if (k == 0) break;
    }
    m.funcs.erase({funs[fi], false});
    return true;
  }

  bool enumerate_preds(FiniteStructure& m, size_t pi,
                       const std::function<bool(const FiniteStructure&)>& cb) const {
    if (pi == preds.size()) return cb(m);
    const PredDecl& d = sig.pred(preds[pi]);
    std::vector<int> arg_sizes;
    for (SortId s : d.args) arg_sizes.push_back(m.domain_size(s));
    std::vector<std::vector<int>> rows;
    tuples(arg_sizes, [&](const std::vector<int>& t) { rows.push_back(t); });
    if (rows.size() > 20) throw SpecError("oracle predicate table too large");
    for (uint64_t bits = 0; bits < (1ULL << rows.size()); ++bits) {
      auto& table = m.preds[{preds[pi], false}];
      table.clear();
      for (size_t r = 0; r < rows.size(); ++r)
        if (bits & (1ULL << r)) table.insert(rows[r]);
      if (!enumerate_preds(m, pi + 1, cb)) return false;
    }
    m.preds.erase({preds[pi], false});
    return true;
  }
};

// Satisfiability by exhaustive enumeration; the independent oracle behind
// brute-force expectations.
inline bool oracle_satisfiable(const Signature& sig, const FormulaPtr& f,
                               std::vector<int> domain_sizes, std::vector<FunId> funs,
                               std::vector<PredId> preds) {
  ModelEnumerator en{sig, std::move(domain_sizes), std::move(funs), std::move(preds)};
  bool found = false;
  en.run([&](const FiniteStructure& m) {
    auto v = m.eval(f);
    if (v && *v) {
      found = true;
      return false;
    }
    return true;
  });
  return found;
}

// Deterministic pseudo-random source; modulo-based to stay identical
// across library implementations.
struct Rng {
  std::mt19937 gen;
  explicit Rng(uint32_t seed) : gen(seed) {}
  int below(int n) { return static_cast<int>(gen() % static_cast<uint32_t>(n)); }
  bool flip() { return below(2) == 1; }
};

} // namespace soverify::testing
