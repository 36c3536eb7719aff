#include "support/joint_oracle.hpp"

#ifndef SOVERIFY_SPEC_DIR
#define SOVERIFY_SPEC_DIR "specs"
#endif

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <cassert>
#include <functional>

namespace soverify::testing {

JointOracleFixture JointOracleFixture::make() {
  JointOracleFixture fx;
  {
    std::ifstream in(std::string(SOVERIFY_SPEC_DIR) + "/oracle_fixture.sospec");
    if (!in) throw SpecError("cannot open the oracle fixture spec");
    std::stringstream ss;
    ss << in.rdbuf();
    fx.sys = parse_system(ss.str());
  }
  const Signature& sig = fx.sys.sig;
  fx.id = *sig.find_sort("Id");
  fx.role = *sig.find_sort("Role");
  fx.msg = *sig.find_sort("Msg");
  fx.setofmsg = *sig.find_sort("SetOfMsg");
  for (const char* n : {"c1", "c2", "c3", "a0", "a1"})
    fx.id_consts.push_back(Term::constant(sig, *sig.find_fun(n)));
  for (const char* n : {"r1", "r2", "rr"})
    fx.role_consts.push_back(Term::constant(sig, *sig.find_fun(n)));
  for (const char* n : {"m0", "m1"})
    fx.msg_consts.push_back(Term::constant(sig, *sig.find_fun(n)));
  fx.s0 = Term::constant(sig, *sig.find_fun("s0"));
  fx.mty = Term::constant(sig, *sig.find_fun("mty"));
  fx.mem = *sig.find_pred("mem");
  fx.p = *sig.find_pred("p");
  fx.q = *sig.find_pred("q");
  return fx;
}

namespace {

struct Layers {
  // id values: c1,c2,c3 fixed 0,1,2; a0,a1 mapped
  int a0 = 0, a1 = 0;
  int rr = 0;              // 0 or 1
  std::array<int, 3> fr{}; // Id element -> Role element
  int msg_merge = 0;       // 1: m0 and m1 are the same element
  std::vector<int> set_class;   // per distinct set subterm
  std::vector<int> rows;        // per set class: bitmask over msg classes
};

struct OracleCtx {
  const JointOracleFixture& fx;
  const Signature& sig;
  FormulaPtr formula;

  std::vector<TermPtr> set_terms;  // distinct SetOfMsg subterms, outermost-last
  std::vector<FormulaPtr> pm_atoms;

  FunId a0_f, a1_f, rr_f, fr_f, m0_f, m1_f, s0_f, mty_f, ins_f;

  explicit OracleCtx(const JointOracleFixture& fixture, const FormulaPtr& f)
      : fx(fixture), sig(fixture.sys.sig), formula(f) {
    a0_f = *sig.find_fun("a0");
    a1_f = *sig.find_fun("a1");
    rr_f = *sig.find_fun("rr");
    fr_f = *sig.find_fun("fr");
    m0_f = *sig.find_fun("m0");
    m1_f = *sig.find_fun("m1");
    s0_f = *sig.find_fun("s0");
    mty_f = *sig.find_fun("mty");
    ins_f = *sig.find_fun("ins");
    for (const auto& t : collect_subterms(f))
      if (t->sort == fx.setofmsg) {
        bool dup = false;
        for (const auto& u : set_terms) dup |= equal(u, t);
        if (!dup) set_terms.push_back(t);
      }
    for (const auto& a : collect_atoms(f))
      if (a->kind == Conn::Atom && (a->pred == fx.p || a->pred == fx.q))
        pm_atoms.push_back(a);
  }

  int set_index(const TermPtr& t) const {
    for (size_t i = 0; i < set_terms.size(); ++i)
      if (equal(set_terms[i], t)) return static_cast<int>(i);
    throw SpecError("oracle: unindexed set term");
  }

  int id_val(const TermPtr& t, const Layers& L) const {
    if (t->fun == a0_f) return L.a0;
    if (t->fun == a1_f) return L.a1;
    const std::string& n = sig.fun(t->fun).name;
    if (n == "c1") return 0;
    if (n == "c2") return 1;
    if (n == "c3") return 2;
    throw SpecError("oracle: unknown Id term");
  }

  int role_val(const TermPtr& t, const Layers& L) const {
    if (t->kind == Term::Kind::App && t->fun == fr_f)
      return L.fr[static_cast<size_t>(id_val(t->args[0], L))];
    const std::string& n = sig.fun(t->fun).name;
    if (n == "r1") return 0;
    if (n == "r2") return 1;
    if (t->fun == rr_f) return L.rr;
    throw SpecError("oracle: unknown Role term");
  }

  int msg_val(const TermPtr& t, const Layers& L) const {
    if (t->fun == m0_f) return 0;
    if (t->fun == m1_f) return L.msg_merge ? 0 : 1;
    throw SpecError("oracle: unknown Msg term");
  }

  int num_msg_classes(const Layers& L) const { return L.msg_merge ? 1 : 2; }

  // truth of a non-PM atom under the layers
  bool eval_atom(const FormulaPtr& a, const Layers& L) const {
    if (a->kind == Conn::Eq) {
      const TermPtr& l = a->terms[0];
      const TermPtr& r = a->terms[1];
      if (l->sort == fx.id) return id_val(l, L) == id_val(r, L);
      if (l->sort == fx.role) return role_val(l, L) == role_val(r, L);
      if (l->sort == fx.msg) return msg_val(l, L) == msg_val(r, L);
      if (l->sort == fx.setofmsg)
        return L.set_class[static_cast<size_t>(set_index(l))] ==
               L.set_class[static_cast<size_t>(set_index(r))];
      throw SpecError("oracle: unknown equality sort");
    }
    if (a->pred == fx.mem) {
      int m = msg_val(a->terms[0], L);
      int cls = L.set_class[static_cast<size_t>(set_index(a->terms[1]))];
      return (L.rows[static_cast<size_t>(cls)] >> m) & 1;
    }
    throw SpecError("oracle: eval_atom on a PM atom");
  }

};

} // namespace

bool joint_oracle_satisfiable(const JointOracleFixture& fx, const FormulaPtr& f) {
  OracleCtx ctx(fx, f);
  const Signature& sig = fx.sys.sig;
  (void)sig;

  Layers L;
  L.set_class.resize(ctx.set_terms.size());
  size_t nsets = ctx.set_terms.size();

  // enumerate id maps, role constant, fr table, msg merge
  for (L.a0 = 0; L.a0 < 3; ++L.a0)
    for (L.a1 = 0; L.a1 < 3; ++L.a1)
      for (L.rr = 0; L.rr < 2; ++L.rr)
        for (int frt = 0; frt < 8; ++frt) {
          L.fr = {frt & 1, (frt >> 1) & 1, (frt >> 2) & 1};
          for (L.msg_merge = 0; L.msg_merge < 2; ++L.msg_merge) {
            // PM feasibility per assignment of the PM atoms (Horn closure)
            size_t npm = ctx.pm_atoms.size();
            std::vector<uint32_t> feasible;
            for (uint32_t bits = 0; bits < (1u << npm); ++bits) {
              // closed-world tables: start from the positive atoms, close
              // under the two rules, check the negatives stay out
              bool ptab[3] = {false, false, false};
              bool qtab[3][3] = {{false, false, false},
                                 {false, false, false},
                                 {false, false, false}};
              for (size_t i = 0; i < npm; ++i) {
                if (!((bits >> i) & 1)) continue;
                const FormulaPtr& a = ctx.pm_atoms[i];
                if (a->pred == fx.p)
                  ptab[ctx.id_val(a->terms[0], L)] = true;
                else
                  qtab[ctx.id_val(a->terms[0], L)][ctx.id_val(a->terms[1], L)] = true;
              }
              bool changed = true;
              while (changed) {
                changed = false;
                for (int x = 0; x < 3; ++x)
                  for (int y = 0; y < 3; ++y)
                    if (ptab[x] && ptab[y] && !qtab[x][y]) qtab[x][y] = changed = true;
                for (int x = 0; x < 3; ++x)
                  if (qtab[x][x] && !ptab[x]) ptab[x] = changed = true;
              }
              bool ok = true;
              for (size_t i = 0; i < npm && ok; ++i) {
                if ((bits >> i) & 1) continue;
                const FormulaPtr& a = ctx.pm_atoms[i];
                bool now = a->pred == fx.p
                               ? ptab[ctx.id_val(a->terms[0], L)]
                               : qtab[ctx.id_val(a->terms[0], L)][ctx.id_val(a->terms[1], L)];
                if (now) ok = false;  // closure forces an atom assigned false
              }
              if (ok) feasible.push_back(bits);
            }
            if (feasible.empty()) continue;

            // enumerate set partitions (restricted growth strings)
            std::vector<int> part(nsets, 0);
            std::function<bool(size_t, int)> enum_parts = [&](size_t i, int maxc) -> bool {
              if (i == nsets) {
                // congruence filter: equal ins arguments force equal classes
                int nclasses = maxc;
                for (size_t x = 0; x < nsets; ++x)
                  for (size_t y = x + 1; y < nsets; ++y) {
                    const TermPtr& tx = ctx.set_terms[x];
                    const TermPtr& ty = ctx.set_terms[y];
                    if (tx->kind != Term::Kind::App || tx->fun != ctx.ins_f) continue;
                    if (ty->kind != Term::Kind::App || ty->fun != ctx.ins_f) continue;
                    if (ctx.msg_val(tx->args[0], L) == ctx.msg_val(ty->args[0], L) &&
                        part[static_cast<size_t>(ctx.set_index(tx->args[1]))] ==
                            part[static_cast<size_t>(ctx.set_index(ty->args[1]))] &&
                        part[x] != part[y])
                      return false;  // prune this partition only
                  }

                // membership rows: propagate pinned rows, enumerate the rest
                int nmsg = ctx.num_msg_classes(L);
                int full = 1 << nmsg;
                std::vector<int> row(static_cast<size_t>(nclasses), -1);
                // mty pins its class to the empty row
                for (size_t x = 0; x < nsets; ++x)
                  if (ctx.set_terms[x]->fun == ctx.mty_f) row[static_cast<size_t>(part[x])] = 0;
                // iterate propagation from ins equations
                auto propagate = [&]() -> bool {
                  bool again = true;
                  while (again) {
                    again = false;
                    for (size_t x = 0; x < nsets; ++x) {
                      const TermPtr& t = ctx.set_terms[x];
                      if (t->kind != Term::Kind::App || t->fun != ctx.ins_f) continue;
                      int argc = part[static_cast<size_t>(ctx.set_index(t->args[1]))];
                      int resc = part[x];
                      int bit = 1 << ctx.msg_val(t->args[0], L);
                      if (row[static_cast<size_t>(argc)] >= 0) {
                        int want = row[static_cast<size_t>(argc)] | bit;
                        if (row[static_cast<size_t>(resc)] < 0) {
                          row[static_cast<size_t>(resc)] = want;
                          again = true;
                        } else if (row[static_cast<size_t>(resc)] != want) {
                          return false;
                        }
                      } else if (row[static_cast<size_t>(resc)] >= 0) {
                        // result known: the bit must be present
                        if (!(row[static_cast<size_t>(resc)] & bit)) return false;
                      }
                    }
                  }
                  return true;
                };
                std::vector<int> saved = row;
                if (!propagate()) return false;
                std::vector<size_t> unknown;
                for (size_t c = 0; c < row.size(); ++c)
                  if (row[c] < 0) unknown.push_back(c);
                // enumerate the unknown rows
                std::function<bool(size_t)> enum_rows = [&](size_t u) -> bool {
                  if (u == unknown.size()) {
                    std::vector<int> final_row = row;
                    // verify every equation (cycles may relate knowns)
                    for (size_t x = 0; x < nsets; ++x) {
                      const TermPtr& t = ctx.set_terms[x];
                      if (t->kind != Term::Kind::App || t->fun != ctx.ins_f) continue;
                      int argc = part[static_cast<size_t>(ctx.set_index(t->args[1]))];
                      int resc = part[x];
                      int bit = 1 << ctx.msg_val(t->args[0], L);
                      if (final_row[static_cast<size_t>(resc)] !=
                          (final_row[static_cast<size_t>(argc)] | bit))
                        return false;
                    }
                    L.rows = final_row;
                    for (size_t x = 0; x < nsets; ++x) L.set_class[x] = part[x];
                    for (uint32_t bits : feasible) {
                      std::function<bool(const FormulaPtr&)> ev =
                          [&](const FormulaPtr& g) -> bool {
                        switch (g->kind) {
                          case Conn::True: return true;
                          case Conn::False: return false;
                          case Conn::Atom:
                            if (g->pred == fx.p || g->pred == fx.q) {
                              for (size_t i = 0; i < ctx.pm_atoms.size(); ++i)
                                if (equal(ctx.pm_atoms[i], g)) return (bits >> i) & 1;
                              throw SpecError("oracle: unknown PM atom");
                            }
                            return ctx.eval_atom(g, L);
                          case Conn::Eq: return ctx.eval_atom(g, L);
                          case Conn::Not: return !ev(g->kids[0]);
                          case Conn::And:
                            for (const auto& k : g->kids)
                              if (!ev(k)) return false;
                            return true;
                          case Conn::Or:
                            for (const auto& k : g->kids)
                              if (ev(k)) return true;
                            return false;
                          case Conn::Implies: return !ev(g->kids[0]) || ev(g->kids[1]);
                          case Conn::Iff: return ev(g->kids[0]) == ev(g->kids[1]);
                          default: throw SpecError("oracle: quantifier");
                        }
                      };
                      if (ev(ctx.formula)) return true;
                    }
                    return false;
                  }
                  for (int v = 0; v < full; ++v) {
                    row[unknown[u]] = v;
                    if (enum_rows(u + 1)) return true;
                  }
                  row[unknown[u]] = -1;
                  return false;
                };
                bool found = enum_rows(0);
                row = saved;
                return found;
              }
              for (int c = 0; c <= maxc && c <= static_cast<int>(i); ++c) {
                part[i] = c;
                if (enum_parts(i + 1, std::max(maxc, c + 1))) return true;
              }
              return false;
            };
            if (enum_parts(0, 0)) return true;
          }
        }
  return false;
}

} // namespace soverify::testing
