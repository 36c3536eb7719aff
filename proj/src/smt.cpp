#include "soverify/smt.hpp"

#include <algorithm>
#include <cassert>
#include <array>
#include <climits>
#include <set>

#include "soverify/printer.hpp"

namespace soverify {

// ---- AtomTable ----

int AtomTable::intern(const FormulaPtr& atom_in) {
  FormulaPtr atom = atom_in;
  if (atom->kind == Conn::Eq && term_compare(atom->terms[0], atom->terms[1]) > 0)
    atom = Formula::eq(atom->terms[1], atom->terms[0]);
  if (atom->kind != Conn::Atom && atom->kind != Conn::Eq)
    throw SpecError("atom table: not an atom");
  auto& bucket = by_hash_[atom->hash];
  for (int i : bucket)
    if (equal(atoms_[static_cast<size_t>(i)], atom)) return i;
  atoms_.push_back(atom);
  int idx = static_cast<int>(atoms_.size() - 1);
  bucket.push_back(idx);
  return idx;
}

std::optional<int> AtomTable::find(const FormulaPtr& atom_in) const {
  FormulaPtr atom = atom_in;
  if (atom->kind == Conn::Eq && term_compare(atom->terms[0], atom->terms[1]) > 0)
    atom = Formula::eq(atom->terms[1], atom->terms[0]);
  auto it = by_hash_.find(atom->hash);
  if (it == by_hash_.end()) return std::nullopt;
  for (int i : it->second)
    if (equal(atoms_[static_cast<size_t>(i)], atom)) return i;
  return std::nullopt;
}

// ---- CnfBuilder ----

int CnfBuilder::finalize() {
  if (finalized_) throw SpecError("CnfBuilder finalized twice");
  finalized_ = true;
  int base = atoms_.size();
  for (auto& c : clauses_) {
    for (auto& l : c) {
      int v = var_of(l);
      if (v >= kAuxBase) {
        int nv = base + (v - kAuxBase);
        l = sign_of(l) ? pos(nv) : neg(nv);
      } else if (v >= base) {
        throw SpecError("internal: atom index out of range at finalize");
      }
    }
  }
  return base + num_aux_;
}

Lit CnfBuilder::lit_for(const FormulaPtr& f) {
  switch (f->kind) {
    case Conn::Eq:
      if (equal(f->terms[0], f->terms[1])) {
        // reflexive equality: a true constant
        int v = kAuxBase + num_aux_++;
        clauses_.push_back({pos(v)});
        return pos(v);
      }
      return pos(atoms_.intern(f));
    case Conn::Atom:
      return pos(atoms_.intern(f));
    case Conn::Not:
      return -lit_for(f->kids[0]);
    case Conn::True: {
      int v = kAuxBase + num_aux_++;
      clauses_.push_back({pos(v)});
      return pos(v);
    }
    case Conn::False: {
      int v = kAuxBase + num_aux_++;
      clauses_.push_back({neg(v)});
      return pos(v);
    }
    case Conn::And:
    case Conn::Or: {
      std::vector<Lit> kids;
      for (const auto& k : f->kids) kids.push_back(lit_for(k));
      int v = kAuxBase + num_aux_++;
      Lit l = pos(v);
      if (f->kind == Conn::And) {
        Clause big{l};
        for (Lit k : kids) {
          clauses_.push_back({-l, k});
          big.push_back(-k);
        }
        clauses_.push_back(std::move(big));
      } else {
        Clause big{-l};
        for (Lit k : kids) {
          clauses_.push_back({l, -k});
          big.push_back(k);
        }
        clauses_.push_back(std::move(big));
      }
      return l;
    }
    case Conn::Implies: {
      Lit a = lit_for(f->kids[0]);
      Lit b = lit_for(f->kids[1]);
      int v = kAuxBase + num_aux_++;
      Lit l = pos(v);
      clauses_.push_back({-l, -a, b});
      clauses_.push_back({l, a});
      clauses_.push_back({l, -b});
      return l;
    }
    case Conn::Iff: {
      Lit a = lit_for(f->kids[0]);
      Lit b = lit_for(f->kids[1]);
      int v = kAuxBase + num_aux_++;
      Lit l = pos(v);
      clauses_.push_back({-l, -a, b});
      clauses_.push_back({-l, a, -b});
      clauses_.push_back({l, a, b});
      clauses_.push_back({l, -a, -b});
      return l;
    }
    case Conn::Forall:
    case Conn::Exists:
      throw SpecError("cannot clausify a quantified formula");
  }
  throw SpecError("unreachable");
}

void CnfBuilder::assert_formula(const FormulaPtr& f) {
  if (f->kind == Conn::And) {
    for (const auto& k : f->kids) assert_formula(k);
    return;
  }
  if (f->kind == Conn::True) return;
  if (f->kind == Conn::False) {
    clauses_.push_back({});
    return;
  }
  clauses_.push_back({lit_for(f)});
}

// ---- BoolEnumerator ----


BoolEnumerator::BoolEnumerator(int num_vars, std::vector<Clause> clauses,
                               std::vector<int> decision_order)
    : num_vars_(num_vars), clauses_(std::move(clauses)), order_(std::move(decision_order)) {
  assign_.assign(static_cast<size_t>(num_vars_), -1);
  if (order_.empty()) {
    order_.resize(static_cast<size_t>(num_vars_));
    for (int v = 0; v < num_vars_; ++v) order_[static_cast<size_t>(v)] = v;
  }
  pos_in_order_.resize(static_cast<size_t>(num_vars_));
  for (size_t i = 0; i < order_.size(); ++i)
    pos_in_order_[static_cast<size_t>(order_[i])] = i;
  occurs_.resize(static_cast<size_t>(num_vars_));
  for (size_t ci = 0; ci < clauses_.size(); ++ci) attach(ci);
}

void BoolEnumerator::attach(size_t ci) {
  const Clause& c = clauses_[ci];
  if (c.empty()) {
    dead_ = true;
    return;
  }
  for (Lit l : c) occurs_[static_cast<size_t>(var_of(l))].push_back(ci);
}

bool BoolEnumerator::clause_satisfiable(size_t ci) const {
  // true when the clause has a true or unassigned literal
  for (Lit l : clauses_[ci]) {
    int8_t v = assign_[static_cast<size_t>(var_of(l))];
    if (v < 0 || (v == 1) == sign_of(l)) return true;
  }
  return false;
}

bool BoolEnumerator::propagate() {
  // full pass over the clause set whenever the frontier was reset (fresh
  // search or new learned clause); queue-driven afterwards
  constexpr int kConflict = INT_MIN;  // 0 = nothing, otherwise the unit literal
  auto examine = [&](size_t ci) -> int {
    const Clause& c = clauses_[ci];
    Lit unit = 0;
    int unassigned = 0;
    for (Lit l : c) {
      int8_t v = assign_[static_cast<size_t>(var_of(l))];
      if (v < 0) {
        if (++unassigned > 1) return 0;
        unit = l;
      } else if ((v == 1) == sign_of(l)) {
        return 0;  // satisfied
      }
    }
    if (unassigned == 0) return kConflict;
    return unit;
  };
  auto enqueue = [&](Lit l) {
    assign_[static_cast<size_t>(var_of(l))] = sign_of(l) ? 1 : 0;
    trail_.push_back({var_of(l), sign_of(l), false, false});
  };
  if (needs_full_scan_ || queue_head_ == 0) {
    needs_full_scan_ = false;
    for (size_t ci = 0; ci < clauses_.size(); ++ci) {
      int r = examine(ci);
      if (r == kConflict) return false;
      if (r != 0) enqueue(r);
    }
  }
  while (queue_head_ < trail_.size()) {
    int v = trail_[queue_head_++].var;
    for (size_t ci : occurs_[static_cast<size_t>(v)]) {
      int r = examine(ci);
      if (r == kConflict) return false;
      if (r != 0) enqueue(r);
    }
  }
  return true;
}

bool BoolEnumerator::advance() {
  while (!trail_.empty()) {
    Entry e = trail_.back();
    trail_.pop_back();
    assign_[static_cast<size_t>(e.var)] = -1;
    order_hint_ = std::min(order_hint_, pos_in_order_[static_cast<size_t>(e.var)]);
    if (e.decision && !e.flipped) {
      assign_[static_cast<size_t>(e.var)] = e.value ? 0 : 1;
      trail_.push_back({e.var, !e.value, true, true});
      queue_head_ = trail_.size() - 1;
      return true;
    }
  }
  return false;
}

std::optional<std::vector<bool>> BoolEnumerator::next() {
  if (dead_) return std::nullopt;
  if (!started_) {
    started_ = true;
    queue_head_ = 0;
  } else if (!advance()) {
    return std::nullopt;
  }
  while (true) {
    if (!propagate()) {
      if (!advance()) return std::nullopt;
      continue;
    }
    int undecided = -1;
    while (order_hint_ < order_.size()) {
      int v = order_[order_hint_];
      if (assign_[static_cast<size_t>(v)] < 0) {
        undecided = v;
        break;
      }
      ++order_hint_;
    }
    if (undecided < 0) {
      // propagation ran to fixpoint, so a total assignment satisfies every
      // clause; verify cheaply and recover if the invariant ever breaks
      bool all_true = true;
      for (size_t ci = 0; ci < clauses_.size() && all_true; ++ci)
        all_true = clause_satisfiable(ci);
      if (!all_true) {
        if (!advance()) return std::nullopt;
        continue;
      }
      std::vector<bool> out(static_cast<size_t>(num_vars_));
      for (int v = 0; v < num_vars_; ++v)
        out[static_cast<size_t>(v)] = assign_[static_cast<size_t>(v)] == 1;
      return out;
    }
    assign_[static_cast<size_t>(undecided)] = 0;
    trail_.push_back({undecided, false, true, false});
  }
}

void BoolEnumerator::learn(Clause c) {
  if (c.empty()) dead_ = true;
  clauses_.push_back(std::move(c));
  attach(clauses_.size() - 1);
  needs_full_scan_ = true;  // the clause may be unit or false under the prefix
  ++learned_;
}

// ---- CongruenceSolver ----

int CongruenceSolver::find(int x) {
  while (uf_[static_cast<size_t>(x)] != x) {
    uf_[static_cast<size_t>(x)] = uf_[static_cast<size_t>(uf_[static_cast<size_t>(x)])];
    x = uf_[static_cast<size_t>(x)];
  }
  return x;
}

std::vector<int> CongruenceSolver::class_key(int node) {
  const Node& n = nodes_[static_cast<size_t>(node)];
  std::vector<int> key;
  key.reserve(n.args.size() + 3);
  key.push_back(n.is_pred ? 1 : 0);
  key.push_back(n.sym);
  key.push_back(n.primed ? 1 : 0);
  for (int a : n.args) key.push_back(find(a));
  return key;
}

int CongruenceSolver::add_node(Node n) {
  std::vector<int> key;
  key.reserve(n.args.size() + 3);
  key.push_back(n.is_pred ? 1 : 0);
  key.push_back(n.sym);
  key.push_back(n.primed ? 1 : 0);
  for (int a : n.args) key.push_back(a);
  auto it = node_index_.find(key);
  if (it != node_index_.end()) return it->second;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size() - 1);
  node_index_.emplace(std::move(key), id);
  uf_.push_back(id);
  rank_.push_back(0);
  uses_.emplace_back();
  edt_member_.push_back(nodes_[static_cast<size_t>(id)].edt_constant >= 0 ? id : -1);
  proof_parent_.push_back(-1);
  proof_reason_.emplace_back();
  for (int a : nodes_[static_cast<size_t>(id)].args)
    uses_[static_cast<size_t>(find(a))].push_back(id);
  // congruence lookup by argument classes
  if (!nodes_[static_cast<size_t>(id)].args.empty()) {
    std::vector<int> ck = class_key(id);
    auto hit = sig_map_.find(ck);
    if (hit != sig_map_.end()) {
      Reason why;
      why.app_a = id;
      why.app_b = hit->second;
      if (!merge(id, hit->second, why)) consistent_ = false;
    } else {
      sig_map_.emplace(std::move(ck), id);
    }
  }
  return id;
}

int CongruenceSolver::intern_term(const TermPtr& t) {
  if (t->kind == Term::Kind::Var) throw SpecError("congruence closure over ground terms only");
  std::vector<int> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(intern_term(a));
  Node n;
  n.sym = t->fun;
  n.primed = t->primed;
  n.args = std::move(args);
  n.sort = t->sort;
  n.term = t;
  if (sig_->fun(t->fun).is_edt_constant) n.edt_constant = t->fun;
  return add_node(std::move(n));
}

int CongruenceSolver::intern_atom(const FormulaPtr& a) {
  std::vector<int> args;
  if (a->kind == Conn::Eq) throw SpecError("equalities are not atom nodes");
  for (const auto& t : a->terms) args.push_back(intern_term(t));
  Node n;
  n.is_pred = true;
  n.sym = a->pred;
  n.primed = a->primed;
  n.args = std::move(args);
  return add_node(std::move(n));
}

// makes `a` the root of its proof tree by reversing the path, then hangs it
// under b with the given reason
void CongruenceSolver::proof_link(int a, int b, const Reason& why) {
  int cur = a;
  int prev = -1;
  Reason carried;
  while (cur != -1) {
    int next = proof_parent_[static_cast<size_t>(cur)];
    Reason next_reason = proof_reason_[static_cast<size_t>(cur)];
    proof_parent_[static_cast<size_t>(cur)] = prev;
    proof_reason_[static_cast<size_t>(cur)] = carried;
    prev = cur;
    carried = next_reason;
    cur = next;
  }
  proof_parent_[static_cast<size_t>(a)] = b;
  proof_reason_[static_cast<size_t>(a)] = why;
}

void CongruenceSolver::explain(int a, int b, std::vector<int>& out) {
  if (a == b) return;
  // collect the ancestor chains and find the lowest common ancestor
  std::vector<int> pa;
  for (int x = a; x != -1; x = proof_parent_[static_cast<size_t>(x)]) pa.push_back(x);
  std::vector<int> pb;
  for (int x = b; x != -1; x = proof_parent_[static_cast<size_t>(x)]) pb.push_back(x);
  int lca = -1;
  {
    std::set<int> in_a(pa.begin(), pa.end());
    for (int x : pb)
      if (in_a.count(x)) {
        lca = x;
        break;
      }
  }
  if (lca == -1) throw SpecError("internal: explain on unmerged nodes");
  auto emit_edges = [&](int from) {
    for (int x = from; x != lca; x = proof_parent_[static_cast<size_t>(x)]) {
      const Reason& r = proof_reason_[static_cast<size_t>(x)];
      if (r.literal >= 0) {
        out.push_back(r.literal);
      } else {
        const Node& na = nodes_[static_cast<size_t>(r.app_a)];
        const Node& nb = nodes_[static_cast<size_t>(r.app_b)];
        for (size_t i = 0; i < na.args.size(); ++i) explain(na.args[i], nb.args[i], out);
      }
    }
  };
  emit_edges(a);
  emit_edges(b);
}

void CongruenceSolver::set_conflict(std::vector<int> lits) {
  std::sort(lits.begin(), lits.end());
  lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
  conflict_ = std::move(lits);
  consistent_ = false;
}

bool CongruenceSolver::merge(int a, int b, Reason why) {
  struct Pending {
    int a, b;
    Reason why;
  };
  std::vector<Pending> pending{{a, b, why}};
  while (!pending.empty()) {
    Pending p = pending.back();
    pending.pop_back();
    int rx = find(p.a), ry = find(p.b);
    if (rx == ry) continue;

    auto reason_lits = [&](std::vector<int>& out) {
      if (p.why.literal >= 0) {
        out.push_back(p.why.literal);
      } else {
        const Node& na = nodes_[static_cast<size_t>(p.why.app_a)];
        const Node& nb = nodes_[static_cast<size_t>(p.why.app_b)];
        for (size_t i = 0; i < na.args.size(); ++i) explain(na.args[i], nb.args[i], out);
      }
    };

    // distinct EDT constants may not merge
    int ea = edt_member_[static_cast<size_t>(rx)];
    int eb = edt_member_[static_cast<size_t>(ry)];
    if (ea >= 0 && eb >= 0 &&
        nodes_[static_cast<size_t>(ea)].edt_constant != nodes_[static_cast<size_t>(eb)].edt_constant) {
      std::vector<int> lits;
      reason_lits(lits);
      explain(p.a, ea, lits);
      explain(p.b, eb, lits);
      set_conflict(std::move(lits));
      return false;
    }
    // the boolean anchors may not merge
    if (true_node_ >= 0) {
      int rt = find(true_node_), rf = find(false_node_);
      if ((rx == rt && ry == rf) || (rx == rf && ry == rt)) {
        std::vector<int> lits;
        reason_lits(lits);
        explain(p.a, rx == rt ? true_node_ : false_node_, lits);
        explain(p.b, ry == rf ? false_node_ : true_node_, lits);
        set_conflict(std::move(lits));
        return false;
      }
    }

    proof_link(p.a, p.b, p.why);
    if (rank_[static_cast<size_t>(rx)] < rank_[static_cast<size_t>(ry)]) std::swap(rx, ry);
    if (rank_[static_cast<size_t>(rx)] == rank_[static_cast<size_t>(ry)])
      ++rank_[static_cast<size_t>(rx)];
    uf_[static_cast<size_t>(ry)] = rx;
    if (edt_member_[static_cast<size_t>(rx)] < 0)
      edt_member_[static_cast<size_t>(rx)] = edt_member_[static_cast<size_t>(ry)];

    // re-key the absorbed class's parents and chase new congruences
    auto moved = std::move(uses_[static_cast<size_t>(ry)]);
    uses_[static_cast<size_t>(ry)].clear();
    for (int q : moved) {
      std::vector<int> ck = class_key(q);
      auto hit = sig_map_.find(ck);
      if (hit != sig_map_.end() && find(hit->second) != find(q)) {
        Reason r;
        r.app_a = q;
        r.app_b = hit->second;
        pending.push_back({q, hit->second, r});
      } else {
        sig_map_[std::move(ck)] = q;
      }
      uses_[static_cast<size_t>(rx)].push_back(q);
    }
  }
  return true;
}

bool CongruenceSolver::assert_literals(const std::vector<FormulaPtr>& literals) {
  if (true_node_ < 0) {
    Node tn;
    tn.label = "<true>";
    nodes_.push_back(tn);
    true_node_ = static_cast<int>(nodes_.size() - 1);
    uf_.push_back(true_node_);
    rank_.push_back(0);
    uses_.emplace_back();
    edt_member_.push_back(-1);
    proof_parent_.push_back(-1);
    proof_reason_.emplace_back();
    Node fn;
    fn.label = "<false>";
    nodes_.push_back(fn);
    false_node_ = static_cast<int>(nodes_.size() - 1);
    uf_.push_back(false_node_);
    rank_.push_back(0);
    uses_.emplace_back();
    edt_member_.push_back(-1);
    proof_parent_.push_back(-1);
    proof_reason_.emplace_back();
  }
  for (size_t li = 0; li < literals.size(); ++li) {
    auto [atom, positive] = literal_parts(literals[li]);
    Reason why;
    why.literal = static_cast<int>(li);
    if (atom->kind == Conn::Eq) {
      int a = intern_term(atom->terms[0]);
      if (!consistent_) return false;
      int b = intern_term(atom->terms[1]);
      if (!consistent_) return false;
      if (positive) {
        if (!merge(a, b, why)) return false;
      } else {
        diseqs_.push_back({{a, b}, static_cast<int>(li)});
      }
    } else {
      int n = intern_atom(atom);
      if (!consistent_) return false;
      if (!merge(n, positive ? true_node_ : false_node_, why)) return false;
    }
  }
  for (const auto& [nodes, lit] : diseqs_) {
    if (find(nodes.first) == find(nodes.second)) {
      std::vector<int> lits{lit};
      explain(nodes.first, nodes.second, lits);
      set_conflict(std::move(lits));
      return false;
    }
  }
  consistent_ = true;
  return true;
}

bool CongruenceSolver::same_class(const TermPtr& a, const TermPtr& b) {
  return find(intern_term(a)) == find(intern_term(b));
}

TermPtr CongruenceSolver::normalize_term(const TermPtr& t) {
  if (t->kind == Term::Kind::Var) return t;
  std::vector<TermPtr> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) args.push_back(normalize_term(a));
  TermPtr cur = Term::app(*sig_, t->fun, std::move(args), t->primed);
  if (!is_ground(cur)) return cur;  // open terms (rule patterns) stay as-is
  for (int guard = 0; guard < 64; ++guard) {
    int rep = find(intern_term(cur));
    // minimal member of the class: constants first, then by printed label
    const Node* best = nullptr;
    auto measure = [&](const Node& x) {
      return std::make_tuple(x.term->args.empty() ? 0 : 1, print_term(*sig_, x.term));
    };
    for (size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.is_pred || !n.term) continue;
      if (find(static_cast<int>(i)) != rep) continue;
      if (!best || measure(n) < measure(*best)) best = &n;
    }
    if (!best) return cur;
    if (equal(best->term, cur)) return cur;
    TermPtr next = best->term;
    if (next->kind == Term::Kind::App && next->args.empty()) return next;
    std::vector<TermPtr> nargs;
    nargs.reserve(next->args.size());
    for (const auto& a : next->args) nargs.push_back(normalize_term(a));
    TermPtr rebuilt = Term::app(*sig_, next->fun, std::move(nargs), next->primed);
    if (equal(rebuilt, cur)) return cur;
    cur = rebuilt;
  }
  return cur;
}

FiniteStructure CongruenceSolver::build_model() const {
  FiniteStructure m;
  m.domains.resize(sig_->num_sorts());
  std::map<std::pair<SortId, FunId>, int> edt_element;
  for (size_t s = 0; s < sig_->num_sorts(); ++s) {
    const SortDecl& d = sig_->sort(static_cast<SortId>(s));
    if (!d.enumerated) continue;
    for (FunId c : d.edt_constants) {
      edt_element[{static_cast<SortId>(s), c}] = static_cast<int>(m.domains[s].size());
      m.domains[s].push_back(sig_->fun(c).name);
    }
  }
  auto* self = const_cast<CongruenceSolver*>(this);
  std::map<int, int> elem_of_class;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.is_pred || n.sort == kNoSort) continue;
    int rep = self->find(static_cast<int>(i));
    if (elem_of_class.count(rep)) continue;
    size_t s = static_cast<size_t>(n.sort);
    int em = edt_member_[static_cast<size_t>(rep)];
    if (em >= 0) {
      elem_of_class[rep] =
          edt_element.at({n.sort, nodes_[static_cast<size_t>(em)].edt_constant});
    } else {
      std::string best;
      for (size_t j = 0; j < nodes_.size(); ++j) {
        const Node& cand = nodes_[j];
        if (cand.is_pred || cand.sort != n.sort || !cand.term) continue;
        if (self->find(static_cast<int>(j)) != rep) continue;
        std::string label = print_term(*sig_, cand.term);
        if (best.empty() || label.size() < best.size() ||
            (label.size() == best.size() && label < best))
          best = std::move(label);
      }
      elem_of_class[rep] = static_cast<int>(m.domains[s].size());
      m.domains[s].push_back(best);
    }
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (static_cast<int>(i) == true_node_ || static_cast<int>(i) == false_node_) continue;
    int rep = self->find(static_cast<int>(i));
    if (n.is_pred) {
      if (rep != self->find(true_node_)) continue;
      std::vector<int> tuple;
      for (int a : n.args) tuple.push_back(elem_of_class.at(self->find(a)));
      m.preds[{static_cast<PredId>(n.sym), n.primed}].insert(std::move(tuple));
    } else if (n.sort != kNoSort) {
      std::vector<int> tuple;
      for (int a : n.args) tuple.push_back(elem_of_class.at(self->find(a)));
      m.funcs[{static_cast<FunId>(n.sym), n.primed}][std::move(tuple)] = elem_of_class.at(rep);
    }
  }
  return m;
}

bool ground_literals_consistent(const Signature& sig, const std::vector<FormulaPtr>& literals) {
  CongruenceSolver cc(sig);
  return cc.assert_literals(literals);
}

// ---- ground solving ----

namespace {

// refines an explanation core by greedy drop-one against the (cheap)
// congruence check; cores from the proof forest are already small
std::vector<FormulaPtr> shrink_core(const Signature& sig, std::vector<FormulaPtr> lits) {
  if (lits.size() > 16) return lits;
  size_t i = 0;
  while (i < lits.size()) {
    std::vector<FormulaPtr> without;
    without.reserve(lits.size() - 1);
    for (size_t j = 0; j < lits.size(); ++j)
      if (j != i) without.push_back(lits[j]);
    if (!ground_literals_consistent(sig, without))
      lits = std::move(without);
    else
      ++i;
  }
  return lits;
}

} // namespace

GroundSolver::GroundSolver(const Signature& sig, const FormulaPtr& f,
                           const std::vector<FormulaPtr>& assumption_atoms,
                           const std::vector<TermPtr>* edt_scope)
    : sig_(sig) {
  if (!is_ground(f))
    throw SpecError("solve_ground: input is not ground; instantiate or skolemize first");
  CnfBuilder cnf(atoms_);
  // assumption atoms first so their indices are stable for core mapping
  for (const auto& a : assumption_atoms) {
    auto [atom, positive] = literal_parts(a);
    (void)positive;
    if (!is_ground(atom)) throw SpecError("solve_ground: assumption is not ground");
    atoms_.intern(atom);
  }
  cnf.assert_formula(f);

  // EDT exhaustiveness for every enumerated-sorted term of the query; a
  // caller that extends the formula with derived sentences (e.g. axiom
  // instances) passes the original query terms as the scope
  {
    std::vector<TermPtr> terms;
    if (edt_scope) {
      terms = *edt_scope;
    } else {
      terms = collect_subterms(f);
      for (const auto& a : assumption_atoms) {
        auto [atom, positive] = literal_parts(a);
        (void)positive;
        for (const auto& t : atom->terms) collect_subterms(t, terms);
      }
    }
    for (const auto& t : terms) {
      if (t->sort == kNoSort) continue;
      const SortDecl& sd = sig.sort(t->sort);
      if (!sd.enumerated) continue;
      if (t->kind == Term::Kind::App && t->args.empty() && sig.fun(t->fun).is_edt_constant)
        continue;
      Clause c;
      for (FunId cst : sd.edt_constants)
        c.push_back(pos(atoms_.intern(Formula::eq(t, Term::constant(sig, cst)))));
      cnf.add_clause(std::move(c));
    }
  }

  // equality-logic seeding over the registered atoms: transitivity triangles
  // whose three pairwise atoms all exist; cuts lemma-at-a-time thrashing
  {
    std::vector<int> eq_atoms;
    for (int i = 0; i < atoms_.size(); ++i)
      if (atoms_.at(i)->kind == Conn::Eq) eq_atoms.push_back(i);
    auto endpoint_key = [&](const TermPtr& t) { return t->hash; };
    std::map<size_t, std::vector<std::pair<int, bool>>> by_end;  // (atom, term-is-lhs)
    for (int i : eq_atoms) {
      by_end[endpoint_key(atoms_.at(i)->terms[0])].emplace_back(i, true);
      by_end[endpoint_key(atoms_.at(i)->terms[1])].emplace_back(i, false);
    }
    std::set<std::array<int, 3>> seeded;
    for (const auto& [key, uses] : by_end) {
      (void)key;
      for (size_t x = 0; x < uses.size(); ++x)
        for (size_t y = x + 1; y < uses.size(); ++y) {
          int a = uses[x].first, b = uses[y].first;
          if (a == b) continue;
          const FormulaPtr& fa = atoms_.at(a);
          const FormulaPtr& fb = atoms_.at(b);
          const TermPtr& ta = uses[x].second ? fa->terms[1] : fa->terms[0];
          const TermPtr& tb = uses[y].second ? fb->terms[1] : fb->terms[0];
          if (!equal(uses[x].second ? fa->terms[0] : fa->terms[1],
                     uses[y].second ? fb->terms[0] : fb->terms[1]))
            continue;  // hash collision
          if (equal(ta, tb)) continue;
          auto third = atoms_.find(Formula::eq(ta, tb));
          if (!third) continue;
          std::array<int, 3> tri{a, b, *third};
          std::sort(tri.begin(), tri.end());
          if (!seeded.insert(tri).second) continue;
          int c = *third;
          cnf.add_clause({neg(a), neg(b), pos(c)});
          cnf.add_clause({neg(a), neg(c), pos(b)});
          cnf.add_clause({neg(b), neg(c), pos(a)});
        }
    }
  }
  num_vars_ = cnf.finalize();
  base_ = cnf.clauses();
  neg_cache_.reserve(static_cast<size_t>(atoms_.size()));
  for (int i = 0; i < atoms_.size(); ++i) neg_cache_.push_back(Formula::negate(atoms_.at(i)));
  // decide equalities before predicate atoms: equality choices drive the
  // instance chains by propagation instead of case splitting
  order_.clear();
  for (int i = 0; i < atoms_.size(); ++i)
    if (atoms_.at(i)->kind == Conn::Eq) order_.push_back(i);
  for (int i = 0; i < atoms_.size(); ++i)
    if (atoms_.at(i)->kind != Conn::Eq) order_.push_back(i);
  for (int v = atoms_.size(); v < num_vars_; ++v) order_.push_back(v);
}

Status GroundSolver::run(const std::vector<std::pair<int, bool>>& assume,
                         FiniteStructure* out_model) {
  std::vector<Clause> clauses = base_;
  clauses.insert(clauses.end(), theory_lemmas_.begin(), theory_lemmas_.end());
  for (auto [idx, positive] : assume)
    clauses.push_back({positive ? pos(idx) : neg(idx)});
  BoolEnumerator en(num_vars_, std::move(clauses), order_);
  while (auto assignment = en.next()) {
    std::vector<FormulaPtr> lits;
    lits.reserve(static_cast<size_t>(atoms_.size()));
    for (int i = 0; i < atoms_.size(); ++i) {
      lits.push_back((*assignment)[static_cast<size_t>(i)]
                         ? atoms_.at(i)
                         : neg_cache_[static_cast<size_t>(i)]);
    }
    CongruenceSolver cc(sig_);
    if (cc.assert_literals(lits)) {
      if (out_model) {
        *out_model = cc.build_model();
        if (!out_model->satisfies_literals(lits))
          throw SpecError("internal: model fails its own literals");
      }
      return Status::Sat;
    }
    std::vector<FormulaPtr> core;
    for (int li : cc.conflict_literals()) core.push_back(lits[static_cast<size_t>(li)]);
    core = shrink_core(sig_, std::move(core));
    Clause learned;
    for (const auto& lit : core) {
      auto [atom, positive] = literal_parts(lit);
      int idx = *atoms_.find(atom);
      learned.push_back(positive ? neg(idx) : pos(idx));
    }
    // progress: the learned clause rules out the current assignment
    for (Lit l : learned) {
      if ((*assignment)[static_cast<size_t>(var_of(l))] == sign_of(l))
        throw SpecError("internal: learned clause does not prune the current assignment");
    }
    theory_lemmas_.push_back(learned);
    en.learn(std::move(learned));
  }
  return Status::Unsat;
}

Verdict GroundSolver::solve(const std::vector<FormulaPtr>& literals) {
  std::vector<std::pair<int, bool>> assumption_lits;
  assumption_lits.reserve(literals.size());
  for (const auto& a : literals) {
    auto [atom, positive] = literal_parts(a);
    auto idx = atoms_.find(atom);
    if (!idx) throw SpecError("ground solver: literal outside the registered atom universe");
    assumption_lits.emplace_back(*idx, positive);
  }
  FiniteStructure model;
  Status st = run(assumption_lits, &model);
  if (st == Status::Sat) return Verdict::sat(std::move(model));

  // greedy drop-one core over the assumptions, reusing the theory lemmas
  std::vector<size_t> core_idx(literals.size());
  for (size_t i = 0; i < core_idx.size(); ++i) core_idx[i] = i;
  size_t i = 0;
  while (i < core_idx.size()) {
    std::vector<std::pair<int, bool>> without;
    for (size_t j = 0; j < core_idx.size(); ++j)
      if (j != i) without.push_back(assumption_lits[core_idx[j]]);
    if (run(without, nullptr) == Status::Unsat) {
      core_idx.erase(core_idx.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }
  std::vector<FormulaPtr> core;
  for (size_t j : core_idx) core.push_back(literals[j]);
  return Verdict::unsat(std::move(core));
}

Verdict solve_ground_assuming(const Signature& sig, const FormulaPtr& f,
                              const std::vector<FormulaPtr>& assumptions,
                              const std::vector<TermPtr>* edt_scope) {
  GroundSolver solver(sig, f, assumptions, edt_scope);
  return solver.solve(assumptions);
}

Verdict solve_ground(const Signature& sig, const FormulaPtr& f) {
  return solve_ground_assuming(sig, f, {});
}

} // namespace soverify
