#include "soverify/parser.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace soverify {

namespace {

// ---- s-expression reader ----

struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 0, col = 0;

  bool is_list() const { return !is_atom; }
  bool head_is(const std::string& kw) const {
    return is_list() && !items.empty() && items[0].is_atom && items[0].atom == kw;
  }
};

struct Reader {
  const std::string& text;
  size_t pos = 0;
  int line = 1, col = 1;

  explicit Reader(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(line, col, "reader", msg);
  }

  int peek() const { return pos < text.size() ? static_cast<unsigned char>(text[pos]) : -1; }

  int get() {
    int c = peek();
    if (c < 0) return c;
    ++pos;
    if (c == '\n') { ++line; col = 1; } else { ++col; }
    return c;
  }

  void skip_ws() {
    while (true) {
      int c = peek();
      if (c == ';') {
        while (peek() >= 0 && peek() != '\n') get();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        get();
      } else {
        return;
      }
    }
  }

  static bool atom_char(int c) {
    return c > 0 && c != '(' && c != ')' && c != ';' && c != ' ' && c != '\t' &&
           c != '\r' && c != '\n';
  }

  SExpr read() {
    skip_ws();
    SExpr e;
    e.line = line;
    e.col = col;
    int c = peek();
    if (c < 0) fail("unexpected end of input");
    if (c == ')') fail("unexpected ')'");
    if (c == '(') {
      get();
      while (true) {
        skip_ws();
        if (peek() < 0) throw ParseError(e.line, e.col, "reader", "unterminated '('");
        if (peek() == ')') { get(); break; }
        e.items.push_back(read());
      }
      return e;
    }
    e.is_atom = true;
    while (atom_char(peek())) e.atom.push_back(static_cast<char>(get()));
    if (e.atom.empty()) fail("empty token");
    return e;
  }

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    while (true) {
      skip_ws();
      if (peek() < 0) break;
      out.push_back(read());
    }
    return out;
  }
};

[[noreturn]] void fail_at(const SExpr& e, const std::string& production, const std::string& msg) {
  throw ParseError(e.line, e.col, production, msg);
}

const std::string& atom_of(const SExpr& e, const std::string& production) {
  if (!e.is_atom) fail_at(e, production, "expected an identifier");
  return e.atom;
}

void collect_atom_spellings(const SExpr& e, std::vector<std::string>& out) {
  if (e.is_atom) {
    out.push_back(e.atom);
    return;
  }
  for (const auto& it : e.items) collect_atom_spellings(it, out);
}

// ---- formula parsing ----

struct Scope {
  // innermost-last; shadowed names are renamed at parse time so bodies are
  // shadow-free afterwards
  std::vector<std::pair<std::string, SortId>> vars;

  std::optional<SortId> lookup(const std::string& name) const {
    for (auto it = vars.rbegin(); it != vars.rend(); ++it)
      if (it->first == name) return it->second;
    return std::nullopt;
  }
};

struct FormulaParser {
  const Signature& sig;
  bool allow_free = false;                 // rule mode: unknown symbols become variables
  std::map<std::string, SortId>* free_vars = nullptr;  // inferred rule variables
  int* wildcard_counter = nullptr;

  TermPtr parse_term(const SExpr& e, Scope& scope, std::optional<SortId> expected) const {
    if (e.is_atom) {
      const std::string& name = e.atom;
      if (name == "_") {
        if (!allow_free || !wildcard_counter)
          fail_at(e, "term", "wildcard '_' is only allowed in rules");
        if (!expected) fail_at(e, "term", "cannot infer a sort for '_' here");
        std::string fresh = "_w" + std::to_string(++*wildcard_counter);
        (*free_vars)[fresh] = *expected;
        return Term::var(fresh, *expected);
      }
      if (name.size() > 1 && name.back() == '\'')
        fail_at(e, "term", "primed symbol " + name + " is not allowed in this context");
      if (auto s = scope.lookup(name)) {
        if (expected && *expected != *s)
          fail_at(e, "term", "variable " + name + " has sort " + sig.sort(*s).name +
                               ", expected " + sig.sort(*expected).name);
        return Term::var(name, *s);
      }
      if (auto f = sig.find_fun(name)) {
        const FunDecl& d = sig.fun(*f);
        if (!d.args.empty())
          fail_at(e, "term", "function " + name + " expects arguments");
        if (expected && *expected != d.result)
          fail_at(e, "term", name + " has sort " + sig.sort(d.result).name + ", expected " +
                               sig.sort(*expected).name);
        return Term::constant(sig, *f);
      }
      if (allow_free && free_vars) {
        auto it = free_vars->find(name);
        if (it != free_vars->end()) {
          if (expected && *expected != it->second)
            fail_at(e, "term", "rule variable " + name + " used at two different sorts");
          return Term::var(name, it->second);
        }
        if (!expected) fail_at(e, "term", "cannot infer a sort for rule variable " + name);
        (*free_vars)[name] = *expected;
        return Term::var(name, *expected);
      }
      fail_at(e, "term", "unknown symbol " + name);
    }
    if (e.items.empty()) fail_at(e, "term", "empty term");
    const std::string& head = atom_of(e.items[0], "term");
    if (head.size() > 1 && head.back() == '\'')
      fail_at(e, "term", "primed symbol " + head + " is not allowed in this context");
    auto f = sig.find_fun(head);
    if (!f) fail_at(e, "term", "unknown function " + head);
    const FunDecl& d = sig.fun(*f);
    if (e.items.size() - 1 != d.args.size())
      fail_at(e, "term", "function " + head + " expects " + std::to_string(d.args.size()) +
                           " arguments");
    std::vector<TermPtr> args;
    for (size_t i = 1; i < e.items.size(); ++i)
      args.push_back(parse_term(e.items[i], scope, d.args[i - 1]));
    if (expected && *expected != d.result)
      fail_at(e, "term", head + " has sort " + sig.sort(d.result).name + ", expected " +
                           sig.sort(*expected).name);
    try {
      return Term::app(sig, *f, std::move(args));
    } catch (const SpecError& err) {
      fail_at(e, "term", err.what());
    }
  }

  std::vector<std::pair<std::string, SortId>> parse_binders(const SExpr& e) const {
    if (!e.is_list()) fail_at(e, "binders", "expected a binder list");
    std::vector<std::pair<std::string, SortId>> out;
    for (const auto& b : e.items) {
      if (!b.is_list() || b.items.size() != 2)
        fail_at(b, "binders", "expected (name Sort)");
      const std::string& name = atom_of(b.items[0], "binders");
      const std::string& sort_name = atom_of(b.items[1], "binders");
      auto s = sig.find_sort(sort_name);
      if (!s) fail_at(b.items[1], "binders", "unknown sort " + sort_name);
      for (const auto& prev : out)
        if (prev.first == name) fail_at(b.items[0], "binders", "duplicate binder " + name);
      out.emplace_back(name, *s);
    }
    return out;
  }

  FormulaPtr parse(const SExpr& e, Scope& scope) const {
    if (e.is_atom) {
      if (e.atom == "true") return Formula::tru();
      if (e.atom == "false") return Formula::fls();
      // 0-ary predicate written without parentheses
      if (auto p = sig.find_pred(e.atom)) {
        if (!sig.pred(*p).args.empty())
          fail_at(e, "formula", "predicate " + e.atom + " expects arguments");
        return Formula::atom(sig, *p, {});
      }
      fail_at(e, "formula", "expected a formula, got " + e.atom);
    }
    if (e.items.empty()) fail_at(e, "formula", "empty formula");
    const std::string& head = atom_of(e.items[0], "formula");
    auto need = [&](size_t n) {
      if (e.items.size() - 1 != n)
        fail_at(e, "formula", head + " expects " + std::to_string(n) + " arguments");
    };
    if (head == "and" || head == "or") {
      std::vector<FormulaPtr> kids;
      for (size_t i = 1; i < e.items.size(); ++i) kids.push_back(parse(e.items[i], scope));
      return head == "and" ? Formula::conj(std::move(kids)) : Formula::disj(std::move(kids));
    }
    if (head == "not") {
      need(1);
      return Formula::negate(parse(e.items[1], scope));
    }
    if (head == "implies") {
      need(2);
      return Formula::implies(parse(e.items[1], scope), parse(e.items[2], scope));
    }
    if (head == "iff") {
      need(2);
      return Formula::iff(parse(e.items[1], scope), parse(e.items[2], scope));
    }
    if (head == "ite") {
      need(3);
      return Formula::ite(parse(e.items[1], scope), parse(e.items[2], scope),
                          parse(e.items[3], scope));
    }
    if (head == "=") {
      need(2);
      TermPtr lhs = parse_term(e.items[1], scope, std::nullopt);
      TermPtr rhs = parse_term(e.items[2], scope, lhs->sort);
      return Formula::eq(std::move(lhs), std::move(rhs));
    }
    if (head == "forall" || head == "exists") {
      need(2);
      auto binders = parse_binders(e.items[1]);
      // rename shadowing binders so parsed formulas are shadow-free
      Scope body_scope = scope;
      std::map<std::string, TermPtr> renames;
      std::vector<std::string> body_names;
      for (auto& b : binders) {
        std::string source = b.first;
        if (scope.lookup(source)) {
          if (body_names.empty()) collect_atom_spellings(e.items[2], body_names);
          int n = 0;
          std::string fresh;
          auto taken = [&](const std::string& name) {
            return scope.lookup(name).has_value() ||
                   std::find(body_names.begin(), body_names.end(), name) != body_names.end();
          };
          do {
            fresh = source + "#" + std::to_string(++n);
          } while (taken(fresh));
          b.first = fresh;
          renames[source] = Term::var(fresh, b.second);
        }
        body_scope.vars.emplace_back(source, b.second);
      }
      FormulaPtr body = parse(e.items[2], body_scope);
      if (!renames.empty()) body = rename_free(body, renames);
      return head == "forall" ? Formula::forall(std::move(binders), std::move(body))
                              : Formula::exists(std::move(binders), std::move(body));
    }
    // predicate atom
    if (head.size() > 1 && head.back() == '\'')
      fail_at(e.items[0], "formula", "primed symbol " + head +
                                        " is not allowed in this context");
    auto p = sig.find_pred(head);
    if (!p) fail_at(e.items[0], "formula", "unknown predicate " + head);
    const PredDecl& d = sig.pred(*p);
    if (e.items.size() - 1 != d.args.size())
      fail_at(e, "formula", "predicate " + head + " expects " +
                              std::to_string(d.args.size()) + " arguments");
    std::vector<TermPtr> args;
    for (size_t i = 1; i < e.items.size(); ++i)
      args.push_back(parse_term(e.items[i], scope, d.args[i - 1]));
    return Formula::atom(sig, *p, std::move(args));
  }

  // capture-free renaming of free variables (rename targets are fresh)
  static TermPtr rename_free(const TermPtr& t, const std::map<std::string, TermPtr>& m) {
    if (t->kind == Term::Kind::Var) {
      auto it = m.find(t->var_name);
      return it == m.end() ? t : it->second;
    }
    auto copy = std::make_shared<Term>(*t);
    for (auto& a : copy->args) a = rename_free(a, m);
    return copy;
  }

  static FormulaPtr rename_free(const FormulaPtr& f, const std::map<std::string, TermPtr>& m) {
    auto copy = std::make_shared<Formula>(*f);
    for (auto& t : copy->terms) t = rename_free(t, m);
    std::map<std::string, TermPtr> inner = m;
    if (f->kind == Conn::Forall || f->kind == Conn::Exists)
      for (const auto& b : f->binders) inner.erase(b.first);
    for (auto& k : copy->kids) k = rename_free(k, inner);
    return copy;
  }
};

} // namespace

// ---- system parsing ----

namespace {

struct SystemParser {
  TwoLevelSystem sys;
  std::vector<const SExpr*> pending_transitions;
  const SExpr* init_block = nullptr;

  void parse(const SExpr& e) {
    if (e.items.size() < 2) fail_at(e, "system", "expected (system Name blocks...)");
    sys.name = atom_of(e.items[1], "system");
    // declaration passes: sorts and symbols first, then axioms/rules/state,
    // then init and transitions (which reference state symbols)
    for (size_t i = 2; i < e.items.size(); ++i) declare_block(e.items[i]);
    for (size_t i = 2; i < e.items.size(); ++i) body_block(e.items[i]);
    if (init_block == nullptr) fail_at(e, "system", "missing (init ...) block");
    parse_init(*init_block);
    for (const SExpr* t : pending_transitions) parse_transition(*t);
  }

  void declare_block(const SExpr& e) {
    if (!e.is_list() || e.items.empty()) fail_at(e, "system", "expected a block");
    const std::string& kw = atom_of(e.items[0], "system");
    if (kw == "substrate") {
      for (size_t i = 1; i < e.items.size(); ++i) declare_substrate_item(e.items[i]);
    } else if (kw == "wf" || kw == "pm") {
      Level level = kw == "wf" ? Level::WF : Level::PM;
      for (size_t i = 1; i < e.items.size(); ++i) declare_level_item(e.items[i], level);
    } else if (kw == "statevars") {
      for (size_t i = 1; i < e.items.size(); ++i) {
        const SExpr& v = e.items[i];
        if (!v.is_list() || v.items.size() != 2) fail_at(v, "statevars", "expected (name Sort)");
        SortId s = need_sort(v.items[1]);
        FunId f = add_fun(v.items[0], {}, s, Level::StateVar);
        sys.state_vars.push_back(f);
      }
    } else if (kw == "statepreds") {
      for (size_t i = 1; i < e.items.size(); ++i) {
        const SExpr& v = e.items[i];
        if (!v.is_list() || v.items.size() != 2 || !v.items[1].is_list())
          fail_at(v, "statepreds", "expected (name (Sorts...))");
        std::vector<SortId> args;
        for (const auto& a : v.items[1].items) args.push_back(need_sort(a));
        PredId p = add_pred(v.items[0], std::move(args), Level::StatePred);
        sys.state_preds.push_back(p);
      }
    } else if (kw == "init") {
      if (init_block) fail_at(e, "system", "duplicate init block");
      init_block = &e;
    } else if (kw == "transition" || kw == "defformula") {
      // parsed in the body pass
    } else {
      fail_at(e, "system", "unknown block " + kw);
    }
  }

  void declare_substrate_item(const SExpr& e) {
    if (!e.is_list() || e.items.empty()) fail_at(e, "substrate", "expected an item");
    const std::string& kw = atom_of(e.items[0], "substrate");
    if (kw == "edt") {
      SortId s = parse_edt(e, Level::Substrate);
      sys.substrate.edt_sorts.push_back(s);
      if (sys.sig.sort(s).name == "Id") sys.substrate.id_sort = s;
    } else if (kw == "equivalence") {
      if (e.items.size() != 2) fail_at(e, "substrate", "expected (equivalence Sort)");
      SortId s = sys.sig.add_sort(atom_of(e.items[1], "substrate"), Level::Substrate, false);
      sys.substrate.equivalence = true;
      sys.substrate.id_sort = s;
    } else if (kw == "const") {
      if (e.items.size() != 3) fail_at(e, "substrate", "expected (const name Sort)");
      add_fun(e.items[1], {}, need_sort(e.items[2]), Level::Substrate);
    } else {
      fail_at(e, "substrate", "unknown substrate item " + kw);
    }
  }

  void declare_level_item(const SExpr& e, Level level) {
    if (!e.is_list() || e.items.empty()) fail_at(e, "declaration", "expected an item");
    const std::string& kw = atom_of(e.items[0], "declaration");
    if (kw == "sort") {
      if (e.items.size() != 2) fail_at(e, "sort", "expected (sort Name)");
      sys.sig.add_sort(atom_of(e.items[1], "sort"), level, false);
    } else if (kw == "edt") {
      SortId s = parse_edt(e, level);
      if (level == Level::WF) sys.wf.edt_sorts.push_back(s);
      else fail_at(e, "edt", "enumerated sorts belong to the substrate or WF level");
    } else if (kw == "fun") {
      if (e.items.size() != 4 || !e.items[2].is_list())
        fail_at(e, "fun", "expected (fun name (ArgSorts...) ResultSort)");
      std::vector<SortId> args;
      for (const auto& a : e.items[2].items) args.push_back(need_sort(a));
      add_fun(e.items[1], std::move(args), need_sort(e.items[3]), level);
    } else if (kw == "const") {
      if (e.items.size() != 3) fail_at(e, "const", "expected (const name Sort)");
      add_fun(e.items[1], {}, need_sort(e.items[2]), level);
    } else if (kw == "pred") {
      if (e.items.size() != 3 || !e.items[2].is_list())
        fail_at(e, "pred", "expected (pred name (ArgSorts...))");
      std::vector<SortId> args;
      for (const auto& a : e.items[2].items) args.push_back(need_sort(a));
      add_pred(e.items[1], std::move(args), level);
    } else if (kw == "axiom" || kw == "axioms" || kw == "rule" || kw == "fact" || kw == "mode") {
      // body pass
    } else {
      fail_at(e, "declaration", "unknown item " + kw);
    }
  }

  void body_block(const SExpr& e) {
    const std::string& kw = e.items[0].atom;
    if (kw == "wf") {
      for (size_t i = 1; i < e.items.size(); ++i) {
        const SExpr& it = e.items[i];
        const std::string& ikw = atom_of(it.items[0], "wf");
        if (ikw == "axiom") {
          if (it.items.size() != 3) fail_at(it, "axiom", "expected (axiom name formula)");
          sys.wf.axioms.emplace_back(atom_of(it.items[1], "axiom"),
                                     parse_closed_formula(it.items[2]));
        } else if (ikw == "axioms") {
          for (size_t j = 1; j < it.items.size(); ++j)
            sys.wf.axioms.emplace_back("ax" + std::to_string(sys.wf.axioms.size() + 1),
                                       parse_closed_formula(it.items[j]));
        }
      }
    } else if (kw == "pm") {
      for (size_t i = 1; i < e.items.size(); ++i) {
        const SExpr& it = e.items[i];
        const std::string& ikw = atom_of(it.items[0], "pm");
        if (ikw == "mode") {
          if (it.items.size() < 2) fail_at(it, "mode", "expected (mode datalog|horn k)");
          const std::string& m = atom_of(it.items[1], "mode");
          if (m == "datalog") {
            sys.pm.mode = PmMode::Datalog;
          } else if (m == "horn") {
            sys.pm.mode = PmMode::HornDepthBounded;
            if (it.items.size() != 3)
              fail_at(it, "mode", "horn mode requires an explicit depth bound");
            try {
              sys.pm.horn_depth = std::stoi(atom_of(it.items[2], "mode"));
            } catch (...) {
              fail_at(it.items[2], "mode", "depth bound must be an integer");
            }
            if (sys.pm.horn_depth < 0) fail_at(it, "mode", "depth bound must be >= 0");
          } else {
            fail_at(it.items[1], "mode", "unknown mode " + m);
          }
        } else if (ikw == "rule" || ikw == "fact") {
          parse_rule(it, ikw == "fact");
        }
      }
    } else if (kw == "transition") {
      pending_transitions.push_back(&e);
    } else if (kw == "defformula") {
      if (e.items.size() != 3) fail_at(e, "defformula", "expected (defformula name formula)");
      const std::string& name = atom_of(e.items[1], "defformula");
      if (sys.named_formulas.count(name)) fail_at(e, "defformula", "duplicate formula " + name);
      sys.named_formulas[name] = parse_closed_formula(e.items[2]);
    }
  }

  SortId parse_edt(const SExpr& e, Level level) {
    if (e.items.size() != 3 || !e.items[2].is_list())
      fail_at(e, "edt", "expected (edt Sort (constants...))");
    if (e.items[2].items.empty()) fail_at(e.items[2], "edt", "EDT constant list is empty");
    SortId s = sys.sig.add_sort(atom_of(e.items[1], "edt"), level, true);
    for (const auto& c : e.items[2].items) {
      try {
        sys.sig.add_fun(atom_of(c, "edt"), {}, s, level, true);
      } catch (const SpecError& err) {
        fail_at(c, "edt", err.what());
      }
    }
    return s;
  }

  SortId need_sort(const SExpr& e) {
    auto s = sys.sig.find_sort(atom_of(e, "sort"));
    if (!s) fail_at(e, "sort", "unknown sort " + e.atom);
    return *s;
  }

  FunId add_fun(const SExpr& name, std::vector<SortId> args, SortId result, Level level) {
    try {
      return sys.sig.add_fun(atom_of(name, "declaration"), std::move(args), result, level);
    } catch (const SpecError& err) {
      fail_at(name, "declaration", err.what());
    }
  }

  PredId add_pred(const SExpr& name, std::vector<SortId> args, Level level) {
    try {
      return sys.sig.add_pred(atom_of(name, "declaration"), std::move(args), level);
    } catch (const SpecError& err) {
      fail_at(name, "declaration", err.what());
    }
  }

  FormulaPtr parse_closed_formula(const SExpr& e) {
    FormulaParser fp{sys.sig};
    Scope scope;
    FormulaPtr f = fp.parse(e, scope);
    std::vector<std::pair<std::string, SortId>> free;
    collect_free_vars(f, free);
    if (!free.empty()) fail_at(e, "formula", "unbound variable " + free[0].first);
    return f;
  }

  void parse_rule(const SExpr& e, bool is_fact) {
    // (rule name head (body...)) | (fact name head)
    if (is_fact) {
      if (e.items.size() != 3) fail_at(e, "fact", "expected (fact name atom)");
    } else if (e.items.size() != 4 || !e.items[3].is_list()) {
      fail_at(e, "rule", "expected (rule name head (body-atoms...))");
    }
    Rule r;
    r.name = atom_of(e.items[1], "rule");
    std::map<std::string, SortId> vars;
    int wildcards = 0;
    FormulaParser fp{sys.sig, /*allow_free=*/true, &vars, &wildcards};
    Scope scope;
    // body first: head variables should preferably be bound by the body
    if (!is_fact) {
      for (const auto& b : e.items[3].items) {
        FormulaPtr atom = fp.parse(b, scope);
        if (atom->kind != Conn::Atom && atom->kind != Conn::Eq)
          fail_at(b, "rule", "rule bodies may contain only atoms");
        r.body.push_back(std::move(atom));
      }
    }
    FormulaPtr head = fp.parse(e.items[2], scope);
    if (head->kind != Conn::Atom) fail_at(e.items[2], "rule", "rule head must be an atom");
    r.head = std::move(head);
    sys.pm.rules.push_back(std::move(r));
  }

  void parse_init(const SExpr& e) {
    FormulaParser fp{sys.sig};
    Scope scope;
    bool saw_wf = false;
    for (size_t i = 1; i < e.items.size(); ++i) {
      const SExpr& it = e.items[i];
      if (!it.is_list() || it.items.empty()) fail_at(it, "init", "expected an init item");
      const std::string& kw = atom_of(it.items[0], "init");
      if (kw == "ids") {
        SExpr binder_list;
        binder_list.items.assign(it.items.begin() + 1, it.items.end());
        sys.init.id_vars = fp.parse_binders(binder_list);
        for (const auto& [name, sort] : sys.init.id_vars) {
          if (sort != sys.substrate.id_sort)
            fail_at(it, "init", "init ids must have sort Id");
          scope.vars.emplace_back(name, sort);
        }
      } else if (kw == "wf") {
        if (it.items.size() != 2) fail_at(it, "init", "expected (wf formula)");
        sys.init.wf_part = fp.parse(it.items[1], scope);
        if (!is_quantifier_free(sys.init.wf_part))
          fail_at(it, "init", "the WF part of the initial formula must be quantifier-free");
        saw_wf = true;
      } else if (kw == "define") {
        sys.init.pm_defs.push_back(parse_update(it, scope, /*primed=*/false));
      } else {
        fail_at(it, "init", "unknown init item " + kw);
      }
    }
    if (!saw_wf) sys.init.wf_part = Formula::tru();
    // exactly one definition per state predicate
    for (PredId p : sys.state_preds) {
      int count = 0;
      for (const auto& d : sys.init.pm_defs) count += d.pred == p;
      if (count != 1)
        fail_at(e, "init", "state predicate " + sys.sig.pred(p).name +
                             " needs exactly one init definition");
    }
  }

  PredicateUpdate parse_update(const SExpr& e, Scope& outer, bool primed) {
    // (define p['] ((z S)...) formula)
    if (e.items.size() != 4 || !e.items[2].is_list())
      fail_at(e, "define", "expected (define pred (params...) formula)");
    std::string name = atom_of(e.items[1], "define");
    if (primed) {
      if (name.empty() || name.back() != '\'')
        fail_at(e.items[1], "define", "transition definitions update primed predicates (p')");
      name.pop_back();
    } else if (!name.empty() && name.back() == '\'') {
      fail_at(e.items[1], "define", "init definitions are over unprimed predicates");
    }
    auto p = sys.sig.find_pred(name);
    if (!p) fail_at(e.items[1], "define", "unknown predicate " + name);
    if (sys.sig.pred(*p).level != Level::StatePred)
      fail_at(e.items[1], "define", name + " is not a state predicate");
    FormulaParser fp{sys.sig};
    PredicateUpdate u;
    u.pred = *p;
    u.params = fp.parse_binders(e.items[2]);
    const PredDecl& d = sys.sig.pred(*p);
    if (u.params.size() != d.args.size())
      fail_at(e.items[2], "define", "parameter count does not match the arity of " + name);
    for (size_t i = 0; i < u.params.size(); ++i)
      if (u.params[i].second != d.args[i])
        fail_at(e.items[2], "define", "parameter sorts do not match the signature of " + name);
    Scope scope = outer;
    for (const auto& b : u.params) scope.vars.emplace_back(b.first, b.second);
    u.def = fp.parse(e.items[3], scope);
    if (!is_quantifier_free(u.def))
      fail_at(e.items[3], "define", "update definitions must be quantifier-free");
    return u;
  }

  void parse_transition(const SExpr& e) {
    if (e.items.size() < 3) fail_at(e, "transition", "expected (transition Name items...)");
    Transition tr;
    tr.name = atom_of(e.items[1], "transition");
    for (const auto& prev : sys.transitions)
      if (prev.name == tr.name) fail_at(e.items[1], "transition", "duplicate transition " + tr.name);
    FormulaParser fp{sys.sig};
    Scope scope;
    bool saw_guard = false;
    for (size_t i = 2; i < e.items.size(); ++i) {
      const SExpr& it = e.items[i];
      if (!it.is_list() || it.items.empty()) fail_at(it, "transition", "expected an item");
      const std::string& kw = atom_of(it.items[0], "transition");
      if (kw == "ids" || kw == "vars") {
        SExpr binder_list;
        binder_list.items.assign(it.items.begin() + 1, it.items.end());
        auto binders = fp.parse_binders(binder_list);
        for (const auto& [name, sort] : binders) {
          if (kw == "ids" && sort != sys.substrate.id_sort)
            fail_at(it, "transition", "ids binders must have sort Id");
          scope.vars.emplace_back(name, sort);
        }
        auto& dst = kw == "ids" ? tr.id_vars : tr.data_vars;
        dst.insert(dst.end(), binders.begin(), binders.end());
      } else if (kw == "guard") {
        if (it.items.size() != 2) fail_at(it, "transition", "expected (guard formula)");
        tr.guard = fp.parse(it.items[1], scope);
        if (!is_quantifier_free(tr.guard))
          fail_at(it, "transition", "guards must be quantifier-free");
        saw_guard = true;
      } else if (kw == "assign") {
        if (it.items.size() != 3) fail_at(it, "transition", "expected (assign x' term)");
        std::string name = atom_of(it.items[1], "assign");
        if (name.empty() || name.back() != '\'')
          fail_at(it.items[1], "assign", "assignments update primed state variables (x')");
        name.pop_back();
        auto f = sys.sig.find_fun(name);
        if (!f || sys.sig.fun(*f).level != Level::StateVar)
          fail_at(it.items[1], "assign", name + " is not a state variable");
        for (const auto& [x, t] : tr.wf_updates) {
          (void)t;
          if (x == *f) fail_at(it, "assign", "duplicate assignment to " + name);
        }
        TermPtr rhs = fp.parse_term(it.items[2], scope, sys.sig.fun(*f).result);
        tr.wf_updates.emplace_back(*f, std::move(rhs));
      } else if (kw == "define") {
        PredicateUpdate u = parse_update(it, scope, /*primed=*/true);
        for (const auto& prev : tr.pm_updates)
          if (prev.pred == u.pred)
            fail_at(it, "define", "duplicate definition for " + sys.sig.pred(u.pred).name);
        tr.pm_updates.push_back(std::move(u));
      } else {
        fail_at(it, "transition", "unknown transition item " + kw);
      }
    }
    if (!saw_guard) tr.guard = Formula::tru();
    // implicit frame for unmentioned state symbols
    for (FunId x : sys.state_vars) {
      bool found = false;
      for (const auto& [y, t] : tr.wf_updates) {
        (void)t;
        found |= y == x;
      }
      if (!found) tr.wf_updates.emplace_back(x, Term::constant(sys.sig, x));
    }
    std::sort(tr.wf_updates.begin(), tr.wf_updates.end(),
              [&](const auto& a, const auto& b) {
                size_t ia = 0, ib = 0;
                for (size_t i = 0; i < sys.state_vars.size(); ++i) {
                  if (sys.state_vars[i] == a.first) ia = i;
                  if (sys.state_vars[i] == b.first) ib = i;
                }
                return ia < ib;
              });
    for (PredId p : sys.state_preds) {
      bool found = false;
      for (const auto& u : tr.pm_updates) found |= u.pred == p;
      if (!found) {
        PredicateUpdate u;
        u.pred = p;
        const PredDecl& d = sys.sig.pred(p);
        std::vector<TermPtr> args;
        for (size_t i = 0; i < d.args.size(); ++i) {
          u.params.emplace_back("z" + std::to_string(i + 1), d.args[i]);
          args.push_back(Term::var(u.params.back().first, d.args[i]));
        }
        u.def = Formula::atom(sys.sig, p, std::move(args));
        tr.pm_updates.push_back(std::move(u));
      }
    }
    std::sort(tr.pm_updates.begin(), tr.pm_updates.end(), [&](const auto& a, const auto& b) {
      size_t ia = 0, ib = 0;
      for (size_t i = 0; i < sys.state_preds.size(); ++i) {
        if (sys.state_preds[i] == a.pred) ia = i;
        if (sys.state_preds[i] == b.pred) ib = i;
      }
      return ia < ib;
    });
    sys.transitions.push_back(std::move(tr));
  }
};

} // namespace

const Transition* TwoLevelSystem::find_transition(const std::string& tname) const {
  for (const auto& t : transitions)
    if (t.name == tname) return &t;
  return nullptr;
}

std::vector<SortId> TwoLevelSystem::all_edt_sorts() const {
  std::vector<SortId> out = substrate.edt_sorts;
  out.insert(out.end(), wf.edt_sorts.begin(), wf.edt_sorts.end());
  return out;
}

const TwoLevelSystem& SpecFile::system_named(const std::string& name) const {
  for (const auto& s : systems)
    if (s.name == name) return s;
  throw SpecError("unknown system " + name);
}

SpecFile parse_spec(const std::string& text) {
  Reader reader(text);
  std::vector<SExpr> top = reader.read_all();
  SpecFile file;
  for (const auto& e : top) {
    if (e.head_is("system")) {
      if (!file.systems.empty())
        fail_at(e, "file", "only one system per file is supported");
      SystemParser sp;
      sp.parse(e);
      file.systems.push_back(std::move(sp.sys));
    } else if (e.head_is("scenario")) {
      if (file.systems.empty()) fail_at(e, "scenario", "no system declared before scenario");
      if (e.items.size() < 3) fail_at(e, "scenario", "expected (scenario Name (system S) ...)");
      Scenario sc;
      sc.name = atom_of(e.items[1], "scenario");
      const SExpr& sysref = e.items[2];
      if (!sysref.head_is("system") || sysref.items.size() != 2)
        fail_at(sysref, "scenario", "expected (system Name)");
      sc.system = atom_of(sysref.items[1], "scenario");
      const TwoLevelSystem& sys = file.system_named(sc.system);
      auto parse_state = [&](const SExpr& s) -> FormulaPtr {
        // either a named formula or an inline one
        FormulaPtr f;
        auto it = s.is_atom ? sys.named_formulas.find(s.atom) : sys.named_formulas.end();
        if (it != sys.named_formulas.end()) {
          f = it->second;
        } else {
          FormulaParser fp{sys.sig};
          Scope scope;
          f = fp.parse(s, scope);
        }
        if (!is_quantifier_free(f))
          fail_at(s, "scenario", "scenario state formulas must be quantifier-free");
        if (!is_ground(f)) fail_at(s, "scenario", "scenario state formulas must be closed");
        return f;
      };
      for (size_t i = 3; i < e.items.size(); ++i) {
        const SExpr& it = e.items[i];
        if (it.head_is("state")) {
          if (it.items.size() != 2 || !sc.states.empty())
            fail_at(it, "scenario", "(state f) must appear exactly once, first");
          sc.states.push_back(parse_state(it.items[1]));
        } else if (it.head_is("step")) {
          if (it.items.size() != 3) fail_at(it, "scenario", "expected (step Transition formula)");
          if (sc.states.empty()) fail_at(it, "scenario", "steps must follow the initial (state f)");
          const std::string& tname = atom_of(it.items[1], "scenario");
          if (!sys.find_transition(tname))
            fail_at(it.items[1], "scenario", "unknown transition " + tname);
          sc.transitions.push_back(tname);
          sc.states.push_back(parse_state(it.items[2]));
        } else {
          fail_at(it, "scenario", "expected (state f) or (step T f)");
        }
      }
      if (sc.states.empty()) fail_at(e, "scenario", "scenario has no states");
      file.scenarios.push_back(std::move(sc));
    } else if (e.head_is("invariant")) {
      if (file.systems.empty()) fail_at(e, "invariant", "no system declared before invariant");
      if (e.items.size() < 4) fail_at(e, "invariant", "expected (invariant Name (system S) (target f))");
      InvariantTask iv;
      iv.name = atom_of(e.items[1], "invariant");
      const SExpr& sysref = e.items[2];
      if (!sysref.head_is("system") || sysref.items.size() != 2)
        fail_at(sysref, "invariant", "expected (system Name)");
      iv.system = atom_of(sysref.items[1], "invariant");
      const TwoLevelSystem& sys = file.system_named(iv.system);
      FormulaParser fp{sys.sig};
      for (size_t i = 3; i < e.items.size(); ++i) {
        const SExpr& it = e.items[i];
        Scope scope;
        if (it.head_is("target") && it.items.size() == 2) {
          iv.target = fp.parse(it.items[1], scope);
        } else if (it.head_is("candidate") && it.items.size() == 2) {
          iv.candidate = fp.parse(it.items[1], scope);
        } else {
          fail_at(it, "invariant", "expected (target f) or (candidate f)");
        }
      }
      if (!iv.target) fail_at(e, "invariant", "invariant has no target");
      if (!iv.candidate) iv.candidate = iv.target;
      file.invariants.push_back(std::move(iv));
    } else {
      fail_at(e, "file", "expected a system, scenario or invariant block");
    }
  }
  if (file.systems.empty()) throw ParseError(1, 1, "file", "no system declared");
  return file;
}

FormulaPtr parse_solve_query(const TwoLevelSystem& sys, Signature& sig,
                             const std::string& text, std::vector<FunId>* declared) {
  Reader reader(text);
  SExpr e = reader.read();
  if (!e.head_is("solve")) fail_at(e, "solve", "expected (solve ...)");
  const SExpr* formula = nullptr;
  for (size_t i = 1; i < e.items.size(); ++i) {
    const SExpr& it = e.items[i];
    if (it.head_is("consts")) {
      for (size_t j = 1; j < it.items.size(); ++j) {
        const SExpr& c = it.items[j];
        if (!c.is_list() || c.items.size() != 2)
          fail_at(c, "solve", "expected (name Sort) in consts");
        auto s = sig.find_sort(atom_of(c.items[1], "solve"));
        if (!s) fail_at(c.items[1], "solve", "unknown sort " + c.items[1].atom);
        const std::string& name = atom_of(c.items[0], "solve");
        if (auto existing = sig.find_fun(name)) {
          if (declared) declared->push_back(*existing);
          continue;
        }
        Level level = sig.sort(*s).level;
        if (level == Level::StateVar || level == Level::StatePred) level = Level::WF;
        FunId f = sig.add_fun(name, {}, *s, level);
        if (declared) declared->push_back(f);
      }
    } else if (it.head_is("formula") && it.items.size() == 2) {
      formula = &it.items[1];
    } else {
      fail_at(it, "solve", "expected (consts ...) or (formula f)");
    }
  }
  if (!formula) fail_at(e, "solve", "missing (formula f)");
  (void)sys;
  FormulaParser fp{sig};
  Scope scope;
  return fp.parse(*formula, scope);
}

FormulaPtr parse_formula_in_system(const TwoLevelSystem& sys, const std::string& text,
                                   const std::vector<std::pair<std::string, SortId>>& binders) {
  Reader reader(text);
  SExpr e = reader.read();
  FormulaParser fp{sys.sig};
  Scope scope;
  for (const auto& b : binders) scope.vars.push_back(b);
  return fp.parse(e, scope);
}

} // namespace soverify
