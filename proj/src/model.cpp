#include "soverify/model.hpp"

namespace soverify {

std::optional<int> FiniteStructure::eval_term(const TermPtr& t, const Env& env) const {
  if (t->kind == Term::Kind::Var) {
    auto it = env.find(t->var_name);
    if (it == env.end()) return std::nullopt;
    return it->second;
  }
  std::vector<int> args;
  args.reserve(t->args.size());
  for (const auto& a : t->args) {
    auto v = eval_term(a, env);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  auto fit = funcs.find({t->fun, t->primed});
  if (fit == funcs.end()) return std::nullopt;
  auto vit = fit->second.find(args);
  if (vit == fit->second.end()) return std::nullopt;
  return vit->second;
}

std::optional<bool> FiniteStructure::eval(const FormulaPtr& f, const Env& env) const {
  switch (f->kind) {
    case Conn::True: return true;
    case Conn::False: return false;
    case Conn::Atom: {
      std::vector<int> args;
      for (const auto& t : f->terms) {
        auto v = eval_term(t, env);
        if (!v) return std::nullopt;
        args.push_back(*v);
      }
      auto it = preds.find({f->pred, f->primed});
      if (it == preds.end()) return false;
      return it->second.count(args) > 0;
    }
    case Conn::Eq: {
      auto a = eval_term(f->terms[0], env);
      auto b = eval_term(f->terms[1], env);
      if (!a || !b) return std::nullopt;
      return *a == *b;
    }
    case Conn::Not: {
      auto v = eval(f->kids[0], env);
      if (!v) return std::nullopt;
      return !*v;
    }
    case Conn::And: {
      for (const auto& k : f->kids) {
        auto v = eval(k, env);
        if (!v) return std::nullopt;
        if (!*v) return false;
      }
      return true;
    }
    case Conn::Or: {
      for (const auto& k : f->kids) {
        auto v = eval(k, env);
        if (!v) return std::nullopt;
        if (*v) return true;
      }
      return false;
    }
    case Conn::Implies: {
      auto a = eval(f->kids[0], env);
      if (!a) return std::nullopt;
      if (!*a) return true;
      return eval(f->kids[1], env);
    }
    case Conn::Iff: {
      auto a = eval(f->kids[0], env);
      auto b = eval(f->kids[1], env);
      if (!a || !b) return std::nullopt;
      return *a == *b;
    }
    case Conn::Forall:
    case Conn::Exists: {
      size_t n = f->binders.size();
      std::vector<int> idx(n, 0);
      std::vector<int> sizes(n);
      for (size_t i = 0; i < n; ++i) {
        sizes[i] = domain_size(f->binders[i].second);
        if (sizes[i] == 0) return f->kind == Conn::Forall; // empty domain
      }
      bool is_forall = f->kind == Conn::Forall;
      while (true) {
        Env inner = env;
        for (size_t i = 0; i < n; ++i) inner[f->binders[i].first] = idx[i];
        auto v = eval(f->kids[0], inner);
        if (!v) return std::nullopt;
        if (is_forall && !*v) return false;
        if (!is_forall && *v) return true;
        size_t k = n;
        while (k > 0) {
          if (++idx[k - 1] < sizes[k - 1]) break;
          idx[k - 1] = 0;
          --k;
        }
        if (k == 0) break;
      }
      return is_forall;
    }
  }
  return std::nullopt;
}

bool FiniteStructure::satisfies_literals(const std::vector<FormulaPtr>& literals) const {
  for (const auto& lit : literals) {
    auto v = eval(lit);
    if (!v || !*v) return false;
  }
  return true;
}

std::pair<FormulaPtr, bool> literal_parts(const FormulaPtr& lit) {
  if (lit->kind == Conn::Not) {
    const FormulaPtr& a = lit->kids[0];
    if (a->kind != Conn::Atom && a->kind != Conn::Eq)
      throw SpecError("not a literal");
    return {a, false};
  }
  if (lit->kind != Conn::Atom && lit->kind != Conn::Eq) throw SpecError("not a literal");
  return {lit, true};
}

} // namespace soverify
