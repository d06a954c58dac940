#include "dgl/kernel/reduction.hpp"

#include "dgl/error.hpp"

namespace dgl {

namespace {

// Naive structural search. No caching and no sharing by design.
struct Oracle {
  const Environment& env;

  std::optional<Term> head_redex(const Term& t) {
    if (t.is_let()) return instantiate(t.let_body(), t.let_value());
    if (t.is_const()) {
      const Declaration* d = env.find(t.const_name());
      if (d && d->is_definition() && d->uparams.size() == t.const_levels().size())
        return instantiate_levels(d->value, d->uparams, t.const_levels());
      return std::nullopt;
    }
    if (!t.is_app()) return std::nullopt;
    std::vector<Term> args;
    Term fn = get_app_fn_args(t, args);
    if (fn.is_lam()) {
      Term r = instantiate(fn.binder_body(), args[0]);
      return mk_app(r, std::span<const Term>(args.data() + 1, args.size() - 1));
    }
    if (!fn.is_const()) return std::nullopt;
    const Declaration* d = env.find(fn.const_name());
    if (!d || !d->is_recursor()) return std::nullopt;
    const unsigned major_idx = d->major_index();
    if (args.size() <= major_idx) return std::nullopt;
    std::vector<Term> margs;
    Term mfn = get_app_fn_args(args[major_idx], margs);
    if (!mfn.is_const()) return std::nullopt;
    const Declaration* c = env.find(mfn.const_name());
    if (!c || !c->is_constructor() || c->induct != d->induct) return std::nullopt;
    const RecRule* rule = d->rule_for(c->name);
    if (!rule || margs.size() != d->num_params + rule->num_fields) return std::nullopt;
    std::vector<Term> rargs(args.begin(), args.begin() + d->num_params + 1 + d->num_minors);
    rargs.insert(rargs.end(), margs.begin() + d->num_params, margs.end());
    rargs.insert(rargs.end(), args.begin() + major_idx + 1, args.end());
    return mk_app(instantiate_levels(rule->rhs, d->uparams, fn.const_levels()), rargs);
  }

  std::optional<Term> step(const Term& t) {
    if (auto r = head_redex(t)) return r;
    switch (t.kind()) {
      case TermKind::App: {
        if (auto f = step(t.app_fn())) return Term::app(*f, t.app_arg());
        if (auto a = step(t.app_arg())) return Term::app(t.app_fn(), *a);
        return std::nullopt;
      }
      case TermKind::Lam:
      case TermKind::Pi: {
        if (auto ty = step(t.binder_type()))
          return t.is_lam() ? Term::lam(t.binder_name(), t.binder_style(), *ty, t.binder_body())
                            : Term::pi(t.binder_name(), t.binder_style(), *ty, t.binder_body());
        if (auto b = step(t.binder_body()))
          return t.is_lam() ? Term::lam(t.binder_name(), t.binder_style(), t.binder_type(), *b)
                            : Term::pi(t.binder_name(), t.binder_style(), t.binder_type(), *b);
        return std::nullopt;
      }
      default:
        return std::nullopt;
    }
  }
};

Term normal_form(TypeChecker& tc, const Term& t) {
  Term w = tc.whnf(t);
  switch (w.kind()) {
    case TermKind::App: {
      std::vector<Term> args;
      Term fn = get_app_fn_args(w, args);
      for (auto& a : args) a = normal_form(tc, a);
      return mk_app(normal_form(tc, fn), args);
    }
    case TermKind::Lam:
    case TermKind::Pi: {
      Term dom = normal_form(tc, w.binder_type());
      Term fv = tc.lctx().add(w.binder_name(), dom, w.binder_style());
      Term body = normal_form(tc, instantiate(w.binder_body(), fv));
      body = abstract(body, std::span<const Term>(&fv, 1));
      return w.is_lam() ? Term::lam(w.binder_name(), w.binder_style(), dom, body)
                        : Term::pi(w.binder_name(), w.binder_style(), dom, body);
    }
    default:
      return w;
  }
}

}  // namespace

std::optional<Term> small_step(const Environment& env, const Term& t) {
  Oracle o{env};
  return o.step(t);
}

Term normalize(const Environment& env, const Term& t, size_t fuel) {
  Oracle o{env};
  Term cur = t;
  while (true) {
    auto next = o.step(cur);
    if (!next) return cur;
    if (fuel == 0) throw Error(code::kFuelExhausted, "normalization fuel exhausted");
    --fuel;
    cur = *next;
  }
}

std::optional<Term> iota_step(const Environment& env, const Term& t) {
  TypeChecker tc(env);
  return tc.iota_step(t);
}

Term whnf_normal_form(const Environment& env, const Term& t) {
  TypeChecker tc(env);
  return normal_form(tc, t);
}

unsigned definition_height(const Environment& env, const Name& n) { return env.height_of(n); }

}  // namespace dgl
