#include "dgl/elab/elaborator.hpp"

#include <algorithm>

#include "dgl/syntax/render.hpp"

namespace dgl {

namespace {

std::string quote(const std::string& s) { return "`" + s + "`"; }

}  // namespace

// --- InstanceTable -------------------------------------------------------------

void InstanceTable::add_class(const Name& cls) {
  classes_.insert(cls);
  by_class_[cls];
}

void InstanceTable::add_instance(const Name& cls, const Name& inst) {
  if (!is_class(cls)) throw Error(code::kInstance, "'" + cls.str() + "' is not a class");
  by_class_[cls].push_back(inst);
}

const std::vector<Name>& InstanceTable::instances_of(const Name& cls) const {
  static const std::vector<Name> empty;
  auto it = by_class_.find(cls);
  return it == by_class_.end() ? empty : it->second;
}

// --- Elaborator ------------------------------------------------------------------

Elaborator::Elaborator(Environment env, const InstanceTable& instances, ElabScope scope, ElabOptions opts)
    : env_(std::move(env)),
      instances_(instances),
      scope_(std::move(scope)),
      opts_(opts),
      tc_(env_, opts.flags, &mctx_),
      unifier_(tc_, mctx_, [this](uint64_t id) { return open_.count(id) > 0; }) {}

void Elaborator::set_level_params(std::vector<Name> params, bool auto_bind) {
  level_params_ = std::move(params);
  auto_bind_ = auto_bind;
}

Term Elaborator::push_local(Name name, Term type, BinderStyle style, std::optional<Term> value) {
  Term fv = tc_.lctx().add(std::move(name), std::move(type), style, std::move(value));
  locals_.push_back(fv);
  open_.insert(fv.fvar_id());
  return fv;
}

void Elaborator::pop_locals(size_t n) {
  for (size_t i = 0; i < n; ++i) {
    open_.erase(locals_.back().fvar_id());
    locals_.pop_back();
  }
}

std::vector<Term> Elaborator::elab_binders(const std::vector<SurfaceBinder>& bs) {
  std::vector<Term> out;
  for (auto& b : bs) {
    Term ty = b.type ? elab_type(*b.type) : new_type_mvar(b.span);
    out.push_back(push_local(Name(b.name), ty, b.style));
  }
  return out;
}

Term Elaborator::new_mvar(Term type, Span span, std::string origin) {
  std::vector<uint64_t> scope(open_.begin(), open_.end());
  return mctx_.new_mvar(std::move(type), std::move(scope), span, std::move(origin));
}

Term Elaborator::new_type_mvar(Span span) {
  return new_mvar(Term::sort(mctx_.new_level_mvar()), span, "binder type");
}

bool Elaborator::unify(const Term& a, const Term& b) { return unifier_.unify(a, b); }

Term Elaborator::infer(const Term& t) { return tc_.infer(t, true); }

void Elaborator::ensure_has_type(const Term& e, const Term& expected, SourcePos pos) {
  Term ty = infer(e);
  if (unify(ty, expected)) return;
  std::string te = tc_.render(e), tt = tc_.render(ty), tx = tc_.render(expected);
  throw Error(code::kTypeMismatch,
              "type mismatch: " + quote(te) + " has type " + quote(tt) + " but is expected to have type " +
                  quote(tx),
              pos, {tt, tx});
}

Level Elaborator::elab_level(const SurfaceLevel& l) {
  switch (l.kind) {
    case SurfaceLevel::Kind::Num:
      return Level::of_nat(l.num);
    case SurfaceLevel::Kind::Hole:
      return mctx_.new_level_mvar();
    case SurfaceLevel::Kind::Ident: {
      Name n(l.name);
      if (std::find(level_params_.begin(), level_params_.end(), n) == level_params_.end()) {
        if (!auto_bind_) throw Error(code::kUniverse, "unknown universe level '" + l.name + "'", l.span.begin);
        level_params_.push_back(n);
      }
      return Level::param(n);
    }
    case SurfaceLevel::Kind::Add: {
      Level r = elab_level(*l.a);
      for (unsigned i = 0; i < l.num; ++i) r = Level::succ(r);
      return r;
    }
    case SurfaceLevel::Kind::Max:
      return Level::max(elab_level(*l.a), elab_level(*l.b));
    case SurfaceLevel::Kind::IMax:
      return Level::imax(elab_level(*l.a), elab_level(*l.b));
  }
  return Level::zero();
}

Term Elaborator::elab(const SurfaceTerm& s, const std::optional<Term>& expected) {
  try {
    return elab_core(s, expected);
  } catch (Error& e) {
    e.set_pos_if_missing(s.span.begin);
    throw;
  }
}

Term Elaborator::elab_type(const SurfaceTerm& s) {
  Term t = elab(s, std::nullopt);
  Term ty = tc_.whnf(tc_.instantiate_mvars(infer(t)));
  if (ty.is_sort()) return t;
  if (ty.is_mvar() && unify(ty, Term::sort(mctx_.new_level_mvar()))) return t;
  throw Error(code::kTypeExpected,
              "type expected: " + quote(tc_.render(t)) + " has type " + quote(tc_.render(ty)), s.span.begin);
}

Term Elaborator::elab_core(const SurfaceTerm& s, const std::optional<Term>& expected) {
  using K = SurfaceTerm::Kind;
  switch (s.kind) {
    case K::Ident:
    case K::App:
      return elab_app(s, expected);
    case K::Sort: {
      Term r;
      switch (s.sort_kind) {
        case SurfaceTerm::SortKind::Prop:
          r = Term::sort(Level::zero());
          break;
        case SurfaceTerm::SortKind::Type:
          r = Term::sort(Level::succ(s.level ? elab_level(*s.level) : Level::zero()));
          break;
        case SurfaceTerm::SortKind::Sort:
          r = Term::sort(elab_level(*s.level));
          break;
      }
      if (expected) ensure_has_type(r, *expected, s.span.begin);
      return r;
    }
    case K::Lam:
      return elab_lam(s, expected);
    case K::Pi: {
      Term r = elab_pi(s);
      if (expected) ensure_has_type(r, *expected, s.span.begin);
      return r;
    }
    case K::Let:
      return elab_let(s, expected);
    case K::Hole:
      return new_mvar(expected ? *expected : new_type_mvar(s.span), s.span, "placeholder");
    case K::Ascribe: {
      Term ty = elab_type(*s.value);
      Term e = elab(*s.body, ty);
      if (expected) ensure_has_type(e, *expected, s.span.begin);
      return e;
    }
  }
  return Term();
}

std::optional<Term> Elaborator::find_local(const std::string& name) const {
  for (size_t i = locals_.size(); i-- > 0;) {
    const auto& d = tc_.lctx().get(locals_[i].fvar_id());
    if (d.name.str() == name && name != "_") return locals_[i];
  }
  return std::nullopt;
}

Term Elaborator::field_access(Term cur, const std::vector<std::string>& fields, Span span) {
  for (const std::string& f : fields) {
    Term ty = tc_.whnf(tc_.instantiate_mvars(infer(cur)));
    const Term& head = get_app_fn(ty);
    if (!head.is_const())
      throw Error(code::kNotFunction, "field access '." + f + "' on " + quote(tc_.render(cur)) + " of type " +
                                          quote(tc_.render(ty)) + ", which is not a structure",
                  span.begin);
    const Declaration* d = env_.find(head.const_name().append(f));
    if (!d)
      throw Error(code::kUnknownConst, "structure '" + head.const_name().str() + "' has no field '" + f + "'",
                  span.begin);
    std::vector<Level> levels;
    for (size_t i = 0; i < d->uparams.size(); ++i) levels.push_back(mctx_.new_level_mvar());
    Term fn = Term::constant(d->name, std::move(levels));
    Term fty = infer(fn);
    while (true) {
      if (!fty.is_pi()) fty = tc_.whnf(tc_.instantiate_mvars(fty));
      if (!fty.is_pi())
        throw Error(code::kNotFunction, "'" + d->name.str() + "' cannot be applied to " + quote(tc_.render(cur)),
                    span.begin);
      // `self` is the first binder typed by the structure; before it come
      // the parameters, implicit or instance-implicit.
      const Term& bh = get_app_fn(fty.binder_type());
      if (fty.binder_style() == BinderStyle::Explicit ||
          (bh.is_const() && bh.const_name() == head.const_name()))
        break;
      const bool inst = fty.binder_style() == BinderStyle::InstImplicit;
      Term m = new_mvar(fty.binder_type(), span, inst ? "instance" : "implicit argument");
      if (inst) pending_.push_back(m.mvar_id());
      fn = Term::app(fn, m);
      fty = instantiate(fty.binder_body(), m);
    }
    ensure_has_type(cur, fty.binder_type(), span.begin);
    cur = Term::app(fn, cur);
  }
  return cur;
}

const Declaration* Elaborator::find_global(const std::string& name, SourcePos pos) const {
  Name n(name);
  const Declaration* d = nullptr;
  for (Name ns = decl_ns_; !d && !ns.is_anonymous(); ns = ns.prefix()) d = env_.find(ns.append(n));
  if (!d) d = env_.find(n);
  if (!d) {
    std::vector<const Declaration*> hits;
    for (auto& ns : scope_.open_namespaces)
      if (auto* h = env_.find(ns.append(n)))
        if (std::find(hits.begin(), hits.end(), h) == hits.end()) hits.push_back(h);
    // A forwarding projection `S.g := P.g .. (S.to_P self)` defers to the
    // field it forwards when both are visible.
    auto forwards_to = [&](const Declaration* h, const Declaration* target) {
      const Declaration* cur = h;
      for (int step = 0; step < 16 && cur && cur->is_definition(); ++step) {
        Term body = cur->value;
        while (body.is_lam()) body = body.binder_body();
        const Term& head = get_app_fn(body);
        if (!head.is_const() || head.const_name().last() != h->name.last()) return false;
        if (head.const_name() == target->name) return true;
        cur = env_.find(head.const_name());
      }
      return false;
    };
    if (hits.size() > 1) {
      std::vector<const Declaration*> base;
      for (auto* h : hits)
        if (std::none_of(hits.begin(), hits.end(), [&](auto* o) { return o != h && forwards_to(h, o); }))
          base.push_back(h);
      hits = std::move(base);
    }
    if (hits.size() > 1) {
      std::string names;
      for (auto* h : hits) names += (names.empty() ? "" : ", ") + h->name.str();
      throw Error(code::kAmbiguous, "ambiguous identifier '" + name + "': " + names, pos);
    }
    if (!hits.empty()) d = hits[0];
  }
  if (!d) throw Error(code::kUnknownConst, "unknown identifier '" + name + "'", pos);
  return d;
}

Term Elaborator::resolve_ident(const SurfaceTerm& s) {
  if (auto l = find_local(s.name)) {
    if (s.levels) throw Error(code::kLevelArity, "local '" + s.name + "' takes no universe arguments", s.span.begin);
    return *l;
  }
  if (auto dot = s.name.find('.'); dot != std::string::npos) {
    if (auto l = find_local(s.name.substr(0, dot))) {
      if (s.levels) throw Error(code::kLevelArity, "field access takes no universe arguments", s.span.begin);
      return field_access(*l, Name(s.name.substr(dot + 1)).atoms(), s.span);
    }
  }
  const Declaration* d = find_global(s.name, s.span.begin);
  std::vector<Level> levels;
  if (s.levels) {
    if (s.levels->size() != d->uparams.size())
      throw Error(code::kLevelArity,
                  "constant '" + d->name.str() + "' expects " + std::to_string(d->uparams.size()) +
                      " universe argument(s), got " + std::to_string(s.levels->size()),
                  s.span.begin);
    for (auto& l : *s.levels) levels.push_back(elab_level(*l));
  } else {
    for (size_t i = 0; i < d->uparams.size(); ++i) levels.push_back(mctx_.new_level_mvar());
  }
  return Term::constant(d->name, std::move(levels));
}

Term Elaborator::elab_app(const SurfaceTerm& s, const std::optional<Term>& expected) {
  std::vector<const SurfaceTerm*> args;
  const SurfaceTerm* head = &s;
  while (head->kind == SurfaceTerm::Kind::App) {
    args.push_back(head->arg.get());
    head = head->fn.get();
  }
  std::reverse(args.begin(), args.end());
  const bool explicit_mode = head->kind == SurfaceTerm::Kind::Ident && head->explicit_mode;
  Term f = head->kind == SurfaceTerm::Kind::Ident ? resolve_ident(*head) : elab(*head, std::nullopt);
  Term fty = infer(f);

  auto expose_pi = [&](const SurfaceTerm& at) {
    if (fty.is_pi()) return;
    Term w = tc_.whnf(tc_.instantiate_mvars(fty));
    if (!w.is_pi())
      throw Error(code::kNotFunction,
                  "function expected: " + quote(tc_.render(f)) + " has type " + quote(tc_.render(w)),
                  at.span.begin);
    fty = w;
  };
  // Holes for implicit binders, created ahead by expected-type propagation.
  std::vector<Term> ahead;
  size_t ahead_used = 0;
  auto insert_implicit = [&](Span span) {
    const bool inst = fty.binder_style() == BinderStyle::InstImplicit;
    Term m = ahead_used < ahead.size()
                 ? ahead[ahead_used++]
                 : new_mvar(fty.binder_type(), span, inst ? "instance" : "implicit argument");
    if (inst) pending_.push_back(m.mvar_id());
    f = Term::app(f, m);
    fty = instantiate(fty.binder_body(), m);
  };

  // When the result type does not depend on any explicit argument, unify it
  // with the expected type before elaborating the arguments. Explicit
  // arguments are stood in for by throwaway holes that must not leak.
  if (expected && !explicit_mode) {
    Term pty = fty;
    std::unordered_set<uint64_t> stand_ins;
    auto leaks = [&](const Term& t) {
      bool found = false;
      for_each(tc_.instantiate_mvars(t), [&](const Term& x) {
        if (found || !x.has_mvar()) return false;
        if (x.is_mvar() && stand_ins.count(x.mvar_id())) found = true;
        return true;
      });
      return found;
    };
    bool ok = true;
    auto step_pi = [&]() {
      if (pty.is_pi()) return true;
      Term w = tc_.whnf(tc_.instantiate_mvars(pty));
      if (!w.is_pi()) return false;
      pty = w;
      return true;
    };
    auto hole_ahead = [&](Span span) {
      bool inst = pty.binder_style() == BinderStyle::InstImplicit;
      if (leaks(pty.binder_type())) return false;
      Term m = new_mvar(pty.binder_type(), span, inst ? "instance" : "implicit argument");
      ahead.push_back(m);
      pty = instantiate(pty.binder_body(), m);
      return true;
    };
    for (size_t i = 0; ok && i < args.size(); ++i) {
      while ((ok = step_pi()) && pty.binder_style() != BinderStyle::Explicit)
        if (!(ok = hole_ahead(args[i]->span))) break;
      if (!ok) break;
      Term stand_in = new_mvar(pty.binder_type(), args[i]->span, "argument");
      stand_ins.insert(stand_in.mvar_id());
      pty = instantiate(pty.binder_body(), stand_in);
    }
    if (ok) {
      Term ew = tc_.whnf(tc_.instantiate_mvars(*expected));
      bool leading_implicit = ew.is_pi() && ew.binder_style() != BinderStyle::Explicit;
      while (ok && !leading_implicit && step_pi() && pty.binder_style() != BinderStyle::Explicit)
        ok = hole_ahead(s.span);
      if (ok && !leaks(pty)) unify(pty, *expected);
    }
  }

  for (const SurfaceTerm* a : args) {
    while (true) {
      expose_pi(*a);
      if (explicit_mode || fty.binder_style() == BinderStyle::Explicit) break;
      insert_implicit(a->span);
    }
    Term dom = fty.binder_type();
    Term ea = elab(*a, dom);
    f = Term::app(f, ea);
    fty = instantiate(fty.binder_body(), ea);
  }
  if (!explicit_mode) {
    while (true) {
      if (!fty.is_pi()) {
        Term w = tc_.whnf(tc_.instantiate_mvars(fty));
        if (!w.is_pi()) break;
        fty = w;
      }
      if (fty.binder_style() == BinderStyle::Explicit) break;
      // An expected type with a leading implicit binder takes the function as is.
      if (expected) {
        Term ew = tc_.whnf(tc_.instantiate_mvars(*expected));
        if (ew.is_pi() && ew.binder_style() != BinderStyle::Explicit) break;
      }
      insert_implicit(s.span);
    }
  }
  // Instances whose goals are now known unblock reduction in the check below.
  synthesize_pending(false);
  if (expected) ensure_has_type(f, *expected, s.span.begin);
  synthesize_pending(false);
  return f;
}

Term Elaborator::elab_lam(const SurfaceTerm& s, const std::optional<Term>& expected) {
  std::optional<Term> cur;
  if (expected) cur = tc_.whnf(tc_.instantiate_mvars(*expected));
  std::vector<Term> fvars;
  const SurfaceTerm* node = &s;
  while (node->kind == SurfaceTerm::Kind::Lam) {
    const SurfaceBinder& b = node->binder;
    Term dom;
    if (b.type) {
      dom = elab_type(*b.type);
      if (cur && cur->is_pi() && !unify(dom, cur->binder_type()))
        throw Error(code::kTypeMismatch,
                    "binder '" + b.name + "' has type " + quote(tc_.render(dom)) + " but the expected type " +
                        quote(tc_.render(*cur)) + " binds " + quote(tc_.render(cur->binder_type())),
                    b.span.begin, {tc_.render(dom), tc_.render(cur->binder_type())});
    } else if (cur && cur->is_pi()) {
      dom = cur->binder_type();
    } else {
      dom = new_type_mvar(b.span);
    }
    Term fv = push_local(Name(b.name), dom, b.style);
    fvars.push_back(fv);
    if (cur && cur->is_pi()) {
      Term next = instantiate(cur->binder_body(), fv);
      cur = next.is_pi() ? next : tc_.whnf(tc_.instantiate_mvars(next));
    } else {
      cur.reset();
    }
    node = node->body.get();
  }
  Term body = elab(*node, cur);
  synthesize_pending(false);
  Term r = close(false, fvars, body);
  pop_locals(fvars.size());
  if (expected) ensure_has_type(r, *expected, s.span.begin);
  return r;
}

Term Elaborator::elab_pi(const SurfaceTerm& s) {
  std::vector<Term> fvars;
  const SurfaceTerm* node = &s;
  while (node->kind == SurfaceTerm::Kind::Pi) {
    const SurfaceBinder& b = node->binder;
    Term dom = b.type ? elab_type(*b.type) : new_type_mvar(b.span);
    fvars.push_back(push_local(Name(b.name), dom, b.style));
    node = node->body.get();
  }
  Term body = elab_type(*node);
  synthesize_pending(false);
  Term r = close(true, fvars, body);
  pop_locals(fvars.size());
  return r;
}

Term Elaborator::elab_let(const SurfaceTerm& s, const std::optional<Term>& expected) {
  std::optional<Term> ty;
  if (s.binder.type) ty = elab_type(*s.binder.type);
  Term v = elab(*s.value, ty);
  if (!ty) ty = infer(v);
  Term fv = push_local(Name(s.binder.name), *ty, BinderStyle::Explicit, v);
  Term body = elab(*s.body, expected);
  synthesize_pending(false);
  Term r = close(false, std::span<const Term>(&fv, 1), body);
  pop_locals(1);
  return r;
}

Term Elaborator::close(bool pi, std::span<const Term> fvars, const Term& body, std::optional<BinderStyle> style) {
  Term r = tc_.instantiate_mvars(body);
  for (size_t k = fvars.size(); k-- > 0;) {
    const auto& d = tc_.lctx().get(fvars[k].fvar_id());
    Term ty = tc_.instantiate_mvars(d.type);
    r = abstract(r, fvars.subspan(k, 1));
    if (d.value) {
      r = Term::let(d.name, ty, tc_.instantiate_mvars(*d.value), r);
    } else {
      BinderStyle st = style && d.style != BinderStyle::InstImplicit ? *style : d.style;
      r = pi ? Term::pi(d.name, st, ty, r) : Term::lam(d.name, st, ty, r);
    }
  }
  return r;
}

// --- instances ---------------------------------------------------------------------

std::optional<Term> Elaborator::try_instance(const Term& cand, const Term& cand_type, const Term& goal,
                                             unsigned depth) {
  auto cp = mctx_.save();
  Term t = cand;
  Term ty = cand_type;
  std::vector<uint64_t> subgoals;
  while (true) {
    if (!ty.is_pi()) {
      Term w = tc_.whnf(tc_.instantiate_mvars(ty));
      if (!w.is_pi()) break;
      ty = w;
    }
    Term m = new_mvar(ty.binder_type(), {}, "instance argument");
    if (ty.binder_style() == BinderStyle::InstImplicit) subgoals.push_back(m.mvar_id());
    t = Term::app(t, m);
    ty = instantiate(ty.binder_body(), m);
  }
  if (unify(ty, goal)) {
    // Subgoals without metavariables go first; otherwise the last open one,
    // which for an `extends` instance is the structure itself.
    bool ok = true;
    while (ok) {
      std::optional<size_t> pick;
      for (size_t i = 0; i < subgoals.size(); ++i) {
        if (mctx_.is_assigned(subgoals[i])) continue;
        if (!tc_.instantiate_mvars(mctx_.decl(subgoals[i]).type).has_mvar()) {
          pick = i;
          break;
        }
        pick = i;
      }
      if (!pick) break;
      uint64_t sg = subgoals[*pick];
      auto r = synth_instance(tc_.instantiate_mvars(mctx_.decl(sg).type), depth + 1);
      if (!r || !unify(Term::mvar(sg), *r)) ok = false;
    }
    if (ok) return tc_.instantiate_mvars(t);
  }
  mctx_.restore(cp);
  return std::nullopt;
}

std::optional<Term> Elaborator::synth_instance(const Term& goal0, unsigned depth) {
  if (depth > opts_.instance_depth)
    throw Error(code::kInstanceDepth, "instance search exceeded depth " + std::to_string(opts_.instance_depth) +
                                          " on goal " + quote(tc_.render(goal0)));
  Term goal = tc_.whnf(tc_.instantiate_mvars(goal0));
  if (goal.is_pi()) {
    // `[forall x, C (E x)]`: introduce the binders and search for the body.
    std::vector<Term> fvars;
    Term g = goal;
    while (g.is_pi()) {
      fvars.push_back(push_local(g.binder_name(), g.binder_type(), g.binder_style()));
      g = tc_.whnf(instantiate(g.binder_body(), fvars.back()));
    }
    auto r = synth_instance(g, depth);
    std::optional<Term> out;
    if (r) out = close(false, fvars, *r);
    pop_locals(fvars.size());
    return out;
  }
  const Term& head = get_app_fn(goal);
  if (!head.is_const() || !instances_.is_class(head.const_name())) return std::nullopt;
  const Name& cls = head.const_name();

  auto conclusion_head = [&](Term ty) -> std::optional<Name> {
    while (true) {
      if (!ty.is_pi()) {
        Term w = tc_.whnf(tc_.instantiate_mvars(ty));
        if (!w.is_pi()) {
          const Term& h = get_app_fn(w);
          if (h.is_const()) return h.const_name();
          return std::nullopt;
        }
        ty = w;
      }
      ty = ty.binder_body();
      if (ty.has_loose_bvars()) {
        // Heads never depend on bound variables; keep peeling.
        ty = instantiate(ty, Term::sort(Level::zero()));
      }
    }
  };

  for (size_t i = locals_.size(); i-- > 0;) {
    Term fv = locals_[i];
    const auto& d = tc_.lctx().get(fv.fvar_id());
    if (d.value) continue;
    auto h = conclusion_head(d.type);
    if (!h || *h != cls) continue;
    if (auto r = try_instance(fv, d.type, goal, depth)) return r;
  }
  for (const Name& inst : instances_.instances_of(cls)) {
    const Declaration* d = env_.find(inst);
    if (!d) continue;
    std::vector<Level> levels;
    for (size_t k = 0; k < d->uparams.size(); ++k) levels.push_back(mctx_.new_level_mvar());
    Term c = Term::constant(d->name, levels);
    if (auto r = try_instance(c, instantiate_levels(d->type, d->uparams, levels), goal, depth)) return r;
  }
  return std::nullopt;
}

void Elaborator::synthesize_pending(bool final) {
  bool progress = true;
  while (progress && !pending_.empty()) {
    progress = false;
    std::vector<uint64_t> rest;
    for (uint64_t m : pending_) {
      if (mctx_.is_assigned(m)) {
        // Unified with another hole: that hole becomes the instance problem.
        Term v = tc_.instantiate_mvars(Term::mvar(m));
        if (!v.is_mvar()) {
          progress = true;
          continue;
        }
        m = v.mvar_id();
      }
      Term goal = tc_.instantiate_mvars(mctx_.decl(m).type);
      bool has_term_mvar = false;
      for_each(goal, [&](const Term& t) {
        if (t.is_mvar()) has_term_mvar = true;
        return t.has_mvar() && !has_term_mvar;
      });
      if (has_term_mvar && !final) {
        rest.push_back(m);
        continue;
      }
      auto r = synth_instance(goal);
      if (!r || !unify(Term::mvar(m), *r)) {
        if (has_term_mvar && final) {
          rest.push_back(m);
          continue;
        }
        throw Error(code::kInstance, "failed to synthesize instance " + quote(tc_.render(goal)),
                    mctx_.decl(m).span.begin);
      }
      progress = true;
    }
    pending_ = std::move(rest);
  }
  if (!final) return;
  if (!pending_.empty()) {
    const auto& d = mctx_.decl(pending_.front());
    throw Error(code::kInstance, "failed to synthesize instance " + quote(tc_.render(d.type)), d.span.begin);
  }
  auto postponed = mctx_.postponed();
  mctx_.clear_postponed();
  for (auto& [a, b] : postponed) {
    if (!unifier_.unify_level(a, b))
      throw Error(code::kUniverse, "universe constraint " + render_level(tc_.instantiate_level_mvars(a)) +
                                       " = " + render_level(tc_.instantiate_level_mvars(b)) + " cannot be solved");
  }
  if (!mctx_.postponed().empty()) {
    auto [a, b] = mctx_.postponed().front();
    throw Error(code::kUniverse, "could not solve universe constraint " +
                                     render_level(tc_.instantiate_level_mvars(a)) + " = " +
                                     render_level(tc_.instantiate_level_mvars(b)));
  }
}

Term Elaborator::finalize(const Term& t, SourcePos pos) {
  Term r = tc_.instantiate_mvars(t);
  if (!r.has_mvar()) return r;
  std::optional<uint64_t> first;
  bool level = false;
  for_each(r, [&](const Term& s) {
    if (first || level) return false;
    if (s.is_mvar()) {
      first = s.mvar_id();
      return false;
    }
    if (s.is_sort() && s.level().has_mvar()) level = true;
    if (s.is_const())
      for (auto& l : s.const_levels())
        if (l.has_mvar()) level = true;
    return s.has_mvar();
  });
  if (first) {
    const auto& d = mctx_.decl(*first);
    SourcePos p = d.span.begin.line > 0 ? d.span.begin : pos;
    throw Error(code::kUnsolved,
                "could not determine " + d.origin + " of type " + quote(tc_.render(d.type)) + " in " +
                    quote(tc_.render(r)),
                p);
  }
  throw Error(code::kUnsolved, "could not determine universe level in " + quote(tc_.render(r)), pos);
}

// --- free-function API ---------------------------------------------------------------

Term elaborate_term(const Environment& env, const LocalContext& ctx, const InstanceTable& instances,
                    const SurfaceTerm& s, std::optional<Term> expected, const ElabScope& scope,
                    ElabOptions opts) {
  Elaborator e(env, instances, scope, opts);
  std::vector<Term> fvars;
  for (auto& entry : ctx.entries()) {
    Term ty = instantiate_rev(entry.type, fvars);
    std::optional<Term> val;
    if (entry.value) val = instantiate_rev(*entry.value, fvars);
    fvars.push_back(e.push_local(entry.name, ty, entry.style, val));
  }
  std::optional<Term> ex;
  if (expected) ex = instantiate_rev(*expected, fvars);
  Term r = e.elab(s, ex);
  e.synthesize_pending(true);
  r = e.finalize(r, s.span.begin);
  return abstract(r, fvars);
}

Term resolve_instance(const Environment& env, const InstanceTable& instances, const Term& goal, unsigned depth) {
  ElabOptions opts;
  opts.instance_depth = depth;
  Elaborator e(env, instances, {}, opts);
  auto r = e.synth_instance(goal);
  if (!r) throw Error(code::kInstance, "failed to synthesize instance " + quote(e.tc().render(goal)));
  return e.finalize(*r, {});
}

}  // namespace dgl
