#pragma once

#include <map>
#include <string>
#include <vector>

#include "dgl/kernel/reduction.hpp"
#include "dgl/syntax/render.hpp"
#include "support.hpp"
#include "term_gen.hpp"

namespace dgl::test {

struct PropResult {
  size_t checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return checked > 0 && failures.empty(); }
  void fail(std::string msg) {
    if (failures.size() < 10) failures.push_back(std::move(msg));
    else if (failures.size() == 10) failures.push_back("...");
  }
};

inline std::vector<Term> generate_terms(size_t n, uint32_t seed, unsigned depth = 5) {
  NatBoolGen gen(seed);
  std::vector<Term> out;
  for (size_t i = 0; i < n; ++i)
    out.push_back(gen.gen(i % 3 == 2 ? NatBoolGen::Ty::Bool : NatBoolGen::Ty::Nat, depth));
  return out;
}

// whnf-derived normal form against the small-step oracle.
inline PropResult oracle_agreement(const Environment& env, const std::vector<Term>& terms) {
  PropResult r;
  for (auto& t : terms) {
    ++r.checked;
    try {
      Term a = whnf_normal_form(env, t);
      Term b = normalize(env, t, 1'000'000);
      if (a != b) r.fail(render(t) + ": whnf gives " + render(a) + ", oracle gives " + render(b));
    } catch (const Error& e) {
      r.fail(render(t) + ": " + e.what());
    }
  }
  return r;
}

// Subject reduction along each oracle path, plus infer/check agreement.
inline PropResult subject_reduction(const Environment& env, const std::vector<Term>& terms,
                                    size_t max_steps = 25) {
  PropResult r;
  for (auto& t : terms) {
    ++r.checked;
    try {
      Term ty = infer(env, {}, t);
      check(env, {}, t, ty);
      Term cur = t;
      for (size_t i = 0; i < max_steps; ++i) {
        auto next = small_step(env, cur);
        if (!next) break;
        cur = *next;
        Term ty2 = infer(env, {}, cur);
        if (!def_eq(env, {}, ty, ty2)) {
          r.fail(render(cur) + ": type changed to " + render(ty2));
          break;
        }
        check(env, {}, cur, ty);
      }
    } catch (const Error& e) {
      r.fail(render(t) + ": " + e.what());
    }
  }
  return r;
}

// Reflexivity and `t == whnf t` on every term; then `samples` same-type
// triples drawn so that many are def_eq, checking symmetry on each pair and
// transitivity where it applies. `checked` counts the triples.
inline PropResult def_eq_relation(const Environment& env, const std::vector<Term>& terms,
                                  size_t samples, uint32_t seed, size_t* positive_out = nullptr) {
  PropResult r;
  std::mt19937 rng(seed);
  // Classes of equal normal form, and of equal type.
  std::map<std::string, std::vector<size_t>> by_value;
  std::map<std::string, std::vector<size_t>> by_type;
  std::vector<std::string> value_key(terms.size()), type_key(terms.size());
  for (size_t i = 0; i < terms.size(); ++i) {
    const Term& t = terms[i];
    if (!def_eq(env, {}, t, t)) r.fail("not reflexive: " + render(t));
    if (!def_eq(env, {}, t, whnf(env, {}, t))) r.fail("not def_eq to whnf: " + render(t));
    value_key[i] = render(whnf_normal_form(env, t));
    type_key[i] = render(infer(env, {}, t));
    by_value[value_key[i]].push_back(i);
    by_type[type_key[i]].push_back(i);
  }
  auto from = [&](const std::vector<size_t>& c) {
    return c[std::uniform_int_distribution<size_t>(0, c.size() - 1)(rng)];
  };
  size_t positive = 0;
  for (size_t k = 0; k < samples; ++k) {
    size_t a = std::uniform_int_distribution<size_t>(0, terms.size() - 1)(rng);
    const auto& same_type = by_type[type_key[a]];
    size_t b = k % 2 ? from(by_value[value_key[a]]) : from(same_type);
    size_t c = k % 3 ? from(by_value[value_key[b]]) : from(same_type);
    ++r.checked;
    bool ab = def_eq(env, {}, terms[a], terms[b]);
    bool ba = def_eq(env, {}, terms[b], terms[a]);
    bool bc = def_eq(env, {}, terms[b], terms[c]);
    bool cb = def_eq(env, {}, terms[c], terms[b]);
    bool ac = def_eq(env, {}, terms[a], terms[c]);
    if (ab != ba) r.fail("not symmetric: " + render(terms[a]) + " / " + render(terms[b]));
    if (bc != cb) r.fail("not symmetric: " + render(terms[b]) + " / " + render(terms[c]));
    if (ab && bc) {
      ++positive;
      if (!ac) r.fail("not transitive: " + render(terms[a]) + " / " + render(terms[c]));
    }
    // closed Nat/Bool terms are convertible exactly when their values agree
    if (ab != (value_key[a] == value_key[b]))
      r.fail("def_eq disagrees with normal forms: " + render(terms[a]) + " / " + render(terms[b]));
  }
  if (positive == 0) r.fail("no positive transitivity sample drawn");
  if (positive_out) *positive_out = positive;
  return r;
}

// Reflexivity of def_eq on every type and definition body of `env`.
inline PropResult def_eq_reflexive_on_env(const Environment& env) {
  PropResult r;
  TypeChecker tc(env);
  for (auto& d : env.declarations()) {
    ++r.checked;
    if (!tc.is_def_eq(d->type, d->type)) r.fail("type of " + d->name.str());
    if (d->is_definition() && !tc.is_def_eq(d->value, d->value)) r.fail("value of " + d->name.str());
  }
  return r;
}

// render, re-parse and re-elaborate every type and definition body.
inline PropResult render_round_trip(const ElabState& st) {
  PropResult r;
  RenderOptions opts;
  opts.env = &st.env;
  opts.is_global = [&](const std::string& s) { return st.env.contains(Name(s)); };
  auto round = [&](const Declaration& d, const Term& t, const char* what) {
    ++r.checked;
    std::string text = render(t, {}, opts);
    try {
      Elaborator el(st.env, st.instances);
      el.set_level_params(d.uparams, false);
      Term back = el.finalize(el.elab(*parse_term(text), std::nullopt), {});
      if (back != t) r.fail(std::string(what) + " of " + d.name.str() + ": " + text);
    } catch (const Error& e) {
      r.fail(std::string(what) + " of " + d.name.str() + ": " + e.what() + " in " + text);
    }
  };
  for (auto& d : st.env.declarations()) {
    round(*d, d->type, "type");
    if (d->is_definition()) round(*d, d->value, "value");
  }
  return r;
}

inline std::string summary(const PropResult& r) {
  std::string s = std::to_string(r.checked) + " checked, " + std::to_string(r.failures.size()) + " failed";
  for (auto& f : r.failures) s += "\n    " + f;
  return s;
}

}  // namespace dgl::test
