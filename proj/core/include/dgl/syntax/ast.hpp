#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dgl/error.hpp"
#include "dgl/kernel/term.hpp"

namespace dgl {

struct Span {
  SourcePos begin;
  SourcePos end;
};

// --- universe levels as written ---------------------------------------------

struct SurfaceLevel;
using SLevelPtr = std::shared_ptr<const SurfaceLevel>;

struct SurfaceLevel {
  enum class Kind : uint8_t { Num, Ident, Add, Max, IMax, Hole };
  Kind kind = Kind::Num;
  unsigned num = 0;  // Num literal, or the offset of Add
  std::string name;  // Ident
  SLevelPtr a, b;    // Add uses `a`; Max and IMax use both
  Span span;
};

// --- terms ----------------------------------------------------------------------

struct SurfaceTerm;
using STermPtr = std::shared_ptr<const SurfaceTerm>;

struct SurfaceBinder {
  std::string name;  // "_" when anonymous
  BinderStyle style = BinderStyle::Explicit;
  STermPtr type;     // null when omitted
  Span span;
};

struct SurfaceTerm {
  enum class Kind : uint8_t { Ident, Sort, App, Lam, Pi, Let, Hole, Ascribe };
  enum class SortKind : uint8_t { Prop, Type, Sort };

  Kind kind = Kind::Hole;
  Span span;

  // Ident
  std::string name;
  bool explicit_mode = false;  // written with `@`
  std::optional<std::vector<SLevelPtr>> levels;

  // Sort: `Prop`, `Type l?`, `Sort l?`
  SortKind sort_kind = SortKind::Prop;
  SLevelPtr level;

  // App
  STermPtr fn, arg;

  // Lam, Pi (one binder each), Let (binder is the let name)
  SurfaceBinder binder;
  STermPtr body;

  // Let value; Ascribe uses `body` for the term and `value` for the type.
  STermPtr value;
};

// --- commands -------------------------------------------------------------------

struct SurfaceCommand;
using SCommandPtr = std::shared_ptr<const SurfaceCommand>;

struct SurfaceCtor {
  std::string name;
  std::vector<SurfaceBinder> binders;
  STermPtr type;  // null when omitted
  Span span;
};

struct SurfaceField {
  std::string name;
  std::vector<SurfaceBinder> binders;
  STermPtr type;
  Span span;
};

struct SurfaceCommand {
  enum class Kind : uint8_t {
    Def, Axiom, Inductive, Structure, Class, Instance, Check, Whnf, DefEq, Fail, PrintAxioms, Open
  };

  Kind kind = Kind::Def;
  Span span;

  std::string name;
  std::optional<std::vector<std::string>> uparams;  // explicit `.{u v}`
  std::vector<SurfaceBinder> binders;
  STermPtr type;   // may be null for def, inductive, structure
  STermPtr value;  // def, instance

  // inductive
  std::vector<SurfaceCtor> ctors;

  // structure, class
  STermPtr extends;
  std::string ctor_name = "mk";
  std::vector<SurfaceField> fields;

  // #check, #whnf use `value`; #def_eq uses lhs and rhs
  STermPtr lhs, rhs;
  std::optional<bool> expect;

  // #fail
  SCommandPtr inner;

  // open
  std::vector<std::string> namespaces;
};

std::string to_string(SurfaceCommand::Kind k);

}  // namespace dgl
