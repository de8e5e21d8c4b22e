// Surface syntax: types, terms, goals, clauses, module and signature files.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmod/diag.hpp"

namespace lmod {

// ---------------------------------------------------------------- types

struct TypeExpr;
using TypePtr = std::shared_ptr<const TypeExpr>;

struct TypeExpr {
    enum class Kind { Var, App, Arrow };
    Kind kind;
    std::string name;            // Var: variable name; App: constructor name
    std::vector<TypePtr> args;   // App arguments
    TypePtr dom, cod;            // Arrow

    static TypePtr var(std::string n);
    static TypePtr app(std::string n, std::vector<TypePtr> as = {});
    static TypePtr arrow(TypePtr d, TypePtr c);
};

bool type_equal(const TypePtr& a, const TypePtr& b);
// Rightmost codomain of a chain of arrows.
TypePtr target_type(TypePtr t);
// Number of arrows peeled to reach the target; the arity of a constant.
int type_arity(const TypePtr& t);
// Alpha-invariant canonical encoding; used for hashing and byte-wise
// signature comparison.
std::string canon_type(const TypePtr& t);
// Inverse of canon_type (canonical variables come back as #0, #1, ...).
TypePtr decode_canon_type(const std::string& enc);
std::string type_to_string(const TypePtr& t);

// ----------------------------------------------------------- declarations

struct KindDecl {
    std::vector<std::string> names;
    int arity = 0;
    Position pos;
};

enum class DeclMode { Plain, Exportdef, Useonly };

const char* mode_name(DeclMode m);

struct TypeDecl {
    std::vector<std::string> names;
    TypePtr ty;
    DeclMode mode = DeclMode::Plain;
    Position pos;
};

// ---------------------------------------------------------------- terms

struct TermAst;
using TermPtr = std::shared_ptr<const TermAst>;

struct TermAst {
    enum class Kind { Const, Var, IntLit, RealLit, StrLit, App, ListNil, ListCons };
    Kind kind;
    std::string name;        // Const / Var
    long long ival = 0;
    double rval = 0;
    std::string sval;
    TermPtr fn, arg;         // App (curried, left-associative); ListCons uses fn=head, arg=tail
    Position pos;

    static TermPtr constant(std::string n, Position p = {});
    static TermPtr var(std::string n, Position p = {});
    static TermPtr int_lit(long long v, Position p = {});
    static TermPtr real_lit(double v, Position p = {});
    static TermPtr str_lit(std::string v, Position p = {});
    static TermPtr app(TermPtr f, TermPtr a, Position p = {});
    static TermPtr nil(Position p = {});
    static TermPtr cons(TermPtr h, TermPtr t, Position p = {});
};

// Leftmost applicand and argument list of a curried application spine.
struct TermSpine {
    TermPtr head;
    std::vector<TermPtr> args;
};
TermSpine term_spine(TermPtr t);

bool term_equal(const TermPtr& a, const TermPtr& b);
std::string term_to_string(const TermPtr& t);

// Shared literal rendering (answers and disassembly use the same forms).
std::string format_real(double v);
std::string quote_string(const std::string& s);

// ---------------------------------------------------------------- goals

struct GoalAst;
using GoalPtr = std::shared_ptr<const GoalAst>;

struct GoalAst {
    enum class Kind { True, Atom, And, Or, Exists };
    Kind kind;
    TermPtr atom;            // Atom
    GoalPtr left, right;     // And / Or
    std::string bound;       // Exists: bound variable name
    GoalPtr body;            // Exists
    Position pos;

    static GoalPtr truth(Position p = {});
    static GoalPtr atom_goal(TermPtr t, Position p = {});
    static GoalPtr conj(GoalPtr a, GoalPtr b, Position p = {});
    static GoalPtr disj(GoalPtr a, GoalPtr b, Position p = {});
    static GoalPtr exists(std::string v, GoalPtr g, Position p = {});
};

bool goal_equal(const GoalPtr& a, const GoalPtr& b);
std::string goal_to_string(const GoalPtr& g);

// --------------------------------------------------------------- clauses

struct ClauseAst {
    TermPtr head;
    GoalPtr body;            // null for facts
    Position pos;
};

bool clause_equal(const ClauseAst& a, const ClauseAst& b);
std::string clause_to_string(const ClauseAst& c);

// --------------------------------------------------- modules & signatures

enum class SigInclude { AccumSig, UseSig };

struct SigIncludeDecl {
    std::string name;
    SigInclude mode;
    Position pos;
};

struct ModuleAst {
    std::string name;
    std::vector<std::string> accumulates;     // in declaration order
    std::vector<SigIncludeDecl> accumSigs;
    std::vector<KindDecl> kinds;
    std::vector<TypeDecl> types;
    std::vector<ClauseAst> clauses;
    Position pos;
};

struct SignatureAst {
    std::string name;
    std::vector<SigIncludeDecl> accumSigs;
    std::vector<KindDecl> kinds;
    std::vector<TypeDecl> types;
    Position pos;
};

std::string module_to_string(const ModuleAst& m);
std::string signature_to_string(const SignatureAst& s);

}  // namespace lmod
