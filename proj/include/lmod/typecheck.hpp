// Kind checking, signature checking, module-against-signature checking and
// clause type inference. Also produces the resolved clause form consumed by
// the interpreter and the compiler.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmod/ast.hpp"

namespace lmod {

// Where a constant entered a module's scope.
enum class Origin { Builtin, OwnSig, Local, Accumulated };

struct ConstInfo {
    std::string name;
    TypePtr scheme;           // declared type; type variables are generalized
    DeclMode mode = DeclMode::Plain;
    Origin origin = Origin::Local;
    std::string fromModule;   // Accumulated: providing module
    int arity = 0;            // arrows in the scheme; constants are fully applied
    bool isPred = false;      // target type is o
};

struct SymbolTable {
    std::map<std::string, int> kinds;          // constructor -> arity
    std::map<std::string, ConstInfo> consts;

    const ConstInfo* find(const std::string& n) const {
        auto it = consts.find(n);
        return it == consts.end() ? nullptr : &it->second;
    }
};

SymbolTable builtin_table();

// True when the rightmost codomain is the proposition type o.
bool is_predicate_type(const TypePtr& t);

struct SigConst {
    std::string name;
    TypePtr ty;
    DeclMode mode;
};

struct CheckedSignature {
    std::string name;
    std::vector<std::pair<std::string, int>> kinds;  // declaration order
    std::vector<SigConst> consts;                    // declaration order
    uint64_t hash = 0;

    const SigConst* find(const std::string& n) const;
};

// use_sig view: every exportdef entry becomes useonly. Idempotent.
CheckedSignature apply_use_sig(const CheckedSignature& sig);

uint64_t signature_hash(const CheckedSignature& sig);

// A loader for already-checked signatures named by accum_sig / use_sig lines.
using SigResolver = std::function<const CheckedSignature&(const std::string&, Position)>;

CheckedSignature check_signature(const SignatureAst& sig, const SigResolver& resolve);

// ------------------------------------------------------- resolved clauses

// Terms with variables resolved to clause slots and constants kept by name
// (names are unambiguous within a module's scope: no shadowing).
struct RTerm;
using RTermPtr = std::shared_ptr<const RTerm>;

struct RTerm {
    enum class Kind { Const, Int, Real, Str, Var, App, Nil, Cons };
    Kind kind;
    std::string cname;          // Const / App head
    long long ival = 0;
    double rval = 0;
    std::string sval;
    int slot = -1;              // Var
    std::vector<RTermPtr> args; // App (full application); Cons uses args[0], args[1]

    static RTermPtr mk(Kind k);
};

struct RGoal;
using RGoalPtr = std::shared_ptr<const RGoal>;

struct RGoal {
    enum class Kind { True, Atom, And, Or, Exists };
    Kind kind;
    std::string pred;            // Atom head constant
    std::vector<RTermPtr> args;  // Atom arguments
    RGoalPtr left, right;        // And / Or
    int slot = -1;               // Exists binder slot
    RGoalPtr body;               // Exists
};

struct VarInfo {
    std::string name;
    TypePtr ty;          // inferred (clause variables) or declared context
    bool sigmaBound = false;
};

struct RClause {
    std::string pred;            // head predicate name
    std::vector<RTermPtr> headArgs;
    RGoalPtr body;               // null for facts
    std::vector<VarInfo> vars;   // slot-indexed
    Position pos;
};

// ---------------------------------------------------------- typed module

struct TypedModule {
    std::string name;
    SymbolTable table;
    CheckedSignature ownSig;
    std::vector<std::string> accumulates;
    std::vector<CheckedSignature> accSigs;   // parallel to accumulates
    // Hidden constants of this module: body-declared names absent from the
    // own signature first (declaration order), then accumulated signature
    // globals not re-exported (accumulation order).
    std::vector<std::string> localConsts;
    std::vector<RClause> clauses;            // source order
    // Predicates with clauses here, in order of first clause appearance.
    std::vector<std::string> predOrder;
    std::map<std::string, std::vector<int>> predClauses;  // name -> clause indices
};

TypedModule check_module(const ModuleAst& m, const CheckedSignature& ownSig,
                         const std::vector<CheckedSignature>& accSigs,
                         const SigResolver& resolveSig);

// Infers types for one clause against a symbol table; exposed for tests.
RClause infer_clause_types(const ClauseAst& c, const SymbolTable& table);

// Checks a top-level goal against a table (a root signature scope); returns
// the resolved goal with query variables in slots [0, nFree).
struct CheckedGoal {
    RGoalPtr goal;
    std::vector<VarInfo> vars;
    int nFree = 0;
};
CheckedGoal check_goal(const GoalPtr& g, const std::vector<std::string>& freeVars,
                       const SymbolTable& table);

}  // namespace lmod
