// Accumulation-graph resolution, the E-formula image of a module graph, and
// the flattened program with scope levels that drives the interpreter and
// the whole-program compilation path.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lmod/typecheck.hpp"

namespace lmod {

// Loads source artifacts by module name. Implementations typically read
// <name>.mod / <name>.sig from a search path; tests supply in-memory maps.
struct SourceLoader {
    std::function<ModuleAst(const std::string&, Position)> module;
    std::function<SignatureAst(const std::string&, Position)> signature;
};

struct ModuleGraph {
    std::string root;
    std::map<std::string, TypedModule> nodes;   // each module checked once
    std::map<std::string, CheckedSignature> sigs;
    // Emitted once per module name that is reachable along several paths.
    std::vector<std::string> diamondWarnings;

    const TypedModule& node(const std::string& n) const { return nodes.at(n); }
};

// Depth-first resolution; typechecks every reachable module exactly once.
// Throws ModuleNotFound / CyclicAccumulation / any typecheck error.
ModuleGraph resolve_graph(const std::string& root, const SourceLoader& loader);

// ------------------------------------------------------------- E-formula

using ConstId = int;

struct FlatConst {
    std::string name;      // generated "<orig>#<k>" for hidden constants
    std::string tyEnc;     // canonical type encoding
    int level = 0;         // 0 = root-visible or builtin, >= 1 = hidden
};

struct EFormula;
using EFormulaPtr = std::shared_ptr<const EFormula>;

// D-formula occurrences carry clauses resolved to ConstIds.
struct EClauseRef {
    const RClause* clause = nullptr;  // owned by the ModuleGraph's TypedModule
    // Constant environment for the clause's module occurrence.
    std::shared_ptr<const std::map<std::string, ConstId>> env;
    int occurrence = -1;              // post-order occurrence index
};

struct EFormula {
    enum class Kind { Clause, Conj, Exists };
    Kind kind;
    EClauseRef clause;                 // Clause
    std::vector<EFormulaPtr> parts;    // Conj (n-ary; empty = unit)
    ConstId binder = -1;               // Exists
    EFormulaPtr body;                  // Exists
};

// One module occurrence in the accumulation tree (private copy per
// accumulation occurrence). Listed in post-order: children before parent,
// which is the clause assembly order and the code layout order.
struct Occurrence {
    std::string moduleName;
    int parent = -1;                                  // occurrence index
    std::shared_ptr<const std::map<std::string, ConstId>> env;  // full scope
};

struct Elaboration {
    EFormulaPtr formula;
    std::vector<FlatConst> consts;        // ConstId-indexed; [0]=nil, [1]=true
    std::vector<Occurrence> occurrences;  // post-order
    int binderCount = 0;
};

// Conjoins clauses with accumulated sub-formulas (accumulated first, own
// clauses after) and binds each module's local constants existentially,
// renamed apart. Constant ids are allocated root-globals-first, then
// pre-order by module occurrence — the same cascade order the linker uses.
Elaboration elaborate(const ModuleGraph& g);

struct FlatClause {
    ConstId pred;
    const RClause* clause;
    std::shared_ptr<const std::map<std::string, ConstId>> env;
    int occurrence;
};

struct FlatProgram {
    std::vector<FlatConst> consts;
    std::map<std::string, ConstId> rootScope;       // level-0 name -> id
    std::vector<FlatClause> clauses;                // assembly order
    std::map<ConstId, std::vector<int>> predicates; // pred -> clause indices
    std::vector<Occurrence> occurrences;
    SymbolTable rootTable;                          // for goal checking

    ConstId nilId() const { return 0; }
    ConstId trueId() const { return 1; }
};

// Raises the existential prefix (already renamed apart), flattens the
// conjunction and indexes clauses by head predicate.
FlatProgram flatten(const Elaboration& e, const ModuleGraph& g);

// Convenience: resolve + elaborate + flatten.
FlatProgram flatten_graph(const ModuleGraph& g);

}  // namespace lmod
