// Per-module compilation: clause code generation, chain construction,
// first-argument indexing blocks, and object-file assembly. Uses only the
// module's own content and the signatures of accumulated modules.
#pragma once

#include <functional>

#include "lmod/objfile.hpp"
#include "lmod/typecheck.hpp"

namespace lmod {

// Maps a constant name to its reference in the target space. The module
// compiler resolves to Global/Local/Builtin; the whole-program path resolves
// straight to Runtime indices.
using ConstResolver = std::function<ConstRef(const std::string&)>;

// Standard WAM clause translation. Body calls are emitted as unresolved
// CallKind::Pred targets; the caller classifies or patches them.
std::vector<Instruction> compile_clause(const RClause& c, const ConstResolver& resolve);

// Top-level goal body: every variable is a permanent in the goal
// environment (slot index = Y index), the first `nFree` slots are the query
// variables the machine pre-creates at level 0, every call returns, and the
// code ends with halt.
std::vector<Instruction> compile_goal_code(const RGoalPtr& body, size_t nSlots,
                                           int nFree, const ConstResolver& resolve);

// A predicate's compiled segment. Offsets are segment-relative; the block
// and chain structure is re-derivable from the code (see link walker).
struct PredAssembly {
    std::vector<Instruction> code;
    bool openHeader = false;  // segment starts with a rewritable chain slot
};

// Partitions clauses into plain blocks and indexed runs (>= 2 consecutive
// clauses whose first head argument is a constant, structure, nil or cons),
// emits switch tables and sub-chains, and links top-level blocks. Open
// predicates additionally carry the chain slots that let the linker splice
// further segments in place.
PredAssembly compile_predicate(const std::vector<const RClause*>& clauses, bool open,
                               const ConstResolver& resolve);

// True when other modules may contribute clauses to this predicate: its name
// is signature-global in scope and not frozen by exportdef.
bool predicate_open(const TypedModule& m, const std::string& pred);

struct ModuleCode {
    std::vector<Instruction> code;
    // predicate name -> (segment entry offset, open flag)
    std::vector<std::tuple<std::string, uint32_t, bool>> entries;
};

// Compiles every predicate with clauses in the module, in first-clause
// order, into one code section. Call targets remain CallKind::Pred.
ModuleCode assemble_module_code(const TypedModule& m, const ConstResolver& resolve);

ObjectFile compile_module(const TypedModule& m, bool debugNames = false);

// The module's constant reference view: own-signature globals, then locals,
// then builtins.
ConstResolver module_resolver(const TypedModule& m);

// Item-4 membership: in-scope signature-global predicates not marked
// exportdef, own signature first, then accumulated signatures in order.
std::vector<std::string> redefinable_predicates(const TypedModule& m);

}  // namespace lmod
