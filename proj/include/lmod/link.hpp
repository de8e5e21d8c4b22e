// Builds a complete executable image from separately compiled object files:
// constant-index cascade, definition combination, indexed-block merging,
// switch-table merging and entry patching — plus the whole-program inlining
// path used as the equivalence oracle for byte-identical output.
#pragma once

#include <functional>
#include <map>
#include <optional>

#include "lmod/compile.hpp"
#include "lmod/elaborate.hpp"
#include "lmod/objfile.hpp"

namespace lmod {

// ------------------------------------------------------- segment walking

// Dispatch record for one first-argument symbol inside an indexed block:
// where the switch sends control, and the chain slot to rewrite when a
// later segment contributes clauses for the same symbol.
struct SubDispatch {
    uint32_t entry = 0;
    uint32_t tail = 0;
};

struct RtSymKey {
    enum class K : uint8_t { Const, Struct } k = K::Const;
    uint32_t index = 0;
    uint32_t arity = 0;
    friend bool operator==(const RtSymKey&, const RtSymKey&) = default;
};

struct BlockInfo {
    uint32_t header = kNoLabel;  // top-level chain slot; kNoLabel for closed singles
    uint32_t body = 0;
    bool indexed = false;
    // Indexed blocks only:
    uint32_t switchOff = 0;
    uint32_t constTable = kNoLabel;   // offset of the live switch_on_constant
    uint32_t structTable = kNoLabel;
    std::vector<std::pair<RtSymKey, SubDispatch>> consts;
    std::vector<std::pair<RtSymKey, SubDispatch>> structs;
    std::optional<SubDispatch> list;
    std::vector<uint32_t> varHeads;   // var-case chain headers, first..last
};

struct SegmentInfo {
    uint32_t entry = 0;
    bool open = false;
    std::vector<BlockInfo> blocks;
};

// Re-derives a segment's block and chain structure from its code. Works on
// relocated (image-space) code; segments must be in their compiled,
// pre-merge shape.
SegmentInfo walk_segment(const std::vector<Instruction>& code, uint32_t entry, bool open);

// ------------------------------------------------------------- combining

struct LinkOptions {
    // Merge seam-adjacent indexed blocks (the paper's try_else/retry_else
    // rewrites). Disabled only by tests that demonstrate the choice-point
    // cost of the naive append.
    bool mergeIndexedBlocks = true;
};

// Splices the segments of one predicate into a single chain, in order:
// trust_me -> retry_me_else at each seam, try_me_else -> retry_me_else on
// followers, and indexed blocks facing each other across a seam are fused
// (variable chains joined, per-symbol sub-chains joined with
// try_else/retry_else, switch tables merged). Rewrites `code` in place.
void combine_definitions(std::vector<Instruction>& code,
                         std::vector<SegmentInfo>& segments,
                         const LinkOptions& opts = {});

// Fuses two adjacent indexed blocks (the later absorbed into the earlier).
// Exposed for the rewrite-rule unit tests; combine_definitions drives it.
void merge_indexed_blocks(std::vector<Instruction>& code, BlockInfo& a, BlockInfo& b);

// ------------------------------------------------------------------ link

using ObjectLoader = std::function<const ObjectFile&(const std::string&, Position)>;

// Per-occurrence constant assignment, exposed for inspection and tests.
struct OccurrenceAssignment {
    std::string moduleName;
    int parent = -1;
    std::vector<std::pair<std::string, uint32_t>> globals;  // sig name -> index
    std::vector<uint32_t> locals;                           // local list -> index
};

struct LinkResult {
    Image image;
    std::vector<OccurrenceAssignment> trace;  // post-order, like the code layout
};

LinkResult link(const std::string& rootName, const ObjectLoader& loader,
                const LinkOptions& opts = {});

// Whole-program path: constants and clause order come from elaborate/flatten
// over the source graph; every occurrence's clauses are compiled directly
// against runtime indices and assembled without object files.
Image inline_compile(const ModuleGraph& g, const LinkOptions& opts = {});

// Compiles every module of a graph to object-file bytes (the separate
// path's inputs) keyed by module name.
std::map<std::string, std::vector<uint8_t>> compile_graph(const ModuleGraph& g,
                                                          bool debugNames = false);

struct VerifyResult {
    bool identical = false;
    size_t firstDiff = 0;   // valid when !identical
    size_t linkedSize = 0;
    size_t inlinedSize = 0;
};

// Link-versus-inline byte comparison over a source graph.
VerifyResult verify_graph(const ModuleGraph& g);

}  // namespace lmod
