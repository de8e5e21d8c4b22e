#include "lmod/link.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace lmod {

namespace {

constexpr const char* kNilTyEnc = "list[#0]";
constexpr const char* kTrueTyEnc = "o";

}  // namespace

// ------------------------------------------------------- segment walking

namespace {

SubDispatch walk_dispatch(const std::vector<Instruction>& code, uint32_t target) {
    SubDispatch d{target, target};
    const Instruction& i = code[target];
    if (i.op == Op::Try) {
        uint32_t off = target;
        while (code[off].op != Op::Trust) {
            ++off;
            if (off >= code.size() || (code[off].op != Op::Retry && code[off].op != Op::Trust))
                fail(Errc::MachineFault, "malformed sub-chain in segment walk");
        }
        d.tail = off;
    }
    // try_else slot: entry == tail. Anything else is a direct clause target
    // (closed blocks only) and is never rewritten.
    return d;
}

RtSymKey rt_key(const SwitchEntry& e, bool structure) {
    RtSymKey k;
    k.k = structure ? RtSymKey::K::Struct : RtSymKey::K::Const;
    if (e.symbol.space == Space::Runtime)
        k.index = e.symbol.index;
    else if (e.symbol.space == Space::Builtin)
        k.index = e.symbol.index;  // builtins share the runtime index space
    else
        fail(Errc::MachineFault, "unrelocated switch symbol in segment walk");
    k.arity = e.arity;
    return k;
}

BlockInfo walk_block(const std::vector<Instruction>& code, uint32_t header,
                     uint32_t body) {
    BlockInfo b;
    b.header = header;
    b.body = body;
    if (code[body].op != Op::SwitchOnTerm) return b;

    b.indexed = true;
    b.switchOff = body;
    const Instruction& sw = code[body];
    uint32_t off = sw.lab1;
    for (;;) {
        b.varHeads.push_back(off);
        const Instruction& h = code[off];
        if (h.op == Op::TrustMe) break;
        if (h.op != Op::TryMeElse && h.op != Op::RetryMeElse)
            fail(Errc::MachineFault, "malformed variable chain in segment walk");
        off = h.lab1;
    }
    if (sw.lab2 != kNoLabel) {
        b.constTable = sw.lab2;
        for (auto& e : code[sw.lab2].table)
            b.consts.emplace_back(rt_key(e, false), walk_dispatch(code, e.target));
    }
    if (sw.lab4 != kNoLabel) {
        b.structTable = sw.lab4;
        for (auto& e : code[sw.lab4].table)
            b.structs.emplace_back(rt_key(e, true), walk_dispatch(code, e.target));
    }
    if (sw.lab3 != kNoLabel) b.list = walk_dispatch(code, sw.lab3);
    return b;
}

}  // namespace

SegmentInfo walk_segment(const std::vector<Instruction>& code, uint32_t entry,
                         bool open) {
    SegmentInfo s;
    s.entry = entry;
    s.open = open;
    const Instruction& first = code[entry];
    if (first.op == Op::TryMeElse && first.lab1 == kNoLabel) {
        // Open single-block segment: rewritable slot, then the body.
        s.blocks.push_back(walk_block(code, entry, entry + 1));
        return s;
    }
    if (first.op == Op::TryMeElse) {
        uint32_t off = entry;
        for (;;) {
            const Instruction& h = code[off];
            s.blocks.push_back(walk_block(code, off, off + 1));
            if (h.op == Op::TrustMe) break;
            if (h.op != Op::TryMeElse && h.op != Op::RetryMeElse)
                fail(Errc::MachineFault, "malformed top-level chain in segment walk");
            off = h.lab1;
        }
        return s;
    }
    // Closed single-block segment: no header slot.
    s.blocks.push_back(walk_block(code, kNoLabel, entry));
    return s;
}

// ------------------------------------------------------------- combining

namespace {

// Joins two per-symbol dispatch chains across a seam: the earlier chain's
// terminal keeps its clause target but gains the later chain as its
// backtrack continuation; the later chain's head stops creating a choice
// point of its own.
void join_chains(std::vector<Instruction>& code, SubDispatch& a, const SubDispatch& b) {
    Instruction& t = code[a.tail];
    switch (t.op) {
        case Op::Trust:
            t.op = Op::RetryElse;
            t.lab2 = b.entry;
            break;
        case Op::TryElse:
        case Op::RetryElse:
            t.lab2 = b.entry;
            break;
        default:
            fail(Errc::MachineFault, "unexpected sub-chain tail during merge");
    }
    Instruction& h = code[b.entry];
    switch (h.op) {
        case Op::Try:
            h.op = Op::Retry;
            break;
        case Op::TryElse:
            h.op = Op::Trust;
            h.lab2 = kNoLabel;
            break;
        default:
            fail(Errc::MachineFault, "unexpected sub-chain head during merge");
    }
    a.tail = b.tail;
}

void rebuild_table(std::vector<Instruction>& code, uint32_t tableOff,
                   const std::vector<std::pair<RtSymKey, SubDispatch>>& syms,
                   bool structure) {
    Instruction& sw = code[tableOff];
    sw.table.clear();
    for (auto& [k, d] : syms) {
        SwitchEntry e;
        e.symbol = ConstRef::runtime(k.index);
        e.arity = structure ? k.arity : 0;
        e.target = d.entry;
        sw.table.push_back(std::move(e));
    }
}

}  // namespace

void merge_indexed_blocks(std::vector<Instruction>& code, BlockInfo& a, BlockInfo& b) {
    assert(a.indexed && b.indexed);

    // Variable-case chains: joined exactly like top-level chains.
    {
        Instruction& tail = code[a.varHeads.back()];
        assert(tail.op == Op::TrustMe);
        tail.op = Op::RetryMeElse;
        tail.lab1 = b.varHeads.front();
        Instruction& head = code[b.varHeads.front()];
        assert(head.op == Op::TryMeElse);
        head.op = Op::RetryMeElse;
        a.varHeads.insert(a.varHeads.end(), b.varHeads.begin(), b.varHeads.end());
    }

    auto merge_syms = [&](std::vector<std::pair<RtSymKey, SubDispatch>>& as,
                          const std::vector<std::pair<RtSymKey, SubDispatch>>& bs) {
        for (auto& [k, bd] : bs) {
            auto it = std::find_if(as.begin(), as.end(),
                                   [&](auto& p) { return p.first == k; });
            if (it == as.end())
                as.emplace_back(k, bd);
            else
                join_chains(code, it->second, bd);
        }
    };

    merge_syms(a.consts, b.consts);
    if (!b.consts.empty()) {
        if (a.constTable != kNoLabel) {
            rebuild_table(code, a.constTable, a.consts, false);
        } else {
            // Adopt the later block's table wholesale.
            a.constTable = b.constTable;
            code[a.switchOff].lab2 = b.constTable;
        }
    }

    merge_syms(a.structs, b.structs);
    if (!b.structs.empty()) {
        if (a.structTable != kNoLabel) {
            rebuild_table(code, a.structTable, a.structs, true);
        } else {
            a.structTable = b.structTable;
            code[a.switchOff].lab4 = b.structTable;
        }
    }

    if (b.list) {
        if (a.list) {
            join_chains(code, *a.list, *b.list);
        } else {
            a.list = b.list;
            code[a.switchOff].lab3 = b.list->entry;
        }
    }
}

void combine_definitions(std::vector<Instruction>& code,
                         std::vector<SegmentInfo>& segments, const LinkOptions& opts) {
    if (segments.size() <= 1) return;

    // Logical top-level block list after seam fusion. Fusing absorbs the
    // later block into the earlier one; only segment seams are candidates.
    std::vector<BlockInfo*> logical;
    for (size_t s = 0; s < segments.size(); ++s) {
        for (size_t b = 0; b < segments[s].blocks.size(); ++b) {
            BlockInfo& blk = segments[s].blocks[b];
            if (opts.mergeIndexedBlocks && s > 0 && b == 0 && !logical.empty() &&
                logical.back()->indexed && blk.indexed) {
                merge_indexed_blocks(code, *logical.back(), blk);
                continue;
            }
            logical.push_back(&blk);
        }
    }

    if (logical.size() == 1) return;  // fully fused: single block, no chain

    for (size_t j = 0; j < logical.size(); ++j) {
        uint32_t hdr = logical[j]->header;
        assert(hdr != kNoLabel && "mergeable segments always carry chain slots");
        Instruction& h = code[hdr];
        if (j == 0) {
            h.op = Op::TryMeElse;
            h.lab1 = logical[j + 1]->header;
        } else if (j + 1 < logical.size()) {
            h.op = Op::RetryMeElse;
            h.lab1 = logical[j + 1]->header;
        } else {
            h.op = Op::TrustMe;
            h.lab1 = kNoLabel;
        }
    }
}

// ------------------------------------------------------------------ link

namespace {

struct SegmentRec {
    uint32_t entry;
    bool open;
};

// Shared final phase: combine per-predicate segments, append the shared
// fail stub, patch calls and emit the entry map.
void finalize_image(Image& img,
                    std::vector<std::pair<uint32_t, std::vector<SegmentRec>>>& perPred,
                    const LinkOptions& opts) {
    std::map<uint32_t, uint32_t> entry;
    for (auto& [pred, segs] : perPred) {
        if (segs.size() >= 2) {
            for (auto& s : segs) {
                if (!s.open) {
                    std::string name = img.consts[pred].name.empty()
                                           ? "#" + std::to_string(pred)
                                           : img.consts[pred].name;
                    fail(Errc::MergeClosedDefinition,
                         "predicate '" + name +
                             "' has a closed definition but receives further clauses");
                }
            }
        }
        std::vector<SegmentInfo> infos;
        infos.reserve(segs.size());
        for (auto& s : segs) infos.push_back(walk_segment(img.code, s.entry, s.open));
        combine_definitions(img.code, infos, opts);
        entry.emplace(pred, segs.front().entry);
    }

    img.failEntry = static_cast<uint32_t>(img.code.size());
    img.code.push_back(ins_simple(Op::Fail));

    for (auto& ins : img.code) {
        if (ins.op != Op::Call && ins.op != Op::Execute) continue;
        if (ins.call.kind == CallKind::Offset) continue;
        assert(ins.call.kind == CallKind::Pred &&
               ins.call.pred.space == Space::Runtime);
        auto it = entry.find(ins.call.pred.index);
        ins.call.kind = CallKind::Offset;
        ins.call.offset = it != entry.end() ? it->second : img.failEntry;
        ins.call.pred = {};
    }

    for (auto& [pred, off] : entry) img.entries.emplace_back(pred, off);
}

struct Linker {
    const ObjectLoader& loader;
    const LinkOptions& opts;
    Image img;
    std::vector<std::pair<uint32_t, std::vector<SegmentRec>>> perPred;
    std::map<uint32_t, size_t> perPredIdx;
    std::vector<OccurrenceAssignment> trace;
    std::vector<std::string> stack;

    Linker(const ObjectLoader& l, const LinkOptions& o) : loader(l), opts(o) {}

    std::vector<SegmentRec>& segs_for(uint32_t pred) {
        auto it = perPredIdx.find(pred);
        if (it == perPredIdx.end()) {
            perPredIdx.emplace(pred, perPred.size());
            perPred.emplace_back(pred, std::vector<SegmentRec>{});
            return perPred.back().second;
        }
        return perPred[it->second].second;
    }

    uint32_t fresh_const(std::string name, std::string tyEnc, uint16_t level) {
        img.consts.push_back(ImageConst{std::move(name), std::move(tyEnc), level});
        return static_cast<uint32_t>(img.consts.size() - 1);
    }

    // Loads one module occurrence. `globalMap` assigns runtime indices to the
    // object file's global list; locals get fresh hidden indices here, then
    // accumulated children resolve through the renaming maps, then the code
    // is relocated and appended (children first).
    int load(const std::string& name, const std::vector<uint32_t>& globalMap,
             int parentOcc, Position pos) {
        if (std::find(stack.begin(), stack.end(), name) != stack.end()) {
            std::string path;
            for (auto& s : stack) path += s + " -> ";
            fail(Errc::CyclicAccumulation, "cyclic accumulation: " + path + name, pos);
        }
        stack.push_back(name);
        const ObjectFile& obj = loader(name, pos);
        if (obj.moduleName != name)
            fail(Errc::BadFormat, "object file for '" + name + "' names module '" +
                                      obj.moduleName + "'");
        if (globalMap.size() != obj.globals.size())
            fail(Errc::RenamingDomainMismatch,
                 "global table of '" + name + "' does not match its signature");

        std::vector<uint32_t> localMap;
        localMap.reserve(obj.locals.size());
        for (auto& l : obj.locals)
            localMap.push_back(fresh_const("", l.tyEnc, 1));

        OccurrenceAssignment oa;
        oa.moduleName = name;
        oa.parent = parentOcc;
        for (size_t i = 0; i < obj.globals.size(); ++i)
            oa.globals.emplace_back(obj.globals[i].name, globalMap[i]);
        oa.locals = localMap;

        auto resolve = [&](const ConstRef& c) -> uint32_t {
            switch (c.space) {
                case Space::Builtin:
                    return c.index;
                case Space::Global:
                    return globalMap[c.index];
                case Space::Local:
                    return localMap[c.index];
                case Space::Runtime:
                    fail(Errc::BadFormat, "runtime reference in object code");
            }
            return 0;
        };

        // Children in accumulation order; their code lands before ours.
        std::vector<int> childOccs;
        for (auto& acc : obj.accums) {
            const ObjectFile& child = loader(acc.moduleName, pos);
            if (child.sigHash != acc.sigHash)
                fail(Errc::SignatureSkew,
                     "signature of '" + acc.moduleName +
                         "' changed since '" + name + "' was compiled");
            std::vector<uint32_t> childMap;
            childMap.reserve(child.globals.size());
            for (auto& g : child.globals) {
                const ConstRef* c = acc.find(g.name);
                if (!c)
                    fail(Errc::RenamingDomainMismatch,
                         "renaming map of '" + name + "' for '" + acc.moduleName +
                             "' lacks global '" + g.name + "'");
                childMap.push_back(resolve(*c));
            }
            childOccs.push_back(load(acc.moduleName, childMap, -2, pos));
        }

        // Relocate and append this module's code.
        uint32_t base = static_cast<uint32_t>(img.code.size());
        for (const Instruction& src : obj.code) {
            Instruction ins = src;
            auto shift = [&](uint32_t& l) {
                if (l != kNoLabel) l += base;
            };
            shift(ins.lab1);
            shift(ins.lab2);
            shift(ins.lab3);
            shift(ins.lab4);
            for (auto& e : ins.table) {
                e.symbol = ConstRef::runtime(resolve(e.symbol));
                e.target += base;
            }
            switch (ins.op) {
                case Op::GetConstant:
                case Op::PutConstant:
                case Op::UnifyConstant:
                case Op::SetConstant:
                case Op::GetStructure:
                case Op::PutStructure:
                    ins.cref = ConstRef::runtime(resolve(ins.cref));
                    break;
                case Op::Call:
                case Op::Execute:
                    switch (ins.call.kind) {
                        case CallKind::Label:
                            ins.call.kind = CallKind::Offset;
                            ins.call.offset += base;
                            break;
                        case CallKind::RedefIdx:
                            ins.call.kind = CallKind::Pred;
                            ins.call.pred = ConstRef::runtime(
                                resolve(obj.redefinable[ins.call.offset]));
                            ins.call.offset = 0;
                            break;
                        case CallKind::Pred:
                            ins.call.pred = ConstRef::runtime(resolve(ins.call.pred));
                            break;
                        case CallKind::Offset:
                            fail(Errc::BadFormat, "patched call in object code");
                    }
                    break;
                default:
                    break;
            }
            img.code.push_back(std::move(ins));
        }

        std::set<uint32_t> openSet;
        for (auto& c : obj.redefinable) openSet.insert(resolve(c));
        for (auto& [cref, off] : obj.entries) {
            uint32_t pred = resolve(cref);
            segs_for(pred).push_back(SegmentRec{off + base, openSet.count(pred) > 0});
        }

        int occIdx = static_cast<int>(trace.size());
        trace.push_back(std::move(oa));
        for (int c : childOccs) trace[c].parent = occIdx;
        stack.pop_back();
        return occIdx;
    }
};

}  // namespace

LinkResult link(const std::string& rootName, const ObjectLoader& loader,
                const LinkOptions& opts) {
    Linker lk(loader, opts);
    lk.img.rootName = rootName;
    lk.fresh_const("nil", kNilTyEnc, 0);
    lk.fresh_const("true", kTrueTyEnc, 0);

    const ObjectFile& root = loader(rootName, {});
    std::vector<uint32_t> rootMap;
    rootMap.reserve(root.globals.size());
    for (auto& g : root.globals) rootMap.push_back(lk.fresh_const(g.name, g.tyEnc, 0));
    lk.load(rootName, rootMap, -1, {});

    finalize_image(lk.img, lk.perPred, opts);
    return LinkResult{std::move(lk.img), std::move(lk.trace)};
}

Image inline_compile(const ModuleGraph& g, const LinkOptions& opts) {
    Elaboration el = elaborate(g);
    FlatProgram fp = flatten(el, g);

    Image img;
    img.rootName = g.root;
    img.consts.reserve(fp.consts.size());
    for (auto& c : fp.consts) {
        // Hidden constants are nameless in images; the generated names are
        // diagnostic only.
        img.consts.push_back(ImageConst{c.level == 0 ? c.name : "",
                                        c.tyEnc, static_cast<uint16_t>(c.level)});
    }

    std::vector<std::pair<uint32_t, std::vector<SegmentRec>>> perPred;
    std::map<uint32_t, size_t> perPredIdx;
    auto segs_for = [&](uint32_t pred) -> std::vector<SegmentRec>& {
        auto it = perPredIdx.find(pred);
        if (it == perPredIdx.end()) {
            perPredIdx.emplace(pred, perPred.size());
            perPred.emplace_back(pred, std::vector<SegmentRec>{});
            return perPred.back().second;
        }
        return perPred[it->second].second;
    };

    // Occurrences are in post-order: every module's code lands after the
    // code of everything it accumulates, matching the linker's layout.
    for (auto& occ : fp.occurrences) {
        const TypedModule& m = g.node(occ.moduleName);
        const auto env = occ.env;
        ConstResolver resolve = [env](const std::string& n) -> ConstRef {
            auto it = env->find(n);
            if (it == env->end())
                fail(Errc::UnknownConstant, "constant '" + n + "' not in scope");
            return ConstRef::runtime(static_cast<uint32_t>(it->second));
        };
        ModuleCode mc = assemble_module_code(m, resolve);
        uint32_t base = static_cast<uint32_t>(img.code.size());
        for (auto& src : mc.code) {
            Instruction ins = std::move(src);
            auto shift = [&](uint32_t& l) {
                if (l != kNoLabel) l += base;
            };
            shift(ins.lab1);
            shift(ins.lab2);
            shift(ins.lab3);
            shift(ins.lab4);
            for (auto& e : ins.table) e.target += base;
            img.code.push_back(std::move(ins));
        }
        for (auto& [pred, off, open] : mc.entries) {
            uint32_t idx = static_cast<uint32_t>(env->at(pred));
            segs_for(idx).push_back(SegmentRec{off + base, open});
        }
    }

    finalize_image(img, perPred, opts);
    return img;
}

std::map<std::string, std::vector<uint8_t>> compile_graph(const ModuleGraph& g,
                                                          bool debugNames) {
    std::map<std::string, std::vector<uint8_t>> out;
    for (auto& [name, tm] : g.nodes) out.emplace(name, encode(compile_module(tm, debugNames)));
    return out;
}

VerifyResult verify_graph(const ModuleGraph& g) {
    auto objBytes = compile_graph(g);
    std::map<std::string, ObjectFile> objs;
    for (auto& [n, b] : objBytes) objs.emplace(n, decode_object(b));
    ObjectLoader loader = [&](const std::string& n, Position pos) -> const ObjectFile& {
        auto it = objs.find(n);
        if (it == objs.end())
            fail(Errc::MissingObjectFile, "no object file for module '" + n + "'", pos);
        return it->second;
    };
    LinkResult lr = link(g.root, loader);
    Image inl = inline_compile(g);
    std::vector<uint8_t> a = encode(lr.image);
    std::vector<uint8_t> b = encode(inl);

    VerifyResult r;
    r.linkedSize = a.size();
    r.inlinedSize = b.size();
    size_t n = std::min(a.size(), b.size());
    size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    if (i == a.size() && i == b.size()) {
        r.identical = true;
    } else {
        r.identical = false;
        r.firstDiff = i;
    }
    return r;
}

}  // namespace lmod
