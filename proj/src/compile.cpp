#include "lmod/compile.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <set>

namespace lmod {

namespace {

// ------------------------------------------------- variable classification

struct VarClass {
    bool permanent = false;
    bool isVoid = false;
    int yslot = -1;
};

int count_atoms(const RGoalPtr& g) {
    if (!g) return 0;
    switch (g->kind) {
        case RGoal::Kind::True: return 0;
        case RGoal::Kind::Atom: return 1;
        case RGoal::Kind::And:
        case RGoal::Kind::Or: return count_atoms(g->left) + count_atoms(g->right);
        case RGoal::Kind::Exists: return count_atoms(g->body);
    }
    return 0;
}

bool contains_or(const RGoalPtr& g) {
    if (!g) return false;
    switch (g->kind) {
        case RGoal::Kind::Or: return true;
        case RGoal::Kind::And:
            return contains_or(g->left) || contains_or(g->right);
        case RGoal::Kind::Exists: return contains_or(g->body);
        default: return false;
    }
}

struct Occurrences {
    // per slot: set of chunk ids and total count
    std::vector<std::set<int>> chunks;
    std::vector<int> counts;
    int chunk = 0;

    explicit Occurrences(size_t nslots) : chunks(nslots), counts(nslots, 0) {}

    void term(const RTermPtr& t) {
        switch (t->kind) {
            case RTerm::Kind::Var:
                chunks[t->slot].insert(chunk);
                ++counts[t->slot];
                break;
            case RTerm::Kind::App:
            case RTerm::Kind::Cons:
                for (auto& a : t->args) term(a);
                break;
            default:
                break;
        }
    }

    void goal(const RGoalPtr& g) {
        switch (g->kind) {
            case RGoal::Kind::True:
                return;
            case RGoal::Kind::Atom:
                for (auto& a : g->args) term(a);
                ++chunk;  // the call ends the chunk
                return;
            case RGoal::Kind::And:
                goal(g->left);
                goal(g->right);
                return;
            case RGoal::Kind::Or:
                // Register state is not preserved across branch entry or the
                // join, so both boundaries start fresh chunks.
                ++chunk;
                goal(g->left);
                ++chunk;
                goal(g->right);
                ++chunk;
                return;
            case RGoal::Kind::Exists:
                goal(g->body);
                return;
        }
    }
};

int max_call_arity(const RGoalPtr& g) {
    if (!g) return 0;
    switch (g->kind) {
        case RGoal::Kind::Atom: return static_cast<int>(g->args.size());
        case RGoal::Kind::And:
        case RGoal::Kind::Or:
            return std::max(max_call_arity(g->left), max_call_arity(g->right));
        case RGoal::Kind::Exists: return max_call_arity(g->body);
        default: return 0;
    }
}

// ---------------------------------------------------------- clause codegen

struct ClauseCompiler {
    const RClause& clause;
    const ConstResolver& resolve;
    std::vector<VarClass> vc;
    std::vector<int> xslot;      // temp register per slot, -1 until seen
    std::vector<bool> seen;      // first occurrence tracking
    int nextTemp;
    bool needEnv = false;
    int nPerm = 0;
    std::vector<Instruction> out;

    ClauseCompiler(const RClause& c, const ConstResolver& r) : clause(c), resolve(r) {
        size_t n = c.vars.size();
        vc.resize(n);
        xslot.assign(n, -1);
        seen.assign(n, false);

        Occurrences occ(n);
        occ.chunk = 0;
        for (auto& a : c.headArgs) occ.term(a);
        if (c.body) occ.goal(c.body);

        for (size_t i = 0; i < n; ++i) {
            if (occ.counts[i] <= 1) {
                vc[i].isVoid = true;
            } else if (occ.chunks[i].size() >= 2) {
                vc[i].permanent = true;
            }
        }
        int atoms = count_atoms(c.body);
        bool hasOr = contains_or(c.body);
        // Permanent slots in first-occurrence order (head first, then body).
        if (atoms >= 2 || hasOr) {
            std::vector<int> order;
            order.reserve(n);
            std::function<void(const RTermPtr&)> tv = [&](const RTermPtr& t) {
                if (t->kind == RTerm::Kind::Var) {
                    if (vc[t->slot].permanent && vc[t->slot].yslot < 0)
                        vc[t->slot].yslot = nPerm++;
                } else if (t->kind == RTerm::Kind::App || t->kind == RTerm::Kind::Cons) {
                    for (auto& a : t->args) tv(a);
                }
            };
            std::function<void(const RGoalPtr&)> gv = [&](const RGoalPtr& g) {
                switch (g->kind) {
                    case RGoal::Kind::Atom:
                        for (auto& a : g->args) tv(a);
                        break;
                    case RGoal::Kind::And:
                    case RGoal::Kind::Or:
                        gv(g->left);
                        gv(g->right);
                        break;
                    case RGoal::Kind::Exists:
                        gv(g->body);
                        break;
                    default:
                        break;
                }
            };
            for (auto& a : c.headArgs) tv(a);
            if (c.body) gv(c.body);
        } else {
            // Single-chunk clause: nothing can cross a call.
            for (auto& v : vc) v.permanent = false;
        }
        needEnv = nPerm > 0 || hasOr || atoms >= 2;

        int maxA = std::max(static_cast<int>(c.headArgs.size()), max_call_arity(c.body));
        nextTemp = maxA + 1;
    }

    int fresh_temp() { return nextTemp++; }

    RegRef var_reg(int slot) {
        if (vc[slot].permanent) return RegRef::y(static_cast<uint32_t>(vc[slot].yslot));
        if (xslot[slot] < 0) xslot[slot] = fresh_temp();
        return RegRef::x(static_cast<uint32_t>(xslot[slot]));
    }

    void emit(Instruction ins) { out.push_back(std::move(ins)); }

    Instruction mk(Op op) {
        Instruction i;
        i.op = op;
        return i;
    }

    // ------------------------------------------------------------- head

    void head_arg(const RTermPtr& t, uint32_t ai) {
        Instruction i;
        switch (t->kind) {
            case RTerm::Kind::Var: {
                if (vc[t->slot].isVoid) return;  // argument register simply unused
                i = mk(seen[t->slot] ? Op::GetValue : Op::GetVariable);
                seen[t->slot] = true;
                i.reg = var_reg(t->slot);
                i.areg = ai;
                emit(std::move(i));
                return;
            }
            case RTerm::Kind::Const:
                i = mk(Op::GetConstant);
                i.cref = resolve(t->cname);
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Nil:
                i = mk(Op::GetConstant);
                i.cref = ConstRef::builtin(kNilConst);
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Int:
                i = mk(Op::GetInteger);
                i.ival = t->ival;
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Real:
                i = mk(Op::GetReal);
                i.rval = t->rval;
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Str:
                i = mk(Op::GetString);
                i.sval = t->sval;
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Cons: {
                i = mk(Op::GetList);
                i.areg = ai;
                emit(std::move(i));
                std::deque<std::pair<int, RTermPtr>> queue;
                unify_args(t->args, queue);
                drain(queue);
                return;
            }
            case RTerm::Kind::App: {
                i = mk(Op::GetStructure);
                i.cref = resolve(t->cname);
                i.arity = static_cast<uint32_t>(t->args.size());
                i.areg = ai;
                emit(std::move(i));
                std::deque<std::pair<int, RTermPtr>> queue;
                unify_args(t->args, queue);
                drain(queue);
                return;
            }
        }
    }

    // Structure-argument sequence; nested compounds go through fresh temps
    // processed breadth-first.
    void unify_args(const std::vector<RTermPtr>& args,
                    std::deque<std::pair<int, RTermPtr>>& queue) {
        uint32_t voidRun = 0;
        auto flush = [&]() {
            if (voidRun) {
                Instruction i = mk(Op::UnifyVoid);
                i.arity = voidRun;
                emit(std::move(i));
                voidRun = 0;
            }
        };
        for (auto& a : args) {
            switch (a->kind) {
                case RTerm::Kind::Var:
                    if (vc[a->slot].isVoid) {
                        ++voidRun;
                        continue;
                    }
                    flush();
                    {
                        Instruction i = mk(seen[a->slot] ? Op::UnifyValue : Op::UnifyVariable);
                        seen[a->slot] = true;
                        i.reg = var_reg(a->slot);
                        emit(std::move(i));
                    }
                    continue;
                case RTerm::Kind::Const: {
                    flush();
                    Instruction i = mk(Op::UnifyConstant);
                    i.cref = resolve(a->cname);
                    emit(std::move(i));
                    continue;
                }
                case RTerm::Kind::Nil: {
                    flush();
                    Instruction i = mk(Op::UnifyConstant);
                    i.cref = ConstRef::builtin(kNilConst);
                    emit(std::move(i));
                    continue;
                }
                case RTerm::Kind::Int: {
                    flush();
                    Instruction i = mk(Op::UnifyInteger);
                    i.ival = a->ival;
                    emit(std::move(i));
                    continue;
                }
                case RTerm::Kind::Real: {
                    flush();
                    Instruction i = mk(Op::UnifyReal);
                    i.rval = a->rval;
                    emit(std::move(i));
                    continue;
                }
                case RTerm::Kind::Str: {
                    flush();
                    Instruction i = mk(Op::UnifyString);
                    i.sval = a->sval;
                    emit(std::move(i));
                    continue;
                }
                case RTerm::Kind::Cons:
                case RTerm::Kind::App: {
                    flush();
                    int tmp = fresh_temp();
                    Instruction i = mk(Op::UnifyVariable);
                    i.reg = RegRef::x(static_cast<uint32_t>(tmp));
                    emit(std::move(i));
                    queue.emplace_back(tmp, a);
                    continue;
                }
            }
        }
        flush();
    }

    void drain(std::deque<std::pair<int, RTermPtr>>& queue) {
        while (!queue.empty()) {
            auto [tmp, t] = queue.front();
            queue.pop_front();
            Instruction i;
            if (t->kind == RTerm::Kind::Cons) {
                i = mk(Op::GetList);
            } else {
                i = mk(Op::GetStructure);
                i.cref = resolve(t->cname);
                i.arity = static_cast<uint32_t>(t->args.size());
            }
            i.areg = static_cast<uint32_t>(tmp);
            emit(std::move(i));
            unify_args(t->args, queue);
        }
    }

    // ------------------------------------------------------------- body

    // Builds a compound term into a register (bottom-up), returns the temp.
    int build_compound(const RTermPtr& t) {
        std::vector<int> childRegs(t->args.size(), -1);
        for (size_t k = 0; k < t->args.size(); ++k) {
            auto& a = t->args[k];
            if (a->kind == RTerm::Kind::Cons || a->kind == RTerm::Kind::App)
                childRegs[k] = build_compound(a);
        }
        int tmp = fresh_temp();
        put_compound_into(t, static_cast<uint32_t>(tmp), childRegs);
        return tmp;
    }

    void put_compound_into(const RTermPtr& t, uint32_t target,
                           const std::vector<int>& childRegs) {
        Instruction i;
        if (t->kind == RTerm::Kind::Cons) {
            i = mk(Op::PutList);
        } else {
            i = mk(Op::PutStructure);
            i.cref = resolve(t->cname);
            i.arity = static_cast<uint32_t>(t->args.size());
        }
        i.areg = target;
        emit(std::move(i));
        // Write-mode argument pushes.
        uint32_t voidRun = 0;
        auto flush = [&]() {
            if (voidRun) {
                Instruction v = mk(Op::UnifyVoid);
                v.arity = voidRun;
                emit(std::move(v));
                voidRun = 0;
            }
        };
        for (size_t k = 0; k < t->args.size(); ++k) {
            auto& a = t->args[k];
            switch (a->kind) {
                case RTerm::Kind::Var:
                    if (vc[a->slot].isVoid) {
                        ++voidRun;
                        continue;
                    }
                    flush();
                    {
                        Instruction v = mk(seen[a->slot] ? Op::UnifyValue : Op::UnifyVariable);
                        seen[a->slot] = true;
                        v.reg = var_reg(a->slot);
                        emit(std::move(v));
                    }
                    continue;
                case RTerm::Kind::Const: {
                    flush();
                    Instruction v = mk(Op::UnifyConstant);
                    v.cref = resolve(a->cname);
                    emit(std::move(v));
                    continue;
                }
                case RTerm::Kind::Nil: {
                    flush();
                    Instruction v = mk(Op::UnifyConstant);
                    v.cref = ConstRef::builtin(kNilConst);
                    emit(std::move(v));
                    continue;
                }
                case RTerm::Kind::Int: {
                    flush();
                    Instruction v = mk(Op::UnifyInteger);
                    v.ival = a->ival;
                    emit(std::move(v));
                    continue;
                }
                case RTerm::Kind::Real: {
                    flush();
                    Instruction v = mk(Op::UnifyReal);
                    v.rval = a->rval;
                    emit(std::move(v));
                    continue;
                }
                case RTerm::Kind::Str: {
                    flush();
                    Instruction v = mk(Op::UnifyString);
                    v.sval = a->sval;
                    emit(std::move(v));
                    continue;
                }
                case RTerm::Kind::Cons:
                case RTerm::Kind::App: {
                    flush();
                    Instruction v = mk(Op::UnifyValue);
                    v.reg = RegRef::x(static_cast<uint32_t>(childRegs[k]));
                    emit(std::move(v));
                    continue;
                }
            }
        }
        flush();
    }

    void put_arg(const RTermPtr& t, uint32_t ai) {
        Instruction i;
        switch (t->kind) {
            case RTerm::Kind::Var: {
                if (vc[t->slot].isVoid) {
                    i = mk(Op::PutVariable);
                    i.reg = RegRef::x(static_cast<uint32_t>(fresh_temp()));
                    i.areg = ai;
                    emit(std::move(i));
                    return;
                }
                i = mk(seen[t->slot] ? Op::PutValue : Op::PutVariable);
                seen[t->slot] = true;
                i.reg = var_reg(t->slot);
                i.areg = ai;
                emit(std::move(i));
                return;
            }
            case RTerm::Kind::Const:
                i = mk(Op::PutConstant);
                i.cref = resolve(t->cname);
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Nil:
                i = mk(Op::PutConstant);
                i.cref = ConstRef::builtin(kNilConst);
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Int:
                i = mk(Op::PutInteger);
                i.ival = t->ival;
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Real:
                i = mk(Op::PutReal);
                i.rval = t->rval;
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Str:
                i = mk(Op::PutString);
                i.sval = t->sval;
                i.areg = ai;
                emit(std::move(i));
                return;
            case RTerm::Kind::Cons:
            case RTerm::Kind::App: {
                // Children first, then the spine directly into the argument
                // register.
                std::vector<int> childRegs(t->args.size(), -1);
                for (size_t k = 0; k < t->args.size(); ++k) {
                    auto& a = t->args[k];
                    if (a->kind == RTerm::Kind::Cons || a->kind == RTerm::Kind::App)
                        childRegs[k] = build_compound(a);
                }
                put_compound_into(t, ai, childRegs);
                return;
            }
        }
    }

    void emit_call(const RGoalPtr& atom, bool tail) {
        for (size_t j = 0; j < atom->args.size(); ++j)
            put_arg(atom->args[j], static_cast<uint32_t>(j + 1));
        if (tail && needEnv) emit(mk(Op::Deallocate));
        Instruction i = mk(tail ? Op::Execute : Op::Call);
        i.call.kind = CallKind::Pred;
        i.call.pred = resolve(atom->pred);
        i.arity = static_cast<uint32_t>(atom->args.size());
        emit(std::move(i));
    }

    // Returns true when the emitted code ended the clause (execute path).
    bool body_goal(const RGoalPtr& g, bool tail) {
        switch (g->kind) {
            case RGoal::Kind::True:
                return false;
            case RGoal::Kind::Atom:
                if (tail && !needEnv) {
                    emit_call(g, true);
                    return true;
                }
                if (tail && needEnv) {
                    emit_call(g, true);
                    return true;
                }
                emit_call(g, false);
                return false;
            case RGoal::Kind::And: {
                body_goal(g->left, false);
                return body_goal(g->right, tail);
            }
            case RGoal::Kind::Exists:
                return body_goal(g->body, tail);
            case RGoal::Kind::Or: {
                // try_me_else Lb ; <a> ; jump Lend ; Lb: trust_me ; <b> ; Lend:
                size_t tryAt = out.size();
                emit(mk(Op::TryMeElse));
                body_goal(g->left, false);
                size_t jumpAt = out.size();
                emit(mk(Op::Jump));
                out[tryAt].lab1 = static_cast<uint32_t>(out.size());
                emit(mk(Op::TrustMe));
                body_goal(g->right, false);
                out[jumpAt].lab1 = static_cast<uint32_t>(out.size());
                return false;
            }
        }
        return false;
    }

    std::vector<Instruction> run() {
        if (needEnv) {
            Instruction i = mk(Op::Allocate);
            i.arity = static_cast<uint32_t>(nPerm);
            emit(std::move(i));
        }
        for (size_t i = 0; i < clause.headArgs.size(); ++i)
            head_arg(clause.headArgs[i], static_cast<uint32_t>(i + 1));
        bool ended = false;
        if (clause.body) ended = body_goal(clause.body, true);
        if (!ended) {
            if (needEnv) emit(mk(Op::Deallocate));
            emit(mk(Op::Proceed));
        }
        return std::move(out);
    }
};

// Goals are normalized during checking, but a goal of plain `true` still
// reaches codegen as a bodyless clause; nothing special needed here.

// ------------------------------------------------------ predicate assembly

// First-argument dispatch key.
struct SymKey {
    enum class K { Const, Struct, List } k;
    ConstRef cref;
    uint32_t arity = 0;

    bool operator==(const SymKey& o) const {
        return k == o.k && cref == o.cref && arity == o.arity;
    }
};

enum class ArgClass { Variable, Literal, Constant, Structure, List };

ArgClass first_arg_class(const RClause& c) {
    if (c.headArgs.empty()) return ArgClass::Variable;
    switch (c.headArgs[0]->kind) {
        case RTerm::Kind::Var: return ArgClass::Variable;
        case RTerm::Kind::Int:
        case RTerm::Kind::Real:
        case RTerm::Kind::Str:
            // Switch tables key on constant references only, so literal
            // heads stay outside indexed runs.
            return ArgClass::Literal;
        case RTerm::Kind::Const:
        case RTerm::Kind::Nil:
            return ArgClass::Constant;
        case RTerm::Kind::App: return ArgClass::Structure;
        case RTerm::Kind::Cons: return ArgClass::List;
    }
    return ArgClass::Variable;
}

bool indexable(const RClause& c) {
    ArgClass ac = first_arg_class(c);
    return ac == ArgClass::Constant || ac == ArgClass::Structure || ac == ArgClass::List;
}

SymKey sym_key(const RClause& c, const ConstResolver& resolve) {
    ArgClass ac = first_arg_class(c);
    const RTermPtr& a = c.headArgs[0];
    SymKey k{SymKey::K::List, {}, 0};
    if (ac == ArgClass::Constant) {
        k.k = SymKey::K::Const;
        k.cref = a->kind == RTerm::Kind::Nil ? ConstRef::builtin(kNilConst)
                                             : resolve(a->cname);
    } else if (ac == ArgClass::Structure) {
        k.k = SymKey::K::Struct;
        k.cref = resolve(a->cname);
        k.arity = static_cast<uint32_t>(a->args.size());
    }
    return k;
}

// One indexed block over clauses[lo, hi).
std::vector<Instruction> emit_indexed_block(const std::vector<const RClause*>& clauses,
                                            size_t lo, size_t hi, bool open,
                                            const ConstResolver& resolve) {
    size_t n = hi - lo;
    assert(n >= 2);

    std::vector<std::vector<Instruction>> bodies;
    bodies.reserve(n);
    for (size_t i = lo; i < hi; ++i)
        bodies.push_back(compile_clause(*clauses[i], resolve));

    std::vector<SymKey> keys;
    std::vector<std::vector<size_t>> keyClauses;  // clause indices (0-based in block)
    bool anyConst = false, anyStruct = false, anyList = false;
    for (size_t i = 0; i < n; ++i) {
        SymKey k = sym_key(*clauses[lo + i], resolve);
        if (k.k == SymKey::K::Const) anyConst = true;
        if (k.k == SymKey::K::Struct) anyStruct = true;
        if (k.k == SymKey::K::List) anyList = true;
        auto it = std::find(keys.begin(), keys.end(), k);
        if (it == keys.end()) {
            keys.push_back(k);
            keyClauses.push_back({i});
        } else {
            keyClauses[static_cast<size_t>(it - keys.begin())].push_back(i);
        }
    }

    // Layout:
    //   switch_on_term
    //   [switch_on_constant]
    //   [switch_on_structure]
    //   sub-chains (first-occurrence symbol order)
    //   var chain threading the clause code
    uint32_t off = 1;  // switch_on_term
    uint32_t constOff = kNoLabel, structOff = kNoLabel;
    if (anyConst) constOff = off++;
    if (anyStruct) structOff = off++;

    // Sub-chain slots. Open blocks give every symbol a rewritable slot.
    std::vector<uint32_t> chainOff(keys.size(), kNoLabel);
    for (size_t s = 0; s < keys.size(); ++s) {
        size_t cnt = keyClauses[s].size();
        if (cnt >= 2) {
            chainOff[s] = off;
            off += static_cast<uint32_t>(cnt);
        } else if (open) {
            chainOff[s] = off;
            off += 1;  // try_else C, fail
        }
    }

    // Var chain: header + body per clause.
    std::vector<uint32_t> headerOff(n), bodyOff(n);
    for (size_t i = 0; i < n; ++i) {
        headerOff[i] = off++;
        bodyOff[i] = off;
        off += static_cast<uint32_t>(bodies[i].size());
    }

    std::vector<Instruction> code;
    code.reserve(off);
    {
        Instruction sw;
        sw.op = Op::SwitchOnTerm;
        sw.lab1 = headerOff[0];  // variable case enters the full chain
        sw.lab2 = constOff;
        sw.lab3 = kNoLabel;      // list target patched below
        sw.lab4 = structOff;
        code.push_back(std::move(sw));
    }

    auto target_for = [&](size_t s) -> uint32_t {
        if (chainOff[s] != kNoLabel) return chainOff[s];
        return bodyOff[keyClauses[s][0]];  // closed singleton: straight in
    };

    if (anyConst) {
        Instruction sw;
        sw.op = Op::SwitchOnConstant;
        for (size_t s = 0; s < keys.size(); ++s)
            if (keys[s].k == SymKey::K::Const)
                sw.table.push_back(SwitchEntry{keys[s].cref, 0, target_for(s)});
        code.push_back(std::move(sw));
    }
    if (anyStruct) {
        Instruction sw;
        sw.op = Op::SwitchOnStructure;
        for (size_t s = 0; s < keys.size(); ++s)
            if (keys[s].k == SymKey::K::Struct)
                sw.table.push_back(SwitchEntry{keys[s].cref, keys[s].arity, target_for(s)});
        code.push_back(std::move(sw));
    }
    if (anyList) {
        for (size_t s = 0; s < keys.size(); ++s)
            if (keys[s].k == SymKey::K::List) code[0].lab3 = target_for(s);
    }

    for (size_t s = 0; s < keys.size(); ++s) {
        if (chainOff[s] == kNoLabel) continue;
        const auto& cls = keyClauses[s];
        if (cls.size() == 1) {
            Instruction t;
            t.op = Op::TryElse;
            t.lab1 = bodyOff[cls[0]];
            t.lab2 = kNoLabel;
            code.push_back(std::move(t));
        } else {
            for (size_t j = 0; j < cls.size(); ++j) {
                Instruction t;
                t.op = j == 0 ? Op::Try : (j + 1 == cls.size() ? Op::Trust : Op::Retry);
                t.lab1 = bodyOff[cls[j]];
                code.push_back(std::move(t));
            }
        }
    }

    for (size_t i = 0; i < n; ++i) {
        Instruction h;
        h.op = i == 0 ? Op::TryMeElse : (i + 1 == n ? Op::TrustMe : Op::RetryMeElse);
        if (h.op != Op::TrustMe) h.lab1 = headerOff[i + 1];
        code.push_back(std::move(h));
        for (auto& ins : bodies[i]) code.push_back(std::move(ins));
    }
    assert(code.size() == off);
    return code;
}

}  // namespace

std::vector<Instruction> compile_clause(const RClause& c, const ConstResolver& resolve) {
    ClauseCompiler cc(c, resolve);
    return cc.run();
}

std::vector<Instruction> compile_goal_code(const RGoalPtr& body, size_t nSlots,
                                           int nFree, const ConstResolver& resolve) {
    RClause pseudo;
    pseudo.vars.resize(nSlots);
    ClauseCompiler cc(pseudo, resolve);
    cc.vc.assign(nSlots, {});
    cc.seen.assign(nSlots, false);
    for (size_t s = 0; s < nSlots; ++s) {
        cc.vc[s].permanent = true;
        cc.vc[s].yslot = static_cast<int>(s);
    }
    for (int s = 0; s < nFree; ++s) cc.seen[s] = true;  // pre-created by the VM
    cc.needEnv = true;  // the machine allocates the goal environment itself
    cc.nextTemp = max_call_arity(body) + 1;
    if (body) cc.body_goal(body, false);
    cc.emit(ins_simple(Op::Halt));
    return std::move(cc.out);
}

PredAssembly compile_predicate(const std::vector<const RClause*>& clauses, bool open,
                               const ConstResolver& resolve) {
    assert(!clauses.empty());

    // Partition into top-level blocks: maximal indexable runs of length >= 2
    // become indexed blocks, everything else is a plain one-clause block.
    struct Block {
        size_t lo, hi;
        bool indexed;
    };
    std::vector<Block> blocks;
    size_t i = 0;
    while (i < clauses.size()) {
        if (indexable(*clauses[i])) {
            size_t j = i;
            while (j < clauses.size() && indexable(*clauses[j])) ++j;
            if (j - i >= 2) {
                blocks.push_back(Block{i, j, true});
                i = j;
                continue;
            }
        }
        blocks.push_back(Block{i, i + 1, false});
        ++i;
    }

    std::vector<std::vector<Instruction>> blockCode;
    blockCode.reserve(blocks.size());
    for (auto& b : blocks) {
        if (b.indexed) {
            blockCode.push_back({});  // placeholder, emitted after offsets known
        } else {
            blockCode.push_back(compile_clause(*clauses[b.lo], resolve));
        }
    }

    bool withHeaders = blocks.size() >= 2 || open;
    PredAssembly out;
    out.openHeader = open && blocks.size() == 1;

    // Compute block base offsets (header slot + body).
    std::vector<uint32_t> headerAt(blocks.size(), kNoLabel);
    std::vector<uint32_t> bodyAt(blocks.size());
    uint32_t off = 0;
    for (size_t b = 0; b < blocks.size(); ++b) {
        if (withHeaders) headerAt[b] = off++;
        bodyAt[b] = off;
        if (blocks[b].indexed) {
            // Emit with a base so internal labels are segment-relative.
            std::vector<Instruction> ic =
                emit_indexed_block(clauses, blocks[b].lo, blocks[b].hi, open, resolve);
            for (auto& ins : ic) {
                auto shift = [&](uint32_t& l) {
                    if (l != kNoLabel) l += off;
                };
                shift(ins.lab1);
                shift(ins.lab2);
                shift(ins.lab3);
                shift(ins.lab4);
                for (auto& e : ins.table) e.target += off;
            }
            blockCode[b] = std::move(ic);
        }
        off += static_cast<uint32_t>(blockCode[b].size());
    }

    for (size_t b = 0; b < blocks.size(); ++b) {
        if (withHeaders) {
            Instruction h;
            if (blocks.size() == 1) {
                h.op = Op::TryMeElse;  // rewritable slot; no-op while alone
                h.lab1 = kNoLabel;
            } else if (b == 0) {
                h.op = Op::TryMeElse;
                h.lab1 = headerAt[b + 1];
            } else if (b + 1 == blocks.size()) {
                h.op = Op::TrustMe;
            } else {
                h.op = Op::RetryMeElse;
                h.lab1 = headerAt[b + 1];
            }
            out.code.push_back(std::move(h));
        }
        for (auto& ins : blockCode[b]) out.code.push_back(std::move(ins));
    }
    return out;
}

bool predicate_open(const TypedModule& m, const std::string& pred) {
    const ConstInfo* ci = m.table.find(pred);
    if (!ci || !ci->isPred) return false;
    if (ci->mode != DeclMode::Plain) return false;
    return ci->origin == Origin::OwnSig || ci->origin == Origin::Accumulated;
}

std::vector<std::string> redefinable_predicates(const TypedModule& m) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto consider = [&](const std::string& n) {
        if (seen.count(n)) return;
        const ConstInfo* ci = m.table.find(n);
        if (!ci || !ci->isPred) return;
        if (ci->mode == DeclMode::Exportdef) return;
        if (ci->origin != Origin::OwnSig && ci->origin != Origin::Accumulated) return;
        seen.insert(n);
        out.push_back(n);
    };
    for (auto& c : m.ownSig.consts) consider(c.name);
    for (auto& s : m.accSigs)
        for (auto& c : s.consts) consider(c.name);
    return out;
}

ConstResolver module_resolver(const TypedModule& m) {
    auto globals = std::make_shared<std::map<std::string, uint32_t>>();
    for (size_t i = 0; i < m.ownSig.consts.size(); ++i)
        globals->emplace(m.ownSig.consts[i].name, static_cast<uint32_t>(i));
    auto locals = std::make_shared<std::map<std::string, uint32_t>>();
    for (size_t i = 0; i < m.localConsts.size(); ++i)
        locals->emplace(m.localConsts[i], static_cast<uint32_t>(i));
    return [globals, locals](const std::string& n) -> ConstRef {
        if (n == "nil") return ConstRef::builtin(kNilConst);
        if (n == "true") return ConstRef::builtin(kTrueConst);
        auto g = globals->find(n);
        if (g != globals->end()) return ConstRef::global(g->second);
        auto l = locals->find(n);
        if (l != locals->end()) return ConstRef::local(l->second);
        fail(Errc::UnknownConstant, "constant '" + n + "' not in module scope");
    };
}

ModuleCode assemble_module_code(const TypedModule& m, const ConstResolver& resolve) {
    ModuleCode out;
    for (auto& pred : m.predOrder) {
        std::vector<const RClause*> clauses;
        for (int ci : m.predClauses.at(pred)) clauses.push_back(&m.clauses[ci]);
        bool open = predicate_open(m, pred);
        PredAssembly pa = compile_predicate(clauses, open, resolve);
        uint32_t base = static_cast<uint32_t>(out.code.size());
        for (auto& ins : pa.code) {
            auto shift = [&](uint32_t& l) {
                if (l != kNoLabel) l += base;
            };
            shift(ins.lab1);
            shift(ins.lab2);
            shift(ins.lab3);
            shift(ins.lab4);
            for (auto& e : ins.table) e.target += base;
            if ((ins.op == Op::Call || ins.op == Op::Execute) &&
                ins.call.kind == CallKind::Label)
                ins.call.offset += base;
            out.code.push_back(std::move(ins));
        }
        out.entries.emplace_back(pred, base, open);
    }
    return out;
}

ObjectFile compile_module(const TypedModule& m, bool debugNames) {
    ObjectFile o;
    o.moduleName = m.name;
    o.sigHash = m.ownSig.hash;

    for (auto& c : m.ownSig.consts)
        o.globals.push_back(ConstEntry{c.name, true, canon_type(c.ty)});
    for (auto& n : m.localConsts) {
        const ConstInfo* ci = m.table.find(n);
        ConstEntry e;
        e.hasName = debugNames;
        if (debugNames) e.name = n;
        e.tyEnc = canon_type(ci->scheme);
        o.locals.push_back(std::move(e));
    }

    ConstResolver resolve = module_resolver(m);

    for (size_t i = 0; i < m.accumulates.size(); ++i) {
        RenamingMap rm;
        rm.moduleName = m.accumulates[i];
        rm.sigHash = m.accSigs[i].hash;
        for (auto& c : m.accSigs[i].consts)
            rm.entries.emplace_back(c.name, resolve(c.name));
        o.accums.push_back(std::move(rm));
    }

    std::vector<std::string> redefNames = redefinable_predicates(m);
    std::map<std::string, uint32_t> redefIdx;
    for (size_t i = 0; i < redefNames.size(); ++i) {
        o.redefinable.push_back(resolve(redefNames[i]));
        redefIdx.emplace(redefNames[i], static_cast<uint32_t>(i));
    }

    ModuleCode mc = assemble_module_code(m, resolve);
    o.code = std::move(mc.code);

    std::map<std::string, uint32_t> localEntry;
    for (auto& [pred, off, open] : mc.entries) {
        o.entries.emplace_back(resolve(pred), off);
        localEntry.emplace(pred, off);
    }

    // Classify call targets: closed predicates defined here are called
    // directly; redefinable ones go through the item-4 list; the rest are
    // patched by the linker through the constant itself.
    std::map<std::string, ConstRef> nameOf;  // reverse of resolve for preds we see
    auto callee_name = [&](const ConstRef& c) -> std::string {
        switch (c.space) {
            case Space::Global: return m.ownSig.consts[c.index].name;
            case Space::Local: return m.localConsts[c.index];
            default: return "";
        }
    };
    (void)nameOf;
    for (auto& ins : o.code) {
        if (ins.op != Op::Call && ins.op != Op::Execute) continue;
        if (ins.call.kind != CallKind::Pred) continue;
        std::string name = callee_name(ins.call.pred);
        const ConstInfo* ci = name.empty() ? nullptr : m.table.find(name);
        if (!ci) continue;
        auto r = redefIdx.find(name);
        if (r != redefIdx.end()) {
            ins.call.kind = CallKind::RedefIdx;
            ins.call.offset = r->second;
            ins.call.pred = {};
            continue;
        }
        bool closedHere = ci->origin == Origin::Local ||
                          (ci->mode == DeclMode::Exportdef && ci->origin == Origin::OwnSig);
        auto e = localEntry.find(name);
        if (closedHere && e != localEntry.end()) {
            ins.call.kind = CallKind::Label;
            ins.call.offset = e->second;
            ins.call.pred = {};
        }
        // Otherwise: leave as a Pred reference for the linker.
    }
    return o;
}

}  // namespace lmod
