#include "lmod/vm.hpp"

#include <cassert>

#include "lmod/compile.hpp"

namespace lmod {

SymbolTable image_symbol_table(const Image& img) {
    SymbolTable t = builtin_table();
    // Reconstruct kind arities from the types mentioned in the table.
    std::function<void(const TypePtr&)> kinds = [&](const TypePtr& ty) {
        switch (ty->kind) {
            case TypeExpr::Kind::App:
                if (!t.kinds.count(ty->name))
                    t.kinds.emplace(ty->name, static_cast<int>(ty->args.size()));
                for (auto& a : ty->args) kinds(a);
                break;
            case TypeExpr::Kind::Arrow:
                kinds(ty->dom);
                kinds(ty->cod);
                break;
            default:
                break;
        }
    };
    for (size_t i = 0; i < img.consts.size(); ++i) {
        const ImageConst& c = img.consts[i];
        if (c.level != 0 || c.name.empty()) continue;
        if (c.name == "nil" || c.name == "true") continue;
        ConstInfo ci;
        ci.name = c.name;
        ci.scheme = decode_canon_type(c.tyEnc);
        ci.origin = Origin::OwnSig;
        ci.arity = type_arity(ci.scheme);
        ci.isPred = is_predicate_type(ci.scheme);
        kinds(ci.scheme);
        t.consts.emplace(c.name, std::move(ci));
    }
    return t;
}

GoalCode compile_goal(const Image& img, const CheckedGoal& goal) {
    std::map<std::string, uint32_t> named;
    for (size_t i = 0; i < img.consts.size(); ++i)
        if (img.consts[i].level == 0 && !img.consts[i].name.empty())
            named.emplace(img.consts[i].name, static_cast<uint32_t>(i));

    ConstResolver resolve = [&](const std::string& n) -> ConstRef {
        auto it = named.find(n);
        if (it == named.end())
            fail(Errc::LocalConstantInGoal,
                 "constant '" + n + "' is not visible at the top level");
        return ConstRef::runtime(it->second);
    };

    GoalCode gc;
    gc.nSlots = static_cast<uint32_t>(goal.vars.size());
    for (int i = 0; i < goal.nFree; ++i) gc.queryVars.push_back(goal.vars[i].name);
    gc.code = goal.goal ? compile_goal_code(goal.goal, goal.vars.size(), goal.nFree, resolve)
                        : std::vector<Instruction>{ins_simple(Op::Halt)};

    std::map<uint32_t, uint32_t> entry(img.entries.begin(), img.entries.end());
    for (auto& ins : gc.code) {
        if (ins.op != Op::Call && ins.op != Op::Execute) continue;
        assert(ins.call.kind == CallKind::Pred);
        auto it = entry.find(ins.call.pred.index);
        ins.call.kind = CallKind::Offset;
        ins.call.offset = it != entry.end() ? it->second : img.failEntry;
        ins.call.pred = {};
    }
    return gc;
}

// ------------------------------------------------------------------ Machine

Machine::Machine(const Image& img, MachineOptions opts) : img_(img), opts_(opts) {
    code_ = img.code;
    imageLen_ = static_cast<uint32_t>(code_.size());
    entry_.insert(img.entries.begin(), img.entries.end());
    for (uint32_t off = 0; off < imageLen_; ++off) {
        const Instruction& ins = code_[off];
        if (ins.op == Op::SwitchOnConstant) {
            auto& tbl = constTables_[off];
            for (auto& e : ins.table) tbl.emplace(e.symbol.index, e.target);
        } else if (ins.op == Op::SwitchOnStructure) {
            auto& tbl = structTables_[off];
            for (auto& e : ins.table)
                tbl.emplace((static_cast<uint64_t>(e.symbol.index) << 32) | e.arity,
                            e.target);
        }
    }
}

void Machine::fault(const std::string& msg) const {
    fail(Errc::MachineFault, "machine fault at L" + std::to_string(pc_) + ": " + msg);
}

uint32_t Machine::intern(const std::string& s) {
    auto it = stringIdx_.find(s);
    if (it != stringIdx_.end()) return it->second;
    uint32_t idx = static_cast<uint32_t>(strings_.size());
    strings_.push_back(s);
    stringIdx_.emplace(s, idx);
    return idx;
}

Cell Machine::new_var(uint32_t level) {
    Cell c;
    c.tag = Cell::Tag::Ref;
    c.a = static_cast<uint32_t>(heap_.size());
    c.b = level;
    heap_.push_back(c);
    return c;
}

Cell Machine::deref(Cell c) const {
    while (c.tag == Cell::Tag::Ref) {
        const Cell& h = heap_[c.a];
        if (h.tag == Cell::Tag::Ref && h.a == c.a) return h;  // unbound
        c = h;
    }
    return c;
}

void Machine::trail_write(uint32_t addr, const Cell& value) {
    trail_.push_back(TrailEntry{addr, heap_[addr]});
    heap_[addr] = value;
}

uint32_t Machine::const_level(uint32_t idx) const { return img_.consts[idx].level; }

bool Machine::occurs(uint32_t addr, Cell t) const {
    t = deref(t);
    switch (t.tag) {
        case Cell::Tag::Ref:
            return t.a == addr;
        case Cell::Tag::Struct:
            for (uint32_t i = 0; i < t.c; ++i)
                if (occurs(addr, heap_[t.b + i])) return true;
            return false;
        case Cell::Tag::Lis:
            return occurs(addr, heap_[t.a]) || occurs(addr, heap_[t.a + 1]);
        default:
            return false;
    }
}

bool Machine::level_adjust(uint32_t maxLevel, Cell t) {
    t = deref(t);
    switch (t.tag) {
        case Cell::Tag::Ref:
            if (t.b > maxLevel) {
                Cell lowered = t;
                lowered.b = maxLevel;
                trail_write(t.a, lowered);
            }
            return true;
        case Cell::Tag::Con:
            return const_level(t.a) <= maxLevel;
        case Cell::Tag::Struct:
            if (const_level(t.a) > maxLevel) return false;
            for (uint32_t i = 0; i < t.c; ++i)
                if (!level_adjust(maxLevel, heap_[t.b + i])) return false;
            return true;
        case Cell::Tag::Lis:
            return level_adjust(maxLevel, heap_[t.a]) &&
                   level_adjust(maxLevel, heap_[t.a + 1]);
        default:
            return true;
    }
}

bool Machine::unify(Cell x, Cell y) {
    Cell a = deref(x);
    Cell b = deref(y);
    if (a.tag == Cell::Tag::Ref && b.tag == Cell::Tag::Ref && a.a == b.a) return true;
    if (a.tag == Cell::Tag::Ref) {
        if (opts_.occursCheck && occurs(a.a, b)) return false;
        if (!level_adjust(a.b, b)) return false;
        trail_write(a.a, deref(b));
        return true;
    }
    if (b.tag == Cell::Tag::Ref) return unify(b, a);
    if (a.tag != b.tag) return false;
    switch (a.tag) {
        case Cell::Tag::Con:
            return a.a == b.a;
        case Cell::Tag::Int:
            return a.i == b.i;
        case Cell::Tag::Real:
            return a.d == b.d;
        case Cell::Tag::Str:
            return a.a == b.a;
        case Cell::Tag::Struct: {
            if (a.a != b.a || a.c != b.c) return false;
            for (uint32_t i = 0; i < a.c; ++i)
                if (!unify(heap_[a.b + i], heap_[b.b + i])) return false;
            return true;
        }
        case Cell::Tag::Lis:
            return unify(heap_[a.a], heap_[b.a]) && unify(heap_[a.a + 1], heap_[b.a + 1]);
        default:
            return false;
    }
}

void Machine::push_cp(uint32_t nextClause) {
    if (opts_.depthLimit && cps_.size() >= opts_.depthLimit)
        fail(Errc::DepthLimitExceeded,
             "choice-point limit " + std::to_string(opts_.depthLimit) + " exceeded");
    ChoicePoint cp;
    cp.args.assign(regs_.begin() + 1,
                   regs_.begin() + std::min<size_t>(regs_.size(), numArgs_ + 1));
    cp.numArgs = numArgs_;
    cp.e = e_;
    cp.cont = cont_;
    cp.heapTop = heap_.size();
    cp.trailTop = trail_.size();
    cp.envTop = envs_.size();
    cp.nextClause = nextClause;
    cps_.push_back(std::move(cp));
    ++stats_.choicePointsPushed;
}

void Machine::restore_cp() {
    const ChoicePoint& cp = cps_.back();
    while (trail_.size() > cp.trailTop) {
        heap_[trail_.back().addr] = trail_.back().prior;
        trail_.pop_back();
    }
    heap_.resize(cp.heapTop);
    for (size_t i = 0; i < cp.args.size(); ++i) reg(static_cast<uint32_t>(i + 1)) = cp.args[i];
    numArgs_ = cp.numArgs;
    e_ = cp.e;
    cont_ = cp.cont;
    envs_.resize(cp.envTop);
}

void Machine::backtrack() {
    if (cps_.empty()) {
        status_ = Status::Exhausted;
        return;
    }
    pc_ = cps_.back().nextClause;
}

Cell& Machine::reg(uint32_t i) {
    if (i >= regs_.size()) regs_.resize(i + 1);
    return regs_[i];
}

Cell Machine::load(const RegRef& r) {
    if (r.kind == RegKind::Temp) return reg(r.index);
    if (e_ < 0 || r.index >= envs_[e_].slots.size()) fault("bad permanent register");
    return envs_[e_].slots[r.index];
}

void Machine::store(const RegRef& r, const Cell& c) {
    if (r.kind == RegKind::Temp) {
        reg(r.index) = c;
        return;
    }
    if (e_ < 0 || r.index >= envs_[e_].slots.size()) fault("bad permanent register");
    envs_[e_].slots[r.index] = c;
}

void Machine::write_push(const Cell& c) { heap_.push_back(c); }

// Write-mode push under a binding to a variable of level writeLevel_: the
// written cells become part of that variable's value, so the scope rule
// applies to them as it would in one-shot unification.
bool Machine::write_checked(const Cell& c) {
    if (writeLevel_ && !level_adjust(*writeLevel_, c)) return false;
    write_push(c);
    return true;
}

void Machine::start(const GoalCode& goal) {
    heap_.clear();
    regs_.clear();
    envs_.clear();
    cps_.clear();
    trail_.clear();
    strings_.clear();
    stringIdx_.clear();
    queryVars_.clear();
    stats_ = {};
    code_.resize(imageLen_);
    uint32_t base = imageLen_;
    for (auto& ins : goal.code) code_.push_back(ins);
    // Goal code is position-independent except for its internal jumps.
    for (uint32_t off = base; off < code_.size(); ++off) {
        Instruction& ins = code_[off];
        switch (ins.op) {
            case Op::TryMeElse:
            case Op::RetryMeElse:
            case Op::Jump:
                if (ins.lab1 != kNoLabel) ins.lab1 += base;
                break;
            default:
                break;
        }
    }

    Env env;
    env.prevE = -1;
    env.cont = static_cast<uint32_t>(code_.size() - 1);  // the goal's halt
    env.slots.resize(goal.nSlots);
    for (size_t i = 0; i < goal.queryVars.size(); ++i) {
        Cell v = new_var(0);
        env.slots[i] = v;
        queryVars_.emplace_back(goal.queryVars[i], v.a);
    }
    envs_.push_back(std::move(env));
    e_ = 0;
    pc_ = base;
    cont_ = static_cast<uint32_t>(code_.size() - 1);
    numArgs_ = 0;
    writeMode_ = false;
    writeLevel_.reset();
    status_ = Status::Running;
}

void Machine::step() {
    if (status_ != Status::Running) fault("step on a machine that is not running");
    if (pc_ >= code_.size()) fault("program counter out of range");
    const Instruction ins = code_[pc_];
    ++stats_.instructions;

    auto bt_or = [&](bool ok) {
        if (ok)
            ++pc_;
        else
            backtrack();
    };

    switch (ins.op) {
        case Op::TryMeElse:
            if (ins.lab1 == kNoLabel) {
                ++pc_;  // open single-segment slot: no alternative yet
            } else {
                push_cp(ins.lab1);
                ++pc_;
            }
            return;
        case Op::RetryMeElse:
            if (cps_.empty()) fault("retry_me_else without a choice point");
            restore_cp();
            cps_.back().nextClause = ins.lab1;
            ++pc_;
            return;
        case Op::TrustMe:
            if (cps_.empty()) fault("trust_me without a choice point");
            restore_cp();
            cps_.pop_back();
            ++pc_;
            return;
        case Op::Try:
            push_cp(pc_ + 1);
            pc_ = ins.lab1;
            return;
        case Op::Retry:
            if (cps_.empty()) fault("retry without a choice point");
            restore_cp();
            cps_.back().nextClause = pc_ + 1;
            pc_ = ins.lab1;
            return;
        case Op::Trust:
            if (cps_.empty()) fault("trust without a choice point");
            restore_cp();
            cps_.pop_back();
            pc_ = ins.lab1;
            return;
        case Op::TryElse:
            if (ins.lab2 == kNoLabel) {
                pc_ = ins.lab1;  // unique choice: no choice point
            } else {
                push_cp(ins.lab2);
                pc_ = ins.lab1;
            }
            return;
        case Op::RetryElse:
            if (cps_.empty()) fault("retry_else without a choice point");
            restore_cp();
            cps_.back().nextClause = ins.lab2;
            pc_ = ins.lab1;
            return;
        case Op::SwitchOnTerm: {
            Cell d = deref(reg(1));
            uint32_t target = kNoLabel;
            switch (d.tag) {
                case Cell::Tag::Ref: target = ins.lab1; break;
                case Cell::Tag::Con: target = ins.lab2; break;
                case Cell::Tag::Lis: target = ins.lab3; break;
                case Cell::Tag::Struct: target = ins.lab4; break;
                default: target = kNoLabel;  // literals match no indexed clause
            }
            if (target == kNoLabel)
                backtrack();
            else
                pc_ = target;
            return;
        }
        case Op::SwitchOnConstant: {
            Cell d = deref(reg(1));
            if (d.tag != Cell::Tag::Con) fault("switch_on_constant on a non-constant");
            auto& tbl = constTables_.at(pc_);
            auto it = tbl.find(d.a);
            if (it == tbl.end())
                backtrack();
            else
                pc_ = it->second;
            return;
        }
        case Op::SwitchOnStructure: {
            Cell d = deref(reg(1));
            if (d.tag != Cell::Tag::Struct) fault("switch_on_structure on a non-structure");
            auto& tbl = structTables_.at(pc_);
            auto it = tbl.find((static_cast<uint64_t>(d.a) << 32) | d.c);
            if (it == tbl.end())
                backtrack();
            else
                pc_ = it->second;
            return;
        }
        case Op::Call:
            if (ins.call.kind != CallKind::Offset) fault("unpatched call");
            cont_ = pc_ + 1;
            numArgs_ = ins.arity;
            pc_ = ins.call.offset;
            return;
        case Op::Execute:
            if (ins.call.kind != CallKind::Offset) fault("unpatched execute");
            numArgs_ = ins.arity;
            pc_ = ins.call.offset;
            return;
        case Op::Proceed:
            pc_ = cont_;
            return;
        case Op::Allocate: {
            Env env;
            env.prevE = e_;
            env.cont = cont_;
            env.slots.resize(ins.arity);
            envs_.push_back(std::move(env));
            e_ = static_cast<int>(envs_.size()) - 1;
            ++pc_;
            return;
        }
        case Op::Deallocate:
            if (e_ < 0) fault("deallocate without an environment");
            cont_ = envs_[e_].cont;
            e_ = envs_[e_].prevE;
            ++pc_;
            return;
        case Op::Jump:
            pc_ = ins.lab1;
            return;
        case Op::Fail:
            backtrack();
            return;
        case Op::Halt:
            status_ = Status::Answer;
            return;

        case Op::GetVariable:
            store(ins.reg, reg(ins.areg));
            ++pc_;
            return;
        case Op::GetValue:
            bt_or(unify(load(ins.reg), reg(ins.areg)));
            return;
        case Op::GetConstant: {
            Cell d = deref(reg(ins.areg));
            if (d.tag == Cell::Tag::Ref) {
                if (const_level(ins.cref.index) > d.b) {
                    backtrack();
                    return;
                }
                Cell c;
                c.tag = Cell::Tag::Con;
                c.a = ins.cref.index;
                trail_write(d.a, c);
                ++pc_;
                return;
            }
            bt_or(d.tag == Cell::Tag::Con && d.a == ins.cref.index);
            return;
        }
        case Op::GetInteger: {
            Cell d = deref(reg(ins.areg));
            if (d.tag == Cell::Tag::Ref) {
                Cell c;
                c.tag = Cell::Tag::Int;
                c.i = ins.ival;
                trail_write(d.a, c);
                ++pc_;
                return;
            }
            bt_or(d.tag == Cell::Tag::Int && d.i == ins.ival);
            return;
        }
        case Op::GetReal: {
            Cell d = deref(reg(ins.areg));
            if (d.tag == Cell::Tag::Ref) {
                Cell c;
                c.tag = Cell::Tag::Real;
                c.d = ins.rval;
                trail_write(d.a, c);
                ++pc_;
                return;
            }
            bt_or(d.tag == Cell::Tag::Real && d.d == ins.rval);
            return;
        }
        case Op::GetString: {
            Cell d = deref(reg(ins.areg));
            uint32_t idx = intern(ins.sval);
            if (d.tag == Cell::Tag::Ref) {
                Cell c;
                c.tag = Cell::Tag::Str;
                c.a = idx;
                trail_write(d.a, c);
                ++pc_;
                return;
            }
            bt_or(d.tag == Cell::Tag::Str && d.a == idx);
            return;
        }
        case Op::GetStructure: {
            Cell d = deref(reg(ins.areg));
            if (d.tag == Cell::Tag::Ref) {
                if (const_level(ins.cref.index) > d.b) {
                    backtrack();
                    return;
                }
                Cell c;
                c.tag = Cell::Tag::Struct;
                c.a = ins.cref.index;
                c.c = ins.arity;
                c.b = static_cast<uint32_t>(heap_.size());
                trail_write(d.a, c);
                writeMode_ = true;
                writeLevel_ = d.b;
                ++pc_;
                return;
            }
            if (d.tag == Cell::Tag::Struct && d.a == ins.cref.index && d.c == ins.arity) {
                s_ = d.b;
                writeMode_ = false;
                ++pc_;
                return;
            }
            backtrack();
            return;
        }
        case Op::GetList: {
            Cell d = deref(reg(ins.areg));
            if (d.tag == Cell::Tag::Ref) {
                Cell c;
                c.tag = Cell::Tag::Lis;
                c.a = static_cast<uint32_t>(heap_.size());
                trail_write(d.a, c);
                writeMode_ = true;
                writeLevel_ = d.b;
                ++pc_;
                return;
            }
            if (d.tag == Cell::Tag::Lis) {
                s_ = d.a;
                writeMode_ = false;
                ++pc_;
                return;
            }
            backtrack();
            return;
        }

        case Op::PutVariable: {
            Cell v = new_var(1);
            store(ins.reg, v);
            reg(ins.areg) = v;
            ++pc_;
            return;
        }
        case Op::PutValue:
            reg(ins.areg) = load(ins.reg);
            ++pc_;
            return;
        case Op::PutConstant: {
            Cell c;
            c.tag = Cell::Tag::Con;
            c.a = ins.cref.index;
            reg(ins.areg) = c;
            ++pc_;
            return;
        }
        case Op::PutInteger: {
            Cell c;
            c.tag = Cell::Tag::Int;
            c.i = ins.ival;
            reg(ins.areg) = c;
            ++pc_;
            return;
        }
        case Op::PutReal: {
            Cell c;
            c.tag = Cell::Tag::Real;
            c.d = ins.rval;
            reg(ins.areg) = c;
            ++pc_;
            return;
        }
        case Op::PutString: {
            Cell c;
            c.tag = Cell::Tag::Str;
            c.a = intern(ins.sval);
            reg(ins.areg) = c;
            ++pc_;
            return;
        }
        case Op::PutStructure: {
            Cell c;
            c.tag = Cell::Tag::Struct;
            c.a = ins.cref.index;
            c.c = ins.arity;
            c.b = static_cast<uint32_t>(heap_.size());
            reg(ins.areg) = c;
            writeMode_ = true;
            writeLevel_.reset();   // not a binding; levels checked when unified
            ++pc_;
            return;
        }
        case Op::PutList: {
            Cell c;
            c.tag = Cell::Tag::Lis;
            c.a = static_cast<uint32_t>(heap_.size());
            reg(ins.areg) = c;
            writeMode_ = true;
            writeLevel_.reset();
            ++pc_;
            return;
        }

        case Op::UnifyVariable:
        case Op::SetVariable: {
            if (ins.op == Op::SetVariable || writeMode_) {
                Cell v = new_var(writeLevel_ ? *writeLevel_ : 1);
                store(ins.reg, v);
                ++pc_;
                return;
            }
            store(ins.reg, heap_[s_++]);
            ++pc_;
            return;
        }
        case Op::UnifyValue:
        case Op::SetValue: {
            if (ins.op == Op::SetValue || writeMode_) {
                bt_or(write_checked(load(ins.reg)));
                return;
            }
            bt_or(unify(load(ins.reg), heap_[s_++]));
            return;
        }
        case Op::UnifyConstant:
        case Op::SetConstant: {
            Cell c;
            c.tag = Cell::Tag::Con;
            c.a = ins.cref.index;
            if (ins.op == Op::SetConstant || writeMode_) {
                bt_or(write_checked(c));
                return;
            }
            bt_or(unify(c, heap_[s_++]));
            return;
        }
        case Op::UnifyInteger:
        case Op::SetInteger: {
            Cell c;
            c.tag = Cell::Tag::Int;
            c.i = ins.ival;
            if (ins.op == Op::SetInteger || writeMode_) {
                write_push(c);
                ++pc_;
                return;
            }
            bt_or(unify(c, heap_[s_++]));
            return;
        }
        case Op::UnifyReal: {
            Cell c;
            c.tag = Cell::Tag::Real;
            c.d = ins.rval;
            if (writeMode_) {
                write_push(c);
                ++pc_;
                return;
            }
            bt_or(unify(c, heap_[s_++]));
            return;
        }
        case Op::UnifyString: {
            Cell c;
            c.tag = Cell::Tag::Str;
            c.a = intern(ins.sval);
            if (writeMode_) {
                write_push(c);
                ++pc_;
                return;
            }
            bt_or(unify(c, heap_[s_++]));
            return;
        }
        case Op::UnifyVoid:
        case Op::SetVoid: {
            if (ins.op == Op::SetVoid || writeMode_) {
                for (uint32_t i = 0; i < ins.arity; ++i)
                    new_var(writeLevel_ ? *writeLevel_ : 1);
            } else {
                s_ += ins.arity;
            }
            ++pc_;
            return;
        }
    }
    fault("unhandled opcode");
}

Machine::Status Machine::run_to_answer() {
    while (status_ == Status::Running) step();
    return status_;
}

Machine::Status Machine::next_answer() {
    if (status_ != Status::Answer) fault("next_answer without a pending answer");
    status_ = Status::Running;
    backtrack();  // sets Exhausted when no choice point remains
    if (status_ == Status::Running) return run_to_answer();
    return status_;
}

AnswerTermPtr Machine::extract(Cell c) const {
    Cell d = deref(c);
    auto a = std::make_shared<AnswerTerm>();
    switch (d.tag) {
        case Cell::Tag::Ref:
            a->kind = AnswerTerm::Kind::Unbound;
            a->varKey = d.a;
            return a;
        case Cell::Tag::Con:
            assert(img_.consts[d.a].level == 0 && "hidden constant in answer");
            if (d.a == kNilConst) {
                a->kind = AnswerTerm::Kind::Nil;
                return a;
            }
            a->kind = AnswerTerm::Kind::Const;
            a->name = img_.consts[d.a].name;
            return a;
        case Cell::Tag::Int:
            a->kind = AnswerTerm::Kind::Int;
            a->ival = d.i;
            return a;
        case Cell::Tag::Real:
            a->kind = AnswerTerm::Kind::Real;
            a->rval = d.d;
            return a;
        case Cell::Tag::Str:
            a->kind = AnswerTerm::Kind::Str;
            a->sval = strings_[d.a];
            return a;
        case Cell::Tag::Struct: {
            assert(img_.consts[d.a].level == 0 && "hidden constant in answer");
            a->kind = AnswerTerm::Kind::App;
            a->name = img_.consts[d.a].name;
            for (uint32_t i = 0; i < d.c; ++i) a->args.push_back(extract(heap_[d.b + i]));
            return a;
        }
        case Cell::Tag::Lis:
            a->kind = AnswerTerm::Kind::Cons;
            a->args = {extract(heap_[d.a]), extract(heap_[d.a + 1])};
            return a;
    }
    a->kind = AnswerTerm::Kind::Nil;
    return a;
}

Answer Machine::current_answer() const {
    Answer a;
    for (auto& [name, addr] : queryVars_) {
        Cell c;
        c.tag = Cell::Tag::Ref;
        c.a = addr;
        a.bindings.emplace_back(name, extract(c));
    }
    return a;
}

std::vector<Answer> run_all(const Image& img, const CheckedGoal& goal,
                            MachineOptions opts, size_t maxAnswers) {
    Machine m(img, opts);
    m.start(compile_goal(img, goal));
    std::vector<Answer> out;
    Machine::Status st = m.run_to_answer();
    while (st == Machine::Status::Answer && out.size() < maxAnswers) {
        out.push_back(m.current_answer());
        st = m.next_answer();
    }
    return out;
}

}  // namespace lmod
