#include "lmod/typecheck.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <sstream>

namespace lmod {

namespace {

// ------------------------------------------------------------ inference

// Mutable type nodes for unification. Vars hold their binding directly.
struct TyNode;
using TyRef = std::shared_ptr<TyNode>;

struct TyNode {
    enum class K { Var, App, Arrow } k;
    std::string name;          // App constructor
    std::vector<TyRef> args;   // App
    TyRef dom, cod;            // Arrow
    TyRef bound;               // Var binding (null = unbound)
    int id = 0;                // Var identity for naming

    static TyRef fresh(int id) {
        auto n = std::make_shared<TyNode>();
        n->k = K::Var;
        n->id = id;
        return n;
    }
    static TyRef app(std::string nm, std::vector<TyRef> as) {
        auto n = std::make_shared<TyNode>();
        n->k = K::App;
        n->name = std::move(nm);
        n->args = std::move(as);
        return n;
    }
    static TyRef arrow(TyRef d, TyRef c) {
        auto n = std::make_shared<TyNode>();
        n->k = K::Arrow;
        n->dom = std::move(d);
        n->cod = std::move(c);
        return n;
    }
};

TyRef prune(TyRef t) {
    while (t->k == TyNode::K::Var && t->bound) t = t->bound;
    return t;
}

bool occurs(const TyRef& v, TyRef t) {
    t = prune(std::move(t));
    if (t == v) return true;
    switch (t->k) {
        case TyNode::K::Var:
            return false;
        case TyNode::K::App:
            for (auto& a : t->args)
                if (occurs(v, a)) return true;
            return false;
        case TyNode::K::Arrow:
            return occurs(v, t->dom) || occurs(v, t->cod);
    }
    return false;
}

std::string ty_show(TyRef t) {
    t = prune(std::move(t));
    switch (t->k) {
        case TyNode::K::Var:
            return "_" + std::to_string(t->id);
        case TyNode::K::App: {
            std::string s = t->name;
            for (auto& a : t->args) {
                auto p = prune(a);
                bool paren = p->k != TyNode::K::Var &&
                             !(p->k == TyNode::K::App && p->args.empty());
                s += ' ';
                if (paren) s += '(';
                s += ty_show(a);
                if (paren) s += ')';
            }
            return s;
        }
        case TyNode::K::Arrow: {
            auto d = prune(t->dom);
            std::string s;
            if (d->k == TyNode::K::Arrow) s += '(';
            s += ty_show(t->dom);
            if (d->k == TyNode::K::Arrow) s += ')';
            return s + " -> " + ty_show(t->cod);
        }
    }
    return "?";
}

struct Infer {
    int nextVar = 0;

    TyRef fresh() { return TyNode::fresh(nextVar++); }

    TyRef instantiate(const TypePtr& scheme, std::map<std::string, TyRef>& env) {
        switch (scheme->kind) {
            case TypeExpr::Kind::Var: {
                auto it = env.find(scheme->name);
                if (it == env.end()) it = env.emplace(scheme->name, fresh()).first;
                return it->second;
            }
            case TypeExpr::Kind::App: {
                std::vector<TyRef> as;
                as.reserve(scheme->args.size());
                for (auto& a : scheme->args) as.push_back(instantiate(a, env));
                return TyNode::app(scheme->name, std::move(as));
            }
            case TypeExpr::Kind::Arrow:
                return TyNode::arrow(instantiate(scheme->dom, env),
                                     instantiate(scheme->cod, env));
        }
        return fresh();
    }

    TyRef instantiate(const TypePtr& scheme) {
        std::map<std::string, TyRef> env;
        return instantiate(scheme, env);
    }

    void unify(TyRef a, TyRef b, Position pos) {
        a = prune(std::move(a));
        b = prune(std::move(b));
        if (a == b) return;
        if (a->k == TyNode::K::Var) {
            if (occurs(a, b))
                fail(Errc::TypeError,
                     "occurs check: cannot construct infinite type " + ty_show(a) +
                         " = " + ty_show(b),
                     pos);
            a->bound = b;
            return;
        }
        if (b->k == TyNode::K::Var) {
            unify(b, a, pos);
            return;
        }
        if (a->k != b->k)
            fail(Errc::TypeError,
                 "type mismatch: expected " + ty_show(a) + ", found " + ty_show(b), pos);
        if (a->k == TyNode::K::App) {
            if (a->name != b->name || a->args.size() != b->args.size())
                fail(Errc::TypeError,
                     "type mismatch: expected " + ty_show(a) + ", found " + ty_show(b),
                     pos);
            for (size_t i = 0; i < a->args.size(); ++i) unify(a->args[i], b->args[i], pos);
            return;
        }
        unify(a->dom, b->dom, pos);
        unify(a->cod, b->cod, pos);
    }

    // Residual unbound inference variables become named type variables.
    TypePtr freeze(TyRef t, std::map<int, std::string>& names) {
        t = prune(std::move(t));
        switch (t->k) {
            case TyNode::K::Var: {
                auto it = names.find(t->id);
                if (it == names.end()) {
                    std::string nm;
                    int n = static_cast<int>(names.size());
                    do {
                        nm = std::string(1, static_cast<char>('A' + n % 26)) +
                             (n >= 26 ? std::to_string(n / 26) : "");
                        ++n;
                    } while (false);
                    it = names.emplace(t->id, nm).first;
                }
                return TypeExpr::var(it->second);
            }
            case TyNode::K::App: {
                std::vector<TypePtr> as;
                for (auto& a : t->args) as.push_back(freeze(a, names));
                return TypeExpr::app(t->name, std::move(as));
            }
            case TyNode::K::Arrow:
                return TypeExpr::arrow(freeze(t->dom, names), freeze(t->cod, names));
        }
        return TypeExpr::var("A");
    }
};

TyRef builtin_o() { return TyNode::app("o", {}); }

// ------------------------------------------------------- kind checking

void kind_check(const TypePtr& t, const std::map<std::string, int>& kinds, Position pos) {
    switch (t->kind) {
        case TypeExpr::Kind::Var:
            return;
        case TypeExpr::Kind::App: {
            auto it = kinds.find(t->name);
            if (it == kinds.end())
                fail(Errc::UnknownTypeConstructor,
                     "unknown type constructor '" + t->name + "'", pos);
            if (static_cast<int>(t->args.size()) != it->second)
                fail(Errc::ArityMismatch,
                     "type constructor '" + t->name + "' expects " +
                         std::to_string(it->second) + " argument(s), got " +
                         std::to_string(t->args.size()),
                     pos);
            for (auto& a : t->args) kind_check(a, kinds, pos);
            return;
        }
        case TypeExpr::Kind::Arrow:
            kind_check(t->dom, kinds, pos);
            kind_check(t->cod, kinds, pos);
            return;
    }
}

std::map<std::string, int> builtin_kinds() {
    return {{"o", 0}, {"int", 0}, {"real", 0}, {"string", 0}, {"list", 1}};
}

// Declaration merging. Two identical declarations denote the same constant.
// A useonly declaration is a use of a constant provided elsewhere, so it is
// absorbed by an identical plain or exportdef declaration of the same name.
bool merge_modes(DeclMode a, DeclMode b, DeclMode& out) {
    if (a == b) {
        out = a;
        return true;
    }
    if (a == DeclMode::Useonly) {
        out = b;
        return true;
    }
    if (b == DeclMode::Useonly) {
        out = a;
        return true;
    }
    return false;  // exportdef vs plain: disagreement about extendibility
}

}  // namespace

bool is_predicate_type(const TypePtr& t) {
    auto tt = target_type(t);
    return tt && tt->kind == TypeExpr::Kind::App && tt->name == "o" && tt->args.empty();
}

SymbolTable builtin_table() {
    SymbolTable t;
    t.kinds = builtin_kinds();
    auto add = [&](const std::string& n, TypePtr ty) {
        ConstInfo ci;
        ci.name = n;
        ci.scheme = std::move(ty);
        ci.origin = Origin::Builtin;
        ci.arity = type_arity(ci.scheme);
        ci.isPred = is_predicate_type(ci.scheme);
        t.consts.emplace(n, std::move(ci));
    };
    add("true", TypeExpr::app("o"));
    add("nil", TypeExpr::app("list", {TypeExpr::var("A")}));
    return t;
}

const SigConst* CheckedSignature::find(const std::string& n) const {
    for (auto& c : consts)
        if (c.name == n) return &c;
    return nullptr;
}

CheckedSignature apply_use_sig(const CheckedSignature& sig) {
    CheckedSignature out = sig;
    for (auto& c : out.consts)
        if (c.mode == DeclMode::Exportdef) c.mode = DeclMode::Useonly;
    out.hash = signature_hash(out);
    return out;
}

uint64_t signature_hash(const CheckedSignature& sig) {
    // FNV-1a over the canonical ordered encoding.
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        h ^= 0xff;
        h *= 1099511628211ull;
    };
    mix(sig.name);
    for (auto& [n, a] : sig.kinds) {
        mix("k" + n + "/" + std::to_string(a));
    }
    for (auto& c : sig.consts) {
        mix("c" + c.name + ":" + canon_type(c.ty) + ";" + mode_name(c.mode));
    }
    return h;
}

namespace {

struct SigBuilder {
    CheckedSignature sig;
    std::map<std::string, size_t> constIdx;
    std::map<std::string, int> kinds = builtin_kinds();

    void add_kind(const std::string& n, int arity, Position pos) {
        auto it = kinds.find(n);
        if (it != kinds.end()) {
            if (it->second != arity)
                fail(Errc::ConflictingDeclaration,
                     "type constructor '" + n + "' redeclared with different arity", pos);
            return;  // identical: merge
        }
        kinds.emplace(n, arity);
        sig.kinds.emplace_back(n, arity);
    }

    void add_const(const std::string& n, const TypePtr& ty, DeclMode mode, Position pos) {
        if (n == "nil" || n == "true")
            fail(Errc::ConflictingDeclaration, "cannot redeclare builtin '" + n + "'", pos);
        auto it = constIdx.find(n);
        if (it == constIdx.end()) {
            constIdx.emplace(n, sig.consts.size());
            sig.consts.push_back(SigConst{n, ty, mode});
            return;
        }
        SigConst& prev = sig.consts[it->second];
        DeclMode merged;
        if (canon_type(prev.ty) != canon_type(ty) || !merge_modes(prev.mode, mode, merged))
            fail(Errc::ConflictingDeclaration,
                 "conflicting declarations for '" + n + "'", pos);
        prev.mode = merged;
    }
};

}  // namespace

CheckedSignature check_signature(const SignatureAst& ast, const SigResolver& resolve) {
    SigBuilder b;
    b.sig.name = ast.name;

    for (auto& inc : ast.accumSigs) {
        const CheckedSignature& raw = resolve(inc.name, inc.pos);
        CheckedSignature view = inc.mode == SigInclude::UseSig ? apply_use_sig(raw) : raw;
        for (auto& [n, a] : view.kinds) b.add_kind(n, a, inc.pos);
        for (auto& c : view.consts) b.add_const(c.name, c.ty, c.mode, inc.pos);
    }
    for (auto& k : ast.kinds)
        for (auto& n : k.names) b.add_kind(n, k.arity, k.pos);
    for (auto& d : ast.types) {
        kind_check(d.ty, b.kinds, d.pos);
        if (d.mode != DeclMode::Plain && !is_predicate_type(d.ty))
            fail(Errc::TypeError,
                 std::string(mode_name(d.mode)) + " requires a predicate type (target o)",
                 d.pos);
        for (auto& n : d.names) b.add_const(n, d.ty, d.mode, d.pos);
    }

    b.sig.hash = signature_hash(b.sig);
    return b.sig;
}

// ----------------------------------------------------- clause resolution

namespace {

struct ClauseChecker {
    explicit ClauseChecker(const SymbolTable& t) : table(t) {}

    const SymbolTable& table;
    Infer inf;
    std::vector<VarInfo> vars;
    std::map<std::string, int> clauseVarSlot;  // non-sigma clause variables
    std::vector<TyRef> slotTy;

    int slot_for_clause_var(const std::string& n) {
        auto it = clauseVarSlot.find(n);
        if (it != clauseVarSlot.end()) return it->second;
        int s = static_cast<int>(vars.size());
        vars.push_back(VarInfo{n, nullptr, false});
        slotTy.push_back(inf.fresh());
        clauseVarSlot.emplace(n, s);
        return s;
    }

    int fresh_sigma_slot(const std::string& n) {
        int s = static_cast<int>(vars.size());
        vars.push_back(VarInfo{n, nullptr, true});
        slotTy.push_back(inf.fresh());
        return s;
    }

    const ConstInfo& lookup(const std::string& n, Position pos) {
        const ConstInfo* ci = table.find(n);
        if (!ci) fail(Errc::UnknownConstant, "unknown constant '" + n + "'", pos);
        return *ci;
    }

    // sigmaEnv maps sigma-bound names to their slots (shadowing clause vars).
    RTermPtr check_term(const TermPtr& t, TyRef expect,
                        const std::map<std::string, int>& sigmaEnv) {
        auto mk = [&](RTerm::Kind k) {
            auto r = std::make_shared<RTerm>();
            r->kind = k;
            return r;
        };
        switch (t->kind) {
            case TermAst::Kind::Var: {
                int s;
                auto it = sigmaEnv.find(t->name);
                if (it != sigmaEnv.end())
                    s = it->second;
                else
                    s = slot_for_clause_var(t->name);
                inf.unify(slotTy[s], expect, t->pos);
                auto r = mk(RTerm::Kind::Var);
                r->slot = s;
                return r;
            }
            case TermAst::Kind::IntLit: {
                inf.unify(expect, TyNode::app("int", {}), t->pos);
                auto r = mk(RTerm::Kind::Int);
                r->ival = t->ival;
                return r;
            }
            case TermAst::Kind::RealLit: {
                inf.unify(expect, TyNode::app("real", {}), t->pos);
                auto r = mk(RTerm::Kind::Real);
                r->rval = t->rval;
                return r;
            }
            case TermAst::Kind::StrLit: {
                inf.unify(expect, TyNode::app("string", {}), t->pos);
                auto r = mk(RTerm::Kind::Str);
                r->sval = t->sval;
                return r;
            }
            case TermAst::Kind::ListNil: {
                inf.unify(expect, TyNode::app("list", {inf.fresh()}), t->pos);
                return mk(RTerm::Kind::Nil);
            }
            case TermAst::Kind::ListCons: {
                TyRef elem = inf.fresh();
                TyRef listTy = TyNode::app("list", {elem});
                inf.unify(expect, listTy, t->pos);
                auto r = mk(RTerm::Kind::Cons);
                r->args.push_back(check_term(t->fn, elem, sigmaEnv));
                r->args.push_back(check_term(t->arg, listTy, sigmaEnv));
                return r;
            }
            case TermAst::Kind::Const:
            case TermAst::Kind::App: {
                auto sp = term_spine(t);
                if (sp.head->kind == TermAst::Kind::Var)
                    fail(Errc::TypeError,
                         "variable '" + sp.head->name +
                             "' used as a function; the first-order fragment has no "
                             "higher-order terms",
                         sp.head->pos);
                if (sp.head->kind != TermAst::Kind::Const)
                    fail(Errc::TypeError, "term head must be a constant", t->pos);
                const ConstInfo& ci = lookup(sp.head->name, sp.head->pos);
                if (static_cast<int>(sp.args.size()) != ci.arity)
                    fail(Errc::TypeError,
                         "constant '" + ci.name + "' expects " +
                             std::to_string(ci.arity) + " argument(s), got " +
                             std::to_string(sp.args.size()) +
                             " (constants must be fully applied)",
                         t->pos);
                TyRef cty = inf.instantiate(ci.scheme);
                auto r = mk(sp.args.empty() ? RTerm::Kind::Const : RTerm::Kind::App);
                r->cname = ci.name;
                for (auto& a : sp.args) {
                    // cty is an arrow (arity matched the declared scheme).
                    TyRef pr = prune(cty);
                    assert(pr->k == TyNode::K::Arrow);
                    r->args.push_back(check_term(a, pr->dom, sigmaEnv));
                    cty = pr->cod;
                }
                inf.unify(cty, expect, t->pos);
                return r;
            }
        }
        fail(Errc::TypeError, "unexpected term form", t->pos);
    }

    RGoalPtr check_goal_rec(const GoalPtr& g, std::map<std::string, int> sigmaEnv) {
        auto mk = [&](RGoal::Kind k) {
            auto r = std::make_shared<RGoal>();
            r->kind = k;
            return r;
        };
        switch (g->kind) {
            case GoalAst::Kind::True:
                return mk(RGoal::Kind::True);
            case GoalAst::Kind::Atom: {
                auto sp = term_spine(g->atom);
                if (sp.head->kind == TermAst::Kind::Var)
                    fail(Errc::TypeError,
                         "goal head '" + sp.head->name +
                             "' is a variable; predicate variables are not supported",
                         sp.head->pos);
                const ConstInfo& ci = lookup(sp.head->name, sp.head->pos);
                if (!ci.isPred)
                    fail(Errc::TypeError,
                         "'" + ci.name + "' is not a predicate (target type is not o)",
                         sp.head->pos);
                if (static_cast<int>(sp.args.size()) != ci.arity)
                    fail(Errc::TypeError,
                         "predicate '" + ci.name + "' expects " +
                             std::to_string(ci.arity) + " argument(s), got " +
                             std::to_string(sp.args.size()),
                         g->pos);
                TyRef cty = inf.instantiate(ci.scheme);
                auto r = mk(RGoal::Kind::Atom);
                r->pred = ci.name;
                for (auto& a : sp.args) {
                    TyRef pr = prune(cty);
                    assert(pr->k == TyNode::K::Arrow);
                    r->args.push_back(check_term(a, pr->dom, sigmaEnv));
                    cty = pr->cod;
                }
                inf.unify(cty, builtin_o(), g->pos);
                return r;
            }
            case GoalAst::Kind::And:
            case GoalAst::Kind::Or: {
                auto l = check_goal_rec(g->left, sigmaEnv);
                auto r = check_goal_rec(g->right, sigmaEnv);
                // Drop true units of conjunctions so that both execution
                // engines see the same normalized goal.
                if (g->kind == GoalAst::Kind::And) {
                    if (l->kind == RGoal::Kind::True) return r;
                    if (r->kind == RGoal::Kind::True) return l;
                }
                auto out = mk(g->kind == GoalAst::Kind::And ? RGoal::Kind::And
                                                            : RGoal::Kind::Or);
                out->left = std::move(l);
                out->right = std::move(r);
                return out;
            }
            case GoalAst::Kind::Exists: {
                int s = fresh_sigma_slot(g->bound);
                sigmaEnv[g->bound] = s;
                auto out = mk(RGoal::Kind::Exists);
                out->slot = s;
                out->body = check_goal_rec(g->body, std::move(sigmaEnv));
                return out;
            }
        }
        fail(Errc::TypeError, "unexpected goal form", g->pos);
    }

    void freeze_vars() {
        std::map<int, std::string> names;
        for (size_t s = 0; s < vars.size(); ++s)
            vars[s].ty = inf.freeze(slotTy[s], names);
    }
};

}  // namespace

RClause infer_clause_types(const ClauseAst& c, const SymbolTable& table) {
    ClauseChecker ck(table);
    auto sp = term_spine(c.head);
    if (sp.head->kind != TermAst::Kind::Const)
        fail(Errc::HeadNotConstant, "clause head must be a constant", c.pos);
    const ConstInfo* ci = table.find(sp.head->name);
    if (!ci) fail(Errc::UnknownConstant, "unknown predicate '" + sp.head->name + "'", c.pos);
    if (!ci->isPred)
        fail(Errc::TypeError,
             "clause head '" + ci->name + "' is not a predicate (target type is not o)",
             c.pos);
    if (static_cast<int>(sp.args.size()) != ci->arity)
        fail(Errc::TypeError,
             "predicate '" + ci->name + "' expects " + std::to_string(ci->arity) +
                 " argument(s), got " + std::to_string(sp.args.size()),
             c.pos);

    RClause out;
    out.pred = ci->name;
    out.pos = c.pos;
    TyRef cty = ck.inf.instantiate(ci->scheme);
    std::map<std::string, int> emptyEnv;
    for (auto& a : sp.args) {
        TyRef pr = prune(cty);
        assert(pr->k == TyNode::K::Arrow);
        out.headArgs.push_back(ck.check_term(a, pr->dom, emptyEnv));
        cty = pr->cod;
    }
    ck.inf.unify(cty, builtin_o(), c.pos);
    if (c.body) out.body = ck.check_goal_rec(c.body, {});
    ck.freeze_vars();
    out.vars = std::move(ck.vars);
    return out;
}

CheckedGoal check_goal(const GoalPtr& g, const std::vector<std::string>& freeVars,
                       const SymbolTable& table) {
    ClauseChecker ck(table);
    // Query variables occupy the leading slots in first-occurrence order.
    for (auto& v : freeVars) ck.slot_for_clause_var(v);
    CheckedGoal out;
    out.nFree = static_cast<int>(freeVars.size());
    out.goal = ck.check_goal_rec(g, {});
    ck.freeze_vars();
    out.vars = std::move(ck.vars);
    return out;
}

// ----------------------------------------------------------- check_module

TypedModule check_module(const ModuleAst& m, const CheckedSignature& ownSig,
                         const std::vector<CheckedSignature>& accSigs,
                         const SigResolver& resolveSig) {
    TypedModule tm;
    tm.name = m.name;
    tm.ownSig = ownSig;
    tm.accumulates = m.accumulates;
    tm.accSigs = accSigs;
    tm.table = builtin_table();
    SymbolTable& tbl = tm.table;

    auto add_kind = [&](const std::string& n, int arity, Position pos, const char* src) {
        auto it = tbl.kinds.find(n);
        if (it != tbl.kinds.end()) {
            if (it->second != arity)
                fail(Errc::ConflictingDeclaration,
                     std::string("type constructor '") + n +
                         "' redeclared with different arity (" + src + ")",
                     pos);
            return;
        }
        tbl.kinds.emplace(n, arity);
    };

    // 1. Accumulated module signatures, in accumulation order.
    for (size_t i = 0; i < accSigs.size(); ++i) {
        const CheckedSignature& s = accSigs[i];
        for (auto& [n, a] : s.kinds) add_kind(n, a, m.pos, "accumulated signature");
        for (auto& c : s.consts) {
            auto it = tbl.consts.find(c.name);
            if (it == tbl.consts.end()) {
                ConstInfo ci;
                ci.name = c.name;
                ci.scheme = c.ty;
                ci.mode = c.mode;
                ci.origin = Origin::Accumulated;
                ci.fromModule = s.name;
                ci.arity = type_arity(c.ty);
                ci.isPred = is_predicate_type(c.ty);
                tbl.consts.emplace(c.name, std::move(ci));
                continue;
            }
            ConstInfo& prev = it->second;
            if (prev.origin == Origin::Builtin)
                fail(Errc::ConflictingDeclaration,
                     "signature '" + s.name + "' redeclares builtin '" + c.name + "'",
                     m.pos);
            DeclMode merged;
            if (canon_type(prev.scheme) != canon_type(c.ty) ||
                !merge_modes(prev.mode, c.mode, merged))
                fail(Errc::ConflictingDeclaration,
                     "constant '" + c.name + "' arrives from signatures '" +
                         prev.fromModule + "' and '" + s.name +
                         "' with conflicting declarations",
                     m.pos);
            // useonly yields to a providing declaration; remember the provider.
            if (prev.mode == DeclMode::Useonly && merged != DeclMode::Useonly)
                prev.fromModule = s.name;
            prev.mode = merged;
        }
    }

    // 2. Own signature entries become part of the module's scope.
    for (auto& [n, a] : ownSig.kinds) add_kind(n, a, m.pos, "own signature");
    for (auto& c : ownSig.consts) {
        auto it = tbl.consts.find(c.name);
        if (it == tbl.consts.end()) {
            ConstInfo ci;
            ci.name = c.name;
            ci.scheme = c.ty;
            ci.mode = c.mode;
            ci.origin = Origin::OwnSig;
            ci.arity = type_arity(c.ty);
            ci.isPred = is_predicate_type(c.ty);
            tbl.consts.emplace(c.name, std::move(ci));
            continue;
        }
        ConstInfo& prev = it->second;
        if (prev.origin == Origin::Builtin)
            fail(Errc::ConflictingDeclaration,
                 "own signature redeclares builtin '" + c.name + "'", m.pos);
        // Re-export of an accumulated global: declarations must agree.
        DeclMode merged;
        if (canon_type(prev.scheme) != canon_type(c.ty) ||
            !merge_modes(prev.mode, c.mode, merged))
            fail(Errc::SignatureMismatch,
                 "signature entry '" + c.name +
                     "' disagrees with the declaration accumulated from '" +
                     prev.fromModule + "'",
                 m.pos);
        prev.mode = merged;
        // Stays Accumulated if provided there; a useonly own-sig view of an
        // accumulated constant keeps the accumulated provider.
    }

    // 3. Body declarations. Locals are the ones absent from the own signature.
    std::map<std::string, int> sigKindArity(ownSig.kinds.begin(), ownSig.kinds.end());
    for (auto& k : m.kinds) {
        for (auto& n : k.names) {
            auto own = sigKindArity.find(n);
            if (own != sigKindArity.end()) {
                if (own->second != k.arity)
                    fail(Errc::SignatureMismatch,
                         "kind '" + n + "' disagrees with the own signature", k.pos);
                continue;  // re-declaration of an exported kind
            }
            auto it = tbl.kinds.find(n);
            if (it != tbl.kinds.end()) {
                auto bk = builtin_kinds();
                if (bk.count(n))
                    fail(Errc::ConflictingDeclaration,
                         "cannot redeclare builtin type constructor '" + n + "'", k.pos);
                fail(Errc::ConflictingDeclaration,
                     "type constructor '" + n +
                         "' is already visible from an accumulated signature",
                     k.pos);
            }
            tbl.kinds.emplace(n, k.arity);
        }
    }

    // Module-level accum_sig / use_sig: a textual import of declarations,
    // with the imported names subject to the same body-declaration rules.
    std::vector<TypeDecl> bodyDecls = m.types;
    {
        std::vector<TypeDecl> imported;
        for (auto& inc : m.accumSigs) {
            const CheckedSignature& raw = resolveSig(inc.name, inc.pos);
            CheckedSignature view =
                inc.mode == SigInclude::UseSig ? apply_use_sig(raw) : raw;
            for (auto& [n, a] : view.kinds) {
                auto own = sigKindArity.find(n);
                if (own != sigKindArity.end()) {
                    if (own->second != a)
                        fail(Errc::SignatureMismatch,
                             "kind '" + n + "' disagrees with the own signature", inc.pos);
                    continue;
                }
                add_kind(n, a, inc.pos, "included signature");
            }
            for (auto& c : view.consts) {
                TypeDecl d;
                d.names = {c.name};
                d.ty = c.ty;
                d.mode = c.mode;
                d.pos = inc.pos;
                imported.push_back(std::move(d));
            }
        }
        bodyDecls.insert(bodyDecls.begin(), imported.begin(), imported.end());
    }

    std::set<std::string> bodyDeclared;
    for (auto& d : bodyDecls) {
        kind_check(d.ty, tbl.kinds, d.pos);
        if (d.mode != DeclMode::Plain && !is_predicate_type(d.ty))
            fail(Errc::TypeError,
                 std::string(mode_name(d.mode)) + " requires a predicate type (target o)",
                 d.pos);
        for (auto& n : d.names) {
            auto it = tbl.consts.find(n);
            if (it != tbl.consts.end()) {
                ConstInfo& prev = it->second;
                if (prev.origin == Origin::Builtin)
                    fail(Errc::ConflictingDeclaration,
                         "cannot redeclare builtin '" + n + "'", d.pos);
                if (prev.origin == Origin::Accumulated)
                    fail(Errc::ConflictingDeclaration,
                         "'" + n + "' is already visible from signature '" +
                             prev.fromModule + "'; local shadowing is not allowed",
                         d.pos);
                if (prev.origin == Origin::OwnSig) {
                    if (canon_type(prev.scheme) != canon_type(d.ty) || prev.mode != d.mode)
                        fail(Errc::SignatureMismatch,
                             "declaration of '" + n + "' disagrees with the own signature",
                             d.pos);
                    continue;  // consistent re-declaration
                }
                fail(Errc::ConflictingDeclaration,
                     "duplicate declaration of '" + n + "'", d.pos);
            }
            if (d.mode == DeclMode::Useonly)
                fail(Errc::UseonlyViolation,
                     "useonly constant '" + n +
                         "' must come from a signature; it cannot be module-local",
                     d.pos);
            if (d.mode == DeclMode::Exportdef)
                fail(Errc::SignatureMismatch,
                     "exportdef declaration of '" + n +
                         "' must appear in the module's signature",
                     d.pos);
            ConstInfo ci;
            ci.name = n;
            ci.scheme = d.ty;
            ci.mode = d.mode;
            ci.origin = Origin::Local;
            ci.arity = type_arity(d.ty);
            ci.isPred = is_predicate_type(d.ty);
            tbl.consts.emplace(n, std::move(ci));
            bodyDeclared.insert(n);
            tm.localConsts.push_back(n);
        }
    }

    // Captured accumulated globals: visible from an accumulated signature but
    // not re-exported here. They become hidden at this module's level.
    {
        std::set<std::string> seen(tm.localConsts.begin(), tm.localConsts.end());
        for (auto& s : accSigs) {
            for (auto& c : s.consts) {
                if (ownSig.find(c.name)) continue;
                if (seen.count(c.name)) continue;
                seen.insert(c.name);
                tm.localConsts.push_back(c.name);
            }
        }
    }

    // 4. Clauses: inference plus the definition policy checks.
    for (auto& c : m.clauses) {
        RClause rc = infer_clause_types(c, tbl);
        const ConstInfo& head = *tbl.find(rc.pred);
        if (head.mode == DeclMode::Useonly)
            fail(Errc::UseonlyViolation,
                 "predicate '" + rc.pred + "' is useonly and may not be defined here",
                 c.pos);
        if (head.mode == DeclMode::Exportdef && head.origin == Origin::Accumulated)
            fail(Errc::ExportdefViolation,
                 "predicate '" + rc.pred + "' is exportdef in signature '" +
                     head.fromModule + "' and may not be extended here",
                 c.pos);
        if (head.origin == Origin::Accumulated && head.mode == DeclMode::Plain) {
            // Extending a plain accumulated global: allowed (multifile case).
        }
        int idx = static_cast<int>(tm.clauses.size());
        auto it = tm.predClauses.find(rc.pred);
        if (it == tm.predClauses.end()) {
            tm.predOrder.push_back(rc.pred);
            tm.predClauses[rc.pred].push_back(idx);
        } else {
            it->second.push_back(idx);
        }
        tm.clauses.push_back(std::move(rc));
    }

    return tm;
}

RTermPtr RTerm::mk(Kind k) {
    auto r = std::make_shared<RTerm>();
    r->kind = k;
    return r;
}

}  // namespace lmod
