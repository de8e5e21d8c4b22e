#include "lmod/elaborate.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace lmod {

namespace {

struct Resolver {
    explicit Resolver(const SourceLoader& l) : loader(l) {}

    const SourceLoader& loader;
    ModuleGraph graph;
    std::vector<std::string> modStack;   // accumulation DFS stack
    std::vector<std::string> sigStack;   // signature inclusion DFS stack
    std::set<std::string> visitedModules;
    std::map<std::string, int> seenCount;

    const CheckedSignature& checked_sig(const std::string& name, Position pos) {
        auto it = graph.sigs.find(name);
        if (it != graph.sigs.end()) return it->second;
        if (std::find(sigStack.begin(), sigStack.end(), name) != sigStack.end()) {
            std::string path;
            for (auto& s : sigStack) path += s + " -> ";
            fail(Errc::CyclicAccumulation,
                 "cyclic signature inclusion: " + path + name, pos);
        }
        sigStack.push_back(name);
        SignatureAst ast = loader.signature(name, pos);
        if (ast.name != name)
            fail(Errc::SignatureMismatch,
                 "signature file for '" + name + "' declares 'sig " + ast.name + "'", pos);
        CheckedSignature cs = check_signature(
            ast, [this](const std::string& n, Position p) -> const CheckedSignature& {
                return checked_sig(n, p);
            });
        sigStack.pop_back();
        return graph.sigs.emplace(name, std::move(cs)).first->second;
    }

    void resolve_module(const std::string& name, Position pos) {
        ++seenCount[name];
        if (visitedModules.count(name)) return;
        auto onStack = std::find(modStack.begin(), modStack.end(), name);
        if (onStack != modStack.end()) {
            std::string path;
            for (auto it = onStack; it != modStack.end(); ++it) path += *it + " -> ";
            fail(Errc::CyclicAccumulation, "cyclic accumulation: " + path + name, pos);
        }
        modStack.push_back(name);
        ModuleAst ast = loader.module(name, pos);
        if (ast.name != name)
            fail(Errc::SignatureMismatch,
                 "module file for '" + name + "' declares 'module " + ast.name + "'", pos);
        for (auto& acc : ast.accumulates) resolve_module(acc, ast.pos);

        const CheckedSignature& own = checked_sig(name, pos);
        std::vector<CheckedSignature> accSigs;
        accSigs.reserve(ast.accumulates.size());
        for (auto& acc : ast.accumulates) accSigs.push_back(graph.sigs.at(acc));

        TypedModule tm = check_module(
            ast, own, accSigs,
            [this](const std::string& n, Position p) -> const CheckedSignature& {
                return checked_sig(n, p);
            });
        graph.nodes.emplace(name, std::move(tm));
        visitedModules.insert(name);
        modStack.pop_back();
    }
};

}  // namespace

ModuleGraph resolve_graph(const std::string& root, const SourceLoader& loader) {
    Resolver r(loader);
    r.graph.root = root;
    r.resolve_module(root, {});
    for (auto& [name, count] : r.seenCount)
        if (count > 1) r.graph.diamondWarnings.push_back(name);
    return r.graph;
}

// --------------------------------------------------------------- elaborate

namespace {

struct Elaborator {
    explicit Elaborator(const ModuleGraph& gr) : g(gr) {}

    const ModuleGraph& g;
    Elaboration out;

    ConstId alloc(std::string name, std::string tyEnc, int level) {
        out.consts.push_back(FlatConst{std::move(name), std::move(tyEnc), level});
        return static_cast<ConstId>(out.consts.size() - 1);
    }

    // Builds the occurrence's formula. `sigEnv` maps the module's signature
    // globals to already-allocated constants. Local constants are allocated
    // here, before descending into accumulated children: parent-before-child,
    // matching the linker's cascade.
    EFormulaPtr visit(const std::string& name,
                      std::map<std::string, ConstId> env, int parentOcc) {
        const TypedModule& m = g.node(name);

        std::vector<ConstId> binders;
        for (auto& ln : m.localConsts) {
            const ConstInfo* ci = m.table.find(ln);
            assert(ci);
            ConstId id = alloc(ln + "#" + std::to_string(out.binderCount++),
                               canon_type(ci->scheme), 1);
            env[ln] = id;
            binders.push_back(id);
        }

        auto envPtr = std::make_shared<const std::map<std::string, ConstId>>(env);

        std::vector<EFormulaPtr> parts;
        std::vector<int> childOcc;
        for (size_t i = 0; i < m.accumulates.size(); ++i) {
            const CheckedSignature& childSig = m.accSigs[i];
            std::map<std::string, ConstId> childEnv;
            for (auto& c : childSig.consts) {
                auto it = env.find(c.name);
                assert(it != env.end());
                childEnv.emplace(c.name, it->second);
            }
            parts.push_back(visit(m.accumulates[i], std::move(childEnv), -2));
            childOcc.push_back(static_cast<int>(out.occurrences.size()) - 1);
        }

        for (auto& rc : m.clauses) {
            auto f = std::make_shared<EFormula>();
            f->kind = EFormula::Kind::Clause;
            f->clause.clause = &rc;
            f->clause.env = envPtr;
            f->clause.occurrence = static_cast<int>(out.occurrences.size());
            parts.push_back(std::move(f));
        }

        // This occurrence is appended after its children: post-order.
        int occIdx = static_cast<int>(out.occurrences.size());
        out.occurrences.push_back(Occurrence{name, parentOcc, envPtr});
        for (int c : childOcc) out.occurrences[c].parent = occIdx;

        auto conj = std::make_shared<EFormula>();
        conj->kind = EFormula::Kind::Conj;
        conj->parts = std::move(parts);
        EFormulaPtr body = conj;
        for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
            auto ex = std::make_shared<EFormula>();
            ex->kind = EFormula::Kind::Exists;
            ex->binder = *it;
            ex->body = std::move(body);
            body = std::move(ex);
        }
        return body;
    }
};

}  // namespace

Elaboration elaborate(const ModuleGraph& g) {
    Elaborator el(g);
    // Builtins occupy the fixed leading ids.
    el.alloc("nil", canon_type(TypeExpr::app("list", {TypeExpr::var("A")})), 0);
    el.alloc("true", canon_type(TypeExpr::app("o")), 0);

    // Root signature globals, in declaration order, at level 0.
    const CheckedSignature& rootSig = g.sigs.at(g.root);
    std::map<std::string, ConstId> rootEnv;
    for (auto& c : rootSig.consts)
        rootEnv.emplace(c.name, el.alloc(c.name, canon_type(c.ty), 0));

    el.out.formula = el.visit(g.root, std::move(rootEnv), -1);
    return el.out;
}

namespace {

void flatten_rec(const EFormulaPtr& f, FlatProgram& p) {
    switch (f->kind) {
        case EFormula::Kind::Clause: {
            const RClause& rc = *f->clause.clause;
            auto it = f->clause.env->find(rc.pred);
            if (it == f->clause.env->end())
                fail(Errc::HeadNotConstant,
                     "clause head '" + rc.pred + "' did not resolve to a constant");
            FlatClause fc{it->second, &rc, f->clause.env, f->clause.occurrence};
            int idx = static_cast<int>(p.clauses.size());
            p.clauses.push_back(std::move(fc));
            p.predicates[it->second].push_back(idx);
            return;
        }
        case EFormula::Kind::Conj:
            for (auto& part : f->parts) flatten_rec(part, p);
            return;
        case EFormula::Kind::Exists:
            flatten_rec(f->body, p);
            return;
    }
}

}  // namespace

FlatProgram flatten(const Elaboration& e, const ModuleGraph& g) {
    FlatProgram p;
    p.consts = e.consts;
    p.occurrences = e.occurrences;
    for (size_t i = 0; i < p.consts.size(); ++i)
        if (p.consts[i].level == 0)
            p.rootScope.emplace(p.consts[i].name, static_cast<ConstId>(i));
    flatten_rec(e.formula, p);

    // Goal-checking scope: builtins plus the root signature.
    p.rootTable = builtin_table();
    const CheckedSignature& rootSig = g.sigs.at(g.root);
    for (auto& [n, a] : rootSig.kinds) p.rootTable.kinds.emplace(n, a);
    for (auto& c : rootSig.consts) {
        ConstInfo ci;
        ci.name = c.name;
        ci.scheme = c.ty;
        ci.mode = c.mode;
        ci.origin = Origin::OwnSig;
        ci.arity = type_arity(c.ty);
        ci.isPred = is_predicate_type(c.ty);
        p.rootTable.consts.emplace(c.name, std::move(ci));
    }
    return p;
}

FlatProgram flatten_graph(const ModuleGraph& g) {
    Elaboration e = elaborate(g);
    return flatten(e, g);
}

}  // namespace lmod
