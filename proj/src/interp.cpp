#include "lmod/interp.hpp"

#include <cassert>

namespace lmod {

ITermPtr ITerm::constant(ConstId c) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Const;
    t->cid = c;
    return t;
}
ITermPtr ITerm::integer(long long v) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Int;
    t->ival = v;
    return t;
}
ITermPtr ITerm::real(double v) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Real;
    t->rval = v;
    return t;
}
ITermPtr ITerm::str(std::string v) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Str;
    t->sval = std::move(v);
    return t;
}
ITermPtr ITerm::variable(int idx) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Var;
    t->var = idx;
    return t;
}
ITermPtr ITerm::app(ConstId c, std::vector<ITermPtr> as) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::App;
    t->cid = c;
    t->args = std::move(as);
    return t;
}
ITermPtr ITerm::nil() {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Nil;
    return t;
}
ITermPtr ITerm::cons(ITermPtr h, ITermPtr tl) {
    auto t = std::make_shared<ITerm>();
    t->kind = Kind::Cons;
    t->args = {std::move(h), std::move(tl)};
    return t;
}

void Bindings::undo_to(size_t m) {
    while (trail.size() > m) {
        TrailEntry& e = trail.back();
        cells[e.var].value = std::move(e.priorValue);
        cells[e.var].level = e.priorLevel;
        trail.pop_back();
    }
}

void Bindings::bind(int var, ITermPtr value) {
    trail.push_back(TrailEntry{var, cells[var].value, cells[var].level});
    cells[var].value = std::move(value);
}

void Bindings::lower_level(int var, int level) {
    trail.push_back(TrailEntry{var, cells[var].value, cells[var].level});
    cells[var].level = level;
}

ITermPtr deref(const ITermPtr& t, const Bindings& b) {
    ITermPtr cur = t;
    while (cur->kind == ITerm::Kind::Var && b.cells[cur->var].value)
        cur = b.cells[cur->var].value;
    return cur;
}

namespace {

bool occurs_in(int var, const ITermPtr& t, const Bindings& b) {
    ITermPtr d = deref(t, b);
    switch (d->kind) {
        case ITerm::Kind::Var:
            return d->var == var;
        case ITerm::Kind::App:
        case ITerm::Kind::Cons:
            for (auto& a : d->args)
                if (occurs_in(var, a, b)) return true;
            return false;
        default:
            return false;
    }
}

// Checks the level rule for binding a variable at `maxLevel` to `t`, lowering
// the levels of variables inside t as needed (trailed). Fails if a constant
// above maxLevel occurs.
bool level_adjust(int maxLevel, const ITermPtr& t, Bindings& b,
                  const std::vector<FlatConst>& consts) {
    ITermPtr d = deref(t, b);
    switch (d->kind) {
        case ITerm::Kind::Var:
            if (b.cells[d->var].level > maxLevel) b.lower_level(d->var, maxLevel);
            return true;
        case ITerm::Kind::Const:
            return consts[d->cid].level <= maxLevel;
        case ITerm::Kind::App:
            if (consts[d->cid].level > maxLevel) return false;
            for (auto& a : d->args)
                if (!level_adjust(maxLevel, a, b, consts)) return false;
            return true;
        case ITerm::Kind::Cons:
            return level_adjust(maxLevel, d->args[0], b, consts) &&
                   level_adjust(maxLevel, d->args[1], b, consts);
        default:
            return true;  // literals carry no constants
    }
}

}  // namespace

bool unify(const ITermPtr& x, const ITermPtr& y, Bindings& b,
           const std::vector<FlatConst>& consts) {
    ITermPtr a = deref(x, b);
    ITermPtr c = deref(y, b);
    if (a->kind == ITerm::Kind::Var && c->kind == ITerm::Kind::Var &&
        a->var == c->var)
        return true;
    if (a->kind == ITerm::Kind::Var) {
        if (occurs_in(a->var, c, b)) return false;
        if (!level_adjust(b.cells[a->var].level, c, b, consts)) return false;
        b.bind(a->var, c);
        return true;
    }
    if (c->kind == ITerm::Kind::Var) return unify(c, a, b, consts);
    if (a->kind != c->kind) return false;
    switch (a->kind) {
        case ITerm::Kind::Const:
            return a->cid == c->cid;
        case ITerm::Kind::Int:
            return a->ival == c->ival;
        case ITerm::Kind::Real:
            return a->rval == c->rval;
        case ITerm::Kind::Str:
            return a->sval == c->sval;
        case ITerm::Kind::App:
            if (a->cid != c->cid || a->args.size() != c->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (!unify(a->args[i], c->args[i], b, consts)) return false;
            return true;
        case ITerm::Kind::Cons:
            return unify(a->args[0], c->args[0], b, consts) &&
                   unify(a->args[1], c->args[1], b, consts);
        case ITerm::Kind::Nil:
            return true;
        default:
            return false;
    }
}

namespace {

// Builds a runtime term from a resolved term under a variable frame.
ITermPtr instantiate(const RTermPtr& t, const std::vector<int>& frame,
                     const std::map<std::string, ConstId>& env) {
    switch (t->kind) {
        case RTerm::Kind::Const: {
            auto it = env.find(t->cname);
            assert(it != env.end());
            return ITerm::constant(it->second);
        }
        case RTerm::Kind::Int:
            return ITerm::integer(t->ival);
        case RTerm::Kind::Real:
            return ITerm::real(t->rval);
        case RTerm::Kind::Str:
            return ITerm::str(t->sval);
        case RTerm::Kind::Var:
            return ITerm::variable(frame[t->slot]);
        case RTerm::Kind::Nil:
            return ITerm::nil();
        case RTerm::Kind::Cons:
            return ITerm::cons(instantiate(t->args[0], frame, env),
                               instantiate(t->args[1], frame, env));
        case RTerm::Kind::App: {
            auto it = env.find(t->cname);
            assert(it != env.end());
            std::vector<ITermPtr> as;
            as.reserve(t->args.size());
            for (auto& a : t->args) as.push_back(instantiate(a, frame, env));
            return ITerm::app(it->second, std::move(as));
        }
    }
    return ITerm::nil();
}

struct Solver {
    const FlatProgram& p;
    const SolveOptions& opts;
    Bindings b;
    const AnswerSink& sink;
    std::vector<int> queryFrame;
    const CheckedGoal& query;
    bool stopped = false;

    Solver(const FlatProgram& prog, const SolveOptions& o, const AnswerSink& s,
           const CheckedGoal& q)
        : p(prog), opts(o), sink(s), query(q) {}

    AnswerTermPtr extract(const ITermPtr& t) const {
        ITermPtr d = deref(t, b);
        auto a = std::make_shared<AnswerTerm>();
        switch (d->kind) {
            case ITerm::Kind::Var:
                a->kind = AnswerTerm::Kind::Unbound;
                // Cell index is a stable identity within one answer.
                a->varKey = d->var;
                return a;
            case ITerm::Kind::Const:
                assert(p.consts[d->cid].level == 0 && "hidden constant in answer");
                a->kind = AnswerTerm::Kind::Const;
                a->name = p.consts[d->cid].name;
                return a;
            case ITerm::Kind::Int:
                a->kind = AnswerTerm::Kind::Int;
                a->ival = d->ival;
                return a;
            case ITerm::Kind::Real:
                a->kind = AnswerTerm::Kind::Real;
                a->rval = d->rval;
                return a;
            case ITerm::Kind::Str:
                a->kind = AnswerTerm::Kind::Str;
                a->sval = d->sval;
                return a;
            case ITerm::Kind::Nil:
                a->kind = AnswerTerm::Kind::Nil;
                return a;
            case ITerm::Kind::Cons:
                a->kind = AnswerTerm::Kind::Cons;
                a->args = {extract(d->args[0]), extract(d->args[1])};
                return a;
            case ITerm::Kind::App:
                assert(p.consts[d->cid].level == 0 && "hidden constant in answer");
                a->kind = AnswerTerm::Kind::App;
                a->name = p.consts[d->cid].name;
                for (auto& x : d->args) a->args.push_back(extract(x));
                return a;
        }
        a->kind = AnswerTerm::Kind::Nil;
        return a;
    }

    bool emit() {
        Answer a;
        for (int i = 0; i < query.nFree; ++i)
            a.bindings.emplace_back(query.vars[i].name,
                                    extract(ITerm::variable(queryFrame[i])));
        if (!sink(a)) {
            stopped = true;
            return false;
        }
        return true;
    }

    // Continuation-passing search. k() returns false to abort the search.
    bool solve_goal(const RGoalPtr& g, const std::vector<int>& frame,
                    const std::map<std::string, ConstId>& env, int depth,
                    const std::function<bool()>& k) {
        switch (g->kind) {
            case RGoal::Kind::True:
                return k();
            case RGoal::Kind::And: {
                auto rest = [&]() {
                    return solve_goal(g->right, frame, env, depth, k);
                };
                return solve_goal(g->left, frame, env, depth, rest);
            }
            case RGoal::Kind::Or:
                if (!solve_goal(g->left, frame, env, depth, k)) return false;
                return solve_goal(g->right, frame, env, depth, k);
            case RGoal::Kind::Exists: {
                // The witness is drawn from the expanded signature: a fresh
                // variable at level 1 may capture hidden constants.
                std::vector<int> f2 = frame;
                f2[g->slot] = b.fresh(1);
                return solve_goal(g->body, f2, env, depth, k);
            }
            case RGoal::Kind::Atom:
                return solve_atom(g, frame, env, depth, k);
        }
        return true;
    }

    bool solve_atom(const RGoalPtr& g, const std::vector<int>& frame,
                    const std::map<std::string, ConstId>& env, int depth,
                    const std::function<bool()>& k) {
        if (opts.depthLimit > 0 && depth >= opts.depthLimit)
            fail(Errc::DepthLimitExceeded,
                 "depth limit " + std::to_string(opts.depthLimit) + " exceeded");
        auto pit = env.find(g->pred);
        if (pit == env.end())
            fail(Errc::UnknownPredicate, "unknown predicate '" + g->pred + "'");
        ConstId pred = pit->second;

        std::vector<ITermPtr> callArgs;
        callArgs.reserve(g->args.size());
        for (auto& a : g->args) callArgs.push_back(instantiate(a, frame, env));

        auto cit = p.predicates.find(pred);
        if (cit == p.predicates.end()) return true;  // no clauses: finitely fails

        for (int ci : cit->second) {
            const FlatClause& fc = p.clauses[ci];
            size_t m = b.mark();
            size_t cellMark = b.cells.size();
            // Clause variables are renamed to fresh level-1 cells.
            std::vector<int> cf(fc.clause->vars.size());
            for (size_t i = 0; i < cf.size(); ++i) cf[i] = b.fresh(1);

            bool ok = true;
            for (size_t i = 0; i < callArgs.size() && ok; ++i) {
                ITermPtr ha = instantiate(fc.clause->headArgs[i], cf, *fc.env);
                ok = unify(callArgs[i], ha, b, p.consts);
            }
            if (ok) {
                if (fc.clause->body) {
                    if (!solve_goal(fc.clause->body, cf, *fc.env, depth + 1, k)) {
                        b.undo_to(m);
                        return false;
                    }
                } else {
                    if (!k()) {
                        b.undo_to(m);
                        return false;
                    }
                }
            }
            b.undo_to(m);
            b.cells.resize(cellMark);
        }
        return true;
    }

    void run() {
        queryFrame.resize(query.vars.size(), -1);
        for (int i = 0; i < query.nFree; ++i) queryFrame[i] = b.fresh(0);
        auto k = [&]() { return emit(); };
        solve_goal(query.goal, queryFrame, p.rootScope, 0, k);
    }
};

}  // namespace

void Interp::solve(const CheckedGoal& goal, const AnswerSink& sink) const {
    Solver s(program, opts, sink, goal);
    s.run();
}

std::vector<Answer> Interp::solve_all(const CheckedGoal& goal, size_t maxAnswers) const {
    std::vector<Answer> out;
    solve(goal, [&](const Answer& a) {
        out.push_back(a);
        return out.size() < maxAnswers;
    });
    return out;
}

std::string render_answers(const std::vector<Answer>& answers) {
    if (answers.empty()) return "no\n";
    std::string out;
    for (auto& a : answers) {
        out += show_answer(a);
        out += "\n\n";
    }
    return out;
}

}  // namespace lmod
