// Reference interpreter: depth-first proof search over a FlatProgram with
// level-labeled unification enforcing the hiding discipline. The VM is
// checked against this engine.
#pragma once

#include <functional>
#include <optional>

#include "lmod/answers.hpp"
#include "lmod/elaborate.hpp"

namespace lmod {

// Runtime terms. Variables live in a cell store owned by the Bindings.
struct ITerm;
using ITermPtr = std::shared_ptr<const ITerm>;

struct ITerm {
    enum class Kind { Const, Int, Real, Str, Var, App, Nil, Cons };
    Kind kind;
    ConstId cid = -1;            // Const / App head
    long long ival = 0;
    double rval = 0;
    std::string sval;
    int var = -1;                // Var: index into the cell store
    std::vector<ITermPtr> args;  // App; Cons uses args[0], args[1]

    static ITermPtr constant(ConstId c);
    static ITermPtr integer(long long v);
    static ITermPtr real(double v);
    static ITermPtr str(std::string v);
    static ITermPtr variable(int idx);
    static ITermPtr app(ConstId c, std::vector<ITermPtr> as);
    static ITermPtr nil();
    static ITermPtr cons(ITermPtr h, ITermPtr t);
};

struct Bindings {
    struct Cell {
        ITermPtr value;  // null = unbound
        int level = 0;
    };
    struct TrailEntry {
        int var;
        ITermPtr priorValue;
        int priorLevel;
    };

    std::vector<Cell> cells;
    std::vector<TrailEntry> trail;

    int fresh(int level) {
        cells.push_back(Cell{nullptr, level});
        return static_cast<int>(cells.size()) - 1;
    }
    size_t mark() const { return trail.size(); }
    void undo_to(size_t m);
    void bind(int var, ITermPtr value);
    void lower_level(int var, int level);
};

ITermPtr deref(const ITermPtr& t, const Bindings& b);

// First-order unification with occurs check and the scope-level rule:
// binding a variable of level n to a term requires every constant in the
// term to have level <= n; variables above n are lowered (trailed).
bool unify(const ITermPtr& a, const ITermPtr& b, Bindings& b2,
           const std::vector<FlatConst>& consts);

struct SolveOptions {
    // Maximum predicate-call depth; 0 = unbounded.
    int depthLimit = 0;
};

// Called per answer; return false to stop the search.
using AnswerSink = std::function<bool(const Answer&)>;

struct Interp {
    const FlatProgram& program;
    SolveOptions opts;

    explicit Interp(const FlatProgram& p, SolveOptions o = {}) : program(p), opts(o) {}

    // Depth-first, left-to-right, textual clause order. Deterministic.
    void solve(const CheckedGoal& goal, const AnswerSink& sink) const;

    std::vector<Answer> solve_all(const CheckedGoal& goal, size_t maxAnswers = SIZE_MAX) const;
};

// Renders the full batch output for a goal: answer blocks separated by blank
// lines, or "no" when there are no answers. Shared with the CLI.
std::string render_answers(const std::vector<Answer>& answers);

}  // namespace lmod
