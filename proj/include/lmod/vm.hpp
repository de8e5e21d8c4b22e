// Bytecode emulator for linked images: WAM-style heap, registers,
// environment and choice-point stacks, trail, level-checked unification,
// hash tables built from the image's merged switch lists.
#pragma once

#include <map>
#include <optional>
#include <unordered_map>

#include "lmod/answers.hpp"
#include "lmod/objfile.hpp"
#include "lmod/typecheck.hpp"

namespace lmod {

struct Cell {
    enum class Tag : uint8_t { Ref, Con, Int, Real, Str, Struct, Lis } tag = Tag::Ref;
    uint32_t a = 0;      // Ref addr / Con index / Str index / Struct functor / Lis pair base
    uint32_t b = 0;      // Ref level / Struct arg base
    uint32_t c = 0;      // Struct arity
    long long i = 0;     // Int
    double d = 0;        // Real
};

struct GoalCode {
    std::vector<Instruction> code;          // ends with halt
    std::vector<std::string> queryVars;     // first-occurrence order
    uint32_t nSlots = 0;                    // goal environment size
};

// Level-0 scope of an image, reconstructed from its constant table; used to
// check goals before execution. Unknown names cover both undeclared
// constants and hidden (module-local) ones, whose names images do not carry.
SymbolTable image_symbol_table(const Image& img);

// Compiles a checked goal against an image: query variables live in the goal
// environment, sigma variables are created at level 1, calls are patched to
// entry offsets (missing definitions fall through to the shared fail stub).
GoalCode compile_goal(const Image& img, const CheckedGoal& goal);

struct MachineOptions {
    bool occursCheck = true;
    // Maximum live choice points; 0 = unbounded.
    uint32_t depthLimit = 0;
};

struct MachineStats {
    uint64_t choicePointsPushed = 0;
    uint64_t instructions = 0;
};

class Machine {
public:
    enum class Status { Idle, Running, Answer, Exhausted };

    Machine(const Image& img, MachineOptions opts = {});

    // Installs goal code and the goal environment; machine becomes Running.
    void start(const GoalCode& goal);

    // Executes one instruction. Valid only while Running.
    void step();

    // Runs until an answer or exhaustion.
    Status run_to_answer();

    // After an Answer: resume the search for the next one.
    Status next_answer();

    Status status() const { return status_; }
    Answer current_answer() const;

    const MachineStats& stats() const { return stats_; }
    size_t choice_points() const { return cps_.size(); }
    size_t heap_size() const { return heap_.size(); }
    size_t trail_size() const { return trail_.size(); }
    uint32_t pc() const { return pc_; }

    // Post-load switch tables (offset of the switch instruction -> table),
    // exposed for inspection in tests.
    const std::unordered_map<uint32_t, std::unordered_map<uint32_t, uint32_t>>&
    constant_tables() const {
        return constTables_;
    }

private:
    struct Env {
        int prevE;
        uint32_t cont;
        std::vector<Cell> slots;
    };
    struct ChoicePoint {
        std::vector<Cell> args;
        uint32_t numArgs;
        int e;
        uint32_t cont;
        size_t heapTop;
        size_t trailTop;
        size_t envTop;
        uint32_t nextClause;
    };
    struct TrailEntry {
        uint32_t addr;
        Cell prior;
    };

    const Image& img_;
    MachineOptions opts_;
    std::vector<Instruction> code_;   // image code + goal code
    uint32_t imageLen_ = 0;
    std::map<uint32_t, uint32_t> entry_;
    std::unordered_map<uint32_t, std::unordered_map<uint32_t, uint32_t>> constTables_;
    std::unordered_map<uint32_t, std::unordered_map<uint64_t, uint32_t>> structTables_;

    std::vector<Cell> heap_;
    std::vector<Cell> regs_;          // X/A registers, 1-based
    std::vector<Env> envs_;
    std::vector<ChoicePoint> cps_;
    std::vector<TrailEntry> trail_;
    std::vector<std::string> strings_;
    std::map<std::string, uint32_t> stringIdx_;

    uint32_t pc_ = 0;
    uint32_t cont_ = 0;
    int e_ = -1;
    uint32_t numArgs_ = 0;
    uint32_t s_ = 0;                  // structure pointer (read mode)
    bool writeMode_ = false;
    std::optional<uint32_t> writeLevel_;  // level cap while writing a binding
    Status status_ = Status::Idle;
    MachineStats stats_;

    std::vector<std::pair<std::string, uint32_t>> queryVars_;  // name, heap addr

    uint32_t intern(const std::string& s);
    Cell new_var(uint32_t level);
    Cell deref(Cell c) const;
    void trail_write(uint32_t addr, const Cell& value);
    bool unify(Cell a, Cell b);
    bool occurs(uint32_t addr, Cell t) const;
    bool level_adjust(uint32_t maxLevel, Cell t);
    uint32_t const_level(uint32_t idx) const;
    void backtrack();
    void push_cp(uint32_t nextClause);
    void restore_cp();
    Cell& reg(uint32_t i);
    Cell load(const RegRef& r);
    void store(const RegRef& r, const Cell& c);
    void write_push(const Cell& c);
    bool write_checked(const Cell& c);
    AnswerTermPtr extract(Cell c) const;
    [[noreturn]] void fault(const std::string& msg) const;
};

// Convenience: all answers of a goal, in order (used by tests and the CLI
// batch mode).
std::vector<Answer> run_all(const Image& img, const CheckedGoal& goal,
                            MachineOptions opts = {}, size_t maxAnswers = SIZE_MAX);

}  // namespace lmod
