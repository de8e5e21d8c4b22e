// Ground-ish answer terms and their rendering, shared by the reference
// interpreter and the VM so that both produce byte-identical output.
#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace lmod {

struct AnswerTerm;
using AnswerTermPtr = std::shared_ptr<const AnswerTerm>;

struct AnswerTerm {
    enum class Kind { Const, Int, Real, Str, App, Nil, Cons, Unbound };
    Kind kind;
    std::string name;                  // Const / App head
    long long ival = 0;
    double rval = 0;
    std::string sval;
    std::vector<AnswerTermPtr> args;   // App; Cons uses args[0], args[1]
    long long varKey = 0;              // Unbound: engine-specific cell identity

    static AnswerTermPtr mk(Kind k);
};

struct Answer {
    // Query variable name -> fully dereferenced term, first-occurrence order.
    std::vector<std::pair<std::string, AnswerTermPtr>> bindings;
};

// "yes" for an empty substitution, else one "X = term" line per variable.
// Distinct unbound cells are numbered _0, _1, ... in first-render order.
std::string show_answer(const Answer& a);

std::string answer_term_to_string(const AnswerTermPtr& t,
                                  std::map<long long, int>& varNames);

}  // namespace lmod
