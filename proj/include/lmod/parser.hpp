// Recursive-descent parser producing module, signature and goal ASTs.
#pragma once

#include <string_view>

#include "lmod/ast.hpp"
#include "lmod/lexer.hpp"

namespace lmod {

ModuleAst parse_module(const std::vector<Token>& toks);
SignatureAst parse_signature(const std::vector<Token>& toks);

struct ParsedGoal {
    GoalPtr goal;
    // Free (non-sigma-bound) uppercase tokens, first occurrence order.
    std::vector<std::string> freeVars;
};
ParsedGoal parse_goal(std::string_view text);

ModuleAst parse_module_text(std::string_view text);
SignatureAst parse_signature_text(std::string_view text);

}  // namespace lmod
