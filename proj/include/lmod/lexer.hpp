// Tokenizer for module files, signature files and goals.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lmod/diag.hpp"

namespace lmod {

enum class Tok {
    Ident,       // lowercase-initial identifier
    UVar,        // uppercase-initial identifier (variable)
    Int,
    Real,
    Str,
    KwModule, KwSig, KwKind, KwType, KwExportdef, KwUseonly,
    KwAccumulate, KwAccumSig, KwUseSig,
    Period, Comma, Semicolon, Turnstile,   // . , ; :-
    LParen, RParen, Arrow, Cons, Backslash, // ( ) -> :: '\'
    End,
};

struct Token {
    Tok kind;
    std::string text;       // identifier / string value (unescaped)
    long long ival = 0;
    double rval = 0;
    Position pos;
};

const char* tok_name(Tok t);

// Drops whitespace and '%' line comments. Throws Error on bad input.
std::vector<Token> tokenize(std::string_view source);

}  // namespace lmod
