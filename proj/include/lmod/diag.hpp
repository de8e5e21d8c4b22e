// Source positions and diagnostic errors shared by all phases.
#pragma once

#include <stdexcept>
#include <string>

namespace lmod {

struct Position {
    int line = 0;   // 1-based; 0 means "no position"
    int column = 0;

    bool valid() const { return line > 0; }
    std::string str() const {
        if (!valid()) return "";
        return std::to_string(line) + ":" + std::to_string(column);
    }
};

// Error codes let tests assert on the precise failure class instead of
// matching message text.
enum class Errc {
    // lexing / parsing
    UnterminatedString,
    IllegalCharacter,
    NumberOverflow,
    SyntaxError,
    DuplicateHeader,
    ClauseInSignature,
    // typecheck
    UnknownTypeConstructor,
    ArityMismatch,
    ConflictingDeclaration,
    SignatureMismatch,
    UseonlyViolation,
    ExportdefViolation,
    TypeError,
    UnknownConstant,
    // elaborate / link graph
    ModuleNotFound,
    CyclicAccumulation,
    HeadNotConstant,
    // interp / vm
    UnknownPredicate,
    DepthLimitExceeded,
    LocalConstantInGoal,
    MachineFault,
    // object format
    BadMagic,
    UnsupportedVersion,
    Truncated,
    IndexOutOfRange,
    BadFormat,
    // link
    RenamingDomainMismatch,
    MergeClosedDefinition,
    MissingObjectFile,
    SignatureSkew,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg, Position pos = {})
        : std::runtime_error(std::move(msg)), code_(code), pos_(pos) {}

    Errc code() const { return code_; }
    Position pos() const { return pos_; }

    // "line:col: error: msg [Code]" — file prefix added by the caller that
    // knows the file name.
    std::string render() const;

private:
    Errc code_;
    Position pos_;
};

[[noreturn]] inline void fail(Errc c, std::string msg, Position pos = {}) {
    throw Error(c, std::move(msg), pos);
}

}  // namespace lmod
