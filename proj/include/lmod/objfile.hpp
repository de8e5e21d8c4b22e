// The compiled-module object format (.lmo), the linked image format (.lmx),
// their deterministic binary encodings, and a textual disassembler.
//
// Code offsets are instruction indices, so the linker's chain rewrites
// (trust_me -> retry_me_else, trust -> retry_else, ...) replace single
// instructions without shifting any label.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lmod/diag.hpp"

namespace lmod {

// Sentinel label meaning "no target / fail".
inline constexpr uint32_t kNoLabel = 0xffffffffu;

// Fixed runtime indices of the builtin constants.
inline constexpr uint32_t kNilConst = 0;
inline constexpr uint32_t kTrueConst = 1;

enum class Space : uint8_t { Builtin = 0, Global = 1, Local = 2, Runtime = 3 };

struct ConstRef {
    Space space = Space::Builtin;
    uint32_t index = 0;

    friend bool operator==(const ConstRef&, const ConstRef&) = default;
    static ConstRef builtin(uint32_t i) { return {Space::Builtin, i}; }
    static ConstRef global(uint32_t i) { return {Space::Global, i}; }
    static ConstRef local(uint32_t i) { return {Space::Local, i}; }
    static ConstRef runtime(uint32_t i) { return {Space::Runtime, i}; }
};

enum class Op : uint8_t {
    // control
    TryMeElse, RetryMeElse, TrustMe,
    Try, Retry, Trust,
    TryElse, RetryElse,
    SwitchOnTerm, SwitchOnConstant, SwitchOnStructure,
    Call, Execute, Proceed, Allocate, Deallocate, Jump, Fail, Halt,
    // head unification
    GetVariable, GetValue, GetConstant, GetInteger, GetReal, GetString,
    GetStructure, GetList,
    // argument building
    PutVariable, PutValue, PutConstant, PutInteger, PutReal, PutString,
    PutStructure, PutList,
    // structure arguments (read/write mode)
    UnifyVariable, UnifyValue, UnifyConstant, UnifyInteger, UnifyReal,
    UnifyString, UnifyVoid,
    // write-only structure arguments; accepted in files, never emitted
    SetVariable, SetValue, SetConstant, SetInteger, SetVoid,
};

const char* op_name(Op op);

enum class RegKind : uint8_t { Temp = 0, Perm = 1 };  // X / Y registers

struct RegRef {
    RegKind kind = RegKind::Temp;
    uint32_t index = 0;
    friend bool operator==(const RegRef&, const RegRef&) = default;
    static RegRef x(uint32_t i) { return {RegKind::Temp, i}; }
    static RegRef y(uint32_t i) { return {RegKind::Perm, i}; }
};

// Call target forms. Object files use Label (entry known within the file),
// RedefIdx (index into the redefinable list) or Pred (a constant reference);
// linked images use only Offset.
enum class CallKind : uint8_t { Label = 0, RedefIdx = 1, Pred = 2, Offset = 3 };

struct CallTarget {
    CallKind kind = CallKind::Label;
    uint32_t offset = 0;   // Label / Offset / RedefIdx payload
    ConstRef pred;         // Pred payload
    friend bool operator==(const CallTarget&, const CallTarget&) = default;
};

struct SwitchEntry {
    ConstRef symbol;
    uint32_t arity = 0;    // structure tables only
    uint32_t target = 0;
    friend bool operator==(const SwitchEntry&, const SwitchEntry&) = default;
};

// One fat instruction struct; the operand fields used depend on the opcode.
struct Instruction {
    Op op = Op::Fail;
    uint32_t lab1 = kNoLabel;     // primary label / Lv of switch_on_term
    uint32_t lab2 = kNoLabel;     // secondary label / Lc
    uint32_t lab3 = kNoLabel;     // Llist
    uint32_t lab4 = kNoLabel;     // Ls
    RegRef reg;                   // Vn operand
    uint32_t areg = 0;            // Ai operand
    ConstRef cref;                // constant operand / structure functor
    uint32_t arity = 0;           // structure arity / allocate N / unify_void N / call arity
    long long ival = 0;
    double rval = 0;
    std::string sval;
    CallTarget call;              // call / execute
    std::vector<SwitchEntry> table;  // switch_on_constant / switch_on_structure

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Instruction factories for the handful of shapes tests build by hand.
Instruction ins_label(Op op, uint32_t l);
Instruction ins_simple(Op op);

struct ConstEntry {
    std::string name;   // may be empty for locals compiled without debug names
    bool hasName = true;
    std::string tyEnc;  // canonical type encoding
    friend bool operator==(const ConstEntry&, const ConstEntry&) = default;
};

struct RenamingMap {
    std::string moduleName;
    uint64_t sigHash = 0;
    std::vector<std::pair<std::string, ConstRef>> entries;  // sig-global order
    friend bool operator==(const RenamingMap&, const RenamingMap&) = default;

    const ConstRef* find(const std::string& n) const {
        for (auto& [k, v] : entries)
            if (k == n) return &v;
        return nullptr;
    }
};

struct ObjectFile {
    std::string moduleName;
    uint64_t sigHash = 0;
    std::vector<ConstEntry> globals;             // item 1: own signature order
    std::vector<ConstEntry> locals;              // item 2
    std::vector<RenamingMap> accums;             // item 3: accumulation order
    std::vector<ConstRef> redefinable;           // item 4
    std::vector<Instruction> code;               // item 5
    std::vector<std::pair<ConstRef, uint32_t>> entries;  // item 6

    friend bool operator==(const ObjectFile&, const ObjectFile&) = default;
};

struct ImageConst {
    std::string name;    // empty for hidden constants
    std::string tyEnc;
    uint16_t level = 0;
    friend bool operator==(const ImageConst&, const ImageConst&) = default;
};

struct Image {
    std::string rootName;
    std::vector<ImageConst> consts;
    std::vector<Instruction> code;
    std::vector<std::pair<uint32_t, uint32_t>> entries;  // const idx -> offset, ascending
    uint32_t failEntry = 0;   // shared fail stub offset (last instruction)

    friend bool operator==(const Image&, const Image&) = default;
};

// Canonical bytes; equal values encode to equal bytes.
std::vector<uint8_t> encode(const ObjectFile& o);
ObjectFile decode_object(const std::vector<uint8_t>& bytes);

std::vector<uint8_t> encode(const Image& img);
Image decode_image(const std::vector<uint8_t>& bytes);

std::string disassemble(const ObjectFile& o);
std::string disassemble(const Image& img);
std::string disassemble_code(const std::vector<Instruction>& code);

}  // namespace lmod
