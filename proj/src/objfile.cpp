#include "lmod/objfile.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "lmod/ast.hpp"

namespace lmod {

const char* op_name(Op op) {
    switch (op) {
        case Op::TryMeElse: return "try_me_else";
        case Op::RetryMeElse: return "retry_me_else";
        case Op::TrustMe: return "trust_me";
        case Op::Try: return "try";
        case Op::Retry: return "retry";
        case Op::Trust: return "trust";
        case Op::TryElse: return "try_else";
        case Op::RetryElse: return "retry_else";
        case Op::SwitchOnTerm: return "switch_on_term";
        case Op::SwitchOnConstant: return "switch_on_constant";
        case Op::SwitchOnStructure: return "switch_on_structure";
        case Op::Call: return "call";
        case Op::Execute: return "execute";
        case Op::Proceed: return "proceed";
        case Op::Allocate: return "allocate";
        case Op::Deallocate: return "deallocate";
        case Op::Jump: return "jump";
        case Op::Fail: return "fail";
        case Op::Halt: return "halt";
        case Op::GetVariable: return "get_variable";
        case Op::GetValue: return "get_value";
        case Op::GetConstant: return "get_constant";
        case Op::GetInteger: return "get_integer";
        case Op::GetReal: return "get_real";
        case Op::GetString: return "get_string";
        case Op::GetStructure: return "get_structure";
        case Op::GetList: return "get_list";
        case Op::PutVariable: return "put_variable";
        case Op::PutValue: return "put_value";
        case Op::PutConstant: return "put_constant";
        case Op::PutInteger: return "put_integer";
        case Op::PutReal: return "put_real";
        case Op::PutString: return "put_string";
        case Op::PutStructure: return "put_structure";
        case Op::PutList: return "put_list";
        case Op::UnifyVariable: return "unify_variable";
        case Op::UnifyValue: return "unify_value";
        case Op::UnifyConstant: return "unify_constant";
        case Op::UnifyInteger: return "unify_integer";
        case Op::UnifyReal: return "unify_real";
        case Op::UnifyString: return "unify_string";
        case Op::UnifyVoid: return "unify_void";
        case Op::SetVariable: return "set_variable";
        case Op::SetValue: return "set_value";
        case Op::SetConstant: return "set_constant";
        case Op::SetInteger: return "set_integer";
        case Op::SetVoid: return "set_void";
    }
    return "?";
}

Instruction ins_label(Op op, uint32_t l) {
    Instruction i;
    i.op = op;
    i.lab1 = l;
    return i;
}
Instruction ins_simple(Op op) {
    Instruction i;
    i.op = op;
    return i;
}

// ----------------------------------------------------------------- writer

namespace {

constexpr uint8_t kLastOp = static_cast<uint8_t>(Op::SetVoid);

struct Writer {
    std::vector<uint8_t> out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        for (int i = 0; i < 2; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void i64(long long v) { u64(static_cast<uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    void cref(const ConstRef& c) {
        u8(static_cast<uint8_t>(c.space));
        u32(c.index);
    }
    void reg(const RegRef& r) {
        u8(static_cast<uint8_t>(r.kind));
        u32(r.index);
    }
};

struct Reader {
    const std::vector<uint8_t>& in;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > in.size()) fail(Errc::Truncated, "unexpected end of file");
    }
    uint8_t u8() {
        need(1);
        return in[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = 0;
        for (int i = 0; i < 2; ++i) v |= static_cast<uint16_t>(in[pos++]) << (8 * i);
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(in[pos++]) << (8 * i);
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[pos++]) << (8 * i);
        return v;
    }
    long long i64() { return static_cast<long long>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s(in.begin() + pos, in.begin() + pos + n);
        pos += n;
        return s;
    }
    ConstRef cref() {
        uint8_t sp = u8();
        if (sp > static_cast<uint8_t>(Space::Runtime))
            fail(Errc::BadFormat, "bad constant-reference space " + std::to_string(sp));
        ConstRef c;
        c.space = static_cast<Space>(sp);
        c.index = u32();
        return c;
    }
    RegRef reg() {
        uint8_t k = u8();
        if (k > 1) fail(Errc::BadFormat, "bad register kind");
        RegRef r;
        r.kind = static_cast<RegKind>(k);
        r.index = u32();
        return r;
    }
    void done() const {
        if (pos != in.size()) fail(Errc::BadFormat, "trailing bytes after payload");
    }
};

void write_instruction(Writer& w, const Instruction& ins) {
    w.u8(static_cast<uint8_t>(ins.op));
    switch (ins.op) {
        case Op::TryMeElse:
        case Op::RetryMeElse:
        case Op::Try:
        case Op::Retry:
        case Op::Trust:
        case Op::Jump:
            w.u32(ins.lab1);
            break;
        case Op::TryElse:
        case Op::RetryElse:
            w.u32(ins.lab1);
            w.u32(ins.lab2);
            break;
        case Op::TrustMe:
        case Op::Proceed:
        case Op::Deallocate:
        case Op::Fail:
        case Op::Halt:
            break;
        case Op::SwitchOnTerm:
            w.u32(ins.lab1);
            w.u32(ins.lab2);
            w.u32(ins.lab3);
            w.u32(ins.lab4);
            break;
        case Op::SwitchOnConstant:
        case Op::SwitchOnStructure:
            w.u32(static_cast<uint32_t>(ins.table.size()));
            for (auto& e : ins.table) {
                w.cref(e.symbol);
                if (ins.op == Op::SwitchOnStructure) w.u32(e.arity);
                w.u32(e.target);
            }
            break;
        case Op::Call:
        case Op::Execute:
            w.u8(static_cast<uint8_t>(ins.call.kind));
            if (ins.call.kind == CallKind::Pred)
                w.cref(ins.call.pred);
            else
                w.u32(ins.call.offset);
            w.u32(ins.arity);
            break;
        case Op::Allocate:
        case Op::UnifyVoid:
        case Op::SetVoid:
            w.u32(ins.arity);
            break;
        case Op::GetVariable:
        case Op::GetValue:
        case Op::PutVariable:
        case Op::PutValue:
            w.reg(ins.reg);
            w.u32(ins.areg);
            break;
        case Op::GetConstant:
        case Op::PutConstant:
            w.cref(ins.cref);
            w.u32(ins.areg);
            break;
        case Op::GetInteger:
        case Op::PutInteger:
            w.i64(ins.ival);
            w.u32(ins.areg);
            break;
        case Op::GetReal:
        case Op::PutReal:
            w.f64(ins.rval);
            w.u32(ins.areg);
            break;
        case Op::GetString:
        case Op::PutString:
            w.str(ins.sval);
            w.u32(ins.areg);
            break;
        case Op::GetStructure:
        case Op::PutStructure:
            w.cref(ins.cref);
            w.u32(ins.arity);
            w.u32(ins.areg);
            break;
        case Op::GetList:
        case Op::PutList:
            w.u32(ins.areg);
            break;
        case Op::UnifyVariable:
        case Op::UnifyValue:
        case Op::SetVariable:
        case Op::SetValue:
            w.reg(ins.reg);
            break;
        case Op::UnifyConstant:
        case Op::SetConstant:
            w.cref(ins.cref);
            break;
        case Op::UnifyInteger:
        case Op::SetInteger:
            w.i64(ins.ival);
            break;
        case Op::UnifyReal:
            w.f64(ins.rval);
            break;
        case Op::UnifyString:
            w.str(ins.sval);
            break;
    }
}

Instruction read_instruction(Reader& r) {
    uint8_t opb = r.u8();
    if (opb > kLastOp) fail(Errc::BadFormat, "bad opcode " + std::to_string(opb));
    Instruction ins;
    ins.op = static_cast<Op>(opb);
    switch (ins.op) {
        case Op::TryMeElse:
        case Op::RetryMeElse:
        case Op::Try:
        case Op::Retry:
        case Op::Trust:
        case Op::Jump:
            ins.lab1 = r.u32();
            break;
        case Op::TryElse:
        case Op::RetryElse:
            ins.lab1 = r.u32();
            ins.lab2 = r.u32();
            break;
        case Op::TrustMe:
        case Op::Proceed:
        case Op::Deallocate:
        case Op::Fail:
        case Op::Halt:
            break;
        case Op::SwitchOnTerm:
            ins.lab1 = r.u32();
            ins.lab2 = r.u32();
            ins.lab3 = r.u32();
            ins.lab4 = r.u32();
            break;
        case Op::SwitchOnConstant:
        case Op::SwitchOnStructure: {
            uint32_t n = r.u32();
            ins.table.reserve(n);
            for (uint32_t i = 0; i < n; ++i) {
                SwitchEntry e;
                e.symbol = r.cref();
                if (ins.op == Op::SwitchOnStructure) e.arity = r.u32();
                e.target = r.u32();
                ins.table.push_back(std::move(e));
            }
            break;
        }
        case Op::Call:
        case Op::Execute: {
            uint8_t k = r.u8();
            if (k > static_cast<uint8_t>(CallKind::Offset))
                fail(Errc::BadFormat, "bad call-target kind");
            ins.call.kind = static_cast<CallKind>(k);
            if (ins.call.kind == CallKind::Pred)
                ins.call.pred = r.cref();
            else
                ins.call.offset = r.u32();
            ins.arity = r.u32();
            break;
        }
        case Op::Allocate:
        case Op::UnifyVoid:
        case Op::SetVoid:
            ins.arity = r.u32();
            break;
        case Op::GetVariable:
        case Op::GetValue:
        case Op::PutVariable:
        case Op::PutValue:
            ins.reg = r.reg();
            ins.areg = r.u32();
            break;
        case Op::GetConstant:
        case Op::PutConstant:
            ins.cref = r.cref();
            ins.areg = r.u32();
            break;
        case Op::GetInteger:
        case Op::PutInteger:
            ins.ival = r.i64();
            ins.areg = r.u32();
            break;
        case Op::GetReal:
        case Op::PutReal:
            ins.rval = r.f64();
            ins.areg = r.u32();
            break;
        case Op::GetString:
        case Op::PutString:
            ins.sval = r.str();
            ins.areg = r.u32();
            break;
        case Op::GetStructure:
        case Op::PutStructure:
            ins.cref = r.cref();
            ins.arity = r.u32();
            ins.areg = r.u32();
            break;
        case Op::GetList:
        case Op::PutList:
            ins.areg = r.u32();
            break;
        case Op::UnifyVariable:
        case Op::UnifyValue:
        case Op::SetVariable:
        case Op::SetValue:
            ins.reg = r.reg();
            break;
        case Op::UnifyConstant:
        case Op::SetConstant:
            ins.cref = r.cref();
            break;
        case Op::UnifyInteger:
        case Op::SetInteger:
            ins.ival = r.i64();
            break;
        case Op::UnifyReal:
            ins.rval = r.f64();
            break;
        case Op::UnifyString:
            ins.sval = r.str();
            break;
    }
    return ins;
}

// Bounds validation shared by both decoders.

void check_label(uint32_t lab, size_t codeLen, const char* what) {
    if (lab != kNoLabel && lab >= codeLen)
        fail(Errc::IndexOutOfRange,
             std::string(what) + " offset " + std::to_string(lab) + " out of range");
}

void check_cref_obj(const ConstRef& c, size_t nGlobals, size_t nLocals) {
    switch (c.space) {
        case Space::Builtin:
            if (c.index > kTrueConst)
                fail(Errc::IndexOutOfRange, "builtin constant index out of range");
            break;
        case Space::Global:
            if (c.index >= nGlobals)
                fail(Errc::IndexOutOfRange, "global constant index out of range");
            break;
        case Space::Local:
            if (c.index >= nLocals)
                fail(Errc::IndexOutOfRange, "local constant index out of range");
            break;
        case Space::Runtime:
            fail(Errc::BadFormat, "runtime constant reference in an object file");
    }
}

void check_instruction_obj(const Instruction& ins, const ObjectFile& o) {
    size_t n = o.code.size();
    check_label(ins.lab1, n, "label");
    check_label(ins.lab2, n, "label");
    check_label(ins.lab3, n, "label");
    check_label(ins.lab4, n, "label");
    for (auto& e : ins.table) {
        check_cref_obj(e.symbol, o.globals.size(), o.locals.size());
        check_label(e.target, n, "switch target");
    }
    switch (ins.op) {
        case Op::GetConstant:
        case Op::PutConstant:
        case Op::UnifyConstant:
        case Op::SetConstant:
        case Op::GetStructure:
        case Op::PutStructure:
            check_cref_obj(ins.cref, o.globals.size(), o.locals.size());
            break;
        case Op::Call:
        case Op::Execute:
            switch (ins.call.kind) {
                case CallKind::Label:
                    check_label(ins.call.offset, n, "call target");
                    break;
                case CallKind::RedefIdx:
                    if (ins.call.offset >= o.redefinable.size())
                        fail(Errc::IndexOutOfRange, "redefinable index out of range");
                    break;
                case CallKind::Pred:
                    check_cref_obj(ins.call.pred, o.globals.size(), o.locals.size());
                    break;
                case CallKind::Offset:
                    fail(Errc::BadFormat, "patched call in an object file");
            }
            break;
        default:
            break;
    }
}

}  // namespace

std::vector<uint8_t> encode(const ObjectFile& o) {
    Writer w;
    w.out.insert(w.out.end(), {'L', 'M', 'O', '1'});
    w.u32(1);  // version
    w.str(o.moduleName);
    w.u64(o.sigHash);
    w.u32(static_cast<uint32_t>(o.globals.size()));
    for (auto& g : o.globals) {
        w.str(g.name);
        w.str(g.tyEnc);
    }
    w.u32(static_cast<uint32_t>(o.locals.size()));
    for (auto& l : o.locals) {
        w.u8(l.hasName ? 1 : 0);
        if (l.hasName) w.str(l.name);
        w.str(l.tyEnc);
    }
    w.u32(static_cast<uint32_t>(o.accums.size()));
    for (auto& a : o.accums) {
        w.str(a.moduleName);
        w.u64(a.sigHash);
        w.u32(static_cast<uint32_t>(a.entries.size()));
        for (auto& [n, c] : a.entries) {
            w.str(n);
            w.cref(c);
        }
    }
    w.u32(static_cast<uint32_t>(o.redefinable.size()));
    for (auto& c : o.redefinable) w.cref(c);
    w.u32(static_cast<uint32_t>(o.code.size()));
    for (auto& ins : o.code) write_instruction(w, ins);
    w.u32(static_cast<uint32_t>(o.entries.size()));
    for (auto& [c, off] : o.entries) {
        w.cref(c);
        w.u32(off);
    }
    return std::move(w.out);
}

ObjectFile decode_object(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), "LMO1", 4) != 0)
        fail(Errc::BadMagic, "not an object file (bad magic)");
    r.pos = 4;
    uint32_t version = r.u32();
    if (version != 1)
        fail(Errc::UnsupportedVersion,
             "unsupported object-file version " + std::to_string(version));
    ObjectFile o;
    o.moduleName = r.str();
    o.sigHash = r.u64();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        ConstEntry e;
        e.name = r.str();
        e.hasName = true;
        e.tyEnc = r.str();
        if (e.name.empty())
            fail(Errc::BadFormat, "global constant entry with empty name");
        o.globals.push_back(std::move(e));
    }
    n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        ConstEntry e;
        uint8_t flag = r.u8();
        if (flag > 1) fail(Errc::BadFormat, "bad local-name flag");
        e.hasName = flag == 1;
        if (e.hasName) e.name = r.str();
        e.tyEnc = r.str();
        o.locals.push_back(std::move(e));
    }
    n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        RenamingMap m;
        m.moduleName = r.str();
        m.sigHash = r.u64();
        uint32_t k = r.u32();
        for (uint32_t j = 0; j < k; ++j) {
            std::string nm = r.str();
            ConstRef c = r.cref();
            m.entries.emplace_back(std::move(nm), c);
        }
        o.accums.push_back(std::move(m));
    }
    n = r.u32();
    for (uint32_t i = 0; i < n; ++i) o.redefinable.push_back(r.cref());
    n = r.u32();
    o.code.reserve(n);
    for (uint32_t i = 0; i < n; ++i) o.code.push_back(read_instruction(r));
    n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        ConstRef c = r.cref();
        uint32_t off = r.u32();
        o.entries.emplace_back(c, off);
    }
    r.done();

    for (auto& c : o.redefinable) check_cref_obj(c, o.globals.size(), o.locals.size());
    for (auto& [c, off] : o.entries) {
        check_cref_obj(c, o.globals.size(), o.locals.size());
        check_label(off, o.code.size(), "entry");
    }
    for (auto& a : o.accums)
        for (auto& [nm, c] : a.entries)
            check_cref_obj(c, o.globals.size(), o.locals.size());
    for (auto& ins : o.code) check_instruction_obj(ins, o);
    return o;
}

std::vector<uint8_t> encode(const Image& img) {
    Writer w;
    w.out.insert(w.out.end(), {'L', 'M', 'X', '1'});
    w.u32(1);
    w.str(img.rootName);
    w.u32(static_cast<uint32_t>(img.consts.size()));
    for (auto& c : img.consts) {
        w.str(c.name);
        w.str(c.tyEnc);
        w.u16(c.level);
    }
    w.u32(static_cast<uint32_t>(img.code.size()));
    for (auto& ins : img.code) write_instruction(w, ins);
    w.u32(static_cast<uint32_t>(img.entries.size()));
    for (auto& [idx, off] : img.entries) {
        w.u32(idx);
        w.u32(off);
    }
    w.u32(img.failEntry);
    return std::move(w.out);
}

Image decode_image(const std::vector<uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), "LMX1", 4) != 0)
        fail(Errc::BadMagic, "not a linked image (bad magic)");
    r.pos = 4;
    uint32_t version = r.u32();
    if (version != 1)
        fail(Errc::UnsupportedVersion,
             "unsupported image version " + std::to_string(version));
    Image img;
    img.rootName = r.str();
    uint32_t n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        ImageConst c;
        c.name = r.str();
        c.tyEnc = r.str();
        c.level = r.u16();
        img.consts.push_back(std::move(c));
    }
    n = r.u32();
    img.code.reserve(n);
    for (uint32_t i = 0; i < n; ++i) img.code.push_back(read_instruction(r));
    n = r.u32();
    for (uint32_t i = 0; i < n; ++i) {
        uint32_t idx = r.u32();
        uint32_t off = r.u32();
        img.entries.emplace_back(idx, off);
    }
    img.failEntry = r.u32();
    r.done();

    auto check_rt = [&](const ConstRef& c) {
        if (c.space != Space::Runtime)
            fail(Errc::BadFormat, "unrelocated constant reference in an image");
        if (c.index >= img.consts.size())
            fail(Errc::IndexOutOfRange, "runtime constant index out of range");
    };
    for (auto& ins : img.code) {
        check_label(ins.lab1, img.code.size(), "label");
        check_label(ins.lab2, img.code.size(), "label");
        check_label(ins.lab3, img.code.size(), "label");
        check_label(ins.lab4, img.code.size(), "label");
        for (auto& e : ins.table) {
            check_rt(e.symbol);
            check_label(e.target, img.code.size(), "switch target");
        }
        switch (ins.op) {
            case Op::GetConstant:
            case Op::PutConstant:
            case Op::UnifyConstant:
            case Op::SetConstant:
            case Op::GetStructure:
            case Op::PutStructure:
                check_rt(ins.cref);
                break;
            case Op::Call:
            case Op::Execute:
                if (ins.call.kind != CallKind::Offset)
                    fail(Errc::BadFormat, "unpatched call in an image");
                check_label(ins.call.offset, img.code.size(), "call target");
                break;
            default:
                break;
        }
    }
    for (auto& [idx, off] : img.entries) {
        if (idx >= img.consts.size())
            fail(Errc::IndexOutOfRange, "entry constant index out of range");
        check_label(off, img.code.size(), "entry");
    }
    check_label(img.failEntry, img.code.size(), "fail entry");
    return img;
}

// ----------------------------------------------------------- disassembler

namespace {

std::string show_cref(const ConstRef& c) {
    switch (c.space) {
        case Space::Builtin: return c.index == kNilConst ? "nil" : "true";
        case Space::Global: return "g" + std::to_string(c.index);
        case Space::Local: return "l" + std::to_string(c.index);
        case Space::Runtime: return "c" + std::to_string(c.index);
    }
    return "?";
}

std::string show_label(uint32_t l) {
    return l == kNoLabel ? "fail" : "L" + std::to_string(l);
}

std::string show_reg(const RegRef& r) {
    return (r.kind == RegKind::Temp ? "X" : "Y") + std::to_string(r.index);
}

std::string show_instruction(const Instruction& ins) {
    std::string s = op_name(ins.op);
    auto arg = [&](const std::string& a) { s += (s == op_name(ins.op) ? " " : ", ") + a; };
    switch (ins.op) {
        case Op::TryMeElse:
        case Op::RetryMeElse:
        case Op::Try:
        case Op::Retry:
        case Op::Trust:
        case Op::Jump:
            arg(show_label(ins.lab1));
            break;
        case Op::TryElse:
        case Op::RetryElse:
            arg(show_label(ins.lab1));
            arg(show_label(ins.lab2));
            break;
        case Op::SwitchOnTerm:
            arg(show_label(ins.lab1));
            arg(show_label(ins.lab2));
            arg(show_label(ins.lab3));
            arg(show_label(ins.lab4));
            break;
        case Op::SwitchOnConstant:
        case Op::SwitchOnStructure: {
            std::string t = "[";
            for (size_t i = 0; i < ins.table.size(); ++i) {
                if (i) t += ", ";
                t += "(" + show_cref(ins.table[i].symbol);
                if (ins.op == Op::SwitchOnStructure)
                    t += "/" + std::to_string(ins.table[i].arity);
                t += "," + show_label(ins.table[i].target) + ")";
            }
            t += "]";
            arg(t);
            break;
        }
        case Op::Call:
        case Op::Execute: {
            std::string t;
            switch (ins.call.kind) {
                case CallKind::Label: t = show_label(ins.call.offset); break;
                case CallKind::RedefIdx: t = "redef#" + std::to_string(ins.call.offset); break;
                case CallKind::Pred: t = show_cref(ins.call.pred); break;
                case CallKind::Offset: t = show_label(ins.call.offset); break;
            }
            arg(t + "/" + std::to_string(ins.arity));
            break;
        }
        case Op::Allocate:
        case Op::UnifyVoid:
        case Op::SetVoid:
            arg(std::to_string(ins.arity));
            break;
        case Op::GetVariable:
        case Op::GetValue:
        case Op::PutVariable:
        case Op::PutValue:
            arg(show_reg(ins.reg));
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::GetConstant:
        case Op::PutConstant:
            arg(show_cref(ins.cref));
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::GetInteger:
        case Op::PutInteger:
            arg(std::to_string(ins.ival));
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::GetReal:
        case Op::PutReal:
            arg(format_real(ins.rval));
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::GetString:
        case Op::PutString:
            arg(quote_string(ins.sval));
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::GetStructure:
        case Op::PutStructure:
            arg(show_cref(ins.cref) + "/" + std::to_string(ins.arity));
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::GetList:
        case Op::PutList:
            arg("A" + std::to_string(ins.areg));
            break;
        case Op::UnifyVariable:
        case Op::UnifyValue:
        case Op::SetVariable:
        case Op::SetValue:
            arg(show_reg(ins.reg));
            break;
        case Op::UnifyConstant:
        case Op::SetConstant:
            arg(show_cref(ins.cref));
            break;
        case Op::UnifyInteger:
        case Op::SetInteger:
            arg(std::to_string(ins.ival));
            break;
        case Op::UnifyReal:
            arg(format_real(ins.rval));
            break;
        case Op::UnifyString:
            arg(quote_string(ins.sval));
            break;
        default:
            break;
    }
    return s;
}

}  // namespace

std::string disassemble_code(const std::vector<Instruction>& code) {
    std::ostringstream os;
    for (size_t i = 0; i < code.size(); ++i) {
        std::string lbl = "L" + std::to_string(i) + ":";
        os << lbl;
        for (size_t k = lbl.size(); k < 8; ++k) os << ' ';
        os << show_instruction(code[i]) << "\n";
    }
    return os.str();
}

std::string disassemble(const ObjectFile& o) {
    std::ostringstream os;
    os << "object " << o.moduleName << " (sig " << std::hex << o.sigHash << std::dec
       << ")\n";
    os << "globals:\n";
    for (size_t i = 0; i < o.globals.size(); ++i)
        os << "  g" << i << " = " << o.globals[i].name << " : " << o.globals[i].tyEnc
           << "\n";
    os << "locals:\n";
    for (size_t i = 0; i < o.locals.size(); ++i)
        os << "  l" << i << " = " << (o.locals[i].hasName ? o.locals[i].name : "_")
           << " : " << o.locals[i].tyEnc << "\n";
    os << "accumulates:\n";
    for (auto& a : o.accums) {
        os << "  " << a.moduleName << " (sig " << std::hex << a.sigHash << std::dec
           << "):";
        for (auto& [n, c] : a.entries) os << " " << n << "->" << show_cref(c);
        os << "\n";
    }
    os << "redefinable:";
    for (auto& c : o.redefinable) os << " " << show_cref(c);
    os << "\nentries:\n";
    for (auto& [c, off] : o.entries)
        os << "  " << show_cref(c) << " -> L" << off << "\n";
    os << "code:\n" << disassemble_code(o.code);
    return os.str();
}

std::string disassemble(const Image& img) {
    std::ostringstream os;
    os << "image " << img.rootName << "\n";
    os << "constants:\n";
    for (size_t i = 0; i < img.consts.size(); ++i)
        os << "  c" << i << " = "
           << (img.consts[i].name.empty() ? "<hidden>" : img.consts[i].name) << " : "
           << img.consts[i].tyEnc << " @" << img.consts[i].level << "\n";
    os << "entries:\n";
    for (auto& [idx, off] : img.entries) {
        os << "  c" << idx;
        if (!img.consts[idx].name.empty()) os << " (" << img.consts[idx].name << ")";
        os << " -> L" << off << "\n";
    }
    os << "code:\n" << disassemble_code(img.code);
    return os.str();
}

}  // namespace lmod
