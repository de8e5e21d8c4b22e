#include "lmod/ast.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

namespace lmod {

// ---------------------------------------------------------------- types

TypePtr TypeExpr::var(std::string n) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = Kind::Var;
    t->name = std::move(n);
    return t;
}

TypePtr TypeExpr::app(std::string n, std::vector<TypePtr> as) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = Kind::App;
    t->name = std::move(n);
    t->args = std::move(as);
    return t;
}

TypePtr TypeExpr::arrow(TypePtr d, TypePtr c) {
    auto t = std::make_shared<TypeExpr>();
    t->kind = Kind::Arrow;
    t->dom = std::move(d);
    t->cod = std::move(c);
    return t;
}

bool type_equal(const TypePtr& a, const TypePtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case TypeExpr::Kind::Var:
            return a->name == b->name;
        case TypeExpr::Kind::App: {
            if (a->name != b->name || a->args.size() != b->args.size()) return false;
            for (size_t i = 0; i < a->args.size(); ++i)
                if (!type_equal(a->args[i], b->args[i])) return false;
            return true;
        }
        case TypeExpr::Kind::Arrow:
            return type_equal(a->dom, b->dom) && type_equal(a->cod, b->cod);
    }
    return false;
}

TypePtr target_type(TypePtr t) {
    while (t && t->kind == TypeExpr::Kind::Arrow) t = t->cod;
    return t;
}

int type_arity(const TypePtr& t) {
    int n = 0;
    const TypeExpr* p = t.get();
    while (p && p->kind == TypeExpr::Kind::Arrow) {
        ++n;
        p = p->cod.get();
    }
    return n;
}

namespace {

void canon_rec(const TypePtr& t, std::map<std::string, int>& vars, std::string& out) {
    switch (t->kind) {
        case TypeExpr::Kind::Var: {
            auto it = vars.find(t->name);
            int id;
            if (it == vars.end()) {
                id = static_cast<int>(vars.size());
                vars.emplace(t->name, id);
            } else {
                id = it->second;
            }
            out += '#';
            out += std::to_string(id);
            break;
        }
        case TypeExpr::Kind::App: {
            out += t->name;
            if (!t->args.empty()) {
                out += '[';
                for (size_t i = 0; i < t->args.size(); ++i) {
                    if (i) out += ',';
                    canon_rec(t->args[i], vars, out);
                }
                out += ']';
            }
            break;
        }
        case TypeExpr::Kind::Arrow:
            out += '(';
            canon_rec(t->dom, vars, out);
            out += '>';
            canon_rec(t->cod, vars, out);
            out += ')';
            break;
    }
}

// Parenthesization: arrows are right associative, application binds tighter.
void type_str(const TypePtr& t, std::string& out, bool arrowArg, bool appArg) {
    switch (t->kind) {
        case TypeExpr::Kind::Var:
            out += t->name;
            break;
        case TypeExpr::Kind::App:
            if (appArg && !t->args.empty()) out += '(';
            out += t->name;
            for (auto& a : t->args) {
                out += ' ';
                type_str(a, out, true, true);
            }
            if (appArg && !t->args.empty()) out += ')';
            break;
        case TypeExpr::Kind::Arrow:
            if (arrowArg || appArg) out += '(';
            type_str(t->dom, out, true, false);
            out += " -> ";
            type_str(t->cod, out, false, false);
            if (arrowArg || appArg) out += ')';
            break;
    }
}

}  // namespace

std::string canon_type(const TypePtr& t) {
    std::map<std::string, int> vars;
    std::string out;
    canon_rec(t, vars, out);
    return out;
}

namespace {

// Grammar: ty := '#'<digits> | name ('[' ty (',' ty)* ']')? | '(' ty '>' ty ')'
TypePtr parse_canon(const std::string& s, size_t& i) {
    auto expect = [&](char c) {
        if (i >= s.size() || s[i] != c)
            fail(Errc::BadFormat, "bad type encoding '" + s + "'");
        ++i;
    };
    if (i >= s.size()) fail(Errc::BadFormat, "bad type encoding '" + s + "'");
    if (s[i] == '#') {
        ++i;
        size_t start = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (start == i) fail(Errc::BadFormat, "bad type encoding '" + s + "'");
        return TypeExpr::var("#" + s.substr(start, i - start));
    }
    if (s[i] == '(') {
        ++i;
        TypePtr d = parse_canon(s, i);
        expect('>');
        TypePtr c = parse_canon(s, i);
        expect(')');
        return TypeExpr::arrow(std::move(d), std::move(c));
    }
    size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_'))
        ++i;
    if (start == i) fail(Errc::BadFormat, "bad type encoding '" + s + "'");
    std::string name = s.substr(start, i - start);
    std::vector<TypePtr> args;
    if (i < s.size() && s[i] == '[') {
        ++i;
        args.push_back(parse_canon(s, i));
        while (i < s.size() && s[i] == ',') {
            ++i;
            args.push_back(parse_canon(s, i));
        }
        expect(']');
    }
    return TypeExpr::app(std::move(name), std::move(args));
}

}  // namespace

TypePtr decode_canon_type(const std::string& enc) {
    size_t i = 0;
    TypePtr t = parse_canon(enc, i);
    if (i != enc.size()) fail(Errc::BadFormat, "bad type encoding '" + enc + "'");
    return t;
}

std::string type_to_string(const TypePtr& t) {
    std::string out;
    type_str(t, out, false, false);
    return out;
}

const char* mode_name(DeclMode m) {
    switch (m) {
        case DeclMode::Plain: return "type";
        case DeclMode::Exportdef: return "exportdef";
        case DeclMode::Useonly: return "useonly";
    }
    return "type";
}

// ---------------------------------------------------------------- terms

TermPtr TermAst::constant(std::string n, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::Const;
    t->name = std::move(n);
    t->pos = p;
    return t;
}
TermPtr TermAst::var(std::string n, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::Var;
    t->name = std::move(n);
    t->pos = p;
    return t;
}
TermPtr TermAst::int_lit(long long v, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::IntLit;
    t->ival = v;
    t->pos = p;
    return t;
}
TermPtr TermAst::real_lit(double v, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::RealLit;
    t->rval = v;
    t->pos = p;
    return t;
}
TermPtr TermAst::str_lit(std::string v, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::StrLit;
    t->sval = std::move(v);
    t->pos = p;
    return t;
}
TermPtr TermAst::app(TermPtr f, TermPtr a, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::App;
    t->fn = std::move(f);
    t->arg = std::move(a);
    t->pos = p;
    return t;
}
TermPtr TermAst::nil(Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::ListNil;
    t->pos = p;
    return t;
}
TermPtr TermAst::cons(TermPtr h, TermPtr tl, Position p) {
    auto t = std::make_shared<TermAst>();
    t->kind = Kind::ListCons;
    t->fn = std::move(h);
    t->arg = std::move(tl);
    t->pos = p;
    return t;
}

TermSpine term_spine(TermPtr t) {
    TermSpine s;
    while (t->kind == TermAst::Kind::App) {
        s.args.push_back(t->arg);
        t = t->fn;
    }
    std::reverse(s.args.begin(), s.args.end());
    s.head = t;
    return s;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case TermAst::Kind::Const:
        case TermAst::Kind::Var:
            return a->name == b->name;
        case TermAst::Kind::IntLit: return a->ival == b->ival;
        case TermAst::Kind::RealLit: return a->rval == b->rval;
        case TermAst::Kind::StrLit: return a->sval == b->sval;
        case TermAst::Kind::App:
        case TermAst::Kind::ListCons:
            return term_equal(a->fn, b->fn) && term_equal(a->arg, b->arg);
        case TermAst::Kind::ListNil: return true;
    }
    return false;
}

std::string format_real(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    // Keep reals visually distinct from ints.
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos && s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

std::string quote_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

namespace {

// prec: 0 = top (cons allowed bare), 1 = application argument.
void term_str(const TermPtr& t, std::string& out, int prec) {
    switch (t->kind) {
        case TermAst::Kind::Const:
        case TermAst::Kind::Var:
            out += t->name;
            break;
        case TermAst::Kind::IntLit:
            out += std::to_string(t->ival);
            break;
        case TermAst::Kind::RealLit:
            out += format_real(t->rval);
            break;
        case TermAst::Kind::StrLit:
            out += quote_string(t->sval);
            break;
        case TermAst::Kind::ListNil:
            out += "nil";
            break;
        case TermAst::Kind::ListCons:
            if (prec >= 1) out += '(';
            term_str(t->fn, out, 1);
            out += " :: ";
            term_str(t->arg, out, 0);
            if (prec >= 1) out += ')';
            break;
        case TermAst::Kind::App: {
            if (prec >= 1) out += '(';
            auto sp = term_spine(t);
            term_str(sp.head, out, 1);
            for (auto& a : sp.args) {
                out += ' ';
                term_str(a, out, 1);
            }
            if (prec >= 1) out += ')';
            break;
        }
    }
}

// prec: 0 = or-level, 1 = and-level, 2 = unit.
void goal_str(const GoalPtr& g, std::string& out, int prec) {
    switch (g->kind) {
        case GoalAst::Kind::True:
            out += "true";
            break;
        case GoalAst::Kind::Atom:
            term_str(g->atom, out, prec >= 2 ? 0 : 0);
            break;
        case GoalAst::Kind::And:
            if (prec >= 2) out += '(';
            goal_str(g->left, out, 2);
            out += ", ";
            goal_str(g->right, out, 1);
            if (prec >= 2) out += ')';
            break;
        case GoalAst::Kind::Or:
            if (prec >= 1) out += '(';
            goal_str(g->left, out, 1);
            out += "; ";
            goal_str(g->right, out, 0);
            if (prec >= 1) out += ')';
            break;
        case GoalAst::Kind::Exists:
            if (prec >= 1) out += '(';
            out += "sigma ";
            out += g->bound;
            out += "\\ ";
            goal_str(g->body, out, 0);
            if (prec >= 1) out += ')';
            break;
    }
}

}  // namespace

std::string term_to_string(const TermPtr& t) {
    std::string out;
    term_str(t, out, 0);
    return out;
}

// ---------------------------------------------------------------- goals

GoalPtr GoalAst::truth(Position p) {
    auto g = std::make_shared<GoalAst>();
    g->kind = Kind::True;
    g->pos = p;
    return g;
}
GoalPtr GoalAst::atom_goal(TermPtr t, Position p) {
    auto g = std::make_shared<GoalAst>();
    g->kind = Kind::Atom;
    g->atom = std::move(t);
    g->pos = p;
    return g;
}
GoalPtr GoalAst::conj(GoalPtr a, GoalPtr b, Position p) {
    auto g = std::make_shared<GoalAst>();
    g->kind = Kind::And;
    g->left = std::move(a);
    g->right = std::move(b);
    g->pos = p;
    return g;
}
GoalPtr GoalAst::disj(GoalPtr a, GoalPtr b, Position p) {
    auto g = std::make_shared<GoalAst>();
    g->kind = Kind::Or;
    g->left = std::move(a);
    g->right = std::move(b);
    g->pos = p;
    return g;
}
GoalPtr GoalAst::exists(std::string v, GoalPtr body, Position p) {
    auto g = std::make_shared<GoalAst>();
    g->kind = Kind::Exists;
    g->bound = std::move(v);
    g->body = std::move(body);
    g->pos = p;
    return g;
}

bool goal_equal(const GoalPtr& a, const GoalPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
        case GoalAst::Kind::True: return true;
        case GoalAst::Kind::Atom: return term_equal(a->atom, b->atom);
        case GoalAst::Kind::And:
        case GoalAst::Kind::Or:
            return goal_equal(a->left, b->left) && goal_equal(a->right, b->right);
        case GoalAst::Kind::Exists:
            return a->bound == b->bound && goal_equal(a->body, b->body);
    }
    return false;
}

std::string goal_to_string(const GoalPtr& g) {
    std::string out;
    goal_str(g, out, 0);
    return out;
}

// --------------------------------------------------------------- clauses

bool clause_equal(const ClauseAst& a, const ClauseAst& b) {
    if (!term_equal(a.head, b.head)) return false;
    if (!a.body != !b.body) return false;
    return !a.body || goal_equal(a.body, b.body);
}

std::string clause_to_string(const ClauseAst& c) {
    std::string out = term_to_string(c.head);
    if (c.body) {
        out += " :- ";
        out += goal_to_string(c.body);
    }
    out += ".";
    return out;
}

// --------------------------------------------------- modules & signatures

namespace {

void decls_to_string(std::ostringstream& os, const std::vector<SigIncludeDecl>& incs,
                     const std::vector<KindDecl>& kinds, const std::vector<TypeDecl>& types) {
    for (auto& i : incs) {
        os << (i.mode == SigInclude::AccumSig ? "accum_sig " : "use_sig ") << i.name << ".\n";
    }
    for (auto& k : kinds) {
        os << "kind ";
        for (size_t i = 0; i < k.names.size(); ++i) os << (i ? ", " : "") << k.names[i];
        os << " type";
        for (int i = 0; i < k.arity; ++i) os << " -> type";
        os << ".\n";
    }
    for (auto& t : types) {
        os << mode_name(t.mode) << " ";
        for (size_t i = 0; i < t.names.size(); ++i) os << (i ? ", " : "") << t.names[i];
        os << " " << type_to_string(t.ty) << ".\n";
    }
}

}  // namespace

std::string module_to_string(const ModuleAst& m) {
    std::ostringstream os;
    os << "module " << m.name << ".\n";
    if (!m.accumulates.empty()) {
        os << "accumulate ";
        for (size_t i = 0; i < m.accumulates.size(); ++i)
            os << (i ? ", " : "") << m.accumulates[i];
        os << ".\n";
    }
    decls_to_string(os, m.accumSigs, m.kinds, m.types);
    for (auto& c : m.clauses) os << clause_to_string(c) << "\n";
    return os.str();
}

std::string signature_to_string(const SignatureAst& s) {
    std::ostringstream os;
    os << "sig " << s.name << ".\n";
    decls_to_string(os, s.accumSigs, s.kinds, s.types);
    return os.str();
}

}  // namespace lmod
