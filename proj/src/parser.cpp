#include "lmod/parser.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace lmod {

namespace {

struct Parser {
    const std::vector<Token>& toks;
    size_t i = 0;

    const Token& peek(size_t k = 0) const {
        size_t j = std::min(i + k, toks.size() - 1);
        return toks[j];
    }
    const Token& cur() const { return peek(0); }
    bool at(Tok k) const { return cur().kind == k; }

    const Token& advance() { return toks[std::min(i++, toks.size() - 1)]; }

    const Token& expect(Tok k, const char* what) {
        if (!at(k))
            fail(Errc::SyntaxError,
                 std::string("expected ") + what + ", got " + tok_name(cur().kind),
                 cur().pos);
        return advance();
    }

    // ------------------------------------------------------------ types

    TypePtr type_primary() {
        Position p = cur().pos;
        if (at(Tok::LParen)) {
            advance();
            TypePtr t = type_expr();
            expect(Tok::RParen, "')'");
            return t;
        }
        if (at(Tok::UVar)) return TypeExpr::var(advance().text);
        if (at(Tok::Ident)) return TypeExpr::app(advance().text);
        fail(Errc::SyntaxError,
             std::string("expected a type, got ") + tok_name(cur().kind), p);
    }

    bool starts_type_primary() const {
        return at(Tok::LParen) || at(Tok::UVar) || at(Tok::Ident);
    }

    TypePtr type_app() {
        Position p = cur().pos;
        TypePtr head = type_primary();
        std::vector<TypePtr> args;
        while (starts_type_primary()) args.push_back(type_primary());
        if (args.empty()) return head;
        if (head->kind != TypeExpr::Kind::App || !head->args.empty())
            fail(Errc::SyntaxError, "type application head must be a constructor name", p);
        return TypeExpr::app(head->name, std::move(args));
    }

    TypePtr type_expr() {
        TypePtr d = type_app();
        if (at(Tok::Arrow)) {
            advance();
            return TypeExpr::arrow(std::move(d), type_expr());
        }
        return d;
    }

    // ------------------------------------------------------------ terms

    bool starts_term_primary() const {
        switch (cur().kind) {
            case Tok::Ident:
            case Tok::UVar:
            case Tok::Int:
            case Tok::Real:
            case Tok::Str:
            case Tok::LParen:
                return true;
            default:
                return false;
        }
    }

    TermPtr term_primary() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::Ident: {
                advance();
                if (t.text == "nil") return TermAst::nil(t.pos);
                return TermAst::constant(t.text, t.pos);
            }
            case Tok::UVar:
                advance();
                return TermAst::var(t.text, t.pos);
            case Tok::Int:
                advance();
                return TermAst::int_lit(t.ival, t.pos);
            case Tok::Real:
                advance();
                return TermAst::real_lit(t.rval, t.pos);
            case Tok::Str:
                advance();
                return TermAst::str_lit(t.text, t.pos);
            case Tok::LParen: {
                advance();
                TermPtr inner = term();
                expect(Tok::RParen, "')'");
                return inner;
            }
            default:
                fail(Errc::SyntaxError,
                     std::string("expected a term, got ") + tok_name(t.kind), t.pos);
        }
    }

    TermPtr term_app() {
        Position p = cur().pos;
        TermPtr t = term_primary();
        while (starts_term_primary()) t = TermAst::app(t, term_primary(), p);
        return t;
    }

    // '::' binds looser than application, right associative.
    TermPtr term() {
        Position p = cur().pos;
        TermPtr h = term_app();
        if (at(Tok::Cons)) {
            advance();
            return TermAst::cons(std::move(h), term(), p);
        }
        return h;
    }

    // ------------------------------------------------------------ goals

    GoalPtr goal_unit() {
        Position p = cur().pos;
        // `sigma X\ G` — the binder body extends as far right as possible.
        if (at(Tok::Ident) && cur().text == "sigma" && peek(1).kind == Tok::UVar &&
            peek(2).kind == Tok::Backslash) {
            advance();
            std::string v = advance().text;
            advance();  // backslash
            return GoalAst::exists(std::move(v), goal_or(), p);
        }
        if (at(Tok::LParen)) {
            advance();
            GoalPtr g = goal_or();
            expect(Tok::RParen, "')'");
            return g;
        }
        TermPtr t = term();
        if (t->kind == TermAst::Kind::Const && t->name == "true")
            return GoalAst::truth(p);
        auto sp = term_spine(t);
        if (sp.head->kind != TermAst::Kind::Const && sp.head->kind != TermAst::Kind::Var)
            fail(Errc::SyntaxError, "goal head must be a constant or variable", p);
        if (sp.head->kind == TermAst::Kind::Const && sp.head->name == "true" &&
            !sp.args.empty())
            fail(Errc::SyntaxError, "'true' takes no arguments", p);
        return GoalAst::atom_goal(std::move(t), p);
    }

    GoalPtr goal_and() {
        Position p = cur().pos;
        GoalPtr g = goal_unit();
        if (at(Tok::Comma)) {
            advance();
            return GoalAst::conj(std::move(g), goal_and(), p);
        }
        return g;
    }

    GoalPtr goal_or() {
        Position p = cur().pos;
        GoalPtr g = goal_and();
        if (at(Tok::Semicolon)) {
            advance();
            return GoalAst::disj(std::move(g), goal_or(), p);
        }
        return g;
    }

    // ------------------------------------------------------- declarations

    std::vector<std::string> name_list() {
        std::vector<std::string> names;
        names.push_back(expect(Tok::Ident, "an identifier").text);
        while (at(Tok::Comma)) {
            advance();
            names.push_back(expect(Tok::Ident, "an identifier").text);
        }
        return names;
    }

    KindDecl kind_decl() {
        Position p = cur().pos;
        advance();  // 'kind'
        KindDecl k;
        k.pos = p;
        k.names = name_list();
        expect(Tok::KwType, "'type'");
        while (at(Tok::Arrow)) {
            advance();
            expect(Tok::KwType, "'type'");
            ++k.arity;
        }
        expect(Tok::Period, "'.'");
        return k;
    }

    TypeDecl type_decl(DeclMode mode) {
        Position p = cur().pos;
        advance();  // 'type' / 'exportdef' / 'useonly'
        TypeDecl d;
        d.pos = p;
        d.mode = mode;
        d.names = name_list();
        d.ty = type_expr();
        expect(Tok::Period, "'.'");
        return d;
    }

    ClauseAst clause() {
        Position p = cur().pos;
        ClauseAst c;
        c.pos = p;
        c.head = term();
        auto sp = term_spine(c.head);
        if (sp.head->kind != TermAst::Kind::Const)
            fail(Errc::SyntaxError, "clause head must start with a constant", p);
        if (at(Tok::Turnstile)) {
            advance();
            c.body = goal_or();
        }
        expect(Tok::Period, "'.'");
        return c;
    }
};

}  // namespace

ModuleAst parse_module(const std::vector<Token>& toks) {
    Parser ps{toks};
    ModuleAst m;
    m.pos = ps.cur().pos;
    ps.expect(Tok::KwModule, "'module'");
    m.name = ps.expect(Tok::Ident, "a module name").text;
    ps.expect(Tok::Period, "'.'");

    while (!ps.at(Tok::End)) {
        switch (ps.cur().kind) {
            case Tok::KwModule:
                fail(Errc::DuplicateHeader, "duplicate 'module' header", ps.cur().pos);
            case Tok::KwSig:
                fail(Errc::SyntaxError, "'sig' header in a module file", ps.cur().pos);
            case Tok::KwAccumulate: {
                ps.advance();
                auto names = ps.name_list();
                ps.expect(Tok::Period, "'.'");
                m.accumulates.insert(m.accumulates.end(), names.begin(), names.end());
                break;
            }
            case Tok::KwAccumSig:
            case Tok::KwUseSig: {
                SigInclude mode = ps.at(Tok::KwAccumSig) ? SigInclude::AccumSig
                                                         : SigInclude::UseSig;
                Position p = ps.advance().pos;
                for (auto& n : ps.name_list())
                    m.accumSigs.push_back(SigIncludeDecl{n, mode, p});
                ps.expect(Tok::Period, "'.'");
                break;
            }
            case Tok::KwKind:
                m.kinds.push_back(ps.kind_decl());
                break;
            case Tok::KwType:
                m.types.push_back(ps.type_decl(DeclMode::Plain));
                break;
            case Tok::KwExportdef:
                m.types.push_back(ps.type_decl(DeclMode::Exportdef));
                break;
            case Tok::KwUseonly:
                m.types.push_back(ps.type_decl(DeclMode::Useonly));
                break;
            default:
                m.clauses.push_back(ps.clause());
        }
    }
    return m;
}

SignatureAst parse_signature(const std::vector<Token>& toks) {
    Parser ps{toks};
    SignatureAst s;
    s.pos = ps.cur().pos;
    ps.expect(Tok::KwSig, "'sig'");
    s.name = ps.expect(Tok::Ident, "a signature name").text;
    ps.expect(Tok::Period, "'.'");

    while (!ps.at(Tok::End)) {
        switch (ps.cur().kind) {
            case Tok::KwSig:
                fail(Errc::DuplicateHeader, "duplicate 'sig' header", ps.cur().pos);
            case Tok::KwModule:
                fail(Errc::SyntaxError, "'module' header in a signature file", ps.cur().pos);
            case Tok::KwAccumulate:
                fail(Errc::ClauseInSignature,
                     "'accumulate' is not allowed in a signature", ps.cur().pos);
            case Tok::KwAccumSig:
            case Tok::KwUseSig: {
                SigInclude mode = ps.at(Tok::KwAccumSig) ? SigInclude::AccumSig
                                                         : SigInclude::UseSig;
                Position p = ps.advance().pos;
                for (auto& n : ps.name_list())
                    s.accumSigs.push_back(SigIncludeDecl{n, mode, p});
                ps.expect(Tok::Period, "'.'");
                break;
            }
            case Tok::KwKind:
                s.kinds.push_back(ps.kind_decl());
                break;
            case Tok::KwType:
                s.types.push_back(ps.type_decl(DeclMode::Plain));
                break;
            case Tok::KwExportdef:
                s.types.push_back(ps.type_decl(DeclMode::Exportdef));
                break;
            case Tok::KwUseonly:
                s.types.push_back(ps.type_decl(DeclMode::Useonly));
                break;
            default:
                fail(Errc::ClauseInSignature,
                     "clauses are not allowed in a signature", ps.cur().pos);
        }
    }
    return s;
}

namespace {

void collect_free_vars(const GoalPtr& g, std::set<std::string>& bound,
                       std::vector<std::string>& out) {
    switch (g->kind) {
        case GoalAst::Kind::True:
            return;
        case GoalAst::Kind::Atom: {
            // Walk the term left to right for first-occurrence order.
            std::function<void(const TermPtr&)> walk = [&](const TermPtr& t) {
                switch (t->kind) {
                    case TermAst::Kind::Var:
                        if (!bound.count(t->name) &&
                            std::find(out.begin(), out.end(), t->name) == out.end())
                            out.push_back(t->name);
                        return;
                    case TermAst::Kind::App:
                    case TermAst::Kind::ListCons:
                        walk(t->fn);
                        walk(t->arg);
                        return;
                    default:
                        return;
                }
            };
            walk(g->atom);
            return;
        }
        case GoalAst::Kind::And:
        case GoalAst::Kind::Or:
            collect_free_vars(g->left, bound, out);
            collect_free_vars(g->right, bound, out);
            return;
        case GoalAst::Kind::Exists: {
            bool wasBound = bound.count(g->bound) > 0;
            bound.insert(g->bound);
            collect_free_vars(g->body, bound, out);
            if (!wasBound) bound.erase(g->bound);
            return;
        }
    }
}

}  // namespace

ParsedGoal parse_goal(std::string_view text) {
    auto toks = tokenize(text);
    Parser ps{toks};
    ParsedGoal pg;
    pg.goal = ps.goal_or();
    ps.expect(Tok::Period, "'.'");
    if (!ps.at(Tok::End))
        fail(Errc::SyntaxError, "trailing input after goal", ps.cur().pos);
    std::set<std::string> bound;
    collect_free_vars(pg.goal, bound, pg.freeVars);
    return pg;
}

ModuleAst parse_module_text(std::string_view text) {
    return parse_module(tokenize(text));
}

SignatureAst parse_signature_text(std::string_view text) {
    return parse_signature(tokenize(text));
}

}  // namespace lmod
