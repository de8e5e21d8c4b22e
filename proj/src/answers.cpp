#include "lmod/answers.hpp"

#include "lmod/ast.hpp"

namespace lmod {

AnswerTermPtr AnswerTerm::mk(Kind k) {
    auto t = std::make_shared<AnswerTerm>();
    t->kind = k;
    return t;
}

namespace {

// prec 1 = argument position (parenthesize compound forms).
void render(const AnswerTerm& t, std::string& out, int prec,
            std::map<long long, int>& vars) {
    switch (t.kind) {
        case AnswerTerm::Kind::Const:
            out += t.name;
            return;
        case AnswerTerm::Kind::Int:
            out += std::to_string(t.ival);
            return;
        case AnswerTerm::Kind::Real:
            out += format_real(t.rval);
            return;
        case AnswerTerm::Kind::Str:
            out += quote_string(t.sval);
            return;
        case AnswerTerm::Kind::Unbound: {
            auto it = vars.find(t.varKey);
            if (it == vars.end())
                it = vars.emplace(t.varKey, static_cast<int>(vars.size())).first;
            out += "_" + std::to_string(it->second);
            return;
        }
        case AnswerTerm::Kind::Nil:
            out += "[]";
            return;
        case AnswerTerm::Kind::Cons: {
            out += '[';
            const AnswerTerm* p = &t;
            bool first = true;
            while (p->kind == AnswerTerm::Kind::Cons) {
                if (!first) out += ", ";
                first = false;
                render(*p->args[0], out, 0, vars);
                p = p->args[1].get();
            }
            if (p->kind != AnswerTerm::Kind::Nil) {
                out += " | ";
                render(*p, out, 0, vars);
            }
            out += ']';
            return;
        }
        case AnswerTerm::Kind::App: {
            if (prec >= 1) out += '(';
            out += t.name;
            for (auto& a : t.args) {
                out += ' ';
                render(*a, out, 1, vars);
            }
            if (prec >= 1) out += ')';
            return;
        }
    }
}

}  // namespace

std::string answer_term_to_string(const AnswerTermPtr& t,
                                  std::map<long long, int>& varNames) {
    std::string out;
    render(*t, out, 0, varNames);
    return out;
}

std::string show_answer(const Answer& a) {
    if (a.bindings.empty()) return "yes";
    std::map<long long, int> vars;
    std::string out;
    bool first = true;
    for (auto& [name, term] : a.bindings) {
        if (!first) out += '\n';
        first = false;
        out += name;
        out += " = ";
        render(*term, out, 0, vars);
    }
    return out;
}

}  // namespace lmod
