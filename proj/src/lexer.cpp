#include "lmod/lexer.hpp"

#include <cctype>
#include <unordered_map>

namespace lmod {

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::UVar: return "variable";
        case Tok::Int: return "integer";
        case Tok::Real: return "real";
        case Tok::Str: return "string";
        case Tok::KwModule: return "'module'";
        case Tok::KwSig: return "'sig'";
        case Tok::KwKind: return "'kind'";
        case Tok::KwType: return "'type'";
        case Tok::KwExportdef: return "'exportdef'";
        case Tok::KwUseonly: return "'useonly'";
        case Tok::KwAccumulate: return "'accumulate'";
        case Tok::KwAccumSig: return "'accum_sig'";
        case Tok::KwUseSig: return "'use_sig'";
        case Tok::Period: return "'.'";
        case Tok::Comma: return "','";
        case Tok::Semicolon: return "';'";
        case Tok::Turnstile: return "':-'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Arrow: return "'->'";
        case Tok::Cons: return "'::'";
        case Tok::Backslash: return "'\\'";
        case Tok::End: return "end of input";
    }
    return "token";
}

namespace {

const std::unordered_map<std::string_view, Tok> kKeywords = {
    {"module", Tok::KwModule},       {"sig", Tok::KwSig},
    {"kind", Tok::KwKind},           {"type", Tok::KwType},
    {"exportdef", Tok::KwExportdef}, {"useonly", Tok::KwUseonly},
    {"accumulate", Tok::KwAccumulate},
    {"accum_sig", Tok::KwAccumSig},  {"use_sig", Tok::KwUseSig},
};

struct Lexer {
    std::string_view src;
    size_t i = 0;
    int line = 1, col = 1;

    bool eof() const { return i >= src.size(); }
    char peek(size_t k = 0) const { return i + k < src.size() ? src[i + k] : '\0'; }

    char advance() {
        char c = src[i++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    Position pos() const { return {line, col}; }
};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

std::vector<Token> tokenize(std::string_view source) {
    Lexer lx{source};
    std::vector<Token> out;

    auto push = [&](Tok k, Position p, std::string text = "") {
        out.push_back(Token{k, std::move(text), 0, 0, p});
    };

    while (!lx.eof()) {
        char c = lx.peek();
        Position p = lx.pos();

        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            lx.advance();
            continue;
        }
        if (c == '%') {
            while (!lx.eof() && lx.peek() != '\n') lx.advance();
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num;
            while (!lx.eof() && std::isdigit(static_cast<unsigned char>(lx.peek())))
                num += lx.advance();
            if (lx.peek() == '.' && std::isdigit(static_cast<unsigned char>(lx.peek(1)))) {
                num += lx.advance();  // '.'
                while (!lx.eof() && std::isdigit(static_cast<unsigned char>(lx.peek())))
                    num += lx.advance();
                Token t{Tok::Real, num, 0, 0, p};
                try {
                    t.rval = std::stod(num);
                } catch (const std::exception&) {
                    fail(Errc::NumberOverflow, "real literal out of range: " + num, p);
                }
                out.push_back(std::move(t));
            } else {
                Token t{Tok::Int, num, 0, 0, p};
                try {
                    t.ival = std::stoll(num);
                } catch (const std::exception&) {
                    fail(Errc::NumberOverflow, "integer literal out of range: " + num, p);
                }
                out.push_back(std::move(t));
            }
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::string id;
            while (!lx.eof() && ident_char(lx.peek())) id += lx.advance();
            if (std::isupper(static_cast<unsigned char>(id[0]))) {
                push(Tok::UVar, p, std::move(id));
            } else {
                auto it = kKeywords.find(id);
                if (it != kKeywords.end())
                    push(it->second, p);
                else
                    push(Tok::Ident, p, std::move(id));
            }
            continue;
        }
        switch (c) {
            case '.': {
                // A declaration terminator is '.' followed by whitespace or EOF.
                char nxt = lx.peek(1);
                if (nxt == '\0' || nxt == ' ' || nxt == '\t' || nxt == '\r' ||
                    nxt == '\n' || nxt == '%') {
                    lx.advance();
                    push(Tok::Period, p);
                } else {
                    fail(Errc::IllegalCharacter,
                         "'.' must be followed by whitespace or end of input", p);
                }
                continue;
            }
            case ',': lx.advance(); push(Tok::Comma, p); continue;
            case ';': lx.advance(); push(Tok::Semicolon, p); continue;
            case '(': lx.advance(); push(Tok::LParen, p); continue;
            case ')': lx.advance(); push(Tok::RParen, p); continue;
            case '\\': lx.advance(); push(Tok::Backslash, p); continue;
            case ':':
                lx.advance();
                if (lx.peek() == '-') {
                    lx.advance();
                    push(Tok::Turnstile, p);
                } else if (lx.peek() == ':') {
                    lx.advance();
                    push(Tok::Cons, p);
                } else {
                    fail(Errc::IllegalCharacter, "expected ':-' or '::'", p);
                }
                continue;
            case '-':
                lx.advance();
                if (lx.peek() == '>') {
                    lx.advance();
                    push(Tok::Arrow, p);
                } else {
                    fail(Errc::IllegalCharacter, "expected '->'", p);
                }
                continue;
            case '"': {
                lx.advance();
                std::string s;
                for (;;) {
                    if (lx.eof() || lx.peek() == '\n')
                        fail(Errc::UnterminatedString, "unterminated string literal", p);
                    char d = lx.advance();
                    if (d == '"') break;
                    if (d == '\\') {
                        if (lx.eof())
                            fail(Errc::UnterminatedString, "unterminated string literal", p);
                        char e = lx.advance();
                        switch (e) {
                            case 'n': s += '\n'; break;
                            case 't': s += '\t'; break;
                            case '\\': s += '\\'; break;
                            case '"': s += '"'; break;
                            default:
                                fail(Errc::IllegalCharacter,
                                     std::string("unknown escape '\\") + e + "'", p);
                        }
                    } else {
                        s += d;
                    }
                }
                push(Tok::Str, p, std::move(s));
                continue;
            }
            default:
                fail(Errc::IllegalCharacter,
                     std::string("illegal character '") + c + "'", p);
        }
    }
    out.push_back(Token{Tok::End, "", 0, 0, lx.pos()});
    return out;
}

}  // namespace lmod
