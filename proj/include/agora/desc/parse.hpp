#pragma once

#include <charconv>
#include <string>
#include <vector>

#include "agora/desc/ast.hpp"

namespace agora::desc {

namespace detail {

enum class Tok {
    Ident, String, Int, Real, True, False,
    LBrace, RBrace, Semi, Colon,
    KwExtends, KwRef, KwLazy, KwAttrib, KwParent,
    Eof,
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;       // Ident / String payload
    int64_t int_value = 0;
    double real_value = 0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void error(const std::string& msg, const Token& at) const {
        fail("parse_error",
             "line " + std::to_string(at.line) + ", col " + std::to_string(at.col) + ": " + msg);
    }

private:
    void advance() {
        skip_ws();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        if (pos_ >= text_.size()) {
            tok_.kind = Tok::Eof;
            return;
        }
        char c = text_[pos_];
        if (c == '{') return punct(Tok::LBrace);
        if (c == '}') return punct(Tok::RBrace);
        if (c == ';') return punct(Tok::Semi);
        if (c == ':') return punct(Tok::Colon);
        if (c == '"') return lex_string();
        if (c == '-' || (c >= '0' && c <= '9')) return lex_number();
        if (is_ident_start(c)) return lex_ident();
        fail("parse_error", "line " + std::to_string(line_) + ", col " + std::to_string(col_) +
                                ": unexpected character '" + std::string(1, c) + "'");
    }

    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) {
        return is_ident_start(c) || (c >= '0' && c <= '9') || c == '-';
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++col_;
                ++pos_;
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                return;
            }
        }
    }

    void punct(Tok kind) {
        tok_.kind = kind;
        ++pos_;
        ++col_;
    }

    void lex_string() {
        ++pos_;  // opening quote
        ++col_;
        std::string out;
        while (true) {
            if (pos_ >= text_.size() || text_[pos_] == '\n')
                fail("parse_error", "line " + std::to_string(tok_.line) + ", col " +
                                        std::to_string(tok_.col) + ": unterminated string");
            char c = text_[pos_++];
            ++col_;
            if (c == '"') break;
            if (c == '\\') {
                if (pos_ >= text_.size())
                    fail("parse_error", "line " + std::to_string(tok_.line) +
                                            ": unterminated escape");
                char e = text_[pos_++];
                ++col_;
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default:
                        fail("parse_error", "line " + std::to_string(tok_.line) +
                                                ": unknown escape \\" + std::string(1, e));
                }
            } else {
                out += c;
            }
        }
        tok_.kind = Tok::String;
        tok_.text = std::move(out);
    }

    void lex_number() {
        size_t start = pos_;
        if (text_[pos_] == '-') {
            ++pos_;
            ++col_;
        }
        bool saw_digit = false, is_real = false;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
            ++pos_;
            ++col_;
            saw_digit = true;
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            is_real = true;
            ++pos_;
            ++col_;
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                ++pos_;
                ++col_;
            }
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            is_real = true;
            ++pos_;
            ++col_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
                ++pos_;
                ++col_;
            }
            while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
                ++pos_;
                ++col_;
            }
        }
        std::string_view sv(text_.data() + start, pos_ - start);
        if (!saw_digit)
            fail("parse_error", "line " + std::to_string(tok_.line) + ", col " +
                                    std::to_string(tok_.col) + ": malformed number '" +
                                    std::string(sv) + "'");
        if (is_real) {
            tok_.kind = Tok::Real;
            char* end = nullptr;
            tok_.real_value = std::strtod(std::string(sv).c_str(), &end);
        } else {
            tok_.kind = Tok::Int;
            auto [p, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), tok_.int_value);
            if (ec != std::errc() || p != sv.data() + sv.size())
                fail("parse_error", "line " + std::to_string(tok_.line) + ", col " +
                                        std::to_string(tok_.col) + ": integer out of range '" +
                                        std::string(sv) + "'");
        }
    }

    void lex_ident() {
        size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) {
            ++pos_;
            ++col_;
        }
        std::string word = text_.substr(start, pos_ - start);
        if (word == "extends") tok_.kind = Tok::KwExtends;
        else if (word == "REF") tok_.kind = Tok::KwRef;
        else if (word == "LAZY") tok_.kind = Tok::KwLazy;
        else if (word == "ATTRIB") tok_.kind = Tok::KwAttrib;
        else if (word == "PARENT") tok_.kind = Tok::KwParent;
        else if (word == "true") { tok_.kind = Tok::True; }
        else if (word == "false") { tok_.kind = Tok::False; }
        else {
            tok_.kind = Tok::Ident;
            tok_.text = std::move(word);
        }
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    Document parse_document() {
        Document doc;
        while (lex_.peek().kind != Tok::Eof) {
            Token name = expect(Tok::Ident, "component name");
            if (doc.top(name.text))
                lex_.error("duplicate top-level component '" + name.text + "'", name);
            doc.tops.push_back(parse_component_entry(name, 0));
        }
        return doc;
    }

private:
    Token expect(Tok kind, const std::string& what) {
        Token t = lex_.take();
        if (t.kind != kind) lex_.error("expected " + what, t);
        return t;
    }

    Entry parse_component_entry(const Token& name, int depth) {
        if (depth > 100) lex_.error("nesting too deep", name);
        auto comp = std::make_shared<Component>();
        comp->line = name.line;
        if (lex_.peek().kind == Tok::KwExtends) {
            lex_.take();
            comp->extends = expect(Tok::Ident, "prototype name").text;
        }
        expect(Tok::LBrace, "'{'");
        while (lex_.peek().kind != Tok::RBrace) {
            if (lex_.peek().kind == Tok::Eof)
                lex_.error("unexpected end of input inside '" + name.text + "'", lex_.peek());
            Token entry_name = expect(Tok::Ident, "attribute or component name");
            if (comp->has(entry_name.text))
                lex_.error("duplicate name '" + entry_name.text + "'", entry_name);
            switch (lex_.peek().kind) {
                case Tok::LBrace:
                case Tok::KwExtends:
                    comp->entries.push_back(parse_component_entry(entry_name, depth + 1));
                    break;
                case Tok::KwRef: {
                    lex_.take();
                    Entry e{entry_name.text, Value(parse_reference()), entry_name.line};
                    expect(Tok::Semi, "';'");
                    comp->entries.push_back(std::move(e));
                    break;
                }
                default: {
                    Entry e{entry_name.text, parse_value(), entry_name.line};
                    expect(Tok::Semi, "';'");
                    comp->entries.push_back(std::move(e));
                }
            }
        }
        lex_.take();  // '}'
        return Entry{name.text, Value(std::move(comp)), name.line};
    }

    Value parse_value() {
        Token t = lex_.take();
        switch (t.kind) {
            case Tok::String: return Value(t.text);
            case Tok::Int: return Value(t.int_value);
            case Tok::Real: return Value(t.real_value);
            case Tok::True: return Value(true);
            case Tok::False: return Value(false);
            default:
                lex_.error("expected a value (string, number, boolean, or REF)", t);
        }
    }

    Reference parse_reference() {
        Reference ref;
        if (lex_.peek().kind == Tok::KwLazy) {
            lex_.take();
            ref.lazy = true;
        }
        Token t = lex_.take();
        if (t.kind == Tok::KwAttrib) {
            ref.kind = Reference::Kind::Attrib;
            ref.segments.push_back(expect(Tok::Ident, "attribute name").text);
            return ref;
        }
        if (t.kind == Tok::KwParent) {
            ref.kind = Reference::Kind::ParentChain;
            ref.hops = 1;
            while (lex_.peek().kind == Tok::Colon) {
                lex_.take();
                if (lex_.peek().kind == Tok::KwParent) {
                    lex_.take();
                    ++ref.hops;
                } else {
                    ref.segments.push_back(expect(Tok::Ident, "path segment").text);
                    break;
                }
            }
            while (lex_.peek().kind == Tok::Colon) {
                lex_.take();
                ref.segments.push_back(expect(Tok::Ident, "path segment").text);
            }
            if (ref.segments.empty()) lex_.error("parent reference needs a path", t);
            return ref;
        }
        if (t.kind == Tok::Ident && t.text == kRootName) {
            ref.kind = Reference::Kind::Path;
            if (lex_.peek().kind != Tok::Colon) lex_.error("root reference needs a path", t);
            while (lex_.peek().kind == Tok::Colon) {
                lex_.take();
                ref.segments.push_back(expect(Tok::Ident, "path segment").text);
            }
            return ref;
        }
        lex_.error("expected ATTRIB, PARENT, or sfConfig after REF", t);
    }

    Lexer lex_;
};

}  // namespace detail

inline Document parse(const std::string& text) {
    return detail::Parser(text).parse_document();
}

}  // namespace agora::desc
