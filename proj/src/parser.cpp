#include "featune/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

namespace featune::expr {

ParseError::ParseError(std::string const& message, std::size_t position)
    : std::runtime_error(message + " at position " + std::to_string(position))
    , position_(position)
{
}

namespace {

class Parser {
public:
    Parser(std::string_view text, Dialect dialect) : text_(text), dialect_(dialect) {}

    Expression parse_all()
    {
        auto e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) {
            fail(std::string("unexpected '") + text_[pos_] + "'");
        }
        return e;
    }

private:
    [[noreturn]] void fail(std::string const& message) const { throw ParseError(message, pos_); }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c)
    {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    Expression parse_expr()
    {
        auto lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = Expression::binary(Op::add, std::move(lhs), parse_term());
            } else if (accept('-')) {
                lhs = Expression::binary(Op::sub, std::move(lhs), parse_term());
            } else {
                return lhs;
            }
        }
    }

    Expression parse_term()
    {
        auto lhs = parse_factor();
        for (;;) {
            if (accept('*')) {
                lhs = Expression::binary(Op::mul, std::move(lhs), parse_factor());
            } else if (accept('/')) {
                lhs = Expression::binary(Op::div, std::move(lhs), parse_factor());
            } else {
                return lhs;
            }
        }
    }

    Expression parse_factor()
    {
        auto base = parse_atom();
        skip_ws();
        auto const caret = pos_;
        if (accept('^')) {
            if (dialect_ == Dialect::gp) {
                pos_ = caret;
                fail("'^' is not allowed in gp expressions");
            }
            return Expression::binary(Op::pow, std::move(base), parse_atom());
        }
        return base;
    }

    Expression parse_atom()
    {
        skip_ws();
        if (pos_ >= text_.size()) {
            fail("unexpected end of input");
        }
        auto const c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = parse_expr();
            expect(')');
            return e;
        }
        if (c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) {
            return Expression::constant(parse_number());
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            auto const start = pos_;
            while (pos_ < text_.size()
                   && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            auto ident = text_.substr(start, pos_ - start);
            if (ident == "ln") {
                if (dialect_ == Dialect::gp) {
                    pos_ = start;
                    fail("'ln' is not allowed in gp expressions");
                }
                expect('(');
                auto arg = parse_expr();
                expect(')');
                return Expression::unary(Op::ln, std::move(arg));
            }
            if (ident == "e") {
                if (dialect_ == Dialect::gp) {
                    pos_ = start;
                    fail("the constant 'e' is not allowed in gp expressions");
                }
                return Expression::constant(euler);
            }
            return Expression::feature(std::string(ident));
        }
        fail(std::string("unexpected '") + c + "'");
    }

    double parse_number()
    {
        auto const start = pos_;
        if (text_[pos_] == '-') {
            ++pos_;
            skip_ws();
            if (pos_ >= text_.size() || !(std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
                fail("'-' must be followed by a number");
            }
        }
        auto const digits = pos_;
        auto const is_digit = [&](std::size_t i) {
            return i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]));
        };
        while (is_digit(pos_)) {
            ++pos_;
        }
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (is_digit(pos_)) {
                ++pos_;
            }
        }
        // exponent only when digits follow, so "2*e" style input stays unambiguous
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            auto look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) {
                ++look;
            }
            if (is_digit(look)) {
                pos_ = look;
                while (is_digit(pos_)) {
                    ++pos_;
                }
            }
        }
        double value = 0.0;
        auto const* first = text_.data() + digits;
        auto const* last = text_.data() + pos_;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
            pos_ = start;
            fail("malformed number");
        }
        return text_[start] == '-' ? -value : value;
    }

    std::string_view text_;
    Dialect dialect_;
    std::size_t pos_ = 0;
};

} // namespace

Expression parse(std::string_view text, Dialect dialect)
{
    return Parser(text, dialect).parse_all();
}

} // namespace featune::expr
