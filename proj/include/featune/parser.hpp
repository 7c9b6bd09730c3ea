#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "featune/expression.hpp"

namespace featune::expr {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string const& message, std::size_t position);
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// Grammar (whitespace is insignificant):
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := atom ['^' atom]                       (budget dialect only)
//   atom   := ['-'] number | ident | 'ln' '(' expr ')' | '(' expr ')'
// 'ln', '^' and the constant 'e' are rejected in the gp dialect.
Expression parse(std::string_view text, Dialect dialect = Dialect::gp);

} // namespace featune::expr
