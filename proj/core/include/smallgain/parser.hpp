#pragma once

#include <string>
#include <string_view>

#include "smallgain/gain.hpp"

namespace smallgain {

/// Parses the gain grammar:
///
///     expr  := term ('+' term)*
///     term  := '0' | coeff '*' leaf | 'max(' expr (',' expr)* ')'
///            | '(' expr ')' ['o' '(' expr ')'] | 'id+(' expr ')'
///     leaf  := 's' | 's^' number | 'sqrt(s)' | 's/(1+s)' | 'atan(s)'
///
/// Whitespace is ignored. Throws ParseError on malformed input and
/// Error(RejectedNotClassK) when the text describes something that is not a
/// class-K function (non-positive coefficients, subtraction, ...).
GainExpr parse_gain(std::string_view text);

/// Canonical text; parse_gain(format_gain(g)) == g structurally.
std::string format_gain(const GainExpr& g);

}  // namespace smallgain
