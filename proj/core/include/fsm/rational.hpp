#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace fsm {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "n", "-n" or "n/d" into a canonical rational. Throws ParseError.
Rational parse_rational(std::string_view text);

/// Always "num/den", including integers ("1/1", "0/1").
std::string format_rational(const Rational& value);

/// Sum of a vector of rationals.
Rational sum(const std::vector<Rational>& values);

}  // namespace fsm
