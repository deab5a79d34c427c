#include "fsm/rational.hpp"

#include "fsm/error.hpp"

#include <cctype>

namespace fsm {

namespace {

bool is_integer_literal(std::string_view s) {
    if (!s.empty() && s.front() == '-') s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view{"1"} : text.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den) || den.front() == '-') {
        throw ParseError("malformed fraction '" + std::string(text) + "'");
    }
    Integer n(std::string(num), 10);
    Integer d(std::string(den), 10);
    if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

std::string format_rational(const Rational& value) {
    return value.get_num().get_str() + "/" + value.get_den().get_str();
}

Rational sum(const std::vector<Rational>& values) {
    Rational total = 0;
    for (const auto& v : values) total += v;
    return total;
}

}  // namespace fsm
