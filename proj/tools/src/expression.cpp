#include "fsk/expression.hpp"

#include "fsm/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace fsk {

namespace {

using fsm::ValueId;
using fsm::Variable;

struct Value {
    Variable variable;
    std::string text;
};

class Parser {
public:
    Parser(std::string_view text, const fsm::SpacePtr& space, const VariableLookup& lookup)
        : text_(text), space_(space), lookup_(lookup) {}

    CompiledExpression run() {
        auto v = expression();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return {std::move(v.variable), std::move(v.text)};
    }

private:
    [[noreturn]] void fail(const std::string& message, std::size_t at) const {
        throw fsm::ParseError(message, 1, static_cast<int>(at + 1));
    }
    [[noreturn]] void fail(const std::string& message) const { fail(message, pos_); }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    void expect(char c) {
        skip_space();
        if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string identifier() {
        skip_space();
        const auto start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        if (start == pos_) fail("expected a name");
        return std::string(text_.substr(start, pos_ - start));
    }

    std::uint32_t integer() {
        skip_space();
        std::uint32_t value = 0;
        auto [end, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
        if (ec != std::errc{}) fail("expected a non-negative integer");
        pos_ = static_cast<std::size_t>(end - text_.data());
        return value;
    }

    // Everything up to the matching ')', so labels may contain brackets and commas.
    std::string raw_argument() {
        skip_space();
        const auto start = pos_;
        int depth = 0;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '(' || c == '[') ++depth;
            if (c == ')' || c == ']') {
                if (depth == 0) break;
                --depth;
            }
            ++pos_;
        }
        auto arg = text_.substr(start, pos_ - start);
        while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.back()))) arg.remove_suffix(1);
        return std::string(arg);
    }

    Variable build(std::vector<ValueId> table, ValueId values) const {
        return Variable(space_, std::move(table), values);
    }

    Value expression() {
        skip_space();
        const auto at = pos_;
        const auto head = identifier();
        expect('(');
        Value out = form(head, at);
        expect(')');
        return out;
    }

    Value form(const std::string& head, std::size_t at) {
        const auto size = space_->size();
        if (head == "background") {
            const auto arg_at = pos_;
            const auto label = raw_argument();
            auto id = space_->find(label);
            if (!id && !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
                    return std::isdigit(static_cast<unsigned char>(c));
                })) {
                const auto index = std::stoull(label);
                if (index < space_->num_factors()) id = fsm::FactorId{static_cast<std::uint32_t>(index)};
            }
            if (!id) fail("unknown factor '" + label + "'", arg_at);
            return {fsm::background(space_, *id), "background(" + label + ")"};
        }
        if (head == "var") {
            const auto arg_at = pos_;
            const auto name = identifier();
            const auto* v = lookup_(name);
            if (v == nullptr) fail("undefined variable '" + name + "'", arg_at);
            return {*v, "var(" + name + ")"};
        }
        if (head == "tuple") {
            std::vector<Variable> parts;
            std::string text = "tuple(";
            do {
                auto v = expression();
                if (!parts.empty()) text += ", ";
                text += v.text;
                parts.push_back(std::move(v.variable));
            } while (accept(','));
            return {fsm::joint(space_, parts), text + ")"};
        }
        if (head == "eq" || head == "xor") {
            auto a = expression();
            expect(',');
            auto b = expression();
            std::vector<ValueId> table(size);
            ValueId values = 2;
            if (head == "eq") {
                for (fsm::PointIndex w = 0; w < size; ++w) table[w] = a.variable(w) == b.variable(w) ? 1 : 0;
            } else {
                values = std::bit_ceil(std::max(a.variable.num_values(), b.variable.num_values()));
                for (fsm::PointIndex w = 0; w < size; ++w) table[w] = a.variable(w) ^ b.variable(w);
            }
            return {build(std::move(table), values), head + "(" + a.text + ", " + b.text + ")"};
        }
        if (head == "add_mod") {
            const auto k_at = pos_;
            const auto k = integer();
            if (k == 0) fail("modulus must be positive", k_at);
            expect(',');
            auto a = expression();
            expect(',');
            auto b = expression();
            std::vector<ValueId> table(size);
            for (fsm::PointIndex w = 0; w < size; ++w) {
                table[w] = static_cast<ValueId>((std::uint64_t{a.variable(w)} + b.variable(w)) % k);
            }
            return {build(std::move(table), k),
                    "add_mod(" + std::to_string(k) + ", " + a.text + ", " + b.text + ")"};
        }
        if (head == "cmp_gt") {
            auto a = expression();
            expect(',');
            const auto c = integer();
            std::vector<ValueId> table(size);
            for (fsm::PointIndex w = 0; w < size; ++w) table[w] = a.variable(w) > c ? 1 : 0;
            return {build(std::move(table), 2), "cmp_gt(" + a.text + ", " + std::to_string(c) + ")"};
        }
        if (head == "table_map") {
            auto a = expression();
            expect(',');
            expect('[');
            const auto list_at = pos_;
            std::vector<ValueId> map;
            if (!accept(']')) {
                do {
                    map.push_back(integer());
                } while (accept(','));
                expect(']');
            }
            if (map.size() != a.variable.num_values()) {
                fail("table_map needs " + std::to_string(a.variable.num_values()) + " entries, got " +
                         std::to_string(map.size()),
                     list_at);
            }
            const ValueId values = map.empty() ? 1 : *std::max_element(map.begin(), map.end()) + 1;
            std::vector<ValueId> table(size);
            for (fsm::PointIndex w = 0; w < size; ++w) table[w] = map[a.variable(w)];
            std::string text = "table_map(" + a.text + ", [";
            for (std::size_t k = 0; k < map.size(); ++k) text += (k ? ", " : "") + std::to_string(map[k]);
            return {build(std::move(table), values), text + "])"};
        }
        if (head == "const") {
            const auto c_at = pos_;
            const auto c = integer();
            if (c == ~ValueId{0}) fail("constant out of range", c_at);
            return {build(std::vector<ValueId>(size, c), c + 1), "const(" + std::to_string(c) + ")"};
        }
        fail("unknown form '" + head + "'", at);
    }

    std::string_view text_;
    const fsm::SpacePtr& space_;
    const VariableLookup& lookup_;
    std::size_t pos_ = 0;
};

}  // namespace

CompiledExpression compile_expression(std::string_view text, const fsm::SpacePtr& space, const VariableLookup& lookup) {
    return Parser(text, space, lookup).run();
}

}  // namespace fsk
