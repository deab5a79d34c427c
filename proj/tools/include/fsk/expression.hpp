#pragma once

// The variable expression language of the model format:
//
//   background(label)        U_i; a factor label, or a factor index when no label matches
//   var(name)                a previously defined variable
//   tuple(e1, ..., en)       joint variable, first component most significant
//   eq(e1, e2)               1 where the values agree, else 0
//   add_mod(k, e1, e2)       (e1 + e2) mod k
//   xor(e1, e2)              bitwise xor; range is the next power of two covering both
//   cmp_gt(e, c)             1 where e > c, else 0
//   table_map(e, [t0, ...])  t[e]; one entry per value of e
//   const(c)                 c everywhere; range c + 1
//
// Expressions compile to dense tables.

#include "fsm/space.hpp"
#include "fsm/variable.hpp"

#include <functional>
#include <string>
#include <string_view>

namespace fsk {

using VariableLookup = std::function<const fsm::Variable*(std::string_view)>;

struct CompiledExpression {
    fsm::Variable variable;
    /// Re-printed with single spaces after commas; parsing it gives the same table.
    std::string canonical;
};

/// Throws fsm::ParseError with column = 1-based offset into `text`.
CompiledExpression compile_expression(std::string_view text, const fsm::SpacePtr& space, const VariableLookup& lookup);

}  // namespace fsk
