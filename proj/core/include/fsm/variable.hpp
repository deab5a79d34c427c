#pragma once

#include "fsm/space.hpp"

#include <span>
#include <vector>

namespace fsm {

/// A random variable X: Omega -> [0, num_values), stored extensionally as a
/// dense table over the canonical point encoding.
class Variable {
public:
    /// Throws DomainError on a table of the wrong length, ValueRangeError when an
    /// entry is >= num_values or num_values == 0.
    Variable(SpacePtr space, std::vector<ValueId> table, ValueId num_values);

    const SpacePtr& space_ptr() const { return space_; }
    const FactoredSpace& space() const { return *space_; }
    const std::vector<ValueId>& table() const { return table_; }
    ValueId num_values() const { return num_values_; }
    ValueId operator()(PointIndex index) const { return table_[index]; }

    /// Same table, same value range.
    friend bool operator==(const Variable& a, const Variable& b);

private:
    SpacePtr space_;
    std::vector<ValueId> table_;
    ValueId num_values_;
};

/// The constant variable with a single value 0.
Variable constant(SpacePtr space);

/// U_i(w) = w_i. Throws DomainError for an unknown factor.
Variable background(SpacePtr space, FactorId i);

/// U_J, the joint of the background variables in J (constant when J is empty).
Variable background(SpacePtr space, IndexSubset J);

/// (X_1, ..., X_n). Value ids are the lexicographic tuple code with the first
/// component most significant: id = ((x_1 * k_2 + x_2) * k_3 + x_3) ...
/// The empty list yields the constant variable. Throws SpaceMismatchError,
/// CapacityError if the value range overflows 32 bits.
Variable joint(SpacePtr space, std::span<const Variable> vars);
/// Non-empty list; the space is taken from the first component.
Variable joint(std::span<const Variable> vars);
Variable joint(const Variable& a, const Variable& b);

/// 1_A: value 1 on A, 0 elsewhere.
Variable indicator(const Event& A);

/// X^{-1}(x). Throws ValueRangeError when x >= num_values.
Event fiber(const Variable& X, ValueId x);

/// X derived-to Y on C: for all w, w' in C, X(w) = X(w') implies Y(w) = Y(w').
/// Vacuously true on the empty event. Throws SpaceMismatchError.
bool is_derived(const Variable& X, const Variable& Y, const Event& C);

/// Same partition of Omega into fibers (equal up to relabelling of values).
bool same_fibers(const Variable& X, const Variable& Y);

}  // namespace fsm
