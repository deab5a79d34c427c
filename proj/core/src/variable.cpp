#include "fsm/variable.hpp"

#include "fsm/error.hpp"

#include <limits>
#include <unordered_map>

namespace fsm {

Variable::Variable(SpacePtr space, std::vector<ValueId> table, ValueId num_values)
    : space_(std::move(space)), table_(std::move(table)), num_values_(num_values) {
    if (table_.size() != space_->size()) {
        throw DomainError("variable table has " + std::to_string(table_.size()) + " entries, space has " +
                          std::to_string(space_->size()) + " points");
    }
    if (num_values_ == 0) throw ValueRangeError("a variable needs at least one value");
    for (auto v : table_) {
        if (v >= num_values_) throw ValueRangeError("table entry " + std::to_string(v) + " >= num_values");
    }
}

bool operator==(const Variable& a, const Variable& b) {
    return same_space(a.space_, b.space_) && a.num_values_ == b.num_values_ && a.table_ == b.table_;
}

Variable constant(SpacePtr space) {
    std::vector<ValueId> table(space->size(), 0);
    return Variable(std::move(space), std::move(table), 1);
}

Variable background(SpacePtr space, FactorId i) {
    const auto card = space->cardinality(i);
    std::vector<ValueId> table(space->size());
    for (PointIndex idx = 0; idx < table.size(); ++idx) table[idx] = space->coordinate(idx, i);
    return Variable(std::move(space), std::move(table), card);
}

Variable background(SpacePtr space, IndexSubset J) {
    space->check_subset(J);
    std::vector<Variable> parts;
    for (auto i : J.ids()) parts.push_back(background(space, i));
    return joint(std::move(space), parts);
}

Variable joint(SpacePtr space, std::span<const Variable> vars) {
    std::vector<ValueId> table(space->size(), 0);
    std::uint64_t range = 1;
    for (const auto& v : vars) {
        if (!same_space(space, v.space_ptr())) throw SpaceMismatchError("joint of variables on different spaces");
        range *= v.num_values();
        if (range > std::numeric_limits<ValueId>::max()) throw CapacityError("joint value range exceeds 32 bits");
        const auto k = v.num_values();
        const auto& t = v.table();
        for (std::size_t idx = 0; idx < table.size(); ++idx) table[idx] = table[idx] * k + t[idx];
    }
    return Variable(std::move(space), std::move(table), static_cast<ValueId>(range));
}

Variable joint(std::span<const Variable> vars) {
    if (vars.empty()) throw PreconditionError("joint of an empty list needs an explicit space");
    return joint(vars.front().space_ptr(), vars);
}

Variable joint(const Variable& a, const Variable& b) {
    const Variable parts[] = {a, b};
    return joint(a.space_ptr(), parts);
}

Variable indicator(const Event& A) {
    std::vector<ValueId> table(A.space().size());
    for (std::size_t idx = 0; idx < table.size(); ++idx) table[idx] = A.contains(idx) ? 1 : 0;
    return Variable(A.space_ptr(), std::move(table), 2);
}

Event fiber(const Variable& X, ValueId x) {
    if (x >= X.num_values()) {
        throw ValueRangeError("value " + std::to_string(x) + " out of range [0, " + std::to_string(X.num_values()) +
                              ")");
    }
    boost::dynamic_bitset<> bits(X.table().size());
    for (std::size_t idx = 0; idx < bits.size(); ++idx) {
        if (X.table()[idx] == x) bits.set(idx);
    }
    return Event(X.space_ptr(), std::move(bits));
}

bool is_derived(const Variable& X, const Variable& Y, const Event& C) {
    if (!same_space(X.space_ptr(), Y.space_ptr()) || !same_space(X.space_ptr(), C.space_ptr())) {
        throw SpaceMismatchError("is_derived operands live on different spaces");
    }
    constexpr ValueId kUnset = std::numeric_limits<ValueId>::max();
    const auto& bits = C.bits();
    // Dense map Val(X) -> Val(Y) when the range is small, hash map otherwise.
    if (X.num_values() <= (1u << 22)) {
        std::vector<ValueId> image(X.num_values(), kUnset);
        for (auto i = bits.find_first(); i != boost::dynamic_bitset<>::npos; i = bits.find_next(i)) {
            auto& slot = image[X(i)];
            if (slot == kUnset) {
                slot = Y(i);
            } else if (slot != Y(i)) {
                return false;
            }
        }
        return true;
    }
    std::unordered_map<ValueId, ValueId> image;
    for (auto i = bits.find_first(); i != boost::dynamic_bitset<>::npos; i = bits.find_next(i)) {
        auto [it, inserted] = image.emplace(X(i), Y(i));
        if (!inserted && it->second != Y(i)) return false;
    }
    return true;
}

bool same_fibers(const Variable& X, const Variable& Y) {
    const auto full = Event::full(X.space_ptr());
    return is_derived(X, Y, full) && is_derived(Y, X, full);
}

}  // namespace fsm
