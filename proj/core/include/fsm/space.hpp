#pragma once

// Finite factored spaces, their canonical point encoding, events, and the
// indexed-family operations (projection, merge, Cartesian product).
//
// Canonical encoding: a point (w_0, ..., w_{n-1}) is stored at
//
//     index = sum_i w_i * stride(i),   stride(0) = 1,  stride(i+1) = stride(i) * |W_i|
//
// so factor 0 is the fastest-varying digit. Every table, bitset and file
// format in this library uses this order.

#include <boost/dynamic_bitset.hpp>

#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fsm {

using ValueId = std::uint32_t;
using PointIndex = std::uint64_t;

struct FactorId {
    std::uint32_t value = 0;

    friend auto operator<=>(FactorId, FactorId) = default;
};

/// A subset of the index set I, stored as a bitmask over factor ids.
class IndexSubset {
public:
    constexpr IndexSubset() = default;
    constexpr explicit IndexSubset(std::uint64_t mask) : mask_(mask) {}
    IndexSubset(std::initializer_list<std::uint32_t> ids) {
        for (auto id : ids) insert(FactorId{id});
    }

    static constexpr IndexSubset all(std::size_t num_factors) {
        return IndexSubset(num_factors >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << num_factors) - 1);
    }

    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    constexpr bool contains(FactorId i) const { return i.value < 64 && ((mask_ >> i.value) & 1u); }
    constexpr void insert(FactorId i) { mask_ |= std::uint64_t{1} << i.value; }
    constexpr void erase(FactorId i) { mask_ &= ~(std::uint64_t{1} << i.value); }
    constexpr bool is_subset_of(IndexSubset other) const { return (mask_ & ~other.mask_) == 0; }
    constexpr bool intersects(IndexSubset other) const { return (mask_ & other.mask_) != 0; }
    constexpr IndexSubset complement(std::size_t num_factors) const {
        return IndexSubset(all(num_factors).mask_ & ~mask_);
    }

    std::vector<FactorId> ids() const;

    friend constexpr IndexSubset operator|(IndexSubset a, IndexSubset b) { return IndexSubset(a.mask_ | b.mask_); }
    friend constexpr IndexSubset operator&(IndexSubset a, IndexSubset b) { return IndexSubset(a.mask_ & b.mask_); }
    friend constexpr IndexSubset operator-(IndexSubset a, IndexSubset b) { return IndexSubset(a.mask_ & ~b.mask_); }
    friend constexpr bool operator==(IndexSubset, IndexSubset) = default;

private:
    std::uint64_t mask_ = 0;
};

struct Factor {
    std::string label;
    std::uint32_t cardinality = 0;

    friend bool operator==(const Factor&, const Factor&) = default;
};

/// The sample space Omega = X_i Omega_i for a finite, ordered list of factors.
class FactoredSpace {
public:
    static constexpr std::uint64_t kDefaultSizeCap = std::uint64_t{1} << 24;
    static constexpr std::size_t kMaxFactors = 64;

    /// Throws CapacityError when the product of cardinalities exceeds `size_cap`,
    /// DomainError on zero cardinality, empty or duplicate labels.
    explicit FactoredSpace(std::vector<Factor> factors, std::uint64_t size_cap = kDefaultSizeCap);

    std::size_t num_factors() const { return factors_.size(); }
    const std::vector<Factor>& factors() const { return factors_; }
    const Factor& factor(FactorId i) const;
    std::uint32_t cardinality(FactorId i) const { return factor(i).cardinality; }
    const std::string& label(FactorId i) const { return factor(i).label; }
    std::optional<FactorId> find(std::string_view label) const;

    /// |Omega|.
    std::uint64_t size() const { return size_; }
    std::uint64_t stride(FactorId i) const { return strides_.at(i.value); }
    IndexSubset all_factors() const { return IndexSubset::all(factors_.size()); }

    /// Digit of factor i in the canonical encoding of `index`.
    ValueId coordinate(PointIndex index, FactorId i) const {
        return static_cast<ValueId>((index / strides_[i.value]) % factors_[i.value].cardinality);
    }

    /// Canonical index with every digit outside J set to zero.
    PointIndex restrict_index(PointIndex index, IndexSubset J) const;

    /// Index obtained by taking the J digits from `a` and all other digits from `b`.
    PointIndex mix_indices(PointIndex a, PointIndex b, IndexSubset J) const {
        return restrict_index(a, J) + restrict_index(b, J.complement(factors_.size()));
    }

    /// The factored space Omega_J, factors in their original relative order.
    FactoredSpace subspace(IndexSubset J) const;

    /// Throws DomainError if J mentions ids outside [0, |I|).
    void check_subset(IndexSubset J) const;

    friend bool operator==(const FactoredSpace& a, const FactoredSpace& b) { return a.factors_ == b.factors_; }

private:
    std::vector<Factor> factors_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t size_ = 1;
};

using SpacePtr = std::shared_ptr<const FactoredSpace>;

SpacePtr make_space(std::vector<Factor> factors, std::uint64_t size_cap = FactoredSpace::kDefaultSizeCap);

/// Space with factors labelled "0", "1", ... and the given cardinalities.
SpacePtr make_space(std::initializer_list<std::uint32_t> cardinalities);
SpacePtr make_space_from_cardinalities(const std::vector<std::uint32_t>& cardinalities,
                                       std::uint64_t size_cap = FactoredSpace::kDefaultSizeCap);

/// True when both pointers refer to equal spaces.
bool same_space(const SpacePtr& a, const SpacePtr& b);

/// A full assignment i -> value for every factor of a space.
struct Point {
    std::vector<ValueId> coords;

    friend bool operator==(const Point&, const Point&) = default;
};

/// An indexed family over a subset J of the factors: entries are (factor id, value)
/// sorted by id.
class PartialPoint {
public:
    PartialPoint() = default;
    explicit PartialPoint(std::vector<std::pair<FactorId, ValueId>> entries);

    static PartialPoint from_point(const Point& p);

    IndexSubset domain() const;
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    /// Throws DomainError when i is outside the domain.
    ValueId at(FactorId i) const;
    const std::vector<std::pair<FactorId, ValueId>>& entries() const { return entries_; }

    friend auto operator<=>(const PartialPoint&, const PartialPoint&) = default;
    friend bool operator==(const PartialPoint&, const PartialPoint&) = default;

private:
    std::vector<std::pair<FactorId, ValueId>> entries_;
};

using PartialPointSet = std::set<PartialPoint>;

/// A subset of Omega stored as a dense bitset over the canonical encoding.
class Event {
public:
    explicit Event(SpacePtr space);
    Event(SpacePtr space, boost::dynamic_bitset<> members);

    static Event full(SpacePtr space);
    static Event from_indices(SpacePtr space, const std::vector<PointIndex>& indices);
    static Event from_points(SpacePtr space, const std::vector<Point>& points);

    const SpacePtr& space_ptr() const { return space_; }
    const FactoredSpace& space() const { return *space_; }
    const boost::dynamic_bitset<>& bits() const { return bits_; }

    bool contains(PointIndex index) const { return bits_.test(index); }
    std::uint64_t count() const { return bits_.count(); }
    bool empty() const { return bits_.none(); }
    std::vector<PointIndex> members() const;

    Event complement() const;
    friend Event operator&(const Event& a, const Event& b);
    friend Event operator|(const Event& a, const Event& b);
    friend bool operator==(const Event& a, const Event& b);

private:
    SpacePtr space_;
    boost::dynamic_bitset<> bits_;
};

/// Mixed-radix encoding. Throws InvalidPointError on a bad coordinate or arity.
PointIndex encode(const FactoredSpace& space, const Point& p);
/// Inverse of encode. Throws InvalidPointError when index >= |Omega|.
Point decode(const FactoredSpace& space, PointIndex index);

/// (p_j)_{j in J}. Throws DomainError unless J is inside the domain of p.
PartialPoint project_point(const PartialPoint& p, IndexSubset J);
PartialPoint project_point(const Point& p, IndexSubset J);

/// proj_J(A) with set semantics.
PartialPointSet project_event(const Event& A, IndexSubset J);

/// a merged with b. Throws DisjointnessError when the domains overlap.
PartialPoint merge(const PartialPoint& a, const PartialPoint& b);

/// B x C = { b merged with c }. All families in B share one domain, likewise C.
/// Throws DisjointnessError when those domains overlap.
PartialPointSet cartesian_event(const PartialPointSet& B, const PartialPointSet& C);

/// The event of all full families in `families` (each must cover every factor).
Event event_from_families(SpacePtr space, const PartialPointSet& families);

}  // namespace fsm
