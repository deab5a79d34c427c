#include "fsm/space.hpp"

#include "fsm/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace fsm {

std::vector<FactorId> IndexSubset::ids() const {
    std::vector<FactorId> out;
    out.reserve(size());
    for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
        out.push_back(FactorId{static_cast<std::uint32_t>(std::countr_zero(m))});
    }
    return out;
}

FactoredSpace::FactoredSpace(std::vector<Factor> factors, std::uint64_t size_cap) : factors_(std::move(factors)) {
    if (factors_.size() > kMaxFactors) {
        throw CapacityError("factored space has " + std::to_string(factors_.size()) + " factors; at most " +
                            std::to_string(kMaxFactors) + " are supported");
    }
    std::unordered_set<std::string> seen;
    strides_.reserve(factors_.size());
    for (const auto& f : factors_) {
        if (f.cardinality == 0) throw DomainError("factor '" + f.label + "' has cardinality 0");
        if (f.label.empty()) throw DomainError("factor labels must be non-empty");
        if (!seen.insert(f.label).second) throw DomainError("duplicate factor label '" + f.label + "'");
        strides_.push_back(size_);
        if (size_ > size_cap / f.cardinality) {
            throw CapacityError("factored space exceeds the size cap of " + std::to_string(size_cap) + " points");
        }
        size_ *= f.cardinality;
    }
}

const Factor& FactoredSpace::factor(FactorId i) const {
    if (i.value >= factors_.size()) throw DomainError("unknown factor id " + std::to_string(i.value));
    return factors_[i.value];
}

std::optional<FactorId> FactoredSpace::find(std::string_view label) const {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        if (factors_[i].label == label) return FactorId{static_cast<std::uint32_t>(i)};
    }
    return std::nullopt;
}

PointIndex FactoredSpace::restrict_index(PointIndex index, IndexSubset J) const {
    PointIndex out = 0;
    for (std::uint64_t m = J.mask(); m != 0; m &= m - 1) {
        auto i = static_cast<std::size_t>(std::countr_zero(m));
        out += ((index / strides_[i]) % factors_[i].cardinality) * strides_[i];
    }
    return out;
}

FactoredSpace FactoredSpace::subspace(IndexSubset J) const {
    check_subset(J);
    std::vector<Factor> sub;
    for (auto i : J.ids()) sub.push_back(factors_[i.value]);
    return FactoredSpace(std::move(sub), size_);
}

void FactoredSpace::check_subset(IndexSubset J) const {
    if (!J.is_subset_of(all_factors())) throw DomainError("index set mentions factors outside the space");
}

SpacePtr make_space(std::vector<Factor> factors, std::uint64_t size_cap) {
    return std::make_shared<const FactoredSpace>(std::move(factors), size_cap);
}

SpacePtr make_space_from_cardinalities(const std::vector<std::uint32_t>& cardinalities, std::uint64_t size_cap) {
    std::vector<Factor> factors;
    factors.reserve(cardinalities.size());
    for (std::size_t i = 0; i < cardinalities.size(); ++i) {
        factors.push_back(Factor{std::to_string(i), cardinalities[i]});
    }
    return make_space(std::move(factors), size_cap);
}

SpacePtr make_space(std::initializer_list<std::uint32_t> cardinalities) {
    return make_space_from_cardinalities(std::vector<std::uint32_t>(cardinalities));
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
    return a == b || (a && b && *a == *b);
}

PartialPoint::PartialPoint(std::vector<std::pair<FactorId, ValueId>> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end());
    for (std::size_t k = 1; k < entries_.size(); ++k) {
        if (entries_[k].first == entries_[k - 1].first) throw DomainError("indexed family repeats a factor id");
    }
    for (const auto& [id, value] : entries_) {
        if (id.value >= FactoredSpace::kMaxFactors) throw DomainError("factor id out of range");
    }
}

PartialPoint PartialPoint::from_point(const Point& p) {
    std::vector<std::pair<FactorId, ValueId>> entries;
    entries.reserve(p.coords.size());
    for (std::size_t i = 0; i < p.coords.size(); ++i) {
        entries.emplace_back(FactorId{static_cast<std::uint32_t>(i)}, p.coords[i]);
    }
    return PartialPoint(std::move(entries));
}

IndexSubset PartialPoint::domain() const {
    IndexSubset d;
    for (const auto& e : entries_) d.insert(e.first);
    return d;
}

ValueId PartialPoint::at(FactorId i) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(i, ValueId{0}));
    if (it == entries_.end() || it->first != i) {
        throw DomainError("factor " + std::to_string(i.value) + " is not in the family's domain");
    }
    return it->second;
}

Event::Event(SpacePtr space) : space_(std::move(space)), bits_(space_->size()) {}

Event::Event(SpacePtr space, boost::dynamic_bitset<> members) : space_(std::move(space)), bits_(std::move(members)) {
    if (bits_.size() != space_->size()) throw DomainError("event bitset length differs from |Omega|");
}

Event Event::full(SpacePtr space) {
    Event e(std::move(space));
    e.bits_.set();
    return e;
}

Event Event::from_indices(SpacePtr space, const std::vector<PointIndex>& indices) {
    Event e(std::move(space));
    for (auto idx : indices) {
        if (idx >= e.bits_.size()) throw InvalidPointError("point index " + std::to_string(idx) + " out of range");
        e.bits_.set(idx);
    }
    return e;
}

Event Event::from_points(SpacePtr space, const std::vector<Point>& points) {
    Event e(space);
    for (const auto& p : points) e.bits_.set(encode(*space, p));
    return e;
}

std::vector<PointIndex> Event::members() const {
    std::vector<PointIndex> out;
    out.reserve(bits_.count());
    for (auto i = bits_.find_first(); i != boost::dynamic_bitset<>::npos; i = bits_.find_next(i)) out.push_back(i);
    return out;
}

Event Event::complement() const {
    return Event(space_, ~bits_);
}

Event operator&(const Event& a, const Event& b) {
    if (!same_space(a.space_, b.space_)) throw SpaceMismatchError("events live on different spaces");
    return Event(a.space_, a.bits_ & b.bits_);
}

Event operator|(const Event& a, const Event& b) {
    if (!same_space(a.space_, b.space_)) throw SpaceMismatchError("events live on different spaces");
    return Event(a.space_, a.bits_ | b.bits_);
}

bool operator==(const Event& a, const Event& b) {
    return same_space(a.space_, b.space_) && a.bits_ == b.bits_;
}

PointIndex encode(const FactoredSpace& space, const Point& p) {
    if (p.coords.size() != space.num_factors()) {
        throw InvalidPointError("point has " + std::to_string(p.coords.size()) + " coordinates, space has " +
                                std::to_string(space.num_factors()) + " factors");
    }
    PointIndex index = 0;
    for (std::size_t i = 0; i < p.coords.size(); ++i) {
        FactorId id{static_cast<std::uint32_t>(i)};
        if (p.coords[i] >= space.cardinality(id)) {
            throw InvalidPointError("coordinate " + std::to_string(p.coords[i]) + " out of range for factor '" +
                                    space.label(id) + "'");
        }
        index += p.coords[i] * space.stride(id);
    }
    return index;
}

Point decode(const FactoredSpace& space, PointIndex index) {
    if (index >= space.size()) throw InvalidPointError("point index " + std::to_string(index) + " out of range");
    Point p;
    p.coords.resize(space.num_factors());
    for (std::size_t i = 0; i < p.coords.size(); ++i) {
        p.coords[i] = space.coordinate(index, FactorId{static_cast<std::uint32_t>(i)});
    }
    return p;
}

PartialPoint project_point(const PartialPoint& p, IndexSubset J) {
    if (!J.is_subset_of(p.domain())) throw DomainError("projection target is not inside the family's domain");
    std::vector<std::pair<FactorId, ValueId>> entries;
    for (const auto& e : p.entries()) {
        if (J.contains(e.first)) entries.push_back(e);
    }
    return PartialPoint(std::move(entries));
}

PartialPoint project_point(const Point& p, IndexSubset J) {
    return project_point(PartialPoint::from_point(p), J);
}

PartialPointSet project_event(const Event& A, IndexSubset J) {
    const auto& space = A.space();
    space.check_subset(J);
    auto ids = J.ids();
    PartialPointSet out;
    for (auto idx : A.members()) {
        std::vector<std::pair<FactorId, ValueId>> entries;
        entries.reserve(ids.size());
        for (auto i : ids) entries.emplace_back(i, space.coordinate(idx, i));
        out.insert(PartialPoint(std::move(entries)));
    }
    return out;
}

PartialPoint merge(const PartialPoint& a, const PartialPoint& b) {
    if (a.domain().intersects(b.domain())) throw DisjointnessError("cannot merge families with overlapping domains");
    auto entries = a.entries();
    entries.insert(entries.end(), b.entries().begin(), b.entries().end());
    return PartialPoint(std::move(entries));
}

PartialPointSet cartesian_event(const PartialPointSet& B, const PartialPointSet& C) {
    if (!B.empty() && !C.empty() && B.begin()->domain().intersects(C.begin()->domain())) {
        throw DisjointnessError("Cartesian product over overlapping index sets");
    }
    PartialPointSet out;
    for (const auto& b : B) {
        for (const auto& c : C) out.insert(merge(b, c));
    }
    return out;
}

Event event_from_families(SpacePtr space, const PartialPointSet& families) {
    Event e(space);
    std::vector<PointIndex> indices;
    for (const auto& f : families) {
        if (f.domain() != space->all_factors()) throw DomainError("family does not cover every factor");
        Point p;
        for (const auto& entry : f.entries()) p.coords.push_back(entry.second);
        indices.push_back(encode(*space, p));
    }
    return Event::from_indices(std::move(space), indices);
}

}  // namespace fsm
