#include "fsm/history.hpp"

#include "fsm/error.hpp"

#include <algorithm>
#include <bit>

namespace fsm {

namespace {

constexpr int kProbePairs = 32;

// Scratch state for repeated projection queries over the members of one event.
class EventScanner {
public:
    explicit EventScanner(const Event& C)
        : space_(C.space()),
          event_(C),
          members_(C.members()),
          n_(space_.num_factors()),
          digits_(members_.size() * n_),
          stamps_(space_.size(), 0),
          values_(space_.size(), 0) {
        std::vector<std::uint64_t> cards(n_), strides(n_);
        for (std::uint32_t i = 0; i < n_; ++i) {
            cards[i] = space_.cardinality(FactorId{i});
            strides[i] = space_.stride(FactorId{i});
        }
        for (std::size_t k = 0; k < members_.size(); ++k) {
            auto rest = members_[k];
            for (std::size_t i = 0; i < n_; ++i) {
                digits_[k * n_ + i] = (rest % cards[i]) * strides[i];
                rest /= cards[i];
            }
        }
    }

    std::size_t size() const { return members_.size(); }
    const std::vector<PointIndex>& members() const { return members_; }

    // Dense ids of the members' restrictions to J, and how many there are.
    std::uint32_t dense_keys(IndexSubset J, std::vector<std::uint32_t>& out) {
        bump();
        out.resize(members_.size());
        std::uint32_t count = 0;
        for (std::size_t k = 0; k < members_.size(); ++k) {
            auto key = restrict(k, J);
            if (stamps_[key] != generation_) {
                stamps_[key] = generation_;
                values_[key] = count++;
            }
            out[k] = values_[key];
        }
        return count;
    }

    // Member k with digits outside J zeroed. Works from whichever side of J is smaller.
    PointIndex restrict(std::size_t k, IndexSubset J) const {
        const auto* d = &digits_[k * n_];
        auto sum = [d](std::uint64_t mask) {
            PointIndex out = 0;
            for (; mask != 0; mask &= mask - 1) out += d[std::countr_zero(mask)];
            return out;
        };
        if (J.size() * 2 <= n_) return sum(J.mask());
        return members_[k] - sum(J.complement(n_).mask());
    }

    bool disintegrates(IndexSubset J) {
        if (members_.size() <= 1) return true;
        const auto Jc = J.complement(space_.num_factors());
        // Random pairs first: a mixed point outside C refutes the product form.
        for (int k = 0; k < kProbePairs; ++k) {
            const auto a = next() % members_.size();
            const auto b = next() % members_.size();
            if (!event_.contains(restrict(a, J) + restrict(b, Jc))) return false;
        }
        const std::uint64_t left = distinct(J);
        const std::uint64_t right = distinct(Jc);
        return left * right == members_.size();
    }

    bool constant_on(FactorId i) const {
        for (std::size_t k = 1; k < members_.size(); ++k) {
            if (digits_[k * n_ + i.value] != digits_[i.value]) return false;
        }
        return true;
    }

private:
    std::uint64_t distinct(IndexSubset J) {
        bump();
        std::uint64_t count = 0;
        for (std::size_t k = 0; k < members_.size(); ++k) {
            auto key = restrict(k, J);
            if (stamps_[key] != generation_) {
                stamps_[key] = generation_;
                ++count;
            }
        }
        return count;
    }

    void bump() {
        if (++generation_ == 0) {
            std::fill(stamps_.begin(), stamps_.end(), 0);
            generation_ = 1;
        }
    }

    // splitmix64; fixed seed keeps every query deterministic.
    std::uint64_t next() {
        std::uint64_t z = (rng_state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    const FactoredSpace& space_;
    const Event& event_;
    std::vector<PointIndex> members_;
    std::size_t n_;
    // digits_[k * n_ + i] = digit i of member k times stride(i).
    std::vector<PointIndex> digits_;
    std::vector<std::uint32_t> stamps_;
    std::vector<ValueId> values_;
    std::uint32_t generation_ = 0;
    std::uint64_t rng_state_ = 0x5eed;
};

void check_capacity(const FactoredSpace& space, const HistoryOptions& options) {
    if (space.num_factors() > options.max_factors) {
        throw CapacityError("history enumeration is limited to " + std::to_string(options.max_factors) +
                            " factors; the space has " + std::to_string(space.num_factors()));
    }
}

void check_same(const SpacePtr& a, const SpacePtr& b) {
    if (!same_space(a, b)) throw SpaceMismatchError("operands live on different spaces");
}

// Maps a mask over positions of `ids` to the corresponding index subset.
IndexSubset select(const std::vector<FactorId>& ids, std::uint64_t positions) {
    IndexSubset out;
    for (; positions != 0; positions &= positions - 1) out.insert(ids[std::countr_zero(positions)]);
    return out;
}

}  // namespace

bool disintegrates(IndexSubset J, const Event& C) {
    C.space().check_subset(J);
    EventScanner scanner(C);
    return scanner.disintegrates(J);
}

bool generates(IndexSubset J, const Variable& X, const Event& C) {
    check_same(X.space_ptr(), C.space_ptr());
    return disintegrates(J, C) && is_derived(background(X.space_ptr(), J), X, C);
}

Decomposition::Decomposition(Event C, HistoryOptions options) : event_(std::move(C)) {
    const auto& space = event_.space();
    check_capacity(space, options);
    const auto n = space.num_factors();
    if (event_.empty()) {
        for (std::uint32_t i = 0; i < n; ++i) atoms_.push_back(IndexSubset{i});
        return;
    }

    EventScanner scanner(event_);
    IndexSubset remaining;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (scanner.constant_on(FactorId{i})) {
            atoms_.push_back(IndexSubset{i});
        } else {
            remaining.insert(FactorId{i});
        }
    }

    // `remaining` stays a union of atoms, so the atom of its lowest element is
    // the smallest disintegrating subset of `remaining` that contains it.
    while (!remaining.empty()) {
        auto ids = remaining.ids();
        const IndexSubset anchor{ids.front().value};
        ids.erase(ids.begin());
        const auto r = ids.size();
        IndexSubset atom = remaining;
        bool found = false;
        for (std::size_t s = 0; s < r && !found; ++s) {
            std::uint64_t combo = (std::uint64_t{1} << s) - 1;
            const std::uint64_t limit = std::uint64_t{1} << r;
            while (combo < limit) {
                auto candidate = anchor | select(ids, combo);
                if (scanner.disintegrates(candidate)) {
                    atom = candidate;
                    found = true;
                    break;
                }
                if (combo == 0) break;
                // Gosper's hack: next mask with the same popcount.
                const std::uint64_t c = combo & (~combo + 1);
                const std::uint64_t next = combo + c;
                combo = (((next ^ combo) >> 2) / c) | next;
            }
        }
        atoms_.push_back(atom);
        varying_.push_back(atom);
        remaining = remaining - atom;
    }
    members_ = scanner.members();
    for (auto atom : varying_) {
        auto& keys = keys_.emplace_back();
        key_counts_.push_back(scanner.dense_keys(atom.complement(n), keys));
    }
    std::sort(atoms_.begin(), atoms_.end(), [](IndexSubset a, IndexSubset b) {
        return std::countr_zero(a.mask()) < std::countr_zero(b.mask());
    });
}

bool Decomposition::disintegrated_by(IndexSubset J) const {
    for (auto atom : atoms_) {
        if (atom.intersects(J) && !atom.is_subset_of(J)) return false;
    }
    return true;
}

IndexSubset history(const Variable& X, const Decomposition& decomposition) {
    const auto& C = decomposition.event();
    check_same(X.space_ptr(), C.space_ptr());
    IndexSubset h;
    constexpr ValueId kUnset = ~ValueId{0};
    std::vector<ValueId> seen;
    const auto& members = decomposition.members_;
    for (std::size_t a = 0; a < decomposition.varying_.size(); ++a) {
        const auto& keys = decomposition.keys_[a];
        seen.assign(decomposition.key_counts_[a], kUnset);
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto x = X(members[k]);
            auto& slot = seen[keys[k]];
            if (slot == kUnset) {
                slot = x;
            } else if (slot != x) {
                h = h | decomposition.varying_[a];
                break;
            }
        }
    }
    return h;
}

IndexSubset history(const Variable& X, const Event& C, HistoryOptions options) {
    check_same(X.space_ptr(), C.space_ptr());
    return history(X, Decomposition(C, options));
}

IndexSubset history(const Variable& X, HistoryOptions options) {
    return history(X, Event::full(X.space_ptr()), options);
}

IndexSubset history_exhaustive(const Variable& X, const Event& C, HistoryOptions options) {
    check_same(X.space_ptr(), C.space_ptr());
    const auto& space = C.space();
    check_capacity(space, options);
    const auto n = space.num_factors();
    auto h = space.all_factors();
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        IndexSubset J(mask);
        if (generates(J, X, C)) h = h & J;
    }
    return h;
}

IndexSubset history_given_value(const Variable& X, const Variable& Z, ValueId z, HistoryOptions options) {
    return history(X, fiber(Z, z), options);
}

IndexSubset cohistory(const Event& A, const Event& C, HistoryOptions options) {
    return history(indicator(A), C, options).complement(A.space().num_factors());
}

std::optional<DistributionPair> relevance_witness(FactorId i, const Event& A, const Event& C, std::size_t trials,
                                                  Rng& rng, std::uint32_t denominator_bound) {
    check_same(A.space_ptr(), C.space_ptr());
    const auto& space = A.space();
    if (i.value >= space.num_factors()) throw DomainError("unknown factor id " + std::to_string(i.value));
    if (C.empty()) return std::nullopt;
    const auto AC = A & C;
    for (std::size_t t = 0; t < trials; ++t) {
        auto P = sample_factorizing(A.space_ptr(), rng, denominator_bound);
        auto Q = P.with_factor(i, sample_simplex_point(space.cardinality(i), rng, denominator_bound));
        // P(A|C) != Q(A|C), cross-multiplied; both P(C), Q(C) > 0 by positivity.
        if (prob_event(P, AC) * prob_event(Q, C) != prob_event(Q, AC) * prob_event(P, C)) {
            return DistributionPair{std::move(P), std::move(Q)};
        }
    }
    return std::nullopt;
}

}  // namespace fsm
