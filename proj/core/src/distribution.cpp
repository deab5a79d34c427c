#include "fsm/distribution.hpp"

#include "fsm/error.hpp"
#include "fsm/structural.hpp"
#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace fsm {

namespace {

void check_vector(const std::vector<Rational>& values, std::size_t expected, const std::string& what) {
    if (values.size() != expected) {
        throw DomainError(what + " has " + std::to_string(values.size()) + " entries, expected " +
                          std::to_string(expected));
    }
    Rational total = 0;
    for (const auto& v : values) {
        if (sgn(v) < 0) throw PreconditionError(what + " has a negative entry");
        total += v;
    }
    if (total != 1) throw PreconditionError(what + " sums to " + format_rational(total) + ", not 1");
}

void check_same(const SpacePtr& a, const SpacePtr& b) {
    if (!same_space(a, b)) throw SpaceMismatchError("operands live on different spaces");
}

Integer lcm_of_denominators(const std::vector<Rational>& values) {
    Integer l = 1;
    for (const auto& v : values) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), v.get_den_mpz_t());
    return l;
}

// Fills weights[index] = prod_i numerators[i][digit_i(index)] by walking the
// odometer from factor 0 upward and reusing suffix products.
template <class W>
void fill_product_weights(const FactoredSpace& space, const std::vector<std::vector<W>>& numerators,
                          std::vector<W>& weights) {
    const auto n = space.num_factors();
    weights.assign(space.size(), W(0));
    std::vector<std::uint32_t> digits(n, 0);
    // suffix[i] = prod_{k >= i} numerators[k][digits[k]]; suffix[n] = 1.
    std::vector<W> suffix(n + 1, W(1));
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * numerators[i][0];
    for (PointIndex index = 0; index < space.size(); ++index) {
        weights[index] = suffix[0];
        std::size_t k = 0;
        while (k < n && ++digits[k] == space.cardinality(FactorId{static_cast<std::uint32_t>(k)})) {
            digits[k] = 0;
            ++k;
        }
        if (k == n) break;
        for (std::size_t i = k + 1; i-- > 0;) suffix[i] = suffix[i + 1] * numerators[i][digits[i]];
    }
}

template <class W>
IndependenceVerdict cond_indep_weights(const std::vector<W>& weights, const Variable& X, const Variable& Y,
                                       const std::optional<Variable>& Z) {
    std::vector<PointIndex> order;
    order.reserve(weights.size());
    for (PointIndex i = 0; i < weights.size(); ++i) {
        if (!detail::is_zero(weights[i])) order.push_back(i);
    }
    if (Z) {
        std::stable_sort(order.begin(), order.end(), [&](PointIndex a, PointIndex b) { return (*Z)(a) < (*Z)(b); });
    }

    std::unordered_map<ValueId, W> mx, my;
    std::unordered_map<std::uint64_t, W> mxy;
    std::vector<ValueId> xs, ys;
    std::size_t begin = 0;
    while (begin < order.size()) {
        const ValueId z = Z ? (*Z)(order[begin]) : 0;
        std::size_t end = begin;
        W wz = 0;
        mx.clear();
        my.clear();
        mxy.clear();
        for (; end < order.size() && (!Z || (*Z)(order[end]) == z); ++end) {
            const auto idx = order[end];
            const auto& w = weights[idx];
            wz += w;
            mx[X(idx)] += w;
            my[Y(idx)] += w;
            mxy[(std::uint64_t{X(idx)} << 32) | Y(idx)] += w;
        }
        begin = end;

        xs.clear();
        ys.clear();
        for (const auto& e : mx) xs.push_back(e.first);
        for (const auto& e : my) ys.push_back(e.first);
        std::sort(xs.begin(), xs.end());
        std::sort(ys.begin(), ys.end());
        const W zero = 0;
        for (auto x : xs) {
            for (auto y : ys) {
                auto it = mxy.find((std::uint64_t{x} << 32) | y);
                const W& wxy = it == mxy.end() ? zero : it->second;
                if (!detail::products_equal(mx[x], my[y], wxy, wz)) {
                    return IndependenceVerdict{false, std::array<ValueId, 3>{x, y, z}};
                }
            }
        }
    }
    return IndependenceVerdict{true, std::nullopt};
}

template <class Dist>
bool cond_indep_events(const Dist& P, const Event& A, const Event& B, const Event& C) {
    check_same(P.space_ptr(), A.space_ptr());
    check_same(A.space_ptr(), B.space_ptr());
    check_same(A.space_ptr(), C.space_ptr());
    const auto weights = detail::point_weights(P);
    const auto AC = A & C;
    const auto BC = B & C;
    const auto ABC = AC & B;
    return weights.visit([&](const auto& w) {
        return detail::products_equal(detail::event_weight(w, AC), detail::event_weight(w, BC),
                                      detail::event_weight(w, ABC), detail::event_weight(w, C));
    });
}

template <class Dist>
IndependenceVerdict cond_indep_vars_impl(const Dist& P, const Variable& X, const Variable& Y,
                                         const std::optional<Variable>& Z) {
    check_same(P.space_ptr(), X.space_ptr());
    check_same(X.space_ptr(), Y.space_ptr());
    if (Z) check_same(X.space_ptr(), Z->space_ptr());
    const auto weights = detail::point_weights(P);
    return weights.visit([&](const auto& w) { return cond_indep_weights(w, X, Y, Z); });
}

}  // namespace

namespace detail {

PointWeights point_weights(const FactorizingDistribution& P) {
    const auto& space = P.space();
    const auto n = space.num_factors();
    std::vector<std::vector<Integer>> numerators(n);
    PointWeights out;
    Integer max_weight = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& values = P.factors()[i];
        const auto den = lcm_of_denominators(values);
        out.denominator *= den;
        Integer largest = 0;
        for (const auto& v : values) {
            Integer num = v.get_num() * (den / v.get_den());
            largest = std::max(largest, num);
            numerators[i].push_back(std::move(num));
        }
        max_weight *= largest;
    }
    // Event weights are bounded by |Omega| times the largest point weight.
    const Integer bound = max_weight * Integer(std::to_string(space.size()));
    out.is_small = mpz_sizeinbase(bound.get_mpz_t(), 2) <= 63;
    if (out.is_small) {
        std::vector<std::vector<std::uint64_t>> small(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (const auto& v : numerators[i]) small[i].push_back(v.get_ui());
        }
        fill_product_weights(space, small, out.small);
    } else {
        fill_product_weights(space, numerators, out.big);
    }
    return out;
}

PointWeights point_weights(const GeneralDistribution& P) {
    PointWeights out;
    out.denominator = lcm_of_denominators(P.probabilities());
    out.is_small = mpz_sizeinbase(out.denominator.get_mpz_t(), 2) <= 63;
    if (out.is_small) {
        out.small.reserve(P.probabilities().size());
        for (const auto& p : P.probabilities()) {
            Integer w = p.get_num() * (out.denominator / p.get_den());
            out.small.push_back(w.get_ui());
        }
    } else {
        out.big.reserve(P.probabilities().size());
        for (const auto& p : P.probabilities()) out.big.push_back(p.get_num() * (out.denominator / p.get_den()));
    }
    return out;
}

}  // namespace detail

FactorizingDistribution::FactorizingDistribution(SpacePtr space, std::vector<std::vector<Rational>> factors)
    : space_(std::move(space)), factors_(std::move(factors)) {
    if (factors_.size() != space_->num_factors()) {
        throw DomainError("factorizing distribution has " + std::to_string(factors_.size()) +
                          " factor vectors, space has " + std::to_string(space_->num_factors()) + " factors");
    }
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        FactorId id{static_cast<std::uint32_t>(i)};
        check_vector(factors_[i], space_->cardinality(id), "factor '" + space_->label(id) + "'");
    }
}

FactorizingDistribution FactorizingDistribution::uniform(SpacePtr space) {
    std::vector<std::vector<Rational>> factors;
    for (const auto& f : space->factors()) factors.emplace_back(f.cardinality, Rational(1, f.cardinality));
    return FactorizingDistribution(std::move(space), std::move(factors));
}

Rational FactorizingDistribution::point_probability(PointIndex index) const {
    Rational p = 1;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
        p *= factors_[i][space_->coordinate(index, FactorId{static_cast<std::uint32_t>(i)})];
    }
    return p;
}

FactorizingDistribution FactorizingDistribution::with_factor(FactorId i, std::vector<Rational> values) const {
    auto copy = factors_;
    copy.at(i.value) = std::move(values);
    return FactorizingDistribution(space_, std::move(copy));
}

GeneralDistribution FactorizingDistribution::to_general() const {
    const auto weights = detail::point_weights(*this);
    std::vector<Rational> probs(space_->size());
    weights.visit([&](const auto& w) {
        for (std::size_t i = 0; i < probs.size(); ++i) {
            probs[i] = Rational(detail::to_integer(w[i]), weights.denominator);
            probs[i].canonicalize();
        }
    });
    return GeneralDistribution(space_, std::move(probs));
}

bool operator==(const FactorizingDistribution& a, const FactorizingDistribution& b) {
    return same_space(a.space_, b.space_) && a.factors_ == b.factors_;
}

GeneralDistribution::GeneralDistribution(SpacePtr space, std::vector<Rational> probabilities)
    : space_(std::move(space)), probs_(std::move(probabilities)) {
    check_vector(probs_, space_->size(), "distribution");
}

bool operator==(const GeneralDistribution& a, const GeneralDistribution& b) {
    return same_space(a.space_, b.space_) && a.probs_ == b.probs_;
}

Rational prob_event(const GeneralDistribution& P, const Event& A) {
    check_same(P.space_ptr(), A.space_ptr());
    Rational total = 0;
    for (auto idx : A.members()) total += P[idx];
    return total;
}

Rational prob_event(const FactorizingDistribution& P, const Event& A) {
    check_same(P.space_ptr(), A.space_ptr());
    const auto weights = detail::point_weights(P);
    Rational out = weights.visit(
        [&](const auto& w) { return Rational(detail::to_integer(detail::event_weight(w, A)), weights.denominator); });
    out.canonicalize();
    return out;
}

bool factorizes(const GeneralDistribution& P) {
    const auto& space = P.space();
    const auto n = space.num_factors();
    std::vector<std::vector<Rational>> marginals(n);
    for (std::size_t i = 0; i < n; ++i) marginals[i].assign(space.factors()[i].cardinality, Rational(0));
    for (PointIndex idx = 0; idx < space.size(); ++idx) {
        for (std::size_t i = 0; i < n; ++i) {
            marginals[i][space.coordinate(idx, FactorId{static_cast<std::uint32_t>(i)})] += P[idx];
        }
    }
    for (PointIndex idx = 0; idx < space.size(); ++idx) {
        Rational product = 1;
        for (std::size_t i = 0; i < n; ++i) {
            product *= marginals[i][space.coordinate(idx, FactorId{static_cast<std::uint32_t>(i)})];
        }
        if (product != P[idx]) return false;
    }
    return true;
}

bool cond_indep(const GeneralDistribution& P, const Event& A, const Event& B, const Event& C) {
    return cond_indep_events(P, A, B, C);
}

bool cond_indep(const FactorizingDistribution& P, const Event& A, const Event& B, const Event& C) {
    return cond_indep_events(P, A, B, C);
}

IndependenceVerdict cond_indep_vars(const GeneralDistribution& P, const Variable& X, const Variable& Y,
                                    const std::optional<Variable>& Z) {
    return cond_indep_vars_impl(P, X, Y, Z);
}

IndependenceVerdict cond_indep_vars(const FactorizingDistribution& P, const Variable& X, const Variable& Y,
                                    const std::optional<Variable>& Z) {
    return cond_indep_vars_impl(P, X, Y, Z);
}

bool cond_indep_vars_approx(const FactorizingDistribution& P, const Variable& X, const Variable& Y,
                            const std::optional<Variable>& Z, double tolerance) {
    check_same(P.space_ptr(), X.space_ptr());
    check_same(X.space_ptr(), Y.space_ptr());
    if (Z) check_same(X.space_ptr(), Z->space_ptr());
    const auto& space = P.space();
    std::vector<std::vector<double>> factors;
    for (const auto& f : P.factors()) {
        auto& row = factors.emplace_back();
        for (const auto& v : f) row.push_back(v.get_d());
    }
    const std::size_t kx = X.num_values(), ky = Y.num_values(), kz = Z ? Z->num_values() : 1;
    std::vector<double> pxyz(kx * ky * kz, 0.0);
    for (PointIndex w = 0; w < space.size(); ++w) {
        double p = 1.0;
        for (std::uint32_t i = 0; i < space.num_factors() && p != 0.0; ++i) p *= factors[i][space.coordinate(w, FactorId{i})];
        pxyz[(std::size_t{Z ? (*Z)(w) : 0} * kx + X(w)) * ky + Y(w)] += p;
    }
    for (std::size_t z = 0; z < kz; ++z) {
        const double* cell = &pxyz[z * kx * ky];
        std::vector<double> px(kx, 0.0), py(ky, 0.0);
        double pz = 0.0;
        for (std::size_t x = 0; x < kx; ++x) {
            for (std::size_t y = 0; y < ky; ++y) {
                px[x] += cell[x * ky + y];
                py[y] += cell[x * ky + y];
                pz += cell[x * ky + y];
            }
        }
        for (std::size_t x = 0; x < kx; ++x) {
            for (std::size_t y = 0; y < ky; ++y) {
                if (std::abs(px[x] * py[y] - cell[x * ky + y] * pz) > tolerance * pz * pz) return false;
            }
        }
    }
    return true;
}

std::vector<Rational> sample_simplex_point(std::uint32_t cardinality, Rng& rng, std::uint32_t denominator_bound) {
    if (denominator_bound < 2) throw PreconditionError("denominator bound must be at least 2");
    std::vector<std::uint64_t> draws(cardinality);
    std::uint64_t total = 0;
    for (auto& d : draws) {
        d = rng() % denominator_bound + 1;
        total += d;
    }
    std::vector<Rational> out;
    out.reserve(cardinality);
    for (auto d : draws) {
        Rational r(Integer(std::to_string(d)), Integer(std::to_string(total)));
        r.canonicalize();
        out.push_back(std::move(r));
    }
    return out;
}

FactorizingDistribution sample_factorizing(SpacePtr space, Rng& rng, std::uint32_t denominator_bound) {
    std::vector<std::vector<Rational>> factors;
    factors.reserve(space->num_factors());
    for (const auto& f : space->factors()) factors.push_back(sample_simplex_point(f.cardinality, rng, denominator_bound));
    return FactorizingDistribution(std::move(space), std::move(factors));
}

bool soundness_check(const Variable& X, const Variable& Y, const std::optional<Variable>& Z,
                     const FactorizingDistribution& P) {
    return !structurally_independent(X, Y, Z) || cond_indep_vars(P, X, Y, Z).independent;
}

std::optional<FactorizingDistribution> completeness_witness(const Variable& X, const Variable& Y,
                                                            const std::optional<Variable>& Z, std::size_t trials,
                                                            Rng& rng, std::uint32_t denominator_bound) {
    for (std::size_t t = 0; t < trials; ++t) {
        auto P = sample_factorizing(X.space_ptr(), rng, denominator_bound);
        if (!cond_indep_vars(P, X, Y, Z).independent) return P;
    }
    return std::nullopt;
}

Event support(const GeneralDistribution& P) {
    boost::dynamic_bitset<> bits(P.space().size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (sgn(P[i]) > 0) bits.set(i);
    }
    return Event(P.space_ptr(), std::move(bits));
}

Event support(const FactorizingDistribution& P) {
    const auto& space = P.space();
    boost::dynamic_bitset<> bits(space.size());
    for (PointIndex idx = 0; idx < space.size(); ++idx) {
        bool positive = true;
        for (std::size_t i = 0; i < space.num_factors() && positive; ++i) {
            positive = sgn(P.factors()[i][space.coordinate(idx, FactorId{static_cast<std::uint32_t>(i)})]) > 0;
        }
        if (positive) bits.set(idx);
    }
    return Event(P.space_ptr(), std::move(bits));
}

GeneralDistribution delta(SpacePtr space, const Point& w) {
    std::vector<Rational> probs(space->size(), Rational(0));
    probs[encode(*space, w)] = 1;
    return GeneralDistribution(std::move(space), std::move(probs));
}

PointIndex subspace_index(const FactoredSpace& parent, IndexSubset J, PointIndex index) {
    PointIndex out = 0;
    PointIndex stride = 1;
    for (auto i : J.ids()) {
        out += parent.coordinate(index, i) * stride;
        stride *= parent.cardinality(i);
    }
    return out;
}

SubDistribution marginal(const GeneralDistribution& P, IndexSubset J) {
    const auto& space = P.space();
    auto sub = std::make_shared<const FactoredSpace>(space.subspace(J));
    std::vector<Rational> probs(sub->size(), Rational(0));
    for (PointIndex idx = 0; idx < space.size(); ++idx) probs[subspace_index(space, J, idx)] += P[idx];
    return SubDistribution{J, GeneralDistribution(std::move(sub), std::move(probs))};
}

SubDistribution outer(const FactoredSpace& parent, const SubDistribution& PJ, const SubDistribution& PK) {
    if (PJ.domain.intersects(PK.domain)) throw DisjointnessError("outer product over overlapping index sets");
    parent.check_subset(PJ.domain);
    parent.check_subset(PK.domain);
    if (!(PJ.distribution.space() == parent.subspace(PJ.domain)) ||
        !(PK.distribution.space() == parent.subspace(PK.domain))) {
        throw SpaceMismatchError("marginal does not live on the matching subspace");
    }
    const auto domain = PJ.domain | PK.domain;
    auto sub = std::make_shared<const FactoredSpace>(parent.subspace(domain));
    const auto ids = domain.ids();
    std::vector<Rational> probs(sub->size());
    for (PointIndex t = 0; t < sub->size(); ++t) {
        PointIndex j_index = 0, k_index = 0, j_stride = 1, k_stride = 1;
        for (std::size_t pos = 0; pos < ids.size(); ++pos) {
            const auto digit = sub->coordinate(t, FactorId{static_cast<std::uint32_t>(pos)});
            const auto card = parent.cardinality(ids[pos]);
            if (PJ.domain.contains(ids[pos])) {
                j_index += digit * j_stride;
                j_stride *= card;
            } else {
                k_index += digit * k_stride;
                k_stride *= card;
            }
        }
        probs[t] = PJ.distribution[j_index] * PK.distribution[k_index];
    }
    return SubDistribution{domain, GeneralDistribution(std::move(sub), std::move(probs))};
}

}  // namespace fsm
