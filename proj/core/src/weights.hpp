#pragma once

// Exact integer point weights: P(w) = weight(w) / denominator for one common
// denominator. Every identity checked here is homogeneous in P, so comparisons
// run on the weights directly. Weights are kept in uint64 when the largest
// possible event weight fits, and in GMP integers otherwise.

#include "fsm/distribution.hpp"

#include <cstdint>
#include <vector>

namespace fsm::detail {

struct PointWeights {
    bool is_small = true;
    std::vector<std::uint64_t> small;
    std::vector<Integer> big;
    Integer denominator = 1;

    template <class F>
    decltype(auto) visit(F&& f) const {
        return is_small ? f(small) : f(big);
    }
};

PointWeights point_weights(const FactorizingDistribution& P);
PointWeights point_weights(const GeneralDistribution& P);

inline bool products_equal(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    __extension__ using u128 = unsigned __int128;
    return static_cast<u128>(a) * b == static_cast<u128>(c) * d;
}

inline bool products_equal(const Integer& a, const Integer& b, const Integer& c, const Integer& d) {
    return a * b == c * d;
}

inline bool is_zero(std::uint64_t w) { return w == 0; }
inline bool is_zero(const Integer& w) { return sgn(w) == 0; }

inline Integer to_integer(std::uint64_t w) {
    Integer out;
    mpz_import(out.get_mpz_t(), 1, 1, sizeof(w), 0, 0, &w);
    return out;
}
inline const Integer& to_integer(const Integer& w) { return w; }

template <class W>
W event_weight(const std::vector<W>& weights, const Event& A) {
    W total = 0;
    const auto& bits = A.bits();
    for (auto i = bits.find_first(); i != boost::dynamic_bitset<>::npos; i = bits.find_next(i)) total += weights[i];
    return total;
}

}  // namespace fsm::detail
