#include "fsm/error.hpp"
#include "fsm/random.hpp"
#include "fsm/space.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace fsm;

namespace {

PartialPoint family(std::vector<std::pair<std::uint32_t, ValueId>> entries) {
    std::vector<std::pair<FactorId, ValueId>> out;
    for (auto [i, v] : entries) out.push_back({FactorId{i}, v});
    return PartialPoint(std::move(out));
}

}  // namespace

TEST(Encode, ZeroPoint) {
    auto s = make_space({2, 2});
    EXPECT_EQ(encode(*s, Point{{0, 0}}), 0u);
}

TEST(Encode, FactorZeroIsFastest) {
    auto s = make_space({2, 2});
    EXPECT_EQ(encode(*s, Point{{1, 0}}), 1u);
    EXPECT_EQ(encode(*s, Point{{0, 1}}), 2u);
}

TEST(Encode, AllSixPointsOfTwoByThree) {
    auto s = make_space({2, 3});
    EXPECT_EQ(encode(*s, Point{{1, 2}}), 5u);
    // hand enumeration: (0,0) (1,0) (0,1) (1,1) (0,2) (1,2)
    const std::vector<Point> expected{{{0, 0}}, {{1, 0}}, {{0, 1}}, {{1, 1}}, {{0, 2}}, {{1, 2}}};
    for (PointIndex k = 0; k < 6; ++k) {
        EXPECT_EQ(decode(*s, k), expected[k]);
        EXPECT_EQ(encode(*s, expected[k]), k);
    }
}

TEST(Encode, RejectsBadPoints) {
    auto s = make_space({2, 3});
    EXPECT_THROW(encode(*s, Point{{2, 0}}), InvalidPointError);
    EXPECT_THROW(encode(*s, Point{{0}}), InvalidPointError);
    EXPECT_THROW(decode(*s, 6), InvalidPointError);
}

TEST(Encode, RoundTripOnRandomSpaces) {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        auto s = random_space(rng, {.min_factors = 1, .max_factors = 5, .max_cardinality = 4, .max_size = 1024});
        for (PointIndex k = 0; k < s->size(); ++k) ASSERT_EQ(encode(*s, decode(*s, k)), k);
    }
}

TEST(Space, Validation) {
    EXPECT_THROW(make_space({2, 0}), DomainError);
    EXPECT_THROW(make_space(std::vector<Factor>{{"a", 2}, {"a", 2}}), DomainError);
    EXPECT_THROW(make_space(std::vector<Factor>{{"", 2}}), DomainError);
    EXPECT_THROW(make_space_from_cardinalities({16, 16, 16}, 4000), CapacityError);
    EXPECT_NO_THROW(make_space_from_cardinalities({16, 16, 16}, 4096));
}

TEST(Space, EmptyIndexSetHasOnePoint) {
    auto s = make_space(std::vector<Factor>{});
    EXPECT_EQ(s->size(), 1u);
    EXPECT_EQ(decode(*s, 0), Point{});
}

TEST(Space, RestrictAndMix) {
    auto s = make_space({2, 3, 2});
    const auto k = encode(*s, Point{{1, 2, 1}});
    EXPECT_EQ(decode(*s, s->restrict_index(k, IndexSubset{0, 2})), (Point{{1, 0, 1}}));
    const auto other = encode(*s, Point{{0, 1, 0}});
    EXPECT_EQ(decode(*s, s->mix_indices(k, other, IndexSubset{1})), (Point{{0, 2, 0}}));
}

TEST(ProjectPoint, DefinitionUnfolding) {
    EXPECT_EQ(project_point(Point{{0, 1, 1}}, IndexSubset{0, 2}), family({{0, 0}, {2, 1}}));
    EXPECT_EQ(project_point(Point{{1, 0, 2}}, IndexSubset{1}), family({{1, 0}}));
}

TEST(ProjectPoint, EmptyIndexSetGivesEmptyFamily) {
    EXPECT_TRUE(project_point(Point{{0, 1}}, IndexSubset{}).empty());
}

TEST(ProjectPoint, OutsideDomainThrows) {
    EXPECT_THROW(project_point(family({{0, 1}}), IndexSubset{1}), DomainError);
}

TEST(ProjectEvent, CoinAgreement) {
    auto s = make_space({2, 2});
    auto A = Event::from_points(s, {Point{{0, 0}}, Point{{1, 1}}});
    EXPECT_EQ(project_event(A, IndexSubset{0}), (PartialPointSet{family({{0, 0}}), family({{0, 1}})}));
}

TEST(ProjectEvent, FullSpace) {
    auto s = make_space({2, 2});
    EXPECT_EQ(project_event(Event::full(s), IndexSubset{1}), (PartialPointSet{family({{1, 0}}), family({{1, 1}})}));
}

TEST(ProjectEvent, DuplicatesCollapse) {
    auto s = make_space({2, 2});
    auto A = Event::from_points(s, {Point{{0, 0}}, Point{{0, 1}}});
    EXPECT_EQ(project_event(A, IndexSubset{0}), PartialPointSet{family({{0, 0}})});
}

TEST(ProjectEvent, EmptyIndexSetOfNonEmptyEvent) {
    auto s = make_space({2, 2});
    auto A = Event::from_points(s, {Point{{1, 0}}});
    const auto proj = project_event(A, IndexSubset{});
    ASSERT_EQ(proj.size(), 1u);
    EXPECT_TRUE(proj.begin()->empty());
    EXPECT_TRUE(project_event(Event(s), IndexSubset{}).empty());
}

TEST(Merge, DefinitionUnfolding) {
    EXPECT_EQ(merge(family({{0, 1}}), family({{1, 0}})), PartialPoint::from_point(Point{{1, 0}}));
    EXPECT_EQ(merge(PartialPoint{}, family({{0, 0}, {1, 1}})), family({{0, 0}, {1, 1}}));
}

TEST(Merge, OverlapThrows) {
    EXPECT_THROW(merge(family({{0, 1}}), family({{0, 1}, {1, 0}})), DisjointnessError);
}

TEST(Merge, Commutative) {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::pair<std::uint32_t, ValueId>> a, b;
        for (std::uint32_t i = 0; i < 6; ++i) {
            switch (rng() % 3) {
                case 0: a.push_back({i, static_cast<ValueId>(rng() % 3)}); break;
                case 1: b.push_back({i, static_cast<ValueId>(rng() % 3)}); break;
                default: break;
            }
        }
        ASSERT_EQ(merge(family(a), family(b)), merge(family(b), family(a)));
    }
}

TEST(Cartesian, FullProduct) {
    auto s = make_space({2, 2});
    PartialPointSet B{family({{0, 0}}), family({{0, 1}})};
    PartialPointSet C{family({{1, 0}}), family({{1, 1}})};
    EXPECT_EQ(event_from_families(s, cartesian_event(B, C)), Event::full(s));
}

TEST(Cartesian, EmptyAbsorbs) {
    PartialPointSet C{family({{1, 0}})};
    EXPECT_TRUE(cartesian_event({}, C).empty());
    EXPECT_TRUE(cartesian_event(C, {}).empty());
}

TEST(Cartesian, HandEnumeratedMerges) {
    PartialPointSet B{family({{0, 0}})};
    PartialPointSet C{family({{1, 0}, {2, 1}}), family({{1, 1}, {2, 0}})};
    PartialPointSet expected{PartialPoint::from_point(Point{{0, 0, 1}}), PartialPoint::from_point(Point{{0, 1, 0}})};
    EXPECT_EQ(cartesian_event(B, C), expected);
}

TEST(Cartesian, OverlappingDomainsThrow) {
    PartialPointSet B{family({{0, 0}})};
    PartialPointSet C{family({{0, 1}})};
    EXPECT_THROW(cartesian_event(B, C), DisjointnessError);
}

TEST(Event, SetOperations) {
    auto s = make_space({2, 2});
    auto A = Event::from_indices(s, {0, 3});
    auto B = Event::from_indices(s, {0, 1});
    EXPECT_EQ((A & B).members(), std::vector<PointIndex>{0});
    EXPECT_EQ((A | B).members(), (std::vector<PointIndex>{0, 1, 3}));
    EXPECT_EQ(A.complement().members(), (std::vector<PointIndex>{1, 2}));
    EXPECT_EQ(A.count(), 2u);
}

TEST(IndexSubset, Basics) {
    IndexSubset J{0, 2};
    EXPECT_EQ(J.size(), 2u);
    EXPECT_TRUE(J.contains(FactorId{2}));
    EXPECT_FALSE(J.contains(FactorId{1}));
    EXPECT_EQ(J.complement(3), IndexSubset{1});
    EXPECT_TRUE(IndexSubset{0}.is_subset_of(J));
    EXPECT_EQ(IndexSubset::all(3).mask(), 7u);
}
