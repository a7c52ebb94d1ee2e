#include <doctest.h>

#include "mfgabs/error.hpp"
#include "mfgabs/grid.hpp"
#include "mfgabs/policy.hpp"

using namespace mfgabs;

TEST_CASE("grid geometry")
{
    const Grid g{2.0, 4, -1.0, 3.0, 8};
    CHECK(g.dt() == 0.5);
    CHECK(g.dx() == 0.5);
    CHECK(g.t(4) == 2.0);
    CHECK(g.x(8) == 3.0);
    CHECK(g.time_points() == 5);
    CHECK(g.state_points() == 9);
    CHECK(g.time_index(0.0) == 0);
    CHECK(g.time_index(0.49) == 0);
    CHECK(g.time_index(0.5) == 1);
    CHECK(g.time_index(2.0) == 4);
    CHECK(g.time_index(5.0) == 4);
    CHECK_NOTHROW(g.validate());
    CHECK_THROWS_AS((Grid{1.0, 0, 0.0, 1.0, 4}.validate()), ConfigError);
    CHECK_THROWS_AS((Grid{1.0, 4, 0.0, 1.0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((Grid{0.0, 4, 0.0, 1.0, 4}.validate()), ConfigError);
    CHECK_THROWS_AS((Grid{1.0, 4, 1.0, 1.0, 4}.validate()), ConfigError);
}

TEST_CASE("feedback policy interpolation and clamping")
{
    const Grid g{1.0, 2, 0.0, 2.0, 2};
    const ActionSet gamma{-1.0, 1.0};
    FeedbackPolicy p(g, gamma, 0.0);
    p.set_node(0, 0, -1.0);
    p.set_node(0, 1, 1.0);
    p.set_node(0, 2, 5.0);  // clamped into Γ
    CHECK(p.node(0, 2) == 1.0);
    CHECK(p.at_step(0, 0.5) == doctest::Approx(0.0));
    CHECK(p.at_step(0, -3.0) == -1.0);  // clamped to the grid box
    CHECK(p.at_step(0, 9.0) == 1.0);
    // piecewise constant in time: row 0 acts on [0, 0.5)
    CHECK(p(0.49, 0.5) == doctest::Approx(0.0));
    CHECK(p(0.5, 0.5) == 0.0);
    CHECK(FeedbackPolicy::constant(g, gamma, 0.25)(0.7, 1.3) == 0.25);
    CHECK_THROWS(FeedbackPolicy::constant(g, gamma, 2.0));
}
