#include <doctest.h>

#include <random>

#include "pedtrack/core.hpp"

using namespace pedtrack;

TEST_CASE("centroid of spec boxes")
{
    CHECK(centroid({0, 0, 4, 2}).x == doctest::Approx(2.0));
    CHECK(centroid({0, 0, 4, 2}).y == doctest::Approx(1.0));
    CHECK(centroid({10, 20, 80, 32}).x == doctest::Approx(50.0));
    CHECK(centroid({10, 20, 80, 32}).y == doctest::Approx(36.0));
    CHECK(centroid({5, 5, 1, 1}).x == doctest::Approx(5.5));
    CHECK(centroid({5, 5, 1, 1}).y == doctest::Approx(5.5));
}

TEST_CASE("centroid lies inside its box")
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> coord(-50, 50);
    std::uniform_int_distribution<int> extent(1, 100);
    for (int i = 0; i < 200; ++i) {
        const BoundingBox box{coord(rng), coord(rng), extent(rng), extent(rng)};
        const Point c = centroid(box);
        CHECK(c.x >= box.x_start);
        CHECK(c.x <= box.x_start + box.width);
        CHECK(c.y >= box.y_start);
        CHECK(c.y <= box.y_start + box.height);
    }
}

TEST_CASE("euclidean distance basics")
{
    CHECK(euclidean_distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(euclidean_distance({2.5, 2.5}, {2.5, 2.5}) == 0.0);
    CHECK(euclidean_distance({1, 1}, {2, 2}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("euclidean distance is a metric on random triples")
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> coord(-100.0, 100.0);
    for (int i = 0; i < 500; ++i) {
        const Point a{coord(rng), coord(rng)};
        const Point b{coord(rng), coord(rng)};
        const Point c{coord(rng), coord(rng)};
        const double ab = euclidean_distance(a, b);
        const double ba = euclidean_distance(b, a);
        CHECK(ab == ba);
        CHECK(ab >= 0.0);
        CHECK(euclidean_distance(a, a) == 0.0);
        CHECK(ab <= euclidean_distance(a, c) + euclidean_distance(c, b) + 1e-9);
    }
}

TEST_CASE("frame shape validation and cropping")
{
    CHECK_THROWS_AS(Frame::create(0, 4, 1), ValidationError);
    CHECK_THROWS_AS(Frame::create(4, 4, 2), ValidationError);

    Frame f = Frame::create(4, 3, 1);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x)
            f.at(x, y) = static_cast<std::uint8_t>(10 * y + x);
    const Frame crop = f.crop({1, 1, 2, 2});
    CHECK(crop.width == 2);
    CHECK(crop.height == 2);
    CHECK(crop.at(0, 0) == 11);
    CHECK(crop.at(1, 1) == 22);
    CHECK_THROWS_AS(f.crop({3, 0, 2, 2}), ValidationError);
}
