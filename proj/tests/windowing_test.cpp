#include <doctest.h>

#include <random>
#include <set>

#include "pedtrack/windowing.hpp"
#include "oracles.hpp"

using namespace pedtrack;

namespace {

bool same_boxes(const std::vector<CandidateWindow>& got,
                const std::vector<BoundingBox>& expected)
{
    if (got.size() != expected.size())
        return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].box.x_start != expected[i].x_start ||
            got[i].box.y_start != expected[i].y_start)
            return false;
    }
    return true;
}

}   // namespace

TEST_CASE("occupancy threshold on a single window")
{
    Frame frame = Frame::create(4, 4, 1);
    std::vector<std::uint8_t> mask(16, 0);
    for (int i = 0; i < 9; ++i)
        mask[static_cast<std::size_t>(i)] = 1;
    WindowConfig cfg{4, 4, 1, 1, 0.5};
    const auto selected = select_windows(mask, frame, cfg);
    REQUIRE(selected.size() == 1);
    CHECK(selected[0].occupancy == 9);

    // 8 of 16 is exactly the threshold, 7 is below it
    mask[0] = 0;
    CHECK(select_windows(mask, frame, cfg).size() == 1);
    mask[1] = 0;
    CHECK(select_windows(mask, frame, cfg).empty());
}

TEST_CASE("all-zero mask yields no windows")
{
    Frame frame = Frame::create(32, 32, 1);
    std::vector<std::uint8_t> mask(32 * 32, 0);
    WindowConfig cfg{8, 8, 4, 4, 0.5};
    CHECK(select_windows(mask, frame, cfg).empty());
}

TEST_CASE("full mask yields the exact stride grid")
{
    Frame frame = Frame::create(8, 8, 1);
    std::vector<std::uint8_t> mask(64, 1);
    WindowConfig cfg{4, 4, 4, 4, 0.5};
    const auto selected = select_windows(mask, frame, cfg);
    REQUIRE(selected.size() == 4);
    CHECK(selected[0].box.x_start == 0);
    CHECK(selected[0].box.y_start == 0);
    CHECK(selected[1].box.x_start == 4);
    CHECK(selected[1].box.y_start == 0);
    CHECK(selected[2].box.x_start == 0);
    CHECK(selected[2].box.y_start == 4);
    CHECK(selected[3].box.x_start == 4);
    CHECK(selected[3].box.y_start == 4);
}

TEST_CASE("dimension mismatch and oversized windows are rejected")
{
    Frame frame = Frame::create(8, 8, 1);
    std::vector<std::uint8_t> mask(63, 1);
    WindowConfig cfg{4, 4, 4, 4, 0.5};
    CHECK_THROWS_AS(select_windows(mask, frame, cfg), ValidationError);
    mask.resize(64, 1);
    cfg.width = 9;
    CHECK_THROWS_AS(select_windows(mask, frame, cfg), ValidationError);
}

TEST_CASE("matches the brute-force enumerator on random masks")
{
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> frame_dim(6, 40);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int fw = frame_dim(rng);
        const int fh = frame_dim(rng);
        std::uniform_int_distribution<int> win_w(1, fw);
        std::uniform_int_distribution<int> win_h(1, fh);
        WindowConfig cfg;
        cfg.width = win_w(rng);
        cfg.height = win_h(rng);
        cfg.stride_x = 1 + static_cast<int>(unit(rng) * 6);
        cfg.stride_y = 1 + static_cast<int>(unit(rng) * 6);
        cfg.occupancy_fraction = 0.1 + 0.9 * unit(rng);

        Frame frame = Frame::create(fw, fh, 1);
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(fw) * fh);
        const double density = unit(rng);
        for (auto& m : mask)
            m = unit(rng) < density ? 1 : 0;

        const auto got = select_windows(mask, frame, cfg);
        const auto expected = oracles::select_windows(mask, fw, fh, cfg);
        CHECK(same_boxes(got, expected));
    }
}

TEST_CASE("adding foreground never removes a selected window")
{
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Frame frame = Frame::create(20, 20, 1);
        std::vector<std::uint8_t> mask(400);
        for (auto& m : mask)
            m = unit(rng) < 0.4 ? 1 : 0;
        WindowConfig cfg{6, 6, 3, 3, 0.5};

        const auto before = select_windows(mask, frame, cfg);
        std::vector<std::uint8_t> grown = mask;
        for (int extra = 0; extra < 30; ++extra)
            grown[static_cast<std::size_t>(unit(rng) * 399)] = 1;
        const auto after = select_windows(grown, frame, cfg);

        std::set<std::pair<int, int>> after_set;
        for (const auto& w : after)
            after_set.insert({w.box.x_start, w.box.y_start});
        for (const auto& w : before)
            CHECK(after_set.count({w.box.x_start, w.box.y_start}) == 1);
    }
}

TEST_CASE("returned boxes lie inside the frame and patches match the crop")
{
    Frame frame = Frame::create(13, 11, 1);
    for (std::size_t i = 0; i < frame.pixels.size(); ++i)
        frame.pixels[i] = static_cast<std::uint8_t>(i % 256);
    std::vector<std::uint8_t> mask(13 * 11, 1);
    WindowConfig cfg{5, 4, 3, 3, 0.5};
    for (const auto& w : select_windows(mask, frame, cfg)) {
        CHECK(w.box.inside(13, 11));
        CHECK(w.patch.pixels == frame.crop(w.box).pixels);
    }
}
