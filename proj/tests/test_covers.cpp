#include <catch2/catch_amalgamated.hpp>

#include "sglab/cover.hpp"

#include <set>

using namespace sglab;

TEST_CASE("symbolic depth helpers", "[covers]") {
    CHECK(sep_depth(1.0) == 0);
    CHECK(sep_depth(0.5) == 1);
    CHECK(sep_depth(0.25) == 2);
    CHECK(sep_depth(1.5) == -1);

    CHECK(cover_depth(1.0) == 1);
    CHECK(cover_depth(0.5) == 2);
    CHECK(cover_depth(0.3) == 2);
    CHECK(cover_depth(0.25) == 3);
}

TEST_CASE("bowen ball membership", "[covers]") {
    auto sys = GeneratorSystem::circle({2, 3});
    auto w = word_from_string("01", 2);
    CHECK(bowen_ball_contains(sys, w, 0.37, 0.5, 0.37));
    // d_w(0, 0.1) = max(0.1, 0.2, 0.4) = 0.4
    CHECK(bowen_ball_contains(sys, w, 0.0, 0.5, 0.1));
    CHECK_FALSE(bowen_ball_contains(sys, w, 0.0, 0.3, 0.1));
}

TEST_CASE("mismatch budget audit accepts slow growth and rejects n-1", "[covers]") {
    auto sq = audit_blowup(blowup_sqrt(), 1024);
    CHECK(sq.pass());

    auto quarter = audit_blowup(blowup_linear_fraction(4), 1024);
    CHECK(quarter.pass());

    auto bad = audit_blowup(blowup_identity_minus_one(), 1024);
    CHECK_FALSE(bad.pass());
    CHECK_FALSE(bad.ratio_small_at_range);  // (n-1)/n stays near 1
}

TEST_CASE("blowup ball counts mismatching orbit prefixes", "[covers]") {
    auto sys = GeneratorSystem::circle({2, 3});
    auto w = word_from_string("00", 2);

    // orbit of 0.3 under two doublings: 0.3 -> 0.6 -> 0.2, all above 0.1
    CHECK(blowup_mismatch_count(sys, w, 0.0, 0.1, 0.3) == 3);

    BlowupFunction half{"ceil_half_minus_one", [](long n) { return (n + 1) / 2 - 1; }};
    CHECK(half(3) == 1);
    CHECK_FALSE(blowup_ball_contains(sys, w, half, 0.0, 0.1, 0.3));

    BlowupFunction one{"one", [](long) { return 1L; }};
    CHECK(blowup_ball_contains(sys, w, one, 0.0, 0.1, 0.0));  // center, zero mismatches
    // any point of the plain Bowen ball has zero mismatches
    CHECK(blowup_ball_contains(sys, w, one, 0.0, 0.45, 0.1));
}

TEST_CASE("plain Bowen balls embed into every blown-up ball", "[covers]") {
    std::vector<GeneratorSystem> zoo;
    zoo.push_back(GeneratorSystem::circle({2, 3}));
    zoo.push_back(GeneratorSystem::full_shift(2, 2));
    auto g = blowup_sqrt();

    Rng rng(71);
    for (const auto& sys : zoo) {
        for (int trial = 0; trial < 200; ++trial) {
            auto w = sample_words(2, 1 + rng.below(5), 1, rng.next())[0];
            Point c = sys.random_point(rng);
            Point y = sys.random_point(rng);
            const double eps = 0.05 + 0.4 * rng.real01();
            if (bowen_ball_contains(sys, w, c, eps, y))
                CHECK(blowup_ball_contains(sys, w, g, c, eps, y));
        }
    }
}

TEST_CASE("separated sets on the full shift count distinct blocks", "[covers]") {
    auto sys = GeneratorSystem::full_shift(2);
    for (std::size_t n : {2, 3, 4}) {
        auto w = Word(std::vector<std::uint8_t>(n, 0), 1);
        auto pool = sys.grid_pool(std::int64_t(n) + 1);
        auto s = max_separated(sys, w, 1.0, pool);
        CHECK(s.exact);

        // independent count: distinct leading blocks of depth n+1
        std::set<std::vector<std::uint8_t>> blocks;
        for (const auto& p : pool) {
            std::vector<std::uint8_t> b;
            for (std::size_t t = 0; t <= n; ++t)
                b.push_back(std::get<SymPoint>(p).symbol(t));
            blocks.insert(b);
        }
        CHECK(s.points.size() == blocks.size());
        CHECK(s.points.size() == (std::size_t(1) << (n + 1)));
    }
}

TEST_CASE("singleton candidate pools give singleton separated sets", "[covers]") {
    auto sys = GeneratorSystem::circle({2, 3});
    auto s = max_separated(sys, word_from_string("01", 2), 0.2, {Point(0.3)});
    REQUIRE(s.points.size() == 1);
    CHECK(std::get<double>(s.points[0]) == 0.3);
}

TEST_CASE("coarse circle grid is fully separated under the doubling word", "[covers]") {
    auto sys = GeneratorSystem::circle({2, 3});
    auto w = word_from_string("00", 2);
    std::vector<Point> grid;
    for (int a = 0; a < 10; ++a) grid.push_back(double(a) / 10.0);

    // brute force first: every pair of grid points is 0.3-separated under d_w
    for (int a = 0; a < 10; ++a)
        for (int b = a + 1; b < 10; ++b)
            CHECK(sys.word_metric(w, grid[a], grid[b]) >= 0.3 - 1e-12);

    auto s = max_separated(sys, w, 0.3, grid);
    CHECK(s.points.size() == 10);
}

TEST_CASE("separated sets are pairwise separated and spanning", "[covers]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto shift = GeneratorSystem::full_shift(2, 2);

    Rng rng(13);
    for (int trial = 0; trial < 25; ++trial) {
        auto w = sample_words(2, 2 + rng.below(3), 1, rng.next())[0];
        const double eps = 0.1 + 0.3 * rng.real01();

        auto cpool = circle.grid_pool(50);
        auto cs = max_separated(circle, w, eps, cpool);
        for (std::size_t i = 0; i < cs.points.size(); ++i)
            for (std::size_t j = i + 1; j < cs.points.size(); ++j)
                CHECK(circle.word_metric(w, cs.points[i], cs.points[j]) >= eps - 1e-12);
        CHECK(separated_set_spans(circle, cs, cpool));

        auto spool = shift.grid_pool(5);
        auto ss = max_separated(shift, w, eps, spool);
        for (std::size_t i = 0; i < ss.points.size(); ++i)
            for (std::size_t j = i + 1; j < ss.points.size(); ++j)
                CHECK(shift.word_metric(w, ss.points[i], ss.points[j]) >= eps - 1e-12);
        CHECK(separated_set_spans(shift, ss, spool));
    }
}

TEST_CASE("separated counts shrink as the radius grows", "[covers]") {
    auto sys = GeneratorSystem::full_shift(2, 2);
    auto w = word_from_string("0110", 2);
    auto pool = sys.grid_pool(8);
    const auto n_half = max_separated(sys, w, 0.5, pool).points.size();
    const auto n_quarter = max_separated(sys, w, 0.25, pool).points.size();
    const auto n_eighth = max_separated(sys, w, 0.125, pool).points.size();
    CHECK(n_half <= n_quarter);
    CHECK(n_quarter <= n_eighth);
}

TEST_CASE("separated counts grow under word concatenation", "[covers]") {
    auto sys = GeneratorSystem::full_shift(2, 2);
    auto pool = sys.grid_pool(9);
    for (const char* base : {"0", "01", "101"}) {
        auto w = word_from_string(base, 2);
        auto ww = concat(w, word_from_string("10", 2));
        CHECK(max_separated(sys, ww, 0.25, pool).points.size() >=
              max_separated(sys, w, 0.25, pool).points.size());
    }
}

TEST_CASE("fixed-length covers partition the full shift into cylinders", "[covers]") {
    auto sys = GeneratorSystem::full_shift(2);
    for (std::size_t N : {2, 3, 4}) {
        auto w = Word(std::vector<std::uint8_t>(N, 0), 1);
        auto Z = sys.grid_pool(std::int64_t(N) + 1);
        auto cover = min_cover_fixed(sys, Z, w, 1.0);
        CHECK(cover.exact);
        CHECK(cover.verified_contains_all);
        CHECK(cover.balls.size() == (std::size_t(1) << (N + 1)));
    }
}

TEST_CASE("singleton sets need one ball", "[covers]") {
    auto sys = GeneratorSystem::circle({2});
    auto cover = min_cover_fixed(sys, {Point(0.42)}, word_from_string("00", 1), 0.05);
    CHECK(cover.balls.size() == 1);
    CHECK(cover.verified_contains_all);
}

TEST_CASE("doubling covers of the circle grid match the interval count", "[covers]") {
    auto sys = GeneratorSystem::circle({2});
    auto Z = sys.grid_pool(1024);
    auto w = word_from_string("000", 1);
    auto cover = min_cover_fixed(sys, Z, w, 0.1);
    CHECK(cover.verified_contains_all);
    // a (w, 0.1)-ball is an interval of length 2*0.1/2^3, so about 40 are needed
    CHECK(cover.balls.size() >= 20);
    CHECK(cover.balls.size() <= 80);

    // independent containment check
    for (const auto& z : Z) {
        bool inside = false;
        for (const auto& b : cover.balls)
            if (bowen_ball_contains(sys, b.word, b.center, 0.1, z)) { inside = true; break; }
        CHECK(inside);
    }
}

TEST_CASE("radii above the diameter cover everything with one ball", "[covers]") {
    auto sys = GeneratorSystem::full_shift(2);
    auto Z = sys.grid_pool(4);
    auto cover = min_cover_fixed(sys, Z, Word({0, 0}, 1), 1.5);
    CHECK(cover.balls.size() == 1);
    CHECK(cover.exact);
}

TEST_CASE("variable-length covers trade ball count against weight", "[covers]") {
    auto sys = GeneratorSystem::full_shift(2);
    // deep enough that every extended ball stays strictly coarser than the pool
    auto Z = sys.grid_pool(8);
    auto w = Word({0, 0, 0}, 1);
    auto fixed = min_cover_fixed(sys, Z, w, 0.5);

    // below log 2 an extension never pays off, so the covers coincide
    auto cheap = min_cover_variable(sys, Z, w, 0.5, 2, 0.5);
    CHECK(cheap.verified_contains_all);
    CHECK(cheap.balls.size() == fixed.balls.size());
    CHECK_THAT(cheap.weight(0.5), Catch::Matchers::WithinAbs(fixed.weight(0.5), 1e-12));

    // above log 2 longer words are cheaper per point covered
    auto steep = min_cover_variable(sys, Z, w, 0.5, 2, 1.0);
    CHECK(steep.verified_contains_all);
    CHECK(steep.weight(1.0) <= fixed.weight(1.0) + 1e-12);
    for (const auto& b : steep.balls) {
        CHECK(b.word.size() >= 3);
        CHECK(b.word.size() <= 5);
        CHECK(prefix_order(w, b.word));
    }
}
