#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sglab/measure.hpp"

using namespace sglab;

namespace {

// Eventually the orbit average of the leading symbol oscillates: runs of 0s
// and 1s whose lengths double, so the running density swings between ~1/3 and
// ~2/3 forever.
SymPoint blocks_point(std::size_t need) {
    std::vector<std::uint8_t> head;
    std::uint8_t sym = 0;
    for (std::size_t len = 1; head.size() < need; len *= 2) {
        head.insert(head.end(), len, sym);
        sym = std::uint8_t(1 - sym);
    }
    return SymPoint::make(std::move(head), {0}, 2);
}

DiscreteMeasure random_state_measure(Rng& rng, std::int64_t resolution, std::size_t cells) {
    DiscreteMeasure mu;
    mu.resolution = resolution;
    mu.mass.resize(cells);
    for (double& v : mu.mass) v = 1e-3 + double(rng.below(1000));
    mu.normalize();
    return mu;
}

double first_symbol(const Point& p) { return double(std::get<SymPoint>(p).symbol(0)); }

}  // namespace

TEST_CASE("empirical measures place orbit mass on cylinder-cell pairs", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});

    SECTION("a fixed point under a constant itinerary is a point mass") {
        auto mu = empirical_measure(circle, Itinerary::constant(0, 2), 0.0, 10, 2, 64);
        REQUIRE(mu.cyl_count() == 4);
        REQUIRE(mu.cell_count() == 64);
        CHECK(mu.mass[0] == Catch::Approx(1.0).margin(1e-12));  // cylinder 00, cell of 0
        CHECK(mu.total() == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("n = 1 is the point mass at the start") {
        auto iota = Itinerary::periodic(word_from_string("10", 2), word_from_string("0", 2));
        auto mu = empirical_measure(circle, iota, 0.3, 1, 2, 64);
        // cylinder "10" has index 2; 0.3 lands in cell 19 of 64
        CHECK(mu.mass[2 * 64 + 19] == 1.0);
        CHECK(mu.total() == 1.0);
    }

    SECTION("degenerate inputs are rejected") {
        CHECK_THROWS_AS(empirical_measure(circle, Itinerary::constant(0, 2), 0.0, 0, 1, 64),
                        std::invalid_argument);
        CHECK_THROWS_AS(empirical_state_measure(circle, {}, 64), std::invalid_argument);
    }

    SECTION("state measures average the supplied points") {
        auto mu = empirical_state_measure(circle, {0.1, 0.9}, 10);
        CHECK(mu.mass[1] == 0.5);
        CHECK(mu.mass[9] == 0.5);
    }
}

TEST_CASE("long driven orbits from a random start equidistribute", "[measures]") {
    // Every double is a dyadic rational whose true doubling/tripling orbit
    // absorbs at 0, so the random-start walk runs in exact rational
    // arithmetic.  Lebesgue measure is stationary for any Bernoulli driving
    // law, and the empirical state marginal approaches it.
    auto circle = GeneratorSystem::circle({2, 3});
    auto bern = Itinerary::bernoulli({0.5, 0.5}, 2024);
    auto emp = empirical_measure_random(circle, bern, 77, 100000, 1, 64);
    CHECK(emp.total() == Catch::Approx(1.0).margin(1e-9));

    auto marg = emp.state_marginal();
    auto unif = uniform_measure(circle, 64);
    CHECK(tv_distance(marg, unif) < 0.05);

    // the cylinder marginal tracks the symbol frequencies of the driving law
    double cyl0 = 0;
    for (std::size_t c = 0; c < 64; ++c) cyl0 += emp.mass[c];
    CHECK(cyl0 == Catch::Approx(0.5).margin(0.02));

    // non-circle kinds draw a random start and walk directly
    auto shift = GeneratorSystem::full_shift(2);
    auto mu = empirical_measure_random(shift, Itinerary::constant(0, 1), 5, 4096, 0, 3);
    CHECK(mu.total() == Catch::Approx(1.0).margin(1e-9));
    CHECK_THROWS_AS(empirical_measure_random(circle, bern, 1, 0, 0, 64),
                    std::invalid_argument);
}

TEST_CASE("total variation compares measures on a shared grid", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto a = dirac_measure(circle, 0.0, 8);
    auto b = dirac_measure(circle, 0.5, 8);
    CHECK(tv_distance(a, a) == 0.0);
    CHECK(tv_distance(a, b) == 1.0);
    CHECK_THROWS_AS(tv_distance(a, dirac_measure(circle, 0.0, 16)), std::invalid_argument);
    CHECK(mass_of_cells(a, {0, 4}) == 1.0);
    CHECK(mass_of_cells(b, {0, 1}) == 0.0);

    SECTION("normalization rejects the zero measure") {
        DiscreteMeasure z;
        z.resolution = 4;
        z.mass.assign(4, 0.0);
        CHECK_THROWS_AS(z.normalize(), std::invalid_argument);
    }

    SECTION("the state marginal sums cylinder slices") {
        auto mu = empirical_measure(circle, Itinerary::constant(1, 2), 0.0, 4, 1, 8);
        auto marg = mu.state_marginal();
        CHECK(marg.cyl_depth == 0);
        CHECK(marg.alphabet == 1);
        CHECK(marg.total() == Catch::Approx(1.0).margin(1e-12));
        CHECK(marg.mass[0] == 1.0);  // orbit of the fixed point 0 stays in cell 0
    }
}

TEST_CASE("weak-star surrogate distance", "[measures]") {
    SECTION("two point masses differ by the weight of the separating test") {
        auto two = GeneratorSystem::finite(2, {{0, 1}});
        auto da = dirac_measure(two, 0, 1);
        auto db = dirac_measure(two, 1, 1);
        TestFamily fam;
        fam.functions.push_back(
            {{}, [](const Point& p) { return std::get<int>(p) == 0 ? 1.0 : 0.0; }});
        CHECK(weakstar_distance(two, da, db, fam) == 0.5);
        CHECK(weakstar_distance(two, da, da, fam) == 0.0);
        CHECK_THROWS_AS(weakstar_distance(two, da, db, TestFamily{}), std::invalid_argument);
    }

    SECTION("metric axioms on random triples") {
        auto circle = GeneratorSystem::circle({2, 3});
        auto fam = default_test_family(circle, 0);
        Rng rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            auto a = random_state_measure(rng, 16, 16);
            auto b = random_state_measure(rng, 16, 16);
            auto c = random_state_measure(rng, 16, 16);
            const double ab = weakstar_distance(circle, a, b, fam);
            const double bc = weakstar_distance(circle, b, c, fam);
            const double ac = weakstar_distance(circle, a, c, fam);
            CHECK(ab >= 0.0);
            CHECK(ab == Catch::Approx(weakstar_distance(circle, b, a, fam)).margin(1e-15));
            CHECK(ac <= ab + bc + 1e-12);
        }
    }

    SECTION("grid mismatch and over-deep test prefixes are rejected") {
        auto circle = GeneratorSystem::circle({2, 3});
        auto fam = default_test_family(circle, 1);  // contains depth-1 cylinder tests
        auto a = uniform_measure(circle, 8);
        auto b = uniform_measure(circle, 16);
        CHECK_THROWS_AS(weakstar_distance(circle, a, b, default_test_family(circle, 0)),
                        std::invalid_argument);
        CHECK_THROWS_AS(weakstar_distance(circle, a, a, fam), std::invalid_argument);
    }
}

TEST_CASE("limit families collapse for convergent orbits", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto iota = Itinerary::constant(0, 2);
    auto sched = dyadic_checkpoints(1023);
    ObservableFunctional ident{[](const Point& p) { return std::get<double>(p); }};
    auto fam = default_test_family(circle, 1);

    auto lp = limit_point_family(circle, iota, 0.0, sched, 0.05, 1, 64, ident, fam);
    CHECK(lp.representatives.size() == 1);
    CHECK_FALSE(lp.low_resolution);
    // all mass sits in cell 0, whose representative is the cell midpoint
    CHECK(lp.alpha_min == 0.0078125);
    CHECK(lp.alpha_max == 0.0078125);
    std::size_t members = 0;
    for (auto s : lp.cluster_sizes) members += s;
    CHECK(members == lp.checkpoints.size());
}

TEST_CASE("limit families split for oscillating orbits", "[measures]") {
    auto shift = GeneratorSystem::full_shift(2);
    auto iota = Itinerary::constant(0, 1);
    auto osc = blocks_point(8192);
    auto sched = dyadic_checkpoints(4095);
    ObservableFunctional alpha{first_symbol};
    auto fam = default_test_family(shift, 1);

    auto lp = limit_point_family(shift, iota, osc, sched, 0.05, 1, 6, alpha, fam);
    REQUIRE(lp.checkpoints == std::vector<std::size_t>{511, 1023, 2047, 4095});
    CHECK(lp.representatives.size() == 2);
    CHECK(lp.cluster_of == std::vector<std::size_t>{0, 1, 0, 1});
    CHECK(lp.cluster_sizes == std::vector<std::size_t>{2, 2});
    CHECK_FALSE(lp.low_resolution);

    // running densities of the leading symbol, counted run by run
    REQUIRE(lp.alpha_values.size() == 4);
    CHECK(lp.alpha_values[0] == Catch::Approx(170.0 / 511.0).margin(1e-12));
    CHECK(lp.alpha_values[1] == Catch::Approx(2.0 / 3.0).margin(1e-12));
    CHECK(lp.alpha_values[2] == Catch::Approx(682.0 / 2047.0).margin(1e-12));
    CHECK(lp.alpha_values[3] == Catch::Approx(2.0 / 3.0).margin(1e-12));
    CHECK(lp.alpha_min == Catch::Approx(170.0 / 511.0).margin(1e-12));
    CHECK(lp.alpha_max == Catch::Approx(2.0 / 3.0).margin(1e-12));
}

TEST_CASE("coarse checkpoint schedules are flagged", "[measures]") {
    auto shift = GeneratorSystem::full_shift(2);
    auto iota = Itinerary::constant(0, 1);
    auto osc = blocks_point(512);
    ObservableFunctional alpha{first_symbol};
    auto fam = default_test_family(shift, 1);

    auto lp = limit_point_family(shift, iota, osc, {100, 200}, 0.05, 1, 6, alpha, fam);
    CHECK(lp.representatives.size() == 1);
    CHECK(lp.low_resolution);

    CHECK_THROWS_AS(limit_point_family(shift, iota, osc, {200, 100}, 0.05, 1, 6, alpha, fam),
                    std::invalid_argument);
    CHECK_THROWS_AS(limit_point_family(shift, iota, osc, {}, 0.05, 1, 6, alpha, fam),
                    std::invalid_argument);
}

TEST_CASE("the adjoint spreads mass over generator preimages", "[measures]") {
    // two states, one generator fixing them and one swapping them
    auto two = GeneratorSystem::finite(2, {{0, 1}, {1, 0}});

    SECTION("a point mass splits across the branches") {
        auto out = adjoint_apply(two, dirac_measure(two, 0, 1), {0.5, 0.5});
        CHECK(out.mass[0] == 0.5);
        CHECK(out.mass[1] == 0.5);
    }

    SECTION("the uniform measure is fixed") {
        auto u = uniform_measure(two, 1);
        auto out = adjoint_apply(two, u, {0.5, 0.5});
        CHECK(tv_distance(out, u) == 0.0);
    }

    SECTION("probability vectors are validated") {
        auto u = uniform_measure(two, 1);
        CHECK_THROWS_AS(adjoint_apply(two, u, {0.5}), std::invalid_argument);
        CHECK_THROWS_AS(adjoint_apply(two, u, {0.9, 0.2}), std::invalid_argument);
        CHECK_THROWS_AS(adjoint_apply(two, u, {-0.5, 1.5}), std::invalid_argument);
    }
}

TEST_CASE("the uniform circle measure is stationary for any driving law", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto u = uniform_measure(circle, 66);
    for (auto probs : std::vector<std::vector<double>>{{0.5, 0.5}, {0.3, 0.7}, {0.9, 0.1}}) {
        auto out = adjoint_apply(circle, u, probs);
        CHECK(tv_distance(out, u) <= 1e-12);
    }
    // the push along each branch needs cells that split evenly
    CHECK_THROWS_WITH(adjoint_apply(circle, uniform_measure(circle, 64), {0.5, 0.5}),
                      Catch::Matchers::ContainsSubstring("divisible"));
}

TEST_CASE("the adjoint is a Markov contraction", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto fin = GeneratorSystem::finite(3, {{1, 2, 0}, {0, 0, 1}});
    Rng rng(99);

    for (int trial = 0; trial < 1000; ++trial) {
        auto mu = random_state_measure(rng, 12, 12);
        auto out = adjoint_apply(circle, mu, {0.3, 0.7});
        CHECK(out.total() == Catch::Approx(1.0).margin(1e-12));
        double lowest = 0;
        for (double v : out.mass) lowest = std::min(lowest, v);
        CHECK(lowest >= 0.0);
    }

    for (int trial = 0; trial < 200; ++trial) {
        auto mu = random_state_measure(rng, 12, 12);
        auto nu = random_state_measure(rng, 12, 12);
        CHECK(tv_distance(adjoint_apply(circle, mu, {0.3, 0.7}),
                          adjoint_apply(circle, nu, {0.3, 0.7})) <=
              tv_distance(mu, nu) + 1e-12);
        auto fm = random_state_measure(rng, 1, 3);
        auto fn = random_state_measure(rng, 1, 3);
        CHECK(tv_distance(adjoint_apply(fin, fm, {0.5, 0.5}),
                          adjoint_apply(fin, fn, {0.5, 0.5})) <=
              tv_distance(fm, fn) + 1e-12);
    }
}

TEST_CASE("stationary measures by adjoint iteration", "[measures]") {
    StationaryOptions opt;

    SECTION("two-point swap balances immediately") {
        auto two = GeneratorSystem::finite(2, {{0, 1}, {1, 0}});
        opt.resolution = 1;
        auto res = stationary_measure(two, {0.5, 0.5}, opt);
        CHECK(res.converged);
        CHECK(res.measure.mass[0] == 0.5);
        CHECK(res.invariance_residual == 0.0);
    }

    SECTION("expanding circle family settles on the uniform measure") {
        auto circle = GeneratorSystem::circle({2, 3});
        opt.resolution = 66;
        auto res = stationary_measure(circle, {0.3, 0.7}, opt);
        CHECK(res.converged);
        CHECK(res.invariance_residual <= 1e-12);
        CHECK(tv_distance(res.measure, uniform_measure(circle, 66)) <= 1e-12);
    }

    SECTION("an absorbing cell soaks up all mass") {
        auto absorb = GeneratorSystem::finite(3, {{0, 0, 0}, {0, 0, 0}});
        opt.resolution = 1;
        auto res = stationary_measure(absorb, {0.5, 0.5}, opt);
        CHECK(res.converged);
        CHECK(res.measure.mass[0] == 1.0);
        CHECK(res.measure.mass[1] == 0.0);
        CHECK(res.measure.mass[2] == 0.0);
    }

    SECTION("a three-state chain reaches its exact stationary vector") {
        auto fin = GeneratorSystem::finite(3, {{1, 2, 0}, {0, 0, 1}});
        opt.resolution = 1;
        auto res = stationary_measure(fin, {0.5, 0.5}, opt);
        CHECK(res.converged);
        CHECK(res.iterations == 2);
        CHECK(res.measure.mass[0] == Catch::Approx(0.5).margin(1e-12));
        CHECK(res.measure.mass[1] == Catch::Approx(1.0 / 3.0).margin(1e-12));
        CHECK(res.measure.mass[2] == Catch::Approx(1.0 / 6.0).margin(1e-12));
        CHECK(res.invariance_residual <= 1e-15);
    }

    SECTION("hitting the iteration cap reports non-convergence") {
        auto fin = GeneratorSystem::finite(3, {{1, 2, 0}, {0, 0, 1}});
        opt.resolution = 1;
        opt.max_iterations = 1;
        auto res = stationary_measure(fin, {0.5, 0.5}, opt);
        CHECK_FALSE(res.converged);
        CHECK(res.iterations == 1);
        CHECK(res.final_step == Catch::Approx(1.0 / 6.0).margin(1e-12));
    }
}

TEST_CASE("product invariance residual of driven rectangles", "[measures]") {
    auto two = GeneratorSystem::finite(2, {{0, 1}, {1, 0}});

    SECTION("stationary input gives a zero defect") {
        CHECK(product_invariance_residual(two, uniform_measure(two, 1), {0.5, 0.5}, 2) <=
              1e-15);
    }

    SECTION("a non-stationary point mass is detected at depth zero") {
        const double r =
            product_invariance_residual(two, dirac_measure(two, 0, 1), {0.5, 0.5}, 2);
        CHECK(r == Catch::Approx(0.5).margin(1e-12));
        CHECK(r >= 0.25);
    }

    SECTION("uniform circle measure stays invariant through depth five") {
        auto circle = GeneratorSystem::circle({2, 3});
        CHECK(product_invariance_residual(circle, uniform_measure(circle, 66), {0.3, 0.7},
                                          5) <= 1e-12);
    }

    SECTION("stationary outputs satisfy the product bound") {
        StationaryOptions opt;
        opt.resolution = 1;
        auto fin = GeneratorSystem::finite(3, {{1, 2, 0}, {0, 0, 1}});
        auto res = stationary_measure(fin, {0.5, 0.5}, opt);
        CHECK(product_invariance_residual(fin, res.measure, {0.5, 0.5}, 3) <=
              10 * opt.tolerance);

        auto circle = GeneratorSystem::circle({2, 3});
        opt.resolution = 66;
        auto cres = stationary_measure(circle, {0.5, 0.5}, opt);
        CHECK(product_invariance_residual(circle, cres.measure, {0.5, 0.5}, 3) <=
              10 * opt.tolerance);
    }

    SECTION("mismatched probability vectors are rejected") {
        CHECK_THROWS_AS(product_invariance_residual(two, uniform_measure(two, 1), {1.0}, 1),
                        std::invalid_argument);
    }
}

TEST_CASE("running averages along orbits detect oscillation", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto shift = GeneratorSystem::full_shift(2);
    auto iota1 = Itinerary::constant(0, 1);
    constexpr double kTwoPi = 6.28318530717958647692;

    SECTION("a fixed point gives constant averages") {
        auto phi = [](const Point& p) {
            return std::cos(kTwoPi * std::get<double>(p));
        };
        auto prof = birkhoff_profile(circle, Itinerary::constant(0, 2), 0.0, phi,
                                     dyadic_checkpoints(255));
        for (double a : prof.averages) CHECK(a == 1.0);
        CHECK(prof.gap == 0.0);
        CHECK(prof.regular);
    }

    SECTION("doubling runs keep the average swinging") {
        auto prof = birkhoff_profile(shift, iota1, blocks_point(8192), first_symbol,
                                     dyadic_checkpoints(4095));
        CHECK(prof.tail_min == Catch::Approx(170.0 / 511.0).margin(1e-12));
        CHECK(prof.tail_max == Catch::Approx(2.0 / 3.0).margin(1e-12));
        CHECK(prof.gap == Catch::Approx(512.0 / 1533.0).margin(1e-12));
        CHECK(prof.gap >= 0.25);
        CHECK_FALSE(prof.regular);
    }

    SECTION("constant observables are always regular") {
        auto prof = birkhoff_profile(shift, iota1, blocks_point(512),
                                     [](const Point&) { return 0.75; }, {3, 7, 15, 31});
        for (double a : prof.averages) CHECK(a == 0.75);
        CHECK(prof.regular);
    }

    SECTION("schedules must be increasing and long enough") {
        auto pt = blocks_point(64);
        CHECK_THROWS_AS(birkhoff_profile(shift, iota1, pt, first_symbol, {3, 7}),
                        std::invalid_argument);
        CHECK_THROWS_AS(birkhoff_profile(shift, iota1, pt, first_symbol, {3, 7, 7}),
                        std::invalid_argument);
    }
}

TEST_CASE("observable integrals are affine in the measure", "[measures]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto phi = [](const Point& p) { return std::get<double>(p) * std::get<double>(p); };
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        auto mu = random_state_measure(rng, 32, 32);
        auto nu = random_state_measure(rng, 32, 32);
        const double theta = double(rng.below(1000)) / 999.0;
        DiscreteMeasure mix = mu;
        for (std::size_t i = 0; i < mix.mass.size(); ++i)
            mix.mass[i] = theta * mu.mass[i] + (1 - theta) * nu.mass[i];
        const double direct = alpha_of(circle, mix, phi);
        const double split =
            theta * alpha_of(circle, mu, phi) + (1 - theta) * alpha_of(circle, nu, phi);
        CHECK(direct == Catch::Approx(split).margin(1e-12));
    }
}

TEST_CASE("average-range and limit-family verdicts coincide", "[measures]") {
    auto shift = GeneratorSystem::full_shift(2);
    auto iota1 = Itinerary::constant(0, 1);
    auto sched = dyadic_checkpoints(1023);
    ObservableFunctional alpha{first_symbol};
    auto fam = default_test_family(shift, 1);
    Rng rng(404);

    std::size_t regular_count = 0, irregular_count = 0;
    for (int inst = 0; inst < 100; ++inst) {
        SymPoint pt = [&] {
            if (inst < 60) {
                // eventually periodic: settles, so the verdict should be regular
                std::vector<std::uint8_t> head(rng.below(5));
                for (auto& s : head) s = std::uint8_t(rng.below(2));
                std::vector<std::uint8_t> period(1 + rng.below(6));
                for (auto& s : period) s = std::uint8_t(rng.below(2));
                return SymPoint::make(std::move(head), std::move(period), 2);
            }
            // growing runs: the average keeps oscillating
            std::vector<std::uint8_t> head(rng.below(5));
            for (auto& s : head) s = std::uint8_t(rng.below(2));
            std::uint8_t sym = std::uint8_t(rng.below(2));
            const std::size_t growth = 2 + rng.below(2);
            for (std::size_t len = 1 + rng.below(4); head.size() < 2048; len *= growth) {
                head.insert(head.end(), len, sym);
                sym = std::uint8_t(1 - sym);
            }
            return SymPoint::make(std::move(head), {0}, 2);
        }();

        auto prof = birkhoff_profile(shift, iota1, pt, first_symbol, sched);
        auto lp = limit_point_family(shift, iota1, pt, sched, 0.05, 1, 6, alpha, fam);
        const double width = lp.alpha_max - lp.alpha_min;
        CHECK(std::fabs(prof.gap - width) <= 1e-12);
        CHECK((prof.gap > 0.05) == (width > 0.05));
        CHECK(prof.regular == !(width > 0.05));
        (prof.regular ? regular_count : irregular_count) += 1;
    }
    CHECK(regular_count >= 50);
    CHECK(irregular_count >= 30);
    CHECK(regular_count + irregular_count == 100);
}

TEST_CASE("checkpoint schedule helpers", "[measures]") {
    CHECK(dyadic_checkpoints(100) == std::vector<std::size_t>{3, 7, 15, 31, 63, 100});
    CHECK(dyadic_checkpoints(3) == std::vector<std::size_t>{3});
    CHECK(dyadic_checkpoints(2) == std::vector<std::size_t>{2});
    auto full = dyadic_checkpoints(4095);
    CHECK(full.back() == 4095);
    CHECK(full.front() == 3);
    for (std::size_t i = 0; i + 1 < full.size(); ++i) CHECK(full[i] < full[i + 1]);

    CHECK(tail_start_index(0) == 0);
    CHECK(tail_start_index(1) == 0);
    CHECK(tail_start_index(2) == 1);
    CHECK(tail_start_index(3) == 2);
    CHECK(tail_start_index(6) == 4);
    CHECK(tail_start_index(9) == 6);
    CHECK(tail_start_index(11) == 7);
}
