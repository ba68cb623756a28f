#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sglab/recurrence.hpp"

using namespace sglab;

namespace {

bool subset(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

void check_omega_chain(const OmegaReport& rep) {
    const auto blo = rep.omega_cells(DensityKind::BanachLower);
    const auto lo = rep.omega_cells(DensityKind::Lower);
    const auto up = rep.omega_cells(DensityKind::Upper);
    const auto bup = rep.omega_cells(DensityKind::BanachUpper);
    const auto plain = rep.omega_plain();
    CHECK(subset(blo, lo));
    CHECK(subset(lo, up));
    CHECK(subset(up, bup));
    // any positive-density cell is visited in the tail
    for (auto c : bup)
        CHECK(std::count(plain.begin(), plain.end(), c) +
                  (rep.cell_stats[std::size_t(c)].banach_upper > 0 ? 1 : 0) >
              0);
}

double first_symbol(const Point& p) { return double(std::get<SymPoint>(p).symbol(0)); }

}  // namespace

TEST_CASE("visiting times follow the driven orbit", "[recurrence]") {
    SECTION("a fixed point visits its own ball at every time") {
        auto circle = GeneratorSystem::circle({2, 3});
        auto vs = visiting_times(circle, Itinerary::constant(0, 2), 0.0, 0.0, 0.1, 50);
        REQUIRE(vs.indices.size() == 50);
        for (std::size_t n = 0; n < 50; ++n) CHECK(vs.indices[n] == n);
        CHECK(vs.horizon == 50);
    }

    SECTION("a far-away center may never be visited") {
        auto circle = GeneratorSystem::circle({2, 3});
        auto bern = Itinerary::bernoulli({0.5, 0.5}, 7);
        auto vs = visiting_times(circle, bern, 0.1, 0.77, 0.001, 100);
        // brute-force the same orbit independently
        std::vector<std::size_t> expect;
        Point y = 0.1;
        for (std::size_t n = 0; n < 100; ++n) {
            if (circle.metric(y, 0.77) < 0.001) expect.push_back(n);
            y = circle.apply_generator(bern.symbol(n), y);
        }
        CHECK(vs.indices == expect);
    }

    SECTION("perturbed symbols excise their covering windows") {
        // radius 1/2 on the shift means the first two symbols must agree with
        // the target, so a flipped symbol at i removes times i-1 and i
        auto shift = GeneratorSystem::full_shift(2);
        std::vector<std::uint8_t> head(32, 0);
        head[4] = head[8] = head[16] = 1;
        auto x = SymPoint::make(std::move(head), {0}, 2);
        auto zero = SymPoint::make({}, {0}, 2);
        auto vs = visiting_times(shift, Itinerary::constant(0, 1), x, zero, 0.5, 32);
        std::vector<std::size_t> expect;
        const std::vector<std::size_t> excluded{3, 4, 7, 8, 15, 16};
        for (std::size_t n = 0; n < 32; ++n)
            if (!std::count(excluded.begin(), excluded.end(), n)) expect.push_back(n);
        CHECK(vs.indices == expect);
    }

    SECTION("nonpositive radius is rejected") {
        auto circle = GeneratorSystem::circle({2, 3});
        CHECK_THROWS_AS(visiting_times(circle, Itinerary::constant(0, 2), 0.0, 0.0, 0.0, 4),
                        std::invalid_argument);
    }
}

TEST_CASE("density statistics of visit sets", "[recurrence]") {
    SECTION("arithmetic progressions have all four densities equal") {
        VisitSet S;
        S.horizon = 4096;
        for (std::size_t n = 0; n < 4096; n += 2) S.indices.push_back(n);
        auto d = density_stats(S);
        CHECK(d.upper == Catch::Approx(0.5).margin(0.01));
        CHECK(d.lower == Catch::Approx(0.5).margin(0.01));
        CHECK(d.banach_upper == Catch::Approx(0.5).margin(0.01));
        CHECK(d.banach_lower == Catch::Approx(0.5).margin(0.01));
    }

    SECTION("exponential blocks separate the four densities") {
        // S = union of [4^k, 2*4^k): prefix ratios swing between 1/3 and 2/3,
        // while windows fit entirely inside blocks and inside gaps
        VisitSet S;
        S.horizon = 1u << 20;
        for (std::size_t p = 0; (std::size_t(1) << (2 * p)) < S.horizon; ++p) {
            const std::size_t lo = std::size_t(1) << (2 * p);
            for (std::size_t i = lo; i < 2 * lo && i < S.horizon; ++i)
                S.indices.push_back(i);
        }
        std::sort(S.indices.begin(), S.indices.end());
        auto d = density_stats(S);
        CHECK(d.upper == Catch::Approx(2.0 / 3.0).margin(0.02));
        CHECK(d.lower == Catch::Approx(1.0 / 3.0).margin(0.02));
        CHECK(d.banach_upper == Catch::Approx(1.0).margin(0.02));
        CHECK(d.banach_lower == Catch::Approx(0.0).margin(0.02));
        CHECK(d.window_schedule == std::vector<std::size_t>{1024, 10321, 131072});
    }

    SECTION("the full set has density one everywhere") {
        VisitSet S;
        S.horizon = 256;
        for (std::size_t n = 0; n < 256; ++n) S.indices.push_back(n);
        auto d = density_stats(S);
        CHECK(d.upper == 1.0);
        CHECK(d.lower == 1.0);
        CHECK(d.banach_upper == 1.0);
        CHECK(d.banach_lower == 1.0);
    }

    SECTION("the density chain holds on random visit sets") {
        Rng rng(12);
        for (int trial = 0; trial < 1000; ++trial) {
            VisitSet S;
            S.horizon = 64 + rng.below(512);
            const std::uint64_t keep = 1 + rng.below(100);
            for (std::size_t n = 0; n < S.horizon; ++n)
                if (rng.below(100) < keep) S.indices.push_back(n);
            auto d = density_stats(S);
            CHECK(d.banach_lower <= d.lower + 1e-15);
            CHECK(d.lower <= d.upper + 1e-15);
            CHECK(d.upper <= d.banach_upper + 1e-15);
            CHECK(d.banach_lower >= 0.0);
            CHECK(d.banach_upper <= 1.0);
        }
    }

    SECTION("upper density of a set and lower density of its complement sum to one") {
        Rng rng(77);
        for (int trial = 0; trial < 100; ++trial) {
            VisitSet S, C;
            S.horizon = C.horizon = 500 + rng.below(500);
            for (std::size_t n = 0; n < S.horizon; ++n)
                (rng.below(3) == 0 ? S : C).indices.push_back(n);
            auto ds = density_stats(S);
            auto dc = density_stats(C);
            CHECK(ds.upper + dc.lower == Catch::Approx(1.0).margin(1e-12));
            CHECK(ds.lower + dc.upper == Catch::Approx(1.0).margin(1e-12));
        }
    }

    SECTION("malformed visit sets are rejected") {
        VisitSet bad;
        bad.horizon = 8;
        bad.indices = {3, 2};
        CHECK_THROWS_AS(density_stats(bad), std::invalid_argument);
        bad.indices = {2, 2};
        CHECK_THROWS_AS(density_stats(bad), std::invalid_argument);
        bad.indices = {40};
        CHECK_THROWS_AS(density_stats(bad), std::invalid_argument);
        VisitSet empty_horizon;
        CHECK_THROWS_AS(density_stats(empty_horizon), std::invalid_argument);
    }
}

TEST_CASE("probe resolutions shrink cells below the radius", "[recurrence]") {
    auto circle = GeneratorSystem::circle({2, 3});
    auto shift = GeneratorSystem::full_shift(2);
    auto fin = GeneratorSystem::finite(2, {{0, 1}});
    CHECK(resolution_for_radius(circle, 0.3) == 4);
    CHECK(resolution_for_radius(shift, 0.6) == 1);
    CHECK(resolution_for_radius(shift, 0.25) == 2);
    CHECK(resolution_for_radius(fin, 0.5) == 1);
    CHECK_THROWS_AS(resolution_for_radius(shift, 1e-20), std::invalid_argument);
}

TEST_CASE("omega limit surrogates of simple orbits", "[recurrence]") {
    SECTION("a finite fixed point occupies exactly its own cell") {
        auto fin = GeneratorSystem::finite(2, {{0, 1}});
        auto rep = omega_limits(fin, Itinerary::constant(0, 1), 0, 0.5, 1024, 0.05);
        const std::vector<std::int64_t> just0{0};
        CHECK(rep.omega_cells(DensityKind::Upper) == just0);
        CHECK(rep.omega_cells(DensityKind::Lower) == just0);
        CHECK(rep.omega_cells(DensityKind::BanachUpper) == just0);
        CHECK(rep.omega_cells(DensityKind::BanachLower) == just0);
        CHECK(rep.omega_plain() == just0);
        check_omega_chain(rep);
    }

    SECTION("a circle fixed point fills the cells overlapping its ball") {
        auto circle = GeneratorSystem::circle({2, 3});
        auto rep = omega_limits(circle, Itinerary::constant(0, 2), 0.0, 0.3, 512, 0.05);
        // which probe representatives sit within the radius of the point
        std::vector<std::int64_t> expect;
        for (std::int64_t c = 0; c < rep.resolution; ++c) {
            const auto r = circle.cell_representative(c, rep.resolution);
            if (circle.metric(0.0, r) < 0.3) expect.push_back(c);
        }
        CHECK(rep.omega_cells(DensityKind::Upper) == expect);
        CHECK(rep.omega_cells(DensityKind::BanachLower) == expect);
        CHECK(rep.omega_plain() == expect);
        check_omega_chain(rep);
    }

    SECTION("the density chain orders the omega sets on random orbits") {
        auto shift = GeneratorSystem::full_shift(2);
        Rng rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            auto x = std::get<SymPoint>(shift.random_point(rng));
            auto rep = omega_limits(shift, Itinerary::constant(0, 1), x, 0.25, 2000, 0.01);
            check_omega_chain(rep);
        }
    }
}

TEST_CASE("recurrence classification at scale", "[recurrence]") {
    SECTION("fixed points recur but do not wander") {
        auto circle = GeneratorSystem::circle({2, 3});
        auto v = classify_recurrence(circle, Itinerary::constant(0, 2), 0.0, 0.2, 4096);
        CHECK(v.upper_recurrent_eps);
        CHECK(v.banach_upper_recurrent_eps);
        CHECK(v.self_return.upper == 1.0);
        CHECK(v.self_return.banach_upper == 1.0);
        CHECK_FALSE(v.transitive_eps);
        CHECK(v.quasiregular);
        CHECK(v.quasiregular_gap == 0.0);
        CHECK(v.level == "QW_1");
        CHECK_FALSE(v.case_determined);  // a fixed point has positive Banach-lower density
        CHECK(v.epsilon == 0.2);
        CHECK(v.horizon == 4096);
        CHECK(v.positive_threshold == Catch::Approx(10.0 / 4096.0));
    }

    SECTION("a word-enumerating point is transitive at matching scale") {
        auto shift = GeneratorSystem::full_shift(2);
        std::vector<std::uint8_t> a;
        for (std::size_t j = 1; j <= 13 && a.size() < 100000; ++j)
            for (const auto& w : enumerate_words(2, j))
                for (auto s : w.symbols) a.push_back(s);
        auto x = SymPoint::make(std::move(a), {0}, 2);
        auto v = classify_recurrence(shift, Itinerary::constant(0, 1), x, 0.25, 90000);
        CHECK(v.transitive_eps);
        CHECK(v.upper_recurrent_eps);
        CHECK(v.banach_upper_recurrent_eps);
    }

    SECTION("nonpositive radius is rejected") {
        auto circle = GeneratorSystem::circle({2, 3});
        CHECK_THROWS_AS(
            classify_recurrence(circle, Itinerary::constant(0, 2), 0.0, -1.0, 64),
            std::invalid_argument);
    }
}

TEST_CASE("sparse solid runs separate Banach from upper recurrence", "[recurrence]") {
    // Orbit returns concentrate in runs at positions 700 * 8^k of length
    // position/16: a window-length run pushes the Banach upper density to 1,
    // while prefix ratios stay near 1/16.  The positive-density threshold must
    // sit between those plateaus to expose the gap.
    GapFamilyOptions opt;
    opt.count = 4;
    opt.prefix_len = 8;
    auto fam = gap_family_qw_br(opt);
    REQUIRE(fam.points.size() == 4);
    RecurrenceThresholds th;
    th.positive = 0.2;
    for (const auto& p : fam.points) {
        auto v = classify_recurrence(fam.system, fam.iota, p, 0.6, 20000, th);
        CHECK(v.banach_upper_recurrent_eps);
        CHECK_FALSE(v.upper_recurrent_eps);
        CHECK(v.self_return.banach_upper == 1.0);
        CHECK(v.self_return.upper < 0.1);
        CHECK(v.level.substr(0, 3) == "BR_");
    }
}

TEST_CASE("periodic points are quasiregular and fully recurrent", "[recurrence]") {
    GapFamilyOptions opt;
    opt.count = 4;
    opt.prefix_len = 8;
    auto fam = gap_family_qr_br1(opt);
    for (const auto& p : fam.points) {
        auto v = classify_recurrence(fam.system, fam.iota, p, 0.25, 4096);
        CHECK(v.quasiregular);
        CHECK(v.quasiregular_gap == 0.0);
        CHECK(v.upper_recurrent_eps);
        CHECK(v.banach_upper_recurrent_eps);
        CHECK(v.level == "QW_1");
    }
}

TEST_CASE("irregular transitive witnesses keep both properties", "[recurrence]") {
    GapFamilyOptions opt;
    opt.count = 3;
    opt.prefix_len = 8;
    auto fam = gap_family_irregular_transitive(opt);
    for (const auto& p : fam.points) {
        auto v = classify_recurrence(fam.system, fam.iota, p, 0.25, 30000);
        CHECK(v.transitive_eps);
        CHECK_FALSE(v.quasiregular);
        CHECK(v.quasiregular_gap > 0.05);
        auto prof = birkhoff_profile(fam.system, fam.iota, p, first_symbol,
                                     dyadic_checkpoints(30000));
        CHECK(prof.gap > 0.05);
        CHECK_FALSE(prof.regular);
    }
    // distinct prefixes across the family
    for (std::size_t i = 0; i < fam.points.size(); ++i)
        for (std::size_t j = i + 1; j < fam.points.size(); ++j) {
            const auto& a = std::get<SymPoint>(fam.points[i]);
            const auto& b = std::get<SymPoint>(fam.points[j]);
            bool differ = false;
            for (std::size_t t = 0; t < opt.prefix_len; ++t)
                differ = differ || a.symbol(t) != b.symbol(t);
            CHECK(differ);
        }
}

TEST_CASE("support structure of limit families", "[recurrence]") {
    auto measure_with = [](std::vector<double> mass) {
        DiscreteMeasure mu;
        mu.resolution = std::int64_t(mass.size());
        mu.mass = std::move(mass);
        return mu;
    };
    auto family_of = [&](std::vector<std::vector<double>> masses) {
        LimitPointFamily fam;
        for (auto& m : masses) fam.representatives.push_back(measure_with(std::move(m)));
        return fam;
    };

    SECTION("one cluster has every flag") {
        auto f = structure_predicates(family_of({{0.5, 0.5}}), 0.01);
        CHECK(f.W);
        CHECK(f.V);
        CHECK(f.S);
        CHECK(level_from_flags(true, false, f) == "QW_1");
        CHECK(level_from_flags(false, true, f) == "BR_1");
        CHECK(level_from_flags(false, false, f) == "none");
    }

    SECTION("disjoint supports clear every flag") {
        auto f = structure_predicates(family_of({{1.0, 0.0}, {0.0, 1.0}}), 0.01);
        CHECK_FALSE(f.W);
        CHECK_FALSE(f.V);
        CHECK_FALSE(f.S);
        CHECK(level_from_flags(false, true, f) == "BR_5");
    }

    SECTION("one full-support member with a shared cell") {
        auto f = structure_predicates(family_of({{0.5, 0.5}, {1.0, 0.0}}), 0.01);
        CHECK_FALSE(f.W);
        CHECK(f.V);
        CHECK(f.S);
        CHECK(level_from_flags(true, false, f) == "QW_2");
    }

    SECTION("one full-support member, empty intersection") {
        auto f =
            structure_predicates(family_of({{0.5, 0.5}, {1.0, 0.0}, {0.0, 1.0}}), 0.01);
        CHECK_FALSE(f.W);
        CHECK(f.V);
        CHECK_FALSE(f.S);
        CHECK(level_from_flags(false, true, f) == "BR_3");
    }

    SECTION("a shared cell without any full support") {
        auto f = structure_predicates(
            family_of({{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}}), 0.01);
        CHECK_FALSE(f.W);
        CHECK_FALSE(f.V);
        CHECK(f.S);
        CHECK(level_from_flags(true, false, f) == "QW_4");
    }

    SECTION("empty families are rejected") {
        CHECK_THROWS_AS(structure_predicates(LimitPointFamily{}, 0.01),
                        std::invalid_argument);
    }
}

TEST_CASE("constructed schedules realize all six visiting patterns", "[recurrence]") {
    RecurrenceThresholds th;
    for (int cid = 1; cid <= 6; ++cid) {
        auto cp = construct_case_point(cid);
        INFO("case " << cid << " note: " << cp.certificate.note);
        REQUIRE(cp.certificate.pass);
        CHECK(cp.certificate.case_id == cid);

        std::vector<std::int64_t> lo, up, ba, om;
        case_expectations(cid, lo, up, ba, om);

        for (std::size_t H : {std::size_t(1000), std::size_t(10000), std::size_t(100000)}) {
            // independent verification through the orbit machinery
            auto rep = omega_limits(cp.system, cp.iota, cp.x, 0.6, H, 10.0 / double(H));
            auto pat = detail::case_pattern_from_report(rep, th);
            INFO("case " << cid << " at horizon " << H);
            REQUIRE(pat.determined);
            CHECK(pat.case_id == cid);
            CHECK(pat.lower == lo);
            CHECK(pat.upper == up);
            CHECK(pat.banach == ba);
            CHECK(pat.omega == om);
            check_omega_chain(rep);

            // the certificate's direct symbol counts agree with the orbit pass
            for (const auto& e : cp.certificate.entries) {
                if (e.horizon != H) continue;
                const auto& s = rep.cell_stats[std::size_t(e.cell)];
                CHECK(e.stats.upper == Catch::Approx(s.upper).margin(1e-12));
                CHECK(e.stats.lower == Catch::Approx(s.lower).margin(1e-12));
                CHECK(e.stats.banach_upper == Catch::Approx(s.banach_upper).margin(1e-12));
                CHECK(e.stats.banach_lower == Catch::Approx(s.banach_lower).margin(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(construct_case_point(0), std::invalid_argument);
    CHECK_THROWS_AS(construct_case_point(7), std::invalid_argument);
}

TEST_CASE("case patterns refuse ambiguous densities", "[recurrence]") {
    RecurrenceThresholds th;
    OmegaReport rep;
    rep.cell_stats.resize(1);
    rep.tail_visited.assign(1, 1);
    rep.cell_stats[0].upper = 0.22;  // inside the dead zone (0.15, 0.3)
    rep.cell_stats[0].banach_upper = 0.5;
    auto pat = detail::case_pattern_from_report(rep, th);
    CHECK_FALSE(pat.determined);
}

TEST_CASE("gap sampler dispatch", "[recurrence]") {
    GapFamilyOptions opt;
    opt.count = 2;
    opt.prefix_len = 4;
    CHECK(gap_set_sampler("QW", "BR", "", opt).kind == "qw-br");
    CHECK(gap_set_sampler("none", "QR+BR1", "", opt).kind == "qr-br1");
    CHECK(gap_set_sampler("", "", "irregular-transitive", opt).kind ==
          "irregular-transitive");
    CHECK_THROWS_AS(gap_set_sampler("Tran", "QR", "", opt), std::invalid_argument);

    auto fam = gap_family_case(3, opt);
    CHECK(fam.kind == "case-3");
    REQUIRE(fam.points.size() == 2);
    RecurrenceThresholds th;
    for (const auto& p : fam.points) {
        auto rep = omega_limits(fam.system, fam.iota, p, 0.6, 10000, 1e-3);
        auto pat = detail::case_pattern_from_report(rep, th);
        REQUIRE(pat.determined);
        CHECK(pat.case_id == 3);
    }
}

TEST_CASE("oscillating block points alternate doubling runs", "[recurrence]") {
    auto p = std::get<SymPoint>(oscillating_block_point(64));
    const std::vector<int> expect{0, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1};
    for (std::size_t t = 0; t < expect.size(); ++t)
        CHECK(int(p.symbol(t)) == expect[t]);
    auto shift = GeneratorSystem::full_shift(2);
    auto prof = birkhoff_profile(shift, Itinerary::constant(0, 1),
                                 oscillating_block_point(8192), first_symbol,
                                 dyadic_checkpoints(4095));
    CHECK(prof.gap == Catch::Approx(512.0 / 1533.0).margin(1e-12));
}
