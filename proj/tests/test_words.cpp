#include <catch2/catch_amalgamated.hpp>

#include "sglab/word.hpp"

#include <set>
#include <string>

using namespace sglab;

TEST_CASE("word reversal basics", "[words]") {
    CHECK(to_string(reverse(word_from_string("012", 3))) == "210");
    CHECK(to_string(reverse(Word({}, 3))) == "");
    CHECK(to_string(reverse(word_from_string("00", 2))) == "00");
}

TEST_CASE("word reversal is an involution", "[words]") {
    auto ws = sample_words(4, 12, 10000, 42);
    for (const auto& w : ws) {
        CHECK(reverse(reverse(w)).symbols == w.symbols);
    }
}

TEST_CASE("reversal is an antihomomorphism for concatenation", "[words]") {
    auto a = word_from_string("0120", 3);
    auto b = word_from_string("21", 3);
    CHECK(to_string(concat(a, b)) == "012021");
    CHECK(to_string(reverse(concat(a, b))) == to_string(concat(reverse(b), reverse(a))));
}

TEST_CASE("suffix order examples", "[words]") {
    CHECK(suffix_order(word_from_string("1", 2), word_from_string("01", 2)));
    CHECK_FALSE(suffix_order(word_from_string("0", 2), word_from_string("01", 2)));
    CHECK(suffix_order(Word({}, 2), word_from_string("01", 2)));
    CHECK_THROWS_AS(suffix_order(word_from_string("1", 2), word_from_string("01", 3)),
                    std::invalid_argument);
}

TEST_CASE("suffix order is a partial order on short words", "[words]") {
    std::vector<Word> all;
    for (std::size_t n = 0; n <= 3; ++n)
        for (auto& w : enumerate_words(2, n)) all.push_back(w);

    for (const auto& a : all) CHECK(suffix_order(a, a));
    for (const auto& a : all)
        for (const auto& b : all) {
            if (suffix_order(a, b) && suffix_order(b, a))
                CHECK(a.symbols == b.symbols);
            for (const auto& c : all)
                if (suffix_order(a, b) && suffix_order(b, c))
                    CHECK(suffix_order(a, c));
        }
}

TEST_CASE("prefix order sanity", "[words]") {
    CHECK(prefix_order(word_from_string("0", 2), word_from_string("01", 2)));
    CHECK_FALSE(prefix_order(word_from_string("1", 2), word_from_string("01", 2)));
    CHECK(prefix_order(Word({}, 2), word_from_string("01", 2)));
}

TEST_CASE("symbolic distance on itineraries", "[words]") {
    auto a = Itinerary::periodic(Word({}, 2), word_from_string("01", 2));
    auto a2 = Itinerary::periodic(Word({}, 2), word_from_string("0101", 2));
    CHECK(symbolic_distance(a, a2) == 0.0);

    auto b = Itinerary::constant(1, 2);
    CHECK(symbolic_distance(a, b) == 1.0);  // differ at index 0

    // agree on 010, differ at index 3
    auto c = Itinerary::periodic(word_from_string("0101", 2), word_from_string("1", 2));
    auto d = Itinerary::periodic(word_from_string("0100", 2), word_from_string("1", 2));
    CHECK(symbolic_distance(c, d) == 0.125);
}

TEST_CASE("symbolic distance horizon floor", "[words]") {
    std::vector<std::uint8_t> zeros(64, 0);
    auto far = Itinerary::periodic(Word(zeros, 2), word_from_string("1", 2));
    auto zero = Itinerary::constant(0, 2);
    CHECK(symbolic_distance(far, zero) == 0.0);  // difference sits past the default horizon
    CHECK(symbolic_distance(far, zero, 128) == std::ldexp(1.0, -64));
}

TEST_CASE("symbolic distance is an ultrametric on random triples", "[words]") {
    Rng rng(11);
    std::vector<Itinerary> pool;
    for (int i = 0; i < 12; ++i) {
        auto head = sample_words(2, rng.below(4), 1, rng.next())[0];
        auto per = sample_words(2, 1 + rng.below(3), 1, rng.next())[0];
        pool.push_back(Itinerary::periodic(head, per));
    }
    pool.push_back(Itinerary::bernoulli({0.5, 0.5}, 3));
    pool.push_back(Itinerary::bernoulli({0.25, 0.75}, 4));

    for (const auto& x : pool)
        for (const auto& y : pool)
            for (const auto& z : pool) {
                double dxy = symbolic_distance(x, y);
                double dxz = symbolic_distance(x, z);
                double dzy = symbolic_distance(z, y);
                CHECK(dxy <= std::max(dxz, dzy) + 1e-15);
            }
}

TEST_CASE("symbolic distance on finite words treats truncation as disagreement", "[words]") {
    auto a = word_from_string("01", 2);
    auto b = word_from_string("010", 2);
    CHECK(symbolic_distance(a, b) == 0.25);  // differ at the first index only one of them has
    CHECK(symbolic_distance(a, a) == 0.0);
}

TEST_CASE("shift drops the first symbol", "[words]") {
    auto alt = Itinerary::periodic(Word({}, 2), word_from_string("01", 2));
    auto sh = alt.shifted();
    for (int t = 0; t < 8; ++t) CHECK(sh.symbol(t) == alt.symbol(t + 1));
    CHECK(sh.symbol(0) == 1);

    auto cst = Itinerary::constant(1, 3);
    CHECK(symbolic_distance(cst.shifted(), cst) == 0.0);

    // a head is consumed before the period starts rotating
    auto pre = Itinerary::periodic(word_from_string("2", 3), word_from_string("01", 3));
    auto post = pre.shifted();
    CHECK(post.head().empty());
    CHECK(post.symbol(0) == 0);
    CHECK(post.symbol(1) == 1);
    CHECK(post.symbol(2) == 0);
    CHECK(post.symbol(3) == 1);
}

TEST_CASE("multi-step shift matches repeated single shifts", "[words]") {
    auto it = Itinerary::periodic(word_from_string("210", 3), word_from_string("021", 3));
    auto three = it.shifted(3);
    auto step = it.shifted().shifted().shifted();
    for (int t = 0; t < 16; ++t) CHECK(three.symbol(t) == step.symbol(t));

    auto bern = Itinerary::bernoulli({0.3, 0.7}, 99);
    auto bsh = bern.shifted(5);
    for (int t = 0; t < 32; ++t) CHECK(bsh.symbol(t) == bern.symbol(t + 5));
}

TEST_CASE("word enumeration is lexicographic and complete", "[words]") {
    auto ws = enumerate_words(2, 2);
    REQUIRE(ws.size() == 4);
    CHECK(to_string(ws[0]) == "00");
    CHECK(to_string(ws[1]) == "01");
    CHECK(to_string(ws[2]) == "10");
    CHECK(to_string(ws[3]) == "11");

    auto empty_only = enumerate_words(3, 0);
    REQUIRE(empty_only.size() == 1);
    CHECK(empty_only[0].empty());
}

TEST_CASE("word enumeration counts m^n", "[words]") {
    for (int m = 1; m <= 4; ++m)
        for (std::size_t n = 0; n <= 10; ++n) {
            std::size_t expect = 1;
            for (std::size_t i = 0; i < n; ++i) expect *= std::size_t(m);
            CHECK(enumerate_words(m, n).size() == expect);
        }
    // distinctness on a mid-size alphabet
    std::set<std::string> seen;
    for (auto& w : enumerate_words(3, 6)) seen.insert(to_string(w));
    CHECK(seen.size() == 729);
}

TEST_CASE("word enumeration rejects requests over budget", "[words]") {
    CHECK_THROWS_AS(enumerate_words(2, 25), std::length_error);
}

TEST_CASE("seeded word sampling is reproducible", "[words]") {
    auto ws = sample_words(2, 3, 4, 7);
    REQUIRE(ws.size() == 4);
    CHECK(to_string(ws[0]) == "010");
    CHECK(to_string(ws[1]) == "101");
    CHECK(to_string(ws[2]) == "011");
    CHECK(to_string(ws[3]) == "101");

    auto again = sample_words(2, 3, 4, 7);
    for (std::size_t i = 0; i < 4; ++i) CHECK(ws[i].symbols == again[i].symbols);

    for (auto& w : sample_words(5, 4, 200, 9))
        for (auto c : w.symbols) CHECK(c < 5);
}

TEST_CASE("checked power saturates at the cap", "[words]") {
    CHECK(checked_pow(2, 10, 2000) == 1024);
    CHECK(checked_pow(2, 11, 2000) == 2001);
    CHECK(checked_pow(10, 0, 5) == 1);
}

TEST_CASE("word parsing round trips and validates digits", "[words]") {
    CHECK(to_string(word_from_string("0123", 4)) == "0123");
    CHECK_THROWS_AS(word_from_string("03", 3), std::invalid_argument);
}

TEST_CASE("itinerary serialization round trips", "[words]") {
    auto per = Itinerary::periodic(word_from_string("2", 3), word_from_string("01", 3));
    CHECK(per.serialize() == "2|01");
    auto back = Itinerary::parse("2|01", 3);
    for (int t = 0; t < 16; ++t) CHECK(back.symbol(t) == per.symbol(t));

    auto bern = Itinerary::bernoulli({0.25, 0.75}, 17);
    auto bshift = bern.shifted(3);  // skip must survive the round trip
    auto bback = Itinerary::parse(bshift.serialize(), 2);
    for (int t = 0; t < 64; ++t) CHECK(bback.symbol(t) == bshift.symbol(t));

    CHECK_THROWS_AS(Itinerary::parse("no-bar-here", 2), std::invalid_argument);
}
