#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sglab/rng.hpp"
#include "sglab/system.hpp"
#include "sglab/word.hpp"

// Exact long orbits for integer-degree circle families.
//
// A double degenerates quickly under repeated doubling (each step discards a
// mantissa bit and the orbit collapses to 0 within ~60 steps), so statistics
// of long orbits cannot be computed in floating point.  Instead the point is
// held as an exact rational K / B^T where B is the product of the distinct
// generator degrees and T exceeds the number of steps taken: multiplying by
// any generator degree and reducing mod 1 stays in this form.  Only the
// leading bits are ever converted to floating point (to locate grid cells),
// so cell statistics are exact up to a ~1e-15 boundary band.

namespace sglab {

class ExactCircleOrbit {
public:
    ExactCircleOrbit(std::vector<int> degrees, std::size_t max_steps, std::uint64_t seed)
        : degrees_(std::move(degrees)), steps_left_(max_steps) {
        if (degrees_.empty()) throw std::invalid_argument("need at least one degree");
        std::uint64_t base = 1;
        std::vector<int> seen;
        for (int d : degrees_) {
            if (d < 2) throw std::invalid_argument("exact orbits need expanding degrees");
            bool dup = false;
            for (int s : seen) dup = dup || s == d;
            if (!dup) {
                seen.push_back(d);
                base *= std::uint64_t(d);
            }
        }
        // modulus = base^(max_steps + 8)
        mod_.assign(1, 1);
        for (std::size_t i = 0; i < max_steps + 8; ++i) multiply_small(mod_, base);
        // random K < modulus: uniform limbs with the top limb reduced
        std::uint64_t state = seed ^ 0x418c5e3a9f0d2b67ULL;
        k_.assign(mod_.size(), 0);
        for (auto& limb : k_) limb = splitmix64(state);
        k_.back() %= mod_.back();  // slight bias is irrelevant for seeding
        while (!less_than(k_, mod_)) subtract(k_, mod_);
    }

    // x <- degrees[j] * x mod 1
    void step(int j) {
        if (j < 0 || j >= int(degrees_.size()))
            throw std::out_of_range("generator index out of range");
        if (steps_left_ == 0) throw std::length_error("exact orbit step budget exhausted");
        --steps_left_;
        multiply_small(k_, std::uint64_t(degrees_[std::size_t(j)]));
        while (!less_than(k_, mod_)) subtract(k_, mod_);
    }

    // Leading-bits approximation of K / modulus in [0, 1).
    double value() const {
        long double num = 0, den = 0;
        const std::size_t n = mod_.size();
        for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i) {
            const long double scale = i + 1 == n ? 1.0L : (i + 2 == n ? 0x1p-64L : 0x1p-128L);
            if (i < k_.size()) num += scale * (long double)(k_[i]);
            den += scale * (long double)(mod_[i]);
        }
        long double v = num / den;
        if (v < 0) v = 0;
        if (v >= 1) v = 0;  // wrap the representational edge case
        return double(v);
    }

    std::int64_t cell(std::int64_t resolution) const {
        auto c = std::int64_t(value() * double(resolution));
        if (c >= resolution) c = resolution - 1;
        return c;
    }

private:
    // little-endian 64-bit limbs
    static void multiply_small(std::vector<std::uint64_t>& v, std::uint64_t f) {
        unsigned __int128 carry = 0;
        for (auto& limb : v) {
            const unsigned __int128 cur = (unsigned __int128)(limb)*f + carry;
            limb = std::uint64_t(cur);
            carry = cur >> 64;
        }
        while (carry != 0) {
            v.push_back(std::uint64_t(carry));
            carry >>= 64;
        }
    }

    static bool less_than(const std::vector<std::uint64_t>& a,
                          const std::vector<std::uint64_t>& b) {
        std::size_t n = std::max(a.size(), b.size());
        for (std::size_t i = n; i-- > 0;) {
            const std::uint64_t av = i < a.size() ? a[i] : 0;
            const std::uint64_t bv = i < b.size() ? b[i] : 0;
            if (av != bv) return av < bv;
        }
        return false;
    }

    static void subtract(std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
        unsigned __int128 borrow = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const unsigned __int128 bv = (i < b.size() ? b[i] : 0) + borrow;
            const unsigned __int128 av = a[i];
            if (av >= bv) {
                a[i] = std::uint64_t(av - bv);
                borrow = 0;
            } else {
                a[i] = std::uint64_t(((unsigned __int128)(1) << 64) + av - bv);
                borrow = 1;
            }
        }
        while (a.size() > 1 && a.back() == 0) a.pop_back();
    }

    std::vector<int> degrees_;
    std::vector<std::uint64_t> k_, mod_;
    std::size_t steps_left_ = 0;
};

// Fixed-point binary fraction in [0, 1) with 64*limbs bits, little-endian.
// Closed under multiplication by any integer mod 1 (doubles embed exactly),
// and supports the truncated inverse branches (x + i) / d needed to pull an
// orbit backward;  the truncation error 2^-bits is chosen far below the
// forward amplification of the span being glued.
class FixedFraction {
public:
    FixedFraction() = default;
    explicit FixedFraction(std::size_t limbs) : limbs_(limbs, 0) {}

    static FixedFraction from_double(double x, std::size_t limbs) {
        FixedFraction f(limbs);
        x -= std::floor(x);
        long double v = (long double)(x);
        for (std::size_t i = limbs; i-- > 0;) {
            v *= 0x1p64L;
            const auto limb = (std::uint64_t)(v);
            f.limbs_[i] = limb;
            v -= (long double)(limb);
        }
        return f;
    }

    // x <- f * x mod 1 (overflow limbs are the integer part; dropped)
    void mul_int(std::uint64_t f) {
        unsigned __int128 carry = 0;
        for (auto& limb : limbs_) {
            const unsigned __int128 cur = (unsigned __int128)(limb)*f + carry;
            limb = std::uint64_t(cur);
            carry = cur >> 64;
        }
    }

    // x <- 1 - x when x > 0 (mod-1 negation), fixing x = 0.
    void negate() {
        bool nonzero = false;
        for (auto limb : limbs_) nonzero = nonzero || limb != 0;
        if (!nonzero) return;
        unsigned __int128 borrow = 1;  // two's complement of the fraction
        for (auto& limb : limbs_) {
            const unsigned __int128 cur = (unsigned __int128)(~limb) + borrow;
            limb = std::uint64_t(cur);
            borrow = cur >> 64;
        }
    }

    // x <- (x + add) / d, truncated to the representation width.
    void div_int_plus(std::uint64_t add, std::uint64_t d) {
        std::uint64_t rem = add % d;  // integer-part remainder folds into the fraction
        // process from the most significant limb down
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            const unsigned __int128 cur = ((unsigned __int128)(rem) << 64) | limbs_[i];
            limbs_[i] = std::uint64_t(cur / d);
            rem = std::uint64_t(cur % d);
        }
    }

    double to_double() const {
        long double v = 0;
        const std::size_t n = limbs_.size();
        for (std::size_t i = n >= 2 ? n - 2 : 0; i < n; ++i)
            v += std::ldexp((long double)(limbs_[i]), -64 * int(n - i));
        return double(v);
    }

    std::vector<std::uint64_t>& bits() { return limbs_; }
    const std::vector<std::uint64_t>& bits() const { return limbs_; }

private:
    std::vector<std::uint64_t> limbs_;
};

// Cells visited by an exact orbit of a random point of an integer-degree
// circle system, driven by the itinerary for n steps.
inline std::vector<std::int64_t> exact_orbit_cells(const GeneratorSystem& sys,
                                                   const Itinerary& iota, std::size_t n,
                                                   std::int64_t resolution,
                                                   std::uint64_t seed) {
    if (sys.kind() != GeneratorSystem::Kind::Circle)
        throw std::invalid_argument("exact orbits are implemented for circle systems");
    ExactCircleOrbit orb(sys.circle_data().degrees, n, seed);
    std::vector<std::int64_t> cells;
    cells.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        cells.push_back(orb.cell(resolution));
        orb.step(iota.symbol(t));
    }
    return cells;
}

}  // namespace sglab
