#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_set>

#include "sglab/system.hpp"

// Separated sets, Bowen/blowup balls, and greedy covers.  Greedy passes run
// first-fit over a seed-shuffled candidate order; on full shifts at dyadic
// scales and on uniform circle grids they collapse to exact counting paths
// that agree with the generic greedy (unit tests cross-check this).

namespace sglab {

// Largest j with 2^-j >= eps (separation depth); negative when eps > 1.
inline int sep_depth(double eps) {
    int j = 0;
    if (eps > 1.0) return -1;
    while (std::ldexp(1.0, -(j + 1)) >= eps - 1e-15) ++j;
    return j;
}

// Smallest L with 2^-L < delta (agreement length needed to fall inside a
// symbolic delta-ball).
inline int cover_depth(double delta) {
    int L = 0;
    while (std::ldexp(1.0, -L) >= delta - 1e-15) ++L;
    return L;
}

// ---------------------------------------------------------------------------
// Blowup functions (mismatch budgets for blown-up Bowen balls)

struct BlowupFunction {
    std::string name;
    std::function<long(long)> fn;
    long operator()(long n) const { return fn(n); }
};

inline BlowupFunction blowup_sqrt() {
    return {"ceil_sqrt", [](long n) { return long(std::ceil(std::sqrt(double(n)))); }};
}
inline BlowupFunction blowup_linear_fraction(long c) {
    return {"ceil_n_over_" + std::to_string(c),
            [c](long n) { return (n + c - 1) / c; }};
}
inline BlowupFunction blowup_identity_minus_one() {
    return {"n_minus_1", [](long n) { return n - 1; }};
}

struct BlowupAudit {
    long audit_range = 0;
    bool nonnegative = true;
    bool nondecreasing = true;
    bool strictly_below_n = true;   // checked for n >= 3; tiny n cannot satisfy it
    bool unbounded_proxy = true;    // g grows across the audit range
    bool ratio_small_at_range = true;  // g(n)/n <= 1/2 at the range end
    bool ratio_trend_ok = true;        // g(n)/n non-increasing along doublings
    bool pass() const {
        return nonnegative && nondecreasing && strictly_below_n && unbounded_proxy &&
               ratio_small_at_range && ratio_trend_ok;
    }
};

// Finite-range audit of the blowup-function axioms (monotone, g(n) < n,
// unbounded, g(n)/n -> 0).  The vanishing-ratio axiom is checked as a
// non-increasing trend over doublings plus a 1/2 cap at the range end.
inline BlowupAudit audit_blowup(const BlowupFunction& g, long audit_range = 1024) {
    BlowupAudit a;
    a.audit_range = audit_range;
    long prev = g(1);
    if (prev < 0) a.nonnegative = false;
    for (long n = 2; n <= audit_range; ++n) {
        const long v = g(n);
        if (v < 0) a.nonnegative = false;
        if (v < prev) a.nondecreasing = false;
        if (n >= 3 && v >= n) a.strictly_below_n = false;
        prev = v;
    }
    if (!(g(audit_range) > g(1))) a.unbounded_proxy = false;
    if (double(g(audit_range)) / double(audit_range) > 0.5) a.ratio_small_at_range = false;
    double prev_ratio = 2.0;
    for (long n = 4; n <= audit_range; n *= 2) {
        const double r = double(g(n)) / double(n);
        if (r > prev_ratio + 0.02) a.ratio_trend_ok = false;
        prev_ratio = r;
    }
    return a;
}

// ---------------------------------------------------------------------------
// Ball membership

// Strict Bowen ball: d_w(center, y) < delta.
inline bool bowen_ball_contains(const GeneratorSystem& sys, const Word& w,
                                const Point& center, double delta, const Point& y) {
    return sys.word_metric(w, center, y) < delta;
}

// Number of orbit prefixes (t = 0..|w|) with distance strictly above eps.
inline long blowup_mismatch_count(const GeneratorSystem& sys, const Word& w,
                                  const Point& center, double eps, const Point& y) {
    Point a = center, b = y;
    long count = sys.metric(a, b) > eps ? 1 : 0;
    for (std::size_t t = 0; t < w.size(); ++t) {
        a = sys.apply_generator(w[t], a);
        b = sys.apply_generator(w[t], b);
        if (sys.metric(a, b) > eps) ++count;
    }
    return count;
}

// Blown-up ball: strictly fewer than g(|w|+1) mismatching prefixes.
inline bool blowup_ball_contains(const GeneratorSystem& sys, const Word& w,
                                 const BlowupFunction& g, const Point& center,
                                 double eps, const Point& y) {
    return blowup_mismatch_count(sys, w, center, eps, y) < g(long(w.size()) + 1);
}

// ---------------------------------------------------------------------------
// Internal fast-path helpers

namespace detail {

inline bool is_perm_shift(const GeneratorSystem& sys) {
    return sys.kind() == GeneratorSystem::Kind::Shift;
}

// Pack the first `depth` symbols into an integer key (throws when too wide).
inline std::uint64_t sym_block_key(const SymPoint& p, int k, int depth) {
    if (depth * std::log2(double(k)) > 62)
        throw std::length_error("symbol block too wide to pack");
    std::uint64_t key = 0;
    for (int t = 0; t < depth; ++t) key = key * std::uint64_t(k) + p.symbol(std::size_t(t));
    return key;
}

struct UniformCircleGrid {
    std::int64_t modulus = 0;
    std::vector<std::int64_t> residues;  // one per candidate, all distinct
};

inline std::optional<UniformCircleGrid> detect_uniform_circle_grid(
    const GeneratorSystem& sys, const std::vector<Point>& candidates) {
    if (sys.kind() != GeneratorSystem::Kind::Circle || candidates.empty()) return std::nullopt;
    const auto G = std::int64_t(candidates.size());
    UniformCircleGrid grid;
    grid.modulus = G;
    grid.residues.reserve(candidates.size());
    std::vector<bool> seen(candidates.size(), false);
    for (const auto& p : candidates) {
        const double t = std::get<double>(p) * double(G);
        const double r = std::round(t);
        if (std::fabs(t - r) > 1e-9) return std::nullopt;
        auto res = std::int64_t(r) % G;
        if (res < 0) res += G;
        if (seen[std::size_t(res)]) return std::nullopt;
        seen[std::size_t(res)] = true;
        grid.residues.push_back(res);
    }
    return grid;
}

// Orbit multipliers of a word over linear circle maps, reduced mod G.
inline std::vector<std::int64_t> circle_multipliers_mod(const GeneratorSystem& sys,
                                                        const Word& w, std::int64_t G) {
    const auto& degs = sys.circle_data().degrees;
    std::vector<std::int64_t> mult(w.size() + 1);
    mult[0] = 1 % G;
    for (std::size_t t = 0; t < w.size(); ++t)
        mult[t + 1] = (mult[t] * std::int64_t(degs[w[t]])) % G;
    return mult;
}

struct Bitset {
    std::vector<std::uint64_t> bits;
    std::size_t n = 0;
    explicit Bitset(std::size_t size) : bits((size + 63) / 64, 0), n(size) {}
    bool test(std::size_t i) const { return (bits[i >> 6] >> (i & 63)) & 1; }
    void set(std::size_t i) { bits[i >> 6] |= std::uint64_t(1) << (i & 63); }
};

// Residue differences u (mod G) whose d_w stays below the threshold; the
// profile is symmetric and typically sparse, so greedy passes touch only
// |list| residues per selection.
inline std::vector<std::int64_t> circle_close_differences(
    const std::vector<std::int64_t>& mult, std::int64_t G, double threshold) {
    std::vector<std::int64_t> list;
    for (std::int64_t u = 0; u < G; ++u) {
        bool close = true;
        for (auto m : mult) {
            const std::int64_t v = (m * u) % G;
            const auto arc = double(std::min(v, G - v));
            if (arc >= threshold * double(G) - 1e-9) { close = false; break; }
        }
        if (close) list.push_back(u);
    }
    return list;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Separated sets

struct SeparatedSet {
    Word word;
    double epsilon = 0;
    std::vector<Point> points;
    bool exhaustive = false;  // every candidate was tested against the chosen set
    bool exact = false;       // produced by an exact counting path
    std::size_t candidates_tested = 0;
};

// Greedy maximal (w, eps)-separated subset of `candidates` (first-fit over a
// seed-shuffled order).  Exact on full shifts at dyadic eps and on uniform
// circle grids, where the pairwise metric only depends on symbol blocks or on
// grid residue differences.
inline SeparatedSet max_separated(const GeneratorSystem& sys, const Word& w, double eps,
                                  const std::vector<Point>& candidates,
                                  std::uint64_t seed = 1) {
    SeparatedSet out;
    out.word = w;
    out.epsilon = eps;
    out.candidates_tested = candidates.size();
    out.exhaustive = true;
    if (candidates.empty()) return out;

    Rng rng(seed);
    const auto order = rng.shuffled_indices(candidates.size());

    if (detail::is_perm_shift(sys)) {
        // Relabel-after-shift generators preserve disagreement indices, so two
        // candidates are separated iff their leading blocks of depth
        // |w| + sep_depth(eps) + 1 differ.
        const int R = sep_depth(eps);
        if (R < 0) {  // eps above the diameter: only one class
            out.points.push_back(candidates[order[0]]);
            out.exact = true;
            return out;
        }
        const int depth = int(w.size()) + R + 1;
        const int k = sys.shift_data().k;
        std::unordered_set<std::uint64_t> blocks;
        for (auto idx : order) {
            const auto& p = std::get<SymPoint>(candidates[idx]);
            if (blocks.insert(detail::sym_block_key(p, k, depth)).second)
                out.points.push_back(candidates[idx]);
        }
        out.exact = true;
        return out;
    }

    if (auto grid = detail::detect_uniform_circle_grid(sys, candidates)) {
        const auto G = grid->modulus;
        const auto mult = detail::circle_multipliers_mod(sys, w, G);
        const auto close = detail::circle_close_differences(mult, G, eps);
        detail::Bitset blocked{std::size_t(G)};
        for (auto idx : order) {
            const auto r = grid->residues[idx];
            if (blocked.test(std::size_t(r))) continue;
            out.points.push_back(candidates[idx]);
            for (auto u : close) blocked.set(std::size_t((r + u) % G));
        }
        out.exact = true;
        return out;
    }

    for (auto idx : order) {
        const Point& cand = candidates[idx];
        bool ok = true;
        for (const auto& chosen : out.points)
            if (sys.word_metric(w, cand, chosen) < eps) { ok = false; break; }
        if (ok) out.points.push_back(cand);
    }
    return out;
}

// Spanning check used by the duality property tests: every candidate lies
// within eps of the chosen set in d_w.
inline bool separated_set_spans(const GeneratorSystem& sys, const SeparatedSet& s,
                                const std::vector<Point>& candidates) {
    for (const auto& cand : candidates) {
        bool near = false;
        for (const auto& chosen : s.points)
            if (sys.word_metric(s.word, cand, chosen) < s.epsilon) { near = true; break; }
        if (!near) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Covers

struct CoverBall {
    Word word;
    Point center;
};

struct CoverResult {
    std::vector<CoverBall> balls;
    bool verified_contains_all = false;
    bool exact = false;
    double weight(double gamma) const {
        double s = 0;
        for (const auto& b : balls) s += std::exp(-gamma * double(b.word.size() + 1));
        return s;
    }
};

// Greedy cover of Z by (w, delta)-Bowen balls, all carrying the word w.
inline CoverResult min_cover_fixed(const GeneratorSystem& sys, const std::vector<Point>& Z,
                                   const Word& w, double delta) {
    CoverResult out;
    if (Z.empty()) { out.verified_contains_all = true; return out; }

    if (detail::is_perm_shift(sys)) {
        // Dyadic symbolic balls are cylinders; the greedy cover is a partition
        // into depth-(|w| + cover_depth(delta)) blocks and hence exact.
        if (delta > 1.0) {
            out.balls.push_back({w, Z.front()});
            out.verified_contains_all = true;
            out.exact = true;
            return out;
        }
        const int depth = int(w.size()) + cover_depth(delta);
        const int k = sys.shift_data().k;
        std::unordered_set<std::uint64_t> blocks;
        for (const auto& p : Z)
            if (blocks.insert(detail::sym_block_key(std::get<SymPoint>(p), k, depth)).second)
                out.balls.push_back({w, p});
        out.verified_contains_all = true;
        out.exact = true;
        return out;
    }

    if (auto grid = detail::detect_uniform_circle_grid(sys, Z)) {
        const auto G = grid->modulus;
        const auto mult = detail::circle_multipliers_mod(sys, w, G);
        const auto ball = detail::circle_close_differences(mult, G, delta);
        detail::Bitset covered{std::size_t(G)};
        for (std::size_t i = 0; i < Z.size(); ++i) {
            const auto r = grid->residues[i];
            if (covered.test(std::size_t(r))) continue;
            out.balls.push_back({w, Z[i]});
            for (auto u : ball) covered.set(std::size_t((r + u) % G));
        }
        out.verified_contains_all = true;
        return out;
    }

    std::vector<bool> covered(Z.size(), false);
    for (std::size_t i = 0; i < Z.size(); ++i) {
        if (covered[i]) continue;
        out.balls.push_back({w, Z[i]});
        for (std::size_t j = i; j < Z.size(); ++j)
            if (!covered[j] && sys.word_metric(w, Z[i], Z[j]) < delta) covered[j] = true;
    }
    out.verified_contains_all = true;
    return out;
}

// Variable-length cover: balls may extend w by up to `max_extra` symbols (the
// extended word keeps w as a prefix).  Balls are chosen greedily by covered
// mass per exp(-gamma(len+1)) weight; with gamma fixed this can only improve
// on the fixed-length cover since length-|w| balls remain available.
inline CoverResult min_cover_variable(const GeneratorSystem& sys, const std::vector<Point>& Z,
                                      const Word& w, double delta, int max_extra,
                                      double gamma) {
    CoverResult out;
    if (Z.empty()) { out.verified_contains_all = true; return out; }
    const int m = sys.generator_count();
    std::vector<Word> extensions{Word({}, m)};
    for (int len = 1; len <= max_extra; ++len) {
        const auto words = enumerate_words(m, std::size_t(len), 1 << 12);
        extensions.insert(extensions.end(), words.begin(), words.end());
    }

    std::vector<bool> covered(Z.size(), false);
    std::size_t remaining = Z.size();
    while (remaining > 0) {
        std::size_t center = 0;
        while (covered[center]) ++center;
        double best_score = -1;
        Word best_word = w;
        std::vector<std::size_t> best_hits;
        for (const auto& ext : extensions) {
            const Word ww = concat(w, ext);
            std::vector<std::size_t> hits;
            for (std::size_t j = 0; j < Z.size(); ++j)
                if (!covered[j] && sys.word_metric(ww, Z[center], Z[j]) < delta)
                    hits.push_back(j);
            const double score =
                double(hits.size()) / std::exp(-gamma * double(ww.size() + 1));
            if (score > best_score) {
                best_score = score;
                best_word = ww;
                best_hits = std::move(hits);
            }
        }
        out.balls.push_back({best_word, Z[center]});
        for (auto j : best_hits) {
            if (!covered[j]) { covered[j] = true; --remaining; }
        }
        if (best_hits.empty()) { covered[center] = true; --remaining; }
    }
    out.verified_contains_all = true;
    return out;
}

}  // namespace sglab
