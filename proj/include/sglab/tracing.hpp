#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sglab/cover.hpp"
#include "sglab/exact_orbit.hpp"
#include "sglab/system.hpp"
#include "sglab/word.hpp"

// Constructive specification-property interpolation and blowup-tolerant
// tracing.  All words act in time order: the symbol at index t is applied at
// step t, matching the orbit and mismatch-count conventions in cover.hpp.
//
// Expanding families are glued and verified in wide fixed-point arithmetic: a
// double carries 53 bits while a glued span of length L needs about
// L*log2(degree) of them, so the backward-pullback seed and both orbits of
// the verification walk are held as FixedFraction coordinates.  The traced
// point therefore travels as a TracedPoint: a displayable approximation plus
// the exact fraction bits (empty on shifts, where SymPoint is already exact).

namespace sglab {

// ----- burn-in tables ----------------------------------------------------

// Steps needed before a traced orbit settles below eps: on shifts the symbol
// agreement depth that forces distance < eps; on expanding families the
// number of contractions bringing diameter-sized error below eps.
struct PrecisionTable {
    enum class Kind { Shift, Expanding } kind = Kind::Shift;
    double diameter = 1.0;
    double lambda_min = 2.0;

    int steps(double eps) const {
        if (eps <= 0) throw std::invalid_argument("precision radius must be positive");
        if (kind == Kind::Shift) {
            if (eps >= 1.0) return 0;
            return int(std::floor(std::log2(1.0 / eps))) + 1;
        }
        if (eps >= diameter) return 0;
        return int(std::ceil(std::log(diameter / eps) / std::log(lambda_min)));
    }
};

inline PrecisionTable precision_table(const GeneratorSystem& sys) {
    PrecisionTable t;
    switch (sys.kind()) {
        case GeneratorSystem::Kind::Shift:
            t.kind = PrecisionTable::Kind::Shift;
            t.diameter = sys.diameter();
            return t;
        case GeneratorSystem::Kind::Circle:
        case GeneratorSystem::Kind::Torus: {
            const auto lambda = sys.min_expansion();
            if (!lambda)
                throw std::invalid_argument(
                    "tracing needs uniformly expanding generators (every degree or "
                    "diagonal entry at least 2)");
            t.kind = PrecisionTable::Kind::Expanding;
            t.diameter = sys.diameter();
            t.lambda_min = *lambda;
            return t;
        }
        case GeneratorSystem::Kind::Finite:
            throw std::invalid_argument(
                "tracing supports shift and expanding systems only");
    }
    throw std::invalid_argument("unsupported system kind");
}

// ----- dyadic snapping ---------------------------------------------------

// Radii are snapped to 2*delta_r with delta_r = 2^-r: the smallest such value
// not exceeding the request.  Certificates carry both the requested and the
// snapped radius.
struct SnappedRadius {
    int r = 1;
    double delta = 0.5;    // 2^-r
    double epsilon = 1.0;  // 2 * delta
};

inline SnappedRadius snap_radius(double eps) {
    if (eps <= 0) throw std::invalid_argument("trace radius must be positive");
    if (eps < 0x1.0p-60) throw std::invalid_argument("trace radius too small to snap");
    SnappedRadius s;
    s.r = 0;
    while (std::ldexp(1.0, 1 - s.r) > eps) ++s.r;
    s.delta = std::ldexp(1.0, -s.r);
    s.epsilon = 2 * s.delta;
    return s;
}

// Minimal segment length at radius eps: the first n whose mismatch allowance
// g(n) covers twice the burn-in of the snapped scale.
inline std::size_t min_segment_length(const BlowupFunction& g, const PrecisionTable& table,
                                      double eps) {
    const auto s = snap_radius(eps);
    const long need = 2L * table.steps(s.delta);
    for (std::size_t n = 1; n <= (std::size_t(1) << 22); ++n)
        if (g(long(n)) >= need) return n;
    throw std::invalid_argument("blowup function never reaches twice the burn-in " +
                                std::to_string(need));
}

// ----- requests, traced points, certificates ------------------------------

struct TraceSegment {
    Point x;
    Word w;
    double epsilon = 0.5;
};

struct TraceRequest {
    std::vector<TraceSegment> segments;
    std::vector<std::size_t> gaps;  // optional; used by specification_trace
};

// A glued point: `approx` is for display and coarse use; `exact` carries the
// per-coordinate fraction bits for expanding families (empty on shifts).
struct TracedPoint {
    Point approx;
    std::vector<std::vector<std::uint64_t>> exact;
};

struct SegmentReport {
    std::size_t index = 0;
    std::size_t length = 0;  // |w_j|
    std::size_t start = 0;   // offset of the segment in the glued timeline
    double requested_epsilon = 0;
    double snapped_epsilon = 0;
    int scale_index = 0;
    long mismatches = 0;
    long bound = 0;  // pass needs mismatches < bound, strictly
    bool pass = false;
};

struct TraceCertificate {
    std::vector<SegmentReport> segments;
    bool pass = false;
    std::string blowup_name;
};

namespace detail {

inline void check_traceable(const GeneratorSystem& sys) {
    if (sys.kind() == GeneratorSystem::Kind::Shift && sys.generator_count() != 1)
        throw std::invalid_argument(
            "symbolic tracing supports the single-generator shift only");
    (void)precision_table(sys);  // throws for unsupported kinds
}

// Splice an explicit prefix onto an existing shift point, keeping its tail.
inline SymPoint splice_prefix(std::vector<std::uint8_t> prefix, const SymPoint& tail_pt) {
    auto [h, per] = tail_pt.flatten();
    prefix.insert(prefix.end(), h.begin(), h.end());
    return SymPoint::make(std::move(prefix), std::move(per), tail_pt.k);
}

// ----- exact coordinates for expanding families --------------------------

// Fraction width for a span of `total_len` steps: enough bits to outlive the
// full forward amplification with three guard limbs.
inline std::size_t trace_limbs(const GeneratorSystem& sys, std::size_t total_len) {
    double dmax = 2.0;
    if (sys.kind() == GeneratorSystem::Kind::Circle) {
        for (int d : sys.circle_data().degrees) dmax = std::max(dmax, double(d));
    } else if (sys.kind() == GeneratorSystem::Kind::Torus) {
        for (const auto& A : sys.torus_data().matrices)
            for (std::size_t i = 0; i < A.size(); ++i)
                dmax = std::max(dmax, double(std::llabs(A[i][i])));
    }
    const double bits = double(total_len) * std::log2(dmax) + 192.0;
    return std::size_t(bits / 64.0) + 1;
}

inline std::vector<FixedFraction> exact_coords(const GeneratorSystem& sys, const Point& x,
                                               std::size_t limbs) {
    std::vector<FixedFraction> c;
    if (sys.kind() == GeneratorSystem::Kind::Circle) {
        c.push_back(FixedFraction::from_double(std::get<double>(x), limbs));
    } else {
        for (double v : std::get<std::vector<double>>(x))
            c.push_back(FixedFraction::from_double(v, limbs));
    }
    return c;
}

inline std::vector<FixedFraction> exact_from_traced(const GeneratorSystem& sys,
                                                    const TracedPoint& y,
                                                    std::size_t limbs) {
    if (y.exact.empty()) return exact_coords(sys, y.approx, limbs);
    std::vector<FixedFraction> c;
    for (const auto& bits : y.exact) {
        FixedFraction f(limbs);
        // widen or narrow against the little-endian fraction (index from the top)
        for (std::size_t i = 0; i < limbs && i < bits.size(); ++i)
            f.bits()[limbs - 1 - i] = bits[bits.size() - 1 - i];
        c.push_back(std::move(f));
    }
    return c;
}

inline Point exact_to_point(const GeneratorSystem& sys,
                            const std::vector<FixedFraction>& c) {
    if (sys.kind() == GeneratorSystem::Kind::Circle) return c[0].to_double();
    std::vector<double> v;
    for (const auto& f : c) v.push_back(f.to_double());
    return v;
}

inline TracedPoint traced_from_coords(const GeneratorSystem& sys,
                                      std::vector<FixedFraction> c) {
    TracedPoint tp;
    tp.approx = exact_to_point(sys, c);
    for (auto& f : c) tp.exact.push_back(std::move(f.bits()));
    return tp;
}

// one exact forward step under generator j
inline void exact_step(const GeneratorSystem& sys, int j, std::vector<FixedFraction>& c) {
    if (sys.kind() == GeneratorSystem::Kind::Circle) {
        c[0].mul_int(std::uint64_t(sys.circle_data().degrees[std::size_t(j)]));
        return;
    }
    const auto& A = sys.torus_data().matrices[std::size_t(j)];
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto a = A[i][i];
        c[i].mul_int(std::uint64_t(std::llabs(a)));
        if (a < 0) c[i].negate();
    }
}

// one exact backward step: the inverse branch of generator j nearest `toward`
inline void exact_pullback(const GeneratorSystem& sys, int j,
                           std::vector<FixedFraction>& c, const Point& toward) {
    const auto pick_branch = [](double y, double tau, std::uint64_t d) {
        double bestd = 2;
        std::uint64_t best = 0;
        for (std::uint64_t i = 0; i < d; ++i) {
            const double cand = (y + double(i)) / double(d);
            double diff = std::fabs(cand - tau);
            diff = std::min(diff, 1.0 - diff);
            if (diff < bestd) { bestd = diff; best = i; }
        }
        return best;
    };
    if (sys.kind() == GeneratorSystem::Kind::Circle) {
        const auto d = std::uint64_t(sys.circle_data().degrees[std::size_t(j)]);
        const auto i = pick_branch(c[0].to_double(), std::get<double>(toward), d);
        c[0].div_int_plus(i, d);
        return;
    }
    const auto& A = sys.torus_data().matrices[std::size_t(j)];
    const auto& tau = std::get<std::vector<double>>(toward);
    for (std::size_t ci = 0; ci < c.size(); ++ci) {
        const auto a = A[ci][ci];
        const auto d = std::uint64_t(std::llabs(a));
        if (a < 0) c[ci].negate();  // solve |a| x = -y for negative entries
        const auto i = pick_branch(c[ci].to_double(), tau[ci], d);
        c[ci].div_int_plus(i, d);
    }
}

}  // namespace detail

// ----- specification-property interpolation ------------------------------

// Glue orbit segments with explicit gap words: the result shadows each
// segment's orbit within its radius.  Shifts glue by block concatenation
// (each segment contributes |w_j| + gap_j leading symbols of x_j); expanding
// families pull a seed backwards through contracting inverse branches, so the
// shadow error entering segment j from the right is at most
// diameter * lambda_min^-gap_j.
inline TracedPoint specification_trace(const GeneratorSystem& sys,
                                       const TraceRequest& request,
                                       const std::vector<Word>& gap_words) {
    detail::check_traceable(sys);
    const auto table = precision_table(sys);
    const std::size_t k = request.segments.size();
    if (k == 0) throw std::invalid_argument("specification trace needs at least one segment");
    if (gap_words.size() + 1 != k && !(k == 1 && gap_words.empty()))
        throw std::invalid_argument("need exactly one gap word between consecutive segments");
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const int need = table.steps(request.segments[j].epsilon);
        if (gap_words[j].size() < std::size_t(need))
            throw std::invalid_argument(
                "gap " + std::to_string(j) + " has length " +
                std::to_string(gap_words[j].size()) + " but the burn-in table requires " +
                std::to_string(need));
    }
    std::size_t total = 0;
    for (const auto& s : request.segments) total += s.w.size();
    for (const auto& gw : gap_words) total += gw.size();

    if (sys.kind() == GeneratorSystem::Kind::Shift) {
        if (k == 1) return {request.segments[0].x, {}};
        std::vector<std::uint8_t> prefix;
        for (std::size_t j = 0; j + 1 < k; ++j) {
            const auto& p = std::get<SymPoint>(request.segments[j].x);
            const std::size_t len = request.segments[j].w.size() + gap_words[j].size();
            for (std::size_t t = 0; t < len; ++t) prefix.push_back(p.symbol(t));
        }
        return {detail::splice_prefix(std::move(prefix),
                                      std::get<SymPoint>(request.segments.back().x)),
                {}};
    }

    const std::size_t limbs = detail::trace_limbs(sys, total);
    if (k == 1)
        return detail::traced_from_coords(
            sys, detail::exact_coords(sys, request.segments[0].x, limbs));

    // Expanding case: build the glued timeline and its exact targets, then
    // pull the last segment's start point backwards toward them.
    std::vector<int> timeline;
    std::vector<Point> targets;
    std::vector<std::size_t> seg_start(k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        seg_start[j] = timeline.size();
        Word course = request.segments[j].w;
        if (j + 1 < k)
            for (std::size_t t = 0; t < gap_words[j].size(); ++t)
                course.symbols.push_back(gap_words[j][t]);
        auto orb = detail::exact_coords(sys, request.segments[j].x, limbs);
        for (std::size_t t = 0; t < course.size(); ++t) {
            timeline.push_back(course[t]);
            targets.push_back(detail::exact_to_point(sys, orb));
            detail::exact_step(sys, course[t], orb);
        }
    }
    auto z = detail::exact_coords(sys, request.segments.back().x, limbs);
    for (std::size_t t = seg_start.back(); t-- > 0;)
        detail::exact_pullback(sys, timeline[t], z, targets[t]);
    return detail::traced_from_coords(sys, std::move(z));
}

// ----- certificates ------------------------------------------------------

// Mismatch counts of y against every segment of a gapless glued request,
// recomputed from scratch; a segment passes when its count stays strictly
// below bound_factor * g(|w|+1).
inline TraceCertificate verify_trace_scaled(const GeneratorSystem& sys, const TracedPoint& y,
                                            const TraceRequest& request,
                                            const BlowupFunction& g, long bound_factor) {
    TraceCertificate cert;
    cert.blowup_name = g.name;
    cert.pass = true;

    const bool symbolic = sys.kind() == GeneratorSystem::Kind::Shift;
    std::size_t total = 0;
    for (const auto& s : request.segments) total += s.w.size();
    const std::size_t limbs = symbolic ? 0 : detail::trace_limbs(sys, total);

    Point cursor_sym = y.approx;
    std::vector<FixedFraction> cursor;
    if (!symbolic) cursor = detail::exact_from_traced(sys, y, limbs);

    std::size_t offset = 0;
    for (std::size_t j = 0; j < request.segments.size(); ++j) {
        const auto& seg = request.segments[j];
        const auto snap = snap_radius(seg.epsilon);
        SegmentReport rep;
        rep.index = j;
        rep.length = seg.w.size();
        rep.start = offset;
        rep.requested_epsilon = seg.epsilon;
        rep.snapped_epsilon = snap.epsilon;
        rep.scale_index = snap.r;
        if (symbolic) {
            rep.mismatches =
                blowup_mismatch_count(sys, seg.w, seg.x, snap.epsilon, cursor_sym);
            for (std::size_t t = 0; t < seg.w.size(); ++t)
                cursor_sym = sys.apply_generator(seg.w[t], cursor_sym);
        } else {
            auto center = detail::exact_coords(sys, seg.x, limbs);
            long count = 0;
            for (std::size_t t = 0; t <= seg.w.size(); ++t) {
                const double d = sys.metric(detail::exact_to_point(sys, cursor),
                                            detail::exact_to_point(sys, center));
                if (d > snap.epsilon) ++count;
                if (t < seg.w.size()) {
                    detail::exact_step(sys, seg.w[t], cursor);
                    detail::exact_step(sys, seg.w[t], center);
                }
            }
            rep.mismatches = count;
        }
        rep.bound = bound_factor * g(long(seg.w.size()) + 1);
        rep.pass = rep.mismatches < rep.bound;
        cert.pass = cert.pass && rep.pass;
        cert.segments.push_back(rep);
        offset += seg.w.size();
    }
    return cert;
}

inline TraceCertificate verify_trace(const GeneratorSystem& sys, const TracedPoint& y,
                                     const TraceRequest& request, const BlowupFunction& g) {
    return verify_trace_scaled(sys, y, request, g, 1);
}

// ----- blowup-tolerant gluing (iterative level construction) -------------

// Glue segments with no gaps at all, tolerating per-segment mismatch budgets:
// snap each radius to a dyadic scale, group consecutive segments of the
// coarsest scale into components, interpolate each component (concatenation
// on shifts, backward pullback on expanding families), then repeat on ever
// finer scales -- at level i every piece whose scale is at least as coarse
// participates.  Components are processed left to right.
inline std::pair<TracedPoint, TraceCertificate> g_almost_trace(const GeneratorSystem& sys,
                                                               const BlowupFunction& g,
                                                               const TraceRequest& request) {
    detail::check_traceable(sys);
    const auto table = precision_table(sys);
    const std::size_t k = request.segments.size();
    if (k == 0) throw std::invalid_argument("trace request needs at least one segment");

    std::vector<SnappedRadius> snaps(k);
    std::size_t total = 0;
    for (std::size_t j = 0; j < k; ++j) {
        snaps[j] = snap_radius(request.segments[j].epsilon);
        const std::size_t need = min_segment_length(g, table, request.segments[j].epsilon);
        if (request.segments[j].w.size() < need)
            throw std::invalid_argument(
                "segment " + std::to_string(j) + " has length " +
                std::to_string(request.segments[j].w.size()) +
                " below the minimal traceable length " + std::to_string(need));
        total += request.segments[j].w.size();
    }
    const bool symbolic = sys.kind() == GeneratorSystem::Kind::Shift;
    const std::size_t limbs = symbolic ? 0 : detail::trace_limbs(sys, total);

    struct Piece {
        Point z_sym;                     // shift glue state
        std::vector<FixedFraction> z;    // expanding glue state
        Word w;
        int r;  // scale index the piece currently lives at
    };
    std::vector<Piece> pieces;
    for (std::size_t j = 0; j < k; ++j) {
        Piece p{request.segments[j].x, {}, request.segments[j].w, snaps[j].r};
        if (!symbolic) p.z = detail::exact_coords(sys, request.segments[j].x, limbs);
        pieces.push_back(std::move(p));
    }

    std::vector<int> levels;
    for (const auto& s : snaps) levels.push_back(s.r);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    auto merge_component = [&](std::size_t lo, std::size_t hi, int rho) -> Piece {
        // [lo, hi): at least two pieces, glued at scale delta = 2^-rho.
        Piece out;
        out.r = rho;
        out.w = pieces[lo].w;
        for (std::size_t i = lo + 1; i < hi; ++i)
            for (std::size_t t = 0; t < pieces[i].w.size(); ++t)
                out.w.symbols.push_back(pieces[i].w[t]);

        if (symbolic) {
            std::vector<std::uint8_t> prefix;
            for (std::size_t i = lo; i + 1 < hi; ++i) {
                const auto& p = std::get<SymPoint>(pieces[i].z_sym);
                for (std::size_t t = 0; t < pieces[i].w.size(); ++t)
                    prefix.push_back(p.symbol(t));
            }
            out.z_sym = detail::splice_prefix(std::move(prefix),
                                              std::get<SymPoint>(pieces[hi - 1].z_sym));
            return out;
        }

        std::vector<int> timeline;
        std::vector<Point> targets;
        std::size_t last_start = 0;
        for (std::size_t i = lo; i < hi; ++i) {
            if (i + 1 == hi) last_start = timeline.size();
            auto orb = pieces[i].z;
            for (std::size_t t = 0; t < pieces[i].w.size(); ++t) {
                timeline.push_back(pieces[i].w[t]);
                targets.push_back(detail::exact_to_point(sys, orb));
                detail::exact_step(sys, pieces[i].w[t], orb);
            }
        }
        out.z = pieces[hi - 1].z;
        for (std::size_t t = last_start; t-- > 0;)
            detail::exact_pullback(sys, timeline[t], out.z, targets[t]);
        return out;
    };

    for (int rho : levels) {
        std::vector<Piece> next;
        std::size_t i = 0;
        while (i < pieces.size()) {
            if (pieces[i].r > rho) {
                next.push_back(std::move(pieces[i]));
                ++i;
                continue;
            }
            std::size_t e = i;
            while (e < pieces.size() && pieces[e].r <= rho) ++e;
            if (e - i == 1)
                next.push_back(std::move(pieces[i]));
            else
                next.push_back(merge_component(i, e, rho));
            i = e;
        }
        pieces = std::move(next);
    }
    if (pieces.size() != 1)
        throw std::logic_error("level gluing did not converge to a single piece");

    TracedPoint traced;
    if (symbolic)
        traced = {pieces.front().z_sym, {}};
    else
        traced = detail::traced_from_coords(sys, std::move(pieces.front().z));

    TraceRequest gapless;
    gapless.segments = request.segments;
    auto cert = verify_trace(sys, traced, gapless, g);
    return {std::move(traced), std::move(cert)};
}

// ----- skew-product lift -------------------------------------------------

struct SkewTraceSegment {
    Itinerary iota;
    Point x;
    std::size_t n = 0;
    double epsilon = 0.5;
};

struct SkewTraceRequest {
    std::vector<SkewTraceSegment> segments;
};

struct SkewTraceResult {
    Itinerary iota;
    TracedPoint x;
    TraceCertificate certificate;
};

namespace detail {

// Distance between two symbol streams compared from given offsets.
inline double itinerary_distance(const Itinerary& a, std::size_t off_a, const Itinerary& b,
                                 std::size_t off_b, std::size_t horizon) {
    for (std::size_t j = 0; j < horizon; ++j)
        if (a.symbol(off_a + j) != b.symbol(off_b + j)) return std::ldexp(1.0, -int(j));
    return 0.0;
}

}  // namespace detail

// Counts, per segment, the times where the product distance
// max(symbol-stream distance, state distance) exceeds the snapped radius;
// bounds are 2 g(n_j + 1).
inline TraceCertificate verify_skew_trace(const GeneratorSystem& sys, const Itinerary& iota,
                                          const TracedPoint& x,
                                          const SkewTraceRequest& request,
                                          const BlowupFunction& g) {
    TraceCertificate cert;
    cert.blowup_name = g.name;
    cert.pass = true;
    const std::size_t horizon = sys.symbol_horizon();

    const bool symbolic = sys.kind() == GeneratorSystem::Kind::Shift;
    std::size_t total = 0;
    for (const auto& s : request.segments) total += s.n;
    const std::size_t limbs = symbolic ? 0 : detail::trace_limbs(sys, total);

    Point cursor_sym = x.approx;
    std::vector<FixedFraction> cursor;
    if (!symbolic) cursor = detail::exact_from_traced(sys, x, limbs);

    std::size_t offset = 0;
    for (std::size_t j = 0; j < request.segments.size(); ++j) {
        const auto& seg = request.segments[j];
        const auto snap = snap_radius(seg.epsilon);
        SegmentReport rep;
        rep.index = j;
        rep.length = seg.n;
        rep.start = offset;
        rep.requested_epsilon = seg.epsilon;
        rep.snapped_epsilon = snap.epsilon;
        rep.scale_index = snap.r;
        rep.bound = 2 * g(long(seg.n) + 1);

        Point mine_sym = cursor_sym;
        Point theirs_sym = seg.x;
        auto mine = cursor;
        std::vector<FixedFraction> theirs;
        if (!symbolic) theirs = detail::exact_coords(sys, seg.x, limbs);

        long count = 0;
        for (std::size_t t = 0; t <= seg.n; ++t) {
            const double ds =
                detail::itinerary_distance(iota, offset + t, seg.iota, t, horizon);
            const double dx = symbolic ? sys.metric(mine_sym, theirs_sym)
                                       : sys.metric(detail::exact_to_point(sys, mine),
                                                    detail::exact_to_point(sys, theirs));
            if (std::max(ds, dx) > snap.epsilon) ++count;
            if (t < seg.n) {
                if (symbolic) {
                    mine_sym = sys.apply_generator(iota.symbol(offset + t), mine_sym);
                    theirs_sym = sys.apply_generator(seg.iota.symbol(t), theirs_sym);
                } else {
                    detail::exact_step(sys, iota.symbol(offset + t), mine);
                    detail::exact_step(sys, seg.iota.symbol(t), theirs);
                }
            }
        }
        rep.mismatches = count;
        rep.pass = rep.mismatches < rep.bound;
        cert.pass = cert.pass && rep.pass;
        cert.segments.push_back(rep);

        for (std::size_t t = 0; t < seg.n; ++t) {
            if (symbolic)
                cursor_sym = sys.apply_generator(iota.symbol(offset + t), cursor_sym);
            else
                detail::exact_step(sys, iota.symbol(offset + t), cursor);
        }
        offset += seg.n;
    }
    return cert;
}

// Lift the gluing to the skew product: the driving sequence is the exact
// block concatenation of the per-segment itinerary prefixes, and the state
// point comes from g_almost_trace against those prefixes at the halved
// (dyadic) scale, so product mismatches stay within twice the blowup budget.
inline SkewTraceResult skew_trace_lift(const GeneratorSystem& sys, const BlowupFunction& g,
                                       const SkewTraceRequest& request) {
    detail::check_traceable(sys);
    const auto table = precision_table(sys);
    PrecisionTable sigma_table;  // symbol-stream side behaves like a shift
    sigma_table.kind = PrecisionTable::Kind::Shift;

    const std::size_t k = request.segments.size();
    if (k == 0) throw std::invalid_argument("skew trace needs at least one segment");
    const int m = sys.generator_count();

    TraceRequest base;
    std::vector<std::uint8_t> head;
    for (std::size_t j = 0; j < k; ++j) {
        const auto& seg = request.segments[j];
        if (seg.iota.alphabet() != m)
            throw std::invalid_argument("segment itinerary alphabet does not match system");
        const auto snap = snap_radius(seg.epsilon);
        const long need_sigma = 2L * sigma_table.steps(snap.delta);
        const std::size_t m_base = min_segment_length(g, table, snap.delta);
        std::size_t m_F = m_base;
        while (g(long(m_F)) < need_sigma) {
            ++m_F;
            if (m_F > (std::size_t(1) << 22))
                throw std::invalid_argument("blowup function never covers the symbol burn-in");
        }
        if (seg.n < m_F)
            throw std::invalid_argument("segment " + std::to_string(j) + " has length " +
                                        std::to_string(seg.n) +
                                        " below the minimal liftable length " +
                                        std::to_string(m_F));

        TraceSegment b;
        b.x = seg.x;
        b.w = seg.iota.prefix(seg.n);
        b.epsilon = snap.delta;  // halved scale: state errors stay below delta
        base.segments.push_back(std::move(b));
        const auto pre = seg.iota.prefix(seg.n);
        head.insert(head.end(), pre.symbols.begin(), pre.symbols.end());
    }

    SkewTraceResult out;
    const auto& last = request.segments.back();
    out.iota = Itinerary::with_head(
        Word(std::vector<std::uint8_t>(head.begin(), head.end() - std::ptrdiff_t(last.n)), m),
        last.iota);
    out.x = g_almost_trace(sys, g, base).first;
    out.certificate = verify_skew_trace(sys, out.iota, out.x, request, g);
    return out;
}

}  // namespace sglab
