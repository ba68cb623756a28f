#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sglab/measure.hpp"
#include "sglab/rng.hpp"
#include "sglab/system.hpp"
#include "sglab/word.hpp"

// Visiting-time statistics and recurrence classification.
//
// All quantities here are finite-scale surrogates: a density is a max/min of
// prefix ratios over the tail of a finite horizon, a Banach density scans a
// fixed window schedule, and every verdict record carries the scales (epsilon,
// horizon, thresholds) that produced it.  None of the classifiers claims the
// infinite-horizon property.

namespace sglab {

struct VisitSet {
    std::vector<std::size_t> indices;  // sorted, unique, < horizon
    std::size_t horizon = 0;
};

// Window lengths {sqrt(H), H^(2/3), H/8}, deduplicated, each >= 1.
inline std::vector<std::size_t> banach_window_schedule(std::size_t horizon) {
    std::vector<std::size_t> w{
        std::size_t(std::sqrt(double(horizon))),
        std::size_t(std::pow(double(horizon), 2.0 / 3.0)),
        horizon / 8,
    };
    for (auto& x : w) x = std::max<std::size_t>(1, std::min(x, horizon));
    std::sort(w.begin(), w.end());
    w.erase(std::unique(w.begin(), w.end()), w.end());
    return w;
}

struct DensityStats {
    double upper = 0;
    double lower = 0;
    double banach_upper = 0;
    double banach_lower = 0;
    std::vector<std::size_t> window_schedule;
};

// Upper/lower density: max/min of prefix ratios #(S cap [0,n))/n over the
// tail n in [ceil(sqrt(H)), H].  Banach versions: max/min over all windows of
// the scheduled lengths, combined with the tail prefix ratios so that the
// chain banach_lower <= lower <= upper <= banach_upper holds by construction.
inline DensityStats density_stats(const VisitSet& S,
                                  const std::vector<std::size_t>& window_schedule) {
    if (S.horizon == 0) throw std::invalid_argument("density needs a positive horizon");
    const std::size_t H = S.horizon;
    std::vector<std::uint32_t> prefix(H + 1, 0);
    {
        std::size_t prev = H;  // sentinel for uniqueness/sortedness check
        std::size_t at = 0;
        for (std::size_t n = 0; n < H; ++n) {
            prefix[n + 1] = prefix[n];
            if (at < S.indices.size() && S.indices[at] == n) {
                prefix[n + 1]++;
                ++at;
            }
        }
        if (at != S.indices.size())
            throw std::invalid_argument("visit set must be sorted, unique, and below horizon");
        (void)prev;
    }

    DensityStats out;
    out.window_schedule = window_schedule;
    const std::size_t tail = std::max<std::size_t>(
        1, std::size_t(std::ceil(std::sqrt(double(H)))));
    double up = 0, lo = 1;
    for (std::size_t n = tail; n <= H; ++n) {
        const double r = double(prefix[n]) / double(n);
        up = std::max(up, r);
        lo = std::min(lo, r);
    }
    out.upper = up;
    out.lower = lo;

    double bup = up, blo = lo;  // prefix ratios are windows starting at 0
    for (std::size_t L : window_schedule) {
        if (L > H) continue;
        for (std::size_t a = 0; a + L <= H; ++a) {
            const double r = double(prefix[a + L] - prefix[a]) / double(L);
            bup = std::max(bup, r);
            blo = std::min(blo, r);
        }
    }
    out.banach_upper = bup;
    out.banach_lower = blo;
    return out;
}

inline DensityStats density_stats(const VisitSet& S) {
    return density_stats(S, banach_window_schedule(S.horizon));
}

// Times n in [0, horizon) whose orbit point lies in the open ball
// B(center, radius); n = 0 compares x itself.
inline VisitSet visiting_times(const GeneratorSystem& sys, const Itinerary& iota,
                               const Point& x, const Point& center, double radius,
                               std::size_t horizon) {
    if (radius <= 0) throw std::invalid_argument("visiting radius must be positive");
    VisitSet out;
    out.horizon = horizon;
    Point y = x;
    for (std::size_t n = 0; n < horizon; ++n) {
        if (sys.metric(y, center) < radius) out.indices.push_back(n);
        y = sys.apply_generator(iota.symbol(n), y);
    }
    return out;
}

// ----- omega-limit surrogates -------------------------------------------

enum class DensityKind { Upper, Lower, BanachUpper, BanachLower };

// Probe resolution whose cells have diameter <= eps.
inline std::int64_t resolution_for_radius(const GeneratorSystem& sys, double eps) {
    switch (sys.kind()) {
        case GeneratorSystem::Kind::Circle:
        case GeneratorSystem::Kind::Torus:
            return std::max<std::int64_t>(2, std::int64_t(std::ceil(1.0 / eps)));
        case GeneratorSystem::Kind::Shift: {
            std::int64_t q = 0;
            double diam = 1.0;
            while (diam > eps) {
                diam *= 0.5;
                ++q;
                if (q > 62) throw std::invalid_argument("radius too small for cylinder probes");
            }
            return std::max<std::int64_t>(1, q);
        }
        case GeneratorSystem::Kind::Finite: return 1;
    }
    return 1;
}

struct OmegaReport {
    double epsilon = 0;
    std::size_t horizon = 0;
    std::int64_t resolution = 0;
    double threshold = 0;
    std::vector<DensityStats> cell_stats;  // per probe cell
    std::vector<char> tail_visited;        // visited at or after ceil(sqrt(H))

    std::vector<std::int64_t> omega_cells(DensityKind kind) const {
        std::vector<std::int64_t> out;
        for (std::size_t c = 0; c < cell_stats.size(); ++c) {
            double v = 0;
            switch (kind) {
                case DensityKind::Upper: v = cell_stats[c].upper; break;
                case DensityKind::Lower: v = cell_stats[c].lower; break;
                case DensityKind::BanachUpper: v = cell_stats[c].banach_upper; break;
                case DensityKind::BanachLower: v = cell_stats[c].banach_lower; break;
            }
            if (v > threshold) out.push_back(std::int64_t(c));
        }
        return out;
    }

    // Plain omega surrogate: cells visited at least once in the tail window.
    std::vector<std::int64_t> omega_plain() const {
        std::vector<std::int64_t> out;
        for (std::size_t c = 0; c < tail_visited.size(); ++c)
            if (tail_visited[c]) out.push_back(std::int64_t(c));
        return out;
    }
};

// Visit statistics of the balls B(cell representative, eps) for every probe
// cell, in one orbit sweep.
inline OmegaReport omega_limits(const GeneratorSystem& sys, const Itinerary& iota,
                                const Point& x, double eps, std::size_t horizon,
                                double threshold) {
    OmegaReport rep;
    rep.epsilon = eps;
    rep.horizon = horizon;
    rep.threshold = threshold;
    rep.resolution = resolution_for_radius(sys, eps);
    const std::size_t cells = sys.cell_count(rep.resolution);
    std::vector<Point> reps(cells);
    for (std::size_t c = 0; c < cells; ++c)
        reps[c] = sys.cell_representative(std::int64_t(c), rep.resolution);

    std::vector<std::vector<std::size_t>> visits(cells);
    std::vector<char> tail_visited(cells, 0);
    const std::size_t tail =
        std::max<std::size_t>(1, std::size_t(std::ceil(std::sqrt(double(horizon)))));
    Point y = x;
    for (std::size_t n = 0; n < horizon; ++n) {
        for (std::size_t c = 0; c < cells; ++c) {
            if (sys.metric(y, reps[c]) < eps) {
                visits[c].push_back(n);
                if (n >= tail) tail_visited[c] = 1;
            }
        }
        y = sys.apply_generator(iota.symbol(n), y);
    }

    const auto windows = banach_window_schedule(horizon);
    rep.cell_stats.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        VisitSet S;
        S.horizon = horizon;
        S.indices = std::move(visits[c]);
        rep.cell_stats[c] = density_stats(S, windows);
    }
    rep.tail_visited = std::move(tail_visited);
    return rep;
}

// ----- classification ----------------------------------------------------

struct RecurrenceThresholds {
    double positive = -1;      // flags: density counts as positive when > this;
                               // default (negative) means 10 / horizon
    double qr_tol = 0.05;      // weak-star clustering radius for quasiregularity
    double support_mass = 0.01;  // cell counts as support when mass >= this
    double zero_max = 0.15;      // case patterns: claimed-zero densities <= this
    double positive_min = 0.3;   // case patterns: claimed-positive densities >= this
};

struct StructureFlags {
    bool W = false;  // every limit measure has full support (= closure union)
    bool V = false;  // some limit measure has full support
    bool S = false;  // supports have a common cell
};

// Support analysis of a limit family: S_nu = {cells with mass >= threshold},
// C = union of supports; W iff all supports equal C, V iff some does, S iff
// the intersection is nonempty.
inline StructureFlags structure_predicates(const LimitPointFamily& family,
                                           double support_threshold) {
    if (family.representatives.empty())
        throw std::invalid_argument("structure predicates need a nonempty family");
    const std::size_t n = family.representatives.front().mass.size();
    std::vector<char> uni(n, 0), inter(n, 1);
    std::vector<std::vector<char>> supports;
    for (const auto& mu : family.representatives) {
        std::vector<char> s(n, 0);
        for (std::size_t i = 0; i < n; ++i) s[i] = mu.mass[i] >= support_threshold;
        for (std::size_t i = 0; i < n; ++i) {
            uni[i] |= s[i];
            inter[i] &= s[i];
        }
        supports.push_back(std::move(s));
    }
    StructureFlags f;
    f.W = true;
    f.V = false;
    for (const auto& s : supports) {
        const bool full = s == uni;
        f.W = f.W && full;
        f.V = f.V || full;
    }
    f.S = std::any_of(inter.begin(), inter.end(), [](char c) { return c != 0; });
    return f;
}

inline std::string level_from_flags(bool qw, bool br, const StructureFlags& f) {
    const char* base = qw ? "QW" : br ? "BR" : nullptr;
    if (!base) return "none";
    int level = 5;
    if (f.W)
        level = 1;
    else if (f.V && f.S)
        level = 2;
    else if (f.V)
        level = 3;
    else if (f.S)
        level = 4;
    return std::string(base) + "_" + std::to_string(level);
}

struct RecurrenceVerdict {
    // flags at scale
    bool transitive_eps = false;
    bool quasiregular = false;
    double quasiregular_gap = 0;  // weak-star diameter of cluster representatives
    bool upper_recurrent_eps = false;
    bool banach_upper_recurrent_eps = false;
    StructureFlags structure;
    std::string level = "none";  // BR_1..BR_5 / QW_1..QW_5 / none
    int case_id = 0;             // 1..6, or 0 when undetermined
    bool case_determined = false;

    // scales (always serialized with the verdict)
    double epsilon = 0;
    std::size_t horizon = 0;
    double positive_threshold = 0;
    double zero_max = 0;
    double positive_min = 0;

    DensityStats self_return;
};

namespace detail {

// Dual-threshold set membership for the case patterns: returns +1 (in), 0
// (out), -1 (dead zone) per cell.
inline int trichotomy(double v, const RecurrenceThresholds& th) {
    if (v >= th.positive_min) return 1;
    if (v <= th.zero_max) return 0;
    return -1;
}

struct CasePattern {
    bool determined = true;
    std::vector<std::int64_t> lower, upper, banach, omega;
    int case_id = 0;
};

inline CasePattern case_pattern_from_report(const OmegaReport& rep,
                                            const RecurrenceThresholds& th) {
    CasePattern pat;
    const std::size_t cells = rep.cell_stats.size();
    std::vector<int> in_lower(cells), in_upper(cells), in_bup(cells), in_blo(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        in_lower[c] = trichotomy(rep.cell_stats[c].lower, th);
        in_upper[c] = trichotomy(rep.cell_stats[c].upper, th);
        in_bup[c] = trichotomy(rep.cell_stats[c].banach_upper, th);
        in_blo[c] = trichotomy(rep.cell_stats[c].banach_lower, th);
        if (in_lower[c] < 0 || in_upper[c] < 0 || in_bup[c] < 0 || in_blo[c] < 0)
            pat.determined = false;
    }
    if (!pat.determined) return pat;
    bool blo_empty = true;
    for (std::size_t c = 0; c < cells; ++c) {
        if (in_blo[c]) blo_empty = false;
        if (in_lower[c]) pat.lower.push_back(std::int64_t(c));
        if (in_upper[c]) pat.upper.push_back(std::int64_t(c));
        if (in_bup[c]) pat.banach.push_back(std::int64_t(c));
        if (rep.tail_visited[c]) pat.omega.push_back(std::int64_t(c));
    }
    // The six cases live in the regime omega_{B_*} empty, omega_{B^*} = omega.
    if (!blo_empty || pat.banach != pat.omega || pat.upper.empty()) {
        pat.determined = false;
        return pat;
    }
    const bool lo_nonempty = !pat.lower.empty();
    const bool eq_lo_up = pat.lower == pat.upper;
    const bool eq_up_ba = pat.upper == pat.banach;
    if (lo_nonempty) {
        if (eq_lo_up && eq_up_ba) pat.case_id = 1;
        else if (eq_lo_up) pat.case_id = 2;
        else if (eq_up_ba) pat.case_id = 4;
        else pat.case_id = 6;
    } else {
        if (eq_up_ba) pat.case_id = 3;
        else pat.case_id = 5;
    }
    return pat;
}

}  // namespace detail

inline RecurrenceVerdict classify_recurrence(const GeneratorSystem& sys, const Itinerary& iota,
                                             const Point& x, double eps, std::size_t horizon,
                                             RecurrenceThresholds th = {}) {
    if (eps <= 0) throw std::invalid_argument("classification radius must be positive");
    RecurrenceVerdict v;
    v.epsilon = eps;
    v.horizon = horizon;
    if (th.positive < 0) th.positive = 10.0 / double(horizon);
    v.positive_threshold = th.positive;
    v.zero_max = th.zero_max;
    v.positive_min = th.positive_min;

    // Self-return densities drive the recurrence flags.
    v.self_return = density_stats(visiting_times(sys, iota, x, x, eps, horizon));
    v.upper_recurrent_eps = v.self_return.upper > th.positive;
    v.banach_upper_recurrent_eps = v.self_return.banach_upper > th.positive;

    // Transitivity: the orbit meets every probe cell of diameter <= eps
    // (any visit over the whole horizon counts).
    const auto rep = omega_limits(sys, iota, x, eps, horizon, th.positive);
    v.transitive_eps = true;
    for (std::size_t c = 0; c < rep.cell_stats.size(); ++c) {
        const bool any_visit = rep.cell_stats[c].banach_upper > 0 || rep.tail_visited[c];
        if (!any_visit) v.transitive_eps = false;
    }

    // Quasiregularity: empirical product measures cluster to one limit.
    const auto schedule = dyadic_checkpoints(horizon);
    const std::int64_t meas_res =
        std::min<std::int64_t>(rep.resolution, sys.kind() == GeneratorSystem::Kind::Shift
                                                   ? 6
                                                   : 64);
    const auto fam = default_test_family(sys, 1);
    ObservableFunctional no_alpha;
    const auto family = limit_point_family(sys, iota, x, schedule, th.qr_tol, 1, meas_res,
                                           no_alpha, fam);
    v.quasiregular = family.representatives.size() == 1;
    for (std::size_t i = 0; i < family.representatives.size(); ++i)
        for (std::size_t j = i + 1; j < family.representatives.size(); ++j)
            v.quasiregular_gap =
                std::max(v.quasiregular_gap,
                         weakstar_distance(sys, family.representatives[i],
                                           family.representatives[j], fam));

    v.structure = structure_predicates(family, th.support_mass);
    v.level = level_from_flags(v.upper_recurrent_eps,
                               v.banach_upper_recurrent_eps && !v.upper_recurrent_eps,
                               v.structure);

    const auto pattern = detail::case_pattern_from_report(rep, th);
    v.case_determined = pattern.determined;
    v.case_id = pattern.case_id;
    return v;
}

// ----- constructions -----------------------------------------------------

// Block schedules realizing the six statistical omega-limit patterns on the
// 4-symbol full shift (single generator = plain shift).  Cores use geometric
// block ladders (x8); upper-vs-Banach separations use sparse solid runs of
// length position/16 so that every tested horizon {1e3,1e4,1e5} contains a
// window-sized run.  Densities are certified by direct prefix counting on the
// symbol array (no orbit machinery), and independently re-checkable through
// omega_limits.
struct CaseScheduleParams {
    std::size_t length = 1u << 17;  // symbols generated
    std::vector<std::size_t> horizons{1000, 10000, 100000};
    double zero_max = 0.15;
    double positive_min = 0.3;
};

struct CaseCertificate {
    int case_id = 0;
    std::vector<std::size_t> horizons;
    struct Entry {
        std::size_t horizon = 0;
        int cell = 0;
        DensityStats stats;
        bool tail_visited = false;
    };
    std::vector<Entry> entries;  // constructor-side direct counts
    std::vector<std::int64_t> lower_cells, upper_cells, banach_cells, omega_cells;
    bool pass = false;
    std::string note;
};

struct CasePoint {
    int case_id = 0;
    GeneratorSystem system;  // 4-symbol full shift, one generator
    Itinerary iota;          // constant 0
    Point x;
    std::vector<std::uint8_t> symbols;
    CaseCertificate certificate;
};

namespace detail {

inline void fill_range(std::vector<std::uint8_t>& a, std::size_t from, std::size_t to,
                       std::uint8_t s) {
    for (std::size_t i = from; i < to && i < a.size(); ++i) a[i] = s;
}

inline void mix_range(std::vector<std::uint8_t>& a, std::size_t from, std::size_t to,
                      std::uint8_t s0, std::uint8_t s1) {
    for (std::size_t i = from; i < to && i < a.size(); ++i) a[i] = (i - from) % 2 ? s1 : s0;
}

// Blocks cycling through `cycle` with lengths L0 * growth^j.
inline void block_core(std::vector<std::uint8_t>& a,
                       const std::vector<std::uint8_t>& cycle, std::size_t L0,
                       std::size_t growth, bool mix_even_with = false,
                       std::uint8_t mix_partner = 1) {
    std::size_t at = 0, L = L0, j = 0;
    while (at < a.size()) {
        const std::uint8_t s = cycle[j % cycle.size()];
        if (mix_even_with && j % 2 == 0)
            mix_range(a, at, at + L, s, mix_partner);
        else
            fill_range(a, at, at + L, s);
        at += L;
        L *= growth;
        ++j;
    }
}

// Sparse solid runs: positions P0 * 8^k, lengths P/denom.
inline void sparse_runs(std::vector<std::uint8_t>& a, std::uint8_t s, std::size_t P0,
                        std::size_t denom) {
    for (std::size_t P = P0; P < a.size(); P *= 8) fill_range(a, P, P + P / denom, s);
}

// Direct prefix-count densities of symbol s in a[0..H): the schedule oracle,
// sharing no code with VisitSet/density_stats.
inline CaseCertificate::Entry direct_entry(const std::vector<std::uint8_t>& a, int s,
                                           std::size_t H) {
    CaseCertificate::Entry e;
    e.horizon = H;
    e.cell = s;
    std::vector<std::uint32_t> pc(H + 1, 0);
    for (std::size_t i = 0; i < H; ++i) pc[i + 1] = pc[i] + (a[i] == s ? 1u : 0u);
    const std::size_t tail =
        std::max<std::size_t>(1, std::size_t(std::ceil(std::sqrt(double(H)))));
    double up = 0, lo = 1;
    for (std::size_t n = tail; n <= H; ++n) {
        const double r = double(pc[n]) / double(n);
        up = up > r ? up : r;
        lo = lo < r ? lo : r;
    }
    e.stats.upper = up;
    e.stats.lower = lo;
    double bup = up, blo = lo;
    for (std::size_t L : {std::size_t(std::sqrt(double(H))),
                          std::size_t(std::pow(double(H), 2.0 / 3.0)), H / 8}) {
        if (L < 1 || L > H) continue;
        e.stats.window_schedule.push_back(L);
        for (std::size_t at = 0; at + L <= H; ++at) {
            const double r = double(pc[at + L] - pc[at]) / double(L);
            bup = bup > r ? bup : r;
            blo = blo < r ? blo : r;
        }
    }
    e.stats.banach_upper = bup;
    e.stats.banach_lower = blo;
    e.tail_visited = pc[H] > pc[tail - 1] || (tail == 1 && pc[H] > 0);
    return e;
}

}  // namespace detail

// Expected membership pattern per case, at depth-1 cells A=0,B=1,C=2,D=3.
inline void case_expectations(int case_id, std::vector<std::int64_t>& lower,
                              std::vector<std::int64_t>& upper,
                              std::vector<std::int64_t>& banach,
                              std::vector<std::int64_t>& omega) {
    switch (case_id) {
        case 1: lower = {0, 1}; upper = {0, 1}; banach = {0, 1}; omega = {0, 1}; break;
        case 2: lower = {0}; upper = {0}; banach = {0, 1}; omega = {0, 1}; break;
        case 3: lower = {}; upper = {0, 1, 2}; banach = {0, 1, 2}; omega = {0, 1, 2}; break;
        case 4: lower = {0}; upper = {0, 1}; banach = {0, 1}; omega = {0, 1}; break;
        case 5: lower = {}; upper = {0, 1, 2}; banach = {0, 1, 2, 3}; omega = {0, 1, 2, 3}; break;
        case 6: lower = {0}; upper = {0, 1}; banach = {0, 1, 3}; omega = {0, 1, 3}; break;
        default: throw std::invalid_argument("case id must be in 1..6");
    }
}

inline CasePoint construct_case_point(int case_id, const CaseScheduleParams& params = {}) {
    if (case_id < 1 || case_id > 6) throw std::invalid_argument("case id must be in 1..6");
    std::vector<std::uint8_t> a(params.length, 0);
    const std::uint8_t A = 0, B = 1, C = 2, D = 3;
    switch (case_id) {
        case 1:
            detail::mix_range(a, 0, a.size(), A, B);
            for (std::size_t P = 512; P < a.size(); P *= 4) {
                detail::fill_range(a, P, P + P / 5, A);
                detail::fill_range(a, P + P / 5, P + 2 * (P / 5), B);
            }
            break;
        case 2:
            detail::fill_range(a, 0, a.size(), A);
            detail::sparse_runs(a, B, 700, 16);
            break;
        case 3:
            detail::block_core(a, {A, B, C}, 64, 8);
            break;
        case 4:
            detail::block_core(a, {A, A}, 64, 8, /*mix_even_with=*/true, B);
            detail::sparse_runs(a, B, 700, 16);
            break;
        case 5:
            detail::block_core(a, {A, B, C}, 64, 8);
            detail::sparse_runs(a, D, 700, 16);
            break;
        case 6:
            detail::block_core(a, {A, A}, 64, 8, /*mix_even_with=*/true, B);
            detail::sparse_runs(a, B, 700, 16);
            for (std::size_t P = 900; P < a.size(); P *= 8)
                detail::fill_range(a, P, P + P / 12, D);
            break;
    }

    CasePoint cp;
    cp.case_id = case_id;
    cp.system = GeneratorSystem::full_shift(4, std::vector<std::vector<std::uint8_t>>{
                                                   {0, 1, 2, 3}});
    cp.iota = Itinerary::constant(0, 1);
    cp.symbols = a;
    cp.x = SymPoint::make(std::vector<std::uint8_t>(a), {0}, 4);

    CaseCertificate cert;
    cert.case_id = case_id;
    cert.horizons = params.horizons;
    case_expectations(case_id, cert.lower_cells, cert.upper_cells, cert.banach_cells,
                      cert.omega_cells);
    cert.pass = true;
    RecurrenceThresholds th;
    th.zero_max = params.zero_max;
    th.positive_min = params.positive_min;
    for (std::size_t H : params.horizons) {
        if (H > a.size()) {
            cert.pass = false;
            cert.note = "horizon exceeds generated schedule";
            continue;
        }
        for (int s = 0; s < 4; ++s) {
            auto e = detail::direct_entry(a, s, H);
            const bool in_lower =
                std::count(cert.lower_cells.begin(), cert.lower_cells.end(), s) > 0;
            const bool in_upper =
                std::count(cert.upper_cells.begin(), cert.upper_cells.end(), s) > 0;
            const bool in_banach =
                std::count(cert.banach_cells.begin(), cert.banach_cells.end(), s) > 0;
            const bool in_omega =
                std::count(cert.omega_cells.begin(), cert.omega_cells.end(), s) > 0;
            auto ok_pos = [&](double v) { return v >= params.positive_min; };
            auto ok_zero = [&](double v) { return v <= params.zero_max; };
            bool ok = true;
            ok = ok && (in_lower ? ok_pos(e.stats.lower) : ok_zero(e.stats.lower));
            ok = ok && (in_upper ? ok_pos(e.stats.upper) : ok_zero(e.stats.upper));
            ok = ok && (in_banach ? ok_pos(e.stats.banach_upper)
                                  : ok_zero(e.stats.banach_upper));
            ok = ok && ok_zero(e.stats.banach_lower);  // omega_{B_*} empty in all cases
            ok = ok && (in_omega == e.tail_visited);
            if (!ok) {
                cert.pass = false;
                if (cert.note.empty())
                    cert.note = "cell " + std::to_string(s) + " at horizon " +
                                std::to_string(H) + " violates the pattern";
            }
            cert.entries.push_back(std::move(e));
        }
    }
    cp.certificate = std::move(cert);
    return cp;
}

// ----- gap families ------------------------------------------------------

// Prefix-diverse families witnessing membership gaps between recurrence
// classes.  Every family shares one tail schedule; the leading `prefix_len`
// symbols run over all blocks (or a seeded sample), which is what carries the
// family's covering growth.
struct GapFamilyOptions {
    std::size_t prefix_len = 8;
    std::size_t count = 0;  // 0 = the full k^prefix_len family
    std::uint64_t seed = 1;
    std::size_t schedule_len = 1u << 17;
};

struct GapFamily {
    std::string kind;
    GeneratorSystem system;
    Itinerary iota;  // constant 0
    std::vector<Point> points;
    std::size_t prefix_len = 0;
};

namespace detail {

inline std::vector<std::uint8_t> nth_block(std::size_t idx, std::size_t len, int k) {
    std::vector<std::uint8_t> b(len);
    for (std::size_t i = len; i-- > 0;) {
        b[i] = std::uint8_t(idx % std::size_t(k));
        idx /= std::size_t(k);
    }
    return b;
}

inline std::vector<std::size_t> family_indices(std::size_t total, std::size_t count,
                                               std::uint64_t seed) {
    if (count == 0 || count >= total) {
        std::vector<std::size_t> all(total);
        for (std::size_t i = 0; i < total; ++i) all[i] = i;
        return all;
    }
    Rng rng(seed);
    // seeded sample without replacement
    std::vector<std::size_t> all(total);
    for (std::size_t i = 0; i < total; ++i) all[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + std::size_t(rng.below(std::uint64_t(total - i)));
        std::swap(all[i], all[j]);
    }
    all.resize(count);
    return all;
}

}  // namespace detail

// Banach-recurrent non-upper-recurrent witnesses on the 2-symbol shift:
// prefix beta, then constant filler (the complement of beta's first symbol)
// with sparse solid runs of beta's first symbol.  Self-returns at radius 0.6
// are exactly the beta_0 positions: Banach upper density 1 (window inside a
// run), upper density ~ 1/16.
inline GapFamily gap_family_qw_br(const GapFamilyOptions& opt) {
    GapFamily fam;
    fam.kind = "qw-br";
    fam.system = GeneratorSystem::full_shift(2, std::vector<std::vector<std::uint8_t>>{{0, 1}});
    fam.iota = Itinerary::constant(0, 1);
    fam.prefix_len = opt.prefix_len;
    const std::size_t total = checked_pow(std::size_t(2), opt.prefix_len, kWordEnumerationBudget);
    for (std::size_t idx : detail::family_indices(total, opt.count, opt.seed)) {
        auto beta = detail::nth_block(idx, opt.prefix_len, 2);
        std::vector<std::uint8_t> a(opt.schedule_len, std::uint8_t(1 - beta[0]));
        std::copy(beta.begin(), beta.end(), a.begin());
        detail::sparse_runs(a, beta[0], 700, 16);
        fam.points.push_back(SymPoint::make(std::move(a), {std::uint8_t(1 - beta[0])}, 2));
    }
    return fam;
}

// Quasiregular Banach-recurrent points: periodic points with period beta.
inline GapFamily gap_family_qr_br1(const GapFamilyOptions& opt) {
    GapFamily fam;
    fam.kind = "qr-br1";
    fam.system = GeneratorSystem::full_shift(2, std::vector<std::vector<std::uint8_t>>{{0, 1}});
    fam.iota = Itinerary::constant(0, 1);
    fam.prefix_len = opt.prefix_len;
    const std::size_t total = checked_pow(std::size_t(2), opt.prefix_len, kWordEnumerationBudget);
    for (std::size_t idx : detail::family_indices(total, opt.count, opt.seed)) {
        auto beta = detail::nth_block(idx, opt.prefix_len, 2);
        fam.points.push_back(SymPoint::make({}, std::move(beta), 2));
    }
    return fam;
}

// Transitive irregular points: prefix beta, then alternating enumeration
// blocks (all words of length j, giving eps-density of the orbit) and
// oscillation blocks (solid 0-run of length L then 1-run of 2L, L growing
// x4), so Birkhoff averages of phi(x)=x_0 keep swinging.
inline GapFamily gap_family_irregular_transitive(const GapFamilyOptions& opt) {
    GapFamily fam;
    fam.kind = "irregular-transitive";
    fam.system = GeneratorSystem::full_shift(2, std::vector<std::vector<std::uint8_t>>{{0, 1}});
    fam.iota = Itinerary::constant(0, 1);
    fam.prefix_len = opt.prefix_len;

    // shared tail: enumeration + oscillation ladder
    std::vector<std::uint8_t> tail;
    tail.reserve(opt.schedule_len);
    std::size_t j = 2, L = 64;
    while (tail.size() < opt.schedule_len) {
        for (const auto& w : enumerate_words(2, j))
            for (auto s : w.symbols) tail.push_back(s);
        for (std::size_t i = 0; i < L && tail.size() < opt.schedule_len; ++i)
            tail.push_back(0);
        for (std::size_t i = 0; i < 2 * L && tail.size() < opt.schedule_len; ++i)
            tail.push_back(1);
        ++j;
        L *= 4;
    }
    tail.resize(opt.schedule_len);

    const std::size_t total = checked_pow(std::size_t(2), opt.prefix_len, kWordEnumerationBudget);
    for (std::size_t idx : detail::family_indices(total, opt.count, opt.seed)) {
        auto beta = detail::nth_block(idx, opt.prefix_len, 2);
        std::vector<std::uint8_t> a(tail);
        std::copy(beta.begin(), beta.end(), a.begin());
        fam.points.push_back(SymPoint::make(std::move(a), {0, 1}, 2));
    }
    return fam;
}

// Prefix-diverse variants of a case schedule on the 4-symbol shift (used for
// the T_j / B_j families).
inline GapFamily gap_family_case(int case_id, const GapFamilyOptions& opt) {
    GapFamily fam;
    fam.kind = "case-" + std::to_string(case_id);
    fam.system = GeneratorSystem::full_shift(4, std::vector<std::vector<std::uint8_t>>{
                                                    {0, 1, 2, 3}});
    fam.iota = Itinerary::constant(0, 1);
    fam.prefix_len = opt.prefix_len;
    CaseScheduleParams params;
    params.length = opt.schedule_len;
    const auto base = construct_case_point(case_id, params);
    const std::size_t total = checked_pow(std::size_t(4), opt.prefix_len, kWordEnumerationBudget);
    for (std::size_t idx : detail::family_indices(total, opt.count, opt.seed)) {
        auto beta = detail::nth_block(idx, opt.prefix_len, 4);
        std::vector<std::uint8_t> a(base.symbols);
        std::copy(beta.begin(), beta.end(), a.begin());
        fam.points.push_back(SymPoint::make(std::move(a), {0}, 4));
    }
    return fam;
}

inline GapFamily gap_set_sampler(const std::string& pair_lower, const std::string& pair_upper,
                                 const std::string& y_filter, const GapFamilyOptions& opt) {
    if (pair_lower == "QW" && pair_upper == "BR" && y_filter.empty())
        return gap_family_qw_br(opt);
    if (pair_lower == "none" && pair_upper == "QR+BR1" && y_filter.empty())
        return gap_family_qr_br1(opt);
    if (y_filter == "irregular-transitive") return gap_family_irregular_transitive(opt);
    throw std::invalid_argument("no constructor for the requested gap pair (" + pair_lower +
                                ", " + pair_upper + ", filter '" + y_filter + "')");
}

// Oscillating-block shift point 0^1 1^2 0^4 1^8 ... used by the Birkhoff
// (ir)regularity checks: prefix averages of the first symbol swing between
// 1/3 and 2/3 at dyadic checkpoints.
inline Point oscillating_block_point(std::size_t length) {
    std::vector<std::uint8_t> a;
    a.reserve(length);
    std::uint8_t s = 0;
    std::size_t run = 1;
    while (a.size() < length) {
        for (std::size_t i = 0; i < run && a.size() < length; ++i) a.push_back(s);
        s = std::uint8_t(1 - s);
        run *= 2;
    }
    return SymPoint::make(std::move(a), {0, 1}, 2);
}

}  // namespace sglab
