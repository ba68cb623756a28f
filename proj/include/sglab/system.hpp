#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sglab/word.hpp"

// Concrete state spaces and finite families of self-maps acting on them.
//
// Composition convention: for w = i0 i1 ... i{k-1} the composed map is
// f_w = f_{i0} o f_{i1} o ... o f_{i{k-1}}, i.e. the rightmost symbol acts
// first.  Orbits driven by an itinerary i0 i1 i2 ... therefore read
//   x, f_{i0} x, f_{i1}(f_{i0} x), ...
// and the word metric maxes the plain metric over those orbit prefixes.

namespace sglab {

inline double wrap01(double x) {
    double y = x - std::floor(x);
    // Tolerance band at the cell boundary: values within 1e-12 of 1 wrap to 0
    // so that integer maps on commensurate grids stay grid-exact.
    if (y >= 1.0 - 1e-12) y = 0.0;
    return y;
}

inline double arc_distance(double a, double b) {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return d <= 0.5 ? d : 1.0 - d;
}

// Grid cell of a point of [0,1), with the same boundary tolerance band.
inline std::int64_t cell_of_unit(double x, std::int64_t cells) {
    double t = wrap01(x) * double(cells);
    auto i = std::int64_t(std::floor(t));
    if (t - double(i) >= 1.0 - 1e-9) ++i;  // snap values a hair below a boundary
    if (i >= cells) i -= cells;
    if (i < 0) i = 0;
    return i;
}

// ---------------------------------------------------------------------------
// Points

// One-sided symbol sequence with shared storage; shifting is O(1) and symbol
// relabelings compose without touching the underlying buffers.
struct SymPoint {
    std::shared_ptr<const std::vector<std::uint8_t>> head;
    std::size_t head_pos = 0;
    std::shared_ptr<const std::vector<std::uint8_t>> period;
    std::size_t phase = 0;
    std::vector<std::uint8_t> relabel;  // empty means identity
    int k = 2;

    static SymPoint make(std::vector<std::uint8_t> head_syms,
                         std::vector<std::uint8_t> period_syms, int k) {
        if (period_syms.empty()) period_syms.push_back(0);
        for (auto c : head_syms)
            if (c >= k) throw std::invalid_argument("symbol out of range");
        for (auto c : period_syms)
            if (c >= k) throw std::invalid_argument("symbol out of range");
        SymPoint p;
        p.head = std::make_shared<const std::vector<std::uint8_t>>(std::move(head_syms));
        p.period = std::make_shared<const std::vector<std::uint8_t>>(std::move(period_syms));
        p.k = k;
        return p;
    }

    std::uint8_t symbol(std::size_t t) const {
        const std::size_t idx = head_pos + t;
        std::uint8_t s;
        if (head && idx < head->size()) {
            s = (*head)[idx];
        } else {
            const std::size_t over = idx - (head ? head->size() : 0);
            s = (*period)[(phase + over) % period->size()];
        }
        return relabel.empty() ? s : relabel[s];
    }

    SymPoint shifted() const {
        SymPoint p = *this;
        if (head && head_pos < head->size()) {
            ++p.head_pos;
        } else {
            p.phase = (p.phase + 1) % p.period->size();
        }
        return p;
    }

    SymPoint relabeled(const std::vector<std::uint8_t>& pi) const {
        SymPoint p = *this;
        if (p.relabel.empty()) {
            p.relabel = pi;
        } else {
            for (auto& c : p.relabel) c = pi[c];
        }
        return p;
    }

    // Visible symbols flattened to (head, period) form.
    std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> flatten() const {
        std::vector<std::uint8_t> h, per;
        const std::size_t hl = head ? head->size() : 0;
        for (std::size_t i = head_pos; i < hl; ++i)
            h.push_back(relabel.empty() ? (*head)[i] : relabel[(*head)[i]]);
        for (std::size_t i = 0; i < period->size(); ++i) {
            auto s = (*period)[(phase + i) % period->size()];
            per.push_back(relabel.empty() ? s : relabel[s]);
        }
        return {std::move(h), std::move(per)};
    }
};

using Point = std::variant<double, std::vector<double>, SymPoint, int>;

// ---------------------------------------------------------------------------
// System descriptions

using IntMatrix = std::vector<std::vector<std::int64_t>>;

struct CircleData {
    std::vector<int> degrees;
};
struct TorusData {
    std::vector<IntMatrix> matrices;
    int dim = 2;
    bool all_diagonal = false;
};
struct ShiftData {
    int k = 2;
    std::vector<std::vector<std::uint8_t>> perms;  // visible relabel applied after the shift
};
struct FiniteData {
    int states = 2;
    std::vector<std::vector<int>> maps;
};

class GeneratorSystem {
  public:
    enum class Kind { Circle, Torus, Shift, Finite };

    static GeneratorSystem circle(std::vector<int> degrees) {
        if (degrees.empty()) throw std::invalid_argument("need at least one generator");
        for (int d : degrees)
            if (d < 1) throw std::invalid_argument("circle degrees must be >= 1");
        GeneratorSystem s;
        s.data_ = CircleData{std::move(degrees)};
        return s;
    }

    static GeneratorSystem torus(std::vector<IntMatrix> mats) {
        if (mats.empty()) throw std::invalid_argument("need at least one generator");
        const int q = int(mats[0].size());
        bool diag = true;
        for (const auto& A : mats) {
            if (int(A.size()) != q) throw std::invalid_argument("matrix dimension mismatch");
            for (int i = 0; i < q; ++i) {
                if (int(A[i].size()) != q) throw std::invalid_argument("matrix is not square");
                for (int j = 0; j < q; ++j)
                    if (i != j && A[i][j] != 0) diag = false;
            }
        }
        GeneratorSystem s;
        s.data_ = TorusData{std::move(mats), q, diag};
        return s;
    }

    static GeneratorSystem torus_diag(std::vector<std::vector<std::int64_t>> diags) {
        std::vector<IntMatrix> mats;
        for (const auto& d : diags) {
            IntMatrix A(d.size(), std::vector<std::int64_t>(d.size(), 0));
            for (std::size_t i = 0; i < d.size(); ++i) A[i][i] = d[i];
            mats.push_back(std::move(A));
        }
        return torus(std::move(mats));
    }

    // m generators, each "relabel after shift"; perms[0] should be identity to
    // include the plain shift.  perms.size() determines m.
    static GeneratorSystem full_shift(int k, std::vector<std::vector<std::uint8_t>> perms) {
        if (k < 2) throw std::invalid_argument("shift alphabet needs k >= 2");
        if (perms.empty()) throw std::invalid_argument("need at least one generator");
        for (auto& p : perms) {
            if (int(p.size()) != k) throw std::invalid_argument("permutation size mismatch");
            std::vector<bool> seen(k, false);
            for (auto c : p) {
                if (c >= k || seen[c]) throw std::invalid_argument("not a permutation");
                seen[c] = true;
            }
        }
        GeneratorSystem s;
        s.data_ = ShiftData{k, std::move(perms)};
        return s;
    }

    // Convenience: m=1 gives {shift}; m=2 adds the cyclic relabel.
    static GeneratorSystem full_shift(int k, int m = 1) {
        std::vector<std::vector<std::uint8_t>> perms;
        for (int j = 0; j < m; ++j) {
            std::vector<std::uint8_t> p(k);
            for (int c = 0; c < k; ++c) p[c] = std::uint8_t((c + j) % k);
            perms.push_back(std::move(p));
        }
        return full_shift(k, std::move(perms));
    }

    static GeneratorSystem finite(int states, std::vector<std::vector<int>> maps) {
        if (states < 1) throw std::invalid_argument("finite space needs >= 1 state");
        if (maps.empty()) throw std::invalid_argument("need at least one generator");
        for (auto& f : maps) {
            if (int(f.size()) != states) throw std::invalid_argument("map table size mismatch");
            for (int v : f)
                if (v < 0 || v >= states) throw std::invalid_argument("map image out of range");
        }
        GeneratorSystem s;
        s.data_ = FiniteData{states, std::move(maps)};
        return s;
    }

    Kind kind() const { return Kind(data_.index()); }
    const CircleData& circle_data() const { return std::get<CircleData>(data_); }
    const TorusData& torus_data() const { return std::get<TorusData>(data_); }
    const ShiftData& shift_data() const { return std::get<ShiftData>(data_); }
    const FiniteData& finite_data() const { return std::get<FiniteData>(data_); }

    int generator_count() const {
        switch (kind()) {
            case Kind::Circle: return int(circle_data().degrees.size());
            case Kind::Torus: return int(torus_data().matrices.size());
            case Kind::Shift: return int(shift_data().perms.size());
            case Kind::Finite: return int(finite_data().maps.size());
        }
        return 0;
    }

    double diameter() const {
        switch (kind()) {
            case Kind::Circle:
            case Kind::Torus: return 0.5;
            case Kind::Shift: return 1.0;
            case Kind::Finite: return finite_data().states > 1 ? 1.0 : 0.0;
        }
        return 0.0;
    }

    // Smallest per-step metric expansion across generators, when every
    // generator is uniformly expanding; nullopt otherwise.
    std::optional<double> min_expansion() const {
        switch (kind()) {
            case Kind::Circle: {
                int dmin = circle_data().degrees[0];
                for (int d : circle_data().degrees) dmin = std::min(dmin, d);
                if (dmin < 2) return std::nullopt;
                return double(dmin);
            }
            case Kind::Torus: {
                if (!torus_data().all_diagonal) return std::nullopt;
                std::int64_t dmin = INT64_MAX;
                for (const auto& A : torus_data().matrices)
                    for (std::size_t i = 0; i < A.size(); ++i)
                        dmin = std::min<std::int64_t>(dmin, std::llabs(A[i][i]));
                if (dmin < 2) return std::nullopt;
                return double(dmin);
            }
            case Kind::Shift: return 2.0;  // the shift doubles symbolic distances
            case Kind::Finite: return std::nullopt;
        }
        return std::nullopt;
    }

    std::size_t symbol_horizon() const { return symbol_horizon_; }
    void set_symbol_horizon(std::size_t h) { symbol_horizon_ = h; }

    double metric(const Point& a, const Point& b) const {
        switch (kind()) {
            case Kind::Circle:
                return arc_distance(std::get<double>(a), std::get<double>(b));
            case Kind::Torus: {
                const auto& u = std::get<std::vector<double>>(a);
                const auto& v = std::get<std::vector<double>>(b);
                double m = 0;
                for (std::size_t i = 0; i < u.size(); ++i)
                    m = std::max(m, arc_distance(u[i], v[i]));
                return m;
            }
            case Kind::Shift: {
                const auto& u = std::get<SymPoint>(a);
                const auto& v = std::get<SymPoint>(b);
                for (std::size_t j = 0; j < symbol_horizon_; ++j)
                    if (u.symbol(j) != v.symbol(j)) return std::ldexp(1.0, -int(j));
                return 0.0;
            }
            case Kind::Finite:
                return std::get<int>(a) == std::get<int>(b) ? 0.0 : 1.0;
        }
        return 0.0;
    }

    Point apply_generator(int j, const Point& x) const {
        if (j < 0 || j >= generator_count())
            throw std::invalid_argument("generator index out of range");
        switch (kind()) {
            case Kind::Circle:
                return wrap01(double(circle_data().degrees[j]) * std::get<double>(x));
            case Kind::Torus: {
                const auto& A = torus_data().matrices[j];
                const auto& v = std::get<std::vector<double>>(x);
                std::vector<double> y(v.size(), 0.0);
                for (std::size_t i = 0; i < v.size(); ++i) {
                    double acc = 0;
                    for (std::size_t c = 0; c < v.size(); ++c) acc += double(A[i][c]) * v[c];
                    y[i] = wrap01(acc);
                }
                return y;
            }
            case Kind::Shift: {
                SymPoint p = std::get<SymPoint>(x).shifted();
                const auto& pi = shift_data().perms[j];
                bool identity = true;
                for (std::size_t c = 0; c < pi.size(); ++c)
                    if (pi[c] != c) { identity = false; break; }
                return identity ? p : p.relabeled(pi);
            }
            case Kind::Finite:
                return finite_data().maps[j][std::get<int>(x)];
        }
        return x;
    }

    // f_w with the rightmost symbol acting first.
    Point apply_word(const Word& w, const Point& x) const {
        if (w.alphabet != generator_count())
            throw std::invalid_argument("word alphabet does not match generator count");
        Point y = x;
        for (std::size_t i = w.size(); i-- > 0;) y = apply_generator(w[i], y);
        return y;
    }

    // Orbit prefix points x, f_{i0}x, ..., f_{i{n-1}...i0}x (n+1 entries).
    std::vector<Point> orbit_along(const Word& w, const Point& x) const {
        if (w.alphabet != generator_count())
            throw std::invalid_argument("word alphabet does not match generator count");
        std::vector<Point> orb;
        orb.reserve(w.size() + 1);
        orb.push_back(x);
        for (std::size_t t = 0; t < w.size(); ++t)
            orb.push_back(apply_generator(w[t], orb.back()));
        return orb;
    }

    // First n orbit points x, f_{i0}x, f_{i1 i0}x, ... (n-1 steps).
    std::vector<Point> orbit_along(const Itinerary& it, const Point& x, std::size_t n) const {
        if (it.alphabet() != generator_count())
            throw std::invalid_argument("itinerary alphabet does not match generator count");
        std::vector<Point> orb;
        if (n == 0) return orb;
        orb.reserve(n);
        orb.push_back(x);
        for (std::size_t t = 0; t + 1 < n; ++t)
            orb.push_back(apply_generator(it.symbol(t), orb.back()));
        return orb;
    }

    // d_w(x,y): the max of the plain metric over the orbit prefixes of w.
    double word_metric(const Word& w, const Point& x, const Point& y) const {
        Point a = x, b = y;
        double best = metric(a, b);
        for (std::size_t t = 0; t < w.size(); ++t) {
            a = apply_generator(w[t], a);
            b = apply_generator(w[t], b);
            best = std::max(best, metric(a, b));
        }
        return best;
    }

    // ----- grids / candidate pools --------------------------------------

    // Number of state cells at a given resolution.  For shift spaces the
    // resolution is a cylinder depth; elsewhere a per-axis cell count.
    std::size_t cell_count(std::int64_t resolution) const {
        switch (kind()) {
            case Kind::Circle: return std::size_t(resolution);
            case Kind::Torus: {
                std::size_t n = 1;
                for (int i = 0; i < torus_data().dim; ++i) n *= std::size_t(resolution);
                return n;
            }
            case Kind::Shift: {
                const std::size_t n =
                    checked_pow(std::size_t(shift_data().k), std::size_t(resolution),
                                kWordEnumerationBudget);
                if (n > kWordEnumerationBudget)
                    throw std::length_error("cylinder depth exceeds enumeration budget");
                return n;
            }
            case Kind::Finite: return std::size_t(finite_data().states);
        }
        return 0;
    }

    std::int64_t cell_of(const Point& x, std::int64_t resolution) const {
        switch (kind()) {
            case Kind::Circle: return cell_of_unit(std::get<double>(x), resolution);
            case Kind::Torus: {
                const auto& v = std::get<std::vector<double>>(x);
                std::int64_t idx = 0;
                for (double c : v) idx = idx * resolution + cell_of_unit(c, resolution);
                return idx;
            }
            case Kind::Shift: {
                const auto& p = std::get<SymPoint>(x);
                std::int64_t idx = 0;
                for (std::int64_t t = 0; t < resolution; ++t)
                    idx = idx * shift_data().k + p.symbol(std::size_t(t));
                return idx;
            }
            case Kind::Finite: return std::get<int>(x);
        }
        return 0;
    }

    // A representative interior point of a cell (used to evaluate observables).
    Point cell_representative(std::int64_t cell, std::int64_t resolution) const {
        switch (kind()) {
            case Kind::Circle: return (double(cell) + 0.5) / double(resolution);
            case Kind::Torus: {
                const int q = torus_data().dim;
                std::vector<double> v(q);
                std::int64_t rest = cell;
                for (int i = q - 1; i >= 0; --i) {
                    v[i] = (double(rest % resolution) + 0.5) / double(resolution);
                    rest /= resolution;
                }
                return v;
            }
            case Kind::Shift: {
                const int k = shift_data().k;
                std::vector<std::uint8_t> syms(std::size_t(resolution), 0);
                std::int64_t rest = cell;
                for (std::int64_t i = resolution - 1; i >= 0; --i) {
                    syms[std::size_t(i)] = std::uint8_t(rest % k);
                    rest /= k;
                }
                return SymPoint::make(std::move(syms), {0}, k);
            }
            case Kind::Finite: return int(cell);
        }
        return Point{};
    }

    // Deterministic candidate pool: grid points (left cell edges) for metric
    // spaces, all depth-`resolution` cylinder representatives for shifts.
    std::vector<Point> grid_pool(std::int64_t resolution) const {
        std::vector<Point> pool;
        switch (kind()) {
            case Kind::Circle:
                pool.reserve(std::size_t(resolution));
                for (std::int64_t a = 0; a < resolution; ++a)
                    pool.push_back(double(a) / double(resolution));
                break;
            case Kind::Torus: {
                const int q = torus_data().dim;
                const std::size_t total = cell_count(resolution);
                pool.reserve(total);
                for (std::size_t idx = 0; idx < total; ++idx) {
                    std::vector<double> v(q);
                    std::size_t rest = idx;
                    for (int i = q - 1; i >= 0; --i) {
                        v[i] = double(rest % std::size_t(resolution)) / double(resolution);
                        rest /= std::size_t(resolution);
                    }
                    pool.push_back(std::move(v));
                }
                break;
            }
            case Kind::Shift: {
                const int k = shift_data().k;
                const std::size_t total = cell_count(resolution);
                pool.reserve(total);
                for (std::size_t idx = 0; idx < total; ++idx) {
                    std::vector<std::uint8_t> syms(std::size_t(resolution), 0);
                    std::size_t rest = idx;
                    for (std::int64_t i = resolution - 1; i >= 0; --i) {
                        syms[std::size_t(i)] = std::uint8_t(rest % std::size_t(k));
                        rest /= std::size_t(k);
                    }
                    pool.push_back(SymPoint::make(std::move(syms), {0}, k));
                }
                break;
            }
            case Kind::Finite:
                for (int s = 0; s < finite_data().states; ++s) pool.push_back(s);
                break;
        }
        return pool;
    }

    Point random_point(Rng& rng, std::size_t sym_depth = 24) const {
        switch (kind()) {
            case Kind::Circle: return rng.real01();
            case Kind::Torus: {
                std::vector<double> v(std::size_t(torus_data().dim));
                for (auto& c : v) c = rng.real01();
                return v;
            }
            case Kind::Shift: {
                const int k = shift_data().k;
                std::vector<std::uint8_t> head(sym_depth), per(8);
                for (auto& c : head) c = std::uint8_t(rng.below(std::uint64_t(k)));
                for (auto& c : per) c = std::uint8_t(rng.below(std::uint64_t(k)));
                return SymPoint::make(std::move(head), std::move(per), k);
            }
            case Kind::Finite: return int(rng.below(std::uint64_t(finite_data().states)));
        }
        return Point{};
    }

    // ----- exact preimage arithmetic ------------------------------------
    //
    // Cells carry piecewise-uniform mass.  preimage_cells(j, c, res) lists
    // (source cell, weight) pairs such that mu(f_j^{-1} cell_c) equals the
    // weighted sum of source-cell masses for every piecewise-uniform mu.

    std::vector<std::pair<std::int64_t, double>> preimage_cells(
        int j, std::int64_t cell, std::int64_t resolution) const {
        std::vector<std::pair<std::int64_t, double>> out;
        switch (kind()) {
            case Kind::Circle: {
                const int d = circle_data().degrees[j];
                if (resolution % d != 0)
                    throw std::invalid_argument(
                        "grid size must be divisible by every generator degree (degree " +
                        std::to_string(d) + " with grid " + std::to_string(resolution) + ")");
                for (int i = 0; i < d; ++i)
                    out.emplace_back((cell + std::int64_t(i) * resolution) / d, 1.0 / double(d));
                break;
            }
            case Kind::Torus: {
                if (!torus_data().all_diagonal)
                    throw std::invalid_argument(
                        "exact preimage arithmetic requires diagonal torus generators");
                const auto& A = torus_data().matrices[j];
                const int q = torus_data().dim;
                std::vector<std::int64_t> digits(q);
                std::int64_t rest = cell;
                for (int i = q - 1; i >= 0; --i) {
                    digits[i] = rest % resolution;
                    rest /= resolution;
                }
                std::vector<std::vector<std::int64_t>> axis(q);
                double weight = 1.0;
                for (int i = 0; i < q; ++i) {
                    const std::int64_t d = std::llabs(A[i][i]);
                    if (resolution % d != 0)
                        throw std::invalid_argument(
                            "grid size must be divisible by every diagonal entry (entry " +
                            std::to_string(d) + " with grid " + std::to_string(resolution) + ")");
                    for (std::int64_t r = 0; r < d; ++r) {
                        // Fine-grid index of the r-th preimage interval; a
                        // negative entry mirrors the branch layout.
                        std::int64_t fine = digits[i] + r * resolution;
                        if (A[i][i] < 0) fine = d * resolution - 1 - fine;
                        axis[i].push_back(fine / d);
                    }
                    weight /= double(d);
                }
                std::vector<std::size_t> pick(q, 0);
                while (true) {
                    std::int64_t idx = 0;
                    for (int i = 0; i < q; ++i) idx = idx * resolution + axis[i][pick[i]];
                    out.emplace_back(idx, weight);
                    int i = q - 1;
                    while (i >= 0 && ++pick[i] == axis[i].size()) pick[i--] = 0;
                    if (i < 0) break;
                }
                break;
            }
            case Kind::Shift: {
                // f = relabel o shift.  The preimage of a depth-T cylinder is
                // the union over leading symbols s of [s, pi^{-1}(c_0..c_{T-2})],
                // each carrying 1/k of the parent mass under the uniform-split
                // convention.
                const int k = shift_data().k;
                const std::int64_t T = resolution;
                const auto& pi = shift_data().perms[j];
                std::vector<std::uint8_t> inv(std::size_t(k), 0);
                for (int c = 0; c < k; ++c) inv[pi[c]] = std::uint8_t(c);
                std::vector<std::uint8_t> digits(std::size_t(T), 0);
                std::int64_t rest = cell;
                for (std::int64_t i = T - 1; i >= 0; --i) {
                    digits[std::size_t(i)] = std::uint8_t(rest % k);
                    rest /= k;
                }
                std::int64_t body = 0;  // inv(c_0) ... inv(c_{T-2})
                for (std::int64_t i = 0; i + 1 < T; ++i)
                    body = body * k + inv[digits[std::size_t(i)]];
                std::int64_t stride = 1;
                for (std::int64_t i = 0; i + 1 < T; ++i) stride *= k;
                for (int s = 0; s < k; ++s)
                    out.emplace_back(std::int64_t(s) * stride + body, 1.0 / double(k));
                break;
            }
            case Kind::Finite: {
                const auto& f = finite_data().maps[j];
                for (int b = 0; b < finite_data().states; ++b)
                    if (f[b] == int(cell)) out.emplace_back(b, 1.0);
                break;
            }
        }
        return out;
    }

    // Inverse branch of generator j sending y to its preimage nearest to
    // `toward`.  Requires an expanding system with branch structure.
    Point pullback_step(int j, const Point& y, const Point& toward) const {
        switch (kind()) {
            case Kind::Circle: {
                const int d = circle_data().degrees[j];
                if (d < 2) throw std::invalid_argument("pullback needs expanding generators");
                const double yy = std::get<double>(y);
                const double tau = std::get<double>(toward);
                double best = 0, bestd = 2;
                for (int i = 0; i < d; ++i) {
                    const double cand = wrap01((yy + double(i)) / double(d));
                    const double dist = arc_distance(cand, tau);
                    if (dist < bestd) { bestd = dist; best = cand; }
                }
                return best;
            }
            case Kind::Torus: {
                if (!torus_data().all_diagonal)
                    throw std::invalid_argument("pullback requires diagonal torus generators");
                const auto& A = torus_data().matrices[j];
                const auto& yy = std::get<std::vector<double>>(y);
                const auto& tau = std::get<std::vector<double>>(toward);
                std::vector<double> out(yy.size());
                for (std::size_t i = 0; i < yy.size(); ++i) {
                    const auto d = A[i][i];
                    if (std::llabs(d) < 2)
                        throw std::invalid_argument("pullback needs expanding generators");
                    double best = 0, bestd = 2;
                    for (std::int64_t r = 0; r < std::llabs(d); ++r) {
                        const double cand = wrap01((yy[i] + double(r)) / double(d));
                        const double dist = arc_distance(cand, tau[i]);
                        if (dist < bestd) { bestd = dist; best = cand; }
                    }
                    out[i] = best;
                }
                return out;
            }
            default:
                throw std::invalid_argument("pullback unsupported for this system kind");
        }
    }

    // ----- descriptors ---------------------------------------------------

    std::string describe() const {
        std::ostringstream os;
        switch (kind()) {
            case Kind::Circle: {
                os << "circle:degrees=";
                const auto& ds = circle_data().degrees;
                for (std::size_t i = 0; i < ds.size(); ++i) os << (i ? "," : "") << ds[i];
                break;
            }
            case Kind::Torus: {
                os << "torus:mats=";
                const auto& ms = torus_data().matrices;
                for (std::size_t g = 0; g < ms.size(); ++g) {
                    if (g) os << ";";
                    bool first = true;
                    for (const auto& row : ms[g])
                        for (auto v : row) {
                            if (!first) os << ",";
                            os << v;
                            first = false;
                        }
                }
                break;
            }
            case Kind::Shift: {
                os << "shift:k=" << shift_data().k << ",perms=";
                const auto& ps = shift_data().perms;
                for (std::size_t g = 0; g < ps.size(); ++g) {
                    if (g) os << ";";
                    for (auto c : ps[g]) os << int(c);
                }
                break;
            }
            case Kind::Finite: {
                os << "finite:n=" << finite_data().states << ",maps=";
                const auto& ms = finite_data().maps;
                for (std::size_t g = 0; g < ms.size(); ++g) {
                    if (g) os << ";";
                    for (auto v : ms[g]) os << v;
                }
                break;
            }
        }
        return os.str();
    }

    std::string point_to_string(const Point& x) const {
        std::ostringstream os;
        switch (kind()) {
            case Kind::Circle: {
                char buf[40];
                std::snprintf(buf, sizeof buf, "%.17g", std::get<double>(x));
                os << buf;
                break;
            }
            case Kind::Torus: {
                const auto& v = std::get<std::vector<double>>(x);
                for (std::size_t i = 0; i < v.size(); ++i) {
                    char buf[40];
                    std::snprintf(buf, sizeof buf, "%.17g", v[i]);
                    os << (i ? "," : "") << buf;
                }
                break;
            }
            case Kind::Shift: {
                auto [h, p] = std::get<SymPoint>(x).flatten();
                for (auto c : h) os << int(c);
                os << "|";
                for (auto c : p) os << int(c);
                break;
            }
            case Kind::Finite: os << std::get<int>(x); break;
        }
        return os.str();
    }

    Point point_from_string(const std::string& text) const {
        switch (kind()) {
            case Kind::Circle: return std::stod(text);
            case Kind::Torus: {
                std::vector<double> v;
                std::size_t pos = 0;
                while (pos <= text.size()) {
                    std::size_t comma = text.find(',', pos);
                    if (comma == std::string::npos) comma = text.size();
                    v.push_back(std::stod(text.substr(pos, comma - pos)));
                    pos = comma + 1;
                }
                if (int(v.size()) != torus_data().dim)
                    throw std::invalid_argument("torus point dimension mismatch");
                return v;
            }
            case Kind::Shift: {
                const std::size_t bar = text.find('|');
                if (bar == std::string::npos)
                    throw std::invalid_argument("shift point must be 'head|period'");
                std::vector<std::uint8_t> h, p;
                for (std::size_t i = 0; i < bar; ++i) h.push_back(std::uint8_t(text[i] - '0'));
                for (std::size_t i = bar + 1; i < text.size(); ++i)
                    p.push_back(std::uint8_t(text[i] - '0'));
                return SymPoint::make(std::move(h), std::move(p), shift_data().k);
            }
            case Kind::Finite: return std::stoi(text);
        }
        return Point{};
    }

    // Default is an empty circle family (no generators); use the factories.
    GeneratorSystem() = default;

  private:
    std::variant<CircleData, TorusData, ShiftData, FiniteData> data_;
    std::size_t symbol_horizon_ = 64;
};

// ---------------------------------------------------------------------------
// Expansiveness probing: for each pair and each driving itinerary, the first
// orbit index at which the pair separates by at least delta (or -1 within the
// horizon).  A semidecision at the probed scales, nothing more.

struct ExpansivenessEntry {
    std::size_t pair_index = 0;
    std::string itinerary;
    std::ptrdiff_t first_separation = -1;
    double achieved = 0;
    bool degenerate = false;  // the two points coincide, so no witness can exist
};

struct ExpansivenessReport {
    double delta = 0;
    std::size_t horizon = 0;
    std::vector<ExpansivenessEntry> entries;
    bool all_separated = true;
};

inline ExpansivenessReport expansiveness_witness(
    const GeneratorSystem& sys, const std::vector<std::pair<Point, Point>>& pairs,
    double delta, std::size_t horizon, const std::vector<Itinerary>& its) {
    ExpansivenessReport rep;
    rep.delta = delta;
    rep.horizon = horizon;
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        for (const auto& it : its) {
            ExpansivenessEntry e;
            e.pair_index = pi;
            e.itinerary = it.serialize();
            Point a = pairs[pi].first, b = pairs[pi].second;
            e.degenerate = sys.metric(a, b) == 0.0;
            for (std::size_t n = 0; n <= horizon; ++n) {
                const double d = sys.metric(a, b);
                if (d >= delta) {
                    e.first_separation = std::ptrdiff_t(n);
                    e.achieved = d;
                    break;
                }
                if (n == horizon) break;
                a = sys.apply_generator(it.symbol(n), a);
                b = sys.apply_generator(it.symbol(n), b);
            }
            if (e.first_separation < 0 && !e.degenerate) rep.all_separated = false;
            rep.entries.push_back(std::move(e));
        }
    }
    return rep;
}

}  // namespace sglab
