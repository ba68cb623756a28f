#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "sglab/exact_orbit.hpp"
#include "sglab/rng.hpp"
#include "sglab/system.hpp"
#include "sglab/word.hpp"

// Measures on finite discretizations.
//
// A DiscreteMeasure is a mass vector over (itinerary cylinder, state cell)
// pairs: cylinders of a fixed depth T over the generator alphabet, state cells
// of a fixed grid resolution.  T = 0 gives a plain state-space measure.  Mass
// is treated as uniformly spread within a cell, which makes the Markov
// adjoint exact on commensurate grids via GeneratorSystem::preimage_cells.
// Comparisons use total variation on the shared grid and a weak-star
// surrogate driven by a family of test observables (cylinder indicators times
// trigonometric state modes by default).

namespace sglab {

struct DiscreteMeasure {
    int alphabet = 1;          // itinerary alphabet (1 when state-only)
    int cyl_depth = 0;         // itinerary cylinder depth T (0 when state-only)
    std::int64_t resolution = 0;
    std::vector<double> mass;  // cylinder-major: index = cyl * cell_count + cell

    std::size_t cyl_count() const {
        std::size_t n = 1;
        for (int i = 0; i < cyl_depth; ++i) n *= std::size_t(alphabet);
        return n;
    }
    std::size_t cell_count() const { return mass.empty() ? 0 : mass.size() / cyl_count(); }

    double total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }

    void normalize() {
        const double t = total();
        if (t <= 0) throw std::invalid_argument("cannot normalize a zero measure");
        for (double& v : mass) v /= t;
    }

    DiscreteMeasure state_marginal() const {
        DiscreteMeasure out;
        out.resolution = resolution;
        const std::size_t cells = cell_count();
        out.mass.assign(cells, 0.0);
        for (std::size_t i = 0; i < mass.size(); ++i) out.mass[i % cells] += mass[i];
        return out;
    }
};

inline bool same_grid(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    return a.alphabet == b.alphabet && a.cyl_depth == b.cyl_depth &&
           a.resolution == b.resolution && a.mass.size() == b.mass.size();
}

inline DiscreteMeasure uniform_measure(const GeneratorSystem& sys, std::int64_t resolution) {
    DiscreteMeasure mu;
    mu.resolution = resolution;
    const std::size_t n = sys.cell_count(resolution);
    mu.mass.assign(n, 1.0 / double(n));
    return mu;
}

inline DiscreteMeasure dirac_measure(const GeneratorSystem& sys, const Point& x,
                                     std::int64_t resolution) {
    DiscreteMeasure mu;
    mu.resolution = resolution;
    mu.mass.assign(sys.cell_count(resolution), 0.0);
    mu.mass[std::size_t(sys.cell_of(x, resolution))] = 1.0;
    return mu;
}

inline DiscreteMeasure empirical_state_measure(const GeneratorSystem& sys,
                                               const std::vector<Point>& points,
                                               std::int64_t resolution) {
    if (points.empty()) throw std::invalid_argument("empirical measure needs at least one point");
    DiscreteMeasure mu;
    mu.resolution = resolution;
    mu.mass.assign(sys.cell_count(resolution), 0.0);
    const double w = 1.0 / double(points.size());
    for (const auto& x : points) mu.mass[std::size_t(sys.cell_of(x, resolution))] += w;
    return mu;
}

// Empirical measure of the driven orbit on (cylinder, cell) pairs: mass 1/n on
// (depth-T window of the itinerary at time j, cell of the orbit point at j).
inline DiscreteMeasure empirical_measure(const GeneratorSystem& sys, const Itinerary& iota,
                                         const Point& x, std::size_t n, int cyl_depth,
                                         std::int64_t resolution) {
    if (n == 0) throw std::invalid_argument("empirical measure needs n >= 1");
    DiscreteMeasure mu;
    mu.alphabet = sys.generator_count();
    mu.cyl_depth = cyl_depth;
    mu.resolution = resolution;
    const std::size_t cells = sys.cell_count(resolution);
    mu.mass.assign(mu.cyl_count() * cells, 0.0);
    Point y = x;
    const double w = 1.0 / double(n);
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t cyl = 0;
        for (int i = 0; i < cyl_depth; ++i)
            cyl = cyl * std::size_t(mu.alphabet) + std::size_t(iota.symbol(t + std::size_t(i)));
        mu.mass[cyl * cells + std::size_t(sys.cell_of(y, resolution))] += w;
        y = sys.apply_generator(iota.symbol(t), y);
    }
    return mu;
}

// Empirical measure started from a seeded random point.  Circle families walk
// the orbit in exact rational arithmetic: every double is a dyadic rational,
// so its true orbit under an integer-degree family absorbs at 0 within ~60
// doublings and carries no long-run statistics.  Other kinds draw a random
// point and take the direct walk (symbol and finite orbits are exact as is).
inline DiscreteMeasure empirical_measure_random(const GeneratorSystem& sys,
                                                const Itinerary& iota, std::uint64_t seed,
                                                std::size_t n, int cyl_depth,
                                                std::int64_t resolution) {
    if (n == 0) throw std::invalid_argument("empirical measure needs n >= 1");
    if (sys.kind() == GeneratorSystem::Kind::Circle) {
        const auto cells = exact_orbit_cells(sys, iota, n, resolution, seed);
        DiscreteMeasure mu;
        mu.alphabet = sys.generator_count();
        mu.cyl_depth = cyl_depth;
        mu.resolution = resolution;
        const std::size_t cc = sys.cell_count(resolution);
        mu.mass.assign(mu.cyl_count() * cc, 0.0);
        const double w = 1.0 / double(n);
        for (std::size_t t = 0; t < n; ++t) {
            std::size_t cyl = 0;
            for (int i = 0; i < cyl_depth; ++i)
                cyl = cyl * std::size_t(mu.alphabet) +
                      std::size_t(iota.symbol(t + std::size_t(i)));
            mu.mass[cyl * cc + std::size_t(cells[t])] += w;
        }
        return mu;
    }
    Rng rng(seed);
    return empirical_measure(sys, iota, sys.random_point(rng), n, cyl_depth, resolution);
}

inline double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (!same_grid(a, b))
        throw std::invalid_argument("total variation requires measures on the same grid");
    double s = 0;
    for (std::size_t i = 0; i < a.mass.size(); ++i) s += std::fabs(a.mass[i] - b.mass[i]);
    return 0.5 * s;
}

inline double mass_of_cells(const DiscreteMeasure& mu, const std::vector<std::int64_t>& cells) {
    double s = 0;
    for (auto c : cells) s += mu.mass[std::size_t(c)];
    return s;
}

// ----- weak-star surrogate ---------------------------------------------

// Test observable psi(iota, x) = [iota extends cyl_prefix] * state_part(x).
struct ProductObservable {
    std::vector<std::uint8_t> cyl_prefix;
    std::function<double(const Point&)> state_part;
};

struct TestFamily {
    std::vector<ProductObservable> functions;
};

inline double integrate(const GeneratorSystem& sys, const DiscreteMeasure& mu,
                        const ProductObservable& obs) {
    if (int(obs.cyl_prefix.size()) > mu.cyl_depth)
        throw std::invalid_argument("test observable cylinder prefix deeper than measure depth");
    const std::size_t cells = mu.cell_count();
    // Representatives are cached per cell; cylinder matching walks the most
    // significant digits of the cylinder index.
    std::vector<double> cell_value(cells);
    for (std::size_t c = 0; c < cells; ++c)
        cell_value[c] = obs.state_part
                            ? obs.state_part(sys.cell_representative(std::int64_t(c), mu.resolution))
                            : 1.0;
    std::size_t block = 1;  // number of cylinders sharing the prefix digits
    for (int i = 0; i < mu.cyl_depth - int(obs.cyl_prefix.size()); ++i)
        block *= std::size_t(mu.alphabet);
    std::size_t prefix_index = 0;
    for (auto s : obs.cyl_prefix) prefix_index = prefix_index * std::size_t(mu.alphabet) + s;
    double total = 0;
    for (std::size_t cyl = prefix_index * block; cyl < (prefix_index + 1) * block; ++cyl)
        for (std::size_t c = 0; c < cells; ++c)
            total += mu.mass[cyl * cells + c] * cell_value[c];
    return total;
}

inline double alpha_of(const GeneratorSystem& sys, const DiscreteMeasure& mu,
                       const std::function<double(const Point&)>& phi) {
    ProductObservable obs;
    obs.state_part = phi;
    return integrate(sys, mu, obs);
}

// Cylinder indicators interleaved with trigonometric state modes; |psi| <= 1.
inline TestFamily default_test_family(const GeneratorSystem& sys, int cyl_depth,
                                      std::size_t count = 8) {
    constexpr double kTwoPi = 6.28318530717958647692;
    TestFamily fam;
    const int m = sys.generator_count();
    std::vector<std::function<double(const Point&)>> modes;
    switch (sys.kind()) {
        case GeneratorSystem::Kind::Circle:
            for (std::size_t k = 0; modes.size() < count; ++k) {
                const double h = double(k / 2 + 1);
                if (k % 2 == 0)
                    modes.push_back([h](const Point& p) {
                        return std::cos(kTwoPi * h * std::get<double>(p));
                    });
                else
                    modes.push_back([h](const Point& p) {
                        return std::sin(kTwoPi * h * std::get<double>(p));
                    });
            }
            break;
        case GeneratorSystem::Kind::Torus:
            for (std::size_t k = 0; modes.size() < count; ++k) {
                const std::size_t axis = k % 2;
                const double h = double(k / 4 + 1);
                const bool use_cos = (k / 2) % 2 == 0;
                modes.push_back([axis, h, use_cos](const Point& p) {
                    const auto& v = std::get<std::vector<double>>(p);
                    const double arg = kTwoPi * h * v[axis % v.size()];
                    return use_cos ? std::cos(arg) : std::sin(arg);
                });
            }
            break;
        case GeneratorSystem::Kind::Shift: {
            const int k = sys.shift_data().k;
            for (std::size_t len = 1; modes.size() < count; ++len) {
                for (const auto& w : enumerate_words(k, len)) {
                    if (modes.size() == count) break;
                    auto syms = w.symbols;
                    modes.push_back([syms](const Point& p) {
                        const auto& sp = std::get<SymPoint>(p);
                        for (std::size_t t = 0; t < syms.size(); ++t)
                            if (sp.symbol(t) != syms[t]) return 0.0;
                        return 1.0;
                    });
                }
            }
            break;
        }
        case GeneratorSystem::Kind::Finite:
            for (std::size_t k = 0; modes.size() < count; ++k) {
                const int s = int(k % std::size_t(sys.finite_data().states));
                modes.push_back(
                    [s](const Point& p) { return std::get<int>(p) == s ? 1.0 : 0.0; });
            }
            break;
    }
    // Interleave state modes with itinerary cylinder indicators when the
    // measure carries cylinder structure.
    std::size_t mode_at = 0;
    std::vector<Word> cyl_words = cyl_depth > 0 ? enumerate_words(m, 1) : std::vector<Word>{};
    std::size_t cyl_at = 0;
    for (std::size_t kth = 0; kth < count; ++kth) {
        ProductObservable obs;
        if (cyl_depth > 0 && kth % 2 == 1 && cyl_at < cyl_words.size()) {
            obs.cyl_prefix = cyl_words[cyl_at++].symbols;
            obs.state_part = nullptr;  // constant 1
        } else {
            obs.state_part = modes[mode_at++ % modes.size()];
        }
        fam.functions.push_back(std::move(obs));
    }
    return fam;
}

// d*(mu, nu) = sum_k 2^-k |int psi_k dmu - int psi_k dnu|, k = 1, 2, ...
inline double weakstar_distance(const GeneratorSystem& sys, const DiscreteMeasure& a,
                                const DiscreteMeasure& b, const TestFamily& fam) {
    if (!same_grid(a, b))
        throw std::invalid_argument("weak-star distance requires measures on the same grid");
    if (fam.functions.empty())
        throw std::invalid_argument("weak-star distance needs at least one test function");
    double s = 0, w = 0.5;
    for (const auto& obs : fam.functions) {
        s += w * std::fabs(integrate(sys, a, obs) - integrate(sys, b, obs));
        w *= 0.5;
    }
    return s;
}

// ----- Markov adjoint and stationary measures ---------------------------

// (P* mu)(A) = sum_j p_j mu(f_j^{-1} A), evaluated cell by cell through the
// exact preimage tables.  State-only measures.
inline DiscreteMeasure adjoint_apply(const GeneratorSystem& sys, const DiscreteMeasure& mu,
                                     const std::vector<double>& probs) {
    if (mu.cyl_depth != 0)
        throw std::invalid_argument("adjoint acts on state-space measures only");
    if (int(probs.size()) != sys.generator_count())
        throw std::invalid_argument("need one probability per generator");
    double psum = 0;
    for (double p : probs) {
        if (p < 0) throw std::invalid_argument("generator probabilities must be nonnegative");
        psum += p;
    }
    if (std::fabs(psum - 1.0) > 1e-9)
        throw std::invalid_argument("generator probabilities must sum to 1");

    DiscreteMeasure out;
    out.resolution = mu.resolution;
    out.mass.assign(mu.mass.size(), 0.0);
    for (std::size_t c = 0; c < mu.mass.size(); ++c) {
        double acc = 0;
        for (int j = 0; j < sys.generator_count(); ++j) {
            if (probs[std::size_t(j)] == 0) continue;
            double pre = 0;
            for (const auto& [src, w] : sys.preimage_cells(j, std::int64_t(c), mu.resolution))
                pre += w * mu.mass[std::size_t(src)];
            acc += probs[std::size_t(j)] * pre;
        }
        out.mass[c] = acc;
    }
    return out;
}

struct StationaryOptions {
    std::int64_t resolution = 64;
    std::size_t max_iterations = 500;
    double tolerance = 1e-12;  // total variation between successive iterates
};

struct StationaryResult {
    DiscreteMeasure measure;
    bool converged = false;
    std::size_t iterations = 0;
    double final_step = 0;           // TV of the last iteration step
    double invariance_residual = 0;  // TV(P* mu, mu) at the returned measure
};

inline StationaryResult stationary_measure(const GeneratorSystem& sys,
                                           const std::vector<double>& probs,
                                           const StationaryOptions& opt) {
    StationaryResult res;
    DiscreteMeasure mu = uniform_measure(sys, opt.resolution);
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        DiscreteMeasure next = adjoint_apply(sys, mu, probs);
        res.final_step = tv_distance(next, mu);
        mu = std::move(next);
        res.iterations = it + 1;
        if (res.final_step <= opt.tolerance) {
            res.converged = true;
            break;
        }
    }
    res.invariance_residual = tv_distance(adjoint_apply(sys, mu, probs), mu);
    res.measure = std::move(mu);
    return res;
}

// ----- product invariance ------------------------------------------------

// For the driven product map F(iota, x) = (shift iota, f_{iota_0} x) and the
// candidate invariant measure Bernoulli(p) x mu, the preimage of a rectangle
// C x B decomposes as the union over leading symbols j of
// ([j] intersect shift^{-1} C) x f_j^{-1} B.  Reports the largest absolute
// defect |nu(F^{-1}(C x B)) - nu(C x B)| over itinerary cylinders C of depth
// <= max_depth and all grid cells B.
inline double product_invariance_residual(const GeneratorSystem& sys,
                                          const DiscreteMeasure& mu,
                                          const std::vector<double>& probs,
                                          int max_depth) {
    const int m = sys.generator_count();
    if (int(probs.size()) != m)
        throw std::invalid_argument("need one probability per generator");
    if (mu.cyl_depth != 0)
        throw std::invalid_argument("invariance residual expects a state-space measure");

    // Preimage mass per cell per generator, computed once.
    std::vector<std::vector<double>> pre(std::size_t(m),
                                         std::vector<double>(mu.mass.size(), 0.0));
    for (int j = 0; j < m; ++j)
        for (std::size_t c = 0; c < mu.mass.size(); ++c)
            for (const auto& [src, w] : sys.preimage_cells(j, std::int64_t(c), mu.resolution))
                pre[std::size_t(j)][c] += w * mu.mass[std::size_t(src)];

    double worst = 0;
    for (int depth = 0; depth <= max_depth; ++depth) {
        for (const auto& C : enumerate_words(m, std::size_t(depth))) {
            double bern = 1.0;
            for (auto s : C.symbols) bern *= probs[s];
            if (bern == 0) continue;
            for (std::size_t c = 0; c < mu.mass.size(); ++c) {
                double lhs = 0;  // nu(F^{-1}(C x B)) = sum_j p_j Bern(C) mu(f_j^{-1}B)
                for (int j = 0; j < m; ++j)
                    lhs += probs[std::size_t(j)] * bern * pre[std::size_t(j)][c];
                const double rhs = bern * mu.mass[c];
                worst = std::max(worst, std::fabs(lhs - rhs));
            }
        }
    }
    return worst;
}

// ----- empirical limits along orbits ------------------------------------

// Dyadic checkpoint schedule n = 2^j - 1 capped at the horizon, horizon
// appended.
inline std::vector<std::size_t> dyadic_checkpoints(std::size_t horizon) {
    std::vector<std::size_t> out;
    for (std::size_t n = 4; n - 1 <= horizon; n *= 2) out.push_back(n - 1);
    if (out.empty() || out.back() != horizon) out.push_back(horizon);
    return out;
}

// The last third (at least one) of an increasing schedule: the finite
// surrogate of "limit points" used by both the Birkhoff profile and the
// empirical-measure family, so their verdicts are structurally comparable.
inline std::size_t tail_start_index(std::size_t count) {
    if (count <= 1) return 0;
    return count - std::max<std::size_t>(1, (count + 2) / 3);
}

struct ObservableFunctional {
    std::function<double(const Point&)> phi;  // alpha(nu) = integral of phi(x) d nu
};

struct LimitPointFamily {
    std::vector<DiscreteMeasure> representatives;  // first member of each cluster
    std::vector<std::size_t> cluster_sizes;
    std::vector<std::size_t> cluster_of;     // per tail checkpoint
    std::vector<std::size_t> checkpoints;    // tail checkpoints examined
    std::vector<double> alpha_values;        // per tail checkpoint
    double alpha_min = 0;
    double alpha_max = 0;
    double clustering_radius = 0;
    bool low_resolution = false;  // fewer than 3 tail checkpoints
};

// Empirical (cylinder x cell) measures at the tail checkpoints, greedily
// clustered in the weak-star surrogate; alpha range is the spread of the
// observable integrals across those checkpoints.
inline LimitPointFamily limit_point_family(const GeneratorSystem& sys, const Itinerary& iota,
                                           const Point& start,
                                           const std::vector<std::size_t>& schedule,
                                           double clustering_radius, int cyl_depth,
                                           std::int64_t resolution,
                                           const ObservableFunctional& alpha,
                                           const TestFamily& fam) {
    if (schedule.empty()) throw std::invalid_argument("checkpoint schedule must be nonempty");
    for (std::size_t i = 0; i + 1 < schedule.size(); ++i)
        if (schedule[i] >= schedule[i + 1])
            throw std::invalid_argument("checkpoint schedule must be strictly increasing");

    LimitPointFamily out;
    out.clustering_radius = clustering_radius;
    const std::size_t first_tail = tail_start_index(schedule.size());
    out.low_resolution = schedule.size() - first_tail < 3;

    const std::size_t cells = sys.cell_count(resolution);
    DiscreteMeasure counts;
    counts.alphabet = sys.generator_count();
    counts.cyl_depth = cyl_depth;
    counts.resolution = resolution;
    counts.mass.assign(counts.cyl_count() * cells, 0.0);

    Point x = start;
    std::size_t t = 0;
    for (std::size_t idx = 0; idx < schedule.size(); ++idx) {
        const std::size_t n = schedule[idx];
        while (t < n) {
            std::size_t cyl = 0;
            for (int i = 0; i < cyl_depth; ++i)
                cyl = cyl * std::size_t(counts.alphabet) +
                      std::size_t(iota.symbol(t + std::size_t(i)));
            counts.mass[cyl * cells + std::size_t(sys.cell_of(x, resolution))] += 1.0;
            x = sys.apply_generator(iota.symbol(t), x);
            ++t;
        }
        if (idx < first_tail) continue;

        DiscreteMeasure mu = counts;
        for (double& v : mu.mass) v /= double(n);
        out.checkpoints.push_back(n);
        out.alpha_values.push_back(alpha.phi ? alpha_of(sys, mu, alpha.phi) : 0.0);

        bool merged = false;
        for (std::size_t c = 0; c < out.representatives.size(); ++c) {
            if (weakstar_distance(sys, mu, out.representatives[c], fam) <= clustering_radius) {
                ++out.cluster_sizes[c];
                out.cluster_of.push_back(c);
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.cluster_of.push_back(out.representatives.size());
            out.representatives.push_back(std::move(mu));
            out.cluster_sizes.push_back(1);
        }
    }
    if (!out.alpha_values.empty()) {
        out.alpha_min = *std::min_element(out.alpha_values.begin(), out.alpha_values.end());
        out.alpha_max = *std::max_element(out.alpha_values.begin(), out.alpha_values.end());
    }
    return out;
}

// ----- Birkhoff averages -------------------------------------------------

struct BirkhoffProfile {
    std::vector<std::size_t> checkpoints;
    std::vector<double> averages;
    double final_average = 0;
    double tail_min = 0;
    double tail_max = 0;
    double gap = 0;
    bool regular = false;  // gap within the regularity tolerance
    double eps_regular = 0;
};

inline BirkhoffProfile birkhoff_profile(const GeneratorSystem& sys, const Itinerary& iota,
                                        const Point& start,
                                        const std::function<double(const Point&)>& phi,
                                        const std::vector<std::size_t>& schedule,
                                        double eps_regular = 0.05) {
    if (schedule.size() < 3)
        throw std::invalid_argument("Birkhoff profile needs at least 3 checkpoints");
    for (std::size_t i = 0; i + 1 < schedule.size(); ++i)
        if (schedule[i] >= schedule[i + 1])
            throw std::invalid_argument("checkpoint schedule must be strictly increasing");

    BirkhoffProfile prof;
    prof.eps_regular = eps_regular;
    const std::size_t first_tail = tail_start_index(schedule.size());

    double sum = 0;
    Point x = start;
    std::size_t t = 0;
    bool tail_seen = false;
    for (std::size_t idx = 0; idx < schedule.size(); ++idx) {
        const std::size_t n = schedule[idx];
        while (t < n) {
            sum += phi(x);
            x = sys.apply_generator(iota.symbol(t), x);
            ++t;
        }
        const double avg = sum / double(n);
        prof.checkpoints.push_back(n);
        prof.averages.push_back(avg);
        prof.final_average = avg;
        if (idx < first_tail) continue;
        if (!tail_seen) {
            prof.tail_min = prof.tail_max = avg;
            tail_seen = true;
        } else {
            prof.tail_min = std::min(prof.tail_min, avg);
            prof.tail_max = std::max(prof.tail_max, avg);
        }
    }
    prof.gap = prof.tail_max - prof.tail_min;
    prof.regular = prof.gap <= eps_regular;
    return prof;
}

}  // namespace sglab
