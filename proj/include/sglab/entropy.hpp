#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sglab/cover.hpp"
#include "sglab/parallel.hpp"

// Growth-rate estimators.
//
// The central quantity is the averaged separated-set count
//     A_n(eps) = m^-n * sum_{|w|=n} N(w, eps)
// whose exponential growth rate in n estimates the family entropy.  At desk
// scale the n -> infinity limit becomes a least-squares slope of log A_n over
// an n-window, the limsup becomes the max over tail sub-windows, and the
// eps -> 0 limit becomes a plateau check across an eps schedule.  Capacity
// variants bisect a discount rate gamma against the growth of weighted cover
// sums.  Every table row records its scale parameters; rows whose greedy
// counts saturate the candidate pool are flagged and excluded from fits.

namespace sglab {

struct EntropyCell {
    double epsilon = 0;
    std::size_t n = 0;
    double mean_count = 0;
    double log_mean = 0;
    double fit_slope = 0;    // per-eps slope, repeated on each of its rows
    double stderr_slope = 0;
    bool saturated = false;
    bool sampled = false;
    std::size_t words_used = 0;
};

struct EntropyEstimate {
    double value = 0;
    bool plateau_found = false;
    double plateau_tol = 0;
    std::vector<double> eps_schedule;
    std::vector<double> slope_per_eps;
    std::vector<EntropyCell> table;
    std::string word_strategy;
};

struct EntropyOptions {
    std::vector<double> eps_schedule{0.25, 0.125};
    std::size_t n_min = 2;
    std::size_t n_max = 8;
    std::int64_t grid_resolution = 4096;  // metric-space candidate pools
    std::string word_strategy = "auto";   // exact | sampled | auto
    std::size_t sample_count = 4096;
    std::uint64_t seed = 1;
    double plateau_tol = 0.05;
    double saturation_fraction = 0.5;
};

namespace detail {

struct SlopeFit {
    double slope = 0;
    double stderr_slope = 0;
    std::size_t points = 0;
};

inline SlopeFit least_squares_slope(const std::vector<std::pair<double, double>>& pts) {
    SlopeFit f;
    f.points = pts.size();
    if (pts.size() < 2) return f;
    double sx = 0, sy = 0;
    for (auto& [x, y] : pts) { sx += x; sy += y; }
    const double mx = sx / double(pts.size());
    const double my = sy / double(pts.size());
    double sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    if (pts.size() > 2) {
        double ss = 0;
        for (auto& [x, y] : pts) {
            const double r = y - my - f.slope * (x - mx);
            ss += r * r;
        }
        f.stderr_slope = std::sqrt(ss / double(pts.size() - 2) / sxx);
    }
    return f;
}

// limsup surrogate: the best of the full-window slope and the slopes of tail
// windows starting in the last third of the data (robust to transients).
inline double tail_max_slope(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) return 0;
    double best = least_squares_slope(pts).slope;
    const std::size_t k = pts.size();
    for (std::size_t a = (2 * k) / 3; a + 3 <= k; ++a) {
        std::vector<std::pair<double, double>> tail(pts.begin() + std::ptrdiff_t(a), pts.end());
        best = std::max(best, least_squares_slope(tail).slope);
    }
    return best;
}

// Words of length n: full enumeration when it fits the budget (or is forced),
// otherwise seeded sampling.  Returns {words, sampled?}.
inline std::pair<std::vector<Word>, bool> words_for_length(
    int m, std::size_t n, const std::string& strategy, std::size_t sample_count,
    std::uint64_t seed) {
    const std::size_t total = checked_pow(std::size_t(m), n, kWordEnumerationBudget);
    const bool fits = total <= kWordEnumerationBudget;
    if (strategy == "exact") {
        if (!fits) throw std::length_error("exact word strategy exceeds enumeration budget");
        return {enumerate_words(m, n), false};
    }
    if (strategy == "sampled" || !fits)
        return {sample_words(m, n, sample_count, seed ^ (0x9e37 + n)), true};
    if (strategy != "auto")
        throw std::invalid_argument("word_strategy must be exact, sampled, or auto");
    return {enumerate_words(m, n), false};
}

inline std::vector<Point> entropy_pool(const GeneratorSystem& sys, std::size_t n, double eps,
                                       const EntropyOptions& opt) {
    if (sys.kind() == GeneratorSystem::Kind::Shift) {
        const int R = std::max(0, sep_depth(eps));
        return sys.grid_pool(std::int64_t(n) + R + 1);
    }
    return sys.grid_pool(opt.grid_resolution);
}

}  // namespace detail

// Averaged separated-set growth rate over a word family.
inline EntropyEstimate bufetov_entropy(const GeneratorSystem& sys, const EntropyOptions& opt) {
    if (opt.n_max < opt.n_min + 2)
        throw std::invalid_argument("entropy fit needs at least three lengths in n_range");
    const int m = sys.generator_count();
    EntropyEstimate est;
    est.eps_schedule = opt.eps_schedule;
    est.plateau_tol = opt.plateau_tol;
    est.word_strategy = opt.word_strategy;

    for (double eps : opt.eps_schedule) {
        std::vector<EntropyCell> rows;
        std::vector<std::pair<double, double>> fit_pts;
        for (std::size_t n = opt.n_min; n <= opt.n_max; ++n) {
            auto [words, sampled] =
                detail::words_for_length(m, n, opt.word_strategy, opt.sample_count, opt.seed);
            const auto pool = detail::entropy_pool(sys, n, eps, opt);
            std::vector<double> counts(words.size(), 0.0);
            parallel_for(words.size(), [&](std::size_t i) {
                counts[i] = double(
                    max_separated(sys, words[i], eps, pool, opt.seed + 17 * i).points.size());
            });
            double mean = 0, var = 0;
            for (double c : counts) mean += c;
            mean /= double(counts.size());
            for (double c : counts) var += (c - mean) * (c - mean);
            var /= double(std::max<std::size_t>(1, counts.size() - 1));

            EntropyCell cell;
            cell.epsilon = eps;
            cell.n = n;
            cell.mean_count = mean;
            cell.log_mean = std::log(mean);
            cell.sampled = sampled;
            cell.words_used = words.size();
            cell.stderr_slope = sampled ? std::sqrt(var / double(counts.size())) : 0.0;
            // A greedy count close to the pool size means the scale floor was
            // hit; such rows carry no growth information.
            cell.saturated = sys.kind() != GeneratorSystem::Kind::Shift &&
                             mean >= opt.saturation_fraction * double(pool.size());
            // mean_count is already the per-word average, i.e. the m^{-n}
            // weighting is built in; fit its log growth directly.
            if (!cell.saturated) fit_pts.emplace_back(double(n), cell.log_mean);
            rows.push_back(cell);
        }
        if (fit_pts.size() < 3 && sys.kind() == GeneratorSystem::Kind::Finite) {
            // A finite state space really does pin the counts at |X|: the
            // plateau is the answer (slope 0), not a resolution artifact.
            double cmin = rows.front().mean_count, cmax = cmin;
            for (const auto& cell : rows) {
                cmin = std::min(cmin, cell.mean_count);
                cmax = std::max(cmax, cell.mean_count);
            }
            if (cmax <= cmin * 1.001) {
                fit_pts.clear();
                for (auto& cell : rows) {
                    cell.saturated = false;
                    fit_pts.emplace_back(double(cell.n), cell.log_mean);
                }
            }
        }
        if (fit_pts.size() < 3)
            throw std::runtime_error(
                "entropy fit under-determined: too many saturated rows; enlarge the grid or "
                "lower n_max");
        const double slope = detail::tail_max_slope(fit_pts);
        const auto base_fit = detail::least_squares_slope(fit_pts);
        for (auto& cell : rows) {
            cell.fit_slope = slope;
            if (!cell.sampled) cell.stderr_slope = base_fit.stderr_slope;
            est.table.push_back(cell);
        }
        est.slope_per_eps.push_back(slope);
    }

    // Plateau pass: the value at the largest eps whose slope agrees with the
    // next finer eps within tolerance.
    est.value = est.slope_per_eps.back();
    for (std::size_t i = 0; i + 1 < est.slope_per_eps.size(); ++i) {
        if (std::fabs(est.slope_per_eps[i + 1] - est.slope_per_eps[i]) <= opt.plateau_tol) {
            est.value = est.slope_per_eps[i];
            est.plateau_found = true;
            break;
        }
    }
    if (est.slope_per_eps.size() == 1) est.plateau_found = true;
    return est;
}

// ---------------------------------------------------------------------------
// Skew-product growth check.  The driven product map acts on
// (itinerary, state) pairs; its separated-set counts decompose over itinerary
// cylinder classes of depth n + sep_depth(eps) + 1, each contributing the base
// count along the class word.  The check compares the product growth rate
// against log m plus the base estimate.

struct SkewCheckResult {
    EntropyEstimate base;
    EntropyEstimate product;
    double log_m = 0;
    double defect = 0;
};

inline EntropyEstimate skew_product_entropy(const GeneratorSystem& sys,
                                            const EntropyOptions& opt) {
    const int m = sys.generator_count();
    EntropyEstimate est;
    est.eps_schedule = opt.eps_schedule;
    est.plateau_tol = opt.plateau_tol;
    est.word_strategy = "exact";

    for (double eps : opt.eps_schedule) {
        std::vector<EntropyCell> rows;
        std::vector<std::pair<double, double>> fit_pts;
        const int R = std::max(0, sep_depth(eps));
        for (std::size_t n = opt.n_min; n <= opt.n_max; ++n) {
            const std::size_t depth = n + std::size_t(R) + 1;
            const auto classes = enumerate_words(m, depth);
            const auto pool = detail::entropy_pool(sys, n, eps, opt);
            std::vector<double> counts(classes.size(), 0.0);
            parallel_for(classes.size(), [&](std::size_t i) {
                Word prefix(std::vector<std::uint8_t>(classes[i].symbols.begin(),
                                                      classes[i].symbols.begin() +
                                                          std::ptrdiff_t(n)),
                            m);
                counts[i] = double(
                    max_separated(sys, prefix, eps, pool, opt.seed + 31 * i).points.size());
            });
            double total = 0, mean = 0;
            for (double c : counts) total += c;
            mean = total / double(counts.size());

            EntropyCell cell;
            cell.epsilon = eps;
            cell.n = n;
            cell.mean_count = total;  // product-space count (not averaged)
            cell.log_mean = std::log(total);
            cell.words_used = classes.size();
            cell.saturated = sys.kind() != GeneratorSystem::Kind::Shift &&
                             mean >= opt.saturation_fraction * double(pool.size());
            if (!cell.saturated) fit_pts.emplace_back(double(n), cell.log_mean);
            rows.push_back(cell);
        }
        if (fit_pts.size() < 3 && sys.kind() == GeneratorSystem::Kind::Finite) {
            // Finite state spaces pin the per-class count at |X|; the product
            // growth is then carried by the class count alone and the rows are
            // perfectly usable.
            double cmin = rows.front().mean_count / double(rows.front().words_used);
            double cmax = cmin;
            for (const auto& cell : rows) {
                const double per_class = cell.mean_count / double(cell.words_used);
                cmin = std::min(cmin, per_class);
                cmax = std::max(cmax, per_class);
            }
            if (cmax <= cmin * 1.001) {
                fit_pts.clear();
                for (auto& cell : rows) {
                    cell.saturated = false;
                    fit_pts.emplace_back(double(cell.n), cell.log_mean);
                }
            }
        }
        if (fit_pts.size() < 3)
            throw std::runtime_error(
                "skew entropy fit under-determined: too many saturated rows");
        const double slope = detail::tail_max_slope(fit_pts);
        for (auto& cell : rows) {
            cell.fit_slope = slope;
            est.table.push_back(cell);
        }
        est.slope_per_eps.push_back(slope);
    }
    est.value = est.slope_per_eps.back();
    for (std::size_t i = 0; i + 1 < est.slope_per_eps.size(); ++i) {
        if (std::fabs(est.slope_per_eps[i + 1] - est.slope_per_eps[i]) <= opt.plateau_tol) {
            est.value = est.slope_per_eps[i];
            est.plateau_found = true;
            break;
        }
    }
    if (est.slope_per_eps.size() == 1) est.plateau_found = true;
    return est;
}

inline SkewCheckResult skew_entropy_check(const GeneratorSystem& sys,
                                          const EntropyOptions& opt) {
    SkewCheckResult r;
    r.base = bufetov_entropy(sys, opt);
    r.product = skew_product_entropy(sys, opt);
    r.log_m = std::log(double(sys.generator_count()));
    r.defect = std::fabs(r.product.value - r.log_m - r.base.value);
    return r;
}

// ---------------------------------------------------------------------------
// Upper-capacity growth via gamma bisection

struct CapacityRow {
    std::size_t N = 0;
    double log_avg_weighted = 0;  // at the returned gamma midpoint
    double mean_cover_count = 0;
    bool saturated = false;
};

struct CapacityEstimate {
    double value = 0;
    double gamma_low = 0;
    double gamma_high = 0;
    double delta = 0;
    std::string mode;  // fixed | variable
    std::vector<CapacityRow> rows;
};

struct CapacityOptions {
    double delta = 0.05;
    std::size_t N_min = 2;
    std::size_t N_max = 8;
    double gamma_lo = 0.0;
    double gamma_hi = 2.0;
    double gamma_tol = 0.02;
    std::int64_t grid_resolution = 4096;
    bool variable_mode = false;
    int max_extra = 2;
    std::uint64_t seed = 1;
    double saturation_fraction = 0.9;
};

namespace detail {

struct CoverTable {
    // weights[N][word] summed with gamma applied lazily for the fixed mode;
    // in variable mode the table is rebuilt per gamma.
    std::vector<std::size_t> lengths;
    std::vector<std::vector<double>> counts;   // fixed-mode ball counts
    std::vector<double> mean_counts;
    std::vector<bool> saturated;
};

inline CoverTable capacity_cover_table(const GeneratorSystem& sys,
                                       const std::vector<Point>& Z,
                                       const CapacityOptions& opt) {
    CoverTable tab;
    const int m = sys.generator_count();
    for (std::size_t N = opt.N_min; N <= opt.N_max; ++N) {
        const auto words = enumerate_words(m, N);
        std::vector<double> counts(words.size(), 0.0);
        parallel_for(words.size(), [&](std::size_t i) {
            counts[i] = double(min_cover_fixed(sys, Z, words[i], opt.delta).balls.size());
        });
        double mean = 0;
        for (double c : counts) mean += c;
        mean /= double(counts.size());
        tab.lengths.push_back(N);
        tab.mean_counts.push_back(mean);
        tab.saturated.push_back(mean >= opt.saturation_fraction * double(Z.size()));
        tab.counts.push_back(std::move(counts));
    }
    return tab;
}

}  // namespace detail

// Critical discount rate of the averaged fixed-length cover sums
//     R(Z, gamma, delta, N) = m^-N sum_{|w|=N} #cover_w * exp(-gamma (N+1)),
// located by bisecting gamma on the sign of the growth slope of log R.
inline CapacityEstimate capacity_entropy(const GeneratorSystem& sys,
                                         const std::vector<Point>& Z,
                                         const CapacityOptions& opt) {
    if (opt.N_max < opt.N_min + 2)
        throw std::invalid_argument("capacity fit needs at least three lengths in N_range");
    const int m = sys.generator_count();

    auto tab = detail::capacity_cover_table(sys, Z, opt);

    // A genuinely finite target plateaus at |Z| for every N; that constant
    // count is the data (zero growth), not a resolution artifact, so keep the
    // rows when nothing ever grew.
    {
        std::size_t usable = 0;
        for (bool s : tab.saturated) usable += s ? 0 : 1;
        double cmin = tab.mean_counts.front(), cmax = cmin;
        for (double c : tab.mean_counts) {
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
        if (usable < 3 && cmax <= cmin * 1.001)
            std::fill(tab.saturated.begin(), tab.saturated.end(), false);
    }

    const auto slope_at = [&](double gamma) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < tab.lengths.size(); ++i) {
            if (tab.saturated[i]) continue;
            double avg;
            if (opt.variable_mode) {
                const auto words = enumerate_words(m, tab.lengths[i]);
                std::vector<double> weights(words.size(), 0.0);
                parallel_for(words.size(), [&](std::size_t wi) {
                    weights[wi] = min_cover_variable(sys, Z, words[wi], opt.delta,
                                                     opt.max_extra, gamma)
                                      .weight(gamma);
                });
                double s = 0;
                for (double v : weights) s += v;
                avg = s / double(words.size());
            } else {
                double s = 0;
                for (double c : tab.counts[i])
                    s += c * std::exp(-gamma * double(tab.lengths[i] + 1));
                avg = s / double(tab.counts[i].size());
            }
            pts.emplace_back(double(tab.lengths[i]), std::log(avg));
        }
        if (pts.size() < 3)
            throw std::runtime_error(
                "capacity fit under-determined: too many saturated rows; enlarge the grid or "
                "lower N_max");
        return detail::least_squares_slope(pts).slope;
    };

    double lo = opt.gamma_lo, hi = opt.gamma_hi;
    const double s_lo = slope_at(lo), s_hi = slope_at(hi);
    if (!(s_hi < 0))
        throw std::runtime_error(
            "capacity bisection bracket does not straddle the critical rate; widen "
            "gamma_bracket");
    if (!(s_lo > 0)) {
        hi = lo;  // no growth even undiscounted: the critical rate sits at the floor
    } else {
        while (hi - lo > opt.gamma_tol) {
            const double mid = 0.5 * (lo + hi);
            (slope_at(mid) > 0 ? lo : hi) = mid;
        }
    }

    CapacityEstimate est;
    est.gamma_low = lo;
    est.gamma_high = hi;
    est.value = 0.5 * (lo + hi);
    est.delta = opt.delta;
    est.mode = opt.variable_mode ? "variable" : "fixed";
    for (std::size_t i = 0; i < tab.lengths.size(); ++i) {
        CapacityRow row;
        row.N = tab.lengths[i];
        row.mean_cover_count = tab.mean_counts[i];
        row.saturated = tab.saturated[i];
        row.log_avg_weighted =
            std::log(tab.mean_counts[i]) - est.value * double(tab.lengths[i] + 1);
        est.rows.push_back(row);
    }
    return est;
}

// ---------------------------------------------------------------------------
// Product capacity: F-covers of (full itinerary space) x Z factor over
// itinerary cylinder classes of depth N + cover_depth(delta); each class
// contributes the base cover count along its length-N prefix.  The result is
// compared against log m + capacity of Z under the family.

// Full-space candidate pool at the scales a capacity run will probe.  For
// shifts the resolution is a cylinder depth, so derive it from N_max and
// delta instead of taking the metric grid size literally.
inline std::vector<Point> capacity_space_pool(const GeneratorSystem& sys,
                                              const CapacityOptions& opt) {
    if (sys.kind() == GeneratorSystem::Kind::Shift)
        return sys.grid_pool(std::int64_t(opt.N_max) + cover_depth(opt.delta) + 1);
    return sys.grid_pool(opt.grid_resolution);
}

struct ProductCapacityResult {
    CapacityEstimate product;
    CapacityEstimate base;
    double log_m = 0;
    double defect = 0;
};

inline CapacityEstimate skew_product_capacity(const GeneratorSystem& sys,
                                              const std::vector<Point>& Z,
                                              const CapacityOptions& opt) {
    if (opt.N_max < opt.N_min + 2)
        throw std::invalid_argument("capacity fit needs at least three lengths in N_range");
    const int m = sys.generator_count();
    const int L = cover_depth(opt.delta);

    std::vector<std::size_t> lengths;
    std::vector<double> totals;
    std::vector<bool> saturated;
    for (std::size_t N = opt.N_min; N <= opt.N_max; ++N) {
        const auto classes = enumerate_words(m, N + std::size_t(L));
        std::vector<double> counts(classes.size(), 0.0);
        parallel_for(classes.size(), [&](std::size_t i) {
            Word prefix(std::vector<std::uint8_t>(classes[i].symbols.begin(),
                                                  classes[i].symbols.begin() +
                                                      std::ptrdiff_t(N)),
                        m);
            counts[i] = double(min_cover_fixed(sys, Z, prefix, opt.delta).balls.size());
        });
        double total = 0;
        for (double c : counts) total += c;
        lengths.push_back(N);
        totals.push_back(total);
        saturated.push_back(total / double(classes.size()) >=
                            opt.saturation_fraction * double(Z.size()));
    }

    // A finite target pins the per-class count at |Z| for every N; the product
    // growth is then the class count alone and those rows stay usable.
    {
        std::size_t usable = 0;
        for (bool s : saturated) usable += s ? 0 : 1;
        double cmin = 0, cmax = 0;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            const double per_class =
                totals[i] / std::pow(double(m), double(lengths[i] + std::size_t(L)));
            if (i == 0) { cmin = cmax = per_class; continue; }
            cmin = std::min(cmin, per_class);
            cmax = std::max(cmax, per_class);
        }
        if (usable < 3 && cmax <= cmin * 1.001)
            std::fill(saturated.begin(), saturated.end(), false);
    }

    const auto slope_at = [&](double gamma) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < lengths.size(); ++i) {
            if (saturated[i]) continue;
            pts.emplace_back(double(lengths[i]),
                             std::log(totals[i]) - gamma * double(lengths[i] + 1));
        }
        if (pts.size() < 3)
            throw std::runtime_error("product capacity fit under-determined");
        return detail::least_squares_slope(pts).slope;
    };

    double lo = opt.gamma_lo, hi = opt.gamma_hi;
    const double s_lo = slope_at(lo), s_hi = slope_at(hi);
    if (!(s_hi < 0))
        throw std::runtime_error(
            "product capacity bracket does not straddle the critical rate; widen "
            "gamma_bracket");
    if (!(s_lo > 0)) {
        hi = lo;  // no growth even at the bracket floor: the critical rate sits there
    } else {
        while (hi - lo > opt.gamma_tol) {
            const double mid = 0.5 * (lo + hi);
            (slope_at(mid) > 0 ? lo : hi) = mid;
        }
    }

    CapacityEstimate est;
    est.gamma_low = lo;
    est.gamma_high = hi;
    est.value = 0.5 * (lo + hi);
    est.delta = opt.delta;
    est.mode = "fixed";
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        CapacityRow row;
        row.N = lengths[i];
        row.mean_cover_count = totals[i];
        row.saturated = saturated[i];
        row.log_avg_weighted = std::log(totals[i]) - est.value * double(lengths[i] + 1);
        est.rows.push_back(row);
    }
    return est;
}

inline ProductCapacityResult capacity_product_check(const GeneratorSystem& sys,
                                                    const std::vector<Point>& Z,
                                                    const CapacityOptions& opt) {
    ProductCapacityResult r;
    r.log_m = std::log(double(sys.generator_count()));

    CapacityOptions base_opt = opt;
    r.base = capacity_entropy(sys, Z, base_opt);

    CapacityOptions prod_opt = opt;
    // The product rate sits log m above the base rate; shift the bracket.
    prod_opt.gamma_lo = opt.gamma_lo + r.log_m;
    prod_opt.gamma_hi = opt.gamma_hi + r.log_m;
    r.product = skew_product_capacity(sys, Z, prod_opt);
    r.defect = std::fabs(r.product.value - r.log_m - r.base.value);
    return r;
}

}  // namespace sglab
