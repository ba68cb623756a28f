#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sglab/config.hpp"
#include "sglab/cover.hpp"
#include "sglab/csv.hpp"
#include "sglab/entropy.hpp"
#include "sglab/measure.hpp"
#include "sglab/recurrence.hpp"
#include "sglab/system.hpp"
#include "sglab/tracing.hpp"
#include "sglab/word.hpp"

// Experiment runner: builds a system from a parsed config, dispatches on the
// experiment kind, writes one CSV artifact, and reports an exit code:
//   0 success / 2 precondition violated / 3 finished but flagged
//   (no plateau, no convergence, failing certificate).
// Config grammar errors are raised as ConfigError before this layer runs.

namespace sglab {

struct RunResult {
    int code = 0;
    std::string message;
    std::string artifact;
};

// ----- shared builders ---------------------------------------------------

inline std::vector<std::string> split_on(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string item;
    for (char c : text) {
        if (c == sep) {
            out.push_back(item);
            item.clear();
        } else {
            item.push_back(c);
        }
    }
    out.push_back(item);
    return out;
}

inline GeneratorSystem system_from_config(const Config& cfg) {
    const std::string kind = cfg.get("system.kind");
    if (kind == "full-shift") {
        const int k = int(cfg.integer_or("system.k", 2));
        if (cfg.has("system.perms")) {
            std::vector<std::vector<std::uint8_t>> perms;
            for (const auto& grp : split_on(cfg.get("system.perms"), ';')) {
                std::vector<std::uint8_t> p;
                for (char c : grp) {
                    if (c == ' ' || c == ',') continue;
                    if (c < '0' || c > '9')
                        throw std::invalid_argument("permutation digits must be 0-9");
                    p.push_back(std::uint8_t(c - '0'));
                }
                perms.push_back(std::move(p));
            }
            return GeneratorSystem::full_shift(k, std::move(perms));
        }
        return GeneratorSystem::full_shift(k, int(cfg.integer_or("system.m", 1)));
    }
    if (kind == "circle") {
        std::vector<int> degrees;
        for (long d : cfg.integer_list("system.degrees")) degrees.push_back(int(d));
        return GeneratorSystem::circle(std::move(degrees));
    }
    if (kind == "torus") {
        std::vector<std::vector<std::int64_t>> diags;
        for (const auto& grp : split_on(cfg.get("system.diagonals"), ';')) {
            std::vector<std::int64_t> d;
            std::string item;
            for (char c : grp + " ") {
                if (c == ' ' || c == ',' || c == '\t') {
                    if (!item.empty()) d.push_back(std::stoll(item)), item.clear();
                } else {
                    item.push_back(c);
                }
            }
            if (!d.empty()) diags.push_back(std::move(d));
        }
        return GeneratorSystem::torus_diag(std::move(diags));
    }
    if (kind == "finite") {
        const int states = int(cfg.integer("system.states"));
        std::vector<std::vector<int>> maps;
        for (const auto& grp : split_on(cfg.get("system.maps"), ';')) {
            std::vector<int> f;
            std::string item;
            for (char c : grp + " ") {
                if (c == ' ' || c == ',' || c == '\t') {
                    if (!item.empty()) f.push_back(int(std::stol(item))), item.clear();
                } else {
                    item.push_back(c);
                }
            }
            if (!f.empty()) maps.push_back(std::move(f));
        }
        return GeneratorSystem::finite(states, std::move(maps));
    }
    throw std::invalid_argument("unknown system kind '" + kind +
                                "' (expected full-shift, circle, torus, or finite)");
}

inline BlowupFunction blowup_from_name(const std::string& name) {
    if (name == "sqrt") return blowup_sqrt();
    if (name == "n_minus_1") return blowup_identity_minus_one();
    const std::string prefix = "n_over_";
    if (name.rfind(prefix, 0) == 0) {
        const long c = std::stol(name.substr(prefix.size()));
        if (c < 1) throw std::invalid_argument("blowup divisor must be positive");
        return blowup_linear_fraction(c);
    }
    throw std::invalid_argument("unknown blowup function '" + name +
                                "' (expected sqrt, n_over_<c>, or n_minus_1)");
}

inline Point zero_point(const GeneratorSystem& sys) {
    switch (sys.kind()) {
        case GeneratorSystem::Kind::Circle: return 0.0;
        case GeneratorSystem::Kind::Torus:
            return std::vector<double>(std::size_t(sys.torus_data().dim), 0.0);
        case GeneratorSystem::Kind::Shift:
            return SymPoint::make({}, {0}, sys.shift_data().k);
        case GeneratorSystem::Kind::Finite: return 0;
    }
    return 0;
}

inline EntropyOptions entropy_options_from(const Config& cfg) {
    EntropyOptions opt;
    if (cfg.has("entropy.eps")) opt.eps_schedule = cfg.number_list("entropy.eps");
    opt.n_min = std::size_t(cfg.integer_or("entropy.n_min", long(opt.n_min)));
    opt.n_max = std::size_t(cfg.integer_or("entropy.n_max", long(opt.n_max)));
    opt.grid_resolution = cfg.integer_or("entropy.grid", opt.grid_resolution);
    opt.word_strategy = cfg.get_or("entropy.strategy", opt.word_strategy);
    opt.sample_count = std::size_t(cfg.integer_or("entropy.samples", long(opt.sample_count)));
    opt.seed = std::uint64_t(cfg.integer_or("experiment.seed", 1));
    opt.plateau_tol = cfg.number_or("entropy.plateau_tol", opt.plateau_tol);
    opt.saturation_fraction =
        cfg.number_or("entropy.saturation_fraction", opt.saturation_fraction);
    if (opt.eps_schedule.empty())
        throw std::invalid_argument("entropy.eps schedule must be nonempty");
    return opt;
}

inline CapacityOptions capacity_options_from(const Config& cfg) {
    CapacityOptions opt;
    opt.delta = cfg.number_or("capacity.delta", opt.delta);
    opt.N_min = std::size_t(cfg.integer_or("capacity.n_min", long(opt.N_min)));
    opt.N_max = std::size_t(cfg.integer_or("capacity.n_max", long(opt.N_max)));
    opt.gamma_lo = cfg.number_or("capacity.gamma_lo", opt.gamma_lo);
    opt.gamma_hi = cfg.number_or("capacity.gamma_hi", opt.gamma_hi);
    opt.gamma_tol = cfg.number_or("capacity.gamma_tol", opt.gamma_tol);
    opt.grid_resolution = cfg.integer_or("capacity.grid", opt.grid_resolution);
    opt.variable_mode = cfg.flag_or("capacity.variable", false);
    opt.max_extra = int(cfg.integer_or("capacity.max_extra", opt.max_extra));
    opt.seed = std::uint64_t(cfg.integer_or("experiment.seed", 1));
    opt.saturation_fraction =
        cfg.number_or("capacity.saturation_fraction", opt.saturation_fraction);
    return opt;
}

namespace detail {

inline double plateau_eps(const EntropyEstimate& e) {
    if (e.eps_schedule.empty()) return 0;
    if (e.eps_schedule.size() == 1) return e.eps_schedule[0];
    for (std::size_t i = 0; i + 1 < e.slope_per_eps.size(); ++i)
        if (std::fabs(e.slope_per_eps[i] - e.slope_per_eps[i + 1]) <= e.plateau_tol)
            return e.eps_schedule[i];
    return e.eps_schedule.back();
}

inline void emit_entropy_rows(CsvWriter& w, const std::string& side,
                              const EntropyEstimate& est) {
    for (const auto& c : est.table)
        w.row({side, "cell", csv_num(c.epsilon), csv_num(c.n), csv_num(c.mean_count),
               csv_num(c.log_mean), csv_num(c.fit_slope), csv_num(c.stderr_slope),
               csv_flag(c.saturated), csv_flag(c.sampled), csv_num(c.words_used), "", "",
               "", ""});
    w.row({side, "estimate", csv_num(plateau_eps(est)), "", "", "", "", "", "", "", "",
           csv_num(est.value), csv_flag(est.plateau_found), "", ""});
}

inline void emit_capacity_rows(CsvWriter& w, const std::string& target,
                               const CapacityEstimate& est) {
    for (const auto& r : est.rows)
        w.row({target, "cell", csv_num(r.N), csv_num(r.log_avg_weighted),
               csv_num(r.mean_cover_count), csv_flag(r.saturated), "", "", "",
               csv_num(est.delta), est.mode, "", ""});
    w.row({target, "estimate", "", "", "", "", csv_num(est.value), csv_num(est.gamma_low),
           csv_num(est.gamma_high), csv_num(est.delta), est.mode, "", ""});
}

inline std::string output_path(const Config& cfg) {
    const std::string path = cfg.get("experiment.output");
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    return path;
}

}  // namespace detail

// ----- experiments -------------------------------------------------------

inline RunResult run_entropy(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    const auto opt = entropy_options_from(cfg);
    const auto est = bufetov_entropy(sys, opt);

    CsvWriter w({"side", "row", "eps", "n", "mean_count", "log_mean", "slope", "stderr",
                 "saturated", "sampled", "words_used", "value", "plateau_found", "log_m",
                 "defect"});
    detail::emit_entropy_rows(w, "base", est);
    RunResult res;
    res.artifact = detail::output_path(cfg);
    w.write_file(res.artifact);
    if (!est.plateau_found) {
        res.code = 3;
        res.message = "no plateau across the eps schedule";
    }
    return res;
}

inline RunResult run_skew_check(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    const auto opt = entropy_options_from(cfg);
    const auto chk = skew_entropy_check(sys, opt);

    CsvWriter w({"side", "row", "eps", "n", "mean_count", "log_mean", "slope", "stderr",
                 "saturated", "sampled", "words_used", "value", "plateau_found", "log_m",
                 "defect"});
    detail::emit_entropy_rows(w, "base", chk.base);
    detail::emit_entropy_rows(w, "product", chk.product);
    w.row({"summary", "", "", "", "", "", "", "", "", "", "", "", "", csv_num(chk.log_m),
           csv_num(chk.defect)});
    RunResult res;
    res.artifact = detail::output_path(cfg);
    w.write_file(res.artifact);
    if (!chk.base.plateau_found || !chk.product.plateau_found) {
        res.code = 3;
        res.message = "no plateau across the eps schedule";
    }
    return res;
}

inline RunResult run_capacity(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    const auto opt = capacity_options_from(cfg);
    std::vector<Point> Z;
    const std::string target = cfg.get_or("capacity.z", "space");
    if (target == "space") {
        Z = capacity_space_pool(sys, opt);
    } else if (target == "points") {
        for (const auto& s : split_on(cfg.get("capacity.points"), ';'))
            Z.push_back(sys.point_from_string(s));
    } else {
        throw std::invalid_argument("capacity.z must be 'space' or 'points'");
    }

    CsvWriter w({"target", "row", "N", "log_avg_weighted", "mean_cover_count", "saturated",
                 "value", "gamma_low", "gamma_high", "delta", "mode", "log_m", "defect"});
    RunResult res;
    if (cfg.flag_or("capacity.product", false)) {
        const auto chk = capacity_product_check(sys, Z, opt);
        detail::emit_capacity_rows(w, "base", chk.base);
        detail::emit_capacity_rows(w, "product", chk.product);
        w.row({"summary", "", "", "", "", "", "", "", "", "", "", csv_num(chk.log_m),
               csv_num(chk.defect)});
    } else {
        const auto est = capacity_entropy(sys, Z, opt);
        detail::emit_capacity_rows(w, "base", est);
    }
    res.artifact = detail::output_path(cfg);
    w.write_file(res.artifact);
    return res;
}

inline RunResult run_stationary(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    StationaryOptions opt;
    opt.resolution = cfg.integer_or("stationary.resolution", opt.resolution);
    opt.max_iterations =
        std::size_t(cfg.integer_or("stationary.max_iterations", long(opt.max_iterations)));
    opt.tolerance = cfg.number_or("stationary.tolerance", opt.tolerance);
    const auto probs = cfg.number_list("stationary.probs");
    const auto res0 = stationary_measure(sys, probs, opt);

    CsvWriter w({"row", "resolution", "iterations", "final_step", "residual", "converged",
                 "depth", "product_residual"});
    w.row({"summary", csv_num(long(opt.resolution)), csv_num(res0.iterations),
           csv_num(res0.final_step), csv_num(res0.invariance_residual),
           csv_flag(res0.converged), "", ""});
    const int depth = int(cfg.integer_or("stationary.product_depth", 0));
    for (int d = 0; d <= depth && depth > 0; ++d) {
        const double r = product_invariance_residual(sys, res0.measure, probs, d);
        w.row({"product", csv_num(long(opt.resolution)), "", "", "", "", csv_num(d),
               csv_num(r)});
    }
    RunResult out;
    out.artifact = detail::output_path(cfg);
    w.write_file(out.artifact);
    if (!res0.converged) {
        out.code = 3;
        out.message = "stationary iteration did not converge";
    }
    return out;
}

inline RunResult run_recurrence(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    const Point x = sys.point_from_string(cfg.get("recurrence.point"));
    const Itinerary iota =
        Itinerary::parse(cfg.get_or("recurrence.itinerary", "|0"), sys.generator_count());
    const double eps = cfg.number("recurrence.eps");
    const std::size_t horizon = std::size_t(cfg.integer("recurrence.horizon"));
    RecurrenceThresholds th;
    th.positive = cfg.number_or("recurrence.positive", -1);
    th.qr_tol = cfg.number_or("recurrence.qr_tol", th.qr_tol);
    th.support_mass = cfg.number_or("recurrence.support_mass", th.support_mass);
    th.zero_max = cfg.number_or("recurrence.zero_max", th.zero_max);
    th.positive_min = cfg.number_or("recurrence.positive_min", th.positive_min);

    const auto verdict = classify_recurrence(sys, iota, x, eps, horizon, th);
    const auto omega = omega_limits(sys, iota, x, eps, horizon, verdict.positive_threshold);

    CsvWriter w({"row", "cell", "upper", "lower", "banach_upper", "banach_lower",
                 "tail_visited", "transitive", "quasiregular", "qr_gap", "upper_recurrent",
                 "banach_upper_recurrent", "W", "V", "S", "level", "case_id",
                 "case_determined", "self_upper", "self_lower", "self_banach_upper",
                 "self_banach_lower", "eps", "horizon", "positive_threshold", "zero_max",
                 "positive_min"});
    for (std::size_t c = 0; c < omega.cell_stats.size(); ++c) {
        const auto& s = omega.cell_stats[c];
        w.row({"cell", csv_num(long(c)), csv_num(s.upper), csv_num(s.lower),
               csv_num(s.banach_upper), csv_num(s.banach_lower),
               csv_flag(omega.tail_visited[c] != 0), "", "", "", "", "", "", "", "", "", "",
               "", "", "", "", "", csv_num(eps), csv_num(horizon),
               csv_num(verdict.positive_threshold), csv_num(th.zero_max),
               csv_num(th.positive_min)});
    }
    w.row({"verdict", "", "", "", "", "", "", csv_flag(verdict.transitive_eps),
           csv_flag(verdict.quasiregular), csv_num(verdict.quasiregular_gap),
           csv_flag(verdict.upper_recurrent_eps),
           csv_flag(verdict.banach_upper_recurrent_eps), csv_flag(verdict.structure.W),
           csv_flag(verdict.structure.V), csv_flag(verdict.structure.S), verdict.level,
           csv_num(verdict.case_id), csv_flag(verdict.case_determined),
           csv_num(verdict.self_return.upper), csv_num(verdict.self_return.lower),
           csv_num(verdict.self_return.banach_upper),
           csv_num(verdict.self_return.banach_lower), csv_num(eps), csv_num(horizon),
           csv_num(verdict.positive_threshold), csv_num(th.zero_max),
           csv_num(th.positive_min)});
    RunResult out;
    out.artifact = detail::output_path(cfg);
    w.write_file(out.artifact);
    return out;
}

inline RunResult run_case_zoo(const Config& cfg) {
    CaseScheduleParams params;
    params.length = std::size_t(cfg.integer_or("case-zoo.length", long(params.length)));
    if (cfg.has("case-zoo.horizons")) {
        params.horizons.clear();
        for (long h : cfg.integer_list("case-zoo.horizons"))
            params.horizons.push_back(std::size_t(h));
    }
    params.zero_max = cfg.number_or("case-zoo.zero_max", params.zero_max);
    params.positive_min = cfg.number_or("case-zoo.positive_min", params.positive_min);
    std::vector<long> cases{1, 2, 3, 4, 5, 6};
    if (cfg.has("case-zoo.cases")) cases = cfg.integer_list("case-zoo.cases");

    CsvWriter w({"row", "case", "horizon", "cell", "upper", "lower", "banach_upper",
                 "banach_lower", "tail_visited", "expect_lower", "expect_upper",
                 "expect_banach", "expect_omega", "zero_max", "positive_min", "pass",
                 "note"});
    bool all_pass = true;
    for (long id : cases) {
        const auto cp = construct_case_point(int(id), params);
        const auto& cert = cp.certificate;
        for (const auto& e : cert.entries) {
            const auto in = [&](const std::vector<std::int64_t>& v) {
                return std::count(v.begin(), v.end(), std::int64_t(e.cell)) > 0;
            };
            const bool el = in(cert.lower_cells), eu = in(cert.upper_cells),
                       eb = in(cert.banach_cells), eo = in(cert.omega_cells);
            const auto& s = e.stats;
            const bool row_pass =
                (el ? s.lower >= params.positive_min : s.lower <= params.zero_max) &&
                (eu ? s.upper >= params.positive_min : s.upper <= params.zero_max) &&
                (eb ? s.banach_upper >= params.positive_min
                    : s.banach_upper <= params.zero_max) &&
                s.banach_lower <= params.zero_max && e.tail_visited == eo;
            w.row({"entry", csv_num(long(id)), csv_num(e.horizon), csv_num(e.cell),
                   csv_num(s.upper), csv_num(s.lower), csv_num(s.banach_upper),
                   csv_num(s.banach_lower), csv_flag(e.tail_visited), csv_flag(el),
                   csv_flag(eu), csv_flag(eb), csv_flag(eo), csv_num(params.zero_max),
                   csv_num(params.positive_min), csv_flag(row_pass), ""});
        }
        w.row({"case", csv_num(long(id)), "", "", "", "", "", "", "", "", "", "", "",
               csv_num(params.zero_max), csv_num(params.positive_min),
               csv_flag(cert.pass), cert.note});
        all_pass = all_pass && cert.pass;
    }
    RunResult out;
    out.artifact = detail::output_path(cfg);
    w.write_file(out.artifact);
    if (!all_pass) {
        out.code = 3;
        out.message = "a case certificate failed";
    }
    return out;
}

namespace detail {

inline void emit_trace_rows(CsvWriter& w, const TraceCertificate& cert) {
    for (const auto& s : cert.segments)
        w.row({"segment", csv_num(s.index), csv_num(s.start), csv_num(s.length),
               csv_num(s.requested_epsilon), csv_num(s.snapped_epsilon),
               csv_num(s.scale_index), csv_num(s.mismatches), csv_num(s.bound),
               cert.blowup_name, csv_flag(s.pass)});
    w.row({"summary", "", "", "", "", "", "", "", "", cert.blowup_name,
           csv_flag(cert.pass)});
}

}  // namespace detail

inline RunResult run_trace(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    const auto g = blowup_from_name(cfg.get_or("trace.blowup", "sqrt"));
    const std::string mode = cfg.get_or("trace.mode", "glue");
    const int m = sys.generator_count();

    CsvWriter w({"row", "segment", "start", "length", "requested_eps", "snapped_eps",
                 "scale_index", "mismatches", "bound", "blowup", "pass"});
    TraceCertificate cert;
    if (mode == "glue") {
        TraceRequest req;
        for (int i = 1;; ++i) {
            const std::string sec = "segment" + std::to_string(i);
            if (!cfg.has(sec + ".point")) break;
            TraceSegment seg;
            seg.x = sys.point_from_string(cfg.get(sec + ".point"));
            if (cfg.has(sec + ".word"))
                seg.w = word_from_string(cfg.get(sec + ".word"), m);
            else
                seg.w = Word(std::vector<std::uint8_t>(
                                 std::size_t(cfg.integer(sec + ".length")), 0),
                             m);
            seg.epsilon = cfg.number(sec + ".eps");
            req.segments.push_back(std::move(seg));
        }
        if (req.segments.empty())
            throw std::invalid_argument("trace experiment needs segment1.point etc.");
        cert = g_almost_trace(sys, g, req).second;
    } else if (mode == "skew") {
        SkewTraceRequest req;
        for (int i = 1;; ++i) {
            const std::string sec = "segment" + std::to_string(i);
            if (!cfg.has(sec + ".point")) break;
            SkewTraceSegment seg;
            seg.x = sys.point_from_string(cfg.get(sec + ".point"));
            seg.iota = Itinerary::parse(cfg.get(sec + ".itinerary"), m);
            seg.n = std::size_t(cfg.integer(sec + ".n"));
            seg.epsilon = cfg.number(sec + ".eps");
            req.segments.push_back(std::move(seg));
        }
        if (req.segments.empty())
            throw std::invalid_argument("trace experiment needs segment1.point etc.");
        cert = skew_trace_lift(sys, g, req).certificate;
    } else {
        throw std::invalid_argument("trace.mode must be 'glue' or 'skew'");
    }
    detail::emit_trace_rows(w, cert);
    RunResult out;
    out.artifact = detail::output_path(cfg);
    w.write_file(out.artifact);
    if (!cert.pass) {
        out.code = 3;
        out.message = "trace certificate failed";
    }
    return out;
}

inline RunResult run_gap_entropy(const Config& cfg) {
    const auto sys = system_from_config(cfg);
    const auto opt = capacity_options_from(cfg);
    const std::string family = cfg.get("gap-entropy.family");

    GapFamilyOptions fopt;
    fopt.prefix_len = std::size_t(cfg.integer_or("gap-entropy.prefix_len", 8));
    fopt.count = std::size_t(cfg.integer_or("gap-entropy.count", 0));
    fopt.seed = std::uint64_t(cfg.integer_or("experiment.seed", 1));
    fopt.schedule_len =
        std::size_t(cfg.integer_or("gap-entropy.schedule_len", long(fopt.schedule_len)));

    std::vector<Point> Z;
    GeneratorSystem fam_sys = sys;
    if (family == "singleton") {
        Z.push_back(zero_point(sys));
    } else if (family == "qw-br") {
        auto fam = gap_family_qw_br(fopt);
        fam_sys = fam.system;
        Z = std::move(fam.points);
    } else if (family == "qr-br1") {
        auto fam = gap_family_qr_br1(fopt);
        fam_sys = fam.system;
        Z = std::move(fam.points);
    } else if (family == "irregular-transitive") {
        auto fam = gap_family_irregular_transitive(fopt);
        fam_sys = fam.system;
        Z = std::move(fam.points);
    } else if (family.rfind("case-", 0) == 0) {
        auto fam = gap_family_case(int(std::stol(family.substr(5))), fopt);
        fam_sys = fam.system;
        Z = std::move(fam.points);
    } else {
        throw std::invalid_argument("unknown gap family '" + family + "'");
    }

    const auto est_family = capacity_entropy(fam_sys, Z, opt);
    const auto est_space = capacity_entropy(fam_sys, capacity_space_pool(fam_sys, opt), opt);

    CsvWriter w({"target", "row", "N", "log_avg_weighted", "mean_cover_count", "saturated",
                 "value", "gamma_low", "gamma_high", "delta", "mode", "log_m", "defect"});
    detail::emit_capacity_rows(w, "family", est_family);
    detail::emit_capacity_rows(w, "space", est_space);
    w.row({"summary", family, csv_num(long(Z.size())), "", "", "", "", "", "", "", "", "",
           csv_num(est_space.value - est_family.value)});
    RunResult out;
    out.artifact = detail::output_path(cfg);
    w.write_file(out.artifact);
    return out;
}

inline RunResult run_experiment(const Config& cfg) {
    const std::string kind = cfg.get("experiment.kind");
    try {
        if (kind == "entropy") return run_entropy(cfg);
        if (kind == "skew-check") return run_skew_check(cfg);
        if (kind == "capacity") return run_capacity(cfg);
        if (kind == "stationary") return run_stationary(cfg);
        if (kind == "recurrence") return run_recurrence(cfg);
        if (kind == "case-zoo") return run_case_zoo(cfg);
        if (kind == "trace") return run_trace(cfg);
        if (kind == "gap-entropy") return run_gap_entropy(cfg);
        throw std::invalid_argument("unknown experiment kind '" + kind + "'");
    } catch (const std::invalid_argument& e) {
        return {2, e.what(), ""};
    } catch (const std::logic_error& e) {
        return {2, e.what(), ""};
    } catch (const std::runtime_error& e) {
        return {3, e.what(), ""};
    }
}

// ----- certificate re-verification ---------------------------------------

struct VerifyResult {
    bool ok = false;
    std::string message;
};

// Re-checks the pass columns of an emitted certificate CSV from its numeric
// columns alone (trace and case-zoo schemas are recognized by their headers).
inline VerifyResult verify_certificate(const CsvTable& t) {
    const auto need = [&](const char* col) {
        const int i = t.column(col);
        if (i < 0) throw std::invalid_argument(std::string("missing column '") + col + "'");
        return i;
    };
    const auto num = [](const std::string& s) {
        if (s.empty()) throw std::invalid_argument("empty numeric cell");
        return std::stod(s);
    };

    if (t.column("mismatches") >= 0) {
        const int c_row = need("row"), c_mis = need("mismatches"), c_bound = need("bound"),
                  c_pass = need("pass");
        bool all = true;
        std::size_t checked = 0;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& r = t.rows[i];
            if (r[std::size_t(c_row)] == "segment") {
                const bool expect = num(r[std::size_t(c_mis)]) < num(r[std::size_t(c_bound)]);
                if (csv_flag(expect) != r[std::size_t(c_pass)])
                    return {false, "row " + std::to_string(i + 2) +
                                       ": pass flag contradicts mismatches/bound"};
                all = all && expect;
                ++checked;
            } else if (r[std::size_t(c_row)] == "summary") {
                if (csv_flag(all) != r[std::size_t(c_pass)])
                    return {false, "summary pass flag contradicts segment rows"};
            }
        }
        if (checked == 0) return {false, "no segment rows found"};
        return {all, all ? "trace certificate consistent, all segments pass"
                         : "trace certificate consistent but failing"};
    }

    if (t.column("expect_lower") >= 0) {
        const int c_row = need("row"), c_up = need("upper"), c_lo = need("lower"),
                  c_bu = need("banach_upper"), c_bl = need("banach_lower"),
                  c_tv = need("tail_visited"), c_el = need("expect_lower"),
                  c_eu = need("expect_upper"), c_eb = need("expect_banach"),
                  c_eo = need("expect_omega"), c_zm = need("zero_max"),
                  c_pm = need("positive_min"), c_pass = need("pass");
        bool all = true;
        std::size_t checked = 0;
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& r = t.rows[i];
            if (r[std::size_t(c_row)] != "entry") continue;
            const double zm = num(r[std::size_t(c_zm)]), pm = num(r[std::size_t(c_pm)]);
            const auto want = [&](int flag_col, double v) {
                return r[std::size_t(flag_col)] == "1" ? v >= pm : v <= zm;
            };
            const bool expect = want(c_el, num(r[std::size_t(c_lo)])) &&
                                want(c_eu, num(r[std::size_t(c_up)])) &&
                                want(c_eb, num(r[std::size_t(c_bu)])) &&
                                num(r[std::size_t(c_bl)]) <= zm &&
                                r[std::size_t(c_tv)] == r[std::size_t(c_eo)];
            if (csv_flag(expect) != r[std::size_t(c_pass)])
                return {false, "row " + std::to_string(i + 2) +
                                   ": pass flag contradicts densities/thresholds"};
            all = all && expect;
            ++checked;
        }
        if (checked == 0) return {false, "no entry rows found"};
        return {all, all ? "case certificate consistent, all entries pass"
                         : "case certificate consistent but failing"};
    }

    return {false, "not a recognized certificate schema"};
}

}  // namespace sglab
