// Stokes graphs of y(z) dz: line tracing from turning points, minimal-cut
// verdicts, and detection of critical configurations.
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "curve.hpp"

namespace speccurve {

struct TurningPoint {
    cplx location;
    int multiplicity; // 1 = simple branch point, 2 = double root of y^2
    bool degeneration_warning = false; // another simple root closer than 10x tolerance
};

/// All turning points of the curve: cut endpoints (simple) followed by the
/// double roots, with a warning attached to near-coincident simple pairs.
inline std::vector<TurningPoint> turning_points(const SpectralCurve& curve) {
    std::vector<TurningPoint> tps;
    for (const auto& c : curve.cuts()) {
        tps.push_back({c.a_minus, 1});
        tps.push_back({c.a_plus, 1});
    }
    for (cplx a : curve.double_roots()) tps.push_back({a, 2});
    double scale = 1.0;
    for (const auto& t : tps) scale = std::max(scale, std::abs(t.location));
    const double tol = 1e-12 * scale;
    for (std::size_t i = 0; i < tps.size(); ++i)
        for (std::size_t j = i + 1; j < tps.size(); ++j)
            if (tps[i].multiplicity == 1 && tps[j].multiplicity == 1 &&
                std::abs(tps[i].location - tps[j].location) < 10.0 * tol)
                tps[i].degeneration_warning = tps[j].degeneration_warning = true;
    return tps;
}

/// G_j(z) = e^{-i arg S_j} int_{a_j^-}^{z} y(z'_+) dz' along the polyline
/// a_j^- -> waypoints... -> z. Re G_j is path independent; the overall sign
/// follows the standard branch of y on the first leg. The path must stay
/// clear of turning points.
inline cplx G_eval(const SpectralCurve& curve, int j, cplx z, std::vector<cplx> waypoints = {},
                   double rel_tol = 1e-11) {
    cplx a = curve.cuts()[static_cast<std::size_t>(j)].a_minus;
    if (z == a && waypoints.empty()) return 0.0; // empty integral
    std::vector<cplx> path;
    path.push_back(a);
    for (cplx wpt : waypoints) path.push_back(wpt);
    path.push_back(z);

    std::vector<cplx> tps;
    for (const auto& c : curve.cuts()) {
        tps.push_back(c.a_minus);
        tps.push_back(c.a_plus);
    }
    for (cplx al : curve.double_roots()) tps.push_back(al);
    double scale = 1.0;
    for (cplx t : tps) scale = std::max(scale, std::abs(t));
    for (std::size_t leg = 1; leg < path.size(); ++leg) {
        cplx p = path[leg - 1], q = path[leg];
        for (cplx t : tps) {
            if (t == a || t == z) continue;
            cplx ab = q - p;
            double len2 = std::norm(ab);
            double tt = len2 > 0.0 ? std::clamp(((t - p) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
            if (std::abs(t - (p + tt * ab)) < 1e-9 * scale)
                throw DomainError("G_eval: path passes through a turning point");
        }
    }

    // first leg from the branch point with the t^2 endpoint map, standard branch
    cplx total = 0.0;
    cplx z1 = path[1];
    total += integrate_from_sqrt_endpoint([&](cplx p) { return curve.y_offcut(p); }, a, z1, rel_tol).value;

    // remaining legs with continuous branch tracking seeded from y_std(z1)
    SqrtTracker track([Q = curve.y_squared()](cplx p) { return Q(p); }, z1, curve.y_offcut(z1));
    for (std::size_t leg = 2; leg < path.size(); ++leg) {
        cplx p = path[leg - 1], q = path[leg];
        cplx dirv = q - p;
        int n = 64;
        cplx prev = 0.0;
        for (;; n *= 2) {
            const GlRule& rule = gauss_legendre(n);
            std::vector<std::pair<double, double>> nw(rule.nodes.size());
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) nw[i] = {rule.nodes[i], rule.weights[i]};
            std::sort(nw.begin(), nw.end());
            SqrtTracker local = track;
            cplx acc = 0.0;
            for (const auto& [node, weight] : nw) {
                double t = 0.5 + 0.5 * node;
                cplx y = local.advance(p + t * dirv);
                acc += weight * y;
            }
            acc *= 0.5 * dirv;
            if (n > 64 && std::abs(acc - prev) <= rel_tol * std::max(std::abs(acc), 1e-300)) {
                prev = acc;
                break;
            }
            prev = acc;
            if (n >= 8192) break;
        }
        total += prev;
        track.advance(q);
    }
    double phase = std::arg(curve.cuts()[static_cast<std::size_t>(j)].S);
    return std::exp(cplx(0.0, -phase)) * total;
}

/// G_j evaluated at a_j^+ along the cut itself: equals 2 pi i |S_j| for a
/// consistent curve (Re ~ 0, Im ~ 2 pi |S_j|).
inline cplx G_cut_endpoint(const SpectralCurve& curve, int j, double rel_tol = 1e-11) {
    cplx Sj = period_integral(curve, j, rel_tol);
    double phase = std::arg(curve.cuts()[static_cast<std::size_t>(j)].S);
    return std::exp(cplx(0.0, -phase)) * 2.0 * pi * cplx(0.0, 1.0) * Sj;
}

struct EscapeTerminus {
    double direction; // arg z at the escape radius
};
using Terminus = std::variant<int, EscapeTerminus>; // turning-point index or escape

struct StokesLine {
    double phase;                 // arg S_j defining the line condition
    std::vector<cplx> samples;    // polyline from the emitting turning point
    Terminus terminus{EscapeTerminus{0.0}};
    int source_tp = -1;
    double initial_angle = 0.0;
    double max_re_g = 0.0;        // max |Re G| drift along the trace
    double im_g_end = 0.0;        // Im G at the far end (arc "mass")
    bool stalled = false;         // step-size underflow; samples are partial

    bool finite() const { return std::holds_alternative<int>(terminus); }
    double length() const {
        double L = 0.0;
        for (std::size_t i = 1; i < samples.size(); ++i) L += std::abs(samples[i] - samples[i - 1]);
        return L;
    }
};

struct TraceStallError : NumericalError {
    TraceStallError(const std::string& what, StokesLine partial)
        : NumericalError(what), line(std::move(partial)) {}
    StokesLine line;
};

namespace detail {

struct TraceScales {
    double capture;
    double escape;
    double min_pair;
};

inline TraceScales trace_scales(const SpectralCurve& curve, const std::vector<TurningPoint>& tps) {
    double min_pair = std::numeric_limits<double>::infinity();
    double max_mod = 0.0;
    for (std::size_t i = 0; i < tps.size(); ++i) {
        max_mod = std::max(max_mod, std::abs(tps[i].location));
        for (std::size_t j = i + 1; j < tps.size(); ++j)
            min_pair = std::min(min_pair, std::abs(tps[i].location - tps[j].location));
    }
    if (!std::isfinite(min_pair)) min_pair = std::max(max_mod, 1.0);
    double crit_mod = 0.0;
    for (cplx a : curve.potential().critical_points()) crit_mod = std::max(crit_mod, std::abs(a));
    return {1e-3 * min_pair, 10.0 * max_mod + crit_mod, min_pair};
}

/// Initial ray angles of the Stokes lines at a turning point of the given
/// multiplicity, from the local expansion of y.
inline std::vector<double> emission_angles(const SpectralCurve& curve, const TurningPoint& tp, double phase) {
    Poly Q = curve.y_squared();
    int m = tp.multiplicity;
    cplx coef;
    if (m == 1) {
        coef = psqrt(Q.derivative()(tp.location));
    } else {
        coef = psqrt(0.5 * Q.derivative().derivative()(tp.location));
    }
    // Re[e^{-i phase} c e^{i (m+2) theta / 2} rho^{(m+2)/2}] = 0 on each ray
    int count = m + 2;
    std::vector<double> out;
    double base = (0.5 * pi + phase - std::arg(coef)) * 2.0 / (m + 2);
    for (int k = 0; k < count; ++k) {
        double th = base + 2.0 * pi * k / (m + 2);
        th = std::remainder(th, 2.0 * pi);
        out.push_back(th);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Seed-leg integral e^{-i phase} int_{z0}^{z} y dz' from the local expansion
/// y ~ c (z-z0)^{m/2} at a turning point of multiplicity m.
inline cplx seed_leg_integral(cplx z, cplx z0, cplx y_at_z, int m, cplx eiphase) {
    // y(z) = c (z-z0)^{m/2} => int = 2/(m+2) * y(z) * (z-z0)
    return std::conj(eiphase) * (2.0 / (m + 2)) * y_at_z * (z - z0);
}

} // namespace detail

/// Trace the Stokes line of phase arg(S_j) leaving `start` along
/// `initial_angle` (one of the emission angles): arc-length tangent stepping
/// with projection back onto Re G = 0, stopping at a turning point (capture
/// radius) or the escape radius.
inline StokesLine trace_stokes_line(const SpectralCurve& curve, const std::vector<TurningPoint>& tps,
                                    int start_idx, double initial_angle, double phase) {
    const auto scales = detail::trace_scales(curve, tps);
    const TurningPoint& start = tps[static_cast<std::size_t>(start_idx)];
    Poly Q = curve.y_squared();
    cplx eiphase = std::exp(cplx(0.0, phase));

    StokesLine line;
    line.phase = phase;
    line.source_tp = start_idx;
    line.initial_angle = initial_angle;
    line.samples.push_back(start.location);

    auto nearest_tp = [&](cplx z, int exclude) {
        double d = std::numeric_limits<double>::infinity();
        int idx = -1;
        for (std::size_t i = 0; i < tps.size(); ++i) {
            if (static_cast<int>(i) == exclude) continue;
            double di = std::abs(z - tps[i].location);
            if (di < d) { d = di; idx = static_cast<int>(i); }
        }
        return std::pair<double, int>(d, idx);
    };

    // seed a small step along the analytic direction
    double ds0 = std::min(0.1 * scales.min_pair, 1e-3 * scales.escape);
    cplx z = start.location + ds0 * std::exp(cplx(0.0, initial_angle));
    SqrtTracker y_track([&Q](cplx p) { return Q(p); }, z, psqrt(Q(z)));
    cplx y = y_track.value();
    // accumulated e^{-i phase} int y dz; the seed leg is nearly pure imaginary
    cplx G = detail::seed_leg_integral(z, start.location, y, start.multiplicity, eiphase);
    cplx dir = std::exp(cplx(0.0, initial_angle));
    line.samples.push_back(z);

    double arc = ds0;
    const int max_steps = 400000;
    for (int step_i = 0; step_i < max_steps; ++step_i) {
        auto [d_near, idx_near] = nearest_tp(z, -1);
        bool past_start = arc > 3.0 * scales.capture;
        if (d_near < scales.capture && (past_start || idx_near != start_idx)) {
            line.terminus = idx_near;
            line.samples.push_back(tps[static_cast<std::size_t>(idx_near)].location);
            line.im_g_end = G.imag();
            return line;
        }
        if (std::abs(z) > scales.escape) {
            line.terminus = EscapeTerminus{std::arg(z)};
            line.im_g_end = G.imag();
            return line;
        }
        double ds = std::clamp(0.05 * d_near, 1e-6 * scales.min_pair, 0.02 * scales.escape);
        if (ds < 1e-13 * scales.min_pair) {
            line.stalled = true;
            line.im_g_end = G.imag();
            throw TraceStallError("trace_stokes_line: step-size underflow", line);
        }
        auto tangent = [&](cplx yloc) {
            cplx t = cplx(0.0, 1.0) * eiphase * std::conj(yloc) / std::abs(yloc);
            if (std::real(t * std::conj(dir)) < 0.0) t = -t;
            return t;
        };
        // midpoint predictor with tracked branch
        cplx t1 = tangent(y);
        cplx zm = z + 0.5 * ds * t1;
        cplx ym = y_track.advance(zm);
        cplx t2 = tangent(ym);
        cplx z_new = z + ds * t2;
        cplx y_new = y_track.advance(z_new);
        G += std::conj(eiphase) * 0.5 * (y + y_new) * (z_new - z);
        // Newton projection transverse to the line: F = Re G
        for (int corr = 0; corr < 2; ++corr) {
            double F = G.real();
            cplx Gp = std::conj(eiphase) * y_new;
            if (std::abs(Gp) == 0.0) break;
            cplx dz = -F * std::conj(Gp) / (std::abs(Gp) * std::abs(Gp));
            if (std::abs(dz) > 0.5 * ds) dz *= 0.5 * ds / std::abs(dz);
            if (std::abs(dz) < 1e-18) break;
            cplx z_corr = z_new + dz;
            cplx y_corr = y_track.advance(z_corr);
            G += std::conj(eiphase) * 0.5 * (y_new + y_corr) * dz;
            z_new = z_corr;
            y_new = y_corr;
        }
        dir = (z_new - z) / std::abs(z_new - z);
        z = z_new;
        y = y_new;
        arc += ds;
        line.max_re_g = std::max(line.max_re_g, std::abs(G.real()));
        line.samples.push_back(z);
    }
    line.stalled = true;
    line.im_g_end = G.imag();
    throw TraceStallError("trace_stokes_line: step budget exhausted", line);
}

struct CriticalityEvent {
    enum class Kind { zero_on_cut, finite_line_to_zero, line_crossing };
    Kind kind;
    cplx location;
    int cut_index = -1;   // for zero_on_cut: which cut
    int line_a = -1;      // involved line indices
    int line_b = -1;
};

struct StokesGraph {
    std::vector<TurningPoint> tps;
    std::vector<StokesLine> lines;
    std::vector<double> phases;            // distinct arg S_j values traced
    std::vector<bool> minimal_cut_flags;   // per cut index
    std::vector<int> minimal_cut_witness;  // line index or -1
    std::vector<CriticalityEvent> events;
    std::vector<std::string> trace_errors;
};

namespace detail {

inline bool segments_intersect(cplx p1, cplx p2, cplx q1, cplx q2, cplx& where) {
    cplx r = p2 - p1, s = q2 - q1;
    double denom = r.real() * s.imag() - r.imag() * s.real();
    if (std::abs(denom) < 1e-30) return false;
    cplx qp = q1 - p1;
    double t = (qp.real() * s.imag() - qp.imag() * s.real()) / denom;
    double u = (qp.real() * r.imag() - qp.imag() * r.real()) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
    where = p1 + t * r;
    return true;
}

inline double dist_to_polyline(cplx p, const std::vector<cplx>& poly) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < poly.size(); ++i) {
        cplx a = poly[i - 1], b = poly[i];
        cplx ab = b - a;
        double len2 = std::norm(ab);
        double t = len2 > 0.0 ? std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
        d = std::min(d, std::abs(p - (a + t * ab)));
    }
    return d;
}

inline bool polyline_self_intersects(const std::vector<cplx>& poly) {
    for (std::size_t i = 1; i < poly.size(); ++i)
        for (std::size_t j = i + 2; j < poly.size(); ++j) {
            // skip adjacent segments which share a vertex
            cplx where;
            if (segments_intersect(poly[i - 1], poly[i], poly[j - 1], poly[j], where)) return true;
        }
    return false;
}

} // namespace detail

/// Build the full Stokes graph: 3 lines per simple turning point at the phase
/// of its own cut, 4 lines per double root for each distinct cut phase.
/// Assembles minimal-cut flags and criticality events. `phase_override`
/// supplies the per-cut phases when arg S_j is not usable (degenerate S).
inline StokesGraph stokes_graph(const SpectralCurve& curve, std::vector<double> phase_override = {}) {
    StokesGraph g;
    g.tps = turning_points(curve);
    const auto scales = detail::trace_scales(curve, g.tps);

    auto cut_phase = [&](int j) {
        if (!phase_override.empty()) return phase_override[static_cast<std::size_t>(j)];
        return std::arg(curve.cuts()[static_cast<std::size_t>(j)].S);
    };
    // distinct phases
    for (int j = 0; j < curve.num_cuts(); ++j) {
        double ph = cut_phase(j);
        bool found = false;
        for (double q : g.phases)
            if (std::abs(std::remainder(ph - q, 2.0 * pi)) < 1e-12) found = true;
        if (!found) g.phases.push_back(ph);
    }

    auto trace_from = [&](int tp_idx, double phase) {
        for (double ang : detail::emission_angles(curve, g.tps[static_cast<std::size_t>(tp_idx)], phase)) {
            try {
                g.lines.push_back(trace_stokes_line(curve, g.tps, tp_idx, ang, phase));
            } catch (const TraceStallError& e) {
                g.lines.push_back(e.line);
                g.trace_errors.push_back(e.what());
            }
        }
    };

    for (int j = 0; j < curve.num_cuts(); ++j) {
        double ph = cut_phase(j);
        trace_from(2 * j, ph);
        trace_from(2 * j + 1, ph);
    }
    int n_simple = 2 * curve.num_cuts();
    for (std::size_t r = 0; r < curve.double_roots().size(); ++r)
        for (double ph : g.phases) trace_from(n_simple + static_cast<int>(r), ph);

    // minimal-cut flags: a finite line joining a_j^- to a_j^+ at phase arg S_j
    g.minimal_cut_flags.assign(static_cast<std::size_t>(curve.num_cuts()), false);
    g.minimal_cut_witness.assign(static_cast<std::size_t>(curve.num_cuts()), -1);
    for (std::size_t li = 0; li < g.lines.size(); ++li) {
        const auto& L = g.lines[li];
        if (!L.finite()) continue;
        int t = std::get<int>(L.terminus);
        for (int j = 0; j < curve.num_cuts(); ++j) {
            double ph = cut_phase(j);
            if (std::abs(std::remainder(L.phase - ph, 2.0 * pi)) > 1e-12) continue;
            int e0 = 2 * j, e1 = 2 * j + 1;
            if ((L.source_tp == e0 && t == e1) || (L.source_tp == e1 && t == e0)) {
                if (!g.minimal_cut_flags[static_cast<std::size_t>(j)]) {
                    g.minimal_cut_flags[static_cast<std::size_t>(j)] = true;
                    g.minimal_cut_witness[static_cast<std::size_t>(j)] = static_cast<int>(li);
                }
            }
        }
    }

    // criticality events
    for (int j = 0; j < curve.num_cuts(); ++j) {
        int wi = g.minimal_cut_witness[static_cast<std::size_t>(j)];
        if (wi < 0) continue;
        const auto& L = g.lines[static_cast<std::size_t>(wi)];
        double band = 1e-3 * L.length();
        for (std::size_t r = 0; r < curve.double_roots().size(); ++r) {
            cplx alpha = curve.double_roots()[r];
            if (detail::dist_to_polyline(alpha, L.samples) < band)
                g.events.push_back({CriticalityEvent::Kind::zero_on_cut, alpha, j, wi, -1});
        }
    }
    for (std::size_t li = 0; li < g.lines.size(); ++li) {
        const auto& L = g.lines[li];
        if (!L.finite()) continue;
        int t = std::get<int>(L.terminus);
        bool src_double = g.tps[static_cast<std::size_t>(L.source_tp)].multiplicity == 2;
        bool dst_double = g.tps[static_cast<std::size_t>(t)].multiplicity == 2;
        if (src_double != dst_double) {
            cplx loc = src_double ? g.tps[static_cast<std::size_t>(L.source_tp)].location
                                  : g.tps[static_cast<std::size_t>(t)].location;
            g.events.push_back({CriticalityEvent::Kind::finite_line_to_zero, loc, -1,
                                static_cast<int>(li), -1});
        }
    }
    // crossings between lines of different phases only (equal-phase lines cannot cross)
    for (std::size_t i = 0; i < g.lines.size(); ++i)
        for (std::size_t j = i + 1; j < g.lines.size(); ++j) {
            const auto& A = g.lines[i];
            const auto& B = g.lines[j];
            if (std::abs(std::remainder(A.phase - B.phase, 2.0 * pi)) < 1e-12) continue;
            bool found = false;
            for (std::size_t p = 1; p < A.samples.size() && !found; ++p)
                for (std::size_t q = 1; q < B.samples.size() && !found; ++q) {
                    cplx where;
                    if (!detail::segments_intersect(A.samples[p - 1], A.samples[p],
                                                    B.samples[q - 1], B.samples[q], where))
                        continue;
                    // ignore touches at a shared turning point
                    bool at_tp = false;
                    for (const auto& tp : g.tps)
                        if (std::abs(where - tp.location) < 2.0 * scales.capture) at_tp = true;
                    if (at_tp) continue;
                    g.events.push_back({CriticalityEvent::Kind::line_crossing, where, -1,
                                        static_cast<int>(i), static_cast<int>(j)});
                    found = true;
                }
        }
    return g;
}

/// True iff a finite Stokes line of cut j's phase connects its endpoints.
inline bool minimal_cut_exists(const StokesGraph& g, int j) {
    return g.minimal_cut_flags[static_cast<std::size_t>(j)];
}

/// The events recorded during graph assembly.
inline const std::vector<CriticalityEvent>& detect_criticality(const StokesGraph& g) {
    return g.events;
}

/// Unique finite connections (unordered turning-point pairs per phase).
inline std::vector<std::array<int, 2>> finite_connections(const StokesGraph& g) {
    std::vector<std::array<int, 2>> out;
    for (const auto& L : g.lines) {
        if (!L.finite() || L.stalled) continue;
        int a = L.source_tp, b = std::get<int>(L.terminus);
        if (a > b) std::swap(a, b);
        bool seen = false;
        for (const auto& c : out)
            if (c[0] == a && c[1] == b) seen = true;
        if (!seen) out.push_back({a, b});
    }
    return out;
}

} // namespace speccurve
