// Critical loci of the one-cut cubic in the S and lambda planes, the
// cut-splitting transition scan, and the Seiberg-Witten singular point.
#pragma once

#include "prepotential.hpp"
#include "stokes.hpp"

namespace speccurve {

// ---------------------------------------------------------------------------
// Critical residual Re G_k(-beta_k) = 0 in closed form and by quadrature
// ---------------------------------------------------------------------------

/// The complex quantity whose real part defines the critical locus,
///   (w/3S) sigma sqrt(6 beta^2 - 2w)
///   + log(sqrt(beta/2S) (-2 beta + sigma sqrt(6 beta^2 - 2w))),
/// for a given square-root sign sigma (the two signs give opposite real
/// parts, so the zero locus does not depend on the choice).
inline cplx critical_inner_closed(cplx w, cplx S, int k, int sigma) {
    cplx beta = cubic_beta_branch(w, S, k);
    cplx p = static_cast<double>(sigma) * psqrt(6.0 * beta * beta - 2.0 * w);
    return w / (3.0 * S) * p + std::log(psqrt(beta / (2.0 * S)) * (-2.0 * beta + p));
}

inline double critical_residual_closed(cplx w, cplx S, int k, int sigma) {
    return critical_inner_closed(w, S, k, sigma).real();
}

/// Independent oracle: Re G_k(-beta_k) / (-2|S|) by direct quadrature of
/// y dz from the cut endpoint to the double root. The sign inherits the
/// standard branch on the first integration leg.
inline double critical_residual_quad(cplx w, cplx S, int k) {
    SpectralCurve c = one_cut_cubic_curve(w, S, k);
    cplx target = -c.cuts()[0].beta();
    cplx G;
    try {
        G = G_eval(c, 0, target);
    } catch (const DomainError&) {
        // straight path clipped a turning point: detour sideways
        cplx a = c.cuts()[0].a_minus;
        cplx mid = 0.5 * (a + target) + cplx(0.0, 1.0) * (target - a) * 0.4;
        G = G_eval(c, 0, target, {mid});
    }
    return -G.real() / (2.0 * std::abs(S));
}

/// Closed-form residual with the square-root sign seeded from the defining
/// integral at the evaluation point.
inline double critical_residual_S(cplx w, cplx S, int k) {
    double quad = critical_residual_quad(w, S, k);
    double plus = critical_residual_closed(w, S, k, +1);
    return (std::abs(plus - quad) <= std::abs(-plus - quad)) ? plus : -plus;
}

/// Residual of the critical-locus equation in the quantum-parameter variable,
///   Re[ ± (w/3 lambda) sqrt(4w-6 lambda)/sqrt(w-lambda)
///       + log((sqrt(4w-6 lambda) ∓ 2 sqrt(w-lambda))/sqrt(2 lambda)) ].
inline double critical_residual_lambda(cplx w, cplx lambda, int sign) {
    if (lambda == cplx(0.0) || lambda == w)
        throw DomainError("critical_residual_lambda: lambda must avoid 0 and w");
    cplx r1 = psqrt(4.0 * w - 6.0 * lambda);
    cplx r2 = psqrt(w - lambda);
    double sg = static_cast<double>(sign);
    cplx val = sg * w / (3.0 * lambda) * r1 / r2 + std::log((r1 - sg * 2.0 * r2) / psqrt(2.0 * lambda));
    return val.real();
}

// ---------------------------------------------------------------------------
// Locus tracing (predictor-corrector on the implicit real curve)
// ---------------------------------------------------------------------------

enum class LocusPlane { S_plane, lambda_plane };

struct CriticalLocus {
    int k = 0;                   // branch index (S-plane) or ± sign (lambda-plane)
    LocusPlane plane = LocusPlane::S_plane;
    std::vector<cplx> polyline;
    bool closed = false;
};

namespace detail {

/// Sign-continuous residual evaluator: keeps the complex inner value
/// continuous along an evaluation path so Re does not flip between the two
/// square-root candidates.
class ResidualTracker {
public:
    ResidualTracker(cplx w, int k, LocusPlane plane, int lambda_sign)
        : w_(w), k_(k), plane_(plane), lsign_(lambda_sign) {}

    double eval(cplx z) {
        if (plane_ == LocusPlane::S_plane) {
            cplx plus = critical_inner_closed(w_, z, k_, +1);
            cplx minus = critical_inner_closed(w_, z, k_, -1);
            cplx pick = choose(plus, minus);
            prev_ = pick;
            has_prev_ = true;
            return pick.real();
        }
        cplx r1 = psqrt(4.0 * w_ - 6.0 * z);
        cplx r2 = psqrt(w_ - z);
        auto val = [&](double sg) {
            return sg * w_ / (3.0 * z) * r1 / r2 + std::log((r1 - sg * 2.0 * r2) / psqrt(2.0 * z));
        };
        cplx plus = val(static_cast<double>(lsign_));
        cplx minus = val(-static_cast<double>(lsign_));
        cplx pick = choose(plus, minus);
        prev_ = pick;
        has_prev_ = true;
        return pick.real();
    }

    void seed_from_quadrature(cplx z) {
        if (plane_ != LocusPlane::S_plane) return;
        double q = critical_residual_quad(w_, z, k_);
        cplx plus = critical_inner_closed(w_, z, k_, +1);
        prev_ = (std::abs(plus.real() - q) <= std::abs(-plus.real() - q))
                    ? plus
                    : critical_inner_closed(w_, z, k_, -1);
        has_prev_ = true;
    }

private:
    cplx choose(cplx a, cplx b) const {
        if (!has_prev_) return a;
        return (std::abs(a - prev_) <= std::abs(b - prev_)) ? a : b;
    }
    cplx w_;
    int k_;
    LocusPlane plane_;
    int lsign_;
    cplx prev_;
    bool has_prev_ = false;
};

} // namespace detail

/// Bisect sign changes of the residual along the vertical line Re = probe_re.
inline std::vector<cplx> find_locus_seeds(cplx w, int k, double probe_re, LocusPlane plane = LocusPlane::S_plane,
                                          int lambda_sign = +1, double im_lo = 0.0, double im_hi = 0.0,
                                          int samples = 400) {
    double scale = std::pow(std::abs(w), 1.5);
    if (plane == LocusPlane::lambda_plane) scale = std::abs(w);
    if (im_lo == 0.0 && im_hi == 0.0) {
        im_lo = -4.0 * scale;
        im_hi = 4.0 * scale;
    }
    detail::ResidualTracker tracker(w, k, plane, lambda_sign);
    std::vector<cplx> seeds;
    double prev_val = 0.0;
    bool have_prev = false;
    for (int i = 0; i <= samples; ++i) {
        double im = im_lo + (im_hi - im_lo) * i / samples;
        cplx z(probe_re, im);
        if (plane == LocusPlane::lambda_plane && (std::abs(z) < 1e-9 || std::abs(z - w) < 1e-9)) continue;
        double v;
        try {
            v = tracker.eval(z);
        } catch (const NumericalError&) {
            have_prev = false;
            continue;
        }
        if (have_prev && std::signbit(v) != std::signbit(prev_val)) {
            double lo = im_lo + (im_hi - im_lo) * (i - 1) / samples, hi = im;
            double flo = prev_val;
            for (int iter = 0; iter < 60; ++iter) {
                double mid = 0.5 * (lo + hi);
                double fm = tracker.eval(cplx(probe_re, mid));
                if (std::signbit(fm) == std::signbit(flo)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            seeds.push_back(cplx(probe_re, 0.5 * (lo + hi)));
        }
        prev_val = v;
        have_prev = true;
    }
    return seeds;
}

/// Predictor-corrector tracing of the implicit curve residual = 0 from a
/// seed on the locus. Closes when returning near the seed; otherwise traces
/// both directions and stitches, stopping at the plane's singular points.
inline CriticalLocus trace_locus(cplx w, int k, cplx seed, LocusPlane plane = LocusPlane::S_plane,
                                 int lambda_sign = +1) {
    double scale = (plane == LocusPlane::S_plane) ? std::pow(std::abs(w), 1.5) : std::abs(w);
    double step = 1e-2 * scale;
    double fd = 1e-6 * scale;
    double corr_tol = 1e-10;
    double capture = 2.0 * step;

    auto singular_stop = [&](cplx z) {
        if (plane == LocusPlane::S_plane) {
            auto [sp, sm] = branch_points_S(w);
            return std::abs(z) < 0.25 * step || std::abs(z - sp) < 0.25 * step ||
                   std::abs(z - sm) < 0.25 * step;
        }
        return std::abs(z) < 0.25 * step || std::abs(z - w) < 0.25 * step;
    };

    auto trace_dir = [&](double orientation) {
        std::vector<cplx> pts;
        detail::ResidualTracker tracker(w, k, plane, lambda_sign);
        if (plane == LocusPlane::S_plane) tracker.seed_from_quadrature(seed);
        cplx z = seed;
        pts.push_back(z);
        cplx prev_tangent = 0.0;
        bool closed = false;
        for (int i = 0; i < 20000; ++i) {
            double fx = tracker.eval(z + fd) - tracker.eval(z - fd);
            double fy = tracker.eval(z + cplx(0.0, fd)) - tracker.eval(z - cplx(0.0, fd));
            cplx grad(fx / (2.0 * fd), fy / (2.0 * fd));
            if (std::abs(grad) < 1e-14) break;
            cplx tangent = cplx(0.0, 1.0) * grad / std::abs(grad) * orientation;
            if (prev_tangent != cplx(0.0) && std::real(tangent * std::conj(prev_tangent)) < 0.0)
                tangent = -tangent;
            cplx z_new = z + step * tangent;
            // Newton correction transverse to the tangent
            bool ok = false;
            for (int c = 0; c < 12; ++c) {
                double F = tracker.eval(z_new);
                if (std::abs(F) < corr_tol) {
                    ok = true;
                    break;
                }
                double gx = tracker.eval(z_new + fd) - tracker.eval(z_new - fd);
                double gy = tracker.eval(z_new + cplx(0.0, fd)) - tracker.eval(z_new - cplx(0.0, fd));
                cplx g(gx / (2.0 * fd), gy / (2.0 * fd));
                if (std::abs(g) < 1e-14) break;
                z_new -= F * g / (std::abs(g) * std::abs(g));
            }
            if (!ok) break; // corrector divergence: return the partial locus
            prev_tangent = tangent;
            z = z_new;
            pts.push_back(z);
            if (singular_stop(z)) break;
            if (i > 5 && std::abs(z - seed) < capture) {
                closed = true;
                break;
            }
        }
        return std::pair<std::vector<cplx>, bool>(std::move(pts), closed);
    };

    auto [fwd, closed] = trace_dir(+1.0);
    CriticalLocus locus;
    locus.k = (plane == LocusPlane::S_plane) ? k : lambda_sign;
    locus.plane = plane;
    locus.closed = closed;
    if (closed) {
        locus.polyline = std::move(fwd);
        return locus;
    }
    auto [bwd, closed2] = trace_dir(-1.0);
    // stitch: reversed backward trace + forward trace
    locus.polyline.assign(bwd.rbegin(), bwd.rend());
    locus.polyline.insert(locus.polyline.end(), fwd.begin() + 1, fwd.end());
    locus.closed = closed2;
    return locus;
}

inline CriticalLocus trace_locus_S(cplx w, int k, cplx seed) {
    return trace_locus(w, k, seed, LocusPlane::S_plane);
}

inline CriticalLocus trace_locus_lambda(cplx w, int sign, cplx seed) {
    return trace_locus(w, 0, seed, LocusPlane::lambda_plane, sign);
}

/// Crossings of a traced locus with the vertical line Re = x, by sign change
/// on consecutive polyline segments.
inline std::vector<cplx> locus_line_crossings(const CriticalLocus& locus, double x) {
    std::vector<cplx> out;
    const auto& p = locus.polyline;
    for (std::size_t i = 1; i < p.size(); ++i) {
        double a = p[i - 1].real() - x, b = p[i].real() - x;
        if (a == 0.0) out.push_back(p[i - 1]);
        if ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)) {
            double t = a / (a - b);
            out.push_back(p[i - 1] + t * (p[i] - p[i - 1]));
        }
    }
    return out;
}

/// Point-in-polygon (winding) test for region classification against a
/// closed locus.
inline bool locus_contains(const CriticalLocus& locus, cplx z) {
    const auto& p = locus.polyline;
    double angle = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i)
        angle += std::arg((p[i] - z) / (p[i - 1] - z));
    if (!p.empty()) angle += std::arg((p.front() - z) / (p.back() - z));
    return std::abs(angle) > pi;
}

// ---------------------------------------------------------------------------
// Splitting of one cut: pinch analysis and the transition scan
// ---------------------------------------------------------------------------

/// Data of a critical one-cut configuration: the double root on the cut and
/// the partial masses of the two sub-arcs.
struct PinchSplit {
    cplx alpha;      // the double root -beta on the cut
    double r1;       // |S_1| fraction carried by the arc from a^- to alpha
    cplx tangent;    // cut direction at the pinch (from a^- toward a^+)
    std::vector<cplx> arc1, arc2; // traced sub-arcs
};

namespace detail {

inline double polyline_mass(const SpectralCurve& curve, const std::vector<cplx>& arc) {
    // trapezoid of |y| |dz| over the traced polyline
    double m = 0.0;
    for (std::size_t i = 1; i < arc.size(); ++i) {
        double y0 = std::abs(psqrt(curve.y_squared()(arc[i - 1])));
        double y1 = std::abs(psqrt(curve.y_squared()(arc[i])));
        m += 0.5 * (y0 + y1) * std::abs(arc[i] - arc[i - 1]);
    }
    return m;
}

} // namespace detail

/// Identify the two finite Stokes arcs a^- -> alpha -> a^+ of a critical
/// one-cut configuration and the mass split between them.
inline PinchSplit analyze_critical_pinch(const SpectralCurve& curve, const StokesGraph& graph) {
    int dbl = -1;
    for (std::size_t i = 0; i < graph.tps.size(); ++i)
        if (graph.tps[i].multiplicity == 2) dbl = static_cast<int>(i);
    if (dbl < 0) throw DomainError("analyze_critical_pinch: no double root");
    PinchSplit out;
    out.alpha = graph.tps[static_cast<std::size_t>(dbl)].location;

    auto arc_between = [&](int tp_a, int tp_b) -> std::vector<cplx> {
        for (const auto& L : graph.lines) {
            if (!L.finite() || L.stalled) continue;
            int d = std::get<int>(L.terminus);
            if (L.source_tp == tp_a && d == tp_b) return L.samples;
            if (L.source_tp == tp_b && d == tp_a) {
                std::vector<cplx> rev(L.samples.rbegin(), L.samples.rend());
                return rev;
            }
        }
        throw NumericalError("analyze_critical_pinch: missing finite arc through the double root");
    };
    out.arc1 = arc_between(0, dbl); // a^- to alpha
    out.arc2 = arc_between(dbl, 1); // alpha to a^+
    double m1 = detail::polyline_mass(curve, out.arc1);
    double m2 = detail::polyline_mass(curve, out.arc2);
    out.r1 = m1 / (m1 + m2);
    // tangent at the pinch from the last arc1 step
    std::size_t n = out.arc1.size();
    cplx t = out.arc1[n - 1] - out.arc1[n - 2 < n ? n - 2 : 0];
    out.tangent = t / std::abs(t);
    return out;
}

/// Open the pinch of a critical one-cut curve into a two-cut curve with
/// partial parameters (S1, S2): seeds the four endpoints from the sub-arc
/// geometry and runs the Newton solver, trying a ladder of gap guesses.
inline SpectralCurve split_two_cut_from_pinch(cplx w, const SpectralCurve& critical, const PinchSplit& pinch,
                                              cplx S1, cplx S2) {
    cplx a = critical.cuts()[0].a_minus;
    cplx b = critical.cuts()[0].a_plus;
    double cut_len = std::abs(b - a);
    cplx S_c = critical.cuts()[0].S;
    double rel = std::abs(S1 + S2 - S_c) / std::abs(S_c) + std::abs(std::arg((S2 / S1) *
                     (std::abs(S1) / std::abs(S2))));
    double base = cut_len * std::sqrt(std::max(rel, 1e-8));
    for (double f : {0.35, 0.18, 0.6, 0.09, 1.0, 0.045}) {
        double eps = f * base;
        std::array<cplx, 4> guess{a, pinch.alpha - eps * pinch.tangent, pinch.alpha + eps * pinch.tangent, b};
        try {
            return solve_two_cut_cubic(w, S1, S2, guess);
        } catch (const NumericalError&) {
            continue;
        }
    }
    throw NoConvergenceError("split_two_cut_from_pinch: no seed converged",
                             {a, pinch.alpha, pinch.alpha, b});
}

} // namespace speccurve
