// Normalized holomorphic and third-kind differentials on the hyperelliptic
// curve, Abelian integrals with logarithmic regularization, and the
// prepotential Hessian expressed through them.
#pragma once

#include "curve.hpp"

namespace speccurve {

/// dphi_j = p_j(z)/w(z) dz (deg p_j <= s-2) and dOmega_0 = P0(z)/w(z) dz
/// (deg P0 = s-1, leading coefficient 1).
struct DifferentialBasis {
    std::vector<Poly> p_polys;
    Poly P0;
    double condition = 1.0; // of the normalization solve
};

namespace detail {

/// Counterclockwise A_j-contour integral of f(z)/w(z) dz on a Bernstein
/// ellipse with foci at the cut endpoints; trapezoid rule, doubled until the
/// relative change drops below rel_tol.
template <class F>
inline cplx a_period(const BranchSqrt& b, int j, F&& f_over_w_numerator, double rel_tol = 1e-11) {
    cplx m = b.midpoint(j), h = b.half_diff(j);
    double d_near = std::numeric_limits<double>::infinity();
    for (int k = 0; k < b.num_cuts(); ++k) {
        if (k == j) continue;
        d_near = std::min({d_near, std::abs(b.a_minus(k) - b.a_minus(j)), std::abs(b.a_minus(k) - b.a_plus(j)),
                           std::abs(b.a_plus(k) - b.a_minus(j)), std::abs(b.a_plus(k) - b.a_plus(j))});
    }
    if (!std::isfinite(d_near)) d_near = 2.0 * std::abs(h);
    double eta = std::asinh(0.25 * d_near / std::abs(h));
    auto sample = [&](double t) {
        cplx u = std::cos(cplx(t, -eta));
        cplx du = -std::sin(cplx(t, -eta));
        cplx z = m + h * u;
        return f_over_w_numerator(z) / b.eval_offcut(z) * h * du;
    };
    int n = 64;
    cplx prev = 0.0;
    double prev_change = std::numeric_limits<double>::infinity();
    for (;; n *= 2) {
        cplx acc = 0.0;
        double l1 = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx v = sample(2.0 * pi * i / n);
            acc += v;
            l1 += std::abs(v);
        }
        acc *= 2.0 * pi / n;
        l1 *= 2.0 * pi / n;
        if (n > 64) {
            double change = std::abs(acc - prev);
            // the integral may be a cancellation-exact zero; measure against
            // the L1 mass of the integrand as well as the value itself
            if (change <= rel_tol * std::max(std::abs(acc), 1e-4 * l1 + 1e-300)) return acc;
            if (change > 0.5 * prev_change && change <= 1e-12 * l1) return acc; // roundoff plateau
            prev_change = change;
        }
        prev = acc;
        if (n >= 65536) throw AccuracyError("a_period: trapezoid did not converge", prev_change);
    }
}

/// Ray from z0 pointing away from the centroid of all branch points, rotated
/// in small increments if it passes too close to another cut segment.
inline cplx safe_ray_direction(const BranchSqrt& b, cplx z0) {
    cplx centroid = 0.0;
    for (cplx p : b.branch_points()) centroid += p;
    centroid /= static_cast<double>(b.branch_points().size());
    cplx dir = z0 - centroid;
    if (std::abs(dir) < 1e-12) dir = 1.0;
    dir /= std::abs(dir);
    double scale = 1.0;
    for (cplx p : b.branch_points()) scale = std::max(scale, std::abs(p - z0));
    auto clear = [&](cplx d) {
        for (int k = 0; k < b.num_cuts(); ++k) {
            cplx p = b.a_minus(k), q = b.a_plus(k);
            // distance from segment [p,q] to the ray z0 + t d, t in (0, 100 scale]
            for (double t : {0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.5, 3.0, 6.0, 12.0, 25.0, 50.0, 100.0}) {
                cplx zt = z0 + t * scale * d;
                cplx ab = q - p;
                double len2 = std::norm(ab);
                double tt = len2 > 0.0 ? std::clamp(((zt - p) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
                if (std::abs(zt - (p + tt * ab)) < 0.02 * scale && std::abs(zt - z0) > 1e-9 * scale) return false;
            }
        }
        return true;
    };
    for (int k = 0; k < 18; ++k) {
        double rot = (k % 2 == 0 ? 1.0 : -1.0) * (k + 1) / 2 * (pi / 9.0);
        cplx cand = (k == 0) ? dir : dir * std::exp(cplx(0.0, rot));
        if (clear(cand)) return cand;
    }
    return dir;
}

/// log z at z0 on the branch reached by continuing the principal logarithm
/// inward from infinity along the ray z0 + t*dir.
inline cplx log_continued_from_infinity(cplx z0, cplx dir, double far_scale) {
    cplx z_far = z0 + far_scale * dir;
    cplx lg = std::log(z_far);
    // walk back accumulating arg increments (each step small, no wrap)
    const int steps = 256;
    cplx prev = z_far;
    for (int i = 1; i <= steps; ++i) {
        double t = far_scale * (1.0 - static_cast<double>(i) / steps);
        cplx cur = z0 + t * dir;
        lg += std::log(cur / prev);
        prev = cur;
    }
    return lg;
}

} // namespace detail

/// Canonical basis of normalized holomorphic differentials: solves the
/// (s-1)x(s-1) linear system of A-period quadratures for the p_j.
inline DifferentialBasis holomorphic_basis(const SpectralCurve& curve, double rel_tol = 1e-11) {
    int s = curve.num_cuts();
    DifferentialBasis out;
    if (s < 2) { out.P0 = Poly::constant(1.0); return out; }
    const BranchSqrt& b = curve.branch();
    int dim = s - 1;
    std::vector<cplx> M(static_cast<std::size_t>(dim * dim));
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k)
            M[static_cast<std::size_t>(i * dim + k)] =
                detail::a_period(b, i, [k](cplx z) { return std::pow(z, k); }, rel_tol);
    double cond = 1.0;
    for (int j = 0; j < dim; ++j) {
        std::vector<cplx> rhs(static_cast<std::size_t>(dim), 0.0);
        rhs[static_cast<std::size_t>(j)] = 1.0;
        auto sol = solve_dense(M, rhs);
        cond = std::max(cond, sol.condition_estimate);
        out.p_polys.emplace_back(std::move(sol.x));
    }
    out.condition = cond;
    out.P0 = Poly::constant(1.0);
    return out;
}

/// Third-kind normalized differential dOmega_0 = P0/w dz with poles only at
/// the two infinities: P0 monic of degree s-1, lower coefficients fixed by
/// vanishing A-periods.
inline DifferentialBasis omega0(const SpectralCurve& curve, double rel_tol = 1e-11) {
    int s = curve.num_cuts();
    DifferentialBasis out = holomorphic_basis(curve, rel_tol);
    if (s == 1) { out.P0 = Poly::constant(1.0); return out; }
    const BranchSqrt& b = curve.branch();
    int dim = s - 1;
    std::vector<cplx> M(static_cast<std::size_t>(dim * dim));
    std::vector<cplx> rhs(static_cast<std::size_t>(dim));
    for (int i = 0; i < dim; ++i) {
        for (int k = 0; k < dim; ++k)
            M[static_cast<std::size_t>(i * dim + k)] =
                detail::a_period(b, i, [k](cplx z) { return std::pow(z, k); }, rel_tol);
        rhs[static_cast<std::size_t>(i)] =
            -detail::a_period(b, i, [s](cplx z) { return std::pow(z, s - 1); }, rel_tol);
    }
    auto sol = solve_dense(M, rhs);
    out.condition = std::max(out.condition, sol.condition_estimate);
    std::vector<cplx> coeffs = sol.x;
    coeffs.push_back(1.0);
    out.P0 = Poly(std::move(coeffs));
    return out;
}

/// Abelian integrals phi_j(u) = int_{inf_1}^{u} dphi_j and the regularized
/// Omega_0(u) = lim (int_{u0}^{u} dOmega_0 + log u0), both along first-sheet
/// paths built from an outward ray at u. Optional waypoints override the
/// final approach.
struct AbelianIntegrals {
    std::vector<cplx> phi;
    cplx omega0;
};

namespace detail {

/// Anchor point for the infinity approach: scale * d* from the branch-point
/// centroid, where d* maximizes the clearance of the outgoing ray from the
/// cut segments. Shared by all Abelian integrals on a curve so that every
/// value carries the same branch of the regularizing logarithm.
inline std::pair<cplx, cplx> infinity_anchor(const BranchSqrt& b, double R) {
    cplx centroid = 0.0;
    for (cplx p : b.branch_points()) centroid += p;
    centroid /= static_cast<double>(b.branch_points().size());
    auto clearance = [&](cplx d) {
        double worst = std::numeric_limits<double>::infinity();
        for (double t : {0.3, 0.6, 1.0, 1.8, 3.2, 6.0, 12.0, 25.0, 50.0}) {
            cplx zt = centroid + t * R * d;
            for (int k = 0; k < b.num_cuts(); ++k) {
                cplx p = b.a_minus(k), q = b.a_plus(k);
                cplx ab = q - p;
                double len2 = std::norm(ab);
                double tt = len2 > 0.0 ? std::clamp(((zt - p) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
                worst = std::min(worst, std::abs(zt - (p + tt * ab)));
            }
        }
        return worst;
    };
    cplx best_d = 1.0;
    double best = -1.0;
    for (int k = 0; k < 24; ++k) {
        cplx d = std::exp(cplx(0.0, 2.0 * pi * (k + 0.5) / 24.0));
        double c = clearance(d);
        if (c > best) { best = c; best_d = d; }
    }
    return {centroid, best_d};
}

/// The forbidden chain for first-sheet routing: every cut segment plus the
/// connectors joining consecutive cuts (a concrete realization of the
/// log-consistency path through all cuts). Crossing a connector winds around
/// an A-cycle and shifts Omega_0 by a period of the third-kind differential.
inline std::vector<std::pair<cplx, cplx>> routing_chain(const BranchSqrt& b) {
    std::vector<std::pair<cplx, cplx>> segs;
    for (int k = 0; k < b.num_cuts(); ++k) segs.push_back({b.a_minus(k), b.a_plus(k)});
    for (int k = 0; k + 1 < b.num_cuts(); ++k) segs.push_back({b.a_plus(k), b.a_minus(k + 1)});
    return segs;
}

inline double point_segment_distance(cplx p, cplx c0, cplx c1) {
    cplx ab = c1 - c0;
    double len2 = std::norm(ab);
    double tt = len2 > 0.0 ? std::clamp(((p - c0) * std::conj(ab)).real() / len2, 0.0, 1.0) : 0.0;
    return std::abs(p - (c0 + tt * ab));
}

/// Exact minimum distance between segments [p,q] and [c0,c1] (0 on crossing).
inline double segment_segment_distance(cplx p, cplx q, cplx c0, cplx c1) {
    cplx r = q - p, s = c1 - c0;
    double denom = r.real() * s.imag() - r.imag() * s.real();
    if (std::abs(denom) > 1e-30) {
        cplx qp = c0 - p;
        double t = (qp.real() * s.imag() - qp.imag() * s.real()) / denom;
        double u = (qp.real() * r.imag() - qp.imag() * r.real()) / denom;
        if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return 0.0;
    }
    return std::min(std::min(point_segment_distance(p, c0, c1), point_segment_distance(q, c0, c1)),
                    std::min(point_segment_distance(c0, p, q), point_segment_distance(c1, p, q)));
}

inline bool segment_hits_chain(const std::vector<std::pair<cplx, cplx>>& chain, cplx p, cplx q,
                               double margin, cplx exempt, double exempt_radius) {
    for (const auto& [c0, c1] : chain) {
        if (segment_segment_distance(p, q, c0, c1) >= margin) continue;
        cplx r = q - p, s = c1 - c0;
        double denom = r.real() * s.imag() - r.imag() * s.real();
        cplx near_pt = p;
        bool interior_crossing = false;
        if (std::abs(denom) > 1e-30) {
            cplx qp = c0 - p;
            double t = (qp.real() * s.imag() - qp.imag() * s.real()) / denom;
            double u = (qp.real() * r.imag() - qp.imag() * r.real()) / denom;
            if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) {
                near_pt = p + t * r;
                // a touch at the target (a chain endpoint) is not a topology
                // change; any other crossing always is, exemption or not
                interior_crossing = std::abs(near_pt - exempt) > 1e-9 * (1.0 + std::abs(exempt));
            }
        }
        if (interior_crossing) return true;
        {
            // no crossing: locate the leg point closest to the chain segment
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i <= 256; ++i) {
                cplx zt = p + r * (static_cast<double>(i) / 256.0);
                double dd = point_segment_distance(zt, c0, c1);
                if (dd < best) { best = dd; near_pt = zt; }
            }
        }
        // near-miss without crossing: tolerated inside the exemption disk
        if (std::abs(near_pt - exempt) >= exempt_radius) return true;
    }
    return false;
}

} // namespace detail

inline AbelianIntegrals abelian_integrals(const SpectralCurve& curve, const DifferentialBasis& basis,
                                          cplx target, const std::vector<cplx>& waypoints = {},
                                          double rel_tol = 1e-11) {
    const BranchSqrt& b = curve.branch();
    double scale = 1.0;
    for (cplx p : b.branch_points()) scale = std::max({scale, std::abs(p), std::abs(target)});
    double R = 10.0 * scale;
    auto [base, dir] = detail::infinity_anchor(b, R);
    cplx z1 = base + R * dir;

    auto w_of = [&](cplx z) { return b.eval_offcut(z); };

    // int_{z1}^{infinity} f(z) dz along the anchor ray via the u = 1/t map
    auto tail_out = [&](auto&& f) {
        return integrate_adaptive(
            [&](double u) -> cplx {
                cplx z = base + dir / u;
                return f(z) * dir / (u * u);
            },
            0.0, 1.0 / R, rel_tol, 64, 8192).value;
    };

    // route from the anchor to the target, inserting lifted waypoints when a
    // straight leg would cross the cut chain (which would change the branch
    // of the regularized integrals); the final approach leg uses the t^2
    // endpoint map since the target may be a branch point
    std::vector<cplx> pts = waypoints;
    pts.push_back(target);
    std::vector<cplx> route;
    route.push_back(z1);
    {
        auto chain = detail::routing_chain(b);
        cplx from = z1;
        double margin = 0.02 * scale;
        double exempt_r = 0.08 * scale;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cplx to = pts[i];
            cplx stop = to;
            bool last = (i + 1 == pts.size());
            if (last) {
                cplx back = from - to;
                stop = to + (0.05 * scale) * back / std::max(std::abs(back), 1e-12);
            }
            cplx exempt = last ? to : cplx(1e308, 1e308);
            if (detail::segment_hits_chain(chain, from, stop, margin, exempt, exempt_r) &&
                std::abs(stop - from) > margin) {
                cplx mid = 0.5 * (from + stop);
                bool placed = false;
                for (double lift : {1.0, 2.0, 4.0, 8.0, -1.0, -2.0, -4.0, -8.0}) {
                    cplx cand = mid + cplx(0.0, 1.0) * dir * lift * scale;
                    if (!detail::segment_hits_chain(chain, from, cand, margin, exempt, exempt_r) &&
                        !detail::segment_hits_chain(chain, cand, stop, margin, exempt, exempt_r)) {
                        route.push_back(cand);
                        placed = true;
                        break;
                    }
                }
                if (!placed)
                    throw DomainError("abelian_integrals: could not route around the cut chain");
            }
            route.push_back(stop);
            if (last) route.push_back(to);
            from = to;
        }
    }

    auto integrate_route = [&](auto&& f) {
        cplx acc = 0.0;
        for (std::size_t i = 1; i + 1 < route.size(); ++i)
            acc += integrate_segment(f, route[i - 1], route[i], rel_tol).value;
        // final sqrt-regular approach into the target
        acc += integrate_from_sqrt_endpoint(f, route.back(), route[route.size() - 2], rel_tol).value * (-1.0);
        return acc;
    };

    AbelianIntegrals out;
    for (const Poly& p : basis.p_polys) {
        cplx val = -tail_out([&](cplx z) { return p(z) / w_of(z); }); // inf -> z1
        val += integrate_route([&](cplx z) { return p(z) / w_of(z); });
        out.phi.push_back(val);
    }
    {
        cplx val = detail::log_continued_from_infinity(z1, dir, 100.0 * scale);
        val += -tail_out([&](cplx z) { return basis.P0(z) / w_of(z) - 1.0 / z; });
        val += integrate_route([&](cplx z) { return basis.P0(z) / w_of(z); });
        out.omega0 = val;
    }

    // At an endpoint interior to the cut chain, the value consistent with the
    // two-sided logarithm construction is the average over routes passing on
    // either side of the remaining cuts. Relative to the single route used
    // above that adds half the A-loops of every cut beyond the target, and
    // those loop integrals are known exactly from the normalization:
    //   A_m of dphi_j = delta_mj (m < s-1), -1 (m = s-1);
    //   A_m of dOmega_0 = 0 (m < s-1), 2 pi i (m = s-1).
    {
        int s = b.num_cuts();
        double tol = 1e-10 * scale;
        int hit_cut = -1;
        bool hit_plus = false;
        for (int k = 0; k < s; ++k) {
            if (std::abs(target - b.a_plus(k)) < tol) { hit_cut = k; hit_plus = true; }
            if (std::abs(target - b.a_minus(k)) < tol) { hit_cut = k; hit_plus = false; }
        }
        if (hit_cut >= 0) {
            std::vector<int> beyond;
            if (hit_plus)
                for (int m = hit_cut + 1; m < s; ++m) beyond.push_back(m);
            else
                for (int m = 0; m < hit_cut; ++m) beyond.push_back(m);
            for (int m : beyond) {
                for (int j = 0; j + 1 < s; ++j) {
                    double loop = (m == s - 1) ? -1.0 : (m == j ? 1.0 : 0.0);
                    out.phi[static_cast<std::size_t>(j)] += 0.5 * loop;
                }
                if (m == s - 1) out.omega0 += 0.5 * 2.0 * pi * cplx(0.0, 1.0);
            }
        }
    }
    return out;
}

/// Hessian of the prepotential via Abelian integrals:
///   d2F/dS_i dS_j = 4 pi i (delta_{js} - 1) phi_j(a_i^+) - 2 Omega_0(a_i^+).
inline std::vector<std::vector<cplx>> d2F_matrix(const SpectralCurve& curve, double rel_tol = 1e-11) {
    int s = curve.num_cuts();
    DifferentialBasis basis = omega0(curve, rel_tol);
    std::vector<std::vector<cplx>> H(static_cast<std::size_t>(s), std::vector<cplx>(static_cast<std::size_t>(s)));
    for (int i = 0; i < s; ++i) {
        AbelianIntegrals vals = abelian_integrals(curve, basis, curve.cuts()[static_cast<std::size_t>(i)].a_plus,
                                                  {}, rel_tol);
        for (int j = 0; j < s; ++j) {
            cplx v = -2.0 * vals.omega0;
            if (j < s - 1) v += -4.0 * pi * cplx(0.0, 1.0) * vals.phi[static_cast<std::size_t>(j)];
            H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
        }
    }
    return H;
}

/// B_j-period of y dz realized as twice the chord integral from a_j^+ to
/// a_s^- (path on sheet 1 out, back on sheet 2).
inline cplx b_period_y(const SpectralCurve& curve, int j, double rel_tol = 1e-11) {
    int s = curve.num_cuts();
    cplx p = curve.cuts()[static_cast<std::size_t>(j)].a_plus;
    cplx q = curve.cuts()[static_cast<std::size_t>(s - 1)].a_minus;
    cplx m = 0.5 * (p + q), h = 0.5 * (q - p);
    auto integrand = [&](double theta) {
        cplx z = m + h * std::sin(theta);
        return curve.y_offcut(z) * h * std::cos(theta);
    };
    AdaptiveResult res = integrate_adaptive(integrand, -0.5 * pi, 0.5 * pi, rel_tol, 64, 32768);
    return 2.0 * res.value;
}

/// Verifies P0 vanishing at the coalescence point and the collapse of the
/// differentials onto the (s-1)-cut curve for a gap -> 0 family. The pinch
/// vanishing is logarithmic: the A-period condition balances the log
/// divergence of the squeezed contour, so |P0(alpha)| ~ c / log(1/gap).
struct CoalescenceReport {
    std::vector<double> gaps;
    std::vector<cplx> P0_at_alpha;
    double log_rate_spread;   // relative spread of |P0(alpha)| * log(scale/gap)
    bool monotone_vanishing;  // |P0(alpha)| decreases along the family
    std::vector<double> dOmega_limit_dev; // per member: max |dOmega^(2)/dz - dOmega^(1)/dz| on samples
    bool dphi_checked;        // s-2 >= 1 comparisons performed
};

inline CoalescenceReport coalescence_check(const std::vector<SpectralCurve>& family, cplx alpha,
                                           const SpectralCurve& merged_one_cut) {
    CoalescenceReport rep{};
    rep.dphi_checked = family.front().num_cuts() > 2;
    double scale = 1.0;
    for (cplx p : family.front().branch().branch_points()) scale = std::max(scale, std::abs(p));
    BranchSqrt merged = merged_one_cut.branch();
    cplx am = merged.a_minus(0), ap = merged.a_plus(0);
    for (const auto& c : family) {
        // gap between the coalescing endpoints a_{m-1}^+ and a_m^-
        double gap = std::numeric_limits<double>::infinity();
        for (int j = 0; j + 1 < c.num_cuts(); ++j)
            gap = std::min(gap, std::abs(c.cuts()[static_cast<std::size_t>(j)].a_plus -
                                         c.cuts()[static_cast<std::size_t>(j + 1)].a_minus));
        DifferentialBasis basis = omega0(c);
        rep.gaps.push_back(gap);
        rep.P0_at_alpha.push_back(basis.P0(alpha));
        double dev = 0.0;
        for (double t : {0.31, 0.5, 0.72}) {
            cplx z = am + t * (ap - am) + cplx(0.0, 0.37) * (ap - am); // off-cut samples
            cplx two_cut_val = basis.P0(z) / c.branch().eval_offcut(z);
            cplx one_cut_val = 1.0 / merged.eval_offcut(z);
            dev = std::max(dev, std::abs(two_cut_val - one_cut_val));
        }
        rep.dOmega_limit_dev.push_back(dev);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    rep.monotone_vanishing = true;
    for (std::size_t i = 0; i < rep.gaps.size(); ++i) {
        double v = std::abs(rep.P0_at_alpha[i]) * std::log(8.0 * scale / rep.gaps[i]);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (i > 0 && std::abs(rep.P0_at_alpha[i]) >= std::abs(rep.P0_at_alpha[i - 1]))
            rep.monotone_vanishing = false;
    }
    rep.log_rate_spread = (hi - lo) / std::max(hi, 1e-300);
    return rep;
}

} // namespace speccurve
