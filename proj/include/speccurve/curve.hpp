// Spectral-curve data and solvers: closed forms for the one-cut cubic,
// Newton/continuation for the two-cut cubic, Puiseux and classical-limit
// approximations, and the Seiberg-Witten slice.
#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "linalg.hpp"
#include "poly.hpp"
#include "quadrature.hpp"

namespace speccurve {

/// One cut of an s-cut curve: endpoints and its partial 't Hooft parameter.
/// beta/delta are the semi-sum and semi-difference of the endpoints.
struct CutSpec {
    cplx a_minus;
    cplx a_plus;
    cplx S;
    cplx beta() const { return 0.5 * (a_plus + a_minus); }
    cplx delta() const { return 0.5 * (a_plus - a_minus); }
};

/// y^2 = W'(z)^2 + f(z) with y = h(z) w(z); holds the branch points, the
/// double roots (roots of h), f, and the partial 't Hooft parameters.
class SpectralCurve {
public:
    SpectralCurve(Potential pot, std::vector<CutSpec> cuts)
        : pot_(std::move(pot)), cuts_(std::move(cuts)), branch_(collect_points(cuts_)) {
        h_ = positive_part_quotient(pot_, branch_);
        double_roots_ = h_.degree() >= 1 ? poly_roots(h_) : std::vector<cplx>{};
        total_S_ = 0.0;
        for (const auto& c : cuts_) total_S_ += c.S;
        // f = (h^2 P - W'^2) truncated to degree n-1 with b_{n-1} pinned to -4S
        Poly P = Poly::from_roots(branch_.branch_points());
        Poly D = h_ * h_ * P - pot_.wprime() * pot_.wprime();
        int n = pot_.n();
        std::vector<cplx> fc(static_cast<std::size_t>(n), 0.0);
        for (int k = 0; k + 1 < n; ++k) fc[static_cast<std::size_t>(k)] = D.coeff(k);
        fc[static_cast<std::size_t>(n - 1)] = -4.0 * total_S_;
        f_ = Poly(std::move(fc));
        mismatch_ = D - f_;
    }

    const Potential& potential() const { return pot_; }
    const std::vector<CutSpec>& cuts() const { return cuts_; }
    int num_cuts() const { return static_cast<int>(cuts_.size()); }
    const BranchSqrt& branch() const { return branch_; }
    const Poly& h_poly() const { return h_; }
    const std::vector<cplx>& double_roots() const { return double_roots_; }
    const Poly& f_poly() const { return f_; }
    cplx total_S() const { return total_S_; }

    /// y^2 as a polynomial (single-valued).
    Poly y_squared() const { return pot_.wprime() * pot_.wprime() + f_; }

    /// y on the standard branch (cuts on the straight segments), ~ W' at infinity.
    cplx y_offcut(cplx z) const { return h_(z) * branch_.eval_offcut(z); }

    /// One-sided y on cut j at z = m_j + h_j sin(theta).
    cplx y_onesided_theta(double theta, int j, Side side = Side::plus) const {
        cplx z = branch_.midpoint(j) + branch_.half_diff(j) * std::sin(theta);
        return h_(z) * branch_.eval_onesided_theta(theta, j, side);
    }

    /// Coefficient mismatch h^2 P - W'^2 - f (identically small for a valid curve).
    const Poly& mismatch() const { return mismatch_; }

private:
    static BranchSqrt collect_points(const std::vector<CutSpec>& cuts) {
        std::vector<cplx> pts;
        pts.reserve(cuts.size() * 2);
        for (const auto& c : cuts) {
            pts.push_back(c.a_minus);
            pts.push_back(c.a_plus);
        }
        return BranchSqrt(std::move(pts));
    }

    Potential pot_;
    std::vector<CutSpec> cuts_;
    BranchSqrt branch_;
    Poly h_;
    std::vector<cplx> double_roots_;
    Poly f_;
    Poly mismatch_;
    cplx total_S_ = 0.0;
};

/// -(1/4 pi i) * A_j-period of y dz, evaluated as the one-sided cut integral
/// int_{gamma_j} y(z_+) dz / (2 pi i) with the sin(theta) endpoint map.
/// Equals S_j for a consistent curve.
inline cplx period_integral(const SpectralCurve& curve, int j, double rel_tol = 1e-10) {
    const BranchSqrt& b = curve.branch();
    cplx m = b.midpoint(j), h = b.half_diff(j);
    auto integrand = [&](double theta) {
        cplx z = m + h * std::sin(theta);
        double c = std::cos(theta);
        return curve.h_poly()(z) * b.factor_excluding(z, j) * (c * c);
    };
    AdaptiveResult res = integrate_adaptive(integrand, -0.5 * pi, 0.5 * pi, rel_tol);
    return h * h * res.value / (2.0 * pi);
}

/// n+s coefficient-matching residuals (powers z^0..z^{n+s-1} of y^2-W'^2-f)
/// followed by the s period residuals period_j - S_j.
inline std::vector<cplx> endpoint_residual(const SpectralCurve& curve) {
    int n = curve.potential().n();
    int s = curve.num_cuts();
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(n + 2 * s));
    for (int k = 0; k < n + s; ++k) out.push_back(curve.mismatch().coeff(k));
    for (int j = 0; j < s; ++j) out.push_back(period_integral(curve, j) - curve.cuts()[static_cast<std::size_t>(j)].S);
    return out;
}

inline double max_abs(const std::vector<cplx>& v) {
    double m = 0.0;
    for (cplx x : v) m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------------------
// One-cut cubic: W(z) = z^3/3 - w z
// ---------------------------------------------------------------------------

/// Moduli branch points S_± = ±2 (w/3)^{3/2} where two roots of the endpoint
/// cubic coalesce.
inline std::pair<cplx, cplx> branch_points_S(cplx w) {
    if (w == cplx(0.0)) throw DomainError("branch_points_S: w must be nonzero");
    cplx sp = 2.0 * std::pow(w / 3.0, 1.5);
    return {sp, -sp};
}

/// Branch k of the endpoint cubic beta^3 - w beta + S = 0, with the cube root
/// taken with nonnegative real part and the inner square root with
/// nonnegative imaginary part.
inline cplx cubic_beta_branch(cplx w, cplx S, int k) {
    cplx inner = sqrt_upper(0.25 * S * S - std::pow(w / 3.0, 3.0));
    cplx D = std::exp(cplx(0.0, 2.0 * pi * k / 3.0)) * cbrt_principal(0.5 * S + inner);
    return -w / (3.0 * D) - D;
}

/// Endpoints of the one-cut cubic curve on branch k. delta is fixed as the
/// principal square root of 2S/beta (or of 2w when beta = 0, which requires
/// S = 0); only the unordered endpoint pair is physical.
inline CutSpec solve_one_cut_cubic(cplx w, cplx S, int k) {
    cplx beta = cubic_beta_branch(w, S, k);
    double scale = std::max(std::abs(w), std::sqrt(std::abs(S)));
    cplx d2;
    if (std::abs(beta) < 1e-12 * std::max(1.0, std::sqrt(scale))) {
        if (std::abs(S) > 1e-10 * std::max(1.0, std::pow(scale, 1.5)))
            throw NumericalError("solve_one_cut_cubic: branch has beta = 0 but S != 0");
        d2 = 2.0 * w;
    } else {
        d2 = 2.0 * S / beta;
    }
    cplx delta = psqrt(d2);
    return {beta - delta, beta + delta, S};
}

inline SpectralCurve one_cut_cubic_curve(cplx w, cplx S, int k) {
    return SpectralCurve(Potential::cubic(w), {solve_one_cut_cubic(w, S, k)});
}

/// Classical-limit endpoints: beta_j ~ a_j, delta_j^2 ~ 4 S_j / W''(a_j).
/// Cut j shrinks onto the j-th stored critical point of W.
inline std::vector<CutSpec> classical_endpoints(const Potential& pot, const std::vector<cplx>& S) {
    if (static_cast<int>(S.size()) > pot.n())
        throw DomainError("classical_endpoints: more cuts than critical points");
    std::vector<CutSpec> out;
    for (std::size_t j = 0; j < S.size(); ++j) {
        cplx aj = pot.critical_points()[j];
        cplx w2 = pot.eval_wsecond(aj);
        if (std::abs(w2) < 1e-12)
            throw DomainError("classical_endpoints: degenerate critical point of W");
        cplx delta = psqrt(4.0 * S[j] / w2);
        out.push_back({aj - delta, aj + delta, S[j]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Two-cut cubic: endpoints (a, b, c, d) with
//   e1 = 0,  e2 = -2w,  e3 = 4 (S1 + S2),  I(a,b,c,d) = 2 pi i S1.
// ---------------------------------------------------------------------------

/// Cut integral I(a,b,c,d) = int_a^b y(z_+) dz with the sin(theta) map on the
/// segment [a, b]; the plus side carries +i h cos(theta).
inline cplx two_cut_I(cplx a, cplx b, cplx c, cplx d, double rel_tol = 1e-11) {
    cplx m = 0.5 * (a + b), h = 0.5 * (b - a);
    auto integrand = [&](double theta) {
        cplx z = m + h * std::sin(theta);
        double ct = std::cos(theta);
        return BranchSqrt::cut_factor(z, c, d) * (ct * ct);
    };
    AdaptiveResult res = integrate_adaptive(integrand, -0.5 * pi, 0.5 * pi, rel_tol, 64, 32768);
    return cplx(0.0, 1.0) * h * h * res.value;
}

struct NoConvergenceError : NumericalError {
    NoConvergenceError(const std::string& what, std::array<cplx, 4> last)
        : NumericalError(what), last_iterate(last) {}
    std::array<cplx, 4> last_iterate;
};

struct DegenerationError : NumericalError {
    using NumericalError::NumericalError;
};

namespace detail {

inline std::array<cplx, 4> two_cut_equations(cplx w, cplx S1, cplx S2, const std::array<cplx, 4>& x,
                                             double quad_tol) {
    const cplx a = x[0], b = x[1], c = x[2], d = x[3];
    cplx e2 = a * b + a * c + a * d + b * c + b * d + c * d;
    cplx e3 = a * b * c + a * b * d + a * c * d + b * c * d;
    return {a + b + c + d,
            e2 + 2.0 * w,
            e3 - 4.0 * (S1 + S2),
            (two_cut_I(a, b, c, d, quad_tol) - 2.0 * pi * cplx(0.0, 1.0) * S1) / (2.0 * pi)};
}

inline double two_cut_min_separation(const std::array<cplx, 4>& x) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) m = std::min(m, std::abs(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]));
    return m;
}

} // namespace detail

/// Newton solve of the two-cut endpoint system from a supplied guess. The
/// Jacobian is assembled by central finite differences with step 1e-6*scale.
inline SpectralCurve solve_two_cut_cubic(cplx w, cplx S1, cplx S2, std::array<cplx, 4> guess,
                                         double tol = 1e-12, int max_iter = 60) {
    double scale = std::max({1.0, std::sqrt(std::abs(w)), std::abs(guess[0]), std::abs(guess[3])});
    const double quad_tol = 1e-12;
    std::array<cplx, 4> x = guess;
    auto resid_norm = [](const std::array<cplx, 4>& E) {
        double r = 0.0;
        for (cplx v : E) r = std::max(r, std::abs(v));
        return r;
    };
    std::array<cplx, 4> E = detail::two_cut_equations(w, S1, S2, x, quad_tol);
    double rn = resid_norm(E);
    for (int iter = 0; iter < max_iter && rn > tol * scale; ++iter) {
        if (detail::two_cut_min_separation(x) < 1e-10 * scale)
            throw DegenerationError("solve_two_cut_cubic: endpoints collided during iteration");
        // central-difference Jacobian, complex step in each unknown
        double fd = 1e-6 * scale;
        std::vector<cplx> J(16);
        for (int col = 0; col < 4; ++col) {
            std::array<cplx, 4> xp = x, xm = x;
            xp[static_cast<std::size_t>(col)] += fd;
            xm[static_cast<std::size_t>(col)] -= fd;
            auto Ep = detail::two_cut_equations(w, S1, S2, xp, quad_tol);
            auto Em = detail::two_cut_equations(w, S1, S2, xm, quad_tol);
            for (int row = 0; row < 4; ++row)
                J[static_cast<std::size_t>(row) * 4 + static_cast<std::size_t>(col)] =
                    (Ep[static_cast<std::size_t>(row)] - Em[static_cast<std::size_t>(row)]) / (2.0 * fd);
        }
        std::vector<cplx> rhs(E.begin(), E.end());
        std::array<cplx, 4> step{};
        try {
            auto sol = solve_dense(J, rhs);
            for (int i = 0; i < 4; ++i) step[static_cast<std::size_t>(i)] = sol.x[static_cast<std::size_t>(i)];
        } catch (const NumericalError&) {
            throw NoConvergenceError("solve_two_cut_cubic: singular Jacobian", x);
        }
        // damped update
        double lambda = 1.0;
        std::array<cplx, 4> x_new{};
        double rn_new = rn;
        for (int halv = 0; halv < 20; ++halv) {
            for (int i = 0; i < 4; ++i)
                x_new[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] - lambda * step[static_cast<std::size_t>(i)];
            auto E_new = detail::two_cut_equations(w, S1, S2, x_new, quad_tol);
            rn_new = resid_norm(E_new);
            if (rn_new < rn || rn_new < tol * scale) {
                E = E_new;
                break;
            }
            lambda *= 0.5;
        }
        if (rn_new >= rn && rn > 100.0 * tol * scale)
            throw NoConvergenceError("solve_two_cut_cubic: Newton stalled", x);
        x = x_new;
        rn = rn_new;
    }
    if (rn > 10.0 * tol * scale)
        throw NoConvergenceError("solve_two_cut_cubic: Newton did not converge", x);
    return SpectralCurve(Potential::cubic(w), {CutSpec{x[0], x[1], S1}, CutSpec{x[2], x[3], S2}});
}

struct ContinuationResult {
    std::vector<SpectralCurve> curves;
    std::optional<std::size_t> failed_at; // index into the path where solving failed
    std::string message;
};

/// Track the two-cut solution along a sampled path in (S1, S2) space, using
/// each solution as the guess for the next sample, with adaptive sub-stepping
/// (up to 20 halvings) on Newton failure.
inline ContinuationResult continue_two_cut(cplx w, const std::vector<std::pair<cplx, cplx>>& path,
                                           const SpectralCurve& start) {
    ContinuationResult out;
    out.curves.push_back(start);
    auto endpoints_of = [](const SpectralCurve& c) {
        return std::array<cplx, 4>{c.cuts()[0].a_minus, c.cuts()[0].a_plus,
                                   c.cuts()[1].a_minus, c.cuts()[1].a_plus};
    };
    for (std::size_t i = 1; i < path.size(); ++i) {
        cplx s1_from = path[i - 1].first, s2_from = path[i - 1].second;
        cplx s1_to = path[i].first, s2_to = path[i].second;
        SpectralCurve cur = out.curves.back();
        double t = 0.0;
        double step = 1.0;
        int halvings = 0;
        bool ok = true;
        while (t < 1.0 - 1e-15) {
            double t_next = std::min(1.0, t + step);
            cplx s1 = s1_from + (s1_to - s1_from) * t_next;
            cplx s2 = s2_from + (s2_to - s2_from) * t_next;
            try {
                cur = solve_two_cut_cubic(w, s1, s2, endpoints_of(cur));
                t = t_next;
                if (halvings > 0) { step = std::min(1.0, step * 2.0); --halvings; }
            } catch (const NumericalError& e) {
                step *= 0.5;
                if (++halvings > 20) {
                    out.failed_at = i;
                    out.message = e.what();
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) break;
        out.curves.push_back(cur);
    }
    return out;
}

/// Order-m (m <= 6) Puiseux endpoints around the classical points ±sqrt(w).
/// Cut 1 opens from -sqrt(w) with parameter S1, cut 2 from +sqrt(w) with S2.
struct PuiseuxResult {
    std::array<cplx, 4> endpoints; // a, b, c, d
    bool small_parameter_warning;  // set when |S_i|/|w|^{3/2} exceeds 0.1
};

inline PuiseuxResult puiseux_two_cut(cplx w, cplx S1, cplx S2, int order = 6) {
    if (order < 1 || order > 6) throw DomainError("puiseux_two_cut: order must be in 1..6");
    std::array<cplx, 7> ac{}, cc{};
    ac[1] = cplx(0.0, 1.0) * psqrt(2.0 * S1);
    ac[2] = 0.5 * (-S1 + S2);
    ac[3] = -cplx(0.0, 1.0) * psqrt(2.0 * S1) / 8.0 * (2.0 * S1 - 3.0 * S2);
    ac[4] = 0.125 * (3.0 * S1 * S1 - 8.0 * S1 * S2 + 3.0 * S2 * S2);
    ac[5] = cplx(0.0, 1.0) * psqrt(2.0 * S1) / 128.0 * (36.0 * S1 * S1 - 122.0 * S1 * S2 + 69.0 * S2 * S2);
    ac[6] = -(S1 - S2) * (16.0 * S1 * S1 - 59.0 * S1 * S2 + 16.0 * S2 * S2) / 32.0;
    cc[1] = -psqrt(2.0 * S2);
    cc[2] = 0.5 * (S1 - S2);
    cc[3] = psqrt(2.0 * S2) / 8.0 * (3.0 * S1 - 2.0 * S2);
    cc[4] = -0.125 * (3.0 * S1 * S1 - 8.0 * S1 * S2 + 3.0 * S2 * S2);
    cc[5] = -psqrt(2.0 * S2) / 128.0 * (69.0 * S1 * S1 - 122.0 * S1 * S2 + 36.0 * S2 * S2);
    cc[6] = (S1 - S2) * (16.0 * S1 * S1 - 59.0 * S1 * S2 + 16.0 * S2 * S2) / 32.0;

    cplx rw = psqrt(w);
    cplx sa = -1.0, sb = -1.0, sc = 1.0, sd = 1.0;
    for (int j = 1; j <= order; ++j) {
        cplx wpow = std::pow(w, 0.75 * j);
        double sign = (j % 2 == 0) ? 1.0 : -1.0;
        sa += ac[static_cast<std::size_t>(j)] / wpow;
        sb += sign * ac[static_cast<std::size_t>(j)] / wpow;
        sc += cc[static_cast<std::size_t>(j)] / wpow;
        sd += sign * cc[static_cast<std::size_t>(j)] / wpow;
    }
    double smallness = std::max(std::abs(S1), std::abs(S2)) / std::pow(std::abs(w), 1.5);
    return {{rw * sa, rw * sb, rw * sc, rw * sd}, smallness > 0.1};
}

/// Two-cut curves on the slice S1 + S2 = 0 with the symmetric endpoints
/// c = -b, d = -a. mod_a parameterizes the family over [sqrt|w|, sqrt(2|w|)].
inline std::pair<cplx, SpectralCurve> sw_slice_solve(cplx w, double mod_a) {
    double aw = std::abs(w);
    if (mod_a < std::sqrt(aw) * (1.0 - 1e-12) || mod_a > std::sqrt(2.0 * aw) * (1.0 + 1e-12))
        throw DomainError("sw_slice_solve: |a| must lie in [sqrt|w|, sqrt(2|w|)]");
    double mod_b2 = std::max(0.0, 2.0 * aw - mod_a * mod_a);
    double mod_b = std::sqrt(mod_b2);
    cplx phase = std::exp(cplx(0.0, 0.5 * std::arg(w)));
    cplx a = mod_a * phase, b = mod_b * phase;
    // |S1| = (1/2pi) int_{|b|}^{|a|} sqrt((|a|^2 - x^2)(x^2 - |b|^2)) dx
    double m = 0.5 * (mod_a + mod_b), h = 0.5 * (mod_a - mod_b);
    double mag;
    if (h == 0.0) {
        mag = 0.0;
    } else {
        auto integrand = [&](double theta) -> cplx {
            double x = m + h * std::sin(theta);
            double ct = std::cos(theta);
            return h * ct * ct * std::sqrt((mod_a + x) * (x + mod_b));
        };
        mag = integrate_adaptive(integrand, -0.5 * pi, 0.5 * pi, 1e-12).value.real() * h / (2.0 * pi);
    }
    cplx S1 = mag * std::exp(cplx(0.0, 1.5 * std::arg(w)));
    SpectralCurve curve(Potential::cubic(w), {CutSpec{a, b, S1}, CutSpec{-b, -a, -S1}});
    return {S1, curve};
}

} // namespace speccurve
