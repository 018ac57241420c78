// Prepotential evaluation and its S-derivatives, the constants L_i, the
// effective/low-energy superpotentials, and the quantum vacua of the
// Gaussian and cubic models.
#pragma once

#include "abelian.hpp"
#include "curve.hpp"

namespace speccurve {

/// F = (3/4 - 1/2 Log S) S^2, principal logarithm.
inline cplx gaussian_prepotential(cplx S) {
    if (S == cplx(0.0)) throw DomainError("gaussian_prepotential: S must be nonzero");
    return (0.75 - 0.5 * std::log(S)) * S * S;
}

/// One-cut cubic prepotential as a function of beta (any branch of the
/// endpoint cubic), principal logarithm. Defined up to the S-independent
/// constant -w^3/12 relative to the variational normalization.
inline cplx cubic_prepotential(cplx w, cplx beta) {
    cplx arg = 0.5 * (w - beta * beta);
    if (arg == cplx(0.0)) throw DomainError("cubic_prepotential: logarithmic singularity at beta^2 = w");
    cplx b2 = beta * beta;
    cplx wb = w * beta - beta * b2;
    return 0.5 * b2 * b2 * b2 - (5.0 / 12.0) * w * b2 * b2 - 0.5 * wb * wb * std::log(arg);
}

/// dF/dS of the one-cut cubic in closed form: L = -(2/3) beta^3 - S Log((w-beta^2)/2).
inline cplx cubic_L(cplx w, cplx beta) {
    cplx S = w * beta - beta * beta * beta;
    return -(2.0 / 3.0) * beta * beta * beta - S * std::log(0.5 * (w - beta * beta));
}

/// d2F/dS2 for a one-cut curve: -Log((b-a)/4)^2 with the module's fixed
/// branch -2 Log((b-a)/4), principal.
inline cplx d2F_one_cut(const SpectralCurve& curve) {
    const CutSpec& c = curve.cuts().at(0);
    return -2.0 * std::log(0.25 * (c.a_plus - c.a_minus));
}

struct SingularConfigurationError : NumericalError {
    using NumericalError::NumericalError;
};

/// d3F/dS3 for a one-cut curve: -(8/(b-a)^2) (1/h(a) + 1/h(b)). A vanishing
/// h at an endpoint is the double-root-hits-endpoint criticality and is
/// signalled instead of returning infinity.
inline cplx d3F_one_cut(const SpectralCurve& curve) {
    const CutSpec& c = curve.cuts().at(0);
    const Poly& h = curve.h_poly();
    cplx ha = h(c.a_minus), hb = h(c.a_plus);
    double scale = std::max(std::abs(c.a_minus), std::abs(c.a_plus));
    if (std::abs(ha) < 1e-10 * std::max(1.0, scale) || std::abs(hb) < 1e-10 * std::max(1.0, scale))
        throw SingularConfigurationError("d3F_one_cut: double root collides with a cut endpoint");
    cplx ba = c.a_plus - c.a_minus;
    return -(8.0 / (ba * ba)) * (1.0 / ha + 1.0 / hb);
}

/// (1/2 pi i) int_{gamma_j} f(z) y(z_+) dz with the endpoint-regular map.
template <class F>
inline cplx weighted_cut_integral(const SpectralCurve& curve, int j, F&& f, double rel_tol = 1e-11) {
    const BranchSqrt& b = curve.branch();
    cplx m = b.midpoint(j), h = b.half_diff(j);
    auto integrand = [&](double theta) {
        cplx z = m + h * std::sin(theta);
        double ct = std::cos(theta);
        return f(z) * curve.h_poly()(z) * b.factor_excluding(z, j) * (ct * ct);
    };
    AdaptiveResult res = integrate_adaptive(integrand, -0.5 * pi, 0.5 * pi, rel_tol, 64, 32768);
    return h * h * res.value / (2.0 * pi);
}

/// The regularized value for the reference cut (index s-1):
///   L_s = W(z0) - S Log z0^2 - int_{z0}^{inf} (y - W' + 2S/z) dz
/// along the outward ray from the cut's far endpoint, evaluated at
/// increasing radii until stable.
inline cplx L_reference(const SpectralCurve& curve, double rel_tol = 1e-11) {
    const BranchSqrt& b = curve.branch();
    const Potential& pot = curve.potential();
    cplx Stot = curve.total_S();
    int j = curve.num_cuts() - 1;

    cplx centroid = 0.0;
    for (cplx p : b.branch_points()) centroid += p;
    centroid /= static_cast<double>(b.branch_points().size());
    double scale = 1.0;
    for (cplx p : b.branch_points()) scale = std::max(scale, std::abs(p));

    cplx am = b.a_minus(j), ap = b.a_plus(j);
    cplx z0 = (std::abs(am - centroid) > std::abs(ap - centroid)) ? am : ap;
    cplx dir = detail::safe_ray_direction(b, z0);

    // near field: direct difference is well conditioned; far field: the
    // rational identity y - W' = f/(y + W') avoids the cancellation of two
    // large nearly-equal values (valid-curve precondition: f must represent
    // y^2 - W'^2 to roundoff, which endpoint_residual certifies)
    auto f_near = [&](cplx z) { return curve.y_offcut(z) - pot.eval_wprime(z) + 2.0 * Stot / z; };
    auto f_far = [&](cplx z) {
        cplx wp = pot.eval_wprime(z);
        return curve.f_poly()(z) / (curve.y_offcut(z) + wp) + 2.0 * Stot / z;
    };

    double d_near = std::numeric_limits<double>::infinity();
    for (cplx p : b.branch_points())
        if (p != z0) d_near = std::min(d_near, std::abs(p - z0));
    double d1 = std::min(d_near, 2.0 * std::abs(b.half_diff(j)));
    d1 = std::max(d1, 1e-3 * scale);

    cplx prev = 0.0;
    for (double R = 10.0 * scale; R <= 160.0 * scale; R *= 2.0) {
        cplx z_mid = z0 + d1 * dir;
        cplx z1 = z0 + R * dir;
        cplx I = integrate_from_sqrt_endpoint(f_near, z0, z_mid, rel_tol).value;
        I += integrate_segment(f_near, z_mid, z1, rel_tol).value;
        // tail to infinity with the u = 1/t map; f ~ c/z^2 out there
        I += integrate_adaptive(
                 [&](double u) {
                     cplx z = z0 + dir / u;
                     return f_far(z) * dir / (u * u);
                 },
                 0.0, 1.0 / R, rel_tol, 64, 8192)
                 .value;
        cplx ell = detail::log_continued_from_infinity(z0, dir, R);
        cplx L = pot.eval(z0) - 2.0 * Stot * ell - I;
        if (std::abs(L - prev) <= 1e-9 * std::max(1.0, std::abs(L))) return L;
        prev = L;
    }
    if (!std::isfinite(prev.real()) || !std::isfinite(prev.imag()))
        throw AccuracyError("L_reference: regularized period did not stabilize", std::abs(prev));
    return prev;
}

/// All L_j: the reference value from the regularized ray integral, the
/// differences L_s - L_j = (1/2) B_j-period of y dz from chord quadratures.
/// A single anchor keeps the logarithm windings of the L_j consistent.
inline std::vector<cplx> L_values(const SpectralCurve& curve, double rel_tol = 1e-11) {
    int s = curve.num_cuts();
    cplx Lref = L_reference(curve, rel_tol);
    std::vector<cplx> out(static_cast<std::size_t>(s));
    out[static_cast<std::size_t>(s - 1)] = Lref;
    for (int j = 0; j + 1 < s; ++j)
        out[static_cast<std::size_t>(j)] = Lref - 0.5 * b_period_y(curve, j, rel_tol);
    return out;
}

enum class PrepotentialSource { closed_form_gaussian, closed_form_cubic, numeric };

struct PrepotentialReport {
    cplx F;
    std::vector<cplx> L;
    std::vector<std::vector<cplx>> dF2;
    PrepotentialSource source = PrepotentialSource::numeric;
};

/// F = (1/2) int_gamma W dq + (1/2) sum_i S_i L_i with dq = y(z_+) dz / 2 pi i.
/// The Hessian block is filled from the closed form (s = 1) or the Abelian
/// integral representation (s >= 2).
inline PrepotentialReport numeric_prepotential(const SpectralCurve& curve, bool with_hessian = true,
                                               double rel_tol = 1e-11) {
    PrepotentialReport rep;
    rep.source = PrepotentialSource::numeric;
    rep.L = L_values(curve, rel_tol);
    cplx Fw = 0.0;
    for (int j = 0; j < curve.num_cuts(); ++j)
        Fw += weighted_cut_integral(curve, j, [&](cplx z) { return curve.potential().eval(z); }, rel_tol);
    cplx F = 0.5 * Fw;
    for (int j = 0; j < curve.num_cuts(); ++j)
        F += 0.5 * curve.cuts()[static_cast<std::size_t>(j)].S * rep.L[static_cast<std::size_t>(j)];
    rep.F = F;
    if (with_hessian) {
        if (curve.num_cuts() == 1)
            rep.dF2 = {{d2F_one_cut(curve)}};
        else
            rep.dF2 = d2F_matrix(curve, rel_tol);
    }
    return rep;
}

/// W_eff = sum_i N_i L_i + S log Lambda^{2N}; the logarithm is taken as
/// 2N Log(Lambda) on the principal branch.
inline cplx superpotential_eff(const std::vector<cplx>& L, const std::vector<int>& N_parts,
                               cplx Lambda, cplx total_S) {
    if (Lambda == cplx(0.0)) throw DomainError("superpotential_eff: Lambda must be nonzero");
    int N = 0;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < N_parts.size(); ++i) {
        N += N_parts[i];
        acc += static_cast<double>(N_parts[i]) * L[i];
    }
    return acc + total_S * (2.0 * N) * std::log(Lambda);
}

inline cplx superpotential_eff(const SpectralCurve& curve, const std::vector<int>& N_parts, cplx Lambda) {
    return superpotential_eff(L_values(curve), N_parts, Lambda, curve.total_S());
}

struct VacuumSolution {
    int k = 0;            // root-of-unity index, 1..N
    int sign = 0;         // ±1 for the cubic families, 0 when not applicable
    cplx Lambda2;
    std::vector<cplx> S_vev;
    cplx beta;
    cplx W_low;
    cplx trPhi;
    double residual = 0.0; // field-equation residual, reduced mod 2 pi i
};

/// Gaussian vacua: S^(k) = zeta_k Lambda^2, W_low^(k) = N zeta_k Lambda^2.
inline std::vector<VacuumSolution> solve_vacua_gaussian(int N, cplx Lambda) {
    if (N < 1) throw DomainError("solve_vacua_gaussian: N must be positive");
    if (Lambda == cplx(0.0)) throw DomainError("solve_vacua_gaussian: Lambda must be nonzero");
    std::vector<VacuumSolution> out;
    cplx L2 = Lambda * Lambda;
    for (int k = 1; k <= N; ++k) {
        cplx zeta = std::exp(cplx(0.0, 2.0 * pi * k / N));
        VacuumSolution v;
        v.k = k;
        v.Lambda2 = L2;
        v.S_vev = {zeta * L2};
        v.W_low = static_cast<double>(N) * zeta * L2;
        // log(Lambda^{2N} / S^N) reduced mod 2 pi i
        cplx r = mod_2pi_band(static_cast<double>(N) * (2.0 * std::log(Lambda) - std::log(zeta * L2)));
        v.residual = std::abs(r);
        out.push_back(std::move(v));
    }
    return out;
}

/// Cubic one-cut vacua: two families of N solutions,
///   delta^2 = 4 Lambda^2 zeta_k, beta = ±sqrt(w - 2 Lambda^2 zeta_k),
///   W_low = ∓(2/3) N (w - 2 Lambda^2 zeta_k)^{3/2}, <Tr Phi> = N beta.
inline std::vector<VacuumSolution> solve_vacua_cubic_one_cut(cplx w, int N, cplx Lambda) {
    if (N < 1) throw DomainError("solve_vacua_cubic_one_cut: N must be positive");
    if (Lambda == cplx(0.0)) throw DomainError("solve_vacua_cubic_one_cut: Lambda must be nonzero");
    std::vector<VacuumSolution> out;
    cplx L2 = Lambda * Lambda;
    for (int k = 1; k <= N; ++k) {
        cplx zeta = std::exp(cplx(0.0, 2.0 * pi * k / N));
        cplx rad = w - 2.0 * L2 * zeta;
        if (std::abs(rad) < 1e-12 * std::max(1.0, std::abs(w)))
            throw DomainError("solve_vacua_cubic_one_cut: w = 2 Lambda^2 zeta_k is a moduli branch point");
        for (int sgn : {+1, -1}) {
            VacuumSolution v;
            v.k = k;
            v.sign = sgn;
            v.Lambda2 = L2;
            v.beta = static_cast<double>(sgn) * psqrt(rad);
            v.S_vev = {2.0 * L2 * zeta * v.beta};
            v.W_low = -static_cast<double>(sgn) * (2.0 / 3.0) * static_cast<double>(N) * std::pow(rad, 1.5);
            v.trPhi = static_cast<double>(N) * v.beta;
            // one-cut field equation log((delta/2 Lambda)^{2N}) = 0 mod 2 pi i
            cplx r = mod_2pi_band(static_cast<double>(N) * std::log(zeta));
            v.residual = std::abs(r);
            out.push_back(std::move(v));
        }
    }
    return out;
}

struct ClassicalVacuum {
    std::vector<int> k;     // k_j = 1..N_j per factor
    std::vector<cplx> S;    // approximate vevs
};

/// Classical-limit vevs for the broken gauge group U(N_1) x ... x U(N_s):
///   S_j ~ e^{2 pi i k_j / N_j} W''(a_j) Lambda^2 prod_{k != j} (Lambda/Delta_jk)^{2 N_k / N_j}.
inline std::vector<ClassicalVacuum> classical_vevs(const Potential& pot, const std::vector<int>& N_parts,
                                                   cplx Lambda) {
    int s = static_cast<int>(N_parts.size());
    if (s > pot.n()) throw DomainError("classical_vevs: more factors than critical points");
    const auto& a = pot.critical_points();
    for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k)
            if (j != k && std::abs(a[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(k)]) < 1e-12)
                throw DomainError("classical_vevs: coincident critical points");

    std::vector<cplx> base(static_cast<std::size_t>(s));
    for (int j = 0; j < s; ++j) {
        cplx v = pot.eval_wsecond(a[static_cast<std::size_t>(j)]) * Lambda * Lambda;
        for (int k = 0; k < s; ++k) {
            if (k == j) continue;
            cplx ratio = Lambda / (a[static_cast<std::size_t>(j)] - a[static_cast<std::size_t>(k)]);
            v *= std::exp((2.0 * N_parts[static_cast<std::size_t>(k)] /
                           static_cast<double>(N_parts[static_cast<std::size_t>(j)])) *
                          std::log(ratio));
        }
        base[static_cast<std::size_t>(j)] = v;
    }
    std::vector<ClassicalVacuum> out;
    std::vector<int> idx(static_cast<std::size_t>(s), 1);
    for (;;) {
        ClassicalVacuum v;
        v.k = idx;
        for (int j = 0; j < s; ++j)
            v.S.push_back(std::exp(cplx(0.0, 2.0 * pi * idx[static_cast<std::size_t>(j)] /
                                             N_parts[static_cast<std::size_t>(j)])) *
                          base[static_cast<std::size_t>(j)]);
        out.push_back(std::move(v));
        int j = s - 1;
        while (j >= 0 && ++idx[static_cast<std::size_t>(j)] > N_parts[static_cast<std::size_t>(j)]) {
            idx[static_cast<std::size_t>(j)] = 1;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

/// Field-equation residuals sum_i N_i d2F/dS_i dS_j + log Lambda^{2N},
/// reduced mod 2 pi i to the band (-pi, pi].
inline std::vector<cplx> field_equation_residual(const SpectralCurve& curve, const std::vector<int>& N_parts,
                                                 cplx Lambda, double rel_tol = 1e-11) {
    int s = curve.num_cuts();
    if (static_cast<int>(N_parts.size()) != s)
        throw DomainError("field_equation_residual: N_parts size must match the number of cuts");
    int N = 0;
    for (int n : N_parts) N += n;
    std::vector<std::vector<cplx>> H;
    if (s == 1)
        H = {{d2F_one_cut(curve)}};
    else
        H = d2F_matrix(curve, rel_tol);
    std::vector<cplx> out;
    for (int j = 0; j < s; ++j) {
        cplx r = static_cast<double>(2 * N) * std::log(Lambda);
        for (int i = 0; i < s; ++i)
            r += static_cast<double>(N_parts[static_cast<std::size_t>(i)]) *
                 H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        out.push_back(mod_2pi_band(r));
    }
    return out;
}

} // namespace speccurve
