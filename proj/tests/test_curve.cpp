#include <catch2/catch_amalgamated.hpp>

#include "speccurve/curve.hpp"

using namespace speccurve;

namespace {
SpectralCurve gaussian_curve(cplx S) {
    cplx e = 2.0 * psqrt(S);
    return SpectralCurve(Potential::gaussian(), {CutSpec{-e, e, S}});
}
} // namespace

TEST_CASE("one-cut cubic branches") {
    SECTION("roots of beta^3 - beta = 0 at w=1, S=0") {
        CHECK(std::abs(cubic_beta_branch(1.0, 0.0, 0) + 1.0) < 1e-14);
        CHECK(std::abs(cubic_beta_branch(1.0, 0.0, 1) - 1.0) < 1e-14);
        CHECK(std::abs(cubic_beta_branch(1.0, 0.0, 2)) < 1e-14);
    }
    SECTION("coalescence at the moduli branch points") {
        cplx w = 3.0 / std::pow(2.0, 2.0 / 3.0);
        auto [sp, sm] = branch_points_S(w);
        CHECK(std::abs(sp - 1.0) < 1e-13);
        CHECK(std::abs(sm + 1.0) < 1e-13);
        CHECK(std::abs(cubic_beta_branch(w, sp, 1) - cubic_beta_branch(w, sp, 2)) < 1e-7);
        CHECK(std::abs(cubic_beta_branch(w, sm, 0) - cubic_beta_branch(w, sm, 2)) < 1e-7);
    }
    SECTION("small-S expansion of branch 1") {
        cplx beta = cubic_beta_branch(1.0, 0.01, 1);
        CHECK(std::abs(beta - (1.0 - 0.005 - 0.0000375)) < 1e-6);
    }
    SECTION("branch points for w = 3 and the scaling relation") {
        auto [sp, sm] = branch_points_S(3.0);
        CHECK(std::abs(sp - 2.0) < 1e-13);
        CHECK(std::abs(sm + 2.0) < 1e-13);
        double lam = 1.7;
        auto [sp1, sm1] = branch_points_S(cplx(0.8, 0.1));
        auto [sp2, sm2] = branch_points_S(lam * lam * cplx(0.8, 0.1));
        CHECK(std::abs(sp2 - std::pow(lam, 3.0) * sp1) < 1e-12);
    }
    SECTION("endpoint relations hold exactly") {
        cplx w(1.1, -0.4), S(0.2, 0.35);
        for (int k = 0; k < 3; ++k) {
            CutSpec c = solve_one_cut_cubic(w, S, k);
            cplx beta = c.beta(), delta = c.delta();
            CHECK(std::abs(2.0 * beta * beta + delta * delta - 2.0 * w) < 1e-12);
            CHECK(std::abs(beta * delta * delta - 2.0 * S) < 1e-12);
        }
    }
    SECTION("endpoint scaling relation") {
        cplx w(0.9, 0.2), S(0.15, -0.1);
        double lam = 1.45;
        for (int k = 0; k < 3; ++k) {
            CutSpec c1 = solve_one_cut_cubic(w, S, k);
            CutSpec c2 = solve_one_cut_cubic(w / (lam * lam), S / (lam * lam * lam), k);
            CHECK(std::abs(c1.a_minus - lam * c2.a_minus) < 1e-11);
            CHECK(std::abs(c1.a_plus - lam * c2.a_plus) < 1e-11);
        }
    }
}

TEST_CASE("period integrals") {
    SECTION("Gaussian curve reproduces S") {
        SpectralCurve c = gaussian_curve(1.0);
        CHECK(std::abs(period_integral(c, 0) - 1.0) < 1e-10);
    }
    SECTION("cubic one-cut curve reproduces S") {
        SpectralCurve c = one_cut_cubic_curve(1.0, 0.1, 1);
        CHECK(std::abs(period_integral(c, 0) - 0.1) < 1e-8);
    }
    SECTION("an entire integrand has vanishing A-period") {
        // W' has no residue at infinity inside A_j, so its contour integral
        // around the cut vanishes; trapezoid on an ellipse around the cut
        SpectralCurve c = one_cut_cubic_curve(cplx(1.0, 0.3), cplx(0.2, 0.1), 0);
        const BranchSqrt& b = c.branch();
        cplx m = b.midpoint(0), h = b.half_diff(0);
        const int N = 256;
        cplx acc = 0.0;
        for (int i = 0; i < N; ++i) {
            double t = 2.0 * pi * i / N;
            cplx zt = m + h * (1.3 * std::cos(t) + cplx(0.0, 0.4) * std::sin(t));
            cplx dzt = h * (-1.3 * std::sin(t) + cplx(0.0, 0.4) * std::cos(t)) * (2.0 * pi / N);
            acc += c.potential().eval_wprime(zt) * dzt;
        }
        CHECK(std::abs(acc) < 1e-12);
    }
}

TEST_CASE("endpoint residuals") {
    SECTION("exact Gaussian curve") {
        SpectralCurve c = gaussian_curve(cplx(0.7, 0.4));
        CHECK(max_abs(endpoint_residual(c)) < 1e-12);
    }
    SECTION("perturbed endpoint is detected") {
        cplx S(1.0, 0.0);
        cplx e = 2.0 * psqrt(S);
        SpectralCurve c(Potential::gaussian(), {CutSpec{-e, e + cplx(1e-3), S}});
        CHECK(max_abs(endpoint_residual(c)) > 1e-4);
    }
    SECTION("exact cubic one-cut curves, all branches") {
        cplx w(1.4, 0.3), S(0.3, -0.2);
        for (int k = 0; k < 3; ++k)
            CHECK(max_abs(endpoint_residual(one_cut_cubic_curve(w, S, k))) < 1e-9);
    }
}

TEST_CASE("classical endpoints") {
    SECTION("Gaussian is exact") {
        auto cuts = classical_endpoints(Potential::gaussian(), {cplx(0.09, 0.02)});
        REQUIRE(cuts.size() == 1);
        cplx e = 2.0 * psqrt(cplx(0.09, 0.02));
        CHECK(std::abs(cuts[0].a_plus - e) < 1e-14);
        CHECK(std::abs(cuts[0].a_minus + e) < 1e-14);
    }
    SECTION("cubic delta^2 = 2S at the critical point +1") {
        auto cuts = classical_endpoints(Potential::cubic(1.0), {cplx(0.0), cplx(1e-3, 5e-4)});
        cplx d2 = sqr(cuts[1].delta());
        CHECK(std::abs(d2 - 2.0 * cplx(1e-3, 5e-4)) < 1e-12);
    }
    SECTION("classical approximation error scales as S^2") {
        // compare with the exact one-cut branch around +sqrt(w)
        cplx w = 1.0;
        auto err = [&](double s) {
            CutSpec exact = solve_one_cut_cubic(w, s, 1);
            auto approx = classical_endpoints(Potential::cubic(w), {cplx(0.0), cplx(s)});
            return std::abs(sqr(exact.delta()) - sqr(approx[1].delta()));
        };
        double e1 = err(1e-4), e2 = err(2e-4);
        CHECK(e2 / e1 > 3.0); // quadratic scaling gives a factor of 4
        CHECK(e2 / e1 < 5.0);
        CHECK_THROWS_AS(classical_endpoints(Potential(std::vector<cplx>{cplx(0.0), cplx(0.0)}),
                                            std::vector<cplx>{cplx(1e-3)}),
                        DomainError);
    }
}

TEST_CASE("two-cut Puiseux series") {
    cplx S1(0.011, 0.004), S2(0.009, -0.006);
    SECTION("printed leading coefficients") {
        auto r = puiseux_two_cut(1.0, S1, S2, 1);
        CHECK(std::abs((r.endpoints[0] + 1.0) - cplx(0.0, 1.0) * psqrt(2.0 * S1)) < 1e-14);
        CHECK(std::abs((r.endpoints[2] - 1.0) + psqrt(2.0 * S2)) < 1e-14);
    }
    SECTION("even coefficients obey c_k = -a_k") {
        // (a+b)/2 + sqrt(w) isolates the even a-coefficients, (c+d)/2 - sqrt(w)
        // the even c-coefficients; the printed table is antisymmetric
        auto ab = puiseux_two_cut(1.0, S1, S2, 6);
        cplx even_a = 0.5 * (ab.endpoints[0] + ab.endpoints[1]) + 1.0;
        cplx even_c = 0.5 * (ab.endpoints[2] + ab.endpoints[3]) - 1.0;
        CHECK(std::abs(even_a + even_c) < 1e-12);
        CHECK(std::abs(even_a) > 1e-4);
    }
    SECTION("one-cut series is recovered at S1 = 0") {
        cplx S(0.012, 0.003);
        auto r = puiseux_two_cut(1.0, 0.0, S, 6);
        // c, d should match the one-cut endpoints around +sqrt(w) to O(S^{7/2})
        CutSpec exact = solve_one_cut_cubic(1.0, S, 1);
        CHECK(std::abs(r.endpoints[2] - exact.a_minus) < 1e-6);
        CHECK(std::abs(r.endpoints[3] - exact.a_plus) < 1e-6);
        // and the collapsed cut sits at -sqrt(w) = -beta of branch... the double root
        CHECK(std::abs(r.endpoints[0] - r.endpoints[1]) < 1e-10);
    }
    SECTION("warning flag for large parameters") {
        CHECK(puiseux_two_cut(1.0, 0.5, 0.5, 6).small_parameter_warning);
        CHECK_FALSE(puiseux_two_cut(1.0, 0.01, 0.01, 6).small_parameter_warning);
    }
}

TEST_CASE("two-cut solver") {
    SECTION("solves from a Puiseux guess and satisfies the invariants") {
        cplx w = 1.0;
        cplx S1(0.01), S2(0.01);
        auto guess = puiseux_two_cut(w, S1, S2, 6).endpoints;
        SpectralCurve c = solve_two_cut_cubic(w, S1, S2, guess);
        cplx sum = c.cuts()[0].a_minus + c.cuts()[0].a_plus + c.cuts()[1].a_minus + c.cuts()[1].a_plus;
        CHECK(std::abs(sum) < 1e-11);
        CHECK(max_abs(endpoint_residual(c)) < 1e-8);
        CHECK(std::abs(period_integral(c, 0) - S1) < 1e-8);
        CHECK(std::abs(period_integral(c, 1) - S2) < 1e-8);
    }
    SECTION("series-vs-solver error drops by at least 2^(7/4)*0.9 when S is halved") {
        cplx w = 1.0;
        auto series_err = [&](double s) {
            auto pu = puiseux_two_cut(w, s, s, 6).endpoints;
            SpectralCurve c = solve_two_cut_cubic(w, s, s, pu);
            std::array<cplx, 4> ex{c.cuts()[0].a_minus, c.cuts()[0].a_plus,
                                   c.cuts()[1].a_minus, c.cuts()[1].a_plus};
            double e = 0.0;
            for (int i = 0; i < 4; ++i) e = std::max(e, std::abs(ex[static_cast<std::size_t>(i)] - pu[static_cast<std::size_t>(i)]));
            return e;
        };
        double e1 = series_err(1e-2), e2 = series_err(5e-3);
        CHECK(e1 / e2 >= std::pow(2.0, 1.75) * 0.9);
    }
    SECTION("continuation: constant path returns the start curve") {
        cplx w = 1.0, S1(0.02), S2(0.015);
        SpectralCurve start = solve_two_cut_cubic(w, S1, S2, puiseux_two_cut(w, S1, S2, 6).endpoints);
        auto res = continue_two_cut(w, {{S1, S2}, {S1, S2}}, start);
        REQUIRE(res.curves.size() == 2);
        CHECK(std::abs(res.curves[1].cuts()[0].a_minus - start.cuts()[0].a_minus) < 1e-10);
    }
    SECTION("continuation toward (0,0) approaches the classical points") {
        cplx w = 1.0;
        cplx S1(0.02, 0.004), S2(0.018, -0.002);
        SpectralCurve start = solve_two_cut_cubic(w, S1, S2, puiseux_two_cut(w, S1, S2, 6).endpoints);
        std::vector<std::pair<cplx, cplx>> path;
        for (int i = 0; i <= 8; ++i) {
            double f = 1.0 - 0.975 * i / 8.0;
            path.push_back({S1 * f, S2 * f});
        }
        auto res = continue_two_cut(w, path, start);
        REQUIRE_FALSE(res.failed_at.has_value());
        const SpectralCurve& last = res.curves.back();
        CHECK(std::abs(last.cuts()[0].a_minus + 1.0) < 0.06);
        CHECK(std::abs(last.cuts()[0].a_plus + 1.0) < 0.06);
        CHECK(std::abs(last.cuts()[1].a_minus - 1.0) < 0.06);
        CHECK(std::abs(last.cuts()[1].a_plus - 1.0) < 0.06);
    }
}

TEST_CASE("Seiberg-Witten slice") {
    cplx w(1.3, 0.55);
    double aw = std::abs(w);
    SECTION("symmetric endpoints across the family") {
        for (double f : {0.05, 0.35, 0.7, 0.95}) {
            double mod_a = std::sqrt(aw) + f * (std::sqrt(2.0 * aw) - std::sqrt(aw));
            auto [S1, curve] = sw_slice_solve(w, mod_a);
            CHECK(std::abs(curve.cuts()[1].a_minus + curve.cuts()[0].a_plus) < 1e-12);
            CHECK(std::abs(curve.cuts()[1].a_plus + curve.cuts()[0].a_minus) < 1e-12);
            CHECK(std::abs(std::remainder(std::arg(S1) - 1.5 * std::arg(w), 2.0 * pi)) < 1e-10);
            // the slice curve satisfies its period conditions
            CHECK(std::abs(period_integral(curve, 0) - S1) < 1e-6 * std::max(std::abs(S1), 1e-3));
            CHECK(std::abs(period_integral(curve, 1) + S1) < 1e-6 * std::max(std::abs(S1), 1e-3));
        }
    }
    SECTION("upper limit merges the cuts; S1 tends to the closed-form value") {
        auto [S1, curve] = sw_slice_solve(w, std::sqrt(2.0 * aw) * (1.0 - 1e-9));
        cplx lim = psqrt(2.0 * w);
        CHECK(std::abs(curve.cuts()[0].a_minus - lim) < 1e-4);
        CHECK(std::abs(curve.cuts()[1].a_plus + lim) < 1e-4);
        CHECK(std::abs(curve.cuts()[0].a_plus) < 1e-4);  // b -> 0
        // |S1| -> (2|w|)^{3/2} / (6 pi) at the merge point, not zero
        CHECK(std::abs(std::abs(S1) - std::pow(2.0 * aw, 1.5) / (6.0 * pi)) < 1e-6);
    }
    SECTION("lower limit shrinks both cuts onto the critical points, S1 -> 0") {
        auto [S1, curve] = sw_slice_solve(w, std::sqrt(aw) * (1.0 + 1e-6));
        CHECK(std::abs(S1) < 1e-8);
        CHECK(std::abs(std::abs(curve.cuts()[0].a_minus) - std::abs(curve.cuts()[0].a_plus)) < 3e-6);
        CHECK(std::abs(curve.cuts()[0].a_minus - psqrt(w)) < 1e-5);
    }
    SECTION("out-of-interval input is a domain error") {
        CHECK_THROWS_AS(sw_slice_solve(w, 0.5 * std::sqrt(aw)), DomainError);
    }
    SECTION("agrees with the generic two-cut solver") {
        double mod_a = 0.8 * std::sqrt(aw) + 0.2 * std::sqrt(2.0 * aw);
        auto [S1, curve] = sw_slice_solve(w, mod_a);
        std::array<cplx, 4> guess{curve.cuts()[0].a_minus * cplx(1.0 + 1e-4), curve.cuts()[0].a_plus,
                                  curve.cuts()[1].a_minus, curve.cuts()[1].a_plus * cplx(1.0 - 1e-4)};
        SpectralCurve solved = solve_two_cut_cubic(w, S1, -S1, guess);
        CHECK(std::abs(solved.cuts()[0].a_minus - curve.cuts()[0].a_minus) < 1e-8);
        CHECK(std::abs(solved.cuts()[1].a_plus - curve.cuts()[1].a_plus) < 1e-8);
    }
}
