// Complex polynomial arithmetic, root finding, and the square-root branch
// algebra needed to assemble y(z) = h(z) w(z) on a multi-cut curve.
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "complex_util.hpp"

namespace speccurve {

/// Dense univariate polynomial, coefficients in increasing degree order.
class Poly {
public:
    Poly() = default;
    explicit Poly(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Poly constant(cplx v) { return Poly({v}); }
    static Poly monomial(int deg, cplx lead = 1.0) {
        std::vector<cplx> c(static_cast<std::size_t>(deg) + 1, 0.0);
        c.back() = lead;
        return Poly(std::move(c));
    }
    /// Monic polynomial with the given roots.
    static Poly from_roots(const std::vector<cplx>& roots) {
        Poly p({1.0});
        for (cplx r : roots) p = p * Poly({-r, 1.0});
        return p;
    }

    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.empty(); }
    cplx coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : cplx(0.0);
    }
    const std::vector<cplx>& coeffs() const { return c_; }

    cplx operator()(cplx z) const {
        cplx v = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) v = v * z + c_[i];
        return v;
    }

    Poly derivative() const {
        if (c_.size() <= 1) return Poly();
        std::vector<cplx> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
        return Poly(std::move(d));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
        return Poly(std::move(c));
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<cplx> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
        for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] -= b.c_[i];
        return Poly(std::move(c));
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        if (a.is_zero() || b.is_zero()) return Poly();
        std::vector<cplx> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Poly(std::move(c));
    }
    friend Poly operator*(cplx s, const Poly& a) {
        std::vector<cplx> c = a.c_;
        for (auto& v : c) v *= s;
        return Poly(std::move(c));
    }

    double max_coeff_magnitude() const {
        double m = 0.0;
        for (cplx v : c_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    void trim() {
        while (!c_.empty() && std::abs(c_.back()) == 0.0) c_.pop_back();
    }
    std::vector<cplx> c_;
};

/// All roots of p by the Aberth-Ehrlich iteration, polished with Newton steps.
/// Contract is residual-based: |p(root)| <= 1e-12 * max coefficient magnitude.
inline std::vector<cplx> poly_roots(const Poly& p) {
    if (p.is_zero()) throw DomainError("poly_roots: zero polynomial");
    int n = p.degree();
    if (n < 1) throw DomainError("poly_roots: degree must be >= 1");
    if (n == 1) return {-p.coeff(0) / p.coeff(1)};

    // initial guesses on a circle scaled by the coefficient magnitudes
    double lead = std::abs(p.coeff(n));
    double r = 0.0;
    for (int k = 0; k < n; ++k)
        r = std::max(r, std::pow(std::abs(p.coeff(k)) / lead, 1.0 / (n - k)));
    r = 1.5 * std::max(r, 1e-6);
    std::vector<cplx> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        x[static_cast<std::size_t>(i)] = r * std::exp(cplx(0.0, 2.0 * pi * (i + 0.25) / n));

    Poly dp = p.derivative();
    for (int iter = 0; iter < 400; ++iter) {
        double move = 0.0;
        for (int i = 0; i < n; ++i) {
            cplx xi = x[static_cast<std::size_t>(i)];
            cplx pv = p(xi);
            if (pv == cplx(0.0)) continue;
            cplx ratio = pv / dp(xi);
            cplx sum = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += 1.0 / (xi - x[static_cast<std::size_t>(j)]);
            cplx delta = ratio / (1.0 - ratio * sum);
            x[static_cast<std::size_t>(i)] = xi - delta;
            move = std::max(move, std::abs(delta));
        }
        if (move < 1e-15 * (1.0 + r)) break;
    }
    // Newton polish
    for (auto& xi : x)
        for (int k = 0; k < 3; ++k) {
            cplx d = dp(xi);
            if (std::abs(d) == 0.0) break;
            xi -= p(xi) / d;
        }
    return x;
}

/// Tree-level potential W(z) = z^{n+1}/(n+1) + t_n z^n + ... + t_1 z
/// (monic derivative W'). Stores the critical points a_1..a_n.
class Potential {
public:
    /// Build from the couplings t_1..t_n.
    explicit Potential(std::vector<cplx> t) : t_(std::move(t)) {
        int n = static_cast<int>(t_.size());
        std::vector<cplx> wp(static_cast<std::size_t>(n) + 1);
        for (int k = 1; k <= n; ++k) wp[static_cast<std::size_t>(k - 1)] = t_[static_cast<std::size_t>(k - 1)] * static_cast<double>(k);
        wp[static_cast<std::size_t>(n)] = 1.0;
        wprime_ = Poly(std::move(wp));
        critical_points_ = poly_roots(wprime_);
        std::sort(critical_points_.begin(), critical_points_.end(),
                  [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
    }

    /// W(z) = z^2/2.
    static Potential gaussian() { return Potential(std::vector<cplx>{cplx(0.0)}); }
    /// W(z) = z^3/3 - w z.
    static Potential cubic(cplx w) { return Potential(std::vector<cplx>{-w, cplx(0.0)}); }

    int n() const { return static_cast<int>(t_.size()); }
    const std::vector<cplx>& couplings() const { return t_; }
    const Poly& wprime() const { return wprime_; }
    const std::vector<cplx>& critical_points() const { return critical_points_; }

    cplx eval(cplx z) const {
        int deg = n();
        cplx v = 1.0 / static_cast<double>(deg + 1);
        for (int k = deg; k >= 1; --k) v = v * z + t_[static_cast<std::size_t>(k - 1)];
        return v * z;
    }
    cplx eval_wprime(cplx z) const { return wprime_(z); }
    cplx eval_wsecond(cplx z) const { return wprime_.derivative()(z); }

private:
    std::vector<cplx> t_;
    Poly wprime_;
    std::vector<cplx> critical_points_;
};

enum class Side { plus, minus, off_cut };

/// Branch of w(z) = sqrt(prod_m (z-a_m^-)(z-a_m^+)) fixed by w ~ z^s at
/// infinity, with branch cuts on the straight segments joining each pair.
class BranchSqrt {
public:
    explicit BranchSqrt(std::vector<cplx> branch_points) : pts_(std::move(branch_points)) {
        if (pts_.size() % 2 != 0 || pts_.empty())
            throw DomainError("BranchSqrt: need an even, positive number of branch points");
        for (std::size_t i = 0; i < pts_.size(); ++i)
            for (std::size_t j = i + 1; j < pts_.size(); ++j)
                if (pts_[i] == pts_[j]) throw DomainError("BranchSqrt: branch points must be distinct");
    }

    int num_cuts() const { return static_cast<int>(pts_.size()) / 2; }
    const std::vector<cplx>& branch_points() const { return pts_; }
    cplx a_minus(int j) const { return pts_[2 * static_cast<std::size_t>(j)]; }
    cplx a_plus(int j) const { return pts_[2 * static_cast<std::size_t>(j) + 1]; }
    cplx midpoint(int j) const { return 0.5 * (a_minus(j) + a_plus(j)); }
    cplx half_diff(int j) const { return 0.5 * (a_plus(j) - a_minus(j)); }

    /// Factor sqrt((z-a^-)(z-a^+)) with cut on the segment, ~ (z-m) at infinity.
    /// The ratio form keeps full relative accuracy right up to the endpoints.
    static cplx cut_factor(cplx z, cplx a_minus, cplx a_plus) {
        cplx m = 0.5 * (a_minus + a_plus);
        cplx u = z - m;
        return u * psqrt((z - a_minus) * (z - a_plus) / (u * u));
    }

    cplx factor(cplx z, int j) const { return cut_factor(z, a_minus(j), a_plus(j)); }

    /// Product of the cut factors excluding cut j (analytic near segment j).
    cplx factor_excluding(cplx z, int j) const {
        cplx v = 1.0;
        for (int k = 0; k < num_cuts(); ++k)
            if (k != j) v *= factor(z, k);
        return v;
    }

    /// w(z) off the cuts (standard branch, cuts on the straight segments).
    cplx eval_offcut(cplx z) const {
        cplx v = 1.0;
        for (int k = 0; k < num_cuts(); ++k) v *= factor(z, k);
        return v;
    }

    /// One-sided value on cut j at z = m_j + h_j sin(theta) for theta in
    /// (-pi/2, pi/2). The plus side carries +i h_j cos(theta) for the cut's
    /// own factor; this convention makes int_{gamma_j} y(z_+) dz = 2 pi i S_j.
    cplx eval_onesided_theta(double theta, int j, Side side) const {
        cplx h = half_diff(j);
        cplx z = midpoint(j) + h * std::sin(theta);
        cplx own = cplx(0.0, 1.0) * h * std::cos(theta);
        if (side == Side::minus) own = -own;
        return own * factor_excluding(z, j);
    }

    cplx eval(cplx z, Side side) const {
        if (side == Side::off_cut) return eval_offcut(z);
        // locate the cut this z belongs to and its theta parameter
        for (int j = 0; j < num_cuts(); ++j) {
            cplx h = half_diff(j);
            cplx t = (z - midpoint(j)) / h;
            if (std::abs(t.imag()) < 1e-12 && std::abs(t.real()) <= 1.0 + 1e-12) {
                double x = std::clamp(t.real(), -1.0, 1.0);
                if (std::abs(std::abs(x) - 1.0) < 1e-14)
                    throw DomainError("BranchSqrt::eval: degenerate evaluation at a branch point");
                return eval_onesided_theta(std::asin(x), j, side);
            }
        }
        throw DomainError("BranchSqrt::eval: point is not on any cut segment");
    }

private:
    std::vector<cplx> pts_;
};

/// Continuously tracked square root of an analytic function along a path,
/// with adaptive step halving when the relative jump between consecutive
/// samples exceeds 0.5.
class SqrtTracker {
public:
    SqrtTracker(std::function<cplx(cplx)> square, cplx z0, cplx value0)
        : sq_(std::move(square)), z_(z0), v_(value0) {}

    cplx value() const { return v_; }
    cplx pos() const { return z_; }

    /// Continue the tracked branch to z_new; returns the value there.
    cplx advance(cplx z_new, int max_halvings = 40) {
        step_to(z_new, max_halvings);
        return v_;
    }

private:
    void step_to(cplx target, int budget) {
        cplx s = psqrt(sq_(target));
        cplx keep = (std::abs(s - v_) <= std::abs(s + v_)) ? s : -s;
        double ref = std::max(std::abs(v_), std::abs(keep));
        if (ref > 0.0 && std::abs(keep - v_) > 0.5 * ref && budget > 0) {
            cplx mid = 0.5 * (z_ + target);
            step_to(mid, budget - 1);
            step_to(target, budget - 1);
            return;
        }
        z_ = target;
        v_ = keep;
    }

    std::function<cplx(cplx)> sq_;
    cplx z_;
    cplx v_;
};

/// h(z) = (W'(z)/w(z))_plus, the polynomial part of the Laurent expansion of
/// W'/w at infinity, computed by recursive series inversion. Its roots are
/// the double roots of y^2.
inline Poly positive_part_quotient(const Potential& pot, const BranchSqrt& b) {
    int n = pot.n();
    int s = b.num_cuts();
    if (n < s) throw DomainError("positive_part_quotient: deg W' must be >= number of cuts");
    int r = n - s;

    // w^2 = z^{2s} (1 + c_1/z + ... + c_{2s}/z^{2s}); series in u = 1/z
    Poly P = Poly::from_roots(b.branch_points());
    std::vector<cplx> c(static_cast<std::size_t>(r) + 1, 0.0);
    for (int m = 0; m <= r; ++m) c[static_cast<std::size_t>(m)] = P.coeff(2 * s - m); // c_0 = 1

    // R = sqrt(1 + c_1 u + ...): R_m = (c_m - sum_{j=1}^{m-1} R_j R_{m-j}) / 2
    std::vector<cplx> R(static_cast<std::size_t>(r) + 1, 0.0);
    R[0] = 1.0;
    for (int m = 1; m <= r; ++m) {
        cplx acc = c[static_cast<std::size_t>(m)];
        for (int j = 1; j < m; ++j) acc -= R[static_cast<std::size_t>(j)] * R[static_cast<std::size_t>(m - j)];
        R[static_cast<std::size_t>(m)] = 0.5 * acc;
    }
    // T = 1/R
    std::vector<cplx> T(static_cast<std::size_t>(r) + 1, 0.0);
    T[0] = 1.0;
    for (int m = 1; m <= r; ++m) {
        cplx acc = 0.0;
        for (int j = 1; j <= m; ++j) acc += R[static_cast<std::size_t>(j)] * T[static_cast<std::size_t>(m - j)];
        T[static_cast<std::size_t>(m)] = -acc;
    }
    // h_p = sum_m wprime_{p+s+m} T_m for p = 0..r
    const Poly& wp = pot.wprime();
    std::vector<cplx> h(static_cast<std::size_t>(r) + 1, 0.0);
    for (int p = 0; p <= r; ++p) {
        cplx acc = 0.0;
        for (int m = 0; m + p + s <= n; ++m) acc += wp.coeff(p + s + m) * T[static_cast<std::size_t>(m)];
        h[static_cast<std::size_t>(p)] = acc;
    }
    return Poly(std::move(h));
}

} // namespace speccurve
