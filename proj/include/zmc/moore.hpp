#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "zmc/grid.hpp"
#include "zmc/minkowski.hpp"
#include "zmc/surface.hpp"

// Rotational surfaces of Moore type in R^4_1 with zero mean curvature:
// trigonometric rotation in the (x1,x2)-plane, hyperbolic rotation in the
// (x3,x4)-plane, meridian (f(u), 0, 0, g(u)) in the Lorentz plane O e1 e4.
//
//   z(u,v) = (f cos(a v), f sin(a v), g sinh(b v), g cosh(b v))
//
// The ZMC meridian is known in closed form as f(g); the timelike arclength
// gauge g'^2 - f'^2 = 1 is recovered by integrating dg/du.

namespace zmc {

class TurningPoint : public std::runtime_error {
  public:
    TurningPoint(const std::string& msg, double u, double g, double f)
        : std::runtime_error(msg), u_halt(u), g_halt(g), f_halt(f) {}
    double u_halt, g_halt, f_halt;
};

struct MooreParams {
    double alpha = 1.0;
    double beta = 2.0;
    double A = 1.0;        // first-integral constant, c^2 = A (alpha^2 + beta^2)
    double C = 0.0;        // integration constant of the meridian
    int eps = 1;           // branch sign, +1 or -1
    double g_min = 0.05;   // meridian parameter range
    double g_max = 1.0;

    double c2() const { return A * (alpha * alpha + beta * beta); }
    double c() const { return std::sqrt(c2()); }

    void validate() const {
        if (!(alpha > 0.0) || !(beta > 0.0)) throw std::invalid_argument("MooreParams: alpha, beta must be positive");
        if (alpha == beta) throw std::invalid_argument("MooreParams: alpha != beta required");
        if (!(A > 0.0)) throw std::invalid_argument("MooreParams: A must be positive");
        if (eps != 1 && eps != -1) throw std::invalid_argument("MooreParams: eps must be +1 or -1");
        if (!(g_min < g_max)) throw std::invalid_argument("MooreParams: need g_min < g_max");
    }
};

struct MeridianSample {
    double u = 0.0;
    double f = 0.0, g = 0.0;
    double fp = 0.0, gp = 0.0;   // d/du in the arclength gauge
    double fpp = 0.0, gpp = 0.0;
};

// phase of the closed-form meridian
inline double moore_phi(double g, const MooreParams& p) {
    return (p.eps * p.alpha / p.beta) * std::log(std::abs(p.beta * g + std::sqrt(p.beta * p.beta * g * g + p.A))) + p.C;
}

// closed-form ZMC meridian: f as a total function of g
inline double meridian_closed_form(double g, const MooreParams& p) {
    return (std::sqrt(p.A) / p.alpha) * std::sin(moore_phi(g, p));
}

inline double moore_Q(double g, const MooreParams& p) { // alpha^2 f^2 + beta^2 g^2 = G
    const double f = meridian_closed_form(g, p);
    return p.alpha * p.alpha * f * f + p.beta * p.beta * g * g;
}

inline double moore_S(double g, const MooreParams& p) { // A + beta^2 g^2
    return p.A + p.beta * p.beta * g * g;
}

namespace detail {

// dg/du in the arclength gauge; smooth and positive whenever Q > 0
inline double dg_du(double g, const MooreParams& p) {
    return std::sqrt(moore_S(g, p) / moore_Q(g, p));
}

// du/dg, integrand of the arclength quadrature
inline double du_dg(double g, const MooreParams& p) {
    return std::sqrt(moore_Q(g, p) / moore_S(g, p));
}

} // namespace detail

/**
 * Meridian of a ZMC Moore surface over [g_min, g_max], arclength-gauge
 * parameter u with u(g_min) = 0. Built from the closed form in g; u <-> g
 * is resolved by fixed-step RK4 on du/dg (no turning-point degeneracy,
 * unlike the first-order system in u).
 */
class MooreMeridian {
  public:
    explicit MooreMeridian(const MooreParams& p, int table_size = 20001) : p_(p) {
        p_.validate();
        if (table_size < 9) table_size = 9;
        build_table(table_size);
    }

    const MooreParams& params() const { return p_; }
    double u_max() const { return u_of_g_.back(); }

    double g_of_u(double u) const {
        if (u <= 0.0) return p_.g_min;
        if (u >= u_max()) return p_.g_max;
        // monotone table inversion + Newton polish on u(g)
        std::size_t lo = 0, hi = u_of_g_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (u_of_g_[mid] <= u ? lo : hi) = mid;
        }
        double g = g_nodes_[lo] + (g_nodes_[hi] - g_nodes_[lo]) *
                                      (u - u_of_g_[lo]) / (u_of_g_[hi] - u_of_g_[lo]);
        for (int it = 0; it < 8; ++it) {
            const double r = u_at(g) - u;
            g -= r / detail::du_dg(g, p_);
        }
        return std::min(std::max(g, p_.g_min), p_.g_max);
    }

    MeridianSample sample_at_g(double g, double u) const {
        MeridianSample s;
        s.u = u;
        s.g = g;
        const double phi = moore_phi(g, p_);
        const double Q = moore_Q(g, p_);
        const double S = moore_S(g, p_);
        s.f = (std::sqrt(p_.A) / p_.alpha) * std::sin(phi);
        s.gp = std::sqrt(S / Q);
        s.fp = p_.eps * std::sqrt(p_.A) * std::cos(phi) / std::sqrt(Q);
        const double Qd = 2.0 * p_.alpha * p_.alpha * s.f * s.fp + 2.0 * p_.beta * p_.beta * s.g * s.gp;
        s.fpp = -p_.alpha * p_.alpha * s.f / Q - s.fp * Qd / (2.0 * Q);
        s.gpp = p_.beta * p_.beta * s.g / Q - s.gp * Qd / (2.0 * Q);
        return s;
    }

    MeridianSample sample(double u) const { return sample_at_g(g_of_u(u), u); }

  private:
    void build_table(int n) {
        g_nodes_.resize(n);
        u_of_g_.resize(n);
        const double dg = (p_.g_max - p_.g_min) / (n - 1);
        for (int k = 0; k < n; ++k) g_nodes_[k] = p_.g_min + k * dg;
        u_of_g_[0] = 0.0;
        for (int k = 0; k + 1 < n; ++k) {
            // classic one-step RK4 on du/dg between table nodes
            const double g0 = g_nodes_[k];
            const double k1 = detail::du_dg(g0, p_);
            const double k2 = detail::du_dg(g0 + 0.5 * dg, p_);
            const double k4 = detail::du_dg(g0 + dg, p_);
            u_of_g_[k + 1] = u_of_g_[k] + dg / 6.0 * (k1 + 4.0 * k2 + k4);
        }
    }

    double u_at(double g) const {
        // local quadrature from the nearest table node (Simpson refinement)
        const double dg = g_nodes_[1] - g_nodes_[0];
        double pos = (g - g_nodes_.front()) / dg;
        std::size_t k = static_cast<std::size_t>(std::max(0.0, std::min(pos, double(g_nodes_.size() - 1))));
        if (k >= g_nodes_.size() - 1) k = g_nodes_.size() - 2;
        const double a = g_nodes_[k];
        const double d = g - a;
        const double k1 = detail::du_dg(a, p_);
        const double k2 = detail::du_dg(a + 0.5 * d, p_);
        const double k4 = detail::du_dg(a + d, p_);
        return u_of_g_[k] + d / 6.0 * (k1 + 4.0 * k2 + k4);
    }

    MooreParams p_;
    std::vector<double> g_nodes_;
    std::vector<double> u_of_g_;
};

/**
 * RK4 on the first-order meridian system of the ZMC condition,
 *   f'^2 = (A - a^2 f^2) / Q,   g'^2 = (A + b^2 g^2) / Q,
 * marching in the gauge parameter u with fixed signs. Halts with
 * TurningPoint when A - a^2 f^2 falls below tol (f' -> 0); continuing
 * through the square-root branch is the closed form's job, not ours.
 */
inline std::vector<MeridianSample> meridian_ode_solve(const MooreParams& p, double g0, double f0,
                                                      double u_end, int n_samples,
                                                      int sign_fp = 1, int sign_gp = 1,
                                                      double tol = 1e-12) {
    p.validate();
    if (n_samples < 2) throw std::invalid_argument("meridian_ode_solve: need n_samples >= 2");
    const double a2 = p.alpha * p.alpha, b2 = p.beta * p.beta;
    auto rhs = [&](double f, double g, double& fp, double& gp) {
        const double Q = a2 * f * f + b2 * g * g;
        const double num_f = p.A - a2 * f * f;
        if (num_f < tol) return false;
        fp = sign_fp * std::sqrt(num_f / Q);
        gp = sign_gp * std::sqrt((p.A + b2 * g * g) / Q);
        return true;
    };
    const double h = u_end / (n_samples - 1);
    std::vector<MeridianSample> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    double f = f0, g = g0;
    for (int k = 0; k < n_samples; ++k) {
        MeridianSample s;
        s.u = k * h;
        s.f = f;
        s.g = g;
        if (!rhs(f, g, s.fp, s.gp))
            throw TurningPoint("meridian_ode_solve: turning point A = alpha^2 f^2 reached", s.u, g, f);
        const double Q = a2 * f * f + b2 * g * g;
        const double Qd = 2.0 * a2 * f * s.fp + 2.0 * b2 * g * s.gp;
        s.fpp = -a2 * f / Q - s.fp * Qd / (2.0 * Q);
        s.gpp = b2 * g / Q - s.gp * Qd / (2.0 * Q);
        out.push_back(s);
        if (k + 1 == n_samples) break;
        double k1f, k1g, k2f, k2g, k3f, k3g, k4f, k4g;
        double ff, gg;
        if (!rhs(f, g, k1f, k1g))
            throw TurningPoint("meridian_ode_solve: turning point reached", s.u, g, f);
        ff = f + 0.5 * h * k1f; gg = g + 0.5 * h * k1g;
        if (!rhs(ff, gg, k2f, k2g))
            throw TurningPoint("meridian_ode_solve: turning point reached", s.u, gg, ff);
        ff = f + 0.5 * h * k2f; gg = g + 0.5 * h * k2g;
        if (!rhs(ff, gg, k3f, k3g))
            throw TurningPoint("meridian_ode_solve: turning point reached", s.u, gg, ff);
        ff = f + h * k3f; gg = g + h * k3g;
        if (!rhs(ff, gg, k4f, k4g))
            throw TurningPoint("meridian_ode_solve: turning point reached", s.u, gg, ff);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    }
    return out;
}

// ---- patches -------------------------------------------------------------

namespace detail {

inline Vec4 moore_point(const MeridianSample& s, double av, double bv) {
    return {s.f * std::cos(av), s.f * std::sin(av), s.g * std::sinh(bv), s.g * std::cosh(bv)};
}

} // namespace detail

/**
 * Analytic ZMC Moore patch in the arclength gauge: u in [0, u(g_max)],
 * E = -1, F = 0, G = alpha^2 f^2 + beta^2 g^2 at every node. All partial
 * derivatives are supplied in closed form.
 */
inline SurfacePatch zmc_moore_patch(const MooreMeridian& mer, int nu, int nv,
                                    double v_min = 0.0, double v_max = 1.0) {
    const MooreParams p = mer.params();
    GridSpec g{nu, nv, 0.0, mer.u_max(), v_min, v_max};
    const double a = p.alpha, b = p.beta;
    auto sample = [mer](double u) { return mer.sample(u); };
    SurfacePatch patch(g, [sample, a, b](double u, double v) {
        return detail::moore_point(sample(u), a * v, b * v);
    });
    patch.set_derivative_suppliers(
        [sample, a, b](double u, double v) { // z_u
            const MeridianSample s = sample(u);
            return Vec4{s.fp * std::cos(a * v), s.fp * std::sin(a * v), s.gp * std::sinh(b * v),
                        s.gp * std::cosh(b * v)};
        },
        [sample, a, b](double u, double v) { // z_v
            const MeridianSample s = sample(u);
            return Vec4{-a * s.f * std::sin(a * v), a * s.f * std::cos(a * v),
                        b * s.g * std::cosh(b * v), b * s.g * std::sinh(b * v)};
        },
        [sample, a, b](double u, double v) { // z_uu
            const MeridianSample s = sample(u);
            return Vec4{s.fpp * std::cos(a * v), s.fpp * std::sin(a * v), s.gpp * std::sinh(b * v),
                        s.gpp * std::cosh(b * v)};
        },
        [sample, a, b](double u, double v) { // z_uv
            const MeridianSample s = sample(u);
            return Vec4{-a * s.fp * std::sin(a * v), a * s.fp * std::cos(a * v),
                        b * s.gp * std::cosh(b * v), b * s.gp * std::sinh(b * v)};
        },
        [sample, a, b](double u, double v) { // z_vv
            const MeridianSample s = sample(u);
            return Vec4{-a * a * s.f * std::cos(a * v), -a * a * s.f * std::sin(a * v),
                        b * b * s.g * std::sinh(b * v), b * b * s.g * std::cosh(b * v)};
        });
    return patch;
}

// closed-form invariants of the ZMC Moore surface at meridian point u
struct MooreInvariants {
    double nu = 0.0, mu = 0.0;
    double K = 0.0, kappa = 0.0;
    double E = 0.0, G = 0.0;
};

inline MooreInvariants moore_invariants(const MooreMeridian& mer, double u) {
    const MooreParams& p = mer.params();
    const MeridianSample s = mer.sample(u);
    const double Q = p.alpha * p.alpha * s.f * s.f + p.beta * p.beta * s.g * s.g;
    MooreInvariants inv;
    inv.E = s.fp * s.fp - s.gp * s.gp; // = -1 in the gauge
    inv.G = Q;
    const double root = std::sqrt(s.gp * s.gp - s.fp * s.fp);
    inv.nu = -(p.alpha * p.alpha * s.f * s.gp + p.beta * p.beta * s.g * s.fp) / (root * Q);
    inv.mu = p.alpha * p.beta * (s.gp * s.f - s.fp * s.g) / (root * Q);
    inv.K = inv.nu * inv.nu - inv.mu * inv.mu;
    inv.kappa = -2.0 * inv.nu * inv.mu;
    return inv;
}

// paper frame of the Moore surface (x, y, n1, n2) at (u, v); the coordinate
// frame is already the geometric frame for this family
inline Frame4 moore_frame(const MooreMeridian& mer, double u, double v) {
    const MooreParams& p = mer.params();
    const MeridianSample s = mer.sample(u);
    const double Q = p.alpha * p.alpha * s.f * s.f + p.beta * p.beta * s.g * s.g;
    const double root = std::sqrt(s.gp * s.gp - s.fp * s.fp);
    const double ca = std::cos(p.alpha * v), sa = std::sin(p.alpha * v);
    const double cb = std::cosh(p.beta * v), sb = std::sinh(p.beta * v);
    Frame4 F;
    F.x = Vec4{s.fp * ca, s.fp * sa, s.gp * sb, s.gp * cb} / root;
    F.y = Vec4{-p.alpha * s.f * sa, p.alpha * s.f * ca, p.beta * s.g * cb, p.beta * s.g * sb} / std::sqrt(Q);
    F.n1 = Vec4{s.gp * ca, s.gp * sa, s.fp * sb, s.fp * cb} / root;
    F.n2 = Vec4{p.beta * s.g * sa, -p.beta * s.g * ca, p.alpha * s.f * cb, p.alpha * s.f * sb} / std::sqrt(Q);
    return F;
}

// ---- canonical parameters ------------------------------------------------

// In canonical parameters (ub, vb):
//   ub(g) = (sqrt(c)/beta) [ asinh(beta g / sqrt(A)) ]_{g_min}^{g},  vb = sqrt(c) v,
// with closed-form inverse g(ub); the meridian functions then satisfy
//   f_ub = eps sqrt(A) cos(phi)/sqrt(c),  g_ub = sqrt(S/c),
//   f_ubub = -alpha^2 f / c,              g_ubub = +beta^2 g / c.
struct MooreCanonical {
    SurfacePatch patch;        // canonical-parameter patch with analytic suppliers
    GridField mu, nu;          // invariant fields on the canonical grid
    GridField K, kappa;        // K = nu^2 - mu^2, kappa = -2 nu mu
    GridField X, Y;            // K = e^{2X} cos Y, kappa = e^{2X} sin Y
    double ub_max = 0.0;
};

inline double moore_ub_of_g(double g, const MooreParams& p) {
    const double rA = std::sqrt(p.A);
    return std::sqrt(p.c()) / p.beta *
           (std::asinh(p.beta * g / rA) - std::asinh(p.beta * p.g_min / rA));
}

inline double moore_g_of_ub(double ub, const MooreParams& p) {
    const double rA = std::sqrt(p.A);
    return rA / p.beta *
           std::sinh(p.beta * ub / std::sqrt(p.c()) + std::asinh(p.beta * p.g_min / rA));
}

inline MooreCanonical moore_canonical_parameters(const MooreParams& params, int nu_nodes, int nv_nodes,
                                                 double v_min = 0.0, double v_max = 1.0) {
    params.validate();
    const MooreParams p = params;
    const double c = p.c();
    const double rc = std::sqrt(c);
    const double ub_max = moore_ub_of_g(p.g_max, p);
    GridSpec gs{nu_nodes, nv_nodes, 0.0, ub_max, rc * v_min, rc * v_max};

    struct State {
        double f, g, fub, gub, fubub, gubub;
    };
    auto state_at = [p, c](double ub) {
        State s;
        s.g = moore_g_of_ub(ub, p);
        const double phi = moore_phi(s.g, p);
        s.f = (std::sqrt(p.A) / p.alpha) * std::sin(phi);
        s.gub = std::sqrt(moore_S(s.g, p) / c);
        s.fub = p.eps * std::sqrt(p.A) * std::cos(phi) / std::sqrt(c);
        s.fubub = -p.alpha * p.alpha * s.f / c;
        s.gubub = p.beta * p.beta * s.g / c;
        return s;
    };
    const double w = 1.0 / rc; // dv/dvb

    SurfacePatch patch(gs, [state_at, p, w](double ub, double vb) {
        const State s = state_at(ub);
        const double v = w * vb;
        return detail::moore_point(MeridianSample{0, s.f, s.g, 0, 0, 0, 0}, p.alpha * v, p.beta * v);
    });
    const double a = p.alpha, b = p.beta;
    patch.set_derivative_suppliers(
        [state_at, a, b, w](double ub, double vb) { // z_ub
            const State s = state_at(ub);
            const double v = w * vb;
            return Vec4{s.fub * std::cos(a * v), s.fub * std::sin(a * v), s.gub * std::sinh(b * v),
                        s.gub * std::cosh(b * v)};
        },
        [state_at, a, b, w](double ub, double vb) { // z_vb
            const State s = state_at(ub);
            const double v = w * vb;
            return Vec4{-a * s.f * std::sin(a * v) * w, a * s.f * std::cos(a * v) * w,
                        b * s.g * std::cosh(b * v) * w, b * s.g * std::sinh(b * v) * w};
        },
        [state_at, a, b, w](double ub, double vb) { // z_ubub
            const State s = state_at(ub);
            const double v = w * vb;
            return Vec4{s.fubub * std::cos(a * v), s.fubub * std::sin(a * v), s.gubub * std::sinh(b * v),
                        s.gubub * std::cosh(b * v)};
        },
        [state_at, a, b, w](double ub, double vb) { // z_ubvb
            const State s = state_at(ub);
            const double v = w * vb;
            return Vec4{-a * s.fub * std::sin(a * v) * w, a * s.fub * std::cos(a * v) * w,
                        b * s.gub * std::cosh(b * v) * w, b * s.gub * std::sinh(b * v) * w};
        },
        [state_at, a, b, w](double ub, double vb) { // z_vbvb
            const State s = state_at(ub);
            const double v = w * vb;
            return Vec4{-a * a * s.f * std::cos(a * v) * w * w, -a * a * s.f * std::sin(a * v) * w * w,
                        b * b * s.g * std::sinh(b * v) * w * w, b * b * s.g * std::cosh(b * v) * w * w};
        });

    MooreCanonical out{std::move(patch), GridField(gs), GridField(gs), GridField(gs),
                       GridField(gs), GridField(gs), GridField(gs), ub_max};
    for (int i = 0; i < gs.nu; ++i) {
        const State s = state_at(gs.u(i));
        const double Q = a * a * s.f * s.f + b * b * s.g * s.g;
        // invariants from the gauge-independent closed forms
        const double root = 1.0; // g'^2 - f'^2 = 1 in the arclength gauge used by the formulas
        const double gp = std::sqrt(moore_S(s.g, p) / Q);
        const double fp = p.eps * std::sqrt(p.A) * std::cos(moore_phi(s.g, p)) / std::sqrt(Q);
        const double nu_v = -(a * a * s.f * gp + b * b * s.g * fp) / (root * Q);
        const double mu_v = a * b * (gp * s.f - fp * s.g) / (root * Q);
        const double K_v = nu_v * nu_v - mu_v * mu_v;
        const double kap_v = -2.0 * nu_v * mu_v;
        const double X_v = 0.5 * std::log(mu_v * mu_v + nu_v * nu_v);
        for (int j = 0; j < gs.nv; ++j) {
            out.mu.at(i, j) = mu_v;
            out.nu.at(i, j) = nu_v;
            out.K.at(i, j) = K_v;
            out.kappa.at(i, j) = kap_v;
            out.X.at(i, j) = X_v;
        }
    }
    // Y = atan2(kappa, K), unwrapped along u (fields are v-independent)
    double prev = std::atan2(out.kappa.at(0, 0), out.K.at(0, 0));
    for (int i = 0; i < gs.nu; ++i) {
        double y = std::atan2(out.kappa.at(i, 0), out.K.at(i, 0));
        while (y - prev > M_PI) y -= 2.0 * M_PI;
        while (y - prev < -M_PI) y += 2.0 * M_PI;
        prev = y;
        for (int j = 0; j < gs.nv; ++j) out.Y.at(i, j) = y;
    }
    return out;
}

// ---- general Moore rotation ----------------------------------------------

/**
 * A meridian curve given by four coordinate functions of u with two
 * derivatives, plus its causal character eps (+1 spacelike, -1 timelike)
 * in the unit-speed normalization.
 */
struct GeneralMeridian {
    std::function<Vec4(double)> x;    // position
    std::function<Vec4(double)> dx;   // first derivative
    std::function<Vec4(double)> ddx;  // second derivative
    int eps = -1;
};

// Moore rotation: trigonometric mixing of (x1, x2), hyperbolic mixing of (x3, x4).
inline SurfacePatch moore_rotate(const GeneralMeridian& m, double alpha, double beta, const GridSpec& grid) {
    auto rot = [alpha, beta](const Vec4& q, double v) {
        const double ca = std::cos(alpha * v), sa = std::sin(alpha * v);
        const double cb = std::cosh(beta * v), sb = std::sinh(beta * v);
        return Vec4{q.x1 * ca - q.x2 * sa, q.x1 * sa + q.x2 * ca,
                    q.x3 * cb + q.x4 * sb, q.x3 * sb + q.x4 * cb};
    };
    auto rot_v = [alpha, beta](const Vec4& q, double v) { // d/dv of the rotation applied to fixed q
        const double ca = std::cos(alpha * v), sa = std::sin(alpha * v);
        const double cb = std::cosh(beta * v), sb = std::sinh(beta * v);
        return Vec4{alpha * (-q.x1 * sa - q.x2 * ca), alpha * (q.x1 * ca - q.x2 * sa),
                    beta * (q.x3 * sb + q.x4 * cb), beta * (q.x3 * cb + q.x4 * sb)};
    };
    auto rot_vv = [alpha, beta](const Vec4& q, double v) {
        const double ca = std::cos(alpha * v), sa = std::sin(alpha * v);
        const double cb = std::cosh(beta * v), sb = std::sinh(beta * v);
        return Vec4{-alpha * alpha * (q.x1 * ca - q.x2 * sa), -alpha * alpha * (q.x1 * sa + q.x2 * ca),
                    beta * beta * (q.x3 * cb + q.x4 * sb), beta * beta * (q.x3 * sb + q.x4 * cb)};
    };
    GeneralMeridian mm = m;
    SurfacePatch patch(grid, [mm, rot](double u, double v) { return rot(mm.x(u), v); });
    patch.set_derivative_suppliers(
        [mm, rot](double u, double v) { return rot(mm.dx(u), v); },
        [mm, rot_v](double u, double v) { return rot_v(mm.x(u), v); },
        [mm, rot](double u, double v) { return rot(mm.ddx(u), v); },
        [mm, rot_v](double u, double v) { return rot_v(mm.dx(u), v); },
        [mm, rot_vv](double u, double v) { return rot_vv(mm.x(u), v); });
    return patch;
}

} // namespace zmc
