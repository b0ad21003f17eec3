#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "zmc/grid.hpp"
#include "zmc/minkowski.hpp"
#include "zmc/surface.hpp"

// Geometric (canonical) frame of a timelike ZMC patch free of flat points:
// hyperbolic rotation of the tangent frame until sigma(x,x) _|_ sigma(x,y),
// invariant extraction, structure-equation residuals, and the change to
// canonical parameters.

namespace zmc {

class NotSemiCanonical : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// components of sigma in an adapted orthonormal frame:
// sigma(x,x) = a e1 + b e2, sigma(x,y) = c e1 + d e2 (ZMC: sigma(y,y) = sigma(x,x))
struct SigmaComponents {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
};

// frame change x -> cosh(phi) x + sinh(phi) y mixes the components with angle 2 phi
inline SigmaComponents rotate_sigma(const SigmaComponents& s, double phi) {
    const double ch = std::cosh(2.0 * phi), sh = std::sinh(2.0 * phi);
    return {s.a * ch + s.c * sh, s.b * ch + s.d * sh, s.a * sh + s.c * ch, s.b * sh + s.d * ch};
}

// A = -2(ac + bd)/(a^2+b^2+c^2+d^2); |A| < 1 away from flat points, and
// phi = artanh(A)/4 makes the rotated components satisfy ac + bd = 0.
inline double diagonalizing_angle(const SigmaComponents& s, double tol = 1e-12) {
    const double n2 = s.a * s.a + s.b * s.b + s.c * s.c + s.d * s.d;
    if (n2 <= 0.0) throw FlatPointError("diagonalizing_angle: sigma vanishes");
    const double A = -2.0 * (s.a * s.c + s.b * s.d) / n2;
    if (std::abs(A) >= 1.0 - tol)
        throw FlatPointError("diagonalizing_angle: |A| = " + std::to_string(std::abs(A)) +
                             " signals a flat point");
    return 0.25 * 0.5 * std::log((1.0 + A) / (1.0 - A)); // artanh(A)/4
}

struct GeometricFrameSample {
    Frame4 frame;      // (x, y, n1, n2)
    double nu = 0.0;   // sigma(x,x) = nu n1
    double mu = 0.0;   // sigma(x,y) = mu n2
    double phi = 0.0;  // rotation applied to the Gram-Schmidt tangents
};

struct GeometricFrameOptions {
    double metric_tol = 1e-12;
    double zmc_rel_tol = 0.05;      // ||sxx - syy|| relative to ||sxx|| + ||syy||
    double flat_rel_tol = 1e-12;    // |sigma| floor relative to local sigma scale
    double diag_tol = 1e-12;
    const Frame4* reference = nullptr; // align signs with this frame if given
};

inline GeometricFrameSample geometric_frame(const SurfaceDerivs& d, const NormalFrameField& nf, int i,
                                            int j, const GeometricFrameOptions& opt = {}) {
    const SigmaData s = sigma_components(d, i, j, opt.metric_tol);
    const double nxx = std::sqrt(inner(s.sxx, s.sxx));
    const double nyy = std::sqrt(inner(s.syy, s.syy));
    const Vec4 diff = s.sxx - s.syy;
    if (std::sqrt(inner(diff, diff)) > opt.zmc_rel_tol * (nxx + nyy) + 1e-14)
        throw NotZMC("geometric_frame: sigma(x,x) != sigma(y,y) at node (" + std::to_string(i) + "," +
                     std::to_string(j) + ")");
    const Vec4 sxx_bar = 0.5 * (s.sxx + s.syy);
    const Vec4& e1 = nf.e1.at(i, j);
    const Vec4& e2 = nf.e2.at(i, j);
    SigmaComponents sc{inner(sxx_bar, e1), inner(sxx_bar, e2), inner(s.sxy, e1), inner(s.sxy, e2)};

    const double scale = std::sqrt(sc.a * sc.a + sc.b * sc.b + sc.c * sc.c + sc.d * sc.d);
    double phi = 0.0;
    if (std::abs(sc.a * sc.c + sc.b * sc.d) > 1e-15 * scale * scale)
        phi = diagonalizing_angle(sc, opt.diag_tol);
    const SigmaComponents r = rotate_sigma(sc, phi);

    const double n1len = std::sqrt(r.a * r.a + r.b * r.b);
    const double n2len = std::sqrt(r.c * r.c + r.d * r.d);
    if (n1len <= opt.flat_rel_tol * scale || n2len <= opt.flat_rel_tol * scale)
        throw FlatPointError("geometric_frame: nu*mu = 0 at node (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");

    GeometricFrameSample out;
    out.phi = phi;
    const double ch = std::cosh(phi), sh = std::sinh(phi);
    out.frame.x = ch * s.frame.x + sh * s.frame.y;
    out.frame.y = sh * s.frame.x + ch * s.frame.y;
    out.frame.n1 = (r.a * e1 + r.b * e2) / n1len;
    out.frame.n2 = (r.c * e1 + r.d * e2) / n2len;
    out.nu = n1len;
    out.mu = n2len;

    if (opt.reference) {
        const Frame4& ref = *opt.reference;
        if (inner(out.frame.n1, ref.n1) < 0.0) {
            out.frame.n1 = -out.frame.n1;
            out.nu = -out.nu;
        }
        if (inner(out.frame.n2, ref.n2) < 0.0) {
            out.frame.n2 = -out.frame.n2;
            out.mu = -out.mu;
        }
        if (inner(out.frame.x, ref.x) > 0.0) { // timelike vectors: aligned means inner < 0
            out.frame.x = -out.frame.x;
            out.mu = -out.mu;
        }
        if (inner(out.frame.y, ref.y) < 0.0) {
            out.frame.y = -out.frame.y;
            out.mu = -out.mu;
        }
    }
    return out;
}

// frame field with sign continuity: nu > 0 at the anchor (or aligned with a
// reference anchor frame), neighbor-aligned across the grid
struct GeometricFrameField {
    GridOf<Vec4> x, y, n1, n2;
    GridField nu, mu, phi;
};

inline GeometricFrameField geometric_frame_field(const SurfaceDerivs& d, const NormalFrameField& nf,
                                                 GeometricFrameOptions opt = {}) {
    const GridSpec& g = d.zu.grid();
    GeometricFrameField out{GridOf<Vec4>(g), GridOf<Vec4>(g), GridOf<Vec4>(g), GridOf<Vec4>(g),
                            GridField(g),    GridField(g),    GridField(g)};
    const Frame4* user_ref = opt.reference;
    Frame4 prev_row_anchor;
    for (int i = 0; i < g.nu; ++i) {
        Frame4 neighbor;
        for (int j = 0; j < g.nv; ++j) {
            GeometricFrameOptions o = opt;
            if (i == 0 && j == 0) {
                o.reference = user_ref; // may be null: then nu, mu > 0 convention
            } else if (j == 0) {
                neighbor = prev_row_anchor;
                o.reference = &neighbor;
            } else {
                o.reference = &neighbor;
            }
            const GeometricFrameSample smp = geometric_frame(d, nf, i, j, o);
            out.x.at(i, j) = smp.frame.x;
            out.y.at(i, j) = smp.frame.y;
            out.n1.at(i, j) = smp.frame.n1;
            out.n2.at(i, j) = smp.frame.n2;
            out.nu.at(i, j) = smp.nu;
            out.mu.at(i, j) = smp.mu;
            out.phi.at(i, j) = smp.phi;
            neighbor = smp.frame;
            if (j == 0) prev_row_anchor = smp.frame;
        }
    }
    return out;
}

// per-node invariants of the Frenet-type derivative formulas
struct InvariantField {
    GridField E, G, nu, mu, gamma1, gamma2, beta1, beta2, K, kappa;

    explicit InvariantField(const GridSpec& g)
        : E(g), G(g), nu(g), mu(g), gamma1(g), gamma2(g), beta1(g), beta2(g), K(g), kappa(g) {}
    InvariantField() = default;

    const GridSpec& grid() const { return E.grid(); }
};

/**
 * Invariants on a semi-canonical patch (F = 0, parametric lines along the
 * canonical directions):
 *   gamma1 = y(ln sqrt(-E)),  gamma2 = -x(ln sqrt(G)),
 *   beta1 = <grad_x n1, n2>,  beta2 = <grad_y n1, n2>,
 * with x = d_u / sqrt(-E), y = d_v / sqrt(G). K and kappa follow from nu, mu.
 */
inline InvariantField frame_invariants(const SurfacePatch& p, const SurfaceDerivs& d,
                                       const GeometricFrameField& ff, double f_rel_tol = 1e-3) {
    const GridSpec& g = p.grid();
    InvariantField inv(g);
    GridField lnE(g), lnG(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const FundamentalForms f = first_fundamental(d, i, j);
            if (!(f.E < 0.0) || !(f.G > 0.0))
                throw DegenerateMetric("frame_invariants: expected E < 0 < G");
            if (std::abs(f.F) > f_rel_tol * std::sqrt(-f.E * f.G))
                throw NotSemiCanonical("frame_invariants: F != 0, not semi-canonical");
            inv.E.at(i, j) = f.E;
            inv.G.at(i, j) = f.G;
            lnE.at(i, j) = 0.5 * std::log(-f.E);
            lnG.at(i, j) = 0.5 * std::log(f.G);
            inv.nu.at(i, j) = ff.nu.at(i, j);
            inv.mu.at(i, j) = ff.mu.at(i, j);
            inv.K.at(i, j) = ff.nu.at(i, j) * ff.nu.at(i, j) - ff.mu.at(i, j) * ff.mu.at(i, j);
            inv.kappa.at(i, j) = -2.0 * ff.nu.at(i, j) * ff.mu.at(i, j);
        }
    const GridField lnE_v = d_dv(lnE);
    const GridField lnG_u = d_du(lnG);
    const GridOf<Vec4> n1_u = d_du(ff.n1);
    const GridOf<Vec4> n1_v = d_dv(ff.n1);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double sE = std::sqrt(-inv.E.at(i, j));
            const double sG = std::sqrt(inv.G.at(i, j));
            inv.gamma1.at(i, j) = lnE_v.at(i, j) / sG;
            inv.gamma2.at(i, j) = -lnG_u.at(i, j) / sE;
            inv.beta1.at(i, j) = inner(n1_u.at(i, j), ff.n2.at(i, j)) / sE;
            inv.beta2.at(i, j) = inner(n1_v.at(i, j), ff.n2.at(i, j)) / sG;
        }
    return inv;
}

// residuals of the six Gauss-Codazzi relations among the invariants
struct StructureResiduals {
    GridField R1, R2, R3, R4, R5, R6;
    const GridField& eq(int k) const {
        switch (k) {
            case 0: return R1;
            case 1: return R2;
            case 2: return R3;
            case 3: return R4;
            case 4: return R5;
            default: return R6;
        }
    }
};

inline StructureResiduals structure_equation_residuals(const InvariantField& inv) {
    const GridSpec& g = inv.grid();
    StructureResiduals r{GridField(g), GridField(g), GridField(g),
                         GridField(g), GridField(g), GridField(g)};
    const GridField mu_u = d_du(inv.mu), mu_v = d_dv(inv.mu);
    const GridField nu_u = d_du(inv.nu), nu_v = d_dv(inv.nu);
    const GridField g2_u = d_du(inv.gamma2), g1_v = d_dv(inv.gamma1);
    const GridField b2_u = d_du(inv.beta2), b1_v = d_dv(inv.beta1);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double sE = std::sqrt(-inv.E.at(i, j));
            const double sG = std::sqrt(inv.G.at(i, j));
            const double nu = inv.nu.at(i, j), mu = inv.mu.at(i, j);
            const double g1 = inv.gamma1.at(i, j), g2 = inv.gamma2.at(i, j);
            const double b1 = inv.beta1.at(i, j), b2 = inv.beta2.at(i, j);
            auto X = [&](const GridField& f_u) { return f_u.at(i, j) / sE; };
            auto Yd = [&](const GridField& f_v) { return f_v.at(i, j) / sG; };
            r.R1.at(i, j) = 2.0 * mu * g2 + nu * b2 - X(mu_u);
            r.R2.at(i, j) = -2.0 * mu * g1 + nu * b1 - Yd(mu_v);
            r.R3.at(i, j) = 2.0 * nu * g2 - mu * b2 - X(nu_u);
            r.R4.at(i, j) = -2.0 * nu * g1 - mu * b1 - Yd(nu_v);
            r.R5.at(i, j) = X(g2_u) + Yd(g1_v) + g1 * g1 - g2 * g2 - (nu * nu - mu * mu);
            r.R6.at(i, j) = X(b2_u) - Yd(b1_v) - g1 * b1 - g2 * b2 - 2.0 * nu * mu;
        }
    return r;
}

// ---- canonical reparametrization ------------------------------------------

namespace detail {

// 4-point Lagrange interpolation on (possibly non-uniform) nodes
inline double lagrange4(const double* xs, const double* ys, double x) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) {
        double w = 1.0;
        for (int l = 0; l < 4; ++l)
            if (l != k) w *= (x - xs[l]) / (xs[k] - xs[l]);
        s += w * ys[k];
    }
    return s;
}

// invert a monotone sampled map m(t_k) = m_k at value target
inline double invert_monotone(const std::vector<double>& t, const std::vector<double>& m, double target) {
    const std::size_t n = m.size();
    if (target <= m.front()) return t.front();
    if (target >= m.back()) return t.back();
    std::size_t lo = 0, hi = n - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (m[mid] <= target ? lo : hi) = mid;
    }
    std::size_t k0 = (lo >= 1) ? lo - 1 : 0;
    if (k0 + 3 >= n) k0 = n - 4;
    return lagrange4(&m[k0], &t[k0], target);
}

inline int clamp_window(int center, int n) {
    int k0 = center - 1;
    if (k0 < 0) k0 = 0;
    if (k0 + 3 >= n) k0 = n - 4;
    return k0;
}

} // namespace detail

struct CanonicalReparametrization {
    SurfacePatch patch;
    InvariantField invariants;
    std::vector<double> u_of_ubar; // source parameter at each new u-node
    std::vector<double> v_of_vbar;
};

/**
 * Change semi-canonical parameters to canonical ones: with
 * phi(u) = -E sqrt(mu^2+nu^2) and psi(v) = G sqrt(mu^2+nu^2), the new
 * parameters are ubar = int sqrt(phi) du, vbar = int sqrt(psi) dv. The
 * patch is resampled on the uniform (ubar, vbar) grid; positions come from
 * the analytic supplier when available, bicubic interpolation otherwise.
 */
inline CanonicalReparametrization canonical_reparametrization(const SurfacePatch& p,
                                                              const InvariantField& inv,
                                                              double cross_tol = 1e-6) {
    const GridSpec& g = p.grid();
    // phi must depend on u only, psi on v only
    std::vector<double> phi(static_cast<std::size_t>(g.nu)), psi(static_cast<std::size_t>(g.nv));
    double phi_scale = 0.0, psi_scale = 0.0;
    for (int i = 0; i < g.nu; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.nv; ++j) {
            const double mod = std::sqrt(inv.mu.at(i, j) * inv.mu.at(i, j) +
                                         inv.nu.at(i, j) * inv.nu.at(i, j));
            s += -inv.E.at(i, j) * mod;
        }
        phi[static_cast<std::size_t>(i)] = s / g.nv;
        phi_scale = std::max(phi_scale, std::abs(phi[static_cast<std::size_t>(i)]));
    }
    for (int j = 0; j < g.nv; ++j) {
        double s = 0.0;
        for (int i = 0; i < g.nu; ++i) {
            const double mod = std::sqrt(inv.mu.at(i, j) * inv.mu.at(i, j) +
                                         inv.nu.at(i, j) * inv.nu.at(i, j));
            s += inv.G.at(i, j) * mod;
        }
        psi[static_cast<std::size_t>(j)] = s / g.nu;
        psi_scale = std::max(psi_scale, std::abs(psi[static_cast<std::size_t>(j)]));
    }
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double mod =
                std::sqrt(inv.mu.at(i, j) * inv.mu.at(i, j) + inv.nu.at(i, j) * inv.nu.at(i, j));
            if (std::abs(-inv.E.at(i, j) * mod - phi[static_cast<std::size_t>(i)]) > cross_tol * phi_scale)
                throw NotSemiCanonical("canonical_reparametrization: -E sqrt(mu^2+nu^2) varies with v");
            if (std::abs(inv.G.at(i, j) * mod - psi[static_cast<std::size_t>(j)]) > cross_tol * psi_scale)
                throw NotSemiCanonical("canonical_reparametrization: G sqrt(mu^2+nu^2) varies with u");
        }

    // cumulative trapezoid of sqrt(phi), sqrt(psi)
    std::vector<double> ubar(static_cast<std::size_t>(g.nu), 0.0), vbar(static_cast<std::size_t>(g.nv), 0.0);
    for (int i = 1; i < g.nu; ++i)
        ubar[static_cast<std::size_t>(i)] =
            ubar[static_cast<std::size_t>(i - 1)] +
            0.5 * g.hu() * (std::sqrt(phi[static_cast<std::size_t>(i - 1)]) + std::sqrt(phi[static_cast<std::size_t>(i)]));
    for (int j = 1; j < g.nv; ++j)
        vbar[static_cast<std::size_t>(j)] =
            vbar[static_cast<std::size_t>(j - 1)] +
            0.5 * g.hv() * (std::sqrt(psi[static_cast<std::size_t>(j - 1)]) + std::sqrt(psi[static_cast<std::size_t>(j)]));

    std::vector<double> u_nodes(static_cast<std::size_t>(g.nu)), v_nodes(static_cast<std::size_t>(g.nv));
    for (int i = 0; i < g.nu; ++i) u_nodes[static_cast<std::size_t>(i)] = g.u(i);
    for (int j = 0; j < g.nv; ++j) v_nodes[static_cast<std::size_t>(j)] = g.v(j);

    GridSpec ng{g.nu, g.nv, 0.0, ubar.back(), 0.0, vbar.back()};
    std::vector<double> u_src(static_cast<std::size_t>(ng.nu)), v_src(static_cast<std::size_t>(ng.nv));
    for (int i = 0; i < ng.nu; ++i) u_src[static_cast<std::size_t>(i)] = detail::invert_monotone(u_nodes, ubar, ng.u(i));
    for (int j = 0; j < ng.nv; ++j) v_src[static_cast<std::size_t>(j)] = detail::invert_monotone(v_nodes, vbar, ng.v(j));

    std::vector<Vec4> pos(ng.size());
    if (p.has_position_supplier()) {
        for (int i = 0; i < ng.nu; ++i)
            for (int j = 0; j < ng.nv; ++j)
                pos[ng.idx(i, j)] =
                    p.eval_position(u_src[static_cast<std::size_t>(i)], v_src[static_cast<std::size_t>(j)]);
    } else {
        // bicubic Lagrange on the sampled positions
        for (int i = 0; i < ng.nu; ++i) {
            const double uu = u_src[static_cast<std::size_t>(i)];
            const int k0 = detail::clamp_window(static_cast<int>((uu - g.u_min) / g.hu()), g.nu);
            for (int j = 0; j < ng.nv; ++j) {
                const double vv = v_src[static_cast<std::size_t>(j)];
                const int l0 = detail::clamp_window(static_cast<int>((vv - g.v_min) / g.hv()), g.nv);
                Vec4 r;
                for (std::size_t comp = 0; comp < 4; ++comp) {
                    double xs[4], ysu[4];
                    for (int a = 0; a < 4; ++a) {
                        double vs[4], ys[4];
                        for (int b = 0; b < 4; ++b) {
                            vs[b] = g.v(l0 + b);
                            ys[b] = p.position(k0 + a, l0 + b)[comp];
                        }
                        xs[a] = g.u(k0 + a);
                        ysu[a] = detail::lagrange4(vs, ys, vv);
                    }
                    r[comp] = detail::lagrange4(xs, ysu, uu);
                }
                pos[ng.idx(i, j)] = r;
            }
        }
    }
    SurfacePatch np(ng, std::move(pos));

    CanonicalReparametrization out{std::move(np), InvariantField(), std::move(u_src), std::move(v_src)};

    // fresh invariants on the resampled patch
    const SurfaceDerivs nd = compute_derivs(out.patch);
    const NormalFrameField nf = normal_frame_field(nd);
    const GeometricFrameField ff = geometric_frame_field(nd, nf);
    out.invariants = frame_invariants(out.patch, nd, ff);
    return out;
}

} // namespace zmc
