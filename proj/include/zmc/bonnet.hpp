#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zmc/grid.hpp"
#include "zmc/minkowski.hpp"
#include "zmc/pde.hpp"
#include "zmc/surface.hpp"

// Constructive half of the fundamental theorem: given invariant fields
// (mu, nu) in canonical parameters, build the frame-system coefficient
// matrices, check integrability, integrate the moving frame Z_u = A Z,
// Z_v = B Z, integrate the position z_u = sqrt(-E) x, z_v = sqrt(G) y, and
// verify the reconstructed surface from its positions alone.

namespace zmc {

class DriftExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// frame rows are (x, y, n1, n2); the frame Gram target is diag(-1,1,1,1)
// while the ambient metric is diag(1,1,1,-1)
inline double frame_gram_defect(const Mat4& Z) {
    constexpr double amb[4] = {1.0, 1.0, 1.0, -1.0};
    constexpr double tgt[4] = {-1.0, 1.0, 1.0, 1.0};
    double defect = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += Z(i, k) * amb[k] * Z(j, k);
            const double want = (i == j) ? tgt[i] : 0.0;
            defect = std::max(defect, std::abs(s - want));
        }
    return defect;
}

inline Mat4 frame_to_rows(const Frame4& f) {
    Mat4 Z;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) Z(i, k) = f.row(i)[static_cast<std::size_t>(k)];
    return Z;
}

inline Frame4 rows_to_frame(const Mat4& Z) {
    Frame4 f;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) f.row(i)[static_cast<std::size_t>(k)] = Z(i, k);
    return f;
}

/**
 * Coefficient matrices of the frame system in canonical parameters:
 *   E = -1/sqrt(mu^2+nu^2) = -G,  t = (mu^2+nu^2)^{1/4},
 *   gamma1 = -t_v, gamma2 = t_u, beta1 = t theta_v, beta2 = t theta_u,
 * theta = arctan(mu/nu) (unwrapped). eta A and eta B are antisymmetric by
 * the sparsity pattern, eta = diag(-1,1,1,1), so the exact flow preserves
 * the frame Gram matrix; integrator drift is pure truncation error.
 */
struct CoefficientField {
    GridOf<Mat4> A, B;
    GridField sqrt_mE, sqrt_G; // sqrt(-E) = sqrt(G) = 1/t
    GridField t, theta;
};

inline CoefficientField build_AB(const GridField& mu, const GridField& nu, double tol = 1e-12) {
    const GridSpec& g = mu.grid();
    if (!g.same_shape(nu.grid())) throw std::invalid_argument("build_AB: grid mismatch");
    CoefficientField out{GridOf<Mat4>(g), GridOf<Mat4>(g), GridField(g), GridField(g), GridField(g),
                         GridField(g)};
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double m2 = mu.at(i, j) * mu.at(i, j) + nu.at(i, j) * nu.at(i, j);
            if (m2 < tol) throw ZeroModulus("build_AB: mu^2 + nu^2 vanishes");
            out.t.at(i, j) = std::pow(m2, 0.25);
            out.theta.at(i, j) = std::atan2(mu.at(i, j), nu.at(i, j));
            out.sqrt_mE.at(i, j) = 1.0 / out.t.at(i, j);
            out.sqrt_G.at(i, j) = 1.0 / out.t.at(i, j);
        }
    out.theta = unwrap_phase(out.theta);
    // grids too small to differentiate get vanishing connection coefficients
    const bool du_ok = g.nu >= 5, dv_ok = g.nv >= 5;
    const GridField t_u = du_ok ? d_du(out.t) : GridField(g);
    const GridField t_v = dv_ok ? d_dv(out.t) : GridField(g);
    const GridField th_u = du_ok ? d_du(out.theta) : GridField(g);
    const GridField th_v = dv_ok ? d_dv(out.theta) : GridField(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double gamma1 = -t_v.at(i, j);
            const double gamma2 = t_u.at(i, j);
            const double beta1 = out.t.at(i, j) * th_v.at(i, j);
            const double beta2 = out.t.at(i, j) * th_u.at(i, j);
            const double nuv = nu.at(i, j), muv = mu.at(i, j);
            Mat4 A, B;
            A(0, 1) = gamma1; A(0, 2) = nuv;
            A(1, 0) = gamma1; A(1, 3) = muv;
            A(2, 0) = nuv;    A(2, 3) = beta1;
            A(3, 1) = -muv;   A(3, 2) = -beta1;
            B(0, 1) = -gamma2; B(0, 3) = muv;
            B(1, 0) = -gamma2; B(1, 2) = nuv;
            B(2, 1) = -nuv;    B(2, 3) = beta2;
            B(3, 0) = muv;     B(3, 2) = -beta2;
            out.A.at(i, j) = out.sqrt_mE.at(i, j) * A;
            out.B.at(i, j) = out.sqrt_G.at(i, j) * B;
        }
    return out;
}

// per-node max entry of dA/dv - dB/du + AB - BA; O(h^2) exactly when the
// (mu, nu) fields solve the natural system
inline GridField integrability_residual(const CoefficientField& cf) {
    const GridSpec& g = cf.A.grid();
    const GridOf<Mat4> A_v = d_dv(cf.A);
    const GridOf<Mat4> B_u = d_du(cf.B);
    GridField out(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const Mat4 r = A_v.at(i, j) - B_u.at(i, j) + cf.A.at(i, j) * cf.B.at(i, j) -
                           cf.B.at(i, j) * cf.A.at(i, j);
            out.at(i, j) = max_abs(r);
        }
    return out;
}

struct IntegrateOptions {
    int anchor_i = 0, anchor_j = 0;
    double drift_budget = 0.1; // abort when gram defect exceeds this
    bool renormalize = false;  // metric Gram-Schmidt after every step
    bool dual_path = false;    // also integrate column-first and compare
};

struct FrameSolution {
    GridOf<Mat4> Z;
    double max_gram_defect = 0.0;
    double dual_discrepancy = 0.0; // max |Z_rowfirst - Z_colfirst| entrywise
    bool dual_checked = false;
};

namespace detail {

inline Mat4 rk4_frame_step(const Mat4& Z, const Mat4& M0, const Mat4& Mh, const Mat4& M1, double dt) {
    const Mat4 k1 = M0 * Z;
    const Mat4 k2 = Mh * (Z + (0.5 * dt) * k1);
    const Mat4 k3 = Mh * (Z + (0.5 * dt) * k2);
    const Mat4 k4 = M1 * (Z + dt * k3);
    return Z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// metric Gram-Schmidt back onto the frame manifold (x timelike first)
inline Mat4 renormalize_frame(const Mat4& Z) {
    Frame4 f = rows_to_frame(Z);
    f.x = f.x / std::sqrt(-inner(f.x, f.x));
    f.y = f.y + inner(f.y, f.x) * f.x;
    f.y = f.y / std::sqrt(inner(f.y, f.y));
    f.n1 = f.n1 + inner(f.n1, f.x) * f.x - inner(f.n1, f.y) * f.y;
    f.n1 = f.n1 / std::sqrt(inner(f.n1, f.n1));
    f.n2 = f.n2 + inner(f.n2, f.x) * f.x - inner(f.n2, f.y) * f.y - inner(f.n2, f.n1) * f.n1;
    f.n2 = f.n2 / std::sqrt(inner(f.n2, f.n2));
    return frame_to_rows(f);
}

// march along one grid line (direction dir = +-1), linear midpoint matrices
template <class MatAt>
void march_line(GridOf<Mat4>& Z, const MatAt& M, int n, double h, int fixed, bool along_u, int start,
                int dir, const IntegrateOptions& opt, double& max_defect) {
    auto zat = [&](int k) -> Mat4& { return along_u ? Z.at(k, fixed) : Z.at(fixed, k); };
    for (int k = start; k + dir >= 0 && k + dir < n; k += dir) {
        const Mat4 M0 = M(k), M1 = M(k + dir);
        const Mat4 Mh = 0.5 * (M0 + M1);
        Mat4 next = rk4_frame_step(zat(k), M0, Mh, M1, dir * h);
        if (opt.renormalize) next = renormalize_frame(next);
        const double defect = frame_gram_defect(next);
        max_defect = std::max(max_defect, defect);
        if (defect > opt.drift_budget)
            throw DriftExceeded("integrate_frame: gram defect " + std::to_string(defect) +
                                " exceeded budget " + std::to_string(opt.drift_budget));
        zat(k + dir) = next;
    }
}

} // namespace detail

/**
 * Integrate the frame system from the anchor: along the anchor's u-row
 * first, then along every v-column. With dual_path also integrates
 * column-first and reports the max discrepancy, which the integrability
 * residual bounds.
 */
inline FrameSolution integrate_frame(const CoefficientField& cf, const Frame4& Z0,
                                     const IntegrateOptions& opt = {}) {
    if (gram_defect(Z0) > 1e-10)
        throw FrameNotNormal("integrate_frame: anchor frame is not pseudo-orthonormal");
    if (inner(Z0.x, Z0.x) >= 0.0) throw FrameNotNormal("integrate_frame: anchor x must be timelike");
    const GridSpec& g = cf.A.grid();
    const int ai = opt.anchor_i, aj = opt.anchor_j;
    if (ai < 0 || ai >= g.nu || aj < 0 || aj >= g.nv)
        throw std::invalid_argument("integrate_frame: anchor outside grid");

    FrameSolution sol{GridOf<Mat4>(g), 0.0, 0.0, false};
    auto row_first = [&](GridOf<Mat4>& Z, double& defect) {
        Z.at(ai, aj) = frame_to_rows(Z0);
        for (int dir : {+1, -1})
            detail::march_line(Z, [&](int k) { return cf.A.at(k, aj); }, g.nu, g.hu(), aj, true, ai, dir,
                               opt, defect);
        for (int i = 0; i < g.nu; ++i)
            for (int dir : {+1, -1})
                detail::march_line(Z, [&](int k) { return cf.B.at(i, k); }, g.nv, g.hv(), i, false, aj,
                                   dir, opt, defect);
    };
    row_first(sol.Z, sol.max_gram_defect);

    if (opt.dual_path) {
        GridOf<Mat4> Z2(g);
        double defect2 = 0.0;
        Z2.at(ai, aj) = frame_to_rows(Z0);
        for (int dir : {+1, -1})
            detail::march_line(Z2, [&](int k) { return cf.B.at(ai, k); }, g.nv, g.hv(), ai, false, aj,
                               dir, opt, defect2);
        for (int j = 0; j < g.nv; ++j)
            for (int dir : {+1, -1})
                detail::march_line(Z2, [&](int k) { return cf.A.at(k, j); }, g.nu, g.hu(), j, true, ai,
                                   dir, opt, defect2);
        double d = 0.0;
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) d = std::max(d, max_abs(sol.Z.at(i, j) - Z2.at(i, j)));
        sol.dual_discrepancy = d;
        sol.dual_checked = true;
    }
    return sol;
}

struct ReconstructedSurface {
    SurfacePatch patch;
    double max_gram_defect = 0.0;
    double dual_frame_discrepancy = 0.0;
    double dual_position_discrepancy = 0.0;
    bool dual_checked = false;
};

/**
 * Cumulative trapezoid quadrature of z_u = sqrt(-E) x, z_v = sqrt(G) y
 * along the same anchor-row-then-columns paths used by the frame march.
 */
inline ReconstructedSurface integrate_position(const FrameSolution& F, const CoefficientField& cf,
                                               const Vec4& p0, const IntegrateOptions& opt = {}) {
    const GridSpec& g = cf.A.grid();
    const int ai = opt.anchor_i, aj = opt.anchor_j;
    GridOf<Vec4> pos(g);
    auto xvec = [&](const GridOf<Mat4>& Z, int i, int j) {
        const Mat4& m = Z.at(i, j);
        return Vec4{m(0, 0), m(0, 1), m(0, 2), m(0, 3)};
    };
    auto yvec = [&](const GridOf<Mat4>& Z, int i, int j) {
        const Mat4& m = Z.at(i, j);
        return Vec4{m(1, 0), m(1, 1), m(1, 2), m(1, 3)};
    };
    auto integrate_all = [&](const GridOf<Mat4>& Z, GridOf<Vec4>& out) {
        out.at(ai, aj) = p0;
        for (int dir : {+1, -1})
            for (int i = ai; i + dir >= 0 && i + dir < g.nu; i += dir)
                out.at(i + dir, aj) =
                    out.at(i, aj) + (dir * g.hu() * 0.5) * (cf.sqrt_mE.at(i, aj) * xvec(Z, i, aj) +
                                                            cf.sqrt_mE.at(i + dir, aj) * xvec(Z, i + dir, aj));
        for (int i = 0; i < g.nu; ++i)
            for (int dir : {+1, -1})
                for (int j = aj; j + dir >= 0 && j + dir < g.nv; j += dir)
                    out.at(i, j + dir) =
                        out.at(i, j) + (dir * g.hv() * 0.5) * (cf.sqrt_G.at(i, j) * yvec(Z, i, j) +
                                                               cf.sqrt_G.at(i, j + dir) * yvec(Z, i, j + dir));
    };
    integrate_all(F.Z, pos);

    ReconstructedSurface out{SurfacePatch(g, pos.data()), F.max_gram_defect, F.dual_discrepancy, 0.0,
                             F.dual_checked};
    if (F.dual_checked) {
        // column-first positions from the same frames, for the path check
        GridOf<Vec4> pos2(g);
        pos2.at(ai, aj) = p0;
        for (int dir : {+1, -1})
            for (int j = aj; j + dir >= 0 && j + dir < g.nv; j += dir)
                pos2.at(ai, j + dir) =
                    pos2.at(ai, j) + (dir * g.hv() * 0.5) * (cf.sqrt_G.at(ai, j) * yvec(F.Z, ai, j) +
                                                             cf.sqrt_G.at(ai, j + dir) * yvec(F.Z, ai, j + dir));
        for (int j = 0; j < g.nv; ++j)
            for (int dir : {+1, -1})
                for (int i = ai; i + dir >= 0 && i + dir < g.nu; i += dir)
                    pos2.at(i + dir, j) =
                        pos2.at(i, j) + (dir * g.hu() * 0.5) * (cf.sqrt_mE.at(i, j) * xvec(F.Z, i, j) +
                                                                cf.sqrt_mE.at(i + dir, j) * xvec(F.Z, i + dir, j));
        double d = 0.0;
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) d = std::max(d, euclid_norm(pos.at(i, j) - pos2.at(i, j)));
        out.dual_position_discrepancy = d;
    }
    return out;
}

// one verified quantity of the roundtrip report
struct CheckEntry {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct ReconstructionReport {
    std::vector<CheckEntry> checks;
    bool all_pass = true;

    void add(const std::string& name, double measured, double tol) {
        checks.push_back({name, measured, tol, measured <= tol});
        all_pass = all_pass && measured <= tol;
    }
};

struct VerifyTolerances {
    double e_gauge = 1e-4;
    double g_gauge = 1e-4;
    double h_norm = 1e-4;
    double k_match = 1e-4;
    double kappa_match = 1e-4;
};

/**
 * Recompute E, G, H, K, kappa from the reconstructed positions alone (grid
 * stencils, no frame reuse) and compare with what the input invariants
 * dictate. The normal frame for kappa is sign-matched to the input fields,
 * mirroring the recorded orientation convention.
 */
inline ReconstructionReport verify_reconstruction(const ReconstructedSurface& rec, const GridField& mu,
                                                  const GridField& nu, const VerifyTolerances& tol = {}) {
    const SurfacePatch& p = rec.patch;
    const GridSpec& g = p.grid();
    if (!g.same_shape(mu.grid())) throw std::invalid_argument("verify_reconstruction: grid mismatch");
    const SurfaceDerivs d = compute_derivs(p, DerivativeSource::stencils);

    double e_gauge = 0.0, g_gauge = 0.0, h_max = 0.0, k_err = 0.0, kap_err = 0.0;
    GridField wu(g), wv(g), Wf(g);
    GridOf<Vec4> e1(g), e2(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const SigmaData s = sigma_components(d, i, j);
            Vec4 a = s.sxx / std::sqrt(inner(s.sxx, s.sxx));
            Vec4 b = s.sxy - inner(s.sxy, a) * a;
            b = b / std::sqrt(inner(b, b));
            if (nu.at(i, j) < 0.0) a = -a;
            if (mu.at(i, j) < 0.0) b = -b;
            e1.at(i, j) = a;
            e2.at(i, j) = b;
            Wf.at(i, j) = std::sqrt(s.frame.W2);
        }
    const GridOf<Vec4> e1u = d_du(e1), e1v = d_dv(e1);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            wu.at(i, j) = inner(e1u.at(i, j), e2.at(i, j));
            wv.at(i, j) = inner(e1v.at(i, j), e2.at(i, j));
        }
    const GridField dwu_dv = d_dv(wu), dwv_du = d_du(wv);

    for (int i = 1; i < g.nu - 1; ++i)
        for (int j = 1; j < g.nv - 1; ++j) {
            const SigmaData s = sigma_components(d, i, j);
            const double mod = std::sqrt(mu.at(i, j) * mu.at(i, j) + nu.at(i, j) * nu.at(i, j));
            e_gauge = std::max(e_gauge, std::abs(s.frame.E * mod + 1.0));
            g_gauge = std::max(g_gauge, std::abs(s.frame.G * mod - 1.0));
            const Vec4 H = 0.5 * (s.syy - s.sxx);
            h_max = std::max(h_max, std::sqrt(std::abs(inner(H, H))));
            const double K = inner(s.sxx, s.syy) - inner(s.sxy, s.sxy);
            const double K_in = nu.at(i, j) * nu.at(i, j) - mu.at(i, j) * mu.at(i, j);
            k_err = std::max(k_err, std::abs(K - K_in));
            const double kap = (dwu_dv.at(i, j) - dwv_du.at(i, j)) / Wf.at(i, j);
            const double kap_in = -2.0 * nu.at(i, j) * mu.at(i, j);
            kap_err = std::max(kap_err, std::abs(kap - kap_in));
        }

    ReconstructionReport rep;
    rep.add("E_gauge", e_gauge, tol.e_gauge);
    rep.add("G_gauge", g_gauge, tol.g_gauge);
    rep.add("H_norm", h_max, tol.h_norm);
    rep.add("K_match", k_err, tol.k_match);
    rep.add("kappa_match", kap_err, tol.kappa_match);
    return rep;
}

} // namespace zmc
