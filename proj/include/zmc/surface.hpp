#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "zmc/grid.hpp"
#include "zmc/minkowski.hpp"

// Pointwise differential geometry of an immersion z(u,v) in R^4_1:
// fundamental forms, mean curvature vector, Gauss and normal curvature,
// flat-point determinants. Derivatives come from analytic suppliers when
// the patch carries them, otherwise from the grid stencils.

namespace zmc {

class DegenerateMetric : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class FrameNotNormal : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class FlatPointError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class NotZMC : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using PositionSupplier = std::function<Vec4(double, double)>;

/**
 * Immersion sampled on a uniform rectangular grid. Positions are always
 * stored; analytic derivative suppliers are optional and, when present,
 * are preferred by every downstream computation.
 */
class SurfacePatch {
  public:
    SurfacePatch() = default;

    SurfacePatch(const GridSpec& g, std::vector<Vec4> positions) : grid_(g), pos_(g) {
        if (g.nu < 5 || g.nv < 5) throw GridTooSmall("SurfacePatch: need at least 5x5 nodes");
        if (positions.size() != g.size()) throw std::invalid_argument("SurfacePatch: position count mismatch");
        pos_.data() = std::move(positions);
    }

    SurfacePatch(const GridSpec& g, const PositionSupplier& f) : grid_(g), pos_(g) {
        if (g.nu < 5 || g.nv < 5) throw GridTooSmall("SurfacePatch: need at least 5x5 nodes");
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) pos_.at(i, j) = f(g.u(i), g.v(j));
        f_pos_ = f;
    }

    void set_derivative_suppliers(PositionSupplier zu, PositionSupplier zv, PositionSupplier zuu,
                                  PositionSupplier zuv, PositionSupplier zvv) {
        f_zu_ = std::move(zu);
        f_zv_ = std::move(zv);
        f_zuu_ = std::move(zuu);
        f_zuv_ = std::move(zuv);
        f_zvv_ = std::move(zvv);
    }

    const GridSpec& grid() const { return grid_; }
    const GridOf<Vec4>& positions() const { return pos_; }
    const Vec4& position(int i, int j) const { return pos_.at(i, j); }
    bool has_analytic_derivatives() const { return static_cast<bool>(f_zu_); }
    bool has_position_supplier() const { return static_cast<bool>(f_pos_); }
    Vec4 eval_position(double u, double v) const { return f_pos_(u, v); }

    Vec4 analytic_zu(double u, double v) const { return f_zu_(u, v); }
    Vec4 analytic_zv(double u, double v) const { return f_zv_(u, v); }
    Vec4 analytic_zuu(double u, double v) const { return f_zuu_(u, v); }
    Vec4 analytic_zuv(double u, double v) const { return f_zuv_(u, v); }
    Vec4 analytic_zvv(double u, double v) const { return f_zvv_(u, v); }

  private:
    GridSpec grid_;
    GridOf<Vec4> pos_;
    PositionSupplier f_pos_, f_zu_, f_zv_, f_zuu_, f_zuv_, f_zvv_;
};

enum class DerivativeSource { automatic, analytic, stencils };

// all five partial-derivative fields of a patch
struct SurfaceDerivs {
    GridOf<Vec4> zu, zv, zuu, zuv, zvv;
    bool analytic = false;
};

inline SurfaceDerivs compute_derivs(const SurfacePatch& p,
                                    DerivativeSource src = DerivativeSource::automatic) {
    const GridSpec& g = p.grid();
    SurfaceDerivs d;
    const bool use_analytic =
        (src == DerivativeSource::analytic) ||
        (src == DerivativeSource::automatic && p.has_analytic_derivatives());
    if (src == DerivativeSource::analytic && !p.has_analytic_derivatives())
        throw std::invalid_argument("compute_derivs: patch has no analytic suppliers");
    if (use_analytic) {
        d.analytic = true;
        d.zu = GridOf<Vec4>(g);
        d.zv = GridOf<Vec4>(g);
        d.zuu = GridOf<Vec4>(g);
        d.zuv = GridOf<Vec4>(g);
        d.zvv = GridOf<Vec4>(g);
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j) {
                const double u = g.u(i), v = g.v(j);
                d.zu.at(i, j) = p.analytic_zu(u, v);
                d.zv.at(i, j) = p.analytic_zv(u, v);
                d.zuu.at(i, j) = p.analytic_zuu(u, v);
                d.zuv.at(i, j) = p.analytic_zuv(u, v);
                d.zvv.at(i, j) = p.analytic_zvv(u, v);
            }
    } else {
        d.zu = d_du(p.positions());
        d.zv = d_dv(p.positions());
        d.zuu = d2_duu(p.positions());
        d.zvv = d2_dvv(p.positions());
        d.zuv = d_dv(d.zu);
    }
    return d;
}

struct FundamentalForms {
    double E = 0.0, F = 0.0, G = 0.0;
    std::optional<double> W; // sqrt(-EG + F^2), present only when EG - F^2 < 0
};

inline FundamentalForms first_fundamental(const SurfaceDerivs& d, int i, int j, double tol = 1e-12) {
    FundamentalForms ff;
    const Vec4& zu = d.zu.at(i, j);
    const Vec4& zv = d.zv.at(i, j);
    ff.E = inner(zu, zu);
    ff.F = inner(zu, zv);
    ff.G = inner(zv, zv);
    const double det = ff.E * ff.G - ff.F * ff.F;
    if (std::abs(det) < tol)
        throw DegenerateMetric("first_fundamental: EG - F^2 vanishes at node (" + std::to_string(i) +
                               "," + std::to_string(j) + ")");
    if (det < 0.0) ff.W = std::sqrt(-det);
    return ff;
}

enum class PatchClass { timelike, spacelike, mixed };

inline const char* to_string(PatchClass c) {
    switch (c) {
        case PatchClass::timelike: return "timelike";
        case PatchClass::spacelike: return "spacelike";
        case PatchClass::mixed: return "mixed";
    }
    return "?";
}

inline PatchClass classify_patch(const SurfacePatch& p, double tol = 1e-12,
                                 DerivativeSource src = DerivativeSource::automatic) {
    const SurfaceDerivs d = compute_derivs(p, src);
    const GridSpec& g = p.grid();
    bool all_neg = true, all_pos = true;
    for (int i = 1; i < g.nu - 1; ++i)
        for (int j = 1; j < g.nv - 1; ++j) {
            const FundamentalForms ff = first_fundamental(d, i, j, tol);
            const double det = ff.E * ff.G - ff.F * ff.F;
            if (det < 0.0) all_pos = false;
            else all_neg = false;
            if (!(ff.E > 0.0 && det > 0.0)) all_pos = false;
        }
    if (all_neg) return PatchClass::timelike;
    if (all_pos) return PatchClass::spacelike;
    return PatchClass::mixed;
}

// Orthonormal tangent frame by Gram-Schmidt in the induced metric,
// starting from the timelike direction z_u.
struct TangentFrame {
    Vec4 x, y;          // <x,x> = -1, <y,y> = +1, <x,y> = 0
    double E, F, G, W2; // W2 = F^2 - EG > 0 for timelike nodes
};

inline TangentFrame tangent_frame(const SurfaceDerivs& d, int i, int j, double tol = 1e-12) {
    const Vec4& zu = d.zu.at(i, j);
    const Vec4& zv = d.zv.at(i, j);
    TangentFrame t;
    t.E = inner(zu, zu);
    t.F = inner(zu, zv);
    t.G = inner(zv, zv);
    t.W2 = t.F * t.F - t.E * t.G;
    if (!(t.E < 0.0) || t.W2 < tol)
        throw DegenerateMetric("tangent_frame: node is not timelike non-degenerate");
    t.x = zu / std::sqrt(-t.E);
    Vec4 w = zv + inner(zv, t.x) * t.x;
    t.y = w / std::sqrt(inner(w, w));
    return t;
}

// normal projection relative to an orthonormal tangent frame
inline Vec4 normal_part(const Vec4& w, const TangentFrame& t) {
    return w + inner(w, t.x) * t.x - inner(w, t.y) * t.y;
}

// second fundamental tensor on the orthonormal tangent frame (x, y)
struct SigmaData {
    Vec4 sxx, sxy, syy;
    TangentFrame frame;
};

inline SigmaData sigma_components(const SurfaceDerivs& d, int i, int j, double tol = 1e-12) {
    SigmaData s;
    s.frame = tangent_frame(d, i, j, tol);
    const TangentFrame& t = s.frame;
    const Vec4 suu = normal_part(d.zuu.at(i, j), t);
    const Vec4 suv = normal_part(d.zuv.at(i, j), t);
    const Vec4 svv = normal_part(d.zvv.at(i, j), t);
    const double mE = -t.E;          // positive
    const double W = std::sqrt(t.W2);
    const double r = t.F / mE;
    s.sxx = suu / mE;
    s.sxy = (suv + r * suu) / W;
    s.syy = (svv + 2.0 * r * suv + r * r * suu) * (mE / t.W2);
    return s;
}

// H = (1/2)(-sigma(x,x) + sigma(y,y)) with x timelike unit
inline Vec4 mean_curvature_vector(const SurfaceDerivs& d, int i, int j, double tol = 1e-12) {
    const SigmaData s = sigma_components(d, i, j, tol);
    return 0.5 * (s.syy - s.sxx);
}

// K = <sigma(x,x), sigma(y,y)> - <sigma(x,y), sigma(x,y)>
inline double gauss_curvature(const SurfaceDerivs& d, int i, int j, double tol = 1e-12) {
    const SigmaData s = sigma_components(d, i, j, tol);
    return inner(s.sxx, s.syy) - inner(s.sxy, s.sxy);
}

// ---- normal frames -------------------------------------------------------

// Smooth orthonormal normal frame field: two fixed seed basis vectors are
// projected onto the normal space at every node and Gram-Schmidt'ed. Seeds
// are chosen at the anchor node to maximize the smaller projected norm.
struct NormalFrameField {
    GridOf<Vec4> e1, e2;
    int seed_a = 0, seed_b = 1;
};

inline NormalFrameField normal_frame_field(const SurfaceDerivs& d, double tol = 1e-12) {
    const GridSpec& g = d.zu.grid();
    auto basis = [](int k) {
        Vec4 e;
        e[static_cast<std::size_t>(k)] = 1.0;
        return e;
    };
    const int ci = g.nu / 2, cj = g.nv / 2;
    const TangentFrame tc = tangent_frame(d, ci, cj, tol);
    int best_a = 0, best_b = 1;
    double best_score = -1.0;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) {
            Vec4 p1 = normal_part(basis(a), tc);
            const double n1 = inner(p1, p1);
            if (n1 < tol) continue;
            p1 = p1 / std::sqrt(n1);
            Vec4 p2 = normal_part(basis(b), tc);
            p2 = p2 - inner(p2, p1) * p1;
            const double n2 = inner(p2, p2);
            const double score = std::min(n1, n2);
            if (score > best_score) {
                best_score = score;
                best_a = a;
                best_b = b;
            }
        }
    if (best_score <= tol) throw DegenerateMetric("normal_frame_field: no usable seed pair");
    NormalFrameField out;
    out.seed_a = best_a;
    out.seed_b = best_b;
    out.e1 = GridOf<Vec4>(g);
    out.e2 = GridOf<Vec4>(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const TangentFrame t = tangent_frame(d, i, j, tol);
            Vec4 p1 = normal_part(basis(best_a), t);
            const double n1 = inner(p1, p1);
            if (n1 < tol) throw DegenerateMetric("normal_frame_field: seed degenerates inside patch");
            p1 = p1 / std::sqrt(n1);
            Vec4 p2 = normal_part(basis(best_b), t);
            p2 = p2 - inner(p2, p1) * p1;
            const double n2 = inner(p2, p2);
            if (n2 < tol) throw DegenerateMetric("normal_frame_field: seed degenerates inside patch");
            out.e1.at(i, j) = p1;
            out.e2.at(i, j) = p2 / std::sqrt(n2);
        }
    return out;
}

// ---- Gauss decomposition -------------------------------------------------

// coefficients of z_ij = -Gamma^1_ij z_u + Gamma^2_ij z_v + c^1_ij e1 + c^2_ij e2
struct GaussDecomposition {
    // order: (uu, uv, vv)
    double Gamma1[3] = {0, 0, 0};
    double Gamma2[3] = {0, 0, 0};
    double c1[3] = {0, 0, 0};
    double c2[3] = {0, 0, 0};
};

inline GaussDecomposition second_fundamental(const SurfaceDerivs& d, const Vec4& e1, const Vec4& e2,
                                             int i, int j, double frame_tol = 1e-8) {
    const Vec4& zu = d.zu.at(i, j);
    const Vec4& zv = d.zv.at(i, j);
    const double su = std::max(1.0, euclid_norm(zu)), sv = std::max(1.0, euclid_norm(zv));
    const double defect =
        std::max({std::abs(inner(e1, e1) - 1.0), std::abs(inner(e2, e2) - 1.0), std::abs(inner(e1, e2)),
                  std::abs(inner(e1, zu)) / su, std::abs(inner(e1, zv)) / sv,
                  std::abs(inner(e2, zu)) / su, std::abs(inner(e2, zv)) / sv});
    if (defect > frame_tol) throw FrameNotNormal("second_fundamental: normal frame defect " + std::to_string(defect));

    const double E = inner(zu, zu), F = inner(zv, zu), G = inner(zv, zv);
    const double det = F * F - E * G;
    if (std::abs(det) < 1e-14) throw DegenerateMetric("second_fundamental: degenerate induced metric");
    const Vec4 zij[3] = {d.zuu.at(i, j), d.zuv.at(i, j), d.zvv.at(i, j)};
    GaussDecomposition out;
    for (int k = 0; k < 3; ++k) {
        out.c1[k] = inner(zij[k], e1);
        out.c2[k] = inner(zij[k], e2);
        const double p = inner(zij[k], zu), q = inner(zij[k], zv);
        // solve [-E F; -F G] [G1; G2] = [p; q]
        out.Gamma1[k] = (G * p - F * q) / det;
        out.Gamma2[k] = (F * p - E * q) / det;
    }
    return out;
}

// ---- flat points -----------------------------------------------------------

struct FlatPointReport {
    double D1 = 0.0, D2 = 0.0, D3 = 0.0;
    bool is_flat = false;
};

inline FlatPointReport flat_point_report(const GaussDecomposition& gd, double rel_tol = 1e-9) {
    FlatPointReport r;
    r.D1 = gd.c1[0] * gd.c2[1] - gd.c2[0] * gd.c1[1];
    r.D2 = gd.c1[0] * gd.c2[2] - gd.c2[0] * gd.c1[2];
    r.D3 = gd.c1[1] * gd.c2[2] - gd.c2[1] * gd.c1[2];
    double scale = 0.0;
    for (int k = 0; k < 3; ++k) scale = std::max({scale, std::abs(gd.c1[k]), std::abs(gd.c2[k])});
    const double lim = rel_tol * scale * scale;
    r.is_flat = std::max({std::abs(r.D1), std::abs(r.D2), std::abs(r.D3)}) <= lim;
    return r;
}

inline GridOf<FlatPointReport> flat_point_scan(const SurfaceDerivs& d, const NormalFrameField& nf,
                                               double rel_tol = 1e-9) {
    const GridSpec& g = d.zu.grid();
    GridOf<FlatPointReport> out(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j)
            out.at(i, j) =
                flat_point_report(second_fundamental(d, nf.e1.at(i, j), nf.e2.at(i, j), i, j), rel_tol);
    return out;
}

// ---- curvatures ------------------------------------------------------------

struct CurvatureSample {
    Vec4 H;
    double K = 0.0;
    double kappa = 0.0;
};

/**
 * Gauss curvature from the sigma formula and normal curvature from the
 * discrete curvature of the normal connection,
 *   kappa = (d_v<d_u e1, e2> - d_u<d_v e1, e2>) / W,
 * on a whole patch. Frame-orientation dependent quantities follow the
 * supplied normal frame field.
 */
struct CurvatureField {
    GridOf<Vec4> H;
    GridField K;
    GridField kappa;
};

inline CurvatureField curvature_field(const SurfacePatch& p,
                                      DerivativeSource src = DerivativeSource::automatic,
                                      const NormalFrameField* frames = nullptr, double tol = 1e-12) {
    const SurfaceDerivs d = compute_derivs(p, src);
    const GridSpec& g = p.grid();
    NormalFrameField local;
    if (!frames) {
        local = normal_frame_field(d, tol);
        frames = &local;
    }
    CurvatureField out{GridOf<Vec4>(g), GridField(g), GridField(g)};
    GridField wu(g), wv(g), Wf(g);
    const GridOf<Vec4> e1u = d_du(frames->e1);
    const GridOf<Vec4> e1v = d_dv(frames->e1);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const SigmaData s = sigma_components(d, i, j, tol);
            out.H.at(i, j) = 0.5 * (s.syy - s.sxx);
            out.K.at(i, j) = inner(s.sxx, s.syy) - inner(s.sxy, s.sxy);
            wu.at(i, j) = inner(e1u.at(i, j), frames->e2.at(i, j));
            wv.at(i, j) = inner(e1v.at(i, j), frames->e2.at(i, j));
            Wf.at(i, j) = std::sqrt(s.frame.W2);
        }
    const GridField dwu_dv = d_dv(wu);
    const GridField dwv_du = d_du(wv);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j)
            out.kappa.at(i, j) = (dwu_dv.at(i, j) - dwv_du.at(i, j)) / Wf.at(i, j);
    return out;
}

} // namespace zmc
