#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "zmc/grid.hpp"

// The natural PDE systems of zero-mean-curvature surfaces in canonical
// parameters, in three equivalent forms:
//   (mu, nu):   sqrt(mu^2+nu^2) D ln (mu^2+nu^2)^{1/4} = nu^2 - mu^2, ...
//   (K, kappa): (K^2+kappa^2)^{1/4} D ln (K^2+kappa^2)^{1/8} = K, ...
//   (X, Y):     D X = 2 e^X cos Y, D Y = 2 e^X sin Y,
// where D is the hyperbolic operator d^2/du^2 - d^2/dv^2 for timelike
// surfaces and the Laplacian for the spacelike/Euclidean background systems
// (the Euclidean one with cosh/sinh).

namespace zmc {

class ZeroModulus : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class CFLViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class Blowup : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class SystemKind { timelike_hyperbolic, spacelike_elliptic, euclidean_elliptic };

inline const char* to_string(SystemKind k) {
    switch (k) {
        case SystemKind::timelike_hyperbolic: return "timelike_hyperbolic";
        case SystemKind::spacelike_elliptic: return "spacelike_elliptic";
        case SystemKind::euclidean_elliptic: return "euclidean_elliptic";
    }
    return "?";
}

// F_uu - F_vv on the grid; boundary ring values use the one-sided stencils
// and should be excluded from statistics
inline GridField hyperbolic_laplacian(const GridField& F) {
    if (F.grid().nu < 3 || F.grid().nv < 3) throw GridTooSmall("hyperbolic_laplacian: grid too small");
    const GridField uu = d2_duu(F), vv = d2_dvv(F);
    GridField out(F.grid());
    for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = uu.data()[k] - vv.data()[k];
    return out;
}

inline GridField laplacian(const GridField& F) {
    if (F.grid().nu < 3 || F.grid().nv < 3) throw GridTooSmall("laplacian: grid too small");
    const GridField uu = d2_duu(F), vv = d2_dvv(F);
    GridField out(F.grid());
    for (std::size_t k = 0; k < out.data().size(); ++k) out.data()[k] = uu.data()[k] + vv.data()[k];
    return out;
}

// unwrap a phase field: along the first column in u, then along each row in v
inline GridField unwrap_phase(const GridField& theta) {
    const GridSpec& g = theta.grid();
    GridField out = theta;
    auto unwrap_step = [](double prev, double val) {
        while (val - prev > M_PI) val -= 2.0 * M_PI;
        while (val - prev < -M_PI) val += 2.0 * M_PI;
        return val;
    };
    for (int i = 1; i < g.nu; ++i) out.at(i, 0) = unwrap_step(out.at(i - 1, 0), out.at(i, 0));
    for (int i = 0; i < g.nu; ++i)
        for (int j = 1; j < g.nv; ++j) out.at(i, j) = unwrap_step(out.at(i, j - 1), out.at(i, j));
    return out;
}

// ---- residuals -------------------------------------------------------------

inline std::pair<GridField, GridField> residual_munu(const GridField& mu, const GridField& nu,
                                                     double tol = 1e-12) {
    const GridSpec& g = mu.grid();
    if (!g.same_shape(nu.grid())) throw std::invalid_argument("residual_munu: grid mismatch");
    GridField L(g), theta(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double m2 = mu.at(i, j) * mu.at(i, j) + nu.at(i, j) * nu.at(i, j);
            if (m2 < tol) throw ZeroModulus("residual_munu: mu^2 + nu^2 vanishes");
            L.at(i, j) = 0.25 * std::log(m2);
            theta.at(i, j) = std::atan2(mu.at(i, j), nu.at(i, j));
        }
    theta = unwrap_phase(theta);
    const GridField DL = hyperbolic_laplacian(L);
    const GridField DT = hyperbolic_laplacian(theta);
    GridField R1(g), R2(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double mod = std::sqrt(mu.at(i, j) * mu.at(i, j) + nu.at(i, j) * nu.at(i, j));
            R1.at(i, j) = mod * DL.at(i, j) - (nu.at(i, j) * nu.at(i, j) - mu.at(i, j) * mu.at(i, j));
            R2.at(i, j) = mod * DT.at(i, j) - 2.0 * nu.at(i, j) * mu.at(i, j);
        }
    return {std::move(R1), std::move(R2)};
}

inline std::pair<GridField, GridField> residual_Kkappa(const GridField& K, const GridField& kappa,
                                                       SystemKind kind, double tol = 1e-12) {
    if (kind == SystemKind::euclidean_elliptic)
        throw std::invalid_argument("residual_Kkappa: Euclidean case is supported only in (X, Y) form");
    const GridSpec& g = K.grid();
    if (!g.same_shape(kappa.grid())) throw std::invalid_argument("residual_Kkappa: grid mismatch");
    GridField L(g), theta(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double m2 = K.at(i, j) * K.at(i, j) + kappa.at(i, j) * kappa.at(i, j);
            if (m2 < tol) throw ZeroModulus("residual_Kkappa: K^2 + kappa^2 vanishes");
            L.at(i, j) = 0.125 * std::log(m2);
            theta.at(i, j) = std::atan2(kappa.at(i, j), K.at(i, j));
        }
    theta = unwrap_phase(theta);
    const bool hyp = (kind == SystemKind::timelike_hyperbolic);
    const GridField DL = hyp ? hyperbolic_laplacian(L) : laplacian(L);
    const GridField DT = hyp ? hyperbolic_laplacian(theta) : laplacian(theta);
    GridField R1(g), R2(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double q = std::pow(K.at(i, j) * K.at(i, j) + kappa.at(i, j) * kappa.at(i, j), 0.25);
            R1.at(i, j) = q * DL.at(i, j) - K.at(i, j);
            R2.at(i, j) = q * DT.at(i, j) - 2.0 * kappa.at(i, j);
        }
    return {std::move(R1), std::move(R2)};
}

// K = e^{2X} cos Y, kappa = e^{2X} sin Y
inline std::pair<GridField, GridField> to_XY(const GridField& K, const GridField& kappa,
                                             double tol = 1e-12) {
    const GridSpec& g = K.grid();
    if (!g.same_shape(kappa.grid())) throw std::invalid_argument("to_XY: grid mismatch");
    GridField X(g), Y(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double m2 = K.at(i, j) * K.at(i, j) + kappa.at(i, j) * kappa.at(i, j);
            if (m2 < tol) throw ZeroModulus("to_XY: K^2 + kappa^2 vanishes");
            X.at(i, j) = 0.25 * std::log(m2);
            Y.at(i, j) = std::atan2(kappa.at(i, j), K.at(i, j));
        }
    Y = unwrap_phase(Y);
    return {std::move(X), std::move(Y)};
}

inline std::pair<GridField, GridField> from_XY(const GridField& X, const GridField& Y) {
    const GridSpec& g = X.grid();
    if (!g.same_shape(Y.grid())) throw std::invalid_argument("from_XY: grid mismatch");
    GridField K(g), kappa(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double e = std::exp(2.0 * X.at(i, j));
            K.at(i, j) = e * std::cos(Y.at(i, j));
            kappa.at(i, j) = e * std::sin(Y.at(i, j));
        }
    return {std::move(K), std::move(kappa)};
}

inline std::pair<GridField, GridField> residual_XY(const GridField& X, const GridField& Y,
                                                   SystemKind kind) {
    const GridSpec& g = X.grid();
    if (!g.same_shape(Y.grid())) throw std::invalid_argument("residual_XY: grid mismatch");
    const bool hyp = (kind == SystemKind::timelike_hyperbolic);
    const GridField DX = hyp ? hyperbolic_laplacian(X) : laplacian(X);
    const GridField DY = hyp ? hyperbolic_laplacian(Y) : laplacian(Y);
    GridField R1(g), R2(g);
    const bool euclid = (kind == SystemKind::euclidean_elliptic);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double e = std::exp(X.at(i, j));
            const double cy = euclid ? std::cosh(Y.at(i, j)) : std::cos(Y.at(i, j));
            const double sy = euclid ? std::sinh(Y.at(i, j)) : std::sin(Y.at(i, j));
            R1.at(i, j) = DX.at(i, j) - 2.0 * e * cy;
            R2.at(i, j) = DY.at(i, j) - 2.0 * e * sy;
        }
    return {std::move(R1), std::move(R2)};
}

// recover (mu, nu) from (K, kappa): mu/nu = (K +- sqrt(K^2+kappa^2))/kappa.
// The branch is never auto-selected; a branch whose nu^2 would be negative
// is rejected.
enum class MunuBranch { plus, minus };

inline std::pair<GridField, GridField> munu_from_Kkappa(const GridField& K, const GridField& kappa,
                                                        MunuBranch branch, double tol = 1e-12) {
    const GridSpec& g = K.grid();
    if (!g.same_shape(kappa.grid())) throw std::invalid_argument("munu_from_Kkappa: grid mismatch");
    GridField mu(g), nu(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) {
            const double Kv = K.at(i, j), kv = kappa.at(i, j);
            const double root = std::sqrt(Kv * Kv + kv * kv);
            if (root < tol) throw ZeroModulus("munu_from_Kkappa: K^2 + kappa^2 vanishes");
            if (std::abs(kv) < tol * root)
                throw ZeroModulus("munu_from_Kkappa: kappa = 0, branch formula undefined");
            const double tau = (branch == MunuBranch::plus) ? (Kv + root) / kv : (Kv - root) / kv;
            const double nu2 = -kv / (2.0 * tau);
            if (!(nu2 > 0.0))
                throw std::domain_error("munu_from_Kkappa: chosen branch gives nu^2 <= 0");
            const double nv = std::sqrt(nu2);
            nu.at(i, j) = nv;
            mu.at(i, j) = tau * nv;
        }
    return {std::move(mu), std::move(nu)};
}

// ---- hyperbolic Cauchy march -------------------------------------------

struct CauchyData {
    std::vector<double> X0, Y0;   // values on the line u = u_min
    std::vector<double> dX0, dY0; // u-derivatives on that line
};

struct HyperbolicOptions {
    const GridField* forcing_X = nullptr;  // optional manufactured-solution forcing
    const GridField* forcing_Y = nullptr;
    // optional Dirichlet data on the two v-boundary columns, size nu each;
    // without them the edge columns use the one-sided second derivatives
    const std::vector<double>* side_X_lo = nullptr;
    const std::vector<double>* side_X_hi = nullptr;
    const std::vector<double>* side_Y_lo = nullptr;
    const std::vector<double>* side_Y_hi = nullptr;
    double blowup_limit = 50.0;
};

/**
 * Explicit leapfrog march of D^h X = 2 e^X cos Y, D^h Y = 2 e^X sin Y in u,
 * second-order Taylor start from the Cauchy data. Requires h_u <= h_v
 * (unit characteristic speeds).
 */
inline std::pair<GridField, GridField> solve_hyperbolic(const CauchyData& data, const GridSpec& g,
                                                        SystemKind kind = SystemKind::timelike_hyperbolic,
                                                        const HyperbolicOptions& opt = {}) {
    if (kind != SystemKind::timelike_hyperbolic)
        throw std::invalid_argument("solve_hyperbolic: only the timelike hyperbolic system marches");
    if (g.nu < 2 || g.nv < 5) throw GridTooSmall("solve_hyperbolic: grid too small");
    if (g.hu() > g.hv() * (1.0 + 1e-12))
        throw CFLViolation("solve_hyperbolic: h_u = " + std::to_string(g.hu()) + " exceeds h_v = " +
                           std::to_string(g.hv()));
    const std::size_t nvs = static_cast<std::size_t>(g.nv);
    if (data.X0.size() != nvs || data.Y0.size() != nvs || data.dX0.size() != nvs || data.dY0.size() != nvs)
        throw std::invalid_argument("solve_hyperbolic: Cauchy data size mismatch");

    GridField X(g), Y(g);
    const double hu = g.hu(), hv = g.hv();

    auto dvv_line = [&](const GridField& F, int i, int j) {
        return stencil_d2([&](int k) -> const double& { return F.at(i, k); }, g.nv, j, hv);
    };
    auto forcing = [&](const GridField* f, int i, int j) { return f ? f->at(i, j) : 0.0; };
    auto guard = [&](double x, int i) {
        if (!std::isfinite(x) || std::abs(x) > opt.blowup_limit)
            throw Blowup("solve_hyperbolic: |X| exceeded " + std::to_string(opt.blowup_limit) +
                         " at u-level " + std::to_string(i));
        return x;
    };

    for (int j = 0; j < g.nv; ++j) {
        X.at(0, j) = data.X0[static_cast<std::size_t>(j)];
        Y.at(0, j) = data.Y0[static_cast<std::size_t>(j)];
    }
    if (g.nu == 1) return {std::move(X), std::move(Y)};

    auto source = [&](int i, int j, double& sx, double& sy) {
        const double e = std::exp(X.at(i, j));
        sx = 2.0 * e * std::cos(Y.at(i, j)) + forcing(opt.forcing_X, i, j);
        sy = 2.0 * e * std::sin(Y.at(i, j)) + forcing(opt.forcing_Y, i, j);
    };

    // Taylor start: F(1) = F(0) + h F_u(0) + h^2/2 (F_vv(0) + source(0))
    for (int j = 0; j < g.nv; ++j) {
        double sx, sy;
        source(0, j, sx, sy);
        X.at(1, j) = guard(X.at(0, j) + hu * data.dX0[static_cast<std::size_t>(j)] +
                               0.5 * hu * hu * (dvv_line(X, 0, j) + sx),
                           1);
        Y.at(1, j) = Y.at(0, j) + hu * data.dY0[static_cast<std::size_t>(j)] +
                     0.5 * hu * hu * (dvv_line(Y, 0, j) + sy);
    }
    for (int i = 1; i + 1 < g.nu; ++i) {
        for (int j = 0; j < g.nv; ++j) {
            double sx, sy;
            source(i, j, sx, sy);
            X.at(i + 1, j) =
                guard(2.0 * X.at(i, j) - X.at(i - 1, j) + hu * hu * (dvv_line(X, i, j) + sx), i + 1);
            Y.at(i + 1, j) = 2.0 * Y.at(i, j) - Y.at(i - 1, j) + hu * hu * (dvv_line(Y, i, j) + sy);
        }
        if (opt.side_X_lo) X.at(i + 1, 0) = (*opt.side_X_lo)[static_cast<std::size_t>(i + 1)];
        if (opt.side_X_hi) X.at(i + 1, g.nv - 1) = (*opt.side_X_hi)[static_cast<std::size_t>(i + 1)];
        if (opt.side_Y_lo) Y.at(i + 1, 0) = (*opt.side_Y_lo)[static_cast<std::size_t>(i + 1)];
        if (opt.side_Y_hi) Y.at(i + 1, g.nv - 1) = (*opt.side_Y_hi)[static_cast<std::size_t>(i + 1)];
    }
    return {std::move(X), std::move(Y)};
}

// ---- elliptic relaxation -------------------------------------------------

struct EllipticOptions {
    double damping = 0.8;
    long max_iterations = 100000;
    double tol = 1e-10; // absolute residual
    double blowup_limit = 50.0;
};

struct EllipticReport {
    bool converged = false;
    long iterations = 0;
    double final_residual = 0.0;
};

struct EllipticResult {
    GridField X, Y;
    EllipticReport report;
};

/**
 * Damped pointwise-Newton Gauss-Seidel relaxation (red-black ordering) for
 * Delta X = 2 e^X cos Y, Delta Y = 2 e^X sin Y (spacelike) or the cosh/sinh
 * system (Euclidean). Dirichlet data are taken from the boundary ring of
 * the supplied fields; interior values serve as the initial guess.
 */
inline EllipticResult solve_elliptic(const GridField& X_init, const GridField& Y_init, SystemKind kind,
                                     const EllipticOptions& opt = {}) {
    if (kind == SystemKind::timelike_hyperbolic)
        throw std::invalid_argument("solve_elliptic: hyperbolic system needs the Cauchy march");
    const GridSpec& g = X_init.grid();
    if (!g.same_shape(Y_init.grid())) throw std::invalid_argument("solve_elliptic: grid mismatch");
    if (g.nu < 3 || g.nv < 3) throw GridTooSmall("solve_elliptic: need at least 3x3 nodes");
    const bool euclid = (kind == SystemKind::euclidean_elliptic);
    const double wu = 1.0 / (g.hu() * g.hu()), wv = 1.0 / (g.hv() * g.hv());
    const double diag = -2.0 * (wu + wv);

    EllipticResult res{X_init, Y_init, {}};
    GridField& X = res.X;
    GridField& Y = res.Y;

    auto residual_at = [&](int i, int j, double& rx, double& ry) {
        const double lapX = wu * (X.at(i + 1, j) - 2.0 * X.at(i, j) + X.at(i - 1, j)) +
                            wv * (X.at(i, j + 1) - 2.0 * X.at(i, j) + X.at(i, j - 1));
        const double lapY = wu * (Y.at(i + 1, j) - 2.0 * Y.at(i, j) + Y.at(i - 1, j)) +
                            wv * (Y.at(i, j + 1) - 2.0 * Y.at(i, j) + Y.at(i, j - 1));
        const double e = std::exp(X.at(i, j));
        const double cy = euclid ? std::cosh(Y.at(i, j)) : std::cos(Y.at(i, j));
        const double sy = euclid ? std::sinh(Y.at(i, j)) : std::sin(Y.at(i, j));
        rx = lapX - 2.0 * e * cy;
        ry = lapY - 2.0 * e * sy;
    };

    double max_res = 0.0;
    for (long sweep = 0; sweep < opt.max_iterations; ++sweep) {
        for (int parity = 0; parity < 2; ++parity) {
            for (int i = 1; i < g.nu - 1; ++i)
                for (int j = 1 + ((i + parity) & 1); j < g.nv - 1; j += 2) {
                    double rx, ry;
                    residual_at(i, j, rx, ry);
                    const double e = std::exp(X.at(i, j));
                    const double cy = euclid ? std::cosh(Y.at(i, j)) : std::cos(Y.at(i, j));
                    const double sy = euclid ? std::sinh(Y.at(i, j)) : std::sin(Y.at(i, j));
                    // local Jacobian of (rx, ry) in (X_ij, Y_ij)
                    const double axx = diag - 2.0 * e * cy;
                    const double axy = euclid ? -2.0 * e * sy : 2.0 * e * sy;
                    const double ayx = -2.0 * e * sy;
                    const double ayy = diag - 2.0 * e * cy;
                    const double det = axx * ayy - axy * ayx;
                    if (std::abs(det) < 1e-300) continue;
                    const double dX = (-rx * ayy + ry * axy) / det;
                    const double dY = (-ry * axx + rx * ayx) / det;
                    X.at(i, j) += opt.damping * dX;
                    Y.at(i, j) += opt.damping * dY;
                    if (!std::isfinite(X.at(i, j)) || std::abs(X.at(i, j)) > opt.blowup_limit)
                        throw Blowup("solve_elliptic: |X| exceeded blowup limit");
                }
        }
        max_res = 0.0;
        for (int i = 1; i < g.nu - 1; ++i)
            for (int j = 1; j < g.nv - 1; ++j) {
                double rx, ry;
                residual_at(i, j, rx, ry);
                max_res = std::max({max_res, std::abs(rx), std::abs(ry)});
            }
        res.report.iterations = sweep + 1;
        if (max_res < opt.tol) {
            res.report.converged = true;
            break;
        }
    }
    res.report.final_residual = max_res;
    return res;
}

} // namespace zmc
