#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "zmc/canonical.hpp"
#include "zmc/moore.hpp"

using namespace zmc;

namespace {

const MooreParams kTame{1.0, 2.0, 1.0, 0.0, 1, 0.4, 1.2};

// 1-D scan oracle for the diagonalizing angle: golden-section minimization
// of |a c + b d| after rotation, independent of the artanh formula
double scan_angle(const SigmaComponents& s) {
    auto objective = [&](double phi) {
        const SigmaComponents r = rotate_sigma(s, phi);
        return std::abs(r.a * r.c + r.b * r.d);
    };
    double lo = -2.0, hi = 2.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = objective(x2);
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

TEST_CASE("rotate_sigma basics") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    SECTION("phi = 0 is the identity") {
        const SigmaComponents s{1.1, -0.3, 0.5, 2.0};
        const SigmaComponents r = rotate_sigma(s, 0.0);
        CHECK(r.a == s.a);
        CHECK(r.b == s.b);
        CHECK(r.c == s.c);
        CHECK(r.d == s.d);
    }
    SECTION("lightlike-style example mixes into cosh/sinh") {
        for (double phi : {0.3, -1.1}) {
            const SigmaComponents r = rotate_sigma({1, 0, 0, 1}, phi);
            CHECK(r.a == Catch::Approx(std::cosh(2 * phi)));
            CHECK(r.b == Catch::Approx(std::sinh(2 * phi)));
            CHECK(r.c == Catch::Approx(std::sinh(2 * phi)));
            CHECK(r.d == Catch::Approx(std::cosh(2 * phi)));
        }
    }
    SECTION("group property and ad - bc invariance") {
        for (int t = 0; t < 100; ++t) {
            const SigmaComponents s{dist(rng), dist(rng), dist(rng), dist(rng)};
            const double phi = 0.5 * dist(rng);
            const SigmaComponents fwd = rotate_sigma(s, phi);
            const SigmaComponents back = rotate_sigma(fwd, -phi);
            CHECK(back.a == Catch::Approx(s.a).margin(1e-12));
            CHECK(back.d == Catch::Approx(s.d).margin(1e-12));
            CHECK(fwd.a * fwd.d - fwd.b * fwd.c ==
                  Catch::Approx(s.a * s.d - s.b * s.c).epsilon(1e-12).margin(1e-12));
        }
    }
}

TEST_CASE("diagonalizing angle") {
    SECTION("already diagonal") {
        CHECK(diagonalizing_angle({1, 0, 0, 2}) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("flat configuration is rejected") {
        CHECK_THROWS_AS(diagonalizing_angle({1, 1, 1, 1}), FlatPointError);
    }
    SECTION("defining equation and scan oracle, random non-flat inputs") {
        std::mt19937 rng(12);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        int tested = 0;
        while (tested < 10000) {
            const SigmaComponents s{dist(rng), dist(rng), dist(rng), dist(rng)};
            const double n2 = s.a * s.a + s.b * s.b + s.c * s.c + s.d * s.d;
            if (n2 < 0.1) continue;
            const double A = -2.0 * (s.a * s.c + s.b * s.d) / n2;
            if (std::abs(A) >= 0.999) continue; // flat or near-flat: rejected elsewhere
            ++tested;
            const double phi = diagonalizing_angle(s);
            const SigmaComponents r = rotate_sigma(s, phi);
            CHECK(std::abs(r.a * r.c + r.b * r.d) < 1e-10 * n2);
            // defining equation of the angle
            const double lhs =
                (s.a * s.c + s.b * s.d) * std::cosh(4 * phi) + 0.5 * n2 * std::sinh(4 * phi);
            CHECK(std::abs(lhs) < 1e-10 * n2);
        }
        // scan-oracle agreement on a smaller sample (the scan is slow)
        for (int t = 0; t < 200; ++t) {
            const SigmaComponents s{dist(rng), dist(rng), dist(rng), dist(rng)};
            const double n2 = s.a * s.a + s.b * s.b + s.c * s.c + s.d * s.d;
            if (n2 < 0.1) { --t; continue; }
            const double A = -2.0 * (s.a * s.c + s.b * s.d) / n2;
            if (std::abs(A) >= 0.99) { --t; continue; }
            CHECK(diagonalizing_angle(s) == Catch::Approx(scan_angle(s)).margin(1e-6));
        }
    }
}

TEST_CASE("geometric frame reproduces the paper frame on the Moore patch") {
    const MooreMeridian mer(kTame);
    const SurfacePatch p = zmc_moore_patch(mer, 33, 33);
    const SurfaceDerivs d = compute_derivs(p, DerivativeSource::analytic);
    const NormalFrameField nf = normal_frame_field(d);
    const GridSpec& g = p.grid();
    for (int i = 0; i < g.nu; i += 8)
        for (int j = 0; j < g.nv; j += 8) {
            const Frame4 ref = moore_frame(mer, g.u(i), g.v(j));
            GeometricFrameOptions opt;
            opt.reference = &ref;
            const GeometricFrameSample smp = geometric_frame(d, nf, i, j, opt);
            const MooreInvariants inv = moore_invariants(mer, g.u(i));
            CHECK(smp.nu == Catch::Approx(inv.nu).epsilon(1e-9).margin(1e-10));
            CHECK(smp.mu == Catch::Approx(inv.mu).epsilon(1e-9).margin(1e-10));
            CHECK(std::abs(smp.phi) < 1e-7); // coordinate frame is already geometric
            CHECK(euclid_norm(smp.frame.x - ref.x) < 1e-7);
            CHECK(euclid_norm(smp.frame.n1 - ref.n1) < 1e-7);
            CHECK(euclid_norm(smp.frame.n2 - ref.n2) < 1e-7);
            CHECK(gram_defect(smp.frame) < 1e-10);
        }
}

TEST_CASE("geometric frame rejections") {
    SECTION("totally geodesic points are flat") {
        const GridSpec g{9, 9, 0.0, 1.0, 0.0, 1.0};
        SurfacePatch p(g, [](double u, double v) { return Vec4{v, 0.0, 0.0, u}; });
        const SurfaceDerivs d = compute_derivs(p);
        NormalFrameField nf;
        nf.e1 = GridOf<Vec4>(g, Vec4{0, 1, 0, 0});
        nf.e2 = GridOf<Vec4>(g, Vec4{0, 0, 1, 0});
        CHECK_THROWS_AS(geometric_frame(d, nf, 4, 4), FlatPointError);
    }
    SECTION("a visibly non-minimal surface is rejected") {
        const GridSpec g{21, 21, 0.0, 1.0, 0.0, 3.0};
        SurfacePatch p(g, [](double u, double v) { return Vec4{std::cos(v), std::sin(v), 0.0, u}; });
        const SurfaceDerivs d = compute_derivs(p);
        const NormalFrameField nf = normal_frame_field(d);
        CHECK_THROWS_AS(geometric_frame(d, nf, 10, 10), NotZMC);
    }
}

TEST_CASE("frame invariants on the arclength Moore patch") {
    const MooreMeridian mer(kTame);
    const int n = 101;
    const SurfacePatch p = zmc_moore_patch(mer, n, n);
    const SurfaceDerivs d = compute_derivs(p, DerivativeSource::analytic);
    const NormalFrameField nf = normal_frame_field(d);
    GeometricFrameOptions opt;
    const Frame4 anchor_ref = moore_frame(mer, 0.0, 0.0);
    opt.reference = &anchor_ref;
    const GeometricFrameField ff = geometric_frame_field(d, nf, opt);
    const InvariantField inv = frame_invariants(p, d, ff);
    const GridSpec& g = p.grid();

    // closed-form oracles in the arclength gauge:
    //   gamma1 = 0, gamma2 = -Qdot/(2Q), beta1 = 0, beta2 = ab(f f' - g g')/Q
    double w_g1 = 0, w_g2 = 0, w_b1 = 0, w_b2 = 0, w_mu = 0, w_nu = 0;
    for (int i = 1; i < g.nu - 1; ++i) {
        const MeridianSample s = mer.sample(g.u(i));
        const double Q = s.f * s.f + 4.0 * s.g * s.g;
        const double Qd = 2.0 * s.f * s.fp + 8.0 * s.g * s.gp;
        const MooreInvariants mi = moore_invariants(mer, g.u(i));
        for (int j = 1; j < g.nv - 1; ++j) {
            w_g1 = std::max(w_g1, std::abs(inv.gamma1.at(i, j)));
            w_g2 = std::max(w_g2, std::abs(inv.gamma2.at(i, j) - (-Qd / (2.0 * Q))));
            w_b1 = std::max(w_b1, std::abs(inv.beta1.at(i, j)));
            w_b2 = std::max(w_b2, std::abs(inv.beta2.at(i, j) - 2.0 * (s.f * s.fp - s.g * s.gp) / Q));
            w_mu = std::max(w_mu, std::abs(inv.mu.at(i, j) - mi.mu));
            w_nu = std::max(w_nu, std::abs(inv.nu.at(i, j) - mi.nu));
        }
    }
    CHECK(w_mu < 1e-9);
    CHECK(w_nu < 1e-9);
    CHECK(w_g1 < 1e-9);   // E = -1 exactly, so its log derivative vanishes
    CHECK(w_g2 < 5e-3);   // gamma2 differentiates ln G by stencils: O(h^2)
    CHECK(w_b1 < 2e-4);   // beta's differentiate the frame field: O(h^2)
    CHECK(w_b2 < 2e-4);

    SECTION("structure equation residuals vanish at order 2") {
        const StructureResiduals r = structure_equation_residuals(inv);
        double worst101 = 0.0;
        for (int k = 0; k < 6; ++k) worst101 = std::max(worst101, interior_max_abs(r.eq(k)));
        CHECK(worst101 < 0.1); // measured ~3.6e-2, dominated by the g_min edge

        const SurfacePatch p2 = zmc_moore_patch(mer, 201, 201);
        const SurfaceDerivs d2 = compute_derivs(p2, DerivativeSource::analytic);
        const NormalFrameField nf2 = normal_frame_field(d2);
        GeometricFrameOptions opt2;
        const Frame4 anchor2 = moore_frame(mer, 0.0, 0.0);
        opt2.reference = &anchor2;
        const GeometricFrameField ff2 = geometric_frame_field(d2, nf2, opt2);
        const InvariantField inv2 = frame_invariants(p2, d2, ff2);
        const StructureResiduals r2 = structure_equation_residuals(inv2);
        double worst201 = 0.0;
        for (int k = 0; k < 6; ++k) worst201 = std::max(worst201, interior_max_abs(r2.eq(k)));
        const double ratio = worst101 / worst201;
        CHECK(ratio > 3.2);
        CHECK(ratio < 4.8);
    }
}

TEST_CASE("structure equations flag inconsistent data") {
    const GridSpec g{21, 21, 0.0, 1.0, 0.0, 1.0};
    InvariantField inv(g);
    SECTION("constant nu, mu with nu^2 != mu^2 violates the Gauss equation") {
        for (int i = 0; i < 21; ++i)
            for (int j = 0; j < 21; ++j) {
                inv.E.at(i, j) = -1.0;
                inv.G.at(i, j) = 1.0;
                inv.nu.at(i, j) = 2.0;
                inv.mu.at(i, j) = 1.0;
            }
        const StructureResiduals r = structure_equation_residuals(inv);
        CHECK(interior_max_abs(r.R5) == Catch::Approx(3.0).margin(1e-10)); // |nu^2 - mu^2|
        CHECK(interior_max_abs(r.R6) == Catch::Approx(4.0).margin(1e-10)); // |2 nu mu|
        CHECK(interior_max_abs(r.R1) < 1e-12);
    }
    SECTION("scaling nu, mu with frame terms fixed breaks equations 1-4") {
        // start from consistent Moore data, then double nu, mu only
        const MooreMeridian mer(kTame);
        const SurfacePatch p = zmc_moore_patch(mer, 41, 41);
        const SurfaceDerivs d = compute_derivs(p, DerivativeSource::analytic);
        const NormalFrameField nf = normal_frame_field(d);
        const GeometricFrameField ff = geometric_frame_field(d, nf);
        InvariantField mi = frame_invariants(p, d, ff);
        for (std::size_t k = 0; k < mi.nu.data().size(); ++k) {
            mi.nu.data()[k] *= 2.0;
            mi.mu.data()[k] *= 2.0;
        }
        const StructureResiduals r = structure_equation_residuals(mi);
        CHECK(interior_max_abs(r.R1) > 1e-2);
        CHECK(interior_max_abs(r.R3) > 1e-2);
    }
}

TEST_CASE("canonical reparametrization of the Moore patch") {
    const MooreMeridian mer(kTame);
    const int n = 81;
    const SurfacePatch p = zmc_moore_patch(mer, n, n);
    const SurfaceDerivs d = compute_derivs(p, DerivativeSource::analytic);
    const NormalFrameField nf = normal_frame_field(d);
    const GeometricFrameField ff = geometric_frame_field(d, nf);
    const InvariantField inv = frame_invariants(p, d, ff);
    const CanonicalReparametrization rep = canonical_reparametrization(p, inv);

    SECTION("ubar map matches the closed form") {
        // oracle: ubar(u) = moore_ub_of_g(g(u)); the reparametrization works
        // from sampled fields only
        const GridSpec& ng = rep.patch.grid();
        CHECK(ng.u_max == Catch::Approx(moore_ub_of_g(kTame.g_max, kTame)).margin(2e-4));
        for (int i = 0; i < ng.nu; i += 16) {
            const double ub = ng.u(i);
            const double u_expected = rep.u_of_ubar[static_cast<std::size_t>(i)];
            const double ub_check = moore_ub_of_g(mer.g_of_u(u_expected), kTame);
            CHECK(ub_check == Catch::Approx(ub).margin(5e-5));
        }
    }
    SECTION("resampled patch satisfies the canonical gauge to O(h^2)") {
        const SurfaceDerivs nd = compute_derivs(rep.patch);
        const GridSpec& ng = rep.patch.grid();
        double worstE = 0.0, worstG = 0.0;
        for (int i = 1; i < ng.nu - 1; ++i)
            for (int j = 1; j < ng.nv - 1; ++j) {
                const FundamentalForms f = first_fundamental(nd, i, j);
                const double mod = std::sqrt(rep.invariants.mu.at(i, j) * rep.invariants.mu.at(i, j) +
                                             rep.invariants.nu.at(i, j) * rep.invariants.nu.at(i, j));
                worstE = std::max(worstE, std::abs(f.E * mod + 1.0));
                worstG = std::max(worstG, std::abs(f.G * mod - 1.0));
            }
        CHECK(worstE < 5e-3);
        CHECK(worstG < 5e-3);
    }
}

TEST_CASE("canonical reparametrization of an already-canonical patch is affine") {
    const MooreCanonical mc = moore_canonical_parameters(kTame, 61, 61);
    const SurfaceDerivs d = compute_derivs(mc.patch, DerivativeSource::analytic);
    const NormalFrameField nf = normal_frame_field(d);
    const GeometricFrameField ff = geometric_frame_field(d, nf);
    const InvariantField inv = frame_invariants(mc.patch, d, ff);
    const CanonicalReparametrization rep = canonical_reparametrization(mc.patch, inv);
    const GridSpec& g = mc.patch.grid();
    const GridSpec& ng = rep.patch.grid();
    CHECK(ng.u_max - ng.u_min == Catch::Approx(g.u_max - g.u_min).epsilon(1e-4));
    for (int i = 0; i < ng.nu; i += 12)
        CHECK(rep.u_of_ubar[static_cast<std::size_t>(i)] == Catch::Approx(g.u(i)).margin(2e-4));
}

TEST_CASE("v-dependent gauge function is rejected") {
    const MooreMeridian mer(kTame);
    const SurfacePatch p = zmc_moore_patch(mer, 21, 21);
    const SurfaceDerivs d = compute_derivs(p, DerivativeSource::analytic);
    const NormalFrameField nf = normal_frame_field(d);
    const GeometricFrameField ff = geometric_frame_field(d, nf);
    InvariantField inv = frame_invariants(p, d, ff);
    // tamper: make -E sqrt(mu^2+nu^2) vary along v
    for (int i = 0; i < 21; ++i)
        for (int j = 0; j < 21; ++j) inv.E.at(i, j) *= 1.0 + 0.05 * j;
    CHECK_THROWS_AS(canonical_reparametrization(p, inv), NotSemiCanonical);
}
