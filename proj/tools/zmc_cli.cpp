// Command-line surface for the toolkit: generate Moore-type ZMC surfaces,
// verify meshes, reconstruct surfaces from invariant fields, run the
// natural PDE solvers, and export projected meshes.
//
// Exit codes: 0 success, 2 validation error, 3 numerical failure (a report
// is still written when one makes sense).

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zmc/zmc.hpp"

using nlohmann::json;
using namespace zmc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

json stats_json(const ResidualStats& s) {
    return {{"max", s.max}, {"mean", s.mean}, {"interior_nodes", s.interior_nodes}};
}

json grid_json(const GridSpec& g) {
    return {{"nu", g.nu},       {"nv", g.nv},       {"u_min", g.u_min},
            {"u_max", g.u_max}, {"v_min", g.v_min}, {"v_max", g.v_max}};
}

void write_report(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    out << j.dump(2) << "\n";
}

bool parse_grid_flag(const std::string& s, int& nu, int& nv) {
    const auto x = s.find('x');
    if (x == std::string::npos) return false;
    try {
        nu = std::stoi(s.substr(0, x));
        nv = std::stoi(s.substr(x + 1));
    } catch (...) {
        return false;
    }
    return nu >= 1 && nv >= 1;
}

// Cauchy data file: # nv=... v_min=... v_max=... then header v,X,Y,Xu,Yu
void write_cauchy(const std::string& path, const std::vector<double>& v, const CauchyData& d) {
    std::ofstream out(path);
    if (!out) throw FileFormatError(path + ": cannot open for writing");
    out << "# nv=" << v.size() << " v_min=" << detail::fmt_g17(v.front())
        << " v_max=" << detail::fmt_g17(v.back()) << "\n";
    out << "v,X,Y,Xu,Yu\n";
    for (std::size_t j = 0; j < v.size(); ++j)
        out << detail::fmt_g17(v[j]) << ',' << detail::fmt_g17(d.X0[j]) << ','
            << detail::fmt_g17(d.Y0[j]) << ',' << detail::fmt_g17(d.dX0[j]) << ','
            << detail::fmt_g17(d.dY0[j]) << "\n";
}

CauchyData read_cauchy(const std::string& path, double& v_min, double& v_max, int& nv) {
    std::ifstream in(path);
    if (!in) throw FileFormatError(path + ": cannot open");
    std::string header;
    const auto meta = detail::parse_meta(in, header, path);
    if (header != "v,X,Y,Xu,Yu") throw FileFormatError(path + ": expected header 'v,X,Y,Xu,Yu'");
    const auto need = [&](const char* k) {
        const auto it = meta.find(k);
        if (it == meta.end()) throw FileFormatError(path + ": missing metadata key " + std::string(k));
        return it->second;
    };
    nv = std::atoi(need("nv").c_str());
    v_min = std::atof(need("v_min").c_str());
    v_max = std::atof(need("v_max").c_str());
    CauchyData d;
    std::string line;
    long row = 0;
    while (row < nv) {
        if (!std::getline(in, line))
            throw FileFormatError(path + ": truncated at data row " + std::to_string(row + 1));
        if (line.empty()) continue;
        const auto vals = detail::split_row(line, 5, row + 1, path);
        d.X0.push_back(vals[1]);
        d.Y0.push_back(vals[2]);
        d.dX0.push_back(vals[3]);
        d.dY0.push_back(vals[4]);
        ++row;
    }
    return d;
}

// ---- moore ------------------------------------------------------------------

int cmd_moore(const std::string& config_path, const std::string& out_dir, const std::string& grid_flag) {
    RunConfig cfg = config_path.empty() ? RunConfig::parse_string("")
                                        : RunConfig::parse_file(config_path);
    cfg.require_known({"alpha", "beta", "A", "C", "eps", "g_min", "g_max", "nu", "nv", "v_min",
                       "v_max", "out"});
    MooreParams p;
    p.alpha = cfg.get_double("alpha", 1.0);
    p.beta = cfg.get_double("beta", 2.0);
    p.A = cfg.get_double("A", 1.0);
    p.C = cfg.get_double("C", 0.0);
    p.eps = cfg.get_int("eps", 1);
    p.g_min = cfg.get_double("g_min", 0.05);
    p.g_max = cfg.get_double("g_max", 1.0);
    int nu = cfg.get_int("nu", 101), nv = cfg.get_int("nv", 101);
    if (!grid_flag.empty() && !parse_grid_flag(grid_flag, nu, nv))
        throw ConfigError("--grid: expected NUxNV");
    const double v_min = cfg.get_double("v_min", 0.0), v_max = cfg.get_double("v_max", 1.0);
    const std::string dir = out_dir.empty() ? cfg.get_string("out", ".") : out_dir;

    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("moore: ") + e.what());
    }
    Timer timer;
    const MooreCanonical mc = moore_canonical_parameters(p, nu, nv, v_min, v_max);

    write_mesh(dir + "/mesh.csv", mc.patch);
    write_field(dir + "/mu.csv", mc.mu);
    write_field(dir + "/nu.csv", mc.nu);
    write_field(dir + "/K.csv", mc.K);
    write_field(dir + "/kappa.csv", mc.kappa);
    write_field(dir + "/X.csv", mc.X);
    write_field(dir + "/Y.csv", mc.Y);

    // Cauchy data on the first ubar line, for the hyperbolic solver
    const GridSpec& g = mc.X.grid();
    CauchyData cd;
    std::vector<double> vgrid;
    for (int j = 0; j < g.nv; ++j) {
        vgrid.push_back(g.v(j));
        cd.X0.push_back(mc.X.at(0, j));
        cd.Y0.push_back(mc.Y.at(0, j));
        cd.dX0.push_back(stencil_d1([&](int k) -> const double& { return mc.X.at(k, j); }, g.nu, 0, g.hu()));
        cd.dY0.push_back(stencil_d1([&](int k) -> const double& { return mc.Y.at(k, j); }, g.nu, 0, g.hu()));
    }
    write_cauchy(dir + "/cauchy.csv", vgrid, cd);

    // verification summary: stencil-route ZMC residual and natural-system residuals
    const SurfaceDerivs d = compute_derivs(mc.patch, DerivativeSource::stencils);
    GridField hnorm(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j) hnorm.at(i, j) = euclid_norm(mean_curvature_vector(d, i, j));
    const auto [r1, r2] = residual_munu(mc.mu, mc.nu);

    json rep;
    rep["command"] = "moore";
    rep["params"] = {{"alpha", p.alpha}, {"beta", p.beta},   {"A", p.A},        {"C", p.C},
                     {"eps", p.eps},     {"g_min", p.g_min}, {"g_max", p.g_max}};
    rep["grid"] = grid_json(g);
    rep["residuals"] = {{"munu_R1", stats_json(residual_stats(r1))},
                        {"munu_R2", stats_json(residual_stats(r2))}};
    rep["drift"] = nullptr;
    const double h_meas = interior_max_abs(hnorm);
    rep["checks"] = {{"zmc_residual",
                      {{"measured", h_meas}, {"tolerance", 1e-3}, {"pass", h_meas < 1e-3}}}};
    rep["timing"] = {{"seconds", timer.seconds()}};
    write_report(dir + "/report.json", rep);
    std::cout << "moore: wrote mesh + 6 fields + cauchy data to " << dir << "\n";
    return kExitOk;
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const std::string& out_opt, const std::string& mesh_path, double tol) {
    const std::string out_dir = out_opt.empty() ? "." : out_opt;
    Timer timer;
    const SurfacePatch patch = read_mesh(mesh_path);
    const GridSpec& g = patch.grid();
    json rep;
    rep["command"] = "verify";
    rep["params"] = {{"mesh", mesh_path}, {"tol", tol}};
    rep["grid"] = grid_json(g);
    rep["checks"] = json::object();
    rep["residuals"] = json::object();
    rep["drift"] = nullptr;

    const PatchClass cls = classify_patch(patch);
    rep["checks"]["timelike"] = {{"pass", cls == PatchClass::timelike},
                                 {"measured", to_string(cls)},
                                 {"tolerance", "timelike"}};

    if (cls == PatchClass::timelike) {
        const SurfaceDerivs d = compute_derivs(patch, DerivativeSource::stencils);
        GridField hnorm(g);
        for (int i = 0; i < g.nu; ++i)
            for (int j = 0; j < g.nv; ++j)
                hnorm.at(i, j) = euclid_norm(mean_curvature_vector(d, i, j));
        const ResidualStats hs = residual_stats(hnorm);
        rep["residuals"]["H_norm"] = stats_json(hs);
        rep["checks"]["zmc"] = {{"measured", hs.max}, {"tolerance", tol}, {"pass", hs.max < tol}};

        const NormalFrameField nf = normal_frame_field(d);
        const auto scan = flat_point_scan(d, nf);
        long flat_count = 0;
        for (int i = 1; i < g.nu - 1; ++i)
            for (int j = 1; j < g.nv - 1; ++j)
                if (scan.at(i, j).is_flat) ++flat_count;
        rep["checks"]["flat_point_free"] = {{"measured", flat_count}, {"tolerance", 0},
                                            {"pass", flat_count == 0}};

        if (flat_count == 0 && hs.max < 0.05) {
            try {
                const GeometricFrameField ff = geometric_frame_field(d, nf);
                const InvariantField inv = frame_invariants(patch, d, ff);
                const StructureResiduals sr = structure_equation_residuals(inv);
                const char* names[6] = {"structure_1", "structure_2", "structure_3",
                                        "structure_4", "structure_5", "structure_6"};
                for (int k = 0; k < 6; ++k)
                    rep["residuals"][names[k]] = stats_json(residual_stats(sr.eq(k)));
                const auto [r1, r2] = residual_munu(inv.mu, inv.nu);
                rep["residuals"]["munu_R1"] = stats_json(residual_stats(r1));
                rep["residuals"]["munu_R2"] = stats_json(residual_stats(r2));
                // canonical-gauge deviation of the mesh parameters
                double gauge = 0.0;
                for (int i = 1; i < g.nu - 1; ++i)
                    for (int j = 1; j < g.nv - 1; ++j) {
                        const double mod = std::sqrt(inv.mu.at(i, j) * inv.mu.at(i, j) +
                                                     inv.nu.at(i, j) * inv.nu.at(i, j));
                        gauge = std::max({gauge, std::abs(inv.E.at(i, j) * mod + 1.0),
                                          std::abs(inv.G.at(i, j) * mod - 1.0)});
                    }
                rep["checks"]["canonical_gauge"] = {{"measured", gauge},
                                                    {"tolerance", 100 * tol},
                                                    {"pass", gauge < 100 * tol}};
            } catch (const std::exception& e) {
                rep["checks"]["canonical_frame"] = {{"pass", false}, {"measured", e.what()},
                                                    {"tolerance", "no exception"}};
            }
        }
    }
    rep["timing"] = {{"seconds", timer.seconds()}};
    write_report(out_dir + "/report.json", rep);
    std::cout << "verify: report written to " << out_dir << "/report.json\n";
    return kExitOk;
}

// ---- reconstruct ------------------------------------------------------------

int cmd_reconstruct(const std::string& mu_path, const std::string& nu_path,
                    const std::string& out_opt, bool path_check, bool renorm, double tol) {
    const std::string out_dir = out_opt.empty() ? "." : out_opt;
    Timer timer;
    const GridField mu = read_field(mu_path);
    const GridField nu = read_field(nu_path);
    if (!mu.grid().same_shape(nu.grid()))
        throw ConfigError("reconstruct: mu and nu grids do not match");

    const CoefficientField cf = build_AB(mu, nu);
    const GridField integ = integrability_residual(cf);
    const ResidualStats is = residual_stats(integ);

    IntegrateOptions opt;
    opt.dual_path = path_check;
    opt.renormalize = renorm;
    const FrameSolution fs = integrate_frame(cf, Frame4::standard(), opt);
    const ReconstructedSurface rec = integrate_position(fs, cf, Vec4{}, opt);
    write_mesh(out_dir + "/mesh.csv", rec.patch);

    VerifyTolerances vt;
    vt.e_gauge = vt.g_gauge = vt.h_norm = vt.k_match = vt.kappa_match = tol;
    const ReconstructionReport vrep = verify_reconstruction(rec, mu, nu, vt);

    json rep;
    rep["command"] = "reconstruct";
    rep["params"] = {{"mu", mu_path}, {"nu", nu_path}, {"tol", tol},
                     {"path_check", path_check}, {"renorm", renorm}};
    rep["grid"] = grid_json(mu.grid());
    rep["residuals"] = {{"integrability", stats_json(is)}};
    rep["drift"] = {{"max_gram_defect", rec.max_gram_defect},
                    {"dual_frame_discrepancy", rec.dual_frame_discrepancy},
                    {"dual_position_discrepancy", rec.dual_position_discrepancy},
                    {"renormalized", renorm}};
    rep["checks"] = json::object();
    rep["checks"]["integrable"] = {{"measured", is.max}, {"tolerance", 0.05},
                                   {"pass", is.max < 0.05}};
    if (is.max >= 0.05)
        rep["warnings"] = {"NotIntegrable: input fields do not satisfy the natural system"};
    for (const CheckEntry& c : vrep.checks)
        rep["checks"][c.name] = {{"measured", c.measured}, {"tolerance", c.tolerance}, {"pass", c.pass}};
    rep["timing"] = {{"seconds", timer.seconds()}};
    write_report(out_dir + "/report.json", rep);
    std::cout << "reconstruct: mesh and report written to " << out_dir << "\n";
    return kExitOk;
}

// ---- pde ---------------------------------------------------------------------

int cmd_pde(const std::string& kind_str, const std::string& cauchy_path, const std::string& x_path,
            const std::string& y_path, const std::string& grid_flag, const std::string& out_opt,
            double u_extent, double tol) {
    const std::string out_dir = out_opt.empty() ? "." : out_opt;
    Timer timer;
    SystemKind kind;
    if (kind_str == "timelike") kind = SystemKind::timelike_hyperbolic;
    else if (kind_str == "spacelike") kind = SystemKind::spacelike_elliptic;
    else if (kind_str == "euclidean") kind = SystemKind::euclidean_elliptic;
    else throw ConfigError("pde: --kind must be timelike, spacelike or euclidean");

    json rep;
    rep["command"] = "pde";
    rep["params"] = {{"kind", kind_str}, {"tol", tol}};
    rep["drift"] = nullptr;

    if (kind == SystemKind::timelike_hyperbolic) {
        if (cauchy_path.empty()) throw ConfigError("pde: timelike kind needs --cauchy");
        double v_min, v_max;
        int nv;
        const CauchyData data = read_cauchy(cauchy_path, v_min, v_max, nv);
        int nu = nv;
        int nv_flag = nv;
        if (!grid_flag.empty()) {
            if (!parse_grid_flag(grid_flag, nu, nv_flag)) throw ConfigError("--grid: expected NUxNV");
            if (nv_flag != nv)
                throw ConfigError("pde: --grid NV must match the Cauchy line (" + std::to_string(nv) + ")");
        }
        const GridSpec g{nu, nv, 0.0, u_extent, v_min, v_max};
        rep["grid"] = grid_json(g);
        try {
            const auto [X, Y] = solve_hyperbolic(data, g, kind);
            write_field(out_dir + "/X.csv", X);
            write_field(out_dir + "/Y.csv", Y);
            const auto [R1, R2] = residual_XY(X, Y, kind);
            rep["residuals"] = {{"XY_R1", stats_json(residual_stats(R1))},
                                {"XY_R2", stats_json(residual_stats(R2))}};
            const double m = std::max(interior_max_abs(R1), interior_max_abs(R2));
            rep["checks"] = {{"residual", {{"measured", m}, {"tolerance", tol}, {"pass", m < tol}}}};
        } catch (const CFLViolation& e) {
            rep["checks"] = {{"cfl", {{"pass", false}, {"measured", e.what()}}}};
            rep["timing"] = {{"seconds", timer.seconds()}};
            write_report(out_dir + "/report.json", rep);
            std::cerr << "pde: " << e.what() << "\n";
            return kExitNumerical;
        } catch (const Blowup& e) {
            rep["checks"] = {{"blowup", {{"pass", false}, {"measured", e.what()}}}};
            rep["timing"] = {{"seconds", timer.seconds()}};
            write_report(out_dir + "/report.json", rep);
            std::cerr << "pde: " << e.what() << "\n";
            return kExitNumerical;
        }
    } else {
        if (x_path.empty() || y_path.empty()) throw ConfigError("pde: elliptic kinds need --x and --y");
        const GridField X0 = read_field(x_path);
        const GridField Y0 = read_field(y_path);
        if (!X0.grid().same_shape(Y0.grid())) throw ConfigError("pde: X and Y grids do not match");
        rep["grid"] = grid_json(X0.grid());
        EllipticOptions opt;
        opt.tol = tol > 0 ? tol : opt.tol;
        const EllipticResult r = solve_elliptic(X0, Y0, kind, opt);
        write_field(out_dir + "/X.csv", r.X);
        write_field(out_dir + "/Y.csv", r.Y);
        rep["residuals"] = {{"final", {{"max", r.report.final_residual}}}};
        rep["checks"] = {{"converged",
                          {{"measured", r.report.final_residual},
                           {"tolerance", opt.tol},
                           {"pass", r.report.converged},
                           {"iterations", r.report.iterations}}}};
        if (!r.report.converged) {
            rep["timing"] = {{"seconds", timer.seconds()}};
            write_report(out_dir + "/report.json", rep);
            std::cerr << "pde: no convergence after " << r.report.iterations << " sweeps\n";
            return kExitNumerical;
        }
    }
    rep["timing"] = {{"seconds", timer.seconds()}};
    write_report(out_dir + "/report.json", rep);
    std::cout << "pde: fields and report written to " << out_dir << "\n";
    return kExitOk;
}

// ---- export ------------------------------------------------------------------

int cmd_export(const std::string& mesh_path, const std::string& obj_path, const std::string& project) {
    const SurfacePatch patch = read_mesh(mesh_path);
    int axis = 1; // default: drop x2
    if (project == "x1") axis = 0;
    else if (project == "x2") axis = 1;
    else if (project == "x3") axis = 2;
    else if (project == "x4") axis = 3;
    else if (!project.empty()) throw ConfigError("export: --project must be one of x1..x4");
    write_obj(obj_path, patch, axis);
    std::cout << "export: wrote " << obj_path << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"timelike zero-mean-curvature surface toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, grid_flag, mesh_path, mu_path, nu_path;
    std::string kind, cauchy_path, x_path, y_path, obj_path, project = "x2";
    double tol = 1e-4, u_extent = 1.0;
    bool path_check = false, renorm = false;

    CLI::App* moore = app.add_subcommand("moore", "generate a ZMC Moore surface and its invariants");
    moore->add_option("--config", config_path, "key = value parameter file");
    moore->add_option("--out", out_dir, "output directory");
    moore->add_option("--grid", grid_flag, "override grid as NUxNV");

    CLI::App* verify = app.add_subcommand("verify", "verify a mesh file");
    verify->add_option("--mesh", mesh_path, "mesh CSV")->required();
    verify->add_option("--out", out_dir, "output directory");
    verify->add_option("--tol", tol, "ZMC residual tolerance");

    CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct a surface from (mu, nu) fields");
    rec->add_option("--mu", mu_path, "mu field CSV")->required();
    rec->add_option("--nu", nu_path, "nu field CSV")->required();
    rec->add_option("--out", out_dir, "output directory");
    rec->add_option("--tol", tol, "verification tolerance");
    rec->add_flag("--path-check", path_check, "also integrate column-first and report the gap");
    rec->add_flag("--renorm", renorm, "re-orthonormalize the frame after every step");

    CLI::App* pde = app.add_subcommand("pde", "solve a natural PDE system");
    pde->add_option("--kind", kind, "timelike | spacelike | euclidean")->required();
    pde->add_option("--cauchy", cauchy_path, "Cauchy data CSV (timelike)");
    pde->add_option("--x", x_path, "X field CSV with boundary data (elliptic)");
    pde->add_option("--y", y_path, "Y field CSV with boundary data (elliptic)");
    pde->add_option("--grid", grid_flag, "march grid as NUxNV (timelike)");
    pde->add_option("--u-extent", u_extent, "march length in u (timelike)");
    pde->add_option("--out", out_dir, "output directory");
    pde->add_option("--tol", tol, "residual tolerance");

    CLI::App* exp = app.add_subcommand("export", "project a mesh to an OBJ file");
    exp->add_option("--mesh", mesh_path, "mesh CSV")->required();
    exp->add_option("--obj", obj_path, "output OBJ path")->required();
    exp->add_option("--project", project, "axis to drop: x1 | x2 | x3 | x4");

    CLI11_PARSE(app, argc, argv);

    try {
        if (moore->parsed()) return cmd_moore(config_path, out_dir, grid_flag);
        if (verify->parsed()) return cmd_verify(out_dir, mesh_path, tol);
        if (rec->parsed()) return cmd_reconstruct(mu_path, nu_path, out_dir, path_check, renorm, tol);
        if (pde->parsed())
            return cmd_pde(kind, cauchy_path, x_path, y_path, grid_flag, out_dir, u_extent, tol);
        if (exp->parsed()) return cmd_export(mesh_path, obj_path, project);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FileFormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
