#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

// Uniform rectangular grids and second-order finite differences.
//
// Boundary stencils are one-sided but chosen so that their leading error
// term equals the interior central one (+h^2 f'''/6 for d/du, +h^2 f''''/12
// for d2/du2, through O(h^3)). Mixing stencils with different error
// constants leaves a kink in the error field at the boundary ring; anything
// that differentiates a derived field twice (curvature recomputation, frame
// integration feedback) then loses an order of convergence there.

namespace zmc {

struct GridSpec {
    int nu = 0, nv = 0;
    double u_min = 0.0, u_max = 0.0;
    double v_min = 0.0, v_max = 0.0;

    double hu() const { return nu > 1 ? (u_max - u_min) / (nu - 1) : 0.0; }
    double hv() const { return nv > 1 ? (v_max - v_min) / (nv - 1) : 0.0; }
    double u(int i) const { return u_min + i * hu(); }
    double v(int j) const { return v_min + j * hv(); }
    std::size_t size() const { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * nv + j; } // v-fastest

    bool same_shape(const GridSpec& o) const {
        return nu == o.nu && nv == o.nv && u_min == o.u_min && u_max == o.u_max &&
               v_min == o.v_min && v_max == o.v_max;
    }
};

class GridTooSmall : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

template <class T>
class GridOf {
  public:
    GridOf() = default;
    explicit GridOf(const GridSpec& g, T fill = T{}) : grid_(g), data_(g.size(), fill) {}

    const GridSpec& grid() const { return grid_; }
    T& at(int i, int j) { return data_[grid_.idx(i, j)]; }
    const T& at(int i, int j) const { return data_[grid_.idx(i, j)]; }
    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

  private:
    GridSpec grid_;
    std::vector<T> data_;
};

using GridField = GridOf<double>;

// ---- stencil weights along one line of samples -------------------------

// first derivative along index i of a sampled line f(0..n-1)
template <class Get>
auto stencil_d1(const Get& f, int n, int i, double h) -> decltype(f(0) * 1.0) {
    if (n < 5) throw GridTooSmall("stencil_d1: need at least 5 nodes");
    if (i >= 1 && i <= n - 2) return (f(i + 1) - f(i - 1)) * (0.5 / h);
    if (i == 0)
        return (f(0) * -5.0 + f(1) * 11.0 + f(2) * -10.0 + f(3) * 5.0 + f(4) * -1.0) * (0.5 / h);
    return (f(n - 1) * 5.0 + f(n - 2) * -11.0 + f(n - 3) * 10.0 + f(n - 4) * -5.0 + f(n - 5) * 1.0) *
           (0.5 / h);
}

// second derivative along index i of a sampled line f(0..n-1)
template <class Get>
auto stencil_d2(const Get& f, int n, int i, double h) -> decltype(f(0) * 1.0) {
    if (n < 5) throw GridTooSmall("stencil_d2: need at least 5 nodes");
    const double w = 1.0 / (h * h);
    if (i >= 1 && i <= n - 2) return (f(i + 1) - f(i) * 2.0 + f(i - 1)) * w;
    if (n >= 6) {
        if (i == 0)
            return (f(0) * 4.0 + f(1) * -14.0 + f(2) * 20.0 + f(3) * -15.0 + f(4) * 6.0 + f(5) * -1.0) * w;
        return (f(n - 1) * 4.0 + f(n - 2) * -14.0 + f(n - 3) * 20.0 + f(n - 4) * -15.0 + f(n - 5) * 6.0 +
                f(n - 6) * -1.0) * w;
    }
    // n == 5 fallback (error constant matched only to leading order)
    if (i == 0) return (f(0) * 3.0 + f(1) * -9.0 + f(2) * 10.0 + f(3) * -5.0 + f(4) * 1.0) * w;
    return (f(4) * 3.0 + f(3) * -9.0 + f(2) * 10.0 + f(1) * -5.0 + f(0) * 1.0) * w;
}

// ---- whole-field derivatives -------------------------------------------

template <class T>
GridOf<T> d_du(const GridOf<T>& F) {
    const GridSpec& g = F.grid();
    GridOf<T> out(g);
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i)
            out.at(i, j) = stencil_d1([&](int k) -> const T& { return F.at(k, j); }, g.nu, i, g.hu());
    return out;
}

template <class T>
GridOf<T> d_dv(const GridOf<T>& F) {
    const GridSpec& g = F.grid();
    GridOf<T> out(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j)
            out.at(i, j) = stencil_d1([&](int k) -> const T& { return F.at(i, k); }, g.nv, j, g.hv());
    return out;
}

template <class T>
GridOf<T> d2_duu(const GridOf<T>& F) {
    const GridSpec& g = F.grid();
    GridOf<T> out(g);
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i)
            out.at(i, j) = stencil_d2([&](int k) -> const T& { return F.at(k, j); }, g.nu, i, g.hu());
    return out;
}

template <class T>
GridOf<T> d2_dvv(const GridOf<T>& F) {
    const GridSpec& g = F.grid();
    GridOf<T> out(g);
    for (int i = 0; i < g.nu; ++i)
        for (int j = 0; j < g.nv; ++j)
            out.at(i, j) = stencil_d2([&](int k) -> const T& { return F.at(i, k); }, g.nv, j, g.hv());
    return out;
}

template <class T>
GridOf<T> d2_duv(const GridOf<T>& F) {
    return d_dv(d_du(F));
}

// max |field| over interior nodes (outermost ring excluded)
inline double interior_max_abs(const GridField& F) {
    const GridSpec& g = F.grid();
    double m = 0.0;
    for (int i = 1; i < g.nu - 1; ++i)
        for (int j = 1; j < g.nv - 1; ++j) m = std::max(m, std::abs(F.at(i, j)));
    return m;
}

inline double interior_mean_abs(const GridField& F) {
    const GridSpec& g = F.grid();
    if (g.nu < 3 || g.nv < 3) return 0.0;
    double s = 0.0;
    for (int i = 1; i < g.nu - 1; ++i)
        for (int j = 1; j < g.nv - 1; ++j) s += std::abs(F.at(i, j));
    return s / (static_cast<double>(g.nu - 2) * (g.nv - 2));
}

struct ResidualStats {
    double max = 0.0;
    double mean = 0.0;
    long interior_nodes = 0;
};

inline ResidualStats residual_stats(const GridField& F) {
    const GridSpec& g = F.grid();
    ResidualStats s;
    s.interior_nodes = static_cast<long>(std::max(0, g.nu - 2)) * std::max(0, g.nv - 2);
    s.max = interior_max_abs(F);
    s.mean = interior_mean_abs(F);
    return s;
}

} // namespace zmc
