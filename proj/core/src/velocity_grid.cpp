#include "kinetics/velocity_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinetics {

VelocityGrid VelocityGrid::make(int n, double eta_max) {
    if (n < 2) throw std::invalid_argument("VelocityGrid: need at least 2 nodes per axis");
    if (!(eta_max > 0.0)) throw std::invalid_argument("VelocityGrid: eta_max must be positive");

    VelocityGrid g;
    g.n = n;
    g.eta_max = eta_max;
    g.spacing = 2.0 * eta_max / (n - 1);
    g.axis.resize(n);
    g.waxis.resize(n);
    for (int i = 0; i < n; ++i) {
        g.axis[i] = -eta_max + g.spacing * i;
        g.waxis[i] = (i == 0 || i == n - 1) ? 0.5 * g.spacing : g.spacing;
    }

    const std::size_t total = static_cast<std::size_t>(n) * n * n;
    g.nodes.resize(total);
    g.weights.resize(total);
    std::size_t idx = 0;
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz, ++idx) {
                g.nodes[idx] = {g.axis[ix], g.axis[iy], g.axis[iz]};
                g.weights[idx] = g.waxis[ix] * g.waxis[iy] * g.waxis[iz];
            }
    return g;
}

double VelocityGrid::integrate(const std::vector<double>& f) const {
    if (f.size() != weights.size())
        throw std::invalid_argument("VelocityGrid::integrate: field size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i];
    return s;
}

double VelocityGrid::inner(const std::vector<double>& f, const std::vector<double>& g) const {
    if (f.size() != weights.size() || g.size() != weights.size())
        throw std::invalid_argument("VelocityGrid::inner: field size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i] * g[i];
    return s;
}

double VelocityGrid::norm(const std::vector<double>& f) const { return std::sqrt(inner(f, f)); }

double VelocityGrid::trilinear(const std::vector<double>& f, const Vec3& eta) const {
    if (f.size() != weights.size())
        throw std::invalid_argument("VelocityGrid::trilinear: field size mismatch");

    int i0[3];
    double t[3];
    for (int d = 0; d < 3; ++d) {
        double s = (eta[d] + eta_max) / spacing;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        int i = static_cast<int>(s);
        if (i > n - 2) i = n - 2;
        i0[d] = i;
        t[d] = s - i;
    }

    double v = 0.0;
    for (int dx = 0; dx < 2; ++dx)
        for (int dy = 0; dy < 2; ++dy)
            for (int dz = 0; dz < 2; ++dz) {
                const double w = (dx ? t[0] : 1.0 - t[0]) * (dy ? t[1] : 1.0 - t[1]) *
                                 (dz ? t[2] : 1.0 - t[2]);
                v += w * f[index(i0[0] + dx, i0[1] + dy, i0[2] + dz)];
            }
    return v;
}

}  // namespace kinetics
