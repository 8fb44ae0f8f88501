/// @file spatial_grid.cpp
/// @brief Construction and quadrature of the cut-cell ball grid.

#include "kinetics/spatial_grid.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace kinetics {

namespace {

/// Fraction of the lattice cell centred at y that lies inside the unit ball,
/// measured by midpoint subsampling. The sample offsets are symmetric about
/// zero, so mirrored cells report bitwise-identical fractions.
double inside_fraction(const Vec3& y, double spacing) {
    constexpr int m = 8;
    int inside = 0;
    for (int a = 0; a < m; ++a) {
        const double ox = y[0] + spacing * ((a + 0.5) / m - 0.5);
        for (int b = 0; b < m; ++b) {
            const double oy = y[1] + spacing * ((b + 0.5) / m - 0.5);
            for (int c = 0; c < m; ++c) {
                const double oz = y[2] + spacing * ((c + 0.5) / m - 0.5);
                if (ox * ox + oy * oy + oz * oz < 1.0) ++inside;
            }
        }
    }
    return static_cast<double>(inside) / (m * m * m);
}

}  // namespace

SpatialGrid SpatialGrid::make(std::size_t n) {
    if (n < 5 || n % 2 == 0) {
        throw std::invalid_argument("SpatialGrid: per-axis count must be odd and at least 5");
    }
    SpatialGrid g;
    g.n = n;
    g.spacing = 2.0 / static_cast<double>(n - 1);

    const auto mid = static_cast<std::int64_t>((n - 1) / 2);
    g.axis.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.axis[i] = static_cast<double>(static_cast<std::int64_t>(i) - mid) * g.spacing;
    }

    g.lookup.assign(n * n * n, npos);
    const double half_diag = 0.5 * std::sqrt(3.0) * g.spacing;
    for (std::size_t ix = 0; ix < n; ++ix) {
        for (std::size_t iy = 0; iy < n; ++iy) {
            for (std::size_t iz = 0; iz < n; ++iz) {
                const Vec3 y{g.axis[ix], g.axis[iy], g.axis[iz]};
                const double r = norm(y);
                if (r >= 1.0) continue;
                double vol = g.spacing * g.spacing * g.spacing;
                if (r + half_diag >= 1.0) vol *= inside_fraction(y, g.spacing);
                g.lookup[g.lattice_index(ix, iy, iz)] = g.nodes.size();
                g.nodes.push_back(y);
                g.volume.push_back(vol);
                g.ijk.push_back({static_cast<std::int32_t>(ix), static_cast<std::int32_t>(iy),
                                 static_cast<std::int32_t>(iz)});
            }
        }
    }

    g.hull.assign(g.nodes.size(), 0);
    for (std::size_t id = 0; id < g.nodes.size(); ++id) {
        const auto& c = g.ijk[id];
        for (int ax = 0; ax < 3 && !g.hull[id]; ++ax) {
            for (int step = -1; step <= 1; step += 2) {
                std::int64_t q[3] = {c[0], c[1], c[2]};
                q[ax] += step;
                if (g.node_at(q[0], q[1], q[2]) == npos) {
                    g.hull[id] = 1;
                    break;
                }
            }
        }
    }
    return g;
}

std::size_t SpatialGrid::node_at(std::int64_t ix, std::int64_t iy, std::int64_t iz) const {
    const auto limit = static_cast<std::int64_t>(n);
    if (ix < 0 || iy < 0 || iz < 0 || ix >= limit || iy >= limit || iz >= limit) return npos;
    return lookup[lattice_index(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy),
                                static_cast<std::size_t>(iz))];
}

double SpatialGrid::integrate(const std::vector<double>& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += volume[i] * f[i];
    return sum;
}

double SpatialGrid::inner(const std::vector<double>& f, const std::vector<double>& g) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += volume[i] * f[i] * g[i];
    return sum;
}

double SpatialGrid::h1_norm(const std::vector<double>& f) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        sum += volume[i] * f[i] * f[i];
        const auto& c = ijk[i];
        for (int ax = 0; ax < 3; ++ax) {
            std::int64_t q[3] = {c[0], c[1], c[2]};
            q[ax] += 1;
            const std::size_t nb = node_at(q[0], q[1], q[2]);
            if (nb == npos) continue;
            const double d = (f[nb] - f[i]) / spacing;
            sum += volume[i] * d * d;
        }
    }
    return std::sqrt(sum);
}

void dump_field(std::ostream& os, const SpatialGrid& grid, const std::vector<double>& field) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Vec3& y = grid.nodes[i];
        os << y[0] << ' ' << y[1] << ' ' << y[2] << ' ' << field[i] << '\n';
    }
}

}  // namespace kinetics
