#include "geometry.hpp"

#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "recip.hpp"

namespace bp {

VoxelGrid VoxelGrid::cube(int edge_voxels) {
    if (edge_voxels < 1) throw config_error("grid edge must be >= 1 voxel");
    VoxelGrid g;
    g.L = edge_voxels;
    g.MM = 256.0 / edge_voxels;
    double off = -0.5 * (edge_voxels - 1) * g.MM;
    g.offset_x = g.offset_y = g.offset_z = off;
    return g;
}

std::array<float, 12> ProjectionMatrix::narrowed() const {
    std::array<float, 12> f;
    for (int i = 0; i < 12; ++i) f[i] = static_cast<float>(a[i]);
    return f;
}

PixelCoord project(const ProjectionMatrix& A, double px, double py, double pz, RecipMode mode) {
    auto f = A.narrowed();
    float wx = static_cast<float>(px), wy = static_cast<float>(py), wz = static_cast<float>(pz);
    float uw = f[0] * wx + f[3] * wy + f[6] * wz + f[9];
    float vw = f[1] * wx + f[4] * wy + f[7] * wz + f[10];
    float w = f[2] * wx + f[5] * wy + f[8] * wz + f[11];
    if (!(w > 0.0f)) throw validation_error("point behind/at source plane (w <= 0)");

    float r;
    switch (mode) {
        case RecipMode::approx12: r = recip_approx12(w); break;
        case RecipMode::approx12_nr: r = recip_approx12_nr(w); break;
        default: r = recip_exact(w); break;
    }

    PixelCoord pc;
    pc.u = uw * r;
    pc.v = vw * r;
    pc.w = w;
    pc.iu = static_cast<int>(std::floor(pc.u));
    pc.iv = static_cast<int>(std::floor(pc.v));
    pc.scalx = pc.u - static_cast<float>(pc.iu);
    pc.scaly = pc.v - static_cast<float>(pc.iv);
    return pc;
}

std::array<double, 9> invert_left3x3(const ProjectionMatrix& A) {
    const auto& a = A.a;
    double m[3][3] = {{a[0], a[3], a[6]}, {a[1], a[4], a[7]}, {a[2], a[5], a[8]}};

    double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                 m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                 m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    double scale = 0.0;
    for (auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (std::abs(det) <= 1e-14 * scale * scale * scale)
        throw validation_error("degenerate projection matrix");

    return {(m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det,
            (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det,
            (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det};
}

std::array<double, 3> camera_center(const ProjectionMatrix& A) {
    // C = -M^-1 * p4
    auto inv = invert_left3x3(A);
    double p4[3] = {A.a[9], A.a[10], A.a[11]};
    return {-(inv[0] * p4[0] + inv[1] * p4[1] + inv[2] * p4[2]),
            -(inv[3] * p4[0] + inv[4] * p4[1] + inv[5] * p4[2]),
            -(inv[6] * p4[0] + inv[7] * p4[1] + inv[8] * p4[2])};
}

std::vector<ProjectionMatrix> make_circular_trajectory(int n_views, double sid, double sdd,
                                                       int nu, int nv, double pitch) {
    if (n_views < 1) throw config_error("need at least one view");
    if (!(sid > 0.0 && sid < sdd)) throw config_error("require 0 < sid < sdd");
    if (nu < 2 || nv < 2) throw config_error("detector must be at least 2x2 pixels");
    if (!(pitch > 0.0)) throw config_error("pixel pitch must be positive");

    std::vector<ProjectionMatrix> mats;
    mats.reserve(n_views);
    double cu = 0.5 * (nu - 1), cv = 0.5 * (nv - 1);
    double fpx = sdd / pitch;  // focal length in pixels

    for (int k = 0; k < n_views; ++k) {
        double th = 2.0 * M_PI * k / n_views;
        double c = std::cos(th), s = std::sin(th);
        // Source on the circle, optical axis toward the isocenter.
        double S[3] = {sid * c, sid * s, 0.0};
        double ez[3] = {-c, -s, 0.0};   // depth
        double eu[3] = {-s, c, 0.0};    // detector u
        double ev[3] = {0.0, 0.0, 1.0};  // detector v, along the rotation axis

        ProjectionMatrix A;
        double rows[3][3];
        for (int i = 0; i < 3; ++i) {
            rows[0][i] = fpx * eu[i] + cu * ez[i];
            rows[1][i] = fpx * ev[i] + cv * ez[i];
            rows[2][i] = ez[i];
        }
        double t[3];
        for (int r = 0; r < 3; ++r) t[r] = -(rows[r][0] * S[0] + rows[r][1] * S[1] + rows[r][2] * S[2]);

        for (int i = 0; i < 3; ++i) {
            A.a[0 + 3 * i] = rows[0][i];
            A.a[1 + 3 * i] = rows[1][i];
            A.a[2 + 3 * i] = rows[2][i];
        }
        A.a[9] = t[0];
        A.a[10] = t[1];
        A.a[11] = t[2];
        mats.push_back(A);
    }
    return mats;
}

void validate_matrix_for_grid(const ProjectionMatrix& A, const VoxelGrid& grid) {
    // w is affine in (wx,wy,wz): checking the 8 grid corners bounds all voxels.
    double lo[3] = {grid.offset_x, grid.offset_y, grid.offset_z};
    double hi[3] = {grid.world_x(grid.L - 1), grid.world_y(grid.L - 1), grid.world_z(grid.L - 1)};
    for (int i = 0; i < 8; ++i) {
        double wx = (i & 1) ? hi[0] : lo[0];
        double wy = (i & 2) ? hi[1] : lo[1];
        double wz = (i & 4) ? hi[2] : lo[2];
        if (!(A.w(wx, wy, wz) > 0.0)) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "matrix has w <= 0 at grid corner (%g, %g, %g) mm", wx, wy, wz);
            throw validation_error(buf);
        }
    }
}

}  // namespace bp
