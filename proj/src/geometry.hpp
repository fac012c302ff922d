#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace bp {

// Cubic voxel lattice over the fixed 256^3 mm^3 volume, centered on the
// isocenter. MM is the voxel pitch, offset_* the world position of the
// center of voxel (0,0,0).
struct VoxelGrid {
    int L = 0;
    double MM = 0.0;
    double offset_x = 0.0, offset_y = 0.0, offset_z = 0.0;

    static VoxelGrid cube(int edge_voxels);

    double world_x(int x) const { return offset_x + x * MM; }
    double world_y(int y) const { return offset_y + y * MM; }
    double world_z(int z) const { return offset_z + z * MM; }
};

// 3x4 homogeneous projection matrix, world (mm) -> detector pixels.
// Column-interleaved coefficient order: the u row is (a[0],a[3],a[6],a[9]),
// the v row (a[1],a[4],a[7],a[10]), the w row (a[2],a[5],a[8],a[11]).
struct ProjectionMatrix {
    std::array<double, 12> a{};

    double uw(double wx, double wy, double wz) const { return a[0] * wx + a[3] * wy + a[6] * wz + a[9]; }
    double vw(double wx, double wy, double wz) const { return a[1] * wx + a[4] * wy + a[7] * wz + a[10]; }
    double w(double wx, double wy, double wz) const { return a[2] * wx + a[5] * wy + a[8] * wz + a[11]; }

    // Single-precision copy for the kernel path.
    std::array<float, 12> narrowed() const;
};

enum class RecipMode { exact, approx12, approx12_nr };

struct PixelCoord {
    float u = 0, v = 0;
    float w = 0;
    int iu = 0, iv = 0;
    float scalx = 0, scaly = 0;
};

// Continuous + integer detector coordinates of a world point, computed in
// the kernel's single-precision arithmetic (one reciprocal, floor rounding).
// Throws validation_error when the point maps to w <= 0.
PixelCoord project(const ProjectionMatrix& A, double px, double py, double pz,
                   RecipMode mode = RecipMode::exact);

// Null point of A: the world position C with A*(C,1) = 0, i.e. the X-ray
// source. Throws validation_error for a singular left 3x3 block.
std::array<double, 3> camera_center(const ProjectionMatrix& A);

// Inverse of the left 3x3 block, row-major. Throws for singular matrices.
std::array<double, 9> invert_left3x3(const ProjectionMatrix& A);

// Synthetic circular trajectory in the z=0 plane. View k sits at angle
// 2*pi*k/n_views; the detector is perpendicular to the source-isocenter ray
// at distance sdd from the source, principal point at the detector center.
std::vector<ProjectionMatrix> make_circular_trajectory(int n_views, double sid, double sdd,
                                                       int nu, int nv, double pitch);

// Checks w > 0 at every voxel center of the grid; throws validation_error
// listing the first offending voxel otherwise.
void validate_matrix_for_grid(const ProjectionMatrix& A, const VoxelGrid& grid);

}  // namespace bp
