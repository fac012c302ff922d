#pragma once

#include <string>
#include <vector>

#include "geometry.hpp"
#include "kernel.hpp"

namespace bp {

// Analytic test object: a sum of constant-density ellipsoids.
struct Ellipsoid {
    double cx, cy, cz;  // center (mm)
    double ax, ay, az;  // semi-axes (mm)
    double density;     // attenuation per mm, may be negative for nesting
};

struct Phantom {
    std::vector<Ellipsoid> ellipsoids;
};

// Named phantoms used by the test and acceptance suites:
//   spheres3 - 80 mm sphere (d=1) with two 12 mm inner spheres (d=+-0.5)
//   shell    - outer sphere minus inner sphere, zero inside the cavity
//   point    - 0.5 mm ellipsoid at the origin
Phantom make_phantom(const std::string& name);

struct ProjectionStack {
    int isx = 0, isy = 0;
    std::vector<ProjectionMatrix> matrices;
    std::vector<float> pixels;  // count * isy * isx, v-major within an image

    int count() const { return (int)matrices.size(); }
    const float* image(int k) const { return pixels.data() + (size_t)k * isy * isx; }
    float* image(int k) { return pixels.data() + (size_t)k * isy * isx; }
};

// Exact line integral of the summed ellipsoid densities along the ray from
// the camera center through the world point projecting to pixel (iu, iv).
void forward_project(const Phantom& ph, const ProjectionMatrix& A, int isx, int isy, float* out);

// Full synthetic stack for one trajectory.
ProjectionStack make_stack(const Phantom& ph, const std::vector<ProjectionMatrix>& mats,
                           int isx, int isy);

// Line integral by brute-force ray marching, test oracle for forward_project.
double ray_march_integral(const Phantom& ph, const double origin[3], const double dir[3],
                          double t0, double t1, double step);

// Binary file formats (little-endian, bit-exact round trips):
//   stack  "BPST": u32 ISX, ISY, count; count*12 f64 matrix coefficients;
//                  count*ISY*ISX f32 pixels
//   volume "BPVL": u32 L; L^3 f32, x fastest
void write_stack(const std::string& path, const ProjectionStack& s);
ProjectionStack read_stack(const std::string& path);
void write_volume(const std::string& path, const Volume& v);
Volume read_volume(const std::string& path);

}  // namespace bp
