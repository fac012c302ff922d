#include "datagen.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace bp {

namespace {

void norm3(double v[3]) {
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    v[0] /= n;
    v[1] /= n;
    v[2] /= n;
}

// Chord length of the ray o + t*d (d unit) through one ellipsoid.
double chord(const Ellipsoid& e, const double o[3], const double d[3]) {
    double op[3] = {(o[0] - e.cx) / e.ax, (o[1] - e.cy) / e.ay, (o[2] - e.cz) / e.az};
    double dp[3] = {d[0] / e.ax, d[1] / e.ay, d[2] / e.az};
    double a = dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2];
    double b = op[0] * dp[0] + op[1] * dp[1] + op[2] * dp[2];
    double c = op[0] * op[0] + op[1] * op[1] + op[2] * op[2] - 1.0;
    double disc = b * b - a * c;
    if (disc <= 0.0) return 0.0;
    return 2.0 * std::sqrt(disc) / a;
}

template <typename T>
void put(std::ofstream& f, const T& v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof v);
}

// tellg() is unusable after a short read has poisoned the stream, so record
// the position up front and add however many bytes did arrive.
void read_or_throw(std::ifstream& f, char* dst, std::streamsize n, const char* what,
                   const std::string& path) {
    long long pos = (long long)f.tellg();
    f.read(dst, n);
    if (!f) throw io_error("truncated " + std::string(what) + " in " + path,
                           pos + (long long)f.gcount());
}

template <typename T>
T get(std::ifstream& f, const char* what, const std::string& path) {
    T v;
    read_or_throw(f, reinterpret_cast<char*>(&v), sizeof v, what, path);
    return v;
}

void check_magic(std::ifstream& f, const char* magic, const std::string& path) {
    char m[4];
    f.read(m, 4);
    if (!f || std::memcmp(m, magic, 4) != 0)
        throw io_error("bad magic in " + path + " (expected " + magic + ")", 0);
}

}  // namespace

Phantom make_phantom(const std::string& name) {
    Phantom p;
    if (name == "spheres3") {
        p.ellipsoids = {{0, 0, 0, 80, 80, 80, 1.0},
                        {30, 0, 10, 12, 12, 12, 0.5},
                        {-30, 0, -10, 12, 12, 12, -0.5}};
    } else if (name == "shell") {
        p.ellipsoids = {{0, 0, 0, 90, 90, 90, 1.0}, {0, 0, 0, 60, 60, 60, -1.0}};
    } else if (name == "point") {
        p.ellipsoids = {{0, 0, 0, 0.5, 0.5, 0.5, 1.0}};
    } else {
        throw config_error("unknown phantom '" + name + "' (spheres3, shell, point)");
    }
    return p;
}

void forward_project(const Phantom& ph, const ProjectionMatrix& A, int isx, int isy, float* out) {
    auto C = camera_center(A);
    auto inv = invert_left3x3(A);

    for (int iv = 0; iv < isy; ++iv) {
        for (int iu = 0; iu < isx; ++iu) {
            // Ray direction for detector coordinate (iu, iv): M^-1 * (u, v, 1).
            double d[3] = {inv[0] * iu + inv[1] * iv + inv[2],
                           inv[3] * iu + inv[4] * iv + inv[5],
                           inv[6] * iu + inv[7] * iv + inv[8]};
            norm3(d);
            double sum = 0.0;
            for (const auto& e : ph.ellipsoids) sum += e.density * chord(e, C.data(), d);
            out[(size_t)iv * isx + iu] = static_cast<float>(sum);
        }
    }
}

ProjectionStack make_stack(const Phantom& ph, const std::vector<ProjectionMatrix>& mats,
                           int isx, int isy) {
    ProjectionStack s;
    s.isx = isx;
    s.isy = isy;
    s.matrices = mats;
    s.pixels.resize((size_t)mats.size() * isy * isx);
    for (size_t k = 0; k < mats.size(); ++k)
        forward_project(ph, mats[k], isx, isy, s.pixels.data() + k * isy * isx);
    return s;
}

double ray_march_integral(const Phantom& ph, const double origin[3], const double dir[3],
                          double t0, double t1, double step) {
    double d[3] = {dir[0], dir[1], dir[2]};
    norm3(d);
    double sum = 0.0;
    for (double t = t0 + 0.5 * step; t < t1; t += step) {
        double p[3] = {origin[0] + t * d[0], origin[1] + t * d[1], origin[2] + t * d[2]};
        for (const auto& e : ph.ellipsoids) {
            double q = (p[0] - e.cx) / e.ax, r = (p[1] - e.cy) / e.ay, s = (p[2] - e.cz) / e.az;
            if (q * q + r * r + s * s <= 1.0) sum += e.density * step;
        }
    }
    return sum;
}

void write_stack(const std::string& path, const ProjectionStack& s) {
    if ((size_t)s.count() * s.isy * s.isx != s.pixels.size())
        throw validation_error("stack dimensions inconsistent with pixel payload");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path + " for writing");
    f.write("BPST", 4);
    put(f, (uint32_t)s.isx);
    put(f, (uint32_t)s.isy);
    put(f, (uint32_t)s.count());
    for (const auto& m : s.matrices) f.write(reinterpret_cast<const char*>(m.a.data()), 12 * sizeof(double));
    f.write(reinterpret_cast<const char*>(s.pixels.data()), (std::streamsize)(s.pixels.size() * sizeof(float)));
    if (!f) throw io_error("write failed for " + path);
}

ProjectionStack read_stack(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    check_magic(f, "BPST", path);
    uint32_t isx = get<uint32_t>(f, "ISX", path), isy = get<uint32_t>(f, "ISY", path),
             count = get<uint32_t>(f, "count", path);
    if (isx < 2 || isy < 2 || count < 1 || (uint64_t)isx * isy * count > (uint64_t)1 << 33)
        throw io_error("implausible stack dimensions in " + path, 4);

    ProjectionStack s;
    s.isx = (int)isx;
    s.isy = (int)isy;
    s.matrices.resize(count);
    for (auto& m : s.matrices)
        read_or_throw(f, reinterpret_cast<char*>(m.a.data()), 12 * sizeof(double),
                      "matrix block", path);
    s.pixels.resize((size_t)count * isy * isx);
    read_or_throw(f, reinterpret_cast<char*>(s.pixels.data()),
                  (std::streamsize)(s.pixels.size() * sizeof(float)), "pixel payload", path);
    return s;
}

void write_volume(const std::string& path, const Volume& v) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path + " for writing");
    f.write("BPVL", 4);
    put(f, (uint32_t)v.grid.L);
    f.write(reinterpret_cast<const char*>(v.vox.data()), (std::streamsize)(v.vox.size() * sizeof(float)));
    if (!f) throw io_error("write failed for " + path);
}

Volume read_volume(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    check_magic(f, "BPVL", path);
    uint32_t L = get<uint32_t>(f, "L", path);
    if (L < 1 || L > 4096) throw io_error("implausible volume edge in " + path, 4);
    Volume v(VoxelGrid::cube((int)L));
    read_or_throw(f, reinterpret_cast<char*>(v.vox.data()),
                  (std::streamsize)(v.vox.size() * sizeof(float)), "voxel payload", path);
    return v;
}

}  // namespace bp
