#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace staktau::rt {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator*(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double length() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double len = length();
        return len > 0 ? Vec3{x / len, y / len, z / len} : Vec3{};
    }
};

struct Sphere {
    Vec3 center;
    double radius = 1.0;
    Vec3 albedo{0.5, 0.5, 0.5};
};

// A handful of Lambertian spheres, one directional light, gradient sky.
struct Scene {
    std::vector<Sphere> spheres;
    Vec3 light_dir{0.5, 1.0, 0.3};   // toward the light; normalized on load
    double ambient = 0.2;
    Vec3 background_top{0.5, 0.7, 1.0};
    Vec3 background_bottom{1.0, 1.0, 1.0};
};

// The fixed scene every benchmark run renders.
Scene default_scene();

// Scene I/O: one "key value..." line per entry, '#' comments allowed.
void write_scene(const Scene& scene, const std::string& path);
Scene read_scene(const std::string& path);

struct Image {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> rgb;   // row-major, 3 bytes per pixel
};

// Color seen along one camera ray; exposed so tests can check single pixels
// against the closed-form sphere intersection.
Vec3 trace_ray(const Scene& scene, const Vec3& origin, const Vec3& dir);

// Renders width x height with `samples` stratified samples per pixel, rows
// split across `threads`.  Sampling uses a fixed sub-pixel grid, so the
// output is byte-identical for any thread count.
Image render(const Scene& scene, int width, int height, int samples, unsigned threads);

// Binary portable pixmap (P6).  Throws std::runtime_error on write failure.
void write_ppm(const Image& image, const std::string& path);

} // namespace staktau::rt
