#include "staktau/raytrace.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace staktau::rt {

namespace {

// Smallest positive t with |origin + t*dir - center| == radius, or nothing.
bool hit_sphere(const Sphere& s, const Vec3& origin, const Vec3& dir, double& t_out) {
    const Vec3 oc = origin - s.center;
    const double a = dir.dot(dir);
    const double half_b = oc.dot(dir);
    const double c = oc.dot(oc) - s.radius * s.radius;
    const double disc = half_b * half_b - a * c;
    if (disc < 0) return false;
    const double sqrt_d = std::sqrt(disc);
    double t = (-half_b - sqrt_d) / a;
    if (t < 1e-6) t = (-half_b + sqrt_d) / a;
    if (t < 1e-6) return false;
    t_out = t;
    return true;
}

const Sphere* closest_hit(const Scene& scene, const Vec3& origin, const Vec3& dir,
                          double& t_out) {
    const Sphere* best = nullptr;
    double best_t = std::numeric_limits<double>::infinity();
    for (const Sphere& s : scene.spheres) {
        double t = 0;
        if (hit_sphere(s, origin, dir, t) && t < best_t) {
            best_t = t;
            best = &s;
        }
    }
    t_out = best_t;
    return best;
}

bool in_shadow(const Scene& scene, const Vec3& point, const Vec3& light_dir) {
    for (const Sphere& s : scene.spheres) {
        double t = 0;
        if (hit_sphere(s, point, light_dir, t)) return true;
    }
    return false;
}

} // namespace

Vec3 trace_ray(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    double t = 0;
    const Sphere* hit = closest_hit(scene, origin, dir, t);
    if (!hit) {
        // vertical gradient sky
        const double u = 0.5 * (dir.normalized().y + 1.0);
        return scene.background_bottom * (1.0 - u) + scene.background_top * u;
    }
    const Vec3 point = origin + dir * t;
    const Vec3 normal = (point - hit->center).normalized();
    const Vec3 l = scene.light_dir;
    double diffuse = std::max(0.0, normal.dot(l));
    if (diffuse > 0 && in_shadow(scene, point + normal * 1e-4, l)) diffuse = 0;
    const double shade = scene.ambient + (1.0 - scene.ambient) * diffuse;
    return hit->albedo * shade;
}

Scene default_scene() {
    Scene scene;
    scene.spheres = {
        {{0.0, -100.5, -3.0}, 100.0, {0.55, 0.55, 0.45}},   // ground
        {{0.0, 0.0, -3.0}, 0.5, {0.8, 0.25, 0.2}},
        {{-1.1, 0.1, -3.4}, 0.6, {0.2, 0.45, 0.8}},
        {{1.2, -0.1, -2.6}, 0.4, {0.25, 0.75, 0.3}},
        {{0.3, 0.8, -4.2}, 0.7, {0.85, 0.8, 0.3}},
    };
    scene.light_dir = Vec3{0.5, 1.0, 0.3}.normalized();
    scene.ambient = 0.2;
    scene.background_top = {0.5, 0.7, 1.0};
    scene.background_bottom = {1.0, 1.0, 1.0};
    return scene;
}

void write_scene(const Scene& scene, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write scene file: " + path);
    out << "# staktau raytracer scene\n";
    out << "ambient " << scene.ambient << "\n";
    out << "light " << scene.light_dir.x << " " << scene.light_dir.y << " "
        << scene.light_dir.z << "\n";
    out << "background " << scene.background_top.x << " " << scene.background_top.y << " "
        << scene.background_top.z << " " << scene.background_bottom.x << " "
        << scene.background_bottom.y << " " << scene.background_bottom.z << "\n";
    for (const Sphere& s : scene.spheres)
        out << "sphere " << s.center.x << " " << s.center.y << " " << s.center.z << " "
            << s.radius << " " << s.albedo.x << " " << s.albedo.y << " " << s.albedo.z
            << "\n";
    if (!out.flush()) throw std::runtime_error("cannot write scene file: " + path);
}

Scene read_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file: " + path);
    Scene scene;
    scene.spheres.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        std::istringstream fields(line);
        std::string key;
        if (!(fields >> key) || key.front() == '#') continue;
        auto fail = [&] {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed scene entry '" + key + "'");
        };
        if (key == "ambient") {
            if (!(fields >> scene.ambient)) fail();
        } else if (key == "light") {
            Vec3 v;
            if (!(fields >> v.x >> v.y >> v.z)) fail();
            scene.light_dir = v.normalized();
        } else if (key == "background") {
            Vec3 top, bottom;
            if (!(fields >> top.x >> top.y >> top.z >> bottom.x >> bottom.y >> bottom.z))
                fail();
            scene.background_top = top;
            scene.background_bottom = bottom;
        } else if (key == "sphere") {
            Sphere s;
            if (!(fields >> s.center.x >> s.center.y >> s.center.z >> s.radius >>
                  s.albedo.x >> s.albedo.y >> s.albedo.z))
                fail();
            scene.spheres.push_back(s);
        } else {
            fail();
        }
    }
    return scene;
}

Image render(const Scene& scene, int width, int height, int samples, unsigned threads) {
    if (width < 1 || height < 1 || samples < 1)
        throw std::invalid_argument("render: width, height, samples must be >= 1");
    if (threads < 1) threads = 1;

    Image image;
    image.width = width;
    image.height = height;
    image.rgb.assign(static_cast<std::size_t>(width) * height * 3, 0);

    // fixed sub-pixel grid: deterministic, no RNG
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(samples))));
    std::vector<std::pair<double, double>> offsets;
    offsets.reserve(static_cast<std::size_t>(samples));
    for (int a = 0; a < grid && static_cast<int>(offsets.size()) < samples; a++)
        for (int b = 0; b < grid && static_cast<int>(offsets.size()) < samples; b++)
            offsets.emplace_back((a + 0.5) / grid, (b + 0.5) / grid);

    const double aspect = static_cast<double>(width) / height;
    const Vec3 origin{0, 0, 0};

    auto render_rows = [&](int row_begin, int row_end) {
        for (int y = row_begin; y < row_end; y++) {
            for (int x = 0; x < width; x++) {
                Vec3 color;
                for (const auto& [ox, oy] : offsets) {
                    const double u = ((x + ox) / width * 2.0 - 1.0) * aspect;
                    const double v = 1.0 - (y + oy) / height * 2.0;
                    color = color + trace_ray(scene, origin, Vec3{u, v, -1.0});
                }
                color = color * (1.0 / offsets.size());
                unsigned char* px =
                    &image.rgb[(static_cast<std::size_t>(y) * width + x) * 3];
                auto to_byte = [](double c) {
                    c = std::sqrt(std::clamp(c, 0.0, 1.0));   // gamma 2
                    return static_cast<unsigned char>(c * 255.0 + 0.5);
                };
                px[0] = to_byte(color.x);
                px[1] = to_byte(color.y);
                px[2] = to_byte(color.z);
            }
        }
    };

    // contiguous row bands; each thread touches a disjoint slice of rgb
    std::vector<std::thread> team;
    team.reserve(threads);
    const int per = height / static_cast<int>(threads);
    const int extra = height % static_cast<int>(threads);
    int row = 0;
    for (unsigned i = 0; i < threads; i++) {
        const int count = per + (static_cast<int>(i) < extra ? 1 : 0);
        if (count == 0) continue;
        team.emplace_back(render_rows, row, row + count);
        row += count;
    }
    for (std::thread& t : team) t.join();
    return image;
}

void write_ppm(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open image file for writing: " + path);
    out << "P6\n" << image.width << " " << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.rgb.data()),
              static_cast<std::streamsize>(image.rgb.size()));
    if (!out.flush()) throw std::runtime_error("cannot write image file: " + path);
}

} // namespace staktau::rt
