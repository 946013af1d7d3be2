#include "superior/tomo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace superior::tomo {

bool Ellipse::contains(double x, double y) const {
    const double dx = x - center_x;
    const double dy = y - center_y;
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    const double u = (dx * c + dy * s) / semi_x;
    const double v = (-dx * s + dy * c) / semi_y;
    return u * u + v * v <= 1.0;
}

void PhantomSpec::validate() const {
    if (size < 1) throw std::invalid_argument("phantom size must be >= 1");
    if (!(pixel_size > 0)) throw std::invalid_argument("phantom pixel_size must be positive");
    for (const auto& e : ellipses) {
        if (!(e.semi_x > 0 && e.semi_y > 0)) throw std::invalid_argument("ellipse semi-axes must be positive");
        if (!std::isfinite(e.center_x) || !std::isfinite(e.center_y) || !std::isfinite(e.rotation) ||
            !std::isfinite(e.value))
            throw std::invalid_argument("ellipse parameters must be finite");
    }
}

PhantomSpec head_phantom_spec(Eigen::Index size, double pixel_size) {
    // Normalized to the half-width of the field of view.
    struct Unit {
        double cx, cy, ax, ay, deg, value;
    };
    static constexpr Unit kHead[] = {
        {0.0, 0.0, 0.69, 0.92, 0.0, 0.5639},          // skull
        {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.3559},  // brain, net 0.208
        {0.22, 0.0, 0.11, 0.31, -18.0, -0.004},       // ventricles
        {-0.22, 0.0, 0.16, 0.41, 18.0, -0.004},
        {0.0, 0.35, 0.21, 0.25, 0.0, 0.004},
        {0.0, 0.1, 0.046, 0.046, 0.0, 0.008},
        {0.0, -0.1, 0.046, 0.046, 0.0, 0.008},
        {-0.08, -0.605, 0.046, 0.023, 0.0, 0.006},
        {0.0, -0.606, 0.023, 0.023, 0.0, 0.006},
        {0.06, -0.605, 0.023, 0.046, 0.0, 0.006},
    };
    PhantomSpec spec;
    spec.size = size;
    spec.pixel_size = pixel_size;
    const double half = 0.5 * static_cast<double>(size) * pixel_size;
    for (const auto& u : kHead)
        spec.ellipses.push_back(
            {u.cx * half, u.cy * half, u.ax * half, u.ay * half, u.deg * std::numbers::pi / 180.0, u.value});
    return spec;
}

PhantomSpec random_phantom_spec(Eigen::Index size, double pixel_size, std::uint64_t seed, int num_ellipses) {
    PhantomSpec spec;
    spec.size = size;
    spec.pixel_size = pixel_size;
    const double half = 0.5 * static_cast<double>(size) * pixel_size;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-0.5, 0.5), axis(0.05, 0.4), angle(0.0, std::numbers::pi),
        value(0.01, 0.1);
    for (int e = 0; e < num_ellipses; ++e) {
        Ellipse el;
        el.center_x = pos(rng) * half;
        el.center_y = pos(rng) * half;
        el.semi_x = axis(rng) * half;
        el.semi_y = axis(rng) * half;
        el.rotation = angle(rng);
        el.value = value(rng);
        spec.ellipses.push_back(el);
    }
    return spec;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

PhantomSpec parse_phantom_spec(const std::string& text) {
    PhantomSpec spec;
    spec.ellipses.clear();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("phantom spec line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::istringstream value(line.substr(eq + 1));
        bool ok = false;
        if (key == "size") {
            ok = static_cast<bool>(value >> spec.size);
        } else if (key == "pixel_size") {
            ok = static_cast<bool>(value >> spec.pixel_size);
        } else if (key == "ellipse") {
            Ellipse e;
            ok = static_cast<bool>(value >> e.center_x >> e.center_y >> e.semi_x >> e.semi_y >> e.rotation >> e.value);
            if (ok) spec.ellipses.push_back(e);
        } else {
            throw std::invalid_argument("phantom spec line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        std::string rest;
        if (!ok || (value >> rest))
            throw std::invalid_argument("phantom spec line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
    spec.validate();
    return spec;
}

PhantomSpec load_phantom_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read phantom spec " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_phantom_spec(ss.str());
}

std::string format_phantom_spec(const PhantomSpec& spec) {
    std::ostringstream out;
    out.precision(17);
    out << "size = " << spec.size << "\n";
    out << "pixel_size = " << spec.pixel_size << "\n";
    for (const auto& e : spec.ellipses)
        out << "ellipse = " << e.center_x << ' ' << e.center_y << ' ' << e.semi_x << ' ' << e.semi_y << ' '
            << e.rotation << ' ' << e.value << "\n";
    return out.str();
}

Image make_phantom(const PhantomSpec& spec) {
    spec.validate();
    Image img(spec.size, spec.size, spec.pixel_size);
    const double w = spec.pixel_size;
    const double origin = 0.5 * static_cast<double>(spec.size - 1);
    for (Eigen::Index r = 0; r < spec.size; ++r) {
        const double y = (origin - static_cast<double>(r)) * w;
        for (Eigen::Index c = 0; c < spec.size; ++c) {
            const double x = (static_cast<double>(c) - origin) * w;
            double v = 0;
            for (const auto& e : spec.ellipses)
                if (e.contains(x, y)) v += e.value;
            img(r, c) = v;
        }
    }
    return img;
}

double SparseRow::total_length() const {
    double s = 0;
    for (double l : lengths) s += l;
    return s;
}

SparseRow trace_ray(const RayLine& line, const GridGeometry& grid) {
    if (!std::isfinite(line.angle) || !std::isfinite(line.offset))
        throw std::invalid_argument("ray parameters must be finite");
    const double w = grid.pixel_size;
    const double xmin = -0.5 * static_cast<double>(grid.width) * w;
    const double xmax = -xmin;
    const double ymax = 0.5 * static_cast<double>(grid.height) * w;
    const double ymin = -ymax;

    const double nx = std::cos(line.angle), ny = std::sin(line.angle);
    const double px = line.offset * nx, py = line.offset * ny;  // foot of the line
    const double dx = -ny, dy = nx;                              // unit direction

    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    auto clip = [&](double p, double d, double lo, double hi) {
        if (d == 0.0) return p >= lo && p <= hi;
        double a = (lo - p) / d, b = (hi - p) / d;
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        return true;
    };
    SparseRow row;
    if (!clip(px, dx, xmin, xmax) || !clip(py, dy, ymin, ymax) || !(t1 > t0)) return row;

    std::vector<double> ts{t0, t1};
    if (dx != 0.0)
        for (Eigen::Index k = 1; k < grid.width; ++k) {
            const double t = (xmin + static_cast<double>(k) * w - px) / dx;
            if (t > t0 && t < t1) ts.push_back(t);
        }
    if (dy != 0.0)
        for (Eigen::Index k = 1; k < grid.height; ++k) {
            const double t = (ymin + static_cast<double>(k) * w - py) / dy;
            if (t > t0 && t < t1) ts.push_back(t);
        }
    std::sort(ts.begin(), ts.end());

    std::vector<std::pair<Eigen::Index, double>> hits;
    hits.reserve(ts.size());
    const double min_len = 1e-12 * w;
    for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
        const double len = ts[s + 1] - ts[s];
        if (!(len > min_len)) continue;
        const double tm = 0.5 * (ts[s] + ts[s + 1]);
        const double xm = px + tm * dx, ym = py + tm * dy;
        auto col = static_cast<Eigen::Index>(std::floor((xm - xmin) / w));
        auto r = static_cast<Eigen::Index>(std::floor((ymax - ym) / w));
        col = std::clamp<Eigen::Index>(col, 0, grid.width - 1);
        r = std::clamp<Eigen::Index>(r, 0, grid.height - 1);
        hits.emplace_back(r * grid.width + col, len);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [idx, len] : hits) {
        if (!row.indices.empty() && row.indices.back() == idx) {
            row.lengths.back() += len;
        } else {
            row.indices.push_back(idx);
            row.lengths.push_back(len);
        }
    }
    return row;
}

void ScanGeometry::validate() const {
    if (num_views < 1) throw std::invalid_argument("num_views must be >= 1");
    if (rays_per_view < 1) throw std::invalid_argument("rays_per_view must be >= 1");
    if (detector_spacing < 0 || !std::isfinite(detector_spacing))
        throw std::invalid_argument("detector_spacing must be nonnegative");
}

double ScanGeometry::spacing(const GridGeometry& grid) const {
    return detector_spacing > 0 ? detector_spacing : grid.pixel_size;
}

RayLine ScanGeometry::ray(int view, int detector, const GridGeometry& grid) const {
    const double angle = std::numbers::pi * static_cast<double>(view) / static_cast<double>(num_views);
    const double offset = (static_cast<double>(detector) - 0.5 * static_cast<double>(rays_per_view - 1)) * spacing(grid);
    return {angle, offset};
}

namespace {

FeasibilityProblem<double> build_problem(const Image& img, const ScanGeometry& scan, const GridGeometry& grid,
                                         std::vector<RayInfo>& rays, std::vector<IndexVector>& blocks) {
    const Point<double> x = vectorize(img);
    std::vector<ConvexSet<double>> sets;
    for (int v = 0; v < scan.num_views; ++v) {
        IndexVector block;
        for (int d = 0; d < scan.rays_per_view; ++d) {
            const SparseRow row = trace_ray(scan.ray(v, d, grid), grid);
            if (row.empty()) continue;
            SparseNormal<double> a(x.size());
            a.reserve(static_cast<Eigen::Index>(row.indices.size()));
            for (std::size_t n = 0; n < row.indices.size(); ++n) a.insertBack(row.indices[n]) = row.lengths[n];
            const double b = detail::sparse_dot(a, x);
            block.push_back(sets.size());
            sets.emplace_back(Hyperplane<double>(std::move(a), b));
            rays.push_back({v, d, b});
        }
        if (!block.empty()) blocks.push_back(std::move(block));
    }
    if (sets.empty()) throw std::invalid_argument("scan geometry produced no rays through the grid");
    return FeasibilityProblem<double>(std::move(sets));
}

template <typename T>
void put_le(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    if (!in) throw std::runtime_error("truncated binary payload");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace

TomoData generate_data(const Image& img, const ScanGeometry& scan) {
    scan.validate();
    if (img.width() != img.height()) throw std::invalid_argument("tomography expects a square image");
    GridGeometry grid{img.width(), img.height(), img.pixel_size};
    std::vector<RayInfo> rays;
    std::vector<IndexVector> blocks;
    auto problem = build_problem(img, scan, grid, rays, blocks);
    return TomoData{grid, scan, std::move(rays), std::move(problem), std::move(blocks)};
}

void write_sinogram(const TomoData& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "superior-sinogram 1\n"
        << "byte_order little\n"
        << "fields view:u32 detector:u32 value:f64\n"
        << "views " << data.scan.num_views << "\n"
        << "detectors " << data.scan.rays_per_view << "\n"
        << "count " << data.rays.size() << "\n"
        << "end\n";
    for (const auto& r : data.rays) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.view));
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.detector));
        put_le<double>(out, r.value);
    }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::vector<RayInfo> read_sinogram(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "superior-sinogram 1") throw std::runtime_error("not a sinogram file: " + path.string());
    std::size_t count = 0;
    bool have_count = false;
    while (std::getline(in, line) && line != "end") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "count") have_count = static_cast<bool>(ls >> count);
        if (key == "byte_order") {
            std::string order;
            ls >> order;
            if (order != "little") throw std::runtime_error("unsupported byte order " + order);
        }
    }
    if (line != "end" || !have_count) throw std::runtime_error("malformed sinogram header in " + path.string());
    std::vector<RayInfo> rays(count);
    for (auto& r : rays) {
        r.view = static_cast<int>(get_le<std::uint32_t>(in));
        r.detector = static_cast<int>(get_le<std::uint32_t>(in));
        r.value = get_le<double>(in);
    }
    return rays;
}

}  // namespace superior::tomo
