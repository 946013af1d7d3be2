#include "superior/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace superior::io {

void DisplayWindow::validate() const {
    if (!(low < high)) throw std::invalid_argument("display window requires low < high");
}

std::uint8_t DisplayWindow::gray(double value) const {
    if (value <= low) return 0;
    if (value >= high) return 255;
    // Ties sit on x.5 only up to rounding in (value - low) / (high - low); nudge them up.
    const double g = std::floor(255.0 * (value - low) / (high - low) + 0.5 + 1e-9);
    return static_cast<std::uint8_t>(std::clamp(g, 0.0, 255.0));
}

GrayImage window_image(const GridImage<double>& img, const DisplayWindow& window) {
    window.validate();
    GrayImage out{img.width(), img.height(), {}};
    out.pixels.reserve(static_cast<std::size_t>(img.values.size()));
    for (Eigen::Index r = 0; r < img.height(); ++r)
        for (Eigen::Index c = 0; c < img.width(); ++c) out.pixels.push_back(window.gray(img(r, c)));
    return out;
}

void write_image(const GridImage<double>& img, const DisplayWindow& window, const std::filesystem::path& path) {
    const GrayImage gray = window_image(img, window);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << gray.width << ' ' << gray.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(gray.pixels.data()), static_cast<std::streamsize>(gray.pixels.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string magic;
    int maxval = 0;
    GrayImage img;
    in >> magic >> img.width >> img.height >> maxval;
    if (magic != "P5" || maxval != 255 || img.width < 1 || img.height < 1)
        throw std::runtime_error("unsupported graymap " + path.string());
    in.get();
    img.pixels.resize(static_cast<std::size_t>(img.width * img.height));
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("truncated graymap " + path.string());
    return img;
}

void write_vector(const GridImage<double>& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(17);
    out << "superior-vector 1\n"
        << "byte_order little\n"
        << "type f64\n"
        << "width " << img.width() << "\n"
        << "height " << img.height() << "\n"
        << "pixel_size " << img.pixel_size << "\n"
        << "end\n";
    for (Eigen::Index r = 0; r < img.height(); ++r)
        for (Eigen::Index c = 0; c < img.width(); ++c) {
            double v = img(r, c);
            unsigned char bytes[8];
            std::memcpy(bytes, &v, 8);
            if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
            out.write(reinterpret_cast<const char*>(bytes), 8);
        }
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

GridImage<double> read_vector(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "superior-vector 1") throw std::runtime_error("not a vector file: " + path.string());
    Eigen::Index width = 0, height = 0;
    double pixel_size = 1.0;
    while (std::getline(in, line) && line != "end") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "width") ls >> width;
        else if (key == "height") ls >> height;
        else if (key == "pixel_size") ls >> pixel_size;
        else if (key == "byte_order") {
            std::string order;
            ls >> order;
            if (order != "little") throw std::runtime_error("unsupported byte order " + order);
        }
    }
    if (line != "end") throw std::runtime_error("malformed vector header in " + path.string());
    GridImage<double> img(width, height, pixel_size);
    for (Eigen::Index r = 0; r < height; ++r)
        for (Eigen::Index c = 0; c < width; ++c) {
            unsigned char bytes[8];
            in.read(reinterpret_cast<char*>(bytes), 8);
            if (!in) throw std::runtime_error("truncated vector payload in " + path.string());
            if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + 8);
            std::memcpy(&img(r, c), bytes, 8);
        }
    return img;
}

const MetricsRow* MetricsReport::find(const std::string& algorithm, bool superiorized) const {
    for (const auto& r : rows)
        if (r.algorithm == algorithm && r.superiorized == superiorized) return &r;
    return nullptr;
}

std::optional<double> MetricsReport::ratio(const std::string& algorithm) const {
    const auto* s = find(algorithm, true);
    const auto* p = find(algorithm, false);
    if (!s || !p || !s->objective || !p->objective || *p->objective == 0.0) return std::nullopt;
    return *s->objective / *p->objective;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

}  // namespace

std::string format_metrics(const MetricsReport& report) {
    std::string out = "algorithm,superiorized,iterations,proximity,objective\n";
    std::vector<std::string> algorithms;
    for (const auto& r : report.rows) {
        out += r.algorithm + ',' + (r.superiorized ? "true" : "false") + ',' + std::to_string(r.iterations) + ',' +
               format_double(r.proximity) + ',' + (r.objective ? format_double(*r.objective) : "undefined") + '\n';
        if (std::find(algorithms.begin(), algorithms.end(), r.algorithm) == algorithms.end())
            algorithms.push_back(r.algorithm);
    }
    for (const auto& a : algorithms)
        if (auto q = report.ratio(a)) out += "# ratio " + a + ' ' + format_double(*q) + '\n';
    return out;
}

MetricsReport parse_metrics(const std::string& text) {
    MetricsReport report;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "algorithm,superiorized,iterations,proximity,objective")
        throw std::invalid_argument("missing metrics header");
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw std::invalid_argument("metrics row needs 5 fields: " + line);
        MetricsRow row;
        row.algorithm = f[0];
        if (f[1] != "true" && f[1] != "false") throw std::invalid_argument("bad superiorized flag: " + f[1]);
        row.superiorized = f[1] == "true";
        row.iterations = static_cast<std::size_t>(std::stoull(f[2]));
        row.proximity = parse_double(f[3]);
        if (f[4] != "undefined") row.objective = parse_double(f[4]);
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_metrics(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << format_metrics(report);
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

MetricsReport read_metrics(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_metrics(ss.str());
}

}  // namespace superior::io
