#pragma once

#include "superior/objectives.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace superior::io {

/// Gray-level window: values <= low map to 0, values >= high map to 255.
struct DisplayWindow {
    double low = 0.204;
    double high = 0.21675;

    void validate() const;
    /// Linear map rounded half-up.
    std::uint8_t gray(double value) const;
};

struct GrayImage {
    Eigen::Index width = 0;
    Eigen::Index height = 0;
    std::vector<std::uint8_t> pixels;  // row-major
};

GrayImage window_image(const GridImage<double>& img, const DisplayWindow& window);

/// Binary portable graymap ("P5", maxval 255).
void write_image(const GridImage<double>& img, const DisplayWindow& window, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

/// Raw image vector: text header terminated by "end\n", then width*height little-endian f64.
void write_vector(const GridImage<double>& img, const std::filesystem::path& path);
GridImage<double> read_vector(const std::filesystem::path& path);

struct MetricsRow {
    std::string algorithm;
    bool superiorized = false;
    std::size_t iterations = 0;
    double proximity = 0;
    /// Objective at the output; empty when the output is undefined.
    std::optional<double> objective;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;

    const MetricsRow* find(const std::string& algorithm, bool superiorized) const;
    /// phi(superiorized) / phi(plain) for an algorithm with both arms defined.
    std::optional<double> ratio(const std::string& algorithm) const;
};

/// CSV with header "algorithm,superiorized,iterations,proximity,objective"; undefined
/// objectives are written as "undefined"; paired ratios follow as "# ratio <alg> <value>" lines.
std::string format_metrics(const MetricsReport& report);
MetricsReport parse_metrics(const std::string& text);
void write_metrics(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport read_metrics(const std::filesystem::path& path);

}  // namespace superior::io
