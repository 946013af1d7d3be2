#pragma once

#include "superior/feasibility.hpp"
#include "superior/objectives.hpp"
#include "superior/operators.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace superior::tomo {

using Image = GridImage<double>;

/// Ellipse with additive value. Coordinates are in cm, with the origin at the grid centre,
/// x to the right and y upwards. Rotation is counter-clockwise in radians.
struct Ellipse {
    double center_x = 0;
    double center_y = 0;
    double semi_x = 1;
    double semi_y = 1;
    double rotation = 0;
    double value = 0;

    bool contains(double x, double y) const;
};

struct PhantomSpec {
    Eigen::Index size = 243;
    double pixel_size = 0.0752;
    std::vector<Ellipse> ellipses;

    void validate() const;
};

/// Surrogate head cross-section: skull, brain, ventricles and small lesions, scaled to the
/// grid's field of view. Pixel values lie in [0, 0.5639].
PhantomSpec head_phantom_spec(Eigen::Index size = 243, double pixel_size = 0.0752);

/// Random ellipse phantom drawn from `seed`.
PhantomSpec random_phantom_spec(Eigen::Index size, double pixel_size, std::uint64_t seed, int num_ellipses = 8);

/// Key-value text format:
///   size = 243
///   pixel_size = 0.0752
///   ellipse = cx cy semi_x semi_y rotation value     (one line per ellipse)
/// Blank lines and lines starting with '#' are ignored.
PhantomSpec parse_phantom_spec(const std::string& text);
PhantomSpec load_phantom_spec(const std::filesystem::path& path);
std::string format_phantom_spec(const PhantomSpec& spec);

/// Pixel value = sum of the values of all ellipses containing the pixel centre.
Image make_phantom(const PhantomSpec& spec);

struct GridGeometry {
    Eigen::Index width = 243;
    Eigen::Index height = 243;
    double pixel_size = 0.0752;
};

/// The line {p : p . (cos angle, sin angle) = offset}.
struct RayLine {
    double angle = 0;
    double offset = 0;
};

/// Pixel indices (row-major, strictly increasing) and intersection lengths in cm.
struct SparseRow {
    std::vector<Eigen::Index> indices;
    std::vector<double> lengths;

    bool empty() const { return indices.empty(); }
    double total_length() const;
};

/// Exact intersection lengths of a line with every pixel it crosses.
SparseRow trace_ray(const RayLine& line, const GridGeometry& grid);

/// Parallel-beam geometry: num_views angles equally spaced over [0, pi), each with
/// rays_per_view parallel lines centred on the grid. The defaults (345 rays at pixel spacing)
/// cover the grid's circumscribed circle; rays missing the grid are dropped, leaving about
/// 310 rays per view on a 243 x 243 grid.
struct ScanGeometry {
    int num_views = 82;
    int rays_per_view = 345;
    /// Detector spacing in cm; zero selects the pixel size.
    double detector_spacing = 0;

    void validate() const;
    double spacing(const GridGeometry& grid) const;
    RayLine ray(int view, int detector, const GridGeometry& grid) const;
};

struct RayInfo {
    int view = 0;
    int detector = 0;
    double value = 0;
};

/// A tomographic feasibility problem: one hyperplane per ray with nonempty support.
struct TomoData {
    GridGeometry grid;
    ScanGeometry scan;
    std::vector<RayInfo> rays;      // parallel to the problem's sets
    FeasibilityProblem<double> problem;
    std::vector<IndexVector> view_blocks;  // set indices of each view, in detector order

    /// Blocks, one per view with at least one ray.
    BlockScheme block_scheme() const { return BlockScheme(view_blocks); }
    Amalgamator art_amalgamator() const { return Amalgamator::sequential(problem.size()); }
};

/// Line integrals b_i = sum_j a_ij x_j of the digitized image; rays missing the grid are dropped.
TomoData generate_data(const Image& img, const ScanGeometry& scan);

/// Flat binary sinogram: a text header terminated by "end\n", then `count` little-endian
/// records of (u32 view, u32 detector, f64 value).
void write_sinogram(const TomoData& data, const std::filesystem::path& path);
std::vector<RayInfo> read_sinogram(const std::filesystem::path& path);

}  // namespace superior::tomo
