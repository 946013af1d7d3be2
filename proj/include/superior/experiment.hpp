#pragma once

#include "superior/engine.hpp"
#include "superior/io.hpp"
#include "superior/tomo.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace superior {

enum class Algorithm { sap, bip };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

/// Reconstruction experiment settings. Defaults reproduce the full-scale protocol:
/// 243 x 243 head phantom, 82 views, gamma_l = 0.999^l, eps = 0.01, start at the origin.
struct ExperimentConfig {
    std::string phantom = "head";  // "head", "random", or a path to a phantom spec file
    Eigen::Index size = 243;
    double pixel_size = 0.0752;
    int views = 82;
    int rays_per_view = 345;
    double detector_spacing = 0;   // 0 = pixel size
    std::vector<Algorithm> algorithms{Algorithm::sap, Algorithm::bip};
    bool plain = true;
    bool superiorize = true;
    std::string objective = "tv";  // "tv" or "none"
    double tv_smoothing = 0;
    double gamma_base = 0.999;
    double epsilon = 0.01;
    /// When positive, eps = epsilon_relative * Pr(origin) and `epsilon` is ignored.
    double epsilon_relative = 0;
    std::size_t max_iterations = 10000;
    std::size_t inner_budget = 100000;
    std::uint64_t seed = 0;         // drives the "random" phantom
    std::filesystem::path output_dir = "out";
    io::DisplayWindow window;

    /// Rejects invalid settings with a message naming the field.
    void validate() const;

    static ExperimentConfig full_scale();
    /// 63 x 63, 30 views, eps = 5% of Pr(origin).
    static ExperimentConfig desk();
};

/// Applies `key = value` lines (blank lines and '#' comments ignored) on top of `cfg`.
void apply_config_text(ExperimentConfig& cfg, const std::string& text);
void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path);
/// Applies a single setting; throws std::invalid_argument naming the key on failure.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

tomo::PhantomSpec phantom_spec(const ExperimentConfig& cfg);

struct ArmResult {
    Algorithm algorithm = Algorithm::sap;
    bool superiorized = false;
    bool defined = false;
    bool stalled = false;
    std::size_t iterations = 0;
    double proximity = 0;
    std::optional<double> objective;
    Point<double> output;        // output point, or the last iterate when undefined
    double seconds = 0;
};

struct ExperimentResult {
    io::MetricsReport report;
    std::vector<ArmResult> arms;
    double phantom_objective = 0;
    double initial_proximity = 0;
    double epsilon = 0;
    std::size_t num_rays = 0;

    bool all_defined() const;
};

/// Builds the phantom and data, runs each requested arm from the origin, and writes
/// phantom.pgm, <alg>_<plain|super>.{pgm,vec} and metrics.csv into cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::function<void(const std::string&)>& log = {});

/// Runs a single arm on prepared data.
ArmResult run_arm(const tomo::TomoData& data, Algorithm algorithm, bool superiorized,
                  const ExperimentConfig& cfg, double epsilon);

}  // namespace superior
