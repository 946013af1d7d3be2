// Command-line front end: phantom generation, data simulation, and plain versus
// superiorized reconstruction runs.

#include "superior/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitUndefined = 2;

// Flags are stored as optionals and layered over preset -> config file -> flags.
struct Overrides {
    bool desk = false;
    bool full_scale = false;
    std::string config_file;
    std::optional<std::string> phantom;
    std::optional<long> size;
    std::optional<double> pixel_size;
    std::optional<int> views;
    std::optional<int> rays;
    std::optional<double> spacing;
    std::optional<std::string> algorithm;
    std::optional<std::string> objective;
    std::optional<double> smoothing;
    std::optional<double> gamma;
    std::optional<double> epsilon;
    std::optional<double> epsilon_relative;
    std::optional<std::size_t> max_iterations;
    std::optional<std::size_t> inner_budget;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    std::optional<double> window_low;
    std::optional<double> window_high;
};

void add_geometry_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_flag("--desk", o.desk, "63x63 phantom, 30 views, eps = 5% of Pr(origin)");
    cmd->add_flag("--full-scale", o.full_scale, "243x243 phantom, 82 views, eps = 0.01 (default)");
    cmd->add_option("--config", o.config_file, "key = value settings file");
    cmd->add_option("--phantom", o.phantom, "head, random, or a phantom spec file");
    cmd->add_option("--size", o.size, "grid size in pixels");
    cmd->add_option("--pixel-size", o.pixel_size, "pixel side in cm");
    cmd->add_option("--views", o.views, "number of projection directions");
    cmd->add_option("--rays", o.rays, "rays per view");
    cmd->add_option("--detector-spacing", o.spacing, "ray spacing in cm (0 = pixel size)");
    cmd->add_option("--seed", o.seed, "seed for the random phantom");
    cmd->add_option("--window-low", o.window_low, "values at or below map to black");
    cmd->add_option("--window-high", o.window_high, "values at or above map to white");
}

void add_run_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--objective", o.objective, "tv or none");
    cmd->add_option("--tv-smoothing", o.smoothing, "smoothing for the differentiable TV variant (0 = exact)");
    cmd->add_option("--gamma", o.gamma, "geometric step base a, gamma_l = a^l");
    cmd->add_option("--epsilon", o.epsilon, "stopping tolerance on the proximity");
    cmd->add_option("--epsilon-relative", o.epsilon_relative, "stopping tolerance as a fraction of Pr(origin)");
    cmd->add_option("--max-iterations", o.max_iterations, "outer iteration budget");
    cmd->add_option("--inner-budget", o.inner_budget, "step-size trials per outer iteration");
    cmd->add_option("--out", o.output_dir, "output directory");
}

superior::ExperimentConfig resolve(const Overrides& o) {
    using superior::apply_setting;
    superior::ExperimentConfig cfg =
        o.desk ? superior::ExperimentConfig::desk() : superior::ExperimentConfig::full_scale();
    if (!o.config_file.empty()) superior::apply_config_file(cfg, o.config_file);
    auto num = [](auto v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    if (o.phantom) apply_setting(cfg, "phantom", *o.phantom);
    if (o.size) apply_setting(cfg, "size", num(*o.size));
    if (o.pixel_size) apply_setting(cfg, "pixel_size", num(*o.pixel_size));
    if (o.views) apply_setting(cfg, "views", num(*o.views));
    if (o.rays) apply_setting(cfg, "rays_per_view", num(*o.rays));
    if (o.spacing) apply_setting(cfg, "detector_spacing", num(*o.spacing));
    if (o.algorithm) apply_setting(cfg, "algorithm", *o.algorithm);
    if (o.objective) apply_setting(cfg, "objective", *o.objective);
    if (o.smoothing) apply_setting(cfg, "tv_smoothing", num(*o.smoothing));
    if (o.gamma) apply_setting(cfg, "gamma", num(*o.gamma));
    if (o.epsilon) apply_setting(cfg, "epsilon", num(*o.epsilon));
    if (o.epsilon_relative) apply_setting(cfg, "epsilon_relative", num(*o.epsilon_relative));
    if (o.max_iterations) apply_setting(cfg, "max_iterations", num(*o.max_iterations));
    if (o.inner_budget) apply_setting(cfg, "inner_budget", num(*o.inner_budget));
    if (o.seed) apply_setting(cfg, "seed", num(*o.seed));
    if (o.output_dir) apply_setting(cfg, "output_dir", *o.output_dir);
    if (o.window_low) apply_setting(cfg, "window_low", num(*o.window_low));
    if (o.window_high) apply_setting(cfg, "window_high", num(*o.window_high));
    cfg.validate();
    return cfg;
}

void print_report(const superior::ExperimentResult& result) {
    std::cout << superior::io::format_metrics(result.report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Superiorized projection methods for tomographic reconstruction"};
    app.require_subcommand(1);
    Overrides o;
    std::string out_file;
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress progress messages");

    auto* phantom = app.add_subcommand("phantom", "write the phantom as a graymap and raw vector");
    add_geometry_flags(phantom, o);
    phantom->add_option("-o,--output", out_file, "output graymap path")->required();

    auto* simulate = app.add_subcommand("simulate", "write line-integral data as a binary sinogram");
    add_geometry_flags(simulate, o);
    simulate->add_option("-o,--output", out_file, "output sinogram path")->required();

    auto* reconstruct = app.add_subcommand("reconstruct", "run one reconstruction arm");
    add_geometry_flags(reconstruct, o);
    add_run_flags(reconstruct, o);
    std::string algorithm = "sap";
    bool superiorize = false;
    reconstruct->add_option("--algorithm", algorithm, "sap or bip")->check(CLI::IsMember({"sap", "art", "bip"}));
    reconstruct->add_flag("--superiorize", superiorize, "run the superiorized version");

    auto* compare = app.add_subcommand("compare", "run plain and superiorized arms and write a metrics report");
    add_geometry_flags(compare, o);
    add_run_flags(compare, o);
    compare->add_option("--algorithm", o.algorithm, "sap, bip, or both (default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    auto log = [quiet](const std::string& s) {
        if (!quiet) std::cerr << s << '\n';
    };

    try {
        if (reconstruct->parsed()) o.algorithm = algorithm;
        superior::ExperimentConfig cfg = resolve(o);

        if (phantom->parsed()) {
            const auto img = superior::tomo::make_phantom(superior::phantom_spec(cfg));
            superior::io::write_image(img, cfg.window, out_file);
            std::filesystem::path raw(out_file);
            raw.replace_extension(".vec");
            superior::io::write_vector(img, raw);
            log("phantom TV " + std::to_string(superior::tv_value(img)));
            return kExitOk;
        }
        if (simulate->parsed()) {
            const auto img = superior::tomo::make_phantom(superior::phantom_spec(cfg));
            const auto data = superior::tomo::generate_data(img, {cfg.views, cfg.rays_per_view, cfg.detector_spacing});
            superior::tomo::write_sinogram(data, out_file);
            log("wrote " + std::to_string(data.rays.size()) + " line integrals");
            return kExitOk;
        }
        if (reconstruct->parsed()) {
            cfg.plain = !superiorize;
            cfg.superiorize = superiorize;
        }
        const auto result = superior::run_experiment(cfg, log);
        print_report(result);
        return result.all_defined() ? kExitOk : kExitUndefined;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}
