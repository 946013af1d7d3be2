#include "superior/experiment.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace superior {

std::string to_string(Algorithm a) { return a == Algorithm::sap ? "sap" : "bip"; }

Algorithm parse_algorithm(const std::string& s) {
    if (s == "sap" || s == "art") return Algorithm::sap;
    if (s == "bip") return Algorithm::bip;
    throw std::invalid_argument("algorithm: expected sap or bip, got '" + s + "'");
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw std::invalid_argument(field + ": " + why);
    };
    if (size < 2) fail("size", "must be >= 2");
    if (!(pixel_size > 0)) fail("pixel_size", "must be positive");
    if (views < 1) fail("views", "must be >= 1");
    if (rays_per_view < 1) fail("rays_per_view", "must be >= 1");
    if (!(detector_spacing >= 0)) fail("detector_spacing", "must be nonnegative");
    if (algorithms.empty()) fail("algorithm", "at least one algorithm is required");
    if (!plain && !superiorize) fail("arms", "neither the plain nor the superiorized arm is enabled");
    if (objective != "tv" && objective != "none") fail("objective", "expected tv or none");
    if (!(tv_smoothing >= 0)) fail("tv_smoothing", "must be nonnegative");
    if (!(gamma_base > 0 && gamma_base < 1)) fail("gamma", "must lie in (0, 1)");
    if (!(epsilon > 0)) fail("epsilon", "must be positive");
    if (!(epsilon_relative >= 0)) fail("epsilon_relative", "must be nonnegative");
    if (max_iterations < 1) fail("max_iterations", "must be >= 1");
    if (inner_budget < 1) fail("inner_budget", "must be >= 1");
    if (!(window.low < window.high)) fail("window", "low must be below high");
}

ExperimentConfig ExperimentConfig::full_scale() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::desk() {
    ExperimentConfig cfg;
    cfg.size = 63;
    cfg.pixel_size = 0.0752 * 243.0 / 63.0;
    cfg.views = 30;
    cfg.rays_per_view = 91;
    cfg.epsilon_relative = 0.05;
    return cfg;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T v{};
    std::string rest;
    if (!(in >> v) || (in >> rest)) throw std::invalid_argument(key + ": cannot parse '" + value + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw std::invalid_argument(key + ": expected true or false, got '" + value + "'");
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "phantom") cfg.phantom = value;
    else if (key == "size") cfg.size = parse_number<Eigen::Index>(key, value);
    else if (key == "pixel_size") cfg.pixel_size = parse_number<double>(key, value);
    else if (key == "views") cfg.views = parse_number<int>(key, value);
    else if (key == "rays_per_view") cfg.rays_per_view = parse_number<int>(key, value);
    else if (key == "detector_spacing") cfg.detector_spacing = parse_number<double>(key, value);
    else if (key == "algorithm") {
        if (value == "both" || value == "all") {
            cfg.algorithms = {Algorithm::sap, Algorithm::bip};
        } else {
            cfg.algorithms.clear();
            std::istringstream in(value);
            std::string item;
            while (std::getline(in, item, ',')) cfg.algorithms.push_back(parse_algorithm(trim(item)));
        }
    } else if (key == "plain") cfg.plain = parse_bool(key, value);
    else if (key == "superiorize") cfg.superiorize = parse_bool(key, value);
    else if (key == "objective") cfg.objective = value;
    else if (key == "tv_smoothing") cfg.tv_smoothing = parse_number<double>(key, value);
    else if (key == "gamma") cfg.gamma_base = parse_number<double>(key, value);
    else if (key == "epsilon") {
        cfg.epsilon = parse_number<double>(key, value);
        cfg.epsilon_relative = 0;
    } else if (key == "epsilon_relative") cfg.epsilon_relative = parse_number<double>(key, value);
    else if (key == "max_iterations") cfg.max_iterations = parse_number<std::size_t>(key, value);
    else if (key == "inner_budget") cfg.inner_budget = parse_number<std::size_t>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "window_low") cfg.window.low = parse_number<double>(key, value);
    else if (key == "window_high") cfg.window.high = parse_number<double>(key, value);
    else throw std::invalid_argument(key + ": unknown setting");
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config: expected key = value in '" + line + "'");
        apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str());
}

tomo::PhantomSpec phantom_spec(const ExperimentConfig& cfg) {
    if (cfg.phantom == "head") return tomo::head_phantom_spec(cfg.size, cfg.pixel_size);
    if (cfg.phantom == "random") return tomo::random_phantom_spec(cfg.size, cfg.pixel_size, cfg.seed);
    return tomo::load_phantom_spec(cfg.phantom);
}

bool ExperimentResult::all_defined() const {
    for (const auto& a : arms)
        if (!a.defined) return false;
    return true;
}

ArmResult run_arm(const tomo::TomoData& data, Algorithm algorithm, bool superiorized, const ExperimentConfig& cfg,
                  double epsilon) {
    const auto& problem = data.problem;
    std::unique_ptr<AlgorithmicOperator<double>> op;
    if (algorithm == Algorithm::sap)
        op = std::make_unique<SapOperator<double>>(problem, data.art_amalgamator());
    else
        op = std::make_unique<BipOperator<double>>(problem, data.block_scheme());

    const Eigen::Index w = data.grid.width, h = data.grid.height;
    RunConfig<double> run;
    run.initial_point = Point<double>::Zero(problem.dim());
    if (cfg.objective == "tv")
        run.objective = std::make_shared<TotalVariation<double>>(w, h, cfg.tv_smoothing);
    else
        run.objective = std::make_shared<ZeroObjective<double>>();
    run.gamma = GammaSequence::geometric(cfg.gamma_base);
    run.stop = {epsilon, cfg.max_iterations};
    run.inner_budget = cfg.inner_budget;

    ArmResult arm;
    arm.algorithm = algorithm;
    arm.superiorized = superiorized;
    const auto start = std::chrono::steady_clock::now();
    try {
        RunResult<double> r = superiorized ? run_superiorized(problem, *op, run) : run_plain(problem, *op, run);
        arm.defined = r.defined();
        arm.iterations = r.iterations();
        const auto& chosen = r.output.output ? *r.output.output : *r.output.last;
        arm.proximity = chosen.proximity;
        arm.output = chosen.x;
    } catch (const InnerStall& stall) {
        arm.stalled = true;
        arm.iterations = stall.iteration;
        arm.output = Point<double>::Zero(problem.dim());
        arm.proximity = proximity(problem, arm.output);
    }
    arm.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (arm.defined) arm.objective = TotalVariation<double>(w, h).value(arm.output);
    return arm;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::function<void(const std::string&)>& log) {
    cfg.validate();
    auto say = [&](const std::string& s) {
        if (log) log(s);
    };

    const tomo::Image phantom = tomo::make_phantom(phantom_spec(cfg));
    tomo::ScanGeometry scan{cfg.views, cfg.rays_per_view, cfg.detector_spacing};
    const tomo::TomoData data = tomo::generate_data(phantom, scan);

    ExperimentResult result;
    result.num_rays = data.problem.size();
    result.phantom_objective = tv_value(phantom);
    result.initial_proximity = proximity(data.problem, Point<double>::Zero(data.problem.dim()));
    result.epsilon = cfg.epsilon_relative > 0 ? cfg.epsilon_relative * result.initial_proximity : cfg.epsilon;
    say("rays " + std::to_string(result.num_rays) + ", Pr(origin) " + std::to_string(result.initial_proximity) +
        ", eps " + std::to_string(result.epsilon) + ", phantom TV " + std::to_string(result.phantom_objective));

    std::filesystem::create_directories(cfg.output_dir);
    io::write_image(phantom, cfg.window, cfg.output_dir / "phantom.pgm");

    for (Algorithm alg : cfg.algorithms) {
        for (bool sup : {false, true}) {
            if ((sup && !cfg.superiorize) || (!sup && !cfg.plain)) continue;
            ArmResult arm = run_arm(data, alg, sup, cfg, result.epsilon);
            const std::string stem = to_string(alg) + (sup ? "_super" : "_plain");
            const auto img = devectorize(arm.output, data.grid.width, data.grid.height, data.grid.pixel_size);
            io::write_image(img, cfg.window, cfg.output_dir / (stem + ".pgm"));
            io::write_vector(img, cfg.output_dir / (stem + ".vec"));
            say(stem + ": " + (arm.defined ? "defined" : (arm.stalled ? "stalled" : "undefined")) + " after " +
                std::to_string(arm.iterations) + " iterations, Pr " + std::to_string(arm.proximity) +
                (arm.objective ? ", TV " + std::to_string(*arm.objective) : std::string()));
            result.report.rows.push_back({to_string(alg), sup, arm.iterations, arm.proximity, arm.objective});
            result.arms.push_back(std::move(arm));
        }
    }
    io::write_metrics(result.report, cfg.output_dir / "metrics.csv");
    return result;
}

}  // namespace superior
