#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "superior/io.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace superior;
using namespace superior::io;
using namespace superior::testing;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("superior_test_io_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("gray mapping") {
    const DisplayWindow w;
    CHECK(w.gray(w.low) == 0);
    CHECK(w.gray(0.0) == 0);
    CHECK(w.gray(w.high) == 255);
    CHECK(w.gray(0.5639) == 255);
    CHECK(w.gray((w.low + w.high) / 2) == 128);

    const DisplayWindow unit{0.0, 1.0};
    CHECK(unit.gray(0.25) == 64);  // 63.75 rounds up
    CHECK(unit.gray(1.0 / 255.0 * 10.4) == 10);

    CHECK_THROWS_AS((DisplayWindow{1.0, 1.0}).validate(), std::invalid_argument);
}

TEST_CASE("windowed images are binary graymaps") {
    GridImage<double> img(3, 2, 0.1);
    img.values << 0.204, 0.21, 0.3, 0.0, 0.21675, 0.210375;
    const auto path = temp_path("img.pgm");
    write_image(img, DisplayWindow{}, path);
    const std::string bytes = slurp(path);
    CHECK(bytes.substr(0, 11) == "P5\n3 2\n255\n");
    REQUIRE(bytes.size() == 11 + 6);
    const GrayImage back = read_pgm(path);
    CHECK(back.width == 3);
    CHECK(back.height == 2);
    CHECK(back.pixels == std::vector<std::uint8_t>{0, 120, 255, 0, 255, 128});
    std::filesystem::remove(path);

    GridImage<double> low(4, 4);
    low.values.setConstant(0.204);
    write_image(low, DisplayWindow{}, path);
    for (auto p : read_pgm(path).pixels) CHECK(p == 0);
    std::filesystem::remove(path);
}

TEST_CASE("raw vectors round-trip exactly") {
    Rng rng(6);
    GridImage<double> img(5, 3, 0.0752);
    for (Eigen::Index j = 0; j < img.values.size(); ++j) img.values.data()[j] = std::normal_distribution<double>()(rng);
    const auto path = temp_path("v.vec");
    write_vector(img, path);
    const auto back = read_vector(path);
    CHECK(back.width() == 5);
    CHECK(back.height() == 3);
    CHECK(back.pixel_size == 0.0752);
    CHECK(back.values == img.values);
    std::filesystem::remove(path);

    std::ofstream(path) << "garbage\n";
    CHECK_THROWS(read_vector(path));
    std::filesystem::remove(path);
}

TEST_CASE("metrics report") {
    CHECK(format_metrics(MetricsReport{}) == "algorithm,superiorized,iterations,proximity,objective\n");

    MetricsReport r;
    r.rows.push_back({"sap", false, 120, 0.0099, 1296.44});
    r.rows.push_back({"sap", true, 87, 0.0098, 441.5});
    r.rows.push_back({"bip", false, 10000, 0.31, std::nullopt});
    const std::string text = format_metrics(r);
    CHECK(text.find("sap,true,87,0.0098,441.5\n") != std::string::npos);
    CHECK(text.find("bip,false,10000,0.31,undefined\n") != std::string::npos);
    CHECK(text.find("# ratio sap ") != std::string::npos);
    CHECK(text.find("# ratio bip") == std::string::npos);
    CHECK(*r.ratio("sap") == doctest::Approx(441.5 / 1296.44));

    const auto path = temp_path("metrics.csv");
    write_metrics(r, path);
    const MetricsReport back = read_metrics(path);
    REQUIRE(back.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.rows[i].algorithm == r.rows[i].algorithm);
        CHECK(back.rows[i].superiorized == r.rows[i].superiorized);
        CHECK(back.rows[i].iterations == r.rows[i].iterations);
        CHECK(back.rows[i].proximity == r.rows[i].proximity);
        CHECK(back.rows[i].objective == r.rows[i].objective);
    }
    std::filesystem::remove(path);

    CHECK_THROWS_AS(parse_metrics("a,b\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_metrics("algorithm,superiorized,iterations,proximity,objective\nsap,maybe,1,2,3\n"),
                    std::invalid_argument);
}
