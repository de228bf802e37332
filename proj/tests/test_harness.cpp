#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pinch/harness.hpp"

using namespace pinch;

namespace {

std::string scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("pinch_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_rect() {
    ExperimentConfig c;
    c.width = 40;
    c.height = 20;
    c.bin = 2;
    return c;
}

double value_at(const Grid& g, double x, double y, double tol = 1e-9) {
    for (size_t i = 0; i < g.size(); ++i)
        if (std::abs(g.x[i] - x) < tol && std::abs(g.y[i] - y) < tol) return g.value[i];
    return NAN;
}

}  // namespace

TEST_CASE("config parsing") {
    auto c = parse_config("# comment\npolygon = hex\nevent=123456 # trailing\nside = 30\ny_slices = -0.5, 0.25\nseed=7\n");
    CHECK(c.polygon == "hex");
    CHECK(c.side == 30);
    CHECK(c.seed == 7);
    REQUIRE(c.y_slices.size() == 2);
    CHECK(c.y_slices[1] == 0.25);
    CHECK(parse_config(format_config(c)).side == 30);

    CHECK(parse_config("width=400\nheight=200\naspect=2\n").width == 400);
    CHECK_THROWS_AS(parse_config("width=400\nheight=200\naspect=3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("colour=blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("width=abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("polygon=pentagon\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("event=123456\n"), ConfigError);  // three pinches need the hexagon
    CHECK_THROWS_AS(parse_config("model=custom\nkappa=3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("samples=-1\n"), ConfigError);
    CHECK_THROWS_AS(config_lattice(parse_config("model=custom\nkappa=5\n")), ConfigError);
    CHECK(config_params(parse_config("model=ising\n")).kappa == doctest::Approx(16.0 / 3.0));
}

TEST_CASE("grid files round-trip exactly") {
    Grid g;
    g.set("kind", "density");
    g.set("note", "a b=c");
    double vals[] = {0.1, 1.0 / 3.0, -2.5e-300, NAN, 1e300, std::nextafter(1.0, 2.0)};
    for (int i = 0; i < 6; ++i) {
        g.x.push_back(i * 0.7 / 3.0);
        g.y.push_back(-i / 7.0);
        g.value.push_back(vals[i]);
    }
    Grid h = parse_grid(format_grid(g));
    CHECK(h.meta == g.meta);
    REQUIRE(h.size() == g.size());
    for (size_t i = 0; i < g.size(); ++i) {
        CHECK(h.x[i] == g.x[i]);
        CHECK(h.y[i] == g.y[i]);
        if (std::isnan(g.value[i]))
            CHECK(std::isnan(h.value[i]));
        else
            CHECK(h.value[i] == g.value[i]);
    }
    CHECK(format_grid(h) == format_grid(g));
    CHECK_THROWS_AS(parse_grid("x,y,value\n1,2\n"), ConfigError);
}

TEST_CASE("comparison of identical, swapped and mismatched grids") {
    ExperimentConfig c = small_rect();
    Grid a = theory_grid(c);
    c.event = "1234";
    Grid b = theory_grid(c);
    for (auto& r : compare_grids(a, a, {0.2, 0.5})) {
        CHECK(r.avg_error == 0.0);
        CHECK(r.std_dev == 0.0);
        CHECK(r.points > 5);
    }
    auto ab = compare_grids(a, b, {0.2, 0.5}), ba = compare_grids(b, a, {0.2, 0.5});
    for (size_t i = 0; i < ab.size(); ++i) {
        CHECK(ab[i].avg_error == doctest::Approx(-ba[i].avg_error).epsilon(1e-14));
        CHECK(ab[i].std_dev == doctest::Approx(ba[i].std_dev).epsilon(1e-12));
        CHECK(ab[i].avg_error != 0.0);
    }
    c.width = 60;
    CHECK_THROWS_AS(compare_grids(a, theory_grid(c), {0.5}), ConfigError);
}

TEST_CASE("theory grid normalization and shape") {
    ExperimentConfig c = small_rect();
    c.model = "ising";
    c.event = "1234";
    Grid g = theory_grid(c);
    CHECK(value_at(g, std::stod(g.get("center_x")), std::stod(g.get("center_y"))) == 1.0);

    // one-pinch density sits against side 12: the lowest row peaks at its ends, near vertices 1 and 2
    c.model = "percolation";
    c.event = "12:34";
    g = theory_grid(c);
    double ylow = *std::min_element(g.y.begin(), g.y.end());
    double xmin = 1e9, xmax = -1e9, mid = NAN, best = 0.0, best_y = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        if (g.value[i] > best) best = g.value[i], best_y = g.y[i];
        if (g.y[i] != ylow) continue;
        xmin = std::min(xmin, g.x[i]);
        xmax = std::max(xmax, g.x[i]);
    }
    mid = value_at(g, 0.5 * (xmin + xmax), ylow, 0.06);
    CHECK(best_y == ylow);
    CHECK(value_at(g, xmin, ylow) > mid);
    CHECK(value_at(g, xmax, ylow) > mid);
}

TEST_CASE("three-pinch hexagon grid has six-fold symmetry") {
    ExperimentConfig c;
    c.polygon = "hex";
    c.event = "123456";
    c.side = 8;
    c.bin = 1;
    c.margin = 1;
    Grid g = theory_grid(c);
    const cd rot = std::polar(1.0, M_PI / 3);
    int matched = 0;
    double worst = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        cd p = cd(g.x[i], g.y[i]) * rot;
        double v = value_at(g, p.real(), p.imag(), 1e-9);
        if (std::isnan(v)) continue;
        ++matched;
        worst = std::max(worst, std::abs(v - g.value[i]) / g.value[i]);
    }
    CHECK(matched > 20);
    CHECK(worst < 1e-6);
}

TEST_CASE("simulate writes empty output for zero samples and is reproducible") {
    ExperimentConfig c = small_rect();
    c.out_dir = scratch("sim0");
    auto paths = cmd_simulate(c);
    REQUIRE(paths.size() == 5);
    Grid z = load_grid(paths[0]);
    CHECK(z.get("samples") == "0");
    CHECK(z.size() > 0);
    for (double v : z.value) CHECK(v == 0.0);

    c.samples = 300;
    c.seed = 11;
    c.workers = 2;
    c.out_dir = scratch("simA");
    auto a = cmd_simulate(c);
    c.out_dir = scratch("simB");
    c.workers = 3;
    auto b = cmd_simulate(c);
    for (size_t i = 0; i < a.size(); ++i) CHECK(slurp(a[i]) == slurp(b[i]));

    c.out_dir = scratch("cmp");
    c.y_slices = {0.2, 0.5};
    std::string th = cmd_theory(c);
    std::string cmp = cmd_compare(c, th, (std::filesystem::path(a[0])).string());
    CHECK(slurp(cmp).find("y_slice,y,avg_error,std_dev,points") != std::string::npos);

    c.polygon = "hex";
    c.model = "ising";
    c.event = "123456";
    CHECK_THROWS_AS(cmd_simulate(c), ConfigError);
}

TEST_CASE("selftest passes and its negative control fails") {
    auto results = cmd_selftest();
    REQUIRE(results.size() == 6);
    for (auto& r : results) {
        std::string what = r.name + ": " + r.detail;
        INFO(what);
        CHECK(r.pass);
    }
    auto bad = suite_block_equivalence(1e-3);
    CHECK_FALSE(bad.pass);
    CHECK(suite_block_equivalence().pass);
}
