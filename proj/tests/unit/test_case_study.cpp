#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "hbyield/case_study.hpp"
#include "hbyield/errors.hpp"

using namespace hby;

namespace {

/// Small grids and coarse quadrature: the schema and row structure are the
/// point here, full-scale values come from the scenario CLI runs.
ProcessConfig small_base() {
    ProcessConfig c;
    c.die_width_um = 3000.0;
    c.die_height_um = 3000.0;
    c.resolution_w2w_um = 500.0;
    c.resolution_d2w_um = 500.0;
    c.length_points = 16;
    c.orientation_points = 8;
    c.radius_points = 16;
    return c;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

bool as_number(const std::string& s, double& v) {
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    return end != nullptr && *end == '\0' && end != s.c_str();
}

/// Golden comparison: layout cells match exactly, numeric cells within a
/// small relative tolerance so the files survive libm differences.
/// HBY_REGEN_GOLDEN=1 rewrites the stored files instead.
void check_against_golden(const std::string& name, const std::string& text) {
    const char* data_dir = std::getenv("HBY_TEST_DATA");
    REQUIRE(data_dir != nullptr);
    auto path = std::filesystem::path(data_dir) / "golden" / (name + ".csv");
    if (std::getenv("HBY_REGEN_GOLDEN")) {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream(path, std::ios::trunc) << text;
    }
    REQUIRE_MESSAGE(std::filesystem::exists(path),
                    "missing golden file ", path.string(),
                    " (run once with HBY_REGEN_GOLDEN=1)");
    std::ostringstream stored;
    stored << std::ifstream(path).rdbuf();

    auto want = parse_csv(stored.str());
    auto got = parse_csv(text);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CAPTURE(i);
        REQUIRE(got[i].size() == want[i].size());
        for (std::size_t j = 0; j < want[i].size(); ++j) {
            CAPTURE(j);
            double a = 0.0, b = 0.0;
            if (as_number(want[i][j], a) && as_number(got[i][j], b))
                CHECK(b == doctest::Approx(a).epsilon(1e-6));
            else
                CHECK(got[i][j] == want[i][j]);
        }
    }
}

double cell_yield(const std::vector<std::string>& row) {
    double v = 0.0;
    REQUIRE(as_number(row.back(), v));
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    return v;
}

} // namespace

TEST_CASE("study registry") {
    std::vector<std::string> names = case_study_names();
    REQUIRE(names.size() == 5);
    CHECK(names[0] == "defect_density");
    CHECK(names[4] == "redundancy_spacing");
    CHECK_THROWS_WITH_AS(run_case_study("voids", small_base()), doctest::Contains("voids"),
                         ConfigError);
}

TEST_CASE("defect density sweep") {
    std::string text = run_case_study("defect_density", small_base());
    check_against_golden("defect_density", text);

    auto rows = parse_csv(text);
    REQUIRE(rows.size() == 1 + 2 * 2 * 3 * 4);
    CHECK(rows[0] == std::vector<std::string>{"mode", "density_per_cm2", "chiplet_mm2",
                                              "component", "yield"});
    // sparser particles must help the defect channel for every die size
    std::map<std::string, double> df;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 5);
        double y = cell_yield(rows[i]);
        if (rows[i][3] == "df") df[rows[i][0] + rows[i][1] + rows[i][2]] = y;
    }
    REQUIRE(df.size() == 12);
    for (const char* mode : {"w2w", "d2w"})
        for (const char* mm2 : {"10", "50", "100"}) {
            CAPTURE(mode);
            CAPTURE(mm2);
            CHECK(df.at(std::string(mode) + "0.01" + mm2) >
                  df.at(std::string(mode) + "0.1" + mm2));
        }
}

TEST_CASE("pitch sweep") {
    std::string text = run_case_study("pitch", small_base());
    check_against_golden("pitch", text);

    auto rows = parse_csv(text);
    REQUIRE(rows.size() == 1 + 2 * 2 * 4);
    CHECK(rows[0] == std::vector<std::string>{"mode", "pitch_um", "component", "yield"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 4);
        CHECK((rows[i][1] == "0.3" || rows[i][1] == "1"));
        cell_yield(rows[i]);
    }
}

TEST_CASE("chiplet size sweep carries the system yield") {
    std::string text = run_case_study("chiplet_size", small_base());
    check_against_golden("chiplet_size", text);

    auto rows = parse_csv(text);
    REQUIRE(rows.size() == 1 + 2 * 3 * 4 + 3); // plus one system row per d2w size
    CHECK(rows[0] == std::vector<std::string>{"mode", "chiplet_mm2", "n_chiplets",
                                              "component", "yield"});
    std::map<std::string, double> total, system;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 5);
        if (rows[i][0] == "w2w") CHECK(rows[i][3] != "system");
        if (rows[i][3] == "total") total[rows[i][0] + rows[i][1]] = cell_yield(rows[i]);
        if (rows[i][3] == "system") system[rows[i][1] + "," + rows[i][2]] = cell_yield(rows[i]);
    }
    // a 1000 mm2 system is n independent chiplet attachments
    REQUIRE(system.size() == 3);
    CHECK(system.at("10,100") ==
          doctest::Approx(std::pow(total.at("d2w10"), 100.0)).epsilon(1e-9));
    CHECK(system.at("50,20") ==
          doctest::Approx(std::pow(total.at("d2w50"), 20.0)).epsilon(1e-9));
    CHECK(system.at("100,10") ==
          doctest::Approx(std::pow(total.at("d2w100"), 10.0)).epsilon(1e-9));
}

TEST_CASE("pad layout sweep") {
    std::string text = run_case_study("pad_layouts", small_base());
    check_against_golden("pad_layouts", text);

    auto rows = parse_csv(text);
    REQUIRE(rows.size() == 1 + 2 * 4 * 4);
    CHECK(rows[0] == std::vector<std::string>{"mode", "pattern", "component", "yield"});
    std::map<std::string, int> patterns;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 4);
        ++patterns[rows[i][1]];
        cell_yield(rows[i]);
    }
    for (const char* p : {"full", "sparse", "peripheral", "centralized"})
        CHECK(patterns.at(p) == 8);
}

TEST_CASE("redundancy spacing sweep") {
    std::string text = run_case_study("redundancy_spacing", small_base());
    check_against_golden("redundancy_spacing", text);

    auto rows = parse_csv(text);
    REQUIRE(rows.size() == 1 + 2 * 5 * 4);
    CHECK(rows[0] ==
          std::vector<std::string>{"mode", "scheme", "spacing_um", "component", "yield"});
    std::map<std::string, std::string> by_key; // yield cells verbatim
    for (std::size_t i = 1; i < rows.size(); ++i) {
        REQUIRE(rows[i].size() == 5);
        cell_yield(rows[i]);
        by_key[rows[i][0] + "/" + rows[i][1] + "/" + rows[i][3]] = rows[i][4];
    }
    // pad-pitch-scale shared groups die as a unit, exactly like bare pads
    for (const char* mode : {"w2w", "d2w"})
        for (const char* comp : {"ovl", "cr", "df", "total"}) {
            CAPTURE(mode);
            CAPTURE(comp);
            CHECK(by_key.at(std::string(mode) + "/shared_20to1/" + comp) ==
                  by_key.at(std::string(mode) + "/none/" + comp));
        }
}
