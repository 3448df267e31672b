#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "gelfand/errors.hpp"
#include "gelfand/io.hpp"
#include "gelfand/zoo.hpp"

using namespace gelfand;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("gelfand_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Trajectory heat_run(double T) {
    const auto op = heat_plaplace(2.0, 1.0, 16);
    const auto u0 = initial_condition(*op, {{"profile", "random"}, {"amplitude", 1.0}}, 2);
    SolveConfig cfg;
    cfg.t_end_request = T;
    cfg.record_interval = T / 4;
    return solve(*op, u0, cfg);
}

}  // namespace

TEST(Series, HeaderHasSixColumns) {
    const auto csv = format_series_csv(heat_run(0.2));
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "t,h_norm,v_norm,v_alpha_integral,envelope,margin");
    std::string row;
    std::size_t rows = 0;
    while (std::getline(in, row)) {
        EXPECT_EQ(std::count(row.begin(), row.end(), ','), 5);
        ++rows;
    }
    EXPECT_EQ(rows, 5u);
}

TEST(Series, SingleSnapshotGivesOneRow) {
    Trajectory traj;
    traj.times = {0.0};
    traj.h_sq_series = {4.0};
    traj.v_norm_series = {3.0};
    traj.v_alpha_integral = {0.0};
    traj.envelope_series = {4.0};
    traj.delta = 1.0;
    const auto rows = parse_series_csv(format_series_csv(traj));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].h_norm, 2.0);
    EXPECT_EQ(rows[0].v_norm, 3.0);
    EXPECT_EQ(rows[0].margin, 0.0);
}

TEST(Series, RoundTripIsExact) {
    const auto traj = heat_run(0.5);
    const auto expected = series_rows(traj);
    const auto parsed = parse_series_csv(format_series_csv(traj));
    ASSERT_EQ(parsed.size(), expected.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        EXPECT_EQ(parsed[i].t, expected[i].t);
        EXPECT_EQ(parsed[i].h_norm, expected[i].h_norm);
        EXPECT_EQ(parsed[i].v_norm, expected[i].v_norm);
        EXPECT_EQ(parsed[i].v_alpha_integral, expected[i].v_alpha_integral);
        EXPECT_EQ(parsed[i].envelope, expected[i].envelope);
        EXPECT_EQ(parsed[i].margin, expected[i].margin);
    }
}

TEST(Series, MalformedTextIsRejected) {
    EXPECT_THROW(parse_series_csv("t,h_norm\n0,1\n"), IoError);
    EXPECT_THROW(parse_series_csv("t,h_norm,v_norm,v_alpha_integral,envelope,margin\n0,1,2\n"), IoError);
}

TEST(FormatNumber, RoundTripsDoubles) {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::numeric_limits<double>::max()})
        EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(States, BinaryRoundTrip) {
    const auto op = heat_plaplace(2.0, 1.0, 16);
    const auto traj = heat_run(0.2);
    const auto dir = scratch_dir("states");
    write_states(dir, op->space(), traj);
    EXPECT_TRUE(fs::exists(dir / "states.bin"));
    EXPECT_TRUE(fs::exists(dir / "states.json"));
    EXPECT_EQ(fs::file_size(dir / "states.bin"), traj.states.size() * op->space().size() * sizeof(double));
    const auto back = read_states(dir);
    ASSERT_EQ(back.size(), traj.states.size());
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_EQ(back[i], traj.states[i].coeffs);
    const auto header = nlohmann::json::parse(read_text(dir / "states.json"));
    EXPECT_EQ(header["times"].get<std::vector<double>>(), traj.times);
    fs::remove_all(dir);
}

TEST(States, TruncatedBinaryIsRejected) {
    const auto op = heat_plaplace(2.0, 1.0, 16);
    const auto dir = scratch_dir("truncated");
    write_states(dir, op->space(), heat_run(0.2));
    fs::resize_file(dir / "states.bin", fs::file_size(dir / "states.bin") - 8);
    EXPECT_THROW(read_states(dir), IoError);
    fs::remove_all(dir);
}

TEST(AtomicWrite, ReplacesContentAndLeavesNoTemporaries) {
    const auto dir = scratch_dir("atomic");
    const auto file = dir / "doc.json";
    write_json_atomic(file, {{"a", 1}});
    write_json_atomic(file, {{"a", 2}});
    EXPECT_EQ(nlohmann::json::parse(read_text(file))["a"], 2);
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
    EXPECT_EQ(entries, 1u);
    fs::remove_all(dir);
}

TEST(AtomicWrite, CreatesParentsButNotThroughFiles) {
    const auto dir = scratch_dir("parents");
    write_text_atomic(dir / "a" / "b" / "x.txt", "x");
    EXPECT_EQ(read_text(dir / "a" / "b" / "x.txt"), "x");
    EXPECT_THROW(write_text_atomic(dir / "a" / "b" / "x.txt" / "y.txt", "y"), IoError);
    EXPECT_THROW(read_text(dir / "missing.txt"), IoError);
    fs::remove_all(dir);
}

TEST(Tables, ConvergenceAndDependenceCsv) {
    std::vector<ConvergenceRow> rows(2);
    rows[0].resolution = 16;
    rows[0].difference = 1e-3;
    rows[1].resolution = 32;
    rows[1].difference = std::numeric_limits<double>::quiet_NaN();
    const auto csv = format_convergence_csv(rows);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_NE(csv.find("16,"), std::string::npos);

    DependenceReport rep;
    rep.times = {0.0, 1.0};
    rep.ratio = {1.0, 0.5};
    rep.bound = {1.0, 1.0};
    rep.quotient = {1.0, 0.5};
    const auto dep = format_dependence_csv(rep);
    EXPECT_EQ(std::count(dep.begin(), dep.end(), '\n'), 3);
}

TEST(Tables, GnuplotScriptNamesTheSeries) {
    const auto dir = scratch_dir("plot");
    EXPECT_EQ(gnuplot_script(dir).find("series.csv"), std::string::npos);
    write_text_atomic(dir / "series.csv", format_series_csv(heat_run(0.2)));
    EXPECT_NE(gnuplot_script(dir).find("series.csv"), std::string::npos);
    fs::remove_all(dir);
}
