#include "gelfand/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "gelfand/errors.hpp"

namespace gelfand {

namespace fs = std::filesystem;

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<SeriesRow> series_rows(const Trajectory& traj) {
    std::vector<SeriesRow> rows(traj.times.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = {traj.times[i],         std::sqrt(traj.h_sq_series[i]), traj.v_norm_series[i],
                   traj.v_alpha_integral[i], traj.envelope_series[i],       traj.margin(i)};
    }
    return rows;
}

std::string format_series_csv(const Trajectory& traj) {
    std::string out;
    for (std::size_t c = 0; c < kSeriesColumns.size(); ++c) {
        if (c) out += ',';
        out += kSeriesColumns[c];
    }
    out += '\n';
    for (const auto& r : series_rows(traj)) {
        out += format_number(r.t) + ',' + format_number(r.h_norm) + ',' + format_number(r.v_norm) + ',' +
               format_number(r.v_alpha_integral) + ',' + format_number(r.envelope) + ',' + format_number(r.margin) +
               '\n';
    }
    return out;
}

namespace {

double parse_number(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw IoError("series csv: bad number '" + s + "'");
    }
    if (used != s.size()) throw IoError("series csv: bad number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::vector<SeriesRow> parse_series_csv(std::string_view text) {
    std::istringstream is{std::string(text)};
    std::string line;
    if (!std::getline(is, line)) throw IoError("series csv: missing header");
    const auto header = split(line);
    if (header.size() != kSeriesColumns.size()) throw IoError("series csv: expected 6 columns");
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] != kSeriesColumns[c]) throw IoError("series csv: unexpected column '" + header[c] + "'");
    std::vector<SeriesRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != kSeriesColumns.size()) throw IoError("series csv: row with wrong column count");
        rows.push_back({parse_number(cells[0]), parse_number(cells[1]), parse_number(cells[2]),
                        parse_number(cells[3]), parse_number(cells[4]), parse_number(cells[5])});
    }
    return rows;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view text) {
    const auto dir = path.parent_path();
    std::error_code ec;
    if (!dir.empty()) fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

void write_json_atomic(const fs::path& path, const nlohmann::json& doc) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

namespace {

void to_little_endian(double x, char* out) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) out[b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
}

double from_little_endian(const char* in) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[b])) << (8 * b);
    return std::bit_cast<double>(bits);
}

}  // namespace

void write_states(const fs::path& dir, const SpectralSpace& space, const Trajectory& traj) {
    const std::size_t cols = space.size();
    std::string blob(traj.states.size() * cols * 8, '\0');
    for (std::size_t r = 0; r < traj.states.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c) to_little_endian(traj.states[r].coeffs[c], &blob[(r * cols + c) * 8]);
    write_text_atomic(dir / "states.bin", blob);
    nlohmann::json space_desc;
    to_json(space_desc, space.descriptor());
    write_json_atomic(dir / "states.json", {{"rows", traj.states.size()},
                                            {"cols", cols},
                                            {"dtype", "float64-le"},
                                            {"times", traj.times},
                                            {"space", space_desc}});
}

std::vector<std::vector<double>> read_states(const fs::path& dir) {
    const auto header = nlohmann::json::parse(read_text(dir / "states.json"));
    const auto rows = header.at("rows").get<std::size_t>();
    const auto cols = header.at("cols").get<std::size_t>();
    const auto blob = read_text(dir / "states.bin");
    if (blob.size() != rows * cols * 8) throw IoError("states.bin size does not match states.json");
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) out[r][c] = from_little_endian(&blob[(r * cols + c) * 8]);
    return out;
}

std::string format_convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string out = "resolution,modes,final_h_norm,difference,termination\n";
    for (const auto& r : rows)
        out += std::to_string(r.resolution) + ',' + std::to_string(r.modes) + ',' + format_number(r.final_h_norm) +
               ',' + format_number(r.difference) + ',' + to_string(r.termination) + '\n';
    return out;
}

std::string format_dependence_csv(const DependenceReport& rep) {
    std::string out = "t,ratio,bound,quotient\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        out += format_number(rep.times[i]) + ',' + format_number(rep.ratio[i]) + ',' + format_number(rep.bound[i]) +
               ',' + format_number(rep.quotient[i]) + '\n';
    return out;
}

std::string format_ensemble_csv(const EnsembleResult& ens) {
    std::string out = "path,t,h_norm,v_norm\n";
    for (const auto& p : ens.paths) {
        if (!p.ok) continue;
        for (std::size_t i = 0; i < p.x.times.size(); ++i)
            out += std::to_string(p.index) + ',' + format_number(p.x.times[i]) + ',' +
                   format_number(std::sqrt(p.x.h_sq_series[i])) + ',' + format_number(p.x.v_norm_series[i]) + '\n';
    }
    return out;
}

std::string gnuplot_script(const fs::path& dir) {
    std::ostringstream os;
    os << "set datafile separator ','\n"
       << "set key autotitle columnhead\n"
       << "set xlabel 't'\n"
       << "cd '" << dir.string() << "'\n";
    if (fs::exists(dir / "series.csv")) {
        os << "set multiplot layout 2,1\n"
           << "set logscale y\n"
           << "plot 'series.csv' using 1:($2**2) with lines title 'h_norm^2', \\\n"
           << "     '' using 1:5 with lines title 'envelope'\n"
           << "unset logscale y\n"
           << "plot 'series.csv' using 1:6 with lines title 'margin'\n"
           << "unset multiplot\n";
    }
    if (fs::exists(dir / "dependence.csv"))
        os << "plot 'dependence.csv' using 1:4 with lines title 'ratio / bound'\n";
    if (fs::exists(dir / "convergence.csv"))
        os << "set logscale xy\nplot 'convergence.csv' using 1:4 with linespoints title 'difference'\n";
    if (fs::exists(dir / "paths.csv"))
        os << "plot 'paths.csv' using 2:3 with dots title 'h_norm per path'\n";
    os << "pause mouse close\n";
    return os.str();
}

}  // namespace gelfand
