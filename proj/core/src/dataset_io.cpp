// SPDX-License-Identifier: Apache-2.0

#include "rme/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rme/config.hpp"

namespace rme {

namespace {

constexpr const char* kHeader = "x_m,y_m,power_db";

double parse_field(const std::string& text, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw std::runtime_error(fmt::format("line {}: '{}' is not a number", line, text));
    return v;
}

}  // namespace

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".meta");
    return p;
}

void write_measurements_csv(std::ostream& out, const MeasurementSet& set) {
    out << kHeader << '\n';
    for (const auto& m : set.measurements())
        fmt::print(out, "{:.9g},{:.9g},{:.6g}\n", m.loc.x, m.loc.y, m.power_db);
}

std::vector<Measurement> read_measurements_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset CSV is empty");
    boost::trim(line);
    if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (line != kHeader)
        throw std::runtime_error(fmt::format("unexpected CSV header '{}', want '{}'", line, kHeader));

    std::vector<Measurement> out;
    std::vector<std::string> fields;
    for (std::size_t number = 2; std::getline(in, line); ++number) {
        boost::trim(line);
        if (line.empty()) continue;
        boost::split(fields, line, boost::is_any_of(","));
        if (fields.size() != 3)
            throw std::runtime_error(fmt::format("line {}: expected 3 fields, got {}", number,
                                                 fields.size()));
        for (auto& f : fields) boost::trim(f);
        out.push_back({{parse_field(fields[0], number), parse_field(fields[1], number)},
                       parse_field(fields[2], number)});
    }
    return out;
}

void write_dataset(const std::filesystem::path& csv_path, const MeasurementSet& set,
                   double grid_spacing) {
    {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", csv_path.string()));
        write_measurements_csv(out, set);
        if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", csv_path.string()));
    }
    Config meta;
    meta.set("region_x_m", set.region().size_x);
    meta.set("region_y_m", set.region().size_y);
    meta.set("wavelength_m", set.wavelength());
    meta.set("grid_spacing_m", grid_spacing);
    meta.save(metadata_path(csv_path));
}

DatasetFile read_dataset(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error(fmt::format("cannot open dataset '{}'", csv_path.string()));
    auto measurements = read_measurements_csv(in);
    const auto meta = Config::load(metadata_path(csv_path));
    Region region{meta.get_double("region_x_m"), meta.get_double("region_y_m")};
    return {MeasurementSet(std::move(measurements), region, meta.get_double("wavelength_m")),
            meta.get_double("grid_spacing_m")};
}

}  // namespace rme
