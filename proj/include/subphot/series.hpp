#ifndef SUBPHOT_SERIES_HPP
#define SUBPHOT_SERIES_HPP

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "subphot/material.hpp"
#include "subphot/sources.hpp"

namespace subphot {

enum class DriveKind { source_power, incident_power, intensity };
enum class ResponseKind { current, count_rate };
enum class IlluminationKind { coherent, classical, entangled };

inline std::string to_string(DriveKind k) {
    switch (k) {
    case DriveKind::source_power: return "W_source";
    case DriveKind::incident_power: return "W";
    case DriveKind::intensity: return "W/m2";
    }
    return "?";
}
inline std::string to_string(ResponseKind k) {
    return k == ResponseKind::current ? "A" : "1/s";
}
inline std::string to_string(IlluminationKind k) {
    switch (k) {
    case IlluminationKind::coherent: return "coherent";
    case IlluminationKind::classical: return "classical";
    case IlluminationKind::entangled: return "entangled";
    }
    return "?";
}

struct Sample {
    double drive = 0.0;
    double response = 0.0;
    double sigma = 0.0;
};

struct SeriesMeta {
    double wavelength_nm = 0.0;
    double temperature_k = 300.0;
    OpticalPath path;
    IlluminationKind kind = IlluminationKind::coherent;
    double g2 = 1.0;
    DriveKind drive_kind = DriveKind::incident_power;
    ResponseKind response_kind = ResponseKind::current;
};

struct MeasurementSeries {
    std::vector<Sample> samples;
    SeriesMeta meta;

    void validate() const {
        if (samples.size() < 2)
            throw std::runtime_error("measurement series: need at least 2 samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!(samples[i].sigma > 0.0))
                throw std::runtime_error("measurement series: sigma must be > 0 at row " +
                                         std::to_string(i + 1));
            if (i > 0 && !(samples[i].drive > samples[i - 1].drive))
                throw std::runtime_error("measurement series: drives must be strictly increasing at row " +
                                         std::to_string(i + 1));
        }
        meta.path.validate();
    }

    std::vector<double> drives() const {
        std::vector<double> v;
        for (const auto& s : samples) v.push_back(s.drive);
        return v;
    }
    std::vector<double> responses() const {
        std::vector<double> v;
        for (const auto& s : samples) v.push_back(s.response);
        return v;
    }
};

namespace csvio {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(detail::trim(cur));
    return out;
}

inline DriveKind parse_drive_unit(const std::string& u, int lineno) {
    if (u == "W_source") return DriveKind::source_power;
    if (u == "W") return DriveKind::incident_power;
    if (u == "W/m2") return DriveKind::intensity;
    throw std::runtime_error("measurement csv line " + std::to_string(lineno) +
                             ": unknown drive unit '" + u + "' (expect W_source|W|W/m2)");
}

inline ResponseKind parse_response_unit(const std::string& u, int lineno) {
    if (u == "A") return ResponseKind::current;
    if (u == "1/s") return ResponseKind::count_rate;
    throw std::runtime_error("measurement csv line " + std::to_string(lineno) +
                             ": unknown response unit '" + u + "' (expect A|1/s)");
}

} // namespace csvio

// Header: drive,drive_unit,response,response_unit,sigma
inline MeasurementSeries read_measurement_csv(std::istream& in, SeriesMeta meta) {
    MeasurementSeries series;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    bool units_locked = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = detail::trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto cols = csvio::split_csv_line(s);
        if (!header_seen) {
            if (cols.size() != 5 || cols[0] != "drive" || cols[1] != "drive_unit" ||
                cols[2] != "response" || cols[3] != "response_unit" || cols[4] != "sigma")
                throw std::runtime_error("measurement csv line " + std::to_string(lineno) +
                                         ": expected header drive,drive_unit,response,response_unit,sigma");
            header_seen = true;
            continue;
        }
        if (cols.size() != 5)
            throw std::runtime_error("measurement csv line " + std::to_string(lineno) +
                                     ": expected 5 columns, got " + std::to_string(cols.size()));
        Sample smp;
        smp.drive = detail::parse_number(cols[0], "drive @line " + std::to_string(lineno));
        DriveKind dk = csvio::parse_drive_unit(cols[1], lineno);
        smp.response = detail::parse_number(cols[2], "response @line " + std::to_string(lineno));
        ResponseKind rk = csvio::parse_response_unit(cols[3], lineno);
        smp.sigma = detail::parse_number(cols[4], "sigma @line " + std::to_string(lineno));
        if (!units_locked) {
            meta.drive_kind = dk;
            meta.response_kind = rk;
            units_locked = true;
        } else if (dk != meta.drive_kind || rk != meta.response_kind) {
            throw std::runtime_error("measurement csv line " + std::to_string(lineno) +
                                     ": units must be homogeneous within a series");
        }
        series.samples.push_back(smp);
    }
    if (!header_seen)
        throw std::runtime_error("measurement csv: missing header");
    series.meta = meta;
    series.validate();
    return series;
}

inline MeasurementSeries read_measurement_csv_file(const std::string& path, SeriesMeta meta) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measurement csv: " + path);
    return read_measurement_csv(in, meta);
}

inline void write_measurement_csv(std::ostream& out, const MeasurementSeries& s) {
    out << "drive,drive_unit,response,response_unit,sigma\n";
    out.precision(12);
    for (const auto& smp : s.samples) {
        out << smp.drive << ',' << to_string(s.meta.drive_kind) << ',' << smp.response << ','
            << to_string(s.meta.response_kind) << ',' << smp.sigma << '\n';
    }
}

} // namespace subphot

#endif
