#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "robdiff/simulate.hpp"

// CSV formats used by the command line front end. Sample paths are stored as
//   index,time,value
// with one row per observation; the step h is recovered from the time column.

namespace robdiff {

// shortest-ish decimal form with the requested significant digits
inline std::string format_number(double x, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    return buf;
}

inline void write_path_csv(const SamplePath& path, std::ostream& out, int precision = 6) {
    out << "index,time,value\n";
    for (long i = 0; i <= path.n; ++i)
        out << i << ',' << format_number(i * path.h, precision) << ','
            << format_number(path.values[static_cast<std::size_t>(i)], precision) << '\n';
}

inline SamplePath read_path_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,time,value", 0) != 0)
        throw std::invalid_argument("read_path_csv: missing 'index,time,value' header");

    std::vector<double> times, values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        if (!std::getline(row, field, ',')) break;
        const long index = std::stol(field);
        if (index != static_cast<long>(times.size()))
            throw std::invalid_argument("read_path_csv: non-contiguous index column");
        if (!std::getline(row, field, ','))
            throw std::invalid_argument("read_path_csv: missing time field");
        times.push_back(std::stod(field));
        if (!std::getline(row, field, ','))
            throw std::invalid_argument("read_path_csv: missing value field");
        values.push_back(std::stod(field));
        if (!std::isfinite(values.back()))
            throw std::invalid_argument("read_path_csv: non-finite value");
    }
    if (values.size() < 2) throw std::invalid_argument("read_path_csv: need at least 2 rows");

    SamplePath path;
    path.n = static_cast<long>(values.size()) - 1;
    path.h = (times.back() - times.front()) / static_cast<double>(path.n);
    if (!(path.h > 0.0)) throw std::invalid_argument("read_path_csv: non-increasing time column");
    path.values = std::move(values);
    return path;
}

}  // namespace robdiff
