#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "tiltwing/trim.hpp"

namespace tiltwing {

namespace {

// Fractional position of v on a uniform axis, clamped to the axis.
double locate(const std::vector<double>& axis, double v, bool& clamped)
{
    if (axis.size() == 1) {
        clamped = clamped || v != axis.front();
        return 0.0;
    }
    const double lo = axis.front();
    const double hi = axis.back();
    if (v < lo || v > hi) {
        clamped = true;
        v = std::clamp(v, lo, hi);
    }
    const double step = (hi - lo) / static_cast<double>(axis.size() - 1);
    return (v - lo) / step;
}

double axis_step(const std::vector<double>& axis)
{
    return axis.size() > 1 ? (axis.back() - axis.front()) / static_cast<double>(axis.size() - 1) : 1.0;
}

}  // namespace

TrimLookup lookup_trim(const TrimMap& map, double airspeed, double gamma)
{
    if (map.cells.empty() || map.feasible_count() == 0) {
        throw TrimError("trim map has no feasible cells");
    }
    TrimLookup out;
    const double fi = locate(map.airspeeds, airspeed, out.clamped);
    const double fj = locate(map.gammas, gamma, out.clamped);
    const auto i0 = std::min(static_cast<std::size_t>(std::floor(fi)), map.rows() > 1 ? map.rows() - 2 : 0);
    const auto j0 = std::min(static_cast<std::size_t>(std::floor(fj)), map.cols() > 1 ? map.cols() - 2 : 0);
    const std::size_t i1 = std::min(i0 + 1, map.rows() - 1);
    const std::size_t j1 = std::min(j0 + 1, map.cols() - 1);
    const double ti = map.rows() > 1 ? fi - static_cast<double>(i0) : 0.0;
    const double tj = map.cols() > 1 ? fj - static_cast<double>(j0) : 0.0;

    const TrimPoint& c00 = map.at(i0, j0);
    const TrimPoint& c01 = map.at(i0, j1);
    const TrimPoint& c10 = map.at(i1, j0);
    const TrimPoint& c11 = map.at(i1, j1);
    if (c00.feasible && c01.feasible && c10.feasible && c11.feasible) {
        const Vec6 v = (1.0 - ti) * ((1.0 - tj) * c00.x.to_vector() + tj * c01.x.to_vector()) +
                       ti * ((1.0 - tj) * c10.x.to_vector() + tj * c11.x.to_vector());
        out.x = TrimVariables::from_vector(v);
        return out;
    }

    out.fallback = true;
    const double va = map.airspeeds.front() + fi * axis_step(map.airspeeds);
    const double g = map.gammas.front() + fj * axis_step(map.gammas);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < map.rows(); ++i) {
        for (std::size_t j = 0; j < map.cols(); ++j) {
            const TrimPoint& c = map.at(i, j);
            if (!c.feasible) {
                continue;
            }
            const double di = (map.airspeeds[i] - va) / axis_step(map.airspeeds);
            const double dj = (map.gammas[j] - g) / axis_step(map.gammas);
            const double d = di * di + dj * dj;
            if (d < best) {
                best = d;
                out.x = c.x;
            }
        }
    }
    return out;
}

std::string trim_map_csv(const TrimMap& map)
{
    std::ostringstream os;
    os << "va,gamma,feasible,theta_t,delta_w,delta_plr,delta_al,delta_e,delta_pt,cost,res_v,res_th\n";
    os << std::setprecision(17);
    for (const TrimPoint& c : map.cells) {
        os << c.airspeed << ',' << c.gamma << ',' << (c.feasible ? 1 : 0) << ',' << c.x.pitch << ','
           << c.x.wing << ',' << c.x.main_throttle << ',' << c.x.flaperon << ',' << c.x.elevator << ','
           << c.x.tail_throttle << ',' << c.cost << ',' << c.accel_residual << ',' << c.pitch_accel_residual
           << '\n';
    }
    return os.str();
}

void write_trim_map_csv(const TrimMap& map, const std::filesystem::path& path)
{
    std::ofstream f(path);
    if (!f) {
        throw TrimError("cannot write trim map '" + path.string() + "'");
    }
    f << trim_map_csv(map);
    if (!f) {
        throw TrimError("failed writing trim map '" + path.string() + "'");
    }
}

TrimMap parse_trim_map_csv(const std::string& text)
{
    static const std::string kHeader =
        "va,gamma,feasible,theta_t,delta_w,delta_plr,delta_al,delta_e,delta_pt,cost,res_v,res_th";
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) {
        throw TrimError("trim map is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kHeader) {
        throw TrimError("unexpected trim map header: '" + line + "'");
    }
    std::vector<TrimPoint> points;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> v;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(field, &used));
                if (used != field.size()) {
                    throw std::invalid_argument(field);
                }
            } catch (const std::exception&) {
                throw TrimError("trim map line " + std::to_string(line_no) + ": bad number '" + field + "'");
            }
        }
        if (v.size() != 12) {
            throw TrimError("trim map line " + std::to_string(line_no) + ": expected 12 fields, got " +
                            std::to_string(v.size()));
        }
        TrimPoint t;
        t.airspeed = v[0];
        t.gamma = v[1];
        t.feasible = v[2] != 0.0;
        t.x.pitch = v[3];
        t.x.wing = v[4];
        t.x.main_throttle = v[5];
        t.x.flaperon = v[6];
        t.x.elevator = v[7];
        t.x.tail_throttle = v[8];
        t.cost = v[9];
        t.accel_residual = v[10];
        t.pitch_accel_residual = v[11];
        t.objective = t.cost;
        t.solved = true;
        points.push_back(t);
    }
    if (points.empty()) {
        throw TrimError("trim map has no rows");
    }

    TrimMap map;
    for (const TrimPoint& t : points) {
        map.airspeeds.push_back(t.airspeed);
        map.gammas.push_back(t.gamma);
    }
    for (auto* axis : {&map.airspeeds, &map.gammas}) {
        std::sort(axis->begin(), axis->end());
        axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
    }
    if (points.size() != map.rows() * map.cols()) {
        throw TrimError("trim map is not a complete grid: " + std::to_string(points.size()) + " rows for " +
                        std::to_string(map.rows()) + "x" + std::to_string(map.cols()) + " axes");
    }
    for (const auto* axis : {&map.airspeeds, &map.gammas}) {
        const double step = axis_step(*axis);
        for (std::size_t k = 1; k < axis->size(); ++k) {
            if (std::abs((*axis)[k] - (*axis)[k - 1] - step) > 1e-6 * std::max(1.0, std::abs(step))) {
                throw TrimError("trim map axis is not uniform");
            }
        }
    }
    map.cells.resize(points.size());
    std::vector<char> seen(points.size(), 0);
    for (const TrimPoint& t : points) {
        const auto i = static_cast<std::size_t>(
            std::lower_bound(map.airspeeds.begin(), map.airspeeds.end(), t.airspeed) - map.airspeeds.begin());
        const auto j = static_cast<std::size_t>(
            std::lower_bound(map.gammas.begin(), map.gammas.end(), t.gamma) - map.gammas.begin());
        const std::size_t k = i * map.cols() + j;
        if (seen[k] != 0) {
            throw TrimError("trim map has a duplicate cell");
        }
        seen[k] = 1;
        map.cells[k] = t;
    }
    return map;
}

TrimMap read_trim_map_csv(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) {
        throw TrimError("cannot open trim map '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_trim_map_csv(ss.str());
}

}  // namespace tiltwing
