#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "tiltwing/harness.hpp"

namespace tiltwing {

namespace {

std::string trim_ws(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string field;
    while (std::getline(is, field, sep)) {
        out.push_back(trim_ws(field));
    }
    return out;
}

double number(const std::string& s, const std::string& where)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw ScenarioError(where + ": bad number '" + s + "'");
    }
}

std::vector<double> numbers(const std::string& s, std::size_t n, const std::string& where)
{
    const auto parts = split(s, ',');
    if (parts.size() != n) {
        throw ScenarioError(where + ": expected " + std::to_string(n) + " values");
    }
    std::vector<double> v;
    for (const auto& part : parts) {
        v.push_back(number(part, where));
    }
    return v;
}

Vec3 vec3(const std::string& s, const std::string& where)
{
    const auto v = numbers(s, 3, where);
    return {v[0], v[1], v[2]};
}

const std::set<std::string>& allowed_columns(ControlMode m)
{
    static const std::set<std::string> open_loop{"wing",    "throttle", "flaperon", "elevator", "tail_throttle",
                                                 "aileron", "rudder",   "tail_tilt"};
    static const std::set<std::string> attitude{"roll_deg", "pitch_deg", "yaw_rate_deg", "wing", "throttle"};
    static const std::set<std::string> cruise{"vx", "vz", "roll_deg"};
    switch (m) {
    case ControlMode::OpenLoop:
        return open_loop;
    case ControlMode::Attitude:
        return attitude;
    case ControlMode::Cruise:
        break;
    }
    return cruise;
}

}  // namespace

const char* mode_name(ControlMode m)
{
    switch (m) {
    case ControlMode::OpenLoop:
        return "open_loop";
    case ControlMode::Attitude:
        return "attitude";
    case ControlMode::Cruise:
        break;
    }
    return "cruise";
}

bool Timeline::has(const std::string& column) const
{
    return std::find(columns.begin(), columns.end(), column) != columns.end();
}

double Timeline::value(const std::string& column, double t) const
{
    const auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end() || times.empty()) {
        throw ScenarioError("timeline has no column '" + column + "'");
    }
    const auto c = static_cast<std::size_t>(it - columns.begin());
    const auto next = std::upper_bound(times.begin(), times.end(), t);
    if (next == times.begin()) {
        return rows.front()[c];
    }
    const auto k = static_cast<std::size_t>(next - times.begin()) - 1;
    if (!linear[c] || k + 1 >= times.size()) {
        return rows[k][c];
    }
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    return rows[k][c] + w * (rows[k + 1][c] - rows[k][c]);
}

std::vector<double> Timeline::changes(const std::string& column) const
{
    std::vector<double> out;
    const auto it = std::find(columns.begin(), columns.end(), column);
    if (it == columns.end()) {
        return out;
    }
    const auto c = static_cast<std::size_t>(it - columns.begin());
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k][c] != rows[k - 1][c]) {
            out.push_back(times[k]);
        }
    }
    return out;
}

Vec3 Scenario::wind_at(double t) const
{
    Vec3 w = wind;
    for (const WindStep& g : gusts) {
        if (t >= g.time) {
            w = g.wind;
        }
    }
    return w;
}

Scenario parse_scenario(const std::string& text)
{
    Scenario sc;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    bool in_timeline = false;
    bool have_header = false;
    bool have_mode = false;
    bool have_duration = false;
    std::vector<std::string> linear_columns;

    while (std::getline(is, raw)) {
        ++line_no;
        const std::string where = "scenario line " + std::to_string(line_no);
        std::string line = raw.substr(0, raw.find('#'));
        line = trim_ws(line);
        if (line.empty()) {
            continue;
        }
        if (line == "[timeline]") {
            in_timeline = true;
            continue;
        }
        if (in_timeline) {
            const auto fields = split(line, ',');
            if (!have_header) {
                if (fields.empty() || fields.front() != "t") {
                    throw ScenarioError(where + ": timeline header must start with 't'");
                }
                sc.timeline.columns.assign(fields.begin() + 1, fields.end());
                have_header = true;
                continue;
            }
            if (fields.size() != sc.timeline.columns.size() + 1) {
                throw ScenarioError(where + ": expected " + std::to_string(sc.timeline.columns.size() + 1) +
                                    " fields");
            }
            const double t = number(fields.front(), where);
            if (!sc.timeline.times.empty() && !(t > sc.timeline.times.back())) {
                throw ScenarioError(where + ": timestamps must be strictly increasing");
            }
            std::vector<double> row;
            for (std::size_t k = 1; k < fields.size(); ++k) {
                row.push_back(number(fields[k], where));
            }
            sc.timeline.times.push_back(t);
            sc.timeline.rows.push_back(std::move(row));
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ScenarioError(where + ": expected 'key = value'");
        }
        const std::string key = trim_ws(line.substr(0, eq));
        const std::string value = trim_ws(line.substr(eq + 1));
        if (key == "name") {
            sc.name = value;
        } else if (key == "mode") {
            if (value == "open_loop") {
                sc.mode = ControlMode::OpenLoop;
            } else if (value == "attitude") {
                sc.mode = ControlMode::Attitude;
            } else if (value == "cruise") {
                sc.mode = ControlMode::Cruise;
            } else {
                throw ScenarioError(where + ": unknown mode '" + value + "'");
            }
            have_mode = true;
        } else if (key == "duration") {
            sc.duration = number(value, where);
            have_duration = true;
        } else if (key == "position") {
            sc.position = vec3(value, where);
        } else if (key == "velocity") {
            sc.velocity = vec3(value, where);
        } else if (key == "attitude_deg") {
            sc.euler = vec3(value, where) * kPi / 180.0;
        } else if (key == "body_rate") {
            sc.body_rate = vec3(value, where);
        } else if (key == "trim_init") {
            if (value != "true" && value != "false") {
                throw ScenarioError(where + ": trim_init must be true or false");
            }
            sc.trim_init = value == "true";
        } else if (key == "wind") {
            sc.wind = vec3(value, where);
        } else if (key == "gust") {
            const auto v = numbers(value, 4, where);
            if (!sc.gusts.empty() && !(v[0] > sc.gusts.back().time)) {
                throw ScenarioError(where + ": gust times must be strictly increasing");
            }
            sc.gusts.push_back({v[0], {v[1], v[2], v[3]}});
        } else if (key == "linear") {
            linear_columns = split(value, ',');
        } else {
            throw ScenarioError(where + ": unknown key '" + key + "'");
        }
    }

    if (!have_mode) {
        throw ScenarioError("scenario: missing 'mode'");
    }
    if (!have_duration || !(sc.duration > 0.0)) {
        throw ScenarioError("scenario: duration must be > 0");
    }
    const auto& allowed = allowed_columns(sc.mode);
    for (const auto& c : sc.timeline.columns) {
        if (allowed.count(c) == 0) {
            throw ScenarioError("scenario: column '" + c + "' is not valid in " + mode_name(sc.mode) + " mode");
        }
    }
    if (std::set<std::string>(sc.timeline.columns.begin(), sc.timeline.columns.end()).size() !=
        sc.timeline.columns.size()) {
        throw ScenarioError("scenario: duplicate timeline column");
    }
    sc.timeline.linear.assign(sc.timeline.columns.size(), false);
    for (const auto& c : linear_columns) {
        const auto it = std::find(sc.timeline.columns.begin(), sc.timeline.columns.end(), c);
        if (it == sc.timeline.columns.end()) {
            throw ScenarioError("scenario: linear column '" + c + "' is not in the timeline");
        }
        sc.timeline.linear[static_cast<std::size_t>(it - sc.timeline.columns.begin())] = true;
    }
    if (sc.mode == ControlMode::Cruise && (!sc.timeline.has("vx") || !sc.timeline.has("vz"))) {
        throw ScenarioError("scenario: cruise mode needs vx and vz timeline columns");
    }
    if (sc.mode != ControlMode::OpenLoop && sc.timeline.times.empty()) {
        throw ScenarioError("scenario: timeline is empty");
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream f(path);
    if (!f) {
        throw ScenarioError("cannot open scenario '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << f.rdbuf();
    Scenario sc = parse_scenario(ss.str());
    if (sc.name.empty()) {
        sc.name = path.stem().string();
    }
    return sc;
}

}  // namespace tiltwing
