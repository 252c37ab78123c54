#include "tiltwing/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace tiltwing {

namespace {

double wrap(double a) { return std::remainder(a, 2.0 * kPi); }

double rms(const std::vector<double>& v)
{
    if (v.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s / static_cast<double>(v.size()));
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

std::vector<StepResponse> step_responses(const std::vector<double>& t, const std::vector<double>& y,
                                         const std::vector<double>& sp, double band)
{
    std::vector<std::size_t> idx;
    for (std::size_t k = 1; k < sp.size(); ++k) {
        if (sp[k] != sp[k - 1]) {
            idx.push_back(k);
        }
    }
    std::vector<StepResponse> out;
    for (std::size_t n = 0; n < idx.size(); ++n) {
        const std::size_t i = idx[n];
        const std::size_t end = n + 1 < idx.size() ? idx[n + 1] : sp.size();
        StepResponse r;
        r.time = t[i];
        r.size = sp[i] - sp[i - 1];
        const double tol = band * std::abs(r.size);
        const double dir = r.size >= 0.0 ? 1.0 : -1.0;
        std::size_t last_out = i;
        bool ever_out = false;
        double peak = 0.0;
        for (std::size_t k = i; k < end; ++k) {
            const double e = y[k] - sp[k];
            if (std::abs(e) > tol) {
                last_out = k;
                ever_out = true;
            }
            peak = std::max(peak, e * dir);
        }
        if (ever_out && last_out + 1 >= end) {
            r.settling = -1.0;
        } else {
            r.settling = ever_out ? t[last_out + 1] - r.time : 0.0;
        }
        r.overshoot = std::abs(r.size) > 0.0 ? peak / std::abs(r.size) : 0.0;
        out.push_back(r);
    }
    return out;
}

}  // namespace

double percentile(std::vector<double> values, double q)
{
    if (values.empty()) {
        return 0.0;
    }
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Report make_report(const LogTable& log, const ReportOptions& options)
{
    Report r;
    r.scenario = log.scenario;
    r.mode = log.mode;
    r.fault = log.fault.has_value();
    const std::size_t n = log.rows();
    if (n == 0) {
        throw ScenarioError("log is empty");
    }
    const auto& t = log.column("t");
    r.duration = t.back() - t.front();

    const auto& z = log.column("z");
    double hmin = -z.front();
    double hmax = -z.front();
    for (double zi : z) {
        hmin = std::min(hmin, -zi);
        hmax = std::max(hmax, -zi);
        r.altitude_excursion = std::max(r.altitude_excursion, std::abs(zi - z.front()));
    }
    r.altitude_band = hmax - hmin;

    if (log.mode == "open_loop") {
        return r;
    }

    const auto& roll = log.column("roll");
    const auto& pitch = log.column("pitch");
    const auto& roll_sp = log.column("roll_sp");
    const auto& pitch_sp = log.column("pitch_sp");
    std::vector<double> roll_err(n);
    std::vector<double> pitch_err(n);
    for (std::size_t k = 0; k < n; ++k) {
        roll_err[k] = wrap(roll[k] - roll_sp[k]);
        pitch_err[k] = std::abs(wrap(pitch[k] - pitch_sp[k]));
    }
    r.roll_rms = rms(roll_err);
    r.roll_max = max_abs(roll_err);
    r.pitch_rms = rms(pitch_err);
    r.pitch_max = max_abs(pitch_err);
    r.pitch_p90 = percentile(pitch_err, 0.9);

    if (log.mode != "cruise") {
        r.steps = step_responses(t, roll, roll_sp, options.settle_band);
        return r;
    }

    const auto& vx = log.column("v_ax");
    const auto& vz = log.column("v_az");
    const auto& vx_sp = log.column("vx_sp");
    const auto& vz_sp = log.column("vz_sp");
    const auto& d_t = log.column("delta_plr_t");
    const auto& d_n = log.column("delta_plr_n");
    std::vector<double> ex(n);
    std::vector<double> ez(n);
    std::vector<double> ez_steady;
    double ff = 0.0;
    double total = 0.0;
    double last_change = t.front();
    for (std::size_t k = 0; k < n; ++k) {
        ex[k] = vx[k] - vx_sp[k];
        ez[k] = vz[k] - vz_sp[k];
        if (k > 0 && vz_sp[k] != vz_sp[k - 1]) {
            last_change = t[k];
        }
        if (t[k] - last_change >= options.steady_after) {
            ++r.steady_rows;
            ez_steady.push_back(ez[k]);
            ff += std::abs(d_t[k]);
            total += std::abs(d_t[k]) + std::abs(d_n[k] - d_t[k]);
        }
    }
    r.vx_rms = rms(ex);
    r.vz_rms = rms(ez);
    r.vz_max = max_abs(ez);
    r.vz_steady_rms = rms(ez_steady);
    r.ff_ratio = total > 0.0 ? ff / total : 0.0;
    r.steps = step_responses(t, vz, vz_sp, options.settle_band);
    return r;
}

std::vector<std::pair<std::string, double>> Report::metrics() const
{
    std::vector<std::pair<std::string, double>> m{
        {"duration_s", duration},
        {"fault", fault ? 1.0 : 0.0},
        {"altitude_band_m", altitude_band},
        {"altitude_excursion_m", altitude_excursion},
        {"roll_rms_deg", rad2deg(roll_rms)},
        {"roll_max_deg", rad2deg(roll_max)},
        {"pitch_rms_deg", rad2deg(pitch_rms)},
        {"pitch_max_deg", rad2deg(pitch_max)},
        {"pitch_p90_deg", rad2deg(pitch_p90)},
    };
    if (mode == "cruise") {
        m.insert(m.end(), {{"vx_rms", vx_rms},
                           {"vz_rms", vz_rms},
                           {"vz_max", vz_max},
                           {"vz_steady_rms", vz_steady_rms},
                           {"ff_ratio", ff_ratio},
                           {"steady_rows", static_cast<double>(steady_rows)}});
    }
    double worst_settle = 0.0;
    double worst_overshoot = 0.0;
    for (const StepResponse& s : steps) {
        worst_settle = (s.settling < 0.0 || worst_settle < 0.0) ? -1.0 : std::max(worst_settle, s.settling);
        worst_overshoot = std::max(worst_overshoot, s.overshoot);
    }
    if (!steps.empty()) {
        m.insert(m.end(), {{"steps", static_cast<double>(steps.size())},
                           {"settling_max_s", worst_settle},
                           {"overshoot_max", worst_overshoot}});
    }
    return m;
}

std::string report_summary(const Report& r)
{
    std::ostringstream os;
    os << "scenario = " << r.scenario << '\n' << "mode = " << r.mode << '\n';
    os << std::setprecision(6);
    for (const auto& [k, v] : r.metrics()) {
        os << k << " = " << v << '\n';
    }
    for (const StepResponse& s : r.steps) {
        os << "step t=" << s.time << " size=" << s.size << " settling=" << s.settling
           << " overshoot=" << s.overshoot << '\n';
    }
    return os.str();
}

std::string report_csv(const Report& r)
{
    std::ostringstream os;
    os << "metric,value\n" << std::setprecision(12);
    for (const auto& [k, v] : r.metrics()) {
        os << k << ',' << v << '\n';
    }
    return os.str();
}

}  // namespace tiltwing
