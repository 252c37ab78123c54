#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tiltwing/harness.hpp"

namespace tiltwing {

struct ReportOptions {
    double steady_after = 4.0;     // s after a vertical-speed setpoint change before a row counts as steady
    double settle_band = 0.05;     // fraction of the step size
};

struct StepResponse {
    double time = 0.0;       // setpoint change time
    double size = 0.0;       // step size
    double settling = 0.0;   // s until the error stays inside the band; -1 if never
    double overshoot = 0.0;  // fraction of the step size
};

struct Report {
    std::string scenario;
    std::string mode;
    double duration = 0.0;
    bool fault = false;
    double altitude_band = 0.0;       // max - min altitude, m
    double altitude_excursion = 0.0;  // max |h - h0|, m
    double roll_rms = 0.0;            // rad
    double roll_max = 0.0;
    double pitch_rms = 0.0;
    double pitch_max = 0.0;
    double pitch_p90 = 0.0;
    double vx_rms = 0.0;              // cruise only, m/s
    double vz_rms = 0.0;
    double vz_max = 0.0;
    double vz_steady_rms = 0.0;
    double ff_ratio = 0.0;            // steady rows, sum|d_t| / sum(|d_t| + |d_c|)
    int steady_rows = 0;
    std::vector<StepResponse> steps;  // roll steps (attitude) or v_z steps (cruise)

    std::vector<std::pair<std::string, double>> metrics() const;
};

double percentile(std::vector<double> values, double q);

Report make_report(const LogTable& log, const ReportOptions& options = {});
std::string report_summary(const Report& r);
std::string report_csv(const Report& r);

}  // namespace tiltwing
