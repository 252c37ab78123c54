#pragma once

#include <string>
#include <vector>

#include "tiltwing/vehicle.hpp"

namespace tiltwing {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      // worst observed error
    double tolerance = 0.0;
    std::string detail;
};

/// Invariant suites behind `tiltwing check`. Random cases come from a fixed seed.
CheckResult check_jacobian(const VehicleParams& p);
CheckResult check_allocation_accounting(const VehicleParams& p, int cases = 200);
CheckResult check_orthonormality(const VehicleParams& p, int steps = 10000);
CheckResult check_stall_blend(const VehicleParams& p);

std::vector<CheckResult> run_checks(const VehicleParams& p);

}  // namespace tiltwing
