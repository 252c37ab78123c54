#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "tiltwing/vehicle.hpp"

using namespace tiltwing;

namespace {

std::string default_config_text()
{
    std::ifstream in(std::string(TILTWING_SOURCE_DIR) + "/config/default_vehicle.yaml");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& yaml)
{
    try {
        parse_vehicle_config(yaml);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(VehicleConfig, ShippedDefaultLoads)
{
    const VehicleParams p = load_vehicle_config(std::string(TILTWING_SOURCE_DIR) + "/config/default_vehicle.yaml");
    EXPECT_DOUBLE_EQ(p.mass, 1.9);
    EXPECT_NEAR(p.wing_span(), 0.94, 1e-12);
    EXPECT_EQ(p.propellers.size(), 3u);
}

TEST(VehicleConfig, ShippedFileMatchesBuiltIn)
{
    const VehicleParams file = parse_vehicle_config(default_config_text());
    EXPECT_EQ(serialize_vehicle_config(file), serialize_vehicle_config(default_vehicle()));
}

TEST(VehicleConfig, RoundTrip)
{
    const VehicleParams p = default_vehicle();
    const VehicleParams q = parse_vehicle_config(serialize_vehicle_config(p));
    EXPECT_EQ(serialize_vehicle_config(q), serialize_vehicle_config(p));
    EXPECT_TRUE(q.inertia.isApprox(p.inertia));
    ASSERT_EQ(q.segments.size(), p.segments.size());
    for (std::size_t i = 0; i < p.segments.size(); ++i) {
        EXPECT_EQ(q.segments[i].surface, p.segments[i].surface);
        EXPECT_EQ(q.segments[i].slipstream, p.segments[i].slipstream);
        EXPECT_DOUBLE_EQ(q.segments[i].stall_pos, p.segments[i].stall_pos);
    }
}

TEST(VehicleConfig, NegativeMassRejected)
{
    const std::string text = std::regex_replace(default_config_text(), std::regex("mass: 1.9"), "mass: -1");
    EXPECT_NE(error_of(text).find("mass"), std::string::npos);
}

TEST(VehicleConfig, MissingFuselageRejected)
{
    const std::string text =
        std::regex_replace(default_config_text(), std::regex("fuselage:[^\\n]*\\n(  [^\\n]*\\n)+"), "");
    ASSERT_EQ(text.find("fuselage:"), std::string::npos);
    EXPECT_NE(error_of(text).find("fuselage"), std::string::npos);
}

TEST(VehicleConfig, UnknownSlipstreamRejected)
{
    const std::string text = std::regex_replace(default_config_text(), std::regex("slipstream: none"),
                                                "slipstream: nose", std::regex_constants::format_first_only);
    EXPECT_NE(error_of(text).find("slipstream"), std::string::npos);
}

TEST(VehicleConfig, SyntaxErrorReportsLine)
{
    EXPECT_NE(error_of("mass: [1.9\ninertia: 3").find("line"), std::string::npos);
}

TEST(VehicleConfig, MissingFileIsConfigError)
{
    EXPECT_THROW(load_vehicle_config("/nonexistent/vehicle.yaml"), ConfigError);
}

TEST(VehicleValidate, Invariants)
{
    VehicleParams p = default_vehicle();
    EXPECT_NO_THROW(validate(p));

    VehicleParams bad = p;
    bad.inertia(0, 1) = 0.01;  // asymmetric
    EXPECT_THROW(validate(bad), ConfigError);

    bad = p;
    bad.inertia(2, 2) = -0.1;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = p;
    bad.propellers.pop_back();
    EXPECT_THROW(validate(bad), ConfigError);

    bad = p;
    bad.propellers[0].diameter = 0.0;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = p;
    bad.segments[0].stall_neg = 0.1;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = p;
    bad.segments[0].chord = -0.1;
    EXPECT_THROW(validate(bad), ConfigError);

    bad = p;
    bad.segments[0].slipstream = 7;
    EXPECT_THROW(validate(bad), ConfigError);
}

TEST(Actuators, TiltUpRate)
{
    const VehicleParams p = default_vehicle();
    ActuatorSet a = actuate(nominal_commands(0.0, 0.0), p);
    a = apply_actuator_rates(a, nominal_commands(1.0, 0.0), 1.0, p);
    EXPECT_NEAR(rad2deg(a.wing_tilt), 18.0, 1e-9);
}

TEST(Actuators, TiltDownRate)
{
    const VehicleParams p = default_vehicle();
    ActuatorSet a = actuate(nominal_commands(1.0, 0.0), p);
    a = apply_actuator_rates(a, nominal_commands(0.0, 0.0), 1.0, p);
    EXPECT_NEAR(rad2deg(a.wing_tilt), 81.0, 1e-9);
}

TEST(Actuators, FixedPoint)
{
    const VehicleParams p = default_vehicle();
    const ActuatorCommands c = nominal_commands(0.4, 0.6);
    const ActuatorSet a = actuate(c, p);
    EXPECT_EQ(apply_actuator_rates(a, c, 0.7, p), a);
}

TEST(Actuators, TiltStopsAtCommand)
{
    const VehicleParams p = default_vehicle();
    ActuatorSet a = actuate(nominal_commands(0.0, 0.0), p);
    a = apply_actuator_rates(a, nominal_commands(0.1, 0.0), 10.0, p);
    EXPECT_NEAR(a.wing_tilt, 0.1 * p.limits.wing_tilt_max, 1e-12);
}

TEST(Actuators, OtherActuatorsImmediate)
{
    const VehicleParams p = default_vehicle();
    ActuatorCommands c;
    c.elevator = 0.5;
    c.prop_tail = 0.3;
    c.aileron_left = -0.2;
    const ActuatorSet a = apply_actuator_rates(actuate({}, p), c, 1e-3, p);
    EXPECT_NEAR(a.elevator, 0.5 * p.limits.elevator_max, 1e-15);
    EXPECT_NEAR(a.aileron_left, -0.2 * p.limits.aileron_max, 1e-15);
    EXPECT_NEAR(a.prop_speed[kPropTail], 0.3 * p.propellers[kPropTail].eta_max, 1e-12);
}

TEST(Actuators, CommandsClamped)
{
    ActuatorCommands c;
    c.wing = 1.4;
    c.prop_left = -0.2;
    c.elevator = -3.0;
    const ActuatorCommands k = c.clamped();
    EXPECT_EQ(k.wing, 1.0);
    EXPECT_EQ(k.prop_left, 0.0);
    EXPECT_EQ(k.elevator, -1.0);
}

TEST(Rotations, EulerRoundTrip)
{
    for (double roll : {-1.0, 0.0, 0.7}) {
        for (double pitch : {-1.2, 0.1, 1.3}) {
            for (double yaw : {-3.0, 0.5, 2.0}) {
                const Vec3 e = euler_from_rotation(rotation_from_euler(roll, pitch, yaw));
                EXPECT_NEAR(e.x(), roll, 1e-12);
                EXPECT_NEAR(e.y(), pitch, 1e-12);
                EXPECT_NEAR(e.z(), yaw, 1e-12);
            }
        }
    }
}

TEST(Rotations, PositivePitchRaisesNose)
{
    const Vec3 nose = rotation_from_euler(0.0, 0.3, 0.0) * Vec3::UnitX();
    EXPECT_LT(nose.z(), 0.0);  // NED: up is -z
}
