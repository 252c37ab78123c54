#pragma once

#include <filesystem>
#include <string>

#include "tiltwing/dynamics.hpp"

namespace tiltwing {

/// State file (YAML): position, velocity (inertial NED), attitude_deg or
/// attitude (roll, pitch, yaw), body_rate, wind. Missing keys default to zero.
struct StateInput {
    RigidBodyState state;
    Vec3 wind = Vec3::Zero();
};

StateInput parse_state_yaml(const std::string& text);
StateInput load_state(const std::filesystem::path& path);

/// Actuator file (YAML): normalized commands by name (wing, prop_left,
/// prop_right, prop_tail, aileron_left, aileron_right, elevator, rudder,
/// tail_tilt). Missing keys default to zero.
ActuatorCommands parse_actuators_yaml(const std::string& text);
ActuatorCommands load_actuators(const std::filesystem::path& path);

}  // namespace tiltwing
