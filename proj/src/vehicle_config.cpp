#include "tiltwing/vehicle.hpp"
#include "tiltwing/state_io.hpp"

#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace tiltwing {

namespace {

std::string where(const YAML::Node& n)
{
    const auto m = n.Mark();
    if (m.line < 0) {
        return "";
    }
    return " (line " + std::to_string(m.line + 1) + ")";
}

YAML::Node child(const YAML::Node& parent, const std::string& key, const std::string& path)
{
    YAML::Node n = parent[key];
    if (!n) {
        throw ConfigError("missing required field '" + path + key + "'" + where(parent));
    }
    return n;
}

double as_double(const YAML::Node& n, const std::string& field)
{
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        throw ConfigError("field '" + field + "' is not a number" + where(n));
    }
}

double number(const YAML::Node& parent, const std::string& key, const std::string& path)
{
    return as_double(child(parent, key, path), path + key);
}

/// Angles may be given in radians (`key`) or degrees (`key_deg`).
double angle(const YAML::Node& parent, const std::string& key, const std::string& path)
{
    if (YAML::Node d = parent[key + "_deg"]) {
        return deg2rad(as_double(d, path + key + "_deg"));
    }
    return number(parent, key, path);
}

double angle_or(const YAML::Node& parent, const std::string& key, const std::string& path, double fallback)
{
    if (!parent[key] && !parent[key + "_deg"]) {
        return fallback;
    }
    return angle(parent, key, path);
}

double number_or(const YAML::Node& parent, const std::string& key, const std::string& path, double fallback)
{
    if (YAML::Node n = parent[key]) {
        return as_double(n, path + key);
    }
    return fallback;
}

Vec3 vec3(const YAML::Node& parent, const std::string& key, const std::string& path)
{
    const YAML::Node n = child(parent, key, path);
    if (!n.IsSequence() || n.size() != 3) {
        throw ConfigError("field '" + path + key + "' must be a list of 3 numbers" + where(n));
    }
    return {as_double(n[0], path + key + "[0]"), as_double(n[1], path + key + "[1]"),
            as_double(n[2], path + key + "[2]")};
}

std::string text(const YAML::Node& parent, const std::string& key, const std::string& path)
{
    const YAML::Node n = child(parent, key, path);
    if (!n.IsScalar()) {
        throw ConfigError("field '" + path + key + "' must be a string" + where(n));
    }
    return n.as<std::string>();
}

SurfaceBinding parse_surface(const std::string& s, const std::string& field)
{
    if (s == "none") return SurfaceBinding::None;
    if (s == "aileron_left") return SurfaceBinding::AileronLeft;
    if (s == "aileron_right") return SurfaceBinding::AileronRight;
    if (s == "elevator") return SurfaceBinding::Elevator;
    if (s == "rudder") return SurfaceBinding::Rudder;
    throw ConfigError("field '" + field + "' has unknown surface '" + s + "'");
}

const char* surface_name(SurfaceBinding s)
{
    switch (s) {
    case SurfaceBinding::None: return "none";
    case SurfaceBinding::AileronLeft: return "aileron_left";
    case SurfaceBinding::AileronRight: return "aileron_right";
    case SurfaceBinding::Elevator: return "elevator";
    case SurfaceBinding::Rudder: return "rudder";
    }
    return "none";
}

PropellerParams parse_propeller(const YAML::Node& n, const std::string& path)
{
    PropellerParams p;
    p.name = text(n, "name", path);
    const std::string mount = text(n, "mount", path);
    if (mount == "wing") {
        p.mount = PropellerMount::Wing;
    } else if (mount == "tail") {
        p.mount = PropellerMount::Tail;
    } else {
        throw ConfigError("field '" + path + "mount' must be 'wing' or 'tail'" + where(n));
    }
    p.hub = vec3(n, "hub", path);
    p.axis = vec3(n, "axis", path);
    p.diameter = number(n, "diameter", path);
    p.ct0 = number(n, "ct0", path);
    p.ct1 = number(n, "ct1", path);
    p.cq0 = number(n, "cq0", path);
    p.cq1 = number(n, "cq1", path);
    p.normal_coeff = number(n, "normal_coeff", path);
    p.handedness = number(n, "handedness", path);
    p.eta_max = number(n, "eta_max", path);
    return p;
}

AirfoilSegmentParams parse_segment(const YAML::Node& n, const std::string& path,
                                   const std::vector<PropellerParams>& props)
{
    AirfoilSegmentParams s;
    s.name = text(n, "name", path);
    const std::string mount = text(n, "mount", path);
    if (mount == "wing") {
        s.mount = SegmentMount::Wing;
    } else if (mount == "body") {
        s.mount = SegmentMount::Body;
    } else {
        throw ConfigError("field '" + path + "mount' must be 'wing' or 'body'" + where(n));
    }
    s.position = vec3(n, "position", path);
    s.chord_axis = vec3(n, "chord_axis", path);
    s.span_axis = vec3(n, "span_axis", path);
    s.chord = number(n, "chord", path);
    s.span = number(n, "span", path);
    s.cl0 = number(n, "cl0", path);
    s.cl_alpha = number(n, "cl_alpha", path);
    s.cl_delta = number_or(n, "cl_delta", path, 0.0);
    s.cd0 = number(n, "cd0", path);
    s.cd_alpha2 = number(n, "cd_alpha2", path);
    s.cm0 = number(n, "cm0", path);
    s.cm_alpha = number(n, "cm_alpha", path);
    s.cm_delta = number_or(n, "cm_delta", path, 0.0);
    s.stall_neg = angle(n, "stall_neg", path);
    s.stall_pos = angle(n, "stall_pos", path);
    s.fp_cl45 = number(n, "fp_cl45", path);
    s.fp_cd_min = number(n, "fp_cd_min", path);
    s.fp_cd90 = number(n, "fp_cd90", path);
    s.fp_cm_max = number(n, "fp_cm_max", path);
    s.blend_half_width = angle_or(n, "blend_half_width", path, deg2rad(5.0));
    s.surface = parse_surface(n["surface"] ? n["surface"].as<std::string>() : "none", path + "surface");
    const std::string slip = n["slipstream"] ? n["slipstream"].as<std::string>() : "none";
    s.slipstream = -1;
    if (slip != "none") {
        for (std::size_t i = 0; i < props.size(); ++i) {
            if (props[i].name == slip) {
                s.slipstream = static_cast<int>(i);
            }
        }
        if (s.slipstream < 0) {
            throw ConfigError("field '" + path + "slipstream' names unknown propeller '" + slip + "'" +
                              where(n["slipstream"]));
        }
    }
    return s;
}

VehicleParams parse_root(const YAML::Node& root)
{
    if (!root.IsMap()) {
        throw ConfigError("vehicle config must be a mapping at top level");
    }
    VehicleParams v;
    v.mass = number(root, "mass", "");
    const YAML::Node inertia = child(root, "inertia", "");
    if (!inertia.IsSequence() || inertia.size() != 3) {
        throw ConfigError("field 'inertia' must be a 3x3 nested list" + where(inertia));
    }
    for (int r = 0; r < 3; ++r) {
        if (!inertia[r].IsSequence() || inertia[r].size() != 3) {
            throw ConfigError("field 'inertia' must be a 3x3 nested list" + where(inertia[r]));
        }
        for (int c = 0; c < 3; ++c) {
            v.inertia(r, c) = as_double(inertia[r][c], "inertia");
        }
    }
    v.gravity = vec3(root, "gravity", "");
    v.air_density = number(root, "air_density", "");
    v.wing_pivot = vec3(root, "wing_pivot", "");

    const YAML::Node act = child(root, "actuators", "");
    v.limits.wing_tilt_max = angle(act, "wing_tilt_max", "actuators.");
    v.limits.wing_tilt_up_time = number(act, "wing_tilt_up_time", "actuators.");
    v.limits.wing_tilt_down_time = number(act, "wing_tilt_down_time", "actuators.");
    v.limits.aileron_max = angle(act, "aileron_max", "actuators.");
    v.limits.elevator_max = angle(act, "elevator_max", "actuators.");
    v.limits.rudder_max = angle(act, "rudder_max", "actuators.");
    v.limits.tail_tilt_max = angle(act, "tail_tilt_max", "actuators.");

    const YAML::Node fus = child(root, "fuselage", "");
    v.fuselage.cd_x = number(fus, "cd_x", "fuselage.");
    v.fuselage.cd_y = number(fus, "cd_y", "fuselage.");
    v.fuselage.cd_z = number(fus, "cd_z", "fuselage.");

    const YAML::Node props = child(root, "propellers", "");
    if (!props.IsSequence()) {
        throw ConfigError("field 'propellers' must be a list" + where(props));
    }
    for (std::size_t i = 0; i < props.size(); ++i) {
        v.propellers.push_back(parse_propeller(props[i], "propellers[" + std::to_string(i) + "]."));
    }
    const YAML::Node segs = child(root, "segments", "");
    if (!segs.IsSequence()) {
        throw ConfigError("field 'segments' must be a list" + where(segs));
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        v.segments.push_back(parse_segment(segs[i], "segments[" + std::to_string(i) + "].", v.propellers));
    }
    validate(v);
    return v;
}

void emit_vec3(YAML::Emitter& e, const Vec3& v)
{
    e << YAML::Flow << YAML::BeginSeq << v.x() << v.y() << v.z() << YAML::EndSeq;
}

}  // namespace

VehicleParams parse_vehicle_config(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& ex) {
        throw ConfigError("parse error at line " + std::to_string(ex.mark.line + 1) + ", column " +
                          std::to_string(ex.mark.column + 1) + ": " + ex.msg);
    }
    return parse_root(root);
}

VehicleParams load_vehicle_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open vehicle config '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_vehicle_config(ss.str());
    } catch (const ConfigError& ex) {
        throw ConfigError(path.string() + ": " + ex.what());
    }
}

std::string serialize_vehicle_config(const VehicleParams& p)
{
    YAML::Emitter e;
    e.SetDoublePrecision(17);
    e << YAML::BeginMap;
    e << YAML::Key << "mass" << YAML::Value << p.mass;
    e << YAML::Key << "inertia" << YAML::Value << YAML::BeginSeq;
    for (int r = 0; r < 3; ++r) {
        emit_vec3(e, p.inertia.row(r).transpose());
    }
    e << YAML::EndSeq;
    e << YAML::Key << "gravity" << YAML::Value;
    emit_vec3(e, p.gravity);
    e << YAML::Key << "air_density" << YAML::Value << p.air_density;
    e << YAML::Key << "wing_pivot" << YAML::Value;
    emit_vec3(e, p.wing_pivot);

    e << YAML::Key << "actuators" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "wing_tilt_max" << YAML::Value << p.limits.wing_tilt_max;
    e << YAML::Key << "wing_tilt_up_time" << YAML::Value << p.limits.wing_tilt_up_time;
    e << YAML::Key << "wing_tilt_down_time" << YAML::Value << p.limits.wing_tilt_down_time;
    e << YAML::Key << "aileron_max" << YAML::Value << p.limits.aileron_max;
    e << YAML::Key << "elevator_max" << YAML::Value << p.limits.elevator_max;
    e << YAML::Key << "rudder_max" << YAML::Value << p.limits.rudder_max;
    e << YAML::Key << "tail_tilt_max" << YAML::Value << p.limits.tail_tilt_max;
    e << YAML::EndMap;

    e << YAML::Key << "fuselage" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "cd_x" << YAML::Value << p.fuselage.cd_x;
    e << YAML::Key << "cd_y" << YAML::Value << p.fuselage.cd_y;
    e << YAML::Key << "cd_z" << YAML::Value << p.fuselage.cd_z;
    e << YAML::EndMap;

    e << YAML::Key << "propellers" << YAML::Value << YAML::BeginSeq;
    for (const auto& pr : p.propellers) {
        e << YAML::BeginMap;
        e << YAML::Key << "name" << YAML::Value << pr.name;
        e << YAML::Key << "mount" << YAML::Value << (pr.mount == PropellerMount::Wing ? "wing" : "tail");
        e << YAML::Key << "hub" << YAML::Value;
        emit_vec3(e, pr.hub);
        e << YAML::Key << "axis" << YAML::Value;
        emit_vec3(e, pr.axis);
        e << YAML::Key << "diameter" << YAML::Value << pr.diameter;
        e << YAML::Key << "ct0" << YAML::Value << pr.ct0;
        e << YAML::Key << "ct1" << YAML::Value << pr.ct1;
        e << YAML::Key << "cq0" << YAML::Value << pr.cq0;
        e << YAML::Key << "cq1" << YAML::Value << pr.cq1;
        e << YAML::Key << "normal_coeff" << YAML::Value << pr.normal_coeff;
        e << YAML::Key << "handedness" << YAML::Value << pr.handedness;
        e << YAML::Key << "eta_max" << YAML::Value << pr.eta_max;
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;

    e << YAML::Key << "segments" << YAML::Value << YAML::BeginSeq;
    for (const auto& s : p.segments) {
        e << YAML::BeginMap;
        e << YAML::Key << "name" << YAML::Value << s.name;
        e << YAML::Key << "mount" << YAML::Value << (s.mount == SegmentMount::Wing ? "wing" : "body");
        e << YAML::Key << "position" << YAML::Value;
        emit_vec3(e, s.position);
        e << YAML::Key << "chord_axis" << YAML::Value;
        emit_vec3(e, s.chord_axis);
        e << YAML::Key << "span_axis" << YAML::Value;
        emit_vec3(e, s.span_axis);
        e << YAML::Key << "chord" << YAML::Value << s.chord;
        e << YAML::Key << "span" << YAML::Value << s.span;
        e << YAML::Key << "cl0" << YAML::Value << s.cl0;
        e << YAML::Key << "cl_alpha" << YAML::Value << s.cl_alpha;
        e << YAML::Key << "cl_delta" << YAML::Value << s.cl_delta;
        e << YAML::Key << "cd0" << YAML::Value << s.cd0;
        e << YAML::Key << "cd_alpha2" << YAML::Value << s.cd_alpha2;
        e << YAML::Key << "cm0" << YAML::Value << s.cm0;
        e << YAML::Key << "cm_alpha" << YAML::Value << s.cm_alpha;
        e << YAML::Key << "cm_delta" << YAML::Value << s.cm_delta;
        e << YAML::Key << "stall_neg" << YAML::Value << s.stall_neg;
        e << YAML::Key << "stall_pos" << YAML::Value << s.stall_pos;
        e << YAML::Key << "fp_cl45" << YAML::Value << s.fp_cl45;
        e << YAML::Key << "fp_cd_min" << YAML::Value << s.fp_cd_min;
        e << YAML::Key << "fp_cd90" << YAML::Value << s.fp_cd90;
        e << YAML::Key << "fp_cm_max" << YAML::Value << s.fp_cm_max;
        e << YAML::Key << "blend_half_width" << YAML::Value << s.blend_half_width;
        e << YAML::Key << "surface" << YAML::Value << surface_name(s.surface);
        e << YAML::Key << "slipstream" << YAML::Value
          << (s.slipstream < 0 ? std::string("none") : p.propellers[s.slipstream].name);
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

void save_vehicle_config(const VehicleParams& p, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write vehicle config '" + path.string() + "'");
    }
    out << serialize_vehicle_config(p);
}

namespace {

std::string read_text(const std::filesystem::path& path, const char* what)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(std::string("cannot open ") + what + " '" + path.string() + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

YAML::Node load_yaml(const std::string& text)
{
    try {
        YAML::Node root = YAML::Load(text);
        if (root.IsNull()) {
            return YAML::Node(YAML::NodeType::Map);
        }
        if (!root.IsMap()) {
            throw ConfigError("expected a mapping at the top level");
        }
        return root;
    } catch (const YAML::Exception& ex) {
        throw ConfigError(std::string("YAML error: ") + ex.what());
    }
}

Vec3 optional_vec3(const YAML::Node& root, const std::string& key, double scale = 1.0)
{
    const YAML::Node n = root[key];
    if (!n) {
        return Vec3::Zero();
    }
    if (!n.IsSequence() || n.size() != 3) {
        throw ConfigError("field '" + key + "' must be a list of 3 numbers" + where(n));
    }
    return Vec3(as_double(n[0], key), as_double(n[1], key), as_double(n[2], key)) * scale;
}

}  // namespace

StateInput parse_state_yaml(const std::string& text)
{
    const YAML::Node root = load_yaml(text);
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (key != "position" && key != "velocity" && key != "attitude" && key != "attitude_deg" &&
            key != "body_rate" && key != "wind") {
            throw ConfigError("unknown state field '" + key + "'");
        }
    }
    StateInput in;
    in.state.position = optional_vec3(root, "position");
    in.state.velocity = optional_vec3(root, "velocity");
    const Vec3 euler = root["attitude_deg"] ? optional_vec3(root, "attitude_deg", kPi / 180.0)
                                            : optional_vec3(root, "attitude");
    in.state.attitude = rotation_from_euler(euler.x(), euler.y(), euler.z());
    in.state.body_rate = optional_vec3(root, "body_rate");
    in.wind = optional_vec3(root, "wind");
    return in;
}

StateInput load_state(const std::filesystem::path& path)
{
    return parse_state_yaml(read_text(path, "state file"));
}

ActuatorCommands parse_actuators_yaml(const std::string& text)
{
    const YAML::Node root = load_yaml(text);
    ActuatorCommands c;
    const std::pair<const char*, double*> fields[] = {
        {"wing", &c.wing},         {"prop_left", &c.prop_left},         {"prop_right", &c.prop_right},
        {"prop_tail", &c.prop_tail}, {"aileron_left", &c.aileron_left}, {"aileron_right", &c.aileron_right},
        {"elevator", &c.elevator}, {"rudder", &c.rudder},               {"tail_tilt", &c.tail_tilt}};
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        bool known = false;
        for (const auto& [name, dst] : fields) {
            if (key == name) {
                *dst = as_double(kv.second, key);
                known = true;
            }
        }
        if (!known) {
            throw ConfigError("unknown actuator field '" + key + "'");
        }
    }
    return c;
}

ActuatorCommands load_actuators(const std::filesystem::path& path)
{
    return parse_actuators_yaml(read_text(path, "actuator file"));
}

}  // namespace tiltwing
