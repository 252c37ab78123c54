#include "tiltwing/vehicle.hpp"

namespace tiltwing {

namespace {

// Literature-style airfoil values. None of these are identified on the real
// airframe; see config/default_vehicle.yaml.
AirfoilSegmentParams wing_segment(const std::string& name, double y, int slipstream,
                                  SurfaceBinding surface)
{
    AirfoilSegmentParams s;
    s.name = name;
    s.mount = SegmentMount::Wing;
    s.position = Vec3(0.0, y, 0.0);
    s.chord_axis = Vec3::UnitX();
    s.span_axis = Vec3::UnitY();
    s.chord = 0.2;
    s.span = 0.1175;
    s.cl0 = 0.05;
    s.cl_alpha = 4.5;
    s.cl_delta = surface == SurfaceBinding::None ? 0.0 : 1.8;
    s.cd0 = 0.015;
    s.cd_alpha2 = 1.2;
    s.cm0 = -0.02;
    s.cm_alpha = 0.0;
    s.cm_delta = surface == SurfaceBinding::None ? 0.0 : -0.4;
    s.stall_neg = deg2rad(-12.0);
    s.stall_pos = deg2rad(14.0);
    s.fp_cl45 = 1.0;
    s.fp_cd_min = 0.02;
    s.fp_cd90 = 1.2;
    s.fp_cm_max = 0.4;
    s.blend_half_width = deg2rad(5.0);
    s.surface = surface;
    s.slipstream = slipstream;
    return s;
}

AirfoilSegmentParams tail_segment(const std::string& name, const Vec3& pos, const Vec3& span_axis,
                                  double chord, double span, double cl_alpha, double cl_delta,
                                  double cm_delta, SurfaceBinding surface, int slipstream)
{
    AirfoilSegmentParams s;
    s.name = name;
    s.mount = SegmentMount::Body;
    s.position = pos;
    s.chord_axis = Vec3::UnitX();
    s.span_axis = span_axis;
    s.chord = chord;
    s.span = span;
    s.cl0 = 0.0;
    s.cl_alpha = cl_alpha;
    s.cl_delta = cl_delta;
    s.cd0 = 0.012;
    s.cd_alpha2 = 1.0;
    s.cm0 = 0.0;
    s.cm_alpha = 0.0;
    s.cm_delta = cm_delta;
    s.stall_neg = deg2rad(-12.0);
    s.stall_pos = deg2rad(12.0);
    s.fp_cl45 = 1.0;
    s.fp_cd_min = 0.02;
    s.fp_cd90 = 1.2;
    s.fp_cm_max = 0.4;
    s.blend_half_width = deg2rad(5.0);
    s.surface = surface;
    s.slipstream = slipstream;
    return s;
}

PropellerParams main_prop(const std::string& name, double y, double handedness)
{
    PropellerParams p;
    p.name = name;
    p.mount = PropellerMount::Wing;
    p.hub = Vec3(0.16, y, 0.0);
    p.axis = Vec3::UnitX();
    p.diameter = 0.254;
    p.ct0 = 0.1;
    p.ct1 = -0.12;
    p.cq0 = 0.0072;
    p.cq1 = -0.005;
    p.normal_coeff = 8e-4;
    p.handedness = handedness;
    p.eta_max = 180.0;
    return p;
}

}  // namespace

VehicleParams default_vehicle()
{
    VehicleParams v;
    v.mass = 1.9;
    v.inertia = Vec3(0.06, 0.08, 0.12).asDiagonal();
    v.gravity = Vec3(0.0, 0.0, 9.81);
    v.air_density = 1.225;
    v.wing_pivot = Vec3(0.01, 0.0, -0.04);

    v.propellers.push_back(main_prop("left", -0.235, 1.0));
    v.propellers.push_back(main_prop("right", 0.235, -1.0));
    PropellerParams tail;
    tail.name = "tail";
    tail.mount = PropellerMount::Tail;
    tail.hub = Vec3(-0.62, 0.0, -0.07);
    tail.axis = Vec3(0.0, 0.0, -1.0);
    tail.diameter = 0.15;
    tail.ct0 = 0.1;
    tail.ct1 = -0.1;
    tail.cq0 = 0.007;
    tail.cq1 = -0.004;
    tail.normal_coeff = 3e-4;
    tail.handedness = 1.0;
    tail.eta_max = 250.0;
    v.propellers.push_back(tail);

    using SB = SurfaceBinding;
    // Four segments per half wing; the middle two sit in the prop slipstream and
    // the ailerons are on the outboard segment.
    v.segments.push_back(wing_segment("wing_l4", -0.41125, -1, SB::AileronLeft));
    v.segments.push_back(wing_segment("wing_l3", -0.29375, kPropLeft, SB::None));
    v.segments.push_back(wing_segment("wing_l2", -0.17625, kPropLeft, SB::None));
    v.segments.push_back(wing_segment("wing_l1", -0.05875, -1, SB::None));
    v.segments.push_back(wing_segment("wing_r1", 0.05875, -1, SB::None));
    v.segments.push_back(wing_segment("wing_r2", 0.17625, kPropRight, SB::None));
    v.segments.push_back(wing_segment("wing_r3", 0.29375, kPropRight, SB::None));
    v.segments.push_back(wing_segment("wing_r4", 0.41125, -1, SB::AileronRight));

    const Vec3 up(0.0, 0.0, -1.0);
    v.segments.push_back(tail_segment("htail_l", Vec3(-0.62, -0.11, -0.02), Vec3::UnitY(), 0.12, 0.14,
                                      3.5, 2.0, -0.3, SB::Elevator, -1));
    v.segments.push_back(tail_segment("htail_c", Vec3(-0.62, 0.0, -0.02), Vec3::UnitY(), 0.12, 0.08,
                                      3.5, 2.0, -0.3, SB::Elevator, kPropTail));
    v.segments.push_back(tail_segment("htail_r", Vec3(-0.62, 0.11, -0.02), Vec3::UnitY(), 0.12, 0.14,
                                      3.5, 2.0, -0.3, SB::Elevator, -1));
    v.segments.push_back(tail_segment("vtail", Vec3(-0.6, 0.0, -0.1), up, 0.14, 0.15,
                                      3.0, 1.5, 0.0, SB::Rudder, -1));

    v.fuselage = {0.008, 0.03, 0.04};
    v.limits = ActuatorLimits{};
    v.limits.wing_tilt_max = deg2rad(90.0);
    v.limits.aileron_max = deg2rad(20.0);
    v.limits.elevator_max = deg2rad(25.0);
    v.limits.rudder_max = deg2rad(25.0);
    v.limits.tail_tilt_max = deg2rad(30.0);
    return v;
}

}  // namespace tiltwing
