#pragma once

#include <array>
#include <cmath>
#include <span>

#include "perchsim/config.hpp"

namespace perchsim {

struct Vec2 {
    double x{0.0};
    double z{0.0};

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.z + b.z}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.z - b.z}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.z}; }
    friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.z}; }
    Vec2& operator+=(Vec2 o) { x += o.x; z += o.z; return *this; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.z * b.z; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.z - a.z * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Planar pose and rates of the vehicle. Pitch is the CCW angle of the body
/// x-axis from the world x-axis; a body lying flat on the incline has
/// pitch equal to the tilt angle.
struct VehicleState {
    double x_m{0.0};
    double z_m{0.0};
    double pitch_rad{0.0};
    double vx_mps{0.0};
    double vz_mps{0.0};
    double pitch_rate_rps{0.0};

    bool finite() const {
        return std::isfinite(x_m) && std::isfinite(z_m) && std::isfinite(pitch_rad) &&
               std::isfinite(vx_mps) && std::isfinite(vz_mps) && std::isfinite(pitch_rate_rps);
    }

    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

enum class ContactKind { skid_uphill, skid_downhill, corkscrew_tip };

struct ContactPoint {
    Vec2 body_offset{};  // position in body frame, origin at the CoM / skid line
    ContactKind kind{ContactKind::skid_uphill};
};

/// Standard contact set. The CoM sits on the skid line; the corkscrew tip
/// protrudes mount_drop below it at the body center.
inline std::array<ContactPoint, 3> vehicle_contacts(const VehicleParams& v) {
    return {{
        {{+v.skid_half_span_m, 0.0}, ContactKind::skid_uphill},
        {{-v.skid_half_span_m, 0.0}, ContactKind::skid_downhill},
        {{0.0, -v.corkscrew_mount_drop_m}, ContactKind::corkscrew_tip},
    }};
}

/// Baseline vehicle: skids only, no corkscrew.
inline std::array<ContactPoint, 2> baseline_contacts(const VehicleParams& v) {
    return {{
        {{+v.skid_half_span_m, 0.0}, ContactKind::skid_uphill},
        {{-v.skid_half_span_m, 0.0}, ContactKind::skid_downhill},
    }};
}

/// Unit normal of the platform plane (points away from the surface).
inline Vec2 platform_normal(double tilt_rad) {
    return {-std::sin(tilt_rad), std::cos(tilt_rad)};
}

/// Unit tangent along the incline, uphill positive.
inline Vec2 platform_tangent(double tilt_rad) {
    return {std::cos(tilt_rad), std::sin(tilt_rad)};
}

/// Signed normal distance of a world point below the platform plane
/// (positive = penetrating). The plane passes through the world origin.
inline double platform_penetration(Vec2 point_world, const PlatformConfig& platform) {
    return -dot(point_world, platform_normal(platform.tilt_rad()));
}

inline Vec2 rotate(Vec2 v, double angle_rad) {
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return {c * v.x - s * v.z, s * v.x + c * v.z};
}

/// Sticking is declared below this tangential speed (regularization band).
inline constexpr double kStickVelocity = 1e-3;  // m/s

struct ContactForce {
    ContactKind kind{ContactKind::skid_uphill};
    bool active{false};            // penetrating and within the platform extent
    double penetration_m{0.0};
    double normal_n{0.0};          // >= 0 always
    double tangential_n{0.0};      // signed along the uphill tangent
    double normal_approach_mps{0.0};  // approach speed (positive = closing)
    Vec2 point_world{};
};

struct ForceSet {
    std::array<ContactForce, 3> contact{};
    std::size_t contact_count{0};
    Vec2 force_n{};       // aggregate contact force on the body
    double torque_nm{0.0};  // aggregate contact torque about the CoM
};

/// Penalty normal force with approach-rate damping, plus regularized Coulomb
/// friction. Inside the stick band the tangential force ramps linearly up to
/// the static cone, which reproduces the analytic tan(tilt) <= mu_static
/// hold/slide threshold up to a creep velocity below kStickVelocity.
inline ForceSet contact_forces(const VehicleState& state,
                               std::span<const ContactPoint> contacts,
                               const PlatformConfig& platform) {
    ForceSet out{};
    const double tilt = platform.tilt_rad();
    const Vec2 n = platform_normal(tilt);
    const Vec2 t = platform_tangent(tilt);
    const Vec2 com{state.x_m, state.z_m};
    const Vec2 vel{state.vx_mps, state.vz_mps};

    for (const ContactPoint& cp : contacts) {
        ContactForce cf{};
        cf.kind = cp.kind;

        const Vec2 r = rotate(cp.body_offset, state.pitch_rad);
        const Vec2 p = com + r;
        cf.point_world = p;

        const double pen = -dot(p, n);
        cf.penetration_m = pen;

        // point velocity = CoM velocity + omega x r
        const Vec2 vp = vel + state.pitch_rate_rps * Vec2{-r.z, r.x};
        const double v_n = dot(vp, n);  // positive = separating
        cf.normal_approach_mps = -v_n;

        const double along = dot(p, t);
        const bool in_extent = std::abs(along) <= platform.half_extent_m;

        if (pen > 0.0 && in_extent) {
            cf.active = true;
            double normal = platform.contact_stiffness_npm * pen +
                            platform.contact_damping_nspm * std::max(0.0, -v_n);
            normal = std::max(0.0, normal);
            cf.normal_n = normal;

            const double v_t = dot(vp, t);
            double tangential = 0.0;
            if (std::abs(v_t) < kStickVelocity) {
                tangential = -platform.mu_static * normal * (v_t / kStickVelocity);
            } else {
                tangential = -platform.mu_kinetic * normal * (v_t > 0.0 ? 1.0 : -1.0);
            }
            cf.tangential_n = tangential;

            const Vec2 f = normal * n + tangential * t;
            out.force_n += f;
            out.torque_nm += cross(r, f);
        }

        out.contact[out.contact_count++] = cf;
    }
    return out;
}

struct StepResult {
    VehicleState state;
    ForceSet forces;  // contact forces evaluated at the pre-step state
};

/// One semi-implicit Euler step. Thrust acts along the body z-axis at the
/// CoM, the commanded pitch torque models differential rotor thrust, and
/// tip_tension (from the adhesion module) acts at the corkscrew tip offset,
/// contributing force and pitch torque. Callers must check finite() on the
/// result; a non-finite state is a simulator fault.
inline StepResult step(const VehicleState& state,
                       std::span<const ContactPoint> contacts,
                       double thrust_n,
                       double pitch_torque_nm,
                       Vec2 tip_tension_n,
                       const VehicleParams& vehicle,
                       const PlatformConfig& platform,
                       double gravity_mps2,
                       double dt) {
    ForceSet forces = contact_forces(state, contacts, platform);

    const Vec2 body_z = {-std::sin(state.pitch_rad), std::cos(state.pitch_rad)};
    Vec2 force = forces.force_n + thrust_n * body_z;
    force.z -= vehicle.mass_kg * gravity_mps2;
    double torque = forces.torque_nm + pitch_torque_nm;

    if (tip_tension_n.x != 0.0 || tip_tension_n.z != 0.0) {
        const Vec2 r_tip = rotate({0.0, -vehicle.corkscrew_mount_drop_m}, state.pitch_rad);
        force += tip_tension_n;
        torque += cross(r_tip, tip_tension_n);
    }

    VehicleState next = state;
    next.vx_mps += force.x / vehicle.mass_kg * dt;
    next.vz_mps += force.z / vehicle.mass_kg * dt;
    next.pitch_rate_rps += torque / vehicle.inertia_pitch_kgm2 * dt;
    next.x_m += next.vx_mps * dt;
    next.z_m += next.vz_mps * dt;
    next.pitch_rad += next.pitch_rate_rps * dt;

    return {next, forces};
}

/// Total mechanical energy; used by the conservation checks.
inline double mechanical_energy(const VehicleState& s, const VehicleParams& v,
                                double gravity_mps2) {
    const double kinetic = 0.5 * v.mass_kg * (s.vx_mps * s.vx_mps + s.vz_mps * s.vz_mps) +
                           0.5 * v.inertia_pitch_kgm2 * s.pitch_rate_rps * s.pitch_rate_rps;
    return kinetic + v.mass_kg * gravity_mps2 * s.z_m;
}

}  // namespace perchsim
