#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "perchsim/adhesion.hpp"
#include "perchsim/config.hpp"
#include "perchsim/control.hpp"
#include "perchsim/dynamics.hpp"
#include "perchsim/rng.hpp"

namespace perchsim {

enum class TrialKind { landing, takeoff };

inline const char* to_string(TrialKind k) {
    return k == TrialKind::landing ? "landing" : "takeoff";
}

enum class FailureMode {
    none,
    tip_over,
    slide_off,
    impact,
    not_engaged,
    rip_out,
    stuck_engaged,
    timeout,
    sim_fault,
};

inline constexpr int kFailureModeCount = 9;

inline const char* to_string(FailureMode m) {
    switch (m) {
        case FailureMode::none: return "none";
        case FailureMode::tip_over: return "tip_over";
        case FailureMode::slide_off: return "slide_off";
        case FailureMode::impact: return "impact";
        case FailureMode::not_engaged: return "not_engaged";
        case FailureMode::rip_out: return "rip_out";
        case FailureMode::stuck_engaged: return "stuck_engaged";
        case FailureMode::timeout: return "timeout";
        case FailureMode::sim_fault: return "sim_fault";
    }
    return "?";
}

/// One experiment-cell instance. Speed is the commanded descent speed for
/// landings (sign ignored, applied negative) and the ascent speed for
/// takeoffs. Baseline trials (mechanism_attached = false) ignore duty.
struct TrialConfig {
    TrialKind kind{TrialKind::landing};
    double tilt_deg{12.0};
    double speed_mps{0.25};
    double duty{1.0};
    bool mechanism_attached{true};
    Seed seed{};
};

// At-rest thresholds applied through the settle window.
inline constexpr double kRestSpeedTol = 0.02;      // m/s
inline constexpr double kRestPitchRateTol = 0.05;  // rad/s

/// Per-step maxima and event flags; classification is a pure function of
/// this record plus the final states, so a stored summary re-classifies to
/// the identical outcome.
struct TrajectorySummary {
    bool mechanism_attached{false};
    double max_rel_pitch_rad{0.0};
    double max_impact_speed_mps{0.0};
    double max_center_offset_m{0.0};
    FailureMode first_crash_mode{FailureMode::none};
    double first_crash_time_s{-1.0};
    bool settle_observed{false};
    double settle_max_speed_mps{0.0};
    double settle_max_pitch_rate_rps{0.0};
    bool contact_at_end{false};
    bool sequencer_done{false};
    bool cleared{false};
    double cleared_time_s{-1.0};
    bool sim_fault{false};
    double end_time_s{0.0};
};

struct TrialOutcome {
    bool success{false};
    FailureMode failure_mode{FailureMode::none};
    VehicleState final_state{};
    MechanismState final_mech{};
    double duration_s{0.0};
};

struct TrajectorySample {
    double t_s{0.0};
    double x_m{0.0};
    double z_m{0.0};
    double pitch_rad{0.0};
    double vx_mps{0.0};
    double vz_mps{0.0};
    double pitch_rate_rps{0.0};
    double engagement_turns{0.0};
    bool contact_uphill{false};
    bool contact_downhill{false};
    bool contact_tip{false};
};

/// Classifies a finished trial against the success definitions. Landing:
/// no crash, at rest through the settle window, and (with the mechanism)
/// secured, or (baseline) resting on the platform. Takeoff: no crash, fully
/// disengaged, and cleared the surface before the timeout.
inline TrialOutcome classify_outcome(TrialKind kind, const TrajectorySummary& s,
                                     const VehicleState& final_state,
                                     const MechanismState& final_mech,
                                     const PlatformConfig& platform, const SimConfig& sim) {
    (void)platform;
    TrialOutcome out{};
    out.final_state = final_state;
    out.final_mech = final_mech;
    out.duration_s = s.end_time_s;

    if (s.sim_fault) {
        out.failure_mode = FailureMode::sim_fault;
        return out;
    }
    if (s.first_crash_mode != FailureMode::none) {
        out.failure_mode = s.first_crash_mode;
        return out;
    }

    if (kind == TrialKind::landing) {
        const bool at_rest = s.settle_observed && s.settle_max_speed_mps < kRestSpeedTol &&
                             s.settle_max_pitch_rate_rps < kRestPitchRateTol;
        if (!s.sequencer_done || !at_rest || !s.contact_at_end) {
            out.failure_mode = FailureMode::timeout;
            return out;
        }
        if (s.mechanism_attached && !is_secured(final_mech, sim.mechanism)) {
            out.failure_mode =
                final_mech.ripped_out ? FailureMode::rip_out : FailureMode::not_engaged;
            return out;
        }
        out.success = true;
        return out;
    }

    // takeoff
    if (s.cleared && final_mech.engagement_turns <= 0.0) {
        out.success = true;
        return out;
    }
    if (s.mechanism_attached && final_mech.engagement_turns > 0.0) {
        out.failure_mode = FailureMode::stuck_engaged;
        return out;
    }
    out.failure_mode = FailureMode::timeout;
    return out;
}

namespace detail {

/// World-plane anchor of an engaged corkscrew tip. The target point sinks
/// below the grab point as the screw threads further in (axial advance per
/// turn), preloading the interface against the surface.
struct TipAnchor {
    bool active{false};
    Vec2 point{};
};

inline Vec2 tip_world(const VehicleState& s, const VehicleParams& v) {
    return Vec2{s.x_m, s.z_m} + rotate({0.0, -v.corkscrew_mount_drop_m}, s.pitch_rad);
}

inline Vec2 tip_velocity(const VehicleState& s, const VehicleParams& v) {
    const Vec2 r = rotate({0.0, -v.corkscrew_mount_drop_m}, s.pitch_rad);
    return Vec2{s.vx_mps, s.vz_mps} + s.pitch_rate_rps * Vec2{-r.z, r.x};
}

// Tip still counts as "on the surface" within this hover margin; the pile
// has depth and partial threads keep reach.
inline constexpr double kTipContactMarginM = 5e-4;

}  // namespace detail

/// Runs one complete closed-loop trial. Deterministic: identical (cfg, sim)
/// pairs produce bit-identical outcomes. Pass a sample vector to record the
/// per-step trajectory.
inline TrialOutcome run_trial(const TrialConfig& cfg, const SimConfig& sim,
                              std::vector<TrajectorySample>* dump = nullptr) {
    const double dt = sim.timestep_s;
    const double g = sim.gravity_mps2;

    PlatformConfig platform = sim.platform;
    platform.tilt_deg = cfg.tilt_deg;
    const double tilt = platform.tilt_rad();
    const Vec2 n_hat = platform_normal(tilt);
    const Vec2 t_hat = platform_tangent(tilt);

    ControlParams control = sim.control;
    if (cfg.kind == TrialKind::landing) {
        control.descent_speed_mps = -std::abs(cfg.speed_mps);
    } else {
        control.ascent_speed_mps = std::abs(cfg.speed_mps);
    }

    VehicleParams vehicle = sim.vehicle;
    const bool attached = cfg.mechanism_attached;
    if (!attached) {
        vehicle.mass_kg -= vehicle.mechanism_mass_kg;
    }
    const auto full_contacts = vehicle_contacts(vehicle);
    const auto bare_contacts = baseline_contacts(vehicle);
    const std::span<const ContactPoint> contacts =
        attached ? std::span<const ContactPoint>(full_contacts)
                 : std::span<const ContactPoint>(bare_contacts);

    const MechanismParams& mech = sim.mechanism;

    TrialRng rng(cfg.seed);
    const double lateral_offset =
        rng.gaussian() * sim.noise.lateral_offset_std_m;
    const double pitch_bias =
        rng.gaussian() * sim.noise.pitch_offset_std_deg * (3.14159265358979323846 / 180.0);

    VehicleState state{};
    MechanismState ms = make_mechanism_state(0.0);
    detail::TipAnchor anchor{};
    LandingSequencer landing_seq{};
    TakeoffSequencer takeoff_seq{};

    if (cfg.kind == TrialKind::landing) {
        state.x_m = -(platform.half_extent_m + 0.3);
        state.z_m = 0.25;
        landing_seq.target_x_m = lateral_offset;
        landing_seq.duty = cfg.duty;
        landing_seq.descent_duration_s =
            control.effective_descent_duration_s(control.descent_speed_mps);
    } else {
        // Pre-engaged rest pose: corkscrew tip and downhill skid on the plane.
        const double alpha =
            std::atan2(vehicle.corkscrew_mount_drop_m, vehicle.skid_half_span_m);
        const double pitch0 = attached ? tilt + alpha : tilt;
        const Vec2 p_tip = lateral_offset * t_hat;
        const Vec2 tip_offset = rotate({0.0, -vehicle.corkscrew_mount_drop_m}, pitch0);
        const Vec2 com = attached ? p_tip - tip_offset : Vec2{lateral_offset * t_hat.x,
                                                              lateral_offset * t_hat.z};
        state.x_m = com.x;
        state.z_m = com.z;
        state.pitch_rad = pitch0;
        takeoff_seq.target_x_m = com.x;
        takeoff_seq.duty = cfg.duty;
        if (attached) {
            ms = make_mechanism_state(2.0);  // manually pre-engaged by two turns
            ms.tip_in_contact = true;
            anchor.active = true;
            anchor.point = p_tip;
        }
    }

    TrajectorySummary summary{};
    summary.mechanism_attached = attached;
    PidState pid{};
    bool prev_active[3] = {false, false, false};

    const double tip_over_rad = sim.tip_over_threshold_deg * (3.14159265358979323846 / 180.0);
    const std::int64_t max_steps =
        static_cast<std::int64_t>(std::ceil(sim.sim_duration_max_s / dt));

    double t = 0.0;
    bool done = false;
    for (std::int64_t step_idx = 0; step_idx < max_steps && !done; ++step_idx) {
        ControlCommand cmd{};
        if (cfg.kind == TrialKind::landing) {
            cmd = landing_sequencer_step(landing_seq, state, ms, t, control);
        } else {
            cmd = takeoff_sequencer_step(takeoff_seq, state, ms, t, control, platform,
                                         attached);
        }

        Vec2 tension{};
        if (attached) {
            ms.duty = cmd.mech_duty;
            ms.direction = cmd.mech_direction;

            const Vec2 p_tip = detail::tip_world(state, vehicle);
            const double pen_tip = platform_penetration(p_tip, platform);
            const bool in_extent = std::abs(dot(p_tip, t_hat)) <= platform.half_extent_m;
            ms.tip_in_contact = pen_tip > -detail::kTipContactMarginM && in_extent;

            ms = advance_engagement(ms, mech, dt);

            if (anchor.active && ms.engagement_turns <= 0.0) {
                anchor.active = false;  // fully unthreaded, clean release
            }
            if (!anchor.active && !ms.ripped_out && ms.tip_in_contact &&
                ms.engagement_turns >= mech.grab_threshold_turns) {
                anchor.active = true;
                anchor.point = p_tip + pen_tip * n_hat;  // projected onto the plane
            }

            if (anchor.active && !ms.ripped_out) {
                const double sink = std::max(0.0, ms.engagement_turns -
                                                      mech.grab_threshold_turns) *
                                    mech.geometry.pitch_per_turn_m;
                const Vec2 target = anchor.point - sink * n_hat;
                const Vec2 delta = p_tip - target;
                const Vec2 v_tip = detail::tip_velocity(state, vehicle);

                const double pull_raw = mech.anchor_stiffness_npm * dot(delta, n_hat) +
                                        mech.anchor_damping_nspm * dot(v_tip, n_hat);
                const double shear_raw = mech.anchor_stiffness_npm * dot(delta, t_hat) +
                                         mech.anchor_damping_nspm * dot(v_tip, t_hat);
                const double pull_demand = std::max(0.0, pull_raw);

                const TensionResult res =
                    tension_and_ripout(ms, pull_demand, std::abs(shear_raw), mech);
                ms = res.state;
                if (ms.ripped_out) {
                    anchor.active = false;
                } else {
                    const double shear_signed = shear_raw >= 0.0 ? res.shear_n : -res.shear_n;
                    tension = (-res.pull_n) * n_hat + (-shear_signed) * t_hat;
                }
            }
        }

        double thrust = 0.0;
        double torque = 0.0;
        if (cmd.motors_enabled) {
            const double hover_ff = vehicle.mass_kg * g;
            const PidOutput po = pid_step(pid, control, hover_ff, vehicle.max_thrust_n,
                                          cmd.vz_setpoint_mps, state.vz_mps, dt);
            pid = po.state;
            thrust = po.thrust_n;
            if (sim.noise.thrust_noise_std_frac > 0.0) {
                thrust *= 1.0 + sim.noise.thrust_noise_std_frac * rng.gaussian();
                thrust = std::clamp(thrust, 0.0, vehicle.max_thrust_n);
            }
            torque = attitude_torque(state, cmd.pitch_setpoint_rad + pitch_bias, control);
        }

        const StepResult sr =
            step(state, contacts, thrust, torque, tension, vehicle, platform, g, dt);

        // impact onsets
        for (std::size_t i = 0; i < sr.forces.contact_count; ++i) {
            const ContactForce& cf = sr.forces.contact[i];
            if (cf.active && !prev_active[i]) {
                summary.max_impact_speed_mps =
                    std::max(summary.max_impact_speed_mps, cf.normal_approach_mps);
                if (cf.normal_approach_mps > sim.impact_speed_threshold_mps &&
                    summary.first_crash_mode == FailureMode::none) {
                    summary.first_crash_mode = FailureMode::impact;
                    summary.first_crash_time_s = t;
                }
            }
            prev_active[i] = cf.active;
        }

        state = sr.state;
        t += dt;

        if (!state.finite()) {
            summary.sim_fault = true;
            break;
        }

        const double rel_pitch = std::abs(state.pitch_rad - tilt);
        summary.max_rel_pitch_rad = std::max(summary.max_rel_pitch_rad, rel_pitch);
        if (rel_pitch > tip_over_rad && summary.first_crash_mode == FailureMode::none) {
            summary.first_crash_mode = FailureMode::tip_over;
            summary.first_crash_time_s = t;
        }

        const double center_offset = std::abs(dot({state.x_m, state.z_m}, t_hat));
        summary.max_center_offset_m = std::max(summary.max_center_offset_m, center_offset);
        const bool near_surface =
            platform_penetration({state.x_m, state.z_m}, platform) > -0.1;
        if (center_offset > platform.half_extent_m && near_surface &&
            summary.first_crash_mode == FailureMode::none) {
            summary.first_crash_mode = FailureMode::slide_off;
            summary.first_crash_time_s = t;
        }

        if (cfg.kind == TrialKind::landing &&
            landing_seq.phase == LandingPhase::settle) {
            summary.settle_observed = true;
            const double speed = std::hypot(state.vx_mps, state.vz_mps);
            summary.settle_max_speed_mps = std::max(summary.settle_max_speed_mps, speed);
            summary.settle_max_pitch_rate_rps =
                std::max(summary.settle_max_pitch_rate_rps, std::abs(state.pitch_rate_rps));
        }

        if (cfg.kind == TrialKind::takeoff && !summary.cleared &&
            t < control.takeoff_timeout_s) {
            const double clearance =
                -platform_penetration({state.x_m, state.z_m}, platform);
            if (clearance >= kTakeoffClearMarginM &&
                (!attached || ms.engagement_turns <= 0.0)) {
                summary.cleared = true;
                summary.cleared_time_s = t;
            }
        }

        if (dump) {
            TrajectorySample row{};
            row.t_s = t;
            row.x_m = state.x_m;
            row.z_m = state.z_m;
            row.pitch_rad = state.pitch_rad;
            row.vx_mps = state.vx_mps;
            row.vz_mps = state.vz_mps;
            row.pitch_rate_rps = state.pitch_rate_rps;
            row.engagement_turns = ms.engagement_turns;
            for (std::size_t i = 0; i < sr.forces.contact_count; ++i) {
                const ContactForce& cf = sr.forces.contact[i];
                if (cf.kind == ContactKind::skid_uphill) row.contact_uphill = cf.active;
                if (cf.kind == ContactKind::skid_downhill) row.contact_downhill = cf.active;
                if (cf.kind == ContactKind::corkscrew_tip) row.contact_tip = cf.active;
            }
            dump->push_back(row);
        }

        if (summary.first_crash_mode != FailureMode::none) {
            break;
        }
        const bool seq_done = cfg.kind == TrialKind::landing
                                  ? landing_seq.phase == LandingPhase::done
                                  : takeoff_seq.phase == TakeoffPhase::done;
        if (seq_done) {
            summary.sequencer_done = true;
            done = true;
        }
    }

    summary.end_time_s = t;
    const ForceSet final_forces = contact_forces(state, contacts, platform);
    for (std::size_t i = 0; i < final_forces.contact_count; ++i) {
        summary.contact_at_end |= final_forces.contact[i].active;
    }

    return classify_outcome(cfg.kind, summary, state, ms, platform, sim);
}

}  // namespace perchsim
