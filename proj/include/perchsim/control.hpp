#pragma once

#include <algorithm>
#include <cmath>

#include "perchsim/adhesion.hpp"
#include "perchsim/config.hpp"
#include "perchsim/dynamics.hpp"

namespace perchsim {

// --------------------------------------------------------------------------
// Vertical-velocity PID
// --------------------------------------------------------------------------

struct PidState {
    double integral_n{0.0};
    double prev_error_mps{0.0};
    bool has_prev{false};
};

struct PidOutput {
    double thrust_n{0.0};
    PidState state;
};

/// Hover feedforward plus PID on vertical-velocity error. The integrator is
/// clamped and frozen while the output is saturated in the direction of the
/// error (conditional integration).
inline PidOutput pid_step(PidState ps, const ControlParams& cp, double hover_feedforward_n,
                          double max_thrust_n, double setpoint_vz_mps,
                          double measured_vz_mps, double dt) {
    const double error = setpoint_vz_mps - measured_vz_mps;
    const double derivative = ps.has_prev ? (error - ps.prev_error_mps) / dt : 0.0;

    double integral = ps.integral_n + cp.pid_ki * error * dt;
    integral = std::clamp(integral, -cp.integrator_limit_n, cp.integrator_limit_n);

    const double raw = hover_feedforward_n + cp.pid_kp * error + integral +
                       cp.pid_kd * derivative;
    const double thrust = std::clamp(raw, 0.0, max_thrust_n);

    const bool saturated_high = raw > max_thrust_n && error > 0.0;
    const bool saturated_low = raw < 0.0 && error < 0.0;
    if (saturated_high || saturated_low) {
        integral = ps.integral_n;  // hold, do not wind up
    }

    ps.integral_n = integral;
    ps.prev_error_mps = error;
    ps.has_prev = true;
    return {thrust, ps};
}

// --------------------------------------------------------------------------
// Sequencers
// --------------------------------------------------------------------------

enum class LandingPhase { ground_init, ascend, translate, engage_descend, motors_off, settle, done };
enum class TakeoffPhase { pre_engaged, reversing, liftoff, clear, done };

inline const char* to_string(LandingPhase p) {
    switch (p) {
        case LandingPhase::ground_init: return "ground_init";
        case LandingPhase::ascend: return "ascend";
        case LandingPhase::translate: return "translate";
        case LandingPhase::engage_descend: return "engage_descend";
        case LandingPhase::motors_off: return "motors_off";
        case LandingPhase::settle: return "settle";
        case LandingPhase::done: return "done";
    }
    return "?";
}

inline const char* to_string(TakeoffPhase p) {
    switch (p) {
        case TakeoffPhase::pre_engaged: return "pre_engaged";
        case TakeoffPhase::reversing: return "reversing";
        case TakeoffPhase::liftoff: return "liftoff";
        case TakeoffPhase::clear: return "clear";
        case TakeoffPhase::done: return "done";
    }
    return "?";
}

/// Per-step command tuple emitted by the sequencers.
struct ControlCommand {
    double vz_setpoint_mps{0.0};
    double pitch_setpoint_rad{0.0};
    double mech_duty{0.0};
    MotorDirection mech_direction{MotorDirection::off};
    bool motors_enabled{false};
};

// Cascade and phase-advance constants, tuned once against the dynamics
// module together with the PID defaults.
inline constexpr double kAltPosGain = 2.0;         // 1/s
inline constexpr double kLateralPosGain = 5.0;     // 1/s^2
inline constexpr double kLateralVelGain = 3.5;     // 1/s
inline constexpr double kMaxLeanRad = 0.15;        // keeps |pitch-tilt| < tip-over at 43 deg
inline constexpr double kMotorsOffDwellS = 0.5;    // shutdown transient absorbed before settle
inline constexpr double kAscendTolM = 0.05;
inline constexpr double kAscendVelTol = 0.15;
inline constexpr double kTranslateTolM = 0.03;
inline constexpr double kTranslateVelTol = 0.08;
inline constexpr double kAscendTimeoutS = 5.0;
inline constexpr double kTranslateTimeoutS = 4.0;
inline constexpr double kTakeoffClearMarginM = 0.2;

/// Lean command that drives x toward target_x; thrust tilts opposite the
/// pitch sign, hence the leading minus.
inline double lateral_pitch_setpoint(const VehicleState& s, double target_x_m) {
    const double accel = kLateralPosGain * (target_x_m - s.x_m) - kLateralVelGain * s.vx_mps;
    return std::clamp(-accel / 9.81, -kMaxLeanRad, kMaxLeanRad);
}

struct LandingSequencer {
    LandingPhase phase{LandingPhase::ground_init};
    double phase_entry_time_s{0.0};

    // trial-fixed inputs
    double target_x_m{0.0};  // nominal platform center plus the trial's noise offset
    double duty{0.0};
    double descent_duration_s{0.0};

    void enter(LandingPhase p, double t) {
        phase = p;
        phase_entry_time_s = t;
    }
};

/// One sequencer tick: emits the command for this step and advances the
/// phase machine. Phases run strictly in the protocol order; none re-enters.
inline ControlCommand landing_sequencer_step(LandingSequencer& seq, const VehicleState& obs,
                                             const MechanismState& ms, double t,
                                             const ControlParams& cp) {
    (void)ms;
    ControlCommand cmd{};
    const double elapsed = t - seq.phase_entry_time_s;

    switch (seq.phase) {
        case LandingPhase::ground_init:
            cmd.motors_enabled = false;
            seq.enter(LandingPhase::ascend, t);
            break;

        case LandingPhase::ascend: {
            cmd.motors_enabled = true;
            const double err = cp.approach_altitude_m - obs.z_m;
            cmd.vz_setpoint_mps = std::clamp(kAltPosGain * err, cp.descent_speed_mps,
                                             cp.ascent_speed_mps);
            cmd.pitch_setpoint_rad = lateral_pitch_setpoint(obs, obs.x_m);  // hold current x
            if ((std::abs(err) < kAscendTolM && std::abs(obs.vz_mps) < kAscendVelTol) ||
                elapsed > kAscendTimeoutS) {
                seq.enter(LandingPhase::translate, t);
            }
            break;
        }

        case LandingPhase::translate: {
            cmd.motors_enabled = true;
            const double err = cp.approach_altitude_m - obs.z_m;
            cmd.vz_setpoint_mps = std::clamp(kAltPosGain * err, cp.descent_speed_mps,
                                             cp.ascent_speed_mps);
            cmd.pitch_setpoint_rad = lateral_pitch_setpoint(obs, seq.target_x_m);
            if ((std::abs(obs.x_m - seq.target_x_m) < kTranslateTolM &&
                 std::abs(obs.vx_mps) < kTranslateVelTol) ||
                elapsed > kTranslateTimeoutS) {
                seq.enter(LandingPhase::engage_descend, t);
            }
            break;
        }

        case LandingPhase::engage_descend:
            cmd.motors_enabled = true;
            cmd.vz_setpoint_mps = cp.descent_speed_mps;
            cmd.pitch_setpoint_rad = lateral_pitch_setpoint(obs, seq.target_x_m);
            cmd.mech_duty = seq.duty;
            cmd.mech_direction = MotorDirection::forward;
            if (elapsed >= seq.descent_duration_s) {
                seq.enter(LandingPhase::motors_off, t);
            }
            break;

        case LandingPhase::motors_off:
            cmd.motors_enabled = false;
            seq.enter(LandingPhase::settle, t);
            break;

        case LandingPhase::settle:
            cmd.motors_enabled = false;
            if (elapsed >= cp.settle_duration_s) {
                seq.enter(LandingPhase::done, t);
            }
            break;

        case LandingPhase::done:
            cmd.motors_enabled = false;
            break;
    }
    return cmd;
}

struct TakeoffSequencer {
    TakeoffPhase phase{TakeoffPhase::pre_engaged};
    double phase_entry_time_s{0.0};

    double target_x_m{0.0};
    double duty{0.0};

    void enter(TakeoffPhase p, double t) {
        phase = p;
        phase_entry_time_s = t;
    }
};

/// Takeoff protocol: thrust and motor reversal begin together, so a slowly
/// reversing corkscrew holds the vehicle down while it is already trying to
/// climb. Normal clearance above the local platform surface ends the trial.
inline ControlCommand takeoff_sequencer_step(TakeoffSequencer& seq, const VehicleState& obs,
                                             const MechanismState& ms, double t,
                                             const ControlParams& cp,
                                             const PlatformConfig& platform,
                                             bool mechanism_attached) {
    ControlCommand cmd{};
    const double clearance = -platform_penetration({obs.x_m, obs.z_m}, platform);
    const bool timed_out = t >= cp.takeoff_timeout_s;

    switch (seq.phase) {
        case TakeoffPhase::pre_engaged:
            cmd.motors_enabled = false;
            seq.enter(TakeoffPhase::reversing, t);
            break;

        case TakeoffPhase::reversing:
            cmd.motors_enabled = true;
            cmd.vz_setpoint_mps = cp.ascent_speed_mps;
            cmd.pitch_setpoint_rad = lateral_pitch_setpoint(obs, seq.target_x_m);
            cmd.mech_duty = seq.duty;
            cmd.mech_direction = MotorDirection::reverse;
            if (!mechanism_attached || ms.engagement_turns <= 0.0) {
                seq.enter(TakeoffPhase::liftoff, t);
            } else if (timed_out) {
                seq.enter(TakeoffPhase::done, t);
            }
            break;

        case TakeoffPhase::liftoff:
            cmd.motors_enabled = true;
            cmd.vz_setpoint_mps = cp.ascent_speed_mps;
            cmd.pitch_setpoint_rad = lateral_pitch_setpoint(obs, seq.target_x_m);
            if (clearance >= kTakeoffClearMarginM) {
                seq.enter(TakeoffPhase::clear, t);
            } else if (timed_out) {
                seq.enter(TakeoffPhase::done, t);
            }
            break;

        case TakeoffPhase::clear:
            cmd.motors_enabled = true;
            cmd.vz_setpoint_mps = cp.ascent_speed_mps;
            cmd.pitch_setpoint_rad = lateral_pitch_setpoint(obs, seq.target_x_m);
            if (t - seq.phase_entry_time_s >= 0.3 || timed_out) {
                seq.enter(TakeoffPhase::done, t);
            }
            break;

        case TakeoffPhase::done:
            cmd.motors_enabled = false;
            break;
    }
    return cmd;
}

/// Pitch-hold torque (differential rotor thrust), clamped to the vehicle's
/// torque authority.
inline double attitude_torque(const VehicleState& s, double pitch_setpoint_rad,
                              const ControlParams& cp) {
    const double torque = cp.attitude_kp * (pitch_setpoint_rad - s.pitch_rad) -
                          cp.attitude_kd * s.pitch_rate_rps;
    return std::clamp(torque, -cp.attitude_torque_limit_nm, cp.attitude_torque_limit_nm);
}

}  // namespace perchsim
