#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "perchsim/config.hpp"

namespace perchsim {

enum class MotorDirection { forward, reverse, off };

/// Corkscrew state. Engagement is integrated per segment (anchor value plus
/// a signed step count at a fixed per-step increment) so that a forward run
/// followed by an equal reverse run at the same duty returns to the starting
/// value exactly, not just to rounding.
struct MechanismState {
    double engagement_turns{0.0};
    double duty{0.0};
    MotorDirection direction{MotorDirection::off};
    bool tip_in_contact{false};
    bool ripped_out{false};  // latched for the rest of the trial

    // segment integration bookkeeping
    double segment_anchor_turns{0.0};
    std::int64_t segment_steps{0};
    double segment_delta_turns{0.0};

    friend bool operator==(const MechanismState&, const MechanismState&) = default;
};

inline MechanismState make_mechanism_state(double engagement_turns) {
    MechanismState ms{};
    ms.engagement_turns = engagement_turns;
    ms.segment_anchor_turns = engagement_turns;
    return ms;
}

/// Advances engagement by one timestep. Forward rotation threads in only
/// while the tip is on the surface; reverse unthreads regardless of contact.
/// The result is clamped to [0, turns]; a ripped-out mechanism never
/// re-engages.
inline MechanismState advance_engagement(MechanismState ms, const MechanismParams& p,
                                         double dt) {
    if (ms.ripped_out) {
        return ms;
    }
    const double rate = p.no_load_speed_rps * ms.duty;
    const double delta = rate * dt;

    const bool can_forward = ms.direction == MotorDirection::forward && ms.tip_in_contact;
    const bool can_reverse = ms.direction == MotorDirection::reverse && ms.engagement_turns > 0.0;
    if (delta <= 0.0 || (!can_forward && !can_reverse)) {
        return ms;
    }

    if (delta != ms.segment_delta_turns) {
        ms.segment_anchor_turns = ms.engagement_turns;
        ms.segment_steps = 0;
        ms.segment_delta_turns = delta;
    }

    ms.segment_steps += can_forward ? +1 : -1;
    double value = ms.segment_anchor_turns +
                   static_cast<double>(ms.segment_steps) * ms.segment_delta_turns;
    if (value >= p.geometry.turns) {
        value = p.geometry.turns;
        ms.segment_anchor_turns = value;
        ms.segment_steps = 0;
    } else if (value <= 0.0) {
        value = 0.0;
        ms.segment_anchor_turns = value;
        ms.segment_steps = 0;
    }
    ms.engagement_turns = value;
    return ms;
}

/// Pull-off and shear capacities at the current engagement. Below the grab
/// threshold nothing holds; above it capacity grows linearly with the number
/// of engaged turns (more turns capture more hooks).
inline std::pair<double, double> holding_capacity(const MechanismState& ms,
                                                  const MechanismParams& p) {
    if (ms.ripped_out || ms.engagement_turns < p.grab_threshold_turns) {
        return {0.0, 0.0};
    }
    return {p.force_per_turn_n * ms.engagement_turns,
            p.shear_per_turn_n * ms.engagement_turns};
}

struct TensionResult {
    double pull_n{0.0};   // transmitted, surface-normal, pulling the vehicle down
    double shear_n{0.0};  // transmitted, magnitude of the in-plane component
    MechanismState state;
};

/// Resolves the demanded anchor force against capacity. Within the envelope
/// the full demand is transmitted; beyond it the interface rips out:
/// engagement drops to zero and the failure latches for the trial.
inline TensionResult tension_and_ripout(MechanismState ms, double demanded_pull_n,
                                        double demanded_shear_n,
                                        const MechanismParams& p) {
    const auto [pull_cap, shear_cap] = holding_capacity(ms, p);
    if (demanded_pull_n <= pull_cap && demanded_shear_n <= shear_cap) {
        return {demanded_pull_n, demanded_shear_n, ms};
    }
    ms.ripped_out = true;
    ms.engagement_turns = 0.0;
    ms.segment_anchor_turns = 0.0;
    ms.segment_steps = 0;
    return {0.0, 0.0, ms};
}

/// True once removal requires reversing the motor: engaged at or past the
/// secure threshold (inclusive) and not ripped out.
inline bool is_secured(const MechanismState& ms, const MechanismParams& p) {
    return !ms.ripped_out && ms.engagement_turns >= p.secure_threshold_turns;
}

/// Capacity per turn for an arbitrary diameter, scaled from the reference
/// geometry. Smaller diameters deform less under load and hold more, so the
/// scaling is strictly decreasing in diameter.
inline double scaled_force_per_turn(const CorkscrewGeometry& g, const MechanismParams& ref) {
    return ref.force_per_turn_n * (ref.geometry.diameter_m / g.diameter_m);
}

/// Quasi-static surface-normal pull-off of a fully engaged corkscrew:
/// peak force before disengagement.
inline double pulloff_test(const CorkscrewGeometry& g, const MechanismParams& ref) {
    if (g.turns <= 0.0) {
        return 0.0;
    }
    return scaled_force_per_turn(g, ref) * g.turns;
}

}  // namespace perchsim
