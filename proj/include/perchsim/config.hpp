#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace perchsim {

/// Raised on config parse or validation failure. The message names the
/// offending field (dotted path) and the violated rule.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --------------------------------------------------------------------------
// Parameter blocks. All values SI; degrees appear only at the config and
// report boundaries. Defaults are the shipped calibrated values and must
// stay in sync with defaults.cfg.
// --------------------------------------------------------------------------

struct VehicleParams {
    double mass_kg{0.038};               // modified vehicle, mechanism included
    double inertia_pitch_kgm2{1.8e-5};
    double skid_half_span_m{0.045};      // center to each skid contact
    double corkscrew_mount_drop_m{0.006};  // tip protrusion below the skid plane
    double max_thrust_n{0.60};
    double mechanism_mass_kg{0.0105};

    friend bool operator==(const VehicleParams&, const VehicleParams&) = default;
};

struct PlatformConfig {
    double tilt_deg{12.0};
    double half_extent_m{0.15};          // usable surface, center to edge along incline
    double mu_static{0.55};
    double mu_kinetic{0.45};
    double contact_stiffness_npm{5000.0};
    double contact_damping_nspm{15.0};

    double tilt_rad() const { return tilt_deg * (3.14159265358979323846 / 180.0); }

    friend bool operator==(const PlatformConfig&, const PlatformConfig&) = default;
};

struct NoiseParams {
    double lateral_offset_std_m{0.01};   // touchdown-point dispersion
    double pitch_offset_std_deg{2.0};    // attitude trim error
    double thrust_noise_std_frac{0.02};  // per-step multiplicative thrust noise

    friend bool operator==(const NoiseParams&, const NoiseParams&) = default;
};

struct CorkscrewGeometry {
    double diameter_m{0.0065};
    double turns{3.0};
    double wire_diameter_m{0.0005};
    double pitch_per_turn_m{0.0015};     // axial advance per revolution

    friend bool operator==(const CorkscrewGeometry&, const CorkscrewGeometry&) = default;
};

struct MechanismParams {
    CorkscrewGeometry geometry{};
    double no_load_speed_rps{4.0};       // rev/s at 100% duty
    double force_per_turn_n{6.0};        // pull-off capacity per engaged turn
    double shear_per_turn_n{6.0};        // lateral capacity per engaged turn
    double grab_threshold_turns{0.1};    // below this the screw holds nothing
    double secure_threshold_turns{0.3};  // at or above this, removal needs reversal
    double anchor_stiffness_npm{250.0};  // engaged-interface compliance (fabric)
    double anchor_damping_nspm{4.0};

    friend bool operator==(const MechanismParams&, const MechanismParams&) = default;
};

struct ControlParams {
    double pid_kp{0.4};                  // N per m/s of vertical velocity error
    double pid_ki{1.5};                  // N per m
    double pid_kd{0.0};                  // N per m/s^2
    double integrator_limit_n{0.15};
    double attitude_kp{0.008};           // N*m per rad
    double attitude_kd{0.0005};          // N*m per rad/s
    double attitude_torque_limit_nm{0.012};
    double descent_speed_mps{-0.25};
    double ascent_speed_mps{0.25};
    double approach_altitude_m{0.5};     // above platform center
    double descent_duration_s{0.0};      // 0 = auto: altitude/|speed| + 1 s margin
    double settle_duration_s{2.0};
    double takeoff_timeout_s{3.0};

    /// Commanded-descent window for a given descent speed. A fixed margin past
    /// the nominal time-to-contact keeps the engagement window independent of
    /// descent speed.
    double effective_descent_duration_s(double descent_speed) const {
        if (descent_duration_s > 0.0) {
            return descent_duration_s;
        }
        return approach_altitude_m / std::abs(descent_speed) + 1.0;
    }

    friend bool operator==(const ControlParams&, const ControlParams&) = default;
};

struct SimConfig {
    double timestep_s{2e-4};
    double sim_duration_max_s{30.0};
    double gravity_mps2{9.81};
    double tip_over_threshold_deg{60.0};     // crash: |pitch - tilt| beyond this
    double impact_speed_threshold_mps{1.5};  // crash: contact onset faster than this
    VehicleParams vehicle{};
    PlatformConfig platform{};
    MechanismParams mechanism{};
    ControlParams control{};
    NoiseParams noise{};

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// --------------------------------------------------------------------------
// Validation
// --------------------------------------------------------------------------

namespace detail {

inline void require(bool ok, std::vector<std::string>& errors, const std::string& msg) {
    if (!ok) {
        errors.push_back(msg);
    }
}

}  // namespace detail

inline std::vector<std::string> validate(const SimConfig& c) {
    using detail::require;
    std::vector<std::string> e;

    require(c.timestep_s > 0.0 && c.timestep_s <= 1e-3, e,
            "sim.timestep_s: must be in (0, 1e-3] for contact stability");
    require(c.sim_duration_max_s > 0.0, e, "sim.duration_max_s: must be > 0");
    require(c.gravity_mps2 > 0.0, e, "sim.gravity_mps2: must be > 0");
    require(c.tip_over_threshold_deg > 0.0 && c.tip_over_threshold_deg < 180.0, e,
            "sim.tip_over_threshold_deg: must be in (0, 180)");
    require(c.impact_speed_threshold_mps > 0.0, e,
            "sim.impact_speed_threshold_mps: must be > 0");

    const auto& v = c.vehicle;
    require(v.mass_kg > 0.0, e, "vehicle.mass_kg: must be > 0");
    require(v.inertia_pitch_kgm2 > 0.0, e, "vehicle.inertia_pitch_kgm2: must be > 0");
    require(v.skid_half_span_m > 0.0, e, "vehicle.skid_half_span_m: must be > 0");
    require(v.corkscrew_mount_drop_m > 0.0, e,
            "vehicle.corkscrew_mount_drop_m: must be > 0 (corkscrew contacts first)");
    require(v.max_thrust_n > v.mass_kg * c.gravity_mps2, e,
            "vehicle.max_thrust_n: must exceed hover weight mass_kg * g");
    require(v.mechanism_mass_kg >= 0.0 && v.mechanism_mass_kg <= 0.020, e,
            "vehicle.mechanism_mass_kg: must be within the 20 g mass budget");
    require(v.mechanism_mass_kg < v.mass_kg, e,
            "vehicle.mechanism_mass_kg: must be less than vehicle.mass_kg");

    const auto& p = c.platform;
    require(p.tilt_deg >= 0.0 && p.tilt_deg < 90.0, e,
            "platform.tilt_deg: must be in [0, 90)");
    require(p.half_extent_m > 0.0, e, "platform.half_extent_m: must be > 0");
    require(p.mu_static >= 0.0, e, "platform.mu_static: must be >= 0");
    require(p.mu_kinetic >= 0.0, e, "platform.mu_kinetic: must be >= 0");
    require(p.mu_kinetic <= p.mu_static, e,
            "platform.mu_kinetic: must be <= platform.mu_static");
    require(p.contact_stiffness_npm > 0.0, e, "platform.contact_stiffness_npm: must be > 0");
    require(p.contact_damping_nspm > 0.0, e, "platform.contact_damping_nspm: must be > 0");

    const auto& n = c.noise;
    require(n.lateral_offset_std_m >= 0.0, e, "noise.lateral_offset_std_m: must be >= 0");
    require(n.pitch_offset_std_deg >= 0.0, e, "noise.pitch_offset_std_deg: must be >= 0");
    require(n.thrust_noise_std_frac >= 0.0, e, "noise.thrust_noise_std_frac: must be >= 0");

    const auto& m = c.mechanism;
    require(m.geometry.diameter_m > 0.0, e, "mechanism.diameter_m: must be > 0");
    require(m.geometry.turns >= 1.0, e, "mechanism.turns: must be >= 1");
    require(m.geometry.wire_diameter_m > 0.0, e, "mechanism.wire_diameter_m: must be > 0");
    require(m.geometry.pitch_per_turn_m > 0.0, e, "mechanism.pitch_per_turn_m: must be > 0");
    require(m.no_load_speed_rps > 0.0, e, "mechanism.no_load_speed_rps: must be > 0");
    require(m.force_per_turn_n > 0.0, e, "mechanism.force_per_turn_n: must be > 0");
    require(m.shear_per_turn_n > 0.0, e, "mechanism.shear_per_turn_n: must be > 0");
    require(m.grab_threshold_turns > 0.0, e, "mechanism.grab_threshold_turns: must be > 0");
    require(m.grab_threshold_turns <= m.secure_threshold_turns, e,
            "mechanism.grab_threshold_turns: must be <= mechanism.secure_threshold_turns");
    require(m.secure_threshold_turns <= m.geometry.turns, e,
            "mechanism.secure_threshold_turns: must be <= mechanism.turns");
    require(m.anchor_stiffness_npm > 0.0, e, "mechanism.anchor_stiffness_npm: must be > 0");
    require(m.anchor_damping_nspm > 0.0, e, "mechanism.anchor_damping_nspm: must be > 0");

    const auto& k = c.control;
    require(k.pid_kp >= 0.0 && k.pid_ki >= 0.0 && k.pid_kd >= 0.0, e,
            "control.pid gains: must be >= 0");
    require(k.integrator_limit_n > 0.0, e, "control.integrator_limit_n: must be > 0");
    require(k.attitude_kp >= 0.0 && k.attitude_kd >= 0.0, e,
            "control.attitude gains: must be >= 0");
    require(k.attitude_torque_limit_nm > 0.0, e,
            "control.attitude_torque_limit_nm: must be > 0");
    require(k.descent_speed_mps < 0.0, e, "control.descent_speed_mps: must be < 0");
    require(k.ascent_speed_mps > 0.0, e, "control.ascent_speed_mps: must be > 0");
    require(k.approach_altitude_m > 0.0, e, "control.approach_altitude_m: must be > 0");
    require(k.descent_duration_s >= 0.0, e,
            "control.descent_duration_s: must be >= 0 (0 selects the auto duration)");
    require(k.settle_duration_s > 0.0, e, "control.settle_duration_s: must be > 0");
    require(k.takeoff_timeout_s > 0.0, e, "control.takeoff_timeout_s: must be > 0");

    return e;
}

inline void validate_or_throw(const SimConfig& c) {
    auto errors = validate(c);
    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& err : errors) {
            msg += "\n  " + err;
        }
        throw ConfigError(msg);
    }
}

// --------------------------------------------------------------------------
// key = value parsing. Flat dotted keys, '#' comments, blank lines ignored.
// --------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline double parse_double(std::string_view key, std::string_view value) {
    std::string tmp(value);
    char* end = nullptr;
    const double d = std::strtod(tmp.c_str(), &end);
    if (end == tmp.c_str() || *end != '\0' || !std::isfinite(d)) {
        throw ConfigError(std::string(key) + ": not a finite number: '" + tmp + "'");
    }
    return d;
}

}  // namespace detail

/// Applies one dotted-key override; the same dispatch backs file loading,
/// CLI --set overrides, and calibration knobs. Throws ConfigError on unknown
/// keys or malformed numbers.
inline void apply_key_value(SimConfig& c, std::string_view key, std::string_view value) {
    const double d = detail::parse_double(key, value);
    if (key == "sim.timestep_s") c.timestep_s = d;
    else if (key == "sim.duration_max_s") c.sim_duration_max_s = d;
    else if (key == "sim.gravity_mps2") c.gravity_mps2 = d;
    else if (key == "sim.tip_over_threshold_deg") c.tip_over_threshold_deg = d;
    else if (key == "sim.impact_speed_threshold_mps") c.impact_speed_threshold_mps = d;
    else if (key == "vehicle.mass_kg") c.vehicle.mass_kg = d;
    else if (key == "vehicle.inertia_pitch_kgm2") c.vehicle.inertia_pitch_kgm2 = d;
    else if (key == "vehicle.skid_half_span_m") c.vehicle.skid_half_span_m = d;
    else if (key == "vehicle.corkscrew_mount_drop_m") c.vehicle.corkscrew_mount_drop_m = d;
    else if (key == "vehicle.max_thrust_n") c.vehicle.max_thrust_n = d;
    else if (key == "vehicle.mechanism_mass_kg") c.vehicle.mechanism_mass_kg = d;
    else if (key == "platform.tilt_deg") c.platform.tilt_deg = d;
    else if (key == "platform.half_extent_m") c.platform.half_extent_m = d;
    else if (key == "platform.mu_static") c.platform.mu_static = d;
    else if (key == "platform.mu_kinetic") c.platform.mu_kinetic = d;
    else if (key == "platform.contact_stiffness_npm") c.platform.contact_stiffness_npm = d;
    else if (key == "platform.contact_damping_nspm") c.platform.contact_damping_nspm = d;
    else if (key == "noise.lateral_offset_std_m") c.noise.lateral_offset_std_m = d;
    else if (key == "noise.pitch_offset_std_deg") c.noise.pitch_offset_std_deg = d;
    else if (key == "noise.thrust_noise_std_frac") c.noise.thrust_noise_std_frac = d;
    else if (key == "mechanism.diameter_m") c.mechanism.geometry.diameter_m = d;
    else if (key == "mechanism.turns") c.mechanism.geometry.turns = d;
    else if (key == "mechanism.wire_diameter_m") c.mechanism.geometry.wire_diameter_m = d;
    else if (key == "mechanism.pitch_per_turn_m") c.mechanism.geometry.pitch_per_turn_m = d;
    else if (key == "mechanism.no_load_speed_rps") c.mechanism.no_load_speed_rps = d;
    else if (key == "mechanism.force_per_turn_n") c.mechanism.force_per_turn_n = d;
    else if (key == "mechanism.shear_per_turn_n") c.mechanism.shear_per_turn_n = d;
    else if (key == "mechanism.grab_threshold_turns") c.mechanism.grab_threshold_turns = d;
    else if (key == "mechanism.secure_threshold_turns") c.mechanism.secure_threshold_turns = d;
    else if (key == "mechanism.anchor_stiffness_npm") c.mechanism.anchor_stiffness_npm = d;
    else if (key == "mechanism.anchor_damping_nspm") c.mechanism.anchor_damping_nspm = d;
    else if (key == "control.pid_kp") c.control.pid_kp = d;
    else if (key == "control.pid_ki") c.control.pid_ki = d;
    else if (key == "control.pid_kd") c.control.pid_kd = d;
    else if (key == "control.integrator_limit_n") c.control.integrator_limit_n = d;
    else if (key == "control.attitude_kp") c.control.attitude_kp = d;
    else if (key == "control.attitude_kd") c.control.attitude_kd = d;
    else if (key == "control.attitude_torque_limit_nm") c.control.attitude_torque_limit_nm = d;
    else if (key == "control.descent_speed_mps") c.control.descent_speed_mps = d;
    else if (key == "control.ascent_speed_mps") c.control.ascent_speed_mps = d;
    else if (key == "control.approach_altitude_m") c.control.approach_altitude_m = d;
    else if (key == "control.descent_duration_s") c.control.descent_duration_s = d;
    else if (key == "control.settle_duration_s") c.control.settle_duration_s = d;
    else if (key == "control.takeoff_timeout_s") c.control.takeoff_timeout_s = d;
    else {
        throw ConfigError("unknown config key: '" + std::string(key) + "'");
    }
}

/// Parses config text over the documented defaults. Does not validate;
/// callers validate after any further overrides.
inline SimConfig parse_config(std::string_view text) {
    SimConfig c{};
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        line = detail::trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string_view key = detail::trim(line.substr(0, eq));
        const std::string_view value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            apply_key_value(c, key, value);
        } catch (const ConfigError& err) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + err.what());
        }
    }
    return c;
}

/// Loads and validates a config file. Unset keys keep their documented
/// defaults; an empty file yields exactly SimConfig{}.
inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    SimConfig c = parse_config(ss.str());
    validate_or_throw(c);
    return c;
}

namespace detail {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Writes every key; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const SimConfig& c) {
    using detail::num;
    std::string out;
    auto kv = [&out](const char* key, double v) {
        out += key;
        out += " = ";
        out += num(v);
        out += '\n';
    };
    kv("sim.timestep_s", c.timestep_s);
    kv("sim.duration_max_s", c.sim_duration_max_s);
    kv("sim.gravity_mps2", c.gravity_mps2);
    kv("sim.tip_over_threshold_deg", c.tip_over_threshold_deg);
    kv("sim.impact_speed_threshold_mps", c.impact_speed_threshold_mps);
    kv("vehicle.mass_kg", c.vehicle.mass_kg);
    kv("vehicle.inertia_pitch_kgm2", c.vehicle.inertia_pitch_kgm2);
    kv("vehicle.skid_half_span_m", c.vehicle.skid_half_span_m);
    kv("vehicle.corkscrew_mount_drop_m", c.vehicle.corkscrew_mount_drop_m);
    kv("vehicle.max_thrust_n", c.vehicle.max_thrust_n);
    kv("vehicle.mechanism_mass_kg", c.vehicle.mechanism_mass_kg);
    kv("platform.tilt_deg", c.platform.tilt_deg);
    kv("platform.half_extent_m", c.platform.half_extent_m);
    kv("platform.mu_static", c.platform.mu_static);
    kv("platform.mu_kinetic", c.platform.mu_kinetic);
    kv("platform.contact_stiffness_npm", c.platform.contact_stiffness_npm);
    kv("platform.contact_damping_nspm", c.platform.contact_damping_nspm);
    kv("noise.lateral_offset_std_m", c.noise.lateral_offset_std_m);
    kv("noise.pitch_offset_std_deg", c.noise.pitch_offset_std_deg);
    kv("noise.thrust_noise_std_frac", c.noise.thrust_noise_std_frac);
    kv("mechanism.diameter_m", c.mechanism.geometry.diameter_m);
    kv("mechanism.turns", c.mechanism.geometry.turns);
    kv("mechanism.wire_diameter_m", c.mechanism.geometry.wire_diameter_m);
    kv("mechanism.pitch_per_turn_m", c.mechanism.geometry.pitch_per_turn_m);
    kv("mechanism.no_load_speed_rps", c.mechanism.no_load_speed_rps);
    kv("mechanism.force_per_turn_n", c.mechanism.force_per_turn_n);
    kv("mechanism.shear_per_turn_n", c.mechanism.shear_per_turn_n);
    kv("mechanism.grab_threshold_turns", c.mechanism.grab_threshold_turns);
    kv("mechanism.secure_threshold_turns", c.mechanism.secure_threshold_turns);
    kv("mechanism.anchor_stiffness_npm", c.mechanism.anchor_stiffness_npm);
    kv("mechanism.anchor_damping_nspm", c.mechanism.anchor_damping_nspm);
    kv("control.pid_kp", c.control.pid_kp);
    kv("control.pid_ki", c.control.pid_ki);
    kv("control.pid_kd", c.control.pid_kd);
    kv("control.integrator_limit_n", c.control.integrator_limit_n);
    kv("control.attitude_kp", c.control.attitude_kp);
    kv("control.attitude_kd", c.control.attitude_kd);
    kv("control.attitude_torque_limit_nm", c.control.attitude_torque_limit_nm);
    kv("control.descent_speed_mps", c.control.descent_speed_mps);
    kv("control.ascent_speed_mps", c.control.ascent_speed_mps);
    kv("control.approach_altitude_m", c.control.approach_altitude_m);
    kv("control.descent_duration_s", c.control.descent_duration_s);
    kv("control.settle_duration_s", c.control.settle_duration_s);
    kv("control.takeoff_timeout_s", c.control.takeoff_timeout_s);
    return out;
}

}  // namespace perchsim
