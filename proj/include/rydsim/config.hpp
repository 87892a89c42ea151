#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "rydsim/basis.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/io.hpp"

namespace rydsim {

// Experiment configuration: strict schema, every violation reported with its
// dotted key path, all violations collected before throwing so a bad file is
// diagnosed in one pass.

enum class ExperimentKind { rabi, sweep, quench, thermal, reconstruct };
enum class Backend { exact_full, exact_constrained, constrained_with_tail, mps };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::rabi: return "rabi";
        case ExperimentKind::sweep: return "sweep";
        case ExperimentKind::quench: return "quench";
        case ExperimentKind::thermal: return "thermal";
        case ExperimentKind::reconstruct: return "reconstruct";
    }
    return "?";
}

inline const char* to_string(Backend b) {
    switch (b) {
        case Backend::exact_full: return "exact_full";
        case Backend::exact_constrained: return "exact_constrained";
        case Backend::constrained_with_tail: return "constrained_with_tail";
        case Backend::mps: return "mps";
    }
    return "?";
}

struct ModelConfig {
    int n_atoms = 0;
    double spacing_um = 0.0;  // required for dynamics experiments
    double v_nn_mhz = 0.0;    // nearest-neighbour V/2pi used to calibrate c6
};

struct ScheduleConfig {
    std::string type;  // constant | cubic | tangent
    double omega_mhz = 0.0;
    double delta_mhz = 0.0;  // constant only
    double a = 0.0, b = 0.0, c = 0.0, t0_us = 0.0;
    double delta_min_mhz = 0.0, delta_max_mhz = 0.0;
    double duration_us = 0.0;
    double hold_us = 0.0;            // sweep: append a detuning-zero hold
    std::string initial = "crystal";  // quench: crystal | all_g
    bool variational_overlay = false; // quench: add dimer/ansatz model columns
};

struct NumericsConfig {
    double dt_us = 0.005;
    double sample_dt_us = 0.01;
    int krylov_dim = 24;
    int d_max = 128;
    double trunc_eps = 1e-10;
    double step_trunc_ceiling = 1e-4;
    std::vector<int> entropy_cuts;  // mps: cuts for S columns; empty = quarter/half/three-quarter
    int entropy = -1;               // exact: 1 on, 0 off, -1 auto (on when affordable)
};

struct DetectionConfig {
    bool present = false;
    double f_g = 1.0;
    double f_r = 1.0;
};

struct SamplingConfig {
    long n_shots = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

struct EnsembleConfig {
    double delta_mhz = 0.0;
    double v1_mhz = 0.0;
    double v2_mhz = 0.0;
    double beta_times_delta = 0.0;     // dimensionless beta*Delta
    double target_dressed_walls = 0.0;  // alternative: calibrate beta to this
    bool has_beta = false;
    bool has_target = false;
};

struct ReconstructionConfig {
    // synthetic parent: thermal wall-count distribution at these parameters
    double delta_mhz = 0.0;
    double v1_mhz = 0.0;
    double v2_mhz = 0.0;
    double beta_times_delta = 0.0;
    std::string response_method = "auto";  // exact | mc | auto
    long response_samples = 200000;
    int n_restarts = 5;
    int bootstrap_resamples = 200;
};

struct OutputConfig {
    std::string trajectory_csv = "trajectory.csv";
    std::string shots_file = "shots.txt";
    std::string result_json = "result.json";
    std::string summary_json = "summary.json";
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::rabi;
    Backend backend = Backend::exact_constrained;
    bool backend_set = false;
    ModelConfig model;
    ScheduleConfig schedule;
    NumericsConfig numerics;
    DetectionConfig detection;
    SamplingConfig sampling;
    EnsembleConfig ensemble;
    ReconstructionConfig reconstruction;
    OutputConfig output;
    nlohmann::json echo;  // the config exactly as given, for the summary
};

namespace detail {

// Collects schema violations; each message carries the dotted key path.
class SchemaErrors {
public:
    void add(const std::string& path, const std::string& what) {
        msgs_.push_back(path + ": " + what);
    }
    void check_keys(const nlohmann::json& j, const std::string& path,
                    std::vector<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                    return it.key() == k;
                }) == allowed.end())
                add(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
        }
    }
    bool ok() const { return msgs_.empty(); }
    void throw_if_any() const {
        if (msgs_.empty()) return;
        std::string all = "invalid config: ";
        for (std::size_t i = 0; i < msgs_.size(); ++i) {
            if (i) all += "; ";
            all += msgs_[i];
        }
        throw ValidationError(all);
    }

private:
    std::vector<std::string> msgs_;
};

inline bool expect_object(const nlohmann::json& j, const std::string& path, SchemaErrors& errs) {
    if (j.is_object()) return true;
    errs.add(path, "must be an object");
    return false;
}

inline double get_double(const nlohmann::json& j, const std::string& path, const char* key,
                         SchemaErrors& errs, bool required, double fallback,
                         bool* found = nullptr) {
    if (found) *found = false;
    auto it = j.find(key);
    if (it == j.end()) {
        if (required) errs.add(path + "." + key, "missing required key");
        return fallback;
    }
    if (!it->is_number()) {
        errs.add(path + "." + key, "must be a number");
        return fallback;
    }
    if (found) *found = true;
    return it->get<double>();
}

inline long get_integer(const nlohmann::json& j, const std::string& path, const char* key,
                        SchemaErrors& errs, bool required, long fallback) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (required) errs.add(path + "." + key, "missing required key");
        return fallback;
    }
    if (!it->is_number_integer()) {
        errs.add(path + "." + key, "must be an integer");
        return fallback;
    }
    return it->get<long>();
}

inline std::string get_string(const nlohmann::json& j, const std::string& path, const char* key,
                              SchemaErrors& errs, bool required, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (required) errs.add(path + "." + key, "missing required key");
        return fallback;
    }
    if (!it->is_string()) {
        errs.add(path + "." + key, "must be a string");
        return fallback;
    }
    return it->get<std::string>();
}

inline bool get_bool(const nlohmann::json& j, const std::string& path, const char* key,
                     SchemaErrors& errs, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) {
        errs.add(path + "." + key, "must be a boolean");
        return fallback;
    }
    return it->get<bool>();
}

inline void parse_model(const nlohmann::json& j, ExperimentKind kind, ModelConfig& m,
                        SchemaErrors& errs) {
    if (!expect_object(j, "model", errs)) return;
    errs.check_keys(j, "model", {"n_atoms", "spacing_um", "v_nn_mhz"});
    m.n_atoms = static_cast<int>(get_integer(j, "model", "n_atoms", errs, true, 0));
    if (m.n_atoms < 1 && errs.ok()) errs.add("model.n_atoms", "must be >= 1");
    const bool dynamics = kind == ExperimentKind::rabi || kind == ExperimentKind::sweep ||
                          kind == ExperimentKind::quench;
    m.spacing_um = get_double(j, "model", "spacing_um", errs, dynamics, 0.0);
    m.v_nn_mhz = get_double(j, "model", "v_nn_mhz", errs, dynamics, 0.0);
    if (dynamics) {
        if (j.contains("spacing_um") && !(m.spacing_um > 0.0))
            errs.add("model.spacing_um", "must be positive");
        if (j.contains("v_nn_mhz") && !(m.v_nn_mhz > 0.0))
            errs.add("model.v_nn_mhz", "must be positive");
    }
}

inline void parse_schedule(const nlohmann::json& j, ExperimentKind kind, ScheduleConfig& s,
                           SchemaErrors& errs) {
    if (!expect_object(j, "schedule", errs)) return;
    s.type = get_string(j, "schedule", "type", errs, true, "");
    const bool constant = s.type == "constant";
    const bool ramp = s.type == "cubic" || s.type == "tangent";
    if (!constant && !ramp && !s.type.empty()) {
        errs.add("schedule.type", "must be constant, cubic, or tangent");
        return;
    }
    std::vector<const char*> allowed = {"type", "omega_mhz", "duration_us"};
    if (constant) allowed.push_back("delta_mhz");
    if (ramp) {
        for (const char* k : {"a", "b", "c", "t0_us", "delta_min_mhz", "delta_max_mhz", "hold_us"})
            allowed.push_back(k);
    }
    if (kind == ExperimentKind::quench) {
        allowed.push_back("initial");
        allowed.push_back("variational_overlay");
    }
    errs.check_keys(j, "schedule", allowed);

    s.omega_mhz = get_double(j, "schedule", "omega_mhz", errs, true, 0.0);
    s.duration_us = get_double(j, "schedule", "duration_us", errs, true, 0.0);
    if (j.contains("omega_mhz") && !(s.omega_mhz >= 0.0))
        errs.add("schedule.omega_mhz", "must be >= 0");
    if (j.contains("duration_us") && !(s.duration_us > 0.0))
        errs.add("schedule.duration_us", "must be positive");
    if (constant) s.delta_mhz = get_double(j, "schedule", "delta_mhz", errs, false, 0.0);
    if (ramp) {
        s.a = get_double(j, "schedule", "a", errs, true, 0.0);
        s.b = get_double(j, "schedule", "b", errs, true, 0.0);
        s.c = get_double(j, "schedule", "c", errs, false, 0.0);
        s.t0_us = get_double(j, "schedule", "t0_us", errs, true, 0.0);
        s.delta_min_mhz = get_double(j, "schedule", "delta_min_mhz", errs, true, 0.0);
        s.delta_max_mhz = get_double(j, "schedule", "delta_max_mhz", errs, true, 0.0);
        s.hold_us = get_double(j, "schedule", "hold_us", errs, false, 0.0);
        if (j.contains("hold_us") && !(s.hold_us >= 0.0))
            errs.add("schedule.hold_us", "must be >= 0");
    }
    if (kind == ExperimentKind::rabi && !constant)
        errs.add("schedule.type", "rabi drives are constant");
    if (kind == ExperimentKind::quench) {
        if (!constant) errs.add("schedule.type", "quench holds constant parameters");
        s.initial = get_string(j, "schedule", "initial", errs, false, "crystal");
        if (s.initial != "crystal" && s.initial != "all_g")
            errs.add("schedule.initial", "must be crystal or all_g");
        s.variational_overlay = get_bool(j, "schedule", "variational_overlay", errs, false);
        if (s.variational_overlay && (s.initial != "crystal" || s.delta_mhz != 0.0))
            errs.add("schedule.variational_overlay",
                     "model columns require initial=crystal and delta_mhz=0");
    }
    if (kind == ExperimentKind::sweep && !ramp && !s.type.empty())
        errs.add("schedule.type", "sweep needs a cubic or tangent ramp");
}

inline void parse_numerics(const nlohmann::json& j, NumericsConfig& n, SchemaErrors& errs) {
    if (!expect_object(j, "numerics", errs)) return;
    errs.check_keys(j, "numerics",
                    {"dt_us", "sample_dt_us", "krylov_dim", "d_max", "trunc_eps",
                     "step_trunc_ceiling", "entropy_cuts", "entropy"});
    n.dt_us = get_double(j, "numerics", "dt_us", errs, false, n.dt_us);
    n.sample_dt_us = get_double(j, "numerics", "sample_dt_us", errs, false, n.sample_dt_us);
    n.krylov_dim = static_cast<int>(get_integer(j, "numerics", "krylov_dim", errs, false,
                                                n.krylov_dim));
    n.d_max = static_cast<int>(get_integer(j, "numerics", "d_max", errs, false, n.d_max));
    n.trunc_eps = get_double(j, "numerics", "trunc_eps", errs, false, n.trunc_eps);
    n.step_trunc_ceiling =
        get_double(j, "numerics", "step_trunc_ceiling", errs, false, n.step_trunc_ceiling);
    if (!(n.dt_us > 0.0)) errs.add("numerics.dt_us", "must be positive");
    if (!(n.sample_dt_us > 0.0)) errs.add("numerics.sample_dt_us", "must be positive");
    if (n.krylov_dim < 2) errs.add("numerics.krylov_dim", "must be >= 2");
    if (n.d_max < 0) errs.add("numerics.d_max", "must be >= 0 (0 = unlimited)");
    if (!(n.trunc_eps >= 0.0)) errs.add("numerics.trunc_eps", "must be >= 0");
    if (auto it = j.find("entropy_cuts"); it != j.end()) {
        if (!it->is_array()) {
            errs.add("numerics.entropy_cuts", "must be an array of cut indices");
        } else {
            for (const auto& e : *it) {
                if (!e.is_number_integer()) {
                    errs.add("numerics.entropy_cuts", "entries must be integers");
                    break;
                }
                n.entropy_cuts.push_back(e.get<int>());
            }
        }
    }
    if (auto it = j.find("entropy"); it != j.end()) {
        if (!it->is_boolean())
            errs.add("numerics.entropy", "must be a boolean");
        else
            n.entropy = it->get<bool>() ? 1 : 0;
    }
}

inline void parse_detection(const nlohmann::json& j, DetectionConfig& d, SchemaErrors& errs) {
    if (!expect_object(j, "detection", errs)) return;
    errs.check_keys(j, "detection", {"f_g", "f_r"});
    d.present = true;
    d.f_g = get_double(j, "detection", "f_g", errs, true, 1.0);
    d.f_r = get_double(j, "detection", "f_r", errs, true, 1.0);
    if (j.contains("f_g") && !(d.f_g > 0.5 && d.f_g <= 1.0))
        errs.add("detection.f_g", "must lie in (0.5, 1]");
    if (j.contains("f_r") && !(d.f_r > 0.5 && d.f_r <= 1.0))
        errs.add("detection.f_r", "must lie in (0.5, 1]");
}

inline void parse_sampling(const nlohmann::json& j, SamplingConfig& s, SchemaErrors& errs) {
    if (!expect_object(j, "sampling", errs)) return;
    errs.check_keys(j, "sampling", {"n_shots", "seed"});
    s.n_shots = get_integer(j, "sampling", "n_shots", errs, false, 0);
    if (s.n_shots < 0) errs.add("sampling.n_shots", "must be >= 0");
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() &&
                                         it->get<long long>() < 0)) {
            errs.add("sampling.seed", "must be a nonnegative integer");
        } else {
            s.seed = it->get<std::uint64_t>();
            s.seed_set = true;
        }
    }
}

inline void parse_ensemble(const nlohmann::json& j, EnsembleConfig& e, SchemaErrors& errs) {
    if (!expect_object(j, "ensemble", errs)) return;
    errs.check_keys(j, "ensemble",
                    {"delta_mhz", "v1_mhz", "v2_mhz", "beta_times_delta", "target_dressed_walls"});
    e.delta_mhz = get_double(j, "ensemble", "delta_mhz", errs, true, 0.0);
    e.v1_mhz = get_double(j, "ensemble", "v1_mhz", errs, true, 0.0);
    e.v2_mhz = get_double(j, "ensemble", "v2_mhz", errs, true, 0.0);
    e.beta_times_delta = get_double(j, "ensemble", "beta_times_delta", errs, false, 0.0,
                                    &e.has_beta);
    e.target_dressed_walls =
        get_double(j, "ensemble", "target_dressed_walls", errs, false, 0.0, &e.has_target);
    if (e.has_beta == e.has_target)
        errs.add("ensemble", "exactly one of beta_times_delta / target_dressed_walls is needed");
    if (j.contains("delta_mhz") && !(e.delta_mhz > 0.0))
        errs.add("ensemble.delta_mhz", "must be positive (it sets the beta scale)");
    if (e.has_beta && !(e.beta_times_delta > 0.0))
        errs.add("ensemble.beta_times_delta", "must be positive");
}

inline void parse_reconstruction(const nlohmann::json& j, ReconstructionConfig& r,
                                 SchemaErrors& errs) {
    if (!expect_object(j, "reconstruction", errs)) return;
    errs.check_keys(j, "reconstruction",
                    {"delta_mhz", "v1_mhz", "v2_mhz", "beta_times_delta", "response_method",
                     "response_samples", "n_restarts", "bootstrap_resamples"});
    r.delta_mhz = get_double(j, "reconstruction", "delta_mhz", errs, true, 0.0);
    r.v1_mhz = get_double(j, "reconstruction", "v1_mhz", errs, true, 0.0);
    r.v2_mhz = get_double(j, "reconstruction", "v2_mhz", errs, true, 0.0);
    r.beta_times_delta = get_double(j, "reconstruction", "beta_times_delta", errs, true, 0.0);
    r.response_method = get_string(j, "reconstruction", "response_method", errs, false, "auto");
    if (r.response_method != "auto" && r.response_method != "exact" && r.response_method != "mc")
        errs.add("reconstruction.response_method", "must be auto, exact, or mc");
    r.response_samples = get_integer(j, "reconstruction", "response_samples", errs, false,
                                     r.response_samples);
    r.n_restarts =
        static_cast<int>(get_integer(j, "reconstruction", "n_restarts", errs, false, r.n_restarts));
    r.bootstrap_resamples = static_cast<int>(
        get_integer(j, "reconstruction", "bootstrap_resamples", errs, false, r.bootstrap_resamples));
    if (r.response_samples < 1) errs.add("reconstruction.response_samples", "must be >= 1");
    if (r.n_restarts < 1) errs.add("reconstruction.n_restarts", "must be >= 1");
    if (r.bootstrap_resamples < 10) errs.add("reconstruction.bootstrap_resamples", "must be >= 10");
    if (j.contains("beta_times_delta") && !(r.beta_times_delta > 0.0))
        errs.add("reconstruction.beta_times_delta", "must be positive");
    if (j.contains("delta_mhz") && !(r.delta_mhz > 0.0))
        errs.add("reconstruction.delta_mhz", "must be positive");
}

inline void parse_output(const nlohmann::json& j, OutputConfig& o, SchemaErrors& errs) {
    if (!expect_object(j, "output", errs)) return;
    errs.check_keys(j, "output", {"trajectory_csv", "shots_file", "result_json", "summary_json"});
    o.trajectory_csv = get_string(j, "output", "trajectory_csv", errs, false, o.trajectory_csv);
    o.shots_file = get_string(j, "output", "shots_file", errs, false, o.shots_file);
    o.result_json = get_string(j, "output", "result_json", errs, false, o.result_json);
    o.summary_json = get_string(j, "output", "summary_json", errs, false, o.summary_json);
    for (const std::string* p : {&o.trajectory_csv, &o.shots_file, &o.result_json,
                                 &o.summary_json}) {
        if (p->empty() || p->find('/') != std::string::npos)
            errs.add("output", "file names must be non-empty and directory-free");
    }
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& root) {
    detail::SchemaErrors errs;
    ExperimentConfig cfg;
    cfg.echo = root;
    if (!root.is_object()) {
        errs.add("config", "top level must be an object");
        errs.throw_if_any();
    }

    const std::string kind_s = detail::get_string(root, "config", "experiment", errs, true, "");
    if (kind_s == "rabi") cfg.kind = ExperimentKind::rabi;
    else if (kind_s == "sweep") cfg.kind = ExperimentKind::sweep;
    else if (kind_s == "quench") cfg.kind = ExperimentKind::quench;
    else if (kind_s == "thermal") cfg.kind = ExperimentKind::thermal;
    else if (kind_s == "reconstruct") cfg.kind = ExperimentKind::reconstruct;
    else if (!kind_s.empty()) {
        errs.add("experiment", "unknown kind '" + kind_s + "'");
        errs.throw_if_any();
    } else {
        errs.throw_if_any();
    }

    const bool dynamics = cfg.kind == ExperimentKind::rabi || cfg.kind == ExperimentKind::sweep ||
                          cfg.kind == ExperimentKind::quench;
    std::vector<const char*> top = {"experiment", "description", "model", "detection",
                                    "sampling", "output"};
    if (dynamics) {
        top.push_back("schedule");
        top.push_back("backend");
        top.push_back("numerics");
    }
    if (cfg.kind == ExperimentKind::thermal) top.push_back("ensemble");
    if (cfg.kind == ExperimentKind::reconstruct) top.push_back("reconstruction");
    errs.check_keys(root, "", top);
    if (root.contains("description") && !root["description"].is_string())
        errs.add("description", "must be a string");

    if (root.contains("model"))
        detail::parse_model(root["model"], cfg.kind, cfg.model, errs);
    else
        errs.add("model", "missing required key");

    if (dynamics) {
        if (root.contains("schedule"))
            detail::parse_schedule(root["schedule"], cfg.kind, cfg.schedule, errs);
        else
            errs.add("schedule", "missing required key");
        const std::string bs = detail::get_string(root, "config", "backend", errs, true, "");
        if (bs == "exact_full") cfg.backend = Backend::exact_full;
        else if (bs == "exact_constrained") cfg.backend = Backend::exact_constrained;
        else if (bs == "constrained_with_tail") cfg.backend = Backend::constrained_with_tail;
        else if (bs == "mps") cfg.backend = Backend::mps;
        else if (!bs.empty())
            errs.add("backend", "unknown backend '" + bs + "'");
        cfg.backend_set = !bs.empty();
        if (root.contains("numerics")) detail::parse_numerics(root["numerics"], cfg.numerics, errs);
    }
    if (cfg.kind == ExperimentKind::thermal) {
        if (root.contains("ensemble"))
            detail::parse_ensemble(root["ensemble"], cfg.ensemble, errs);
        else
            errs.add("ensemble", "missing required key");
    }
    if (cfg.kind == ExperimentKind::reconstruct) {
        if (root.contains("reconstruction"))
            detail::parse_reconstruction(root["reconstruction"], cfg.reconstruction, errs);
        else
            errs.add("reconstruction", "missing required key");
    }
    if (root.contains("detection")) detail::parse_detection(root["detection"], cfg.detection, errs);
    if (root.contains("sampling")) detail::parse_sampling(root["sampling"], cfg.sampling, errs);
    if (root.contains("output")) detail::parse_output(root["output"], cfg.output, errs);

    // cross-field checks, only meaningful once the blocks themselves parsed
    if (errs.ok()) {
        if (cfg.kind == ExperimentKind::rabi &&
            cfg.backend != Backend::exact_full && cfg.backend != Backend::exact_constrained)
            errs.add("backend", "rabi runs need an exact backend");
        if (dynamics) {
            const int n = cfg.model.n_atoms;
            const int cap = cfg.backend == Backend::exact_full ? BasisSet::max_full_atoms
                            : cfg.backend == Backend::mps      ? 63
                                                               : BasisSet::max_constrained_atoms;
            if (n > cap)
                throw ResourceError("config: backend " + std::string(to_string(cfg.backend)) +
                                    " is capped at " + std::to_string(cap) +
                                    " atoms, requested " + std::to_string(n));
        }
        const bool stochastic =
            cfg.sampling.n_shots > 0 || cfg.kind == ExperimentKind::reconstruct;
        if (stochastic && !cfg.sampling.seed_set)
            errs.add("sampling.seed", "required whenever shots are drawn");
        if (cfg.kind == ExperimentKind::reconstruct) {
            if (cfg.sampling.n_shots < 1) errs.add("sampling.n_shots", "must be >= 1");
            if (!cfg.detection.present) errs.add("detection", "missing required key");
        }
    }
    errs.throw_if_any();
    return cfg;
}

inline nlohmann::json load_config_json(const std::filesystem::path& path) {
    try {
        return nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    return parse_config(load_config_json(path));
}

}  // namespace rydsim
