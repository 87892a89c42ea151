#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "rydsim/errors.hpp"

namespace rydsim {

// Canned experiment configurations covering the regimes the code is meant
// for.  Each preset is a complete config document: `rydsim <cmd> --preset X`
// behaves exactly like loading the dumped JSON from a file.

struct PresetEntry {
    const char* name;
    const char* description;
    nlohmann::json (*build)();
};

namespace detail {

using nlohmann::json;

inline json preset_fig1d_rabi() {
    return {
        {"experiment", "rabi"},
        {"description",
         "collective Rabi oscillations on fully blockaded chains of 1..3 atoms"},
        {"model", {{"n_atoms", 3}, {"spacing_um", 2.87}, {"v_nn_mhz", 1536.0}}},
        {"backend", "exact_full"},
        {"schedule",
         {{"type", "constant"}, {"omega_mhz", 2.0}, {"delta_mhz", 0.0}, {"duration_us", 5.0}}},
        {"numerics", {{"dt_us", 0.005}, {"sample_dt_us", 0.005}}},
    };
}

inline json sweep_schedule(double duration_us) {
    // cubic detuning ramp -10 -> +10 MHz, slow near the transition
    return {{"type", "cubic"},       {"omega_mhz", 2.0},
            {"a", 2.0},              {"b", 1.2},
            {"c", 0.0},              {"t0_us", duration_us / 2.0},
            {"delta_min_mhz", -10.0}, {"delta_max_mhz", 10.0},
            {"duration_us", duration_us}};
}

inline json tangent_sweep_schedule(double duration_us) {
    // tangent ramp, hand-tuned for the larger arrays: the slow stretch is
    // centred at +0.45 Omega so the whole critical window (zero crossing up
    // to the finite-size gap minimum near 0.9 Omega) is crossed at
    // ~0.7-1.5 MHz/us, with the wings swept fast
    return {{"type", "tangent"},     {"omega_mhz", 2.0},
            {"a", 0.8},              {"b", 0.8319},
            {"c", 0.9},              {"t0_us", duration_us / 2.0},
            {"delta_min_mhz", -10.0}, {"delta_max_mhz", 10.0},
            {"duration_us", duration_us}};
}

inline json preset_fig3_sweep7() {
    return {
        {"experiment", "sweep"},
        {"description", "detuning sweep into the broken-symmetry crystal, 7 atoms, exact"},
        {"model", {{"n_atoms", 7}, {"spacing_um", 5.74}, {"v_nn_mhz", 24.0}}},
        {"backend", "exact_constrained"},
        {"schedule", sweep_schedule(3.0)},
        {"numerics", {{"dt_us", 0.002}, {"sample_dt_us", 0.02}}},
        {"detection", {{"f_g", 0.98}, {"f_r", 0.93}}},
        {"sampling", {{"n_shots", 2000}, {"seed", 1003}}},
    };
}

inline json preset_fig5_z2_31() {
    return {
        {"experiment", "sweep"},
        {"description", "ordering sweep at 31 atoms, matrix-product backend, D=64 (~9 min)"},
        {"model", {{"n_atoms", 31}, {"spacing_um", 5.74}, {"v_nn_mhz", 24.0}}},
        {"backend", "mps"},
        {"schedule", tangent_sweep_schedule(3.6)},
        {"numerics",
         {{"dt_us", 0.003},
          {"sample_dt_us", 0.01},
          {"d_max", 64},
          {"trunc_eps", 1e-10},
          {"entropy_cuts", {8, 15, 23}}}},
    };
}

inline json preset_fig5_z2_51() {
    return {
        {"experiment", "sweep"},
        {"description",
         "ordering sweep at 51 atoms, D=256 (hours of runtime; see the 31-atom preset "
         "for a quick variant)"},
        {"model", {{"n_atoms", 51}, {"spacing_um", 5.74}, {"v_nn_mhz", 24.0}}},
        {"backend", "mps"},
        {"schedule", tangent_sweep_schedule(3.6)},
        {"numerics",
         {{"dt_us", 0.0016},
          {"sample_dt_us", 0.05},
          {"d_max", 256},
          {"trunc_eps", 1e-10},
          {"entropy_cuts", {13, 25, 38}}}},
    };
}

inline json quench_common(int n, const char* backend, double v_nn, double duration,
                          const char* initial) {
    return {
        {"experiment", "quench"},
        {"model", {{"n_atoms", n}, {"spacing_um", 5.74}, {"v_nn_mhz", v_nn}}},
        {"backend", backend},
        {"schedule",
         {{"type", "constant"},
          {"omega_mhz", 2.0},
          {"delta_mhz", 0.0},
          {"duration_us", duration},
          {"initial", initial}}},
        {"numerics", {{"dt_us", 0.005}, {"sample_dt_us", 0.01}}},
    };
}

inline json preset_fig6_quench9() {
    json j = quench_common(9, "exact_constrained", 24.0, 2.5, "crystal");
    j["description"] = "sudden-detuning quench from the crystal, 9 atoms";
    return j;
}

inline json preset_fig6_quench25() {
    json j = quench_common(25, "exact_constrained", 24.0, 1.5, "crystal");
    j["description"] = "crystal quench at 25 atoms: long-lived density-wave revivals";
    return j;
}

inline json preset_fig6_quench51() {
    json j = quench_common(51, "mps", 24.0, 0.8, "crystal");
    j["description"] = "crystal quench at 51 atoms, D=256 (long runtime)";
    j["numerics"] = {{"dt_us", 0.0016},
                     {"sample_dt_us", 0.01},
                     {"d_max", 256},
                     {"trunc_eps", 1e-10},
                     {"entropy_cuts", {13, 25, 38}}};
    return j;
}

inline json preset_ed9_variational() {
    json j = quench_common(9, "exact_constrained", 24.0, 2.0, "crystal");
    j["description"] =
        "crystal quench with the bond-2 variational trajectory written alongside";
    j["schedule"]["variational_overlay"] = true;
    return j;
}

inline json preset_ed10_quench25() {
    json j = quench_common(25, "constrained_with_tail", 25.6, 1.5, "crystal");
    j["description"] = "crystal quench with the next-neighbour interaction tail kept";
    return j;
}

inline json preset_thermal_51() {
    return {
        {"experiment", "thermal"},
        {"description", "thermal crystal ensemble at 51 atoms, calibrated to the "
                        "observed dressed wall count"},
        {"model", {{"n_atoms", 51}}},
        {"ensemble",
         {{"delta_mhz", 14.0},
          {"v1_mhz", 24.0},
          {"v2_mhz", 0.38},
          {"target_dressed_walls", 9.01}}},
        {"detection", {{"f_g", 0.99}, {"f_r", 0.93}}},
    };
}

inline json preset_reconstruct_demo() {
    return {
        {"experiment", "reconstruct"},
        {"description", "closed-loop readout inversion: synthetic shots through the "
                        "detection channel, parent recovered by maximum likelihood"},
        {"model", {{"n_atoms", 51}}},
        {"reconstruction",
         {{"delta_mhz", 14.0},
          {"v1_mhz", 24.0},
          {"v2_mhz", 0.38},
          {"beta_times_delta", 3.44},
          {"response_method", "auto"},
          {"response_samples", 200000},
          {"n_restarts", 5},
          {"bootstrap_resamples", 200}}},
        {"detection", {{"f_g", 0.99}, {"f_r", 0.93}}},
        {"sampling", {{"n_shots", 20000}, {"seed", 1010}}},
    };
}

inline const std::vector<PresetEntry>& preset_table() {
    static const std::vector<PresetEntry> table = {
        {"fig1d_rabi", "blockaded collective Rabi ladder, 1..3 atoms", preset_fig1d_rabi},
        {"fig3_sweep7", "crystal-forming sweep, 7 atoms, exact", preset_fig3_sweep7},
        {"fig5_z2_31", "ordering sweep, 31 atoms, MPS D=64", preset_fig5_z2_31},
        {"fig5_z2_51", "ordering sweep, 51 atoms, MPS D=256 (slow)", preset_fig5_z2_51},
        {"fig6_quench9", "crystal quench, 9 atoms", preset_fig6_quench9},
        {"fig6_quench25", "crystal quench, 25 atoms", preset_fig6_quench25},
        {"fig6_quench51", "crystal quench, 51 atoms, MPS (slow)", preset_fig6_quench51},
        {"ed9_variational", "crystal quench with variational overlay", preset_ed9_variational},
        {"ed10_quench25", "quench with interaction tail, 25 atoms", preset_ed10_quench25},
        {"thermal_51", "calibrated thermal ensemble, 51 atoms", preset_thermal_51},
        {"reconstruct_demo", "readout-error inversion demo", preset_reconstruct_demo},
    };
    return table;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& e : detail::preset_table()) names.push_back(e.name);
    return names;
}

inline std::string preset_description(const std::string& name) {
    for (const auto& e : detail::preset_table())
        if (name == e.name) return e.description;
    throw ValidationError("unknown preset: " + name);
}

inline nlohmann::json preset_config(const std::string& name) {
    for (const auto& e : detail::preset_table())
        if (name == e.name) return e.build();
    throw ValidationError("unknown preset: " + name);
}

}  // namespace rydsim
