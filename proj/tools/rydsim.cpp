#include <array>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "rydsim/config.hpp"
#include "rydsim/errors.hpp"
#include "rydsim/presets.hpp"
#include "rydsim/run.hpp"
#include "rydsim/version.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    auto* cfg = sub->add_option("--config", a.config_path, "experiment config (JSON file)");
    auto* pre = sub->add_option("--preset", a.preset, "built-in preset name (see `rydsim presets`)");
    cfg->excludes(pre);
    pre->excludes(cfg);
    sub->add_option("--out", a.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", a.seed, "override sampling.seed from the command line");
}

int run_kind(rydsim::ExperimentKind kind, const CommonArgs& a) {
    using namespace rydsim;
    nlohmann::json root;
    if (!a.preset.empty())
        root = preset_config(a.preset);
    else if (!a.config_path.empty())
        root = load_config_json(a.config_path);
    else
        throw ValidationError("give exactly one of --config or --preset");
    if (a.seed) root["sampling"]["seed"] = *a.seed;
    const ExperimentConfig cfg = parse_config(root);
    if (cfg.kind != kind)
        throw ValidationError(std::string("config describes a '") + to_string(cfg.kind) +
                              "' experiment; run it under that subcommand");
    const RunArtifacts art = run_experiment(cfg, a.out_dir);
    for (const auto& p : art.files) std::cout << "wrote " << p.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven Rydberg-chain simulation and analysis"};
    app.set_version_flag("--version", rydsim::version_string);
    app.require_subcommand(1);

    const std::array<std::pair<const char*, rydsim::ExperimentKind>, 5> kinds = {{
        {"rabi", rydsim::ExperimentKind::rabi},
        {"sweep", rydsim::ExperimentKind::sweep},
        {"quench", rydsim::ExperimentKind::quench},
        {"thermal", rydsim::ExperimentKind::thermal},
        {"reconstruct", rydsim::ExperimentKind::reconstruct},
    }};
    const std::array<const char*, 5> blurbs = {
        "collective Rabi oscillations on a ladder of chain lengths",
        "detuning sweep across the ordering transition",
        "sudden quench to zero detuning",
        "thermal ensemble of the crystal (transfer matrices)",
        "recover a parent wall distribution from noisy shots",
    };
    std::array<CommonArgs, 5> args;
    std::array<CLI::App*, 5> subs{};
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        subs[i] = app.add_subcommand(kinds[i].first, blurbs[i]);
        add_common(subs[i], args[i]);
    }

    CLI::App* presets = app.add_subcommand("presets", "list built-in presets");
    std::string dump_name;
    presets->add_option("--preset", dump_name, "print this preset's config as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (presets->parsed()) {
            if (!dump_name.empty()) {
                std::cout << rydsim::preset_config(dump_name).dump(2) << "\n";
            } else {
                for (const auto& name : rydsim::preset_names())
                    std::cout << name << "\t" << rydsim::preset_description(name) << "\n";
            }
            return 0;
        }
        for (std::size_t i = 0; i < kinds.size(); ++i)
            if (subs[i]->parsed()) return run_kind(kinds[i].second, args[i]);
    } catch (const rydsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
