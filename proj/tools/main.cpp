#include "fantomette/presets.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <sstream>

using namespace fantomette;

int main(int argc, char** argv) {
    CLI::App app{"Fantomette blockDAG simulator"};
    std::string config_path;
    std::string preset_name = "baseline";
    std::string out_dir = "out";
    std::string sizes_text;
    bool echo_only = false;
    std::optional<std::uint64_t> seed, runs, players, slots;
    app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    app.add_option("--preset", preset_name, "experiment to run")->check(CLI::IsMember(preset_names()));
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--runs", runs, "runs per coalition size");
    app.add_option("--players", players, "number of players");
    app.add_option("--slots", slots, "slots per run");
    app.add_option("--sizes", sizes_text, "comma-separated coalition sizes (overrides the preset)");
    app.add_flag("--print-config", echo_only, "print the effective config and exit");

    std::map<std::string, std::string> overrides;
    for (const auto& [key, value] : SimConfig{}.entries()) {
        if (key == "seed" || key == "runs" || key == "slots") continue;
        app.add_option("--" + key, overrides[key], "config override")->default_str(value);
    }
    CLI11_PARSE(app, argc, argv);

    try {
        SimConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path);
        for (const auto& [key, value] : overrides) {
            if (app.count("--" + key) > 0) cfg.set(key, value);
        }
        if (seed) cfg.seed = *seed;
        if (runs) cfg.runs = *runs;
        if (players) cfg.n_players = *players;
        if (slots) cfg.slots = *slots;
        cfg.validate();
        if (echo_only) {
            std::cout << config_echo(cfg);
            return 0;
        }

        Preset preset = find_preset(preset_name);
        if (!sizes_text.empty()) {
            preset.sizes.clear();
            std::stringstream ss(sizes_text);
            for (std::string item; std::getline(ss, item, ',');) preset.sizes.push_back(std::stoull(item));
        }
        const auto rows = run_preset(preset, cfg, out_dir);
        std::cout << "preset " << preset.name << ": " << rows.size() << " runs written to " << out_dir << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
