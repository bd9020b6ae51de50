#include "fantomette/presets.hpp"

#include "fantomette/analytics.hpp"

#include <fstream>
#include <sstream>

#ifndef FANTOMETTE_VERSION
#define FANTOMETTE_VERSION "0.1.0"
#endif

namespace fantomette {

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fork_length", "chain_quality",   "rational_payoff",
                                                "immunity",    "analytics_table", "baseline"};
    return names;
}

Preset find_preset(const std::string& name) {
    if (name == "fork_length" || name == "chain_quality") return {name, AgentClass::byzantine, {0, 12, 25, 37, 49}};
    if (name == "rational_payoff") return {name, AgentClass::rational, {0, 1, 12, 25, 37, 50}};
    if (name == "immunity") return {name, AgentClass::byzantine, {0, 12, 25, 37, 49, 60}};
    if (name == "analytics_table") return {name, std::nullopt, {}};
    if (name == "baseline") return {name, AgentClass::altruistic, {0}};
    throw std::invalid_argument("unknown preset '" + name + "'");
}

std::string build_version() { return FANTOMETTE_VERSION; }

std::string analytics_table_csv() {
    using namespace analytics;
    std::ostringstream os;
    os << "quantity,n,n_c,value\n";
    const auto third = make_params(150, 50);
    const auto quarter = make_params(150, 37);
    auto row = [&](const char* q, const CoalitionParams& p, double v) {
        os << q << ',' << p.n << ',' << p.n_c << ',' << format_fixed(v) << '\n';
    };
    row("expected_consecutive", third, expected_consecutive(third));
    row("grinding_expectation", third, grinding_expectation(third));
    row("harm_subdag_probability", third, harm_subdag_probability(third));
    row("harm_subdag_probability", quarter, harm_subdag_probability(quarter));
    row("immunity_ratio", third, immunity_ratio(third, 6.0, 1.0));
    row("immunity_ratio", quarter, immunity_ratio(quarter, 6.0, 1.0));
    return os.str();
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f << text;
    f.close();
    if (!f) throw IoError("failed writing " + p.string());
}

}  // namespace

std::vector<RunMetrics> run_preset(const Preset& preset, const SimConfig& cfg, const std::filesystem::path& out) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec || !std::filesystem::is_directory(out)) throw IoError("cannot create output directory " + out.string());

    std::ostringstream manifest;
    manifest << "preset=" << preset.name << "\n";
    manifest << "version=" << build_version() << "\n";
    manifest << "sizes=";
    for (std::size_t i = 0; i < preset.sizes.size(); ++i) manifest << (i ? "," : "") << preset.sizes[i];
    manifest << "\n" << config_echo(cfg);
    // Manifest first, so an unwritable directory fails before any long run.
    write_file(out / "manifest.txt", manifest.str());

    std::vector<RunMetrics> rows;
    if (!preset.cls) {
        write_file(out / "analytics.csv", analytics_table_csv());
        return rows;
    }
    if (*preset.cls == AgentClass::altruistic) {
        SimConfig c = cfg;
        c.f_byzantine = 0.0;
        c.f_rational = 0.0;
        c.f_altruistic = 1.0;
        for (std::uint64_t r = 0; r < cfg.runs; ++r) rows.push_back(run_simulation(c, r));
    } else {
        rows = sweep(cfg, preset.sizes, *preset.cls);
    }
    std::ostringstream m, p, f;
    write_metrics_csv(m, rows);
    write_payoffs_csv(p, rows);
    write_finality_csv(f, rows);
    write_file(out / "metrics.csv", m.str());
    write_file(out / "payoffs.csv", p.str());
    write_file(out / "finality_events.csv", f.str());
    return rows;
}

}  // namespace fantomette
