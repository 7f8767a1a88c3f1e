#include "pinlab/common.hpp"
#include "pinlab/runner.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    using namespace pinlab;
    CLI::App app{"pinlab: numerical lab for the random-walk pinning model"};
    app.require_subcommand(1, 1);
    std::string config_path;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    for (const auto& name : runner::kCommands) {
        auto* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
        sub->add_option("--config", config_path, "experiment JSON file")->required();
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "master seed (overrides params.seed)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    runner::Overrides ov;
    ov.out = out;
    ov.threads = threads;
    ov.seed = seed;
    if (const char* c = std::getenv("PINLAB_CACHE"); c && *c) ov.cache_dir = std::string(c);

    try {
        auto cfg = runner::load_config(config_path, command);
        auto m = runner::run(cfg, ov);
        for (const auto& f : m.files) std::cout << f.name << "  " << f.sha256 << "\n";
        std::cout << "manifest.json written (" << m.wall_time << " s)\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "pinlab: config error: " << e.what() << "\n";
        return 1;
    } catch (const ToleranceNotMet& e) {
        std::cerr << "pinlab: numerical failure: " << e.what() << " (achieved " << e.achieved() << ")\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "pinlab: numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "pinlab: error: " << e.what() << "\n";
        return 2;
    }
}
