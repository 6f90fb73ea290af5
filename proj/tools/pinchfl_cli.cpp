// Command-line front end; talks to the library exclusively through the C API.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pinchfl/pinchfl.h"

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning round optimizer over a hybrid "
                 "conventional/waveguide-element uplink"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int parallel = 1;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "Path to a JSON config file");
        sub->add_option("--out", out_dir, "Output directory for artifacts");
        sub->add_option("--seed", seed, "Master seed (overrides seeds.master)")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--parallel", parallel, "Worker threads for data-parallel stages");
        sub->add_option("--set", overrides,
                        "Dotted-path config override key=value (repeatable)");
    };

    static const char* kSubcommands[] = {"classify", "solve", "train-ddpg",
                                         "oracle",   "run-fl", "compare"};
    static const char* kDescriptions[] = {
        "Generate the client population and run fuzzy selection",
        "Train the DDPG optimizer on the selected instance",
        "Alias of solve",
        "Exhaustive grid search over the decision box",
        "Run the federated-learning loop for one scheme",
        "Train and run all three schemes side by side"};
    for (std::size_t i = 0; i < 6; ++i) add_common(app.add_subcommand(kSubcommands[i], kDescriptions[i]));

    CLI11_PARSE(app, argc, argv);

    std::string sub = app.get_subcommands().front()->get_name();

    struct CtxDeleter {
        void operator()(pfl_ctx* p) const { pfl_ctx_free(p); }
    };
    std::unique_ptr<pfl_ctx, CtxDeleter> ctx(pfl_ctx_new());
    if (!ctx) {
        std::fprintf(stderr, "error: out of memory\n");
        return PFL_ERR_RUNTIME;
    }

    auto fail = [&](pfl_status status) -> int {
        std::fprintf(stderr, "error: %s\n", pfl_last_error(ctx.get()));
        return static_cast<int>(status);
    };

    if (!config_path.empty()) {
        pfl_status st = pfl_load_config_file(ctx.get(), config_path.c_str());
        if (st != PFL_OK) return fail(st);
    }
    for (const std::string& kv : overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
            return PFL_ERR_CONFIG;
        }
        pfl_status st = pfl_set_override(ctx.get(), kv.substr(0, eq).c_str(),
                                         kv.substr(eq + 1).c_str());
        if (st != PFL_OK) return fail(st);
    }
    if (seed_given) {
        pfl_status st = pfl_set_seed(ctx.get(), seed);
        if (st != PFL_OK) return fail(st);
    }
    pfl_status st = pfl_set_parallel(ctx.get(), parallel);
    if (st != PFL_OK) return fail(st);

    st = pfl_run(ctx.get(), sub.c_str(), out_dir.c_str());
    if (st != PFL_OK) return fail(st);
    std::printf("%s: artifacts written to %s\n", sub.c_str(), out_dir.c_str());
    return 0;
}
