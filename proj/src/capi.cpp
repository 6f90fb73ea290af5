#include "pinchfl/pinchfl.h"

#include <exception>
#include <new>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "harness.hpp"

struct pfl_ctx {
    pinchfl::ExperimentConfig config;
    unsigned threads = 1;
    std::string last_error;
    std::string config_text;
};

namespace {

template <typename Fn>
pfl_status guarded(pfl_ctx* ctx, Fn&& fn) {
    if (!ctx) return PFL_ERR_CONFIG;
    try {
        fn();
        ctx->last_error.clear();
        return PFL_OK;
    } catch (const pinchfl::ConfigError& e) {
        ctx->last_error = e.what();
        return PFL_ERR_CONFIG;
    } catch (const pinchfl::DependencyError& e) {
        ctx->last_error = e.what();
        return PFL_ERR_DEPENDENCY;
    } catch (const pinchfl::DivergenceError& e) {
        ctx->last_error = e.what();
        return PFL_ERR_DIVERGENCE;
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return PFL_ERR_RUNTIME;
    } catch (...) {
        ctx->last_error = "unknown error";
        return PFL_ERR_RUNTIME;
    }
}

} // namespace

extern "C" {

const char* pfl_version(void) { return "0.1.0"; }

pfl_ctx* pfl_ctx_new(void) { return new (std::nothrow) pfl_ctx; }

void pfl_ctx_free(pfl_ctx* ctx) { delete ctx; }

const char* pfl_last_error(const pfl_ctx* ctx) {
    if (!ctx) return "null context";
    return ctx->last_error.c_str();
}

pfl_status pfl_load_config_file(pfl_ctx* ctx, const char* path) {
    return guarded(ctx, [&] {
        if (!path) throw pinchfl::ConfigError("config path is null");
        ctx->config = pinchfl::ExperimentConfig::from_file(path);
    });
}

pfl_status pfl_load_config_json(pfl_ctx* ctx, const char* json_text) {
    return guarded(ctx, [&] {
        if (!json_text) throw pinchfl::ConfigError("config text is null");
        ctx->config = pinchfl::ExperimentConfig::from_json_text(json_text);
    });
}

const char* pfl_config_json(pfl_ctx* ctx) {
    if (!ctx) return "";
    ctx->config_text = ctx->config.to_json_text();
    return ctx->config_text.c_str();
}

pfl_status pfl_set_override(pfl_ctx* ctx, const char* dotted_key, const char* value) {
    return guarded(ctx, [&] {
        if (!dotted_key || !value)
            throw pinchfl::ConfigError("override key and value must be non-null");
        ctx->config.apply_override(dotted_key, value);
    });
}

pfl_status pfl_set_seed(pfl_ctx* ctx, uint64_t seed) {
    return guarded(ctx, [&] { ctx->config.master_seed = seed; });
}

pfl_status pfl_set_parallel(pfl_ctx* ctx, int threads) {
    return guarded(ctx, [&] {
        if (threads < 1) throw pinchfl::ConfigError("--parallel must be at least 1");
        ctx->threads = static_cast<unsigned>(threads);
    });
}

pfl_status pfl_run(pfl_ctx* ctx, const char* subcommand, const char* out_dir) {
    return guarded(ctx, [&] {
        if (!subcommand) throw pinchfl::ConfigError("subcommand is null");
        if (!out_dir) throw pinchfl::ConfigError("output directory is null");
        pinchfl::run_subcommand(subcommand, ctx->config, out_dir, ctx->threads);
    });
}

} // extern "C"
