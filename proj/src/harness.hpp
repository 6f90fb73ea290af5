#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "ddpg.hpp"
#include "fl.hpp"
#include "fuzzy.hpp"
#include "noma.hpp"
#include "oracle.hpp"

namespace pinchfl {

// Orchestration of the CLI subcommands over one output directory.  Artifacts
// are plain CSV/JSON files; reruns with the same config and seed are
// byte-identical in single-threaded mode.

struct Population {
    std::vector<ClientProfile> clients;
    std::vector<double> gains;   // server-link |h|^2 per client (fading applied)
};

// Deterministic population draw from the master seed.
Population generate_population(const ExperimentConfig& cfg);

// Selected-participant instance assembled from classification artifacts.
RoundInstance build_instance(const ExperimentConfig& cfg,
                             const std::vector<ClientProfile>& roster,
                             const std::vector<double>& gains,
                             const std::vector<std::uint32_t>& conventional_ids,
                             const std::vector<std::uint32_t>& pinching_ids);

// classify | solve | train-ddpg | oracle | run-fl | compare; throws
// ConfigError/DependencyError/DivergenceError on failure.
void run_subcommand(const std::string& name, const ExperimentConfig& cfg,
                    const std::string& out_dir, unsigned threads);

// Shared serialization helpers (used by tests as well).
std::string classification_csv(const SelectionResult& sel);
std::string rewards_csv(const std::vector<EpisodeStat>& history);
std::string fl_log_csv(const std::vector<FlRoundLog>& logs);
std::string decision_json_text(const RoundDecision& d);
RoundDecision decision_from_json_text(const std::string& text);

} // namespace pinchfl
