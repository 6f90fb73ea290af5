#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"

namespace pinchfl {

// Gaussian-mixture classification task: one spherical cluster per class.
struct SyntheticTask {
    std::size_t classes = 10;
    std::size_t features = 32;
    double noise = 1.0;
    std::vector<double> class_means;   // classes x features, row-major

    static SyntheticTask make(std::size_t classes, std::size_t features, double mean_scale,
                              double noise, std::uint64_t seed);

    // One sample of the given class appended to `out`.
    void sample(int label, Rng& rng, std::vector<double>& out) const;
};

struct LocalDataset {
    std::uint32_t owner = 0;
    std::size_t count = 0;
    std::size_t feature_dim = 0;
    std::vector<double> features;   // count x feature_dim, row-major
    std::vector<int> labels;
};

// Class-wise concentration-parameterized split: for every class, client
// shares are drawn from a flat Dirichlet(alpha_skew) and sample counts are
// apportioned by largest remainder; each client ends with at least one
// sample.  Sum of client sizes equals `total`.
std::vector<LocalDataset> partition_noniid(const SyntheticTask& task, std::size_t total,
                                           std::size_t num_clients, double alpha_skew,
                                           std::uint64_t seed);

// IID evaluation split drawn from the same mixture.
LocalDataset make_eval_set(const SyntheticTask& task, std::size_t count, std::uint64_t seed);

// Flat linear softmax model: weights (classes x features, row-major)
// followed by per-class biases.
struct ModelParams {
    std::size_t classes = 0;
    std::size_t features = 0;
    std::vector<double> values;

    static ModelParams zeros(std::size_t classes, std::size_t features);
    std::size_t dim() const { return classes * features + classes; }
};

// Mean multi-class cross-entropy over the dataset.
double local_loss(const ModelParams& params, const LocalDataset& data);

// Gradient of local_loss with respect to every parameter.
std::vector<double> local_grad(const ModelParams& params, const LocalDataset& data);

// One full-batch step: params - lr * grad.
ModelParams local_sgd_step(const ModelParams& params, const LocalDataset& data, double lr);

// Dataset-size weighted average of client models.
ModelParams aggregate(const std::vector<ModelParams>& models, const std::vector<double>& sizes);

// Fraction of correctly argmax-classified samples (ties to the lower class).
double accuracy(const ModelParams& params, const LocalDataset& data);

struct FlRoundLog {
    std::size_t round = 0;
    double wall_clock_s = 0.0;
    double round_t_s = 0.0;
    double accuracy = 0.0;
    double max_accuracy = 0.0;
    std::string scheme;
    std::uint64_t seed = 0;
};

struct FlRunSpec {
    std::size_t rounds = 100;        // used when budget_s <= 0
    double budget_s = 0.0;           // wall-clock budget; > 0 enables budget mode
    double lr = 0.1;
    std::string scheme = "optimized";
};

// Fixed-participant FL loop: every round the selected clients take one local
// full-batch step from the global model and are aggregated by dataset size;
// wall clock advances by the round latency of the scheme's solved resource
// allocation.
std::vector<FlRoundLog> run_fl(const FlRunSpec& spec, double round_latency,
                               const std::vector<LocalDataset>& participant_data,
                               const LocalDataset& eval_set, std::size_t classes,
                               std::size_t features, std::uint64_t seed);

} // namespace pinchfl
