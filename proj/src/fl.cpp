#include "fl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace pinchfl {

SyntheticTask SyntheticTask::make(std::size_t classes, std::size_t features, double mean_scale,
                                  double noise, std::uint64_t seed) {
    if (classes < 2) throw ConfigError("fl.classes must be at least 2");
    if (features == 0) throw ConfigError("fl.features must be positive");
    if (!(noise > 0.0)) throw ConfigError("fl.noise must be positive");
    SyntheticTask task;
    task.classes = classes;
    task.features = features;
    task.noise = noise;
    task.class_means.resize(classes * features);
    Rng rng(seed);
    for (double& m : task.class_means) m = mean_scale * rng.normal();
    return task;
}

void SyntheticTask::sample(int label, Rng& rng, std::vector<double>& out) const {
    const double* mean = class_means.data() + static_cast<std::size_t>(label) * features;
    for (std::size_t f = 0; f < features; ++f) out.push_back(mean[f] + noise * rng.normal());
}

namespace {

// Integer apportionment of `total` by fractional weights: floor the quotas,
// then hand remaining units to the largest fractional parts (ties to the
// lower index).
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights,
                                           std::size_t total) {
    std::size_t n = weights.size();
    double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(n, 0);
    std::vector<double> frac(n, 0.0);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double quota = wsum > 0.0 ? weights[i] / wsum * static_cast<double>(total)
                                  : static_cast<double>(total) / static_cast<double>(n);
        counts[i] = static_cast<std::size_t>(quota);
        frac[i] = quota - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (frac[a] != frac[b]) return frac[a] > frac[b];
        return a < b;
    });
    for (std::size_t k = 0; assigned < total; ++k) {
        ++counts[order[k % n]];
        ++assigned;
    }
    return counts;
}

} // namespace

std::vector<LocalDataset> partition_noniid(const SyntheticTask& task, std::size_t total,
                                           std::size_t num_clients, double alpha_skew,
                                           std::uint64_t seed) {
    if (num_clients == 0) throw ConfigError("partition needs at least one client");
    if (total < num_clients)
        throw ConfigError("partition infeasible: total samples below client count");
    if (!(alpha_skew > 0.0)) throw ConfigError("fl.alpha_skew must be positive");
    Rng rng(seed);

    // Split the sample budget evenly over classes, then each class over
    // clients by a Dirichlet draw.
    std::vector<double> even(task.classes, 1.0);
    std::vector<std::size_t> class_totals = largest_remainder(even, total);
    std::vector<std::vector<std::size_t>> counts(num_clients,
                                                 std::vector<std::size_t>(task.classes, 0));
    for (std::size_t k = 0; k < task.classes; ++k) {
        std::vector<double> shares = rng.dirichlet(alpha_skew, num_clients);
        std::vector<std::size_t> alloc = largest_remainder(shares, class_totals[k]);
        for (std::size_t c = 0; c < num_clients; ++c) counts[c][k] = alloc[c];
    }

    // Guarantee every client at least one sample: move one from the largest.
    auto client_total = [&](std::size_t c) {
        return std::accumulate(counts[c].begin(), counts[c].end(), std::size_t{0});
    };
    for (std::size_t c = 0; c < num_clients; ++c) {
        while (client_total(c) == 0) {
            std::size_t donor = c, donor_total = 0;
            for (std::size_t d = 0; d < num_clients; ++d) {
                std::size_t t = client_total(d);
                if (t > donor_total) {
                    donor_total = t;
                    donor = d;
                }
            }
            std::size_t k = 0;
            for (std::size_t kk = 0; kk < task.classes; ++kk)
                if (counts[donor][kk] > counts[donor][k]) k = kk;
            --counts[donor][k];
            ++counts[c][k];
        }
    }

    std::vector<LocalDataset> out(num_clients);
    for (std::size_t c = 0; c < num_clients; ++c) {
        LocalDataset& d = out[c];
        d.owner = static_cast<std::uint32_t>(c);
        d.feature_dim = task.features;
        for (std::size_t k = 0; k < task.classes; ++k) {
            for (std::size_t s = 0; s < counts[c][k]; ++s) {
                task.sample(static_cast<int>(k), rng, d.features);
                d.labels.push_back(static_cast<int>(k));
            }
        }
        d.count = d.labels.size();
    }
    return out;
}

LocalDataset make_eval_set(const SyntheticTask& task, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw ConfigError("evaluation set must be nonempty");
    LocalDataset d;
    d.owner = 0;
    d.feature_dim = task.features;
    Rng rng(seed);
    std::vector<double> even(task.classes, 1.0);
    std::vector<std::size_t> per_class = largest_remainder(even, count);
    for (std::size_t k = 0; k < task.classes; ++k) {
        for (std::size_t s = 0; s < per_class[k]; ++s) {
            task.sample(static_cast<int>(k), rng, d.features);
            d.labels.push_back(static_cast<int>(k));
        }
    }
    d.count = d.labels.size();
    return d;
}

ModelParams ModelParams::zeros(std::size_t classes, std::size_t features) {
    ModelParams p;
    p.classes = classes;
    p.features = features;
    p.values.assign(classes * features + classes, 0.0);
    return p;
}

namespace {

// Stable softmax cross-entropy pieces shared by loss/grad/accuracy.
void logits_of(const ModelParams& p, const double* x, std::vector<double>& z) {
    z.resize(p.classes);
    const double* w = p.values.data();
    const double* b = p.values.data() + p.classes * p.features;
    for (std::size_t c = 0; c < p.classes; ++c) {
        double acc = b[c];
        const double* row = w + c * p.features;
        for (std::size_t f = 0; f < p.features; ++f) acc += row[f] * x[f];
        z[c] = acc;
    }
}

void check_dims(const ModelParams& p, const LocalDataset& d) {
    if (d.count == 0) throw ConfigError("local dataset is empty");
    if (d.feature_dim != p.features) throw ConfigError("dataset feature dimension mismatch");
    if (d.features.size() != d.count * d.feature_dim || d.labels.size() != d.count)
        throw ConfigError("dataset storage inconsistent");
    for (int y : d.labels)
        if (y < 0 || static_cast<std::size_t>(y) >= p.classes)
            throw ConfigError("dataset label outside class range");
}

} // namespace

double local_loss(const ModelParams& params, const LocalDataset& data) {
    check_dims(params, data);
    std::vector<double> z;
    double total = 0.0;
    for (std::size_t s = 0; s < data.count; ++s) {
        logits_of(params, data.features.data() + s * data.feature_dim, z);
        double zmax = *std::max_element(z.begin(), z.end());
        double lse = 0.0;
        for (double v : z) lse += std::exp(v - zmax);
        lse = zmax + std::log(lse);
        total += lse - z[static_cast<std::size_t>(data.labels[s])];
    }
    return total / static_cast<double>(data.count);
}

std::vector<double> local_grad(const ModelParams& params, const LocalDataset& data) {
    check_dims(params, data);
    std::vector<double> grad(params.values.size(), 0.0);
    double* gw = grad.data();
    double* gb = grad.data() + params.classes * params.features;
    std::vector<double> z;
    double inv = 1.0 / static_cast<double>(data.count);
    for (std::size_t s = 0; s < data.count; ++s) {
        const double* x = data.features.data() + s * data.feature_dim;
        logits_of(params, x, z);
        double zmax = *std::max_element(z.begin(), z.end());
        double denom = 0.0;
        for (double v : z) denom += std::exp(v - zmax);
        for (std::size_t c = 0; c < params.classes; ++c) {
            double p = std::exp(z[c] - zmax) / denom;
            double delta = (p - (static_cast<std::size_t>(data.labels[s]) == c ? 1.0 : 0.0)) * inv;
            gb[c] += delta;
            double* row = gw + c * params.features;
            for (std::size_t f = 0; f < params.features; ++f) row[f] += delta * x[f];
        }
    }
    return grad;
}

ModelParams local_sgd_step(const ModelParams& params, const LocalDataset& data, double lr) {
    if (!(lr >= 0.0)) throw ConfigError("fl.lr must be nonnegative");
    std::vector<double> grad = local_grad(params, data);
    ModelParams out = params;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= lr * grad[i];
    return out;
}

ModelParams aggregate(const std::vector<ModelParams>& models, const std::vector<double>& sizes) {
    if (models.empty()) throw ConfigError("aggregate needs at least one model");
    if (models.size() != sizes.size()) throw ConfigError("aggregate weight count mismatch");
    double total = std::accumulate(sizes.begin(), sizes.end(), 0.0);
    if (!(total > 0.0)) throw ConfigError("aggregate weights are degenerate (sum to zero)");
    ModelParams out = models[0];
    std::fill(out.values.begin(), out.values.end(), 0.0);
    for (std::size_t m = 0; m < models.size(); ++m) {
        if (models[m].values.size() != out.values.size())
            throw ConfigError("aggregate model dimension mismatch");
        double w = sizes[m] / total;
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += w * models[m].values[i];
    }
    return out;
}

double accuracy(const ModelParams& params, const LocalDataset& data) {
    check_dims(params, data);
    std::vector<double> z;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < data.count; ++s) {
        logits_of(params, data.features.data() + s * data.feature_dim, z);
        std::size_t arg = 0;
        for (std::size_t c = 1; c < z.size(); ++c)
            if (z[c] > z[arg]) arg = c;
        if (arg == static_cast<std::size_t>(data.labels[s])) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.count);
}

std::vector<FlRoundLog> run_fl(const FlRunSpec& spec, double round_latency,
                               const std::vector<LocalDataset>& participant_data,
                               const LocalDataset& eval_set, std::size_t classes,
                               std::size_t features, std::uint64_t seed) {
    if (participant_data.empty()) throw ConfigError("fl run needs participants");
    if (!(round_latency > 0.0) || !std::isfinite(round_latency))
        throw ConfigError("fl round latency must be positive and finite");
    std::size_t rounds = spec.rounds;
    if (spec.budget_s > 0.0)
        rounds = static_cast<std::size_t>(spec.budget_s / round_latency);

    ModelParams global = ModelParams::zeros(classes, features);
    std::vector<double> sizes;
    for (const auto& d : participant_data) sizes.push_back(static_cast<double>(d.count));

    std::vector<FlRoundLog> logs;
    double wall = 0.0, best = 0.0;
    for (std::size_t r = 0; r < rounds; ++r) {
        std::vector<ModelParams> locals;
        locals.reserve(participant_data.size());
        for (const auto& d : participant_data)
            locals.push_back(local_sgd_step(global, d, spec.lr));
        global = aggregate(locals, sizes);
        wall += round_latency;
        double acc = accuracy(global, eval_set);
        best = std::max(best, acc);
        logs.push_back(FlRoundLog{r + 1, wall, round_latency, acc, best, spec.scheme, seed});
    }
    return logs;
}

} // namespace pinchfl
