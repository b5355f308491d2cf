#include "mcl/synthetic.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "mcl/errors.hpp"
#include "mcl/rng.hpp"

namespace mcl {

namespace {

Vec gaussian_vector(int d, std::mt19937_64& rng, std::normal_distribution<double>& dist) {
    Vec v(d);
    for (int i = 0; i < d; ++i) v[i] = dist(rng);
    return v;
}

}  // namespace

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.c_main < 2) throw ValidationError("synthetic spec needs at least 2 classes");
    if (spec.d_in < 2) throw ValidationError("synthetic spec needs d_in >= 2");
    if (!(spec.spread > 0.0)) throw ValidationError("cluster spread must be positive");
    if (spec.samples_per_class < 1 || spec.test_samples_per_class < 1) {
        throw ValidationError("per-class sample counts must be positive");
    }

    std::set<int> anomalies(spec.anomaly_classes.begin(), spec.anomaly_classes.end());
    for (int c : anomalies) {
        if (c < 1 || c > spec.c_main) {
            throw ValidationError("anomaly class " + std::to_string(c) + " outside [1, " +
                                  std::to_string(spec.c_main) + "]");
        }
    }
    const int n_train_classes = spec.c_main - static_cast<int>(anomalies.size());
    if (n_train_classes < 2) {
        throw ValidationError("fewer than 2 training classes after holding out anomalies");
    }

    auto center_rng = substream(spec.seed, "data/centers");
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> centers(spec.c_main);
    for (int c = 0; c < spec.c_main; ++c) {
        centers[c] = spec.center_scale * gaussian_vector(spec.d_in, center_rng, unit);
    }

    // Training classes keep their original order but are relabeled 1..T.
    std::vector<int> train_classes;
    for (int c = 1; c <= spec.c_main; ++c) {
        if (!anomalies.count(c)) train_classes.push_back(c);
    }

    Dataset out;
    out.n_train_classes = n_train_classes;
    out.d_in = spec.d_in;

    auto train_rng = substream(spec.seed, "data/train");
    auto test_rng = substream(spec.seed, "data/test-ind");
    for (std::size_t t = 0; t < train_classes.size(); ++t) {
        const Vec& mu = centers[train_classes[t] - 1];
        const int label = static_cast<int>(t) + 1;
        for (int s = 0; s < spec.samples_per_class; ++s) {
            out.train.push_back({mu + spec.spread * gaussian_vector(spec.d_in, train_rng, unit), label});
        }
        for (int s = 0; s < spec.test_samples_per_class; ++s) {
            out.test_ind.push_back({mu + spec.spread * gaussian_vector(spec.d_in, test_rng, unit), label});
        }
    }

    auto ood_rng = substream(spec.seed, "data/test-ood");
    for (int c : anomalies) {
        const Vec& mu = centers[c - 1];
        for (int s = 0; s < spec.samples_per_class; ++s) {
            out.test_ood.push_back({mu + spec.spread * gaussian_vector(spec.d_in, ood_rng, unit), c});
        }
    }
    return out;
}

}  // namespace mcl
