#pragma once

#include <cstdint>
#include <vector>

#include "mcl/batching.hpp"

namespace mcl {

// Gaussian-cluster benchmark standing in for the image datasets: c_main
// class clusters in d_in dimensions, with the anomaly classes held out of
// training and served as the OOD test set.
struct SyntheticSpec {
    int c_main = 10;
    int samples_per_class = 300;
    int test_samples_per_class = 150;
    int d_in = 16;
    double spread = 2.0;        // within-cluster stddev
    double center_scale = 2.0;  // stddev of the cluster centers
    std::vector<int> anomaly_classes = {9, 10};
    std::uint64_t seed = 1;
};

struct Dataset {
    std::vector<LabeledItem> train;     // labels remapped to 1..n_train_classes
    std::vector<LabeledItem> test_ind;  // same label space as train
    std::vector<LabeledItem> test_ood;  // labels keep the original class ids
    int n_train_classes = 0;
    int d_in = 0;
};

Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace mcl
