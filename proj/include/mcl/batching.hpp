#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace mcl {

using Vec = Eigen::VectorXd;

// One training example: a feature vector and its class id in [1, C_main].
struct LabeledItem {
    Vec features;
    int main_label = 0;
};

enum class AuxMode { none, labeled, unlabeled };

// A batch of N items augmented twice each. Views are stored interleaved:
// rows 0,1 come from item 1, rows 2,3 from item 2, and so on, which makes
// the index arithmetic of the loss formulas literal. View indices are
// 1-based in the public operations and 0-based in storage; the conversion
// lives entirely in this module.
struct AugmentedBatch {
    std::vector<Vec> views;
    std::vector<int> main_labels;
    std::vector<int> aux_labels;    // empty unless built with AuxMode::labeled
    std::vector<int> parent_index;  // (i - 1) \ 2 for 1-based view index i

    int size() const { return static_cast<int>(views.size()); }
    bool has_aux() const { return !aux_labels.empty(); }

    // Views with the same label as view i drawn from a different parent
    // image. Takes and returns 1-based view indices, sorted ascending.
    std::vector<int> positive_batch(int view_index) const;

    // Same set with 0-based row indices, for the loss kernels.
    std::vector<int> positives0(int row) const;

    bool same_parent0(int a, int b) const { return parent_index[a] == parent_index[b]; }

    // Rows of all views stacked into a size x d matrix.
    Eigen::MatrixXd view_matrix() const;
};

enum class AuxKind { none, rotations4, rotations_flip8, identity };

// The pre-defined transform family T. A view is produced by drawing one of
// the stochastic transforms uniformly and applying it; the auxiliary
// transforms are a finite labeled set of size c_aux applied on top.
struct StochasticTransform {
    double noise_scale = 0.1;   // additive gaussian noise stddev
    double dropout_rate = 0.0;  // per-coordinate zeroing probability
};

struct AugmentationFamily {
    std::vector<StochasticTransform> transforms = {StochasticTransform{}};
    AuxKind aux_kind = AuxKind::none;
    int c_aux = 1;

    Vec apply_stochastic(const Vec& x, std::mt19937_64& rng) const;

    // Deterministic aux transform for label m in [1, c_aux]; m == 1 is the
    // identity. rotations4 rotates consecutive coordinate pairs by
    // (m-1) * 90 degrees; rotations_flip8 composes a sign flip of the first
    // coordinate with the four rotations.
    Vec apply_aux(const Vec& x, int m) const;

    static AugmentationFamily plain(double noise, double dropout);
    static AugmentationFamily rotations4(double noise, double dropout);
    static AugmentationFamily rotations_flip8(double noise, double dropout);
    static AugmentationFamily identity_aux(int c_aux);
};

// Augments each item twice in interleaved order. With aux_mode == labeled
// every view gets an independently drawn aux transform and carries its
// label; with aux_mode == unlabeled the transforms are applied but no label
// is attached. Deterministic given (batch, family, seed).
AugmentedBatch augment_batch(const std::vector<LabeledItem>& batch,
                             const AugmentationFamily& family,
                             std::uint64_t seed, AuxMode aux_mode);

}  // namespace mcl
