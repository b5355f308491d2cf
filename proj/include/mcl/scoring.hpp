#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mcl/batching.hpp"

namespace mcl {

// Diagonal regularization added before inverting a cell covariance.
// relative scales with trace(Sigma)/d; floor keeps zero-covariance cells
// (all-identical samples) invertible.
struct RidgePolicy {
    double relative = 1e-6;
    double floor = 1e-9;
    bool unbiased = false;  // divide by n-1 instead of n
};

struct ClassGaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd precision;  // inverse of covariance + ridge * I
    double ridge = 0.0;
};

// One Gaussian per (main label, aux label) cell, complete over the grid.
struct ClassGaussianBank {
    int c_main = 0;
    int c_aux = 1;
    int dim = 0;
    std::vector<ClassGaussian> cells;  // row-major: (main-1) * c_aux + (aux-1)

    const ClassGaussian& cell(int main_label, int aux_label) const;
};

struct TrainingEmbedding {
    Eigen::VectorXd z;
    int main_label = 0;
    int aux_label = 1;
};

// Sample mean and covariance per cell, precision via an LLT factorization of
// the ridged covariance. Every cell needs at least two samples.
ClassGaussianBank fit_gaussians(const std::vector<TrainingEmbedding>& embeddings,
                                int c_main, int c_aux, const RidgePolicy& policy = {});

// Negative squared Mahalanobis distance of z against every main-label cell
// of the given aux column. Entries are <= 0 with 0 iff z equals the mean.
Eigen::VectorXd score_vector(const Eigen::VectorXd& z, const ClassGaussianBank& bank,
                             int aux_label);

struct Prediction {
    int label = 0;  // 1-based main label
    double confidence = 0.0;
};

// Plain scoring path: scores against the aux=1 column and takes the argmax,
// ties broken toward the lowest label index.
Prediction predict(const Eigen::VectorXd& z, const ClassGaussianBank& bank);

enum class Decision { ind, ood };

// IND iff confidence >= delta (boundary inclusive).
Decision decide(double confidence, double delta);

enum class Aggregation { avg, max, w_avg };

struct SeiOptions {
    Aggregation agg = Aggregation::w_avg;
    // Replaces the literal signed harmonic weights with magnitude-based ones.
    bool magnitude_weights = false;
};

struct SeiResult {
    int label = 0;
    double confidence = 0.0;
    Eigen::VectorXd aggregated;
    std::vector<Eigen::VectorXd> per_aux;
    int zero_perturbed = 0;  // scores nudged by -1e-12 to avoid division by zero
};

// Combines one score vector per aux label. avg averages per class, max takes
// the per-class maximum, w_avg weights each vector by the inverse sum of
// reciprocal scores and normalizes. Sums use a fixed pairwise order.
SeiResult aggregate_scores(const std::vector<Eigen::VectorXd>& per_aux, const SeiOptions& options);

using Encoder = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Self-ensemble inference: augments the item once per aux label, scores each
// copy against its own aux column, and aggregates.
SeiResult sei_predict(const Eigen::VectorXd& item_features, const ClassGaussianBank& bank,
                      const AugmentationFamily& family, const SeiOptions& options,
                      const Encoder& encoder);

}  // namespace mcl
