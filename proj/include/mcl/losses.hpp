#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "mcl/batching.hpp"
#include "mcl/masking.hpp"

namespace mcl {

// Rows are the 2N latent vectors z_i produced by the encoder and projection
// head, in the interleaved view order of the batch.
using EmbeddingMatrix = Eigen::MatrixXd;

struct SimilarityMatrix {
    Eigen::MatrixXd values;  // symmetric, entries in [-1, 1], unit diagonal
    int rows() const { return static_cast<int>(values.rows()); }
};

// Throws on zero-norm rows. Exactly symmetric by construction.
SimilarityMatrix cosine_similarity(const EmbeddingMatrix& z);

// total == ccm + lambda * spa; per_view holds each query's share so that the
// entries sum back to total.
struct LossValue {
    double total = 0.0;
    double ccm = 0.0;
    double spa = 0.0;
    double lambda = 0.0;
    std::vector<double> per_view;
};

enum class SpaMode { expectation, single_sample };
enum class LossKind { ntxent, ccm, mcl, supclr };

// Contrastive loss over the interleaved positive pairs at temperature tau.
LossValue nt_xent_loss(const SimilarityMatrix& s, double tau);

// Same pair structure, but the denominator logits are sim * mask entry
// while the numerator keeps sim / tau.
LossValue ccm_loss(const SimilarityMatrix& s, const MaskMatrix& mask, double tau);

// Stochastic positive attraction. Expectation mode averages over every
// positive partner and is deterministic; single_sample draws one partner
// per query from the named sub-stream. Queries with no positive partner
// contribute zero. The denominator excludes all views sharing the query's
// parent image.
LossValue spa_loss(const SimilarityMatrix& s, const MaskMatrix& mask,
                   const AugmentedBatch& batch, double tau,
                   SpaMode mode = SpaMode::expectation, std::uint64_t seed = 0);

// ccm + lambda * spa, with the hierarchical mask when aux is set.
LossValue mcl_loss(const EmbeddingMatrix& z, const AugmentedBatch& batch,
                   const MclConfig& cfg, bool aux,
                   SpaMode mode = SpaMode::expectation, std::uint64_t seed = 0);

// Supervised contrastive loss: every query averages -log p over all views
// sharing its main label, including the view from its own parent image.
LossValue supclr_loss(const EmbeddingMatrix& z, const AugmentedBatch& batch, double tau);

// Fine-tuning objective: ce + lambda_j * simclr.total.
double joint_loss(double ce, const LossValue& simclr, double lambda_j);

// p_spa(q, r): exp(sim/tau) over the masked sum that excludes the query's
// parent views. q0/r0 are 0-based rows. Not a normalized probability; the
// numerator temperature differs from the masked positive entries below.
double spa_probability(const SimilarityMatrix& s, const MaskMatrix& mask,
                       const AugmentedBatch& batch, double tau, int q0, int r0);

// Exact d(spa loss)/d(sim_{q,r}) treating sim_{q,r} as query q's entry, for
// r in q's positive batch. Negative whenever alpha sits inside the
// attraction window.
double spa_gradient_wrt_similarity(const SimilarityMatrix& s, const MaskMatrix& mask,
                                   const AugmentedBatch& batch, double tau, int q0, int r0);

// Analytic d(loss)/dZ for the selected loss, rows aligned with z. SPA inside
// mcl uses expectation mode.
EmbeddingMatrix loss_gradient(const EmbeddingMatrix& z, const AugmentedBatch& batch,
                              const MclConfig& cfg, LossKind which);

}  // namespace mcl
