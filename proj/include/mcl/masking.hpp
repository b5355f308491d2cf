#pragma once

#include <Eigen/Dense>

#include "mcl/batching.hpp"

namespace mcl {

struct ValidityReport;

// Loss hyper-parameters. alpha is the same-label repelling ratio, beta the
// same-main/different-aux ratio of the hierarchical mask, lambda the weight
// of the stochastic positive attraction term.
//
// Validity against the attraction/convergence windows is carried by
// validity(); mask construction accepts the full range 0 < alpha <= 1/tau so
// the degenerate alpha == 1/tau (plain NT-Xent) case stays expressible.
struct MclConfig {
    double tau = 0.2;
    double alpha = 0.05;
    double beta = 2.5;
    double lambda = 1.0;
    int batch_n = 1024;  // N, parent images per batch
    int c_main = 10;
    int c_aux = 1;  // 1 disables the auxiliary task

    bool aux_enabled() const { return c_aux > 1; }
    double inv_tau() const { return 1.0 / tau; }

    // Throws ValidationError when the masking constraints are violated.
    void validate(bool aux) const;

    // Attraction/convergence window report; expected_pos <= 0 derives the
    // 2N / C default.
    ValidityReport validity(double expected_pos = 0.0) const;
};

// Per-pair temperature factors, entries in {alpha, beta, 1/tau}. The
// diagonal is stored for shape convenience but every consumer skips it; the
// k != i indicator lives in the loss kernels.
struct MaskMatrix {
    Eigen::MatrixXd values;
};

// entry(i,j) = alpha when labels match, 1/tau otherwise.
MaskMatrix build_ccm(const AugmentedBatch& batch, const MclConfig& cfg);

// entry(i,j) = alpha when main and aux both match, beta when only main
// matches, 1/tau otherwise. Requires aux labels on the batch.
MaskMatrix build_ccm_aux(const AugmentedBatch& batch, const MclConfig& cfg);

struct ValidityReport {
    double attraction_bound = 0.0;   // 1 / (tau * expected_pos)
    double convergence_bound = 0.0;  // lambda / (tau (1 + lambda) (2N - 2))
    bool attraction_ok = false;      // alpha strictly below attraction_bound
    bool convergence_ok = false;     // alpha at or above convergence_bound
    bool overall_ok = false;
};

// Expected positive-batch size 2N / C with C the number of distinct
// (main, aux) cells when the auxiliary task is enabled.
double default_expected_positives(const MclConfig& cfg);

// Reports how alpha sits against the attraction and convergence windows.
// Never throws and never enforces; callers decide what to do with the flags.
ValidityReport validate_hparams(const MclConfig& cfg, double expected_pos);
ValidityReport validate_hparams(const MclConfig& cfg);

}  // namespace mcl
