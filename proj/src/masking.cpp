#include "mcl/masking.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mcl/errors.hpp"

namespace mcl {

void MclConfig::validate(bool aux) const {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(alpha > 0.0) || alpha > inv_tau() + 1e-15) {
        throw ValidationError("alpha must satisfy 0 < alpha <= 1/tau, got alpha=" +
                              std::to_string(alpha) + " with 1/tau=" + std::to_string(inv_tau()));
    }
    if (lambda < 0.0) throw ValidationError("lambda must be nonnegative");
    if (aux) {
        if (!(alpha < beta) || beta > inv_tau() + 1e-15) {
            throw ValidationError("aux mask requires 0 < alpha < beta <= 1/tau");
        }
    }
}

MaskMatrix build_ccm(const AugmentedBatch& batch, const MclConfig& cfg) {
    cfg.validate(false);
    const int n = batch.size();
    MaskMatrix mask;
    mask.values.resize(n, n);
    const double rep = cfg.inv_tau();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            mask.values(i, j) = batch.main_labels[i] == batch.main_labels[j] ? cfg.alpha : rep;
        }
    }
    return mask;
}

MaskMatrix build_ccm_aux(const AugmentedBatch& batch, const MclConfig& cfg) {
    if (!batch.has_aux()) throw ValidationError("build_ccm_aux: batch carries no aux labels");
    cfg.validate(cfg.aux_enabled());
    const int n = batch.size();
    MaskMatrix mask;
    mask.values.resize(n, n);
    const double rep = cfg.inv_tau();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (batch.main_labels[i] != batch.main_labels[j]) {
                mask.values(i, j) = rep;
            } else if (batch.aux_labels[i] == batch.aux_labels[j]) {
                mask.values(i, j) = cfg.alpha;
            } else {
                mask.values(i, j) = cfg.beta;
            }
        }
    }
    return mask;
}

double default_expected_positives(const MclConfig& cfg) {
    const double c_total = cfg.aux_enabled() ? static_cast<double>(cfg.c_main) * cfg.c_aux
                                             : static_cast<double>(cfg.c_main);
    return 2.0 * cfg.batch_n / c_total;
}

ValidityReport validate_hparams(const MclConfig& cfg, double expected_pos) {
    ValidityReport r;
    r.attraction_bound = 1.0 / (cfg.tau * expected_pos);
    const double pairs = 2.0 * cfg.batch_n - 2.0;
    r.convergence_bound = pairs > 0.0
                              ? cfg.lambda / (cfg.tau * (1.0 + cfg.lambda) * pairs)
                              : std::numeric_limits<double>::infinity();
    r.attraction_ok = cfg.alpha < r.attraction_bound;
    r.convergence_ok = cfg.alpha >= r.convergence_bound;
    r.overall_ok = r.attraction_ok && r.convergence_ok;
    return r;
}

ValidityReport validate_hparams(const MclConfig& cfg) {
    return validate_hparams(cfg, default_expected_positives(cfg));
}

ValidityReport MclConfig::validity(double expected_pos) const {
    return expected_pos > 0.0 ? validate_hparams(*this, expected_pos)
                              : validate_hparams(*this);
}

}  // namespace mcl
