#pragma once

#include <vector>

namespace mcl {

struct ScoredSample {
    double confidence = 0.0;
    bool is_ind = false;
};

// Rank-statistic AUROC; ties between an IND and an OOD confidence count 0.5.
double auroc(const std::vector<ScoredSample>& samples);

// Fraction of OOD samples at or above the largest threshold delta whose
// inclusive rule (confidence >= delta) reaches the target TPR. No
// interpolation: delta is always one of the observed confidences.
double fpr_at_tpr(const std::vector<ScoredSample>& samples, double tpr_target = 0.95);

enum class PositiveClass { ind, ood };

// Average precision with step-wise integration over the distinct
// thresholds: descending confidence when IND is the positive class,
// ascending when OOD is.
double aupr(const std::vector<ScoredSample>& samples, PositiveClass positive);

struct MetricReport {
    double auroc = 0.0;
    double fpr_at_95 = 0.0;
    double aupr_ind = 0.0;
    double aupr_ood = 0.0;
    int n_ind = 0;
    int n_ood = 0;
};

MetricReport compute_metrics(const std::vector<ScoredSample>& samples);

}  // namespace mcl
