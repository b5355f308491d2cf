#include "mcl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "mcl/errors.hpp"

namespace mcl {

namespace {

void check_samples(const std::vector<ScoredSample>& samples) {
    int n_ind = 0, n_ood = 0;
    for (const ScoredSample& s : samples) {
        if (!std::isfinite(s.confidence)) throw ValidationError("non-finite confidence");
        (s.is_ind ? n_ind : n_ood)++;
    }
    if (n_ind == 0 || n_ood == 0) {
        throw ValidationError("metrics need at least one IND and one OOD sample");
    }
}

}  // namespace

double auroc(const std::vector<ScoredSample>& samples) {
    check_samples(samples);
    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return samples[a].confidence < samples[b].confidence;
    });

    // Mann-Whitney with tie groups averaged; rank sums stay exact in halves.
    double rank_sum_ind = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() &&
               samples[order[j]].confidence == samples[order[i]].confidence) {
            ++j;
        }
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (samples[order[k]].is_ind) rank_sum_ind += avg_rank;
        }
        i = j;
    }

    int n_ind = 0, n_ood = 0;
    for (const ScoredSample& s : samples) (s.is_ind ? n_ind : n_ood)++;
    const double u = rank_sum_ind - static_cast<double>(n_ind) * (n_ind + 1) / 2.0;
    return u / (static_cast<double>(n_ind) * static_cast<double>(n_ood));
}

double fpr_at_tpr(const std::vector<ScoredSample>& samples, double tpr_target) {
    check_samples(samples);
    std::vector<double> ind, ood;
    for (const ScoredSample& s : samples) (s.is_ind ? ind : ood).push_back(s.confidence);
    std::sort(ind.begin(), ind.end(), std::greater<double>());
    std::sort(ood.begin(), ood.end(), std::greater<double>());

    std::vector<double> thresholds;
    thresholds.reserve(samples.size());
    std::merge(ind.begin(), ind.end(), ood.begin(), ood.end(), std::back_inserter(thresholds),
               std::greater<double>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    // Walk thresholds downward; TPR only grows, so the first threshold that
    // reaches the target is the largest qualifying delta.
    const double n_ind = static_cast<double>(ind.size());
    double delta = thresholds.back();
    std::size_t covered = 0;
    for (double t : thresholds) {
        while (covered < ind.size() && ind[covered] >= t) ++covered;
        if (static_cast<double>(covered) / n_ind >= tpr_target) {
            delta = t;
            break;
        }
    }

    std::size_t ood_passing = 0;
    while (ood_passing < ood.size() && ood[ood_passing] >= delta) ++ood_passing;
    return static_cast<double>(ood_passing) / static_cast<double>(ood.size());
}

double aupr(const std::vector<ScoredSample>& samples, PositiveClass positive) {
    check_samples(samples);
    const bool ind_positive = positive == PositiveClass::ind;

    // Order samples so positives are claimed first: descending confidence for
    // the IND perspective, ascending for the OOD perspective.
    std::vector<ScoredSample> sorted = samples;
    std::sort(sorted.begin(), sorted.end(), [&](const ScoredSample& a, const ScoredSample& b) {
        return ind_positive ? a.confidence > b.confidence : a.confidence < b.confidence;
    });

    int n_pos = 0;
    for (const ScoredSample& s : sorted) n_pos += (s.is_ind == ind_positive) ? 1 : 0;

    double ap_num = 0.0;
    int tp = 0, fp = 0, tp_prev = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].confidence == sorted[i].confidence) {
            (sorted[j].is_ind == ind_positive ? tp : fp)++;
            ++j;
        }
        const double precision = static_cast<double>(tp) / (tp + fp);
        ap_num += static_cast<double>(tp - tp_prev) * precision;
        tp_prev = tp;
        i = j;
    }
    return ap_num / n_pos;
}

MetricReport compute_metrics(const std::vector<ScoredSample>& samples) {
    MetricReport r;
    r.auroc = auroc(samples);
    r.fpr_at_95 = fpr_at_tpr(samples, 0.95);
    r.aupr_ind = aupr(samples, PositiveClass::ind);
    r.aupr_ood = aupr(samples, PositiveClass::ood);
    for (const ScoredSample& s : samples) (s.is_ind ? r.n_ind : r.n_ood)++;
    return r;
}

}  // namespace mcl
