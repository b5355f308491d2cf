// Independent reference implementations used to pin expected values. These
// deliberately avoid the library's code paths: plain loops, unstabilized
// exponentials, pairwise counting. Keep them dumb.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mcl/batching.hpp"
#include "mcl/metrics.hpp"

namespace oracle {

inline bool exact_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

// --- scalar loss references -------------------------------------------------

// Pair loss summed over interleaved pairs, 1/2N normalized.
inline double ntxent(const Eigen::MatrixXd& s, double tau) {
    const int n = static_cast<int>(s.rows());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int j = (i % 2 == 0) ? i + 1 : i - 1;
        double denom = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k != i) denom += std::exp(s(i, k) / tau);
        }
        total += -std::log(std::exp(s(i, j) / tau) / denom);
    }
    return total / n;
}

inline double ccm(const Eigen::MatrixXd& s, const Eigen::MatrixXd& mask, double tau) {
    const int n = static_cast<int>(s.rows());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const int j = (i % 2 == 0) ? i + 1 : i - 1;
        double denom = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k != i) denom += std::exp(s(i, k) * mask(i, k));
        }
        total += -std::log(std::exp(s(i, j) / tau) / denom);
    }
    return total / n;
}

// Positive set: same (composite) label, different parent; denominator drops
// every view sharing the query's parent.
inline double spa_expectation(const Eigen::MatrixXd& s, const Eigen::MatrixXd& mask,
                              const mcl::AugmentedBatch& batch, double tau) {
    const int n = static_cast<int>(s.rows());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<int> pos;
        for (int k = 0; k < n; ++k) {
            if (batch.parent_index[k] == batch.parent_index[i]) continue;
            if (batch.main_labels[k] != batch.main_labels[i]) continue;
            if (batch.has_aux() && batch.aux_labels[k] != batch.aux_labels[i]) continue;
            pos.push_back(k);
        }
        if (pos.empty()) continue;
        double denom = 0.0;
        for (int k = 0; k < n; ++k) {
            if (batch.parent_index[k] != batch.parent_index[i]) {
                denom += std::exp(s(i, k) * mask(i, k));
            }
        }
        double ell = 0.0;
        for (int j : pos) ell += -std::log(std::exp(s(i, j) / tau) / denom);
        total += ell / static_cast<double>(pos.size());
    }
    return total / n;
}

// All same-main-label views count as positives, paired view included.
inline double supclr(const Eigen::MatrixXd& s, const mcl::AugmentedBatch& batch, double tau) {
    const int n = static_cast<int>(s.rows());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<int> pos;
        for (int k = 0; k < n; ++k) {
            if (k != i && batch.main_labels[k] == batch.main_labels[i]) pos.push_back(k);
        }
        if (pos.empty()) continue;
        double denom = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k != i) denom += std::exp(s(i, k) / tau);
        }
        double ell = 0.0;
        for (int j : pos) ell += -std::log(std::exp(s(i, j) / tau) / denom);
        total += ell / static_cast<double>(pos.size());
    }
    return total / n;
}

// --- finite differences ------------------------------------------------------

template <typename LossFn>
Eigen::MatrixXd central_differences(const LossFn& loss, Eigen::MatrixXd z, double h = 1e-6) {
    Eigen::MatrixXd grad(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            const double save = z(r, c);
            z(r, c) = save + h;
            const double up = loss(z);
            z(r, c) = save - h;
            const double down = loss(z);
            z(r, c) = save;
            grad(r, c) = (up - down) / (2.0 * h);
        }
    }
    return grad;
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double denom = a.norm() + b.norm();
    if (denom == 0.0) return 0.0;
    return (a - b).norm() / denom;
}

// --- brute-force metric oracles -----------------------------------------------

inline double auroc_pairwise(const std::vector<mcl::ScoredSample>& samples) {
    double num = 0.0;
    long pairs = 0;
    for (const auto& a : samples) {
        if (!a.is_ind) continue;
        for (const auto& b : samples) {
            if (b.is_ind) continue;
            ++pairs;
            if (a.confidence > b.confidence) num += 1.0;
            else if (a.confidence == b.confidence) num += 0.5;
        }
    }
    return num / static_cast<double>(pairs);
}

inline double fpr_at_tpr_enumerate(const std::vector<mcl::ScoredSample>& samples,
                                   double tpr_target) {
    std::vector<double> candidates;
    for (const auto& s : samples) candidates.push_back(s.confidence);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double n_ind = 0;
    for (const auto& s : samples) n_ind += s.is_ind ? 1 : 0;

    // Pick the largest threshold whose inclusive TPR reaches the target.
    double best = candidates.front();
    bool found = false;
    for (double t : candidates) {
        int tp = 0;
        for (const auto& s : samples) {
            if (s.is_ind && s.confidence >= t) ++tp;
        }
        if (static_cast<double>(tp) / n_ind >= tpr_target) {
            if (!found || t > best) {
                best = t;
                found = true;
            }
        }
    }
    int fp = 0, n_ood = 0;
    for (const auto& s : samples) {
        if (!s.is_ind) {
            ++n_ood;
            if (s.confidence >= best) ++fp;
        }
    }
    return static_cast<double>(fp) / n_ood;
}

inline double aupr_enumerate(const std::vector<mcl::ScoredSample>& samples, bool ind_positive) {
    std::vector<double> thresholds;
    for (const auto& s : samples) thresholds.push_back(s.confidence);
    if (ind_positive) {
        std::sort(thresholds.begin(), thresholds.end(), std::greater<double>());
    } else {
        std::sort(thresholds.begin(), thresholds.end());
    }
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

    int n_pos = 0;
    for (const auto& s : samples) n_pos += (s.is_ind == ind_positive) ? 1 : 0;

    double ap_num = 0.0;
    int tp_prev = 0;
    for (double t : thresholds) {
        int tp = 0, fp = 0;
        for (const auto& s : samples) {
            const bool predicted = ind_positive ? s.confidence >= t : s.confidence <= t;
            if (!predicted) continue;
            ((s.is_ind == ind_positive) ? tp : fp)++;
        }
        const double precision = static_cast<double>(tp) / (tp + fp);
        ap_num += static_cast<double>(tp - tp_prev) * precision;
        tp_prev = tp;
    }
    return ap_num / n_pos;
}

// --- instance generators -------------------------------------------------------

// Interleaved batch from per-parent labels; aux labels, when requested, are
// drawn independently per view.
inline mcl::AugmentedBatch make_batch(const std::vector<int>& parent_labels, int c_aux = 0,
                                      std::uint64_t seed = 0) {
    mcl::AugmentedBatch batch;
    std::mt19937_64 rng(seed * 1000003ULL + 17ULL);
    std::uniform_int_distribution<int> aux_pick(1, std::max(1, c_aux));
    for (std::size_t k = 0; k < parent_labels.size(); ++k) {
        for (int v = 0; v < 2; ++v) {
            batch.views.push_back(Eigen::VectorXd::Zero(2));
            batch.main_labels.push_back(parent_labels[k]);
            batch.parent_index.push_back(static_cast<int>(k));
            if (c_aux > 0) batch.aux_labels.push_back(aux_pick(rng));
        }
    }
    return batch;
}

inline Eigen::MatrixXd random_embeddings(int rows, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 7919ULL + 3ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z(rows, dim);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < dim; ++c) z(r, c) = gauss(rng);
    }
    return z;
}

inline std::vector<int> random_parent_labels(int n_parents, int n_classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 65537ULL + 29ULL);
    std::uniform_int_distribution<int> pick(1, n_classes);
    std::vector<int> labels(n_parents);
    for (int& l : labels) l = pick(rng);
    return labels;
}

}  // namespace oracle
