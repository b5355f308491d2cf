#include "mcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "mcl/errors.hpp"
#include "mcl/rng.hpp"

namespace mcl {

namespace {

double logsumexp(const std::vector<double>& v) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : v) m = std::max(m, x);
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

int paired_view(int i) { return i ^ 1; }  // 0-based partner of the interleaved pair

void require_even_pairs(int rows) {
    if (rows < 2 || rows % 2 != 0) {
        throw ValidationError("similarity matrix must cover an even number >= 2 of views, got " +
                              std::to_string(rows));
    }
}

void require_same_shape(const SimilarityMatrix& s, const MaskMatrix& mask) {
    if (mask.values.rows() != s.values.rows() || mask.values.cols() != s.values.cols()) {
        throw ValidationError("mask shape does not match similarity matrix");
    }
}

struct NormalizedRows {
    Eigen::MatrixXd unit;    // rows scaled to unit norm
    Eigen::VectorXd norms;
};

NormalizedRows normalize_rows(const EmbeddingMatrix& z) {
    NormalizedRows out;
    out.norms = z.rowwise().norm();
    for (Eigen::Index i = 0; i < out.norms.size(); ++i) {
        if (!(out.norms[i] > 0.0)) {
            throw ValidationError("embedding row " + std::to_string(i) + " has zero norm");
        }
    }
    out.unit = out.norms.cwiseInverse().asDiagonal() * z;
    return out;
}

}  // namespace

SimilarityMatrix cosine_similarity(const EmbeddingMatrix& z) {
    const NormalizedRows nr = normalize_rows(z);
    const int n = static_cast<int>(z.rows());
    SimilarityMatrix s;
    s.values.resize(n, n);
    for (int i = 0; i < n; ++i) {
        s.values(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = std::clamp(nr.unit.row(i).dot(nr.unit.row(j)), -1.0, 1.0);
            s.values(i, j) = v;
            s.values(j, i) = v;
        }
    }
    return s;
}

LossValue nt_xent_loss(const SimilarityMatrix& s, double tau) {
    const int rows = s.rows();
    require_even_pairs(rows);
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");

    LossValue out;
    out.per_view.assign(rows, 0.0);
    std::vector<double> logits;
    logits.reserve(rows - 1);
    for (int i = 0; i < rows; ++i) {
        logits.clear();
        for (int k = 0; k < rows; ++k) {
            if (k != i) logits.push_back(s.values(i, k) / tau);
        }
        const double lse = logsumexp(logits);
        const double ell = -s.values(i, paired_view(i)) / tau + lse;
        out.per_view[i] = ell / rows;
        out.total += out.per_view[i];
    }
    out.ccm = out.total;
    return out;
}

LossValue ccm_loss(const SimilarityMatrix& s, const MaskMatrix& mask, double tau) {
    const int rows = s.rows();
    require_even_pairs(rows);
    require_same_shape(s, mask);
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");

    LossValue out;
    out.per_view.assign(rows, 0.0);
    std::vector<double> logits;
    logits.reserve(rows - 1);
    for (int i = 0; i < rows; ++i) {
        logits.clear();
        for (int k = 0; k < rows; ++k) {
            if (k != i) logits.push_back(s.values(i, k) * mask.values(i, k));
        }
        const double lse = logsumexp(logits);
        const double ell = -s.values(i, paired_view(i)) / tau + lse;
        out.per_view[i] = ell / rows;
        out.total += out.per_view[i];
    }
    out.ccm = out.total;
    return out;
}

namespace {

// log of the SPA denominator for query i: sum over views from other parent
// images of exp(sim * mask).
double spa_log_denominator(const SimilarityMatrix& s, const MaskMatrix& mask,
                           const AugmentedBatch& batch, int i) {
    std::vector<double> logits;
    logits.reserve(s.rows());
    for (int k = 0; k < s.rows(); ++k) {
        if (batch.same_parent0(k, i)) continue;
        logits.push_back(s.values(i, k) * mask.values(i, k));
    }
    if (logits.empty()) {
        throw ValidationError("spa loss needs at least two parent images");
    }
    return logsumexp(logits);
}

}  // namespace

LossValue spa_loss(const SimilarityMatrix& s, const MaskMatrix& mask,
                   const AugmentedBatch& batch, double tau, SpaMode mode, std::uint64_t seed) {
    const int rows = s.rows();
    require_even_pairs(rows);
    require_same_shape(s, mask);
    if (batch.size() != rows) throw ValidationError("batch size does not match similarity matrix");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");

    LossValue out;
    out.per_view.assign(rows, 0.0);
    auto rng = substream(seed, "spa");

    for (int i = 0; i < rows; ++i) {
        const std::vector<int> positives = batch.positives0(i);
        if (positives.empty()) continue;  // no partner to attract, contributes 0

        const double lse = spa_log_denominator(s, mask, batch, i);
        double ell = 0.0;
        if (mode == SpaMode::expectation) {
            double mean_sim = 0.0;
            for (int j : positives) mean_sim += s.values(i, j);
            mean_sim /= static_cast<double>(positives.size());
            ell = -mean_sim / tau + lse;
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, positives.size() - 1);
            const int j = positives[pick(rng)];
            ell = -s.values(i, j) / tau + lse;
        }
        out.per_view[i] = ell / rows;
        out.total += out.per_view[i];
    }
    out.spa = out.total;
    return out;
}

LossValue mcl_loss(const EmbeddingMatrix& z, const AugmentedBatch& batch,
                   const MclConfig& cfg, bool aux, SpaMode mode, std::uint64_t seed) {
    const SimilarityMatrix s = cosine_similarity(z);
    const MaskMatrix mask = aux ? build_ccm_aux(batch, cfg) : build_ccm(batch, cfg);
    const LossValue ccm = ccm_loss(s, mask, cfg.tau);
    const LossValue spa = spa_loss(s, mask, batch, cfg.tau, mode, seed);

    LossValue out;
    out.ccm = ccm.total;
    out.spa = spa.total;
    out.lambda = cfg.lambda;
    out.total = ccm.total + cfg.lambda * spa.total;
    out.per_view.resize(z.rows());
    for (int i = 0; i < z.rows(); ++i) {
        out.per_view[i] = ccm.per_view[i] + cfg.lambda * spa.per_view[i];
    }
    return out;
}

LossValue supclr_loss(const EmbeddingMatrix& z, const AugmentedBatch& batch, double tau) {
    const SimilarityMatrix s = cosine_similarity(z);
    const int rows = s.rows();
    require_even_pairs(rows);
    if (batch.size() != rows) throw ValidationError("batch size does not match embeddings");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");

    LossValue out;
    out.per_view.assign(rows, 0.0);
    std::vector<double> logits;
    logits.reserve(rows - 1);
    for (int i = 0; i < rows; ++i) {
        // All same-main-label views, the paired view included.
        std::vector<int> positives;
        for (int k = 0; k < rows; ++k) {
            if (k != i && batch.main_labels[k] == batch.main_labels[i]) positives.push_back(k);
        }
        if (positives.empty()) continue;

        logits.clear();
        for (int k = 0; k < rows; ++k) {
            if (k != i) logits.push_back(s.values(i, k) / tau);
        }
        const double lse = logsumexp(logits);
        double mean_sim = 0.0;
        for (int j : positives) mean_sim += s.values(i, j);
        mean_sim /= static_cast<double>(positives.size());
        out.per_view[i] = (-mean_sim / tau + lse) / rows;
        out.total += out.per_view[i];
    }
    out.ccm = out.total;
    return out;
}

double joint_loss(double ce, const LossValue& simclr, double lambda_j) {
    return ce + lambda_j * simclr.total;
}

double spa_probability(const SimilarityMatrix& s, const MaskMatrix& mask,
                       const AugmentedBatch& batch, double tau, int q0, int r0) {
    const double lse = spa_log_denominator(s, mask, batch, q0);
    return std::exp(s.values(q0, r0) / tau - lse);
}

double spa_gradient_wrt_similarity(const SimilarityMatrix& s, const MaskMatrix& mask,
                                   const AugmentedBatch& batch, double tau, int q0, int r0) {
    const std::vector<int> positives = batch.positives0(q0);
    if (positives.empty()) return 0.0;
    if (batch.same_parent0(q0, r0)) {
        throw ValidationError("spa gradient term asks for a same-parent pair");
    }
    const double lse = spa_log_denominator(s, mask, batch, q0);
    const double denom_term =
        mask.values(q0, r0) * std::exp(s.values(q0, r0) * mask.values(q0, r0) - lse);
    double grad = denom_term;
    if (std::find(positives.begin(), positives.end(), r0) != positives.end()) {
        grad -= 1.0 / (tau * static_cast<double>(positives.size()));
    }
    return grad / static_cast<double>(s.rows());
}

// ---------------------------------------------------------------------------
// Analytic gradients. Each loss first accumulates w(i,k) = dL/d sim_{i,k}
// with sim treated as query i's entry, then the chain rule through the
// cosine map distributes w onto the embedding rows.
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd ntxent_sim_grad(const Eigen::MatrixXd& s, double tau) {
    const int rows = static_cast<int>(s.rows());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(rows, rows);
    std::vector<double> logits(rows);
    for (int i = 0; i < rows; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            logits[k] = s(i, k) / tau;
            m = std::max(m, logits[k]);
        }
        double denom = 0.0;
        for (int k = 0; k < rows; ++k) {
            if (k != i) denom += std::exp(logits[k] - m);
        }
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            const double r = std::exp(logits[k] - m) / denom;
            w(i, k) += r / (tau * rows);
        }
        w(i, paired_view(i)) -= 1.0 / (tau * rows);
    }
    return w;
}

Eigen::MatrixXd ccm_sim_grad(const Eigen::MatrixXd& s, const Eigen::MatrixXd& mask, double tau) {
    const int rows = static_cast<int>(s.rows());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(rows, rows);
    std::vector<double> logits(rows);
    for (int i = 0; i < rows; ++i) {
        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            logits[k] = s(i, k) * mask(i, k);
            m = std::max(m, logits[k]);
        }
        double denom = 0.0;
        for (int k = 0; k < rows; ++k) {
            if (k != i) denom += std::exp(logits[k] - m);
        }
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            const double r = std::exp(logits[k] - m) / denom;
            w(i, k) += mask(i, k) * r / rows;
        }
        w(i, paired_view(i)) -= 1.0 / (tau * rows);
    }
    return w;
}

Eigen::MatrixXd spa_sim_grad(const Eigen::MatrixXd& s, const Eigen::MatrixXd& mask,
                             const AugmentedBatch& batch, double tau) {
    const int rows = static_cast<int>(s.rows());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(rows, rows);
    std::vector<double> logits(rows);
    for (int i = 0; i < rows; ++i) {
        const std::vector<int> positives = batch.positives0(i);
        if (positives.empty()) continue;

        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < rows; ++k) {
            if (batch.same_parent0(k, i)) continue;
            logits[k] = s(i, k) * mask(i, k);
            m = std::max(m, logits[k]);
        }
        double denom = 0.0;
        for (int k = 0; k < rows; ++k) {
            if (!batch.same_parent0(k, i)) denom += std::exp(logits[k] - m);
        }
        for (int k = 0; k < rows; ++k) {
            if (batch.same_parent0(k, i)) continue;
            const double r = std::exp(logits[k] - m) / denom;
            w(i, k) += mask(i, k) * r / rows;
        }
        const double pull = 1.0 / (tau * static_cast<double>(positives.size()) * rows);
        for (int j : positives) w(i, j) -= pull;
    }
    return w;
}

Eigen::MatrixXd supclr_sim_grad(const Eigen::MatrixXd& s, const AugmentedBatch& batch, double tau) {
    const int rows = static_cast<int>(s.rows());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(rows, rows);
    std::vector<double> logits(rows);
    for (int i = 0; i < rows; ++i) {
        std::vector<int> positives;
        for (int k = 0; k < rows; ++k) {
            if (k != i && batch.main_labels[k] == batch.main_labels[i]) positives.push_back(k);
        }
        if (positives.empty()) continue;

        double m = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            logits[k] = s(i, k) / tau;
            m = std::max(m, logits[k]);
        }
        double denom = 0.0;
        for (int k = 0; k < rows; ++k) {
            if (k != i) denom += std::exp(logits[k] - m);
        }
        for (int k = 0; k < rows; ++k) {
            if (k == i) continue;
            const double r = std::exp(logits[k] - m) / denom;
            w(i, k) += r / (tau * rows);
        }
        const double pull = 1.0 / (tau * static_cast<double>(positives.size()) * rows);
        for (int j : positives) w(i, j) -= pull;
    }
    return w;
}

EmbeddingMatrix chain_similarity_gradient(const NormalizedRows& nr, const Eigen::MatrixXd& s,
                                          const Eigen::MatrixXd& w) {
    const Eigen::MatrixXd b = w + w.transpose();
    const Eigen::VectorXd rowsum = (b.array() * s.array()).rowwise().sum();
    EmbeddingMatrix g = b * nr.unit - rowsum.asDiagonal() * nr.unit;
    g.array().colwise() /= nr.norms.array();
    return g;
}

}  // namespace

EmbeddingMatrix loss_gradient(const EmbeddingMatrix& z, const AugmentedBatch& batch,
                              const MclConfig& cfg, LossKind which) {
    const NormalizedRows nr = normalize_rows(z);
    const SimilarityMatrix sim = cosine_similarity(z);
    const Eigen::MatrixXd& s = sim.values;
    require_even_pairs(static_cast<int>(s.rows()));
    if (batch.size() != s.rows()) throw ValidationError("batch size does not match embeddings");

    const bool aux = cfg.aux_enabled() && batch.has_aux();
    Eigen::MatrixXd w;
    switch (which) {
        case LossKind::ntxent:
            w = ntxent_sim_grad(s, cfg.tau);
            break;
        case LossKind::ccm: {
            const MaskMatrix mask = aux ? build_ccm_aux(batch, cfg) : build_ccm(batch, cfg);
            w = ccm_sim_grad(s, mask.values, cfg.tau);
            break;
        }
        case LossKind::mcl: {
            const MaskMatrix mask = aux ? build_ccm_aux(batch, cfg) : build_ccm(batch, cfg);
            w = ccm_sim_grad(s, mask.values, cfg.tau);
            w += cfg.lambda * spa_sim_grad(s, mask.values, batch, cfg.tau);
            break;
        }
        case LossKind::supclr:
            w = supclr_sim_grad(s, batch, cfg.tau);
            break;
    }
    return chain_similarity_gradient(nr, s, w);
}

}  // namespace mcl
