#include "mcl/scoring.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "mcl/errors.hpp"

namespace mcl {

const ClassGaussian& ClassGaussianBank::cell(int main_label, int aux_label) const {
    if (main_label < 1 || main_label > c_main) {
        throw ValidationError("main label " + std::to_string(main_label) + " outside [1, " +
                              std::to_string(c_main) + "]");
    }
    if (aux_label < 1 || aux_label > c_aux) {
        throw ValidationError("aux label " + std::to_string(aux_label) + " outside [1, " +
                              std::to_string(c_aux) + "]");
    }
    return cells[static_cast<std::size_t>(main_label - 1) * c_aux + (aux_label - 1)];
}

ClassGaussianBank fit_gaussians(const std::vector<TrainingEmbedding>& embeddings,
                                int c_main, int c_aux, const RidgePolicy& policy) {
    if (c_main < 1 || c_aux < 1) throw ValidationError("fit_gaussians: class counts must be >= 1");
    if (embeddings.empty()) throw ValidationError("fit_gaussians: no embeddings");

    const int d = static_cast<int>(embeddings.front().z.size());
    std::vector<std::vector<const Eigen::VectorXd*>> groups(
        static_cast<std::size_t>(c_main) * c_aux);
    for (const TrainingEmbedding& e : embeddings) {
        if (e.z.size() != d) throw ValidationError("fit_gaussians: inconsistent dimensions");
        if (!e.z.allFinite()) throw ValidationError("fit_gaussians: non-finite embedding");
        if (e.main_label < 1 || e.main_label > c_main || e.aux_label < 1 || e.aux_label > c_aux) {
            throw ValidationError("fit_gaussians: label outside declared ranges");
        }
        groups[static_cast<std::size_t>(e.main_label - 1) * c_aux + (e.aux_label - 1)].push_back(&e.z);
    }

    ClassGaussianBank bank;
    bank.c_main = c_main;
    bank.c_aux = c_aux;
    bank.dim = d;
    bank.cells.resize(groups.size());

    for (std::size_t g = 0; g < groups.size(); ++g) {
        const auto& members = groups[g];
        const std::size_t n = members.size();
        if (n < 2) {
            throw ValidationError("fit_gaussians: cell (" + std::to_string(g / c_aux + 1) + ", " +
                                  std::to_string(g % c_aux + 1) + ") has " + std::to_string(n) +
                                  " samples, need >= 2");
        }
        ClassGaussian& cell = bank.cells[g];
        cell.mean = Eigen::VectorXd::Zero(d);
        for (const auto* zp : members) cell.mean += *zp;
        cell.mean /= static_cast<double>(n);

        cell.covariance = Eigen::MatrixXd::Zero(d, d);
        for (const auto* zp : members) {
            const Eigen::VectorXd dev = *zp - cell.mean;
            cell.covariance.noalias() += dev * dev.transpose();
        }
        cell.covariance /= static_cast<double>(policy.unbiased ? n - 1 : n);

        cell.ridge = std::max(policy.relative * cell.covariance.trace() / d, policy.floor);
        Eigen::MatrixXd ridged = cell.covariance;
        ridged.diagonal().array() += cell.ridge;

        const Eigen::LLT<Eigen::MatrixXd> llt(ridged);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("fit_gaussians: ridged covariance is not positive-definite");
        }
        cell.precision = llt.solve(Eigen::MatrixXd::Identity(d, d));
    }
    return bank;
}

Eigen::VectorXd score_vector(const Eigen::VectorXd& z, const ClassGaussianBank& bank,
                             int aux_label) {
    if (z.size() != bank.dim) throw ValidationError("score_vector: dimension mismatch");
    Eigen::VectorXd scores(bank.c_main);
    for (int i = 1; i <= bank.c_main; ++i) {
        const ClassGaussian& cell = bank.cell(i, aux_label);
        const Eigen::VectorXd dev = z - cell.mean;
        scores[i - 1] = -dev.dot(cell.precision * dev);
    }
    return scores;
}

namespace {

int argmax_lowest_tie(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

// Pairwise (tree) sum over [lo, hi). Fixed order, and exact when all
// summands are equal and the count is a power of two.
double tree_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    return tree_sum(v, lo, mid) + tree_sum(v, mid, hi);
}

double tree_sum(const std::vector<double>& v) {
    return v.empty() ? 0.0 : tree_sum(v, 0, v.size());
}

}  // namespace

Prediction predict(const Eigen::VectorXd& z, const ClassGaussianBank& bank) {
    const Eigen::VectorXd scores = score_vector(z, bank, 1);
    const int idx = argmax_lowest_tie(scores);
    return {idx + 1, scores[idx]};
}

Decision decide(double confidence, double delta) {
    return confidence >= delta ? Decision::ind : Decision::ood;
}

SeiResult aggregate_scores(const std::vector<Eigen::VectorXd>& per_aux,
                           const SeiOptions& options) {
    if (per_aux.empty()) throw ValidationError("aggregate_scores: no score vectors");
    const int c_main = static_cast<int>(per_aux.front().size());
    const std::size_t m_count = per_aux.size();
    for (const auto& s : per_aux) {
        if (s.size() != c_main) throw ValidationError("aggregate_scores: ragged score vectors");
    }

    SeiResult out;
    out.per_aux = per_aux;
    out.aggregated.resize(c_main);

    switch (options.agg) {
        case Aggregation::avg: {
            std::vector<double> col(m_count);
            for (int i = 0; i < c_main; ++i) {
                for (std::size_t m = 0; m < m_count; ++m) col[m] = per_aux[m][i];
                out.aggregated[i] = tree_sum(col) / static_cast<double>(m_count);
            }
            break;
        }
        case Aggregation::max: {
            for (int i = 0; i < c_main; ++i) {
                double best = per_aux[0][i];
                for (std::size_t m = 1; m < m_count; ++m) best = std::max(best, per_aux[m][i]);
                out.aggregated[i] = best;
            }
            break;
        }
        case Aggregation::w_avg: {
            std::vector<double> weights(m_count);
            std::vector<double> recip(c_main);
            for (std::size_t m = 0; m < m_count; ++m) {
                for (int n = 0; n < c_main; ++n) {
                    double s = out.per_aux[m][n];
                    if (s == 0.0) {
                        s = -1e-12;
                        out.per_aux[m][n] = s;
                        ++out.zero_perturbed;
                    }
                    recip[n] = options.magnitude_weights ? 1.0 / std::abs(s) : 1.0 / s;
                }
                weights[m] = 1.0 / tree_sum(recip);
            }
            const double wsum = tree_sum(weights);
            std::vector<double> normalized(m_count);
            for (std::size_t m = 0; m < m_count; ++m) normalized[m] = weights[m] / wsum;
            std::vector<double> col(m_count);
            for (int i = 0; i < c_main; ++i) {
                for (std::size_t m = 0; m < m_count; ++m) col[m] = normalized[m] * out.per_aux[m][i];
                out.aggregated[i] = tree_sum(col);
            }
            break;
        }
    }

    const int idx = argmax_lowest_tie(out.aggregated);
    out.label = idx + 1;
    out.confidence = out.aggregated[idx];
    return out;
}

SeiResult sei_predict(const Eigen::VectorXd& item_features, const ClassGaussianBank& bank,
                      const AugmentationFamily& family, const SeiOptions& options,
                      const Encoder& encoder) {
    if (family.c_aux != bank.c_aux) {
        throw ValidationError("sei_predict: family declares " + std::to_string(family.c_aux) +
                              " aux transforms but bank holds " + std::to_string(bank.c_aux));
    }
    std::vector<Eigen::VectorXd> per_aux(bank.c_aux);
    for (int m = 1; m <= bank.c_aux; ++m) {
        const Vec transformed = family.apply_aux(item_features, m);
        per_aux[m - 1] = score_vector(encoder(transformed), bank, m);
    }
    return aggregate_scores(per_aux, options);
}

}  // namespace mcl
