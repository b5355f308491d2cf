#include "mcl/batching.hpp"

#include <random>
#include <string>

#include "mcl/errors.hpp"
#include "mcl/rng.hpp"

namespace mcl {

std::vector<int> AugmentedBatch::positive_batch(int view_index) const {
    if (view_index < 1 || view_index > size()) {
        throw ValidationError("positive_batch: view index " + std::to_string(view_index) +
                              " outside [1, " + std::to_string(size()) + "]");
    }
    std::vector<int> out;
    for (int k0 : positives0(view_index - 1)) out.push_back(k0 + 1);
    return out;
}

std::vector<int> AugmentedBatch::positives0(int row) const {
    std::vector<int> out;
    const bool composite = has_aux();
    for (int k = 0; k < size(); ++k) {
        if (parent_index[k] == parent_index[row]) continue;
        if (main_labels[k] != main_labels[row]) continue;
        if (composite && aux_labels[k] != aux_labels[row]) continue;
        out.push_back(k);
    }
    return out;
}

Eigen::MatrixXd AugmentedBatch::view_matrix() const {
    if (views.empty()) return {};
    Eigen::MatrixXd m(size(), views[0].size());
    for (int i = 0; i < size(); ++i) m.row(i) = views[i];
    return m;
}

Vec AugmentationFamily::apply_stochastic(const Vec& x, std::mt19937_64& rng) const {
    if (transforms.empty()) throw ValidationError("augmentation family has no transforms");
    std::uniform_int_distribution<std::size_t> pick(0, transforms.size() - 1);
    const StochasticTransform& t = transforms[pick(rng)];

    Vec out = x;
    if (t.noise_scale > 0.0) {
        std::normal_distribution<double> noise(0.0, t.noise_scale);
        for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += noise(rng);
    }
    if (t.dropout_rate > 0.0) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            if (u(rng) < t.dropout_rate) out[i] = 0.0;
        }
    }
    return out;
}

namespace {

// In-place rotation of consecutive coordinate pairs by quarter * 90 degrees.
// A trailing unpaired coordinate is left untouched.
void rotate_pairs(Vec& v, int quarter) {
    for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) {
        const double a = v[i], b = v[i + 1];
        switch (quarter & 3) {
            case 0: break;
            case 1: v[i] = -b; v[i + 1] = a; break;
            case 2: v[i] = -a; v[i + 1] = -b; break;
            case 3: v[i] = b; v[i + 1] = -a; break;
        }
    }
}

}  // namespace

Vec AugmentationFamily::apply_aux(const Vec& x, int m) const {
    if (m < 1 || m > c_aux) {
        throw ValidationError("aux transform label " + std::to_string(m) + " outside [1, " +
                              std::to_string(c_aux) + "]");
    }
    Vec out = x;
    switch (aux_kind) {
        case AuxKind::none:
        case AuxKind::identity:
            break;
        case AuxKind::rotations4:
            rotate_pairs(out, m - 1);
            break;
        case AuxKind::rotations_flip8: {
            const int flip = (m - 1) / 4;
            const int quarter = (m - 1) % 4;
            if (flip && out.size() > 0) out[0] = -out[0];
            rotate_pairs(out, quarter);
            break;
        }
    }
    return out;
}

AugmentationFamily AugmentationFamily::plain(double noise, double dropout) {
    AugmentationFamily f;
    f.transforms = {StochasticTransform{noise, dropout}};
    f.aux_kind = AuxKind::none;
    f.c_aux = 1;
    return f;
}

AugmentationFamily AugmentationFamily::rotations4(double noise, double dropout) {
    AugmentationFamily f = plain(noise, dropout);
    f.aux_kind = AuxKind::rotations4;
    f.c_aux = 4;
    return f;
}

AugmentationFamily AugmentationFamily::rotations_flip8(double noise, double dropout) {
    AugmentationFamily f = plain(noise, dropout);
    f.aux_kind = AuxKind::rotations_flip8;
    f.c_aux = 8;
    return f;
}

AugmentationFamily AugmentationFamily::identity_aux(int c_aux) {
    AugmentationFamily f = plain(0.0, 0.0);
    f.aux_kind = AuxKind::identity;
    f.c_aux = c_aux;
    return f;
}

AugmentedBatch augment_batch(const std::vector<LabeledItem>& batch,
                             const AugmentationFamily& family,
                             std::uint64_t seed, AuxMode aux_mode) {
    if (batch.empty()) throw ValidationError("augment_batch: empty batch");
    if (family.transforms.empty()) throw ValidationError("augment_batch: family has no transforms");
    const bool wants_aux = aux_mode != AuxMode::none;
    if (wants_aux && (family.aux_kind == AuxKind::none || family.c_aux < 1)) {
        throw ValidationError("augment_batch: aux mode requested but family declares no aux transforms");
    }

    const int n = static_cast<int>(batch.size());
    AugmentedBatch out;
    out.views.reserve(2 * n);
    out.main_labels.reserve(2 * n);
    out.parent_index.reserve(2 * n);
    if (aux_mode == AuxMode::labeled) out.aux_labels.reserve(2 * n);

    auto rng = substream(seed, "augment");
    std::uniform_int_distribution<int> aux_pick(1, family.c_aux);

    for (int k = 0; k < n; ++k) {
        for (int v = 0; v < 2; ++v) {
            Vec view = family.apply_stochastic(batch[k].features, rng);
            if (wants_aux) {
                const int m = aux_pick(rng);
                view = family.apply_aux(view, m);
                if (aux_mode == AuxMode::labeled) out.aux_labels.push_back(m);
            }
            out.views.push_back(std::move(view));
            out.main_labels.push_back(batch[k].main_label);
            out.parent_index.push_back(k);  // == (i - 1) \ 2 for 1-based view index i
        }
    }
    return out;
}

}  // namespace mcl
