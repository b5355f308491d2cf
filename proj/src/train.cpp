#include "mcl/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "mcl/errors.hpp"
#include "mcl/rng.hpp"

namespace mcl {

std::string to_string(LossSelector s) {
    switch (s) {
        case LossSelector::mcl: return "mcl";
        case LossSelector::ntxent: return "ntxent";
        case LossSelector::supclr: return "supclr";
        case LossSelector::crossentropy: return "crossentropy";
        case LossSelector::joint: return "joint";
    }
    return "?";
}

std::string to_string(EvalMode m) {
    switch (m) {
        case EvalMode::plain: return "plain";
        case EvalMode::sei4: return "sei4";
        case EvalMode::sei8: return "sei8";
    }
    return "?";
}

std::string to_string(Aggregation a) {
    switch (a) {
        case Aggregation::avg: return "avg";
        case Aggregation::max: return "max";
        case Aggregation::w_avg: return "w_avg";
    }
    return "?";
}

LossSelector loss_selector_from_string(const std::string& s) {
    if (s == "mcl") return LossSelector::mcl;
    if (s == "ntxent") return LossSelector::ntxent;
    if (s == "supclr") return LossSelector::supclr;
    if (s == "crossentropy") return LossSelector::crossentropy;
    if (s == "joint") return LossSelector::joint;
    throw ValidationError("unknown loss selector '" + s + "'");
}

EvalMode eval_mode_from_string(const std::string& s) {
    if (s == "plain") return EvalMode::plain;
    if (s == "sei4") return EvalMode::sei4;
    if (s == "sei8") return EvalMode::sei8;
    throw ValidationError("unknown eval mode '" + s + "'");
}

Aggregation aggregation_from_string(const std::string& s) {
    if (s == "avg") return Aggregation::avg;
    if (s == "max") return Aggregation::max;
    if (s == "w_avg" || s == "w-avg") return Aggregation::w_avg;
    throw ValidationError("unknown aggregation '" + s + "'");
}

Eigen::VectorXd TrainedModel::embed(const Eigen::VectorXd& x) const {
    return config.score_on_features ? net.features1(x) : net.embed1(x);
}

Eigen::MatrixXd TrainedModel::embed_rows(const Eigen::MatrixXd& x) const {
    return config.score_on_features ? net.features(x) : net.forward(x);
}

namespace {

AugmentationFamily training_family(const TrainConfig& config) {
    if (config.aux_mode == AuxMode::none) {
        return AugmentationFamily::plain(config.noise_scale, config.dropout_rate);
    }
    switch (config.mcl.c_aux) {
        case 4: return AugmentationFamily::rotations4(config.noise_scale, config.dropout_rate);
        case 8: return AugmentationFamily::rotations_flip8(config.noise_scale, config.dropout_rate);
        default:
            throw ValidationError("aux training supports c_aux of 4 or 8, got " +
                                  std::to_string(config.mcl.c_aux));
    }
}

std::string snapshot_json(const TrainConfig& config, const AugmentedBatch& batch, int epoch,
                          int batch_index, double loss) {
    nlohmann::json j;
    j["epoch"] = epoch;
    j["batch_index"] = batch_index;
    j["loss"] = loss;
    j["config"] = {{"loss", to_string(config.loss)},
                   {"tau", config.mcl.tau},
                   {"alpha", config.mcl.alpha},
                   {"beta", config.mcl.beta},
                   {"lambda", config.mcl.lambda},
                   {"batch_n", config.batch_n},
                   {"base_lr", config.base_lr},
                   {"seed", config.seed}};
    nlohmann::json views = nlohmann::json::array();
    for (const Vec& v : batch.views) {
        views.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    }
    j["batch"] = {{"views", views},
                  {"main_labels", batch.main_labels},
                  {"aux_labels", batch.aux_labels},
                  {"parent_index", batch.parent_index}};
    return j.dump();
}

}  // namespace

TrainedModel train(const TrainConfig& config, const Dataset& data, RunReport& report) {
    if (config.epochs < 0) throw ValidationError("epochs must be >= 0");
    if (config.batch_n < 1) throw ValidationError("batch size must be >= 1");
    if (static_cast<int>(data.train.size()) < config.batch_n) {
        throw ValidationError("batch size exceeds the training set");
    }

    TrainConfig cfg = config;
    cfg.encoder.input_dim = data.d_in;
    cfg.mcl.c_main = data.n_train_classes;
    cfg.mcl.batch_n = config.batch_n;
    if (cfg.aux_mode != AuxMode::labeled) cfg.mcl.c_aux = 1;
    const bool needs_head = cfg.loss == LossSelector::crossentropy || cfg.loss == LossSelector::joint;
    cfg.encoder.n_classes = needs_head ? data.n_train_classes : 0;

    report = RunReport{};
    report.seed = cfg.seed;
    report.validity = validate_hparams(cfg.mcl);
    if (cfg.loss == LossSelector::mcl) {
        if (!report.validity.overall_ok && !cfg.allow_invalid_hparams) {
            throw ValidationError(
                "hyper-parameters fail the attraction/convergence windows; "
                "rerun with the override flag to train anyway");
        }
        if (!report.validity.attraction_ok) {
            report.warnings.push_back("alpha is not below the attraction bound; "
                                      "SPA may lose its assembling effect");
        }
        if (!report.validity.convergence_ok) {
            report.warnings.push_back("alpha is below the convergence bound; "
                                      "clusters may collapse to their centroids");
        }
    }

    // The family keeps the declared aux transform count even when the masks
    // ignore it (the unlabeled "data augmentation" arm).
    const AugmentationFamily family = training_family(config);
    const bool aux_masks = cfg.aux_mode == AuxMode::labeled && cfg.mcl.aux_enabled();

    TrainedModel model{Mlp::init(cfg.encoder, cfg.seed), cfg};
    SgdState opt;
    opt.momentum = cfg.momentum;
    opt.weight_decay = cfg.weight_decay;

    const int n_batches = static_cast<int>(data.train.size()) / cfg.batch_n;
    std::vector<std::size_t> order(data.train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.learning_rate() *
            (cfg.cosine_annealing ? 0.5 * (1.0 + std::cos(M_PI * epoch / cfg.epochs)) : 1.0);
        auto shuffle_rng = substream(cfg.seed, "train/shuffle/e" + std::to_string(epoch));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double epoch_loss = 0.0;
        for (int bi = 0; bi < n_batches; ++bi) {
            std::vector<LabeledItem> items;
            items.reserve(cfg.batch_n);
            for (int k = 0; k < cfg.batch_n; ++k) {
                items.push_back(data.train[order[bi * cfg.batch_n + k]]);
            }
            const std::uint64_t aug_seed = substream_seed(
                cfg.seed, "aug/e" + std::to_string(epoch) + "/b" + std::to_string(bi));
            const AugmentedBatch batch = augment_batch(items, family, aug_seed, cfg.aux_mode);

            Mlp::Cache cache;
            const Eigen::MatrixXd x = batch.view_matrix();
            const Eigen::MatrixXd z = model.net.forward(x, &cache);
            if (!z.allFinite()) {
                throw NumericalAbort("non-finite embeddings at epoch " + std::to_string(epoch),
                                     snapshot_json(cfg, batch, epoch, bi,
                                                   std::numeric_limits<double>::quiet_NaN()));
            }

            double batch_loss = 0.0;
            Eigen::MatrixXd dz;
            Mlp::Gradients grads;
            bool have_grads = false;

            switch (cfg.loss) {
                case LossSelector::mcl: {
                    batch_loss = mcl_loss(z, batch, cfg.mcl, aux_masks).total;
                    dz = loss_gradient(z, batch, cfg.mcl, LossKind::mcl);
                    break;
                }
                case LossSelector::ntxent: {
                    batch_loss = nt_xent_loss(cosine_similarity(z), cfg.mcl.tau).total;
                    dz = loss_gradient(z, batch, cfg.mcl, LossKind::ntxent);
                    break;
                }
                case LossSelector::supclr: {
                    batch_loss = supclr_loss(z, batch, cfg.mcl.tau).total;
                    dz = loss_gradient(z, batch, cfg.mcl, LossKind::supclr);
                    break;
                }
                case LossSelector::crossentropy: {
                    Eigen::MatrixXd dlogits;
                    const Eigen::MatrixXd logits = model.net.logits(z);
                    batch_loss = cross_entropy(logits, batch.main_labels, &dlogits);
                    dz = dlogits * model.net.w_cls;
                    grads = model.net.backward(cache, dz);
                    grads.w_cls = dlogits.transpose() * z;
                    grads.b_cls = dlogits.colwise().sum();
                    have_grads = true;
                    break;
                }
                case LossSelector::joint: {
                    Eigen::MatrixXd dlogits;
                    const Eigen::MatrixXd logits = model.net.logits(z);
                    const double ce = cross_entropy(logits, batch.main_labels, &dlogits);
                    const LossValue simclr = nt_xent_loss(cosine_similarity(z), cfg.mcl.tau);
                    batch_loss = joint_loss(ce, simclr, cfg.joint_lambda);
                    dz = dlogits * model.net.w_cls +
                         cfg.joint_lambda * loss_gradient(z, batch, cfg.mcl, LossKind::ntxent);
                    grads = model.net.backward(cache, dz);
                    grads.w_cls = dlogits.transpose() * z;
                    grads.b_cls = dlogits.colwise().sum();
                    have_grads = true;
                    break;
                }
            }

            if (!std::isfinite(batch_loss)) {
                throw NumericalAbort("non-finite training loss at epoch " + std::to_string(epoch),
                                     snapshot_json(cfg, batch, epoch, bi, batch_loss));
            }
            if (!have_grads) grads = model.net.backward(cache, dz);
            sgd_step(model.net, grads, opt, lr);
            epoch_loss += batch_loss;
        }
        report.loss_curve.push_back(epoch_loss / n_batches);
    }
    return model;
}

namespace {

AugmentationFamily eval_family(EvalMode mode) {
    switch (mode) {
        case EvalMode::sei4: return AugmentationFamily::rotations4(0.0, 0.0);
        case EvalMode::sei8: return AugmentationFamily::rotations_flip8(0.0, 0.0);
        case EvalMode::plain: break;
    }
    return AugmentationFamily::plain(0.0, 0.0);
}

// Cells reflect the training distribution: models whose training pipeline
// contained the aux transforms (labeled or unlabeled) get per-transform
// cells fit on transformed training data; aux-free models never saw the
// transforms, so every aux column reuses the upright fit.
ClassGaussianBank fit_eval_bank(const TrainedModel& model, const Dataset& data,
                                const AugmentationFamily& family) {
    const bool transforms_seen = model.config.aux_mode != AuxMode::none;
    std::vector<TrainingEmbedding> embeddings;
    embeddings.reserve(data.train.size() * family.c_aux);
    Eigen::MatrixXd x(data.train.size(), data.d_in);
    for (int m = 1; m <= family.c_aux; ++m) {
        const int fit_transform = transforms_seen ? m : 1;
        for (std::size_t i = 0; i < data.train.size(); ++i) {
            x.row(i) = family.apply_aux(data.train[i].features, fit_transform);
        }
        const Eigen::MatrixXd z = model.embed_rows(x);
        for (std::size_t i = 0; i < data.train.size(); ++i) {
            embeddings.push_back({z.row(i), data.train[i].main_label, m});
        }
    }
    return fit_gaussians(embeddings, data.n_train_classes, family.c_aux);
}

}  // namespace

EvalResult evaluate(const TrainedModel& model, const Dataset& data, EvalMode mode,
                    Aggregation agg) {
    const AugmentationFamily family = eval_family(mode);
    const ClassGaussianBank bank = fit_eval_bank(model, data, family);
    const Encoder encoder = [&](const Eigen::VectorXd& x) { return model.embed(x); };
    const SeiOptions options{agg, false};

    EvalResult result;
    result.mode = to_string(mode);
    result.agg = mode == EvalMode::plain ? "-" : to_string(agg);

    int correct = 0;
    std::vector<ScoredSample> scored;
    scored.reserve(data.test_ind.size() + data.test_ood.size());

    auto score_item = [&](const LabeledItem& item) {
        if (mode == EvalMode::plain) {
            const Prediction p = predict(model.embed(item.features), bank);
            return std::pair<int, double>{p.label, p.confidence};
        }
        const SeiResult r = sei_predict(item.features, bank, family, options, encoder);
        return std::pair<int, double>{r.label, r.confidence};
    };

    for (const LabeledItem& item : data.test_ind) {
        const auto [label, confidence] = score_item(item);
        if (label == item.main_label) ++correct;
        scored.push_back({confidence, true});
    }
    for (const LabeledItem& item : data.test_ood) {
        scored.push_back({score_item(item).second, false});
    }

    result.accuracy = data.test_ind.empty() ? 0.0
                                            : static_cast<double>(correct) / data.test_ind.size();
    result.metrics = compute_metrics(scored);
    return result;
}

std::vector<ScoreRow> score_test_items(const TrainedModel& model, const Dataset& data,
                                       EvalMode mode, Aggregation agg) {
    const AugmentationFamily family = eval_family(mode);
    const ClassGaussianBank bank = fit_eval_bank(model, data, family);
    const Encoder encoder = [&](const Eigen::VectorXd& x) { return model.embed(x); };
    const SeiOptions options{agg, false};
    const std::string agg_name = mode == EvalMode::plain ? "-" : to_string(agg);

    std::vector<ScoreRow> rows;
    int item_id = 0;
    auto emit = [&](const LabeledItem& item) {
        if (mode == EvalMode::plain) {
            const Prediction p = predict(model.embed(item.features), bank);
            rows.push_back({item_id, agg_name, p.label, p.confidence});
        } else {
            const SeiResult r = sei_predict(item.features, bank, family, options, encoder);
            rows.push_back({item_id, agg_name, r.label, r.confidence});
        }
        ++item_id;
    };
    for (const LabeledItem& item : data.test_ind) emit(item);
    for (const LabeledItem& item : data.test_ood) emit(item);
    return rows;
}

namespace {

struct ArmSpec {
    std::string name;
    LossSelector loss;
    AuxMode aux_mode;
    bool with_sei;
};

}  // namespace

AblationResult run_ablation(const AblationConfig& config) {
    if (config.n_seeds < 1) throw ValidationError("ablation needs at least one seed");

    const std::vector<ArmSpec> arms = {
        {"mcl_noaux", LossSelector::mcl, AuxMode::none, true},
        {"mcl_da", LossSelector::mcl, AuxMode::unlabeled, true},
        {"mcl_aux", LossSelector::mcl, AuxMode::labeled, true},
        {"ce", LossSelector::crossentropy, AuxMode::none, false},
    };

    AblationResult result;
    const std::string sei_eval_name =
        to_string(config.sei_mode) + "/" + to_string(config.agg);

    for (const ArmSpec& arm : arms) {
        if (arm.name == "ce" && !config.include_ce) continue;
        for (int s = 0; s < config.n_seeds; ++s) {
            const std::uint64_t seed = config.base.seed + static_cast<std::uint64_t>(s);
            SyntheticSpec data_spec = config.synthetic;
            data_spec.seed = seed;
            const Dataset data = generate_synthetic(data_spec);

            TrainConfig train_cfg = config.base;
            train_cfg.seed = seed;
            train_cfg.loss = arm.loss;
            train_cfg.aux_mode = arm.aux_mode;

            RunReport report;
            const TrainedModel model = train(train_cfg, data, report);

            const EvalResult plain = evaluate(model, data, EvalMode::plain, config.agg);
            result.runs.push_back({arm.name, "plain", seed, plain.accuracy, plain.metrics,
                                   report.validity, report.warnings});
            if (arm.with_sei) {
                const EvalResult sei = evaluate(model, data, config.sei_mode, config.agg);
                result.runs.push_back({arm.name, sei_eval_name, seed, sei.accuracy, sei.metrics,
                                       report.validity, report.warnings});
            }
        }
    }

    // Seed-means per (arm, eval) in first-seen order.
    for (const AblationRun& run : result.runs) {
        auto it = std::find_if(result.summary.begin(), result.summary.end(),
                               [&](const AblationSummaryRow& row) {
                                   return row.arm == run.arm && row.eval == run.eval;
                               });
        if (it == result.summary.end()) {
            result.summary.push_back({run.arm, run.eval, 0.0, 0.0, 0.0, 0.0, 0.0});
            it = std::prev(result.summary.end());
        }
        it->accuracy += run.accuracy / config.n_seeds;
        it->auroc += run.metrics.auroc / config.n_seeds;
        it->fpr_at_95 += run.metrics.fpr_at_95 / config.n_seeds;
        it->aupr_ind += run.metrics.aupr_ind / config.n_seeds;
        it->aupr_ood += run.metrics.aupr_ood / config.n_seeds;
    }
    return result;
}

}  // namespace mcl
