#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcl/encoder.hpp"
#include "mcl/losses.hpp"
#include "mcl/masking.hpp"
#include "mcl/metrics.hpp"
#include "mcl/scoring.hpp"
#include "mcl/synthetic.hpp"

namespace mcl {

enum class LossSelector { mcl, ntxent, supclr, crossentropy, joint };
enum class EvalMode { plain, sei4, sei8 };

std::string to_string(LossSelector s);
std::string to_string(EvalMode m);
std::string to_string(Aggregation a);
LossSelector loss_selector_from_string(const std::string& s);
EvalMode eval_mode_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

struct TrainConfig {
    TrainConfig() { mcl.c_aux = 4; }  // rotations are the default aux task

    int epochs = 30;
    int batch_n = 64;  // N parent items per minibatch
    double base_lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 1e-6;
    bool cosine_annealing = true;  // no warm-up
    std::uint64_t seed = 1;
    MclConfig mcl;  // c_main and batch_n are synced from the data by train()
    AuxMode aux_mode = AuxMode::labeled;
    LossSelector loss = LossSelector::mcl;
    double joint_lambda = 0.1;
    bool allow_invalid_hparams = false;
    EncoderSpec encoder;
    double noise_scale = 0.1;
    double dropout_rate = 0.05;
    bool score_on_features = false;  // score on last hidden layer instead of projection

    double learning_rate() const { return base_lr * batch_n / 256.0; }
};

struct EvalResult {
    std::string mode;  // plain | sei4 | sei8
    std::string agg;   // "-" for plain
    double accuracy = 0.0;
    MetricReport metrics;
};

struct RunReport {
    std::uint64_t seed = 0;
    ValidityReport validity;
    std::vector<std::string> warnings;
    std::vector<double> loss_curve;  // per-epoch mean training loss
    std::vector<EvalResult> evals;
};

struct TrainedModel {
    Mlp net;
    TrainConfig config;

    // Scoring embedding for a single item (projection head or features).
    Eigen::VectorXd embed(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd embed_rows(const Eigen::MatrixXd& x) const;
};

// Minibatch SGD on the selected loss. Fills report.validity/warnings and the
// loss curve; throws NumericalAbort with a diagnostic snapshot when the loss
// turns non-finite, ValidationError when hyper-parameters fall outside the
// attraction/convergence windows without the override flag.
TrainedModel train(const TrainConfig& config, const Dataset& data, RunReport& report);

// Fits a Gaussian bank on the training embeddings (one column per aux label
// for SEI modes, aux transforms applied at fit time) and scores the IND/OOD
// test sets.
EvalResult evaluate(const TrainedModel& model, const Dataset& data, EvalMode mode,
                    Aggregation agg);

// Per-item score rows for CSV dumps: item id, predicted label, confidence.
struct ScoreRow {
    int item_id = 0;
    std::string agg;
    int pred_label = 0;
    double confidence = 0.0;
};
std::vector<ScoreRow> score_test_items(const TrainedModel& model, const Dataset& data,
                                       EvalMode mode, Aggregation agg);

struct AblationConfig {
    SyntheticSpec synthetic;
    TrainConfig base;  // configuration of the aux-labeled arm
    int n_seeds = 5;
    EvalMode sei_mode = EvalMode::sei4;
    Aggregation agg = Aggregation::w_avg;
    bool include_ce = true;
};

struct AblationRun {
    std::string arm;
    std::string eval;  // "plain" or "sei4/w_avg" style
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    MetricReport metrics;
    ValidityReport validity;
    std::vector<std::string> warnings;
};

struct AblationSummaryRow {
    std::string arm;
    std::string eval;
    double accuracy = 0.0;
    double auroc = 0.0;
    double fpr_at_95 = 0.0;
    double aupr_ind = 0.0;
    double aupr_ood = 0.0;
};

struct AblationResult {
    std::vector<AblationRun> runs;
    std::vector<AblationSummaryRow> summary;  // seed-means per (arm, eval)
};

// Three-arm ablation (no aux / unlabeled augmentation / labeled aux), each
// evaluated plain and with SEI, plus a cross-entropy baseline, over n_seeds
// consecutive seeds.
AblationResult run_ablation(const AblationConfig& config);

}  // namespace mcl
