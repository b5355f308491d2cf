// mclkit: synthetic-data generation, hyper-parameter validation, training,
// evaluation, ablation, and embedding export for the masked contrastive
// learning toolkit. Exit codes: 0 success, 2 validation failure, 3 numerical
// abort.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "mcl/config.hpp"
#include "mcl/errors.hpp"
#include "mcl/io.hpp"
#include "mcl/train.hpp"

namespace fs = std::filesystem;

namespace {

mcl::Dataset load_dataset_dir(const std::string& dir) {
    mcl::Dataset data;
    data.train = mcl::read_dataset_csv_file(dir + "/train.csv");
    data.test_ind = mcl::read_dataset_csv_file(dir + "/test_ind.csv");
    data.test_ood = mcl::read_dataset_csv_file(dir + "/test_ood.csv");
    if (data.train.empty()) throw mcl::ValidationError("training set is empty");
    data.d_in = static_cast<int>(data.train.front().features.size());
    int c = 0;
    for (const mcl::LabeledItem& item : data.train) c = std::max(c, item.main_label);
    data.n_train_classes = c;
    return data;
}

mcl::TrainedModel load_model(const std::string& path, const mcl::TrainConfig& base) {
    const nlohmann::json j = nlohmann::json::parse(mcl::read_text_file(path));
    mcl::TrainedModel model{mcl::mlp_from_json(j), base};
    model.config.score_on_features = j.value("score_on_features", false);
    // The training-time aux exposure decides how SEI banks are fit.
    const std::string aux_mode = j.value("aux_mode", "labeled");
    model.config.aux_mode = aux_mode == "none"
                                ? mcl::AuxMode::none
                                : aux_mode == "unlabeled" ? mcl::AuxMode::unlabeled
                                                          : mcl::AuxMode::labeled;
    return model;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    mcl::write_text_file(path, j.dump(2) + "\n");
}

int run(int argc, char** argv) {
    CLI::App app{"masked contrastive learning toolkit"};
    app.require_subcommand(1);

    std::string config_path, data_dir, out_dir = ".", model_path, out_file;
    std::string mode_override, agg_override;
    bool dump_scores = false;

    auto add_common = [&](CLI::App* cmd, bool needs_data, bool needs_model) {
        cmd->add_option("--config", config_path, "TOML config file")->required();
        if (needs_data) cmd->add_option("--data", data_dir, "dataset directory")->required();
        if (needs_model) cmd->add_option("--model", model_path, "model JSON file")->required();
        return cmd;
    };

    CLI::App* gen = add_common(app.add_subcommand("gen-data", "generate the synthetic benchmark"),
                               false, false);
    gen->add_option("--out", out_dir, "output directory");

    CLI::App* validate = add_common(
        app.add_subcommand("validate-hparams", "check the attraction/convergence windows"), false,
        false);

    CLI::App* train_cmd =
        add_common(app.add_subcommand("train", "train the encoder"), true, false);
    train_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* eval_cmd =
        add_common(app.add_subcommand("evaluate", "evaluate a trained model"), true, true);
    eval_cmd->add_option("--out", out_dir, "output directory");
    eval_cmd->add_option("--mode", mode_override, "plain | sei4 | sei8");
    eval_cmd->add_option("--agg", agg_override, "avg | max | w_avg");
    eval_cmd->add_flag("--scores", dump_scores, "also write scores.csv");

    CLI::App* ablate_cmd =
        add_common(app.add_subcommand("ablate", "run the three-arm ablation suite"), false, false);
    ablate_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* export_cmd = add_common(
        app.add_subcommand("export-embeddings", "write training-set embeddings"), true, true);
    export_cmd->add_option("--out-file", out_file, "output CSV file")->required();
    export_cmd->add_option("--mode", mode_override, "plain | sei4 | sei8");

    CLI11_PARSE(app, argc, argv);

    const mcl::HarnessConfig cfg = mcl::load_config(config_path);
    fs::create_directories(out_dir);

    if (gen->parsed()) {
        const mcl::Dataset data = mcl::generate_synthetic(cfg.synthetic);
        mcl::write_dataset_csv_file(out_dir + "/train.csv", data.train);
        mcl::write_dataset_csv_file(out_dir + "/test_ind.csv", data.test_ind);
        mcl::write_dataset_csv_file(out_dir + "/test_ood.csv", data.test_ood);
        std::cout << "wrote " << data.train.size() << " train, " << data.test_ind.size()
                  << " IND test, " << data.test_ood.size() << " OOD test rows to " << out_dir
                  << "\n";
        return 0;
    }

    if (validate->parsed()) {
        mcl::MclConfig mc = cfg.train.mcl;
        mc.batch_n = cfg.train.batch_n;
        mc.c_main = cfg.synthetic.c_main - static_cast<int>(cfg.synthetic.anomaly_classes.size());
        if (cfg.train.aux_mode != mcl::AuxMode::labeled) mc.c_aux = 1;
        const mcl::ValidityReport report =
            cfg.validate_expected_pos > 0.0 ? mcl::validate_hparams(mc, cfg.validate_expected_pos)
                                            : mcl::validate_hparams(mc);
        std::cout << mcl::to_json(report).dump(2) << "\n";
        return report.overall_ok ? 0 : 2;
    }

    if (train_cmd->parsed()) {
        const mcl::Dataset data = load_dataset_dir(data_dir);
        mcl::RunReport report;
        const mcl::TrainedModel model = mcl::train(cfg.train, data, report);
        report.evals.push_back(mcl::evaluate(model, data, cfg.eval_mode, cfg.eval_agg));
        write_json_file(out_dir + "/report.json", mcl::to_json(report));
        write_json_file(out_dir + "/model.json", mcl::model_to_json(model));
        std::ofstream metrics(out_dir + "/metrics.csv");
        mcl::write_metrics_csv(metrics, report.evals);
        std::cout << "trained " << mcl::to_string(cfg.train.loss) << " for " << cfg.train.epochs
                  << " epochs; final loss "
                  << (report.loss_curve.empty() ? 0.0 : report.loss_curve.back()) << "\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        const mcl::Dataset data = load_dataset_dir(data_dir);
        const mcl::TrainedModel model = load_model(model_path, cfg.train);
        const mcl::EvalMode mode =
            mode_override.empty() ? cfg.eval_mode : mcl::eval_mode_from_string(mode_override);
        const mcl::Aggregation agg =
            agg_override.empty() ? cfg.eval_agg : mcl::aggregation_from_string(agg_override);
        const mcl::EvalResult result = mcl::evaluate(model, data, mode, agg);
        write_json_file(out_dir + "/report.json", mcl::to_json(result));
        std::ofstream metrics(out_dir + "/metrics.csv");
        mcl::write_metrics_csv(metrics, {result});
        if (dump_scores) {
            std::ofstream scores(out_dir + "/scores.csv");
            mcl::write_scores_csv(scores, mcl::score_test_items(model, data, mode, agg));
        }
        std::cout << "accuracy " << result.accuracy << " auroc " << result.metrics.auroc << "\n";
        return 0;
    }

    if (ablate_cmd->parsed()) {
        mcl::AblationConfig ab;
        ab.synthetic = cfg.synthetic;
        ab.base = cfg.train;
        ab.base.aux_mode = mcl::AuxMode::labeled;
        ab.base.loss = mcl::LossSelector::mcl;
        ab.n_seeds = cfg.ablate_seeds;
        ab.sei_mode = cfg.ablate_sei_mode;
        ab.agg = cfg.ablate_agg;
        const mcl::AblationResult result = mcl::run_ablation(ab);
        write_json_file(out_dir + "/report.json", mcl::to_json(result));
        std::ofstream csv(out_dir + "/metrics.csv");
        mcl::write_ablation_csv(csv, result);
        for (const mcl::AblationSummaryRow& row : result.summary) {
            std::cout << row.arm << " " << row.eval << ": acc " << row.accuracy << " auroc "
                      << row.auroc << "\n";
        }
        return 0;
    }

    if (export_cmd->parsed()) {
        const mcl::Dataset data = load_dataset_dir(data_dir);
        const mcl::TrainedModel model = load_model(model_path, cfg.train);
        const mcl::EvalMode mode =
            mode_override.empty() ? mcl::EvalMode::plain : mcl::eval_mode_from_string(mode_override);
        mcl::AugmentationFamily family = mcl::AugmentationFamily::plain(0.0, 0.0);
        if (mode == mcl::EvalMode::sei4) family = mcl::AugmentationFamily::rotations4(0.0, 0.0);
        if (mode == mcl::EvalMode::sei8) family = mcl::AugmentationFamily::rotations_flip8(0.0, 0.0);

        std::vector<mcl::TrainingEmbedding> rows;
        rows.reserve(data.train.size() * family.c_aux);
        for (int m = 1; m <= family.c_aux; ++m) {
            for (const mcl::LabeledItem& item : data.train) {
                rows.push_back({model.embed(family.apply_aux(item.features, m)), item.main_label, m});
            }
        }
        std::ofstream os(out_file);
        if (!os) throw mcl::ValidationError("cannot open '" + out_file + "' for writing");
        mcl::write_embeddings_csv(os, rows);
        std::cout << "wrote " << rows.size() << " embedding rows to " << out_file << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mcl::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        try {
            mcl::write_text_file("abort_snapshot.json", e.snapshot_json + "\n");
            std::cerr << "diagnostic snapshot written to abort_snapshot.json\n";
        } catch (...) {
        }
        return 3;
    } catch (const mcl::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
