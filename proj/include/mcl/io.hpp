#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcl/batching.hpp"
#include "mcl/encoder.hpp"
#include "mcl/masking.hpp"
#include "mcl/metrics.hpp"
#include "mcl/scoring.hpp"
#include "mcl/train.hpp"

namespace mcl {

// --- dataset CSV: header f0,...,fd-1,label ---------------------------------
void write_dataset_csv(std::ostream& os, const std::vector<LabeledItem>& items);
std::vector<LabeledItem> read_dataset_csv(std::istream& is);
void write_dataset_csv_file(const std::string& path, const std::vector<LabeledItem>& items);
std::vector<LabeledItem> read_dataset_csv_file(const std::string& path);

// --- embeddings CSV: header z0,...,zd-1,main_label,aux_label ---------------
void write_embeddings_csv(std::ostream& os, const std::vector<TrainingEmbedding>& rows);
std::vector<TrainingEmbedding> read_embeddings_csv(std::istream& is);

// --- score dump CSV: item_id,agg,pred_label,confidence ---------------------
void write_scores_csv(std::ostream& os, const std::vector<ScoreRow>& rows);

// --- metrics CSV: one row per eval ------------------------------------------
void write_metrics_csv(std::ostream& os, const std::vector<EvalResult>& evals);

// --- ablation CSV: per-run rows plus seed-mean rows -------------------------
void write_ablation_csv(std::ostream& os, const AblationResult& result);

// --- JSON forms --------------------------------------------------------------
nlohmann::json to_json(const ValidityReport& report);
nlohmann::json to_json(const AugmentedBatch& batch);     // golden batch dumps
nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const EvalResult& result);
nlohmann::json to_json(const RunReport& report);
nlohmann::json to_json(const AblationResult& result);

nlohmann::json bank_to_json(const ClassGaussianBank& bank);
ClassGaussianBank bank_from_json(const nlohmann::json& j);

nlohmann::json model_to_json(const TrainedModel& model);
Mlp mlp_from_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace mcl
