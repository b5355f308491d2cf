#include "mcl/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "mcl/errors.hpp"

namespace mcl {

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double parse_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ValidationError("malformed number '" + s + "' in CSV");
    }
}

int parse_int(const std::string& s) {
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw ValidationError("malformed integer '" + s + "' in CSV");
    }
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.size();
    if (rows == 0) return {};
    const auto cols = j.at(0).size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

}  // namespace

void write_dataset_csv(std::ostream& os, const std::vector<LabeledItem>& items) {
    if (items.empty()) throw ValidationError("cannot write an empty dataset");
    const Eigen::Index d = items.front().features.size();
    for (Eigen::Index i = 0; i < d; ++i) os << 'f' << i << ',';
    os << "label\n";
    for (const LabeledItem& item : items) {
        if (item.features.size() != d) throw ValidationError("inconsistent feature dimensions");
        for (Eigen::Index i = 0; i < d; ++i) os << fmt(item.features[i]) << ',';
        os << item.main_label << '\n';
    }
}

std::vector<LabeledItem> read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("dataset CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 2 || header.back() != "label") {
        throw ValidationError("dataset CSV header must be f0,...,fd-1,label");
    }
    const std::size_t d = header.size() - 1;

    std::vector<LabeledItem> items;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != d + 1) throw ValidationError("dataset CSV row width mismatch");
        LabeledItem item;
        item.features.resize(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) item.features[static_cast<Eigen::Index>(i)] = parse_double(fields[i]);
        item.main_label = parse_int(fields.back());
        items.push_back(std::move(item));
    }
    return items;
}

void write_dataset_csv_file(const std::string& path, const std::vector<LabeledItem>& items) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open '" + path + "' for writing");
    write_dataset_csv(os, items);
}

std::vector<LabeledItem> read_dataset_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot open '" + path + "'");
    return read_dataset_csv(is);
}

void write_embeddings_csv(std::ostream& os, const std::vector<TrainingEmbedding>& rows) {
    if (rows.empty()) throw ValidationError("cannot write empty embeddings");
    const Eigen::Index d = rows.front().z.size();
    for (Eigen::Index i = 0; i < d; ++i) os << 'z' << i << ',';
    os << "main_label,aux_label\n";
    for (const TrainingEmbedding& row : rows) {
        for (Eigen::Index i = 0; i < d; ++i) os << fmt(row.z[i]) << ',';
        os << row.main_label << ',' << row.aux_label << '\n';
    }
}

std::vector<TrainingEmbedding> read_embeddings_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ValidationError("embeddings CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[header.size() - 2] != "main_label" ||
        header.back() != "aux_label") {
        throw ValidationError("embeddings CSV header must be z0,...,zd-1,main_label,aux_label");
    }
    const std::size_t d = header.size() - 2;

    std::vector<TrainingEmbedding> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != d + 2) throw ValidationError("embeddings CSV row width mismatch");
        TrainingEmbedding row;
        row.z.resize(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) row.z[static_cast<Eigen::Index>(i)] = parse_double(fields[i]);
        row.main_label = parse_int(fields[d]);
        row.aux_label = parse_int(fields[d + 1]);
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_scores_csv(std::ostream& os, const std::vector<ScoreRow>& rows) {
    os << "item_id,agg,pred_label,confidence\n";
    for (const ScoreRow& row : rows) {
        os << row.item_id << ',' << row.agg << ',' << row.pred_label << ',' << fmt(row.confidence)
           << '\n';
    }
}

void write_metrics_csv(std::ostream& os, const std::vector<EvalResult>& evals) {
    os << "mode,agg,accuracy,auroc,fpr_at_95,aupr_ind,aupr_ood,n_ind,n_ood\n";
    for (const EvalResult& e : evals) {
        os << e.mode << ',' << e.agg << ',' << fmt(e.accuracy) << ',' << fmt(e.metrics.auroc)
           << ',' << fmt(e.metrics.fpr_at_95) << ',' << fmt(e.metrics.aupr_ind) << ','
           << fmt(e.metrics.aupr_ood) << ',' << e.metrics.n_ind << ',' << e.metrics.n_ood << '\n';
    }
}

void write_ablation_csv(std::ostream& os, const AblationResult& result) {
    os << "arm,eval,seed,accuracy,auroc,fpr_at_95,aupr_ind,aupr_ood\n";
    for (const AblationRun& run : result.runs) {
        os << run.arm << ',' << run.eval << ',' << run.seed << ',' << fmt(run.accuracy) << ','
           << fmt(run.metrics.auroc) << ',' << fmt(run.metrics.fpr_at_95) << ','
           << fmt(run.metrics.aupr_ind) << ',' << fmt(run.metrics.aupr_ood) << '\n';
    }
    for (const AblationSummaryRow& row : result.summary) {
        os << row.arm << ',' << row.eval << ",mean," << fmt(row.accuracy) << ','
           << fmt(row.auroc) << ',' << fmt(row.fpr_at_95) << ',' << fmt(row.aupr_ind) << ','
           << fmt(row.aupr_ood) << '\n';
    }
}

nlohmann::json to_json(const ValidityReport& report) {
    return {{"attraction_bound", report.attraction_bound},
            {"convergence_bound", report.convergence_bound},
            {"attraction_ok", report.attraction_ok},
            {"convergence_ok", report.convergence_ok},
            {"overall_ok", report.overall_ok}};
}

nlohmann::json to_json(const AugmentedBatch& batch) {
    nlohmann::json views = nlohmann::json::array();
    for (const Vec& v : batch.views) views.push_back(vector_to_json(v));
    return {{"views", views},
            {"main_labels", batch.main_labels},
            {"aux_labels", batch.aux_labels},
            {"parent_index", batch.parent_index}};
}

nlohmann::json to_json(const MetricReport& report) {
    return {{"auroc", report.auroc},
            {"fpr_at_95", report.fpr_at_95},
            {"aupr_ind", report.aupr_ind},
            {"aupr_ood", report.aupr_ood},
            {"n_ind", report.n_ind},
            {"n_ood", report.n_ood}};
}

nlohmann::json to_json(const EvalResult& result) {
    nlohmann::json j = to_json(result.metrics);
    j["mode"] = result.mode;
    j["agg"] = result.agg;
    j["accuracy"] = result.accuracy;
    return j;
}

nlohmann::json to_json(const RunReport& report) {
    nlohmann::json evals = nlohmann::json::array();
    for (const EvalResult& e : report.evals) evals.push_back(to_json(e));
    return {{"seed", report.seed},
            {"validity", to_json(report.validity)},
            {"warnings", report.warnings},
            {"loss_curve", report.loss_curve},
            {"evals", evals}};
}

nlohmann::json to_json(const AblationResult& result) {
    nlohmann::json runs = nlohmann::json::array();
    for (const AblationRun& run : result.runs) {
        runs.push_back({{"arm", run.arm},
                        {"eval", run.eval},
                        {"seed", run.seed},
                        {"accuracy", run.accuracy},
                        {"metrics", to_json(run.metrics)},
                        {"validity", to_json(run.validity)},
                        {"warnings", run.warnings}});
    }
    nlohmann::json summary = nlohmann::json::array();
    for (const AblationSummaryRow& row : result.summary) {
        summary.push_back({{"arm", row.arm},
                           {"eval", row.eval},
                           {"accuracy", row.accuracy},
                           {"auroc", row.auroc},
                           {"fpr_at_95", row.fpr_at_95},
                           {"aupr_ind", row.aupr_ind},
                           {"aupr_ood", row.aupr_ood}});
    }
    return {{"runs", runs}, {"summary", summary}};
}

nlohmann::json bank_to_json(const ClassGaussianBank& bank) {
    nlohmann::json cells = nlohmann::json::array();
    for (int i = 1; i <= bank.c_main; ++i) {
        for (int j = 1; j <= bank.c_aux; ++j) {
            const ClassGaussian& cell = bank.cell(i, j);
            cells.push_back({{"i", i},
                             {"j", j},
                             {"mean", vector_to_json(cell.mean)},
                             {"covariance", matrix_to_json(cell.covariance)},
                             {"ridge", cell.ridge}});
        }
    }
    return {{"d", bank.dim}, {"C_main", bank.c_main}, {"C_aux", bank.c_aux}, {"cells", cells}};
}

ClassGaussianBank bank_from_json(const nlohmann::json& j) {
    ClassGaussianBank bank;
    bank.dim = j.at("d").get<int>();
    bank.c_main = j.at("C_main").get<int>();
    bank.c_aux = j.at("C_aux").get<int>();
    bank.cells.resize(static_cast<std::size_t>(bank.c_main) * bank.c_aux);

    std::vector<bool> seen(bank.cells.size(), false);
    for (const auto& cj : j.at("cells")) {
        const int i = cj.at("i").get<int>();
        const int m = cj.at("j").get<int>();
        if (i < 1 || i > bank.c_main || m < 1 || m > bank.c_aux) {
            throw ValidationError("bank JSON cell labels out of range");
        }
        const std::size_t idx = static_cast<std::size_t>(i - 1) * bank.c_aux + (m - 1);
        ClassGaussian cell;
        cell.mean = vector_from_json(cj.at("mean"));
        cell.covariance = matrix_from_json(cj.at("covariance"));
        cell.ridge = cj.at("ridge").get<double>();
        Eigen::MatrixXd ridged = cell.covariance;
        ridged.diagonal().array() += cell.ridge;
        const Eigen::LLT<Eigen::MatrixXd> llt(ridged);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("bank JSON: ridged covariance is not positive-definite");
        }
        cell.precision = llt.solve(Eigen::MatrixXd::Identity(bank.dim, bank.dim));
        bank.cells[idx] = std::move(cell);
        seen[idx] = true;
    }
    for (bool s : seen) {
        if (!s) throw ValidationError("bank JSON is missing cells");
    }
    return bank;
}

nlohmann::json model_to_json(const TrainedModel& model) {
    const Mlp& net = model.net;
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        layers.push_back({{"w", matrix_to_json(net.w[l])}, {"b", vector_to_json(net.b[l])}});
    }
    const char* aux_mode = model.config.aux_mode == AuxMode::none
                               ? "none"
                               : model.config.aux_mode == AuxMode::labeled ? "labeled"
                                                                           : "unlabeled";
    nlohmann::json j = {{"input_dim", net.spec.input_dim},
                        {"hidden", net.spec.hidden},
                        {"embed_dim", net.spec.embed_dim},
                        {"activation", net.spec.activation},
                        {"n_classes", net.spec.n_classes},
                        {"layers", layers},
                        {"score_on_features", model.config.score_on_features},
                        {"aux_mode", aux_mode}};
    if (net.spec.n_classes > 0) {
        j["w_cls"] = matrix_to_json(net.w_cls);
        j["b_cls"] = vector_to_json(net.b_cls);
    }
    return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
    Mlp net;
    net.spec.input_dim = j.at("input_dim").get<int>();
    net.spec.hidden = j.at("hidden").get<std::vector<int>>();
    net.spec.embed_dim = j.at("embed_dim").get<int>();
    net.spec.activation = j.at("activation").get<std::string>();
    net.spec.n_classes = j.at("n_classes").get<int>();
    for (const auto& layer : j.at("layers")) {
        net.w.push_back(matrix_from_json(layer.at("w")));
        net.b.push_back(vector_from_json(layer.at("b")));
    }
    if (net.spec.n_classes > 0) {
        net.w_cls = matrix_from_json(j.at("w_cls"));
        net.b_cls = vector_from_json(j.at("b_cls"));
    }
    return net;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open '" + path + "' for writing");
    os << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace mcl
