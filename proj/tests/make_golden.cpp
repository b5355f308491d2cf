// Regenerates the golden loss/gradient fixtures under tests/golden/. Run
// only when the fixture set itself needs to change; the committed files are
// the contract for downstream implementations.

#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "mcl/io.hpp"
#include "mcl/losses.hpp"
#include "oracles.hpp"

using namespace mcl;

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

nlohmann::json make_case(const std::string& kind_name, LossKind kind,
                         const std::vector<int>& parent_labels, int c_aux,
                         std::uint64_t seed, const MclConfig& cfg) {
    const auto batch = oracle::make_batch(parent_labels, c_aux, seed);
    const EmbeddingMatrix z =
        oracle::random_embeddings(2 * static_cast<int>(parent_labels.size()), 4, seed);

    double loss = 0.0;
    const bool aux = cfg.aux_enabled() && batch.has_aux();
    switch (kind) {
        case LossKind::ntxent: loss = nt_xent_loss(cosine_similarity(z), cfg.tau).total; break;
        case LossKind::ccm: {
            const MaskMatrix mask = aux ? build_ccm_aux(batch, cfg) : build_ccm(batch, cfg);
            loss = ccm_loss(cosine_similarity(z), mask, cfg.tau).total;
            break;
        }
        case LossKind::mcl: loss = mcl_loss(z, batch, cfg, aux).total; break;
        case LossKind::supclr: loss = supclr_loss(z, batch, cfg.tau).total; break;
    }
    const EmbeddingMatrix grad = loss_gradient(z, batch, cfg, kind);

    nlohmann::json j;
    j["kind"] = kind_name;
    j["embeddings"] = matrix_json(z);
    j["main_labels"] = batch.main_labels;
    j["aux_labels"] = batch.aux_labels;
    j["parent_index"] = batch.parent_index;
    j["cfg"] = {{"tau", cfg.tau},
                {"alpha", cfg.alpha},
                {"beta", cfg.beta},
                {"lambda", cfg.lambda},
                {"c_main", cfg.c_main},
                {"c_aux", cfg.c_aux},
                {"batch_n", cfg.batch_n}};
    j["expected_loss"] = loss;
    j["expected_gradient"] = matrix_json(grad);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string out_dir = argc > 1 ? argv[1] : "tests/golden";

    MclConfig cfg;
    cfg.tau = 0.2;
    cfg.alpha = 0.05;
    cfg.beta = 2.5;
    cfg.lambda = 1.0;
    cfg.c_main = 3;
    cfg.c_aux = 1;
    cfg.batch_n = 4;

    MclConfig aux_cfg = cfg;
    aux_cfg.c_aux = 4;

    const struct {
        std::string name;
        LossKind kind;
        std::vector<int> labels;
        int c_aux;
        std::uint64_t seed;
        MclConfig config;
    } cases[] = {
        {"ntxent", LossKind::ntxent, {1, 2, 1, 3}, 0, 101, cfg},
        {"ccm", LossKind::ccm, {1, 1, 2, 3}, 0, 202, cfg},
        {"mcl", LossKind::mcl, {1, 1, 2, 2}, 0, 303, cfg},
        {"mcl_aux", LossKind::mcl, {1, 1, 2, 1}, 4, 404, aux_cfg},
        {"supclr", LossKind::supclr, {2, 2, 1, 1}, 0, 505, cfg},
    };

    for (const auto& c : cases) {
        const nlohmann::json j = make_case(c.name, c.kind, c.labels, c.c_aux, c.seed, c.config);
        const std::string path = out_dir + "/" + c.name + ".json";
        std::ofstream os(path);
        if (!os) {
            std::cerr << "cannot write " << path << "\n";
            return 1;
        }
        os << j.dump(2) << "\n";
        std::cout << "wrote " << path << "\n";
    }
    return 0;
}
