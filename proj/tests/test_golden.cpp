#include <doctest.h>

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcl/losses.hpp"

using namespace mcl;

namespace {

Eigen::MatrixXd matrix_from(const nlohmann::json& j) {
    Eigen::MatrixXd m(j.size(), j.at(0).size());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = j.at(r).at(c).get<double>();
    }
    return m;
}

struct GoldenCase {
    std::string kind;
    EmbeddingMatrix z;
    AugmentedBatch batch;
    MclConfig cfg;
    double expected_loss = 0.0;
    Eigen::MatrixXd expected_gradient;
};

GoldenCase load_case(const std::string& name) {
    const std::string path = std::string(MCL_TEST_DATA_DIR) + "/golden/" + name + ".json";
    std::ifstream is(path);
    REQUIRE_MESSAGE(is.good(), "missing fixture ", path);
    nlohmann::json j;
    is >> j;

    GoldenCase c;
    c.kind = j.at("kind").get<std::string>();
    c.z = matrix_from(j.at("embeddings"));
    c.batch.main_labels = j.at("main_labels").get<std::vector<int>>();
    c.batch.aux_labels = j.at("aux_labels").get<std::vector<int>>();
    c.batch.parent_index = j.at("parent_index").get<std::vector<int>>();
    c.batch.views.assign(c.batch.main_labels.size(), Eigen::VectorXd::Zero(2));
    c.cfg.tau = j.at("cfg").at("tau").get<double>();
    c.cfg.alpha = j.at("cfg").at("alpha").get<double>();
    c.cfg.beta = j.at("cfg").at("beta").get<double>();
    c.cfg.lambda = j.at("cfg").at("lambda").get<double>();
    c.cfg.c_main = j.at("cfg").at("c_main").get<int>();
    c.cfg.c_aux = j.at("cfg").at("c_aux").get<int>();
    c.cfg.batch_n = j.at("cfg").at("batch_n").get<int>();
    c.expected_loss = j.at("expected_loss").get<double>();
    c.expected_gradient = matrix_from(j.at("expected_gradient"));
    return c;
}

double eval_loss(const GoldenCase& c, LossKind kind) {
    const bool aux = c.cfg.aux_enabled() && c.batch.has_aux();
    switch (kind) {
        case LossKind::ntxent: return nt_xent_loss(cosine_similarity(c.z), c.cfg.tau).total;
        case LossKind::ccm: {
            const MaskMatrix mask = aux ? build_ccm_aux(c.batch, c.cfg) : build_ccm(c.batch, c.cfg);
            return ccm_loss(cosine_similarity(c.z), mask, c.cfg.tau).total;
        }
        case LossKind::mcl: return mcl_loss(c.z, c.batch, c.cfg, aux).total;
        case LossKind::supclr: return supclr_loss(c.z, c.batch, c.cfg.tau).total;
    }
    return 0.0;
}

void check_case(const std::string& name, LossKind kind) {
    const GoldenCase c = load_case(name);
    CHECK(std::abs(eval_loss(c, kind) - c.expected_loss) < 1e-10);
    const Eigen::MatrixXd grad = loss_gradient(c.z, c.batch, c.cfg, kind);
    CHECK((grad - c.expected_gradient).cwiseAbs().maxCoeff() < 1e-10);
}

}  // namespace

TEST_CASE("golden fixtures pin losses and gradients to 1e-10") {
    check_case("ntxent", LossKind::ntxent);
    check_case("ccm", LossKind::ccm);
    check_case("mcl", LossKind::mcl);
    check_case("mcl_aux", LossKind::mcl);
    check_case("supclr", LossKind::supclr);
}
