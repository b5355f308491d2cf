#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mcl/errors.hpp"
#include "mcl/losses.hpp"
#include "oracles.hpp"

using namespace mcl;

namespace {

MclConfig cfg_paper(int batch_n = 2, int c_main = 3, int c_aux = 1) {
    MclConfig cfg;
    cfg.tau = 0.2;
    cfg.alpha = 0.05;
    cfg.beta = 2.5;
    cfg.lambda = 1.0;
    cfg.batch_n = batch_n;
    cfg.c_main = c_main;
    cfg.c_aux = c_aux;
    return cfg;
}

SimilarityMatrix hand_similarity(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 37ULL + 5ULL);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    SimilarityMatrix s;
    s.values.resize(n, n);
    for (int i = 0; i < n; ++i) {
        s.values(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double v = u(rng);
            s.values(i, j) = v;
            s.values(j, i) = v;
        }
    }
    return s;
}

double per_view_sum(const LossValue& v) {
    return std::accumulate(v.per_view.begin(), v.per_view.end(), 0.0);
}

}  // namespace

TEST_CASE("cosine similarity basics") {
    EmbeddingMatrix z(3, 2);
    z << 1.0, 0.0, 0.0, 1.0, -2.0, 0.0;
    const SimilarityMatrix s = cosine_similarity(z);
    CHECK(s.values(0, 0) == 1.0);
    CHECK(s.values(0, 1) == 0.0);
    CHECK(s.values(0, 2) == -1.0);
    CHECK(s.values(1, 2) == s.values(2, 1));

    EmbeddingMatrix dup(2, 2);
    dup << 3.0, 4.0, 3.0, 4.0;
    CHECK(cosine_similarity(dup).values(0, 1) == doctest::Approx(1.0));

    EmbeddingMatrix zero(2, 2);
    zero << 0.0, 0.0, 1.0, 0.0;
    CHECK_THROWS_AS(cosine_similarity(zero), ValidationError);
}

TEST_CASE("nt-xent single pair collapses to zero") {
    const SimilarityMatrix s = hand_similarity(2, 1);
    CHECK(nt_xent_loss(s, 0.2).total == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("nt-xent matches the scalar oracle") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const int n = 4 + 2 * static_cast<int>(seed % 4);
        const SimilarityMatrix s = hand_similarity(n, seed);
        const LossValue v = nt_xent_loss(s, 0.2);
        CHECK(v.total == doctest::Approx(oracle::ntxent(s.values, 0.2)).epsilon(1e-12));
        CHECK(per_view_sum(v) == doctest::Approx(v.total).epsilon(1e-12));
    }
    CHECK_THROWS_AS(nt_xent_loss(hand_similarity(3, 0), 0.2), ValidationError);
}

TEST_CASE("scaling all embeddings leaves every loss unchanged") {
    const auto batch = oracle::make_batch({1, 1, 2});
    const EmbeddingMatrix z = oracle::random_embeddings(6, 4, 3);
    const EmbeddingMatrix scaled = 7.0 * z;
    const MclConfig cfg = cfg_paper(3);

    CHECK(mcl_loss(z, batch, cfg, false).total ==
          doctest::Approx(mcl_loss(scaled, batch, cfg, false).total).epsilon(1e-12));
    CHECK(supclr_loss(z, batch, 0.2).total ==
          doctest::Approx(supclr_loss(scaled, batch, 0.2).total).epsilon(1e-12));
    CHECK(nt_xent_loss(cosine_similarity(z), 0.2).total ==
          doctest::Approx(nt_xent_loss(cosine_similarity(scaled), 0.2).total).epsilon(1e-12));
}

TEST_CASE("orthogonal rotation of the embedding space is a no-op") {
    const auto batch = oracle::make_batch({1, 2, 1});
    const EmbeddingMatrix z = oracle::random_embeddings(6, 3, 9);
    // Householder reflection: orthogonal by construction.
    Eigen::VectorXd u(3);
    u << 1.0, -2.0, 0.5;
    u.normalize();
    const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3) - 2.0 * u * u.transpose();
    const EmbeddingMatrix rotated = z * q;

    const MclConfig cfg = cfg_paper(3);
    CHECK(mcl_loss(z, batch, cfg, false).total ==
          doctest::Approx(mcl_loss(rotated, batch, cfg, false).total).epsilon(1e-9));
    CHECK(supclr_loss(z, batch, 0.2).total ==
          doctest::Approx(supclr_loss(rotated, batch, 0.2).total).epsilon(1e-9));
}

TEST_CASE("ccm loss with a flat mask equals nt-xent") {
    const auto batch = oracle::make_batch({1, 1, 2, 3});
    const SimilarityMatrix s = hand_similarity(8, 4);
    MclConfig cfg = cfg_paper(4);
    cfg.alpha = 1.0 / cfg.tau;
    const MaskMatrix flat = build_ccm(batch, cfg);
    const double a = ccm_loss(s, flat, cfg.tau).total;
    const double b = nt_xent_loss(s, cfg.tau).total;
    CHECK(std::abs(a - b) / std::abs(b) < 1e-12);
}

TEST_CASE("ccm loss matches the scalar oracle and label symmetry") {
    const auto batch = oracle::make_batch({1, 2});  // views A A B B
    const SimilarityMatrix s = hand_similarity(4, 7);
    const MclConfig cfg = cfg_paper(2);
    const MaskMatrix mask = build_ccm(batch, cfg);
    const LossValue v = ccm_loss(s, mask, cfg.tau);
    CHECK(v.total == doctest::Approx(oracle::ccm(s.values, mask.values, cfg.tau)).epsilon(1e-12));

    // Swapping class ids leaves the value unchanged.
    auto swapped = oracle::make_batch({2, 1});
    const MaskMatrix mask2 = build_ccm(swapped, cfg);
    CHECK(ccm_loss(s, mask2, cfg.tau).total == doctest::Approx(v.total).epsilon(1e-12));

    SUBCASE("shape mismatch throws") {
        const MaskMatrix small = build_ccm(oracle::make_batch({1}), cfg);
        CHECK_THROWS_AS(ccm_loss(s, small, cfg.tau), ValidationError);
    }
}

TEST_CASE("ccm loss strictly increases when a different-label pair gets closer") {
    const auto batch = oracle::make_batch({1, 2, 1});
    SimilarityMatrix s = hand_similarity(6, 11);
    const MclConfig cfg = cfg_paper(3);
    const MaskMatrix mask = build_ccm(batch, cfg);
    const double before = ccm_loss(s, mask, cfg.tau).total;
    // Views 1 and 3 (0-based 0 and 2) carry labels A and B.
    s.values(0, 2) += 0.05;
    s.values(2, 0) += 0.05;
    const double after = ccm_loss(s, mask, cfg.tau).total;
    CHECK(after > before);
}

TEST_CASE("spa loss zeroes out when every label has a single parent") {
    const auto batch = oracle::make_batch({1, 2, 3});
    const SimilarityMatrix s = hand_similarity(6, 13);
    const MclConfig cfg = cfg_paper(3);
    const MaskMatrix mask = build_ccm(batch, cfg);
    CHECK(spa_loss(s, mask, batch, cfg.tau).total == 0.0);
}

TEST_CASE("spa expectation matches the scalar oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto batch = oracle::make_batch({1, 1, 2});
        const SimilarityMatrix s = hand_similarity(6, 100 + seed);
        const MclConfig cfg = cfg_paper(3);
        const MaskMatrix mask = build_ccm(batch, cfg);
        const LossValue v = spa_loss(s, mask, batch, cfg.tau);
        CHECK(v.total ==
              doctest::Approx(oracle::spa_expectation(s.values, mask.values, batch, cfg.tau))
                  .epsilon(1e-12));
    }
}

TEST_CASE("single-sample spa is reproducible and unbiased") {
    const auto batch = oracle::make_batch({1, 1, 1, 2});
    const SimilarityMatrix s = hand_similarity(8, 21);
    const MclConfig cfg = cfg_paper(4);
    const MaskMatrix mask = build_ccm(batch, cfg);

    const double once = spa_loss(s, mask, batch, cfg.tau, SpaMode::single_sample, 42).total;
    const double again = spa_loss(s, mask, batch, cfg.tau, SpaMode::single_sample, 42).total;
    CHECK(once == again);

    const double expectation = spa_loss(s, mask, batch, cfg.tau).total;
    const int trials = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double v = spa_loss(s, mask, batch, cfg.tau, SpaMode::single_sample,
                                  static_cast<std::uint64_t>(t)).total;
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / trials;
    const double var = (sumsq - sum * sum / trials) / (trials - 1);
    const double stderr_mean = std::sqrt(var / trials);
    CHECK(std::abs(mean - expectation) < 3.0 * stderr_mean + 1e-12);
}

TEST_CASE("mcl loss composes ccm and spa and degenerates to nt-xent") {
    const auto batch = oracle::make_batch({1, 1, 2});
    const EmbeddingMatrix z = oracle::random_embeddings(6, 4, 31);
    MclConfig cfg = cfg_paper(3);

    SUBCASE("full degeneration") {
        cfg.lambda = 0.0;
        cfg.alpha = 1.0 / cfg.tau;
        const double a = mcl_loss(z, batch, cfg, false).total;
        const double b = nt_xent_loss(cosine_similarity(z), cfg.tau).total;
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }

    SUBCASE("component recomposition") {
        const LossValue v = mcl_loss(z, batch, cfg, false);
        const SimilarityMatrix s = cosine_similarity(z);
        const MaskMatrix mask = build_ccm(batch, cfg);
        const double ccm_part = ccm_loss(s, mask, cfg.tau).total;
        const double spa_part = spa_loss(s, mask, batch, cfg.tau).total;
        CHECK(v.total == doctest::Approx(ccm_part + cfg.lambda * spa_part).epsilon(1e-12));
        CHECK(v.ccm == doctest::Approx(ccm_part).epsilon(1e-12));
        CHECK(v.spa == doctest::Approx(spa_part).epsilon(1e-12));
        CHECK(v.total == doctest::Approx(v.ccm + v.lambda * v.spa).epsilon(1e-12));
        CHECK(per_view_sum(v) == doctest::Approx(v.total).epsilon(1e-12));
    }

    SUBCASE("one small exact gradient step decreases the loss") {
        const double before = mcl_loss(z, batch, cfg, false).total;
        const EmbeddingMatrix g = loss_gradient(z, batch, cfg, LossKind::mcl);
        const double after = mcl_loss(z - 1e-4 * g, batch, cfg, false).total;
        CHECK(after < before);
    }
}

TEST_CASE("mcl loss with aux labels uses the hierarchical mask") {
    auto batch = oracle::make_batch({1, 1, 2}, 4, 3);
    const EmbeddingMatrix z = oracle::random_embeddings(6, 4, 17);
    const MclConfig cfg = cfg_paper(3, 3, 4);
    const LossValue v = mcl_loss(z, batch, cfg, true);
    const SimilarityMatrix s = cosine_similarity(z);
    const MaskMatrix mask = build_ccm_aux(batch, cfg);
    const double expected = oracle::ccm(s.values, mask.values, cfg.tau) +
                            cfg.lambda * oracle::spa_expectation(s.values, mask.values, batch, cfg.tau);
    CHECK(v.total == doctest::Approx(expected).epsilon(1e-12));
    CHECK_THROWS_AS(mcl_loss(z, oracle::make_batch({1, 1, 2}), cfg, true), ValidationError);
}

TEST_CASE("supclr loss behaviors") {
    SUBCASE("single parent equals nt-xent on the pair") {
        const auto batch = oracle::make_batch({1});
        const EmbeddingMatrix z = oracle::random_embeddings(2, 3, 41);
        const double a = supclr_loss(z, batch, 0.2).total;
        const double b = nt_xent_loss(cosine_similarity(z), 0.2).total;
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }

    SUBCASE("matches the scalar oracle on a one-class batch") {
        const auto batch = oracle::make_batch({1, 1});
        const EmbeddingMatrix z = oracle::random_embeddings(4, 3, 43);
        const double a = supclr_loss(z, batch, 0.2).total;
        CHECK(a == doctest::Approx(oracle::supclr(cosine_similarity(z).values, batch, 0.2))
                       .epsilon(1e-12));
    }

    SUBCASE("all-distinct labels reduce to nt-xent") {
        const auto batch = oracle::make_batch({1, 2, 3, 4});
        const EmbeddingMatrix z = oracle::random_embeddings(8, 3, 47);
        const double a = supclr_loss(z, batch, 0.2).total;
        const double b = nt_xent_loss(cosine_similarity(z), 0.2).total;
        CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
    }
}

TEST_CASE("joint loss arithmetic") {
    LossValue simclr;
    simclr.total = 2.0;
    CHECK(joint_loss(1.0, simclr, 0.1) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(joint_loss(3.5, simclr, 0.0) == 3.5);
    simclr.total = 0.0;
    CHECK(joint_loss(0.0, simclr, 0.1) == 0.0);
}
