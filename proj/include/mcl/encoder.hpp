#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace mcl {

// Desk-scale backbone: a small perceptron
// encoder followed by a single linear projection head, plus an optional
// linear classifier head for the cross-entropy arms.
struct EncoderSpec {
    int input_dim = 16;
    std::vector<int> hidden = {48, 48, 48};  // encoder widths, at least one layer
    int embed_dim = 12;                      // projection head output, >= 2
    std::string activation = "relu";         // relu | tanh
    int n_classes = 0;                       // > 0 adds the classifier head

    void validate() const;
};

struct Mlp {
    EncoderSpec spec;
    std::vector<Eigen::MatrixXd> w;  // hidden layers then projection, out x in
    std::vector<Eigen::VectorXd> b;
    Eigen::MatrixXd w_cls;  // n_classes x embed_dim when the head is present
    Eigen::VectorXd b_cls;

    static Mlp init(const EncoderSpec& spec, std::uint64_t seed);

    struct Cache {
        Eigen::MatrixXd input;
        std::vector<Eigen::MatrixXd> pre;   // per hidden layer, before activation
        std::vector<Eigen::MatrixXd> post;  // per hidden layer, after activation
    };

    // Projection-head output for a row-per-item matrix.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const;
    // Last hidden activation ("latent feature" scoring path).
    Eigen::MatrixXd features(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd embed1(const Eigen::VectorXd& x) const;
    Eigen::VectorXd features1(const Eigen::VectorXd& x) const;

    Eigen::MatrixXd logits(const Eigen::MatrixXd& z) const;

    struct Gradients {
        std::vector<Eigen::MatrixXd> w;
        std::vector<Eigen::VectorXd> b;
        Eigen::MatrixXd w_cls;
        Eigen::VectorXd b_cls;
    };

    Gradients zero_gradients() const;

    // Backpropagates d(loss)/d(projection output) through the network.
    Gradients backward(const Cache& cache, const Eigen::MatrixXd& dz) const;
};

// Mean cross-entropy of row-wise logits against 1-based labels; fills
// dlogits with the gradient when given.
double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     Eigen::MatrixXd* dlogits = nullptr);

// SGD with momentum, weight decay, and an optional per-call learning rate.
struct SgdState {
    double momentum = 0.9;
    double weight_decay = 1e-6;
    Mlp::Gradients velocity;
};

void sgd_step(Mlp& net, const Mlp::Gradients& grads, SgdState& state, double lr);

}  // namespace mcl
