#include "mcl/encoder.hpp"

#include <cmath>
#include <random>

#include "mcl/errors.hpp"
#include "mcl/rng.hpp"

namespace mcl {

void EncoderSpec::validate() const {
    if (input_dim < 1) throw ValidationError("encoder input_dim must be >= 1");
    if (hidden.empty()) throw ValidationError("encoder needs at least one hidden layer");
    for (int h : hidden) {
        if (h < 1) throw ValidationError("encoder hidden widths must be >= 1");
    }
    if (embed_dim < 2) throw ValidationError("projection output dimension must be >= 2");
    if (activation != "relu" && activation != "tanh") {
        throw ValidationError("unknown activation '" + activation + "'");
    }
}

namespace {

double act_value(const std::string& kind, double x) {
    return kind == "relu" ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

double act_slope(const std::string& kind, double pre) {
    if (kind == "relu") return pre > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(pre);
    return 1.0 - t * t;
}

Eigen::MatrixXd random_layer(int out, int in, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Eigen::MatrixXd w(out, in);
    for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) w(r, c) = dist(rng);
    }
    return w;
}

}  // namespace

Mlp Mlp::init(const EncoderSpec& spec, std::uint64_t seed) {
    spec.validate();
    Mlp net;
    net.spec = spec;
    auto rng = substream(seed, "init");

    const double gain = spec.activation == "relu" ? 2.0 : 1.0;
    int in = spec.input_dim;
    for (int width : spec.hidden) {
        net.w.push_back(random_layer(width, in, std::sqrt(gain / in), rng));
        net.b.push_back(Eigen::VectorXd::Zero(width));
        in = width;
    }
    net.w.push_back(random_layer(spec.embed_dim, in, std::sqrt(1.0 / in), rng));
    net.b.push_back(Eigen::VectorXd::Zero(spec.embed_dim));

    if (spec.n_classes > 0) {
        net.w_cls = random_layer(spec.n_classes, spec.embed_dim, std::sqrt(1.0 / spec.embed_dim), rng);
        net.b_cls = Eigen::VectorXd::Zero(spec.n_classes);
    }
    return net;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, Cache* cache) const {
    if (x.cols() != spec.input_dim) throw ValidationError("encoder input dimension mismatch");
    if (cache) {
        cache->input = x;
        cache->pre.clear();
        cache->post.clear();
    }
    Eigen::MatrixXd h = x;
    const std::size_t n_hidden = spec.hidden.size();
    for (std::size_t l = 0; l < n_hidden; ++l) {
        Eigen::MatrixXd pre = (h * w[l].transpose()).rowwise() + b[l].transpose();
        Eigen::MatrixXd post = pre.unaryExpr(
            [this](double v) { return act_value(spec.activation, v); });
        if (cache) {
            cache->pre.push_back(pre);
            cache->post.push_back(post);
        }
        h = std::move(post);
    }
    return (h * w.back().transpose()).rowwise() + b.back().transpose();
}

Eigen::MatrixXd Mlp::features(const Eigen::MatrixXd& x) const {
    if (x.cols() != spec.input_dim) throw ValidationError("encoder input dimension mismatch");
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
        h = ((h * w[l].transpose()).rowwise() + b[l].transpose())
                .unaryExpr([this](double v) { return act_value(spec.activation, v); });
    }
    return h;
}

Eigen::VectorXd Mlp::embed1(const Eigen::VectorXd& x) const {
    return forward(x.transpose()).row(0);
}

Eigen::VectorXd Mlp::features1(const Eigen::VectorXd& x) const {
    return features(x.transpose()).row(0);
}

Eigen::MatrixXd Mlp::logits(const Eigen::MatrixXd& z) const {
    if (spec.n_classes <= 0) throw ValidationError("encoder has no classifier head");
    return (z * w_cls.transpose()).rowwise() + b_cls.transpose();
}

Mlp::Gradients Mlp::zero_gradients() const {
    Gradients g;
    for (const auto& wi : w) g.w.push_back(Eigen::MatrixXd::Zero(wi.rows(), wi.cols()));
    for (const auto& bi : b) g.b.push_back(Eigen::VectorXd::Zero(bi.size()));
    if (spec.n_classes > 0) {
        g.w_cls = Eigen::MatrixXd::Zero(w_cls.rows(), w_cls.cols());
        g.b_cls = Eigen::VectorXd::Zero(b_cls.size());
    }
    return g;
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& dz) const {
    Gradients g = zero_gradients();
    const std::size_t n_hidden = spec.hidden.size();
    const Eigen::MatrixXd& last_post = n_hidden > 0 ? cache.post.back() : cache.input;

    g.w[n_hidden] = dz.transpose() * last_post;
    g.b[n_hidden] = dz.colwise().sum();
    Eigen::MatrixXd dh = dz * w[n_hidden];

    for (std::size_t l = n_hidden; l-- > 0;) {
        Eigen::MatrixXd dpre =
            dh.array() * cache.pre[l]
                             .unaryExpr([this](double v) { return act_slope(spec.activation, v); })
                             .array();
        const Eigen::MatrixXd& below = l == 0 ? cache.input : cache.post[l - 1];
        g.w[l] = dpre.transpose() * below;
        g.b[l] = dpre.colwise().sum();
        if (l > 0) dh = dpre * w[l];
    }
    return g;
}

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels,
                     Eigen::MatrixXd* dlogits) {
    const int n = static_cast<int>(logits.rows());
    const int c = static_cast<int>(logits.cols());
    if (static_cast<int>(labels.size()) != n) throw ValidationError("cross_entropy: label count mismatch");

    if (dlogits) dlogits->setZero(n, c);
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const int y = labels[i] - 1;
        if (y < 0 || y >= c) throw ValidationError("cross_entropy: label outside logit range");
        const double m = logits.row(i).maxCoeff();
        double denom = 0.0;
        for (int k = 0; k < c; ++k) denom += std::exp(logits(i, k) - m);
        loss += -(logits(i, y) - m) + std::log(denom);
        if (dlogits) {
            for (int k = 0; k < c; ++k) {
                const double p = std::exp(logits(i, k) - m) / denom;
                (*dlogits)(i, k) = (p - (k == y ? 1.0 : 0.0)) / n;
            }
        }
    }
    return loss / n;
}

void sgd_step(Mlp& net, const Mlp::Gradients& grads, SgdState& state, double lr) {
    if (state.velocity.w.empty()) state.velocity = net.zero_gradients();
    auto update = [&](Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, Eigen::MatrixXd& vel) {
        vel = state.momentum * vel + (grad + state.weight_decay * param);
        param -= lr * vel;
    };
    auto update_vec = [&](Eigen::VectorXd& param, const Eigen::VectorXd& grad, Eigen::VectorXd& vel) {
        vel = state.momentum * vel + (grad + state.weight_decay * param);
        param -= lr * vel;
    };
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        update(net.w[l], grads.w[l], state.velocity.w[l]);
        update_vec(net.b[l], grads.b[l], state.velocity.b[l]);
    }
    if (net.spec.n_classes > 0 && grads.w_cls.size() > 0) {
        update(net.w_cls, grads.w_cls, state.velocity.w_cls);
        update_vec(net.b_cls, grads.b_cls, state.velocity.b_cls);
    }
}

}  // namespace mcl
