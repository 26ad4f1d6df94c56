#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "citecast/models/common.hpp"
#include "citecast/random.hpp"

namespace citecast {

// Gradient-trained networks. Parameters live in one flat vector so that Adam,
// serialization and finite-difference checks all treat them uniformly; the
// networks themselves only describe the layout and compute forward/backward.

namespace detail {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return (1.0 + (-z).exp()).inverse(); }

using ConstMap = Eigen::Map<const MatrixXd>;
using ConstVecMap = Eigen::Map<const VectorXd>;
using Map = Eigen::Map<MatrixXd>;
using VecMap = Eigen::Map<VectorXd>;

}  // namespace detail

// ---------------------------------------------------------------------------
// MLP

class MlpNet {
public:
    MlpNet() = default;
    MlpNet(std::size_t input_dim, const MlpConfig& config) {
        if (config.n_layers < 1 || config.layer_size < 1) throw ConfigError("mlp: layers and size must be >= 1");
        dims_.push_back(input_dim);
        for (int l = 0; l < config.n_layers; ++l) dims_.push_back(static_cast<std::size_t>(config.layer_size));
        dims_.push_back(1);
    }

    [[nodiscard]] std::size_t input_dim() const noexcept { return dims_.front(); }
    [[nodiscard]] std::span<const std::size_t> dims() const noexcept { return dims_; }

    [[nodiscard]] std::size_t parameter_count() const noexcept {
        std::size_t n = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) n += dims_[l] * dims_[l + 1] + dims_[l + 1];
        return n;
    }

    template <class Rng>
    void initialize(std::span<double> p, Rng& rng) const {
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            const std::size_t w = dims_[l] * dims_[l + 1];
            init_uniform(p.subspan(off, w), dims_[l], rng);
            off += w;
            std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(off), dims_[l + 1], 0.0);
            off += dims_[l + 1];
        }
    }

    [[nodiscard]] VectorXd forward(std::span<const double> p, const RowMatrix& x) const {
        MatrixXd a = x;
        std::size_t off = 0;
        for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
            const auto in = static_cast<Eigen::Index>(dims_[l]), out = static_cast<Eigen::Index>(dims_[l + 1]);
            detail::ConstMap w(p.data() + off, in, out);
            off += static_cast<std::size_t>(in * out);
            detail::ConstVecMap b(p.data() + off, out);
            off += static_cast<std::size_t>(out);
            MatrixXd z = a * w;
            z.rowwise() += b.transpose();
            a = l + 2 < dims_.size() ? MatrixXd(z.cwiseMax(0.0)) : z;
        }
        return a.col(0);
    }

    /// Mean squared error on (x, y); fills `grad` (same layout as params) when non-empty.
    double loss_and_gradient(std::span<const double> p, const RowMatrix& x, const VectorXd& y,
                             std::span<double> grad) const {
        const std::size_t n_layers = dims_.size() - 1;
        std::vector<MatrixXd> acts;
        acts.reserve(n_layers + 1);
        acts.emplace_back(x);
        std::vector<std::size_t> offsets(n_layers);
        std::size_t off = 0;
        for (std::size_t l = 0; l < n_layers; ++l) {
            offsets[l] = off;
            const auto in = static_cast<Eigen::Index>(dims_[l]), out = static_cast<Eigen::Index>(dims_[l + 1]);
            detail::ConstMap w(p.data() + off, in, out);
            detail::ConstVecMap b(p.data() + off + static_cast<std::size_t>(in * out), out);
            off += static_cast<std::size_t>(in * out + out);
            MatrixXd z = acts.back() * w;
            z.rowwise() += b.transpose();
            if (l + 1 < n_layers) acts.emplace_back(z.cwiseMax(0.0));
            else acts.emplace_back(std::move(z));
        }
        const VectorXd err = acts.back().col(0) - y;
        const double batch = static_cast<double>(y.size());
        const double loss = err.squaredNorm() / batch;
        if (grad.empty()) return loss;

        MatrixXd dz = (2.0 / batch) * err;
        for (std::size_t l = n_layers; l-- > 0;) {
            const auto in = static_cast<Eigen::Index>(dims_[l]), out = static_cast<Eigen::Index>(dims_[l + 1]);
            detail::Map gw(grad.data() + offsets[l], in, out);
            detail::VecMap gb(grad.data() + offsets[l] + static_cast<std::size_t>(in * out), out);
            gw.noalias() = acts[l].transpose() * dz;
            gb = dz.colwise().sum().transpose();
            if (l > 0) {
                detail::ConstMap w(p.data() + offsets[l], in, out);
                MatrixXd da = dz * w.transpose();
                dz = da.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
            }
        }
        return loss;
    }

    friend bool operator==(const MlpNet&, const MlpNet&) = default;

private:
    std::vector<std::size_t> dims_;
};

// ---------------------------------------------------------------------------
// Recurrent networks

enum class CellKind { Rnn, Lstm };

/// LSTM cell weights, gate blocks ordered input, forget, candidate, output.
struct LstmCellParams {
    MatrixXd w_x;  // input_dim x 4H
    MatrixXd w_h;  // H x 4H
    VectorXd b;    // 4H
};

struct LstmCellState {
    VectorXd h;
    VectorXd c;
};

/// One LSTM step: f, i, o sigmoid gates, tanh candidate g,
/// c' = f*c + i*g, h' = o*tanh(c').
[[nodiscard]] inline LstmCellState lstm_cell_step(const VectorXd& x, const VectorXd& h_prev, const VectorXd& c_prev,
                                                  const LstmCellParams& p) {
    const Eigen::Index hdim = h_prev.size();
    if (p.w_x.rows() != x.size() || p.w_x.cols() != 4 * hdim || p.w_h.rows() != hdim || p.w_h.cols() != 4 * hdim ||
        p.b.size() != 4 * hdim || c_prev.size() != hdim)
        throw ShapeError("lstm_cell_step: inconsistent shapes");
    const VectorXd z = p.w_x.transpose() * x + p.w_h.transpose() * h_prev + p.b;
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    LstmCellState s{VectorXd(hdim), VectorXd(hdim)};
    for (Eigen::Index j = 0; j < hdim; ++j) {
        const double i = sig(z(j));
        const double f = sig(z(hdim + j));
        const double g = std::tanh(z(2 * hdim + j));
        const double o = sig(z(3 * hdim + j));
        s.c(j) = f * c_prev(j) + i * g;
        s.h(j) = o * std::tanh(s.c(j));
    }
    return s;
}

/// Stacked RNN or LSTM over windows of `n_features`-wide steps; a linear head
/// reads the top layer's final hidden state. Hidden and cell states start at 0.
class RecurrentNet {
public:
    RecurrentNet() = default;
    RecurrentNet(CellKind kind, std::size_t n_features, int n_layers, int layer_size)
        : kind_(kind), n_features_(n_features), n_layers_(n_layers), hidden_(layer_size) {
        if (n_layers < 1 || layer_size < 1) throw ConfigError("recurrent net: layers and size must be >= 1");
        if (n_features == 0) throw ConfigError("recurrent net: no input features");
    }

    [[nodiscard]] CellKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    [[nodiscard]] int n_layers() const noexcept { return n_layers_; }
    [[nodiscard]] int hidden() const noexcept { return hidden_; }
    [[nodiscard]] std::size_t gates() const noexcept { return kind_ == CellKind::Lstm ? 4 : 1; }

    [[nodiscard]] std::size_t layer_input(int l) const noexcept {
        return l == 0 ? n_features_ : static_cast<std::size_t>(hidden_);
    }

    [[nodiscard]] std::size_t layer_offset(int l) const noexcept {
        std::size_t off = 0;
        const auto gh = gates() * static_cast<std::size_t>(hidden_);
        for (int k = 0; k < l; ++k) off += (layer_input(k) + static_cast<std::size_t>(hidden_) + 1) * gh;
        return off;
    }

    [[nodiscard]] std::size_t head_offset() const noexcept { return layer_offset(n_layers_); }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return head_offset() + static_cast<std::size_t>(hidden_) + 1; }

    template <class Rng>
    void initialize(std::span<double> p, Rng& rng) const {
        const auto h = static_cast<std::size_t>(hidden_);
        const auto gh = gates() * h;
        for (int l = 0; l < n_layers_; ++l) {
            const std::size_t off = layer_offset(l);
            const std::size_t in = layer_input(l);
            init_uniform(p.subspan(off, in * gh), in, rng);
            init_uniform(p.subspan(off + in * gh, h * gh), h, rng);
            std::fill_n(p.begin() + static_cast<std::ptrdiff_t>(off + (in + h) * gh), gh, 0.0);
        }
        init_uniform(p.subspan(head_offset(), h), h, rng);
        p[head_offset() + h] = 0.0;
    }

    /// Weights of one LSTM layer in cell-step form.
    [[nodiscard]] LstmCellParams lstm_layer(std::span<const double> p, int l) const {
        if (kind_ != CellKind::Lstm) throw ConfigError("lstm_layer on a non-LSTM network");
        const auto h = static_cast<Eigen::Index>(hidden_);
        const auto in = static_cast<Eigen::Index>(layer_input(l));
        const std::size_t off = layer_offset(l);
        LstmCellParams c;
        c.w_x = detail::ConstMap(p.data() + off, in, 4 * h);
        c.w_h = detail::ConstMap(p.data() + off + static_cast<std::size_t>(in * 4 * h), h, 4 * h);
        c.b = detail::ConstVecMap(p.data() + off + static_cast<std::size_t>((in + h) * 4 * h), 4 * h);
        return c;
    }

    [[nodiscard]] VectorXd forward(std::span<const double> p, const RowMatrix& x) const {
        Trace tr = run(p, x, false);
        return tr.output;
    }

    double loss_and_gradient(std::span<const double> p, const RowMatrix& x, const VectorXd& y,
                             std::span<double> grad) const {
        Trace tr = run(p, x, !grad.empty());
        const VectorXd err = tr.output - y;
        const double batch = static_cast<double>(y.size());
        const double loss = err.squaredNorm() / batch;
        if (grad.empty()) return loss;
        std::fill(grad.begin(), grad.end(), 0.0);

        const auto h = static_cast<Eigen::Index>(hidden_);
        const auto gh = static_cast<Eigen::Index>(gates()) * h;
        const Eigen::Index steps = static_cast<Eigen::Index>(tr.layers[0].h.size()) - 1;
        const Eigen::Index n = x.rows();

        const VectorXd dout = (2.0 / batch) * err;
        const std::size_t ho = head_offset();
        detail::VecMap(grad.data() + ho, h) = tr.layers.back().h.back().transpose() * dout;
        grad[ho + static_cast<std::size_t>(h)] = dout.sum();
        detail::ConstVecMap w_out(p.data() + ho, h);

        std::vector<MatrixXd> dh_ext(static_cast<std::size_t>(steps), MatrixXd::Zero(n, h));
        dh_ext.back() = dout * w_out.transpose();

        for (int l = n_layers_; l-- > 0;) {
            const auto& L = tr.layers[static_cast<std::size_t>(l)];
            const auto in = static_cast<Eigen::Index>(layer_input(l));
            const std::size_t off = layer_offset(l);
            detail::ConstMap wx(p.data() + off, in, gh);
            detail::ConstMap wh(p.data() + off + static_cast<std::size_t>(in * gh), h, gh);
            detail::Map gwx(grad.data() + off, in, gh);
            detail::Map gwh(grad.data() + off + static_cast<std::size_t>(in * gh), h, gh);
            detail::VecMap gb(grad.data() + off + static_cast<std::size_t>((in + h) * gh), gh);

            std::vector<MatrixXd> d_in;
            if (l > 0) d_in.resize(static_cast<std::size_t>(steps));
            MatrixXd dh_next = MatrixXd::Zero(n, h);
            MatrixXd dc_next = MatrixXd::Zero(n, h);
            MatrixXd dz(n, gh);
            for (Eigen::Index t = steps; t-- > 0;) {
                const auto ts = static_cast<std::size_t>(t);
                const MatrixXd dh = dh_ext[ts] + dh_next;
                if (kind_ == CellKind::Rnn) {
                    dz = (dh.array() * (1.0 - L.h[ts + 1].array().square())).matrix();
                } else {
                    const auto& G = L.gates[ts];
                    const auto ig = G.leftCols(h).array();
                    const auto fg = G.middleCols(h, h).array();
                    const auto gg = G.middleCols(2 * h, h).array();
                    const auto og = G.rightCols(h).array();
                    const Eigen::ArrayXXd tc = L.c[ts + 1].array().tanh();
                    const Eigen::ArrayXXd dc = dh.array() * og * (1.0 - tc.square()) + dc_next.array();
                    dz.leftCols(h) = (dc * gg * ig * (1.0 - ig)).matrix();
                    dz.middleCols(h, h) = (dc * L.c[ts].array() * fg * (1.0 - fg)).matrix();
                    dz.middleCols(2 * h, h) = (dc * ig * (1.0 - gg.square())).matrix();
                    dz.rightCols(h) = (dh.array() * tc * og * (1.0 - og)).matrix();
                    dc_next = (dc * fg).matrix();
                }
                gwx.noalias() += L.inputs[ts].transpose() * dz;
                gwh.noalias() += L.h[ts].transpose() * dz;
                gb += dz.colwise().sum().transpose();
                if (l > 0) d_in[ts].noalias() = dz * wx.transpose();
                dh_next.noalias() = dz * wh.transpose();
            }
            if (l > 0) dh_ext = std::move(d_in);
        }
        return loss;
    }

    friend bool operator==(const RecurrentNet&, const RecurrentNet&) = default;

private:
    struct LayerTrace {
        std::vector<MatrixXd> inputs;  // per step, n x layer_input
        std::vector<MatrixXd> h;       // steps + 1, h[0] = 0
        std::vector<MatrixXd> c;       // LSTM only
        std::vector<MatrixXd> gates;   // LSTM only: activated i, f, g, o
    };
    struct Trace {
        std::vector<LayerTrace> layers;
        VectorXd output;
    };

    Trace run(std::span<const double> p, const RowMatrix& x, bool keep) const {
        if (x.cols() % static_cast<Eigen::Index>(n_features_) != 0 || x.cols() == 0)
            throw ShapeError("recurrent net: input width is not a multiple of the feature count");
        const auto f = static_cast<Eigen::Index>(n_features_);
        const Eigen::Index steps = x.cols() / f;
        const Eigen::Index n = x.rows();
        const auto h = static_cast<Eigen::Index>(hidden_);
        const auto gh = static_cast<Eigen::Index>(gates()) * h;

        Trace tr;
        tr.layers.resize(static_cast<std::size_t>(n_layers_));
        std::vector<MatrixXd> seq(static_cast<std::size_t>(steps));
        for (Eigen::Index t = 0; t < steps; ++t) seq[static_cast<std::size_t>(t)] = x.middleCols(t * f, f);

        for (int l = 0; l < n_layers_; ++l) {
            auto& L = tr.layers[static_cast<std::size_t>(l)];
            const auto in = static_cast<Eigen::Index>(layer_input(l));
            const std::size_t off = layer_offset(l);
            detail::ConstMap wx(p.data() + off, in, gh);
            detail::ConstMap wh(p.data() + off + static_cast<std::size_t>(in * gh), h, gh);
            detail::ConstVecMap b(p.data() + off + static_cast<std::size_t>((in + h) * gh), gh);

            L.h.assign(static_cast<std::size_t>(steps) + 1, MatrixXd());
            L.h[0] = MatrixXd::Zero(n, h);
            if (kind_ == CellKind::Lstm) {
                L.c.assign(static_cast<std::size_t>(steps) + 1, MatrixXd());
                L.c[0] = MatrixXd::Zero(n, h);
                L.gates.resize(static_cast<std::size_t>(steps));
            }
            MatrixXd z(n, gh);
            for (Eigen::Index t = 0; t < steps; ++t) {
                const auto ts = static_cast<std::size_t>(t);
                z.noalias() = seq[ts] * wx;
                z.noalias() += L.h[ts] * wh;
                z.rowwise() += b.transpose();
                if (kind_ == CellKind::Rnn) {
                    L.h[ts + 1] = z.array().tanh().matrix();
                } else {
                    MatrixXd& G = L.gates[ts];
                    G.resize(n, gh);
                    G.leftCols(h) = detail::sigmoid(z.leftCols(h).array()).matrix();
                    G.middleCols(h, h) = detail::sigmoid(z.middleCols(h, h).array()).matrix();
                    G.middleCols(2 * h, h) = z.middleCols(2 * h, h).array().tanh().matrix();
                    G.rightCols(h) = detail::sigmoid(z.rightCols(h).array()).matrix();
                    L.c[ts + 1] = (G.middleCols(h, h).array() * L.c[ts].array() +
                                   G.leftCols(h).array() * G.middleCols(2 * h, h).array())
                                      .matrix();
                    L.h[ts + 1] = (G.rightCols(h).array() * L.c[ts + 1].array().tanh()).matrix();
                }
            }
            if (keep) L.inputs = std::move(seq);
            seq.assign(L.h.begin() + 1, L.h.end());
            if (!keep && l + 1 < n_layers_) {
                // Only the top layer's last state is needed without a backward pass.
                L.h.clear();
                L.c.clear();
                L.gates.clear();
            }
        }
        const std::size_t ho = head_offset();
        detail::ConstVecMap w_out(p.data() + ho, h);
        tr.output = seq.back() * w_out;
        tr.output.array() += p[ho + static_cast<std::size_t>(h)];
        return tr;
    }

    CellKind kind_ = CellKind::Lstm;
    std::size_t n_features_ = 0;
    int n_layers_ = 1;
    int hidden_ = 1;
};

// ---------------------------------------------------------------------------
// Training loop shared by the networks

struct TrainingSummary {
    int epochs_run = 0;
    /// Epochs whose weights were kept: the best validation epoch in patience
    /// mode, the fixed count otherwise.
    int epochs_used = 0;
    double final_train_loss = std::numeric_limits<double>::quiet_NaN();
    double best_validation_loss = std::numeric_limits<double>::quiet_NaN();

    friend bool operator==(const TrainingSummary& a, const TrainingSummary& b) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return a.epochs_run == b.epochs_run && a.epochs_used == b.epochs_used &&
               same(a.final_train_loss, b.final_train_loss) && same(a.best_validation_loss, b.best_validation_loss);
    }
};

/// Minibatch Adam on MSE. Patience mode holds out a validation fraction, stops
/// after `patience` epochs without an improvement larger than `min_delta`, and
/// restores the best weights. A non-finite loss raises DivergenceError.
template <class Net>
[[nodiscard]] std::vector<double> train_network(const Net& net, const TrainingData& data, const TrainOptions& opts,
                                                TrainingSummary& summary) {
    if (opts.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    const bool fixed = opts.stopping == StoppingMode::FixedEpochs;
    if (fixed && opts.fixed_epochs < 1) throw ConfigError("fixed_epochs must be >= 1");
    if (!fixed && opts.patience < 1) throw ConfigError("patience must be >= 1");
    if (!fixed && !(opts.validation_fraction > 0.0 && opts.validation_fraction < 1.0))
        throw ConfigError("validation_fraction must lie in (0, 1)");

    std::vector<double> params(net.parameter_count());
    {
        auto init_rng = make_rng(opts.seed, 0);
        net.initialize(std::span<double>(params), init_rng);
    }
    auto shuffle_rng = make_rng(opts.seed, 1);

    const std::size_t n = data.rows();
    std::vector<std::size_t> train_idx(n);
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
    TrainingData val;
    bool has_val = false;
    if (!fixed && n >= 2) {
        auto split_rng = make_rng(opts.seed, 2);
        std::shuffle(train_idx.begin(), train_idx.end(), split_rng);
        auto n_val = static_cast<std::size_t>(std::floor(opts.validation_fraction * static_cast<double>(n)));
        n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
        std::vector<std::size_t> val_idx(train_idx.end() - static_cast<std::ptrdiff_t>(n_val), train_idx.end());
        train_idx.resize(n - n_val);
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
        val = data.subset(val_idx);
        has_val = true;
    }

    AdamState adam(params.size());
    std::vector<double> grad(params.size());
    std::vector<double> best = params;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int since_best = 0;
    const int limit = fixed ? opts.fixed_epochs : opts.max_epochs.value_or(std::numeric_limits<int>::max());
    const auto bs = static_cast<std::size_t>(opts.batch_size);

    RowMatrix bx;
    VectorXd by;
    int epoch = 0;
    while (epoch < limit) {
        ++epoch;
        std::shuffle(train_idx.begin(), train_idx.end(), shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += bs) {
            const std::size_t len = std::min(bs, train_idx.size() - start);
            bx.resize(static_cast<Eigen::Index>(len), data.x.cols());
            by.resize(static_cast<Eigen::Index>(len));
            for (std::size_t i = 0; i < len; ++i) {
                bx.row(static_cast<Eigen::Index>(i)) = data.x.row(static_cast<Eigen::Index>(train_idx[start + i]));
                by(static_cast<Eigen::Index>(i)) = data.y(static_cast<Eigen::Index>(train_idx[start + i]));
            }
            const double loss = net.loss_and_gradient(params, bx, by, grad);
            if (!std::isfinite(loss)) throw DivergenceError(epoch);
            epoch_loss += loss * static_cast<double>(len);
            adam_step(params, grad, adam, opts.adam);
        }
        summary.final_train_loss = epoch_loss / static_cast<double>(train_idx.size());
        if (fixed) continue;

        const double monitored =
            has_val ? net.loss_and_gradient(params, val.x, val.y, {}) : summary.final_train_loss;
        if (!std::isfinite(monitored)) throw DivergenceError(epoch);
        if (monitored < best_loss - opts.min_delta) {
            best_loss = monitored;
            best = params;
            best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= opts.patience) {
            break;
        }
    }
    summary.epochs_run = epoch;
    if (fixed) {
        summary.epochs_used = epoch;
        return params;
    }
    summary.epochs_used = best_epoch;
    summary.best_validation_loss = best_loss;
    return best;
}

/// Central-difference gradient of `loss(params)`; used by gradient checks.
template <class Fn>
[[nodiscard]] std::vector<double> numerical_gradient(Fn&& loss, std::vector<double> params, double step = 1e-5) {
    std::vector<double> g(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = params[i];
        params[i] = keep + step;
        const double up = loss(params);
        params[i] = keep - step;
        const double down = loss(params);
        params[i] = keep;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

}  // namespace citecast
