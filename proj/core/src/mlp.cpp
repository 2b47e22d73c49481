#include "qhex/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "qhex/error.hpp"
#include "qhex/io_util.hpp"
#include "qhex/rng.hpp"

namespace qhex {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

const char* kOptimizers[] = {"sgdm", "adam", "rmsprop"};

bool known_optimizer(const std::string& name) {
    for (const char* o : kOptimizers)
        if (name == o) return true;
    return false;
}

} // namespace

void MLPParams::validate() const {
    if (dims.size() < 2) throw ValidationError("need at least 2 layer dims");
    for (const int d : dims)
        if (d <= 0) throw ValidationError("non-positive layer dim");
    if (W.size() != dims.size() - 1 || b.size() != W.size())
        throw ValidationError("layer count mismatch");
    for (std::size_t l = 0; l < W.size(); ++l) {
        if (W[l].rows() != dims[l + 1] || W[l].cols() != dims[l] || b[l].size() != dims[l + 1])
            throw ValidationError("inconsistent layer shapes");
        if (!all_finite(W[l]) || !b[l].allFinite())
            throw ValidationError("non-finite parameters");
    }
}

MLPParams mlp_init(const std::vector<int>& dims, std::uint64_t seed) {
    if (dims.size() < 2) throw ValidationError("need at least 2 layer dims");
    for (const int d : dims)
        if (d <= 0) throw ValidationError("non-positive layer dim");
    MLPParams p;
    p.dims = dims;
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const int fan_in = dims[l], fan_out = dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Eigen::MatrixXd W(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) W(r, c) = (2.0 * rng.next_double() - 1.0) * limit;
        p.W.push_back(std::move(W));
        p.b.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return p;
}

Eigen::RowVectorXd mlp_forward(const MLPParams& p, const Eigen::MatrixXd& X, ForwardCache* cache) {
    if (X.rows() != p.dims.front()) throw ValidationError("input dim mismatch");
    const int L = p.layers();
    if (cache) {
        cache->A.assign(1, X);
        cache->Z.clear();
    }
    Eigen::MatrixXd a = X;
    for (int l = 0; l < L; ++l) {
        Eigen::MatrixXd z = (p.W[l] * a).colwise() + p.b[l];
        if (l + 1 < L)
            a = z.cwiseMax(0.0);
        else
            a = z;
        if (cache) {
            cache->Z.push_back(std::move(z));
            cache->A.push_back(a);
        }
    }
    return a.row(0);
}

double mlp_forward_one(const MLPParams& p, const Eigen::VectorXd& x) {
    return mlp_forward(p, x, nullptr)(0);
}

double mse_loss(const Eigen::RowVectorXd& preds, const Eigen::RowVectorXd& targets) {
    if (preds.size() != targets.size()) throw ValidationError("loss length mismatch");
    if (preds.size() == 0) throw ValidationError("empty loss batch");
    return (preds - targets).squaredNorm() / static_cast<double>(preds.size());
}

MLPGrads mlp_backward(const MLPParams& p, const ForwardCache& cache,
                      const Eigen::RowVectorXd& dpred) {
    const int L = p.layers();
    if (static_cast<int>(cache.Z.size()) != L || static_cast<int>(cache.A.size()) != L + 1)
        throw ValidationError("stale forward cache");
    MLPGrads g;
    g.W.resize(L);
    g.b.resize(L);
    Eigen::MatrixXd delta = dpred; // output activation is identity
    for (int l = L - 1; l >= 0; --l) {
        g.W[l] = delta * cache.A[l].transpose();
        g.b[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = p.W[l].transpose() * delta;
            delta = delta.cwiseProduct((cache.Z[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return g;
}

double mse_loss_and_grads(const MLPParams& p, const Eigen::MatrixXd& X,
                          const Eigen::RowVectorXd& y, MLPGrads& grads) {
    ForwardCache cache;
    const Eigen::RowVectorXd preds = mlp_forward(p, X, &cache);
    const double loss = mse_loss(preds, y);
    const Eigen::RowVectorXd dpred = (2.0 / static_cast<double>(y.size())) * (preds - y);
    grads = mlp_backward(p, cache, dpred);
    return loss;
}

OptState OptState::zeros(const MLPParams& p) {
    OptState st;
    for (int l = 0; l < p.layers(); ++l) {
        st.mW.push_back(Eigen::MatrixXd::Zero(p.W[l].rows(), p.W[l].cols()));
        st.vW.push_back(Eigen::MatrixXd::Zero(p.W[l].rows(), p.W[l].cols()));
        st.mB.push_back(Eigen::VectorXd::Zero(p.b[l].size()));
        st.vB.push_back(Eigen::VectorXd::Zero(p.b[l].size()));
    }
    return st;
}

bool OptState::is_zero() const {
    if (step != 0) return false;
    for (const auto& m : mW)
        if ((m.array() != 0.0).any()) return false;
    for (const auto& m : vW)
        if ((m.array() != 0.0).any()) return false;
    for (const auto& v : mB)
        if ((v.array() != 0.0).any()) return false;
    for (const auto& v : vB)
        if ((v.array() != 0.0).any()) return false;
    return true;
}

void sgdm_step(MLPParams& p, const MLPGrads& g, OptState& st, double lr, double mu) {
    for (int l = 0; l < p.layers(); ++l) {
        st.mW[l] = mu * st.mW[l] + g.W[l];
        st.mB[l] = mu * st.mB[l] + g.b[l];
        p.W[l] -= lr * st.mW[l];
        p.b[l] -= lr * st.mB[l];
    }
    ++st.step;
}

void adam_step(MLPParams& p, const MLPGrads& g, OptState& st, double lr, double beta1,
               double beta2, double eps) {
    ++st.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.step));
    for (int l = 0; l < p.layers(); ++l) {
        st.mW[l] = beta1 * st.mW[l] + (1.0 - beta1) * g.W[l];
        st.vW[l] = beta2 * st.vW[l] + (1.0 - beta2) * g.W[l].cwiseProduct(g.W[l]);
        st.mB[l] = beta1 * st.mB[l] + (1.0 - beta1) * g.b[l];
        st.vB[l] = beta2 * st.vB[l] + (1.0 - beta2) * g.b[l].cwiseProduct(g.b[l]);
        p.W[l] -= lr * ((st.mW[l] / bc1).array() / ((st.vW[l] / bc2).array().sqrt() + eps)).matrix();
        p.b[l] -= lr * ((st.mB[l] / bc1).array() / ((st.vB[l] / bc2).array().sqrt() + eps)).matrix();
    }
}

void rmsprop_step(MLPParams& p, const MLPGrads& g, OptState& st, double lr, double rho,
                  double eps) {
    for (int l = 0; l < p.layers(); ++l) {
        st.vW[l] = rho * st.vW[l] + (1.0 - rho) * g.W[l].cwiseProduct(g.W[l]);
        st.vB[l] = rho * st.vB[l] + (1.0 - rho) * g.b[l].cwiseProduct(g.b[l]);
        p.W[l] -= lr * (g.W[l].array() / (st.vW[l].array().sqrt() + eps)).matrix();
        p.b[l] -= lr * (g.b[l].array() / (st.vB[l].array().sqrt() + eps)).matrix();
    }
    ++st.step;
}

void TrainConfig::validate() const {
    if (phases.empty()) throw ValidationError("need at least one training phase");
    for (const auto& ph : phases) {
        if (!known_optimizer(ph.optimizer))
            throw ValidationError("unknown optimizer: " + ph.optimizer);
        if (!(ph.lr > 0.0)) throw ValidationError("learning rate must be > 0");
        if (ph.epochs < 1) throw ValidationError("epochs must be >= 1");
        if (ph.batch_size < 1) throw ValidationError("batch size must be >= 1");
    }
    if (dims.size() < 2 || dims.front() != 81 || dims.back() != 1)
        throw ValidationError("layer dims must start at 81 and end at 1");
}

namespace {

Eigen::MatrixXd samples_to_matrix(const std::vector<Sample>& samples) {
    Eigen::MatrixXd X(81, static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (int r = 0; r < 81; ++r)
            X(r, static_cast<Eigen::Index>(i)) = samples[i].input[static_cast<std::size_t>(r)];
    return X;
}

Eigen::RowVectorXd samples_to_targets(const std::vector<Sample>& samples) {
    Eigen::RowVectorXd y(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        y(static_cast<Eigen::Index>(i)) = samples[i].target;
    return y;
}

void apply_step(const TrainPhase& ph, const TrainConfig& cfg, MLPParams& p, const MLPGrads& g,
                OptState& st) {
    if (ph.optimizer == "sgdm")
        sgdm_step(p, g, st, ph.lr, cfg.momentum);
    else if (ph.optimizer == "adam")
        adam_step(p, g, st, ph.lr, cfg.beta1, cfg.beta2, cfg.adam_eps);
    else
        rmsprop_step(p, g, st, ph.lr, cfg.rho, cfg.rms_eps);
}

} // namespace

std::pair<MLPParams, TrainLog> train(MLPParams p, const DataSplit& split, const TrainConfig& cfg,
                                     const std::function<void(int, const OptState&)>& on_phase_start) {
    cfg.validate();
    p.validate();
    if (p.dims != cfg.dims) throw ValidationError("model dims do not match config");
    if (split.train.empty()) throw ValidationError("empty train split");

    const Eigen::MatrixXd Xtr = samples_to_matrix(split.train);
    const Eigen::RowVectorXd ytr = samples_to_targets(split.train);
    Eigen::MatrixXd Xval;
    Eigen::RowVectorXd yval;
    if (!split.val.empty()) {
        Xval = samples_to_matrix(split.val);
        yval = samples_to_targets(split.val);
    }

    const std::size_t n = split.train.size();
    TrainLog log;
    double initial_loss = -1.0;

    for (std::size_t pi = 0; pi < cfg.phases.size(); ++pi) {
        const TrainPhase& ph = cfg.phases[pi];
        OptState st = OptState::zeros(p);
        if (on_phase_start) on_phase_start(static_cast<int>(pi), st);
        int iter = 0;
        for (int epoch = 1; epoch <= ph.epochs; ++epoch) {
            const std::uint64_t bseed =
                mix64(cfg.seed + 1000003ull * (pi + 1) + static_cast<std::uint64_t>(epoch));
            const auto batches =
                shuffle_batches(n, static_cast<std::size_t>(ph.batch_size), bseed);
            for (const auto& idx : batches) {
                Eigen::MatrixXd Xb(81, static_cast<Eigen::Index>(idx.size()));
                Eigen::RowVectorXd yb(static_cast<Eigen::Index>(idx.size()));
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    Xb.col(static_cast<Eigen::Index>(j)) = Xtr.col(static_cast<Eigen::Index>(idx[j]));
                    yb(static_cast<Eigen::Index>(j)) = ytr(static_cast<Eigen::Index>(idx[j]));
                }
                MLPGrads grads;
                const double loss = mse_loss_and_grads(p, Xb, yb, grads);
                ++iter;
                if (initial_loss < 0.0) initial_loss = loss;
                if (!std::isfinite(loss) || loss > 10.0 * std::max(initial_loss, 1e-6))
                    throw DivergedError("diverged: phase " + ph.optimizer + " iteration " +
                                        std::to_string(iter));
                apply_step(ph, cfg, p, grads, st);

                TrainRecord rec;
                rec.phase = ph.optimizer;
                rec.epoch = epoch;
                rec.iter = iter;
                rec.train_loss = loss;
                rec.train_rmse = std::sqrt(loss);
                if (split.val.empty()) {
                    rec.val_loss = std::numeric_limits<double>::quiet_NaN();
                    rec.val_rmse = std::numeric_limits<double>::quiet_NaN();
                } else {
                    const Eigen::RowVectorXd vp = mlp_forward(p, Xval, nullptr);
                    rec.val_loss = mse_loss(vp, yval);
                    rec.val_rmse = std::sqrt(rec.val_loss);
                }
                log.records.push_back(std::move(rec));
            }
        }
    }
    return {std::move(p), std::move(log)};
}

void save_model(const MLPParams& p, const std::filesystem::path& path) {
    p.validate();
    std::string buf;
    buf += "QHXM";
    buf.push_back('\x01');
    append_le(buf, static_cast<std::uint32_t>(p.dims.size()));
    for (const int d : p.dims) append_le(buf, static_cast<std::uint32_t>(d));
    for (int l = 0; l < p.layers(); ++l) {
        for (Eigen::Index r = 0; r < p.W[l].rows(); ++r)
            for (Eigen::Index c = 0; c < p.W[l].cols(); ++c) append_le(buf, p.W[l](r, c));
        for (Eigen::Index r = 0; r < p.b[l].size(); ++r) append_le(buf, p.b[l](r));
    }
    write_file_atomic(path, buf);
}

MLPParams load_model(const std::filesystem::path& path) {
    const std::string buf = read_binary_file(path);
    if (buf.size() < 9 || buf.compare(0, 4, "QHXM") != 0)
        throw IoError("not a QHXM file: " + path.string());
    if (buf[4] != '\x01') throw IoError("unsupported QHXM version");
    std::size_t off = 5;
    const auto ndims = read_le<std::uint32_t>(buf, off);
    if (ndims < 2 || ndims > 64) throw IoError("bad QHXM dim count");
    MLPParams p;
    std::size_t expect = 9 + 4ull * ndims;
    for (std::uint32_t i = 0; i < ndims; ++i) {
        const auto d = read_le<std::uint32_t>(buf, off);
        if (d == 0 || d > 1u << 20) throw IoError("bad QHXM layer dim");
        p.dims.push_back(static_cast<int>(d));
    }
    for (std::size_t l = 0; l + 1 < p.dims.size(); ++l)
        expect += 8ull * (static_cast<std::size_t>(p.dims[l]) * p.dims[l + 1] + p.dims[l + 1]);
    if (buf.size() != expect) throw IoError("QHXM size mismatch: " + path.string());
    for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
        Eigen::MatrixXd W(p.dims[l + 1], p.dims[l]);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = read_le<double>(buf, off);
        Eigen::VectorXd b(p.dims[l + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r) b(r) = read_le<double>(buf, off);
        p.W.push_back(std::move(W));
        p.b.push_back(std::move(b));
    }
    p.validate();
    return p;
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
    std::string out = "phase,epoch,iter,train_loss,train_rmse,val_loss,val_rmse\n";
    char num[64];
    for (const auto& r : log.records) {
        out += r.phase;
        out += ',';
        out += std::to_string(r.epoch);
        out += ',';
        out += std::to_string(r.iter);
        for (const double v : {r.train_loss, r.train_rmse, r.val_loss, r.val_rmse}) {
            std::snprintf(num, sizeof num, ",%.17g", v);
            out += num;
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

} // namespace qhex
