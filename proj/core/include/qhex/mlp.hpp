#ifndef QHEX_MLP_HPP
#define QHEX_MLP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "qhex/dataset.hpp"

namespace qhex {

// Fully connected regressor, rectifier hidden layers, identity output.
// W[l] maps dims[l] -> dims[l+1]; stored and trained in doubles.
struct MLPParams {
    std::vector<int> dims;
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;

    int layers() const { return static_cast<int>(W.size()); }
    void validate() const;
};

// Activations kept for backprop. A[0] is the input batch (dims[0] x n);
// Z[l] the pre-activation, A[l+1] the post-activation of layer l.
struct ForwardCache {
    std::vector<Eigen::MatrixXd> A;
    std::vector<Eigen::MatrixXd> Z;
};

struct MLPGrads {
    std::vector<Eigen::MatrixXd> W;
    std::vector<Eigen::VectorXd> b;
};

// Glorot-uniform weights, zero biases, deterministic per seed.
MLPParams mlp_init(const std::vector<int>& dims, std::uint64_t seed);

// Batched forward pass; columns are samples. Returns 1 x n predictions.
Eigen::RowVectorXd mlp_forward(const MLPParams& p, const Eigen::MatrixXd& X, ForwardCache* cache);
double mlp_forward_one(const MLPParams& p, const Eigen::VectorXd& x);

// Mean over the batch of squared error; RMSE is its square root.
double mse_loss(const Eigen::RowVectorXd& preds, const Eigen::RowVectorXd& targets);

// Gradients of the batch loss given d_loss/d_prediction (1 x n).
MLPGrads mlp_backward(const MLPParams& p, const ForwardCache& cache,
                      const Eigen::RowVectorXd& dpred);

// Forward + MSE + backward in one call; returns the batch loss.
double mse_loss_and_grads(const MLPParams& p, const Eigen::MatrixXd& X,
                          const Eigen::RowVectorXd& y, MLPGrads& grads);

struct OptState {
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mB, vB;
    long step = 0;

    static OptState zeros(const MLPParams& p);
    bool is_zero() const;
};

void sgdm_step(MLPParams& p, const MLPGrads& g, OptState& st, double lr, double mu);
void adam_step(MLPParams& p, const MLPGrads& g, OptState& st, double lr, double beta1,
               double beta2, double eps);
void rmsprop_step(MLPParams& p, const MLPGrads& g, OptState& st, double lr, double rho,
                  double eps);

struct TrainPhase {
    std::string optimizer; // sgdm | adam | rmsprop
    double lr = 1e-3;
    int epochs = 10;
    int batch_size = 256;
};

struct TrainConfig {
    std::vector<TrainPhase> phases{{"sgdm", 1e-2, 10, 256},
                                   {"adam", 1e-3, 10, 256},
                                   {"rmsprop", 1e-4, 10, 256}};
    double momentum = 0.9;
    double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double rho = 0.9, rms_eps = 1e-8;
    std::vector<int> dims{81, 64, 32, 1};
    std::uint64_t seed = 1;

    void validate() const;
};

struct TrainRecord {
    std::string phase;
    int epoch = 0; // 1-based within the phase
    int iter = 0;  // 1-based, strictly increasing within the phase
    double train_loss = 0.0, train_rmse = 0.0;
    double val_loss = 0.0, val_rmse = 0.0;
};

struct TrainLog {
    std::vector<TrainRecord> records;
};

// Runs the phases in order with fresh optimizer state per phase; parameters
// carry across. Logs train/val loss and RMSE every iteration. Throws
// DivergedError if the train loss goes non-finite or exceeds 10x its initial
// value. on_phase_start (optional) observes the zeroed state per phase.
std::pair<MLPParams, TrainLog> train(
    MLPParams p, const DataSplit& split, const TrainConfig& cfg,
    const std::function<void(int, const OptState&)>& on_phase_start = {});

// Model file: magic QHXM, version byte, u32 layer-dim count, u32 dims, then
// per layer little-endian f64 weights row-major followed by biases.
void save_model(const MLPParams& p, const std::filesystem::path& path);
MLPParams load_model(const std::filesystem::path& path);

// CSV: phase,epoch,iter,train_loss,train_rmse,val_loss,val_rmse
void save_train_log(const TrainLog& log, const std::filesystem::path& path);

} // namespace qhex

#endif
