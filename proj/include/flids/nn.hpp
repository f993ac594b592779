#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flids/common.hpp"
#include "flids/features.hpp"

namespace flids {

enum class Activation : uint8_t { ReLU = 0, Identity = 1 };

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;  // out
    Activation act = Activation::ReLU;
};

// Minimal dense network with a fixed layer stack. All arithmetic is double;
// checkpoints are stored float32.
class DenseNet {
public:
    DenseNet() = default;
    explicit DenseNet(std::vector<DenseLayer> layers);

    // Symmetric autoencoder for the two supported input widths:
    // 27 -> 13 -> 6 -> 13 -> 27 and 69 -> 34 -> 17 -> 34 -> 69, ReLU after
    // every layer. Weights uniform(-a, a) with a = sqrt(6/(fan_in+fan_out)),
    // biases zero, from the given seed.
    static DenseNet autoencoder(int input_dim, uint64_t seed);

    // General constructor from a widths list (input, hidden..., output).
    static DenseNet from_widths(const std::vector<int>& widths, uint64_t seed);

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    int input_dim() const;
    int output_dim() const;
    Eigen::Index param_count() const;

    // Batch forward: rows are samples.
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;

    // Layer-major flatten order: W (row-major) then b, per layer.
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);

    // Throws NumericError naming the first layer holding a NaN/Inf.
    void check_finite(const std::string& context) const;

private:
    std::vector<DenseLayer> layers_;
};

// Mean squared error between two equal-length vectors (Eq.-style 1/n sum).
double mse(const Eigen::VectorXd& x, const Eigen::VectorXd& xprime);

// Batch loss: mean over rows of per-sample MSE plus lambda * sum of squared
// weight-matrix entries (biases excluded).
double batch_loss(const DenseNet& net, const Eigen::MatrixXd& batch, double lambda);

// Exact gradient of batch_loss with respect to flatten(); ReLU subgradient
// at 0 is 0.
Eigen::VectorXd backward(const DenseNet& net, const Eigen::MatrixXd& batch, double lambda);

enum class OptFamily : uint8_t { SGD = 0, SGDm = 1, Adam1 = 2, Adam2 = 3 };

std::string to_string(OptFamily f);
OptFamily opt_family_from_string(const std::string& s);

// Optimizer family plus learning rate; Adam1/Adam2 carry the two
// (beta1, beta2, epsilon) presets from the hyperparameter trials.
struct OptimizerSpec {
    OptFamily family = OptFamily::SGD;
    double eta = 1e-3;

    static OptimizerSpec sgd(double eta) { return {OptFamily::SGD, eta}; }
    static OptimizerSpec sgdm(double eta) { return {OptFamily::SGDm, eta}; }
    static OptimizerSpec adam1(double eta) { return {OptFamily::Adam1, eta}; }
    static OptimizerSpec adam2(double eta) { return {OptFamily::Adam2, eta}; }

    double momentum() const { return 0.9; }
    double beta1() const { return 0.9; }
    double beta2() const { return family == OptFamily::Adam2 ? 0.99 : 0.999; }
    double epsilon() const { return family == OptFamily::Adam2 ? 1e-3 : 1e-8; }
};

// Per-parameter optimizer state; step counter increments once per apply.
class Optimizer {
public:
    explicit Optimizer(OptimizerSpec spec) : spec_(spec) {}

    const OptimizerSpec& spec() const { return spec_; }
    long step_count() const { return step_; }
    void reset();

    // Applies one update and returns the new parameters.
    Eigen::VectorXd step(const Eigen::VectorXd& params, const Eigen::VectorXd& grad);

private:
    OptimizerSpec spec_;
    Eigen::VectorXd velocity_;  // SGDm
    Eigen::VectorXd m_, v_;     // Adam moments
    long step_ = 0;
};

struct TrainConfig {
    int batch_size = 32;
    double lambda = 1e-5;
};

// Trains in place for `epochs` full passes over `data`, shuffling rows each
// epoch with a seed derived from (shuffle_seed, epoch index). The epoch index
// starts at first_epoch so federated rounds keep distinct batch orders. The
// last partial batch is kept.
void train_epochs(DenseNet& net, const Eigen::MatrixXd& data, int epochs, Optimizer& opt,
                  const TrainConfig& cfg, uint64_t shuffle_seed, int first_epoch = 0);

// Checkpoint file: magic, version, scheme tag, layer shapes, precision tag,
// then the flat little-endian float32 parameter array.
void save_checkpoint(const std::filesystem::path& path, const DenseNet& net,
                     std::optional<Scheme> scheme);
struct Checkpoint {
    DenseNet net;
    std::optional<Scheme> scheme;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace flids
