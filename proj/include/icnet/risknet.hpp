#pragma once

// Residual risk network r(z) = theta . z + g_W(z), where g_W is a ReLU
// feed-forward stack with scalar output, and its likelihood gradients.

#include "icnet/survival.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace icnet {

enum class Activation { ReLU };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct NetConfig {
  std::vector<int> hidden_widths{10};
  Activation activation = Activation::ReLU;
  std::uint64_t init_seed = 0;
  double init_scale = 1.0;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

class ResidualRiskNet {
 public:
  ResidualRiskNet() = default;
  ResidualRiskNet(Eigen::VectorXd theta, std::vector<DenseLayer> layers, Activation act = Activation::ReLU);

  // theta = 0, layer weights and biases uniform in +-init_scale/sqrt(fan_in).
  static ResidualRiskNet initialize(int d, const NetConfig& cfg);

  int input_dim() const { return static_cast<int>(theta.size()); }
  // Number of weights and biases in the hidden stack (theta excluded).
  std::size_t hidden_parameter_count() const;

  // First-layer weights; column j holds the outward weights of feature j.
  Eigen::MatrixXd& first_layer() { return layers.front().weight; }
  const Eigen::MatrixXd& first_layer() const { return layers.front().weight; }

  Eigen::VectorXd forward(const Dataset::Matrix& z) const;
  Eigen::VectorXd hidden_output(const Dataset::Matrix& z) const;  // g_W only
  double forward_one(std::span<const double> z) const;
  double hidden_output_one(std::span<const double> z) const;

  // Shifts the output bias so that g_W(0) == 0 exactly under forward_one;
  // returns the removed offset.
  double center_at_origin();

  Eigen::VectorXd theta;
  std::vector<DenseLayer> layers;
  Activation activation = Activation::ReLU;

 private:
  void check_shapes() const;
};

struct NetGradients {
  Eigen::VectorXd theta;
  std::vector<DenseLayer> layers;
};

struct LossAndGrad {
  double loss = 0.0;
  NetGradients grad;
  std::size_t floored = 0;
};

// loss = -scale * loglik(data, forward(net, Z), LU, LV) and its exact
// gradient by backpropagation.
LossAndGrad loss_and_grad(const ResidualRiskNet& net, const Dataset& data, std::span<const double> lu,
                          std::span<const double> lv, double scale = 1.0);

ResidualRiskNet gradient_step(const ResidualRiskNet& net, const NetGradients& grads, double alpha);

}  // namespace icnet
