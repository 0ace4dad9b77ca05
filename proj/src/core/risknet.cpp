#include "icnet/risknet.hpp"

#include "icnet/errors.hpp"
#include "numeric.hpp"

#include <cmath>
#include <random>

namespace icnet {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU:
      return "relu";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  throw ConfigError("unknown activation '" + name + "'");
}

ResidualRiskNet::ResidualRiskNet(Eigen::VectorXd theta_, std::vector<DenseLayer> layers_, Activation act)
    : theta(std::move(theta_)), layers(std::move(layers_)), activation(act) {
  check_shapes();
}

void ResidualRiskNet::check_shapes() const {
  if (layers.size() < 2) throw DomainError("risk network needs at least one hidden layer and an output layer");
  Eigen::Index in = theta.size();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& L = layers[l];
    if (L.weight.cols() != in || L.bias.size() != L.weight.rows() || L.weight.rows() < 1) {
      throw DomainError("risk network layer " + std::to_string(l) + " has inconsistent dimensions");
    }
    in = L.weight.rows();
  }
  if (in != 1) throw DomainError("risk network output layer must have width 1");
}

ResidualRiskNet ResidualRiskNet::initialize(int d, const NetConfig& cfg) {
  if (d < 1) throw ConfigError("covariate dimension must be at least 1");
  if (cfg.hidden_widths.empty()) throw ConfigError("at least one hidden layer is required");
  if (!(cfg.init_scale > 0.0)) throw ConfigError("init_scale must be positive");
  std::mt19937_64 rng(cfg.init_seed);

  std::vector<DenseLayer> layers;
  int in = d;
  auto make_layer = [&](int out) {
    const double s = cfg.init_scale / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> unif(-s, s);
    DenseLayer L{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
    for (Eigen::Index r = 0; r < L.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < L.weight.cols(); ++c) L.weight(r, c) = unif(rng);
    for (Eigen::Index r = 0; r < L.bias.size(); ++r) L.bias(r) = unif(rng);
    layers.push_back(std::move(L));
    in = out;
  };
  for (int w : cfg.hidden_widths) {
    if (w < 1) throw ConfigError("hidden widths must be positive");
    make_layer(w);
  }
  make_layer(1);
  return ResidualRiskNet(Eigen::VectorXd::Zero(d), std::move(layers), cfg.activation);
}

std::size_t ResidualRiskNet::hidden_parameter_count() const {
  std::size_t n = 0;
  for (const auto& L : layers) n += static_cast<std::size_t>(L.weight.size() + L.bias.size());
  return n;
}

Eigen::VectorXd ResidualRiskNet::hidden_output(const Dataset::Matrix& z) const {
  if (z.cols() != theta.size()) throw DomainError("covariate matrix has the wrong number of columns");
  Eigen::MatrixXd h = z * layers.front().weight.transpose();
  h.rowwise() += layers.front().bias.transpose();
  h = h.cwiseMax(0.0);
  for (std::size_t l = 1; l < layers.size(); ++l) {
    Eigen::MatrixXd next = h * layers[l].weight.transpose();
    next.rowwise() += layers[l].bias.transpose();
    h = l + 1 < layers.size() ? Eigen::MatrixXd(next.cwiseMax(0.0)) : next;
  }
  return h.col(0);
}

Eigen::VectorXd ResidualRiskNet::forward(const Dataset::Matrix& z) const {
  Eigen::VectorXd r = hidden_output(z);
  r.noalias() += z * theta;
  return r;
}

namespace {

Eigen::VectorXd last_hidden_one(const ResidualRiskNet& net, const Eigen::VectorXd& z) {
  Eigen::VectorXd h = z;
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    h = (net.layers[l].weight * h + net.layers[l].bias).cwiseMax(0.0);
  }
  return h;
}

double output_linear_part(const ResidualRiskNet& net, const Eigen::VectorXd& h) {
  return (net.layers.back().weight * h)(0);
}

}  // namespace

double ResidualRiskNet::hidden_output_one(std::span<const double> z) const {
  if (static_cast<Eigen::Index>(z.size()) != theta.size()) throw DomainError("covariate vector has the wrong length");
  const Eigen::VectorXd zz = Eigen::Map<const Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
  const Eigen::VectorXd h = last_hidden_one(*this, zz);
  return output_linear_part(*this, h) + layers.back().bias(0);
}

double ResidualRiskNet::forward_one(std::span<const double> z) const {
  const double g = hidden_output_one(z);
  double lin = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) lin += theta(static_cast<Eigen::Index>(j)) * z[j];
  return lin + g;
}

double ResidualRiskNet::center_at_origin() {
  const Eigen::VectorXd h0 = last_hidden_one(*this, Eigen::VectorXd::Zero(theta.size()));
  const double lin = output_linear_part(*this, h0);
  const double offset = lin + layers.back().bias(0);
  layers.back().bias(0) = -lin;
  return offset;
}

LossAndGrad loss_and_grad(const ResidualRiskNet& net, const Dataset& data, std::span<const double> lu,
                          std::span<const double> lv, double scale) {
  const auto n = data.size();
  if (lu.size() != n || lv.size() != n) throw DomainError("loss_and_grad: LU/LV lengths must equal the sample count");
  const auto& z = data.covariates();
  if (z.cols() != net.theta.size()) throw DomainError("loss_and_grad: dataset dimension does not match the network");

  // Forward pass, keeping pre-activations for the backward pass.
  const std::size_t L = net.layers.size();
  std::vector<Eigen::MatrixXd> acts;  // acts[l] = input to layer l (n x in)
  std::vector<Eigen::MatrixXd> pre;   // pre-activations of hidden layers
  acts.reserve(L);
  pre.reserve(L);
  Eigen::MatrixXd h = z;
  for (std::size_t l = 0; l < L; ++l) {
    acts.push_back(h);
    Eigen::MatrixXd p = h * net.layers[l].weight.transpose();
    p.rowwise() += net.layers[l].bias.transpose();
    if (l + 1 < L) {
      h = p.cwiseMax(0.0);
      pre.push_back(std::move(p));
    } else {
      h = std::move(p);
    }
  }
  Eigen::VectorXd risk = h.col(0);
  risk.noalias() += z * net.theta;

  LossAndGrad out;
  Eigen::VectorXd d_risk(static_cast<Eigen::Index>(n));
  detail::CompensatedSum sum;
  const auto& kind = data.kind();
  for (std::size_t i = 0; i < n; ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    if (!std::isfinite(risk(idx))) {
      throw NumericalError("non-finite risk score at sample " + std::to_string(i));
    }
    if (kind[i] == Censoring::Interval && lu[i] > lv[i]) {
      throw DomainError("loss_and_grad: LU > LV for interval-censored sample " + std::to_string(i));
    }
    const auto term = sample_term(kind[i], lu[i], lv[i], risk(idx));
    if (term.floored) ++out.floored;
    sum.add(term.value);
    d_risk(idx) = -scale * term.d_risk;
  }
  out.loss = -scale * sum.value();

  // Backward pass.
  out.grad.theta = z.transpose() * d_risk;
  out.grad.layers.resize(L);
  Eigen::MatrixXd delta = d_risk;  // n x 1, gradient w.r.t. layer output
  for (std::size_t k = L; k-- > 0;) {
    auto& g = out.grad.layers[k];
    g.weight = delta.transpose() * acts[k];
    g.bias = delta.colwise().sum().transpose();
    if (k == 0) break;
    Eigen::MatrixXd back = delta * net.layers[k].weight;
    delta = back.cwiseProduct((pre[k - 1].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

ResidualRiskNet gradient_step(const ResidualRiskNet& net, const NetGradients& grads, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("learning rate must be positive");
  if (grads.layers.size() != net.layers.size() || grads.theta.size() != net.theta.size()) {
    throw DomainError("gradient structure does not match the network");
  }
  ResidualRiskNet out = net;
  out.theta -= alpha * grads.theta;
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    out.layers[l].weight -= alpha * grads.layers[l].weight;
    out.layers[l].bias -= alpha * grads.layers[l].bias;
  }
  return out;
}

}  // namespace icnet
