#include "gpd/denoiser.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gpd/binary_io.hpp"
#include "gpd/errors.hpp"
#include "gpd/random.hpp"
#include "gpd/scene_io.hpp"

namespace gpd {
namespace {

Eigen::MatrixXd activate(Activation act, const Eigen::MatrixXd& z) {
  if (act == Activation::kTanh) return z.array().tanh().matrix();
  return (z.array() / (1.0 + (-z.array()).exp())).matrix();
}

Eigen::MatrixXd activate_derivative(Activation act, const Eigen::MatrixXd& z) {
  if (act == Activation::kTanh) return (1.0 - z.array().tanh().square()).matrix();
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

Eigen::MatrixXd network_input(const DenoiserParams& params, const Eigen::MatrixXd& inputs,
                              const Eigen::VectorXd& times) {
  if (inputs.rows() != params.arch.input_dim) {
    throw std::invalid_argument("denoiser: expected input dimension " +
                                std::to_string(params.arch.input_dim) + ", got " +
                                std::to_string(inputs.rows()));
  }
  if (times.size() != inputs.cols()) {
    throw std::invalid_argument("denoiser: times/inputs batch size mismatch");
  }
  Eigen::MatrixXd x(params.arch.input_dim + params.arch.embed_dim, inputs.cols());
  x.topRows(params.arch.input_dim) = inputs;
  x.bottomRows(params.arch.embed_dim) = time_embedding(times, params.arch.embed_dim);
  return x;
}

}  // namespace

std::size_t DenoiserParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

void DenoiserParams::validate() const {
  const int layers = arch.hidden_layers;
  if (layers < 1 || arch.hidden_width < 1 || arch.embed_dim < 2 || arch.embed_dim % 2 != 0) {
    throw std::invalid_argument("denoiser: invalid architecture");
  }
  if (arch.input_dim != dim * (degree + 1)) {
    throw std::invalid_argument("denoiser: input_dim must equal m * (c + 1)");
  }
  if (static_cast<int>(weights.size()) != layers + 1 || biases.size() != weights.size()) {
    throw std::invalid_argument("denoiser: layer count does not match architecture");
  }
  for (int l = 0; l <= layers; ++l) {
    const int in = l == 0 ? arch.input_dim + arch.embed_dim : arch.hidden_width;
    const int out = l == layers ? arch.input_dim : arch.hidden_width;
    if (weights[l].rows() != out || weights[l].cols() != in || biases[l].size() != out) {
      throw std::invalid_argument("denoiser: layer " + std::to_string(l) + " has wrong shape");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw std::invalid_argument("denoiser: non-finite weights in layer " + std::to_string(l));
    }
  }
  if (stats.mean.size() != dim || stats.scale.size() != dim) {
    throw std::invalid_argument("denoiser: normalization stats have wrong size");
  }
}

bool DenoiserParams::operator==(const DenoiserParams& o) const {
  if (dim != o.dim || degree != o.degree || horizon != o.horizon || !(arch == o.arch) ||
      !(schedule == o.schedule) || !(stats == o.stats) || weights.size() != o.weights.size() ||
      biases.size() != o.biases.size()) {
    return false;
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!exactly_equal(weights[l], o.weights[l]) || !exactly_equal(biases[l], o.biases[l])) {
      return false;
    }
  }
  return true;
}

Gradients Gradients::zeros_like(const DenoiserParams& params) {
  Gradients g;
  for (const auto& w : params.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : params.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

DenoiserParams init_denoiser(int dim, int degree, int horizon, const Architecture& arch,
                             DiffusionSchedule schedule, NormalizationStats stats,
                             std::uint64_t seed) {
  DenoiserParams p;
  p.dim = dim;
  p.degree = degree;
  p.horizon = horizon;
  p.arch = arch;
  p.schedule = std::move(schedule);
  p.stats = std::move(stats);
  Rng rng(derive_seed(seed, {0x1417}));
  for (int l = 0; l <= arch.hidden_layers; ++l) {
    const int in = l == 0 ? arch.input_dim + arch.embed_dim : arch.hidden_width;
    const int out = l == arch.hidden_layers ? arch.input_dim : arch.hidden_width;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Eigen::MatrixXd w(out, in);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = u(rng);
    Eigen::VectorXd b(out);
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = u(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  p.validate();
  return p;
}

double network_time(int t, int steps) { return 1000.0 * (t + 1) / steps; }

Eigen::MatrixXd time_embedding(const Eigen::VectorXd& times, int embed_dim) {
  const int half = embed_dim / 2;
  Eigen::MatrixXd out(embed_dim, times.size());
  for (int k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(10000.0) * k / half);
    for (Eigen::Index n = 0; n < times.size(); ++n) {
      out(k, n) = std::sin(times(n) * freq);
      out(half + k, n) = std::cos(times(n) * freq);
    }
  }
  return out;
}

Eigen::MatrixXd denoiser_forward(const DenoiserParams& params, const Eigen::MatrixXd& inputs,
                                 const Eigen::VectorXd& times) {
  const Eigen::MatrixXd x = network_input(params, inputs, times);
  const int layers = params.arch.hidden_layers;
  Eigen::MatrixXd z = params.weights[0] * x;
  z.colwise() += params.biases[0];
  Eigen::MatrixXd h = activate(params.arch.activation, z);
  for (int l = 1; l < layers; ++l) {
    z.noalias() = params.weights[l] * h;
    z.colwise() += params.biases[l];
    h += activate(params.arch.activation, z);
  }
  Eigen::MatrixXd y = params.weights[layers] * h;
  y.colwise() += params.biases[layers];
  return y;
}

ControlPoints denoiser_predict(const DenoiserParams& params, const ControlPoints& alpha_t, int t) {
  if (alpha_t.rows() != params.dim || alpha_t.cols() != params.degree + 1) {
    throw std::invalid_argument("denoiser_predict: expected " + std::to_string(params.dim) + "x" +
                                std::to_string(params.degree + 1) + " coefficients");
  }
  if (t < 0 || t >= params.num_steps()) throw std::invalid_argument("denoiser_predict: t out of range");
  Eigen::VectorXd times(1);
  times(0) = network_time(t, params.num_steps());
  const Eigen::MatrixXd out = denoiser_forward(params, flatten(alpha_t), times);
  return unflatten(out.col(0), params.dim);
}

double denoiser_loss(const DenoiserParams& params, const Eigen::MatrixXd& inputs,
                     const Eigen::VectorXd& times, const Eigen::MatrixXd& targets,
                     Gradients* grad, const Eigen::MatrixXd* mask) {
  const int layers = params.arch.hidden_layers;
  const Activation act = params.arch.activation;
  const Eigen::MatrixXd x = network_input(params, inputs, times);
  if (targets.rows() != inputs.rows() || targets.cols() != inputs.cols()) {
    throw std::invalid_argument("denoiser_loss: target shape mismatch");
  }

  std::vector<Eigen::MatrixXd> pre(layers), hidden(layers);
  pre[0] = params.weights[0] * x;
  pre[0].colwise() += params.biases[0];
  hidden[0] = activate(act, pre[0]);
  for (int l = 1; l < layers; ++l) {
    pre[l] = params.weights[l] * hidden[l - 1];
    pre[l].colwise() += params.biases[l];
    hidden[l] = hidden[l - 1] + activate(act, pre[l]);
  }
  Eigen::MatrixXd y = params.weights[layers] * hidden[layers - 1];
  y.colwise() += params.biases[layers];

  Eigen::MatrixXd diff = y - targets;
  double count = static_cast<double>(diff.size());
  if (mask) {
    diff = diff.cwiseProduct(*mask);
    count = std::max(1.0, mask->sum());
  }
  const double loss = diff.squaredNorm() / count;
  if (!grad) return loss;

  if (grad->weights.size() != params.weights.size()) *grad = Gradients::zeros_like(params);
  Eigen::MatrixXd dy = (2.0 / count) * diff;
  grad->weights[layers].noalias() = dy * hidden[layers - 1].transpose();
  grad->biases[layers] = dy.rowwise().sum();
  Eigen::MatrixXd dh = params.weights[layers].transpose() * dy;
  for (int l = layers - 1; l >= 1; --l) {
    const Eigen::MatrixXd dz = dh.cwiseProduct(activate_derivative(act, pre[l]));
    grad->weights[l].noalias() = dz * hidden[l - 1].transpose();
    grad->biases[l] = dz.rowwise().sum();
    dh.noalias() += params.weights[l].transpose() * dz;
  }
  const Eigen::MatrixXd dz0 = dh.cwiseProduct(activate_derivative(act, pre[0]));
  grad->weights[0].noalias() = dz0 * x.transpose();
  grad->biases[0] = dz0.rowwise().sum();
  return loss;
}

Eigen::VectorXd flatten(const ControlPoints& alpha) {
  return Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());
}

ControlPoints unflatten(const Eigen::VectorXd& v, int dim) {
  if (dim <= 0 || v.size() % dim != 0) throw std::invalid_argument("unflatten: bad dimension");
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), dim, v.size() / dim);
}

void save_checkpoint(const DenoiserParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ostringstream buffer(std::ios::binary);
  detail::BinaryWriter w(buffer);
  w.magic("PDMW");
  w.u32(kCheckpointFormatVersion);
  w.u32(static_cast<std::uint32_t>(params.dim));
  w.u32(static_cast<std::uint32_t>(params.degree));
  w.u32(static_cast<std::uint32_t>(params.num_steps()));
  w.u32(static_cast<std::uint32_t>(params.horizon));
  w.u32(static_cast<std::uint32_t>(params.arch.embed_dim));
  w.u32(static_cast<std::uint32_t>(params.arch.activation));
  w.u32(static_cast<std::uint32_t>(params.weights.size()));
  for (const auto& m : params.weights) {
    w.u32(static_cast<std::uint32_t>(m.rows()));
    w.u32(static_cast<std::uint32_t>(m.cols()));
  }
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    w.matrix(params.weights[l]);
    w.matrix(params.biases[l]);
  }
  w.u32(static_cast<std::uint32_t>(params.schedule.kind));
  for (double b : params.schedule.beta) w.f64(b);
  w.matrix(params.stats.mean);
  w.matrix(params.stats.scale);
  write_text_atomic(path, buffer.str());
}

DenoiserParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string what = "checkpoint " + path.string();
  detail::BinaryReader r(in, what);
  r.expect_magic("PDMW");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointFormatVersion) {
    throw IoError(what + ": unsupported version " + std::to_string(version) + " (expected " +
                  std::to_string(kCheckpointFormatVersion) + ")");
  }
  DenoiserParams p;
  p.dim = static_cast<int>(r.u32());
  p.degree = static_cast<int>(r.u32());
  const std::uint32_t steps = r.u32();
  p.horizon = static_cast<int>(r.u32());
  p.arch.embed_dim = static_cast<int>(r.u32());
  const std::uint32_t activation = r.u32();
  if (activation > 1) throw IoError(what + ": unknown activation " + std::to_string(activation));
  p.arch.activation = static_cast<Activation>(activation);
  const std::uint32_t layer_count = r.u32();
  if (p.dim < 1 || p.dim > 64 || p.degree < 1 || p.degree > 64 || steps < 2 || steps > 100000 ||
      layer_count < 2 || layer_count > 1024) {
    throw IoError(what + ": implausible header");
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes(layer_count);
  for (auto& s : shapes) {
    s.first = r.u32();
    s.second = r.u32();
    if (s.first == 0 || s.second == 0 || s.first > 65536 || s.second > 65536) {
      throw IoError(what + ": implausible layer shape");
    }
  }
  for (const auto& [rows, cols] : shapes) {
    p.weights.push_back(r.matrix(rows, cols));
    p.biases.push_back(r.matrix(rows, 1));
  }
  p.arch.input_dim = static_cast<int>(shapes.back().first);
  p.arch.hidden_width = static_cast<int>(shapes.front().first);
  p.arch.hidden_layers = static_cast<int>(layer_count) - 1;
  const std::uint32_t kind = r.u32();
  if (kind > 1) throw IoError(what + ": unknown schedule kind");
  std::vector<double> beta(steps);
  for (auto& b : beta) b = r.f64();
  try {
    p.schedule = schedule_from_betas(static_cast<ScheduleKind>(kind), std::move(beta));
  } catch (const std::invalid_argument& e) {
    throw IoError(what + ": " + e.what());
  }
  p.stats.mean = r.matrix(p.dim, 1);
  p.stats.scale = r.matrix(p.dim, 1);
  r.expect_end();
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(what + ": " + e.what());
  }
  return p;
}

}  // namespace gpd
