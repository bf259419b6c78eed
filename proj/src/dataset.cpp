#include "gpd/dataset.hpp"

#include <fstream>
#include <sstream>

#include "gpd/binary_io.hpp"
#include "gpd/errors.hpp"
#include "gpd/random.hpp"
#include "gpd/scene_io.hpp"

namespace gpd {

ControlPoints NormalizationStats::normalize(const ControlPoints& alpha) const {
  return (alpha.colwise() - mean).array().colwise() / scale.array();
}

ControlPoints NormalizationStats::denormalize(const ControlPoints& alpha) const {
  return (alpha.array().colwise() * scale.array()).matrix().colwise() + mean;
}

Eigen::VectorXd NormalizationStats::normalize_point(const Eigen::VectorXd& q) const {
  return (q - mean).cwiseQuotient(scale);
}

bool ExpertDataset::operator==(const ExpertDataset& o) const {
  if (dim != o.dim || degree != o.degree || horizon != o.horizon || resolution != o.resolution ||
      problems != o.problems || !(stats == o.stats) || coefficients.size() != o.coefficients.size()) {
    return false;
  }
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (!exactly_equal(coefficients[i], o.coefficients[i])) return false;
  }
  return true;
}

NormalizationStats compute_stats(const std::vector<ControlPoints>& coefficients) {
  if (coefficients.empty()) throw std::invalid_argument("compute_stats: no coefficients");
  const auto m = coefficients.front().rows();
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = -lo;
  for (const auto& c : coefficients) {
    lo = lo.cwiseMin(c.rowwise().minCoeff());
    hi = hi.cwiseMax(c.rowwise().maxCoeff());
  }
  NormalizationStats stats;
  stats.mean = 0.5 * (lo + hi);
  stats.scale = (0.5 * (hi - lo)).cwiseMax(1e-6);
  return stats;
}

ExpertDataset generate_dataset(const DatasetGenConfig& cfg, std::uint64_t seed, DatasetYield* yield,
                               const std::function<void(std::size_t, std::size_t)>& progress) {
  if (cfg.difficulties.empty()) throw std::invalid_argument("generate_dataset: no difficulties");
  ExpertDataset dataset;
  dataset.dim = 2;
  dataset.degree = cfg.expert.degree;
  dataset.horizon = cfg.expert.horizon;
  dataset.resolution = cfg.expert.resolution;
  DatasetYield local;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const Difficulty difficulty = cfg.difficulties[i % cfg.difficulties.size()];
    const Scene scene = generate_scene(derive_seed(seed, {i, 0}), difficulty, cfg.scene);
    ++local.attempted;
    PlanningProblem problem;
    try {
      problem = generate_problem(scene, difficulty, derive_seed(seed, {i, 1}), cfg.problem);
    } catch (const std::runtime_error&) {
      ++local.failures["no-problem"];
      continue;
    }
    const ExpertResult expert = generate_expert(problem, cfg.expert, derive_seed(seed, {i, 2}));
    if (expert.status != ExpertStatus::kPlannerFailed) local.residuals.push_back(expert.residual);
    if (!expert.ok()) {
      ++local.failures[to_string(expert.status)];
    } else {
      ++local.accepted;
      dataset.problems.push_back(std::move(problem));
      dataset.coefficients.push_back(expert.coefficients);
    }
    if (progress) progress(i + 1, cfg.count);
  }
  if (!dataset.coefficients.empty()) dataset.stats = compute_stats(dataset.coefficients);
  if (yield) *yield = std::move(local);
  return dataset;
}

namespace {

enum ObstacleTag : std::uint32_t { kCircleTag = 0, kBoxTag = 1 };

void write_problem(detail::BinaryWriter& w, const PlanningProblem& p) {
  const Scene& s = p.scene;
  w.u64(s.id);
  w.u64(s.seed);
  w.f64(s.robot_radius);
  w.f64(s.workspace.min.x());
  w.f64(s.workspace.min.y());
  w.f64(s.workspace.max.x());
  w.f64(s.workspace.max.y());
  w.u32(static_cast<std::uint32_t>(s.obstacles.size()));
  for (const auto& o : s.obstacles) {
    if (const auto* c = std::get_if<Circle>(&o)) {
      w.u32(kCircleTag);
      w.f64(c->center.x());
      w.f64(c->center.y());
      w.f64(c->radius);
      w.f64(0.0);
    } else {
      const auto& b = std::get<Box>(o);
      w.u32(kBoxTag);
      w.f64(b.min.x());
      w.f64(b.min.y());
      w.f64(b.max.x());
      w.f64(b.max.y());
    }
  }
  w.matrix(p.start);
  w.matrix(p.goal);
  w.f64(p.goal_tolerance);
}

PlanningProblem read_problem(detail::BinaryReader& r, int dim) {
  PlanningProblem p;
  Scene& s = p.scene;
  s.id = r.u64();
  s.seed = r.u64();
  s.robot_radius = r.f64();
  s.workspace.min.x() = r.f64();
  s.workspace.min.y() = r.f64();
  s.workspace.max.x() = r.f64();
  s.workspace.max.y() = r.f64();
  const std::uint32_t n = r.u32();
  if (n > 1'000'000) throw IoError("dataset: implausible obstacle count");
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t tag = r.u32();
    const double a = r.f64(), b = r.f64(), c = r.f64(), d = r.f64();
    if (tag == kCircleTag) {
      s.obstacles.emplace_back(Circle{Point(a, b), c});
    } else if (tag == kBoxTag) {
      s.obstacles.emplace_back(Box{Point(a, b), Point(c, d)});
    } else {
      throw IoError("dataset: unknown obstacle tag " + std::to_string(tag));
    }
  }
  p.start = r.matrix(dim, 1);
  p.goal = r.matrix(dim, 1);
  p.goal_tolerance = r.f64();
  return p;
}

}  // namespace

void save_dataset(const ExpertDataset& dataset, const std::filesystem::path& path) {
  if (dataset.problems.size() != dataset.coefficients.size()) {
    throw std::invalid_argument("save_dataset: problems/coefficients size mismatch");
  }
  std::ostringstream buffer(std::ios::binary);
  detail::BinaryWriter w(buffer);
  w.magic("PDIF");
  w.u32(kDatasetFormatVersion);
  w.u32(static_cast<std::uint32_t>(dataset.dim));
  w.u32(static_cast<std::uint32_t>(dataset.degree));
  w.u32(static_cast<std::uint32_t>(dataset.horizon));
  w.u64(dataset.size());
  w.f64(dataset.resolution);
  const bool has_stats = dataset.stats.mean.size() == dataset.dim;
  w.matrix(has_stats ? dataset.stats.mean : Eigen::VectorXd::Zero(dataset.dim));
  w.matrix(has_stats ? dataset.stats.scale : Eigen::VectorXd::Ones(dataset.dim));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    write_problem(w, dataset.problems[i]);
    w.matrix(dataset.coefficients[i]);
  }
  write_text_atomic(path, buffer.str());
}

ExpertDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  detail::BinaryReader r(in, "dataset " + path.string());
  r.expect_magic("PDIF");
  const std::uint32_t version = r.u32();
  if (version != kDatasetFormatVersion) {
    throw IoError("dataset " + path.string() + ": unsupported version " + std::to_string(version) +
                  " (expected " + std::to_string(kDatasetFormatVersion) + ")");
  }
  ExpertDataset dataset;
  dataset.dim = static_cast<int>(r.u32());
  dataset.degree = static_cast<int>(r.u32());
  dataset.horizon = static_cast<int>(r.u32());
  const std::uint64_t count = r.u64();
  if (dataset.dim < 1 || dataset.dim > 64 || dataset.degree < 1 || dataset.horizon < 2) {
    throw IoError("dataset " + path.string() + ": implausible header");
  }
  dataset.resolution = r.f64();
  dataset.stats.mean = r.matrix(dataset.dim, 1);
  dataset.stats.scale = r.matrix(dataset.dim, 1);
  for (std::uint64_t i = 0; i < count; ++i) {
    dataset.problems.push_back(read_problem(r, dataset.dim));
    dataset.coefficients.push_back(r.matrix(dataset.dim, dataset.degree + 1));
  }
  r.expect_end();
  return dataset;
}

std::size_t dataset_float_payload_bytes(const ExpertDataset& dataset) {
  std::size_t floats = 1 + 2 * static_cast<std::size_t>(dataset.dim);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    floats += 5 + 4 * dataset.problems[i].scene.obstacles.size() + 2 * dataset.dim + 1;
    floats += static_cast<std::size_t>(dataset.coefficients[i].size());
  }
  return floats * sizeof(double);
}

}  // namespace gpd
