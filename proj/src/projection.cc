/*
 * Copyright 2026 The RetainEX Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "retainex/projection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "retainex/error.h"
#include "retainex/rng.h"

namespace retainex {
namespace {

constexpr std::uint64_t kPcaStartSeed = 0x5eed5eedULL;
constexpr int kPcaMaxIterations = 10000;
constexpr int kPcaBlock = 4;
constexpr int kBisectionSteps = 200;
constexpr double kMinGain = 0.01;
constexpr double kAffinityFloor = 1e-12;
constexpr int kObjectiveInterval = 50;

// Flips `direction` so that its largest-magnitude entry (lowest index on
// ties) is positive.
void FixSign(Eigen::Ref<Eigen::VectorXd> direction) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < direction.size(); ++i) {
    if (std::abs(direction[i]) > std::abs(direction[best])) best = i;
  }
  if (direction[best] < 0.0) direction = -direction;
}

Eigen::MatrixXd Orthonormalize(const Eigen::MatrixXd& block) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
  return qr.householderQ() * Eigen::MatrixXd::Identity(block.rows(), block.cols());
}

Eigen::MatrixXd SquaredDistances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
    }
  }
  return d;
}

}  // namespace

std::string_view ProjectionMethodName(ProjectionMethod method) {
  return method == ProjectionMethod::kPca ? "pca" : "tsne";
}

ProjectionMethod ParseProjectionMethod(std::string_view name) {
  if (name == "pca") return ProjectionMethod::kPca;
  if (name == "tsne") return ProjectionMethod::kTsne;
  throw ArgumentError("unknown projection method '" + std::string(name) + "'");
}

nlohmann::json ProjectionConfig::ToJson() const {
  return {{"method", ProjectionMethodName(method)},
          {"perplexity", perplexity ? nlohmann::json(*perplexity) : nlohmann::json()},
          {"iterations", iterations},
          {"seed", seed}};
}

ProjectionConfig ProjectionConfig::FromJson(const nlohmann::json& object) {
  if (!object.is_object()) throw ParseError("projection config must be an object");
  for (const auto& [key, value] : object.items()) {
    if (key != "method" && key != "perplexity" && key != "iterations" && key != "seed") {
      throw ParseError("unknown projection config key '" + key + "'");
    }
  }
  ProjectionConfig config;
  try {
    if (object.contains("method")) {
      config.method = ParseProjectionMethod(object.at("method").get<std::string>());
    }
    if (object.contains("perplexity") && !object.at("perplexity").is_null()) {
      config.perplexity = object.at("perplexity").get<double>();
    }
    config.iterations = object.value("iterations", config.iterations);
    config.seed = object.value("seed", config.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("projection config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(e.what());
  }
  return config;
}

double ResolvePerplexity(const ProjectionConfig& config, int n) {
  if (config.perplexity) return *config.perplexity;
  return std::min(kDefaultPerplexity, 0.9 * (n - 1) / 3.0);
}

nlohmann::json Embedding2D::ToJson() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : points) out.push_back({p[0], p[1]});
  return {{"method", ProjectionMethodName(method)},
          {"config", config.ToJson()},
          {"points", std::move(out)}};
}

Embedding2D Pca2d(const Eigen::MatrixXd& vectors) {
  const Eigen::Index n = vectors.rows();
  const Eigen::Index dims = vectors.cols();
  if (n < 2) throw ArgumentError("PCA needs at least two points");
  if (dims < 1) throw ArgumentError("PCA needs at least one dimension");
  const Eigen::MatrixXd x = vectors.rowwise() - vectors.colwise().mean();

  const Eigen::Index block = std::min<Eigen::Index>(dims, kPcaBlock);
  SeededRng rng(kPcaStartSeed);
  Eigen::MatrixXd start(dims, block);
  for (Eigen::Index j = 0; j < block; ++j) {
    for (Eigen::Index i = 0; i < dims; ++i) start(i, j) = rng.Normal();
  }
  Eigen::MatrixXd q = Orthonormalize(start);
  Eigen::MatrixXd ritz = q;
  const Eigen::Index wanted = std::min<Eigen::Index>(2, block);
  for (int iteration = 0; iteration < kPcaMaxIterations; ++iteration) {
    const Eigen::MatrixXd z = x.transpose() * (x * q);
    const Eigen::MatrixXd h = q.transpose() * z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (h + h.transpose()));
    // Eigen sorts ascending; reverse to descending.
    const Eigen::MatrixXd v = eig.eigenvectors().rowwise().reverse();
    const Eigen::VectorXd lambda = eig.eigenvalues().reverse();
    ritz = q * v;
    const Eigen::MatrixXd image = z * v;
    const double scale = std::max(std::abs(lambda[0]),
                                  std::numeric_limits<double>::min());
    double residual = 0.0;
    for (Eigen::Index i = 0; i < wanted; ++i) {
      residual = std::max(residual,
                          (image.col(i) - lambda[i] * ritz.col(i)).norm() / scale);
    }
    if (lambda[0] <= 0.0 || residual <= kPcaTolerance) break;
    q = Orthonormalize(image);
  }

  Embedding2D out;
  out.method = ProjectionMethod::kPca;
  out.config.method = ProjectionMethod::kPca;
  out.points.assign(n, {0.0, 0.0});
  for (Eigen::Index k = 0; k < wanted; ++k) {
    Eigen::VectorXd direction = ritz.col(k);
    FixSign(direction);
    const Eigen::VectorXd coords = x * direction;
    for (Eigen::Index i = 0; i < n; ++i) out.points[i][k] = coords[i];
  }
  return out;
}

Eigen::MatrixXd ConditionalAffinities(const Eigen::MatrixXd& squared_distances,
                                      double perplexity,
                                      std::vector<double>* entropies) {
  const Eigen::Index n = squared_distances.rows();
  if (squared_distances.cols() != n) throw ArgumentError("distance matrix not square");
  if (!(perplexity > 0.0)) throw ArgumentError("perplexity must be positive");
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  if (entropies != nullptr) entropies->assign(n, 0.0);
  std::vector<double> shifted(n), row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) nearest = std::min(nearest, squared_distances(i, j));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      shifted[j] = j == i ? 0.0 : squared_distances(i, j) - nearest;
    }
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    for (int step = 0; step < kBisectionSteps; ++step) {
      double sum = 0.0, weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * shifted[j]);
        sum += row[j];
        weighted += shifted[j] * row[j];
      }
      entropy = std::log(sum) + beta * weighted / sum;
      for (Eigen::Index j = 0; j < n; ++j) p(i, j) = row[j] / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < kPerplexityTolerance) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    if (entropies != nullptr) (*entropies)[i] = entropy;
  }
  return p;
}

Eigen::MatrixXd JointAffinities(const Eigen::MatrixXd& vectors, double perplexity) {
  const Eigen::MatrixXd conditional =
      ConditionalAffinities(SquaredDistances(vectors), perplexity);
  return (conditional + conditional.transpose()) /
         (2.0 * static_cast<double>(vectors.rows()));
}

Embedding2D Tsne2d(const Eigen::MatrixXd& vectors, const ProjectionConfig& config,
                   std::vector<double>* kl_trace) {
  const int n = static_cast<int>(vectors.rows());
  if (n < 4) throw ArgumentError("t-SNE needs at least 4 points");
  if (config.iterations < kTsneExaggerationIterations) {
    throw ArgumentError("t-SNE needs at least " +
                        std::to_string(kTsneExaggerationIterations) + " iterations");
  }
  const double perplexity = ResolvePerplexity(config, n);
  const double limit = (n - 1) / 3.0;
  if (!(perplexity > 0.0) || !(perplexity < limit)) {
    throw ArgumentError("perplexity " + std::to_string(perplexity) +
                        " infeasible for " + std::to_string(n) +
                        " points (must lie in (0, " + std::to_string(limit) + "))");
  }

  Eigen::MatrixXd p = JointAffinities(vectors, perplexity);
  p = p.cwiseMax(kAffinityFloor);
  double exaggeration = kTsneExaggeration;

  SeededRng rng(config.seed);
  Eigen::MatrixXd y(n, 2);
  for (int i = 0; i < n; ++i) {
    y(i, 0) = kTsneInitScale * rng.Normal();
    y(i, 1) = kTsneInitScale * rng.Normal();
  }
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd kernel(n, n);
  Eigen::MatrixXd grad(n, 2);

  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    if (iteration == kTsneExaggerationIterations) exaggeration = 1.0;
    double kernel_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      kernel(i, i) = 0.0;
      for (int j = i + 1; j < n; ++j) {
        const double dx = y(i, 0) - y(j, 0);
        const double dy = y(i, 1) - y(j, 1);
        const double k = 1.0 / (1.0 + dx * dx + dy * dy);
        kernel(i, j) = kernel(j, i) = k;
        kernel_sum += 2.0 * k;
      }
    }
    grad.setZero();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = std::max(kernel(i, j) / kernel_sum, kAffinityFloor);
        const double force = 4.0 * (exaggeration * p(i, j) - q) * kernel(i, j);
        grad(i, 0) += force * (y(i, 0) - y(j, 0));
        grad(i, 1) += force * (y(i, 1) - y(j, 1));
      }
    }

    if ((iteration + 1) % kObjectiveInterval == 0) {
      double kl = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double q = std::max(kernel(i, j) / kernel_sum, kAffinityFloor);
          kl += p(i, j) * std::log(p(i, j) / q);
        }
      }
      if (!std::isfinite(kl)) {
        throw NumericError("t-SNE objective non-finite at iteration " +
                           std::to_string(iteration + 1));
      }
      if (kl_trace != nullptr) kl_trace->push_back(kl);
    }

    const double momentum = iteration < kTsneExaggerationIterations
                                ? kTsneInitialMomentum
                                : kTsneFinalMomentum;
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 2; ++d) {
        const bool same_sign = (grad(i, d) > 0.0) == (velocity(i, d) > 0.0);
        gains(i, d) = same_sign ? gains(i, d) * 0.8 : gains(i, d) + 0.2;
        gains(i, d) = std::max(gains(i, d), kMinGain);
        velocity(i, d) =
            momentum * velocity(i, d) - kTsneLearningRate * gains(i, d) * grad(i, d);
        y(i, d) += velocity(i, d);
      }
    }
    y.rowwise() -= y.colwise().mean();
  }

  Embedding2D out;
  out.method = ProjectionMethod::kTsne;
  out.config = config;
  out.config.method = ProjectionMethod::kTsne;
  out.config.perplexity = perplexity;
  out.points.resize(n);
  for (int i = 0; i < n; ++i) out.points[i] = {y(i, 0), y(i, 1)};
  return out;
}

Embedding2D Project(const Eigen::MatrixXd& vectors, const ProjectionConfig& config) {
  if (config.method == ProjectionMethod::kPca) {
    Embedding2D out = Pca2d(vectors);
    out.config = config;
    return out;
  }
  return Tsne2d(vectors, config);
}

}  // namespace retainex
