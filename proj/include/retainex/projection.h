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

#ifndef RETAINEX_PROJECTION_H_
#define RETAINEX_PROJECTION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace retainex {

enum class ProjectionMethod { kPca, kTsne };

std::string_view ProjectionMethodName(ProjectionMethod method);  // "pca", "tsne"
ProjectionMethod ParseProjectionMethod(std::string_view name);   // ArgumentError

inline constexpr int kTsneExaggerationIterations = 250;
inline constexpr double kTsneExaggeration = 12.0;
inline constexpr double kTsneLearningRate = 200.0;
inline constexpr double kTsneInitialMomentum = 0.5;
inline constexpr double kTsneFinalMomentum = 0.8;
inline constexpr double kTsneInitScale = 1e-4;
inline constexpr double kDefaultPerplexity = 30.0;
inline constexpr double kPerplexityTolerance = 1e-5;
inline constexpr double kPcaTolerance = 1e-10;

struct ProjectionConfig {
  ProjectionMethod method = ProjectionMethod::kTsne;
  // Unset means min(30, 0.9 * (N - 1) / 3), so small cohorts stay feasible.
  std::optional<double> perplexity;
  int iterations = 1000;
  std::uint64_t seed = 1;

  nlohmann::json ToJson() const;
  // Unknown keys and malformed values raise ParseError.
  static ProjectionConfig FromJson(const nlohmann::json& object);
};

// Perplexity a configuration resolves to for n points.
double ResolvePerplexity(const ProjectionConfig& config, int n);

struct Embedding2D {
  std::vector<std::array<double, 2>> points;
  ProjectionMethod method = ProjectionMethod::kPca;
  ProjectionConfig config;

  // {"method", "config", "points": [[x, y], ...]}.
  nlohmann::json ToJson() const;
  friend bool operator==(const Embedding2D& a, const Embedding2D& b) {
    return a.points == b.points && a.method == b.method;
  }
};

// Rows of `vectors` are points. Mean-centred projection onto the top two
// principal directions, found by subspace iteration with Rayleigh-Ritz
// extraction to a residual of 1e-10 relative to the leading eigenvalue. Each
// direction's largest-magnitude loading is made positive. Throws
// ArgumentError when N < 2.
Embedding2D Pca2d(const Eigen::MatrixXd& vectors);

// Row-conditional Gaussian affinities p_{j|i} whose Shannon entropy (natural
// log) matches log(perplexity) within 1e-5, found by bisection on the
// precision. `squared_distances` is N x N. Rows of identical points come out
// uniform. Optionally reports each row's entropy.
Eigen::MatrixXd ConditionalAffinities(const Eigen::MatrixXd& squared_distances,
                                      double perplexity,
                                      std::vector<double>* entropies = nullptr);

// Symmetrized joint affinities (P + P^T) / 2N.
Eigen::MatrixXd JointAffinities(const Eigen::MatrixXd& vectors, double perplexity);

// Exact t-SNE with a Student-t kernel, early exaggeration 12 for 250
// iterations, learning rate 200, momentum 0.5 then 0.8, and per-coordinate
// gains. Throws ArgumentError for N < 4, iterations < 250, or a perplexity
// outside (0, (N - 1) / 3), and NumericError when the objective (checked every
// 50 iterations) is non-finite. `kl_trace`, when given, receives those values.
Embedding2D Tsne2d(const Eigen::MatrixXd& vectors, const ProjectionConfig& config,
                   std::vector<double>* kl_trace = nullptr);

// Dispatches on config.method.
Embedding2D Project(const Eigen::MatrixXd& vectors, const ProjectionConfig& config);

}  // namespace retainex

#endif  // RETAINEX_PROJECTION_H_
