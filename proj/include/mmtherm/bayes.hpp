// SPDX-License-Identifier: Apache-2.0
//
// Bayesian updates from joint spin measurements and Kullback-Leibler gains.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mmtherm/matrixcore.hpp"
#include "mmtherm/measure.hpp"

namespace mmtherm {

using Likelihood = std::function<double(const Vector&)>;

struct Outcome {
  std::string label;
  HermitianMatrix projector;
};

/// Outcomes whose projectors sum to the identity.
struct MeasurementModel {
  std::vector<Outcome> outcomes;

  std::size_t size() const { return outcomes.size(); }
  std::size_t index(const std::string& label) const;
  /// Throws DomainError unless the projectors are Hermitian, idempotent and complete.
  void validate(Eigen::Index dim) const;
};

/// Product measurement of every qubit along Pauli axis `letter` (1 = x, 2 = y, 3 = z).
/// Ungrouped outcomes are labelled by the ± pattern ("+-" ...). The grouped
/// model for two qubits has outcomes "A" (agreement) and "D" (disagreement).
MeasurementModel spin_measurement(int qubits, int letter, bool grouped);

/// θ ↦ Re tr(Π ρ(θ)), clamped at 0.
Likelihood outcome_likelihood(const AffineFamily& family, const MeasurementModel& model, std::size_t outcome);

/// Posterior kept as the prior times the accumulated likelihood, with the
/// evidence folded into the normalization.
std::pair<Prior, double> posterior(const Prior& prior, const Likelihood& likelihood,
                                   const IntegrationOptions& opts = {});

/// ∫ post·log(post/prior) in nats. Points where the posterior density is below 1e-300 contribute 0.
double kl_gain(const Prior& posterior, const Prior& prior, const IntegrationOptions& opts = {});

struct LabelledLikelihood {
  std::string label;
  Likelihood fn;
};

std::vector<LabelledLikelihood> model_likelihoods(const AffineFamily& family, const MeasurementModel& model);

/// Re-express likelihoods that read only coordinate `axis` of a `dim`-parameter
/// family as functions of that coordinate alone, for use with a marginal prior.
std::vector<LabelledLikelihood> restrict_to_axis(const std::vector<LabelledLikelihood>& likelihoods, int dim, int axis);

struct OutcomeGain {
  std::string label;
  double evidence = 0.0;
  double gain_nats = 0.0;
};

struct GainReport {
  std::vector<OutcomeGain> outcomes;
  double expected_gain_nats = 0.0;

  double evidence_sum() const;
  /// {"outcomes":[{"label","evidence","gain_nats"}],"expected_gain_nats":...}
  std::string to_json() const;
};

GainReport expected_gain(const Prior& prior, const std::vector<LabelledLikelihood>& likelihoods,
                         const IntegrationOptions& opts = {});
GainReport expected_gain(const Prior& prior, const AffineFamily& family, const MeasurementModel& model,
                         const IntegrationOptions& opts = {});

struct SequentialStep {
  std::string label;
  double gain_nats = 0.0;
  double evidence = 0.0;  // conditional on the earlier outcomes
};

/// `sequence` is one character per outcome ("AD") or comma-separated labels ("+-,--").
std::vector<SequentialStep> sequential_gains(const Prior& prior, const std::vector<LabelledLikelihood>& likelihoods,
                                             const std::string& sequence, const IntegrationOptions& opts = {});
std::vector<SequentialStep> sequential_gains(const Prior& prior, const AffineFamily& family,
                                             const MeasurementModel& model, const std::string& sequence,
                                             const IntegrationOptions& opts = {});

}  // namespace mmtherm
