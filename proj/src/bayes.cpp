// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/bayes.hpp"

#include <cmath>

#include <json.hpp>

#include "mmtherm/errors.hpp"

namespace mmtherm {

std::size_t MeasurementModel::index(const std::string& label) const {
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if (outcomes[i].label == label) return i;
  std::string known;
  for (const auto& o : outcomes) known += (known.empty() ? "" : ", ") + o.label;
  throw DomainError("unknown outcome '" + label + "' (known: " + known + ")");
}

void MeasurementModel::validate(Eigen::Index dim) const {
  if (outcomes.empty()) throw DomainError("measurement model has no outcomes");
  HermitianMatrix total = HermitianMatrix::Zero(dim, dim);
  for (const auto& o : outcomes) {
    if (o.projector.rows() != dim || o.projector.cols() != dim)
      throw DomainError("projector for outcome '" + o.label + "' has dimension " + std::to_string(o.projector.rows()) +
                        ", family has " + std::to_string(dim));
    if (!is_hermitian(o.projector)) throw DomainError("projector for outcome '" + o.label + "' is not Hermitian");
    if ((o.projector * o.projector - o.projector).norm() > 1e-12)
      throw DomainError("operator for outcome '" + o.label + "' is not a projector");
    total += o.projector;
  }
  if ((total - HermitianMatrix::Identity(dim, dim)).norm() > 1e-12)
    throw DomainError("measurement projectors do not sum to the identity");
}

MeasurementModel spin_measurement(int qubits, int letter, bool grouped) {
  if (qubits < 1 || qubits > 10) throw DomainError("spin_measurement: qubit count must be in 1..10");
  if (letter < 1 || letter > 3) throw DomainError("spin_measurement: axis letter must be 1, 2 or 3");
  const Eigen::Index n = Eigen::Index{1} << qubits;
  MeasurementModel model;
  for (std::size_t pattern = 0; pattern < (std::size_t{1} << qubits); ++pattern) {
    // Π = ⊗ (I ± σ)/2, expanded over subsets of positions.
    HermitianMatrix proj = HermitianMatrix::Zero(n, n);
    for (std::size_t subset = 0; subset < (std::size_t{1} << qubits); ++subset) {
      PauliWord w;
      double sign = 1.0;
      for (int q = 0; q < qubits; ++q) {
        const bool on = (subset >> (qubits - 1 - q)) & 1u;
        const bool minus = (pattern >> (qubits - 1 - q)) & 1u;
        w.letters.push_back(on ? static_cast<std::uint8_t>(letter) : std::uint8_t{0});
        if (on && minus) sign = -sign;
      }
      proj += sign * pauli_word_matrix(w);
    }
    proj /= static_cast<double>(n);
    std::string label;
    for (int q = 0; q < qubits; ++q) label += ((pattern >> (qubits - 1 - q)) & 1u) ? '-' : '+';
    model.outcomes.push_back({label, proj});
  }
  if (!grouped) return model;
  if (qubits != 2) throw DomainError("spin_measurement: grouped outcomes are defined for two qubits");
  MeasurementModel g;
  g.outcomes.push_back({"A", model.outcomes[0].projector + model.outcomes[3].projector});
  g.outcomes.push_back({"D", model.outcomes[1].projector + model.outcomes[2].projector});
  return g;
}

Likelihood outcome_likelihood(const AffineFamily& family, const MeasurementModel& model, std::size_t outcome) {
  if (outcome >= model.size()) throw DomainError("outcome index out of range");
  const HermitianMatrix& p = model.outcomes[outcome].projector;
  if (p.rows() != family.dim()) throw DomainError("projector dimension does not match the family");
  // tr(Π ρ(θ)) is affine in θ; precompute the coefficients.
  const double base = (p * family.base()).trace().real();
  Vector slope(family.param_count());
  for (Eigen::Index k = 0; k < family.param_count(); ++k) slope(k) = (p * family.direction(k)).trace().real();
  return [base, slope](const Vector& theta) { return std::max(0.0, base + slope.dot(theta)); };
}

std::pair<Prior, double> posterior(const Prior& prior, const Likelihood& likelihood, const IntegrationOptions& opts) {
  const double evidence = expectation(prior, likelihood, opts);
  if (!(evidence > 0.0)) throw DomainError("posterior: outcome has zero evidence under the prior");
  return {prior.reweighted(likelihood, prior.normalization() * evidence), evidence};
}

double kl_gain(const Prior& post, const Prior& prior, const IntegrationOptions& opts) {
  const double kl = expectation(prior, [&](const Vector& t) {
    const double q = post.density(t);
    if (q < 1e-300) return 0.0;
    const double p = prior.density(t);
    if (!(p > 0.0)) return 0.0;
    const double r = q / p;
    return r * std::log(r);
  }, opts);
  if (!std::isfinite(kl)) throw DivergenceError("kl_gain: divergent information gain", kl);
  return kl;
}

double GainReport::evidence_sum() const {
  double s = 0.0;
  for (const auto& o : outcomes) s += o.evidence;
  return s;
}

std::string GainReport::to_json() const {
  nlohmann::json j;
  j["outcomes"] = nlohmann::json::array();
  for (const auto& o : outcomes) j["outcomes"].push_back({{"label", o.label}, {"evidence", o.evidence}, {"gain_nats", o.gain_nats}});
  j["expected_gain_nats"] = expected_gain_nats;
  return j.dump(2);
}

std::vector<LabelledLikelihood> model_likelihoods(const AffineFamily& family, const MeasurementModel& model) {
  model.validate(family.dim());
  std::vector<LabelledLikelihood> out;
  for (std::size_t i = 0; i < model.size(); ++i) out.push_back({model.outcomes[i].label, outcome_likelihood(family, model, i)});
  return out;
}

std::vector<LabelledLikelihood> restrict_to_axis(const std::vector<LabelledLikelihood>& likelihoods, int dim, int axis) {
  if (axis < 0 || axis >= dim) throw DomainError("restrict_to_axis: axis out of range");
  std::vector<LabelledLikelihood> out;
  for (const auto& l : likelihoods)
    out.push_back({l.label, [fn = l.fn, dim, axis](const Vector& x) {
                     Vector full = Vector::Zero(dim);
                     full(axis) = x(0);
                     return fn(full);
                   }});
  return out;
}

GainReport expected_gain(const Prior& prior, const std::vector<LabelledLikelihood>& likelihoods,
                         const IntegrationOptions& opts) {
  GainReport report;
  for (const auto& l : likelihoods) {
    const auto [post, evidence] = posterior(prior, l.fn, opts);
    const double gain = kl_gain(post, prior, opts);
    report.outcomes.push_back({l.label, evidence, gain});
    report.expected_gain_nats += evidence * gain;
  }
  return report;
}

GainReport expected_gain(const Prior& prior, const AffineFamily& family, const MeasurementModel& model,
                         const IntegrationOptions& opts) {
  return expected_gain(prior, model_likelihoods(family, model), opts);
}

namespace {

const LabelledLikelihood& find_label(const std::vector<LabelledLikelihood>& ls, const std::string& label) {
  std::string known;
  for (const auto& l : ls) {
    if (l.label == label) return l;
    known += (known.empty() ? "" : ", ") + l.label;
  }
  throw DomainError("unknown outcome '" + label + "' (known: " + known + ")");
}

std::vector<std::string> split_sequence(const std::vector<LabelledLikelihood>& ls, const std::string& sequence) {
  std::vector<std::string> labels;
  if (sequence.find(',') != std::string::npos) {
    std::size_t start = 0;
    while (start <= sequence.size()) {
      const auto end = std::min(sequence.find(',', start), sequence.size());
      labels.push_back(sequence.substr(start, end - start));
      start = end + 1;
    }
  } else {
    for (char c : sequence) labels.emplace_back(1, c);
  }
  for (const auto& l : labels) find_label(ls, l);
  return labels;
}

}  // namespace

std::vector<SequentialStep> sequential_gains(const Prior& prior, const std::vector<LabelledLikelihood>& likelihoods,
                                             const std::string& sequence, const IntegrationOptions& opts) {
  if (sequence.empty()) throw DomainError("sequential_gains: empty outcome sequence");
  const auto labels = split_sequence(likelihoods, sequence);
  std::vector<SequentialStep> steps;
  Prior current = prior;
  for (const auto& label : labels) {
    auto [post, evidence] = posterior(current, find_label(likelihoods, label).fn, opts);
    steps.push_back({label, kl_gain(post, current, opts), evidence});
    current = std::move(post);
  }
  return steps;
}

std::vector<SequentialStep> sequential_gains(const Prior& prior, const AffineFamily& family,
                                             const MeasurementModel& model, const std::string& sequence,
                                             const IntegrationOptions& opts) {
  return sequential_gains(prior, model_likelihoods(family, model), sequence, opts);
}

}  // namespace mmtherm
