// SPDX-License-Identifier: Apache-2.0
#include "mmtherm/matrixcore.hpp"

#include <set>

#include <json.hpp>

namespace mmtherm {

namespace {

using Complex = std::complex<double>;

Eigen::Matrix2cd pauli(std::uint8_t letter) {
  Eigen::Matrix2cd m;
  switch (letter) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw DomainError("pauli letter must be in 0..3, got " + std::to_string(letter));
  }
  return m;
}

HermitianMatrix kron(const HermitianMatrix& a, const Eigen::Matrix2cd& b) {
  HermitianMatrix out(a.rows() * 2, a.cols() * 2);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

HermitianMatrix pauli_word_matrix(const PauliWord& word) {
  if (word.letters.empty()) throw DomainError("pauli_word_matrix: empty word");
  HermitianMatrix out = HermitianMatrix::Identity(1, 1);
  for (auto letter : word.letters) out = kron(out, pauli(letter));
  return out;
}

AffineFamily::AffineFamily(HermitianMatrix base, std::vector<Parameter> params)
    : base_(std::move(base)), params_(std::move(params)) {
  const auto n = base_.rows();
  if (n == 0 || base_.cols() != n) throw DomainError("AffineFamily: base must be square and nonempty");
  if (!is_hermitian(base_)) throw DomainError("AffineFamily: base is not Hermitian");
  if (std::abs(base_.trace() - Complex(1.0)) > 1e-12) throw DomainError("AffineFamily: base trace must be 1");
  std::set<std::string> names;
  for (const auto& p : params_) {
    if (!names.insert(p.name).second) throw DomainError("AffineFamily: duplicate parameter name '" + p.name + "'");
    if (p.direction.rows() != n || p.direction.cols() != n)
      throw DomainError("AffineFamily: direction '" + p.name + "' has wrong dimension");
    if (!is_hermitian(p.direction)) throw DomainError("AffineFamily: direction '" + p.name + "' is not Hermitian");
    if (std::abs(p.direction.trace()) > 1e-12)
      throw DomainError("AffineFamily: direction '" + p.name + "' must be traceless");
  }
}

HermitianMatrix AffineFamily::operator()(const Vector& theta) const {
  if (theta.size() != param_count())
    throw DomainError("eval_density: expected " + std::to_string(param_count()) + " parameters, got " +
                      std::to_string(theta.size()));
  HermitianMatrix rho = base_;
  for (Eigen::Index k = 0; k < theta.size(); ++k) rho += theta(k) * params_[static_cast<std::size_t>(k)].direction;
  return rho;
}

AffineFamily build_family(std::span<const ParameterSpec> spec) {
  if (spec.empty()) throw DomainError("build_family: no parameters");
  std::size_t m = 0;
  for (const auto& p : spec) {
    if (p.terms.empty()) throw DomainError("build_family: parameter '" + p.name + "' has no terms");
    for (const auto& t : p.terms) {
      if (m == 0) m = t.word.size();
      if (t.word.size() != m || m == 0) throw DomainError("build_family: mixed or empty word lengths");
    }
  }
  const Eigen::Index n = Eigen::Index{1} << m;
  const double scale = 1.0 / static_cast<double>(n);
  std::vector<AffineFamily::Parameter> params;
  for (const auto& p : spec) {
    HermitianMatrix b = HermitianMatrix::Zero(n, n);
    for (const auto& t : p.terms) b += (t.coeff * scale) * pauli_word_matrix(t.word);
    params.push_back({p.name, std::move(b)});
  }
  return AffineFamily(HermitianMatrix::Identity(n, n) * scale, std::move(params));
}

namespace {

std::vector<ParameterSpec> parse_spec(const nlohmann::json& doc) {
  std::vector<ParameterSpec> spec;
  for (const auto& p : doc.at("params")) {
    ParameterSpec ps;
    ps.name = p.at("name").get<std::string>();
    for (const auto& t : p.at("terms")) {
      PauliTerm term;
      for (int letter : t.at("word")) {
        if (letter < 0 || letter > 3) throw DomainError("family json: word letters must be in 0..3");
        term.word.letters.push_back(static_cast<std::uint8_t>(letter));
      }
      term.coeff = t.value("coeff", 1.0);
      ps.terms.push_back(std::move(term));
    }
    spec.push_back(std::move(ps));
  }
  return spec;
}

}  // namespace

AffineFamily family_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("family json: ") + e.what());
  }
  std::vector<ParameterSpec> spec;
  try {
    spec = parse_spec(doc);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("family json: ") + e.what());
  }
  auto family = build_family(spec);
  if (doc.contains("dim") && doc["dim"].get<long>() != family.dim())
    throw DomainError("family json: dim " + std::to_string(doc["dim"].get<long>()) + " does not match word length");
  return family;
}

std::string family_spec_to_json(std::span<const ParameterSpec> spec) {
  nlohmann::json doc;
  const std::size_t m = spec.empty() || spec.front().terms.empty() ? 0 : spec.front().terms.front().word.size();
  doc["dim"] = 1L << m;
  doc["params"] = nlohmann::json::array();
  for (const auto& p : spec) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : p.terms) {
      std::vector<int> w(t.word.letters.begin(), t.word.letters.end());
      terms.push_back({{"word", w}, {"coeff", t.coeff}});
    }
    doc["params"].push_back({{"name", p.name}, {"terms", terms}});
  }
  return doc.dump();
}

HermitianMatrix eval_density(const AffineFamily& family, const Vector& theta) { return family(theta); }

double min_eigenvalue(const HermitianMatrix& h) { return eigensystem(h).eigenvalues.minCoeff(); }

bool is_feasible(const AffineFamily& family, const Vector& theta, double tol) {
  return min_eigenvalue(family(theta)) >= -tol;
}

}  // namespace mmtherm
