#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "otp/common.hpp"
#include "otp/qsim/gates.hpp"
#include "otp/qsim/linalg.hpp"
#include "otp/qsim/pauli.hpp"
#include "otp/qsim/states.hpp"

namespace otp::qsim {

// Truth table of a k-input one-bit gate, indexed by the integer value of the
// input string.
struct GateGk {
  int k = 1;
  std::vector<std::uint8_t> outputs;  // size 2^k, values 0/1

  static GateGk from_outputs(int k, std::vector<std::uint8_t> outs) {
    if (k < 1 || outs.size() != (std::size_t{1} << k))
      fail(Errc::invalid_argument, "truth table size mismatch");
    for (auto b : outs)
      if (b > 1) fail(Errc::invalid_argument, "truth table entries must be bits");
    return {k, std::move(outs)};
  }
};

inline std::size_t gk_qubits(int k) { return (std::size_t{1} << k) - 1; }

// Success probability of one delegated k-input evaluation:
// 1/2 + 2^-(1 + k/2).
inline double gk_success_prob(int k) { return 0.5 + std::pow(2.0, -(1.0 + 0.5 * k)); }

// Carrier density matrix of a k-input gate G on n = 2^k - 1 qubits:
//   rho_G = 2^-n ( I + 2^(-k/2) sum_i (-1)^G(i) M_i )
// with M_i the anticommuting measurement set. The 2^(-k/2)-scaled sum
// squares to the identity, so rho_G is a projector-shaped state with
// eigenvalues {0, 2^(1-n)}.
inline CMatrix gate_density(const GateGk& g) {
  const std::size_t n = gk_qubits(g.k);
  const std::size_t d = std::size_t{1} << n;
  const auto set = measurement_set(g.k);
  const double coeff = std::pow(2.0, -0.5 * g.k);
  CMatrix rho(d);
  for (std::size_t c = 0; c < d; ++c) rho(c, c) = 1.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double s = g.outputs[i] ? -coeff : coeff;
    for (std::size_t c = 0; c < d; ++c) {
      const auto [row, sign] = pauli_column_image(set[i], c);
      rho(row, c) += s * sign;
    }
  }
  rho *= 1.0 / static_cast<double>(d);
  return rho;
}

// P(correct outcome) when the input-x measurement M_x is applied to rho:
// Tr[rho (I + (-1)^G(x) M_x)/2]. Equals gk_success_prob(k) exactly for the
// gate's own carrier.
inline double born_success(const CMatrix& rho, const GateGk& g, std::size_t input) {
  if (input >= g.outputs.size()) fail(Errc::invalid_argument, "input out of range");
  const auto set = measurement_set(g.k);
  const PauliString& m = set[input];
  std::complex<double> tr = 0.0;
  for (std::size_t c = 0; c < rho.dim(); ++c) {
    const auto [row, sign] = pauli_column_image(m, c);
    tr += rho(row, c) * sign;
  }
  const double expect = std::real(tr);
  return 0.5 * (1.0 + (g.outputs[input] ? -expect : expect));
}

inline void validate_density(const CMatrix& rho, double tol = 1e-9) {
  if (rho.hermiticity_defect() > tol) fail(Errc::invalid_argument, "density not Hermitian");
  if (std::abs(rho.trace() - std::complex<double>(1.0)) > tol)
    fail(Errc::invalid_argument, "density trace != 1");
  if (!is_psd(rho, tol)) fail(Errc::invalid_argument, "density not PSD");
}

inline CMatrix projector(const PureQubit& q) {
  CMatrix p(2);
  p(0, 0) = q.a0 * std::conj(q.a0);
  p(0, 1) = q.a0 * std::conj(q.a1);
  p(1, 0) = q.a1 * std::conj(q.a0);
  p(1, 1) = q.a1 * std::conj(q.a1);
  return p;
}

// Equal-weight product-state decomposition of a carrier density:
//   rho_G = 2^-k sum_branches  tensor_j |s_bj><s_bj|
// with every per-qubit factor one of the four gate carrier states. Found by
// exhaustive multiset search over branch assignments; exists for the k <= 2
// gate families used here.
struct ProductDecomposition {
  int k = 1;
  // branches[b][q] is the carrier state on qubit q of branch b.
  std::vector<std::vector<GateG1>> branches;
  double weight = 0.0;  // common branch weight, 2^-k
};

namespace detail {

// Flattened real form of tensor products of the four carrier projectors.
// All carrier states are real, so real arithmetic suffices for the search.
inline std::vector<std::vector<double>> product_projectors(std::size_t n_qubits,
                                                           std::vector<std::vector<GateG1>>& labels) {
  std::array<CMatrix, 4> single;
  for (int g = 0; g < 4; ++g) single[g] = projector(gate_state(static_cast<GateG1>(g)));
  const std::size_t count = std::size_t{1} << (2 * n_qubits);  // 4^n assignments
  const std::size_t d = std::size_t{1} << n_qubits;
  std::vector<std::vector<double>> mats;
  mats.reserve(count);
  labels.clear();
  labels.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<GateG1> assign(n_qubits);
    std::size_t c = code;
    for (std::size_t q = 0; q < n_qubits; ++q) {
      assign[n_qubits - 1 - q] = static_cast<GateG1>(c & 3);
      c >>= 2;
    }
    CMatrix m = single[static_cast<int>(assign[0])];
    for (std::size_t q = 1; q < n_qubits; ++q) m = kron(m, single[static_cast<int>(assign[q])]);
    std::vector<double> flat(d * d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t cc = 0; cc < d; ++cc) flat[r * d + cc] = std::real(m(r, cc));
    mats.push_back(std::move(flat));
    labels.push_back(std::move(assign));
  }
  return mats;
}

inline bool decompose_search(const std::vector<std::vector<double>>& mats,
                             const std::vector<double>& target, std::vector<double>& partial,
                             std::vector<std::size_t>& chosen, std::size_t need,
                             std::size_t first, std::size_t dim, double tol) {
  if (need == 0) {
    for (std::size_t i = 0; i < target.size(); ++i)
      if (std::abs(partial[i] - target[i]) > tol) return false;
    return true;
  }
  for (std::size_t m = first; m < mats.size(); ++m) {
    const auto& mat = mats[m];
    // Projector diagonals are nonnegative, so a partial sum exceeding the
    // target diagonal can never be completed.
    bool ok = true;
    for (std::size_t r = 0; r < dim && ok; ++r) {
      const std::size_t idx = r * dim + r;
      if (partial[idx] + mat[idx] > target[idx] + tol) ok = false;
    }
    if (!ok) continue;
    for (std::size_t i = 0; i < partial.size(); ++i) partial[i] += mat[i];
    chosen.push_back(m);
    if (decompose_search(mats, target, partial, chosen, need - 1, m, dim, tol)) return true;
    chosen.pop_back();
    for (std::size_t i = 0; i < partial.size(); ++i) partial[i] -= mat[i];
  }
  return false;
}

}  // namespace detail

inline std::optional<ProductDecomposition> decompose_product_states(const GateGk& g,
                                                                    double tol = 1e-8) {
  if (g.k > 2) return std::nullopt;  // search space impractical beyond 3 qubits
  const std::size_t n = gk_qubits(g.k);
  const std::size_t d = std::size_t{1} << n;
  const CMatrix rho = gate_density(g);
  std::vector<double> target(d * d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) target[r * d + c] = std::real(rho(r, c));

  std::vector<std::vector<GateG1>> labels;
  const auto mats = detail::product_projectors(n, labels);
  const std::size_t branches = std::size_t{1} << g.k;
  const double w = 1.0 / static_cast<double>(branches);

  // Search in units of the branch weight.
  std::vector<std::vector<double>> scaled = mats;
  for (auto& m : scaled)
    for (auto& v : m) v *= w;

  std::vector<double> partial(d * d, 0.0);
  std::vector<std::size_t> chosen;
  if (!detail::decompose_search(scaled, target, partial, chosen, branches, 0, d, tol))
    return std::nullopt;

  ProductDecomposition out;
  out.k = g.k;
  out.weight = w;
  for (std::size_t m : chosen) out.branches.push_back(labels[m]);
  return out;
}

// Reconstructs the density matrix of a decomposition, for verification.
inline CMatrix decomposition_density(const ProductDecomposition& dec) {
  const std::size_t n = gk_qubits(dec.k);
  CMatrix sum(std::size_t{1} << n);
  for (const auto& branch : dec.branches) {
    CMatrix m = projector(gate_state(branch[0]));
    for (std::size_t q = 1; q < n; ++q) m = kron(m, projector(gate_state(branch[q])));
    m *= dec.weight;
    sum += m;
  }
  return sum;
}

// Entanglement-fidelity lower bound from two-basis visibilities:
// F >= (V_lin + V_diag) / 2.
inline double fidelity_lower_bound(double v_linear, double v_diagonal) {
  if (v_linear < 0.0 || v_linear > 1.0 || v_diagonal < 0.0 || v_diagonal > 1.0)
    fail(Errc::invalid_argument, "visibility out of [0,1]");
  return 0.5 * (v_linear + v_diagonal);
}

}  // namespace otp::qsim
