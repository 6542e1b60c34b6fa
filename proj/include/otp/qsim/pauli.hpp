#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "otp/common.hpp"

namespace otp::qsim {

enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2 };

// Tensor string over {I, X, Z}; index 0 is the leftmost (most significant)
// qubit in basis-state indexing.
struct PauliString {
  std::vector<Pauli> ops;

  std::size_t size() const { return ops.size(); }

  std::string str() const {
    std::string s;
    s.reserve(ops.size());
    for (Pauli p : ops) s += p == Pauli::I ? 'I' : (p == Pauli::X ? 'X' : 'Z');
    return s;
  }

  static PauliString parse(const std::string& s) {
    PauliString out;
    out.ops.reserve(s.size());
    for (char c : s) {
      switch (c) {
        case 'I': out.ops.push_back(Pauli::I); break;
        case 'X': out.ops.push_back(Pauli::X); break;
        case 'Z': out.ops.push_back(Pauli::Z); break;
        default: fail(Errc::invalid_argument, "bad Pauli letter");
      }
    }
    return out;
  }

  bool operator==(const PauliString&) const = default;
};

// Two strings of real Paulis anticommute iff the number of positions holding
// an {X,Z} or {Z,X} clash is odd.
inline bool anticommute(const PauliString& a, const PauliString& b) {
  if (a.size() != b.size()) fail(Errc::invalid_argument, "length mismatch");
  int clashes = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Pauli p = a.ops[i], q = b.ops[i];
    if (p != Pauli::I && q != Pauli::I && p != q) ++clashes;
  }
  return (clashes & 1) != 0;
}

// Measurement set for the 2^k-row gate family: 2^k pairwise anticommuting
// strings on n = 2^k - 1 qubits. Doubling step: prior strings get Z then
// identity padding; their mirror gets identity padding then X.
//   k=1: [Z, X]
//   k=2: [ZZI, XZI, IXZ, IXX]
inline std::vector<PauliString> measurement_set(int k) {
  if (k < 1 || k > 6) fail(Errc::invalid_argument, "k out of range");
  std::vector<PauliString> set = {{{Pauli::Z}}, {{Pauli::X}}};
  for (int level = 1; level < k; ++level) {
    const std::size_t n = set.front().size();  // 2^level - 1
    std::vector<PauliString> next;
    next.reserve(set.size() * 2);
    for (const PauliString& s : set) {
      PauliString t = s;
      t.ops.push_back(Pauli::Z);
      t.ops.insert(t.ops.end(), n, Pauli::I);
      next.push_back(std::move(t));
    }
    for (const PauliString& s : set) {
      PauliString t;
      t.ops.assign(n, Pauli::I);
      t.ops.push_back(Pauli::X);
      t.ops.insert(t.ops.end(), s.ops.begin(), s.ops.end());
      next.push_back(std::move(t));
    }
    set = std::move(next);
  }
  return set;
}

// Applies a Pauli string to a computational basis column: returns the row it
// maps to and the +-1 sign picked up from Z letters. Qubit 0 reads the top
// bit of the index.
inline std::pair<std::size_t, double> pauli_column_image(const PauliString& p, std::size_t col) {
  const std::size_t n = p.size();
  std::size_t row = col;
  double sign = 1.0;
  for (std::size_t q = 0; q < n; ++q) {
    const std::size_t bit = (col >> (n - 1 - q)) & 1;
    switch (p.ops[q]) {
      case Pauli::I: break;
      case Pauli::X: row ^= std::size_t{1} << (n - 1 - q); break;
      case Pauli::Z:
        if (bit) sign = -sign;
        break;
    }
  }
  return {row, sign};
}

}  // namespace otp::qsim
