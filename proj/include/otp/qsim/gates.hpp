#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace otp::qsim {

// The four one-bit gates. Encoded values are stable: they appear in table
// files and wire frames.
enum class GateG1 : std::uint8_t { Const0 = 0, Const1 = 1, Id = 2, Not = 3 };

inline constexpr std::array<GateG1, 4> kAllGates = {GateG1::Const0, GateG1::Const1, GateG1::Id,
                                                    GateG1::Not};

// Truth table as (output on input 0, output on input 1).
constexpr std::array<std::uint8_t, 2> truth_table(GateG1 g) {
  switch (g) {
    case GateG1::Const0: return {0, 0};
    case GateG1::Const1: return {1, 1};
    case GateG1::Id: return {0, 1};
    case GateG1::Not: return {1, 0};
  }
  return {0, 0};
}

constexpr std::uint8_t apply_gate(GateG1 g, int input) { return truth_table(g)[input & 1]; }

// Gate whose outputs are flipped on both inputs. Its carrier state is
// orthogonal to the original gate's state.
constexpr GateG1 opposite(GateG1 g) {
  switch (g) {
    case GateG1::Const0: return GateG1::Const1;
    case GateG1::Const1: return GateG1::Const0;
    case GateG1::Id: return GateG1::Not;
    case GateG1::Not: return GateG1::Id;
  }
  return g;
}

// Gate pre-composed with NOT on its input (truth table rows swapped).
constexpr GateG1 invert_input(GateG1 g) {
  switch (g) {
    case GateG1::Id: return GateG1::Not;
    case GateG1::Not: return GateG1::Id;
    default: return g;  // constants ignore their input
  }
}

constexpr std::string_view gate_name(GateG1 g) {
  switch (g) {
    case GateG1::Const0: return "const0";
    case GateG1::Const1: return "const1";
    case GateG1::Id: return "id";
    case GateG1::Not: return "not";
  }
  return "?";
}

inline std::optional<GateG1> parse_gate(std::string_view name) {
  for (GateG1 g : kAllGates)
    if (gate_name(g) == name) return g;
  return std::nullopt;
}

inline std::optional<GateG1> gate_from_byte(std::uint8_t v) {
  if (v > 3) return std::nullopt;
  return static_cast<GateG1>(v);
}

}  // namespace otp::qsim
