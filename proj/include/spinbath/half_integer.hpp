#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace spinbath {

// Angular momentum quantum numbers (J, m) live on a half-integer lattice.
// Storing twice the value keeps every key and loop in exact integer
// arithmetic; no floating-point map keys anywhere.
struct HalfInt {
  int twice = 0;

  constexpr HalfInt() = default;
  constexpr explicit HalfInt(int twice_value) : twice(twice_value) {}

  static constexpr HalfInt from_int(int v) { return HalfInt{2 * v}; }

  [[nodiscard]] constexpr double value() const { return 0.5 * twice; }
  [[nodiscard]] constexpr bool integral() const { return twice % 2 == 0; }

  friend constexpr auto operator<=>(HalfInt, HalfInt) = default;

  friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt{a.twice + b.twice}; }
  friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt{a.twice - b.twice}; }
  friend constexpr HalfInt operator-(HalfInt a) { return HalfInt{-a.twice}; }
};

// "3/2", "-1", "2" style rendering, for CSV output and error messages.
inline std::string to_string(HalfInt h) {
  if (h.twice % 2 == 0) return std::to_string(h.twice / 2);
  return std::to_string(h.twice) + "/2";
}

// Parses "1/2", "3/2", "1", "0.5", "1.5" into a half-integer.
inline HalfInt parse_half_integer(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty half-integer literal");
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    int num = std::stoi(text.substr(0, slash));
    int den = std::stoi(text.substr(slash + 1));
    if (den == 1) return HalfInt{2 * num};
    if (den == 2) return HalfInt{num};
    throw std::invalid_argument("half-integer literal must have denominator 1 or 2: " + text);
  }
  double v = std::stod(text);
  double tw = 2.0 * v;
  int rounded = static_cast<int>(tw >= 0 ? tw + 0.5 : tw - 0.5);
  if (tw != static_cast<double>(rounded))
    throw std::invalid_argument("not a half-integer: " + text);
  return HalfInt{rounded};
}

}  // namespace spinbath
