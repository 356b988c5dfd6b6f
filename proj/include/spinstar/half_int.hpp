#pragma once

#include <compare>
#include <cstdlib>
#include <string>
#include <string_view>

namespace spinstar {

/// An exact multiple of 1/2, stored as twice its value.
///
/// Used for every angular-momentum quantum number: magnitudes j and
/// projections m alike.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr explicit HalfInt(int whole) : twice_(2 * whole) {}

  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }

  /// Accepts "3", "-2", "3/2", "-1/2" and decimal halves such as "1.5".
  static HalfInt parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr HalfInt& operator+=(HalfInt o) { twice_ += o.twice_; return *this; }
  constexpr HalfInt& operator-=(HalfInt o) { twice_ -= o.twice_; return *this; }

  constexpr bool operator==(const HalfInt&) const = default;
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

inline constexpr HalfInt kHalf = HalfInt::from_twice(1);

constexpr HalfInt abs(HalfInt h) { return HalfInt::from_twice(h.twice() < 0 ? -h.twice() : h.twice()); }

/// True when m is one of -j, -j+1, ..., j.
constexpr bool is_projection_of(HalfInt j, HalfInt m) {
  return j.twice() >= 0 && abs(m) <= j && (j.twice() - m.twice()) % 2 == 0;
}

/// Integer difference j - m for parity-consistent arguments.
constexpr int integer_gap(HalfInt a, HalfInt b) { return (a.twice() - b.twice()) / 2; }

}  // namespace spinstar
