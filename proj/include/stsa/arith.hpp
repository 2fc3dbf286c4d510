// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>

namespace stsa {

/// Raised for caller mistakes: mismatched widths, bad shapes, invalid fault sites.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr unsigned kMaxWordWidth = 64;

/// Fixed-width two's-complement integer.
///
/// `bits()` always holds exactly `width()` bits; every arithmetic helper below
/// wraps modulo 2^width the way a hardware adder or register would.
class Word {
  public:
    /// Reduces `value` modulo 2^width.
    Word(unsigned width, std::int64_t value);

    static Word from_bits(unsigned width, std::uint64_t bits);
    static Word zero(unsigned width) { return Word(width, 0); }

    /// True iff `value` is representable as a signed `width`-bit integer.
    static bool fits(unsigned width, std::int64_t value);

    unsigned width() const { return width_; }
    std::uint64_t bits() const { return bits_; }
    std::int64_t value() const;
    bool bit(unsigned index) const { return (bits_ >> index) & 1U; }

    /// Sign-extends or truncates to `width`.
    Word resized(unsigned width) const { return Word(width, value()); }

    friend bool operator==(const Word&, const Word&) = default;

  private:
    Word(unsigned width, std::uint64_t bits, int);

    std::uint64_t bits_;
    unsigned width_;
};

std::uint64_t width_mask(unsigned width);

Word wrap_add(Word a, Word b);
Word wrap_sub(Word a, Word b);

/// Full signed product reduced modulo 2^out_width.
Word wrap_mul(Word a, Word b, unsigned out_width);

/// Bitwise complement, i.e. -a - 1.
Word bit_not(Word a);

/// Returns `a` with bit `bit` forced to `stuck` (0 or 1).
Word force_bit(Word a, unsigned bit, unsigned stuck);

/// True iff a == bit_not(b).
bool is_bitwise_complement(Word a, Word b);

}  // namespace stsa
