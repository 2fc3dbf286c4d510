// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/arith.hpp"

#include <string>

namespace stsa {

namespace {

void check_width(unsigned width)
{
    if (width == 0 || width > kMaxWordWidth) {
        throw UsageError("word width must be in [1, 64], got " + std::to_string(width));
    }
}

void check_same_width(const Word& a, const Word& b, const char* op)
{
    if (a.width() != b.width()) {
        throw UsageError(std::string(op) + ": width mismatch (" + std::to_string(a.width()) +
                         " vs " + std::to_string(b.width()) + ")");
    }
}

}  // namespace

std::uint64_t width_mask(unsigned width)
{
    return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

Word::Word(unsigned width, std::uint64_t bits, int) : bits_(bits & width_mask(width)), width_(width) {}

Word::Word(unsigned width, std::int64_t value)
    : Word(width, static_cast<std::uint64_t>(value), 0)
{
    check_width(width);
}

Word Word::from_bits(unsigned width, std::uint64_t bits)
{
    check_width(width);
    return Word(width, bits, 0);
}

bool Word::fits(unsigned width, std::int64_t value)
{
    if (width >= 64) {
        return true;
    }
    const std::int64_t lo = -(std::int64_t{1} << (width - 1));
    const std::int64_t hi = (std::int64_t{1} << (width - 1)) - 1;
    return value >= lo && value <= hi;
}

std::int64_t Word::value() const
{
    if (width_ < 64 && bit(width_ - 1)) {
        return static_cast<std::int64_t>(bits_ | ~width_mask(width_));
    }
    return static_cast<std::int64_t>(bits_);
}

Word wrap_add(Word a, Word b)
{
    check_same_width(a, b, "wrap_add");
    return Word::from_bits(a.width(), a.bits() + b.bits());
}

Word wrap_sub(Word a, Word b)
{
    check_same_width(a, b, "wrap_sub");
    return Word::from_bits(a.width(), a.bits() - b.bits());
}

Word wrap_mul(Word a, Word b, unsigned out_width)
{
    if (out_width < a.width() || out_width < b.width()) {
        throw UsageError("wrap_mul: out_width narrower than an operand");
    }
    // The low 64 bits of the product of the sign-extended operands are exact
    // modulo 2^64, so truncating them is exact modulo 2^out_width.
    const auto product = static_cast<std::uint64_t>(a.value()) * static_cast<std::uint64_t>(b.value());
    return Word::from_bits(out_width, product);
}

Word bit_not(Word a)
{
    return Word::from_bits(a.width(), ~a.bits());
}

Word force_bit(Word a, unsigned bit, unsigned stuck)
{
    if (bit >= a.width()) {
        throw UsageError("force_bit: bit " + std::to_string(bit) + " out of range for width " +
                         std::to_string(a.width()));
    }
    if (stuck > 1) {
        throw UsageError("force_bit: stuck value must be 0 or 1");
    }
    const std::uint64_t mask = std::uint64_t{1} << bit;
    return Word::from_bits(a.width(), stuck ? (a.bits() | mask) : (a.bits() & ~mask));
}

bool is_bitwise_complement(Word a, Word b)
{
    check_same_width(a, b, "is_bitwise_complement");
    return a == bit_not(b);
}

}  // namespace stsa
