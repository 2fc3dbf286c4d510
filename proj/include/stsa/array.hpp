// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

// Cycle-level model of a weight-stationary N:M sparse systolic tensor array.
//
// Every TPE (tensor processing element) owns four register classes: an
// M-element activation block that moves west to east, N weight registers,
// N weight-index registers driving the operand multiplexers, and an output
// register holding the partial sum that moves north to south. Each column
// also has an accumulator at the south edge. Stuck-at faults are applied
// whenever a register is read, so a faulty register looks the same to every
// consumer on every cycle.

#pragma once

#include "stsa/arith.hpp"
#include "stsa/matrix.hpp"
#include "stsa/sparsity.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stsa {

enum class SparsityMode {
    NofM,    // all N weight slots active
    OneOfM,  // only slot 0 active, the rest gated off
};

struct ArrayConfig {
    unsigned rows = 8;
    unsigned cols = 8;
    unsigned m = 4;
    unsigned n = 2;
    unsigned data_width = 16;
    unsigned acc_width = 32;
    SparsityMode mode = SparsityMode::NofM;

    unsigned active_slots() const { return mode == SparsityMode::OneOfM ? 1 : n; }
    /// ceil(log2 M), at least one bit.
    unsigned index_width() const;
    /// Throws UsageError if the fields are inconsistent.
    void validate() const;

    friend bool operator==(const ArrayConfig&, const ArrayConfig&) = default;
};

/// "N:M" for the active sparsity, e.g. "2:4" or "1:4".
std::string mode_string(const ArrayConfig& config);

enum class RegClass { Activation, Weight, WeightIndex, Output, EdgeAccumulator };

inline constexpr RegClass kAllRegClasses[] = {RegClass::Activation, RegClass::Weight, RegClass::WeightIndex,
                                              RegClass::Output, RegClass::EdgeAccumulator};

std::string_view to_string(RegClass reg);
/// Accepts the to_string() names and the short forms activation, weight,
/// index, output, edge (case-insensitive).
RegClass parse_reg_class(std::string_view name);

/// One permanent stuck-at fault. EdgeAccumulator sites use `col` only.
struct FaultSite {
    RegClass reg = RegClass::Output;
    unsigned row = 0;
    unsigned col = 0;
    unsigned element = 0;
    unsigned bit = 0;
    unsigned stuck = 0;

    friend bool operator==(const FaultSite&, const FaultSite&) = default;
};

/// Bit width of the register a site points at.
unsigned register_width(RegClass reg, const ArrayConfig& config);
/// Throws UsageError if the site does not exist in `config`.
void validate_site(const FaultSite& site, const ArrayConfig& config);

/// `class:row:col:element:bit:stuck`, e.g. "weight:3:5:1:7:1".
FaultSite parse_fault_spec(std::string_view spec);
std::string format_fault_spec(const FaultSite& site);

/// Register contents of one TPE.
struct TpeState {
    std::vector<Word> activation;
    std::vector<Word> weights;
    std::vector<Word> indexes;
    Word output;
};

/// Per-row west-edge inputs for one cycle. A row is either a bubble (zero
/// block) or an M-element block; `test4` marks the block that carries the
/// masking-gate control, which travels east alongside it.
class WestInputs {
  public:
    WestInputs(unsigned rows, unsigned m, unsigned data_width);

    void set_bubble(unsigned row);
    void set_block(unsigned row, std::span<const Word> block, bool test4 = false);

    unsigned rows() const { return static_cast<unsigned>(test4_.size()); }
    unsigned m() const { return m_; }
    std::span<const Word> block(unsigned row) const { return {blocks_.data() + row * m_, m_}; }
    bool test4(unsigned row) const { return test4_[row] != 0; }

  private:
    unsigned m_;
    unsigned data_width_;
    std::vector<Word> blocks_;
    std::vector<std::uint8_t> test4_;
};

struct ComputeResult {
    Matrix out;
    std::uint64_t cycles = 0;
};

class SystolicArray {
  public:
    explicit SystolicArray(ArrayConfig config);

    const ArrayConfig& config() const { return config_; }

    /// Loads block (i, j) into TPE (i, j) and clears activation and output
    /// registers. Takes `rows` cycles. The tile must carry active_slots()
    /// values per block; gated slots are loaded with zero.
    void load_weights(const SparseWeightTile& tile);
    bool weights_loaded() const { return loaded_; }

    /// Advances one clock. Returns the bottom-row output registers as they
    /// stood at the start of the cycle.
    std::vector<Word> step(const WestInputs& west, std::span<const Word> north_sums);

    /// Adds `addend` to a south output through column `col`'s edge
    /// accumulator and returns what the accumulator register reads back.
    Word edge_accumulate(unsigned col, Word raw, Word addend);

    void inject(const FaultSite& site);
    void clear_faults() { faults_.clear(); }
    std::span<const FaultSite> faults() const { return faults_; }

    /// Streams the rows of `a` (X x R*M) with the usual systolic skew and
    /// collects the X x C results. Takes X + R + C - 1 cycles.
    ComputeResult run_compute(const Matrix& a);

    /// Register contents as seen through any injected faults.
    TpeState tpe(unsigned row, unsigned col) const;
    /// Register contents as last written, ignoring faults.
    TpeState stored(unsigned row, unsigned col) const;

    std::uint64_t cycles() const { return cycles_; }

  private:
    std::size_t tpe_index(unsigned row, unsigned col) const { return row * config_.cols + col; }
    std::size_t act_index(unsigned row, unsigned col, unsigned e) const
    {
        return tpe_index(row, col) * config_.m + e;
    }
    std::size_t slot_index(unsigned row, unsigned col, unsigned k) const
    {
        return tpe_index(row, col) * config_.n + k;
    }

    Word read(RegClass reg, unsigned row, unsigned col, unsigned element, Word stored) const;

    ArrayConfig config_;
    bool loaded_ = false;
    std::uint64_t cycles_ = 0;

    std::vector<Word> activation_;
    std::vector<std::uint8_t> test4_;
    std::vector<Word> weights_;
    std::vector<Word> indexes_;
    std::vector<Word> output_;
    std::vector<Word> edge_;
    std::vector<FaultSite> faults_;
};

}  // namespace stsa
