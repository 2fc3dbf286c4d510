// SPDX-FileCopyrightText: © 2026 The stsa Authors
//
// SPDX-License-Identifier: Apache-2.0

#include "stsa/array.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

namespace stsa {

unsigned ArrayConfig::index_width() const
{
    unsigned bits = 1;
    while ((1U << bits) < m) {
        ++bits;
    }
    return bits;
}

void ArrayConfig::validate() const
{
    if (rows == 0 || cols == 0) {
        throw UsageError("config: array needs at least one row and column");
    }
    if (m == 0 || n == 0 || n > m) {
        throw UsageError("config: need 0 < n <= m");
    }
    if (data_width < 2 || data_width > 32) {
        throw UsageError("config: data_width must be in [2, 32]");
    }
    if (acc_width < data_width || acc_width > kMaxWordWidth) {
        throw UsageError("config: acc_width must be in [data_width, 64]");
    }
    if (!Word::fits(data_width, static_cast<std::int64_t>(m))) {
        throw UsageError("config: test vector [1..M] does not fit in data_width");
    }
}

std::string mode_string(const ArrayConfig& config)
{
    return std::to_string(config.active_slots()) + ":" + std::to_string(config.m);
}

std::string_view to_string(RegClass reg)
{
    switch (reg) {
    case RegClass::Activation:
        return "Activation";
    case RegClass::Weight:
        return "Weight";
    case RegClass::WeightIndex:
        return "WeightIndex";
    case RegClass::Output:
        return "Output";
    case RegClass::EdgeAccumulator:
        return "EdgeAccumulator";
    }
    return "?";
}

RegClass parse_reg_class(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "activation" || lower == "act") {
        return RegClass::Activation;
    }
    if (lower == "weight") {
        return RegClass::Weight;
    }
    if (lower == "weightindex" || lower == "index") {
        return RegClass::WeightIndex;
    }
    if (lower == "output") {
        return RegClass::Output;
    }
    if (lower == "edgeaccumulator" || lower == "edge") {
        return RegClass::EdgeAccumulator;
    }
    throw UsageError("unknown register class '" + std::string(name) + "'");
}

unsigned register_width(RegClass reg, const ArrayConfig& config)
{
    switch (reg) {
    case RegClass::Activation:
    case RegClass::Weight:
        return config.data_width;
    case RegClass::WeightIndex:
        return config.index_width();
    case RegClass::Output:
    case RegClass::EdgeAccumulator:
        return config.acc_width;
    }
    return 0;
}

void validate_site(const FaultSite& site, const ArrayConfig& config)
{
    const bool edge = site.reg == RegClass::EdgeAccumulator;
    unsigned elements = 1;
    if (site.reg == RegClass::Activation) {
        elements = config.m;
    } else if (site.reg == RegClass::Weight || site.reg == RegClass::WeightIndex) {
        elements = config.n;
    }
    if ((!edge && site.row >= config.rows) || (edge && site.row != 0) || site.col >= config.cols ||
        site.element >= elements || site.bit >= register_width(site.reg, config) || site.stuck > 1) {
        throw UsageError("fault site " + format_fault_spec(site) + " does not exist in this array");
    }
}

FaultSite parse_fault_spec(std::string_view spec)
{
    std::array<std::string_view, 6> parts;
    std::size_t count = 0;
    while (count < parts.size()) {
        const auto colon = spec.find(':');
        parts[count++] = spec.substr(0, colon);
        if (colon == std::string_view::npos) {
            spec = {};
            break;
        }
        spec.remove_prefix(colon + 1);
    }
    if (count != parts.size() || !spec.empty()) {
        throw UsageError("fault spec must be class:row:col:element:bit:stuck");
    }
    auto number = [](std::string_view s) {
        unsigned v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
            throw UsageError("fault spec: bad number '" + std::string(s) + "'");
        }
        return v;
    };
    FaultSite site;
    site.reg = parse_reg_class(parts[0]);
    site.row = number(parts[1]);
    site.col = number(parts[2]);
    site.element = number(parts[3]);
    site.bit = number(parts[4]);
    site.stuck = number(parts[5]);
    return site;
}

std::string format_fault_spec(const FaultSite& site)
{
    static constexpr std::string_view kShort[] = {"activation", "weight", "index", "output", "edge"};
    return std::string(kShort[static_cast<int>(site.reg)]) + ":" + std::to_string(site.row) + ":" +
           std::to_string(site.col) + ":" + std::to_string(site.element) + ":" + std::to_string(site.bit) +
           ":" + std::to_string(site.stuck);
}

WestInputs::WestInputs(unsigned rows, unsigned m, unsigned data_width)
    : m_(m), data_width_(data_width), blocks_(static_cast<std::size_t>(rows) * m, Word::zero(data_width)),
      test4_(rows, 0)
{
}

void WestInputs::set_bubble(unsigned row)
{
    std::fill_n(blocks_.begin() + row * m_, m_, Word::zero(data_width_));
    test4_[row] = 0;
}

void WestInputs::set_block(unsigned row, std::span<const Word> block, bool test4)
{
    if (block.size() != m_) {
        throw UsageError("west input block must have M elements");
    }
    for (unsigned e = 0; e < m_; ++e) {
        if (block[e].width() != data_width_) {
            throw UsageError("west input block has the wrong data width");
        }
        blocks_[row * m_ + e] = block[e];
    }
    test4_[row] = test4 ? 1 : 0;
}

SystolicArray::SystolicArray(ArrayConfig config) : config_(config)
{
    config_.validate();
    const std::size_t tpes = static_cast<std::size_t>(config_.rows) * config_.cols;
    activation_.assign(tpes * config_.m, Word::zero(config_.data_width));
    test4_.assign(tpes, 0);
    weights_.assign(tpes * config_.n, Word::zero(config_.data_width));
    indexes_.assign(tpes * config_.n, Word::zero(config_.index_width()));
    output_.assign(tpes, Word::zero(config_.acc_width));
    edge_.assign(config_.cols, Word::zero(config_.acc_width));
}

Word SystolicArray::read(RegClass reg, unsigned row, unsigned col, unsigned element, Word stored) const
{
    for (const FaultSite& f : faults_) {
        if (f.reg == reg && f.row == row && f.col == col && f.element == element) {
            stored = force_bit(stored, f.bit, f.stuck);
        }
    }
    return stored;
}

void SystolicArray::load_weights(const SparseWeightTile& tile)
{
    if (tile.rows() != config_.rows || tile.cols() != config_.cols || tile.m() != config_.m ||
        tile.n() != config_.active_slots() || tile.data_width() != config_.data_width) {
        throw UsageError("load_weights: tile shape does not match the array configuration");
    }
    for (unsigned i = 0; i < config_.rows; ++i) {
        for (unsigned j = 0; j < config_.cols; ++j) {
            const SparseBlock& b = tile.block(i, j);
            for (unsigned k = 0; k < config_.n; ++k) {
                const bool active = k < tile.n();
                weights_[slot_index(i, j, k)] = active ? b.values[k] : Word::zero(config_.data_width);
                indexes_[slot_index(i, j, k)] =
                    Word(config_.index_width(), active ? static_cast<std::int64_t>(b.indexes[k]) : 0);
            }
        }
    }
    std::fill(activation_.begin(), activation_.end(), Word::zero(config_.data_width));
    std::fill(test4_.begin(), test4_.end(), 0);
    std::fill(output_.begin(), output_.end(), Word::zero(config_.acc_width));
    std::fill(edge_.begin(), edge_.end(), Word::zero(config_.acc_width));
    cycles_ += config_.rows;
    loaded_ = true;
}

std::vector<Word> SystolicArray::step(const WestInputs& west, std::span<const Word> north_sums)
{
    const unsigned R = config_.rows;
    const unsigned C = config_.cols;
    const unsigned M = config_.m;
    if (!loaded_) {
        throw UsageError("step: weights not loaded");
    }
    if (west.rows() != R || west.m() != M || north_sums.size() != C) {
        throw UsageError("step: port sizes do not match the array");
    }

    std::vector<Word> south;
    south.reserve(C);
    for (unsigned c = 0; c < C; ++c) {
        south.push_back(read(RegClass::Output, R - 1, c, 0, output_[tpe_index(R - 1, c)]));
    }

    // Activation blocks shift one TPE east; walk east to west so each TPE
    // still sees its west neighbour's previous contents.
    for (unsigned r = 0; r < R; ++r) {
        for (unsigned c = C - 1; c > 0; --c) {
            for (unsigned e = 0; e < M; ++e) {
                activation_[act_index(r, c, e)] =
                    read(RegClass::Activation, r, c - 1, e, activation_[act_index(r, c - 1, e)]);
            }
            test4_[tpe_index(r, c)] = test4_[tpe_index(r, c - 1)];
        }
        const auto block = west.block(r);
        std::copy(block.begin(), block.end(), activation_.begin() + act_index(r, 0, 0));
        test4_[tpe_index(r, 0)] = west.test4(r) ? 1 : 0;
    }

    // Partial sums move one TPE south; walk bottom-up for the same reason.
    const unsigned slots = config_.active_slots();
    for (unsigned c = 0; c < C; ++c) {
        for (unsigned r = R; r-- > 0;) {
            Word sum = r == 0 ? north_sums[c] : read(RegClass::Output, r - 1, c, 0, output_[tpe_index(r - 1, c)]);
            if (sum.width() != config_.acc_width) {
                throw UsageError("step: north sums must be acc_width words");
            }
            const bool masked = test4_[tpe_index(r, c)] != 0;
            for (unsigned k = 0; k < slots; ++k) {
                const std::uint64_t select =
                    masked ? c % M : read(RegClass::WeightIndex, r, c, k, indexes_[slot_index(r, c, k)]).bits();
                // A select code past the end of the block drives a zero operand.
                const Word operand = select < M ? read(RegClass::Activation, r, c, static_cast<unsigned>(select),
                                                       activation_[act_index(r, c, static_cast<unsigned>(select))])
                                                : Word::zero(config_.data_width);
                const Word weight = read(RegClass::Weight, r, c, k, weights_[slot_index(r, c, k)]);
                sum = wrap_add(sum, wrap_mul(weight, operand, config_.acc_width));
            }
            output_[tpe_index(r, c)] = sum;
        }
    }

    ++cycles_;
    return south;
}

Word SystolicArray::edge_accumulate(unsigned col, Word raw, Word addend)
{
    if (col >= config_.cols) {
        throw UsageError("edge_accumulate: column out of range");
    }
    edge_[col] = wrap_add(raw, addend);
    return read(RegClass::EdgeAccumulator, 0, col, 0, edge_[col]);
}

void SystolicArray::inject(const FaultSite& site)
{
    validate_site(site, config_);
    faults_.push_back(site);
}

ComputeResult SystolicArray::run_compute(const Matrix& a)
{
    const unsigned R = config_.rows;
    const unsigned C = config_.cols;
    const unsigned M = config_.m;
    if (a.cols != static_cast<std::size_t>(R) * M) {
        throw UsageError("run_compute: A must have rows*M columns");
    }
    if (!loaded_) {
        throw UsageError("run_compute: weights not loaded");
    }

    std::vector<Word> rows_as_words;
    rows_as_words.reserve(a.data.size());
    for (std::int64_t v : a.data) {
        if (!Word::fits(config_.data_width, v)) {
            throw UsageError("run_compute: activation " + std::to_string(v) + " does not fit data_width");
        }
        rows_as_words.emplace_back(config_.data_width, v);
    }

    const std::size_t X = a.rows;
    ComputeResult result{Matrix(X, C), 0};
    if (X == 0) {
        return result;
    }
    WestInputs west(R, M, config_.data_width);
    const std::vector<Word> north(C, Word::zero(config_.acc_width));
    const Word no_addend = Word::zero(config_.acc_width);
    const std::uint64_t start = cycles_;
    const std::size_t total = X + R + C - 1;

    for (std::size_t t = 0; t < total; ++t) {
        for (unsigned r = 0; r < R; ++r) {
            if (t >= r && t - r < X) {
                const std::size_t x = t - r;
                west.set_block(r, std::span<const Word>(rows_as_words).subspan(x * a.cols + r * M, M));
            } else {
                west.set_bubble(r);
            }
        }
        const std::vector<Word> south = step(west, north);
        for (unsigned c = 0; c < C; ++c) {
            if (t >= static_cast<std::size_t>(R) + c && t - R - c < X) {
                result.out(t - R - c, c) = edge_accumulate(c, south[c], no_addend).value();
            }
        }
    }
    result.cycles = cycles_ - start;
    return result;
}

TpeState SystolicArray::stored(unsigned row, unsigned col) const
{
    if (row >= config_.rows || col >= config_.cols) {
        throw UsageError("tpe coordinates out of range");
    }
    TpeState s{{}, {}, {}, output_[tpe_index(row, col)]};
    for (unsigned e = 0; e < config_.m; ++e) {
        s.activation.push_back(activation_[act_index(row, col, e)]);
    }
    for (unsigned k = 0; k < config_.n; ++k) {
        s.weights.push_back(weights_[slot_index(row, col, k)]);
        s.indexes.push_back(indexes_[slot_index(row, col, k)]);
    }
    return s;
}

TpeState SystolicArray::tpe(unsigned row, unsigned col) const
{
    TpeState s = stored(row, col);
    for (unsigned e = 0; e < config_.m; ++e) {
        s.activation[e] = read(RegClass::Activation, row, col, e, s.activation[e]);
    }
    for (unsigned k = 0; k < config_.n; ++k) {
        s.weights[k] = read(RegClass::Weight, row, col, k, s.weights[k]);
        s.indexes[k] = read(RegClass::WeightIndex, row, col, k, s.indexes[k]);
    }
    s.output = read(RegClass::Output, row, col, 0, s.output);
    return s;
}

}  // namespace stsa
