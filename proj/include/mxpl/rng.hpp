#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mxpl {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Every output block is a pure function of (key, counter), which lets the
/// generators below address individual matrix entries directly. That keeps
/// replicate output independent of thread count and of the order in which
/// rows or columns are materialized.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

/// Stream identifiers. Each purpose gets its own disjoint counter space.
enum class Purpose : std::uint32_t {
    design = 1,       // covariate entries X / Z (and eps in the last column)
    coefficient = 2,  // per-coordinate draws from the signal mixture
    raw_design = 3,   // retrospective raw draws before screening
    knockoff = 4,
    resample = 5,
    sphere = 6,
    generic = 7,
};

/// Mixes (seed, replicate) into a Philox key.
Philox4x32::Key derive_key(std::uint64_t seed, std::uint64_t replicate) noexcept;

/// Entry-addressable standard normal field: value(row, col) is a fixed
/// function of (key, purpose, row, col). Two normals come out of every
/// Philox block through Box-Muller.
class NormalField {
public:
    NormalField(std::uint64_t seed, std::uint64_t replicate, Purpose purpose) noexcept;

    double operator()(std::uint64_t row, std::uint32_t col) const noexcept;

    /// Fills out[k] = value(row, first_col + k) for k < count.
    void fill_row(std::uint64_t row, std::uint32_t first_col, std::uint32_t count, double* out) const noexcept;

    /// Uniform(0,1) addressed the same way; independent of the normal values.
    double uniform(std::uint64_t row, std::uint32_t col) const noexcept;

private:
    Philox4x32::Key key_;
    std::uint32_t purpose_;
};

/// Sequential stream with the UniformRandomBitGenerator interface, for use
/// with <random> distributions (gamma, chi-square) where entry addressing is
/// not needed.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t seed, std::uint64_t replicate, Purpose purpose, std::uint64_t substream = 0) noexcept;

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    double uniform() noexcept;  // (0, 1)
    double normal() noexcept;

private:
    void refill() noexcept;

    Philox4x32::Key key_;
    Philox4x32::Counter ctr_;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace mxpl
