#include "mxpl/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace mxpl {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// 53-bit uniform strictly inside (0, 1).
inline double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline std::uint64_t join(std::uint32_t hi, std::uint32_t lo) noexcept {
    return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

inline void box_muller(std::uint64_t a, std::uint64_t b, double& z0, double& z1) noexcept {
    const double u1 = to_open_unit(a);
    const double u2 = to_open_unit(b);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(theta);
    z1 = r * std::sin(theta);
}

// Structure-of-arrays Philox so the rounds vectorize across lanes.
template <int N>
void philox_lanes(std::array<std::uint32_t, N>& c0, std::array<std::uint32_t, N>& c1, std::array<std::uint32_t, N>& c2,
                  std::array<std::uint32_t, N>& c3, Philox4x32::Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        for (int l = 0; l < N; ++l) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c0[l];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c2[l];
            const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1[l] ^ key[0];
            const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3[l] ^ key[1];
            c1[l] = static_cast<std::uint32_t>(p1);
            c3[l] = static_cast<std::uint32_t>(p0);
            c0[l] = n0;
            c2[l] = n2;
        }
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

Philox4x32::Key derive_key(std::uint64_t seed, std::uint64_t replicate) noexcept {
    const std::uint64_t h = splitmix64(splitmix64(seed) ^ (replicate * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
    return {static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
}

NormalField::NormalField(std::uint64_t seed, std::uint64_t replicate, Purpose purpose) noexcept
    : key_(derive_key(seed, replicate)), purpose_(static_cast<std::uint32_t>(purpose)) {}

double NormalField::operator()(std::uint64_t row, std::uint32_t col) const noexcept {
    const auto out = Philox4x32::block(
        {col >> 1, static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), purpose_}, key_);
    double z0, z1;
    box_muller(join(out[0], out[1]), join(out[2], out[3]), z0, z1);
    return (col & 1u) ? z1 : z0;
}

void NormalField::fill_row(std::uint64_t row, std::uint32_t first_col, std::uint32_t count, double* out) const noexcept {
    const auto row_lo = static_cast<std::uint32_t>(row);
    const auto row_hi = static_cast<std::uint32_t>(row >> 32);
    std::uint32_t col = first_col;
    const std::uint32_t end = first_col + count;
    if (col < end && (col & 1u)) {
        *out++ = (*this)(row, col);
        ++col;
    }
    constexpr int kBatch = 16;
    while (col + 1 < end) {
        const int lanes = static_cast<int>(std::min<std::uint32_t>(kBatch, (end - col) / 2));
        std::array<std::uint32_t, kBatch> c0{}, c1{}, c2{}, c3{};
        for (int l = 0; l < kBatch; ++l) {
            c0[l] = (col >> 1) + static_cast<std::uint32_t>(l);
            c1[l] = row_lo;
            c2[l] = row_hi;
            c3[l] = purpose_;
        }
        philox_lanes<kBatch>(c0, c1, c2, c3, key_);
        for (int l = 0; l < lanes; ++l) {
            box_muller(join(c0[l], c1[l]), join(c2[l], c3[l]), out[0], out[1]);
            out += 2;
        }
        col += 2 * static_cast<std::uint32_t>(lanes);
    }
    if (col < end) *out = (*this)(row, col);
}

double NormalField::uniform(std::uint64_t row, std::uint32_t col) const noexcept {
    // High bit of the purpose word separates the uniform space from the normal space.
    const auto out = Philox4x32::block(
        {col, static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), purpose_ | 0x80000000u}, key_);
    return to_open_unit(join(out[0], out[1]));
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t replicate, Purpose purpose,
                             std::uint64_t substream) noexcept
    : key_(derive_key(seed, replicate)),
      ctr_{0u, static_cast<std::uint32_t>(substream), static_cast<std::uint32_t>(substream >> 32),
           static_cast<std::uint32_t>(purpose) | 0x40000000u} {}

void CounterStream::refill() noexcept {
    const auto out = Philox4x32::block(ctr_, key_);
    ++ctr_[0];
    buffer_ = {join(out[0], out[1]), join(out[2], out[3])};
    available_ = 2;
}

CounterStream::result_type CounterStream::operator()() noexcept {
    if (available_ == 0) refill();
    return buffer_[static_cast<std::size_t>(--available_)];
}

double CounterStream::uniform() noexcept { return to_open_unit((*this)()); }

double CounterStream::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const std::uint64_t a = (*this)();
    const std::uint64_t b = (*this)();
    double z0;
    box_muller(a, b, z0, spare_normal_);
    has_spare_ = true;
    return z0;
}

}  // namespace mxpl
