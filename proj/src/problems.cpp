#include "featune/problems.hpp"

#include <bit>
#include <cmath>
#include <utility>

namespace featune::problems {

namespace {

std::uint64_t reverse_bits(std::uint64_t x) noexcept
{
    x = ((x >> 1) & 0x5555555555555555ULL) | ((x & 0x5555555555555555ULL) << 1);
    x = ((x >> 2) & 0x3333333333333333ULL) | ((x & 0x3333333333333333ULL) << 2);
    x = ((x >> 4) & 0x0F0F0F0F0F0F0F0FULL) | ((x & 0x0F0F0F0F0F0F0F0FULL) << 4);
    return __builtin_bswap64(x);
}

double binvalue(Bitstring const& x) noexcept
{
    auto const words = x.words();
    std::size_t w = 0;
    while (w < words.size() && words[w] == 0) {
        ++w;
    }
    if (w == words.size()) {
        return 0.0;
    }
    auto const shift = static_cast<unsigned>(std::countr_zero(words[w]));
    auto const leading = w * 64 + shift; // 0-based position of x's first one
    auto window = words[w] >> shift;
    if (shift != 0 && w + 1 < words.size()) {
        window |= words[w + 1] << (64 - shift);
    }
    auto const mantissa = reverse_bits(window) >> 11; // 53 bits, leading one on top
    auto const exponent = static_cast<int>(x.size()) - 1 - static_cast<int>(leading) - 52;
    return std::ldexp(static_cast<double>(mantissa), exponent);
}

double jump_value(std::size_t m, std::size_t n, std::size_t ones) noexcept
{
    if (ones <= n - m || ones == n) {
        return static_cast<double>(m + ones);
    }
    return static_cast<double>(n - ones);
}

} // namespace

std::string_view to_string(ProblemKind kind) noexcept
{
    switch (kind) {
    case ProblemKind::onemax: return "onemax";
    case ProblemKind::binvalue: return "binvalue";
    case ProblemKind::leadingones: return "leadingones";
    case ProblemKind::jump: return "jump";
    }
    return "?";
}

ProblemKind problem_from_string(std::string_view name)
{
    for (auto k : { ProblemKind::onemax, ProblemKind::binvalue, ProblemKind::leadingones, ProblemKind::jump }) {
        if (name == to_string(k)) {
            return k;
        }
    }
    throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

Bitstring Bitstring::from_string(std::string_view bits)
{
    Bitstring x(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != '0' && bits[i] != '1') {
            throw std::invalid_argument("bitstrings contain only '0' and '1'");
        }
        x.set(i, bits[i] == '1');
    }
    return x;
}

Bitstring Bitstring::random(std::size_t n, RandomStream& rng)
{
    Bitstring x(n);
    for (auto& w : x.words_) {
        w = rng();
    }
    if (auto const tail = n & 63; tail != 0) {
        x.words_.back() &= (std::uint64_t { 1 } << tail) - 1;
    }
    return x;
}

void Bitstring::complement() noexcept
{
    for (auto& w : words_) {
        w = ~w;
    }
    if (auto const tail = n_ & 63; tail != 0) {
        words_.back() &= (std::uint64_t { 1 } << tail) - 1;
    }
}

std::size_t Bitstring::count_ones() const noexcept
{
    std::size_t total = 0;
    for (auto w : words_) {
        total += static_cast<std::size_t>(std::popcount(w));
    }
    return total;
}

std::size_t Bitstring::leading_ones() const noexcept { return leading_ones_from(0); }

std::size_t Bitstring::leading_ones_from(std::size_t start) const noexcept
{
    // assumes bits [0, start) are all ones
    auto i = start;
    while (i < n_) {
        auto const w = words_[i >> 6] >> (i & 63);
        auto const run = static_cast<std::size_t>(std::countr_one(w));
        auto const available = 64 - (i & 63);
        if (run < available) {
            i += run;
            break;
        }
        i += available;
    }
    return i < n_ ? i : n_;
}

std::size_t Bitstring::hamming_distance(Bitstring const& other) const noexcept
{
    std::size_t d = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) {
        d += static_cast<std::size_t>(std::popcount(words_[w] ^ other.words_[w]));
    }
    return d;
}

std::string Bitstring::to_string() const
{
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i) {
        if (get(i)) {
            s[i] = '1';
        }
    }
    return s;
}

ProblemInstance::ProblemInstance(ProblemKind kind, std::size_t n, std::size_t m)
    : kind_(kind)
    , n_(n)
    , m_(m)
{
    if (n < 1) {
        throw std::invalid_argument("instances need n >= 1");
    }
    features_.bind("n", static_cast<double>(n));
    if (kind == ProblemKind::jump) {
        if (m < 2 || m >= n) {
            throw std::invalid_argument("jump instances need 2 <= m < n");
        }
        features_.bind("m", static_cast<double>(m));
    }
}

ProblemInstance ProblemInstance::onemax(std::size_t n) { return { ProblemKind::onemax, n, 0 }; }
ProblemInstance ProblemInstance::binvalue(std::size_t n) { return { ProblemKind::binvalue, n, 0 }; }
ProblemInstance ProblemInstance::leadingones(std::size_t n) { return { ProblemKind::leadingones, n, 0 }; }
ProblemInstance ProblemInstance::jump(std::size_t m, std::size_t n) { return { ProblemKind::jump, n, m }; }

ProblemInstance ProblemInstance::from_features(ProblemKind kind, expr::FeatureEnvironment const& features)
{
    auto const expected = feature_names(kind);
    if (features.values().size() != expected.size()) {
        throw std::invalid_argument(std::string(to_string(kind)) + " instances take exactly the features "
                                    + (expected.size() == 1 ? "{n}" : "{m, n}"));
    }
    auto integral = [&](std::string const& name) {
        if (!features.contains(name)) {
            throw std::invalid_argument("missing feature '" + name + "'");
        }
        auto v = features.at(name);
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
            throw std::invalid_argument("feature '" + name + "' must be a positive integer");
        }
        return static_cast<std::size_t>(v);
    };
    auto const n = integral("n");
    auto const m = kind == ProblemKind::jump ? integral("m") : 0;
    return { kind, n, m };
}

std::string ProblemInstance::feature_label() const
{
    if (kind_ == ProblemKind::jump) {
        return "m=" + std::to_string(m_) + ";n=" + std::to_string(n_);
    }
    return "n=" + std::to_string(n_);
}

std::vector<std::string> feature_names(ProblemKind kind)
{
    if (kind == ProblemKind::jump) {
        return { "m", "n" };
    }
    return { "n" };
}

double fitness(ProblemInstance const& instance, Bitstring const& x)
{
    if (x.size() != instance.n()) {
        throw std::invalid_argument("bitstring length " + std::to_string(x.size()) + " does not match n = "
                                    + std::to_string(instance.n()));
    }
    switch (instance.kind()) {
    case ProblemKind::onemax: return static_cast<double>(x.count_ones());
    case ProblemKind::leadingones: return static_cast<double>(x.leading_ones());
    case ProblemKind::binvalue: return binvalue(x);
    case ProblemKind::jump: return jump_value(instance.m(), instance.n(), x.count_ones());
    }
    return 0.0;
}

double fitness_from_ones(ProblemInstance const& instance, std::size_t ones) noexcept
{
    if (instance.kind() == ProblemKind::jump) {
        return jump_value(instance.m(), instance.n(), ones);
    }
    return static_cast<double>(ones);
}

double optimum(ProblemInstance const& instance)
{
    switch (instance.kind()) {
    case ProblemKind::onemax:
    case ProblemKind::leadingones: return static_cast<double>(instance.n());
    case ProblemKind::jump: return static_cast<double>(instance.n() + instance.m());
    case ProblemKind::binvalue: {
        Bitstring ones(instance.n());
        ones.complement();
        return binvalue(ones);
    }
    }
    return 0.0;
}

std::vector<ProblemInstance> training_set(ProblemKind kind)
{
    std::vector<ProblemInstance> out;
    if (kind == ProblemKind::jump) {
        constexpr std::pair<std::size_t, std::size_t> pairs[] = {
            { 2, 10 }, { 3, 10 }, { 4, 10 }, { 5, 10 }, { 2, 20 }, { 3, 20 },
            { 4, 20 }, { 2, 50 }, { 3, 50 }, { 2, 100 }, { 3, 100 }, { 2, 200 },
        };
        for (auto [m, n] : pairs) {
            out.push_back(ProblemInstance::jump(m, n));
        }
        return out;
    }
    for (std::size_t n : { 10, 20, 50, 100, 200, 500 }) {
        out.push_back(ProblemInstance::from_features(kind, { { "n", static_cast<double>(n) } }));
    }
    return out;
}

} // namespace featune::problems
