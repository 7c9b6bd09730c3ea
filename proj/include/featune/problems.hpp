#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "featune/expression.hpp"
#include "featune/random.hpp"

namespace featune::problems {

enum class ProblemKind : unsigned char { onemax, binvalue, leadingones, jump };

std::string_view to_string(ProblemKind kind) noexcept;
ProblemKind problem_from_string(std::string_view name); // throws std::invalid_argument

/// Packed bit vector. Bit i is x_{i+1}; for BinValue bit 0 is the most
/// significant position.
class Bitstring {
public:
    Bitstring() = default;
    explicit Bitstring(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    static Bitstring from_string(std::string_view bits); // "10110"
    static Bitstring random(std::size_t n, RandomStream& rng);

    std::size_t size() const noexcept { return n_; }
    bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i, bool v) noexcept
    {
        auto const mask = std::uint64_t { 1 } << (i & 63);
        words_[i >> 6] = v ? (words_[i >> 6] | mask) : (words_[i >> 6] & ~mask);
    }
    void flip(std::size_t i) noexcept { words_[i >> 6] ^= std::uint64_t { 1 } << (i & 63); }
    void complement() noexcept;

    std::size_t count_ones() const noexcept;
    std::size_t leading_ones() const noexcept;
    /// Position of the first zero at or after `start`, or n. Bits before
    /// `start` are assumed to be ones.
    std::size_t leading_ones_from(std::size_t start) const noexcept;
    std::size_t hamming_distance(Bitstring const& other) const noexcept;

    std::span<std::uint64_t const> words() const noexcept { return words_; }
    std::string to_string() const;

    friend bool operator==(Bitstring const&, Bitstring const&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

class ProblemInstance {
public:
    static ProblemInstance onemax(std::size_t n);
    static ProblemInstance binvalue(std::size_t n);
    static ProblemInstance leadingones(std::size_t n);
    static ProblemInstance jump(std::size_t m, std::size_t n);
    /// Builds an instance from its kind and feature map; validates the
    /// feature list and ranges.
    static ProblemInstance from_features(ProblemKind kind, expr::FeatureEnvironment const& features);

    ProblemKind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return m_; }
    expr::FeatureEnvironment const& features() const noexcept { return features_; }

    /// "n=100" or "m=2;n=10".
    std::string feature_label() const;

    friend bool operator==(ProblemInstance const& a, ProblemInstance const& b)
    {
        return a.kind_ == b.kind_ && a.n_ == b.n_ && a.m_ == b.m_;
    }

private:
    ProblemInstance(ProblemKind kind, std::size_t n, std::size_t m);

    ProblemKind kind_;
    std::size_t n_;
    std::size_t m_;
    expr::FeatureEnvironment features_;
};

/// Feature names declared by a problem kind, in sorted order.
std::vector<std::string> feature_names(ProblemKind kind);

/// OneMax: |x|. LeadingOnes: length of the 1-prefix. Jump(m,n): m+|x| when
/// |x| <= n-m or |x| = n, otherwise n-|x|. BinValue: sum 2^(n-i) x_i as a
/// double, truncated to the 53 most significant bits from the leading one,
/// so equal fitness implies equal leading bits.
double fitness(ProblemInstance const& instance, Bitstring const& x);

/// Fitness from the number of ones; only for OneMax and Jump.
double fitness_from_ones(ProblemInstance const& instance, std::size_t ones) noexcept;

/// Best attainable fitness (the value at the all-ones string).
double optimum(ProblemInstance const& instance);

/// Built-in training sets.
std::vector<ProblemInstance> training_set(ProblemKind kind);

} // namespace featune::problems
