#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace neuroctl {

// Scalar rational function of z. Coefficients are stored in descending powers
// of z; the denominator is kept monic and the numerator has no leading zeros
// (the zero function is num == {0}). Only proper functions are representable.
class RationalTransferFunction {
public:
    RationalTransferFunction(std::vector<double> num, std::vector<double> den);

    static RationalTransferFunction constant(double value);
    static RationalTransferFunction zero() { return constant(0.0); }

    [[nodiscard]] const std::vector<double>& num() const { return num_; }
    [[nodiscard]] const std::vector<double>& den() const { return den_; }

    [[nodiscard]] std::size_t num_degree() const { return num_.size() - 1; }
    [[nodiscard]] std::size_t den_degree() const { return den_.size() - 1; }
    [[nodiscard]] bool is_zero() const { return num_.size() == 1 && num_[0] == 0.0; }

    // Value at z -> infinity.
    [[nodiscard]] double feedthrough() const;
    [[nodiscard]] std::complex<double> evaluate(std::complex<double> z) const;

    [[nodiscard]] std::string to_string() const;

private:
    std::vector<double> num_;
    std::vector<double> den_;
};

// Throws std::domain_error for the zero function.
[[nodiscard]] std::size_t relative_degree(const RationalTransferFunction& g);

// Plain polynomial products; no pole-zero cancellation.
[[nodiscard]] RationalTransferFunction multiply(const RationalTransferFunction& a, const RationalTransferFunction& b);

// h(0..n-1) by long division of num/den in z^-1.
[[nodiscard]] std::vector<double> impulse_response(const RationalTransferFunction& g, std::size_t n);

// Coefficient-wise comparison; both functions must have matching degrees.
[[nodiscard]] bool approx_equal(const RationalTransferFunction& a, const RationalTransferFunction& b,
                                double tol);

// Relay-stage parameters for splitting a relative-degree-2 controller into
// input relay, relative-degree-0 core, and output relay.
struct DecompositionParams {
    double c1 = 1.0;
    double c3 = 1.0;
    double eps1 = 0.0;
    double eps3 = 0.0;
};

void validate(const DecompositionParams& p);

struct Decomposition {
    RationalTransferFunction g1; // c1 / (z - eps1)
    RationalTransferFunction g2; // biproper core
    RationalTransferFunction g3; // c3 / (z - eps3)
};

// g must be k0 / (z^2 - k1 z - k2) with k0 != 0. The product g3 * g2 * g1
// reproduces g exactly.
[[nodiscard]] Decomposition decompose(const RationalTransferFunction& g, const DecompositionParams& p);

} // namespace neuroctl
