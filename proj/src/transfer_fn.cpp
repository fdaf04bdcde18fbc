#include "neuroctl/transfer_fn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace neuroctl {

namespace {

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] += a[i] * b[j];
    return out;
}

void strip_leading_zeros(std::vector<double>& c) {
    auto first = std::find_if(c.begin(), c.end(), [](double v) { return v != 0.0; });
    if (first == c.end()) {
        c.assign(1, 0.0);
        return;
    }
    c.erase(c.begin(), first);
}

std::string poly_to_string(const std::vector<double>& c) {
    std::ostringstream os;
    os.precision(12);
    const std::size_t deg = c.size() - 1;
    bool first = true;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double v = c[i];
        if (v == 0.0 && c.size() > 1)
            continue;
        const std::size_t p = deg - i;
        if (!first)
            os << (v < 0 ? " - " : " + ");
        else if (v < 0)
            os << "-";
        const double mag = std::abs(v);
        if (p == 0) {
            os << mag;
        } else {
            if (mag != 1.0)
                os << mag << "*";
            os << "z";
            if (p >= 2)
                os << "^" << p;
        }
        first = false;
    }
    if (first)
        os << "0";
    return os.str();
}

} // namespace

RationalTransferFunction::RationalTransferFunction(std::vector<double> num, std::vector<double> den)
    : num_(std::move(num)), den_(std::move(den)) {
    if (num_.empty() || den_.empty())
        throw std::invalid_argument("transfer function coefficients must be non-empty");
    for (double v : num_)
        if (!std::isfinite(v))
            throw std::invalid_argument("non-finite numerator coefficient");
    for (double v : den_)
        if (!std::isfinite(v))
            throw std::invalid_argument("non-finite denominator coefficient");
    if (den_.front() == 0.0)
        throw std::invalid_argument("denominator leading coefficient must be nonzero");
    strip_leading_zeros(num_);
    if (num_.size() > den_.size())
        throw std::invalid_argument("transfer function must be proper");
    const double lead = den_.front();
    for (double& v : den_)
        v /= lead;
    for (double& v : num_)
        v /= lead;
}

RationalTransferFunction RationalTransferFunction::constant(double value) {
    return RationalTransferFunction({value}, {1.0});
}

double RationalTransferFunction::feedthrough() const {
    return num_.size() == den_.size() && !is_zero() ? num_.front() : 0.0;
}

std::complex<double> RationalTransferFunction::evaluate(std::complex<double> z) const {
    auto horner = [z](const std::vector<double>& c) {
        std::complex<double> acc = 0.0;
        for (double v : c)
            acc = acc * z + v;
        return acc;
    };
    return horner(num_) / horner(den_);
}

std::string RationalTransferFunction::to_string() const {
    return "(" + poly_to_string(num_) + ") / (" + poly_to_string(den_) + ")";
}

std::size_t relative_degree(const RationalTransferFunction& g) {
    if (g.is_zero())
        throw std::domain_error("relative degree of the zero function is undefined");
    return g.den_degree() - g.num_degree();
}

RationalTransferFunction multiply(const RationalTransferFunction& a, const RationalTransferFunction& b) {
    return {convolve(a.num(), b.num()), convolve(a.den(), b.den())};
}

std::vector<double> impulse_response(const RationalTransferFunction& g, std::size_t n) {
    // Pad the numerator to the denominator's length so both are polynomials in
    // z^-1 of the same order; den is monic so the recursion needs no division.
    const std::size_t order = g.den_degree();
    std::vector<double> b(order + 1, 0.0);
    std::copy(g.num().begin(), g.num().end(), b.begin() + static_cast<std::ptrdiff_t>(order - g.num_degree()));
    const auto& a = g.den();

    std::vector<double> h(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double v = k <= order ? b[k] : 0.0;
        for (std::size_t j = 1; j <= std::min(k, order); ++j)
            v -= a[j] * h[k - j];
        h[k] = v;
    }
    return h;
}

bool approx_equal(const RationalTransferFunction& a, const RationalTransferFunction& b, double tol) {
    if (a.den().size() != b.den().size())
        return false;
    // Numerators may differ in stored length when a leading coefficient rounds to zero.
    std::vector<double> na(a.den().size(), 0.0), nb(b.den().size(), 0.0);
    std::copy(a.num().rbegin(), a.num().rend(), na.rbegin());
    std::copy(b.num().rbegin(), b.num().rend(), nb.rbegin());
    for (std::size_t i = 0; i < na.size(); ++i) {
        if (std::abs(na[i] - nb[i]) > tol || std::abs(a.den()[i] - b.den()[i]) > tol)
            return false;
    }
    return true;
}

void validate(const DecompositionParams& p) {
    if (p.c1 == 0.0 || p.c3 == 0.0 || !std::isfinite(p.c1) || !std::isfinite(p.c3))
        throw std::invalid_argument("relay gains c1 and c3 must be finite and nonzero");
    if (!(std::abs(p.eps1) < 1.0) || !(std::abs(p.eps3) < 1.0))
        throw std::invalid_argument("relay poles eps1 and eps3 must lie strictly inside the unit circle");
}

Decomposition decompose(const RationalTransferFunction& g, const DecompositionParams& p) {
    validate(p);
    if (g.den_degree() != 2 || g.num_degree() != 0 || g.is_zero())
        throw std::invalid_argument("decompose expects k0 / (z^2 - k1 z - k2) with k0 != 0");

    const double k0 = g.num()[0];
    const double core_gain = k0 / (p.c1 * p.c3);
    RationalTransferFunction g1({p.c1}, {1.0, -p.eps1});
    RationalTransferFunction g3({p.c3}, {1.0, -p.eps3});
    RationalTransferFunction g2(
        {core_gain, -core_gain * (p.eps1 + p.eps3), core_gain * p.eps1 * p.eps3}, g.den());
    return {std::move(g1), std::move(g2), std::move(g3)};
}

} // namespace neuroctl
