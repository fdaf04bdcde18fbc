#include "neuroctl/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace neuroctl {

namespace {

std::string format_value(double v) {
    if (v == 0.0)
        v = 0.0; // no "-0" in exported traces
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Uniform stepping interface over the three controller representations.
class Stepper {
public:
    virtual ~Stepper() = default;
    [[nodiscard]] virtual double output(double delta_f) const = 0;
    virtual void advance(double delta_f) = 0;
    [[nodiscard]] virtual const std::vector<double>* rates() const { return nullptr; }
};

class GainsStepper final : public Stepper {
public:
    explicit GainsStepper(const OptimalGains& g) : k_(g.k), stages_(g.k.size() - 1, 0.0) {}

    double output(double) const override { return stages_.back(); }
    void advance(double delta_f) override {
        double mu = k_[0] * delta_f;
        for (std::size_t i = 0; i < stages_.size(); ++i)
            mu += k_[i + 1] * stages_[i];
        std::rotate(stages_.rbegin(), stages_.rbegin() + 1, stages_.rend());
        stages_.front() = mu;
    }

private:
    std::vector<double> k_;
    std::vector<double> stages_; // gamma_{T-1}, ..., gamma_1, delta_r
};

class RealizationStepper final : public Stepper {
public:
    explicit RealizationStepper(const Realization& r) : runner_(r) {}
    double output(double u) const override { return runner_.output(u); }
    void advance(double u) override { runner_.advance(u); }

private:
    RealizationRunner runner_;
};

class CircuitStepper final : public Stepper {
public:
    explicit CircuitStepper(const NeuralCircuit& c) : runner_(c) {}
    double output(double u) const override { return runner_.output(u); }
    void advance(double u) override { runner_.advance(u); }
    const std::vector<double>* rates() const override { return &runner_.rates(); }

private:
    CircuitRunner runner_;
};

} // namespace

double Disturbance::at(std::size_t t) const {
    if (kind == Kind::pulse && t >= start && t < start + duration)
        return amplitude;
    return 0.0;
}

Disturbance pulse(double amplitude, std::size_t start, std::size_t duration) {
    if (duration == 0)
        throw std::invalid_argument("pulse duration must be at least one step");
    if (!std::isfinite(amplitude))
        throw std::invalid_argument("pulse amplitude must be finite");
    return {Disturbance::Kind::pulse, amplitude, start, duration};
}

Disturbance no_disturbance() { return {}; }

std::vector<double> ClosedLoopTrace::f_abs(const OperatingPoint& op) const {
    std::vector<double> out(delta_f);
    for (double& v : out)
        v += op.f_bar;
    return out;
}

std::vector<double> ClosedLoopTrace::r_abs(const OperatingPoint& op) const {
    std::vector<double> out(delta_r);
    for (double& v : out)
        v += op.r_bar;
    return out;
}

std::optional<std::size_t> controller_relative_degree(const Controller& controller) {
    const RationalTransferFunction g = std::visit(
        [](const auto& c) -> RationalTransferFunction {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OptimalGains>) {
                if (c.k.size() < 2)
                    throw std::invalid_argument("gain vector must cover at least one delay stage");
                if (c.k0() == 0.0)
                    return RationalTransferFunction::zero();
                return gains_to_tf(c);
            } else if constexpr (std::is_same_v<T, Realization>) {
                return tf_of(c);
            } else {
                return tf_of(realization_of(c));
            }
        },
        controller);
    if (g.is_zero())
        return std::nullopt;
    return relative_degree(g);
}

ClosedLoopTrace closed_loop(const DiscretePlant& plant, const Controller& controller, const Disturbance& d,
                            std::size_t steps) {
    if (auto rd = controller_relative_degree(controller); rd && *rd < 2)
        throw std::invalid_argument("controller relative degree " + std::to_string(*rd) +
                                    " is below the two-step sensorimotor delay");

    std::unique_ptr<Stepper> stepper = std::visit(
        [](const auto& c) -> std::unique_ptr<Stepper> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OptimalGains>)
                return std::make_unique<GainsStepper>(c);
            else if constexpr (std::is_same_v<T, Realization>)
                return std::make_unique<RealizationStepper>(c);
            else
                return std::make_unique<CircuitStepper>(c);
        },
        controller);

    ClosedLoopTrace trace;
    trace.ts = plant.ts;
    trace.time.reserve(steps);
    trace.delta_f.reserve(steps);
    trace.delta_r.reserve(steps);
    if (const auto* circuit = std::get_if<NeuralCircuit>(&controller)) {
        for (const auto& n : circuit->neurons)
            trace.neuron_ids.push_back(n.id);
        trace.neuron_rates.assign(circuit->neurons.size(), {});
    }

    double delta_f = d.at(0);
    for (std::size_t t = 0; t < steps; ++t) {
        const double delta_r = stepper->output(delta_f);
        trace.time.push_back(static_cast<double>(t) * plant.ts);
        trace.delta_f.push_back(delta_f);
        trace.delta_r.push_back(delta_r);
        if (const auto* rates = stepper->rates())
            for (std::size_t i = 0; i < rates->size(); ++i)
                trace.neuron_rates[i].push_back((*rates)[i]);
        stepper->advance(delta_f);
        delta_f = plant.a * delta_f + plant.b * delta_r + d.at(t + 1);
    }
    return trace;
}

double cost_of_trace(const ClosedLoopTrace& trace, const LqrWeights& w) {
    double j = 0.0;
    for (std::size_t t = 0; t < trace.steps(); ++t)
        j += w.q * trace.delta_f[t] * trace.delta_f[t] + w.r * trace.delta_r[t] * trace.delta_r[t];
    if (!std::isfinite(j))
        throw std::domain_error("trace cost is not finite");
    return j;
}

std::string to_csv(const ClosedLoopTrace& trace, const OperatingPoint& op, const std::string& comment) {
    std::ostringstream os;
    if (!comment.empty()) {
        std::istringstream lines(comment);
        for (std::string l; std::getline(lines, l);)
            os << "# " << l << "\n";
    }
    os << "t,delta_f,delta_r,f_abs,r_abs";
    for (const auto& id : trace.neuron_ids)
        os << ",neuron_" << id;
    os << "\n";
    for (std::size_t t = 0; t < trace.steps(); ++t) {
        os << format_value(trace.time[t]) << ',' << format_value(trace.delta_f[t]) << ','
           << format_value(trace.delta_r[t]) << ',' << format_value(trace.delta_f[t] + op.f_bar) << ','
           << format_value(trace.delta_r[t] + op.r_bar);
        for (const auto& series : trace.neuron_rates)
            os << ',' << format_value(series[t]);
        os << "\n";
    }
    return os.str();
}

std::string to_svg(const ClosedLoopTrace& trace, const OperatingPoint& op, const std::string& title) {
    std::vector<std::pair<std::string, std::vector<double>>> columns{
        {"delta_f", trace.delta_f}, {"delta_r", trace.delta_r}, {"f_abs", trace.f_abs(op)}, {"r_abs", trace.r_abs(op)}};
    for (std::size_t i = 0; i < trace.neuron_ids.size(); ++i)
        columns.emplace_back("neuron_" + trace.neuron_ids[i], trace.neuron_rates[i]);

    constexpr double kWidth = 640, kPanel = 110, kMargin = 50, kGap = 20;
    const double height = kMargin + static_cast<double>(columns.size()) * (kPanel + kGap);
    const std::size_t n = trace.steps();

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kMargin << "\" y=\"20\" font-size=\"14\">" << title << "</text>\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
        const auto& [name, ys] = columns[c];
        const double top = kMargin + static_cast<double>(c) * (kPanel + kGap);
        double lo = n ? *std::min_element(ys.begin(), ys.end()) : 0.0;
        double hi = n ? *std::max_element(ys.begin(), ys.end()) : 0.0;
        if (hi - lo < 1e-12) {
            lo -= 1.0;
            hi += 1.0;
        }
        os << "<rect x=\"" << kMargin << "\" y=\"" << top << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
           << kPanel << "\" fill=\"none\" stroke=\"#ccc\"/>\n";
        os << "<text x=\"" << kMargin + 4 << "\" y=\"" << top + 12 << "\">" << name << " [" << format_value(lo)
           << ", " << format_value(hi) << "]</text>\n";
        os << "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"";
        for (std::size_t t = 0; t < n; ++t) {
            const double x = kMargin + (kWidth - 2 * kMargin) * (n > 1 ? static_cast<double>(t) / static_cast<double>(n - 1) : 0.0);
            const double y = top + kPanel - kPanel * (ys[t] - lo) / (hi - lo);
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x, y);
            os << buf;
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace neuroctl
