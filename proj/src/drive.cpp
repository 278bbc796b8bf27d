#include "blipsum/drive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "blipsum/errors.hpp"

namespace blipsum::drive {

void SystemSpec::validate() const {
    if (!(delta >= 0.0)) throw DomainError("system: delta must be >= 0");
    if (!std::isfinite(delta) || !std::isfinite(epsilon0))
        throw DomainError("system: non-finite parameter");
}

DriveProtocol DriveProtocol::constant_after_zero(double amplitude) {
    if (!std::isfinite(amplitude)) throw DomainError("drive: non-finite amplitude");
    DriveProtocol p;
    p.kind_ = Kind::ConstantAfterZero;
    p.amplitude_ = amplitude;
    return p;
}

DriveProtocol DriveProtocol::rectangular_pulse(double amplitude, double t_on, double t_off) {
    if (!std::isfinite(amplitude)) throw DomainError("drive: non-finite amplitude");
    if (!(t_on >= 0.0) || !(t_off > t_on))
        throw DomainError("drive: pulse requires 0 <= t_on < t_off");
    DriveProtocol p;
    p.kind_ = Kind::RectangularPulse;
    p.amplitude_ = amplitude;
    p.t_on_ = t_on;
    p.t_off_ = t_off;
    return p;
}

DriveProtocol DriveProtocol::sinusoidal(double amplitude, double omega, double phase) {
    if (!std::isfinite(amplitude) || !std::isfinite(omega) || !std::isfinite(phase))
        throw DomainError("drive: non-finite sinusoid parameter");
    if (!(omega > 0.0)) throw DomainError("drive: sinusoid frequency must be > 0");
    const double offset = amplitude * std::sin(phase);
    if (std::abs(offset) > 1e-12 * std::max(1.0, std::abs(amplitude)))
        throw DomainError("drive: sinusoid violates eps_d(0) = 0; fold the offset into epsilon0");
    DriveProtocol p;
    p.kind_ = Kind::Sinusoidal;
    p.amplitude_ = amplitude;
    p.omega_ = omega;
    p.phase_ = phase;
    p.offset_ = offset;  // subtracted so the invariant holds exactly
    return p;
}

DriveProtocol DriveProtocol::piecewise_linear(std::vector<double> times,
                                              std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2)
        throw DomainError("drive: table needs >= 2 knots with matching columns");
    if (times.front() != 0.0) throw DomainError("drive: table must start at t = 0");
    if (values.front() != 0.0) throw DomainError("drive: table must satisfy eps_d(0) = 0");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw DomainError("drive: table knots must be strictly increasing (knot " +
                              std::to_string(i + 1) + ")");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("drive: non-finite table value");

    DriveProtocol p;
    p.kind_ = Kind::Table;
    p.knot_t_ = std::move(times);
    p.knot_v_ = std::move(values);
    p.knot_g_.resize(p.knot_t_.size(), 0.0);
    for (std::size_t i = 1; i < p.knot_t_.size(); ++i)
        p.knot_g_[i] = p.knot_g_[i - 1] + 0.5 * (p.knot_v_[i] + p.knot_v_[i - 1]) *
                                              (p.knot_t_[i] - p.knot_t_[i - 1]);
    return p;
}

bool DriveProtocol::is_zero() const {
    switch (kind_) {
        case Kind::ConstantAfterZero:
        case Kind::RectangularPulse:
        case Kind::Sinusoidal:
            return amplitude_ == 0.0;
        case Kind::Table:
            return std::all_of(knot_v_.begin(), knot_v_.end(),
                               [](double v) { return v == 0.0; });
    }
    return false;
}

double DriveProtocol::max_time() const {
    return kind_ == Kind::Table ? knot_t_.back() : std::numeric_limits<double>::infinity();
}

double DriveProtocol::bias_at(double t) const {
    if (t < 0.0) throw DomainError("drive: bias_at requires t >= 0");
    switch (kind_) {
        case Kind::ConstantAfterZero:
            return t > 0.0 ? amplitude_ : 0.0;
        case Kind::RectangularPulse:
            return (t > t_on_ && t <= t_off_) ? amplitude_ : 0.0;
        case Kind::Sinusoidal:
            return amplitude_ * std::sin(omega_ * t + phase_) - offset_;
        case Kind::Table: {
            if (t > knot_t_.back())
                throw DomainError("drive: t beyond table range (t = " + std::to_string(t) + ")");
            const auto it = std::upper_bound(knot_t_.begin(), knot_t_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - knot_t_.begin()) - 1;
            if (i + 1 >= knot_t_.size()) return knot_v_.back();
            const double w = (t - knot_t_[i]) / (knot_t_[i + 1] - knot_t_[i]);
            return knot_v_[i] + w * (knot_v_[i + 1] - knot_v_[i]);
        }
    }
    return 0.0;
}

double DriveProtocol::g_integral(double t) const {
    if (t < 0.0) throw DomainError("drive: g_integral requires t >= 0");
    switch (kind_) {
        case Kind::ConstantAfterZero:
            return amplitude_ * t;
        case Kind::RectangularPulse:
            if (t <= t_on_) return 0.0;
            return amplitude_ * (std::min(t, t_off_) - t_on_);
        case Kind::Sinusoidal:
            return (amplitude_ / omega_) * (std::cos(phase_) - std::cos(omega_ * t + phase_)) -
                   offset_ * t;
        case Kind::Table: {
            if (t > knot_t_.back())
                throw DomainError("drive: t beyond table range (t = " + std::to_string(t) + ")");
            const auto it = std::upper_bound(knot_t_.begin(), knot_t_.end(), t);
            const std::size_t i = static_cast<std::size_t>(it - knot_t_.begin()) - 1;
            if (i + 1 >= knot_t_.size()) return knot_g_.back();
            const double h = knot_t_[i + 1] - knot_t_[i];
            const double slope = (knot_v_[i + 1] - knot_v_[i]) / h;
            const double dt = t - knot_t_[i];
            return knot_g_[i] + knot_v_[i] * dt + 0.5 * slope * dt * dt;
        }
    }
    return 0.0;
}

namespace {

void check_sign(int xi) {
    if (xi != 1 && xi != -1) throw DomainError("drive: blip sign must be +1 or -1");
}

}  // namespace

double w_ns_rate(const DriveProtocol& p, int xi, double t) {
    check_sign(xi);
    return -static_cast<double>(xi) * p.bias_at(t);
}

double w1_work(const DriveProtocol& p, int xi, double t) {
    check_sign(xi);
    return -static_cast<double>(xi) * p.bias_at(t);
}

double ns_work_window(const DriveProtocol& p, int xi, double t1, double t2) {
    check_sign(xi);
    return -static_cast<double>(xi) * p.g_between(t1, t2);
}

void SpinTrajectory::validate() const {
    if (segments.empty()) throw DomainError("trajectory: empty");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        if (!(seg.t_begin >= 0.0) || !(seg.t_end > seg.t_begin))
            throw DomainError("trajectory: segment " + std::to_string(i) + " has bad time range");
        const bool sojourn = seg.eta != 0;
        const bool blip = seg.xi != 0;
        if (sojourn == blip)
            throw DomainError("trajectory: segment " + std::to_string(i) +
                              " must have exactly one of eta, xi nonzero");
        if (seg.eta < -1 || seg.eta > 1 || seg.xi < -1 || seg.xi > 1)
            throw DomainError("trajectory: segment signs must be in {-1, 0, +1}");
        if (i > 0 && std::abs(seg.t_begin - segments[i - 1].t_end) > 1e-12)
            throw DomainError("trajectory: segments must be contiguous (gap before segment " +
                              std::to_string(i) + ")");
    }
}

WorkSplit classical_work_split(const DriveProtocol& p, const SpinTrajectory& trajectory) {
    trajectory.validate();
    if (trajectory.segments.back().t_end > p.max_time())
        throw DomainError("trajectory/protocol time-range mismatch");
    WorkSplit out;
    // parts form: int_a^b c eps_dot = c (eps_d(b) - eps_d(a)) for constant c
    for (const auto& seg : trajectory.segments) {
        const double jump = p.bias_at(seg.t_end) - p.bias_at(seg.t_begin);
        out.quasistatic += -static_cast<double>(seg.eta) * jump;
        out.nonstationary += -static_cast<double>(seg.xi) * jump;
    }
    return out;
}

}  // namespace blipsum::drive
