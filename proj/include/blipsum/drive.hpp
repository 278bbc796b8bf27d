// drive.hpp — Time-dependent bias protocols eps_d(t), their exact integral g(t),
// and the drive-work functionals reduced to the two-level system. All protocols
// satisfy eps_d(0) = 0; any offset belongs in the static bias.

#pragma once

#include <vector>

namespace blipsum::drive {

struct SystemSpec {
    double delta = 1.0;     // tunneling amplitude (frequency unit); >= 0, 0 = frozen tunneling
    double epsilon0 = 0.0;  // static bias, units of Delta
    // initial state is |L> in this artifact

    void validate() const;
    bool operator==(const SystemSpec&) const = default;
};

enum class Kind {
    ConstantAfterZero,  // 0 at t = 0, amplitude A for t > 0
    RectangularPulse,   // A on (t_on, t_off]
    Sinusoidal,         // A sin(Omega t + phase), offset-corrected so eps_d(0) = 0
    Table,              // piecewise-linear knots starting at (0, 0)
};

class DriveProtocol {
  public:
    static DriveProtocol none() { return constant_after_zero(0.0); }
    static DriveProtocol constant_after_zero(double amplitude);
    static DriveProtocol rectangular_pulse(double amplitude, double t_on, double t_off);
    static DriveProtocol sinusoidal(double amplitude, double omega, double phase = 0.0);
    static DriveProtocol piecewise_linear(std::vector<double> times, std::vector<double> values);

    double bias_at(double t) const;     // eps_d(t), t >= 0
    double g_integral(double t) const;  // g(t) = int_0^t eps_d
    double g_between(double t1, double t2) const { return g_integral(t2) - g_integral(t1); }

    Kind kind() const { return kind_; }
    bool is_zero() const;
    double max_time() const;  // last knot for tables, +inf otherwise

    double amplitude() const { return amplitude_; }
    double frequency() const { return omega_; }
    double phase() const { return phase_; }
    double t_on() const { return t_on_; }
    double t_off() const { return t_off_; }
    const std::vector<double>& knot_times() const { return knot_t_; }
    const std::vector<double>& knot_values() const { return knot_v_; }

    bool operator==(const DriveProtocol&) const = default;

  private:
    DriveProtocol() = default;

    Kind kind_ = Kind::ConstantAfterZero;
    double amplitude_ = 0.0;
    double omega_ = 0.0;
    double phase_ = 0.0;
    double offset_ = 0.0;  // A sin(phase), subtracted to pin eps_d(0) = 0
    double t_on_ = 0.0;
    double t_off_ = 0.0;
    std::vector<double> knot_t_;
    std::vector<double> knot_v_;
    std::vector<double> knot_g_;  // cumulative trapezoid at the knots
};

// W_ns,j(t) = -xi_j eps_d(t): the only drive-work component entering transition
// phases (hbar = 1).
double w_ns_rate(const DriveProtocol& p, int xi, double t);

// W_1(t) = -int_0^t xi eps_dot dt' = -xi eps_d(t).
double w1_work(const DriveProtocol& p, int xi, double t);

// int_{t1}^{t2} W_ns,j dt' = -xi (g(t2) - g(t1)).
double ns_work_window(const DriveProtocol& p, int xi, double t1, double t2);

// Piecewise-constant (eta, xi) trajectory on contiguous segments; on every
// segment exactly one of eta, xi is nonzero (sojourn vs blip).
struct SpinTrajectory {
    struct Segment {
        double t_begin = 0.0;
        double t_end = 0.0;
        int eta = 0;  // -1, 0, +1
        int xi = 0;   // -1, 0, +1
    };
    std::vector<Segment> segments;

    void validate() const;
};

struct WorkSplit {
    double quasistatic = 0.0;    // W_qs = -int eta eps_dot
    double nonstationary = 0.0;  // W_ns = -int xi  eps_dot
};

// Evaluated in integrated-by-parts form (segment signs are constant), so the
// result is exact for discontinuous protocols too.
WorkSplit classical_work_split(const DriveProtocol& p, const SpinTrajectory& trajectory);

}  // namespace blipsum::drive
