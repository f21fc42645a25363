#ifndef OPENMAP_MAP_CORE_HPP
#define OPENMAP_MAP_CORE_HPP

#include <cmath>
#include <optional>
#include <vector>

#include "openmap/errors.hpp"

namespace openmap {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Member of the family x |-> A/4 - A|x - 1/2|^ell on [0,1].  Unimodal with
// critical point c = 1/2 and critical value A/4; the dynamical core is
// [f^2(c), f(c)].
class UnimodalMap {
  public:
    UnimodalMap(double A, double ell);

    double A() const { return A_; }
    double ell() const { return ell_; }
    double c() const { return 0.5; }
    Interval core() const { return core_; }

    double operator()(double x) const {
        return A_ * 0.25 - A_ * std::pow(std::fabs(x - 0.5), ell_);
    }

    // Df(x), closed form per branch; 0 exactly at x = c.
    double deriv1(double x) const {
        if (x == 0.5) return 0.0;
        double s = x > 0.5 ? 1.0 : -1.0;
        return -A_ * ell_ * std::pow(std::fabs(x - 0.5), ell_ - 1.0) * s;
    }

    // Branch inverse: the preimage of y on the chosen side of c.
    // Requires y <= f(c); the result always lands in [c-1/2, c+1/2].
    double inverse(double y, bool left_branch) const;

    bool has_inverse(double y) const { return y <= A_ * 0.25; }

  private:
    double A_;
    double ell_;
    Interval core_;
};

// f^n(x).  Throws DomainError when x is outside [0,1].
double eval(const UnimodalMap& map, double x, int n);

// Df^n(x) by the chain rule; returns 0 when the orbit hits c exactly.
double deriv(const UnimodalMap& map, double x, int n);

struct CriticalOrbitData {
    std::vector<double> orbit;  // orbit[i] = f^{i+1}(c), i.e. c_1 .. c_{k0+p}
    int k0 = 0;                 // minimal preperiod, >= 2
    int p = 0;                  // minimal period of f^{k0}(c)
    double lambda_tail = 0.0;   // |Df^p(f^{k0}(c))|

    // c_j for j >= 1 (1-based postcritical index).
    double point(int j) const { return orbit[static_cast<std::size_t>(j) - 1]; }
    int postcritical_count() const { return k0 + p - 1; }
};

// Detects the eventually periodic structure of orb(f(c)).  Recurrence is
// declared when |f^{k0+p}(c) - f^{k0}(c)| < tol with a repelling multiplier;
// (k0, p) is lexicographically minimal.
CriticalOrbitData critical_orbit(const UnimodalMap& map, int max_iter = 64,
                                 double tol = 1e-10);

// Solves g(A) = f_A^{k0+p}(c) - f_A^{k0}(c) = 0 inside the bracket and checks
// that the root realizes the requested minimal (k0, p) with a repelling tail.
UnimodalMap find_mt_parameter(double ell, int k0, int p, Interval bracket);

enum class Orientation { preserving, reversing };

struct PeriodicPoint {
    double x = 0.0;
    int period = 0;          // prime period
    double multiplier = 0.0; // |Df^period(x)|
    Orientation orientation = Orientation::preserving;
};

// All solutions of f^n(x) = x on [0,1], one bisection candidate per monotone
// branch of f^n, de-duplicated; each point carries its prime period.
std::vector<PeriodicPoint> find_periodic_points(const UnimodalMap& map, int n);

enum class TrichotomyCase { nonperiodic, periodic_off_orbit, periodic_in_orbit };

struct PointClass {
    TrichotomyCase tri_case = TrichotomyCase::nonperiodic;
    int period = 0;          // prime period when periodic
    double multiplier = 0.0; // lambda_z when periodic
    int orbit_index = 0;     // j with z = c_j when z lies on the postcritical orbit, else 0
    double predicted_ratio(double ell) const {
        switch (tri_case) {
            case TrichotomyCase::nonperiodic: return 1.0;
            case TrichotomyCase::periodic_off_orbit: return 1.0 - 1.0 / multiplier;
            case TrichotomyCase::periodic_in_orbit:
                return 1.0 - std::pow(multiplier, -1.0 / ell);
        }
        return 1.0;
    }
};

// Places z in the trichotomy: non-periodic / periodic off the postcritical
// orbit / periodic on it.  Periodicity is scanned up to max_period.
PointClass classify_point(const UnimodalMap& map, const CriticalOrbitData& orbit,
                          double z, int max_period = 12, double tol = 1e-9);

}  // namespace openmap

#endif
