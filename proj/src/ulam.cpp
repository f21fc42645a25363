#include "openmap/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace openmap {

void SparseMatrix::left_multiply(const std::vector<double>& v,
                                 std::vector<double>& w) const {
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double vi = v[i];
        if (vi == 0.0) continue;
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            w[col[k]] += vi * val[k];
    }
}

void SparseMatrix::right_multiply(const std::vector<double>& h,
                                  std::vector<double>& w) const {
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            s += val[k] * h[col[k]];
        w[i] = s;
    }
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> s(n, 0.0);
    for (int i = 0; i < n; ++i)
        for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s[i] += val[k];
    return s;
}

UlamOperator build_ulam(const UnimodalMap& map, int n_bins, std::optional<Hole> hole) {
    if (n_bins < 1) raise(ErrorKind::DomainError, "n_bins must be >= 1");
    Interval core = map.core();
    if (hole) {
        double lo = hole->z - hole->eps_L, hi = hole->z + hole->eps_R;
        if (hi < core.lo || lo > core.hi)
            raise(ErrorKind::DomainError, "hole lies outside the core");
    }

    UlamOperator op;
    op.map = &map;
    op.n_bins = n_bins;
    op.grid_lo = core.lo;
    op.grid_hi = core.hi;

    const double h = op.bin_width();
    const double c = map.c();

    // snap hole edges to a 16x sub-grid; clamp to the core
    double s_lo = 0.0, s_hi = 0.0;
    if (hole) {
        double g = h / 16.0;
        s_lo = std::max(core.lo, hole->z - hole->eps_L);
        s_hi = std::min(core.hi, hole->z + hole->eps_R);
        s_lo = core.lo + std::round((s_lo - core.lo) / g) * g;
        s_hi = core.lo + std::round((s_hi - core.lo) / g) * g;
        op.punctured = true;
        op.hole = hole;
        op.hole_lo = s_lo;
        op.hole_hi = s_hi;
    }

    auto& m = op.matrix;
    m.n = n_bins;
    m.row_ptr.assign(n_bins + 1, 0);
    m.col.reserve(static_cast<std::size_t>(n_bins) * 4);
    m.val.reserve(static_cast<std::size_t>(n_bins) * 4);

    std::vector<std::pair<int, double>> row;
    for (int i = 0; i < n_bins; ++i) {
        double blo = op.edge(i), bhi = op.edge(i + 1);
        double survive = 1.0;
        if (op.punctured) {
            double ov = std::min(bhi, s_hi) - std::max(blo, s_lo);
            if (ov > 0.0) survive = 1.0 - ov / (bhi - blo);
            if (survive < 1e-15) survive = 0.0;
        }
        row.clear();
        if (survive > 0.0) {
            std::vector<Interval> pieces;
            if (blo < c && c < bhi) {
                pieces.push_back(Interval{blo, c});
                pieces.push_back(Interval{c, bhi});
            } else {
                pieces.push_back(Interval{blo, bhi});
            }
            for (auto& piece : pieces) {
                if (piece.length() <= 0.0) continue;
                bool left_branch = 0.5 * (piece.lo + piece.hi) < c;
                double fu = map(piece.lo), fv = map(piece.hi);
                bool inc = fv >= fu;
                double ylo = std::max(std::min(fu, fv), core.lo);
                double yhi = std::min(std::max(fu, fv), core.hi);
                if (yhi <= ylo) continue;
                int j = std::clamp(static_cast<int>((ylo - core.lo) / h), 0, n_bins - 1);
                double prev_x = inc ? piece.lo : piece.hi;
                while (j < n_bins) {
                    double e_hi = op.edge(j + 1);
                    double x_next = (e_hi >= yhi) ? (inc ? piece.hi : piece.lo)
                                                  : map.inverse(e_hi, left_branch);
                    double seg = std::fabs(x_next - prev_x);
                    if (seg > 0.0) row.push_back({j, survive * seg / (bhi - blo)});
                    prev_x = x_next;
                    if (e_hi >= yhi) break;
                    ++j;
                }
            }
        }
        std::sort(row.begin(), row.end());
        std::int64_t row_start = m.row_ptr[i];
        for (auto& [cix, v] : row) {
            if (static_cast<std::int64_t>(m.col.size()) > row_start && m.col.back() == cix)
                m.val.back() += v;
            else {
                m.col.push_back(cix);
                m.val.push_back(v);
            }
        }
        // renormalize so the row sums to exactly `survive`
        double sum = 0.0;
        for (std::int64_t k = row_start; k < static_cast<std::int64_t>(m.col.size()); ++k)
            sum += m.val[k];
        if (sum > 0.0) {
            double want = survive;
            for (std::int64_t k = row_start; k < static_cast<std::int64_t>(m.col.size()); ++k)
                m.val[k] *= want / sum;
        }
        m.row_ptr[i + 1] = static_cast<std::int64_t>(m.col.size());
    }
    return op;
}

PowerIterationResult dominant_left(const SparseMatrix& m, double tol, int max_iter) {
    PowerIterationResult res;
    int n = m.n;
    std::vector<double> v(n, 1.0 / n), w;
    double lam = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        m.left_multiply(v, w);
        double s = 0.0;
        for (double x : w) s += x;
        if (s <= 0.0) {
            res.total_escape = true;
            res.eigenvalue = 0.0;
            res.vec.assign(n, 0.0);
            res.iterations = it;
            return res;
        }
        lam = s;  // |v|_1 = 1 each step
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] /= s;
            diff += std::fabs(w[i] - v[i]);
        }
        v.swap(w);
        res.iterations = it;
        if (diff < tol) break;
        if (it == max_iter)
            raise(ErrorKind::NoConvergence, "power iteration did not converge");
    }
    m.left_multiply(v, w);
    double r = 0.0;
    for (int i = 0; i < n; ++i) r += std::fabs(w[i] - lam * v[i]);
    res.residual = r;
    res.eigenvalue = lam;
    res.vec = std::move(v);
    return res;
}

std::vector<double> dominant_right(const SparseMatrix& m, double eigenvalue,
                                   double tol, int max_iter) {
    int n = m.n;
    if (eigenvalue <= 0.0) return std::vector<double>(n, 0.0);
    std::vector<double> h(n, 1.0), w;
    for (int it = 0; it < max_iter; ++it) {
        m.right_multiply(h, w);
        double mx = 0.0;
        for (double x : w) mx = std::max(mx, x);
        if (mx <= 0.0) return std::vector<double>(n, 0.0);
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
            w[i] /= mx;
            diff += std::fabs(w[i] - h[i]);
        }
        h.swap(w);
        if (diff / n < tol) break;
    }
    return h;
}

namespace {

// Log-log slope of the baseline-subtracted density against the distance from
// q; without the subtraction a weak spike on top of a smooth background reads
// as a spurious flat exponent.
double fit_loglog_exponent(const InvariantDensity& dens, double q, int dir,
                           int kmin, int kmax, double baseline) {
    const double h = dens.bin_width();
    int iq = std::clamp(static_cast<int>((q - dens.grid_lo) / h), 0, dens.n_bins - 1);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = kmin; k <= kmax; ++k) {
        int i = iq + dir * k;
        if (i < 0 || i >= dens.n_bins) break;
        double xc = dens.grid_lo + (i + 0.5) * h;
        double y = dens.mass[i] / h - baseline;
        if (y <= 0) continue;
        double lx = std::log(std::fabs(xc - q)), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++m;
    }
    if (m < 3) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// model integral over distances [d0, d1] from q on one side
double side_model_integral(double kappa, double base, double ell, double d0,
                           double d1) {
    if (d1 <= d0) return 0.0;
    double a = kappa * ell * (std::pow(d1, 1.0 / ell) - std::pow(d0, 1.0 / ell));
    return a + base * (d1 - d0);
}

}  // namespace

InvariantDensity invariant_density(const UlamOperator& op,
                                   const CriticalOrbitData& orbit, double tol,
                                   int max_iter) {
    if (op.punctured)
        raise(ErrorKind::DomainError, "invariant_density needs the unpunctured operator");
    PowerIterationResult pr = dominant_left(op.matrix, tol, max_iter);
    InvariantDensity dens;
    dens.n_bins = op.n_bins;
    dens.grid_lo = op.grid_lo;
    dens.grid_hi = op.grid_hi;
    dens.ell = op.map->ell();
    dens.mass = pr.vec;
    dens.iterations = pr.iterations;
    dens.residual = pr.residual;
    refit_spikes(dens, *op.map, orbit);
    return dens;
}

void refit_spikes(InvariantDensity& dens, const UnimodalMap& map,
                  const CriticalOrbitData& orbit) {
    dens.spikes.clear();
    dens.ell = map.ell();
    const double h = dens.bin_width();
    const int n_bins = dens.n_bins;
    const double ell = map.ell();

    // density at c: average of the 5 bins centred at c (smooth region)
    int ic = std::clamp(static_cast<int>((map.c() - dens.grid_lo) / h), 0, n_bins - 1);
    double s = 0.0;
    int cnt = 0;
    for (int i = ic - 2; i <= ic + 2; ++i)
        if (i >= 0 && i < n_bins) { s += dens.mass[i] / h; ++cnt; }
    dens.rho_c = cnt ? s / cnt : 0.0;

    // transport the spike coefficients along the orbit: the fold at c injects
    // mu((f(c)-t, f(c)]) = 2 rho(c) (t/A)^{1/ell}, each smooth step divides
    // kappa by |Df|^{1/ell} and flips the side when Df < 0, and the periodic
    // tail resums as a geometric series in lambda_tail^{-1/ell}
    int n_post = orbit.postcritical_count();
    std::vector<double> kappa_chain(n_post + 1, 0.0);
    std::vector<int> side_chain(n_post + 1, 0);
    kappa_chain[1] = 2.0 * dens.rho_c / (ell * std::pow(map.A(), 1.0 / ell));
    side_chain[1] = -1;
    for (int j = 1; j < n_post; ++j) {
        double df = map.deriv1(orbit.point(j));
        kappa_chain[j + 1] = kappa_chain[j] * std::pow(std::fabs(df), -1.0 / ell);
        side_chain[j + 1] = df >= 0 ? side_chain[j] : -side_chain[j];
    }
    double loop = std::pow(orbit.lambda_tail, -1.0 / ell);
    bool loop_preserving = deriv(map, orbit.point(orbit.k0), orbit.p) > 0;

    std::vector<double> qs;
    std::vector<int> qidx;
    for (int j = 1; j <= n_post; ++j) {
        double q = orbit.point(j);
        if (q >= dens.grid_lo - 1e-12 && q <= dens.grid_hi + 1e-12) {
            qs.push_back(std::clamp(q, dens.grid_lo, dens.grid_hi));
            qidx.push_back(j);
        }
    }

    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        double q = qs[qi];
        int j = qidx[qi];
        int radius_bins = std::min(20, std::max(1, n_bins / 8));
        for (double q2 : qs)
            if (q2 != q) {
                int sep = static_cast<int>(std::fabs(q2 - q) / h / 3.0);
                radius_bins = std::max(1, std::min(radius_bins, sep));
            }

        SpikeFit sf;
        sf.q = q;
        int iq = std::clamp(static_cast<int>((q - dens.grid_lo) / h), 0, n_bins - 1);
        sf.window_lo = std::max(dens.grid_lo, dens.grid_lo + (iq - radius_bins) * h);
        sf.window_hi = std::min(dens.grid_hi, dens.grid_lo + (iq + radius_bins + 1) * h);
        sf.radius = radius_bins * h;

        double kL = 0.0, kR = 0.0;
        if (j < orbit.k0) {
            (side_chain[j] < 0 ? kL : kR) += kappa_chain[j];
        } else if (loop_preserving) {
            (side_chain[j] < 0 ? kL : kR) += kappa_chain[j] / (1.0 - loop);
        } else {
            double same = kappa_chain[j] / (1.0 - loop * loop);
            double other = kappa_chain[j] * loop / (1.0 - loop * loop);
            (side_chain[j] < 0 ? kL : kR) += same;
            (side_chain[j] < 0 ? kR : kL) += other;
        }
        sf.kappa_left = kL;
        sf.kappa_right = kR;

        // smooth background per side.  At the core endpoints all local mass
        // arrives through the fold, so the background vanishes; at interior
        // points it is read off the clean (non-spike) side just outside the
        // window, where the bins are unbiased.
        auto residual = [&](int dir, double kappa) {
            double acc = 0.0;
            int m = 0;
            for (double t = 2.5 * sf.radius; t <= 5.0 * sf.radius; t += h) {
                double x = q + dir * t;
                if (x <= dens.grid_lo || x >= dens.grid_hi) continue;
                int i = std::clamp(static_cast<int>((x - dens.grid_lo) / h), 0,
                                   n_bins - 1);
                acc += dens.mass[i] / h - kappa * std::pow(t, 1.0 / ell - 1.0);
                ++m;
            }
            return m ? std::max(0.0, acc / m) : 0.0;
        };
        bool near_lo = q - dens.grid_lo < 3.0 * sf.radius;
        bool near_hi = dens.grid_hi - q < 3.0 * sf.radius;
        if (near_lo || near_hi) {
            // at the core endpoints all local mass arrives through the fold
            sf.base_left = sf.base_right = 0.0;
        } else {
            sf.base_left = residual(-1, kL);
            sf.base_right = residual(+1, kR);
        }

        // The pushed-forward spike at c_j carries a smeared core of about
        // prod |Df| bins (one bin width transported along the orbit); the
        // exponent is only visible beyond it.
        double smear = 1.0;
        for (int i = 1; i < j; ++i) smear *= std::fabs(map.deriv1(orbit.point(i)));
        int kmin = std::clamp(static_cast<int>(std::ceil(1.3 * smear)), 1, n_bins / 64);
        int kmax = std::min(kmin * 5 + 25, n_bins / 8);
        int fit_bins = kmax;
        double eL = fit_loglog_exponent(dens, q, -1, kmin, kmax, sf.base_left);
        double eR = fit_loglog_exponent(dens, q, +1, kmin, kmax, sf.base_right);
        bool left_exists = q - dens.grid_lo > fit_bins * h;
        bool right_exists = dens.grid_hi - q > fit_bins * h;
        // report the spike side
        double kk, bb;
        if (left_exists && !right_exists) { sf.exponent = eL; kk = kL; bb = sf.base_left; }
        else if (right_exists && !left_exists) { sf.exponent = eR; kk = kR; bb = sf.base_right; }
        else if (kL >= kR) { sf.exponent = eL; kk = kL; bb = sf.base_left; }
        else { sf.exponent = eR; kk = kR; bb = sf.base_right; }
        double contrast = kk * std::pow(kmin * h, 1.0 / ell - 1.0) / std::max(bb, 1e-12);
        sf.exponent_reliable = contrast >= 3.0;
        dens.spikes.push_back(sf);
    }
    std::sort(dens.spikes.begin(), dens.spikes.end(),
              [](const SpikeFit& a, const SpikeFit& b) { return a.q < b.q; });

    // normalize the patched model so mu(core) is exactly 1
    dens.norm = 1.0;
    dens.norm = mu_interval(dens, dens.grid_lo, dens.grid_hi);
}

double InvariantDensity::density_at(double x) const {
    if (x < grid_lo || x > grid_hi) return 0.0;
    double h = bin_width();
    int i = std::clamp(static_cast<int>((x - grid_lo) / h), 0, n_bins - 1);
    return mass[i] / h;
}

double mu_interval(const InvariantDensity& density, double a, double b) {
    a = std::max(a, density.grid_lo);
    b = std::min(b, density.grid_hi);
    if (b <= a) return 0.0;
    const double h = density.bin_width();

    auto plain = [&](double lo, double hi) {
        if (hi <= lo) return 0.0;
        int i0 = std::clamp(static_cast<int>((lo - density.grid_lo) / h), 0,
                            density.n_bins - 1);
        int i1 = std::clamp(static_cast<int>((hi - density.grid_lo) / h), 0,
                            density.n_bins - 1);
        if (i0 == i1) return density.mass[i0] * (hi - lo) / h;
        double s = density.mass[i0] * (density.grid_lo + (i0 + 1) * h - lo) / h;
        s += density.mass[i1] * (hi - (density.grid_lo + i1 * h)) / h;
        for (int i = i0 + 1; i < i1; ++i) s += density.mass[i];
        return s;
    };

    double total = 0.0;
    double cursor = a;
    for (const SpikeFit& s : density.spikes) {
        if (s.window_hi <= cursor || s.window_lo >= b) continue;
        double seg_lo = std::max(cursor, s.window_lo);
        double seg_hi = std::min(b, s.window_hi);
        if (seg_lo > cursor) total += plain(cursor, seg_lo);
        if (seg_lo < s.q) {
            double d1 = s.q - seg_lo;
            double d0 = std::max(0.0, s.q - seg_hi);
            total += side_model_integral(s.kappa_left, s.base_left, density.ell, d0, d1);
        }
        if (seg_hi > s.q) {
            double d0 = std::max(0.0, seg_lo - s.q);
            double d1 = seg_hi - s.q;
            total += side_model_integral(s.kappa_right, s.base_right, density.ell, d0, d1);
        }
        cursor = std::max(cursor, seg_hi);
    }
    if (cursor < b) total += plain(cursor, b);
    return total / density.norm;
}

DensitySampler::DensitySampler(const InvariantDensity& d) : density(&d) {
    cdf.resize(d.mass.size() + 1);
    cdf[0] = 0.0;
    for (std::size_t i = 0; i < d.mass.size(); ++i) cdf[i + 1] = cdf[i] + d.mass[i];
    double total = cdf.back();
    if (total > 0)
        for (auto& x : cdf) x /= total;
}

double DensitySampler::operator()(double u) const {
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    int i = std::clamp(static_cast<int>(it - cdf.begin()) - 1, 0,
                       density->n_bins - 1);
    double span = cdf[i + 1] - cdf[i];
    double within = span > 0 ? (u - cdf[i]) / span : 0.5;
    return density->grid_lo + (i + std::clamp(within, 0.0, 1.0)) * density->bin_width();
}

std::string serialize_matrix(const UlamOperator& op, const std::string& header) {
    std::string s = "# " + header + "\n";
    char buf[128];
    for (int i = 0; i < op.matrix.n; ++i) {
        for (std::int64_t k = op.matrix.row_ptr[i]; k < op.matrix.row_ptr[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i, op.matrix.col[k],
                          op.matrix.val[k]);
            s += buf;
        }
    }
    return s;
}

std::string serialize_density(const InvariantDensity& d, const std::string& header) {
    std::string s = "# " + header + "\n";
    char buf[64];
    for (int i = 0; i < d.n_bins; ++i) {
        std::snprintf(buf, sizeof buf, "%d %.17g\n", i, d.mass[i]);
        s += buf;
    }
    return s;
}

bool parse_matrix(const std::string& text, UlamOperator& op, std::string& header) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.size() < 2 || line[0] != '#') return false;
    header = line.substr(2);
    auto& m = op.matrix;
    m.n = op.n_bins;
    m.row_ptr.assign(op.n_bins + 1, 0);
    m.col.clear();
    m.val.clear();
    int prev_row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int i, j;
        double v;
        if (std::sscanf(line.c_str(), "%d %d %lf", &i, &j, &v) != 3) return false;
        if (i < 0 || i >= op.n_bins || j < 0 || j >= op.n_bins) return false;
        while (prev_row < i)
            m.row_ptr[++prev_row] = static_cast<std::int64_t>(m.col.size());
        m.col.push_back(j);
        m.val.push_back(v);
    }
    while (prev_row < op.n_bins)
        m.row_ptr[++prev_row] = static_cast<std::int64_t>(m.col.size());
    return true;
}

bool parse_density(const std::string& text, InvariantDensity& d, std::string& header) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.size() < 2 || line[0] != '#') return false;
    header = line.substr(2);
    d.mass.assign(d.n_bins, 0.0);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int i;
        double v;
        if (std::sscanf(line.c_str(), "%d %lf", &i, &v) != 2) return false;
        if (i < 0 || i >= d.n_bins) return false;
        d.mass[i] = v;
    }
    return true;
}

}  // namespace openmap
