// Reference implementations used only by tests.  Everything here is written
// independently of the library under test: plain (location, mass) pair lists,
// direct enumeration, direct series summation, brute-force window sweeps.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

using PM = std::vector<std::pair<double, double>>; // (location, mass)

/// Sort by location and merge clusters of near-coincident locations (relative
/// tolerance, like any fixed-precision convolution has to).
inline PM normalize(PM v, double tol = 1e-9) {
    std::sort(v.begin(), v.end());
    PM out;
    for (const auto& [x, m] : v) {
        const double scale = std::max({1.0, std::abs(x), out.empty() ? 0.0 : std::abs(out.back().first)});
        if (!out.empty() && x - out.back().first <= tol * scale)
            out.back().second += m;
        else
            out.push_back({x, m});
    }
    PM pruned;
    for (const auto& a : out)
        if (a.second != 0.0) pruned.push_back(a);
    return pruned;
}

inline PM convolve(const PM& a, const PM& b) {
    PM raw;
    raw.reserve(a.size() * b.size());
    for (const auto& pa : a)
        for (const auto& pb : b) raw.push_back({pa.first + pb.first, pa.second * pb.second});
    return normalize(std::move(raw));
}

inline PM power(const PM& f, int n) {
    PM result{{0.0, 1.0}};
    for (int i = 0; i < n; ++i) result = convolve(result, f);
    return result;
}

inline PM scale(PM f, double c) {
    for (auto& a : f) a.second *= c;
    return f;
}

inline PM add(PM a, const PM& b) {
    a.insert(a.end(), b.begin(), b.end());
    return normalize(std::move(a));
}

/// exp{W} by direct series summation with a fixed number of terms.
inline PM exp_series(const PM& w, int terms = 40) {
    PM result{{0.0, 1.0}};
    PM term{{0.0, 1.0}};
    for (int m = 1; m <= terms; ++m) {
        term = scale(convolve(term, w), 1.0 / m);
        result = add(std::move(result), term);
    }
    return result;
}

inline double tv(const PM& f) {
    double s = 0.0;
    for (const auto& a : f) s += std::abs(a.second);
    return s;
}

inline double kolmogorov(const PM& f) {
    PM g = normalize(f);
    double run = 0.0, best = 0.0;
    for (const auto& a : g) {
        run += a.second;
        best = std::max(best, std::abs(run));
    }
    return best;
}

inline PM subtract(const PM& a, const PM& b) {
    PM raw = a;
    for (const auto& [x, m] : b) raw.push_back({x, -m});
    return normalize(std::move(raw));
}

inline double tv_distance(const PM& a, const PM& b) { return tv(subtract(a, b)); }
inline double kolmogorov_distance(const PM& a, const PM& b) { return kolmogorov(subtract(a, b)); }

inline std::complex<double> charfn(const PM& f, double t) {
    std::complex<double> s = 0.0;
    for (const auto& [x, m] : f) s += m * std::complex<double>{std::cos(t * x), std::sin(t * x)};
    return s;
}

/// Law of w * sum_{k=1..n} eta_k eta_{k+1} over iid Bernoulli(p) drivers
/// eta_1..eta_{n+1}, by direct enumeration of all 2^{n+1} driver strings.
inline PM two_runs_enumeration(int n, double p, double w) {
    PM raw;
    const std::uint64_t strings = 1ull << (n + 1);
    for (std::uint64_t bits = 0; bits < strings; ++bits) {
        double prob = 1.0;
        int sum = 0;
        for (int i = 0; i <= n; ++i) prob *= (bits >> i) & 1 ? p : 1.0 - p;
        for (int i = 0; i < n; ++i)
            if (((bits >> i) & 1) && ((bits >> (i + 1)) & 1)) ++sum;
        raw.push_back({w * sum, prob});
    }
    return normalize(std::move(raw));
}

/// Joint law of w1 * S1 + w2 * S2 for two independent two-runs blocks, by
/// enumerating both driver strings jointly (2^{n1+n2+2} paths).
inline PM two_runs_joint_enumeration(int n1, double p1, double w1, int n2, double p2, double w2) {
    const PM a = two_runs_enumeration(n1, p1, w1);
    PM raw;
    const std::uint64_t strings = 1ull << (n2 + 1);
    for (const auto& [xa, ma] : a)
        for (std::uint64_t bits = 0; bits < strings; ++bits) {
            double prob = 1.0;
            int sum = 0;
            for (int i = 0; i <= n2; ++i) prob *= (bits >> i) & 1 ? p2 : 1.0 - p2;
            for (int i = 0; i < n2; ++i)
                if (((bits >> i) & 1) && ((bits >> (i + 1)) & 1)) ++sum;
            raw.push_back({xa + w2 * sum, ma * prob});
        }
    return normalize(std::move(raw));
}

/// Brute-force Levy concentration: try every pair of atoms as window edges.
inline double concentration_brute(const PM& f, double h) {
    PM g = normalize(f);
    double best = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = i; j < g.size(); ++j) {
            if (g[j].first - g[i].first > h * (1 + 1e-12) + 1e-12) break;
            s += g[j].second;
            best = std::max(best, s);
        }
    }
    return best;
}

/// Closed-form right-hand side of the Parseval-type total-variation bound for
/// an integer-supported signed measure: orthogonality of e^{ikt} on [-pi, pi]
/// turns both integrals into lattice sums.
inline double tv_energy_rhs_closed(const PM& m, double gamma, double upsilon) {
    const double pi = 3.141592653589793;
    double s2 = 0.0, d2 = 0.0;
    for (const auto& [x, mass] : m) {
        s2 += mass * mass;
        d2 += (x - upsilon) * (x - upsilon) * mass * mass;
    }
    return (0.5 + 1.0 / (2.0 * pi * gamma)) * 2.0 * pi * (gamma * s2 + d2 / gamma);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<std::pair<double, double>>& xy) {
    double mx = 0, my = 0;
    for (const auto& [x, y] : xy) {
        mx += std::log(x);
        my += std::log(y);
    }
    mx /= xy.size();
    my /= xy.size();
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : xy) {
        sxx += (std::log(x) - mx) * (std::log(x) - mx);
        sxy += (std::log(x) - mx) * (std::log(y) - my);
    }
    return sxy / sxx;
}

/// Deterministic cross-platform RNG for reproducible test instances.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double u01() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * u01(); }
    int uniform_int(int a, int b) { return a + int(next() % std::uint64_t(b - a + 1)); }
};

/// Random zero-total-mass measure with total variation <= cap: half lattice-
/// supported (more atoms), half off-lattice (few atoms).
inline PM random_zero_mass(Rng& rng, double cap = 2.0) {
    const bool lattice = rng.u01() < 0.5;
    const int n_atoms = lattice ? rng.uniform_int(2, 8) : rng.uniform_int(2, 4);
    PM atoms;
    double total = 0.0, tvv = 0.0;
    for (int i = 0; i < n_atoms; ++i) {
        const double x = lattice ? double(rng.uniform_int(-3, 5)) : rng.uniform(-2.0, 2.0);
        const double m = rng.uniform(-1.0, 1.0);
        atoms.push_back({x, m});
        total += m;
    }
    // Re-center the masses so they sum to zero, then rescale under the cap.
    for (auto& a : atoms) a.second -= total / n_atoms;
    for (const auto& a : atoms) tvv += std::abs(a.second);
    const double target = rng.uniform(0.2, cap);
    if (tvv > 0)
        for (auto& a : atoms) a.second *= target / tvv;
    return normalize(std::move(atoms));
}

/// Random probability distribution with atoms on integers or reals.
inline PM random_distribution(Rng& rng, int max_atoms = 8) {
    const bool lattice = rng.u01() < 0.5;
    const int n_atoms = rng.uniform_int(1, max_atoms);
    PM atoms;
    double total = 0.0;
    for (int i = 0; i < n_atoms; ++i) {
        const double x = lattice ? double(rng.uniform_int(-4, 4)) : rng.uniform(-3.0, 3.0);
        const double m = 0.05 + rng.u01();
        atoms.push_back({x, m});
        total += m;
    }
    for (auto& a : atoms) a.second /= total;
    return normalize(std::move(atoms));
}

} // namespace oracle
