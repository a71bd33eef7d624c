// Finite signed measures with atomic support on the real line.
//
// This is the arithmetic core of the library: every distribution, every
// compound-Poisson approximant and every smoothing measure is a
// SignedMeasure, and every distance or concentration quantity is computed
// from one.  Measures are value types; all operations return new measures.
//
// Representation invariants (enforced by construction):
//   * atoms are sorted by location, strictly increasing,
//   * consecutive locations differ by more than the merge tolerance,
//   * no surviving atom has |mass| <= prune_threshold,
//   * all locations and masses are finite,
//   * dropped_mass_bound is a running upper bound (in total variation) on
//     everything pruning and series truncation have discarded; it only grows.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace cpsmooth {

struct Atom {
    double x = 0.0;    // location
    double mass = 0.0; // signed mass
};

struct MeasureOptions {
    // Locations closer than merge_rel * max(1, |x|) are considered equal and
    // merged by mass addition.  Relative so that lattices at any magnitude
    // survive floating-point noise in convolution sums.
    double merge_rel = 1e-9;
    // Atoms with |mass| <= prune_threshold are dropped (and accounted for in
    // dropped_mass_bound).
    double prune_threshold = 1e-15;
};

class SignedMeasure {
public:
    SignedMeasure() = default;
    explicit SignedMeasure(MeasureOptions opts) : opts_(opts) {}

    /// Build a measure from (location, mass) pairs in any order.  Coincident
    /// (within tolerance) locations are merged, tiny masses pruned.
    static SignedMeasure from_atoms(const std::vector<std::pair<double, double>>& pairs,
                                    MeasureOptions opts = {}) {
        std::vector<Atom> raw;
        raw.reserve(pairs.size());
        for (const auto& [x, m] : pairs) {
            if (!std::isfinite(x) || !std::isfinite(m))
                throw input_error("from_atoms: non-finite location or mass");
            raw.push_back({x, m});
        }
        return make(std::move(raw), opts, 0.0);
    }

    /// Point mass `mass` at `x`.
    static SignedMeasure dirac(double x, double mass = 1.0, MeasureOptions opts = {}) {
        return from_atoms({{x, mass}}, opts);
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    double merge_rel() const { return opts_.merge_rel; }
    double prune_threshold() const { return opts_.prune_threshold; }
    const MeasureOptions& options() const { return opts_; }

    /// Total-variation upper bound on mass lost to pruning / truncation so far.
    double dropped_mass_bound() const { return dropped_; }

    /// W(R): the (signed) total mass.
    double total_mass() const {
        double s = 0.0;
        for (const auto& a : atoms_) s += a.mass;
        return s;
    }

    // --- internal constructors used by the operations below -------------

    /// Normalize raw atoms (sort, merge, prune) and carry `base_dropped`
    /// plus whatever pruning discards into the result's dropped bound.
    static SignedMeasure make(std::vector<Atom> raw, MeasureOptions opts, double base_dropped) {
        if (opts.merge_rel < 0 || !std::isfinite(opts.merge_rel))
            throw input_error("measure: merge tolerance must be finite and nonnegative");
        if (opts.prune_threshold < 0 || !std::isfinite(opts.prune_threshold))
            throw input_error("measure: prune threshold must be finite and nonnegative");
        std::sort(raw.begin(), raw.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });

        SignedMeasure out(opts);
        out.dropped_ = base_dropped;
        std::vector<Atom>& acc = out.atoms_;
        acc.reserve(raw.size());

        // Merge pass: cluster chains of locations whose consecutive gaps are
        // within tolerance.  The cluster's representative location is that of
        // its largest-|mass| member, which keeps exact lattice points exact
        // when rounding noise merges into them.
        std::size_t i = 0;
        const std::size_t n = raw.size();
        while (i < n) {
            double sum = raw[i].mass;
            double rep_x = raw[i].x;
            double rep_m = std::abs(raw[i].mass);
            double last_x = raw[i].x;
            std::size_t j = i + 1;
            while (j < n) {
                const double gap = raw[j].x - last_x;
                const double scale = std::max({1.0, std::abs(last_x), std::abs(raw[j].x)});
                if (gap > opts.merge_rel * scale) break;
                sum += raw[j].mass;
                if (std::abs(raw[j].mass) > rep_m) {
                    rep_m = std::abs(raw[j].mass);
                    rep_x = raw[j].x;
                }
                last_x = raw[j].x;
                ++j;
            }
            if (!std::isfinite(sum)) throw input_error("measure: mass overflow during merge");
            if (std::abs(sum) <= opts.prune_threshold)
                out.dropped_ += std::abs(sum);
            else
                acc.push_back({rep_x, sum});
            i = j;
        }
        return out;
    }

    /// Reconstruct from already-normalized data (deserialization path).
    static SignedMeasure adopt(std::vector<Atom> sorted, MeasureOptions opts, double dropped) {
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            if (!std::isfinite(sorted[i].x) || !std::isfinite(sorted[i].mass))
                throw input_error("measure: non-finite atom");
            if (i > 0 && !(sorted[i - 1].x < sorted[i].x))
                throw input_error("measure: atoms must be sorted with strictly increasing locations");
        }
        if (dropped < 0 || !std::isfinite(dropped))
            throw input_error("measure: dropped-mass bound must be finite and nonnegative");
        SignedMeasure out(opts);
        out.atoms_ = std::move(sorted);
        out.dropped_ = dropped;
        return out;
    }

    void add_dropped(double extra) { dropped_ += extra; }

private:
    std::vector<Atom> atoms_;
    MeasureOptions opts_;
    double dropped_ = 0.0;
};

inline MeasureOptions combine(const MeasureOptions& a, const MeasureOptions& b) {
    return {std::max(a.merge_rel, b.merge_rel), std::max(a.prune_threshold, b.prune_threshold)};
}

// --------------------------------------------------------------------------
// Norms, moments and pointwise functionals
// --------------------------------------------------------------------------

/// Total-variation norm: sum of |mass| over atoms.
inline double total_variation(const SignedMeasure& w) {
    double s = 0.0;
    for (const auto& a : w.atoms()) s += std::abs(a.mass);
    return s;
}

/// Kolmogorov (uniform) norm: sup_x |W((-inf, x])|.
inline double kolmogorov_norm(const SignedMeasure& w) {
    double run = 0.0, best = 0.0;
    for (const auto& a : w.atoms()) {
        run += a.mass;
        best = std::max(best, std::abs(run));
    }
    return best;
}

/// W((-inf, x]) for a signed measure.
inline double cdf(const SignedMeasure& w, double x) {
    if (!std::isfinite(x)) throw input_error("cdf: non-finite argument");
    double s = 0.0;
    for (const auto& a : w.atoms()) {
        if (a.x > x) break;
        s += a.mass;
    }
    return s;
}

/// Characteristic function  W^(t) = sum_k m_k e^{i t x_k}.
inline std::complex<double> charfn(const SignedMeasure& w, double t) {
    if (!std::isfinite(t)) throw input_error("charfn: non-finite argument");
    double re = 0.0, im = 0.0;
    for (const auto& a : w.atoms()) {
        re += a.mass * std::cos(t * a.x);
        im += a.mass * std::sin(t * a.x);
    }
    return {re, im};
}

/// sum_k x_k m_k (signed first moment).
inline double mean(const SignedMeasure& w) {
    double s = 0.0;
    for (const auto& a : w.atoms()) s += a.x * a.mass;
    return s;
}

/// sum_k |x_k|^r m_k.
inline double abs_moment(const SignedMeasure& w, double r) {
    double s = 0.0;
    for (const auto& a : w.atoms()) s += std::pow(std::abs(a.x), r) * a.mass;
    return s;
}

/// Mass placed strictly outside [-h, h].
inline double mass_outside(const SignedMeasure& w, double h) {
    double s = 0.0;
    for (const auto& a : w.atoms())
        if (std::abs(a.x) > h) s += a.mass;
    return s;
}

// --------------------------------------------------------------------------
// Algebra
// --------------------------------------------------------------------------

inline SignedMeasure add(const SignedMeasure& a, const SignedMeasure& b) {
    std::vector<Atom> raw;
    raw.reserve(a.size() + b.size());
    raw.insert(raw.end(), a.atoms().begin(), a.atoms().end());
    raw.insert(raw.end(), b.atoms().begin(), b.atoms().end());
    return SignedMeasure::make(std::move(raw), combine(a.options(), b.options()),
                               a.dropped_mass_bound() + b.dropped_mass_bound());
}

inline SignedMeasure scale_mass(const SignedMeasure& w, double c) {
    if (!std::isfinite(c)) throw input_error("scale_mass: non-finite factor");
    std::vector<Atom> raw = w.atoms();
    for (auto& a : raw) a.mass *= c;
    return SignedMeasure::make(std::move(raw), w.options(),
                               w.dropped_mass_bound() * std::abs(c));
}

inline SignedMeasure subtract(const SignedMeasure& a, const SignedMeasure& b) {
    return add(a, scale_mass(b, -1.0));
}

/// Pushforward under x -> w*x.  w = 0 collapses all mass to the origin.
inline SignedMeasure scale_support(const SignedMeasure& f, double w) {
    if (!std::isfinite(w)) throw input_error("scale_support: non-finite weight");
    if (w == 0.0) {
        const double total = f.total_mass();
        return SignedMeasure::make({{0.0, total}}, f.options(), f.dropped_mass_bound());
    }
    std::vector<Atom> raw = f.atoms();
    for (auto& a : raw) a.x *= w;
    return SignedMeasure::make(std::move(raw), f.options(), f.dropped_mass_bound());
}

/// Pushforward under x -> -x.
inline SignedMeasure reflect(const SignedMeasure& f) { return scale_support(f, -1.0); }

/// Convolution: all pairwise location sums with multiplied masses.
inline SignedMeasure convolve(const SignedMeasure& a, const SignedMeasure& b) {
    const double tv_a = total_variation(a), tv_b = total_variation(b);
    const double base = a.dropped_mass_bound() * (tv_b + b.dropped_mass_bound()) +
                        b.dropped_mass_bound() * tv_a;
    std::vector<Atom> raw;
    raw.reserve(a.size() * b.size());
    for (const auto& pa : a.atoms())
        for (const auto& pb : b.atoms()) raw.push_back({pa.x + pb.x, pa.mass * pb.mass});
    return SignedMeasure::make(std::move(raw), combine(a.options(), b.options()), base);
}

/// n-fold convolution power by binary exponentiation.  F^{*0} is the unit
/// point mass at 0.
inline SignedMeasure convolve_power(const SignedMeasure& f, long long n) {
    if (n < 0) throw input_error("convolve_power: negative exponent");
    SignedMeasure result = SignedMeasure::dirac(0.0, 1.0, f.options());
    if (n == 0) return result;
    SignedMeasure base = f;
    long long k = n;
    while (true) {
        if (k & 1) result = convolve(result, base);
        k >>= 1;
        if (k == 0) break;
        base = convolve(base, base);
    }
    return result;
}

/// Exponential  exp{W} = sum_{m>=0} W^{*m} / m!  truncated once the total-
/// variation tail bound ||W||^{K+1} e^{||W||} / (K+1)!  drops below
/// series_tol.  The tail bound is added to the result's dropped-mass bound.
/// Throws resource_error if more than max_terms terms would be needed.
inline SignedMeasure exp_measure(const SignedMeasure& w, double series_tol = 1e-12,
                                 int max_terms = 10000) {
    if (!(series_tol > 0) || !std::isfinite(series_tol))
        throw input_error("exp_measure: series tolerance must be positive");
    const double nw = total_variation(w);
    // Smallest K with ||W||^{K+1} e^{||W||} / (K+1)! < series_tol, via logs.
    int K = 0;
    double tail = 0.0;
    if (nw > 0.0) {
        for (K = 0;; ++K) {
            const double log_tail = (K + 1) * std::log(nw) + nw - std::lgamma(K + 2.0);
            tail = std::exp(log_tail);
            if (tail < series_tol) break;
            if (K >= max_terms)
                throw resource_error("exp_measure: series needs more than " +
                                     std::to_string(max_terms) + " terms (||W|| = " +
                                     std::to_string(nw) + ")");
        }
    }

    SignedMeasure result = SignedMeasure::dirac(0.0, 1.0, w.options());
    SignedMeasure term = result;
    for (int m = 1; m <= K; ++m) {
        term = scale_mass(convolve(term, w), 1.0 / m);
        result = add(result, term);
    }
    result.add_dropped(tail);
    return result;
}

// --------------------------------------------------------------------------
// Concentration function
// --------------------------------------------------------------------------

/// Levy concentration  Q(F, h) = sup_x F([x, x+h])  for a probability
/// distribution F and window width h >= 0.  The supremum over closed windows
/// is attained with the left edge at an atom; a relative epsilon on the right
/// edge keeps windows whose width matches a lattice gap exactly closed under
/// floating point.
inline double concentration(const SignedMeasure& f, double h) {
    if (!std::isfinite(h) || h < 0) throw input_error("concentration: window width must be >= 0");
    const auto& at = f.atoms();
    double total = 0.0;
    for (const auto& a : at) {
        if (a.mass < -1e-12)
            throw domain_error("concentration: measure has negative mass");
        total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw domain_error("concentration: measure is not a probability distribution (mass " +
                           std::to_string(total) + ")");

    std::vector<double> prefix(at.size() + 1, 0.0);
    for (std::size_t i = 0; i < at.size(); ++i) prefix[i + 1] = prefix[i] + at[i].mass;

    double best = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        if (j < i) j = i;
        const double right = at[i].x + h;
        const double eps = 1e-12 * std::max(1.0, std::abs(right));
        while (j + 1 < at.size() && at[j + 1].x <= right + eps) ++j;
        best = std::max(best, prefix[j + 1] - prefix[i]);
    }
    return std::min(best, 1.0 + 1e-12);
}

/// Kolmogorov distance between two measures (norm of the difference; near-
/// coincident atom locations are merged by the subtraction).
inline double kolmogorov_distance(const SignedMeasure& a, const SignedMeasure& b) {
    return kolmogorov_norm(subtract(a, b));
}

/// Total-variation distance (norm of the difference).
inline double total_variation_distance(const SignedMeasure& a, const SignedMeasure& b) {
    return total_variation(subtract(a, b));
}

// --------------------------------------------------------------------------
// Serialization (JSON; doubles survive round trips bit-exactly)
// --------------------------------------------------------------------------

inline nlohmann::json to_json(const SignedMeasure& w) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : w.atoms()) atoms.push_back({{"x", a.x}, {"m", a.mass}});
    return nlohmann::json{{"atoms", std::move(atoms)},
                          {"merge_rel", w.merge_rel()},
                          {"prune_threshold", w.prune_threshold()},
                          {"dropped_mass_bound", w.dropped_mass_bound()}};
}

inline SignedMeasure measure_from_json(const nlohmann::json& j) {
    try {
        MeasureOptions opts{j.at("merge_rel").get<double>(),
                            j.at("prune_threshold").get<double>()};
        std::vector<Atom> atoms;
        for (const auto& e : j.at("atoms"))
            atoms.push_back({e.at("x").get<double>(), e.at("m").get<double>()});
        return SignedMeasure::adopt(std::move(atoms), opts,
                                    j.at("dropped_mass_bound").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("measure_from_json: ") + e.what());
    }
}

} // namespace cpsmooth
