// Compound-Poisson approximants and smoothing measures.
//
// Every approximant here is exp{W} for an exponent W assembled from
// per-block components
//
//     W_m = r1 * (J - delta_0) + r2 * (J - delta_0)^2,
//
// with J a probability jump law.  First-order approximants use only the
// linear rate r1; second-order ("quad") approximants add a signed quadratic
// correction r2.  Smoothing measures are the pure-linear, symmetric-jump
// special case; their concentration function Q(M, h) multiplies the error
// bounds in bounds.hpp.

#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "blocks.hpp"
#include "errors.hpp"
#include "measure.hpp"

namespace cpsmooth {

struct CPComponent {
    double rate_linear = 0.0;
    double rate_quadratic = 0.0;
    SignedMeasure jump;
};

namespace detail {

inline void check_jump_distribution(const SignedMeasure& j, const char* who) {
    if (j.empty()) throw input_error(std::string(who) + ": jump law is empty");
    double total = 0.0;
    for (const auto& a : j.atoms()) {
        if (a.mass < -1e-12)
            throw input_error(std::string(who) + ": jump law has negative mass");
        total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw input_error(std::string(who) + ": jump law must have total mass 1 (got " +
                          std::to_string(total) + ")");
}

/// (J - delta_0)^2 = J*J - 2J + delta_0, expanded eagerly.
inline SignedMeasure centered_square(const SignedMeasure& j) {
    SignedMeasure sq = convolve(j, j);
    sq = add(sq, scale_mass(j, -2.0));
    return add(sq, SignedMeasure::dirac(0.0, 1.0, j.options()));
}

} // namespace detail

/// exp{ sum_m [ r1_m (J_m - d) + r2_m (J_m - d)^2 ] }.
inline SignedMeasure compound_poisson(const std::vector<CPComponent>& comps,
                                      double series_tol = 1e-12, MeasureOptions opts = {}) {
    if (comps.empty()) throw input_error("compound_poisson: no components");
    SignedMeasure exponent(opts);
    const SignedMeasure unit = SignedMeasure::dirac(0.0, 1.0, opts);
    for (const auto& c : comps) {
        if (!std::isfinite(c.rate_linear) || !std::isfinite(c.rate_quadratic))
            throw input_error("compound_poisson: non-finite rate");
        detail::check_jump_distribution(c.jump, "compound_poisson");
        if (c.rate_linear != 0.0)
            exponent = add(exponent, scale_mass(subtract(c.jump, unit), c.rate_linear));
        if (c.rate_quadratic != 0.0)
            exponent = add(exponent, scale_mass(detail::centered_square(c.jump), c.rate_quadratic));
    }
    return exp_measure(exponent, series_tol);
}

/// Characteristic function of the compound-Poisson law with these components,
/// evaluated in closed form: exp{ sum r1 (J^(t)-1) + r2 (J^(t)-1)^2 }.
inline std::complex<double> compound_poisson_charfn(const std::vector<CPComponent>& comps,
                                                    double t) {
    std::complex<double> expo = 0.0;
    for (const auto& c : comps) {
        const std::complex<double> z = charfn(c.jump, t) - 1.0;
        expo += c.rate_linear * z + c.rate_quadratic * z * z;
    }
    return std::exp(expo);
}

namespace detail {

inline SignedMeasure sym_two_point(double w, MeasureOptions opts) {
    return SignedMeasure::from_atoms({{w, 0.5}, {-w, 0.5}}, opts);
}

} // namespace detail

// --------------------------------------------------------------------------
// Approximants built from block specifications
// --------------------------------------------------------------------------

/// Components of the first-order Poisson point-mass approximant: one
/// component per block, rate Gamma1(m), jump at the block weight.
inline std::vector<CPComponent> poisson_components(const std::vector<BlockSpec>& blocks,
                                                   bool with_quad, MeasureOptions opts = {}) {
    if (blocks.empty()) throw input_error("approximant: no blocks");
    std::vector<CPComponent> comps;
    comps.reserve(blocks.size());
    for (const auto& b : blocks) {
        if (b.kind == BlockKind::general_jump)
            throw domain_error("approximant: point-mass approximants need counting blocks");
        const MomentSummary m = block_moments(b);
        comps.push_back({m.gamma1, with_quad ? m.gamma2 : 0.0,
                         SignedMeasure::dirac(b.weight, 1.0, opts)});
    }
    return comps;
}

/// First-order Poisson approximant  exp{ sum_m Gamma1(m) (d_{w_m} - d) }.
inline SignedMeasure approx_poisson(const std::vector<BlockSpec>& blocks,
                                    double series_tol = 1e-12, MeasureOptions opts = {}) {
    return compound_poisson(poisson_components(blocks, false, opts), series_tol, opts);
}

/// Second-order signed approximant with the dependence-aware quadratic rate:
/// exp{ sum_m [ Gamma1(m)(d_w - d) + Gamma2(m)(d_w - d)^2 ] }.
inline SignedMeasure approx_poisson_quad(const std::vector<BlockSpec>& blocks,
                                         double series_tol = 1e-12, MeasureOptions opts = {}) {
    return compound_poisson(poisson_components(blocks, true, opts), series_tol, opts);
}

/// Components for blocks of iid lattice summands: linear rate n nu1, signed
/// quadratic rate n (nu2 - nu1^2) / 2.
inline std::vector<CPComponent> iid_quad_components(const std::vector<BlockSpec>& blocks,
                                                    MeasureOptions opts = {}) {
    if (blocks.empty()) throw input_error("approximant: no blocks");
    std::vector<CPComponent> comps;
    for (const auto& b : blocks) {
        if (b.kind != BlockKind::iid_lattice)
            throw domain_error("approximant: iid quad form needs iid lattice blocks");
        const MomentSummary m = block_moments(b);
        comps.push_back({b.n * m.nu1, 0.5 * b.n * (m.nu2 - m.nu1 * m.nu1),
                         SignedMeasure::dirac(b.weight, 1.0, opts)});
    }
    return comps;
}

inline SignedMeasure approx_iid_quad(const std::vector<BlockSpec>& blocks,
                                     double series_tol = 1e-12, MeasureOptions opts = {}) {
    return compound_poisson(iid_quad_components(blocks, opts), series_tol, opts);
}

/// Components for jump-mixture blocks ((1-p)d + pB)^n: rate n p with the
/// weighted jump law; order 2 adds the signed rate -n p^2 / 2.
inline std::vector<CPComponent> jump_components(const std::vector<BlockSpec>& blocks, int order,
                                                MeasureOptions opts = {}) {
    if (blocks.empty()) throw input_error("approximant: no blocks");
    if (order != 1 && order != 2) throw input_error("approximant: order must be 1 or 2");
    std::vector<CPComponent> comps;
    for (const auto& b : blocks) {
        if (b.kind != BlockKind::general_jump)
            throw domain_error("approximant: jump form needs jump-mixture blocks");
        validate(b);
        SignedMeasure jump = scale_support(b.jump, b.weight);
        jump = SignedMeasure::make(std::vector<Atom>(jump.atoms().begin(), jump.atoms().end()),
                                   combine(jump.options(), opts), jump.dropped_mass_bound());
        comps.push_back({b.n * b.p, order == 2 ? -0.5 * b.n * b.p * b.p : 0.0, std::move(jump)});
    }
    return comps;
}

inline SignedMeasure approx_jump(const std::vector<BlockSpec>& blocks, int order,
                                 double series_tol = 1e-12, MeasureOptions opts = {}) {
    return compound_poisson(jump_components(blocks, order, opts), series_tol, opts);
}

// --------------------------------------------------------------------------
// Smoothing measures
// --------------------------------------------------------------------------

/// The four compound-Poisson smoothing laws whose concentration functions
/// enter the bounds:
///   sym_gamma  - jumps +-w_m with rate 0.05 Gamma1(m)       (1-dependent bounds)
///   sym_lambda - jumps +-w_m with rate n_m lambda_m / 2     (iid lattice bounds)
///   sym_jump   - symmetrized weighted jump law with rate n_m p_m (1-p_m)/2
///   half_jump  - unsymmetrized weighted jump law, same rate (per-summand bound)
enum class SmoothingKind { sym_gamma, sym_lambda, sym_jump, half_jump };

inline const char* to_string(SmoothingKind k) {
    switch (k) {
        case SmoothingKind::sym_gamma: return "sym_gamma";
        case SmoothingKind::sym_lambda: return "sym_lambda";
        case SmoothingKind::sym_jump: return "sym_jump";
        case SmoothingKind::half_jump: return "half_jump";
    }
    return "?";
}

inline std::vector<CPComponent> smoothing_components(SmoothingKind kind,
                                                     const std::vector<BlockSpec>& blocks,
                                                     MeasureOptions opts = {}) {
    if (blocks.empty()) throw input_error("smoothing: no blocks");
    std::vector<CPComponent> comps;
    for (const auto& b : blocks) {
        switch (kind) {
            case SmoothingKind::sym_gamma: {
                if (b.kind == BlockKind::general_jump)
                    throw domain_error("smoothing: sym_gamma needs counting blocks");
                const MomentSummary m = block_moments(b);
                comps.push_back({0.05 * m.gamma1, 0.0, detail::sym_two_point(b.weight, opts)});
                break;
            }
            case SmoothingKind::sym_lambda: {
                if (b.kind != BlockKind::iid_lattice)
                    throw domain_error("smoothing: sym_lambda needs iid lattice blocks");
                const MomentSummary m = block_moments(b);
                if (!m.lambda || *m.lambda <= 0.0)
                    throw domain_error("smoothing: sym_lambda needs nu1 - nu1^2 - nu2 > 0");
                comps.push_back({0.5 * b.n * *m.lambda, 0.0, detail::sym_two_point(b.weight, opts)});
                break;
            }
            case SmoothingKind::sym_jump: {
                if (b.kind != BlockKind::general_jump)
                    throw domain_error("smoothing: sym_jump needs jump-mixture blocks");
                validate(b);
                const SignedMeasure jw = scale_support(b.jump, b.weight);
                const SignedMeasure sym = scale_mass(add(jw, reflect(jw)), 0.5);
                comps.push_back({0.5 * b.n * b.p * (1.0 - b.p), 0.0, sym});
                break;
            }
            case SmoothingKind::half_jump: {
                if (b.kind != BlockKind::general_jump)
                    throw domain_error("smoothing: half_jump needs jump-mixture blocks");
                validate(b);
                comps.push_back({0.5 * b.n * b.p * (1.0 - b.p), 0.0,
                                 scale_support(b.jump, b.weight)});
                break;
            }
        }
    }
    return comps;
}

inline SignedMeasure smoothing_measure(SmoothingKind kind, const std::vector<BlockSpec>& blocks,
                                       double series_tol = 1e-12, MeasureOptions opts = {}) {
    return compound_poisson(smoothing_components(kind, blocks, opts), series_tol, opts);
}

/// Closed-form characteristic functions of the symmetric smoothing measures
/// (real-valued); used to cross-check the constructed measures.
inline double smoothing_charfn_closed(SmoothingKind kind, const std::vector<BlockSpec>& blocks,
                                      double t) {
    double expo = 0.0;
    for (const auto& b : blocks) {
        switch (kind) {
            case SmoothingKind::sym_gamma: {
                const MomentSummary m = block_moments(b);
                const double s = std::sin(0.5 * t * b.weight);
                expo += -0.1 * m.gamma1 * s * s;
                break;
            }
            case SmoothingKind::sym_lambda: {
                const MomentSummary m = block_moments(b);
                if (!m.lambda) throw domain_error("smoothing: sym_lambda needs iid lattice blocks");
                const double s = std::sin(0.5 * t * b.weight);
                expo += -b.n * *m.lambda * s * s;
                break;
            }
            case SmoothingKind::sym_jump: {
                const SignedMeasure jw = scale_support(b.jump, b.weight);
                expo += 0.5 * b.n * b.p * (1.0 - b.p) * (charfn(jw, t).real() - 1.0);
                break;
            }
            case SmoothingKind::half_jump:
                throw domain_error("smoothing: half_jump charfn is not real; use the measure");
        }
    }
    return std::exp(expo);
}

} // namespace cpsmooth
