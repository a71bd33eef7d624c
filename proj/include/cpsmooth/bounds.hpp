// Error-bound shapes, validity conditions and inequality validators.
//
// A "shape" is the fully evaluated right-hand side of an approximation error
// bound with every unknown absolute constant set to 1; the constant policy
// attached to each shape records which constants were unit-defaulted and
// which are explicit in the underlying inequality.  Shapes factor as
//
//     total = smoothing_q * sum(breakdown)
//
// where smoothing_q is the concentration factor Q(M, h) of the variant's
// smoothing measure (1 when the variant has none, with all prefactors folded
// into the per-block breakdown).
//
// Validators check the auxiliary inequalities (concentration-function
// estimates, a Parseval-type total-variation bound, characteristic-function
// decay) numerically on concrete inputs and report lhs/rhs/margin records.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "approximants.hpp"
#include "blocks.hpp"
#include "errors.hpp"
#include "measure.hpp"
#include "quadrature.hpp"

namespace cpsmooth {

// --------------------------------------------------------------------------
// Variants and conditions
// --------------------------------------------------------------------------

enum class BoundVariant {
    onedep_first,   // Poisson approximant, 1-dependent counting blocks
    onedep_second,  // signed quad approximant, 1-dependent counting blocks
    iid_first,      // Poisson approximant, iid lattice blocks
    iid_second,     // signed quad approximant, iid lattice blocks
    jump_first,     // CP approximant, jump-mixture blocks
    jump_second,    // signed CP approximant, jump-mixture blocks
    bernoulli_min,  // h-free min-form shape for Bernoulli blocks
    summandwise,    // per-summand CP bound with explicit pi^2/4 constant
    berry_esseen,   // normal-approximation reference shape
    poisson_min,    // h-free min(sum n p^2, max p) reference shape
    runs_naive,     // per-block two-runs shape: sum p/sqrt(n)
    runs_joint,     // joint two-runs shape: sum p^2 / sqrt(sum n p^2)
    bernoulli_sqrt, // sum n p^2 / sqrt(sum n p) (no min factors)
};

inline const char* to_string(BoundVariant v) {
    switch (v) {
        case BoundVariant::onedep_first: return "onedep_first";
        case BoundVariant::onedep_second: return "onedep_second";
        case BoundVariant::iid_first: return "iid_first";
        case BoundVariant::iid_second: return "iid_second";
        case BoundVariant::jump_first: return "jump_first";
        case BoundVariant::jump_second: return "jump_second";
        case BoundVariant::bernoulli_min: return "bernoulli_min";
        case BoundVariant::summandwise: return "summandwise";
        case BoundVariant::berry_esseen: return "berry_esseen";
        case BoundVariant::poisson_min: return "poisson_min";
        case BoundVariant::runs_naive: return "runs_naive";
        case BoundVariant::runs_joint: return "runs_joint";
        case BoundVariant::bernoulli_sqrt: return "bernoulli_sqrt";
    }
    return "?";
}

inline std::optional<BoundVariant> parse_bound_variant(const std::string& s) {
    using V = BoundVariant;
    for (V v : {V::onedep_first, V::onedep_second, V::iid_first, V::iid_second, V::jump_first,
                V::jump_second, V::bernoulli_min, V::summandwise, V::berry_esseen, V::poisson_min,
                V::runs_naive, V::runs_joint, V::bernoulli_sqrt})
        if (s == to_string(v)) return v;
    return std::nullopt;
}

enum class ConditionFamily { onedep, iid, jump, summandwise };

inline const char* to_string(ConditionFamily f) {
    switch (f) {
        case ConditionFamily::onedep: return "onedep";
        case ConditionFamily::iid: return "iid";
        case ConditionFamily::jump: return "jump";
        case ConditionFamily::summandwise: return "summandwise";
    }
    return "?";
}

/// The condition family guarding a variant, when it has one.
inline std::optional<ConditionFamily> condition_family(BoundVariant v) {
    switch (v) {
        case BoundVariant::onedep_first:
        case BoundVariant::onedep_second: return ConditionFamily::onedep;
        case BoundVariant::iid_first:
        case BoundVariant::iid_second:
        case BoundVariant::bernoulli_min:
        case BoundVariant::bernoulli_sqrt: return ConditionFamily::iid;
        case BoundVariant::jump_first:
        case BoundVariant::jump_second: return ConditionFamily::jump;
        case BoundVariant::summandwise: return ConditionFamily::summandwise;
        default: return std::nullopt;
    }
}

struct ConditionRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string relation; // "<=", "<", ">"
    bool pass = false;
};

struct ConditionReport {
    std::string family;
    std::vector<ConditionRecord> records;
    bool all_pass = true;

    void push(std::string name, double lhs, double rhs, std::string relation) {
        bool ok = false;
        if (relation == "<=") ok = lhs <= rhs;
        else if (relation == "<") ok = lhs < rhs;
        else if (relation == ">") ok = lhs > rhs;
        else if (relation == ">=") ok = lhs >= rhs;
        all_pass = all_pass && ok;
        records.push_back({std::move(name), lhs, rhs, std::move(relation), ok});
    }
};

namespace detail {

inline bool is_bernoulli(const BlockSpec& b) {
    return b.kind == BlockKind::iid_lattice && b.pmf.size() <= 2;
}

inline double bernoulli_p(const BlockSpec& b) { return b.pmf.size() == 2 ? b.pmf[1] : 0.0; }

inline std::string blk(std::size_t m) { return "block" + std::to_string(m + 1) + ": "; }

} // namespace detail

/// Evaluate the validity conditions of a bound family on concrete blocks.
inline ConditionReport check_conditions(ConditionFamily family,
                                        const std::vector<BlockSpec>& blocks) {
    if (blocks.empty()) throw input_error("check_conditions: no blocks");
    ConditionReport rep;
    rep.family = to_string(family);
    for (std::size_t m = 0; m < blocks.size(); ++m) {
        const BlockSpec& b = blocks[m];
        switch (family) {
            case ConditionFamily::onedep: {
                if (b.kind == BlockKind::general_jump)
                    throw domain_error("check_conditions: onedep needs counting blocks");
                const MomentSummary mom = block_moments(b);
                rep.push(detail::blk(m) + "nu1 <= 1/100", mom.nu1, 0.01, "<=");
                rep.push(detail::blk(m) + "nu2 <= nu1", mom.nu2, mom.nu1, "<=");
                rep.push(detail::blk(m) + "sum nu2 <= gamma1/20", b.n * mom.nu2,
                         mom.gamma1 / 20.0, "<=");
                rep.push(detail::blk(m) + "sum |cov| <= gamma1/20",
                         (b.n - 1) * std::abs(mom.cov), mom.gamma1 / 20.0, "<=");
                break;
            }
            case ConditionFamily::iid: {
                if (b.kind != BlockKind::iid_lattice)
                    throw domain_error("check_conditions: iid needs iid lattice blocks");
                const MomentSummary mom = block_moments(b);
                rep.push(detail::blk(m) + "nu1 - nu1^2 - nu2 > 0", mom.lambda.value(), 0.0, ">");
                break;
            }
            case ConditionFamily::jump: {
                if (b.kind != BlockKind::general_jump)
                    throw domain_error("check_conditions: jump needs jump-mixture blocks");
                rep.push(detail::blk(m) + "p < 1", b.p, 1.0, "<");
                break;
            }
            case ConditionFamily::summandwise: {
                if (b.kind != BlockKind::general_jump)
                    throw domain_error("check_conditions: summandwise needs jump-mixture blocks");
                rep.push(detail::blk(m) + "p < 1", b.p, 1.0, "<");
                const SignedMeasure jw = scale_support(b.jump, b.weight);
                rep.push(detail::blk(m) + "jump support > 0",
                         jw.atoms().empty() ? 0.0 : jw.atoms().front().x, 0.0, ">");
                break;
            }
        }
    }
    return rep;
}

// --------------------------------------------------------------------------
// Shapes
// --------------------------------------------------------------------------

enum class Gamma1Reading { per_block, global };

inline const char* to_string(Gamma1Reading g) {
    return g == Gamma1Reading::per_block ? "per_block" : "global";
}

struct ShapeOptions {
    double h = std::numeric_limits<double>::quiet_NaN(); // NaN: use min_m |w_m| / 2
    Gamma1Reading gamma1_reading = Gamma1Reading::per_block;
    double series_tol = 1e-12;
    MeasureOptions measure_opts{};
};

struct ConstantPolicy {
    std::vector<std::string> unit_constants;    // unknown absolute constants set to 1
    std::vector<std::string> explicit_constants; // constants explicit in the inequality
    std::string gamma1_reading;                  // only meaningful for onedep shapes
    std::string notes;
};

struct BoundShape {
    BoundVariant variant{};
    double h = std::numeric_limits<double>::quiet_NaN();
    double smoothing_q = 1.0;
    std::vector<double> breakdown; // per block (summand groups for summandwise)
    double total = 0.0;
    ConstantPolicy policy;
};

/// Default window for Q factors: half the smallest absolute block weight.
inline double default_window(const std::vector<BlockSpec>& blocks) {
    if (blocks.empty()) throw input_error("default_window: no blocks");
    double w = std::numeric_limits<double>::infinity();
    for (const auto& b : blocks) w = std::min(w, std::abs(b.weight));
    return 0.5 * w;
}

namespace detail {

inline double min1(double x) { return std::min(1.0, x); }

/// min(1, base^expo) with base >= 0, expo < 0, treating base = 0 as 1.
inline double min1_pow(double base, double expo) {
    if (base <= 0.0) return 1.0;
    return std::min(1.0, std::pow(base, expo));
}

inline double finalize(BoundShape& s) {
    double sum = 0.0;
    for (double c : s.breakdown) sum += c;
    s.total = s.smoothing_q * sum;
    return s.total;
}

struct SummandMoments {
    double beta3 = 0.0;  // E |w X|^3
    double sigma2 = 0.0; // Var(w X)
    double mean = 0.0;   // E w X
};

inline SummandMoments summand_moments(const BlockSpec& b) {
    SummandMoments s;
    const double w = b.weight;
    if (b.kind == BlockKind::general_jump) {
        const double m1 = b.p * mean(b.jump);
        const double m2 = b.p * abs_moment(b.jump, 2.0);
        const double m3 = b.p * abs_moment(b.jump, 3.0);
        s.mean = w * m1;
        s.sigma2 = w * w * (m2 - m1 * m1);
        s.beta3 = std::abs(w * w * w) * m3;
    } else {
        const MomentSummary mom = block_moments(b);
        const double m1 = mom.nu1;
        const double m2 = mom.nu2 + mom.nu1;
        const double m3 = mom.nu3 + 3.0 * mom.nu2 + mom.nu1;
        s.mean = w * m1;
        s.sigma2 = w * w * (m2 - m1 * m1);
        s.beta3 = std::abs(w * w * w) * m3;
    }
    return s;
}

} // namespace detail

/// Evaluate a bound shape on blocks.  Throws domain_error when the variant
/// does not apply to the block kinds (or a needed rate is degenerate);
/// validity conditions are *not* enforced here - use check_conditions.
inline BoundShape bound_shape(BoundVariant variant, const std::vector<BlockSpec>& blocks,
                              ShapeOptions opts = {}) {
    if (blocks.empty()) throw input_error("bound_shape: no blocks");
    BoundShape shape;
    shape.variant = variant;
    shape.policy.gamma1_reading = "";

    const bool uses_window =
        variant == BoundVariant::onedep_first || variant == BoundVariant::onedep_second ||
        variant == BoundVariant::iid_first || variant == BoundVariant::iid_second ||
        variant == BoundVariant::jump_first || variant == BoundVariant::jump_second ||
        variant == BoundVariant::summandwise;
    double h = opts.h;
    if (uses_window) {
        if (std::isnan(h)) h = default_window(blocks);
        if (!(h > 0) || !std::isfinite(h)) throw input_error("bound_shape: window h must be > 0");
        shape.h = h;
    }

    switch (variant) {
        case BoundVariant::onedep_first:
        case BoundVariant::onedep_second: {
            const bool second = variant == BoundVariant::onedep_second;
            const SignedMeasure m1 = smoothing_measure(SmoothingKind::sym_gamma, blocks,
                                                       opts.series_tol, opts.measure_opts);
            shape.smoothing_q = concentration(m1, h);
            double gamma_total = 0.0;
            std::vector<MomentSummary> moms;
            for (const auto& b : blocks) {
                moms.push_back(block_moments(b));
                gamma_total += moms.back().gamma1;
            }
            for (std::size_t m = 0; m < blocks.size(); ++m) {
                const auto& mom = moms[m];
                const double gm = mom.gamma1;
                const double gref = opts.gamma1_reading == Gamma1Reading::per_block ? gm
                                                                                    : gamma_total;
                const double wm = std::abs(blocks[m].weight);
                double contrib;
                if (!second)
                    contrib = mom.r0 * ((wm / h) * detail::min1_pow(gm, -0.5) +
                                        detail::min1_pow(gref, -1.0));
                else
                    contrib = mom.r1 * ((wm / h) * detail::min1_pow(gm, -1.0) +
                                        detail::min1_pow(gref, -1.5));
                shape.breakdown.push_back(contrib);
            }
            shape.policy.unit_constants = {second ? "C3" : "C2"};
            shape.policy.explicit_constants = {"0.05 (sym_gamma smoothing rate)"};
            shape.policy.gamma1_reading = to_string(opts.gamma1_reading);
            shape.policy.notes = "smoothing factor Q(sym_gamma, h)";
            break;
        }
        case BoundVariant::iid_first:
        case BoundVariant::iid_second: {
            const bool second = variant == BoundVariant::iid_second;
            const SignedMeasure m2 = smoothing_measure(SmoothingKind::sym_lambda, blocks,
                                                       opts.series_tol, opts.measure_opts);
            shape.smoothing_q = concentration(m2, h);
            for (const auto& b : blocks) {
                const MomentSummary mom = block_moments(b);
                const double lam = mom.lambda.value();
                if (!(lam > 0))
                    throw domain_error("bound_shape: iid shapes need nu1 - nu1^2 - nu2 > 0");
                const double nl = b.n * lam;
                const double wm = std::abs(b.weight);
                double contrib;
                if (!second)
                    contrib = b.n * (mom.nu2 + mom.nu1 * mom.nu1) *
                              ((wm / h) * detail::min1_pow(nl, -0.5) +
                               detail::min1_pow(nl, -1.0) * (1.0 + mom.nu1 / lam));
                else
                    contrib = b.n * (mom.nu3 + mom.nu1 * mom.nu2 + std::pow(mom.nu1, 3)) *
                              ((wm / h) * detail::min1_pow(nl, -1.0) +
                               detail::min1_pow(nl, -1.5) * (1.0 + mom.nu1 / lam));
                shape.breakdown.push_back(contrib);
            }
            shape.policy.unit_constants = {second ? "C5" : "C4"};
            shape.policy.notes = "smoothing factor Q(sym_lambda, h)";
            break;
        }
        case BoundVariant::jump_first:
        case BoundVariant::jump_second: {
            const bool second = variant == BoundVariant::jump_second;
            const SignedMeasure m3 = smoothing_measure(SmoothingKind::sym_jump, blocks,
                                                       opts.series_tol, opts.measure_opts);
            shape.smoothing_q = concentration(m3, h);
            for (const auto& b : blocks) {
                if (b.kind != BlockKind::general_jump)
                    throw domain_error("bound_shape: jump shapes need jump-mixture blocks");
                const MomentSummary mom = block_moments(b);
                const double mu1 = std::abs(b.weight) * mom.mu1.value();
                const double np = b.n * b.p;
                double contrib;
                if (!second)
                    contrib = b.n * b.p * b.p *
                              ((mu1 / h) * detail::min1_pow(np, -0.5) + detail::min1_pow(np, -1.0));
                else
                    contrib = b.n * std::pow(b.p, 3) *
                              ((mu1 / h) * detail::min1_pow(np, -1.0) + detail::min1_pow(np, -1.5));
                shape.breakdown.push_back(contrib);
            }
            shape.policy.unit_constants = {second ? "C9" : "C8"};
            shape.policy.notes = "smoothing factor Q(sym_jump, h); mu1 of the weighted jump";
            break;
        }
        case BoundVariant::bernoulli_min: {
            double np_total = 0.0;
            std::vector<double> raw;
            for (const auto& b : blocks) {
                if (!detail::is_bernoulli(b))
                    throw domain_error("bound_shape: bernoulli_min needs Bernoulli blocks");
                const double p = detail::bernoulli_p(b);
                np_total += b.n * p;
                raw.push_back(std::min(b.n * p * p, std::sqrt(double(b.n)) * std::pow(p, 1.5)));
            }
            if (!(np_total > 0))
                throw domain_error("bound_shape: bernoulli_min needs sum n p > 0");
            for (double r : raw) shape.breakdown.push_back(r / std::sqrt(np_total));
            shape.policy.unit_constants = {"C"};
            shape.policy.notes = "window-free; smoothing folded into the min factors";
            break;
        }
        case BoundVariant::summandwise: {
            for (const auto& b : blocks) {
                if (b.kind != BlockKind::general_jump)
                    throw domain_error("bound_shape: summandwise needs jump-mixture blocks");
                if (!(b.p < 1.0))
                    throw domain_error("bound_shape: summandwise needs p < 1");
                const SignedMeasure jw = scale_support(b.jump, b.weight);
                if (jw.atoms().empty() || jw.atoms().front().x <= 0.0)
                    throw domain_error("bound_shape: summandwise needs jump support on (0, inf)");
            }
            const SignedMeasure ht = smoothing_measure(SmoothingKind::half_jump, blocks,
                                                       opts.series_tol, opts.measure_opts);
            constexpr double quarter_pi_sq = 2.4674011002723395; // pi^2 / 4
            for (const auto& b : blocks) {
                const double mu = mean(scale_support(b.jump, b.weight));
                const double q = concentration(ht, mu);
                shape.breakdown.push_back(quarter_pi_sq * b.n * b.p * b.p / (1.0 - b.p) * q);
            }
            shape.policy.explicit_constants = {"pi^2/4"};
            shape.policy.notes = "per-summand Q(half_jump, mean jump) folded into breakdown";
            break;
        }
        case BoundVariant::berry_esseen: {
            double sigma2 = 0.0, beta3 = 0.0;
            bool dependent = false;
            for (const auto& b : blocks) {
                const auto sm = detail::summand_moments(b);
                sigma2 += b.n * sm.sigma2;
                beta3 += b.n * sm.beta3;
                dependent = dependent ||
                            b.kind == BlockKind::two_runs || b.kind == BlockKind::latent_driver;
            }
            if (!(sigma2 > 0)) throw domain_error("bound_shape: berry_esseen needs variance > 0");
            for (const auto& b : blocks) {
                const auto sm = detail::summand_moments(b);
                shape.breakdown.push_back(b.n * sm.beta3 / std::pow(sigma2, 1.5));
            }
            shape.policy.unit_constants = {"C1"};
            shape.policy.notes = dependent
                                     ? "reference shape only: marginal summand moments used "
                                       "although blocks are 1-dependent"
                                     : "independent-summand normal approximation shape";
            break;
        }
        case BoundVariant::poisson_min: {
            double sum_np2 = 0.0, max_p = 0.0;
            std::vector<double> raw;
            for (const auto& b : blocks) {
                double p;
                if (b.kind == BlockKind::general_jump) p = b.p;
                else if (detail::is_bernoulli(b)) p = detail::bernoulli_p(b);
                else
                    throw domain_error(
                        "bound_shape: poisson_min needs Bernoulli or jump-mixture blocks");
                sum_np2 += b.n * p * p;
                max_p = std::max(max_p, p);
                raw.push_back(b.n * p * p);
            }
            const double total = std::min(sum_np2, max_p);
            for (double r : raw)
                shape.breakdown.push_back(sum_np2 > 0 ? r * total / sum_np2 : 0.0);
            shape.policy.unit_constants = {"C"};
            shape.policy.notes = "min(sum n p^2, max p), window-free";
            break;
        }
        case BoundVariant::runs_naive:
        case BoundVariant::runs_joint: {
            double denom = 0.0;
            for (const auto& b : blocks) {
                if (b.kind != BlockKind::two_runs)
                    throw domain_error("bound_shape: runs shapes need two_runs blocks");
                denom += b.n * b.p * b.p;
            }
            for (const auto& b : blocks) {
                if (variant == BoundVariant::runs_naive)
                    shape.breakdown.push_back(b.p / std::sqrt(double(b.n)));
                else {
                    if (!(denom > 0))
                        throw domain_error("bound_shape: runs_joint needs sum n p^2 > 0");
                    shape.breakdown.push_back(b.p * b.p / std::sqrt(denom));
                }
            }
            shape.policy.unit_constants = {"C"};
            shape.policy.notes = variant == BoundVariant::runs_naive
                                     ? "triangle-inequality per-block shape"
                                     : "joint shape; smoothing folded into 1/sqrt(sum n p^2)";
            break;
        }
        case BoundVariant::bernoulli_sqrt: {
            double np_total = 0.0;
            for (const auto& b : blocks) {
                if (!detail::is_bernoulli(b))
                    throw domain_error("bound_shape: bernoulli_sqrt needs Bernoulli blocks");
                np_total += b.n * detail::bernoulli_p(b);
            }
            if (!(np_total > 0))
                throw domain_error("bound_shape: bernoulli_sqrt needs sum n p > 0");
            for (const auto& b : blocks) {
                const double p = detail::bernoulli_p(b);
                shape.breakdown.push_back(b.n * p * p / std::sqrt(np_total));
            }
            shape.policy.unit_constants = {"C"};
            shape.policy.notes = "sum n p^2 / sqrt(sum n p), window-free";
            break;
        }
    }
    detail::finalize(shape);
    return shape;
}

// --------------------------------------------------------------------------
// Measured-vs-shape comparison
// --------------------------------------------------------------------------

struct BoundReport {
    double measured = 0.0; // Kolmogorov distance exact vs approximant
    BoundShape shape;
    double ratio = std::numeric_limits<double>::quiet_NaN(); // measured / shape.total
    std::optional<ConditionReport> conditions;
};

inline BoundReport compare(const SignedMeasure& exact, const SignedMeasure& approximant,
                           BoundShape shape, std::optional<ConditionReport> conditions = {}) {
    BoundReport rep;
    rep.measured = kolmogorov_distance(exact, approximant);
    rep.shape = std::move(shape);
    rep.ratio = rep.shape.total > 0 ? rep.measured / rep.shape.total
                                    : std::numeric_limits<double>::quiet_NaN();
    rep.conditions = std::move(conditions);
    return rep;
}

// --------------------------------------------------------------------------
// Validators
// --------------------------------------------------------------------------

struct ValidationRecord {
    std::string check;
    nlohmann::json inputs;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0; // rhs - lhs for hard inequalities; measured constant otherwise
    bool pass = true;    // false only when a hard inequality fails
    bool hard = true;    // whether this record asserts an inequality
};

namespace detail {

/// Subdivision count for integrating a characteristic-function expression of
/// a measure with maximum |location| `span` over [lo, hi]: at least 32
/// samples per oscillation, floor of 2048.
inline int charfn_subdivisions(double span, double lo, double hi) {
    const double cycles = (hi - lo) * std::max(span, 1.0) / (2.0 * 3.141592653589793);
    const double n = std::max(2048.0, 32.0 * cycles);
    if (n > 2e6) throw resource_error("quadrature grid over 2e6 subdivisions");
    return static_cast<int>(n);
}

inline double max_abs_location(const SignedMeasure& f) {
    double s = 0.0;
    for (const auto& a : f.atoms()) s = std::max(s, std::abs(a.x));
    return s;
}

} // namespace detail

/// Concentration-function inequalities for a distribution F and windows
/// h, a > 0:
///   q_charfn_integral :  Q(F,h) <= (96/95)^2 h Int_{|t|<=1/h} |F^(t)| dt   (hard)
///   q_window_ratio    :  Q(F,h) <= (1 + h/a) Q(F,a)                        (hard)
///   q_cp_tail         :  measured constant  Q(exp{a(F-d)},h) sqrt(a F{|x|>h})
///   charfn_reverse    :  measured constant  h Int |F_s^| / Q(F_s,h)  on the
///                        symmetrization F_s = F * reflect(F)  (F_s^ >= 0)
inline std::vector<ValidationRecord> validate_concentration_bounds(
    const SignedMeasure& f, double h, double a, QuadratureOptions quad = {},
    double series_tol = 1e-12) {
    if (!(h > 0) || !(a > 0)) throw input_error("validate_concentration_bounds: h, a must be > 0");
    std::vector<ValidationRecord> out;
    const nlohmann::json inputs{{"atoms", f.size()}, {"h", h}, {"a", a}};

    const double qh = concentration(f, h);
    {
        const double span = detail::max_abs_location(f);
        QuadratureOptions q = quad;
        q.subdivisions = std::max(q.subdivisions,
                                  detail::charfn_subdivisions(span, -1.0 / h, 1.0 / h));
        const double integral =
            integrate([&](double t) { return std::abs(charfn(f, t)); }, -1.0 / h, 1.0 / h, q);
        const double c = (96.0 / 95.0) * (96.0 / 95.0);
        ValidationRecord r{"q_charfn_integral", inputs, qh, c * h * integral, 0, true, true};
        r.margin = r.rhs - r.lhs;
        r.pass = r.lhs <= r.rhs * (1 + 1e-9) + 1e-12;
        out.push_back(std::move(r));
    }
    {
        const double qa = concentration(f, a);
        ValidationRecord r{"q_window_ratio", inputs, qh, (1.0 + h / a) * qa, 0, true, true};
        r.margin = r.rhs - r.lhs;
        r.pass = r.lhs <= r.rhs * (1 + 1e-9) + 1e-12;
        out.push_back(std::move(r));
    }
    {
        // Tail-smoothing constant: zero when F has no mass outside [-h, h].
        const double tail = std::max(0.0, mass_outside(f, h));
        ValidationRecord r{"q_cp_tail", inputs, 0, 0, 0, true, false};
        if (tail > 0) {
            const SignedMeasure cp = exp_measure(
                scale_mass(subtract(f, SignedMeasure::dirac(0.0, 1.0, f.options())), a),
                series_tol);
            r.lhs = concentration(cp, h);
            r.rhs = 1.0 / std::sqrt(a * tail);
            r.margin = r.lhs * std::sqrt(a * tail); // measured constant
        }
        out.push_back(std::move(r));
    }
    {
        const SignedMeasure sym = convolve(f, reflect(f));
        const double qs = concentration(sym, h);
        const double span = detail::max_abs_location(sym);
        QuadratureOptions q = quad;
        q.subdivisions = std::max(q.subdivisions,
                                  detail::charfn_subdivisions(span, -1.0 / h, 1.0 / h));
        const double integral =
            integrate([&](double t) { return std::abs(charfn(sym, t)); }, -1.0 / h, 1.0 / h, q);
        ValidationRecord r{"charfn_reverse", inputs, h * integral, qs, 0, true, false};
        r.margin = qs > 0 ? (h * integral) / qs : std::numeric_limits<double>::infinity();
        out.push_back(std::move(r));
    }
    return out;
}

/// Parseval-type total-variation bound for a finite signed measure M on the
/// integer lattice: for any gamma > 0 and real upsilon,
///   ||M||^2 <= (1/2 + 1/(2 pi gamma)) Int_{-pi}^{pi}
///              [ gamma |M^(t)|^2 + (1/gamma) |(M^(t) e^{-it upsilon})'|^2 ] dt.
inline ValidationRecord validate_tv_energy(const SignedMeasure& m, double gamma, double upsilon,
                                           QuadratureOptions quad = {}) {
    if (!(gamma > 0)) throw input_error("validate_tv_energy: gamma must be > 0");
    if (!std::isfinite(upsilon)) throw input_error("validate_tv_energy: non-finite upsilon");
    for (const auto& a : m.atoms())
        if (std::abs(a.x - std::round(a.x)) > 1e-9)
            throw domain_error("validate_tv_energy: measure must live on the integers");

    const double pi = 3.141592653589793;
    auto integrand = [&](double t) {
        std::complex<double> mh = 0.0, dh = 0.0;
        for (const auto& a : m.atoms()) {
            const std::complex<double> e{std::cos(t * a.x), std::sin(t * a.x)};
            mh += a.mass * e;
            dh += a.mass * (a.x - upsilon) * e;
        }
        return gamma * std::norm(mh) + (1.0 / gamma) * std::norm(dh);
    };
    QuadratureOptions q = quad;
    q.subdivisions = std::max(q.subdivisions,
                              detail::charfn_subdivisions(detail::max_abs_location(m) +
                                                              std::abs(upsilon),
                                                          -pi, pi));
    const double integral = integrate(integrand, -pi, pi, q);
    const double tv = total_variation(m);

    ValidationRecord r;
    r.check = "tv_energy";
    r.inputs = {{"atoms", m.size()}, {"gamma", gamma}, {"upsilon", upsilon}};
    r.lhs = tv * tv;
    r.rhs = (0.5 + 1.0 / (2.0 * pi * gamma)) * integral;
    r.margin = r.rhs - r.lhs;
    r.pass = r.lhs <= r.rhs * (1 + 1e-9) + 1e-12;
    r.hard = true;
    return r;
}

/// Characteristic-function decay of a counting block and its first/second
/// order approximants: for every t in the grid and a block with weight w,
///   |F^(t)|, |G^(t)|, |Pi^(t)|  <=  exp{-0.26 Gamma1 sin^2(t w / 2)}.
/// Valid under the onedep conditions; throws domain_error if they fail.
inline std::vector<ValidationRecord> validate_charfn_decay(const BlockSpec& block,
                                                           int grid_points = 400,
                                                           double t_min = -3.141592653589793,
                                                           double t_max = 3.141592653589793,
                                                           MeasureOptions opts = {}) {
    if (grid_points < 2) throw input_error("validate_charfn_decay: need at least 2 grid points");
    const ConditionReport cond = check_conditions(ConditionFamily::onedep, {block});
    if (!cond.all_pass)
        throw domain_error("validate_charfn_decay: block does not satisfy the onedep conditions");

    const MomentSummary mom = block_moments(block);
    const SignedMeasure law = block_distribution(block, opts);
    const double w = block.weight;

    // Per family: the worst excess value - bound over the grid (<= 0 when the
    // inequality holds everywhere).
    double worst[3] = {-std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity(),
                       -std::numeric_limits<double>::infinity()};
    bool ok[3] = {true, true, true};

    for (int i = 0; i < grid_points; ++i) {
        const double t = t_min + (t_max - t_min) * i / (grid_points - 1);
        const double s = std::sin(0.5 * t * w);
        const double bound = std::exp(-0.26 * mom.gamma1 * s * s);
        // z = e^{itw} - 1; Re(G1 z + G2 z^2) in closed form gives the moduli
        // of the approximants' characteristic functions.
        const double cth = std::cos(t * w);
        const double re_lin = mom.gamma1 * (cth - 1.0);
        const double re_quad = 2.0 * mom.gamma2 * cth * (cth - 1.0);
        const double vals[3] = {std::abs(charfn(law, t)), std::exp(re_lin + re_quad),
                                std::exp(re_lin)};
        for (int k = 0; k < 3; ++k) {
            worst[k] = std::max(worst[k], vals[k] - bound);
            ok[k] = ok[k] && vals[k] <= bound * (1 + 1e-12) + 1e-12;
        }
    }

    const nlohmann::json inputs{{"kind", to_string(block.kind)}, {"n", block.n},
                                {"weight", block.weight},       {"grid_points", grid_points},
                                {"t_min", t_min},               {"t_max", t_max}};
    const char* names[3] = {"charfn_decay_exact", "charfn_decay_quad", "charfn_decay_poisson"};
    std::vector<ValidationRecord> out;
    for (int k = 0; k < 3; ++k) {
        ValidationRecord r;
        r.check = names[k];
        r.inputs = inputs;
        r.lhs = worst[k]; // max over grid of value - bound
        r.rhs = 0.0;
        r.margin = -worst[k];
        r.pass = ok[k];
        r.hard = true;
        out.push_back(std::move(r));
    }
    return out;
}

inline nlohmann::json to_json(const ValidationRecord& r) {
    return {{"check", r.check}, {"inputs", r.inputs}, {"lhs", r.lhs},
            {"rhs", r.rhs},     {"margin", r.margin}, {"pass", r.pass},
            {"hard", r.hard}};
}

inline nlohmann::json to_json(const ConditionReport& c) {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : c.records)
        recs.push_back({{"name", r.name},
                        {"lhs", r.lhs},
                        {"rhs", r.rhs},
                        {"relation", r.relation},
                        {"pass", r.pass}});
    return {{"family", c.family}, {"records", std::move(recs)}, {"all_pass", c.all_pass}};
}

inline nlohmann::json to_json(const BoundShape& s) {
    return {{"variant", to_string(s.variant)},
            {"h", s.h},
            {"smoothing_q", s.smoothing_q},
            {"breakdown", s.breakdown},
            {"total", s.total},
            {"constant_policy",
             {{"unit_constants", s.policy.unit_constants},
              {"explicit_constants", s.policy.explicit_constants},
              {"gamma1_reading", s.policy.gamma1_reading},
              {"notes", s.policy.notes}}}};
}

} // namespace cpsmooth
