// Block models and their exact laws / moment summaries.
//
// A block is a finite family X_1..X_n of summands whose weighted sum
// w * (X_1 + ... + X_n) contributes one independent component to the total.
// Four kinds are supported:
//
//   iid_lattice   - iid nonnegative-integer summands with a finite pmf
//   two_runs      - X_k = eta_k * eta_{k+1} over iid Bernoulli(p) drivers
//                   (adjacent-success indicators; a 1-dependent sequence)
//   latent_driver - X_k = f(eta_k, eta_{k+1}) over iid finite drivers with a
//                   nonnegative-integer link table f (generalizes two_runs)
//   general_jump  - iid summands (1-p) delta_0 + p B with an atomic jump law B
//
// block_distribution computes the block's exact weighted law by dynamic
// programming over (driver state, accumulated integer sum); block_moments
// fills the factorial/cross moments the approximation bounds consume.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"

namespace cpsmooth {

enum class BlockKind { iid_lattice, two_runs, latent_driver, general_jump };

inline const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::iid_lattice: return "iid_lattice";
        case BlockKind::two_runs: return "two_runs";
        case BlockKind::latent_driver: return "latent_driver";
        case BlockKind::general_jump: return "general_jump";
    }
    return "?";
}

struct BlockSpec {
    BlockKind kind = BlockKind::iid_lattice;
    int n = 1;           // number of summands
    double weight = 1.0; // scale applied to the block sum (finite, nonzero)

    // iid_lattice: P(X = k) = pmf[k], k = 0..K
    std::vector<double> pmf;

    // two_runs / general_jump: success / jump probability
    double p = 0.0;

    // latent_driver: iid drivers eta ~ driver_probs over indices 0..d-1,
    // X_k = link[i][j] >= 0 where i indexes eta_k and j indexes eta_{k+1}
    std::vector<double> driver_probs;
    std::vector<std::vector<long long>> link;

    // general_jump: atomic jump law B
    SignedMeasure jump;

    static BlockSpec iid_lattice_block(std::vector<double> pmf, int n, double w) {
        BlockSpec s;
        s.kind = BlockKind::iid_lattice;
        s.pmf = std::move(pmf);
        s.n = n;
        s.weight = w;
        return s;
    }

    static BlockSpec bernoulli_block(double p, int n, double w) {
        return iid_lattice_block({1.0 - p, p}, n, w);
    }

    static BlockSpec two_runs_block(double p, int n, double w) {
        BlockSpec s;
        s.kind = BlockKind::two_runs;
        s.p = p;
        s.n = n;
        s.weight = w;
        return s;
    }

    static BlockSpec latent_driver_block(std::vector<double> probs,
                                         std::vector<std::vector<long long>> link, int n,
                                         double w) {
        BlockSpec s;
        s.kind = BlockKind::latent_driver;
        s.driver_probs = std::move(probs);
        s.link = std::move(link);
        s.n = n;
        s.weight = w;
        return s;
    }

    static BlockSpec general_jump_block(double p, SignedMeasure jump, int n, double w) {
        BlockSpec s;
        s.kind = BlockKind::general_jump;
        s.p = p;
        s.jump = std::move(jump);
        s.n = n;
        s.weight = w;
        return s;
    }
};

inline void validate(const BlockSpec& s) {
    if (s.n < 1) throw input_error("block: length n must be >= 1");
    if (!std::isfinite(s.weight) || s.weight == 0.0)
        throw input_error("block: weight must be finite and nonzero");
    auto check_pmf = [](const std::vector<double>& pmf, const char* what) {
        if (pmf.empty()) throw input_error(std::string("block: ") + what + " is empty");
        double sum = 0.0;
        for (double v : pmf) {
            if (!std::isfinite(v) || v < 0)
                throw input_error(std::string("block: ") + what + " has a negative or non-finite entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw input_error(std::string("block: ") + what + " must sum to 1 (got " +
                              std::to_string(sum) + ")");
    };
    switch (s.kind) {
        case BlockKind::iid_lattice:
            check_pmf(s.pmf, "pmf");
            break;
        case BlockKind::two_runs:
            if (!std::isfinite(s.p) || s.p < 0 || s.p > 1)
                throw input_error("block: two_runs probability must lie in [0, 1]");
            break;
        case BlockKind::latent_driver: {
            check_pmf(s.driver_probs, "driver pmf");
            const std::size_t d = s.driver_probs.size();
            if (s.link.size() != d)
                throw input_error("block: link table must be square over the driver support");
            for (const auto& row : s.link) {
                if (row.size() != d)
                    throw input_error("block: link table must be square over the driver support");
                for (long long v : row)
                    if (v < 0) throw input_error("block: link values must be nonnegative integers");
            }
            break;
        }
        case BlockKind::general_jump: {
            if (!std::isfinite(s.p) || s.p < 0 || s.p > 1)
                throw input_error("block: jump probability must lie in [0, 1]");
            if (s.jump.empty()) throw input_error("block: jump law is empty");
            double total = 0.0;
            for (const auto& a : s.jump.atoms()) {
                if (a.mass < -1e-12) throw input_error("block: jump law has negative mass");
                total += a.mass;
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw input_error("block: jump law must have total mass 1");
            break;
        }
    }
}

namespace detail {

/// Lower a two_runs spec to latent_driver form (Bernoulli drivers, product link).
inline BlockSpec lower_two_runs(const BlockSpec& s) {
    BlockSpec t = BlockSpec::latent_driver_block({1.0 - s.p, s.p}, {{0, 0}, {0, 1}}, s.n, s.weight);
    return t;
}

} // namespace detail

/// Exact law of the weighted block sum w * (X_1 + ... + X_n).
inline SignedMeasure block_distribution(const BlockSpec& spec, MeasureOptions opts = {}) {
    validate(spec);
    switch (spec.kind) {
        case BlockKind::iid_lattice: {
            std::vector<std::pair<double, double>> atoms;
            for (std::size_t k = 0; k < spec.pmf.size(); ++k)
                atoms.push_back({static_cast<double>(k), spec.pmf[k]});
            SignedMeasure one = SignedMeasure::from_atoms(atoms, opts);
            return scale_support(convolve_power(one, spec.n), spec.weight);
        }
        case BlockKind::general_jump: {
            SignedMeasure mix = add(SignedMeasure::dirac(0.0, 1.0 - spec.p, opts),
                                    scale_mass(spec.jump, spec.p));
            return scale_support(convolve_power(mix, spec.n), spec.weight);
        }
        case BlockKind::two_runs:
            return block_distribution(detail::lower_two_runs(spec), opts);
        case BlockKind::latent_driver: {
            const auto& probs = spec.driver_probs;
            const auto& f = spec.link;
            const std::size_t d = probs.size();
            long long maxf = 0;
            for (const auto& row : f)
                for (long long v : row) maxf = std::max(maxf, v);
            const std::size_t smax = static_cast<std::size_t>(maxf) * spec.n;
            // cur[i][s] = P(eta_{k+1} index = i, X_1+..+X_k = s)
            std::vector<std::vector<double>> cur(d, std::vector<double>(smax + 1, 0.0));
            for (std::size_t i = 0; i < d; ++i) cur[i][0] = probs[i];
            std::vector<std::vector<double>> next(d, std::vector<double>(smax + 1, 0.0));
            std::size_t reach = 0; // largest sum reachable so far
            for (int k = 1; k <= spec.n; ++k) {
                for (auto& row : next) std::fill(row.begin(), row.end(), 0.0);
                for (std::size_t i = 0; i < d; ++i) {
                    if (probs[i] == 0.0) continue;
                    for (std::size_t s = 0; s <= reach; ++s) {
                        const double w = cur[i][s];
                        if (w == 0.0) continue;
                        for (std::size_t j = 0; j < d; ++j) {
                            if (probs[j] == 0.0) continue;
                            next[j][s + static_cast<std::size_t>(f[i][j])] += w * probs[j];
                        }
                    }
                }
                cur.swap(next);
                reach += static_cast<std::size_t>(maxf);
            }
            std::vector<std::pair<double, double>> atoms;
            for (std::size_t s = 0; s <= smax; ++s) {
                double m = 0.0;
                for (std::size_t i = 0; i < d; ++i) m += cur[i][s];
                if (m != 0.0) atoms.push_back({static_cast<double>(s), m});
            }
            return scale_support(SignedMeasure::from_atoms(atoms, opts), spec.weight);
        }
    }
    throw input_error("block: unknown kind");
}

/// Independent blocks: convolution of the individual weighted laws.
inline SignedMeasure weighted_sum_distribution(const std::vector<BlockSpec>& blocks,
                                               MeasureOptions opts = {}) {
    if (blocks.empty()) throw input_error("weighted_sum: need at least one block");
    SignedMeasure total = block_distribution(blocks.front(), opts);
    for (std::size_t i = 1; i < blocks.size(); ++i)
        total = convolve(total, block_distribution(blocks[i], opts));
    return total;
}

// --------------------------------------------------------------------------
// Moment summaries
// --------------------------------------------------------------------------

/// Everything the approximation rates and remainder weights need, computed
/// exactly from the block model.  Summands are stationary for every kind, so
/// the per-position sequences are constant; they are materialized anyway for
/// consumers that index by position (boundary positions matter only through
/// the accumulation rules below).
struct MomentSummary {
    int n = 0;
    double weight = 1.0;
    bool integer_valued = true;

    // Stationary per-summand factorial moments: E X, E X(X-1), E X(X-1)(X-2).
    double nu1 = 0, nu2 = 0, nu3 = 0;
    // Adjacent-pair / triple cross moments (interior positions; zero for iid kinds).
    double pair = 0;   // E X_{k-1} X_k
    double cov = 0;    // pair - nu1^2
    double fact21 = 0; // E X_{k-1}(X_{k-1}-1) X_k
    double fact12 = 0; // E X_{k-1} X_k (X_k-1)
    double triple = 0; // E X_{k-2} X_{k-1} X_k

    // Accumulated block quantities (conventions: X_k := 0 for k <= 0, so any
    // product touching an out-of-range position contributes nothing).
    double gamma1 = 0; // sum_k nu1(k)
    double gamma2 = 0; // (1/2) sum_k [nu2(k) - nu1(k)^2] + sum_{k>=2} cov(k)
    double r0 = 0;     // first-order remainder weight
    double r1 = 0;     // second-order remainder weight
    double mean_sum = 0; // E(X_1 + ... + X_n), unweighted

    // Defined only for kinds with iid summands / jump laws.
    std::optional<double> lambda;     // nu1 - nu1^2 - nu2
    std::optional<double> franken_r1; // nu1^3 + nu1*nu2 + nu3
    std::optional<double> mu1;        // integral |x| dB
    std::optional<double> jump_mean;  // integral x dB

    // Per-position views, k = 1..n (pair/cov start at k = 2).
    std::vector<double> nu1_seq, nu2_seq, nu3_seq;
    std::vector<double> pair_seq, cov_seq;
};

namespace detail {

/// Accumulate gamma/remainder quantities from stationary summand moments.
/// The sums run over positions k = 1..n with products involving positions
/// <= 0 dropped; with stationary moments each distinct boundary pattern has
/// a closed count.
inline void accumulate_summary(MomentSummary& m) {
    const double n = m.n;
    m.gamma1 = n * m.nu1;
    m.gamma2 = 0.5 * n * (m.nu2 - m.nu1 * m.nu1) + (n - 1.0) * m.cov;
    m.mean_sum = n * m.nu1;

    // r0: sum_k { nu2 + nu1^2 + E X_{k-1} X_k }
    m.r0 = n * (m.nu2 + m.nu1 * m.nu1) + (n - 1.0) * m.pair;

    // r1: sum_k of
    //   nu1^3 + nu1 nu2 + nu3                                   (k >= 1)
    //   [nu1(k-2) + nu1(k-1) + nu1(k)] E X_{k-1} X_k            (k >= 2; the
    //        nu1(k-2) part only from k >= 3)
    //   E X_{k-1}(X_{k-1}-1) X_k + nu2 nu1                      (k >= 2)
    //   E X_{k-1} X_k(X_k-1) + nu1 nu2                          (k >= 2)
    //   E X_{k-2} X_{k-1} X_k                                   (k >= 3)
    //   E X_{k-2} * E X_{k-1} X_k                               (k >= 3)
    //   (E X_{k-2} X_{k-1} + nu1 nu1) * E X_k                   (k >= 3)
    double r1 = n * (m.nu1 * m.nu1 * m.nu1 + m.nu1 * m.nu2 + m.nu3);
    if (m.n >= 2) {
        const double interior2 = n - 1.0; // positions k = 2..n
        r1 += (2.0 * interior2 + std::max(0.0, n - 2.0)) * m.nu1 * m.pair;
        r1 += interior2 * (m.fact21 + m.nu2 * m.nu1);
        r1 += interior2 * (m.fact12 + m.nu1 * m.nu2);
    }
    if (m.n >= 3) {
        const double interior3 = n - 2.0; // positions k = 3..n
        r1 += interior3 * m.triple;
        r1 += interior3 * m.nu1 * m.pair;
        r1 += interior3 * (m.pair + m.nu1 * m.nu1) * m.nu1;
    }
    m.r1 = r1;

    m.nu1_seq.assign(m.n, m.nu1);
    m.nu2_seq.assign(m.n, m.nu2);
    m.nu3_seq.assign(m.n, m.nu3);
    if (m.n >= 2) {
        m.pair_seq.assign(m.n - 1, m.pair);
        m.cov_seq.assign(m.n - 1, m.cov);
    }
}

} // namespace detail

inline MomentSummary block_moments(const BlockSpec& spec) {
    validate(spec);
    MomentSummary m;
    m.n = spec.n;
    m.weight = spec.weight;

    switch (spec.kind) {
        case BlockKind::iid_lattice: {
            double nu1 = 0, nu2 = 0, nu3 = 0;
            for (std::size_t k = 0; k < spec.pmf.size(); ++k) {
                const double kk = static_cast<double>(k);
                nu1 += kk * spec.pmf[k];
                nu2 += kk * (kk - 1) * spec.pmf[k];
                nu3 += kk * (kk - 1) * (kk - 2) * spec.pmf[k];
            }
            m.nu1 = nu1;
            m.nu2 = nu2;
            m.nu3 = nu3;
            m.pair = nu1 * nu1; // independence
            m.cov = 0.0;
            m.fact21 = nu2 * nu1;
            m.fact12 = nu1 * nu2;
            m.triple = nu1 * nu1 * nu1;
            m.lambda = nu1 - nu1 * nu1 - nu2;
            m.franken_r1 = nu1 * nu1 * nu1 + nu1 * nu2 + nu3;
            detail::accumulate_summary(m);
            return m;
        }
        case BlockKind::two_runs:
            m = block_moments(detail::lower_two_runs(spec));
            m.weight = spec.weight;
            return m;
        case BlockKind::latent_driver: {
            const auto& pr = spec.driver_probs;
            const auto& f = spec.link;
            const std::size_t d = pr.size();
            double m1 = 0, m2 = 0, m3 = 0;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) {
                    const double v = static_cast<double>(f[i][j]);
                    const double w = pr[i] * pr[j];
                    m1 += w * v;
                    m2 += w * v * v;
                    m3 += w * v * v * v;
                }
            m.nu1 = m1;
            m.nu2 = m2 - m1;           // E X(X-1)
            m.nu3 = m3 - 3 * m2 + 2 * m1; // E X(X-1)(X-2)

            double pair = 0, fact21 = 0, fact12 = 0;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    for (std::size_t k = 0; k < d; ++k) {
                        const double a = static_cast<double>(f[i][j]); // X_{k-1}
                        const double b = static_cast<double>(f[j][k]); // X_k
                        const double w = pr[i] * pr[j] * pr[k];
                        pair += w * a * b;
                        fact21 += w * a * (a - 1) * b;
                        fact12 += w * a * b * (b - 1);
                    }
            m.pair = pair;
            m.cov = pair - m.nu1 * m.nu1;
            m.fact21 = fact21;
            m.fact12 = fact12;

            double triple = 0;
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    for (std::size_t k = 0; k < d; ++k)
                        for (std::size_t l = 0; l < d; ++l)
                            triple += pr[i] * pr[j] * pr[k] * pr[l] *
                                      static_cast<double>(f[i][j]) * static_cast<double>(f[j][k]) *
                                      static_cast<double>(f[k][l]);
            m.triple = triple;
            detail::accumulate_summary(m);
            return m;
        }
        case BlockKind::general_jump: {
            m.integer_valued = false;
            double mu1 = 0, mu = 0;
            for (const auto& a : spec.jump.atoms()) {
                mu1 += std::abs(a.x) * a.mass;
                mu += a.x * a.mass;
            }
            m.mu1 = mu1;
            m.jump_mean = mu;
            m.mean_sum = spec.n * spec.p * mu;
            return m;
        }
    }
    throw input_error("block: unknown kind");
}

} // namespace cpsmooth
