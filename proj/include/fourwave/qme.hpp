// qme.hpp — multistep second-order quantum master equations for the four
// response-function channels with general linear exciton-bath coupling
//
// Each channel solves coupled Volterra equations for reduced operators
// g~1 (over tau'), g~2 (over Tp, channels 2 and 3 only) and g~3 (over tau),
// all in the exciton-basis interaction picture.  Bath memory generated in an
// earlier pulse interval enters the later interval through inhomogeneous
// source terms: every interaction-picture coupling operator pairs into
// C_ab with the difference of effective bath times, accumulated across the
// free bath shifts between intervals, while system-operator ordering is
// preserved.  The response function is chi^(k) = Tr{ g~3 e^{i h_e tau} }.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "fourwave/bath.hpp"
#include "fourwave/errors.hpp"
#include "fourwave/exciton.hpp"
#include "fourwave/parallel.hpp"
#include "fourwave/response_grid.hpp"
#include "fourwave/volterra.hpp"

namespace fourwave {

using History = std::vector<Eigen::MatrixXcd>;

// Immutable per-run context: channel decomposition, tabulated correlation
// functions, and the interaction-picture cache
//   A~_a(m h) = e^{i h_e m h} A_a e^{-i h_e m h}.
// Shared read-only across solver threads.
struct KernelContext {
    std::vector<CouplingChannel> channels;
    Eigen::VectorXd energies;  // exciton energies (rad/fs)
    CorrelationTable corr;
    double step = 0.0;  // solver grid step h (fs)
    std::vector<std::vector<Eigen::MatrixXcd>> a_int;  // [channel][time index]

    Eigen::Index dim() const { return energies.size(); }
    std::size_t n_channels() const { return channels.size(); }

    const Eigen::MatrixXcd& a(std::size_t ch, int m) const {
        if (m < 0 || m >= static_cast<int>(a_int[ch].size()))
            throw validation_error("KernelContext: propagator cache exhausted at step " +
                                   std::to_string(m));
        return a_int[ch][static_cast<std::size_t>(m)];
    }

    // diag(e^{i sign E_j m h})
    Eigen::VectorXcd phase(int m, int sign) const {
        const double t = sign * m * step;
        Eigen::VectorXcd v(energies.size());
        for (Eigen::Index j = 0; j < energies.size(); ++j)
            v[j] = std::exp(complexd(0.0, energies[j] * t));
        return v;
    }

    static KernelContext build(std::vector<CouplingChannel> channels,
                               const Eigen::VectorXd& energies,
                               const Eigen::VectorXd& mode_freqs, double beta,
                               double step, int n_prop_steps, int n_corr_steps) {
        if (channels.empty()) throw validation_error("KernelContext: no coupling channels");
        KernelContext ctx;
        ctx.corr = CorrelationTable(channels, mode_freqs, beta, step, n_corr_steps);
        ctx.energies = energies;
        ctx.step = step;
        ctx.channels = std::move(channels);
        ctx.a_int.resize(ctx.channels.size());
        for (std::size_t a = 0; a < ctx.channels.size(); ++a) {
            const Eigen::MatrixXcd& op = ctx.channels[a].system_op;
            if (op.rows() != energies.size())
                throw validation_error("KernelContext: channel dimension mismatch");
            auto& cache = ctx.a_int[a];
            cache.reserve(static_cast<std::size_t>(n_prop_steps) + 1);
            for (int m = 0; m <= n_prop_steps; ++m) {
                Eigen::MatrixXcd am(op.rows(), op.cols());
                for (Eigen::Index p = 0; p < op.rows(); ++p)
                    for (Eigen::Index q = 0; q < op.cols(); ++q)
                        am(p, q) = op(p, q) * std::exp(complexd(0.0, (energies[p] - energies[q]) *
                                                                         m * step));
                cache.push_back(std::move(am));
            }
        }
        return ctx;
    }
};

// K(t_m, t_l) applied from the left:  X -> [sum_ab C_ab((m-l)h) A~_a(m) A~_b(l)] X
inline Eigen::MatrixXcd kernel_left(const KernelContext& ctx, int m, int l) {
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(ctx.dim(), ctx.dim());
    for (std::size_t a = 0; a < ctx.n_channels(); ++a)
        for (std::size_t b = 0; b < ctx.n_channels(); ++b)
            k += ctx.corr.at_step(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b),
                                  m - l) *
                 (ctx.a(a, m) * ctx.a(b, l));
    return k;
}

// K(t_m, t_l) applied from the right: X -> X [sum_ab C_ab((l-m)h) A~_a(l) A~_b(m)]
inline Eigen::MatrixXcd kernel_right(const KernelContext& ctx, int m, int l) {
    Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(ctx.dim(), ctx.dim());
    for (std::size_t a = 0; a < ctx.n_channels(); ++a)
        for (std::size_t b = 0; b < ctx.n_channels(); ++b)
            k += ctx.corr.at_step(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b),
                                  l - m) *
                 (ctx.a(a, l) * ctx.a(b, m));
    return k;
}

// double-commutator kernel Tr_b{ L~(t_m) L~(t_l) rho_b } applied to X
inline Eigen::MatrixXcd apply_dissipator(const KernelContext& ctx, int m, int l,
                                         const Eigen::MatrixXcd& x) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(x.rows(), x.cols());
    for (std::size_t a = 0; a < ctx.n_channels(); ++a) {
        const Eigen::MatrixXcd& am = ctx.a(a, m);
        for (std::size_t b = 0; b < ctx.n_channels(); ++b) {
            const Eigen::MatrixXcd& bl = ctx.a(b, l);
            const complexd c = ctx.corr.at_step(static_cast<Eigen::Index>(a),
                                                static_cast<Eigen::Index>(b), m - l);
            out += c * (am * bl * x - bl * x * am);
            out += std::conj(c) * (x * bl * am - am * x * bl);
        }
    }
    return out;
}

namespace detail {

inline double trap_weight(int l, int last) {
    return (l == 0 || l == last) ? 0.5 : 1.0;
}

} // namespace detail

// Inhomogeneous source of the g~2 equations (channels 2 and 3): bath memory
// from the tau' interval carried into the population interval.
inline History inhomogeneous_g2(int channel, const KernelContext& ctx, const History& g1,
                                int tpr_f, int n_tp_f) {
    if (channel != 2 && channel != 3)
        throw validation_error("inhomogeneous_g2: only channels 2 and 3 have a g~2 stage");
    if (static_cast<int>(g1.size()) <= tpr_f)
        throw state_error("inhomogeneous_g2: g~1 history not populated up to tau'");
    const Eigen::Index n = ctx.dim();
    const std::size_t nch = ctx.n_channels();
    const double h = ctx.step;
    const Eigen::VectorXcd em = ctx.phase(tpr_f, -1);
    const Eigen::VectorXcd ep = ctx.phase(tpr_f, +1);

    // channel 2 pairs C_ba with E- A~_a g~1; channel 3 the conjugate mirror
    std::vector<Eigen::MatrixXcd> q(nch * static_cast<std::size_t>(tpr_f + 1));
    for (int l = 0; l <= tpr_f; ++l)
        for (std::size_t a = 0; a < nch; ++a) {
            if (channel == 2)
                q[a * (tpr_f + 1) + l] = em.asDiagonal() * (ctx.a(a, l) * g1[l]);
            else
                q[a * (tpr_f + 1) + l] = (g1[l] * ctx.a(a, l)) * ep.asDiagonal();
        }

    History source(static_cast<std::size_t>(n_tp_f) + 1);
    for (int mt = 0; mt <= n_tp_f; ++mt) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
        if (tpr_f > 0) {
            for (std::size_t b = 0; b < nch; ++b) {
                Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
                for (std::size_t a = 0; a < nch; ++a)
                    for (int l = 0; l <= tpr_f; ++l) {
                        complexd c = ctx.corr.at_step(static_cast<Eigen::Index>(b),
                                                      static_cast<Eigen::Index>(a),
                                                      mt + tpr_f - l);
                        if (channel == 3) c = std::conj(c);
                        v += detail::trap_weight(l, tpr_f) * c * q[a * (tpr_f + 1) + l];
                    }
                v *= h;
                const Eigen::MatrixXcd& ab = ctx.a(b, mt);
                const double sign = (channel == 2) ? -1.0 : 1.0;
                acc += sign * (ab * v - v * ab);
            }
        }
        source[static_cast<std::size_t>(mt)] = std::move(acc);
    }
    return source;
}

// Inhomogeneous source of the g~3 equations at one (Tp, tau') point, for all
// tau grid indices 0..n_tau_f.  g2 is required for channels 2 and 3.
inline History inhomogeneous_g3(int channel, const KernelContext& ctx,
                                const DipoleProjection& dipoles, const History& g1,
                                const History* g2, int tp_f, int tpr_f, int n_tau_f) {
    if (channel < 1 || channel > 4)
        throw validation_error("inhomogeneous_g3: channel must be 1..4");
    if (static_cast<int>(g1.size()) <= tpr_f)
        throw state_error("inhomogeneous_g3: g~1 history not populated up to tau'");
    const bool needs_g2 = (channel == 2 || channel == 3);
    if (needs_g2) {
        if (g2 == nullptr || static_cast<int>(g2->size()) <= tp_f)
            throw state_error("inhomogeneous_g3: g~2 history not populated up to Tp");
    }
    const Eigen::Index n = ctx.dim();
    const std::size_t nch = ctx.n_channels();
    const double h = ctx.step;

    const Eigen::MatrixXcd d43 =
        dipoles.dm.cast<complexd>() * dipoles.d3.cast<complexd>().transpose();
    const Eigen::MatrixXcd d23 =
        dipoles.d2.cast<complexd>() * dipoles.d3.cast<complexd>().transpose();

    // per-l products with the g~1 history (system ordering per channel side)
    std::vector<Eigen::MatrixXcd> p(nch * static_cast<std::size_t>(tpr_f + 1));
    const bool left_type = (channel == 1 || channel == 2);
    for (int l = 0; l <= tpr_f; ++l)
        for (std::size_t a = 0; a < nch; ++a)
            p[a * (tpr_f + 1) + l] =
                left_type ? Eigen::MatrixXcd(ctx.a(a, l) * g1[l])
                          : Eigen::MatrixXcd(g1[l] * ctx.a(a, l));

    History source(static_cast<std::size_t>(n_tau_f) + 1);
    for (int m = 0; m <= n_tau_f; ++m) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);

        // memory generated during the tau' interval
        if (tpr_f > 0) {
            for (std::size_t b = 0; b < nch; ++b) {
                Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
                for (std::size_t a = 0; a < nch; ++a)
                    for (int l = 0; l <= tpr_f; ++l) {
                        complexd c = ctx.corr.at_step(static_cast<Eigen::Index>(b),
                                                      static_cast<Eigen::Index>(a),
                                                      m + tp_f + tpr_f - l);
                        if (!left_type) c = std::conj(c);
                        w += detail::trap_weight(l, tpr_f) * c * p[a * (tpr_f + 1) + l];
                    }
                w *= h;
                switch (channel) {
                    case 1:
                        acc += d43 * (ctx.phase(tpr_f, -1).asDiagonal() * w) * ctx.a(b, m);
                        break;
                    case 2:
                        acc += d43 *
                               (ctx.phase(tp_f + tpr_f, -1).asDiagonal() * w *
                                ctx.phase(tp_f, +1).asDiagonal()) *
                               ctx.a(b, m);
                        break;
                    case 3:
                        acc -= d43 *
                               (ctx.phase(tp_f, -1).asDiagonal() * w *
                                ctx.phase(tp_f + tpr_f, +1).asDiagonal()) *
                               ctx.a(b, m);
                        break;
                    case 4:
                        acc -= (w * ctx.phase(tpr_f, +1).asDiagonal()) * d23 * ctx.a(b, m);
                        break;
                }
            }
        }

        // channels 2 and 3: memory generated during the population interval
        if (needs_g2 && tp_f > 0) {
            const Eigen::VectorXcd etm = ctx.phase(tp_f, -1);
            const Eigen::VectorXcd etp = ctx.phase(tp_f, +1);
            for (std::size_t b = 0; b < nch; ++b) {
                Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(n, n);
                for (std::size_t a = 0; a < nch; ++a)
                    for (int l = 0; l <= tp_f; ++l) {
                        const complexd c = ctx.corr.at_step(static_cast<Eigen::Index>(b),
                                                            static_cast<Eigen::Index>(a),
                                                            m + tp_f - l);
                        const Eigen::MatrixXcd& g2l = (*g2)[static_cast<std::size_t>(l)];
                        w += detail::trap_weight(l, tp_f) *
                             (c * (ctx.a(a, l) * g2l) - std::conj(c) * (g2l * ctx.a(a, l)));
                    }
                w *= h;
                acc += d43 * (etm.asDiagonal() * w * etp.asDiagonal()) * ctx.a(b, m);
            }
        }

        source[static_cast<std::size_t>(m)] = std::move(acc);
    }
    return source;
}

// Options for the channel workflows.  substeps refines the internal solver
// grid (h = dt / substeps) while sampling the response on the dt grid.
struct QmeOptions {
    int substeps = 1;
    int n_threads = 1;
};

namespace detail {

struct KernelTable {
    std::vector<Eigen::MatrixXcd> entries;  // lower triangle, m >= l
    int size = 0;
    const Eigen::MatrixXcd& operator()(int m, int l) const {
        return entries[static_cast<std::size_t>(m) * (m + 1) / 2 + l];
    }
};

template <class Fn>
KernelTable build_kernel_table(int n_steps, Fn&& fn) {
    KernelTable tab;
    tab.size = n_steps + 1;
    tab.entries.reserve(static_cast<std::size_t>(tab.size) * (tab.size + 1) / 2);
    for (int m = 0; m <= n_steps; ++m)
        for (int l = 0; l <= m; ++l) tab.entries.push_back(fn(m, l));
    return tab;
}

} // namespace detail

// Full channel workflow: solve the g~1 (and g~2) stages, then one g~3 solve
// per (Tp, tau') grid point, and trace against e^{i h_e tau}.
inline ResponseGrid chi_qme(int channel, const GridSpec& grid, const KernelContext& ctx,
                            const DipoleProjection& dipoles, const QmeOptions& opts = {}) {
    grid.validate();
    if (channel < 1 || channel > 4)
        throw validation_error("chi_qme: channel must be 1..4");
    if (opts.substeps < 1) throw validation_error("chi_qme: substeps must be >= 1");
    const int r = opts.substeps;
    if (std::abs(ctx.step * r - grid.dt) > 1e-12 * grid.dt)
        throw validation_error("chi_qme: context step must equal dt / substeps");

    const Eigen::Index n = ctx.dim();
    const int n_tau_f = (grid.n_tau - 1) * r;
    const int n_tpr_f = (grid.n_tau_prime - 1) * r;
    const int n_tp_f = grid.max_tp_step() * r;
    const bool needs_g2 = (channel == 2 || channel == 3);

    const Eigen::MatrixXcd d1 = dipoles.d1.cast<complexd>();
    const Eigen::MatrixXcd d2 = dipoles.d2.cast<complexd>();
    const Eigen::MatrixXcd d3 = dipoles.d3.cast<complexd>();
    const Eigen::MatrixXcd dm = dipoles.dm.cast<complexd>();

    // ---- stage 1: g~1 over tau' ----
    Eigen::MatrixXcd g1_init;
    switch (channel) {
        case 1: g1_init = d2 * d1.transpose(); break;
        case 2: g1_init = d1 * d2.transpose(); break;
        case 3: g1_init = d2 * d1.transpose(); break;
        case 4: g1_init = dm * d1.transpose(); break;
    }
    const bool left_type = (channel == 1 || channel == 2);
    const auto g1_tab = detail::build_kernel_table(
        n_tpr_f, [&](int m, int l) { return left_type ? kernel_left(ctx, m, l)
                                                      : kernel_right(ctx, m, l); });
    VolterraRHS<Eigen::MatrixXcd> g1_rhs;
    g1_rhs.kernel = [&](int m, int l, const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
        return left_type ? Eigen::MatrixXcd(g1_tab(m, l) * x)
                         : Eigen::MatrixXcd(x * g1_tab(m, l));
    };
    const History g1 = volterra_solve(g1_rhs, g1_init, ctx.step, n_tpr_f);

    // ---- stage 2 (channels 2, 3): g~2 over Tp, one history per tau' ----
    std::vector<History> g2_by_tpr;
    if (needs_g2) {
        g2_by_tpr.resize(static_cast<std::size_t>(grid.n_tau_prime));
        parallel_for(static_cast<std::size_t>(grid.n_tau_prime), opts.n_threads,
                     [&](std::size_t ip) {
                         const int tpr_f = static_cast<int>(ip) * r;
                         Eigen::MatrixXcd init;
                         if (channel == 2)
                             init = ctx.phase(tpr_f, -1).asDiagonal() *
                                    g1[static_cast<std::size_t>(tpr_f)];
                         else
                             init = g1[static_cast<std::size_t>(tpr_f)] *
                                    ctx.phase(tpr_f, +1).asDiagonal();
                         const History src = inhomogeneous_g2(channel, ctx, g1, tpr_f, n_tp_f);
                         VolterraRHS<Eigen::MatrixXcd> rhs;
                         rhs.kernel = [&](int m, int l, const Eigen::MatrixXcd& x) {
                             return apply_dissipator(ctx, m, l, x);
                         };
                         rhs.source = [&](int m) { return src[static_cast<std::size_t>(m)]; };
                         g2_by_tpr[ip] = volterra_solve(rhs, init, ctx.step, n_tp_f);
                     });
    }

    // ---- stage 3: g~3 over tau per (Tp, tau') point ----
    const auto g3_tab =
        detail::build_kernel_table(n_tau_f, [&](int m, int l) { return kernel_right(ctx, m, l); });

    ResponseGrid out(grid, channel, "qme");
    const std::size_t n_tp = grid.tp_steps.size();
    const std::size_t n_tasks = n_tp * static_cast<std::size_t>(grid.n_tau_prime);
    parallel_for(n_tasks, opts.n_threads, [&](std::size_t task) {
        const std::size_t i_tp = task / static_cast<std::size_t>(grid.n_tau_prime);
        const int ip = static_cast<int>(task % static_cast<std::size_t>(grid.n_tau_prime));
        const int tp_f = grid.tp_steps[i_tp] * r;
        const int tpr_f = ip * r;

        Eigen::MatrixXcd init(n, n);
        const History* g2 = needs_g2 ? &g2_by_tpr[static_cast<std::size_t>(ip)] : nullptr;
        switch (channel) {
            case 1:
                init = (dm * d3.transpose()) * (ctx.phase(tpr_f, -1).asDiagonal() *
                                                g1[static_cast<std::size_t>(tpr_f)]);
                break;
            case 2:
            case 3:
                init = (dm * d3.transpose()) *
                       (ctx.phase(tp_f, -1).asDiagonal() * (*g2)[static_cast<std::size_t>(tp_f)] *
                        ctx.phase(tp_f, +1).asDiagonal());
                break;
            case 4:
                init = (g1[static_cast<std::size_t>(tpr_f)] *
                        ctx.phase(tpr_f, +1).asDiagonal()) *
                       (d2 * d3.transpose());
                break;
        }

        const History src =
            inhomogeneous_g3(channel, ctx, dipoles, g1, g2, tp_f, tpr_f, n_tau_f);
        VolterraRHS<Eigen::MatrixXcd> rhs;
        rhs.kernel = [&](int m, int l, const Eigen::MatrixXcd& x) -> Eigen::MatrixXcd {
            return x * g3_tab(m, l);
        };
        rhs.source = [&](int m) { return src[static_cast<std::size_t>(m)]; };
        const History g3 = volterra_solve(rhs, init, ctx.step, n_tau_f);

        for (int i_tau = 0; i_tau < grid.n_tau; ++i_tau) {
            const int m = i_tau * r;
            const Eigen::VectorXcd ep = ctx.phase(m, +1);
            complexd chi(0.0, 0.0);
            for (Eigen::Index j = 0; j < n; ++j)
                chi += g3[static_cast<std::size_t>(m)](j, j) * ep[j];
            out.at(i_tau, i_tp, ip) = chi;
        }
    });
    return out;
}

// Convenience: context sized for one grid + substep choice.
inline KernelContext make_context(const std::vector<CouplingChannel>& channels,
                                  const Eigen::VectorXd& exciton_energies,
                                  const Eigen::VectorXd& mode_freqs, double beta,
                                  const GridSpec& grid, int substeps = 1) {
    grid.validate();
    if (substeps < 1) throw validation_error("make_context: substeps must be >= 1");
    const int r = substeps;
    const double h = grid.dt / r;
    const int n_tau_f = (grid.n_tau - 1) * r;
    const int n_tpr_f = (grid.n_tau_prime - 1) * r;
    const int n_tp_f = grid.max_tp_step() * r;
    const int n_prop = std::max({n_tau_f, n_tpr_f, n_tp_f});
    const int n_corr = n_tau_f + n_tp_f + n_tpr_f;
    return KernelContext::build(channels, exciton_energies, mode_freqs, beta, h, n_prop,
                                std::max(n_corr, 1));
}

} // namespace fourwave
