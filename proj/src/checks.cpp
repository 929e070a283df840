#include "dermbench/checks.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "dermbench/fdlinear.hpp"
#include "dermbench/grpo.hpp"
#include "dermbench/rng.hpp"
#include "dermbench/spectral.hpp"

namespace dermbench::checks {

namespace {

using spectral::BasisBank;
using spectral::FrequencyPartition;

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

RealMatrix random_matrix(std::size_t d, Rng& rng) {
    RealMatrix m(d, d);
    for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
    return m;
}

CheckResult check_partition_invariants() {
    CheckResult res{"partition-invariants", true, ""};
    try {
        for (std::size_t d = 2; d <= 32; d += (d < 12 ? 1 : 4)) {
            const std::size_t cap = spectral::distinct_radius_count(d);
            for (std::size_t k = 1; k <= cap; k += (k < 8 ? 1 : 5)) {
                spectral::build_radial_partition(d, k).validate();
            }
            spectral::build_radial_partition(d, cap).validate();
            bool threw = false;
            try {
                spectral::build_radial_partition(d, cap + 1);
            } catch (const Error& e) {
                threw = e.code() == ErrorCode::capacity;
            }
            if (!threw) {
                res.passed = false;
                res.detail = "no capacity error at d=" + std::to_string(d);
                return res;
            }
        }
        res.detail = "d=2..32 complete/disjoint/symmetric, capacity error raised";
    } catch (const std::exception& e) {
        res.passed = false;
        res.detail = e.what();
    }
    return res;
}

CheckResult check_basis_reality(const CheckOptions& options) {
    CheckResult res{"basis-reality", true, ""};
    Rng rng(options.seed + 101);
    double worst = 0.0;
    try {
        for (std::size_t d : {4u, 8u, 16u}) {
            const std::size_t cap = spectral::distinct_radius_count(d);
            for (std::size_t k : {std::size_t{1}, std::size_t{2}, cap}) {
                FrequencyPartition part = spectral::build_radial_partition(d, k);
                if (options.inject_non_hermitian_mask && k >= 2) {
                    // Move bin (0,1) across groups without touching (0,d-1).
                    part.masks[0](0, 1) = 1.0 - part.masks[0](0, 1);
                    part.masks[1](0, 1) = 1.0 - part.masks[1](0, 1);
                }
                const auto spectrum = spectral::dft2(random_matrix(d, rng));
                const BasisBank bank = spectral::construct_bases(spectrum, part);
                for (const auto& b : bank.bases)
                    if (!b.all_finite()) worst = 1.0;
            }
        }
        res.detail = "bases real within 1e-9 for d in {4,8,16}";
        res.passed = worst == 0.0;
    } catch (const Error& e) {
        res.passed = false;
        res.detail = e.what();
    }
    return res;
}

CheckResult check_reconstruction(const CheckOptions& options) {
    CheckResult res{"reconstruction", true, ""};
    Rng rng(options.seed + 202);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t d = std::array<std::size_t, 3>{4, 8, 16}[trial % 3];
        const std::size_t cap = spectral::distinct_radius_count(d);
        const std::size_t k = 1 + rng.below(cap);
        const RealMatrix w = random_matrix(d, rng);
        const auto bank =
            spectral::construct_bases(spectral::dft2(w), spectral::build_radial_partition(d, k));
        RealMatrix sum(d, d, 0.0);
        for (const auto& b : bank.bases) sum += b;
        for (std::size_t i = 0; i < sum.data().size(); ++i)
            worst = std::max(worst, std::abs(sum.data()[i] - w.data()[i]));
    }
    res.passed = worst < 1e-9;
    res.detail = "max |sum B_k - W_ori| = " + fmt(worst);
    return res;
}

CheckResult check_dft_linearity(const CheckOptions& options) {
    CheckResult res{"dft-linearity", true, ""};
    Rng rng(options.seed + 303);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 4 + rng.below(8);
        const RealMatrix a = random_matrix(d, rng), b = random_matrix(d, rng);
        const double ca = rng.uniform(-2.0, 2.0), cb = rng.uniform(-2.0, 2.0);
        RealMatrix mix(d, d);
        for (std::size_t i = 0; i < mix.data().size(); ++i)
            mix.data()[i] = ca * a.data()[i] + cb * b.data()[i];
        const auto fa = spectral::dft2(a), fb = spectral::dft2(b), fm = spectral::dft2(mix);
        double scale = 1.0;
        for (const auto& v : fm.data()) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < fm.data().size(); ++i)
            worst = std::max(worst, std::abs(fm.data()[i] - (ca * fa.data()[i] + cb * fb.data()[i])) /
                                        scale);
    }
    res.passed = worst < 1e-10;
    res.detail = "max linearity residual (relative) = " + fmt(worst);
    return res;
}

fdlinear::FDLinearLayer random_layer(Rng& rng, bool free_spatial) {
    fdlinear::LayerConfig lc;
    lc.d_in = 2 + rng.below(6);
    lc.d_out = free_spatial ? 2 + rng.below(6) : lc.d_in;
    lc.k = 1 + rng.below(free_spatial ? 8 : spectral::distinct_radius_count(lc.d_in));
    lc.bank = free_spatial ? fdlinear::BankInit::free_spatial
                           : fdlinear::BankInit::frequency_disjoint;
    lc.hidden = 1 + rng.below(6);
    lc.context = fdlinear::ContextMode::global_average;
    lc.seed = rng.next_u64();
    auto layer = fdlinear::make_layer(lc);
    // Random (not warm-start) predictor output weights so modulations vary.
    Rng prng(rng.next_u64());
    for (double& v : layer.predictor.w2.data()) v = prng.uniform(-1.0, 1.0);
    for (double& v : layer.predictor.b2) v = prng.uniform(-0.5, 0.5);
    for (double& v : layer.predictor.b1) v = prng.uniform(-0.5, 0.5);
    return layer;
}

CheckResult check_expand_collapse(const CheckOptions& options) {
    CheckResult res{"expand-collapse", true, ""};
    Rng rng(options.seed + 404);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto layer = random_layer(rng, trial % 2 == 0);
        std::vector<double> x(layer.d_in), xbar(layer.d_in);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        for (double& v : xbar) v = rng.uniform(-2.0, 2.0);
        const auto collapsed = fdlinear::forward_collapsed(layer, x, xbar);
        const auto expanded = fdlinear::forward_expanded(layer, x, xbar);
        double scale = 1e-30;
        for (double v : collapsed) scale = std::max(scale, std::abs(v));
        for (std::size_t o = 0; o < collapsed.size(); ++o)
            worst = std::max(worst, std::abs(collapsed[o] - expanded.y[o]) / std::max(scale, 1.0));
    }
    res.passed = worst < 1e-9;
    res.detail = "max relative deviation = " + fmt(worst);
    return res;
}

CheckResult check_identity_fallback(const CheckOptions& options) {
    CheckResult res{"identity-fallback", true, ""};
    Rng rng(options.seed + 505);
    double worst = 0.0;
    for (std::size_t d : {4u, 8u}) {
        fdlinear::LayerConfig lc;
        lc.d_in = lc.d_out = d;
        lc.k = spectral::distinct_radius_count(d);
        lc.bank = fdlinear::BankInit::frequency_disjoint;
        lc.hidden = 4;
        lc.seed = rng.next_u64();
        auto layer = fdlinear::make_layer(lc);
        // Zero predictor => modulations exactly 1 => W == W_ori.
        for (double& v : layer.predictor.w1.data()) v = 0.0;
        for (double& v : layer.predictor.w2.data()) v = 0.0;
        RealMatrix w_ori(d, d, 0.0);
        for (const auto& b : layer.bank.bases) w_ori += b;
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(d), xbar(d);
            for (double& v : x) v = rng.uniform(-2.0, 2.0);
            for (double& v : xbar) v = rng.uniform(-2.0, 2.0);
            const auto y = fdlinear::forward_collapsed(layer, x, xbar);
            const auto y_ref = w_ori.matvec(x);
            for (std::size_t o = 0; o < d; ++o)
                worst = std::max(worst, std::abs(y[o] - y_ref[o]));
        }
    }
    res.passed = worst < 1e-9;
    res.detail = "max |dynamic - static| = " + fmt(worst);
    return res;
}

// Central-difference probe along one parameter coordinate (double-sided,
// Hermitian-paired for spectrum entries) vs the analytic gradient.
double fd_relative_error(fdlinear::FDLinearLayer& layer, const fdlinear::Batch& batch,
                         double* param, const double* analytic, double eps) {
    const double saved = *param;
    *param = saved + eps;
    if (layer.bank.mode == spectral::BankMode::frequency_disjoint) fdlinear::refresh_bases(layer);
    const double up = fdlinear::batch_loss(layer, batch, fdlinear::LossKind::softmax_cross_entropy);
    *param = saved - eps;
    if (layer.bank.mode == spectral::BankMode::frequency_disjoint) fdlinear::refresh_bases(layer);
    const double dn = fdlinear::batch_loss(layer, batch, fdlinear::LossKind::softmax_cross_entropy);
    *param = saved;
    if (layer.bank.mode == spectral::BankMode::frequency_disjoint) fdlinear::refresh_bases(layer);
    const double fd = (up - dn) / (2.0 * eps);
    return std::abs(fd - *analytic) / std::max({std::abs(fd), std::abs(*analytic), 1e-6});
}

CheckResult check_gradient_fd(const CheckOptions& options) {
    CheckResult res{"gradient-fd", true, ""};
    Rng rng(options.seed + 606);
    const double eps = 1e-5;
    double worst = 0.0;

    for (int mode = 0; mode < 2 && res.passed; ++mode) {
        const bool free_spatial = mode == 0;
        auto layer = random_layer(rng, free_spatial);
        layer.context_mode = fdlinear::ContextMode::identity;
        fdlinear::Batch batch;
        for (int j = 0; j < 6; ++j) {
            std::vector<double> x(layer.d_in);
            for (double& v : x) v = rng.uniform(-1.5, 1.5);
            batch.inputs.push_back(std::move(x));
            batch.targets.push_back(rng.below(layer.d_out));
            batch.weights.push_back(1.0 / 6.0);
        }
        auto grads = fdlinear::backward(layer, batch, fdlinear::LossKind::softmax_cross_entropy);

        auto probe_group = [&](double* params, double* analytic, std::size_t n,
                               std::size_t probes) {
            for (std::size_t p = 0; p < probes; ++p) {
                const std::size_t i = rng.below(n);
                worst = std::max(worst,
                                 fd_relative_error(layer, batch, params + i, analytic + i, eps));
            }
        };
        auto& pr = layer.predictor;
        probe_group(pr.w1.data().data(), grads.w1.data().data(), pr.w1.data().size(), 12);
        probe_group(pr.b1.data(), grads.b1.data(), pr.b1.size(), 6);
        probe_group(pr.w2.data().data(), grads.w2.data().data(), pr.w2.data().size(), 12);
        probe_group(pr.b2.data(), grads.b2.data(), pr.b2.size(), 6);
        if (free_spatial) {
            for (std::size_t probes = 0; probes < 14; ++probes) {
                const std::size_t b = rng.below(layer.k);
                const std::size_t i = rng.below(layer.bank.bases[b].data().size());
                worst = std::max(
                    worst, fd_relative_error(layer, batch, &layer.bank.bases[b].data()[i],
                                             &grads.bases[b].data()[i], eps));
            }
        } else {
            // Perturb a conjugate pair together; the analytic directional
            // derivative doubles for off-pair bins.
            const std::size_t d = layer.d_in;
            for (std::size_t probes = 0; probes < 14; ++probes) {
                const std::size_t u = rng.below(d), v = rng.below(d);
                const std::size_t uu = (d - u) % d, vv = (d - v) % d;
                const bool self_paired = uu == u && vv == v;
                const bool real_part = self_paired || rng.below(2) == 0;
                auto& s = *layer.bank.spectrum_params;
                const double analytic =
                    (self_paired ? 1.0 : 2.0) *
                    (real_part ? grads.spectrum(u, v).real() : grads.spectrum(u, v).imag());
                const double saved_re = s(u, v).real(), saved_im = s(u, v).imag();
                const double partner_re = s(uu, vv).real(), partner_im = s(uu, vv).imag();
                auto apply = [&](double delta) {
                    if (real_part) {
                        s(u, v) = {saved_re + delta, saved_im};
                        if (!self_paired) s(uu, vv) = {partner_re + delta, partner_im};
                    } else {
                        s(u, v) = {saved_re, saved_im + delta};
                        s(uu, vv) = {partner_re, partner_im - delta};
                    }
                    fdlinear::refresh_bases(layer);
                };
                apply(eps);
                const double up =
                    fdlinear::batch_loss(layer, batch, fdlinear::LossKind::softmax_cross_entropy);
                apply(-eps);
                const double dn =
                    fdlinear::batch_loss(layer, batch, fdlinear::LossKind::softmax_cross_entropy);
                apply(0.0);
                const double fd = (up - dn) / (2.0 * eps);
                worst = std::max(worst, std::abs(fd - analytic) /
                                            std::max({std::abs(fd), std::abs(analytic), 1e-6}));
            }
        }
    }
    res.passed = worst < 1e-4;
    res.detail = "max relative error = " + fmt(worst);
    return res;
}

CheckResult check_overhead() {
    CheckResult res{"overhead-large-d", true, ""};
    // Documented large-d configuration: d = 1280, K = 640, hidden = 16.
    const std::size_t d = 1280, k = 640, hidden = 16;
    const double ratio = fdlinear::overhead_ratio_for(d, d, k, hidden);
    const std::size_t largest = fdlinear::largest_hidden_under(d, d, k, 0.05);
    res.passed = ratio < 0.05 && largest >= hidden;
    std::ostringstream ss;
    ss << "d=1280 K=640 hidden=16 ratio=" << ratio << " (largest hidden under 5% = " << largest
       << ")";
    res.detail = ss.str();
    return res;
}

CheckResult check_grpo_anchors(const CheckOptions& options) {
    CheckResult res{"grpo-anchors", true, ""};
    std::ostringstream why;
    const auto adv = grpo::group_advantages({1.0, 2.0, 3.0}, 1e-8);
    const double root32 = 1.224744871391589;
    if (std::abs(adv[0] + root32) > 1e-4 || std::abs(adv[1]) > 1e-4 ||
        std::abs(adv[2] - root32) > 1e-4) {
        res.passed = false;
        why << "advantages([1,2,3]) off;";
    }
    for (double a : grpo::group_advantages({5.0, 5.0, 5.0}, 1e-8))
        if (a != 0.0) {
            res.passed = false;
            why << "zero-variance group not zeroed;";
        }

    // Objective anchors on a random group at theta = theta_old, beta = 0.
    Rng rng(options.seed + 707);
    grpo::RolloutGroup group;
    group.query_id = "anchor";
    for (int i = 0; i < 4; ++i) {
        const std::size_t len = 1 + rng.below(5);
        std::vector<int> tokens(len);
        std::vector<double> lp(len);
        for (auto& t : tokens) t = static_cast<int>(rng.below(7));
        for (auto& v : lp) v = -rng.uniform(0.1, 3.0);
        group.outputs.push_back(tokens);
        group.old_logprobs.push_back(lp);
        group.ref_logprobs.push_back(lp);
        group.rewards.push_back(rng.uniform(0.0, 1.0));
    }
    std::vector<std::vector<double>> zero_kl;
    for (const auto& o : group.outputs) zero_kl.emplace_back(o.size(), 0.0);
    grpo::GRPOConfig cfg;
    cfg.kl_beta = 0.0;
    const double at_anchor = grpo::grpo_objective(group, group.old_logprobs, zero_kl, cfg);
    if (std::abs(at_anchor) > 1e-12) {
        res.passed = false;
        why << "objective at anchor = " << at_anchor << ";";
    }

    // Single-token clip arithmetic: a two-element group with rewards {1,0}
    // has advantages exactly {+1,-1}; phi = 1.5 on the first output must
    // contribute min(1.5, 1+eps) * 1 = 1.2 exactly, the second stays at -1.
    grpo::RolloutGroup clip_group;
    clip_group.query_id = "clip";
    clip_group.outputs = {{0}, {0}};
    clip_group.old_logprobs = {{std::log(0.5)}, {std::log(0.5)}};
    clip_group.ref_logprobs = clip_group.old_logprobs;
    clip_group.rewards = {1.0, 0.0};
    std::vector<std::vector<double>> new_lp = {{std::log(0.5) + std::log(1.5)}, {std::log(0.5)}};
    std::vector<std::vector<double>> kl1 = {{0.0}, {0.0}};
    grpo::GRPOConfig ccfg;
    ccfg.clip_eps = 0.2;
    ccfg.kl_beta = 0.0;
    const double val = grpo::grpo_objective(clip_group, new_lp, kl1, ccfg);
    const double expect = ((1.0 + 0.2) * 1.0 + (-1.0)) / 2.0;
    if (val != expect) {
        res.passed = false;
        why << "clip arithmetic got " << val << " want " << expect << ";";
    }

    if (std::abs(grpo::categorical_kl({0.3, -1.2, 0.7}, {0.3, -1.2, 0.7})) > 1e-15) {
        res.passed = false;
        why << "KL(p,p) != 0;";
    }
    double min_kl = 1e300;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> p(4), q(4);
        for (auto& v : p) v = rng.uniform(-3.0, 3.0);
        for (auto& v : q) v = rng.uniform(-3.0, 3.0);
        min_kl = std::min(min_kl, grpo::categorical_kl(p, q));
    }
    if (min_kl < -1e-12) {
        res.passed = false;
        why << "negative KL " << min_kl << ";";
    }
    res.detail = res.passed ? "advantages/objective/clip/KL anchors hold" : why.str();
    return res;
}

} // namespace

std::vector<CheckResult> run_all(const CheckOptions& options) {
    std::vector<CheckResult> results;
    results.push_back(check_partition_invariants());
    results.push_back(check_basis_reality(options));
    results.push_back(check_reconstruction(options));
    results.push_back(check_dft_linearity(options));
    results.push_back(check_expand_collapse(options));
    results.push_back(check_identity_fallback(options));
    results.push_back(check_gradient_fd(options));
    results.push_back(check_overhead());
    results.push_back(check_grpo_anchors(options));
    return results;
}

} // namespace dermbench::checks
