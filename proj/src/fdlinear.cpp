#include "dermbench/fdlinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dermbench/rng.hpp"

namespace dermbench::fdlinear {

namespace {

void require_len(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        fail(ErrorCode::dimension_mismatch,
             std::string(what) + ": length " + std::to_string(got) + " != " + std::to_string(want));
}

std::size_t predictor_params_for(std::size_t d_in, std::size_t d_out, std::size_t k,
                                 std::size_t hidden) {
    const std::size_t m = d_in + d_out + k;
    return hidden * d_in + hidden + m * hidden + m;
}

} // namespace

std::size_t default_hidden(std::size_t d_in) {
    return std::max<std::size_t>(4, d_in / 4);
}

double overhead_ratio_for(std::size_t d_in, std::size_t d_out, std::size_t k, std::size_t hidden) {
    return static_cast<double>(predictor_params_for(d_in, d_out, k, hidden)) /
           (static_cast<double>(d_in) * static_cast<double>(d_out));
}

std::size_t largest_hidden_under(std::size_t d_in, std::size_t d_out, std::size_t k, double cap) {
    const double budget = cap * static_cast<double>(d_in) * static_cast<double>(d_out);
    std::size_t best = 0;
    for (std::size_t h = 1;; ++h) {
        if (static_cast<double>(predictor_params_for(d_in, d_out, k, h)) < budget)
            best = h;
        else
            break;
    }
    return best;
}

FDLinearLayer make_layer(const LayerConfig& cfg) {
    if (cfg.d_in < 1 || cfg.d_out < 1 || cfg.k < 1)
        fail(ErrorCode::invalid_argument, "make_layer: d_in, d_out, k must all be >= 1");
    const std::size_t hidden = cfg.hidden ? cfg.hidden : default_hidden(cfg.d_in);
    if (hidden < 1)
        fail(ErrorCode::invalid_argument, "make_layer: hidden must be >= 1");

    FDLinearLayer layer;
    layer.d_in = cfg.d_in;
    layer.d_out = cfg.d_out;
    layer.k = cfg.k;
    layer.context_mode = cfg.context;
    layer.seed = cfg.seed;

    Rng rng(cfg.seed);
    const double fan_scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_in));

    BankInit mode = cfg.bank;
    if (mode == BankInit::auto_select) {
        mode = BankInit::frequency_disjoint;
        if (cfg.d_in != cfg.d_out ||
            cfg.k > spectral::distinct_radius_count(cfg.d_in))
            mode = BankInit::free_spatial;
    }

    if (mode == BankInit::frequency_disjoint) {
        if (cfg.d_in != cfg.d_out)
            fail(ErrorCode::invalid_argument,
                 "make_layer: frequency-disjoint banks require d_in == d_out");
        auto partition = spectral::build_radial_partition(cfg.d_in, cfg.k);
        RealMatrix w0(cfg.d_out, cfg.d_in);
        for (double& v : w0.data()) v = rng.uniform(-fan_scale, fan_scale);
        layer.bank = spectral::construct_bases(spectral::dft2(w0), partition);
    } else {
        // Per-basis scale 1/sqrt(k) keeps the all-ones-modulation sum at the
        // variance of a conventionally initialized static layer.
        layer.bank.mode = spectral::BankMode::free_spatial;
        const double basis_scale = fan_scale / std::sqrt(static_cast<double>(cfg.k));
        for (std::size_t i = 0; i < cfg.k; ++i) {
            RealMatrix b(cfg.d_out, cfg.d_in);
            for (double& v : b.data()) v = rng.uniform(-basis_scale, basis_scale);
            layer.bank.bases.push_back(std::move(b));
        }
    }

    // Warm start: w2 = b2 = 0 keeps every modulation at exactly 1, so the
    // fresh layer behaves as the static sum of its bases. w1/b1 are random so
    // the hidden features differ and gradient can reach w2 immediately.
    const std::size_t m = cfg.d_in + cfg.d_out + cfg.k;
    layer.predictor.hidden = hidden;
    layer.predictor.w1 = RealMatrix(hidden, cfg.d_in);
    for (double& v : layer.predictor.w1.data()) v = rng.uniform(-2.0 * fan_scale, 2.0 * fan_scale);
    layer.predictor.b1.resize(hidden);
    for (double& v : layer.predictor.b1) v = rng.uniform(-1.0, 1.0);
    layer.predictor.w2 = RealMatrix(m, hidden, 0.0);
    layer.predictor.b2.assign(m, 0.0);
    return layer;
}

void refresh_bases(FDLinearLayer& layer) {
    if (layer.bank.mode != spectral::BankMode::frequency_disjoint) return;
    layer.bank =
        spectral::construct_bases(*layer.bank.spectrum_params, *layer.bank.partition);
}

std::vector<double> context_vector(const FDLinearLayer& layer,
                                   const std::vector<std::vector<double>>& inputs) {
    if (inputs.empty())
        fail(ErrorCode::invalid_argument, "context_vector: input list is empty");
    for (const auto& x : inputs) require_len(x.size(), layer.d_in, "context_vector input");
    if (layer.context_mode == ContextMode::identity) {
        if (inputs.size() != 1)
            fail(ErrorCode::invalid_argument,
                 "context_vector: identity mode takes exactly one sample");
        return inputs.front();
    }
    std::vector<double> mean(layer.d_in, 0.0);
    for (const auto& x : inputs)
        for (std::size_t i = 0; i < layer.d_in; ++i) mean[i] += x[i];
    for (double& v : mean) v /= static_cast<double>(inputs.size());
    return mean;
}

ModulationVectors predict_coefficients(const FDLinearLayer& layer,
                                       const std::vector<double>& xbar) {
    require_len(xbar.size(), layer.d_in, "predict_coefficients xbar");
    const auto& p = layer.predictor;
    std::vector<double> hidden = p.w1.matvec(xbar);
    for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = std::tanh(hidden[i] + p.b1[i]);
    std::vector<double> raw = p.w2.matvec(hidden);
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] += p.b2[i];

    ModulationVectors mods;
    mods.a_in.resize(layer.d_in);
    mods.a_out.resize(layer.d_out);
    mods.a_basis.resize(layer.k);
    std::size_t at = 0;
    for (auto& v : mods.a_in) v = 1.0 + std::tanh(raw[at++]);
    for (auto& v : mods.a_out) v = 1.0 + std::tanh(raw[at++]);
    for (auto& v : mods.a_basis) v = 1.0 + std::tanh(raw[at++]);
    return mods;
}

RealMatrix compose_weight(const FDLinearLayer& layer, const ModulationVectors& mods) {
    require_len(mods.a_in.size(), layer.d_in, "compose_weight a_in");
    require_len(mods.a_out.size(), layer.d_out, "compose_weight a_out");
    require_len(mods.a_basis.size(), layer.k, "compose_weight a_basis");
    RealMatrix w(layer.d_out, layer.d_in, 0.0);
    for (std::size_t k = 0; k < layer.k; ++k) {
        const auto& b = layer.bank.bases[k];
        const double ab = mods.a_basis[k];
        for (std::size_t o = 0; o < layer.d_out; ++o)
            for (std::size_t i = 0; i < layer.d_in; ++i) w(o, i) += ab * b(o, i);
    }
    for (std::size_t o = 0; o < layer.d_out; ++o)
        for (std::size_t i = 0; i < layer.d_in; ++i)
            w(o, i) *= mods.a_out[o] * mods.a_in[i];
    return w;
}

std::vector<double> forward_collapsed(const FDLinearLayer& layer,
                                      const std::vector<double>& x,
                                      const std::vector<double>& xbar) {
    require_len(x.size(), layer.d_in, "forward_collapsed x");
    return compose_weight(layer, predict_coefficients(layer, xbar)).matvec(x);
}

ExpandedForward forward_expanded(const FDLinearLayer& layer,
                                 const std::vector<double>& x,
                                 const std::vector<double>& xbar) {
    require_len(x.size(), layer.d_in, "forward_expanded x");
    const ModulationVectors mods = predict_coefficients(layer, xbar);
    std::vector<double> z(layer.d_in);
    for (std::size_t i = 0; i < layer.d_in; ++i) z[i] = mods.a_in[i] * x[i];

    ExpandedForward out;
    out.h.resize(layer.k * layer.d_out);
    out.y.assign(layer.d_out, 0.0);
    for (std::size_t k = 0; k < layer.k; ++k) {
        std::vector<double> block = layer.bank.bases[k].matvec(z);
        for (std::size_t o = 0; o < layer.d_out; ++o) {
            block[o] *= mods.a_out[o];
            out.h[k * layer.d_out + o] = block[o];
            out.y[o] += mods.a_basis[k] * block[o];
        }
    }
    return out;
}

namespace {

// softmax cross-entropy on logits y against integer target; returns loss and
// writes dL/dy into grad.
double softmax_ce(const std::vector<double>& y, std::size_t target, std::vector<double>& grad) {
    const double ymax = *std::max_element(y.begin(), y.end());
    double z = 0.0;
    for (double v : y) z += std::exp(v - ymax);
    const double logz = std::log(z) + ymax;
    grad.resize(y.size());
    for (std::size_t c = 0; c < y.size(); ++c)
        grad[c] = std::exp(y[c] - logz) - (c == target ? 1.0 : 0.0);
    return logz - y[target];
}

struct ForwardTrace {
    std::vector<double> hidden_pre;  // w1 xbar + b1
    std::vector<double> hidden;      // tanh
    std::vector<double> raw;         // w2 hidden + b2
    ModulationVectors mods;
    std::vector<double> z;           // a_in .* x
    std::vector<std::vector<double>> pk; // B_k z
    std::vector<double> s;           // sum_k a_basis[k] pk
    std::vector<double> y;           // a_out .* s
};

ForwardTrace traced_forward(const FDLinearLayer& layer, const std::vector<double>& x,
                            const std::vector<double>& xbar) {
    const auto& p = layer.predictor;
    ForwardTrace t;
    t.hidden_pre = p.w1.matvec(xbar);
    for (std::size_t i = 0; i < t.hidden_pre.size(); ++i) t.hidden_pre[i] += p.b1[i];
    t.hidden = t.hidden_pre;
    for (double& v : t.hidden) v = std::tanh(v);
    t.raw = p.w2.matvec(t.hidden);
    for (std::size_t i = 0; i < t.raw.size(); ++i) t.raw[i] += p.b2[i];

    t.mods.a_in.resize(layer.d_in);
    t.mods.a_out.resize(layer.d_out);
    t.mods.a_basis.resize(layer.k);
    std::size_t at = 0;
    for (auto& v : t.mods.a_in) v = 1.0 + std::tanh(t.raw[at++]);
    for (auto& v : t.mods.a_out) v = 1.0 + std::tanh(t.raw[at++]);
    for (auto& v : t.mods.a_basis) v = 1.0 + std::tanh(t.raw[at++]);

    t.z.resize(layer.d_in);
    for (std::size_t i = 0; i < layer.d_in; ++i) t.z[i] = t.mods.a_in[i] * x[i];
    t.pk.resize(layer.k);
    t.s.assign(layer.d_out, 0.0);
    for (std::size_t k = 0; k < layer.k; ++k) {
        t.pk[k] = layer.bank.bases[k].matvec(t.z);
        for (std::size_t o = 0; o < layer.d_out; ++o)
            t.s[o] += t.mods.a_basis[k] * t.pk[k][o];
    }
    t.y.resize(layer.d_out);
    for (std::size_t o = 0; o < layer.d_out; ++o) t.y[o] = t.mods.a_out[o] * t.s[o];
    return t;
}

void check_batch(const FDLinearLayer& layer, const Batch& batch, LossKind loss) {
    if (loss != LossKind::softmax_cross_entropy)
        fail(ErrorCode::invalid_argument, "unsupported loss tag");
    if (batch.inputs.empty() || batch.inputs.size() != batch.targets.size())
        fail(ErrorCode::invalid_argument, "batch: inputs/targets size mismatch or empty");
    if (!batch.weights.empty() && batch.weights.size() != batch.inputs.size())
        fail(ErrorCode::invalid_argument, "batch: weights size mismatch");
    for (const auto& x : batch.inputs) require_len(x.size(), layer.d_in, "batch input");
    for (std::size_t t : batch.targets)
        if (t >= layer.d_out)
            fail(ErrorCode::invalid_argument, "batch: target out of range");
}

std::vector<double> batch_context(const FDLinearLayer& layer, const Batch& batch) {
    std::vector<double> mean(layer.d_in, 0.0);
    for (const auto& x : batch.inputs)
        for (std::size_t i = 0; i < layer.d_in; ++i) mean[i] += x[i];
    for (double& v : mean) v /= static_cast<double>(batch.inputs.size());
    return mean;
}

} // namespace

double batch_loss(const FDLinearLayer& layer, const Batch& batch, LossKind loss) {
    check_batch(layer, batch, loss);
    const bool identity = layer.context_mode == ContextMode::identity;
    const std::vector<double> shared_xbar =
        identity ? std::vector<double>{} : batch_context(layer, batch);
    double total = 0.0;
    std::vector<double> dy;
    for (std::size_t j = 0; j < batch.inputs.size(); ++j) {
        const double w = batch.weights.empty() ? 1.0 : batch.weights[j];
        const auto y = forward_collapsed(layer, batch.inputs[j],
                                         identity ? batch.inputs[j] : shared_xbar);
        total += w * softmax_ce(y, batch.targets[j], dy);
    }
    return total;
}

Gradients backward(const FDLinearLayer& layer, const Batch& batch, LossKind loss) {
    check_batch(layer, batch, loss);
    const auto& p = layer.predictor;
    const std::size_t m = layer.d_in + layer.d_out + layer.k;

    Gradients g;
    g.w1 = RealMatrix(p.w1.rows(), p.w1.cols(), 0.0);
    g.b1.assign(p.b1.size(), 0.0);
    g.w2 = RealMatrix(p.w2.rows(), p.w2.cols(), 0.0);
    g.b2.assign(p.b2.size(), 0.0);
    std::vector<RealMatrix> dbases(layer.k, RealMatrix(layer.d_out, layer.d_in, 0.0));

    const bool identity = layer.context_mode == ContextMode::identity;
    const std::vector<double> shared_xbar =
        identity ? std::vector<double>{} : batch_context(layer, batch);

    std::vector<double> dy, ds, dz, draw(m), dhidden, dhidden_pre;
    for (std::size_t j = 0; j < batch.inputs.size(); ++j) {
        const std::vector<double>& x = batch.inputs[j];
        const std::vector<double>& xbar = identity ? x : shared_xbar;
        const double w = batch.weights.empty() ? 1.0 : batch.weights[j];
        const ForwardTrace t = traced_forward(layer, x, xbar);

        g.loss += w * softmax_ce(t.y, batch.targets[j], dy);
        for (double& v : dy) v *= w;

        // y = a_out .* s
        ds.assign(layer.d_out, 0.0);
        std::vector<double> da_out(layer.d_out);
        for (std::size_t o = 0; o < layer.d_out; ++o) {
            da_out[o] = dy[o] * t.s[o];
            ds[o] = dy[o] * t.mods.a_out[o];
        }
        // s = sum_k a_basis[k] pk ; pk = B_k z
        std::vector<double> da_basis(layer.k, 0.0);
        dz.assign(layer.d_in, 0.0);
        for (std::size_t k = 0; k < layer.k; ++k) {
            const auto& b = layer.bank.bases[k];
            double acc = 0.0;
            for (std::size_t o = 0; o < layer.d_out; ++o) acc += t.pk[k][o] * ds[o];
            da_basis[k] = acc;
            const double ab = t.mods.a_basis[k];
            for (std::size_t o = 0; o < layer.d_out; ++o) {
                const double dpk = ab * ds[o];
                for (std::size_t i = 0; i < layer.d_in; ++i) {
                    dbases[k](o, i) += dpk * t.z[i];
                    dz[i] += dpk * b(o, i);
                }
            }
        }
        // z = a_in .* x
        std::vector<double> da_in(layer.d_in);
        for (std::size_t i = 0; i < layer.d_in; ++i) da_in[i] = dz[i] * x[i];

        // modulations = 1 + tanh(raw slice); d/draw = 1 - tanh^2 = 2*a - a^2
        // with a = 1 + tanh.
        std::size_t at = 0;
        for (std::size_t i = 0; i < layer.d_in; ++i, ++at) {
            const double a = t.mods.a_in[i];
            draw[at] = da_in[i] * (2.0 * a - a * a);
        }
        for (std::size_t o = 0; o < layer.d_out; ++o, ++at) {
            const double a = t.mods.a_out[o];
            draw[at] = da_out[o] * (2.0 * a - a * a);
        }
        for (std::size_t k = 0; k < layer.k; ++k, ++at) {
            const double a = t.mods.a_basis[k];
            draw[at] = da_basis[k] * (2.0 * a - a * a);
        }

        // raw = w2 hidden + b2
        dhidden.assign(p.hidden, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            g.b2[r] += draw[r];
            for (std::size_t h = 0; h < p.hidden; ++h) {
                g.w2(r, h) += draw[r] * t.hidden[h];
                dhidden[h] += draw[r] * p.w2(r, h);
            }
        }
        // hidden = tanh(w1 xbar + b1)
        dhidden_pre.resize(p.hidden);
        for (std::size_t h = 0; h < p.hidden; ++h)
            dhidden_pre[h] = dhidden[h] * (1.0 - t.hidden[h] * t.hidden[h]);
        for (std::size_t h = 0; h < p.hidden; ++h) {
            g.b1[h] += dhidden_pre[h];
            for (std::size_t i = 0; i < layer.d_in; ++i)
                g.w1(h, i) += dhidden_pre[h] * xbar[i];
        }
    }

    if (layer.bank.mode == spectral::BankMode::free_spatial) {
        g.bases = std::move(dbases);
    } else {
        // B_k = Re(idft2(P_k .* S)); the adjoint is (1/d^2) sum_k P_k .* dft2(dB_k).
        const std::size_t d = layer.d_in;
        const auto& partition = *layer.bank.partition;
        ComplexMatrix gs(d, d);
        for (std::size_t k = 0; k < layer.k; ++k) {
            const ComplexMatrix f = spectral::dft2(dbases[k]);
            const auto& mask = partition.masks[k];
            for (std::size_t u = 0; u < d; ++u)
                for (std::size_t v = 0; v < d; ++v)
                    if (mask(u, v) != 0.0) gs(u, v) += f(u, v);
        }
        const double norm = 1.0 / (static_cast<double>(d) * static_cast<double>(d));
        for (auto& v : gs.data()) v *= norm;
        // Project exactly onto the Hermitian subspace so spectrum updates
        // preserve conjugate symmetry bit-for-bit.
        ComplexMatrix proj(d, d);
        for (std::size_t u = 0; u < d; ++u)
            for (std::size_t v = 0; v < d; ++v)
                proj(u, v) = 0.5 * (gs(u, v) + std::conj(gs((d - u) % d, (d - v) % d)));
        g.spectrum = std::move(proj);
    }
    return g;
}

double overhead_ratio(const FDLinearLayer& layer) {
    return static_cast<double>(layer.predictor.param_count()) /
           (static_cast<double>(layer.d_in) * static_cast<double>(layer.d_out));
}

OverheadReport overhead_report(const FDLinearLayer& layer) {
    OverheadReport r;
    r.predictor_params = layer.predictor.param_count();
    r.baseline = layer.d_in * layer.d_out;
    r.bank_params = layer.bank.mode == spectral::BankMode::frequency_disjoint
                        ? r.baseline
                        : layer.k * r.baseline;
    r.predictor_ratio = overhead_ratio(layer);
    r.bank_overhead_ratio =
        static_cast<double>(r.bank_params - r.baseline) / static_cast<double>(r.baseline);
    return r;
}

namespace {

void write_values(std::ostream& out, const char* name, const double* v, std::size_t n) {
    out << name;
    char buf[40];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, " %.17g", v[i]);
        out << buf;
    }
    out << "\n";
}

std::vector<double> read_values(std::istream& in, const std::string& want, std::size_t n) {
    std::string line;
    if (!std::getline(in, line))
        fail(ErrorCode::parse, "checkpoint: missing section " + want);
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    if (name != want)
        fail(ErrorCode::parse, "checkpoint: expected section " + want + ", got " + name);
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i)
        if (!(ss >> vals[i]))
            fail(ErrorCode::parse, "checkpoint: section " + want + " truncated");
    double extra;
    if (ss >> extra)
        fail(ErrorCode::parse, "checkpoint: section " + want + " has trailing values");
    return vals;
}

} // namespace

void save_layer(const FDLinearLayer& layer, std::ostream& out) {
    out << "fdlinear-checkpoint v1\n";
    out << "d_in " << layer.d_in << "\n";
    out << "d_out " << layer.d_out << "\n";
    out << "k " << layer.k << "\n";
    out << "mode "
        << (layer.bank.mode == spectral::BankMode::frequency_disjoint ? "frequency-disjoint"
                                                                      : "free-spatial")
        << "\n";
    out << "hidden " << layer.predictor.hidden << "\n";
    out << "context "
        << (layer.context_mode == ContextMode::identity ? "identity" : "global-average") << "\n";
    out << "seed " << layer.seed << "\n";
    const auto& p = layer.predictor;
    write_values(out, "w1", p.w1.data().data(), p.w1.data().size());
    write_values(out, "b1", p.b1.data(), p.b1.size());
    write_values(out, "w2", p.w2.data().data(), p.w2.data().size());
    write_values(out, "b2", p.b2.data(), p.b2.size());
    if (layer.bank.mode == spectral::BankMode::frequency_disjoint) {
        const auto& s = *layer.bank.spectrum_params;
        std::vector<double> flat;
        flat.reserve(2 * s.data().size());
        for (const auto& v : s.data()) {
            flat.push_back(v.real());
            flat.push_back(v.imag());
        }
        write_values(out, "spectrum", flat.data(), flat.size());
    } else {
        for (std::size_t k = 0; k < layer.k; ++k)
            write_values(out, ("basis" + std::to_string(k)).c_str(),
                         layer.bank.bases[k].data().data(), layer.bank.bases[k].data().size());
    }
}

void save_layer_file(const FDLinearLayer& layer, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot open for write: " + path);
    save_layer(layer, out);
    if (!out) fail(ErrorCode::io, "write failed: " + path);
}

FDLinearLayer load_layer(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "fdlinear-checkpoint v1")
        fail(ErrorCode::parse, "checkpoint: bad magic line");
    auto read_kv = [&](const std::string& key) -> std::string {
        if (!std::getline(in, line)) fail(ErrorCode::parse, "checkpoint: missing " + key);
        std::istringstream ss(line);
        std::string k, v;
        ss >> k >> v;
        if (k != key) fail(ErrorCode::parse, "checkpoint: expected " + key + ", got " + k);
        return v;
    };
    FDLinearLayer layer;
    layer.d_in = std::stoul(read_kv("d_in"));
    layer.d_out = std::stoul(read_kv("d_out"));
    layer.k = std::stoul(read_kv("k"));
    const std::string mode = read_kv("mode");
    layer.predictor.hidden = std::stoul(read_kv("hidden"));
    const std::string context = read_kv("context");
    layer.seed = std::stoull(read_kv("seed"));
    if (layer.d_in < 1 || layer.d_out < 1 || layer.k < 1 || layer.predictor.hidden < 1)
        fail(ErrorCode::validation, "checkpoint: bad header dimensions");
    layer.context_mode =
        context == "identity" ? ContextMode::identity : ContextMode::global_average;

    const std::size_t m = layer.d_in + layer.d_out + layer.k;
    auto& p = layer.predictor;
    p.w1 = RealMatrix(p.hidden, layer.d_in, read_values(in, "w1", p.hidden * layer.d_in));
    p.b1 = read_values(in, "b1", p.hidden);
    p.w2 = RealMatrix(m, p.hidden, read_values(in, "w2", m * p.hidden));
    p.b2 = read_values(in, "b2", m);

    if (mode == "frequency-disjoint") {
        const std::size_t d = layer.d_in;
        if (layer.d_out != d)
            fail(ErrorCode::validation, "checkpoint: frequency-disjoint layer must be square");
        const auto flat = read_values(in, "spectrum", 2 * d * d);
        ComplexMatrix s(d, d);
        for (std::size_t i = 0; i < d * d; ++i)
            s.data()[i] = {flat[2 * i], flat[2 * i + 1]};
        layer.bank = spectral::construct_bases(s, spectral::build_radial_partition(d, layer.k));
    } else if (mode == "free-spatial") {
        layer.bank.mode = spectral::BankMode::free_spatial;
        for (std::size_t k = 0; k < layer.k; ++k)
            layer.bank.bases.emplace_back(
                layer.d_out, layer.d_in,
                read_values(in, "basis" + std::to_string(k), layer.d_out * layer.d_in));
    } else {
        fail(ErrorCode::parse, "checkpoint: unknown mode " + mode);
    }
    return layer;
}

FDLinearLayer load_layer_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open for read: " + path);
    return load_layer(in);
}

} // namespace dermbench::fdlinear
