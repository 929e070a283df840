#ifndef DERMBENCH_FDLINEAR_HPP
#define DERMBENCH_FDLINEAR_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dermbench/spectral.hpp"

namespace dermbench::fdlinear {

// The three factorized coefficient vectors; one per input channel, output
// channel, and basis.
struct ModulationVectors {
    std::vector<double> a_in;
    std::vector<double> a_out;
    std::vector<double> a_basis;
};

// Bottleneck FC predictor: xbar -> tanh(w1 xbar + b1) -> w2 . + b2, raw
// output split into the three modulation slices, each mapped through
// 1 + tanh so an all-zero predictor yields all-ones modulations.
struct CoefficientPredictor {
    RealMatrix w1;          // hidden x d_in
    std::vector<double> b1; // hidden
    RealMatrix w2;          // (d_in + d_out + k) x hidden
    std::vector<double> b2; // d_in + d_out + k
    std::size_t hidden = 0;

    std::size_t param_count() const noexcept {
        return w1.rows() * w1.cols() + b1.size() + w2.rows() * w2.cols() + b2.size();
    }
};

enum class ContextMode { global_average, identity };
enum class BankInit { frequency_disjoint, free_spatial, auto_select };

struct FDLinearLayer {
    spectral::BasisBank bank;
    CoefficientPredictor predictor;
    std::size_t d_in = 0, d_out = 0, k = 0;
    ContextMode context_mode = ContextMode::global_average;
    std::uint64_t seed = 0;
};

struct LayerConfig {
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    std::size_t k = 1;
    BankInit bank = BankInit::auto_select;
    std::size_t hidden = 0; // 0 -> default_hidden(d_in)
    ContextMode context = ContextMode::global_average;
    std::uint64_t seed = 0;
};

// max(4, d_in/4); callers targeting large d should cap via largest_hidden_under.
std::size_t default_hidden(std::size_t d_in);

// Predictor parameter count over d_in*d_out for a hypothetical layer; the
// arithmetic twin of overhead_ratio() for configurations too large to build.
double overhead_ratio_for(std::size_t d_in, std::size_t d_out, std::size_t k, std::size_t hidden);

// Largest hidden width whose predictor stays under cap * d_in * d_out
// parameters; 0 if none does.
std::size_t largest_hidden_under(std::size_t d_in, std::size_t d_out, std::size_t k, double cap);

// Bank init: frequency-disjoint cuts the dft2 of a fan-in-scaled uniform
// matrix (so the bases sum to a conventionally initialized static layer);
// auto_select falls back to free-spatial when the layer is non-square or the
// radial partition reports a capacity error. Predictor init keeps the warm
// start: w2 = b2 = 0 so all modulations start at exactly 1.
FDLinearLayer make_layer(const LayerConfig& cfg);

// Rebuilds bases from spectrum_params (frequency-disjoint banks only); call
// after updating the spectrum.
void refresh_bases(FDLinearLayer& layer);

std::vector<double> context_vector(const FDLinearLayer& layer,
                                   const std::vector<std::vector<double>>& inputs);

ModulationVectors predict_coefficients(const FDLinearLayer& layer,
                                       const std::vector<double>& xbar);

// W[o,i] = a_out[o] * a_in[i] * sum_k a_basis[k] * B_k[o,i]
RealMatrix compose_weight(const FDLinearLayer& layer, const ModulationVectors& mods);

std::vector<double> forward_collapsed(const FDLinearLayer& layer,
                                      const std::vector<double>& x,
                                      const std::vector<double>& xbar);

struct ExpandedForward {
    std::vector<double> h; // k * d_out, block k = a_out .* (B_k (a_in .* x))
    std::vector<double> y; // sum_k a_basis[k] * block_k
};

ExpandedForward forward_expanded(const FDLinearLayer& layer,
                                 const std::vector<double>& x,
                                 const std::vector<double>& xbar);

enum class LossKind { softmax_cross_entropy };

// Loss is the weighted SUM over samples; pass weights of 1/n for a mean.
struct Batch {
    std::vector<std::vector<double>> inputs;
    std::vector<std::size_t> targets;
    std::vector<double> weights; // empty -> all ones
};

struct Gradients {
    RealMatrix w1;
    std::vector<double> b1;
    RealMatrix w2;
    std::vector<double> b2;
    std::vector<RealMatrix> bases; // free-spatial banks
    ComplexMatrix spectrum;        // frequency-disjoint banks (kept Hermitian)
    double loss = 0.0;
};

double batch_loss(const FDLinearLayer& layer, const Batch& batch, LossKind loss);
Gradients backward(const FDLinearLayer& layer, const Batch& batch, LossKind loss);

struct OverheadReport {
    std::size_t predictor_params = 0;
    std::size_t bank_params = 0;
    std::size_t baseline = 0;           // d_in * d_out
    double predictor_ratio = 0.0;       // overhead_ratio()
    double bank_overhead_ratio = 0.0;   // 0 frequency-disjoint, k-1 free-spatial
};

double overhead_ratio(const FDLinearLayer& layer);
OverheadReport overhead_report(const FDLinearLayer& layer);

// Text checkpoint, %.17g per value: header (d_in d_out k mode hidden context
// seed) then parameter arrays in fixed order. Round-trips doubles exactly.
void save_layer(const FDLinearLayer& layer, std::ostream& out);
void save_layer_file(const FDLinearLayer& layer, const std::string& path);
FDLinearLayer load_layer(std::istream& in);
FDLinearLayer load_layer_file(const std::string& path);

} // namespace dermbench::fdlinear

#endif
