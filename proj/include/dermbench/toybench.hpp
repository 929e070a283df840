#ifndef DERMBENCH_TOYBENCH_HPP
#define DERMBENCH_TOYBENCH_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dermbench/fdlinear.hpp"

namespace dermbench::toybench {

enum class DatasetKind { spirals, xor_blobs, circles, moons };

DatasetKind dataset_kind_from_name(const std::string& name);
const char* dataset_kind_name(DatasetKind kind);
double default_noise(DatasetKind kind); // spirals 0.05, others 0.1

struct ToyDataset {
    DatasetKind kind = DatasetKind::spirals;
    std::vector<std::array<double, 2>> points;
    std::vector<int> labels; // 0/1, balanced
    std::uint64_t seed = 0;
    double noise = 0.0;
    std::size_t n = 0;
};

// Class-balanced 2-class sets: spirals = interleaved Archimedean arms over
// angle 0..3pi, xor = diagonal-labeled blobs at (+-1,+-1), circles = radii
// 0.5/1.0, moons = interleaving half-circles. Gaussian noise of the given
// std on both coordinates; identical (kind,n,noise,seed) gives identical data.
ToyDataset gen_dataset(DatasetKind kind, std::size_t n, double noise, std::uint64_t seed);

// Fraction of linearly separable (through-origin) dichotomies of n points in
// general position in d dimensions: 2^(1-n) * sum_{j<d} C(n-1,j), and exactly
// 1 for n <= d+1 where every dichotomy is separable.
double cover_fraction(std::size_t n, std::size_t d);

struct TrainConfig {
    std::size_t steps = 3000;
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t eval_every = 100;
    std::size_t hidden = 0; // 0 -> layer default
    std::uint64_t seed = 0;
    bool freeze_predictor = false;
    // The FDLinear fit is non-convex; train this many replicas from derived
    // seeds and keep the lowest final training loss. Deterministic per seed.
    std::size_t restarts = 5;
};

struct TrainReport {
    std::vector<std::pair<std::size_t, double>> accuracy_curve;
    std::vector<std::pair<std::size_t, double>> loss_curve;
    double final_accuracy = 0.0;
    std::string config_echo;
    std::uint64_t seed = 0;
};

// Either a plain 2x2 linear map or a trained FDLinear layer; logits() is the
// shared inference surface for exports and accuracy.
struct ToyModel {
    bool is_fdlinear = false;
    RealMatrix static_w;
    fdlinear::FDLinearLayer layer;

    std::vector<double> logits(const std::array<double, 2>& x) const;
};

struct TrainResult {
    TrainReport report;
    ToyModel model;
};

// 2->2 static linear classifier (y = Wx), full-batch Adam on softmax CE,
// evaluated on a held-out set of ~n/4 points generated from seed+1.
TrainResult train_static(const ToyDataset& ds, const TrainConfig& cfg);

// Single FDLinearLayer (d_in = d_out = 2, identity context, free-spatial
// bank) trained end to end the same way.
TrainResult train_fdlinear(const ToyDataset& ds, std::size_t k, const TrainConfig& cfg);

struct Bounds {
    double x_min = -1.5, x_max = 1.5;
    double y_min = -1.5, y_max = 1.5;
};

Bounds default_bounds(DatasetKind kind);

struct GridRecord {
    double x, y;
    double logit0, logit1;
    int predicted;
};

std::vector<GridRecord> export_boundary_grid(const ToyModel& model, const Bounds& bounds,
                                             std::size_t resolution);

struct FieldRecord {
    double x, y;
    double angle;     // orientation of the first row of W(xbar)
    double magnitude; // its Euclidean norm
};

std::vector<FieldRecord> export_vector_field(const ToyModel& model,
                                             const std::vector<GridRecord>& grid);

// 2*(1-R) with R the mean resultant length; ~variance (rad^2) for
// concentrated angle sets, used to quantify field rotation.
double angular_variance(const std::vector<double>& angles);

double dataset_accuracy(const ToyModel& model, const ToyDataset& ds);

} // namespace dermbench::toybench

#endif
