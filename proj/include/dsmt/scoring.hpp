#pragma once

// Learnable cost functions that produce theta for an association graph:
//
//   theta_det(x_j)      = DetScorer([appearance_j, geometry_j])
//   theta_link(x_j,x_k) = fusion([w * sim_jk, bev_branch(bev_jk), fv_branch(fv_jk)])
//   theta_new, theta_end: learned scalars shared by every detection
//
// backward() returns the exact gradient of dtheta . theta(W).

#include "dsmt/assoc.hpp"
#include "dsmt/features.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsmt {

enum class Activation : std::uint8_t { identity, relu, tanh };

struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weights; // out x in, row-major
    std::vector<double> bias;    // out
    Activation activation = Activation::identity;

    DenseLayer() = default;
    DenseLayer(int in_size, int out_size, Activation act)
        : in(in_size), out(out_size), weights(static_cast<std::size_t>(in_size) * out_size, 0.0),
          bias(static_cast<std::size_t>(out_size), 0.0), activation(act) {}

    double& weight(int o, int i) { return weights[static_cast<std::size_t>(o) * in + i]; }
    double weight(int o, int i) const { return weights[static_cast<std::size_t>(o) * in + i]; }
};

struct MatchScorer {
    std::vector<double> appearance_weights; // one per appearance block, shared by both inputs
    std::vector<DenseLayer> bev_branch;
    std::vector<DenseLayer> fv_branch;
    DenseLayer fusion; // (blocks + bev_out + fv_out) -> 1
};

struct DetScorer {
    std::vector<DenseLayer> layers; // last layer maps to a single output
};

// Architecture knobs. Branch and det hidden lists give layer widths; every
// hidden/branch layer is relu, the det output and the fusion are identity.
struct ModelConfig {
    int blocks = 5;
    int block_length = 16;
    std::vector<int> det_hidden{16};
    std::vector<int> bev_hidden{16};
    std::vector<int> fv_hidden{16};
    FeatureConfig features;

    void validate() const;
};

// Four geometry inputs appended to the det scorer input, scaled to O(1):
// distance from ego / 10 m, volume / 10 m^3, yaw / pi, 2D area / 1e4 px^2.
inline constexpr int kGeometryFeatureCount = 4;
std::vector<double> detection_input(const Detection& d);

struct TensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::span<double> data;
};

struct ConstTensorRef {
    std::string name;
    std::vector<std::size_t> shape;
    std::span<const double> data;
};

struct CostModel {
    ModelConfig config;
    DetScorer det;
    MatchScorer link;
    double theta_new = 0.0;
    double theta_end = 0.0;

    // All-zero parameters for the given architecture.
    static CostModel create(const ModelConfig& config);
    CostModel zeros_like() const;

    // Parameter tensors in a fixed order (the checkpoint order).
    std::vector<TensorRef> tensors();
    std::vector<ConstTensorRef> tensors() const;
    std::size_t parameter_count() const;
    void check_finite() const;
};

// Parameter-shaped accumulator for gradients.
using Gradient = CostModel;

// Zero-mean truncated normal (resampled beyond two standard deviations) for
// every weight, the appearance weights and the new/end scalars; biases zero.
void init_truncated_normal(CostModel& model, double stddev, std::mt19937_64& rng);

// Parameter-independent inputs for one graph; computed once and reused by
// every forward pass.
struct GraphFeatures {
    std::vector<std::vector<double>> det_inputs; // per detection
    std::vector<PairFeatures> links;             // per link
};

GraphFeatures compute_graph_features(const AssociationGraph& graph, const TrackSequence& seq,
                                     const ModelConfig& config);

struct LayerTrace {
    std::vector<double> pre;
    std::vector<double> out;
};

struct DetTrace {
    std::vector<LayerTrace> layers;
};

struct LinkTrace {
    std::vector<LayerTrace> bev;
    std::vector<LayerTrace> fv;
    std::vector<double> fusion_input;
};

struct ScoreCache {
    std::shared_ptr<const GraphFeatures> features;
    std::vector<DetTrace> dets;
    std::vector<LinkTrace> links;
    int detection_count = 0;
    int link_count = 0;
};

struct ScoredGraph {
    std::vector<double> theta;
    ScoreCache cache;
};

// Throws NumericalError naming the scorer on a non-finite activation.
ScoredGraph score_graph(const CostModel& model, const AssociationGraph& graph,
                        std::shared_ptr<const GraphFeatures> features);
ScoredGraph score_graph(const CostModel& model, const AssociationGraph& graph, const TrackSequence& seq);

// Single-pair and single-detection scores, outside of any graph.
double score_link(const CostModel& model, const PairFeatures& features);
double score_detection(const CostModel& model, std::span<const double> det_input);

// Gradient of dtheta . theta with respect to every parameter.
Gradient backward(const CostModel& model, const ScoreCache& cache, std::span<const double> dtheta);
// Same, accumulated into an existing gradient.
void backward_accumulate(const CostModel& model, const ScoreCache& cache, std::span<const double> dtheta,
                         Gradient& grad);

// Per-detection and per-link gradients used by the piecewise classifiers.
void backward_detection(const CostModel& model, std::span<const double> det_input, double dscore, Gradient& grad);
void backward_link(const CostModel& model, const PairFeatures& features, double dscore, Gradient& grad);

// Flat checkpoint: "DSMT", u32 version, u32 tensor count, then per tensor
// (u32 name length, name bytes, u32 rank, u64 dims...), then every tensor's
// values as little-endian f64, row-major, in table order.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::string serialize_model(const CostModel& model);
CostModel deserialize_model(std::string_view bytes);

} // namespace dsmt
