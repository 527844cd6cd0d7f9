#include "dsmt/scoring.hpp"

#include "dsmt/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <map>
#include <string>

namespace dsmt {

namespace {

double activate(Activation act, double x) {
    switch (act) {
    case Activation::identity: return x;
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    }
    return x;
}

double activation_slope(Activation act, double pre, double out) {
    switch (act) {
    case Activation::identity: return 1.0;
    case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - out * out;
    }
    return 1.0;
}

void finish_layer(const DenseLayer& layer, LayerTrace& t) {
    t.out.resize(t.pre.size());
    for (std::size_t o = 0; o < t.pre.size(); ++o) t.out[o] = activate(layer.activation, t.pre[o]);
}

void forward_dense(const DenseLayer& layer, std::span<const double> x, LayerTrace& t) {
    if (static_cast<int>(x.size()) != layer.in) throw StructuralError("dense layer input size mismatch");
    t.pre.assign(layer.bias.begin(), layer.bias.end());
    for (int o = 0; o < layer.out; ++o) {
        const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
        double s = 0.0;
        for (int i = 0; i < layer.in; ++i) s += w[i] * x[i];
        t.pre[o] += s;
    }
    finish_layer(layer, t);
}

void forward_sparse(const DenseLayer& layer, const SparseBinary& x, LayerTrace& t) {
    if (x.length != layer.in) throw StructuralError("branch input size mismatch");
    t.pre.assign(layer.bias.begin(), layer.bias.end());
    for (int o = 0; o < layer.out; ++o) {
        const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
        double s = 0.0;
        for (auto i : x.active) s += w[i];
        t.pre[o] += s;
    }
    finish_layer(layer, t);
}

// dout -> gradient into `grad`, returns d(input) when wanted.
std::vector<double> backward_dense(const DenseLayer& layer, std::span<const double> x, const LayerTrace& t,
                                   std::span<const double> dout, DenseLayer& grad, bool want_dx) {
    std::vector<double> dx(want_dx ? static_cast<std::size_t>(layer.in) : 0, 0.0);
    for (int o = 0; o < layer.out; ++o) {
        const double dpre = dout[o] * activation_slope(layer.activation, t.pre[o], t.out[o]);
        if (dpre == 0.0) continue;
        grad.bias[o] += dpre;
        double* gw = grad.weights.data() + static_cast<std::size_t>(o) * layer.in;
        const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) {
            gw[i] += dpre * x[i];
            if (want_dx) dx[i] += dpre * w[i];
        }
    }
    return dx;
}

void backward_sparse(const DenseLayer& layer, const SparseBinary& x, const LayerTrace& t,
                     std::span<const double> dout, DenseLayer& grad) {
    for (int o = 0; o < layer.out; ++o) {
        const double dpre = dout[o] * activation_slope(layer.activation, t.pre[o], t.out[o]);
        if (dpre == 0.0) continue;
        grad.bias[o] += dpre;
        double* gw = grad.weights.data() + static_cast<std::size_t>(o) * layer.in;
        for (auto i : x.active) gw[i] += dpre;
    }
}

void check_trace(const LayerTrace& t, const char* scorer) {
    for (double v : t.out) {
        if (!std::isfinite(v)) throw NumericalError(std::string("non-finite activation in ") + scorer);
    }
}

double forward_det(const CostModel& model, std::span<const double> input, DetTrace& trace) {
    const auto& layers = model.det.layers;
    trace.layers.resize(layers.size());
    std::span<const double> x = input;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        forward_dense(layers[k], x, trace.layers[k]);
        check_trace(trace.layers[k], "detection scorer");
        x = trace.layers[k].out;
    }
    return trace.layers.back().out[0];
}

void forward_branch(const std::vector<DenseLayer>& layers, const SparseBinary& input,
                    std::vector<LayerTrace>& trace, const char* name) {
    trace.resize(layers.size());
    for (std::size_t k = 0; k < layers.size(); ++k) {
        if (k == 0) {
            forward_sparse(layers[k], input, trace[k]);
        } else {
            forward_dense(layers[k], trace[k - 1].out, trace[k]);
        }
        check_trace(trace[k], name);
    }
}

double forward_link(const CostModel& model, const PairFeatures& f, LinkTrace& trace) {
    const auto& m = model.link;
    if (f.appearance_sim.size() != m.appearance_weights.size()) {
        throw StructuralError("appearance similarity has the wrong block count");
    }
    forward_branch(m.bev_branch, f.bev_product, trace.bev, "bird's-eye branch");
    forward_branch(m.fv_branch, f.fv_product, trace.fv, "frontal-view branch");
    auto& z = trace.fusion_input;
    z.clear();
    for (std::size_t l = 0; l < f.appearance_sim.size(); ++l) z.push_back(m.appearance_weights[l] * f.appearance_sim[l]);
    z.insert(z.end(), trace.bev.back().out.begin(), trace.bev.back().out.end());
    z.insert(z.end(), trace.fv.back().out.begin(), trace.fv.back().out.end());
    LayerTrace fused;
    forward_dense(m.fusion, z, fused);
    check_trace(fused, "match scorer fusion");
    return fused.out[0];
}

void backward_det_trace(const CostModel& model, std::span<const double> input, const DetTrace& trace,
                        double dscore, Gradient& grad) {
    const auto& layers = model.det.layers;
    std::vector<double> dout{dscore};
    for (std::size_t k = layers.size(); k-- > 0;) {
        const std::span<const double> x = k == 0 ? input : std::span<const double>(trace.layers[k - 1].out);
        dout = backward_dense(layers[k], x, trace.layers[k], dout, grad.det.layers[k], k > 0);
    }
}

void backward_branch(const std::vector<DenseLayer>& layers, const SparseBinary& input,
                     const std::vector<LayerTrace>& trace, std::vector<double> dout, std::vector<DenseLayer>& grads) {
    for (std::size_t k = layers.size(); k-- > 0;) {
        if (k == 0) {
            backward_sparse(layers[0], input, trace[0], dout, grads[0]);
        } else {
            dout = backward_dense(layers[k], trace[k - 1].out, trace[k], dout, grads[k], true);
        }
    }
}

void backward_link_trace(const CostModel& model, const PairFeatures& f, const LinkTrace& trace, double dscore,
                         Gradient& grad) {
    const auto& m = model.link;
    // Fusion is identity with a single output.
    LayerTrace fused;
    fused.pre = {0.0};
    fused.out = {0.0};
    const std::vector<double> dz =
        backward_dense(m.fusion, trace.fusion_input, fused, std::vector<double>{dscore}, grad.link.fusion, true);
    const std::size_t blocks = f.appearance_sim.size();
    for (std::size_t l = 0; l < blocks; ++l) grad.link.appearance_weights[l] += dz[l] * f.appearance_sim[l];
    const std::size_t bev_out = trace.bev.back().out.size();
    const std::size_t fv_out = trace.fv.back().out.size();
    backward_branch(m.bev_branch, f.bev_product, trace.bev,
                    std::vector<double>(dz.begin() + blocks, dz.begin() + blocks + bev_out), grad.link.bev_branch);
    backward_branch(m.fv_branch, f.fv_product, trace.fv,
                    std::vector<double>(dz.begin() + blocks + bev_out, dz.begin() + blocks + bev_out + fv_out),
                    grad.link.fv_branch);
}

std::vector<DenseLayer> make_branch(int in, const std::vector<int>& widths) {
    std::vector<DenseLayer> layers;
    for (int w : widths) {
        layers.emplace_back(in, w, Activation::relu);
        in = w;
    }
    return layers;
}

void append_layer(std::vector<TensorRef>& out, const std::string& prefix, DenseLayer& layer) {
    out.push_back({prefix + ".weight", {static_cast<std::size_t>(layer.out), static_cast<std::size_t>(layer.in)},
                   layer.weights});
    out.push_back({prefix + ".bias", {static_cast<std::size_t>(layer.out)}, layer.bias});
}

} // namespace

void ModelConfig::validate() const {
    if (blocks <= 0 || block_length <= 0) throw ConfigError("appearance blocks and block length must be positive");
    if (bev_hidden.empty() || fv_hidden.empty()) throw ConfigError("spatial branches need at least one layer");
    for (const auto* widths : {&det_hidden, &bev_hidden, &fv_hidden}) {
        for (int w : *widths) {
            if (w <= 0) throw ConfigError("layer widths must be positive");
        }
    }
    features.bev.validate();
    features.fv.validate();
}

std::vector<double> detection_input(const Detection& d) {
    std::vector<double> x(d.appearance.values().begin(), d.appearance.values().end());
    const auto& b = d.box3d;
    x.push_back(std::hypot(b.center_x, b.center_y) / 10.0);
    x.push_back(b.volume() / 10.0);
    x.push_back(b.yaw / kPi);
    x.push_back(d.box2d.area() / 1e4);
    return x;
}

CostModel CostModel::create(const ModelConfig& config) {
    config.validate();
    CostModel m;
    m.config = config;
    int in = config.blocks * config.block_length + kGeometryFeatureCount;
    for (int w : config.det_hidden) {
        m.det.layers.emplace_back(in, w, Activation::relu);
        in = w;
    }
    m.det.layers.emplace_back(in, 1, Activation::identity);

    m.link.appearance_weights.assign(static_cast<std::size_t>(config.blocks), 0.0);
    m.link.bev_branch = make_branch(config.features.bev.cell_count(), config.bev_hidden);
    m.link.fv_branch = make_branch(config.features.fv.cell_count(), config.fv_hidden);
    m.link.fusion = DenseLayer(config.blocks + config.bev_hidden.back() + config.fv_hidden.back(), 1,
                               Activation::identity);
    return m;
}

CostModel CostModel::zeros_like() const { return create(config); }

std::vector<TensorRef> CostModel::tensors() {
    std::vector<TensorRef> out;
    for (std::size_t k = 0; k < det.layers.size(); ++k) append_layer(out, "det." + std::to_string(k), det.layers[k]);
    out.push_back({"link.appearance_weights", {link.appearance_weights.size()}, link.appearance_weights});
    for (std::size_t k = 0; k < link.bev_branch.size(); ++k) {
        append_layer(out, "link.bev." + std::to_string(k), link.bev_branch[k]);
    }
    for (std::size_t k = 0; k < link.fv_branch.size(); ++k) {
        append_layer(out, "link.fv." + std::to_string(k), link.fv_branch[k]);
    }
    append_layer(out, "link.fusion", link.fusion);
    out.push_back({"theta_new", {1}, std::span<double>(&theta_new, 1)});
    out.push_back({"theta_end", {1}, std::span<double>(&theta_end, 1)});
    return out;
}

std::vector<ConstTensorRef> CostModel::tensors() const {
    std::vector<ConstTensorRef> out;
    for (auto& t : const_cast<CostModel*>(this)->tensors()) out.push_back({t.name, t.shape, t.data});
    return out;
}

std::size_t CostModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors()) n += t.data.size();
    return n;
}

void CostModel::check_finite() const {
    for (const auto& t : tensors()) {
        for (double v : t.data) {
            if (!std::isfinite(v)) throw NumericalError("non-finite parameter in " + t.name);
        }
    }
}

void init_truncated_normal(CostModel& model, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, stddev);
    auto draw = [&] {
        while (true) {
            const double v = normal(rng);
            if (std::abs(v) <= 2.0 * stddev) return v;
        }
    };
    for (auto& t : model.tensors()) {
        const bool is_bias = t.name.size() >= 5 && t.name.compare(t.name.size() - 5, 5, ".bias") == 0;
        for (double& v : t.data) v = is_bias ? 0.0 : draw();
    }
}

GraphFeatures compute_graph_features(const AssociationGraph& graph, const TrackSequence& seq,
                                     const ModelConfig& config) {
    const auto& layout = graph.layout;
    const int n = layout.detection_count();
    GraphFeatures gf;
    gf.det_inputs.reserve(static_cast<std::size_t>(n));

    // Each detection is rasterized once as the later member of a pair and
    // once, ego-compensated, as the earlier member.
    std::vector<SparseBinary> bev_now(n), fv_now(n), bev_moved(n), fv_moved(n);
    const int last_frame = static_cast<int>(seq.frame_count()) - 1;
    for (int j = 0; j < n; ++j) {
        const auto& ref = layout.detections()[j];
        const Detection& d = seq.frames[ref.frame_idx][ref.index_in_frame];
        if (d.appearance.block_count() != static_cast<std::size_t>(config.blocks) ||
            d.appearance.block_length() != static_cast<std::size_t>(config.block_length)) {
            throw StructuralError("detection " + std::to_string(d.det_id) + " appearance shape does not match the model");
        }
        gf.det_inputs.push_back(detection_input(d));
        if (!layout.incoming(j).empty()) {
            bev_now[j] = rasterize_bev(d.box3d, config.features.bev).cells;
            fv_now[j] = rasterize_fv(d.box3d, seq.camera, config.features.fv).cells;
        }
        if (!layout.outgoing(j).empty() && ref.frame_idx < last_frame) {
            const Box3D moved = compensate_ego(d.box3d, seq.ego[ref.frame_idx + 1]);
            bev_moved[j] = rasterize_bev(moved, config.features.bev).cells;
            fv_moved[j] = rasterize_fv(moved, seq.camera, config.features.fv).cells;
        }
    }
    gf.links.reserve(static_cast<std::size_t>(layout.link_count()));
    for (const auto& lk : layout.links()) {
        const auto& ra = layout.detections()[lk.from];
        const auto& rb = layout.detections()[lk.to];
        PairFeatures f;
        f.appearance_sim = appearance_similarity(seq.frames[ra.frame_idx][ra.index_in_frame].appearance,
                                                 seq.frames[rb.frame_idx][rb.index_in_frame].appearance);
        f.bev_product = multiply(bev_moved[lk.from], bev_now[lk.to]);
        f.fv_product = multiply(fv_moved[lk.from], fv_now[lk.to]);
        gf.links.push_back(std::move(f));
    }
    return gf;
}

ScoredGraph score_graph(const CostModel& model, const AssociationGraph& graph,
                        std::shared_ptr<const GraphFeatures> features) {
    const auto& layout = graph.layout;
    const int n = layout.detection_count();
    const int m = layout.link_count();
    if (static_cast<int>(features->det_inputs.size()) != n || static_cast<int>(features->links.size()) != m) {
        throw StructuralError("graph features were computed for a different graph");
    }
    ScoredGraph out;
    out.theta.assign(static_cast<std::size_t>(layout.size()), 0.0);
    out.cache.detection_count = n;
    out.cache.link_count = m;
    out.cache.dets.resize(static_cast<std::size_t>(n));
    out.cache.links.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < n; ++j) {
        out.theta[layout.det_var(j)] = forward_det(model, features->det_inputs[j], out.cache.dets[j]);
        out.theta[layout.new_var(j)] = model.theta_new;
        out.theta[layout.end_var(j)] = model.theta_end;
    }
    for (int l = 0; l < m; ++l) {
        out.theta[layout.link_var(l)] = forward_link(model, features->links[l], out.cache.links[l]);
    }
    out.cache.features = std::move(features);
    return out;
}

ScoredGraph score_graph(const CostModel& model, const AssociationGraph& graph, const TrackSequence& seq) {
    return score_graph(model, graph,
                       std::make_shared<const GraphFeatures>(compute_graph_features(graph, seq, model.config)));
}

double score_link(const CostModel& model, const PairFeatures& features) {
    LinkTrace trace;
    return forward_link(model, features, trace);
}

double score_detection(const CostModel& model, std::span<const double> det_input) {
    DetTrace trace;
    return forward_det(model, det_input, trace);
}

void backward_accumulate(const CostModel& model, const ScoreCache& cache, std::span<const double> dtheta,
                         Gradient& grad) {
    const int n = cache.detection_count;
    const int m = cache.link_count;
    if (static_cast<int>(dtheta.size()) != 3 * n + m) {
        throw StructuralError("dtheta has " + std::to_string(dtheta.size()) + " entries, expected " +
                              std::to_string(3 * n + m));
    }
    const auto& f = *cache.features;
    for (int j = 0; j < n; ++j) {
        if (dtheta[j] != 0.0) backward_det_trace(model, f.det_inputs[j], cache.dets[j], dtheta[j], grad);
        grad.theta_new += dtheta[n + m + j];
        grad.theta_end += dtheta[2 * n + m + j];
    }
    for (int l = 0; l < m; ++l) {
        if (dtheta[n + l] != 0.0) backward_link_trace(model, f.links[l], cache.links[l], dtheta[n + l], grad);
    }
}

Gradient backward(const CostModel& model, const ScoreCache& cache, std::span<const double> dtheta) {
    Gradient g = model.zeros_like();
    backward_accumulate(model, cache, dtheta, g);
    return g;
}

void backward_detection(const CostModel& model, std::span<const double> det_input, double dscore, Gradient& grad) {
    DetTrace trace;
    forward_det(model, det_input, trace);
    backward_det_trace(model, det_input, trace, dscore, grad);
}

void backward_link(const CostModel& model, const PairFeatures& features, double dscore, Gradient& grad) {
    LinkTrace trace;
    forward_link(model, features, trace);
    backward_link_trace(model, features, trace, dscore, grad);
}

// ---------------------------------------------------------------------------
// Checkpoint encoding

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::uint64_t get(int width) {
        if (pos_ + width > bytes_.size()) throw DataError("checkpoint truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += width;
        return v;
    }
    std::string text(std::size_t n) {
        if (pos_ + n > bytes_.size()) throw DataError("checkpoint truncated");
        std::string s(bytes_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

struct Table {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

std::vector<Table> meta_tensors(const ModelConfig& c) {
    return {
        {"meta.model", {2}, {double(c.blocks), double(c.block_length)}},
        {"meta.bev_grid",
         {5},
         {double(c.features.bev.rows), double(c.features.bev.cols), c.features.bev.meters_per_cell,
          c.features.bev.x_min, c.features.bev.y_min}},
        {"meta.fv_grid", {2}, {double(c.features.fv.rows), double(c.features.fv.cols)}},
    };
}

} // namespace

std::string serialize_model(const CostModel& model) {
    std::vector<Table> tables = meta_tensors(model.config);
    for (const auto& t : model.tensors()) tables.push_back({t.name, t.shape, {t.data.begin(), t.data.end()}});

    std::string out = "DSMT";
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(tables.size()));
    for (const auto& t : tables) {
        put_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out += t.name;
        put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) put_u64(out, d);
    }
    for (const auto& t : tables) {
        for (double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

CostModel deserialize_model(std::string_view bytes) {
    Reader in(bytes);
    if (in.text(4) != "DSMT") throw DataError("not a checkpoint (bad magic)");
    const auto version = in.get(4);
    if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
    const auto count = in.get(4);
    std::vector<Table> tables(count);
    for (auto& t : tables) {
        t.name = in.text(in.get(4));
        const auto rank = in.get(4);
        std::size_t total = 1;
        for (std::uint64_t r = 0; r < rank; ++r) {
            t.shape.push_back(in.get(8));
            total *= t.shape.back();
        }
        t.values.resize(total);
    }
    for (auto& t : tables) {
        for (double& v : t.values) v = std::bit_cast<double>(in.get(8));
    }
    if (!in.done()) throw DataError("trailing bytes after checkpoint data");

    std::map<std::string, const Table*> by_name;
    for (const auto& t : tables) by_name[t.name] = &t;
    auto need = [&](const std::string& name) -> const Table& {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw DataError("checkpoint lacks tensor " + name);
        return *it->second;
    };

    ModelConfig cfg;
    const auto& meta = need("meta.model").values;
    const auto& bev = need("meta.bev_grid").values;
    const auto& fv = need("meta.fv_grid").values;
    if (meta.size() != 2 || bev.size() != 5 || fv.size() != 2) throw DataError("malformed checkpoint metadata");
    cfg.blocks = static_cast<int>(meta[0]);
    cfg.block_length = static_cast<int>(meta[1]);
    cfg.features.bev = {static_cast<int>(bev[0]), static_cast<int>(bev[1]), bev[2], bev[3], bev[4]};
    cfg.features.fv = {static_cast<int>(fv[0]), static_cast<int>(fv[1])};
    auto widths = [&](const std::string& prefix, bool drop_last) {
        std::vector<int> w;
        for (int k = 0; by_name.count(prefix + std::to_string(k) + ".weight"); ++k) {
            const auto& t = need(prefix + std::to_string(k) + ".weight");
            if (t.shape.size() != 2) throw DataError("weight tensor must be rank 2");
            w.push_back(static_cast<int>(t.shape[0]));
        }
        if (drop_last) {
            if (w.empty()) throw DataError("checkpoint has no detection scorer layers");
            w.pop_back();
        }
        return w;
    };
    cfg.det_hidden = widths("det.", true);
    cfg.bev_hidden = widths("link.bev.", false);
    cfg.fv_hidden = widths("link.fv.", false);

    CostModel model = CostModel::create(cfg);
    auto refs = model.tensors();
    if (refs.size() + meta_tensors(cfg).size() != tables.size()) throw DataError("checkpoint has unexpected tensors");
    for (auto& r : refs) {
        const auto& t = need(r.name);
        if (t.shape != r.shape) throw DataError("tensor " + r.name + " has the wrong shape");
        std::copy(t.values.begin(), t.values.end(), r.data.begin());
    }
    return model;
}

} // namespace dsmt
